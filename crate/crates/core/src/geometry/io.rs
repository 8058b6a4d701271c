//! CSV encoding of point clouds and value columns.
//!
//! A point file has header `x0,x1,...,x{d-1}` followed by one point per row.
//! Extra named columns (manifold parameters `u0..`, values, derivatives) may
//! follow the coordinates. Numbers are written in scientific notation with 17
//! significant digits, which round-trips every `f64` exactly.

use std::io::{Read, Write};

use super::cloud::PointCloud;
use crate::error::{Error, Result};

/// A named numeric table: column headers and row-major values.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Number of leading `x0, x1, ...` coordinate columns.
    pub fn coordinate_dim(&self) -> usize {
        self.headers.iter().enumerate().take_while(|(j, h)| **h == format!("x{j}")).count()
    }

    /// The coordinate columns as a Euclidean cloud.
    pub fn to_cloud(&self) -> Result<PointCloud> {
        let d = self.coordinate_dim();
        if d == 0 {
            return Err(Error::arg("table has no x0.. coordinate columns"));
        }
        PointCloud::from_flat(d, self.rows.iter().flat_map(|r| r[..d].iter().copied()).collect())
    }
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn coordinate_headers(dim: usize) -> Vec<String> {
    (0..dim).map(|j| format!("x{j}")).collect()
}

pub fn write_table<W: Write>(writer: W, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&table.headers)?;
    for (i, row) in table.rows.iter().enumerate() {
        if row.len() != table.headers.len() {
            return Err(Error::arg(format!("row {i} has {} fields, header has {}", row.len(), table.headers.len())));
        }
        w.write_record(row.iter().map(|v| format_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::arg(format!("row {i}: cannot parse {f:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

/// Write a cloud with optional extra columns appended after the coordinates.
pub fn write_points<W: Write>(writer: W, cloud: &PointCloud, extra: &[(String, Vec<f64>)]) -> Result<()> {
    let mut headers = coordinate_headers(cloud.dim());
    for (name, col) in extra {
        if col.len() != cloud.len() {
            return Err(Error::arg(format!("column {name} has {} rows, cloud has {}", col.len(), cloud.len())));
        }
        headers.push(name.clone());
    }
    let rows = cloud
        .points()
        .enumerate()
        .map(|(i, p)| {
            let mut row = p.to_vec();
            row.extend(extra.iter().map(|(_, col)| col[i]));
            row
        })
        .collect();
    write_table(writer, &Table { headers, rows })
}

pub fn read_points<R: Read>(reader: R) -> Result<PointCloud> {
    read_table(reader)?.to_cloud()
}
