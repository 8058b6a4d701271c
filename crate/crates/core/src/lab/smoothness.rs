use crate::error::{Error, Result};
use crate::geometry::MultiIndex;
use crate::mls::MlsModel;

/// Coarse steps are this many fine steps.
const COARSE_FACTOR: usize = 10;

/// Findings for one derivative order `j` along the probe line.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderReport {
    pub order: usize,
    /// `max |v(x_{m+1}) − v(x_m)| / δ` on the fine grid.
    pub jump_fine: f64,
    /// The same on the grid with step `10 δ`.
    pub jump_coarse: f64,
    /// Max over steps of `|dd − ½(v'(x_m) + v'(x_{m+1}))| / max(1, |½(v'(x_m) + v'(x_{m+1}))|)`,
    /// where `dd` is the divided difference of this order and `v'` the next
    /// analytic derivative; `None` for the top order.
    pub divided_difference_error: Option<f64>,
}

impl OrderReport {
    /// Fine over coarse normalized jump: close to 1 when the derivative is
    /// Lipschitz along the line, close to 10 across a jump.
    pub fn jump_ratio(&self) -> f64 {
        if self.jump_coarse == 0.0 {
            if self.jump_fine == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.jump_fine / self.jump_coarse
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub grid_step: f64,
    pub grid_points: usize,
    /// Steps across which the neighbor set changes.
    pub neighbor_transitions: usize,
    pub orders: Vec<OrderReport>,
    /// Max |∂^j s| for j ≥ 1 over the grid (0 for constant data).
    pub max_higher_derivative: f64,
}

impl SmoothnessReport {
    /// Bounded normalized jumps (ratio ≤ `max_jump_ratio`) at every order and
    /// divided differences within `tol` of the analytic derivatives.
    pub fn passes(&self, max_jump_ratio: f64, tol: f64) -> bool {
        self.orders
            .iter()
            .all(|o| o.jump_ratio() <= max_jump_ratio && o.divided_difference_error.is_none_or(|e| e <= tol))
    }
}

/// Walks the segment `start + t e_axis`, `t ∈ [0, length]`, at spacing
/// `grid_step`, evaluating `∂^j s` along the axis for `j < max_order`.
pub fn smoothness_probe(
    model: &MlsModel,
    max_order: usize,
    grid_step: f64,
    start: &[f64],
    axis: usize,
    length: f64,
) -> Result<SmoothnessReport> {
    let d = model.cloud().dim();
    if max_order == 0 || max_order > model.degree() + 1 {
        return Err(Error::arg(format!(
            "max_order must lie in 1..={} for this model, got {max_order}",
            model.degree() + 1
        )));
    }
    if start.len() != d || axis >= d {
        return Err(Error::arg("probe line does not match the model dimension"));
    }
    if !(grid_step > 0.0 && length > grid_step) {
        return Err(Error::arg("grid step must be positive and shorter than the probe line"));
    }
    let steps = (length / grid_step).round() as usize;
    let top = max_order - 1;
    let alphas: Vec<MultiIndex> = (0..=top)
        .map(|j| {
            let mut e = vec![0; d];
            e[axis] = j as u32;
            MultiIndex::new(e)
        })
        .collect();

    let mut values = vec![Vec::with_capacity(steps + 1); top + 1];
    let mut transitions = 0;
    let mut last_neighbors: Option<Vec<usize>> = None;
    for m in 0..=steps {
        let mut x = start.to_vec();
        x[axis] += m as f64 * grid_step;
        let sd = model.shape_derivatives(&x, top)?;
        for (j, a) in alphas.iter().enumerate() {
            values[j].push(sd.apply(a, model.values()).expect("order computed"));
        }
        if last_neighbors.as_ref().is_some_and(|l| *l != sd.fit.neighbor_indices) {
            transitions += 1;
        }
        last_neighbors = Some(sd.fit.neighbor_indices);
    }

    let jump = |v: &[f64], stride: usize| {
        let h = grid_step * stride as f64;
        v.iter()
            .step_by(stride)
            .zip(v.iter().step_by(stride).skip(1))
            .map(|(a, b)| (b - a).abs() / h)
            .fold(0.0, f64::max)
    };
    let orders = (0..=top)
        .map(|j| {
            let v = &values[j];
            let divided_difference_error = (j < top).then(|| {
                let next = &values[j + 1];
                (0..steps)
                    .map(|m| {
                        let dd = (v[m + 1] - v[m]) / grid_step;
                        let trap = 0.5 * (next[m] + next[m + 1]);
                        (dd - trap).abs() / trap.abs().max(1.0)
                    })
                    .fold(0.0, f64::max)
            });
            OrderReport {
                order: j,
                jump_fine: jump(v, 1),
                jump_coarse: jump(v, COARSE_FACTOR),
                divided_difference_error,
            }
        })
        .collect();
    let max_higher_derivative = values[1..].iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(SmoothnessReport {
        grid_step,
        grid_points: steps + 1,
        neighbor_transitions: transitions,
        orders,
        max_higher_derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::mls::{Bandwidth, MlsConfig};
    use crate::sampling::{sample_iid, Density};

    fn model(values: impl Fn(f64) -> f64) -> MlsModel {
        let cloud = sample_iid(&Density::uniform(), &Domain::unit_cube(1).unwrap(), 150, 3).unwrap();
        let v = cloud.points().map(|x| values(x[0])).collect();
        let cfg = MlsConfig { degree: 2, bandwidth: Bandwidth::Fixed(0.06), ..MlsConfig::default() };
        MlsModel::new(cloud, v, cfg).unwrap()
    }

    #[test]
    fn constant_data_is_flat() {
        let rep = smoothness_probe(&model(|_| 2.5), 3, 1e-3, &[0.2], 0, 0.3).unwrap();
        assert!(rep.max_higher_derivative <= 1e-10);
    }

    #[test]
    fn rejects_too_high_order() {
        assert!(smoothness_probe(&model(|x| x), 4, 1e-3, &[0.2], 0, 0.3).is_err());
    }
}
