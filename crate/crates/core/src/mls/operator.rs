use crate::error::{Error, Result};
use crate::geometry::MultiIndex;

/// A constant-coefficient linear differential operator `Q = Σ q_α ∂^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialOperator {
    terms: Vec<(MultiIndex, f64)>,
}

impl DifferentialOperator {
    pub fn new(terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        let Some(dim) = terms.first().map(|(m, _)| m.dim()) else {
            return Err(Error::arg("differential operator needs at least one term"));
        };
        if terms.iter().any(|(m, _)| m.dim() != dim) {
            return Err(Error::arg("operator terms have mixed dimensions"));
        }
        if terms.iter().any(|(_, q)| !q.is_finite()) {
            return Err(Error::arg("operator coefficients must be finite"));
        }
        if terms.iter().all(|(_, q)| *q == 0.0) {
            return Err(Error::arg("differential operator needs a nonzero coefficient"));
        }
        Ok(DifferentialOperator { terms })
    }

    pub fn identity(dim: usize) -> Self {
        DifferentialOperator { terms: vec![(MultiIndex::zero(dim), 1.0)] }
    }

    pub fn partial(dim: usize, axis: usize) -> Self {
        DifferentialOperator { terms: vec![(MultiIndex::unit(dim, axis), 1.0)] }
    }

    pub fn laplacian(dim: usize) -> Self {
        let terms = (0..dim)
            .map(|j| {
                let mut e = vec![0; dim];
                e[j] = 2;
                (MultiIndex::new(e), 1.0)
            })
            .collect();
        DifferentialOperator { terms }
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].0.dim()
    }

    /// Highest order among terms with a nonzero coefficient.
    pub fn order(&self) -> usize {
        self.terms.iter().filter(|(_, q)| *q != 0.0).map(|(m, _)| m.order()).max().unwrap_or(0)
    }
}
