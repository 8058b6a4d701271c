use crate::geometry::MultiIndex;

/// `∂^deriv [(x − center)^α / h^{|α|}]` at `x`.
pub fn scaled_monomial(alpha: &MultiIndex, x: &[f64], center: &[f64], h: f64, deriv: &MultiIndex) -> f64 {
    let Some(rest) = alpha.checked_sub(deriv) else {
        return 0.0;
    };
    let falling: f64 = alpha
        .entries()
        .iter()
        .zip(deriv.entries())
        .map(|(&a, &b)| ((a - b + 1)..=a).map(f64::from).product::<f64>())
        .product();
    let offset: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    falling * rest.monomial(&offset) / h.powi(alpha.order() as i32)
}

/// The basis vector `p(x)` for the given multi-indices, from the offset `x − center`.
pub fn basis_values(indices: &[MultiIndex], offset: &[f64], h: f64) -> Vec<f64> {
    let scaled: Vec<f64> = offset.iter().map(|v| v / h).collect();
    indices.iter().map(|m| m.monomial(&scaled)).collect()
}
