use std::fmt;

/// A d-tuple of nonnegative integers, used both as a monomial exponent and as
/// a partial-derivative order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit multi-index `e_axis` in `dim` dimensions.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |α| = Σ α_j.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self - other`, or `None` when some component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// α! = Π α_j!.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    /// Multinomial binomial coefficient C(α, β) = Π C(α_j, β_j); zero unless β ≤ α.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        if !beta.le(self) {
            return 0.0;
        }
        self.0.iter().zip(&beta.0).map(|(&a, &b)| factorial(a) / (factorial(b) * factorial(a - b))).product()
    }

    /// x^α for a point `x` of matching dimension.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product()
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All multi-indices in `dim` variables with |α| ≤ `max_order`, in graded
/// lexicographic order: by total order first, then lexicographically.
/// The result has C(dim + max_order, dim) entries.
pub fn enumerate_multi_indices(dim: usize, max_order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for order in 0..=max_order {
        let mut level = Vec::new();
        let mut current = vec![0u32; dim];
        compositions(dim, order as u32, 0, &mut current, &mut level);
        level.sort();
        out.extend(level.into_iter().map(MultiIndex));
    }
    out
}

fn compositions(dim: usize, remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if dim == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == dim - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        compositions(dim, remaining - v, pos + 1, current, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn graded_lex_order_in_two_dims() {
        let got: Vec<Vec<u32>> = enumerate_multi_indices(2, 2).into_iter().map(|m| m.0).collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn small_cases() {
        assert_eq!(enumerate_multi_indices(1, 0), vec![MultiIndex::new(vec![0])]);
        assert_eq!(enumerate_multi_indices(3, 2).len(), 10);
    }

    #[test]
    fn cardinality_matches_binomial() {
        for d in 1..=5 {
            for k in 0..=6 {
                let all = enumerate_multi_indices(d, k);
                assert_eq!(all.len(), binom(d + k, d), "d={d} k={k}");
                assert!(all.iter().all(|m| m.dim() == d && m.order() <= k));
                assert!(all.windows(2).all(|w| w[0].order() <= w[1].order()));
            }
        }
    }

    #[test]
    fn order_and_binomial() {
        let a = MultiIndex::new(vec![2, 1]);
        assert_eq!(a.order(), 3);
        assert_eq!(a.factorial(), 2.0);
        assert_eq!(a.binomial(&MultiIndex::new(vec![1, 1])), 2.0);
        assert_eq!(a.binomial(&MultiIndex::new(vec![0, 2])), 0.0);
        assert_eq!(a.checked_sub(&MultiIndex::new(vec![1, 0])), Some(MultiIndex::new(vec![1, 1])));
        assert_eq!(a.to_string(), "(2,1)");
    }
}
