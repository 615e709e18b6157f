//! Copula estimators built on block maxima: sliding and disjoint empirical
//! copulas, aggregation over block sizes, bias corrections and estimators of
//! the second-order parameter.
//!
//! Each estimator comes in two layers. The `*_values` functions combine
//! already computed per-block-size estimates and are pure arithmetic; the
//! data-level functions pull those estimates from an [`EstimateCache`].

mod bias;
mod empirical;
mod rho;

pub use bias::{
    aggregate_values, aggregated_estimator, bc_aggregated, bc_aggregated_values, bc_naive,
    bc_naive_values, bc_regression, bc_regression_values, RegressionFit,
};
pub use empirical::{
    disjoint_estimator, empirical_copula, empirical_copula_grid, sliding_estimator, EstimateCache,
};
pub use rho::{
    profile_rss, rho_naive, rho_naive_values, rho_pen_aggregated, rho_penalized,
    rho_penalized_values, RhoAggregate, RhoConfig, RhoValue,
};

use crate::error::{invalid, Error, Result};

/// Finite set of evaluation points in `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points.first().map_or(0, Vec::len);
        if points.is_empty() || d == 0 {
            return Err(invalid("grid must contain at least one point"));
        }
        for p in &points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(invalid(format!("grid point {p:?} outside [0, 1]^d")));
            }
        }
        Ok(Self { d, points })
    }

    /// Cartesian product `values^d`, first coordinate varying slowest.
    pub fn product(values: &[f64], d: usize) -> Result<Self> {
        if values.is_empty() || d == 0 {
            return Err(invalid("product grid needs values and a dimension"));
        }
        let mut points: Vec<Vec<f64>> = vec![vec![]];
        for _ in 0..d {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Self::new(points)
    }

    /// Points `(v, ..., v)` for each value.
    pub fn diagonal(values: &[f64], d: usize) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v; d]).collect())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }
}

/// Values `lo, lo + step, ..., <= hi`, each rounded to 12 decimals so that
/// `0.1:0.9:0.1` yields exactly the literals `0.1, ..., 0.9`.
pub fn range_values(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && lo <= hi) {
        return Err(invalid(format!("bad range {lo}:{hi}:{step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Parses `lo:hi:step`.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("expected lo:hi:step, got '{s}'")));
    }
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number '{t}' in range '{s}'")))
    };
    range_values(num(parts[0])?, num(parts[1])?, num(parts[2])?)
}

/// Block sizes with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    block_set: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightScheme {
    /// Normalises `raw` weights over `block_set`. Block sizes must be
    /// distinct and positive; weights positive and finite.
    pub fn new(block_set: Vec<usize>, raw: Vec<f64>) -> Result<Self> {
        if block_set.is_empty() {
            return Err(invalid("block set must not be empty"));
        }
        if block_set.len() != raw.len() {
            return Err(Error::DimensionMismatch {
                expected: block_set.len(),
                got: raw.len(),
            });
        }
        if block_set.contains(&0) {
            return Err(invalid("block sizes must be >= 1"));
        }
        let mut sorted = block_set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != block_set.len() {
            return Err(invalid(format!("block set {block_set:?} has duplicates")));
        }
        if raw.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("weights must be positive and finite"));
        }
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        Ok(Self { block_set, weights })
    }

    /// `w_k = k^-1 / sum_l l^-1`.
    pub fn harmonic(block_set: Vec<usize>) -> Result<Self> {
        let raw = block_set.iter().map(|&k| 1.0 / k as f64).collect();
        Self::new(block_set, raw)
    }

    pub fn uniform(block_set: Vec<usize>) -> Result<Self> {
        let raw = vec![1.0; block_set.len()];
        Self::new(block_set, raw)
    }

    pub fn block_set(&self) -> &[usize] {
        &self.block_set
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.block_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_set.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.block_set.iter().cloned().zip(self.weights.iter().cloned())
    }
}

/// Named weighting rule for a block set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    Harmonic,
    Uniform,
}

impl WeightRule {
    pub fn apply(self, block_set: Vec<usize>) -> Result<WeightScheme> {
        match self {
            WeightRule::Harmonic => WeightScheme::harmonic(block_set),
            WeightRule::Uniform => WeightScheme::uniform(block_set),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightRule::Harmonic => "harmonic",
            WeightRule::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for WeightRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "harmonic" => Ok(WeightRule::Harmonic),
            "uniform" => Ok(WeightRule::Uniform),
            other => Err(Error::Parse(format!("unknown weight rule '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_examples() {
        let w = WeightScheme::harmonic(vec![10, 20]).unwrap();
        assert!((w.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(WeightScheme::harmonic(vec![7]).unwrap().weights(), &[1.0]);
        let w = WeightScheme::harmonic((1..=5).collect()).unwrap();
        for (k, wk) in w.iter() {
            assert!((wk - 60.0 / (137.0 * k as f64)).abs() < 1e-15);
        }
        let w = WeightScheme::harmonic((10..=19).collect()).unwrap();
        assert!((w.weights()[0] - 0.1 / 0.7187714032).abs() < 1e-9);
        assert!((w.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weight_validation() {
        assert!(WeightScheme::harmonic(vec![]).is_err());
        assert!(WeightScheme::harmonic(vec![3, 3]).is_err());
        assert!(WeightScheme::harmonic(vec![0, 3]).is_err());
        assert!(WeightScheme::new(vec![1, 2], vec![1.0, -1.0]).is_err());
        let u = WeightScheme::uniform(vec![2, 4, 8, 16]).unwrap();
        assert!(u.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn grids() {
        let g = Grid::product(&[0.25, 0.5, 0.75], 4).unwrap();
        assert_eq!(g.len(), 81);
        assert_eq!(g.point(1), &[0.25, 0.25, 0.25, 0.5]);
        let v = parse_range("0.1:0.9:0.1").unwrap();
        assert_eq!(v, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        assert_eq!(parse_range("0.01:0.99:0.01").unwrap().len(), 99);
        assert_eq!(range_values(0.1, 0.5, 0.01).unwrap().len(), 41);
        assert!(Grid::new(vec![vec![0.5, 1.2]]).is_err());
        assert!(parse_range("0.1:0.9").is_err());
    }
}
