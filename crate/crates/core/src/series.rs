//! Stationary multivariate series: i.i.d. copula streams and moving-maximum
//! processes `U_tj = max_i W_{t-i,j}^(1/a_ij)` driven by i.i.d. innovations.

use rand::Rng;

use crate::blocks::DataMatrix;
use crate::copula::{CopulaModel, ExtremeValueCopula};
use crate::error::{invalid, Result};

/// Moving-maximum process of order `p` over an innovation copula.
///
/// Coefficients are supplied for lags `1..=p`; the lag-0 row is derived so
/// that every column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingMaxSpec {
    base: CopulaModel,
    /// `coeffs[i][j]` for lags `i = 0..=p`.
    coeffs: Vec<Vec<f64>>,
}

impl MovingMaxSpec {
    /// `lags[i - 1][j]` is the coefficient of lag `i` in coordinate `j`.
    pub fn new(base: CopulaModel, lags: Vec<Vec<f64>>) -> Result<Self> {
        let d = base.dim();
        let mut lag0 = vec![1.0; d];
        for (i, row) in lags.iter().enumerate() {
            if row.len() != d {
                return Err(invalid(format!(
                    "lag {} has {} coefficients, expected {d}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                if !(a.is_finite() && a >= 0.0) {
                    return Err(invalid(format!("coefficient a[{}][{j}] = {a} must be >= 0", i + 1)));
                }
                lag0[j] -= a;
            }
        }
        for (j, a0) in lag0.iter_mut().enumerate() {
            if *a0 < -1e-12 {
                return Err(invalid(format!(
                    "lag coefficients of coordinate {j} sum to more than one"
                )));
            }
            *a0 = a0.max(0.0);
        }
        let mut coeffs = vec![lag0];
        coeffs.extend(lags);
        Ok(Self { base, coeffs })
    }

    /// The i.i.d. stream from `base`.
    pub fn iid(base: CopulaModel) -> Self {
        let d = base.dim();
        Self {
            base,
            coeffs: vec![vec![1.0; d]],
        }
    }

    pub fn base(&self) -> &CopulaModel {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Coefficient matrix including the derived lag-0 row.
    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// `n` rows of the process after a burn-in of `p` innovation rows.
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DataMatrix> {
        if n == 0 {
            return Err(invalid("series length must be >= 1"));
        }
        let p = self.order();
        let innovations = self.base.sample(n + p, rng)?;
        if p == 0 {
            return Ok(innovations);
        }
        let d = self.dim();
        let mut columns = vec![vec![0.0; n]; d];
        for (j, col) in columns.iter_mut().enumerate() {
            let w = innovations.column(j);
            for (i, row) in self.coeffs.iter().enumerate() {
                let a = row[j];
                if a == 0.0 {
                    continue;
                }
                let inv = 1.0 / a;
                for (t, out) in col.iter_mut().enumerate() {
                    let v = if a == 1.0 { w[t + p - i] } else { w[t + p - i].powf(inv) };
                    if v > *out {
                        *out = v;
                    }
                }
            }
        }
        DataMatrix::from_columns(columns)
    }

    /// Block-maxima attractor; identical to the innovation attractor.
    pub fn attractor(&self) -> Result<ExtremeValueCopula> {
        self.base.attractor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn opc_beta() -> f64 {
        2f64.ln() / 1.75f64.ln()
    }

    fn m2() -> MovingMaxSpec {
        let base = CopulaModel::outer_power_clayton(1.0, opc_beta(), 2).unwrap();
        MovingMaxSpec::new(base, vec![vec![0.25, 0.5]]).unwrap()
    }

    #[test]
    fn lag_zero_is_derived() {
        let spec = m2();
        assert_eq!(spec.order(), 1);
        assert_eq!(spec.coefficients()[0], vec![0.75, 0.5]);
    }

    #[test]
    fn rejects_bad_coefficients() {
        let base = CopulaModel::gumbel_hougaard(2.0, 2).unwrap();
        assert!(MovingMaxSpec::new(base.clone(), vec![vec![0.6, 0.2], vec![0.5, 0.1]]).is_err());
        assert!(MovingMaxSpec::new(base.clone(), vec![vec![-0.1, 0.2]]).is_err());
        assert!(MovingMaxSpec::new(base, vec![vec![0.1]]).is_err());
    }

    #[test]
    fn order_zero_equals_innovations() {
        let base = CopulaModel::gumbel_hougaard(2.0, 2).unwrap();
        let spec = MovingMaxSpec::new(base.clone(), vec![]).unwrap();
        let a = spec.generate(100, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = base.sample(100, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_lag_zero_equals_shifted_innovations() {
        let base = CopulaModel::gumbel_hougaard(1.5, 2).unwrap();
        let spec = MovingMaxSpec::new(base.clone(), vec![vec![0.0, 0.0]]).unwrap();
        let a = spec.generate(50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let w = base.sample(51, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        for t in 0..50 {
            assert_eq!(a.row(t), w.row(t + 1));
        }
    }

    #[test]
    fn deterministic_replay() {
        let spec = m2();
        let a = spec.generate(500, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = spec.generate(500, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn attractor_matches_base() {
        match m2().attractor().unwrap() {
            ExtremeValueCopula::GumbelHougaard(g) => assert!((g.beta() - opc_beta()).abs() < 1e-15),
            other => panic!("unexpected attractor {other:?}"),
        }
    }
}
