//! Aggregation over block sizes and the three bias corrections: naive
//! two-size extrapolation, its weighted aggregate, and weighted least squares
//! on the second-order expansion `C_k ~ c + (k / m_ref)^rho b`.

use super::{EstimateCache, WeightScheme};
use crate::error::{invalid, Error, Result};

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho < 0.0) {
        return Err(invalid(format!("second-order parameter must be negative, got {rho}")));
    }
    Ok(())
}

fn check_aligned(weights: &WeightScheme, values: &[Vec<f64>]) -> Result<usize> {
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: values.len(),
        });
    }
    let g = values[0].len();
    if let Some(v) = values.iter().find(|v| v.len() != g) {
        return Err(Error::DimensionMismatch {
            expected: g,
            got: v.len(),
        });
    }
    Ok(g)
}

fn per_block(cache: &mut EstimateCache<'_>, weights: &WeightScheme) -> Result<Vec<Vec<f64>>> {
    weights.block_set().iter().map(|&k| cache.sliding(k)).collect()
}

/// `sum_k w_k C_k`, with `values[i]` the estimate at `weights.block_set()[i]`.
pub fn aggregate_values(weights: &WeightScheme, values: &[Vec<f64>]) -> Result<Vec<f64>> {
    let g = check_aligned(weights, values)?;
    let mut out = vec![0.0; g];
    for (w, v) in weights.weights().iter().zip(values) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    Ok(out)
}

/// Weighted aggregate of sliding estimators over the block set.
pub fn aggregated_estimator(cache: &mut EstimateCache<'_>, weights: &WeightScheme) -> Result<Vec<f64>> {
    let values = per_block(cache, weights)?;
    aggregate_values(weights, &values)
}

fn naive_factor(m: usize, m_prime: usize, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let denom = (m_prime as f64 / m as f64).powf(rho) - 1.0;
    if m == m_prime || denom.abs() < 1e-10 {
        return Err(Error::DegenerateDenominator {
            m,
            m_prime,
            rho,
            value: denom,
        });
    }
    Ok(1.0 / denom)
}

/// `C_m - (C_m' - C_m) / ((m'/m)^rho - 1)`.
pub fn bc_naive_values(c_m: &[f64], c_mp: &[f64], m: usize, m_prime: usize, rho: f64) -> Result<Vec<f64>> {
    if c_m.len() != c_mp.len() {
        return Err(Error::DimensionMismatch {
            expected: c_m.len(),
            got: c_mp.len(),
        });
    }
    let f = naive_factor(m, m_prime, rho)?;
    Ok(c_m.iter().zip(c_mp).map(|(&a, &b)| a - (b - a) * f).collect())
}

pub fn bc_naive(cache: &mut EstimateCache<'_>, m: usize, m_prime: usize, rho: f64) -> Result<Vec<f64>> {
    let c_m = cache.sliding(m)?;
    let c_mp = cache.sliding(m_prime)?;
    bc_naive_values(&c_m, &c_mp, m, m_prime, rho)
}

/// `sum_k w_k bc_naive(k, m')`.
pub fn bc_aggregated_values(
    m_prime: usize,
    c_mp: &[f64],
    weights: &WeightScheme,
    values: &[Vec<f64>],
    rho: f64,
) -> Result<Vec<f64>> {
    check_aligned(weights, values)?;
    let corrected = weights
        .block_set()
        .iter()
        .zip(values)
        .map(|(&k, v)| bc_naive_values(v, c_mp, k, m_prime, rho))
        .collect::<Result<Vec<_>>>()?;
    aggregate_values(weights, &corrected)
}

pub fn bc_aggregated(
    cache: &mut EstimateCache<'_>,
    m_prime: usize,
    weights: &WeightScheme,
    rho: f64,
) -> Result<Vec<f64>> {
    if weights.block_set().contains(&m_prime) {
        return Err(invalid(format!("m' = {m_prime} must not belong to the block set")));
    }
    let c_mp = cache.sliding(m_prime)?;
    let values = per_block(cache, weights)?;
    bc_aggregated_values(m_prime, &c_mp, weights, &values, rho)
}

/// Weighted least-squares fit of `C_k = c_inf + (k / m_ref)^rho b_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    /// Intercept: the bias-corrected copula estimate.
    pub c_inf: Vec<f64>,
    /// Slope: the bias term at block size `m_ref`.
    pub b_m: Vec<f64>,
    pub m_ref: usize,
}

pub fn bc_regression_values(
    weights: &WeightScheme,
    values: &[Vec<f64>],
    m_ref: usize,
    rho: f64,
) -> Result<RegressionFit> {
    check_rho(rho)?;
    let g = check_aligned(weights, values)?;
    if m_ref == 0 {
        return Err(invalid("reference block size must be >= 1"));
    }
    let x: Vec<f64> = weights
        .block_set()
        .iter()
        .map(|&k| (k as f64 / m_ref as f64).powf(rho))
        .collect();
    let w = weights.weights();
    let mu0: f64 = w.iter().sum();
    let mu1: f64 = w.iter().zip(&x).map(|(w, x)| w * x).sum();
    let mu2: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();

    let half_trace = 0.5 * (mu0 + mu2);
    let spread = (0.25 * (mu0 - mu2).powi(2) + mu1 * mu1).sqrt();
    let (hi, lo) = (half_trace + spread, half_trace - spread);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= 1e12) {
        return Err(Error::SingularMoments {
            block_set: weights.block_set().to_vec(),
            condition,
        });
    }
    let det = mu0 * mu2 - mu1 * mu1;
    let mut c_inf = vec![0.0; g];
    let mut b_m = vec![0.0; g];
    for q in 0..g {
        let mut sy = 0.0;
        let mut sxy = 0.0;
        for ((wk, xk), v) in w.iter().zip(&x).zip(values) {
            sy += wk * v[q];
            sxy += wk * xk * v[q];
        }
        c_inf[q] = (mu2 * sy - mu1 * sxy) / det;
        b_m[q] = (mu0 * sxy - mu1 * sy) / det;
    }
    Ok(RegressionFit { c_inf, b_m, m_ref })
}

/// Regression bias correction; `m_ref` defaults to the smallest block size.
pub fn bc_regression(
    cache: &mut EstimateCache<'_>,
    m_ref: Option<usize>,
    weights: &WeightScheme,
    rho: f64,
) -> Result<RegressionFit> {
    let m_ref = m_ref.unwrap_or_else(|| *weights.block_set().iter().min().expect("nonempty"));
    let values = per_block(cache, weights)?;
    bc_regression_values(weights, &values, m_ref, rho)
}
