//! Estimators of the second-order parameter `rho`: a naive three-size
//! estimator and a penalised profile least-squares estimator, aggregated
//! over a set of evaluation points.

use super::{EstimateCache, Grid, WeightScheme};
use crate::blocks::DataMatrix;
use crate::error::{invalid, Error, Result};
use crate::numerics::floor_block;

/// Outcome of a `rho` estimate at one point. Points where the estimator is
/// not defined are reported explicitly rather than as NaN.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoValue {
    Defined(f64),
    Undefined(String),
}

impl RhoValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            RhoValue::Defined(v) => Some(*v),
            RhoValue::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, RhoValue::Defined(_))
    }
}

/// Settings of the penalised estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoConfig {
    /// Search interval `[k_lo, k_hi]`, both negative.
    pub k_lo: f64,
    pub k_hi: f64,
    /// Penalty weight.
    pub eta: f64,
    /// Reference block size of the regressor `(k / m_rho)^rho`.
    pub m_rho: usize,
    pub weights: WeightScheme,
    /// Evaluation points, interior to the unit cube.
    pub points: Vec<Vec<f64>>,
    pub grid_step: f64,
}

impl RhoConfig {
    /// Search over `[-2, -0.1]` with penalty `0.5`, block sizes `2..=50`
    /// with harmonic weights and the diagonal points `0.10, 0.11, ..., 0.50`.
    pub fn default_for(d: usize) -> Self {
        let points = (10..=50).map(|i| vec![i as f64 / 100.0; d]).collect();
        Self {
            k_lo: -2.0,
            k_hi: -0.1,
            eta: 0.5,
            m_rho: 2,
            weights: WeightScheme::harmonic((2..=50).collect()).expect("valid block set"),
            points,
            grid_step: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_lo.is_finite() && self.k_lo < self.k_hi && self.k_hi < 0.0) {
            return Err(invalid(format!(
                "rho search interval [{}, {}] must satisfy k_lo < k_hi < 0",
                self.k_lo, self.k_hi
            )));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(invalid("penalty eta must be >= 0"));
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0) {
            return Err(invalid("rho grid step must be positive"));
        }
        if self.m_rho == 0 {
            return Err(invalid("m_rho must be >= 1"));
        }
        if self.weights.len() < 2 {
            return Err(invalid("rho estimation needs at least two block sizes"));
        }
        if self.points.is_empty() {
            return Err(invalid("rho estimation needs at least one evaluation point"));
        }
        if self.points.iter().flatten().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(invalid("rho evaluation points must be interior to the unit cube"));
        }
        Ok(())
    }
}

fn log_base(x: f64, a: f64) -> f64 {
    x.ln() / a.ln()
}

/// `log_a((C_{m a^2} - C_m) / (C_{m a} - C_m) - 1)` from the three estimates.
pub fn rho_naive_values(c_m: f64, c_ma: f64, c_ma2: f64, a: f64) -> RhoValue {
    let denom = c_ma - c_m;
    if denom.abs() <= 1e-14 {
        return RhoValue::Undefined("estimates at m and m*a coincide".into());
    }
    let excess = (c_ma2 - c_m) / denom - 1.0;
    if !(excess > 0.0) {
        return RhoValue::Undefined(format!("ratio minus one is {excess}, not positive"));
    }
    RhoValue::Defined(log_base(excess, a))
}

/// Naive estimator at `u` from sliding estimates at `m_rho`,
/// `floor(m_rho a)` and `floor(m_rho a^2)`.
pub fn rho_naive(data: &DataMatrix, m_rho: usize, a: f64, u: &[f64]) -> Result<RhoValue> {
    if !(a.is_finite() && a > 0.0 && a != 1.0) {
        return Err(invalid(format!("base a must be positive and != 1, got {a}")));
    }
    let ma = floor_block(m_rho as f64 * a);
    let ma2 = floor_block(m_rho as f64 * a * a);
    if ma == m_rho || ma2 == m_rho || ma == ma2 || ma == 0 || ma2 == 0 {
        return Err(invalid(format!(
            "block sizes m={m_rho}, floor(m a)={ma}, floor(m a^2)={ma2} are not distinct positive sizes"
        )));
    }
    let mut cache = EstimateCache::new(data, Grid::new(vec![u.to_vec()])?)?;
    let c_m = cache.sliding(m_rho)?[0];
    let c_ma = cache.sliding(ma)?[0];
    let c_ma2 = cache.sliding(ma2)?[0];
    Ok(rho_naive_values(c_m, c_ma, c_ma2, a))
}

/// Weighted residual sum of squares of `y_k` regressed on `(k / m_rho)^rho`
/// with the intercept and slope profiled out.
pub fn profile_rss(weights: &WeightScheme, y: &[f64], m_rho: usize, rho: f64) -> f64 {
    if y.iter().all(|&v| v == y[0]) {
        return 0.0;
    }
    let w = weights.weights();
    let x: Vec<f64> = weights
        .block_set()
        .iter()
        .map(|&k| (k as f64 / m_rho as f64).powf(rho))
        .collect();
    let total: f64 = w.iter().sum();
    let xbar = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / total;
    let ybar = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / total;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for ((wk, xk), yk) in w.iter().zip(&x).zip(y) {
        let (dx, dy) = (xk - xbar, yk - ybar);
        sxx += wk * dx * dx;
        sxy += wk * dx * dy;
        syy += wk * dy * dy;
    }
    if sxx <= 0.0 {
        return syy;
    }
    (syy - sxy * sxy / sxx).max(0.0)
}

fn candidates(cfg: &RhoConfig) -> Vec<f64> {
    let count = ((cfg.k_hi - cfg.k_lo) / cfg.grid_step + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=count).map(|i| cfg.k_lo + i as f64 * cfg.grid_step).collect();
    if *out.last().expect("nonempty") < cfg.k_hi - 1e-12 {
        out.push(cfg.k_hi);
    }
    out
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Minimiser over `[k_lo, k_hi]` of
/// `RSS(rho) + (eta / |rho|) * min_kappa RSS(kappa)`, where `y[i]` is the
/// estimate at `cfg.weights.block_set()[i]`.
///
/// The grid scan keeps the first (most negative) minimiser; a golden-section
/// refinement in the neighbouring bracket replaces it only if strictly
/// better. When the minimal profile RSS is zero the penalty vanishes.
pub fn rho_penalized_values(cfg: &RhoConfig, y: &[f64]) -> Result<f64> {
    cfg.validate()?;
    if y.len() != cfg.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.weights.len(),
            got: y.len(),
        });
    }
    let rss = |rho: f64| profile_rss(&cfg.weights, y, cfg.m_rho, rho);
    let grid = candidates(cfg);
    let values: Vec<f64> = grid.iter().map(|&r| rss(r)).collect();
    let min_rss = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let penalty = cfg.eta * min_rss;
    let objective = |rho: f64, rss_value: f64| rss_value + penalty / rho.abs();

    let mut best = 0;
    let mut best_val = objective(grid[0], values[0]);
    for i in 1..grid.len() {
        let v = objective(grid[i], values[i]);
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if hi > lo {
        let refined = golden_section(|r| objective(r, rss(r)), lo, hi, 1e-4);
        if objective(refined, rss(refined)) < best_val {
            return Ok(refined);
        }
    }
    Ok(grid[best])
}

fn penalized_at(cache: &mut EstimateCache<'_>, cfg: &RhoConfig) -> Result<Vec<RhoValue>> {
    let per_k = cfg
        .weights
        .block_set()
        .iter()
        .map(|&k| cache.sliding(k))
        .collect::<Result<Vec<_>>>()?;
    (0..cache.grid().len())
        .map(|q| {
            let y: Vec<f64> = per_k.iter().map(|v| v[q]).collect();
            if y.iter().all(|&v| v == y[0]) {
                return Ok(RhoValue::Undefined(
                    "estimates do not vary with the block size".into(),
                ));
            }
            rho_penalized_values(cfg, &y).map(RhoValue::Defined)
        })
        .collect()
}

/// Penalised estimator at a single point `u` (`cfg.points` is ignored).
pub fn rho_penalized(data: &DataMatrix, cfg: &RhoConfig, u: &[f64]) -> Result<RhoValue> {
    cfg.validate()?;
    let mut cache = EstimateCache::new(data, Grid::new(vec![u.to_vec()])?)?;
    Ok(penalized_at(&mut cache, cfg)?.remove(0))
}

/// Mean of the penalised estimator over the evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoAggregate {
    pub value: f64,
    /// Points that contributed to the mean.
    pub used: usize,
    /// Points where the estimator was undefined.
    pub skipped: usize,
    pub per_point: Vec<RhoValue>,
}

pub fn rho_pen_aggregated(data: &DataMatrix, cfg: &RhoConfig) -> Result<RhoAggregate> {
    cfg.validate()?;
    let mut cache = EstimateCache::new(data, Grid::new(cfg.points.clone())?)?;
    let per_point = penalized_at(&mut cache, cfg)?;
    let defined: Vec<f64> = per_point.iter().filter_map(RhoValue::value).collect();
    if defined.is_empty() {
        return Err(Error::Undefined(format!(
            "rho estimator undefined at all {} evaluation points",
            per_point.len()
        )));
    }
    Ok(RhoAggregate {
        value: defined.iter().sum::<f64>() / defined.len() as f64,
        used: defined.len(),
        skipped: per_point.len() - defined.len(),
        per_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exact(ks: &[usize], rho: f64, c: f64, s: f64) -> Vec<f64> {
        ks.iter().map(|&k| c + (k as f64).powf(rho) * s).collect()
    }

    #[test]
    fn naive_exact_inputs() {
        let m = 10usize;
        let c = |k: f64| 0.3 + 0.8 / k;
        let r = rho_naive_values(c(m as f64), c(2.0 * m as f64), c(4.0 * m as f64), 2.0);
        assert!((r.value().unwrap() + 1.0).abs() < 1e-12);
        let c = |k: f64| 0.3 - 0.5 * k.powf(-0.5);
        let r = rho_naive_values(c(5.0), c(20.0), c(80.0), 4.0);
        assert!((r.value().unwrap() + 0.5).abs() < 1e-12);
        assert!(!rho_naive_values(0.2, 0.2, 0.2, 2.0).is_defined());
        assert!(!rho_naive_values(0.2, 0.3, 0.25, 2.0).is_defined());
    }

    #[test]
    fn naive_rejects_collapsing_sizes() {
        let data = CopulaModel::gumbel_hougaard(2.0, 2)
            .unwrap()
            .sample(200, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        assert!(rho_naive(&data, 1, 1.5, &[0.5, 0.5]).is_err());
        assert!(rho_naive(&data, 4, 1.0, &[0.5, 0.5]).is_err());
        assert!(rho_naive(&data, 4, 2.0, &[0.5, 0.5]).is_ok());
    }

    #[test]
    fn penalized_exact_inputs() {
        let cfg = RhoConfig::default_for(2);
        let ks = cfg.weights.block_set().to_vec();
        let rho = rho_penalized_values(&cfg, &exact(&ks, -1.0, 0.3, 0.4)).unwrap();
        assert!((rho + 1.0).abs() < 1e-3, "{rho}");
        let rho = rho_penalized_values(&cfg, &exact(&ks, -0.47, 0.2, -0.1)).unwrap();
        assert!((rho + 0.47).abs() < 1e-3, "{rho}");
    }

    #[test]
    fn penalized_constant_inputs_go_to_lower_bound() {
        let cfg = RhoConfig::default_for(2);
        let y = vec![0.25; cfg.weights.len()];
        assert_eq!(rho_penalized_values(&cfg, &y).unwrap(), -2.0);
    }

    #[test]
    fn reference_size_does_not_change_profile() {
        let cfg = RhoConfig::default_for(2);
        let ks = cfg.weights.block_set().to_vec();
        let y: Vec<f64> = exact(&ks, -0.7, 0.2, 0.3)
            .iter()
            .enumerate()
            .map(|(i, v)| v + 1e-3 * ((i * 7919) % 13) as f64)
            .collect();
        for &r in &[-1.9, -1.0, -0.3] {
            let a = profile_rss(&cfg.weights, &y, 2, r);
            let b = profile_rss(&cfg.weights, &y, 17, r);
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn zero_penalty_is_profile_minimiser() {
        let mut cfg = RhoConfig::default_for(2);
        cfg.eta = 0.0;
        let ks = cfg.weights.block_set().to_vec();
        let y: Vec<f64> = exact(&ks, -0.8, 0.2, 0.3)
            .iter()
            .enumerate()
            .map(|(i, v)| v + 2e-4 * (((i * 31) % 7) as f64 - 3.0))
            .collect();
        let rho = rho_penalized_values(&cfg, &y).unwrap();
        let best_grid = candidates(&cfg)
            .into_iter()
            .map(|r| (profile_rss(&cfg.weights, &y, cfg.m_rho, r), r))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        assert!(profile_rss(&cfg.weights, &y, cfg.m_rho, rho) <= best_grid.0);
        assert!((rho - best_grid.1).abs() <= 0.01 + 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RhoConfig::default_for(2);
        cfg.k_hi = 0.1;
        assert!(cfg.validate().is_err());
        let mut cfg = RhoConfig::default_for(2);
        cfg.points = vec![vec![0.0, 0.5]];
        assert!(cfg.validate().is_err());
        assert_eq!(RhoConfig::default_for(2).points.len(), 41);
        assert_eq!(candidates(&RhoConfig::default_for(2)).len(), 191);
    }

    #[test]
    fn aggregation_over_points() {
        let base = CopulaModel::outer_power_clayton(1.0, 1.2386, 2).unwrap();
        let data = base.sample(3000, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        let mut cfg = RhoConfig::default_for(2);
        cfg.points = vec![vec![0.3, 0.3]];
        let agg = rho_pen_aggregated(&data, &cfg).unwrap();
        let single = rho_penalized(&data, &cfg, &[0.3, 0.3]).unwrap();
        assert_eq!(agg.value, single.value().unwrap());
        assert_eq!((agg.used, agg.skipped), (1, 0));

        // every estimate vanishes below the smallest pseudo-observation
        cfg.points = vec![vec![1e-6, 1e-6]];
        assert!(matches!(rho_pen_aggregated(&data, &cfg), Err(Error::Undefined(_))));
    }
}
