//! Limiting covariances of the sliding- and disjoint-blocks empirical copula
//! processes, plug-in variances under estimated margins, and the Loewner
//! comparison between the two schemes.
//!
//! `gamma(v, u, c, a)` is the covariance between the sliding-blocks limit
//! process at `(u, a)` and at `(v, c)`. It is available both as a sum of
//! three one-dimensional integrals and in closed form; the two are
//! independent implementations and are cross-checked in the tests.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::copula::ExtremeValueCopula;
use crate::error::{invalid, Error, Result};
use crate::numerics::quadrature::{integrate, QuadOptions};

/// Points and block scales of one covariance evaluation,
/// `Cov(C(u, a), C(v, c))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceQuery {
    pub u: Vec<f64>,
    pub a: f64,
    pub v: Vec<f64>,
    pub c: f64,
}

impl CovarianceQuery {
    pub fn new(u: Vec<f64>, a: f64, v: Vec<f64>, c: f64) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !(0.0..=1.0).contains(x)) {
            return Err(invalid("covariance points must lie in [0, 1]^d"));
        }
        if !(a.is_finite() && a > 0.0 && c.is_finite() && c > 0.0) {
            return Err(invalid(format!("block scales must be positive, got a={a}, c={c}")));
        }
        Ok(Self { u, a, v, c })
    }

    /// The query with `a <= c`, using symmetry of the covariance.
    fn ordered(&self) -> (&[f64], f64, &[f64], f64) {
        if self.a <= self.c {
            (&self.u, self.a, &self.v, self.c)
        } else {
            (&self.v, self.c, &self.u, self.a)
        }
    }
}

/// Which of the two implementations of `gamma` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaMethod {
    #[default]
    ClosedForm,
    Quadrature,
}

/// `C_inf(x^(1/s) ^ y^(1/t))`, with the componentwise minimum taken on the
/// log scale.
fn cdf_of_min(ev: &ExtremeValueCopula, x: &[f64], s: f64, y: &[f64], t: f64) -> f64 {
    let w: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (xi.ln() / s).min(yi.ln() / t).exp())
        .collect();
    ev.cdf(&w)
}

fn cdf_pow(ev: &ExtremeValueCopula, x: &[f64], s: f64) -> f64 {
    let w: Vec<f64> = x.iter().map(|&xi| (xi.ln() / s).exp()).collect();
    ev.cdf(&w)
}

fn check_dim(ev: &ExtremeValueCopula, q: &CovarianceQuery) -> Result<()> {
    if q.u.len() != ev.dim() {
        return Err(Error::DimensionMismatch {
            expected: ev.dim(),
            got: q.u.len(),
        });
    }
    Ok(())
}

/// `gamma` as three block-overlap integrals minus `(c + a) C(v) C(u)`,
/// each integral computed by adaptive Gauss–Kronrod to absolute
/// tolerance `1e-10`.
pub fn gamma_quadrature(ev: &ExtremeValueCopula, q: &CovarianceQuery) -> Result<f64> {
    check_dim(ev, q)?;
    let (u, a, v, c) = q.ordered();
    let product = (c + a) * ev.cdf(v) * ev.cdf(u);
    let m = cdf_of_min(ev, v, c, u, a);
    if m == 0.0 {
        // every integrand vanishes off a null set
        return Ok(-product);
    }
    let la = cdf_pow(ev, u, a).ln();
    let lb = cdf_pow(ev, v, c).ln();
    let lm = m.ln();
    let opts = QuadOptions::default();

    let first = integrate(|xi| (-xi * la + (xi + a) * lm + (c - xi - a) * lb).exp(), -a, 0.0, opts)?;
    let middle = (c - a) * ((c - a) * lb + a * lm).exp();
    let last = integrate(|xi| (xi * lb + (c - xi) * lm + (xi + a - c) * la).exp(), c - a, c, opts)?;
    Ok(first.value + middle + last.value - product)
}

/// `gamma` through its closed form. With `X = C(v^(a/c) ^ u)` and
/// `Y = C(v^(a/c)) C(u)`:
/// zero if `X = Y`, `-(c + a) C(v) C(u)` if `X = 0`, and otherwise
/// `C(v^(1 - a/c)) [2a (X - Y)/(ln X - ln Y) + (c - a) X - (c + a) Y]`.
pub fn gamma_closed_form(ev: &ExtremeValueCopula, q: &CovarianceQuery) -> Result<f64> {
    check_dim(ev, q)?;
    let (u, a, v, c) = q.ordered();
    let r = a / c;
    let x = cdf_of_min(ev, v, 1.0 / r, u, 1.0);
    let y = cdf_pow(ev, v, 1.0 / r) * ev.cdf(u);
    if x == y {
        return Ok(0.0);
    }
    if x == 0.0 {
        return Ok(-(c + a) * ev.cdf(v) * ev.cdf(u));
    }
    let log_gap = x.ln() - y.ln();
    let log_mean = if log_gap.abs() < 1e-12 { x } else { (x - y) / log_gap };
    let prefactor = cdf_pow(ev, v, 1.0 / (1.0 - r));
    Ok(prefactor * (2.0 * a * log_mean + (c - a) * x - (c + a) * y))
}

pub fn gamma(ev: &ExtremeValueCopula, q: &CovarianceQuery, method: GammaMethod) -> Result<f64> {
    match method {
        GammaMethod::ClosedForm => gamma_closed_form(ev, q),
        GammaMethod::Quadrature => gamma_quadrature(ev, q),
    }
}

/// Disjoint-blocks covariance `C(u ^ v) - C(u) C(v)`.
pub fn gamma_disjoint(ev: &ExtremeValueCopula, u: &[f64], v: &[f64]) -> f64 {
    let w: Vec<f64> = u.iter().zip(v).map(|(a, b)| a.min(*b)).collect();
    ev.cdf(&w) - ev.cdf(u) * ev.cdf(v)
}

/// Terms `(coefficient, point)` of the estimated-margins limit at `u`:
/// `(1, u)` followed by `(-dC/du_j(u), u^(j))`, where `u^(j)` has `u_j` at
/// position `j` and ones elsewhere. Zero coefficients are dropped.
fn margin_terms(ev: &ExtremeValueCopula, u: &[f64]) -> Vec<(f64, Vec<f64>)> {
    let mut terms = vec![(1.0, u.to_vec())];
    for j in 0..u.len() {
        let coef = -ev.partial(j, u);
        if coef != 0.0 {
            let mut p = vec![1.0; u.len()];
            p[j] = u[j];
            terms.push((coef, p));
        }
    }
    terms
}

fn check_point(ev: &ExtremeValueCopula, u: &[f64]) -> Result<()> {
    if u.len() != ev.dim() {
        return Err(Error::DimensionMismatch {
            expected: ev.dim(),
            got: u.len(),
        });
    }
    if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(invalid(format!("point {u:?} outside [0, 1]^d")));
    }
    Ok(())
}

/// Covariance of the sliding-blocks limit with estimated margins between
/// `(u, a)` and `(v, c)`.
pub fn cov_sliding_hat(
    ev: &ExtremeValueCopula,
    u: &[f64],
    a: f64,
    v: &[f64],
    c: f64,
    method: GammaMethod,
) -> Result<f64> {
    check_point(ev, u)?;
    check_point(ev, v)?;
    let mut total = 0.0;
    for (cu, pu) in margin_terms(ev, u) {
        for (cv, pv) in margin_terms(ev, v) {
            let q = CovarianceQuery::new(pu.clone(), a, pv, c)?;
            total += cu * cv * gamma(ev, &q, method)?;
        }
    }
    Ok(total)
}

/// Covariance of the disjoint-blocks limit with estimated margins.
pub fn cov_disjoint_hat(ev: &ExtremeValueCopula, u: &[f64], v: &[f64]) -> Result<f64> {
    check_point(ev, u)?;
    check_point(ev, v)?;
    let mut total = 0.0;
    for (cu, pu) in margin_terms(ev, u) {
        for (cv, pv) in margin_terms(ev, v) {
            total += cu * cv * gamma_disjoint(ev, &pu, &pv);
        }
    }
    Ok(total)
}

/// Plug-in asymptotic variance of the sliding-blocks estimator at `u`,
/// block scale `a`, with estimated margins. Partial derivatives vanish at
/// coordinates equal to 0 or 1.
pub fn var_sliding_hat(ev: &ExtremeValueCopula, u: &[f64], a: f64) -> Result<f64> {
    cov_sliding_hat(ev, u, a, u, a, GammaMethod::ClosedForm)
}

/// Plug-in asymptotic variance of the disjoint-blocks estimator at `u`.
pub fn var_disjoint_hat(ev: &ExtremeValueCopula, u: &[f64]) -> Result<f64> {
    cov_disjoint_hat(ev, u, u)
}

/// Whether the margins are treated as known or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margins {
    Known,
    Estimated,
}

/// Covariance matrix of the sliding-blocks limit (scale 1) at `points`.
pub fn covariance_sliding(ev: &ExtremeValueCopula, points: &[Vec<f64>], margins: Margins) -> Result<DMatrix<f64>> {
    let k = points.len();
    let mut out = DMatrix::zeros(k, k);
    for i in 0..k {
        for l in i..k {
            let value = match margins {
                Margins::Estimated => cov_sliding_hat(ev, &points[i], 1.0, &points[l], 1.0, GammaMethod::ClosedForm)?,
                Margins::Known => {
                    let q = CovarianceQuery::new(points[i].clone(), 1.0, points[l].clone(), 1.0)?;
                    gamma_closed_form(ev, &q)?
                }
            };
            out[(i, l)] = value;
            out[(l, i)] = value;
        }
    }
    Ok(out)
}

/// Covariance matrix of the disjoint-blocks limit at `points`.
pub fn covariance_disjoint(ev: &ExtremeValueCopula, points: &[Vec<f64>], margins: Margins) -> Result<DMatrix<f64>> {
    let k = points.len();
    let mut out = DMatrix::zeros(k, k);
    for i in 0..k {
        for l in i..k {
            let value = match margins {
                Margins::Estimated => cov_disjoint_hat(ev, &points[i], &points[l])?,
                Margins::Known => {
                    check_point(ev, &points[i])?;
                    check_point(ev, &points[l])?;
                    gamma_disjoint(ev, &points[i], &points[l])
                }
            };
            out[(i, l)] = value;
            out[(l, i)] = value;
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of `Cov_disjoint - Cov_sliding` at `points`.
pub fn loewner_gap(ev: &ExtremeValueCopula, points: &[Vec<f64>], margins: Margins) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("need at least one point"));
    }
    let diff = covariance_disjoint(ev, points, margins)? - covariance_sliding(ev, points, margins)?;
    Ok(SymmetricEigen::new(diff).eigenvalues.min())
}

/// Pointwise and matrix comparison of disjoint and sliding variances.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// `var_disjoint_hat - var_sliding_hat(a = 1)` per grid point.
    pub differences: Vec<f64>,
    pub min_difference: f64,
    /// Minimum over random point sets of the smallest eigenvalue of the
    /// estimated-margins covariance difference.
    pub min_eigenvalue: f64,
    pub sets_checked: usize,
}

/// Compares the two schemes at every grid point and on `random_sets`
/// random point sets of size 1 to 4 drawn from `rng`.
pub fn variance_dominance_check<R: Rng + ?Sized>(
    ev: &ExtremeValueCopula,
    grid: &[Vec<f64>],
    random_sets: usize,
    rng: &mut R,
) -> Result<DominanceReport> {
    let differences = grid
        .iter()
        .map(|u| Ok(var_disjoint_hat(ev, u)? - var_sliding_hat(ev, u, 1.0)?))
        .collect::<Result<Vec<f64>>>()?;
    let min_difference = differences.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut min_eigenvalue = f64::INFINITY;
    for _ in 0..random_sets {
        let k = rng.random_range(1..=4);
        let points: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..ev.dim()).map(|_| rng.random_range(0.01..0.99)).collect())
            .collect();
        min_eigenvalue = min_eigenvalue.min(loewner_gap(ev, &points, Margins::Estimated)?);
    }
    Ok(DominanceReport {
        differences,
        min_difference,
        min_eigenvalue,
        sets_checked: random_sets,
    })
}

/// Analytic diagonal variances `(sliding, disjoint)` at `(u, u)` for the
/// bivariate Gumbel–Hougaard copula with shape `beta`, estimated margins.
pub fn gumbel_diagonal_variances(beta: f64, u: f64) -> Result<(f64, f64)> {
    if !(beta >= 1.0 && beta.is_finite()) {
        return Err(invalid(format!("Gumbel–Hougaard shape must be >= 1, got {beta}")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("diagonal point must lie in (0, 1), got {u}")));
    }
    let r = 2f64.powf(1.0 / beta);
    let cuu = u.powf(r);
    let dot = u.powf(r - 1.0) * 2f64.powf(1.0 / beta - 1.0);
    let u2 = u * u;
    let lu = u.ln();

    let mut bracket = (u - u2) / (-lu) - u2;
    if beta > 1.0 {
        bracket += (cuu - u2) / (cuu.ln() - 2.0 * lu) - u2;
    }
    let sliding = 2.0 * ((cuu - cuu * cuu) / (-cuu.ln()) - cuu * cuu) + 4.0 * dot * dot * bracket
        - 8.0 * dot * ((cuu - cuu * u) / (-lu) - cuu * u);
    let disjoint =
        cuu - cuu * cuu + 2.0 * dot * dot * (u - u2 + cuu - u2) - 4.0 * dot * (cuu - cuu * u);
    Ok((sliding, disjoint))
}
