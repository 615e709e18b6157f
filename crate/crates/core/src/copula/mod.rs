//! Parametric copula families used as data-generating processes and as
//! ground truth: the copula itself, its extreme-value attractor, partial
//! derivatives of the attractor, second-order data and samplers.
//!
//! Models validate eagerly; an invalid model cannot be constructed.

mod clayton;
mod frailty;
mod gumbel;
mod student;

pub use clayton::OuterPowerClayton;
pub use frailty::positive_stable;
pub use gumbel::GumbelHougaard;
pub use student::{TCopula, TLimit};

use rand::Rng;

use crate::blocks::DataMatrix;
use crate::error::{invalid, Error, Result};

/// A parametric copula family instance.
#[derive(Debug, Clone, PartialEq)]
pub enum CopulaModel {
    GumbelHougaard(GumbelHougaard),
    OuterPowerClayton(OuterPowerClayton),
    T(TCopula),
}

/// Extreme-value copulas that appear as attractors.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtremeValueCopula {
    GumbelHougaard(GumbelHougaard),
    /// Bivariate attractor of a t copula.
    T(TLimit),
}

/// Auxiliary rate `phi(m)` of the second-order expansion
/// `C_m - C_inf = phi(m) S + o(phi(m))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuxiliaryRate {
    /// `phi(m) = (c m)^-1`.
    Reciprocal { c: f64 },
    /// `phi(m) = m^rho`.
    Power { rho: f64 },
}

impl AuxiliaryRate {
    pub fn eval(&self, m: f64) -> f64 {
        match *self {
            AuxiliaryRate::Reciprocal { c } => 1.0 / (c * m),
            AuxiliaryRate::Power { rho } => m.powf(rho),
        }
    }
}

/// Second-order metadata of a copula family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderData {
    pub rho_phi: f64,
    pub phi: AuxiliaryRate,
    /// Whether `S` has an implemented closed form for this model.
    pub s_available: bool,
}

fn check_point(u: &[f64], dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    if let Some(bad) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(invalid(format!("copula argument {bad} outside [0, 1]")));
    }
    Ok(())
}

impl ExtremeValueCopula {
    pub fn dim(&self) -> usize {
        match self {
            ExtremeValueCopula::GumbelHougaard(g) => g.dim(),
            ExtremeValueCopula::T(_) => 2,
        }
    }

    /// `C_inf(u)`. Panics on a dimension mismatch; see [`Self::try_cdf`].
    pub fn cdf(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim(), "dimension mismatch");
        match self {
            ExtremeValueCopula::GumbelHougaard(g) => g.cdf(u),
            ExtremeValueCopula::T(t) => t.cdf(u),
        }
    }

    pub fn try_cdf(&self, u: &[f64]) -> Result<f64> {
        check_point(u, self.dim())?;
        Ok(self.cdf(u))
    }

    /// Stable tail dependence function `L(x)`, `C_inf(u) = exp(-L(-log u))`.
    pub fn stdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|xi| !(xi.is_finite() && *xi >= 0.0)) {
            return Err(invalid("stable tail dependence arguments must be finite and >= 0"));
        }
        if x.iter().all(|&xi| xi == 0.0) {
            return Err(invalid("stable tail dependence function needs a nonzero argument"));
        }
        Ok(match self {
            ExtremeValueCopula::GumbelHougaard(g) => g.stdf(x),
            ExtremeValueCopula::T(t) => t.stdf(x[0], x[1]),
        })
    }

    /// `dC_inf/du_j`, defined as zero when `u_j` is 0 or 1.
    pub fn partial(&self, j: usize, u: &[f64]) -> f64 {
        match self {
            ExtremeValueCopula::GumbelHougaard(g) => g.partial(j, u),
            ExtremeValueCopula::T(t) => t.partial(j, u),
        }
    }
}

impl CopulaModel {
    pub fn gumbel_hougaard(beta: f64, dim: usize) -> Result<Self> {
        GumbelHougaard::new(beta, dim).map(Self::GumbelHougaard)
    }

    pub fn outer_power_clayton(theta: f64, beta: f64, dim: usize) -> Result<Self> {
        OuterPowerClayton::new(theta, beta, dim).map(Self::OuterPowerClayton)
    }

    pub fn t(nu: u32, theta: f64, dim: usize) -> Result<Self> {
        TCopula::new(nu, theta, dim).map(Self::T)
    }

    pub fn dim(&self) -> usize {
        match self {
            CopulaModel::GumbelHougaard(c) => c.dim(),
            CopulaModel::OuterPowerClayton(c) => c.dim(),
            CopulaModel::T(c) => c.dim(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            CopulaModel::GumbelHougaard(_) => "gumbel_hougaard",
            CopulaModel::OuterPowerClayton(_) => "outer_power_clayton",
            CopulaModel::T(_) => "t",
        }
    }

    /// Copula CDF.
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        check_point(u, self.dim())?;
        Ok(match self {
            CopulaModel::GumbelHougaard(c) => c.cdf(u),
            CopulaModel::OuterPowerClayton(c) => c.cdf(u),
            CopulaModel::T(c) => c.cdf(u),
        })
    }

    /// Copula of i.i.d. block maxima of size `m`, `C(u^(1/m))^m`.
    pub fn block_maxima_cdf(&self, u: &[f64], m: f64) -> Result<f64> {
        check_point(u, self.dim())?;
        if !(m.is_finite() && m > 0.0) {
            return Err(invalid(format!("block size must be positive, got {m}")));
        }
        Ok(match self {
            CopulaModel::GumbelHougaard(c) => c.cdf(u),
            CopulaModel::OuterPowerClayton(c) => c.block_maxima_cdf(u, m),
            CopulaModel::T(c) => {
                let v: Vec<f64> = u.iter().map(|&x| x.powf(1.0 / m)).collect();
                c.cdf(&v).powf(m)
            }
        })
    }

    /// The i.i.d. extreme-value attractor.
    pub fn attractor(&self) -> Result<ExtremeValueCopula> {
        match self {
            CopulaModel::GumbelHougaard(c) => Ok(ExtremeValueCopula::GumbelHougaard(c.clone())),
            CopulaModel::OuterPowerClayton(c) => Ok(ExtremeValueCopula::GumbelHougaard(c.attractor())),
            CopulaModel::T(c) if c.dim() == 2 => Ok(ExtremeValueCopula::T(TLimit::new(c.nu(), c.theta())?)),
            CopulaModel::T(c) => Err(Error::Unsupported(format!(
                "extreme-value attractor of the t copula in dimension {}",
                c.dim()
            ))),
        }
    }

    /// `C_inf(u)`.
    pub fn limit_copula(&self, u: &[f64]) -> Result<f64> {
        check_point(u, self.dim())?;
        Ok(self.attractor()?.cdf(u))
    }

    /// Stable tail dependence function of the attractor.
    pub fn stable_tail_dependence(&self, x: &[f64]) -> Result<f64> {
        self.attractor()?.stdf(x)
    }

    /// `dC_inf/du_j`.
    pub fn limit_partial_derivative(&self, j: usize, u: &[f64]) -> Result<f64> {
        check_point(u, self.dim())?;
        if j >= self.dim() {
            return Err(invalid(format!("coordinate index {j} out of range")));
        }
        Ok(self.attractor()?.partial(j, u))
    }

    /// Second-order metadata, if the model satisfies a known second-order
    /// condition. The Gumbel–Hougaard copula is max-stable, so `C_m = C_inf`.
    pub fn second_order(&self) -> Option<SecondOrderData> {
        match self {
            CopulaModel::GumbelHougaard(_) => None,
            CopulaModel::OuterPowerClayton(_) => Some(SecondOrderData {
                rho_phi: -1.0,
                phi: AuxiliaryRate::Reciprocal { c: 2.0 },
                s_available: true,
            }),
            CopulaModel::T(c) => {
                let rho_phi = c.rho_phi();
                let phi = match c.nu() {
                    1 => AuxiliaryRate::Reciprocal { c: 2.0 },
                    2 => AuxiliaryRate::Reciprocal { c: 2.0 / 3.0 },
                    _ => AuxiliaryRate::Power { rho: rho_phi },
                };
                Some(SecondOrderData {
                    rho_phi,
                    phi,
                    s_available: c.nu() == 1 && c.dim() == 2,
                })
            }
        }
    }

    /// Second-order function `S(u)` for `u` in the open unit cube.
    pub fn second_order_s(&self, u: &[f64]) -> Result<f64> {
        check_point(u, self.dim())?;
        if u.iter().any(|&x| x <= 0.0 || x >= 1.0) {
            return Err(invalid("second-order function needs an interior point"));
        }
        match self {
            CopulaModel::OuterPowerClayton(c) => Ok(c.second_order_s(u)),
            CopulaModel::T(c) if c.nu() == 1 && c.dim() == 2 => {
                Ok(TLimit::new(1, c.theta())?.second_order_s_cauchy(u))
            }
            CopulaModel::T(c) => Err(Error::Unsupported(format!(
                "second-order function of the t copula with nu={} in dimension {} \
                 (depends on a second-order POT limit not implemented here)",
                c.nu(),
                c.dim()
            ))),
            CopulaModel::GumbelHougaard(_) => Err(Error::Unsupported(
                "Gumbel–Hougaard copula is max-stable; no second-order term".into(),
            )),
        }
    }

    /// Fills `out` with one draw.
    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        loop {
            match self {
                CopulaModel::GumbelHougaard(c) => c.sample_row(rng, out),
                CopulaModel::OuterPowerClayton(c) => c.sample_row(rng, out),
                CopulaModel::T(c) => c.sample_row(rng, out),
            }
            if out.iter().all(|&x| x > 0.0 && x < 1.0) {
                return;
            }
            // frailty draws can round to the boundary; the bivariate outer
            // power Clayton falls back to conditional inversion
            if let CopulaModel::OuterPowerClayton(c) = self {
                if c.dim() == 2 {
                    out.copy_from_slice(&c.sample_conditional(rng));
                    return;
                }
            }
        }
    }

    /// `n` i.i.d. rows from the copula.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DataMatrix> {
        if n == 0 {
            return Err(invalid("sample size must be >= 1"));
        }
        let d = self.dim();
        let mut columns = vec![Vec::with_capacity(n); d];
        let mut row = vec![0.0; d];
        for _ in 0..n {
            self.sample_row(rng, &mut row);
            for (col, &x) in columns.iter_mut().zip(&row) {
                col.push(x);
            }
        }
        DataMatrix::from_columns(columns)
    }
}

#[cfg(test)]
mod tests;
