use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::frailty::positive_stable;
use crate::error::{invalid, Result};

/// Gumbel–Hougaard copula `exp{-(sum_j (-log u_j)^beta)^(1/beta)}`.
///
/// An extreme-value copula; `beta = 1` is independence.
#[derive(Debug, Clone, PartialEq)]
pub struct GumbelHougaard {
    beta: f64,
    dim: usize,
}

impl GumbelHougaard {
    pub fn new(beta: f64, dim: usize) -> Result<Self> {
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(invalid(format!("Gumbel–Hougaard shape must be >= 1, got {beta}")));
        }
        if dim < 2 {
            return Err(invalid(format!("copula dimension must be >= 2, got {dim}")));
        }
        Ok(Self { beta, dim })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stable tail dependence function `(sum x_j^beta)^(1/beta)`.
    pub fn stdf(&self, x: &[f64]) -> f64 {
        if self.beta == 1.0 {
            return x.iter().sum();
        }
        let xmax = x.iter().cloned().fold(0.0, f64::max);
        if xmax == 0.0 || xmax.is_infinite() {
            return xmax;
        }
        // scale out the maximum so x^beta cannot overflow
        let s: f64 = x.iter().map(|&xi| (xi / xmax).powf(self.beta)).sum();
        xmax * s.powf(1.0 / self.beta)
    }

    pub fn cdf(&self, u: &[f64]) -> f64 {
        if u.iter().any(|&ui| ui <= 0.0) {
            return 0.0;
        }
        let x: Vec<f64> = u.iter().map(|&ui| -ui.ln()).collect();
        (-self.stdf(&x)).exp()
    }

    /// `dC/du_j`, zero when `u_j` is 0 or 1.
    pub fn partial(&self, j: usize, u: &[f64]) -> f64 {
        let uj = u[j];
        if uj <= 0.0 || uj >= 1.0 {
            return 0.0;
        }
        let c = self.cdf(u);
        if c == 0.0 {
            return 0.0;
        }
        let x: Vec<f64> = u.iter().map(|&ui| -ui.ln()).collect();
        let l = self.stdf(&x);
        // dL/dx_j = (x_j / L)^(beta - 1)
        c * (x[j] / l).powf(self.beta - 1.0) / uj
    }

    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let alpha = 1.0 / self.beta;
        let v = positive_stable(alpha, rng);
        for o in out.iter_mut() {
            let e: f64 = Exp1.sample(rng);
            *o = (-(e / v).powf(alpha)).exp();
        }
    }
}
