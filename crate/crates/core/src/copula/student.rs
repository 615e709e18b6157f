use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::numerics::mvt::equicorrelated_t_cdf;
use crate::numerics::special::{t_cdf, t_quantile};

/// Student t copula with integer degrees of freedom and an equicorrelated
/// correlation matrix (unit diagonal, off-diagonal `theta`).
#[derive(Debug, Clone, PartialEq)]
pub struct TCopula {
    nu: u32,
    theta: f64,
    dim: usize,
    chol: DMatrix<f64>,
}

impl TCopula {
    pub fn new(nu: u32, theta: f64, dim: usize) -> Result<Self> {
        if nu < 1 {
            return Err(invalid("t-copula degrees of freedom must be >= 1"));
        }
        if dim < 2 {
            return Err(invalid(format!("copula dimension must be >= 2, got {dim}")));
        }
        if !(theta.is_finite() && theta > -1.0 && theta < 1.0) {
            return Err(invalid(format!("t-copula correlation must lie in (-1, 1), got {theta}")));
        }
        if theta <= -1.0 / (dim as f64 - 1.0) {
            return Err(invalid(format!(
                "equicorrelation {theta} is not positive definite in dimension {dim}"
            )));
        }
        let p = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { theta });
        let chol = p
            .cholesky()
            .ok_or_else(|| invalid("correlation matrix is not positive definite"))?
            .l();
        Ok(Self { nu, theta, dim, chol })
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn correlation(&self) -> DMatrix<f64> {
        &self.chol * self.chol.transpose()
    }

    pub fn cdf(&self, u: &[f64]) -> f64 {
        if u.iter().any(|&ui| ui <= 0.0) {
            return 0.0;
        }
        let nu = self.nu as f64;
        let q: Vec<f64> = u.iter().map(|&ui| if ui >= 1.0 { f64::INFINITY } else { t_quantile(ui, nu) }).collect();
        equicorrelated_t_cdf(&q, self.theta, nu)
    }

    /// Second-order index: `-2/nu` for `nu >= 3`, `-1` otherwise.
    pub fn rho_phi(&self) -> f64 {
        if self.nu >= 3 {
            -2.0 / self.nu as f64
        } else {
            -1.0
        }
    }

    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let nu = self.nu as f64;
        let z = DVector::from_fn(self.dim, |_, _| StandardNormal.sample(rng));
        let x = &self.chol * z;
        let w: f64 = ChiSquared::new(nu).expect("nu >= 1").sample(rng);
        let scale = (w / nu).sqrt();
        for (o, xi) in out.iter_mut().zip(x.iter()) {
            *o = t_cdf(xi / scale, nu);
        }
    }
}

/// Bivariate extreme-value limit of the t copula, through its stable tail
/// dependence function.
#[derive(Debug, Clone, PartialEq)]
pub struct TLimit {
    nu: u32,
    theta: f64,
}

impl TLimit {
    pub fn new(nu: u32, theta: f64) -> Result<Self> {
        TCopula::new(nu, theta, 2)?;
        Ok(Self { nu, theta })
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `L(x, y) = y t_{nu+1}(z(y/x)) + x t_{nu+1}(z(x/y))` with
    /// `z(r) = sqrt(nu+1) (r^(1/nu) - theta) / sqrt(1 - theta^2)`.
    pub fn stdf(&self, x: f64, y: f64) -> f64 {
        if x == 0.0 {
            return y;
        }
        if y == 0.0 {
            return x;
        }
        let nu = self.nu as f64;
        let k = (nu + 1.0).sqrt() / (1.0 - self.theta * self.theta).sqrt();
        let z = |r: f64| k * (r.powf(1.0 / nu) - self.theta);
        y * t_cdf(z(y / x), nu + 1.0) + x * t_cdf(z(x / y), nu + 1.0)
    }

    /// Central difference approximation of `(dL/dx, dL/dy)`.
    pub fn stdf_gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let h = 1e-6 * x.max(y).max(1.0);
        let dx = if x > h {
            (self.stdf(x + h, y) - self.stdf(x - h, y)) / (2.0 * h)
        } else {
            (self.stdf(x + h, y) - self.stdf(x, y)) / h
        };
        let dy = if y > h {
            (self.stdf(x, y + h) - self.stdf(x, y - h)) / (2.0 * h)
        } else {
            (self.stdf(x, y + h) - self.stdf(x, y)) / h
        };
        (dx, dy)
    }

    pub fn cdf(&self, u: &[f64]) -> f64 {
        if u[0] <= 0.0 || u[1] <= 0.0 {
            return 0.0;
        }
        (-self.stdf(-u[0].ln(), -u[1].ln())).exp()
    }

    pub fn partial(&self, j: usize, u: &[f64]) -> f64 {
        if u[j] <= 0.0 || u[j] >= 1.0 {
            return 0.0;
        }
        let c = self.cdf(u);
        if c == 0.0 {
            return 0.0;
        }
        let (dx, dy) = self.stdf_gradient(-u[0].ln(), -u[1].ln());
        let d = if j == 0 { dx } else { dy };
        c * d / u[j]
    }

    /// Second-order function for `nu = 1`:
    /// `S(e^-x, e^-y) = C_inf (Gamma_2 - L^2)`, `Gamma_2 = x^2 L_x + y^2 L_y`.
    pub fn second_order_s_cauchy(&self, u: &[f64]) -> f64 {
        let c = self.cdf(u);
        if c == 0.0 {
            return 0.0;
        }
        let (x, y) = (-u[0].ln(), -u[1].ln());
        let l = self.stdf(x, y);
        let (lx, ly) = self.stdf_gradient(x, y);
        c * (x * x * lx + y * y * ly - l * l)
    }
}
