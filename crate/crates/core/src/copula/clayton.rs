use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::frailty::{gamma, positive_stable};
use super::gumbel::GumbelHougaard;
use crate::error::{invalid, Result};

/// Outer-power transformation of a Clayton copula,
/// `D(u) = [1 + {sum_j (u_j^-theta - 1)^beta}^(1/beta)]^(-1/theta)`.
///
/// Archimedean with generator `psi(t) = (1 + t^(1/beta))^(-1/theta)`; in the
/// domain of attraction of the Gumbel–Hougaard copula with the same `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterPowerClayton {
    theta: f64,
    beta: f64,
    dim: usize,
}

impl OuterPowerClayton {
    pub fn new(theta: f64, beta: f64, dim: usize) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(invalid(format!("outer-power Clayton theta must be > 0, got {theta}")));
        }
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(invalid(format!("outer-power Clayton beta must be >= 1, got {beta}")));
        }
        if dim < 2 {
            return Err(invalid(format!("copula dimension must be >= 2, got {dim}")));
        }
        Ok(Self { theta, beta, dim })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn attractor(&self) -> GumbelHougaard {
        GumbelHougaard::new(self.beta, self.dim).expect("parameters already validated")
    }

    pub fn cdf(&self, u: &[f64]) -> f64 {
        self.block_maxima_cdf(u, 1.0)
    }

    /// Copula of i.i.d. block maxima, `D(u^(1/m))^m`, evaluated without
    /// cancellation for large `m`.
    pub fn block_maxima_cdf(&self, u: &[f64], m: f64) -> f64 {
        if u.iter().any(|&ui| ui <= 0.0) {
            return 0.0;
        }
        let inv: Vec<f64> = u.iter().map(|&ui| (-self.theta * ui.ln() / m).exp_m1()).collect();
        let s = self.power_sum(&inv);
        (-(m / self.theta) * s.ln_1p()).exp()
    }

    /// `(sum t_j^beta)^(1/beta)` with overflow-safe scaling.
    fn power_sum(&self, t: &[f64]) -> f64 {
        let tmax = t.iter().cloned().fold(0.0, f64::max);
        if tmax == 0.0 || tmax.is_infinite() {
            return tmax;
        }
        let s: f64 = t.iter().map(|&ti| (ti / tmax).powf(self.beta)).sum();
        tmax * s.powf(1.0 / self.beta)
    }

    /// `Lambda(u; beta) = C_inf(u) {(sum x^beta)^(2/beta) - (sum x^beta)^(1/beta - 1) sum x^(beta+1)}`
    /// with `x_j = -log u_j`.
    pub fn lambda(&self, u: &[f64]) -> f64 {
        let c = self.attractor().cdf(u);
        if c == 0.0 {
            return 0.0;
        }
        let x: Vec<f64> = u.iter().map(|&ui| -ui.ln()).collect();
        let b = self.beta;
        let s: f64 = x.iter().map(|xi| xi.powf(b)).sum();
        if s == 0.0 {
            return 0.0;
        }
        let t: f64 = x.iter().map(|xi| xi.powf(b + 1.0)).sum();
        c * (s.powf(2.0 / b) - s.powf(1.0 / b - 1.0) * t)
    }

    /// Second-order function `S = theta * Lambda`.
    pub fn second_order_s(&self, u: &[f64]) -> f64 {
        self.theta * self.lambda(u)
    }

    fn psi(&self, t: f64) -> f64 {
        (-(1.0 / self.theta) * t.powf(1.0 / self.beta).ln_1p()).exp()
    }

    fn psi_inv(&self, u: f64) -> f64 {
        (-self.theta * u.ln()).exp_m1().powf(self.beta)
    }

    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        // V = S * G^beta has Laplace transform psi when S is positive
        // stable(1/beta) and G ~ Gamma(1/theta)
        let g = gamma(1.0 / self.theta, rng);
        let s = positive_stable(1.0 / self.beta, rng);
        let v = s * g.powf(self.beta);
        for o in out.iter_mut() {
            let e: f64 = Exp1.sample(rng);
            *o = self.psi(e / v);
        }
    }

    /// `P(U_2 <= v | U_1 = u)` for the bivariate copula.
    pub fn conditional_cdf(&self, v: f64, u: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let t1 = self.psi_inv(u);
        let t = t1 + self.psi_inv(v);
        // psi'(t) / psi'(t1) in log space
        let log_dpsi = |t: f64| {
            let r = t.powf(1.0 / self.beta);
            -(1.0 / self.theta + 1.0) * r.ln_1p() + (1.0 / self.beta - 1.0) * t.ln()
        };
        (log_dpsi(t) - log_dpsi(t1)).exp().clamp(0.0, 1.0)
    }

    /// Bivariate draw by conditional inversion: `U_1 = w_1`, `U_2` solves
    /// `P(U_2 <= v | U_1 = w_1) = w_2` by bisection to 1e-12.
    pub fn sample_conditional<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let open01 = |rng: &mut R| loop {
            let w: f64 = rng.random();
            if w > 0.0 {
                return w;
            }
        };
        let u = open01(rng);
        let w = open01(rng);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.conditional_cdf(mid, u) < w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        [u, (0.5 * (lo + hi)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)]
    }
}
