//! Multivariate Student t probabilities `P(T_1 <= b_1, ..., T_d <= b_d)` for
//! an equicorrelated scale matrix (unit diagonal, common off-diagonal `rho`).
//!
//! - `d = 2`: one-dimensional integral over the first coordinate using the
//!   conditional t law of the second.
//! - `d >= 3`, `rho >= 0`: one-factor representation, a nested deterministic
//!   integral over the chi radius and the common normal factor.
//! - `d >= 3`, `rho < 0`: separation-of-variables randomized lattice rule
//!   with a fixed seed.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use super::quadrature::{integrate, QuadOptions};
use super::special::{chi_square_quantile, normal_cdf, normal_quantile, t_cdf, t_pdf};

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-9;

/// Joint CDF of an equicorrelated multivariate t vector.
///
/// Infinite upper limits are allowed; `-inf` anywhere yields 0.
pub fn equicorrelated_t_cdf(upper: &[f64], rho: f64, nu: f64) -> f64 {
    if upper.contains(&f64::NEG_INFINITY) {
        return 0.0;
    }
    let finite: Vec<f64> = upper.iter().copied().filter(|b| b.is_finite()).collect();
    match finite.len() {
        0 => 1.0,
        1 => t_cdf(finite[0], nu),
        2 => bivariate(finite[0], finite[1], rho, nu),
        _ if rho >= 0.0 => one_factor(&finite, rho, nu),
        _ => lattice(&finite, rho, nu),
    }
}

fn bivariate(a: f64, b: f64, rho: f64, nu: f64) -> f64 {
    let scale = (1.0 - rho * rho) / (nu + 1.0);
    let integrand = |phi: f64| {
        let x = phi.tan();
        let sec2 = 1.0 + x * x;
        let cond = (b - rho * x) / ((nu + x * x) * scale).sqrt();
        t_pdf(x, nu) * sec2 * t_cdf(cond, nu + 1.0)
    };
    let upper = a.atan();
    integrate(integrand, -std::f64::consts::FRAC_PI_2, upper, QuadOptions::abs(INNER_TOL))
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
        .clamp(0.0, 1.0)
}

/// Density of `S = sqrt(W / nu)`, `W ~ chi^2_nu`.
fn radius_density(s: f64, nu: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let log = std::f64::consts::LN_2 + 0.5 * nu * (0.5 * nu).ln() - ln_gamma(0.5 * nu) + (nu - 1.0) * s.ln()
        - 0.5 * nu * s * s;
    log.exp()
}

fn one_factor(upper: &[f64], rho: f64, nu: f64) -> f64 {
    let loading = rho.sqrt();
    let resid = (1.0 - rho).sqrt();
    let inner = |s: f64| -> f64 {
        if rho == 0.0 {
            return upper.iter().map(|&b| normal_cdf(b * s)).product();
        }
        let f = |z: f64| {
            let p: f64 = upper.iter().map(|&b| normal_cdf((b * s - loading * z) / resid)).product();
            super::special::normal_pdf(z) * p
        };
        integrate(f, -9.0, 9.0, QuadOptions::abs(INNER_TOL))
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let outer = |s: f64| radius_density(s, nu) * inner(s);
    let hi = 1.0 + 12.0 / nu.sqrt();
    integrate(outer, 0.0, hi.max(10.0), QuadOptions::abs(OUTER_TOL))
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
        .clamp(0.0, 1.0)
}

const LATTICE_POINTS: usize = 20_000;
const LATTICE_SHIFTS: usize = 12;
const LATTICE_SEED: u64 = 0x5eed_b10c;

fn lattice(upper: &[f64], rho: f64, nu: f64) -> f64 {
    let d = upper.len();
    let corr = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { rho });
    let chol = match corr.cholesky() {
        Some(c) => c.l(),
        None => return f64::NAN,
    };
    const PRIMES: [f64; 12] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0];
    let gen: Vec<f64> = (0..d).map(|k| PRIMES[k % PRIMES.len()].sqrt().fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(LATTICE_SEED);
    let mut estimates = Vec::with_capacity(LATTICE_SHIFTS);
    let mut y = vec![0.0; d];
    for _ in 0..LATTICE_SHIFTS {
        let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let mut acc = 0.0;
        for k in 1..=LATTICE_POINTS {
            for anti in [false, true] {
                let w = |j: usize| {
                    let x = (k as f64 * gen[j] + shift[j]).fract();
                    // baker's transform
                    let t = (2.0 * x - 1.0).abs();
                    if anti {
                        1.0 - t
                    } else {
                        t
                    }
                };
                let s = (chi_square_quantile(w(0).clamp(1e-15, 1.0 - 1e-15), nu) / nu).sqrt();
                let mut prod = 1.0;
                for i in 0..d {
                    let shift_i: f64 = (0..i).map(|j| chol[(i, j)] * y[j]).sum();
                    let e = normal_cdf((upper[i] * s - shift_i) / chol[(i, i)]);
                    prod *= e;
                    if i + 1 < d {
                        let wi = if i == 0 { w(d - 1) } else { w(i) };
                        y[i] = normal_quantile((wi * e).clamp(1e-300, 1.0 - 1e-16));
                    }
                }
                acc += prod;
            }
        }
        estimates.push(acc / (2 * LATTICE_POINTS) as f64);
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    mean.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_bivariate_cauchy_factorises_only_at_zero_corr_in_normal_limit() {
        // with rho = 0 and large nu the t vector is nearly independent normal
        let p = equicorrelated_t_cdf(&[0.3, -0.4], 0.0, 1e6);
        let expect = normal_cdf(0.3) * normal_cdf(-0.4);
        assert!((p - expect).abs() < 1e-5);
    }

    #[test]
    fn bivariate_orthant_probability() {
        // P(T1 <= 0, T2 <= 0) = 1/4 + asin(rho) / (2 pi) for any nu
        for &nu in &[1.0, 3.0, 7.0] {
            for &rho in &[-0.6, 0.0, 0.5, 0.9] {
                let p = equicorrelated_t_cdf(&[0.0, 0.0], rho, nu);
                let expect = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
                assert!((p - expect).abs() < 1e-9, "nu={nu} rho={rho} p={p}");
            }
        }
    }

    #[test]
    fn trivariate_orthant_probability() {
        // P(all <= 0) = 1/8 + 3 asin(rho) / (4 pi) for an equicorrelated triple
        for &nu in &[2.0, 5.0] {
            for &rho in &[0.0, 0.3, 0.7] {
                let p = equicorrelated_t_cdf(&[0.0, 0.0, 0.0], rho, nu);
                let expect = 0.125 + 3.0 * f64::asin(rho) / (4.0 * std::f64::consts::PI);
                assert!((p - expect).abs() < 1e-7, "nu={nu} rho={rho} p={p}");
            }
            let p = equicorrelated_t_cdf(&[0.0, 0.0, 0.0], -0.3, nu);
            let expect = 0.125 + 3.0 * f64::asin(-0.3) / (4.0 * std::f64::consts::PI);
            assert!((p - expect).abs() < 2e-4, "lattice nu={nu} p={p}");
        }
    }

    #[test]
    fn infinite_limits_marginalise() {
        let p = equicorrelated_t_cdf(&[0.7, f64::INFINITY, f64::INFINITY], 0.4, 4.0);
        assert!((p - t_cdf(0.7, 4.0)).abs() < 1e-14);
        assert_eq!(equicorrelated_t_cdf(&[0.7, f64::NEG_INFINITY], 0.4, 4.0), 0.0);
    }

    #[test]
    fn deterministic_and_lattice_routes_agree_near_zero_corr() {
        let b = [0.2, -0.5, 1.1];
        let exact = one_factor(&b, 0.0, 4.0);
        let qmc = lattice(&b, -1e-9, 4.0);
        assert!((exact - qmc).abs() < 2e-4, "{exact} vs {qmc}");
    }
}
