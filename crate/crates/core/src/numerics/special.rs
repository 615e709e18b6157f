//! Univariate normal and Student t distribution functions.

use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Student t density with `nu` degrees of freedom.
pub fn t_pdf(x: f64, nu: f64) -> f64 {
    let log_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI).ln();
    (log_norm - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
}

/// Lower tail `P(T <= x)` for `x <= 0`, accurate far in the tail.
fn t_lower_tail(x: f64, nu: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x * x))
}

/// Student t CDF with `nu > 0` degrees of freedom.
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if nu == 1.0 {
        return 0.5 + x.atan() / std::f64::consts::PI;
    }
    if nu == 2.0 {
        return 0.5 + x / (2.0 * (2.0 + x * x).sqrt());
    }
    if x <= 0.0 {
        t_lower_tail(x, nu)
    } else {
        1.0 - t_lower_tail(-x, nu)
    }
}

/// Student t upper tail `P(T > x)`.
pub fn t_sf(x: f64, nu: f64) -> f64 {
    t_cdf(-x, nu)
}

/// Student t quantile.
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    if nu == 1.0 {
        return (std::f64::consts::PI * (p - 0.5)).tan();
    }
    if nu == 2.0 {
        return (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
    }
    let (tail, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let z = inv_beta_reg(0.5 * nu, 0.5, 2.0 * tail);
    let mut x = -(nu * (1.0 / z - 1.0)).sqrt();
    // polish on the lower tail where the CDF carries full relative precision
    for _ in 0..3 {
        let f = t_lower_tail(x, nu) - tail;
        let d = t_pdf(x, nu);
        if d <= 0.0 || !d.is_finite() {
            break;
        }
        let step = f / d;
        let next = (x - step).min(0.0);
        if !next.is_finite() {
            break;
        }
        x = next;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    sign * x.abs()
}

/// Chi-square quantile with `nu` degrees of freedom.
pub fn chi_square_quantile(p: f64, nu: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let k = 0.5 * nu;
    // Wilson–Hilferty start, then safeguarded Newton on P(k, x/2)
    let z = normal_quantile(p);
    let c = 2.0 / (9.0 * nu);
    let mut x = (nu * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8);
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..100 {
        let f = gamma_lr(k, 0.5 * x) - p;
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let log_pdf = (k - 1.0) * (0.5 * x).ln() - 0.5 * x - ln_gamma(k) - std::f64::consts::LN_2;
        let d = log_pdf.exp();
        let mut next = x - f / d;
        if !next.is_finite() || next <= lo || next >= hi {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1.0) };
        }
        if (next - x).abs() <= 1e-14 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

/// Standard normal quantile (Acklam's rational approximation polished by
/// one Halley step).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let plow = 0.02425;
    let x = if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_cdf_closed_forms_agree_with_incomplete_beta() {
        for &x in &[-30.0, -3.0, -0.7, 0.0, 0.4, 2.5, 12.0] {
            for &nu in &[1.0, 2.0] {
                let generic = if x <= 0.0 {
                    t_lower_tail(x, nu)
                } else {
                    1.0 - t_lower_tail(-x, nu)
                };
                assert!((t_cdf(x, nu) - generic).abs() < 1e-13, "x={x} nu={nu}");
            }
        }
    }

    #[test]
    fn t2_at_sqrt2() {
        assert!((t_cdf(2f64.sqrt(), 2.0) - (0.5 + 2f64.sqrt() / 4.0)).abs() < 1e-15);
        assert!((t_cdf(1.0, 2.0) - 0.5 * (1.0 + 1.0 / 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn t_quantile_inverts_cdf() {
        for &nu in &[1.0, 2.0, 3.0, 5.0, 6.0, 30.0] {
            for &p in &[1e-10, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
                let x = t_quantile(p, nu);
                let back = t_cdf(x, nu);
                assert!((back - p).abs() < 1e-12 * p.min(1.0 - p).max(1e-3), "nu={nu} p={p} back={back}");
            }
        }
    }

    #[test]
    fn t_pdf_integrates_to_cdf_difference() {
        let nu = 5.0;
        let r = crate::numerics::quadrature::integrate(
            |x| t_pdf(x, nu),
            -1.0,
            2.0,
            crate::numerics::quadrature::QuadOptions::abs(1e-13),
        )
        .unwrap();
        assert!((r.value - (t_cdf(2.0, nu) - t_cdf(-1.0, nu))).abs() < 1e-12);
    }

    #[test]
    fn normal_quantile_round_trip() {
        for &p in &[1e-12, 1e-5, 0.02, 0.5, 0.9, 0.999999] {
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-14_f64.max(1e-12 * p), "p={p}");
        }
    }

    #[test]
    fn chi_square_quantile_round_trip() {
        for &nu in &[1.0, 3.0, 5.0, 20.0] {
            for &p in &[1e-6, 0.05, 0.5, 0.95, 0.999999] {
                let x = chi_square_quantile(p, nu);
                assert!((gamma_lr(0.5 * nu, 0.5 * x) - p).abs() < 1e-11, "nu={nu} p={p}");
            }
        }
    }
}
