//! Frailty variables for Marshall–Olkin sampling of Archimedean copulas.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

/// Positive stable variable with Laplace transform `exp(-t^alpha)`,
/// `alpha in (0, 1]`, via Kanter's representation.
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let u: f64 = std::f64::consts::PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = ((1.0 - alpha) * u).sin() / e;
    a * b.powf((1.0 - alpha) / alpha)
}

/// Gamma(shape, 1) draw.
pub fn gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("shape validated by caller").sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stable_laplace_transform_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alpha = 0.6;
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| positive_stable(alpha, &mut rng)).collect();
        for &t in &[0.5, 1.0, 2.0] {
            let lt = draws.iter().map(|v| (-t * v).exp()).sum::<f64>() / n as f64;
            let expect = (-f64::powf(t, alpha)).exp();
            assert!((lt - expect).abs() < 5e-3, "t={t}: {lt} vs {expect}");
        }
    }
}
