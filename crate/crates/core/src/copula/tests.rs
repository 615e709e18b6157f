use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opc_beta() -> f64 {
    2f64.ln() / 1.75f64.ln()
}

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let p = (x[i] - x[j]) * (y[i] - y[j]);
            s += (p > 0.0) as i64 - (p < 0.0) as i64;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

/// Kolmogorov–Smirnov uniformity at level 0.01 (asymptotic critical value).
fn ks_uniform_ok(xs: &[f64]) -> bool {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    d < 1.628 / n.sqrt()
}

fn models() -> Vec<CopulaModel> {
    vec![
        CopulaModel::gumbel_hougaard(2.0, 2).unwrap(),
        CopulaModel::outer_power_clayton(1.0, opc_beta(), 2).unwrap(),
        CopulaModel::t(5, 0.5, 2).unwrap(),
        CopulaModel::t(3, 0.25, 2).unwrap(),
    ]
}

#[test]
fn gumbel_cdf_examples() {
    let g = CopulaModel::gumbel_hougaard(1.0, 2).unwrap();
    close(g.cdf(&[0.5, 0.5]).unwrap(), 0.25, 1e-15);
    let g = CopulaModel::gumbel_hougaard(2.0, 2).unwrap();
    let e = (-1f64).exp();
    close(g.cdf(&[e, e]).unwrap(), 0.2431167344, 1e-10);
    close(g.cdf(&[0.0, 0.7]).unwrap(), 0.0, 0.0);
}

#[test]
fn clayton_cdf_example() {
    let c = CopulaModel::outer_power_clayton(1.0, 1.0, 2).unwrap();
    close(c.cdf(&[0.5, 0.5]).unwrap(), 1.0 / 3.0, 1e-15);
    close(c.cdf(&[0.5, 0.0]).unwrap(), 0.0, 0.0);
}

#[test]
fn cdf_validates_input() {
    let g = CopulaModel::gumbel_hougaard(2.0, 3).unwrap();
    assert!(matches!(g.cdf(&[0.5, 0.5]), Err(Error::DimensionMismatch { expected: 3, got: 2 })));
    assert!(g.cdf(&[0.5, 1.5, 0.5]).is_err());
    assert!(CopulaModel::gumbel_hougaard(0.5, 2).is_err());
    assert!(CopulaModel::outer_power_clayton(0.0, 1.0, 2).is_err());
    assert!(CopulaModel::t(3, 1.0, 2).is_err());
    assert!(CopulaModel::t(3, -0.6, 3).is_err());
    assert!(CopulaModel::t(0, 0.2, 2).is_err());
}

#[test]
fn uniform_margins() {
    for m in models() {
        for &u in &[0.1, 0.37, 0.8] {
            close(m.cdf(&[u, 1.0]).unwrap(), u, 1e-6);
            close(m.cdf(&[1.0, u]).unwrap(), u, 1e-6);
        }
    }
}

#[test]
fn limit_copula_examples() {
    let c = CopulaModel::outer_power_clayton(1.0, opc_beta(), 2).unwrap();
    close(c.limit_copula(&[0.5, 0.5]).unwrap(), 0.5f64.powf(1.75), 1e-12);
    close(c.limit_copula(&[0.5, 0.5]).unwrap(), 0.2973017788, 1e-9);
    for m in models() {
        assert_eq!(m.limit_copula(&[0.0, 0.3]).unwrap(), 0.0);
    }
    // L(x, x) = 2 x t_2(sqrt 2) for nu = 1, theta = 0
    let t = CopulaModel::t(1, 0.0, 2).unwrap();
    let t2_sqrt2 = 0.5 + 2f64.sqrt() / 4.0;
    let expected = (-2.0 * 2f64.ln() * t2_sqrt2).exp();
    close(t.limit_copula(&[0.5, 0.5]).unwrap(), expected, 1e-12);
    assert!(matches!(
        CopulaModel::t(4, 0.3, 3).unwrap().limit_copula(&[0.5; 3]),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn t_stable_tail_dependence_examples() {
    let t = CopulaModel::t(1, 0.0, 2).unwrap();
    for &x in &[0.3, 1.0, 7.5] {
        close(t.stable_tail_dependence(&[x, 0.0]).unwrap(), x, 0.0);
        close(t.stable_tail_dependence(&[0.0, x]).unwrap(), x, 0.0);
    }
    let l11 = t.stable_tail_dependence(&[1.0, 1.0]).unwrap();
    close(l11, 1.707106781, 1e-8);
    close(t.stable_tail_dependence(&[2.0, 2.0]).unwrap(), 2.0 * l11, 1e-12);
    assert!(t.stable_tail_dependence(&[0.0, 0.0]).is_err());
    assert!(t.stable_tail_dependence(&[-1.0, 0.5]).is_err());
}

#[test]
fn t_stdf_is_bounded_and_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(nu, theta) in &[(1, 0.0), (3, 0.25), (5, 0.5), (2, -0.4)] {
        let l = TLimit::new(nu, theta).unwrap();
        for _ in 0..200 {
            let x: f64 = rng.random_range(0.01..5.0);
            let y: f64 = rng.random_range(0.01..5.0);
            let s: f64 = rng.random_range(0.1..10.0);
            let v = l.stdf(x, y);
            assert!(v >= x.max(y) - 1e-12 && v <= x + y + 1e-12);
            close(l.stdf(s * x, s * y), s * v, 1e-10 * s * v);
        }
    }
}

#[test]
fn clayton_second_order_examples() {
    let e = (-1f64).exp();
    let c1 = CopulaModel::outer_power_clayton(1.0, 1.0, 2).unwrap();
    close(c1.second_order_s(&[e, e]).unwrap(), 2.0 * (-2f64).exp(), 1e-12);

    let beta = opc_beta();
    let a = CopulaModel::outer_power_clayton(1.0, beta, 2).unwrap();
    let b = CopulaModel::outer_power_clayton(2.0, beta, 2).unwrap();
    for &u in &[[0.3, 0.6], [0.5, 0.5], [0.9, 0.2]] {
        close(b.second_order_s(&u).unwrap(), 2.0 * a.second_order_s(&u).unwrap(), 1e-14);
    }

    // S(u^s)/C_inf(u^s) = s^2 S(u)/C_inf(u)
    let s = 2.0;
    let u = [0.5, 0.5];
    let us = [0.25, 0.25];
    let lhs = a.second_order_s(&us).unwrap() / a.limit_copula(&us).unwrap();
    let rhs = s * s * a.second_order_s(&u).unwrap() / a.limit_copula(&u).unwrap();
    close(lhs, rhs, 1e-12 * rhs.abs());

    assert!(a.second_order_s(&[0.0, 0.5]).is_err());
    assert!(matches!(
        CopulaModel::t(2, 0.3, 2).unwrap().second_order_s(&[0.5, 0.5]),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn cauchy_second_order_is_homogeneous() {
    let t = CopulaModel::t(1, 0.3, 2).unwrap();
    let u = [0.5, 0.4];
    let us = [0.25, 0.16];
    let lhs = t.second_order_s(&us).unwrap() / t.limit_copula(&us).unwrap();
    let rhs = 4.0 * t.second_order_s(&u).unwrap() / t.limit_copula(&u).unwrap();
    close(lhs, rhs, 1e-5 * rhs.abs());
}

#[test]
fn second_order_metadata() {
    let c = CopulaModel::outer_power_clayton(1.0, 1.5, 2).unwrap();
    let so = c.second_order().unwrap();
    assert_eq!(so.rho_phi, -1.0);
    close(so.phi.eval(10.0), 0.05, 1e-15);
    assert!(CopulaModel::gumbel_hougaard(2.0, 2).unwrap().second_order().is_none());
    assert_eq!(CopulaModel::t(1, 0.2, 2).unwrap().second_order().unwrap().rho_phi, -1.0);
    assert_eq!(CopulaModel::t(2, 0.2, 2).unwrap().second_order().unwrap().rho_phi, -1.0);
    close(CopulaModel::t(5, 0.2, 2).unwrap().second_order().unwrap().rho_phi, -0.4, 1e-15);
}

#[test]
fn auxiliary_rates_vary_regularly() {
    for phi in [AuxiliaryRate::Reciprocal { c: 2.0 }, AuxiliaryRate::Power { rho: -0.4 }] {
        let rho = match phi {
            AuxiliaryRate::Reciprocal { .. } => -1.0,
            AuxiliaryRate::Power { rho } => rho,
        };
        for &x in &[0.5, 2.0, 3.3] {
            let m: f64 = 1e6;
            let r = phi.eval((m * x).floor()) / phi.eval(m);
            close(r, f64::powf(x, rho), 1e-5);
        }
    }
}

#[test]
fn limit_partial_derivative_examples() {
    let g1 = CopulaModel::gumbel_hougaard(1.0, 2).unwrap();
    close(g1.limit_partial_derivative(0, &[0.5, 0.5]).unwrap(), 0.5, 1e-15);
    close(g1.limit_partial_derivative(0, &[0.3, 0.8]).unwrap(), 0.8, 1e-14);
    let g2 = CopulaModel::gumbel_hougaard(2.0, 2).unwrap();
    let r = 2f64.sqrt();
    let diag = 0.5f64.powf(r - 1.0) * 2f64.powf(0.5 - 1.0);
    close(diag, 0.530633049, 1e-9);
    close(g2.limit_partial_derivative(0, &[0.5, 0.5]).unwrap(), diag, 1e-13);
    close(g2.limit_partial_derivative(1, &[0.5, 0.5]).unwrap(), diag, 1e-13);
    assert_eq!(g2.limit_partial_derivative(0, &[1.0, 0.5]).unwrap(), 0.0);
    assert_eq!(g2.limit_partial_derivative(1, &[0.4, 0.0]).unwrap(), 0.0);
}

#[test]
fn partial_derivatives_match_finite_differences() {
    let h = 1e-6;
    let evs = [
        CopulaModel::gumbel_hougaard(1.7, 3).unwrap(),
        CopulaModel::t(1, 0.3, 2).unwrap(),
        CopulaModel::t(4, -0.2, 2).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in &evs {
        let ev = m.attractor().unwrap();
        for _ in 0..50 {
            let u: Vec<f64> = (0..m.dim()).map(|_| rng.random_range(0.05..0.95)).collect();
            for j in 0..m.dim() {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (ev.cdf(&up) - ev.cdf(&dn)) / (2.0 * h);
                close(ev.partial(j, &u), fd, 1e-5);
            }
        }
    }
}

#[test]
fn cdfs_are_d_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let mut all = models();
    all.push(CopulaModel::gumbel_hougaard(1.4, 3).unwrap());
    all.push(CopulaModel::outer_power_clayton(2.0, 1.3, 3).unwrap());
    for m in &all {
        let d = m.dim();
        let boxes = if matches!(m, CopulaModel::T(_)) { 1000 } else { 2000 };
        for _ in 0..boxes {
            let (lo, hi): (Vec<f64>, Vec<f64>) = (0..d)
                .map(|_| {
                    let a = grid[rng.random_range(0..grid.len())];
                    let b = grid[rng.random_range(0..grid.len())];
                    (a.min(b), a.max(b))
                })
                .unzip();
            let mut mass = 0.0;
            for corner in 0..(1usize << d) {
                let v: Vec<f64> = (0..d).map(|j| if corner >> j & 1 == 1 { hi[j] } else { lo[j] }).collect();
                let sign = if (d - corner.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
                mass += sign * m.cdf(&v).unwrap();
            }
            assert!(mass >= -1e-7, "{} box mass {mass}", m.family());
        }
    }
}

#[test]
fn limit_copulas_are_max_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let evs = [
        CopulaModel::gumbel_hougaard(2.5, 2).unwrap(),
        CopulaModel::outer_power_clayton(1.0, opc_beta(), 4).unwrap(),
        CopulaModel::t(3, 0.25, 2).unwrap(),
        CopulaModel::t(1, 0.0, 2).unwrap(),
    ];
    for m in &evs {
        let ev = m.attractor().unwrap();
        for _ in 0..100 {
            let u: Vec<f64> = (0..m.dim()).map(|_| rng.random_range(0.01..0.99)).collect();
            for &s in &[0.5, 2.0, 3.7] {
                let us: Vec<f64> = u.iter().map(|x| x.powf(1.0 / s)).collect();
                close(ev.cdf(&us).powf(s), ev.cdf(&u), 1e-12);
            }
        }
    }
}

fn grid9() -> Vec<[f64; 2]> {
    let g: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    g.iter().flat_map(|&a| g.iter().map(move |&b| [a, b])).collect()
}

#[test]
fn clayton_block_maxima_converge() {
    let c = CopulaModel::outer_power_clayton(1.0, opc_beta(), 2).unwrap();
    let sup = |m: f64| {
        grid9()
            .iter()
            .map(|u| (c.block_maxima_cdf(u, m).unwrap() - c.limit_copula(u).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&m| sup(m)).collect();
    assert!(errs[1] <= errs[0] + 1e-9 && errs[2] <= errs[1] + 1e-9, "{errs:?}");
    assert!(errs[2] < 0.01, "{errs:?}");
}

#[test]
fn clayton_second_order_expansion() {
    let c = CopulaModel::outer_power_clayton(1.0, opc_beta(), 2).unwrap();
    let m = 2000.0;
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for u in grid9() {
        let diff = c.block_maxima_cdf(&u, m).unwrap() - c.limit_copula(&u).unwrap();
        let s = c.second_order_s(&u).unwrap();
        first = first.max(m * diff.abs());
        second = second.max(m * (diff - s / (2.0 * m)).abs());
    }
    assert!(second < 0.25 * first, "{second} vs {first}");
}

#[test]
fn sampler_kendall_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let g1 = CopulaModel::gumbel_hougaard(1.0, 2).unwrap().sample(10_000, &mut rng).unwrap();
    close(kendall_tau(g1.column(0), g1.column(1)), 0.0, 0.03);
    let g2 = CopulaModel::gumbel_hougaard(2.0, 2).unwrap().sample(10_000, &mut rng).unwrap();
    close(kendall_tau(g2.column(0), g2.column(1)), 0.5, 0.03);
}

#[test]
fn sampled_margins_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut all = models();
    all.push(CopulaModel::outer_power_clayton(1.0, opc_beta(), 4).unwrap());
    all.push(CopulaModel::t(5, 0.5, 4).unwrap());
    for m in &all {
        let data = m.sample(10_000, &mut rng).unwrap();
        for j in 0..m.dim() {
            let col = data.column(j);
            assert!(col.iter().all(|&x| x > 0.0 && x < 1.0));
            assert!(ks_uniform_ok(col), "{} margin {j}", m.family());
        }
    }
}

#[test]
fn sampler_matches_cdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let g: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9].to_vec();
    for m in &models() {
        let data = m.sample(100_000, &mut rng).unwrap();
        let n = data.n() as f64;
        for &a in &g {
            for &b in &g {
                let emp = (0..data.n())
                    .filter(|&i| data.get(i, 0) <= a && data.get(i, 1) <= b)
                    .count() as f64
                    / n;
                close(emp, m.cdf(&[a, b]).unwrap(), 0.01);
            }
        }
    }
}

#[test]
fn clayton_conditional_sampler_matches_cdf() {
    let c = OuterPowerClayton::new(1.0, opc_beta(), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draws: Vec<[f64; 2]> = (0..50_000).map(|_| c.sample_conditional(&mut rng)).collect();
    for &(a, b) in &[(0.3, 0.3), (0.5, 0.8), (0.9, 0.2)] {
        let emp = draws.iter().filter(|r| r[0] <= a && r[1] <= b).count() as f64 / draws.len() as f64;
        close(emp, c.cdf(&[a, b]), 0.01);
    }
}

#[test]
fn sampling_is_deterministic() {
    for m in models() {
        let a = m.sample(200, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = m.sample(200, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }
}
