//! The fifteen benchmark experiments: bivariate models M1 to M5 and the
//! four- and eight-dimensional models M6 to M15.

use super::spec::{EstimatorKind, EstimatorSpec, ExperimentSpec, RhoSettings};
use crate::copula::CopulaModel;
use crate::error::{Error, Result};
use crate::series::MovingMaxSpec;

pub const PRESET_NAMES: [&str; 15] = [
    "M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "M9", "M10", "M11", "M12", "M13", "M14", "M15",
];

/// Default sample size and replication count for desk-scale runs.
pub const DESK_N: usize = 1000;
pub const DESK_REPS: usize = 200;
/// Replication count of the full-scale study.
pub const FULL_REPS: usize = 1000;
pub const DEFAULT_SEED: u64 = 20240607;

/// `beta` such that the outer-power Clayton attractor has
/// `C_inf(1/2, 1/2) = (1/2)^{2 - 0.25}` in two dimensions.
pub fn opc_beta() -> f64 {
    2f64.ln() / 1.75f64.ln()
}

enum Family {
    Opc,
    T { nu: u32, theta: f64 },
}

/// First-lag coefficients: `(0.25, 0.5)` when bivariate, alternating
/// `0.25, 0.75` otherwise.
fn lag_row(d: usize) -> Vec<f64> {
    if d == 2 {
        vec![0.25, 0.5]
    } else {
        (0..d).map(|j| if j % 2 == 0 { 0.25 } else { 0.75 }).collect()
    }
}

fn grid_values(d: usize) -> Vec<f64> {
    match d {
        2 => (1..=9).map(|i| i as f64 / 10.0).collect(),
        4 => vec![0.25, 0.5, 0.75],
        _ => vec![0.25, 0.75],
    }
}

fn build(name: &str, d: usize, family: Family, moving: bool) -> Result<ExperimentSpec> {
    let base = match family {
        Family::Opc => CopulaModel::outer_power_clayton(1.0, opc_beta(), d)?,
        Family::T { nu, theta } => CopulaModel::t(nu, theta, d)?,
    };
    let model = if moving {
        MovingMaxSpec::new(base, vec![lag_row(d)])?
    } else {
        MovingMaxSpec::iid(base)
    };
    let kinds: &[EstimatorKind] = if d == 2 {
        &EstimatorKind::ALL
    } else {
        &[
            EstimatorKind::Sliding,
            EstimatorKind::BcNaive,
            EstimatorKind::BcAgg,
            EstimatorKind::BcReg,
        ]
    };
    Ok(ExperimentSpec {
        name: name.to_string(),
        model,
        n: DESK_N,
        reps: DESK_REPS,
        grid_values: grid_values(d),
        block_sizes: (1..=20).collect(),
        estimators: kinds.iter().map(|&k| EstimatorSpec::default_for(k)).collect(),
        rho: RhoSettings::default(),
        seed: DEFAULT_SEED,
    })
}

/// Desk-scale specification of a named benchmark experiment.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    const T5: Family = Family::T { nu: 5, theta: 0.5 };
    const T3: Family = Family::T { nu: 3, theta: 0.25 };
    match name.trim().to_ascii_uppercase().as_str() {
        "M1" => build("M1", 2, Family::Opc, false),
        "M2" => build("M2", 2, Family::Opc, true),
        "M3" => build("M3", 2, T5, false),
        "M4" => build("M4", 2, T5, true),
        "M5" => build("M5", 2, T3, true),
        "M6" => build("M6", 4, Family::Opc, false),
        "M7" => build("M7", 4, Family::Opc, true),
        "M8" => build("M8", 4, T5, false),
        "M9" => build("M9", 4, T5, true),
        "M10" => build("M10", 4, T3, true),
        "M11" => build("M11", 8, Family::Opc, false),
        "M12" => build("M12", 8, Family::Opc, true),
        "M13" => build("M13", 8, T5, false),
        "M14" => build("M14", 8, T5, true),
        "M15" => build("M15", 8, T3, true),
        _ => Err(Error::InvalidParameter(format!(
            "unknown preset '{name}', expected one of M1..M15"
        ))),
    }
}

/// Same experiment with the full replication count.
pub fn full_scale(mut spec: ExperimentSpec) -> ExperimentSpec {
    spec.reps = FULL_REPS;
    spec
}
