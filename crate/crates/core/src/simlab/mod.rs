//! Monte Carlo experiments: specifications, presets, the parallel runner
//! and CSV output.

mod kv;
mod output;
mod presets;
mod runner;
mod spec;

pub use kv::{format_list, parse_list, KvMap};
pub use output::{
    emit, manifest, read_data_csv, read_summary_csv, write_data_csv, write_estimates_csv, write_failures_csv, write_per_point_csv, write_summary_csv, EmitOptions,
    FAILURES_FILE, MANIFEST_FILE, PER_POINT_FILE, SUMMARY_FILE, SUMMARY_HEADER,
};
pub use presets::{full_scale, opc_beta, preset, DEFAULT_SEED, DESK_N, DESK_REPS, FULL_REPS, PRESET_NAMES};
pub use runner::{replication_rng, run, CellResult, PointStats, Stat, SummaryRow, SummaryTable, REPORT_SCALE};
pub use spec::{
    model_from_kv, model_to_kv, parse_sizes, parse_values, BlockSetExpr, EstimatorKind, EstimatorSpec,
    ExperimentSpec, RhoSettings, RhoSpec,
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_kv_round_trip() {
        for name in ["M1", "M2", "M5", "M7", "M15"] {
            let spec = preset(name).unwrap();
            let text = spec.to_kv().to_string();
            let back = ExperimentSpec::from_kv(&KvMap::parse(&text).unwrap()).unwrap();
            assert_eq!(back, spec, "{name}");
        }
    }

    #[test]
    fn overrides_from_kv() {
        let mut kv = preset("M1").unwrap().to_kv();
        kv.set("estimators", "agg,bc_naive");
        kv.set("agg.M", "10..19");
        kv.set("agg.weights", "uniform");
        kv.set("bc_naive.rho", "fixed:-1");
        kv.set("m", "2..4");
        let spec = ExperimentSpec::from_kv(&kv).unwrap();
        assert_eq!(spec.estimators.len(), 2);
        assert_eq!(spec.estimators[0].block_set.eval(3).unwrap(), (10..=19).collect::<Vec<_>>());
        assert_eq!(spec.estimators[1].rho, RhoSpec::Fixed(-1.0));
        assert_eq!(spec.block_sizes, vec![2, 3, 4]);
        kv.set("n", "15");
        assert!(ExperimentSpec::from_kv(&kv).is_err());
    }
}
