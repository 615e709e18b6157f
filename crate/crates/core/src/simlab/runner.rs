//! Parallel Monte Carlo runner.
//!
//! Replication `r` draws its data from stream `r` of a ChaCha generator
//! keyed by the master seed, so the data never depend on the estimator list
//! or on scheduling. Replications are evaluated in parallel batches and
//! folded in replication order, which makes the result bit-identical for
//! any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::spec::ExperimentSpec;
use crate::error::{Error, Result};
use crate::estimators::{rho_pen_aggregated, EstimateCache, Grid};

/// Scale applied to reported averages.
pub const REPORT_SCALE: f64 = 1e4;

/// Generator for replication `rep`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stat {
    Mse,
    Bias2,
    Var,
}

impl Stat {
    pub const ALL: [Stat; 3] = [Stat::Mse, Stat::Bias2, Stat::Var];

    pub fn name(self) -> &'static str {
        match self {
            Stat::Mse => "mse",
            Stat::Bias2 => "bias2",
            Stat::Var => "var",
        }
    }
}

impl std::str::FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stat::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown statistic '{s}'")))
    }
}

/// One line of the long-format summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    pub estimator: String,
    pub m: usize,
    pub stat: Stat,
    pub value: f64,
}

/// Scaled statistics of one cell at one evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub u: Vec<f64>,
    pub bias2: f64,
    pub var: f64,
    pub mse: f64,
}

/// Everything recorded for one `(estimator, m)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub estimator: String,
    pub m: usize,
    pub successes: usize,
    pub failures: usize,
    /// More than 1% of the replications failed.
    pub flagged: bool,
    /// Grid averages, scaled by [`REPORT_SCALE`]; NaN if no replication succeeded.
    pub mse: f64,
    pub bias2: f64,
    pub var: f64,
    pub points: Vec<PointStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub model: String,
    pub cells: Vec<CellResult>,
}

impl SummaryTable {
    pub fn empty(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            cells: Vec::new(),
        }
    }

    /// Long format, three rows per cell in the order mse, bias2, var.
    pub fn rows(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::with_capacity(3 * self.cells.len());
        for c in &self.cells {
            for stat in Stat::ALL {
                let value = match stat {
                    Stat::Mse => c.mse,
                    Stat::Bias2 => c.bias2,
                    Stat::Var => c.var,
                };
                rows.push(SummaryRow {
                    model: self.model.clone(),
                    estimator: c.estimator.clone(),
                    m: c.m,
                    stat,
                    value,
                });
            }
        }
        rows
    }

    pub fn cell(&self, estimator: &str, m: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.estimator == estimator && c.m == m)
    }

    pub fn value(&self, estimator: &str, m: usize, stat: Stat) -> Option<f64> {
        self.cell(estimator, m).map(|c| match stat {
            Stat::Mse => c.mse,
            Stat::Bias2 => c.bias2,
            Stat::Var => c.var,
        })
    }
}

/// Welford accumulator over replications for one cell.
#[derive(Debug, Clone)]
struct CellAccumulator {
    count: usize,
    failures: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl CellAccumulator {
    fn new(points: usize) -> Self {
        Self {
            count: 0,
            failures: 0,
            mean: vec![0.0; points],
            m2: vec![0.0; points],
        }
    }

    fn push(&mut self, outcome: Option<Vec<f64>>) {
        let Some(x) = outcome else {
            self.failures += 1;
            return;
        };
        self.count += 1;
        let k = self.count as f64;
        for ((mean, m2), xi) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = xi - *mean;
            *mean += delta / k;
            *m2 += delta * (xi - *mean);
        }
    }
}

/// Estimates of every cell for one replication; `None` marks a failure.
fn replicate(
    spec: &ExperimentSpec,
    grid: &Grid,
    cells: &[(usize, usize)],
    rho_cfg: Option<&crate::estimators::RhoConfig>,
    rep: u64,
) -> Result<Vec<Option<Vec<f64>>>> {
    let mut rng = replication_rng(spec.seed, rep);
    let data = spec.model.generate(spec.n, &mut rng)?;
    let rho_hat = rho_cfg.and_then(|cfg| rho_pen_aggregated(&data, cfg).ok().map(|a| a.value));
    let mut cache = EstimateCache::new(&data, grid.clone())?;
    Ok(cells
        .iter()
        .map(|&(e, m)| {
            spec.estimators[e]
                .evaluate(&mut cache, m, rho_hat)
                .ok()
                .filter(|v| v.iter().all(|x| x.is_finite()))
        })
        .collect())
}

/// Runs the experiment with `workers` threads (0 picks the rayon default).
pub fn run(spec: &ExperimentSpec, workers: usize) -> Result<SummaryTable> {
    spec.validate()?;
    let grid = spec.grid()?;
    let attractor = spec.model.attractor().map_err(|e| {
        Error::NoGroundTruth(format!("{}: limiting copula unavailable ({e})", spec.name))
    })?;
    let truth: Vec<f64> = grid.points().iter().map(|u| attractor.cdf(u)).collect();
    let rho_cfg = if spec.needs_rho_estimate() {
        Some(spec.rho.config(spec.model.dim())?)
    } else {
        None
    };

    let cells: Vec<(usize, usize)> = spec
        .estimators
        .iter()
        .enumerate()
        .flat_map(|(e, est)| {
            spec.block_sizes
                .iter()
                .filter(move |&&m| est.applies_at(m))
                .map(move |&m| (e, m))
        })
        .collect();
    let mut acc = vec![CellAccumulator::new(grid.len()); cells.len()];

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let batch = (4 * pool.current_num_threads()).max(16);
    let mut start = 0usize;
    while start < spec.reps {
        let end = (start + batch).min(spec.reps);
        let outcomes: Vec<Vec<Option<Vec<f64>>>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|r| replicate(spec, &grid, &cells, rho_cfg.as_ref(), r as u64))
                .collect::<Result<_>>()
        })?;
        for rep in outcomes {
            for (a, o) in acc.iter_mut().zip(rep) {
                a.push(o);
            }
        }
        start = end;
    }

    let k = grid.len() as f64;
    let cells = cells
        .iter()
        .zip(acc)
        .map(|(&(e, m), a)| {
            let points: Vec<PointStats> = (0..grid.len())
                .map(|i| {
                    let (bias2, var) = if a.count == 0 {
                        (f64::NAN, f64::NAN)
                    } else {
                        let b = a.mean[i] - truth[i];
                        (REPORT_SCALE * b * b, REPORT_SCALE * a.m2[i] / a.count as f64)
                    };
                    PointStats {
                        u: grid.point(i).to_vec(),
                        bias2,
                        var,
                        mse: bias2 + var,
                    }
                })
                .collect();
            let bias2 = points.iter().map(|p| p.bias2).sum::<f64>() / k;
            let var = points.iter().map(|p| p.var).sum::<f64>() / k;
            CellResult {
                estimator: spec.estimators[e].name().to_string(),
                m,
                successes: a.count,
                failures: a.failures,
                flagged: a.failures * 100 > spec.reps,
                mse: bias2 + var,
                bias2,
                var,
                points,
            }
        })
        .collect();
    Ok(SummaryTable {
        model: spec.name.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaModel;
    use crate::series::MovingMaxSpec;
    use crate::simlab::presets::preset;
    use crate::simlab::spec::{EstimatorKind, EstimatorSpec, RhoSpec};
    use rand::RngCore;
    use std::collections::HashSet;

    fn small(name: &str) -> ExperimentSpec {
        let mut s = preset(name).unwrap();
        s.n = 200;
        s.reps = 12;
        s.block_sizes = vec![2, 5];
        s.grid_values = vec![0.3, 0.7];
        s.rho.block_sizes = (2..=10).collect();
        s
    }

    #[test]
    fn identical_across_worker_counts() {
        let spec = small("M2");
        let one = run(&spec, 1).unwrap();
        assert_eq!(one, run(&spec, 4).unwrap());
        assert_eq!(one, run(&spec, 16).unwrap());
    }

    #[test]
    fn mse_is_bias_plus_variance() {
        let table = run(&small("M1"), 2).unwrap();
        assert!(!table.cells.is_empty());
        for c in &table.cells {
            assert!((c.mse - c.bias2 - c.var).abs() <= 1e-12 * c.mse.abs().max(1.0));
            for p in &c.points {
                assert!((p.mse - p.bias2 - p.var).abs() <= 1e-12 * p.mse.abs().max(1.0));
            }
        }
    }

    #[test]
    fn single_replication_has_zero_variance() {
        let mut spec = small("M1");
        spec.reps = 1;
        let table = run(&spec, 2).unwrap();
        for c in table.cells.iter().filter(|c| c.successes == 1) {
            assert_eq!(c.var, 0.0);
        }
    }

    #[test]
    fn independence_copula_is_unbiased_up_to_noise() {
        let mut spec = small("M1");
        spec.model = MovingMaxSpec::iid(CopulaModel::gumbel_hougaard(1.0, 2).unwrap());
        spec.estimators = vec![EstimatorSpec::default_for(EstimatorKind::Sliding)];
        spec.reps = 100;
        spec.n = 500;
        let table = run(&spec, 0).unwrap();
        for c in &table.cells {
            // squared bias well below the variance once scaled back
            assert!(c.bias2 < c.var, "{c:?}");
        }
    }

    #[test]
    fn inapplicable_cells_are_omitted_and_failures_counted() {
        let mut spec = small("M1");
        spec.block_sizes = vec![1, 2];
        let table = run(&spec, 1).unwrap();
        assert!(table.cell("bc_naive", 1).is_none());
        assert!(table.cell("bc_agg", 1).is_none());
        assert!(table.cell("bc_naive", 2).is_some());
        for c in &table.cells {
            assert_eq!(c.successes + c.failures, spec.reps);
        }
    }

    #[test]
    fn fixed_rho_skips_estimation() {
        let mut spec = small("M1");
        for e in &mut spec.estimators {
            e.rho = RhoSpec::Fixed(-1.0);
        }
        assert!(!spec.needs_rho_estimate());
        let table = run(&spec, 1).unwrap();
        assert!(table.cells.iter().all(|c| c.failures == 0));
    }

    #[test]
    fn missing_ground_truth_is_an_error() {
        let mut spec = preset("M8").unwrap();
        spec.reps = 1;
        assert!(matches!(run(&spec, 1), Err(Error::NoGroundTruth(_))));
    }

    #[test]
    fn replication_streams_do_not_collide() {
        let mut seen = HashSet::with_capacity(1_000_000);
        for r in 0..100 {
            let mut rng = replication_rng(7, r);
            for _ in 0..10_000 {
                assert!(seen.insert(rng.next_u64()), "collision in stream {r}");
            }
        }
    }

    #[test]
    fn streams_are_uncorrelated() {
        let draws = |r| {
            let mut rng = replication_rng(11, r);
            (0..20_000).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect::<Vec<_>>()
        };
        let (a, b) = (draws(0), draws(1));
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
        let corr = cov / (1.0 / 12.0);
        // four standard errors
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr {corr}");
    }
}
