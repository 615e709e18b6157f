//! `blockmax` command-line interface.
//!
//! Every subcommand accepts `--config <file>` with flat `key=value` lines
//! mirroring its long flags (`full-scale=true` for switches). Flags given on
//! the command line take precedence over the file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use blockmax_core::asymptotics::{var_disjoint_hat, var_sliding_hat};
use blockmax_core::estimators::{parse_range, rho_pen_aggregated, EstimateCache, WeightRule};
use blockmax_core::simlab::{
    emit, full_scale, parse_sizes, parse_values, preset, read_data_csv, replication_rng, run, write_estimates_csv,
    BlockSetExpr, EmitOptions, EstimatorKind, EstimatorSpec, ExperimentSpec, KvMap, RhoSettings, RhoSpec,
};
use blockmax_core::{CopulaModel, Grid};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "blockmax", version, about = "Block-maxima estimation of extreme-value copulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo experiment and write summary CSVs.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Estimate the extreme-value copula from a data file.
    #[command(args_override_self = true)]
    Estimate(EstimateArgs),
    /// Tabulate asymptotic variances along the diagonal for a Gumbel model.
    #[command(args_override_self = true)]
    Variance(VarianceArgs),
    /// Estimate the second-order parameter on simulated or supplied data.
    #[command(args_override_self = true)]
    Rho(RhoArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Named experiment, M1 to M15.
    #[arg(long, required_unless_present = "spec")]
    preset: Option<String>,
    /// Experiment file in key=value form (replaces --preset).
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Running block sizes, e.g. 2..20.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Use the full replication count.
    #[arg(long)]
    full_scale: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Skip per_point.csv.
    #[arg(long)]
    no_per_point: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// CSV with a header row and one column per coordinate.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "sliding")]
    estimator: EstimatorKind,
    /// Block size.
    #[arg(long)]
    m: usize,
    /// Block set for aggregated and regression estimators, e.g. 10..19 or 1,m..m+9.
    #[arg(long = "M")]
    block_set: Option<BlockSetExpr>,
    #[arg(long)]
    m_prime: Option<usize>,
    #[arg(long)]
    weights: Option<WeightRule>,
    /// pen_agg or fixed:<value>.
    #[arg(long, default_value = "pen_agg")]
    rho: RhoSpec,
    /// Axis values lo:hi:step or a list; the grid is their product over coordinates.
    #[arg(long, default_value = "0.1:0.9:0.1")]
    grid: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VarianceArgs {
    /// Gumbel-Hougaard shape, at least 1.
    #[arg(long)]
    beta: f64,
    /// Diagonal values lo:hi:step.
    #[arg(long, default_value = "0.01:0.99:0.01")]
    grid_diag: String,
    /// Block scale of the sliding estimator.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RhoArgs {
    /// Simulate from this experiment's model.
    #[arg(long, required_unless_present = "input")]
    preset: Option<String>,
    /// Use this data file instead of simulating.
    #[arg(long, conflicts_with = "preset")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 4000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    k_lo: Option<f64>,
    #[arg(long)]
    k_hi: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Block sizes of the regression, e.g. 2..50.
    #[arg(long = "M")]
    block_set: Option<String>,
    /// Diagonal evaluation points lo:hi:step or a list.
    #[arg(long = "U")]
    diagonal: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Splices `--key value` pairs from the `--config` file right after the
/// subcommand so that explicit flags, which come later, override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let pos = args.iter().position(|a| a == "--config");
    let path = match pos {
        Some(i) => args.get(i + 1).context("--config needs a file")?.clone(),
        None => match args.iter().find_map(|a| a.to_str()?.strip_prefix("--config=").map(OsString::from)) {
            Some(p) => p,
            None => return Ok(args),
        },
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.to_string_lossy()))?;
    let kv = KvMap::parse(&text)?;
    let mut injected = Vec::new();
    for (key, value) in kv.iter() {
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        let flag = OsString::from(format!("--{key}"));
        match value {
            "true" => injected.push(flag),
            "false" => {}
            v => {
                injected.push(flag);
                injected.push(v.into());
            }
        }
    }
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 2)
        .context("missing subcommand")?;
    let mut out = args[..sub].to_vec();
    out.extend(injected);
    out.extend(args[sub..].iter().cloned());
    Ok(out)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut spec = match (&args.preset, &args.spec) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentSpec::from_kv(&KvMap::parse(&text)?)?
        }
        (None, None) => bail!("either --preset or --spec is required"),
    };
    if args.full_scale {
        spec = full_scale(spec);
    }
    if let Some(reps) = args.reps {
        spec.reps = reps;
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(m) = &args.m {
        spec.block_sizes = parse_sizes(m)?;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    let table = run(&spec, args.workers)?;
    let written = emit(
        &table,
        &spec,
        &args.out,
        EmitOptions {
            per_point: !args.no_per_point,
        },
    )?;
    let flagged: Vec<String> = table
        .cells
        .iter()
        .filter(|c| c.flagged)
        .map(|c| format!("{}@m={} ({} failures)", c.estimator, c.m, c.failures))
        .collect();
    if !flagged.is_empty() {
        eprintln!("warning: cells with more than 1% failed replications: {}", flagged.join(", "));
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn rho_settings(
    k_lo: Option<f64>,
    k_hi: Option<f64>,
    eta: Option<f64>,
    block_set: Option<&str>,
    diagonal: Option<&str>,
) -> Result<RhoSettings> {
    let mut s = RhoSettings::default();
    if let Some(v) = k_lo {
        s.k_lo = v;
    }
    if let Some(v) = k_hi {
        s.k_hi = v;
    }
    if let Some(v) = eta {
        s.eta = v;
    }
    if let Some(v) = block_set {
        s.block_sizes = parse_sizes(v)?;
    }
    if let Some(v) = diagonal {
        s.diagonal = parse_values(v)?;
    }
    Ok(s)
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let data = read_data_csv(&args.input)?;
    let grid = Grid::product(&parse_values(&args.grid)?, data.d())?;
    let mut est = EstimatorSpec::default_for(args.estimator);
    if let Some(b) = args.block_set {
        est.block_set = b;
    }
    if let Some(mp) = args.m_prime {
        est.m_prime = mp;
    }
    if let Some(w) = args.weights {
        est.weights = w;
    }
    est.rho = args.rho;
    if !est.applies_at(args.m) {
        bail!("estimator {} is not defined at m = {}", est.name(), args.m);
    }
    let rho_hat = if est.needs_rho_estimate() {
        let cfg = RhoSettings::default().config(data.d())?;
        let agg = rho_pen_aggregated(&data, &cfg)?;
        eprintln!("rho_pen_agg={} (points used {}, skipped {})", agg.value, agg.used, agg.skipped);
        Some(agg.value)
    } else {
        None
    };
    let mut cache = EstimateCache::new(&data, grid.clone())?;
    let values = est.evaluate(&mut cache, args.m, rho_hat)?;
    write_estimates_csv(&grid, &values, &args.out)?;
    println!("{}", args.out.display());
    Ok(())
}

fn variance(args: VarianceArgs) -> Result<()> {
    let ev = CopulaModel::gumbel_hougaard(args.beta, 2)?.attractor()?;
    let us = parse_range(&args.grid_diag)?;
    let mut out = String::from("u,a,var_sliding,var_disjoint,ratio\n");
    for u in us {
        let point = [u, u];
        let s = var_sliding_hat(&ev, &point, args.a)?;
        let d = var_disjoint_hat(&ev, &point)?;
        out.push_str(&format!("{u},{},{s},{d},{}\n", args.a, d / s));
    }
    write_text(&args.out, &out)?;
    println!("{}", args.out.display());
    Ok(())
}

fn rho(args: RhoArgs) -> Result<()> {
    let data = match (&args.preset, &args.input) {
        (_, Some(path)) => read_data_csv(path)?,
        (Some(name), None) => {
            let spec = preset(name)?;
            spec.model.generate(args.n, &mut replication_rng(args.seed, 0))?
        }
        (None, None) => bail!("either --preset or --input is required"),
    };
    let settings = rho_settings(
        args.k_lo,
        args.k_hi,
        args.eta,
        args.block_set.as_deref(),
        args.diagonal.as_deref(),
    )?;
    let agg = rho_pen_aggregated(&data, &settings.config(data.d())?)?;
    println!("rho={}", agg.value);
    println!("points_used={}", agg.used);
    println!("points_skipped={}", agg.skipped);
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(argv);
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Variance(a) => variance(a),
        Command::Rho(a) => rho(a),
    }
}
