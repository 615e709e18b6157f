//! Python bindings.
//!
//! Data are exchanged as lists of rows (`list[list[float]]`); random draws
//! take an integer seed and are reproducible across platforms.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use blockmax_core::asymptotics::{gumbel_diagonal_variances, var_disjoint_hat, var_sliding_hat};
use blockmax_core::blocks::{block_maxima, pseudo_observations};
use blockmax_core::estimators::{rho_pen_aggregated, EstimateCache, WeightRule};
use blockmax_core::simlab::{self, BlockSetExpr, EmitOptions, EstimatorKind, EstimatorSpec, RhoSettings, RhoSpec};
use blockmax_core::{BlockScheme, CopulaModel, DataMatrix, Error, Grid, MovingMaxSpec};

/// `(model, estimator, m, stat, value)`.
type SummaryTuple = (String, String, usize, String, f64);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. }
        | Error::BlockSize { .. }
        | Error::Parse(_)
        | Error::Unsupported(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn rows(data: &DataMatrix) -> Vec<Vec<f64>> {
    (0..data.n()).map(|i| data.row(i)).collect()
}

fn scheme(name: &str) -> PyResult<BlockScheme> {
    match name {
        "sliding" => Ok(BlockScheme::Sliding),
        "disjoint" => Ok(BlockScheme::Disjoint),
        other => Err(PyValueError::new_err(format!(
            "block scheme must be 'sliding' or 'disjoint', got '{other}'"
        ))),
    }
}

/// A parametric copula.
#[pyclass(name = "Copula", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCopula {
    inner: CopulaModel,
}

#[pymethods]
impl PyCopula {
    #[staticmethod]
    #[pyo3(signature = (beta, dim = 2))]
    fn gumbel_hougaard(beta: f64, dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: CopulaModel::gumbel_hougaard(beta, dim).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (theta, beta, dim = 2))]
    fn outer_power_clayton(theta: f64, beta: f64, dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: CopulaModel::outer_power_clayton(theta, beta, dim).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (nu, theta, dim = 2))]
    fn t(nu: u32, theta: f64, dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: CopulaModel::t(nu, theta, dim).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family()
    }

    fn cdf(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.cdf(&u).map_err(to_py)
    }

    /// Copula of i.i.d. block maxima of size `m`.
    fn block_maxima_cdf(&self, u: Vec<f64>, m: f64) -> PyResult<f64> {
        self.inner.block_maxima_cdf(&u, m).map_err(to_py)
    }

    /// The extreme-value limit `C_inf(u)`.
    fn limit_cdf(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.limit_copula(&u).map_err(to_py)
    }

    fn stable_tail_dependence(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.stable_tail_dependence(&x).map_err(to_py)
    }

    #[pyo3(signature = (n, seed = 0))]
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let data = self
            .inner
            .sample(n, &mut simlab::replication_rng(seed, 0))
            .map_err(to_py)?;
        Ok(rows(&data))
    }

    fn __repr__(&self) -> String {
        format!("Copula({:?})", self.inner)
    }
}

/// Moving-maximum time series driven by copula innovations.
#[pyclass(name = "MovingMax", frozen)]
struct PyMovingMax {
    inner: MovingMaxSpec,
}

#[pymethods]
impl PyMovingMax {
    /// `lags[i][j]` is the coefficient of coordinate `j` at lag `i + 1`.
    #[new]
    #[pyo3(signature = (copula, lags = Vec::new()))]
    fn new(copula: &PyCopula, lags: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: MovingMaxSpec::new(copula.inner.clone(), lags).map_err(to_py)?,
        })
    }

    #[getter]
    fn coefficients(&self) -> Vec<Vec<f64>> {
        self.inner.coefficients().to_vec()
    }

    #[pyo3(signature = (n, seed = 0))]
    fn generate(&self, n: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let data = self
            .inner
            .generate(n, &mut simlab::replication_rng(seed, 0))
            .map_err(to_py)?;
        Ok(rows(&data))
    }
}

/// Block maxima of each column, as rows.
#[pyfunction]
#[pyo3(signature = (data, m, scheme = "sliding"))]
fn block_maxima_rows(data: Vec<Vec<f64>>, m: usize, scheme: &str) -> PyResult<Vec<Vec<f64>>> {
    let data = DataMatrix::from_rows(&data).map_err(to_py)?;
    let panel = block_maxima(&data, m, self::scheme(scheme)?).map_err(to_py)?;
    Ok((0..panel.rows())
        .map(|i| (0..panel.d()).map(|j| panel.get(i, j)).collect())
        .collect())
}

/// Rank-based pseudo-observations of the block maxima.
#[pyfunction]
#[pyo3(signature = (data, m, scheme = "sliding"))]
fn pseudo_observation_rows(data: Vec<Vec<f64>>, m: usize, scheme: &str) -> PyResult<Vec<Vec<f64>>> {
    let data = DataMatrix::from_rows(&data).map_err(to_py)?;
    let panel = block_maxima(&data, m, self::scheme(scheme)?).map_err(to_py)?;
    let pseudo = pseudo_observations(&panel);
    Ok((0..pseudo.k()).map(|i| pseudo.row(i)).collect())
}

/// Evaluates an estimator of the extreme-value copula at `points`.
///
/// `estimator` is one of sliding, disjoint, agg, bc_naive, bc_agg, bc_reg;
/// `block_set` may refer to `m`, e.g. `"m..m+9"`.
#[pyfunction]
#[pyo3(signature = (data, points, m, estimator = "sliding", block_set = None, m_prime = None, weights = None, rho = "pen_agg"))]
#[allow(clippy::too_many_arguments)]
fn estimate(
    data: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
    m: usize,
    estimator: &str,
    block_set: Option<&str>,
    m_prime: Option<usize>,
    weights: Option<&str>,
    rho: &str,
) -> PyResult<Vec<f64>> {
    let data = DataMatrix::from_rows(&data).map_err(to_py)?;
    let grid = Grid::new(points).map_err(to_py)?;
    let mut spec = EstimatorSpec::default_for(parse::<EstimatorKind>(estimator)?);
    if let Some(b) = block_set {
        spec.block_set = parse::<BlockSetExpr>(b)?;
    }
    if let Some(mp) = m_prime {
        spec.m_prime = mp;
    }
    if let Some(w) = weights {
        spec.weights = parse::<WeightRule>(w)?;
    }
    spec.rho = parse::<RhoSpec>(rho)?;
    if !spec.applies_at(m) {
        return Err(PyValueError::new_err(format!(
            "estimator {estimator} is not defined at m = {m}"
        )));
    }
    let rho_hat = if spec.needs_rho_estimate() {
        let cfg = RhoSettings::default().config(data.d()).map_err(to_py)?;
        Some(rho_pen_aggregated(&data, &cfg).map_err(to_py)?.value)
    } else {
        None
    };
    let mut cache = EstimateCache::new(&data, grid).map_err(to_py)?;
    spec.evaluate(&mut cache, m, rho_hat).map_err(to_py)
}

/// Penalised second-order parameter estimate averaged over diagonal points.
#[pyfunction]
#[pyo3(signature = (data, k_lo = -2.0, k_hi = -0.1, eta = 0.5, block_set = "2..50", diagonal = "0.1:0.5:0.01"))]
fn rho_pen_agg(
    data: Vec<Vec<f64>>,
    k_lo: f64,
    k_hi: f64,
    eta: f64,
    block_set: &str,
    diagonal: &str,
) -> PyResult<f64> {
    let data = DataMatrix::from_rows(&data).map_err(to_py)?;
    let settings = RhoSettings {
        k_lo,
        k_hi,
        eta,
        block_sizes: simlab::parse_sizes(block_set).map_err(to_py)?,
        diagonal: simlab::parse_values(diagonal).map_err(to_py)?,
        ..RhoSettings::default()
    };
    let cfg = settings.config(data.d()).map_err(to_py)?;
    Ok(rho_pen_aggregated(&data, &cfg).map_err(to_py)?.value)
}

/// Asymptotic variances `(sliding, disjoint)` at `u` for a Gumbel-Hougaard
/// limit with estimated margins.
#[pyfunction]
#[pyo3(signature = (beta, u, a = 1.0))]
fn asymptotic_variances(beta: f64, u: Vec<f64>, a: f64) -> PyResult<(f64, f64)> {
    let ev = CopulaModel::gumbel_hougaard(beta, u.len())
        .and_then(|c| c.attractor())
        .map_err(to_py)?;
    Ok((
        var_sliding_hat(&ev, &u, a).map_err(to_py)?,
        var_disjoint_hat(&ev, &u).map_err(to_py)?,
    ))
}

/// Closed-form bivariate diagonal variances `(sliding, disjoint)` at `(u, u)`.
#[pyfunction]
fn gumbel_diagonal(beta: f64, u: f64) -> PyResult<(f64, f64)> {
    gumbel_diagonal_variances(beta, u).map_err(to_py)
}

/// The named experiment as `key=value` text.
#[pyfunction]
fn preset_spec(name: &str) -> PyResult<String> {
    Ok(simlab::preset(name).map_err(to_py)?.to_kv().to_string())
}

/// Runs a named experiment (or a `key=value` experiment text) and returns
/// `(model, estimator, m, stat, value)` rows. Writes CSVs when `out` is set.
#[pyfunction]
#[pyo3(signature = (experiment, reps = None, n = None, m = None, seed = None, workers = 0, out = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    experiment: &str,
    reps: Option<usize>,
    n: Option<usize>,
    m: Option<&str>,
    seed: Option<u64>,
    workers: usize,
    out: Option<PathBuf>,
) -> PyResult<Vec<SummaryTuple>> {
    let mut spec = if experiment.contains('=') {
        let kv = simlab::KvMap::parse(experiment).map_err(to_py)?;
        simlab::ExperimentSpec::from_kv(&kv).map_err(to_py)?
    } else {
        simlab::preset(experiment).map_err(to_py)?
    };
    if let Some(r) = reps {
        spec.reps = r;
    }
    if let Some(n) = n {
        spec.n = n;
    }
    if let Some(m) = m {
        spec.block_sizes = simlab::parse_sizes(m).map_err(to_py)?;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let table = py.detach(|| simlab::run(&spec, workers)).map_err(to_py)?;
    if let Some(dir) = out {
        simlab::emit(&table, &spec, &dir, EmitOptions::default()).map_err(to_py)?;
    }
    Ok(table
        .rows()
        .into_iter()
        .map(|r| (r.model, r.estimator, r.m, r.stat.name().to_string(), r.value))
        .collect())
}

#[pymodule]
fn blockmax(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCopula>()?;
    m.add_class::<PyMovingMax>()?;
    m.add_function(wrap_pyfunction!(block_maxima_rows, m)?)?;
    m.add_function(wrap_pyfunction!(pseudo_observation_rows, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(rho_pen_agg, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_variances, m)?)?;
    m.add_function(wrap_pyfunction!(gumbel_diagonal, m)?)?;
    m.add_function(wrap_pyfunction!(preset_spec, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
