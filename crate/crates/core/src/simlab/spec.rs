//! Experiment specifications: model descriptors, estimator configurations
//! with block-set expressions, and their key=value serialisation.

use std::fmt;
use std::str::FromStr;

use super::kv::{format_list, parse_list, KvMap};
use crate::copula::CopulaModel;
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    aggregated_estimator, bc_aggregated, bc_naive, bc_regression, parse_range, EstimateCache, Grid,
    RhoConfig, WeightRule,
};
use crate::series::MovingMaxSpec;

/// Model descriptor keys: `family`, `dim`, the family parameters (`beta`,
/// `theta`, `nu`) and optional moving-maximum `lags` (coordinates separated
/// by `,`, lags by `;`).
pub fn model_to_kv(model: &MovingMaxSpec) -> KvMap {
    let mut kv = KvMap::new();
    let base = model.base();
    kv.set("family", base.family());
    kv.set("dim", base.dim());
    match base {
        CopulaModel::GumbelHougaard(g) => kv.set("beta", g.beta()),
        CopulaModel::OuterPowerClayton(c) => {
            kv.set("theta", c.theta());
            kv.set("beta", c.beta());
        }
        CopulaModel::T(t) => {
            kv.set("nu", t.nu());
            kv.set("theta", t.theta());
        }
    }
    if model.order() > 0 {
        let lags: Vec<String> = model.coefficients()[1..].iter().map(|row| format_list(row)).collect();
        kv.set("lags", lags.join(";"));
    }
    kv
}

pub fn model_from_kv(kv: &KvMap) -> Result<MovingMaxSpec> {
    let dim: usize = kv.require_parsed("dim")?;
    let base = match kv.require("family")? {
        "gumbel_hougaard" => CopulaModel::gumbel_hougaard(kv.require_parsed("beta")?, dim)?,
        "outer_power_clayton" => {
            CopulaModel::outer_power_clayton(kv.require_parsed("theta")?, kv.require_parsed("beta")?, dim)?
        }
        "t" => CopulaModel::t(kv.require_parsed("nu")?, kv.require_parsed("theta")?, dim)?,
        other => return Err(Error::Parse(format!("unknown copula family '{other}'"))),
    };
    let lags = match kv.get("lags") {
        None | Some("") => Vec::new(),
        Some(s) => s.split(';').map(parse_list::<f64>).collect::<Result<Vec<_>>>()?,
    };
    MovingMaxSpec::new(base, lags)
}

/// `m`, `m+k`, `m-k` or a literal block size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Term {
    relative: bool,
    offset: i64,
}

impl Term {
    fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad block-size term '{s}'"));
        if let Some(rest) = s.strip_prefix('m') {
            let rest = rest.trim();
            let offset = if rest.is_empty() {
                0
            } else if let Some(k) = rest.strip_prefix('+') {
                k.trim().parse::<i64>().map_err(|_| bad())?
            } else if let Some(k) = rest.strip_prefix('-') {
                -k.trim().parse::<i64>().map_err(|_| bad())?
            } else {
                return Err(bad());
            };
            Ok(Term { relative: true, offset })
        } else {
            Ok(Term {
                relative: false,
                offset: s.parse::<i64>().map_err(|_| bad())?,
            })
        }
    }

    fn eval(self, m: usize) -> i64 {
        if self.relative {
            m as i64 + self.offset
        } else {
            self.offset
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.relative, self.offset) {
            (false, k) => write!(f, "{k}"),
            (true, 0) => write!(f, "m"),
            (true, k) if k > 0 => write!(f, "m+{k}"),
            (true, k) => write!(f, "m-{}", -k),
        }
    }
}

/// Set of block sizes, possibly relative to a running block size `m`:
/// comma-separated items, each a term or an inclusive range `lo..hi`,
/// e.g. `1,m..m+9` or `10..19`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSetExpr {
    items: Vec<(Term, Term)>,
}

impl BlockSetExpr {
    pub fn is_relative(&self) -> bool {
        self.items.iter().any(|(a, b)| a.relative || b.relative)
    }

    /// Sorted distinct block sizes at running size `m`.
    pub fn eval(&self, m: usize) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &(lo, hi) in &self.items {
            let (a, b) = (lo.eval(m), hi.eval(m));
            if a < 1 || b < a {
                return Err(invalid(format!("block range {lo}..{hi} is empty or below 1 at m={m}")));
            }
            out.extend(a as usize..=b as usize);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Compact expression for an explicit list, e.g. `1,5..9`.
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let mut sorted = sizes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut items = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[j] + 1 {
                j += 1;
            }
            let lit = |k: usize| Term {
                relative: false,
                offset: k as i64,
            };
            items.push((lit(sorted[i]), lit(sorted[j])));
            i = j + 1;
        }
        Self { items }
    }
}

impl FromStr for BlockSetExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let items = s
            .split(',')
            .map(|item| match item.split_once("..") {
                Some((a, b)) => Ok((Term::parse(a)?, Term::parse(b)?)),
                None => {
                    let t = Term::parse(item)?;
                    Ok((t, t))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if items.is_empty() {
            return Err(Error::Parse("empty block set".into()));
        }
        Ok(Self { items })
    }
}

impl fmt::Display for BlockSetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .items
            .iter()
            .map(|(a, b)| if a == b { a.to_string() } else { format!("{a}..{b}") })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses a block-size list without `m` terms.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let expr: BlockSetExpr = s.parse()?;
    if expr.is_relative() {
        return Err(Error::Parse(format!("'{s}' must not refer to m")));
    }
    expr.eval(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Sliding,
    Disjoint,
    Agg,
    BcNaive,
    BcAgg,
    BcReg,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        EstimatorKind::Sliding,
        EstimatorKind::Disjoint,
        EstimatorKind::Agg,
        EstimatorKind::BcNaive,
        EstimatorKind::BcAgg,
        EstimatorKind::BcReg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Sliding => "sliding",
            EstimatorKind::Disjoint => "disjoint",
            EstimatorKind::Agg => "agg",
            EstimatorKind::BcNaive => "bc_naive",
            EstimatorKind::BcAgg => "bc_agg",
            EstimatorKind::BcReg => "bc_reg",
        }
    }

    fn uses_block_set(self) -> bool {
        matches!(self, EstimatorKind::Agg | EstimatorKind::BcAgg | EstimatorKind::BcReg)
    }

    fn uses_m_prime(self) -> bool {
        matches!(self, EstimatorKind::BcNaive | EstimatorKind::BcAgg)
    }

    fn uses_rho(self) -> bool {
        matches!(self, EstimatorKind::BcNaive | EstimatorKind::BcAgg | EstimatorKind::BcReg)
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown estimator '{s}'")))
    }
}

/// Source of the second-order parameter for bias corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoSpec {
    Fixed(f64),
    /// Penalised estimator aggregated over the evaluation points.
    PenAgg,
}

impl FromStr for RhoSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "pen_agg" {
            return Ok(RhoSpec::PenAgg);
        }
        let v = s
            .strip_prefix("fixed:")
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::Parse(format!("expected fixed:<value> or pen_agg, got '{s}'")))?;
        if !(v.is_finite() && v < 0.0) {
            return Err(invalid(format!("fixed rho must be negative, got {v}")));
        }
        Ok(RhoSpec::Fixed(v))
    }
}

impl fmt::Display for RhoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::Fixed(v) => write!(f, "fixed:{v}"),
            RhoSpec::PenAgg => write!(f, "pen_agg"),
        }
    }
}

/// One estimator evaluated along the running block size `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub m_prime: usize,
    pub block_set: BlockSetExpr,
    pub weights: WeightRule,
    pub rho: RhoSpec,
}

impl EstimatorSpec {
    /// Simulation defaults: `M = {m..m+9}` for `agg` and `bc_agg`,
    /// `M = {1, m..m+9}` for `bc_reg`, `m' = 1`, harmonic weights, and
    /// the penalised aggregated `rho` estimate.
    pub fn default_for(kind: EstimatorKind) -> Self {
        let block_set = match kind {
            EstimatorKind::BcReg => "1,m..m+9",
            _ => "m..m+9",
        };
        Self {
            kind,
            m_prime: 1,
            block_set: block_set.parse().expect("valid expression"),
            weights: WeightRule::Harmonic,
            rho: RhoSpec::PenAgg,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn needs_rho_estimate(&self) -> bool {
        self.kind.uses_rho() && self.rho == RhoSpec::PenAgg
    }

    /// Whether the estimator is defined at running size `m`; bias
    /// corrections need the auxiliary size `m'` outside the main sizes.
    pub fn applies_at(&self, m: usize) -> bool {
        let set = || self.block_set.eval(m).ok();
        match self.kind {
            EstimatorKind::Sliding | EstimatorKind::Disjoint => m >= 1,
            EstimatorKind::Agg => set().is_some(),
            EstimatorKind::BcNaive => m >= 1 && m != self.m_prime,
            EstimatorKind::BcAgg => set().is_some_and(|s| !s.contains(&self.m_prime)),
            EstimatorKind::BcReg => set().is_some_and(|s| s.len() >= 2),
        }
    }

    /// Largest block size touched at running size `m`.
    pub fn max_block(&self, m: usize) -> Result<usize> {
        let mut hi = m;
        if self.kind.uses_block_set() {
            hi = *self.block_set.eval(m)?.last().expect("nonempty");
            if self.kind == EstimatorKind::BcReg {
                return Ok(hi);
            }
        }
        if self.kind.uses_m_prime() {
            hi = hi.max(self.m_prime);
        }
        Ok(hi)
    }

    pub fn evaluate(&self, cache: &mut EstimateCache<'_>, m: usize, rho_hat: Option<f64>) -> Result<Vec<f64>> {
        let rho = || match self.rho {
            RhoSpec::Fixed(v) => Ok(v),
            RhoSpec::PenAgg => rho_hat.ok_or_else(|| Error::Undefined("no rho estimate available".into())),
        };
        let weights = || self.weights.apply(self.block_set.eval(m)?);
        match self.kind {
            EstimatorKind::Sliding => cache.sliding(m),
            EstimatorKind::Disjoint => cache.disjoint(m),
            EstimatorKind::Agg => aggregated_estimator(cache, &weights()?),
            EstimatorKind::BcNaive => bc_naive(cache, m, self.m_prime, rho()?),
            EstimatorKind::BcAgg => bc_aggregated(cache, self.m_prime, &weights()?, rho()?),
            EstimatorKind::BcReg => Ok(bc_regression(cache, None, &weights()?, rho()?)?.c_inf),
        }
    }

    fn write_kv(&self, kv: &mut KvMap) {
        let p = self.name();
        if self.kind.uses_m_prime() {
            kv.set(format!("{p}.m_prime"), self.m_prime);
        }
        if self.kind.uses_block_set() {
            kv.set(format!("{p}.M"), &self.block_set);
            kv.set(format!("{p}.weights"), self.weights.name());
        }
        if self.kind.uses_rho() {
            kv.set(format!("{p}.rho"), self.rho);
        }
    }

    fn read_kv(kind: EstimatorKind, kv: &KvMap) -> Result<Self> {
        let mut spec = Self::default_for(kind);
        let p = kind.name();
        if let Some(v) = kv.parsed(&format!("{p}.m_prime"))? {
            spec.m_prime = v;
        }
        if let Some(v) = kv.parsed(&format!("{p}.M"))? {
            spec.block_set = v;
        }
        if let Some(v) = kv.parsed(&format!("{p}.weights"))? {
            spec.weights = v;
        }
        if let Some(v) = kv.parsed(&format!("{p}.rho"))? {
            spec.rho = v;
        }
        if spec.m_prime == 0 {
            return Err(invalid("m_prime must be >= 1"));
        }
        Ok(spec)
    }
}

/// Settings of the penalised `rho` estimator, stored by value so they can
/// be serialised; the evaluation points are the diagonal `(v, ..., v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSettings {
    pub k_lo: f64,
    pub k_hi: f64,
    pub eta: f64,
    pub block_sizes: Vec<usize>,
    pub weights: WeightRule,
    pub diagonal: Vec<f64>,
    pub grid_step: f64,
}

impl Default for RhoSettings {
    fn default() -> Self {
        let cfg = RhoConfig::default_for(1);
        Self {
            k_lo: cfg.k_lo,
            k_hi: cfg.k_hi,
            eta: cfg.eta,
            block_sizes: cfg.weights.block_set().to_vec(),
            weights: WeightRule::Harmonic,
            diagonal: cfg.points.iter().map(|p| p[0]).collect(),
            grid_step: cfg.grid_step,
        }
    }
}

impl RhoSettings {
    pub fn config(&self, d: usize) -> Result<RhoConfig> {
        let weights = self.weights.apply(self.block_sizes.clone())?;
        let cfg = RhoConfig {
            k_lo: self.k_lo,
            k_hi: self.k_hi,
            eta: self.eta,
            m_rho: *self.block_sizes.iter().min().ok_or_else(|| invalid("empty rho block set"))?,
            weights,
            points: self.diagonal.iter().map(|&v| vec![v; d]).collect(),
            grid_step: self.grid_step,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn write_kv(&self, kv: &mut KvMap) {
        kv.set("rho.k_lo", self.k_lo);
        kv.set("rho.k_hi", self.k_hi);
        kv.set("rho.eta", self.eta);
        kv.set("rho.M", BlockSetExpr::from_sizes(&self.block_sizes));
        kv.set("rho.weights", self.weights.name());
        kv.set("rho.U", format_list(&self.diagonal));
        kv.set("rho.grid_step", self.grid_step);
    }

    fn read_kv(kv: &KvMap) -> Result<Self> {
        let mut s = Self::default();
        if let Some(v) = kv.parsed("rho.k_lo")? {
            s.k_lo = v;
        }
        if let Some(v) = kv.parsed("rho.k_hi")? {
            s.k_hi = v;
        }
        if let Some(v) = kv.parsed("rho.eta")? {
            s.eta = v;
        }
        if let Some(v) = kv.get("rho.M") {
            s.block_sizes = parse_sizes(v)?;
        }
        if let Some(v) = kv.parsed("rho.weights")? {
            s.weights = v;
        }
        if let Some(v) = kv.get("rho.U") {
            s.diagonal = parse_values(v)?;
        }
        if let Some(v) = kv.parsed("rho.grid_step")? {
            s.grid_step = v;
        }
        Ok(s)
    }
}

/// `lo:hi:step` or a comma-separated list.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        parse_range(s)
    } else {
        parse_list(s)
    }
}

/// A Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: MovingMaxSpec,
    pub n: usize,
    pub reps: usize,
    /// Axis values of the product evaluation grid.
    pub grid_values: Vec<f64>,
    /// Running block sizes `m` (the x-axis).
    pub block_sizes: Vec<usize>,
    pub estimators: Vec<EstimatorSpec>,
    pub rho: RhoSettings,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::product(&self.grid_values, self.model.dim())
    }

    pub fn needs_rho_estimate(&self) -> bool {
        self.estimators.iter().any(EstimatorSpec::needs_rho_estimate)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(invalid("reps must be >= 1"));
        }
        if self.n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(invalid("block sizes must be a nonempty set of positive integers"));
        }
        if self.estimators.is_empty() {
            return Err(invalid("at least one estimator is required"));
        }
        let mut names: Vec<&str> = self.estimators.iter().map(|e| e.name()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.estimators.len() {
            return Err(invalid("estimators must be distinct"));
        }
        self.grid()?;
        for e in &self.estimators {
            for &m in &self.block_sizes {
                if e.applies_at(m) && e.max_block(m)? > self.n {
                    return Err(invalid(format!(
                        "estimator {} at m={m} needs block size {} > n={}",
                        e.name(),
                        e.max_block(m)?,
                        self.n
                    )));
                }
            }
        }
        if self.needs_rho_estimate() {
            let cfg = self.rho.config(self.model.dim())?;
            if cfg.weights.block_set().iter().any(|&k| k > self.n) {
                return Err(invalid("rho block sizes exceed n"));
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::new();
        kv.set("name", &self.name);
        kv.extend(&model_to_kv(&self.model));
        kv.set("n", self.n);
        kv.set("reps", self.reps);
        kv.set("seed", self.seed);
        kv.set("grid", format_list(&self.grid_values));
        kv.set("m", BlockSetExpr::from_sizes(&self.block_sizes));
        let names: Vec<&str> = self.estimators.iter().map(|e| e.name()).collect();
        kv.set("estimators", names.join(","));
        for e in &self.estimators {
            e.write_kv(&mut kv);
        }
        if self.needs_rho_estimate() {
            self.rho.write_kv(&mut kv);
        }
        kv
    }

    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let estimators = kv
            .require("estimators")?
            .split(',')
            .map(|name| EstimatorSpec::read_kv(name.parse()?, kv))
            .collect::<Result<Vec<_>>>()?;
        let spec = Self {
            name: kv.get("name").unwrap_or("custom").to_string(),
            model: model_from_kv(kv)?,
            n: kv.require_parsed("n")?,
            reps: kv.require_parsed("reps")?,
            grid_values: parse_values(kv.require("grid")?)?,
            block_sizes: parse_sizes(kv.require("m")?)?,
            estimators,
            rho: RhoSettings::read_kv(kv)?,
            seed: kv.parsed("seed")?.unwrap_or(0),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn block_set_text_round_trips(items in prop::collection::vec((any::<bool>(), -5i64..30, 0i64..10), 1..5), m in 6usize..40) {
            let items: Vec<(Term, Term)> = items
                .into_iter()
                .map(|(relative, lo, len)| (Term { relative, offset: lo }, Term { relative, offset: lo + len }))
                .collect();
            let expr = BlockSetExpr { items };
            let back: BlockSetExpr = expr.to_string().parse().unwrap();
            prop_assert_eq!(&back, &expr);
            if let Ok(sizes) = expr.eval(m) {
                prop_assert!(sizes.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(BlockSetExpr::from_sizes(&sizes).eval(0).unwrap(), sizes);
            }
        }
    }

    #[test]
    fn block_set_expressions() {
        let e: BlockSetExpr = "1,m..m+9".parse().unwrap();
        assert!(e.is_relative());
        assert_eq!(e.eval(5).unwrap(), vec![1, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14]);
        assert_eq!(e.eval(1).unwrap(), (1..=10).collect::<Vec<_>>());
        assert_eq!(e.to_string(), "1,m..m+9");
        let e: BlockSetExpr = "m-1..m".parse().unwrap();
        assert!(e.eval(1).is_err());
        assert_eq!(parse_sizes("10..19").unwrap(), (10..=19).collect::<Vec<_>>());
        assert!(parse_sizes("m..m+2").is_err());
        assert!("m*2".parse::<BlockSetExpr>().is_err());
        assert_eq!(BlockSetExpr::from_sizes(&[1, 5, 6, 7, 9]).to_string(), "1,5..7,9");
    }

    #[test]
    fn rho_spec_parsing() {
        assert_eq!("pen_agg".parse::<RhoSpec>().unwrap(), RhoSpec::PenAgg);
        assert_eq!("fixed:-1".parse::<RhoSpec>().unwrap(), RhoSpec::Fixed(-1.0));
        assert!("fixed:0.5".parse::<RhoSpec>().is_err());
        assert!("auto".parse::<RhoSpec>().is_err());
    }

    #[test]
    fn applicability() {
        let naive = EstimatorSpec::default_for(EstimatorKind::BcNaive);
        assert!(!naive.applies_at(1));
        assert!(naive.applies_at(2));
        let agg = EstimatorSpec::default_for(EstimatorKind::BcAgg);
        assert!(!agg.applies_at(1));
        assert!(agg.applies_at(2));
        assert_eq!(agg.max_block(20).unwrap(), 29);
        let reg = EstimatorSpec::default_for(EstimatorKind::BcReg);
        assert!(reg.applies_at(1));
    }

    #[test]
    fn model_descriptor_round_trip() {
        let base = CopulaModel::t(3, 0.25, 4).unwrap();
        let model = MovingMaxSpec::new(base, vec![vec![0.25, 0.75, 0.25, 0.75]]).unwrap();
        let kv = model_to_kv(&model);
        assert_eq!(kv.get("lags"), Some("0.25,0.75,0.25,0.75"));
        assert_eq!(model_from_kv(&kv).unwrap(), model);
        let beta = 2f64.ln() / 1.75f64.ln();
        let model = MovingMaxSpec::iid(CopulaModel::outer_power_clayton(1.0, beta, 2).unwrap());
        let back = model_from_kv(&KvMap::parse(&model_to_kv(&model).to_string()).unwrap()).unwrap();
        assert_eq!(back, model);
        let mut bad = model_to_kv(&model);
        bad.set("family", "frank");
        assert!(model_from_kv(&bad).is_err());
    }
}
