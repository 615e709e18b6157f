//! Estimation of extreme-value copulas from multivariate stationary time
//! series using sliding (overlapping) and disjoint block maxima.
//!
//! The crate is organised bottom-up:
//!
//! - [`copula`]: parametric copula families (Gumbel–Hougaard, outer-power
//!   Clayton, Student t) with their limiting extreme-value copulas,
//!   second-order data and samplers.
//! - [`series`]: stationary moving-maximum processes built on those copulas.
//! - [`blocks`]: sliding/disjoint block maxima and rank pseudo-observations.
//! - [`estimators`]: empirical copulas, aggregation over block sizes, bias
//!   corrections and estimators of the second-order parameter.
//! - [`asymptotics`]: limiting covariance functionals and plug-in variances.
//! - [`simlab`]: reproducible Monte Carlo experiments, presets and output.

pub mod asymptotics;
pub mod blocks;
pub mod copula;
pub mod error;
pub mod estimators;
pub mod numerics;
pub mod series;
pub mod simlab;

pub use blocks::{BlockMaximaPanel, BlockScheme, DataMatrix, PseudoObservations};
pub use copula::{CopulaModel, ExtremeValueCopula, GumbelHougaard, OuterPowerClayton, TCopula};
pub use error::{Error, Result};
pub use estimators::{Grid, WeightScheme};
pub use series::MovingMaxSpec;
