//! Model checking with a Dirichlet process prior and relative belief.
//!
//! Given data `x` and a parametric family `{F_θ}`, the check places a
//! `DP(a, F_θ(x))` prior on the sampling distribution, compares the prior and
//! posterior distributions of the Cramér–von Mises distance
//! `D(P) = d(P, F_θ(x))`, and reports the relative belief ratio of `D` near
//! zero together with its strength. A ratio above one is evidence that the
//! model holds; below one is evidence against.
//!
//! ```no_run
//! use dpcheck::{run_check, CheckConfig, ParametricFamily};
//!
//! let data = vec![0.3, -1.2, 0.8, 0.1, -0.4, 1.7, -0.9, 0.05, 0.6, -0.2];
//! let cfg = CheckConfig::default().with_seed(7);
//! let report = run_check(&data, ParametricFamily::LocationNormal, None, &cfg).unwrap();
//! println!("{}", report.summary());
//! ```

pub mod cvm;
pub mod data;
pub mod diagnostics;
pub mod dist;
pub mod dp;
pub mod engine;
pub mod error;
pub mod models;
pub mod optim;
pub mod rng;
pub mod scenario;
pub mod special;

pub use cvm::{cvm_discrete, cvm_numeric, cvm_numeric_step, d_min, Distance, MinimumDistance};
pub use dist::{ContinuousCdf, ContinuousDistribution, DistributionKind};
pub use dp::{posterior_params, sample_base, sample_dp, BaseMeasure, DiscreteMeasure, DpParams};
pub use engine::{
    prior_quantile_grid, relative_belief, run_check, sample_distances, strength, CheckConfig,
    Evidence, QuantileGrid, RbReport,
};
pub use error::{Error, Result};
pub use models::{FittedModel, ParametricFamily};
pub use rng::{Phase, RngStream};
pub use scenario::{run_scenario, run_scenarios, table_scenarios, ResultRecord, Scenario};
pub use special::gamma_co_quantile;
