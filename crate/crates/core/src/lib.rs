//! Dependent Gaussian walks in heavy-tailed random scenery.
//!
//! The crate simulates a walk whose increments are fractional Gaussian noise,
//! lets it collect i.i.d. symmetric stable (or stable-domain) rewards from the
//! integer sites it visits, and provides the Monte Carlo tools needed to check
//! the normalized sums of such walks against their fBm-local-time stable
//! limit:
//!
//! - [`stable`]: stable variates and lazily generated sceneries,
//! - [`fgn`]: fGn increments, the walk, and fBm on a fine grid,
//! - [`rwrs`]: site local times, the reward process `Z`, `L_n`, `V_n`, `R_n`,
//! - [`limit`]: fBm local time, the functional `X`, `Δ` and `Γ_n`,
//! - [`schema`]: `D_n` and the random rewards schema `G_n`,
//! - [`stats`]: ECFs, slope fits, KS distances, z-scores,
//! - [`experiments`]: the Monte Carlo studies used by the CLI and the
//!   acceptance suite.
//!
//! All randomness flows through [`streams::StreamKey`], so results depend on
//! the seed only, never on the number of worker threads.

pub mod error;
pub mod experiments;
pub mod fgn;
pub mod limit;
pub mod parallel;
pub mod rwrs;
pub mod schema;
pub mod stable;
pub mod stats;
pub mod streams;

pub use error::{Error, Result};
pub use fgn::{fgn_covariance, sample_fbm, sample_walk, FbmGenerator, FbmGrid, FgnGenerator, HurstParams, WalkPath};
pub use limit::{
    estimate_ex, fbm_local_time, sample_delta, sample_gamma_n, x_functional, DeltaSample, FbmLocalTimeGrid,
    LimitConfig, LimitSampler,
};
pub use rwrs::{
    ks_statistic, local_times, rwrs_series, site_of, KsStatParams, LocalTimeProfile, RwrsSeries, SceneryLookup,
    SceneryWindow, SiteRule,
};
pub use schema::{delta_exponent, sample_dn, sample_gn, ModelParams, SchemaConfig, SchemaSampler};
pub use stable::{sample_scenery, sample_stable, theoretical_cf, LazyScenery, SceneryField, SceneryKind, StableParams};
pub use stats::{cf_compare, ecf, ks_distance, slope_fit, CfComparison, EcfEstimate, MeanEstimate, SlopeFit};
pub use streams::StreamKey;
