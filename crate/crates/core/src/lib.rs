//! Two-stage robust perfect matchings.
//!
//! A first-stage perfect matching is fixed before `2k` new vertices arrive;
//! the second stage must repair it into a cheap perfect matching of the
//! enlarged instance while deleting few first-stage pairs.

pub mod error;
pub mod harness;
pub mod known_k;
pub mod line;
pub mod matching;
pub mod metric;
pub mod oracles;
pub mod unknown;

pub use error::{Error, Result};
pub use known_k::{known_stage1, known_stage2, KnownStageOneResult, KnownStageTwoResult};
pub use line::{EdgeSubset, ExtendedLine, Heaviness, Interval, LineArrivals, LineInstance};
pub use matching::{cost, Matching, Pair};
pub use metric::{Metric, MetricInstance};
pub use unknown::stage1::{
    build_robust_matching, find_max_gain_heavy_interval, LaminarTree, Tag, UnknownStageOneResult,
};
