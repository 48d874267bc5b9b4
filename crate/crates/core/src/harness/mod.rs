//! Instance generators, end-to-end verification and the invariant suite.

pub mod generators;
pub mod rng;
pub mod suite;
pub mod verify;

pub use generators::{fig3_default_costs, gen_fig1, gen_fig3, gen_random, gen_random_metric, Fig3};
pub use rng::SplitMix64;
pub use suite::{run_invariant_suite, run_known, REGISTERED};
pub use verify::{verify_two_stage, InvariantResult, Scenario, Status, VerificationReport};
