//! Exact multi-pattern search over synthetic DNA sequences.
//!
//! Every pattern is searched with brute force and only its first (lowest)
//! match position is recorded. Three engines produce the same
//! [`SearchReport`]:
//!
//! - [`oracle`]: the single-threaded reference engine.
//! - [`parallel`]: shared-memory engine with dynamic chunk scheduling and
//!   speculative cancellation.
//! - [`distributed`]: ranks exchanging continuation messages over a
//!   left-to-right pipeline, reduced into one report.
//!
//! Scenarios are produced by [`generator`] from an LCG ([`rng`]) that can
//! jump ahead in logarithmic time, so any item of a scenario can be
//! generated independently of the others.

pub mod distributed;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod parallel;
pub mod report;
pub mod rng;

pub use distributed::{run_distributed, DistributedMode};
pub use generator::{build_scenario, Scenario, ScenarioParams};
pub use model::{Nucleotide, Pattern, PatternSet, Provenance, SearchReport, Sequence};
pub use oracle::{find_first, search_all_sequential, WorkCounter};
pub use parallel::{search_all_parallel, Accumulation, Decomposition, Strategy};
pub use rng::Lcg;
