//! Exhaustive reachability and cost-optimal plan search over the implicit
//! transition graph.

mod bundle;
mod engine;

pub use bundle::{decode_bundle, BundleEvent, BundleKey};
pub use engine::{
    plan_optimal, plan_optimal_compacted, reachable, PlanOutcome, SearchError, SearchOptions,
    SearchStats, DEFAULT_MEMORY_CAP,
};
