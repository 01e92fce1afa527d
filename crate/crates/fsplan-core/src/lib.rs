//! Explicit-state, cost-optimal planning over discretized hybrid systems.
//!
//! The crate is organized around a small finite-state-system abstraction
//! ([`fss`]): states are bit-packed descriptors, actions carry a duration
//! (instantaneous or one-tick) and a weight, and a domain enumerates
//! successors deterministically. On top of that sit:
//!
//! - [`search`] — exhaustive reachability and uniform-cost optimal plan
//!   search over the implicit transition graph, with bit compression and
//!   optional hash compaction of the visited set;
//! - [`rover`] — the bundled planetary-rover engine-control domain
//!   (nonlinear power model, discretized kinematics, charge bookkeeping,
//!   safety invariants);
//! - [`oracle`] — a brute-force enumerator used as ground truth on micro
//!   instances;
//! - [`plan`] — timed-plan serialization, validation by re-simulation, and
//!   trace export.

pub mod fixed;
pub mod fss;
pub mod oracle;
pub mod pack;
pub mod plan;
pub mod rover;
pub mod search;
pub mod sig;

pub use fixed::{quantize, Cost};
pub use fss::{
    ActionDescriptor, ActionId, Domain, PlanningProblem, Trajectory, TransitionOutcome,
};
pub use pack::PackedState;
pub use sig::StateSignature;
