//! Plan serialization, validation by deterministic re-simulation, and trace
//! export.

mod timed;
mod trace;
mod validate;

pub use timed::{emit_plan, parse_plan_json, parse_plan_text, PlanError, PlanMetadata, PlanRow, TimedPlan};
pub use trace::{export_trace, trace_to_csv, TraceError, TraceRecord};
pub use validate::{replay_states, validate_plan, ValidationReport};
