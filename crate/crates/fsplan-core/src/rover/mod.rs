//! The planetary-rover engine-control domain.
//!
//! State: a drive mode plus quantized acceleration, speed, covered distance,
//! battery charge and a cooling timer. Six guarded rules drive the dynamics:
//! three instantaneous ones (`start`, `accelerate`, `decelerate`) and three
//! one-second ticks (`running`, `braking`, `cooling`). Two safety invariants
//! (`engineExplode`, `energyEnd`) turn overspeed and battery depletion into
//! terminal error states.

mod config;
mod domain;
mod rules;
mod state;

pub use config::{BaselineStats, ConfigError, RoverConfig, RoverParams};
pub use domain::RoverDomain;
pub use rules::{
    apply_rule, charge_update, check_invariants, engine_power, integrate_tick, is_goal,
    step_cost, tick_engine_power, RoverRule, RuleOutcome, Violation,
};
pub use state::{Mode, RoverState};
