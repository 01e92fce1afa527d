//! Plan validation by deterministic re-simulation on the rover model.

use super::timed::TimedPlan;
use crate::fixed::Cost;
use crate::rover::{apply_rule, is_goal, step_cost, RoverDomain, RoverState};
use serde::{Deserialize, Serialize};

/// Outcome of replaying a plan from the start state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub goal_reached: bool,
    /// First invariant violation, as (second, label).
    pub violation: Option<(u32, String)>,
    /// First scheduling failure: a rule that was not enabled, or a horizon
    /// overrun, with its description.
    pub failure: Option<String>,
    pub duration_s: u32,
    pub horizon_ok: bool,
    pub residual_ok: bool,
    pub final_v_tenths: i64,
    pub final_d_tenths: i64,
    pub final_c_tenths: i64,
    pub total_cost_micros: i64,
}

/// Replays `plan` tick by tick, checking rule enabledness and invariants,
/// and reports goal satisfaction, duration, residual charge and total cost.
///
/// Passing requires: every rule enabled at its scheduled time, no invariant
/// violation, goal reached, duration within the horizon and residual charge
/// at or above the minimum.
pub fn validate_plan(plan: &TimedPlan, domain: &RoverDomain) -> ValidationReport {
    let params = domain.params();
    let mut state = domain.start_state();
    let mut total = Cost::ZERO;
    let mut violation: Option<(u32, String)> = None;
    let mut failure: Option<String> = None;
    let mut elapsed: u32 = 0;

    'rows: for row in &plan.rows {
        if elapsed >= params.t_max {
            failure = Some(format!(
                "second {} exceeds the horizon t_max = {}",
                row.t, params.t_max
            ));
            break;
        }
        for rule in &row.rules {
            if rule.duration() > 0 {
                total += step_cost(&state, elapsed, params);
            }
            match apply_rule(&state, *rule, params) {
                None => {
                    failure = Some(format!("rule {} not enabled at second {}", rule, row.t));
                    break 'rows;
                }
                Some(outcome) => {
                    state = outcome.state;
                    if let Some(v) = outcome.violation {
                        violation = Some((row.t, v.label().to_string()));
                        break 'rows;
                    }
                }
            }
        }
        elapsed += 1;
    }

    let goal_reached = failure.is_none() && violation.is_none() && is_goal(&state, params);
    let duration_s = plan.rows.len() as u32;
    let horizon_ok = duration_s <= params.t_max;
    let residual_ok = state.c >= params.c_min_t;
    ValidationReport {
        passed: failure.is_none()
            && violation.is_none()
            && goal_reached
            && horizon_ok
            && residual_ok,
        goal_reached,
        violation,
        failure,
        duration_s,
        horizon_ok,
        residual_ok,
        final_v_tenths: state.v,
        final_d_tenths: state.d,
        final_c_tenths: state.c,
        total_cost_micros: total.0,
    }
}

/// Replays `plan` and returns the state after every second, starting with
/// the post-`start` state of second zero. Stops silently at the first
/// failure; used by trace export and tests that inspect the evolution.
pub fn replay_states(plan: &TimedPlan, domain: &RoverDomain) -> Vec<RoverState> {
    let params = domain.params();
    let mut state = domain.start_state();
    let mut out = Vec::with_capacity(plan.rows.len());
    for row in &plan.rows {
        for rule in &row.rules {
            match apply_rule(&state, *rule, params) {
                None => return out,
                Some(outcome) => {
                    state = outcome.state;
                    if outcome.violation.is_some() {
                        out.push(state);
                        return out;
                    }
                }
            }
        }
        out.push(state);
    }
    out
}
