//! Trace export: the per-second quantities of a validated plan.

use super::timed::TimedPlan;
use crate::fixed::{tenths_to_string, Cost};
use crate::rover::{apply_rule, step_cost, tick_engine_power, Mode, RoverDomain};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One record per second of plan execution: the state at the end of the
/// second, the engine power drawn during it, and the cost charged for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u32,
    pub mode: Mode,
    pub a_tenths: i64,
    pub v_tenths: i64,
    pub d_tenths: i64,
    pub c_tenths: i64,
    pub engine_power: f64,
    pub step_cost_micros: i64,
    pub cumulative_cost_micros: i64,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("rule {rule} not enabled at second {t}")]
    NotEnabled { t: u32, rule: String },
    #[error("invariant {label} violated at second {t}")]
    Violation { t: u32, label: String },
}

/// Replays `plan` and produces one trace record per second. The plan must
/// replay cleanly; scheduling failures and violations are errors.
pub fn export_trace(plan: &TimedPlan, domain: &RoverDomain) -> Result<Vec<TraceRecord>, TraceError> {
    let params = domain.params();
    let mut state = domain.start_state();
    let mut cumulative = Cost::ZERO;
    let mut out = Vec::with_capacity(plan.rows.len());
    for (elapsed, row) in plan.rows.iter().enumerate() {
        let elapsed = elapsed as u32;
        let mut tick_cost = Cost::ZERO;
        let mut engine_power = 0.0;
        for rule in &row.rules {
            if rule.duration() > 0 {
                tick_cost = step_cost(&state, elapsed, params);
                engine_power = tick_engine_power(&state, *rule, params);
            }
            match apply_rule(&state, *rule, params) {
                None => {
                    return Err(TraceError::NotEnabled {
                        t: row.t,
                        rule: rule.to_string(),
                    })
                }
                Some(outcome) => {
                    state = outcome.state;
                    if let Some(v) = outcome.violation {
                        return Err(TraceError::Violation {
                            t: row.t,
                            label: v.label().to_string(),
                        });
                    }
                }
            }
        }
        cumulative += tick_cost;
        out.push(TraceRecord {
            t: row.t,
            mode: state.mode,
            a_tenths: state.a,
            v_tenths: state.v,
            d_tenths: state.d,
            c_tenths: state.c,
            engine_power,
            step_cost_micros: tick_cost.0,
            cumulative_cost_micros: cumulative.0,
        });
    }
    Ok(out)
}

/// Renders trace records as CSV with fixed numeric formatting: one decimal
/// for the quantized state fields, six decimals for powers and costs.
pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::from("t,mode,a,v,d,c,engine_power,step_cost,cumulative_cost\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{},{}\n",
            r.t,
            r.mode,
            tenths_to_string(r.a_tenths),
            tenths_to_string(r.v_tenths),
            tenths_to_string(r.d_tenths),
            tenths_to_string(r.c_tenths),
            r.engine_power,
            Cost(r.step_cost_micros),
            Cost(r.cumulative_cost_micros),
        ));
    }
    out
}
