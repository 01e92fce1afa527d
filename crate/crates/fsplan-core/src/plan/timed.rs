//! Timed plan representation and its text/JSON encodings.
//!
//! A timed plan groups the fired rules by second: each row holds the
//! instantaneous rules fired at that second followed by exactly one durative
//! rule. Both encodings are canonical, so emit-parse-emit is a fixpoint.

use crate::fixed::{tenths_to_string, Cost};
use crate::fss::{self, Trajectory};
use crate::rover::{RoverDomain, RoverRule};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRow {
    pub t: u32,
    pub rules: Vec<RoverRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanMetadata {
    pub config_hash: String,
    pub total_cost_micros: i64,
    pub duration_s: u32,
    pub energy_consumed_tenths: i64,
    pub residual_charge_tenths: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedPlan {
    pub schema_version: u32,
    pub rows: Vec<PlanRow>,
    pub metadata: PlanMetadata,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("trajectory is not replayable: {0}")]
    NotReplayable(fss::ReplayError),
    #[error("trajectory ends with instantaneous rules not closed by a tick")]
    TrailingInstantaneous,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("plan json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Groups a replayable trajectory into a timed plan and computes its
/// metadata from the replay.
pub fn emit_plan(trajectory: &Trajectory, domain: &RoverDomain) -> Result<TimedPlan, PlanError> {
    let total_cost =
        fss::trajectory_cost(domain, trajectory).map_err(PlanError::NotReplayable)?;
    let mut rows = Vec::new();
    let mut current: Vec<RoverRule> = Vec::new();
    for action in trajectory.actions() {
        let rule = domain.rule_of(action);
        current.push(rule);
        if rule.duration() > 0 {
            rows.push(PlanRow {
                t: rows.len() as u32,
                rules: std::mem::take(&mut current),
            });
        }
    }
    if !current.is_empty() {
        return Err(PlanError::TrailingInstantaneous);
    }
    let final_state = domain
        .unpack(trajectory.final_state)
        .expect("replayable trajectory has valid states");
    let params = domain.params();
    let metadata = PlanMetadata {
        config_hash: params.config_hash(),
        total_cost_micros: total_cost.0,
        duration_s: rows.len() as u32,
        energy_consumed_tenths: params.c_max_t - final_state.c,
        residual_charge_tenths: final_state.c,
    };
    Ok(TimedPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        rows,
        metadata,
    })
}

impl TimedPlan {
    /// Flat rule sequence in firing order.
    pub fn rules(&self) -> impl Iterator<Item = (u32, RoverRule)> + '_ {
        self.rows
            .iter()
            .flat_map(|row| row.rules.iter().map(move |r| (row.t, *r)))
    }

    /// Canonical text rendering, mirroring the one-row-per-second table
    /// layout.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# fsplan plan v{}\n", self.schema_version));
        out.push_str(&format!("# config: {}\n", self.metadata.config_hash));
        out.push_str(&format!("# duration: {}\n", self.metadata.duration_s));
        out.push_str(&format!(
            "# cost: {}\n",
            Cost(self.metadata.total_cost_micros)
        ));
        out.push_str(&format!(
            "# energy: {}\n",
            tenths_to_string(self.metadata.energy_consumed_tenths)
        ));
        out.push_str(&format!(
            "# residual: {}\n",
            tenths_to_string(self.metadata.residual_charge_tenths)
        ));
        for row in &self.rows {
            let names: Vec<&str> = row.rules.iter().map(|r| r.display_name()).collect();
            out.push_str(&format!("{}\t{}\n", row.t, names.join(" ")));
        }
        out
    }

    /// Canonical JSON rendering.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }
}

fn check_row_shape(row: &PlanRow, line: usize) -> Result<(), PlanError> {
    let durative = row.rules.iter().filter(|r| r.duration() > 0).count();
    if durative != 1 || row.rules.last().map(|r| r.duration()) != Some(1) {
        return Err(PlanError::Parse {
            line,
            message: format!(
                "row t={} must list instantaneous rules followed by exactly one durative rule",
                row.t
            ),
        });
    }
    Ok(())
}

/// Parses the text plan format. Header lines carry the metadata; rows are
/// `t<TAB>Rule Rule ...`. Externally authored files may omit headers.
pub fn parse_plan_text(text: &str) -> Result<TimedPlan, PlanError> {
    let mut metadata = PlanMetadata {
        config_hash: String::new(),
        total_cost_micros: 0,
        duration_s: 0,
        energy_consumed_tenths: 0,
        residual_charge_tenths: 0,
    };
    let mut rows: Vec<PlanRow> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("config:") {
                metadata.config_hash = v.trim().to_string();
            } else if let Some(v) = rest.strip_prefix("duration:") {
                metadata.duration_s = v.trim().parse().map_err(|_| PlanError::Parse {
                    line,
                    message: "bad duration header".into(),
                })?;
            } else if let Some(v) = rest.strip_prefix("cost:") {
                let value: f64 = v.trim().parse().map_err(|_| PlanError::Parse {
                    line,
                    message: "bad cost header".into(),
                })?;
                metadata.total_cost_micros = Cost::from_value(value).0;
            } else if let Some(v) = rest.strip_prefix("energy:") {
                metadata.energy_consumed_tenths = parse_tenths(v, line)?;
            } else if let Some(v) = rest.strip_prefix("residual:") {
                metadata.residual_charge_tenths = parse_tenths(v, line)?;
            }
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let t: u32 = parts
            .next()
            .unwrap()
            .parse()
            .map_err(|_| PlanError::Parse {
                line,
                message: "row must start with a second index".into(),
            })?;
        if t as usize != rows.len() {
            return Err(PlanError::Parse {
                line,
                message: format!("expected second {} but found {}", rows.len(), t),
            });
        }
        let mut rules = Vec::new();
        for name in parts {
            let rule = RoverRule::from_name(name).ok_or_else(|| PlanError::Parse {
                line,
                message: format!("unknown rule name {name:?}"),
            })?;
            rules.push(rule);
        }
        let row = PlanRow { t, rules };
        check_row_shape(&row, line)?;
        rows.push(row);
    }
    if metadata.duration_s == 0 {
        metadata.duration_s = rows.len() as u32;
    }
    Ok(TimedPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        rows,
        metadata,
    })
}

fn parse_tenths(v: &str, line: usize) -> Result<i64, PlanError> {
    let value: f64 = v.trim().parse().map_err(|_| PlanError::Parse {
        line,
        message: "bad numeric header".into(),
    })?;
    crate::fixed::to_tenths(value).ok_or(PlanError::Parse {
        line,
        message: "header value is not on the 0.1 grid".into(),
    })
}

pub fn parse_plan_json(text: &str) -> Result<TimedPlan, PlanError> {
    let plan: TimedPlan = serde_json::from_str(text)?;
    for (idx, row) in plan.rows.iter().enumerate() {
        if row.t as usize != idx {
            return Err(PlanError::Parse {
                line: idx + 1,
                message: format!("expected second {} but found {}", idx, row.t),
            });
        }
        check_row_shape(row, idx + 1)?;
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_renamed_rules() {
        let err = parse_plan_text("0\tStart Acelerate Running\n").unwrap_err();
        assert!(err.to_string().contains("Acelerate"));
    }

    #[test]
    fn parse_rejects_rows_without_a_tick() {
        let err = parse_plan_text("0\tStart Accelerate\n").unwrap_err();
        assert!(err.to_string().contains("durative"));
    }

    #[test]
    fn parse_accepts_headerless_tables() {
        let plan = parse_plan_text("0\tStart Accelerate Running\n1\tRunning\n").unwrap();
        assert_eq!(plan.rows.len(), 2);
        assert_eq!(plan.metadata.duration_s, 2);
        assert_eq!(
            plan.rows[0].rules,
            vec![RoverRule::Start, RoverRule::Accelerate, RoverRule::Running]
        );
    }
}
