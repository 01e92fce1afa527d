//! [`Domain`] implementation for the rover model.

use super::config::RoverParams;
use super::rules::{self, RoverRule, ALL_RULES};
use super::state::{Mode, RoverState};
use crate::fixed::Cost;
use crate::fss::{ActionDescriptor, ActionId, Domain, TransitionOutcome};
use crate::pack::{DecodeError, PackError, PackedState, StateLayout};

/// The rover planning domain: a validated configuration plus its descriptor
/// layout and action table.
pub struct RoverDomain {
    params: RoverParams,
    layout: StateLayout,
    actions: Vec<ActionDescriptor>,
}

impl RoverDomain {
    pub fn new(params: RoverParams) -> RoverDomain {
        let layout = params
            .layout()
            .expect("layout was validated with the config");
        let actions = ALL_RULES
            .iter()
            .map(|r| ActionDescriptor {
                name: r.name(),
                duration: r.duration(),
                weight: Cost::ZERO,
            })
            .collect();
        RoverDomain {
            params,
            layout,
            actions,
        }
    }

    pub fn params(&self) -> &RoverParams {
        &self.params
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn start_state(&self) -> RoverState {
        RoverState::start(self.params.c_max_t)
    }

    pub fn pack(&self, s: &RoverState) -> Result<PackedState, PackError> {
        self.layout.encode(&[
            s.mode as i64,
            s.t_c as i64,
            s.a,
            s.v,
            s.d,
            s.c,
        ])
    }

    pub fn unpack(&self, p: PackedState) -> Result<RoverState, DecodeError> {
        let mut values = [0i64; 6];
        self.layout.decode(p, &mut values)?;
        let mode = Mode::from_index(values[0]).ok_or(DecodeError::FieldRange {
            field: "mode",
            index: values[0] as u64,
        })?;
        Ok(RoverState {
            mode,
            t_c: values[1] as u32,
            a: values[2],
            v: values[3],
            d: values[4],
            c: values[5],
        })
    }

    pub fn rule_of(&self, action: ActionId) -> RoverRule {
        RoverRule::from_index(action as usize).expect("action ids map to rules")
    }
}

impl Domain for RoverDomain {
    fn actions(&self) -> &[ActionDescriptor] {
        &self.actions
    }

    fn initial_state(&self) -> PackedState {
        self.pack(&self.start_state())
            .expect("start state is within declared ranges")
    }

    fn successors(&self, state: PackedState) -> Result<Vec<TransitionOutcome>, DecodeError> {
        let s = self.unpack(state)?;
        let mut out = Vec::new();
        for (id, rule) in ALL_RULES.iter().enumerate() {
            if let Some(outcome) = rules::apply_rule(&s, *rule, &self.params) {
                let successor = self
                    .pack(&outcome.state)
                    .expect("rule updates stay within declared ranges");
                out.push(TransitionOutcome {
                    successor,
                    action: id as ActionId,
                    violation: outcome.violation.map(|v| v.label()),
                });
            }
        }
        Ok(out)
    }

    fn is_goal(&self, state: PackedState) -> bool {
        self.unpack(state)
            .map(|s| rules::is_goal(&s, &self.params))
            .unwrap_or(false)
    }

    fn violation(&self, state: PackedState) -> Option<&'static str> {
        self.unpack(state)
            .ok()
            .and_then(|s| rules::check_invariants(&s, &self.params))
            .map(|v| v.label())
    }

    fn step_cost(&self, state: PackedState, action: ActionId, elapsed: u32) -> Cost {
        let descriptor = &self.actions[action as usize];
        if descriptor.duration == 0 {
            return descriptor.weight;
        }
        let s = self
            .unpack(state)
            .expect("cost queried on a valid descriptor");
        rules::step_cost(&s, elapsed, &self.params)
    }

    fn descriptor_bits(&self) -> u32 {
        self.layout.total_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rover::config::RoverConfig;

    fn domain() -> RoverDomain {
        let cfg: RoverConfig = serde_json::from_value(serde_json::json!({
            "rho": 0.1, "g": 3.8, "m": 71.73, "mu": 0.8,
            "c_max": 18000.0, "c_min": 17000.0,
            "v_max": 10.0, "v_safemax": 10.0,
            "a_max": 5.0, "a_step": 1.5,
            "g_s": 25.0, "t_c": 6, "d_max": 130.0, "g_c": 10.0,
            "d_final": 199.5, "t_max": 60,
            "Cd": 0.5, "Crr": 0.05, "fa": 0.5, "V_bus": 28.0,
            "friction_decel": 0.0, "quantum": 0.1
        }))
        .unwrap();
        RoverDomain::new(cfg.validate().unwrap())
    }

    #[test]
    fn start_state_roundtrips() {
        let d = domain();
        let s = d.start_state();
        let p = d.pack(&s).unwrap();
        assert_eq!(d.unpack(p).unwrap(), s);
    }

    #[test]
    fn maximal_state_roundtrips() {
        let d = domain();
        let params = d.params();
        let s = RoverState {
            mode: Mode::EngineBlown,
            t_c: params.t_c,
            a: params.a_max_t,
            v: params.v_top_t,
            d: params.d_top_t,
            c: params.c_max_t,
        };
        let p = d.pack(&s).unwrap();
        assert_eq!(d.unpack(p).unwrap(), s);
    }

    #[test]
    fn start_state_has_exactly_the_start_successor() {
        let d = domain();
        let outs = d.successors(d.initial_state()).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(d.rule_of(outs[0].action), RoverRule::Start);
        assert_eq!(outs[0].violation, None);
    }

    #[test]
    fn mid_cooling_state_has_exactly_the_cooling_successor() {
        let d = domain();
        let s = RoverState {
            mode: Mode::Cooling,
            t_c: 3,
            a: 0,
            v: 0,
            d: 1560,
            c: d.params().c_max_t - 100,
        };
        let outs = d.successors(d.pack(&s).unwrap()).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(d.rule_of(outs[0].action), RoverRule::Cooling);
    }

    #[test]
    fn error_states_have_no_successors() {
        let d = domain();
        let s = RoverState {
            mode: Mode::EngineBlown,
            t_c: 0,
            a: 0,
            v: 120,
            d: 500,
            c: d.params().c_max_t,
        };
        assert!(d.successors(d.pack(&s).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn successors_are_deterministic_and_ordered() {
        let d = domain();
        let s = RoverState {
            mode: Mode::Running,
            t_c: 0,
            a: 0,
            v: 45,
            d: 500,
            c: d.params().c_max_t,
        };
        let p = d.pack(&s).unwrap();
        let first = d.successors(p).unwrap();
        let second = d.successors(p).unwrap();
        assert_eq!(first, second);
        let ids: Vec<_> = first.iter().map(|o| o.action).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted);
        // accelerate, decelerate, running all enabled here.
        assert_eq!(ids, vec![1, 2, 3]);
    }

    #[test]
    fn corrupted_descriptor_is_a_hard_error() {
        let d = domain();
        assert!(d.successors(PackedState(u64::MAX)).is_err());
    }
}
