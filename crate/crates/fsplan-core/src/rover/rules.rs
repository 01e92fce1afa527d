//! Rover transition rules, dynamics and cost function.

use super::config::RoverParams;
use super::state::{Mode, RoverState};
use crate::fixed::{quantize_scaled, Cost};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The six model rules. Enum order is the planner's tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoverRule {
    Start = 0,
    Accelerate = 1,
    Decelerate = 2,
    Running = 3,
    Braking = 4,
    Cooling = 5,
}

pub const ALL_RULES: [RoverRule; 6] = [
    RoverRule::Start,
    RoverRule::Accelerate,
    RoverRule::Decelerate,
    RoverRule::Running,
    RoverRule::Braking,
    RoverRule::Cooling,
];

impl RoverRule {
    pub fn from_index(i: usize) -> Option<RoverRule> {
        ALL_RULES.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            RoverRule::Start => "start",
            RoverRule::Accelerate => "accelerate",
            RoverRule::Decelerate => "decelerate",
            RoverRule::Running => "running",
            RoverRule::Braking => "braking",
            RoverRule::Cooling => "cooling",
        }
    }

    /// Table-style capitalized name used in the text plan format.
    pub fn display_name(self) -> &'static str {
        match self {
            RoverRule::Start => "Start",
            RoverRule::Accelerate => "Accelerate",
            RoverRule::Decelerate => "Decelerate",
            RoverRule::Running => "Running",
            RoverRule::Braking => "Braking",
            RoverRule::Cooling => "Cooling",
        }
    }

    pub fn from_name(name: &str) -> Option<RoverRule> {
        ALL_RULES
            .iter()
            .copied()
            .find(|r| r.name().eq_ignore_ascii_case(name))
    }

    /// Durative length in seconds: 0 for the instantaneous rules, 1 for the
    /// tick rules.
    pub fn duration(self) -> u32 {
        match self {
            RoverRule::Start | RoverRule::Accelerate | RoverRule::Decelerate => 0,
            RoverRule::Running | RoverRule::Braking | RoverRule::Cooling => 1,
        }
    }
}

impl fmt::Display for RoverRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Safety invariant violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    EngineExplode,
    EnergyEnd,
}

impl Violation {
    pub fn label(self) -> &'static str {
        match self {
            Violation::EngineExplode => "engineExplode",
            Violation::EnergyEnd => "energyEnd",
        }
    }

    /// The error state entered when this invariant is violated.
    pub fn error_mode(self) -> Mode {
        match self {
            Violation::EngineExplode => Mode::EngineBlown,
            Violation::EnergyEnd => Mode::NoEnergy,
        }
    }
}

/// Result of firing an enabled rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleOutcome {
    pub state: RoverState,
    pub violation: Option<Violation>,
}

/// Power (J/s) required to move at speed `v` (m/s) with commanded
/// acceleration `vdot` (m/s²). May be negative under strong deceleration;
/// callers clamp to zero where the value feeds charge drain or cost.
pub fn engine_power(v: f64, vdot: f64, p: &RoverParams) -> f64 {
    let c = &p.config;
    (0.5 * c.rho * v * v * c.cd * c.fa + c.m * c.g * (c.crr + vdot / c.g)) * v
}

/// Converts a tenths-of-cm-based value to SI (m or m/s or m/s²).
#[inline]
fn tenths_cm_to_si(t: i64) -> f64 {
    t as f64 / 1000.0
}

/// Nonnegative engine power for tenths-scaled speed/acceleration.
fn engine_power_clamped(v_t: i64, a_t: i64, p: &RoverParams) -> f64 {
    engine_power(tenths_cm_to_si(v_t), tenths_cm_to_si(a_t), p).max(0.0)
}

/// One semi-explicit Euler step (Δt = 1 s): distance integrates with the
/// pre-update speed, speed clamps at zero.
pub fn integrate_tick(v: i64, d: i64, a: i64, p: &RoverParams) -> (i64, i64) {
    let d_next = quantize_scaled(d + v, p.quantum_t);
    let v_next = quantize_scaled((v + a - p.friction_t).max(0), p.quantum_t);
    (v_next, d_next)
}

/// Battery update: drains `power_draw` J/s for one second through the bus
/// voltage, floored at zero and quantized.
///
/// The subtraction and quantization run in micro-coulomb integers so that
/// quantization ties (e.g. the constant cooling draw) round exactly as
/// documented instead of drifting with binary floating point.
pub fn charge_update(c: i64, power_draw: f64, p: &RoverParams) -> i64 {
    debug_assert!(power_draw >= 0.0);
    const MICRO_PER_TENTH: i64 = 100_000;
    let delta_micro = (power_draw / p.config.v_bus * 1e6).round() as i64;
    let next_micro = (c * MICRO_PER_TENTH - delta_micro).max(0);
    let quantum_micro = p.quantum_t * MICRO_PER_TENTH;
    quantize_scaled(next_micro, quantum_micro) / MICRO_PER_TENTH
}

/// Per-step cost at elapsed time `i`: the squared total power draw weighted
/// by the remaining time, in fixed-point micro-units.
///
/// Panics if `i >= t_max`; the search horizon must prevent that.
pub fn step_cost(s: &RoverState, i: u32, p: &RoverParams) -> Cost {
    assert!(
        i < p.t_max,
        "step cost queried at elapsed time {i} >= t_max {}",
        p.t_max
    );
    let g_s = p.config.g_s;
    let draw = match s.mode {
        Mode::NoEnergy | Mode::EngineBlown => return Cost::ZERO,
        Mode::Stopped => g_s,
        Mode::Cooling => g_s + p.config.g_c,
        Mode::Running | Mode::Braking => g_s + engine_power_clamped(s.v, s.a, p),
    };
    Cost::from_value(draw * draw / (p.t_max - i) as f64)
}

/// Goal test: the rover is at rest exactly at the goal distance and has not
/// entered an error state.
pub fn is_goal(s: &RoverState, p: &RoverParams) -> bool {
    s.v == 0 && s.d == p.d_final_t && !s.mode.is_error()
}

/// Invariant check. Overspeed is reported before battery depletion when both
/// hold; the error modes report the violation that created them.
pub fn check_invariants(s: &RoverState, p: &RoverParams) -> Option<Violation> {
    match s.mode {
        Mode::EngineBlown => Some(Violation::EngineExplode),
        Mode::NoEnergy => Some(Violation::EnergyEnd),
        _ if s.mode.implies_motion() && s.v > p.v_safemax_t => Some(Violation::EngineExplode),
        _ if s.c < p.c_min_t => Some(Violation::EnergyEnd),
        _ => None,
    }
}

/// Checks invariants on a freshly updated state and, on violation, moves it
/// into the corresponding error state.
fn finish(mut s: RoverState, p: &RoverParams) -> RuleOutcome {
    match check_invariants(&s, p) {
        Some(v) => {
            s.mode = v.error_mode();
            RuleOutcome {
                state: s,
                violation: Some(v),
            }
        }
        None => RuleOutcome {
            state: s,
            violation: None,
        },
    }
}

/// Next multiple of `d_max` strictly above `d`: the distance at which the
/// current leg must end with a cooling stop.
fn next_cooling_boundary(d: i64, p: &RoverParams) -> i64 {
    (d / p.d_max_t + 1) * p.d_max_t
}

/// Engine-power component of a durative tick's battery draw, evaluated the
/// same way the tick itself evaluates it (post-update speed, effective
/// acceleration, clamped at zero). Instantaneous rules and cooling draw no
/// engine power.
pub fn tick_engine_power(s: &RoverState, rule: RoverRule, p: &RoverParams) -> f64 {
    match rule {
        RoverRule::Running => {
            let (v, _) = integrate_tick(s.v, s.d, s.a, p);
            engine_power_clamped(v, s.a, p)
        }
        RoverRule::Braking => {
            let a = (s.a - p.a_step_t).max(-p.a_max_t);
            let (v, _) = integrate_tick(s.v, s.d, a, p);
            engine_power_clamped(v, a, p)
        }
        _ => 0.0,
    }
}

/// Fires `rule` on `s` if its guard holds, returning `None` when the rule is
/// not enabled. Rules are also disabled when the update would leave the
/// declared descriptor ranges (only possible in states that are already
/// beyond the goal distance, which no admissible plan visits).
pub fn apply_rule(s: &RoverState, rule: RoverRule, p: &RoverParams) -> Option<RuleOutcome> {
    match rule {
        RoverRule::Start => {
            if s.mode != Mode::Stopped {
                return None;
            }
            let mut next = *s;
            next.mode = Mode::Running;
            Some(finish(next, p))
        }
        RoverRule::Accelerate | RoverRule::Decelerate => {
            if s.mode != Mode::Running {
                return None;
            }
            let delta = if rule == RoverRule::Accelerate {
                p.a_step_t
            } else {
                -p.a_step_t
            };
            let a = s.a + delta;
            if a.abs() > p.a_max_t {
                return None;
            }
            let mut next = *s;
            next.a = a;
            Some(finish(next, p))
        }
        RoverRule::Running => {
            if s.mode != Mode::Running || s.d + s.v > p.d_top_t {
                return None;
            }
            let (v, d) = integrate_tick(s.v, s.d, s.a, p);
            if v > p.v_top_t {
                return None;
            }
            let draw = p.config.g_s + engine_power_clamped(v, s.a, p);
            let c = charge_update(s.c, draw, p);
            let mut next = *s;
            next.v = v;
            next.d = d;
            next.c = c;
            // Brake when the next second of travel would reach the cooling
            // boundary, so the stop lands on it rather than past it.
            if v > 0 && d + v >= next_cooling_boundary(d, p) {
                next.mode = Mode::Braking;
            }
            Some(finish(next, p))
        }
        RoverRule::Braking => {
            if s.mode != Mode::Braking || s.d + s.v > p.d_top_t {
                return None;
            }
            let a = (s.a - p.a_step_t).max(-p.a_max_t);
            let (v, d) = integrate_tick(s.v, s.d, a, p);
            if v > p.v_top_t {
                return None;
            }
            let draw = p.config.g_s + engine_power_clamped(v, a, p);
            let c = charge_update(s.c, draw, p);
            let mut next = *s;
            next.a = a;
            next.v = v;
            next.d = d;
            next.c = c;
            if v == 0 && a <= 0 {
                next.a = 0;
                next.mode = Mode::Cooling;
                next.t_c = 0;
            }
            Some(finish(next, p))
        }
        RoverRule::Cooling => {
            if s.mode != Mode::Cooling {
                return None;
            }
            let draw = p.config.g_s + p.config.g_c;
            let mut next = *s;
            next.t_c = s.t_c + 1;
            next.c = charge_update(s.c, draw, p);
            if next.t_c >= p.t_c {
                next.mode = Mode::Running;
                next.t_c = 0;
            }
            Some(finish(next, p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rover::config::RoverConfig;

    fn params() -> RoverParams {
        serde_json::from_value::<RoverConfig>(serde_json::json!({
            "rho": 0.1, "g": 3.8, "m": 71.73, "mu": 0.8,
            "c_max": 18000.0, "c_min": 17000.0,
            "v_max": 10.0, "v_safemax": 10.0,
            "a_max": 5.0, "a_step": 1.5,
            "g_s": 25.0, "t_c": 6, "d_max": 130.0, "g_c": 10.0,
            "d_final": 199.5, "t_max": 60,
            "Cd": 0.5, "Crr": 0.05, "fa": 0.5, "V_bus": 28.0,
            "friction_decel": 0.0, "quantum": 0.1
        }))
        .unwrap()
        .validate()
        .unwrap()
    }

    fn running(a: i64, v: i64, d: i64, c: i64) -> RoverState {
        RoverState {
            mode: Mode::Running,
            a,
            v,
            d,
            c,
            t_c: 0,
        }
    }

    #[test]
    fn power_is_zero_at_rest() {
        let p = params();
        assert_eq!(engine_power(0.0, 0.0, &p), 0.0);
        assert_eq!(engine_power(0.0, 3.0, &p), 0.0);
    }

    #[test]
    fn power_rolling_term_cancels() {
        // vdot = -g*Crr cancels the rolling+inertia term, leaving pure drag.
        let p = params();
        let c = &p.config;
        let v: f64 = 0.07;
        let vdot = -c.g * c.crr;
        let expected = 0.5 * c.rho * v.powi(3) * c.cd * c.fa;
        assert!((engine_power(v, vdot, &p) - expected).abs() < 1e-12);
    }

    #[test]
    fn power_matches_reference_evaluation() {
        // Independently evaluated: (0.5*0.1*0.05^2*0.5*0.5
        //   + 71.73*3.8*0.05) * 0.05 = 0.6814365625.
        let p = params();
        let f = engine_power(0.05, 0.0, &p);
        assert!((f - 0.681_436_562_5).abs() < 1e-9, "f = {f}");
    }

    #[test]
    fn integrate_fixed_point_at_rest() {
        let p = params();
        assert_eq!(integrate_tick(0, 70, 0, &p), (0, 70));
    }

    #[test]
    fn integrate_euler_step() {
        let p = params();
        // v = 4.5, a = 1.5 -> v' = 6.0, d advances by the pre-update speed.
        assert_eq!(integrate_tick(45, 100, 15, &p), (60, 145));
    }

    #[test]
    fn integrate_clamps_speed_at_zero() {
        let p = params();
        // v = 1.0, a = -1.5 -> clamped to 0, not -0.5.
        assert_eq!(integrate_tick(10, 100, -15, &p), (0, 110));
    }

    #[test]
    fn charge_identity_without_draw() {
        let p = params();
        assert_eq!(charge_update(180000, 0.0, &p), 180000);
    }

    #[test]
    fn charge_drains_through_bus_voltage() {
        let p = params();
        // 18000 - 25/28 = 17999.107... -> 17999.1.
        assert_eq!(charge_update(180000, 25.0, &p), 179991);
    }

    #[test]
    fn charge_floors_at_zero() {
        let p = params();
        assert_eq!(charge_update(5, 28.0, &p), 0);
    }

    #[test]
    fn start_changes_only_the_mode() {
        let p = params();
        let s = RoverState::start(p.c_max_t);
        let out = apply_rule(&s, RoverRule::Start, &p).unwrap();
        assert_eq!(out.state.mode, Mode::Running);
        assert_eq!(
            (out.state.a, out.state.v, out.state.d, out.state.c),
            (0, 0, 0, p.c_max_t)
        );
        assert_eq!(out.violation, None);
        // Not enabled outside the stopped mode.
        assert!(apply_rule(&out.state, RoverRule::Start, &p).is_none());
    }

    #[test]
    fn accelerate_rejected_beyond_a_max() {
        let p = params();
        let s = running(45, 30, 100, p.c_max_t);
        assert!(apply_rule(&s, RoverRule::Accelerate, &p).is_none());
        let down = apply_rule(&s, RoverRule::Decelerate, &p).unwrap();
        assert_eq!(down.state.a, 30);
    }

    #[test]
    fn running_triggers_braking_at_cooling_boundary() {
        let p = params();
        // d = 118.5, v = 7.5, a = 1.5: integrates to d = 126, v = 9; the next
        // tick would reach 135 >= 130, so the successor brakes.
        let s = running(15, 75, 1185, p.c_max_t);
        let out = apply_rule(&s, RoverRule::Running, &p).unwrap();
        assert_eq!(out.state.mode, Mode::Braking);
        assert_eq!(out.state.d, 1260);
        assert_eq!(out.state.v, 90);
        assert_eq!(out.violation, None);
    }

    #[test]
    fn running_does_not_brake_early() {
        let p = params();
        // d = 112.5, v = 6.0, a = 1.5 -> d = 118.5, v = 7.5; 126 < 130.
        let s = running(15, 60, 1125, p.c_max_t);
        let out = apply_rule(&s, RoverRule::Running, &p).unwrap();
        assert_eq!(out.state.mode, Mode::Running);
    }

    #[test]
    fn second_leg_boundary_is_the_next_multiple() {
        let p = params();
        assert_eq!(next_cooling_boundary(1560, &p), 2600);
        assert_eq!(next_cooling_boundary(0, &p), 1300);
        assert_eq!(next_cooling_boundary(1300, &p), 2600);
    }

    #[test]
    fn braking_decrements_then_integrates_and_arrests() {
        let p = params();
        let mut s = running(15, 90, 1350, p.c_max_t);
        s.mode = Mode::Braking;
        // a: 1.5 -> 0, coasting at 9.
        let out = apply_rule(&s, RoverRule::Braking, &p).unwrap();
        assert_eq!((out.state.a, out.state.v, out.state.d), (0, 90, 1440));
        assert_eq!(out.state.mode, Mode::Braking);
        // Drive v to zero: arrest resets a and enters cooling.
        let mut cur = out.state;
        for _ in 0..3 {
            cur = apply_rule(&cur, RoverRule::Braking, &p).unwrap().state;
        }
        assert_eq!(cur.mode, Mode::Cooling);
        assert_eq!((cur.a, cur.v, cur.t_c), (0, 0, 0));
    }

    #[test]
    fn braking_saturates_at_negative_a_max() {
        let p = params();
        let s = RoverState {
            mode: Mode::Braking,
            a: -45,
            v: 60,
            d: 1400,
            c: p.c_max_t,
            t_c: 0,
        };
        let out = apply_rule(&s, RoverRule::Braking, &p).unwrap();
        assert_eq!(out.state.a, -50);
        assert_eq!(out.state.v, 10);
    }

    #[test]
    fn cooling_runs_for_exactly_t_c_ticks() {
        let p = params();
        let mut s = RoverState {
            mode: Mode::Cooling,
            a: 0,
            v: 0,
            d: 1560,
            c: p.c_max_t,
            t_c: 0,
        };
        for tick in 1..=p.t_c {
            assert_eq!(s.mode, Mode::Cooling, "tick {tick}");
            let out = apply_rule(&s, RoverRule::Cooling, &p).unwrap();
            s = out.state;
        }
        assert_eq!(s.mode, Mode::Running);
        assert_eq!(s.t_c, 0);
        // Six ticks of g_s + g_c = 35 J/s: 35/28 = 1.25 C, quantized to 1.2
        // per tick (the 0.05 tie rounds the remaining charge up).
        assert_eq!(s.c, p.c_max_t - 6 * 12);
    }

    #[test]
    fn cooling_is_the_only_enabled_rule_mid_cooling() {
        let p = params();
        let s = RoverState {
            mode: Mode::Cooling,
            a: 0,
            v: 0,
            d: 1560,
            c: p.c_max_t,
            t_c: 2,
        };
        let enabled: Vec<_> = ALL_RULES
            .iter()
            .filter(|r| apply_rule(&s, **r, &p).is_some())
            .collect();
        assert_eq!(enabled.len(), 1);
        assert_eq!(*enabled[0], RoverRule::Cooling);
    }

    #[test]
    fn overspeed_flags_engine_explode() {
        let p = params();
        // v = 9.0 with a = 4.5 integrates to 13.5 > v_safemax.
        let s = running(45, 90, 500, p.c_max_t);
        let out = apply_rule(&s, RoverRule::Running, &p).unwrap();
        assert_eq!(out.violation, Some(Violation::EngineExplode));
        assert_eq!(out.state.mode, Mode::EngineBlown);
    }

    #[test]
    fn invariants_are_strict_at_the_boundary() {
        let p = params();
        let at_limit = running(0, p.v_safemax_t, 500, p.c_max_t);
        assert_eq!(check_invariants(&at_limit, &p), None);
        let over = running(0, p.v_safemax_t + p.quantum_t, 500, p.c_max_t);
        assert_eq!(check_invariants(&over, &p), Some(Violation::EngineExplode));
        let low_battery = RoverState {
            c: p.c_min_t - 1,
            ..RoverState::start(p.c_max_t)
        };
        assert_eq!(
            check_invariants(&low_battery, &p),
            Some(Violation::EnergyEnd)
        );
    }

    #[test]
    fn goal_requires_exact_rest_at_d_final() {
        let mut cfg = params().config;
        cfg.d_final = 200.0;
        let p = cfg.validate().unwrap();
        let goal = running(0, 0, 2000, p.c_max_t);
        assert!(is_goal(&goal, &p));
        assert!(!is_goal(&running(0, 1, 2000, p.c_max_t), &p));
        assert!(!is_goal(&running(0, 0, 1999, p.c_max_t), &p));
        let mut blown = goal;
        blown.mode = Mode::EngineBlown;
        assert!(!is_goal(&blown, &p));
    }

    #[test]
    fn step_cost_matches_reference_values() {
        let p = params();
        let stopped = RoverState::start(p.c_max_t);
        // 25^2 / 60 = 10.416667 at six decimals.
        assert_eq!(step_cost(&stopped, 0, &p), Cost(10_416_667));
        let cooling = RoverState {
            mode: Mode::Cooling,
            a: 0,
            v: 0,
            d: 1560,
            c: p.c_max_t,
            t_c: 1,
        };
        // (25+10)^2 / 30 = 40.833333.
        assert_eq!(step_cost(&cooling, 30, &p), Cost(40_833_333));
        for mode in [Mode::NoEnergy, Mode::EngineBlown] {
            let s = RoverState {
                mode,
                ..RoverState::start(p.c_max_t)
            };
            assert_eq!(step_cost(&s, 10, &p), Cost::ZERO);
        }
    }
}
