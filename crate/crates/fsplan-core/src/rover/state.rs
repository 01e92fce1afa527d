//! Rover state representation.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Drive mode. `NoEnergy` and `EngineBlown` are the terminal error states
/// entered when an invariant is violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Stopped = 0,
    Running = 1,
    Braking = 2,
    Cooling = 3,
    NoEnergy = 4,
    EngineBlown = 5,
}

impl Mode {
    pub fn from_index(i: i64) -> Option<Mode> {
        Some(match i {
            0 => Mode::Stopped,
            1 => Mode::Running,
            2 => Mode::Braking,
            3 => Mode::Cooling,
            4 => Mode::NoEnergy,
            5 => Mode::EngineBlown,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Stopped => "stopped",
            Mode::Running => "running",
            Mode::Braking => "braking",
            Mode::Cooling => "cooling",
            Mode::NoEnergy => "noenergy",
            Mode::EngineBlown => "engineblown",
        }
    }

    /// True for the modes in which the vehicle can be moving.
    pub fn implies_motion(self) -> bool {
        matches!(self, Mode::Running | Mode::Braking)
    }

    pub fn is_error(self) -> bool {
        matches!(self, Mode::NoEnergy | Mode::EngineBlown)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rover state. All continuous variables are stored as scaled integers
/// (tenths of cm/s², cm/s, cm and C respectively) so transitions are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RoverState {
    pub mode: Mode,
    /// Commanded acceleration, tenths of cm/s².
    pub a: i64,
    /// Speed, tenths of cm/s.
    pub v: i64,
    /// Covered distance, tenths of cm.
    pub d: i64,
    /// Battery charge, tenths of C.
    pub c: i64,
    /// Cooling timer, s; nonzero only while cooling.
    pub t_c: u32,
}

impl RoverState {
    /// The start state: stopped at the origin with a full battery.
    pub fn start(c_max_t: i64) -> RoverState {
        RoverState {
            mode: Mode::Stopped,
            a: 0,
            v: 0,
            d: 0,
            c: c_max_t,
            t_c: 0,
        }
    }
}
