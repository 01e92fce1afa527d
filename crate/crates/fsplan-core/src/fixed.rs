//! Fixed-point arithmetic helpers.
//!
//! State variables are stored as scaled integers (tenths of their unit) and
//! costs as micro-units (scale 1e6), so that comparisons and summations are
//! exact and independent of evaluation order.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

/// Scale factor for state variables: one stored unit is 0.1 of the physical unit.
pub const TENTH_SCALE: i64 = 10;

/// Scale factor for costs: one stored unit is 1e-6 of the cost value.
pub const COST_SCALE: i64 = 1_000_000;

/// A nonnegative plan cost in fixed-point micro-units.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Cost(pub i64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    /// Converts a real-valued cost to micro-units, rounding ties away from zero.
    pub fn from_value(x: f64) -> Cost {
        Cost((x * COST_SCALE as f64).round() as i64)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / COST_SCALE as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.0 += rhs.0;
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.value())
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cost({})", self)
    }
}

/// Rounds `x` to the nearest multiple of `quantum`, ties away from zero.
pub fn quantize(x: f64, quantum: f64) -> f64 {
    debug_assert!(quantum > 0.0);
    // f64::round rounds half-way cases away from zero.
    (x / quantum).round() * quantum
}

/// [`quantize`] on scaled integers: rounds `v` to the nearest multiple of `q`.
pub fn quantize_scaled(v: i64, q: i64) -> i64 {
    debug_assert!(q > 0);
    let sign = if v < 0 { -1 } else { 1 };
    let mag = v.abs();
    let base = mag / q * q;
    let rem = mag - base;
    let rounded = if 2 * rem >= q { base + q } else { base };
    sign * rounded
}

/// Converts a config value to tenths, requiring it to lie on the 0.1 grid.
pub fn to_tenths(x: f64) -> Option<i64> {
    let scaled = x * TENTH_SCALE as f64;
    let rounded = scaled.round();
    if (scaled - rounded).abs() < 1e-6 {
        Some(rounded as i64)
    } else {
        None
    }
}

/// Renders a tenths-scaled value with one decimal place.
pub fn tenths_to_string(v: i64) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let mag = v.abs();
    format!("{}{}.{}", sign, mag / TENTH_SCALE, mag % TENTH_SCALE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_to_nearest() {
        assert_eq!(quantize(0.0, 0.1), 0.0);
        assert_eq!(quantize(4.44, 0.1), 4.4);
        assert_eq!(quantize(4.46, 0.1), 4.5);
    }

    #[test]
    fn quantize_ties_away_from_zero() {
        assert_eq!(quantize(4.45, 0.1), 4.5);
        assert_eq!(quantize(-4.45, 0.1), -4.5);
        assert_eq!(quantize_scaled(45, 10), 50);
        assert_eq!(quantize_scaled(-45, 10), -50);
        assert_eq!(quantize_scaled(44, 10), 40);
        assert_eq!(quantize_scaled(46, 10), 50);
    }

    #[test]
    fn quantize_scaled_matches_float_path() {
        for v in -100..=100 {
            let f = quantize(v as f64 / 10.0, 0.5);
            let s = quantize_scaled(v, 5);
            assert_eq!((f * 10.0).round() as i64, s, "v={v}");
        }
    }

    #[test]
    fn cost_display_six_decimals() {
        assert_eq!(Cost(10_416_667).to_string(), "10.416667");
        assert_eq!(Cost::ZERO.to_string(), "0.000000");
    }

    #[test]
    fn tenths_rendering() {
        assert_eq!(tenths_to_string(1995), "199.5");
        assert_eq!(tenths_to_string(-45), "-4.5");
        assert_eq!(tenths_to_string(0), "0.0");
    }
}
