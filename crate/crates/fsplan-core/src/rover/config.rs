//! Rover model constants, loaded from JSON and validated into scaled form.

use crate::fixed::{self, to_tenths};
use crate::pack::{FieldSpec, LayoutError, StateLayout};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use thiserror::Error;

/// Reference statistics a config may carry for comparison in `stats` output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineStats {
    /// Reachable-state count reported by the reference run of this model.
    pub reachable_states: u64,
    /// Theoretical state-space size of the reference discretization.
    pub theoretical_states: f64,
}

/// Raw rover configuration as stored on disk.
///
/// Units: speeds in cm/s, accelerations in cm/s², distances in cm, charge in
/// coulombs, powers in J/s, times in seconds. `quantum` is the discretization
/// step applied to all continuous state variables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoverConfig {
    /// Air density, kg/m³.
    pub rho: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
    /// Vehicle mass, kg.
    pub m: f64,
    /// Kinetic friction coefficient (used by the power model only).
    pub mu: f64,
    /// Initial battery charge, C.
    pub c_max: f64,
    /// Minimum battery charge, C; dropping below it is an invariant violation.
    pub c_min: f64,
    /// Maximum speed, cm/s.
    pub v_max: f64,
    /// Safety speed threshold, cm/s; exceeding it blows the engine.
    pub v_safemax: f64,
    /// Maximum commanded acceleration magnitude, cm/s².
    pub a_max: f64,
    /// Acceleration increment per accelerate/decelerate, cm/s².
    pub a_step: f64,
    /// Base CPU power draw, J/s.
    pub g_s: f64,
    /// Cooling task duration, s.
    pub t_c: u32,
    /// Distance between mandatory cooling stops, cm.
    pub d_max: f64,
    /// Extra power draw while cooling, J/s.
    pub g_c: f64,
    /// Goal distance, cm.
    pub d_final: f64,
    /// Maximum plan duration, s.
    pub t_max: u32,
    /// Drag coefficient.
    #[serde(rename = "Cd")]
    pub cd: f64,
    /// Rolling resistance coefficient.
    #[serde(rename = "Crr")]
    pub crr: f64,
    /// Frontal area, m².
    pub fa: f64,
    /// Bus voltage, V; converts power draw (J/s) into charge drain (C/s).
    #[serde(rename = "V_bus")]
    pub v_bus: f64,
    /// Per-tick speed loss, cm/s²; commanded acceleration is net of friction
    /// when this is zero.
    pub friction_decel: f64,
    /// Discretization step for all continuous state variables.
    pub quantum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineStats>,
    /// Free-form annotations (e.g. which values are calibrated); ignored by
    /// the model and excluded from the config hash.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub notes: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("config field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("state layout: {0}")]
    Layout(#[from] LayoutError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Validated configuration with state variables pre-scaled to tenths.
#[derive(Debug, Clone)]
pub struct RoverParams {
    pub config: RoverConfig,
    pub quantum_t: i64,
    pub a_max_t: i64,
    pub a_step_t: i64,
    pub v_max_t: i64,
    pub v_safemax_t: i64,
    /// Top of the packed speed range: `v_max + a_max`, covering the one-tick
    /// overshoot of states that blow the engine.
    pub v_top_t: i64,
    pub d_max_t: i64,
    pub d_final_t: i64,
    /// Top of the packed distance range: `d_final` plus one tick of travel.
    pub d_top_t: i64,
    pub c_max_t: i64,
    pub c_min_t: i64,
    pub friction_t: i64,
    pub t_c: u32,
    pub t_max: u32,
}

impl RoverConfig {
    pub fn from_path(path: &Path) -> Result<RoverConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn validate(self) -> Result<RoverParams, ConfigError> {
        let quantum_t = to_tenths(self.quantum)
            .filter(|&q| q > 0)
            .ok_or_else(|| invalid("quantum", "must be a positive multiple of 0.1"))?;

        let quantized = |field: &'static str, value: f64| -> Result<i64, ConfigError> {
            let t = to_tenths(value)
                .ok_or_else(|| invalid(field, format!("{value} is not on the 0.1 grid")))?;
            if t % quantum_t != 0 {
                return Err(invalid(
                    field,
                    format!("{value} is not a multiple of quantum {}", self.quantum),
                ));
            }
            Ok(t)
        };

        let a_max_t = quantized("a_max", self.a_max)?;
        let a_step_t = quantized("a_step", self.a_step)?;
        let v_max_t = quantized("v_max", self.v_max)?;
        let v_safemax_t = quantized("v_safemax", self.v_safemax)?;
        let d_max_t = quantized("d_max", self.d_max)?;
        let d_final_t = quantized("d_final", self.d_final)?;
        let c_max_t = quantized("c_max", self.c_max)?;
        let c_min_t = quantized("c_min", self.c_min)?;
        let friction_t = quantized("friction_decel", self.friction_decel)?;

        if !(c_min_t > 0 && c_min_t < c_max_t) {
            return Err(invalid("c_min", "requires 0 < c_min < c_max"));
        }
        if !(v_safemax_t > 0 && v_safemax_t <= v_max_t) {
            return Err(invalid("v_safemax", "requires 0 < v_safemax <= v_max"));
        }
        if a_step_t <= 0 {
            return Err(invalid("a_step", "must be positive"));
        }
        if a_max_t <= 0 {
            return Err(invalid("a_max", "must be positive"));
        }
        if d_max_t <= 0 {
            return Err(invalid("d_max", "must be positive"));
        }
        if d_final_t <= 0 {
            return Err(invalid("d_final", "must be positive"));
        }
        if self.t_c == 0 {
            return Err(invalid("t_c", "must be positive"));
        }
        if self.t_max == 0 {
            return Err(invalid("t_max", "must be positive"));
        }
        if friction_t < 0 {
            return Err(invalid("friction_decel", "must be nonnegative"));
        }
        for (field, value) in [
            ("rho", self.rho),
            ("g", self.g),
            ("m", self.m),
            ("V_bus", self.v_bus),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(field, "must be finite and positive"));
            }
        }
        for (field, value) in [
            ("mu", self.mu),
            ("g_s", self.g_s),
            ("g_c", self.g_c),
            ("Cd", self.cd),
            ("Crr", self.crr),
            ("fa", self.fa),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(invalid(field, "must be finite and nonnegative"));
            }
        }

        let params = RoverParams {
            v_top_t: v_max_t + a_max_t,
            d_top_t: d_final_t + v_max_t,
            quantum_t,
            a_max_t,
            a_step_t,
            v_max_t,
            v_safemax_t,
            d_max_t,
            d_final_t,
            c_max_t,
            c_min_t,
            friction_t,
            t_c: self.t_c,
            t_max: self.t_max,
            config: self,
        };
        // Reject configurations whose descriptor would not fit 64 bits.
        params.layout()?;
        Ok(params)
    }
}

impl RoverParams {
    /// Bit-packing layout of the rover state descriptor.
    pub fn layout(&self) -> Result<StateLayout, LayoutError> {
        let q = self.quantum_t;
        StateLayout::new(vec![
            FieldSpec::new("mode", 0, 5, 1),
            FieldSpec::new("T_c", 0, self.t_c as i64, 1),
            FieldSpec::new("a", -self.a_max_t, self.a_max_t, q),
            FieldSpec::new("v", 0, self.v_top_t, q),
            FieldSpec::new("d", 0, self.d_top_t, q),
            FieldSpec::new("c", 0, self.c_max_t, q),
        ])
    }

    /// Short hash of the semantic config fields, used to tie plans and
    /// manifests to the configuration that produced them.
    pub fn config_hash(&self) -> String {
        let c = &self.config;
        let canonical = format!(
            "rho={:?};g={:?};m={:?};mu={:?};c_max={:?};c_min={:?};v_max={:?};v_safemax={:?};\
             a_max={:?};a_step={:?};g_s={:?};t_c={};d_max={:?};g_c={:?};d_final={:?};t_max={};\
             Cd={:?};Crr={:?};fa={:?};V_bus={:?};friction_decel={:?};quantum={:?}",
            c.rho,
            c.g,
            c.m,
            c.mu,
            c.c_max,
            c.c_min,
            c.v_max,
            c.v_safemax,
            c.a_max,
            c.a_step,
            c.g_s,
            c.t_c,
            c.d_max,
            c.g_c,
            c.d_final,
            c.t_max,
            c.cd,
            c.crr,
            c.fa,
            c.v_bus,
            c.friction_decel,
            c.quantum
        );
        let digest = Sha256::digest(canonical.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn quantum_str(&self) -> String {
        fixed::tenths_to_string(self.quantum_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn table1_like() -> RoverConfig {
        serde_json::from_value(serde_json::json!({
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
    }

    #[test]
    fn validates_and_scales() {
        let p = table1_like().validate().unwrap();
        assert_eq!(p.a_step_t, 15);
        assert_eq!(p.d_final_t, 1995);
        assert_eq!(p.v_top_t, 150);
        assert_eq!(p.d_top_t, 2095);
        let layout = p.layout().unwrap();
        assert!(layout.total_bits() <= 64);
    }

    #[test]
    fn rejects_inverted_speed_bounds() {
        let mut cfg = table1_like();
        cfg.v_safemax = 12.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("v_safemax"));
    }

    #[test]
    fn rejects_off_quantum_values() {
        let mut cfg = table1_like();
        cfg.quantum = 0.5;
        cfg.d_max = 130.2;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("d_max"));
    }

    #[test]
    fn hash_tracks_semantic_fields_only() {
        let base = table1_like().validate().unwrap().config_hash();
        let mut with_notes = table1_like();
        with_notes
            .notes
            .insert("comment".into(), serde_json::json!("x"));
        assert_eq!(base, with_notes.validate().unwrap().config_hash());
        let mut changed = table1_like();
        changed.crr = 0.06;
        assert_ne!(base, changed.validate().unwrap().config_hash());
    }
}
