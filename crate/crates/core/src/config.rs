//! Simulation configuration, loaded from JSON.
//!
//! Every key except `idle_reset_s` must be present and unknown keys are
//! rejected. Validation reports all offending keys at once.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::detector::DEFAULT_WINDOW;
use crate::devices::DeviceProfile;
use crate::error::{config_err, Result};
use crate::redirector::{DEFAULT_CAPACITY, DEFAULT_THRESHOLD, STATIC_HIGH, STATIC_LOW};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Devices {
    pub hdd: DeviceProfile,
    pub ssd: DeviceProfile,
}

impl Default for Devices {
    fn default() -> Self {
        Self { hdd: DeviceProfile::hdd(), ssd: DeviceProfile::ssd() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub devices: Devices,
    /// Requests per stream.
    #[serde(rename = "window_W")]
    pub window: usize,
    pub percent_list_capacity: usize,
    /// Threshold used before any stream has been observed.
    pub default_threshold: f64,
    /// Size of each of the two buffer regions, bytes.
    pub region_bytes: u64,
    /// How long a quiet producer keeps a paused flush waiting, seconds.
    pub gate_check_interval_s: f64,
    /// HDD dispatch window depth.
    #[serde(rename = "cfq_Q")]
    pub cfq_q: usize,
    pub static_high: f64,
    pub static_low: f64,
    pub seed: u64,
    /// Idle gap after which the redirector forgets its history, seconds.
    #[serde(default = "default_idle_reset")]
    pub idle_reset_s: f64,
}

fn default_idle_reset() -> f64 {
    5.0
}

impl Default for Config {
    fn default() -> Self {
        Self {
            devices: Devices::default(),
            window: DEFAULT_WINDOW,
            percent_list_capacity: DEFAULT_CAPACITY,
            default_threshold: DEFAULT_THRESHOLD,
            region_bytes: 4 << 30,
            gate_check_interval_s: 1.0,
            cfq_q: 128,
            static_high: STATIC_HIGH,
            static_low: STATIC_LOW,
            seed: 42,
            idle_reset_s: default_idle_reset(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Unsigned,
    Number,
    Object(&'static [(&'static str, Kind, bool)]),
}

const PROFILE_KEYS: &[(&str, Kind, bool)] = &[
    ("seq_bw", Kind::Number, true),
    ("seek_base", Kind::Number, true),
    ("seek_per_byte", Kind::Number, true),
    ("per_req_overhead", Kind::Number, true),
];

const DEVICE_KEYS: &[(&str, Kind, bool)] =
    &[("hdd", Kind::Object(PROFILE_KEYS), true), ("ssd", Kind::Object(PROFILE_KEYS), true)];

const TOP_KEYS: &[(&str, Kind, bool)] = &[
    ("devices", Kind::Object(DEVICE_KEYS), true),
    ("window_W", Kind::Unsigned, true),
    ("percent_list_capacity", Kind::Unsigned, true),
    ("default_threshold", Kind::Number, true),
    ("region_bytes", Kind::Unsigned, true),
    ("gate_check_interval_s", Kind::Number, true),
    ("cfq_Q", Kind::Unsigned, true),
    ("static_high", Kind::Number, true),
    ("static_low", Kind::Number, true),
    ("seed", Kind::Unsigned, true),
    ("idle_reset_s", Kind::Number, false),
];

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn check_shape(value: &Value, keys: &[(&str, Kind, bool)], prefix: &str, problems: &mut Vec<String>) {
    let Some(map) = value.as_object() else {
        let name = if prefix.is_empty() { "document" } else { prefix };
        problems.push(format!("{name} (expected an object)"));
        return;
    };
    for key in map.keys() {
        if !keys.iter().any(|(k, _, _)| k == key) {
            problems.push(format!("{} (unknown key)", join(prefix, key)));
        }
    }
    for &(key, kind, required) in keys {
        let path = join(prefix, key);
        match (map.get(key), kind) {
            (None, _) if required => problems.push(format!("{path} (missing)")),
            (None, _) => {}
            (Some(v), Kind::Unsigned) if !v.is_u64() => {
                problems.push(format!("{path} (expected a non-negative integer)"))
            }
            (Some(v), Kind::Number) if !v.is_number() => problems.push(format!("{path} (expected a number)")),
            (Some(v), Kind::Object(inner)) => check_shape(v, inner, &path, problems),
            _ => {}
        }
    }
}

fn offending(problems: Vec<String>) -> Result<()> {
    if problems.is_empty() {
        Ok(())
    } else {
        Err(config_err(format!("offending keys: {}", problems.join(", "))))
    }
}

impl Config {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let mut problems = Vec::new();
        check_shape(&value, TOP_KEYS, "", &mut problems);
        offending(problems)?;
        let config: Config = serde_json::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks value ranges and reports every offending key.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, p) in [("devices.hdd", &self.devices.hdd), ("devices.ssd", &self.devices.ssd)] {
            if !(p.seq_bw.is_finite() && p.seq_bw > 0.0) {
                problems.push(format!("{name}.seq_bw (must be positive)"));
            }
            for (field, v) in [
                ("seek_base", p.seek_base),
                ("seek_per_byte", p.seek_per_byte),
                ("per_req_overhead", p.per_req_overhead),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    problems.push(format!("{name}.{field} (must be >= 0)"));
                }
            }
        }
        if !self.devices.ssd.is_seekless() {
            problems.push("devices.ssd (seek terms must be 0)".to_string());
        }
        if self.window < 2 {
            problems.push("window_W (must be >= 2)".to_string());
        }
        if self.percent_list_capacity == 0 {
            problems.push("percent_list_capacity (must be >= 1)".to_string());
        }
        for (key, v) in [
            ("default_threshold", self.default_threshold),
            ("static_high", self.static_high),
            ("static_low", self.static_low),
        ] {
            if !(0.0..=1.0).contains(&v) {
                problems.push(format!("{key} (must be in [0, 1])"));
            }
        }
        if self.static_low > self.static_high {
            problems.push("static_low (must not exceed static_high)".to_string());
        }
        if self.region_bytes == 0 {
            problems.push("region_bytes (must be positive)".to_string());
        }
        if !(self.gate_check_interval_s.is_finite() && self.gate_check_interval_s >= 0.0) {
            problems.push("gate_check_interval_s (must be >= 0)".to_string());
        }
        if self.cfq_q == 0 {
            problems.push("cfq_Q (must be >= 1)".to_string());
        }
        if self.idle_reset_s.is_nan() || self.idle_reset_s < 0.0 {
            problems.push("idle_reset_s (must be >= 0)".to_string());
        }
        offending(problems)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn message(text: &str) -> String {
        match Config::from_json(text) {
            Err(Error::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn default_round_trips() {
        let c = Config::default();
        c.validate().unwrap();
        assert_eq!(Config::from_json(&c.to_json_pretty()).unwrap(), c);
    }

    #[test]
    fn idle_reset_is_optional() {
        let mut v: Value = serde_json::to_value(Config::default()).unwrap();
        v.as_object_mut().unwrap().remove("idle_reset_s");
        let c = Config::from_json(&v.to_string()).unwrap();
        assert_eq!(c.idle_reset_s, 5.0);
    }

    #[test]
    fn unknown_and_missing_keys_are_listed() {
        let mut v: Value = serde_json::to_value(Config::default()).unwrap();
        let map = v.as_object_mut().unwrap();
        map.remove("cfq_Q");
        map.insert("colour".into(), Value::from(3));
        map["devices"]["hdd"].as_object_mut().unwrap().insert("rpm".into(), Value::from(7200));
        let msg = message(&v.to_string());
        assert!(msg.contains("colour (unknown key)"), "{msg}");
        assert!(msg.contains("devices.hdd.rpm (unknown key)"), "{msg}");
        assert!(msg.contains("cfq_Q (missing)"), "{msg}");
    }

    #[test]
    fn range_errors_are_listed_together() {
        let mut c = Config { window: 1, static_low: 0.9, ..Config::default() };
        c.devices.hdd.seq_bw = 0.0;
        let msg = message(&serde_json::to_string(&c).unwrap());
        for key in ["window_W", "devices.hdd.seq_bw", "static_low"] {
            assert!(msg.contains(key), "{msg}");
        }
    }

    #[test]
    fn wrong_types_name_the_key() {
        let mut v: Value = serde_json::to_value(Config::default()).unwrap();
        v["region_bytes"] = Value::from("4GiB");
        assert!(message(&v.to_string()).contains("region_bytes (expected a non-negative integer)"));
    }

    #[test]
    fn seeking_ssd_is_rejected() {
        let mut c = Config::default();
        c.devices.ssd.seek_base = 1e-3;
        assert!(c.validate().is_err());
    }
}
