use std::fmt;
use std::str::FromStr;

use crate::error::{config_err, Error};
use crate::redirector::DecisionRecord;

/// Which buffering policy a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyMode {
    /// Everything goes straight to disk.
    HddOnly,
    /// Everything goes through one undivided SSD buffer.
    FullBb,
    /// Fixed water-mark redirection, pipelined buffer, flushes never paused.
    SsdupStatic,
    /// Adaptive threshold, pipelined buffer, traffic-aware flushing.
    SsdupAdaptive,
}

impl PolicyMode {
    pub const ALL: [PolicyMode; 4] =
        [PolicyMode::HddOnly, PolicyMode::FullBb, PolicyMode::SsdupStatic, PolicyMode::SsdupAdaptive];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyMode::HddOnly => "hdd-only",
            PolicyMode::FullBb => "full-bb",
            PolicyMode::SsdupStatic => "ssdup-static",
            PolicyMode::SsdupAdaptive => "ssdup-adaptive",
        }
    }
}

impl fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PolicyMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| config_err(format!("unknown mode {s:?}; expected hdd-only, full-bb, ssdup-static or ssdup-adaptive")))
    }
}

/// Outcome of one simulated run. Times are seconds, sizes bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub mode: PolicyMode,
    pub total_bytes: u64,
    /// Time the application spends in I/O: idle gaps and the final drain
    /// after the last request are excluded.
    pub total_time: f64,
    /// `total_bytes / total_time`, bytes per second.
    pub throughput: f64,
    pub bytes_to_ssd: u64,
    pub bytes_to_hdd_direct: u64,
    pub bytes_flushed: u64,
    pub ssd_fraction: f64,
    /// Time during which flush work was pending but held back by the gate.
    pub flush_pause_total: f64,
    pub pause_episodes: u32,
    pub producer_stall_total: f64,
    pub idle_total: f64,
    /// End of the run including idle gaps and the final drain.
    pub makespan: f64,
    pub decisions: Vec<DecisionRecord>,
}

impl Metrics {
    pub fn throughput_mbps(&self) -> f64 {
        self.throughput / 1e6
    }
}
