//! Stage-based completion-time model with and without pipelining.

use crate::error::{config_err, Result};

/// Per-stage costs of an `n`-stage write workload of which the first `m`
/// stages fit in the SSD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineParams {
    pub n: u64,
    pub m: u64,
    /// Writing one stage to SSD.
    pub t_ssd: f64,
    /// Writing one stage directly to HDD.
    pub t_hdd: f64,
    /// Flushing one stage from SSD to HDD.
    pub t_f: f64,
    /// Filling one stage of buffer; equal to `t_ssd`.
    pub t_b: f64,
    /// Flushing one stage while direct HDD traffic competes for the head.
    pub t_f_interfered: f64,
}

impl PipelineParams {
    /// Parameters with `t_b = t_ssd` and no interference.
    pub fn new(n: u64, m: u64, t_ssd: f64, t_hdd: f64, t_f: f64) -> Self {
        Self { n, m, t_ssd, t_hdd, t_f, t_b: t_ssd, t_f_interfered: t_f }
    }

    pub fn interfered(mut self, t_f_interfered: f64) -> Self {
        self.t_f_interfered = t_f_interfered;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m >= self.n {
            return Err(config_err(format!("need m < n, got m={} n={}", self.m, self.n)));
        }
        for (name, v) in [
            ("t_ssd", self.t_ssd),
            ("t_hdd", self.t_hdd),
            ("t_f", self.t_f),
            ("t_b", self.t_b),
            ("t_f_interfered", self.t_f_interfered),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err(format!("{name} must be positive, got {v}")));
            }
        }
        if self.t_b != self.t_ssd {
            return Err(config_err("t_b must equal t_ssd"));
        }
        Ok(())
    }
}

/// `m` stages absorbed by the SSD, the rest written straight to disk.
pub fn predict_no_pipeline(p: &PipelineParams) -> Result<f64> {
    p.validate()?;
    Ok(p.m as f64 * p.t_ssd + (p.n - p.m) as f64 * p.t_hdd)
}

/// Once the SSD is full, each further stage costs the slower of flushing a
/// stage and filling one.
pub fn predict_pipeline(p: &PipelineParams, interfered: bool) -> Result<f64> {
    p.validate()?;
    let t_f = if interfered { p.t_f_interfered } else { p.t_f };
    Ok(p.m as f64 * p.t_ssd + (p.n - p.m) as f64 * t_f.max(p.t_b))
}
