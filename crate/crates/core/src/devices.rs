//! Parametric device cost models.
//!
//! A request costs a fixed overhead, its transfer time at the sequential
//! bandwidth and, when the head is not already at the request's start, a seek
//! that grows linearly with the logical distance. SSD profiles have no seek
//! terms. The HDD queue is modelled as a CFQ-like window: up to `Q` queued
//! requests are sorted by offset and adjacent ones merged before service.
//!
//! All positions live in one logical address space; files are folded in at
//! [`FILE_STRIDE`]-byte bases.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Distance between the folded base addresses of consecutive file ids.
pub const FILE_STRIDE: u64 = 1 << 42;

/// Folds `(file, offset)` into the single logical head space.
pub fn fold(file: u32, offset: u64) -> u64 {
    u64::from(file) * FILE_STRIDE + offset
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProfile {
    /// Sequential bandwidth, bytes per second.
    pub seq_bw: f64,
    /// Fixed cost of any head movement, seconds.
    pub seek_base: f64,
    /// Additional seek cost per byte of distance, seconds.
    pub seek_per_byte: f64,
    /// Fixed cost per serviced request, seconds.
    pub per_req_overhead: f64,
}

impl DeviceProfile {
    /// Default disk: sorted 16-process contiguous windows run at about
    /// 220 MB/s and fully random ones at about 95 MB/s with 256 KiB requests.
    pub fn hdd() -> Self {
        Self {
            seq_bw: 270e6,
            seek_base: 1.8e-3,
            seek_per_byte: 0.0,
            per_req_overhead: 0.0,
        }
    }

    /// Default flash buffer; effective rate seen by the I/O node.
    pub fn ssd() -> Self {
        Self {
            seq_bw: 240e6,
            seek_base: 0.0,
            seek_per_byte: 0.0,
            per_req_overhead: 0.0,
        }
    }

    pub fn is_seekless(&self) -> bool {
        self.seek_base == 0.0 && self.seek_per_byte == 0.0
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.seq_bw.is_finite() && self.seq_bw > 0.0) {
            return Err(config_err(format!("{name}.seq_bw must be positive, got {}", self.seq_bw)));
        }
        for (field, v) in [
            ("seek_base", self.seek_base),
            ("seek_per_byte", self.seek_per_byte),
            ("per_req_overhead", self.per_req_overhead),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_err(format!("{name}.{field} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    #[inline]
    fn cost(&self, head: &mut HeadState, offset: u64, size: u64) -> f64 {
        let distance = offset.abs_diff(head.last_end);
        let seek = if distance == 0 {
            0.0
        } else {
            self.seek_base + self.seek_per_byte * distance as f64
        };
        head.last_end = offset + size;
        self.per_req_overhead + size as f64 / self.seq_bw + seek
    }
}

/// Where the head sits after the previous request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HeadState {
    pub last_end: u64,
}

/// A contiguous run of bytes in the folded address space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Extent {
    pub offset: u64,
    pub size: u64,
}

impl Extent {
    pub fn new(offset: u64, size: u64) -> Self {
        Self { offset, size }
    }

    pub fn end(&self) -> u64 {
        self.offset + self.size
    }
}

/// Services one request and moves the head past it.
pub fn service_time(profile: &DeviceProfile, head: &mut HeadState, offset: u64, size: u64) -> Result<f64> {
    profile.validate("device")?;
    if size == 0 {
        return Err(config_err("request size must be positive"));
    }
    Ok(profile.cost(head, offset, size))
}

/// Orders `reqs` the way a CFQ-like queue of depth `q` dispatches them: each
/// batch of `q` arrivals is sorted by offset and touching or overlapping
/// requests are merged.
pub fn cfq_dispatch(reqs: &[Extent], q: usize) -> Vec<Extent> {
    let q = q.max(1);
    let mut out: Vec<Extent> = Vec::with_capacity(reqs.len());
    let mut batch: Vec<Extent> = Vec::with_capacity(q.min(reqs.len()));
    for chunk in reqs.chunks(q) {
        batch.clear();
        batch.extend_from_slice(chunk);
        batch.sort_unstable();
        let mut run = batch[0];
        for e in &batch[1..] {
            if e.offset <= run.end() {
                run.size = run.end().max(e.end()) - run.offset;
            } else {
                out.push(run);
                run = *e;
            }
        }
        out.push(run);
    }
    out
}

/// Total time to service `reqs` through a CFQ-like window of depth `q`.
pub fn service_window(profile: &DeviceProfile, head: &mut HeadState, reqs: &[Extent], q: usize) -> Result<f64> {
    profile.validate("device")?;
    if q == 0 {
        return Err(config_err("queue depth must be at least 1"));
    }
    if reqs.iter().any(|e| e.size == 0) {
        return Err(config_err("request size must be positive"));
    }
    Ok(cfq_dispatch(reqs, q)
        .iter()
        .map(|e| profile.cost(head, e.offset, e.size))
        .sum())
}

/// A device lane: a validated profile plus its head.
#[derive(Debug, Clone)]
pub struct Device {
    profile: DeviceProfile,
    head: HeadState,
}

impl Device {
    pub fn new(profile: DeviceProfile, name: &str) -> Result<Self> {
        profile.validate(name)?;
        Ok(Self { profile, head: HeadState::default() })
    }

    pub fn profile(&self) -> &DeviceProfile {
        &self.profile
    }

    pub fn head(&self) -> HeadState {
        self.head
    }

    /// Services one extent; the profile is known to be valid.
    pub fn service(&mut self, e: Extent) -> f64 {
        self.profile.cost(&mut self.head, e.offset, e.size)
    }
}
