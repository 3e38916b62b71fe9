//! Logical-time simulation of one I/O node.
//!
//! The producer walks the trace window by window. Each window is written to
//! the device chosen from the previous window's statistics. SSD-bound
//! requests are appended to the active buffer region; HDD-bound windows are
//! dispatched through the CFQ model. A flusher drains handed-off regions in
//! plan order over the same disk head, so any flush write issued during a
//! direct window is interleaved with the direct runs and pays the extra
//! seeks. In adaptive mode the gate holds flushes back while direct traffic
//! is sequential.

use std::collections::VecDeque;

use crate::buffer::{flush_gate, plan_flush, GateDecision, RegionState, SsdBuffer};
use crate::config::Config;
use crate::detector::stream_stats;
use crate::devices::{cfq_dispatch, fold, Device, Extent};
use crate::error::{config_err, Result};
use crate::redirector::{DecisionRecord, Redirector, Target, WaterMarks};
use crate::trace::{Request, Trace};

use super::metrics::{Metrics, PolicyMode};

/// One sub-trace of a run, optionally preceded by an idle (compute) gap.
#[derive(Debug, Clone, Copy)]
pub struct Phase<'a> {
    pub trace: &'a Trace,
    pub idle_before_s: f64,
    /// Marks a workload change: the redirector forgets its history.
    pub boundary: bool,
}

impl<'a> Phase<'a> {
    pub fn new(trace: &'a Trace) -> Self {
        Self { trace, idle_before_s: 0.0, boundary: false }
    }

    pub fn idle_before(mut self, seconds: f64) -> Self {
        self.idle_before_s = seconds;
        self
    }

    pub fn boundary(mut self) -> Self {
        self.boundary = true;
        self
    }
}

/// Simulates `trace` under `mode`.
pub fn simulate(trace: &Trace, mode: PolicyMode, config: &Config) -> Result<Metrics> {
    simulate_phases(&[Phase::new(trace)], mode, config)
}

/// Simulates consecutive phases as one run.
pub fn simulate_phases(phases: &[Phase<'_>], mode: PolicyMode, config: &Config) -> Result<Metrics> {
    config.validate()?;
    for phase in phases {
        if !(phase.idle_before_s.is_finite() && phase.idle_before_s >= 0.0) {
            return Err(config_err(format!("idle gap must be >= 0, got {}", phase.idle_before_s)));
        }
        if let Ok(size) = phase.trace.req_size() {
            if mode != PolicyMode::HddOnly && size > config.region_bytes {
                return Err(config_err(format!(
                    "region_bytes {} is smaller than one request ({size} bytes)",
                    config.region_bytes
                )));
            }
        }
    }
    let mut sim = Sim::new(mode, config)?;
    for phase in phases {
        sim.run_phase(phase)?;
    }
    Ok(sim.finish())
}

enum Policy {
    Fixed(Target),
    Static(WaterMarks),
    Adaptive(Redirector),
}

impl Policy {
    fn target(&self) -> Target {
        match self {
            Policy::Fixed(t) => *t,
            Policy::Static(w) => w.target(),
            Policy::Adaptive(r) => r.target(),
        }
    }

    /// Feeds one stream's percentage; returns the threshold it was compared with.
    fn step(&mut self, p: f64) -> Result<Option<f64>> {
        Ok(match self {
            Policy::Fixed(_) => None,
            Policy::Static(w) => Some(w.step(p)?.threshold),
            Policy::Adaptive(r) => Some(r.step(p)?.threshold),
        })
    }

    fn reset(&mut self) {
        match self {
            Policy::Fixed(_) => {}
            Policy::Static(w) => w.reset(),
            Policy::Adaptive(r) => r.reset(),
        }
    }
}

struct FlushJob {
    region: usize,
    chunks: VecDeque<Extent>,
}

struct Sim<'c> {
    mode: PolicyMode,
    config: &'c Config,
    policy: Policy,
    hdd: Device,
    ssd: Device,
    buffer: Option<SsdBuffer>,
    jobs: VecDeque<FlushJob>,
    /// Producer clock.
    now: f64,
    /// When the disk head finishes its current work.
    hdd_free: f64,
    /// Time up to which the flusher's behaviour has been accounted.
    flush_clock: f64,
    /// Latest stream percentage and the threshold it was judged against.
    current: Option<(f64, f64)>,
    pausing: bool,
    stream_idx: u64,
    chunk_size: u64,
    m: Metrics,
}

impl<'c> Sim<'c> {
    fn new(mode: PolicyMode, config: &'c Config) -> Result<Self> {
        let policy = match mode {
            PolicyMode::HddOnly => Policy::Fixed(Target::Hdd),
            PolicyMode::FullBb => Policy::Fixed(Target::Ssd),
            PolicyMode::SsdupStatic => Policy::Static(WaterMarks::new(config.static_high, config.static_low)?),
            PolicyMode::SsdupAdaptive => {
                Policy::Adaptive(Redirector::new(config.percent_list_capacity, config.default_threshold)?)
            }
        };
        let buffer = match mode {
            PolicyMode::HddOnly => None,
            PolicyMode::FullBb => Some(SsdBuffer::single(2 * config.region_bytes)),
            PolicyMode::SsdupStatic | PolicyMode::SsdupAdaptive => Some(SsdBuffer::pipelined(config.region_bytes)),
        };
        Ok(Self {
            mode,
            config,
            policy,
            hdd: Device::new(config.devices.hdd, "devices.hdd")?,
            ssd: Device::new(config.devices.ssd, "devices.ssd")?,
            buffer,
            jobs: VecDeque::new(),
            now: 0.0,
            hdd_free: 0.0,
            flush_clock: 0.0,
            current: None,
            pausing: false,
            stream_idx: 0,
            chunk_size: 1,
            m: Metrics {
                mode,
                total_bytes: 0,
                total_time: 0.0,
                throughput: 0.0,
                bytes_to_ssd: 0,
                bytes_to_hdd_direct: 0,
                bytes_flushed: 0,
                ssd_fraction: 0.0,
                flush_pause_total: 0.0,
                pause_episodes: 0,
                producer_stall_total: 0.0,
                idle_total: 0.0,
                makespan: 0.0,
                decisions: Vec::new(),
            },
        })
    }

    /// Whether flushing may use the disk while the producer is active.
    fn gate_open(&self) -> bool {
        match (self.mode, self.current) {
            (PolicyMode::SsdupAdaptive, Some((p, thr))) => flush_gate(Some(p), thr) == GateDecision::Proceed,
            _ => true,
        }
    }

    fn buffer(&mut self) -> &mut SsdBuffer {
        self.buffer.as_mut().expect("buffered mode")
    }

    /// Writes the next flush chunk starting at `start`; returns its end time.
    fn flush_chunk(&mut self, start: f64) -> f64 {
        let job = self.jobs.front_mut().expect("pending flush work");
        let chunk = job.chunks.pop_front().expect("jobs are never empty");
        let end = start + self.hdd.service(chunk);
        self.m.bytes_flushed += chunk.size;
        if job.chunks.is_empty() {
            let region = job.region;
            self.jobs.pop_front();
            self.buffer().region_mut(region).finish_flush().expect("region was flushing");
        }
        self.pausing = false;
        end
    }

    fn note_pause(&mut self, from: f64, until: f64) {
        if until > from {
            self.m.flush_pause_total += until - from;
            if !self.pausing {
                self.pausing = true;
                self.m.pause_episodes += 1;
            }
        }
    }

    /// Lets the flusher run (or stay paused) up to `until`.
    fn advance(&mut self, until: f64, open: bool) {
        if self.jobs.is_empty() {
            self.flush_clock = self.flush_clock.max(until);
            return;
        }
        if open {
            let mut t = self.hdd_free.max(self.flush_clock);
            while !self.jobs.is_empty() && t < until {
                t = self.flush_chunk(t);
            }
            self.hdd_free = t;
        } else {
            self.note_pause(self.flush_clock, until);
        }
        self.flush_clock = self.flush_clock.max(until);
    }

    fn enqueue(&mut self, region: usize) {
        let chunk = self.chunk_size;
        let plan = plan_flush(self.buffer().region(region).tree());
        let mut chunks = VecDeque::new();
        for e in plan.entries() {
            let base = fold(e.file, e.offset);
            let mut done = 0;
            while done < e.size {
                let size = chunk.min(e.size - done);
                chunks.push_back(Extent::new(base + done, size));
                done += size;
            }
        }
        if self.jobs.is_empty() {
            self.flush_clock = self.now;
        }
        self.jobs.push_back(FlushJob { region, chunks });
    }

    /// Passes the full active region to the flusher. Returns false when no
    /// region is free to take over.
    fn handoff(&mut self, open: bool) -> bool {
        self.advance(self.now, open);
        let buffer = self.buffer();
        if buffer.regions().len() == 1 {
            buffer.region_mut(0).begin_flush().expect("active region is full");
            self.enqueue(0);
            return true;
        }
        match buffer.swap() {
            Ok(region) => {
                self.enqueue(region);
                true
            }
            Err(_) => false,
        }
    }

    /// Blocks the producer until some region is empty.
    fn stall(&mut self, open: bool) {
        let start = self.now;
        self.advance(start, open);
        if !open {
            // A quiet producer is noticed at the next gate check.
            self.advance(start + self.config.gate_check_interval_s, false);
        }
        let mut t = self.hdd_free.max(self.flush_clock);
        while !self.jobs.is_empty() && !self.buffer().regions().iter().any(|r| r.state() == RegionState::Empty) {
            t = self.flush_chunk(t);
        }
        self.hdd_free = self.hdd_free.max(t);
        self.flush_clock = self.flush_clock.max(t);
        self.now = start.max(t);
        self.m.producer_stall_total += self.now - start;
    }

    fn ensure_space(&mut self, size: u64, open: bool) {
        loop {
            let buffer = self.buffer();
            let active = buffer.active();
            let region = buffer.region(active);
            match region.state() {
                RegionState::Empty | RegionState::Filling if region.remaining() >= size => return,
                RegionState::Filling => buffer.region_mut(active).seal().expect("filling region seals"),
                RegionState::Full => {
                    if !self.handoff(open) {
                        self.stall(open);
                    }
                }
                RegionState::Empty | RegionState::Flushing => self.stall(open),
            }
        }
    }

    fn write_ssd(&mut self, window: &[Request], open: bool) {
        for req in window {
            self.ensure_space(req.size, open);
            self.buffer().append(req).expect("space was ensured");
            self.now += self.ssd.service(Extent::new(fold(req.file, req.offset), req.size));
            self.m.bytes_to_ssd += req.size;
            let buffer = self.buffer();
            if buffer.region(buffer.active()).state() == RegionState::Full {
                self.handoff(open);
            }
        }
        self.advance(self.now, open);
    }

    fn write_hdd(&mut self, window: &[Request], open: bool) {
        let start = self.now;
        self.advance(start, open);
        let extents: Vec<Extent> = window
            .iter()
            .map(|r| Extent::new(fold(r.file, r.offset), r.size))
            .collect();
        let mut t = start.max(self.hdd_free);
        for e in cfq_dispatch(&extents, self.config.cfq_q) {
            t += self.hdd.service(e);
            if open && !self.jobs.is_empty() {
                t = self.flush_chunk(t);
            }
        }
        self.m.bytes_to_hdd_direct += window.iter().map(|r| r.size).sum::<u64>();
        self.hdd_free = t;
        self.advance(t, open);
        self.now = t;
    }

    fn idle(&mut self, gap: f64) {
        if gap <= 0.0 {
            return;
        }
        let start = self.now;
        let open = self.gate_open();
        if !open {
            self.advance(start + gap.min(self.config.gate_check_interval_s), false);
        }
        self.advance(start + gap, true);
        self.now = start + gap;
        self.m.idle_total += gap;
        self.current = None;
    }

    fn run_phase(&mut self, phase: &Phase<'_>) -> Result<()> {
        self.idle(phase.idle_before_s);
        if phase.boundary || phase.idle_before_s > self.config.idle_reset_s {
            self.policy.reset();
        }
        if phase.trace.is_empty() {
            return Ok(());
        }
        self.chunk_size = phase.trace.req_size()?;
        self.m.total_bytes += phase.trace.total_bytes();
        for window in phase.trace.requests().chunks(self.config.window) {
            let target = self.policy.target();
            let open = self.gate_open();
            match target {
                Target::Ssd => self.write_ssd(window, open),
                Target::Hdd => self.write_hdd(window, open),
            }
            if window.len() >= 2 {
                let p = stream_stats(window)?.percentage;
                let threshold = self.policy.step(p)?;
                self.current = Some((p, threshold.unwrap_or(0.0)));
                self.m.decisions.push(DecisionRecord { stream_idx: self.stream_idx, percentage: p, threshold, target });
            }
            self.stream_idx += 1;
        }
        Ok(())
    }

    fn finish(mut self) -> Metrics {
        let end_of_io = self.now;
        self.current = None;
        if self.buffer.is_some() {
            let buffer = self.buffer();
            let active = buffer.active();
            if buffer.region(active).state() == RegionState::Filling && buffer.region(active).used() > 0 {
                buffer.region_mut(active).seal().expect("filling region seals");
            }
            loop {
                self.advance(f64::INFINITY, true);
                let buffer = self.buffer();
                if buffer.region(buffer.active()).state() != RegionState::Full {
                    break;
                }
                self.handoff(true);
            }
        }
        let mut m = self.m;
        m.total_time = end_of_io - m.idle_total;
        m.makespan = end_of_io.max(self.hdd_free);
        if m.total_time > 0.0 {
            m.throughput = m.total_bytes as f64 / m.total_time;
        }
        if m.total_bytes > 0 {
            m.ssd_fraction = m.bytes_to_ssd as f64 / m.total_bytes as f64;
        }
        m
    }
}
