//! Adaptive SSD/HDD redirection.
//!
//! Recent stream percentages are kept in ascending order in a
//! [`PercentList`]. The threshold is the list element at index
//! `floor((1 - avgper) * (N - 1))`, where `avgper` is the list mean: calm
//! history picks a large element (fewer streams go to SSD), noisy history a
//! small one.
//!
//! A stream's percentage is compared with the threshold derived from the
//! streams before it; the stream is then added to the history. The outcome
//! steers the *next* stream.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{config_err, Error, Result};

pub const DEFAULT_CAPACITY: usize = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Water marks of the static comparison policy.
pub const STATIC_HIGH: f64 = 0.45;
pub const STATIC_LOW: f64 = 0.30;

// Guards the floor in the index rule against products such as 2.9999999999.
const INDEX_EPSILON: f64 = 1e-9;

/// Where a stream's requests are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Target {
    #[default]
    Hdd,
    Ssd,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Hdd => "hdd",
            Target::Ssd => "ssd",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hdd" => Ok(Target::Hdd),
            "ssd" => Ok(Target::Ssd),
            other => Err(config_err(format!("unknown device {other:?}"))),
        }
    }
}

fn check_percentage(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidPercentage(p))
    }
}

/// Arithmetic mean of the list, `None` when empty.
pub fn avgper(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Index selected from an ascending list, clamped to `[0, N - 1]`.
pub fn threshold_index(sorted: &[f64]) -> Option<usize> {
    let avg = avgper(sorted)?;
    let last = sorted.len() - 1;
    let raw = ((1.0 - avg) * last as f64 + INDEX_EPSILON).floor();
    Some((raw.max(0.0) as usize).min(last))
}

/// Element of an ascending list selected as threshold.
pub fn threshold(sorted: &[f64]) -> Option<f64> {
    threshold_index(sorted).map(|i| sorted[i])
}

/// Bounded, ascending history of stream percentages. When full, the oldest
/// observation is evicted.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentList {
    sorted: Vec<f64>,
    arrivals: VecDeque<f64>,
    capacity: usize,
}

impl PercentList {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(config_err("percent list capacity must be at least 1"));
        }
        Ok(Self {
            sorted: Vec::with_capacity(capacity + 1),
            arrivals: VecDeque::with_capacity(capacity + 1),
            capacity,
        })
    }

    pub fn insert(&mut self, p: f64) -> Result<()> {
        let p = check_percentage(p)?;
        let at = self.sorted.partition_point(|&v| v <= p);
        self.sorted.insert(at, p);
        self.arrivals.push_back(p);
        if self.arrivals.len() > self.capacity {
            let oldest = self.arrivals.pop_front().expect("non-empty");
            let pos = self
                .sorted
                .iter()
                .position(|&v| v == oldest)
                .expect("every arrival is in the sorted list");
            self.sorted.remove(pos);
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn clear(&mut self) {
        self.sorted.clear();
        self.arrivals.clear();
    }

    pub fn avgper(&self) -> Option<f64> {
        avgper(&self.sorted)
    }

    pub fn threshold_index(&self) -> Option<usize> {
        threshold_index(&self.sorted)
    }

    pub fn threshold(&self) -> Option<f64> {
        threshold(&self.sorted)
    }
}

/// Outcome of feeding one stream to a redirection policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    /// Threshold the stream was compared with.
    pub threshold: f64,
    /// Device for the next stream.
    pub next: Target,
}

/// Adaptive-threshold redirection state.
#[derive(Debug, Clone, PartialEq)]
pub struct Redirector {
    list: PercentList,
    threshold: f64,
    target: Target,
    default_threshold: f64,
}

impl Redirector {
    pub fn new(capacity: usize, default_threshold: f64) -> Result<Self> {
        let default_threshold = check_percentage(default_threshold)?;
        Ok(Self {
            list: PercentList::new(capacity)?,
            threshold: default_threshold,
            target: Target::Hdd,
            default_threshold,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn list(&self) -> &PercentList {
        &self.list
    }

    /// Adds a percentage to the history and recomputes the threshold.
    pub fn observe(&mut self, p: f64) -> Result<()> {
        self.list.insert(p)?;
        self.threshold = self.list.threshold().unwrap_or(self.default_threshold);
        Ok(())
    }

    /// Switches to SSD when `p` rises above the threshold while writing to
    /// HDD, back to HDD when it falls below while writing to SSD; otherwise
    /// keeps the current device.
    pub fn decide(&mut self, p: f64) -> Target {
        self.target = match self.target {
            Target::Hdd if p > self.threshold => Target::Ssd,
            Target::Ssd if p < self.threshold => Target::Hdd,
            current => current,
        };
        self.target
    }

    /// Decides against the current threshold, then records `p`.
    pub fn step(&mut self, p: f64) -> Result<Step> {
        let p = check_percentage(p)?;
        let threshold = self.threshold;
        let next = self.decide(p);
        self.observe(p)?;
        Ok(Step { threshold, next })
    }

    /// Forgets history: used when the workload changes.
    pub fn reset(&mut self) {
        self.list.clear();
        self.threshold = self.default_threshold;
        self.target = Target::Hdd;
    }
}

/// Fixed high/low water-mark redirection, kept for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterMarks {
    pub high: f64,
    pub low: f64,
    target: Target,
}

impl WaterMarks {
    pub fn new(high: f64, low: f64) -> Result<Self> {
        let (high, low) = (check_percentage(high)?, check_percentage(low)?);
        if low > high {
            return Err(config_err(format!("low water mark {low} exceeds high {high}")));
        }
        Ok(Self { high, low, target: Target::Hdd })
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// The mark the next comparison is made against.
    pub fn active_mark(&self) -> f64 {
        match self.target {
            Target::Hdd => self.high,
            Target::Ssd => self.low,
        }
    }

    pub fn step(&mut self, p: f64) -> Result<Step> {
        let p = check_percentage(p)?;
        let threshold = self.active_mark();
        self.target = match self.target {
            Target::Hdd if p > self.high => Target::Ssd,
            Target::Ssd if p < self.low => Target::Hdd,
            current => current,
        };
        Ok(Step { threshold, next: self.target })
    }

    pub fn reset(&mut self) {
        self.target = Target::Hdd;
    }
}

/// One row of the per-stream decision log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub stream_idx: u64,
    pub percentage: f64,
    /// Threshold the stream was compared with; `None` for fixed-target modes.
    pub threshold: Option<f64>,
    /// Device this stream was written to.
    pub target: Target,
}

/// Share of SSD-bound streams whose percentage exceeds the running mean of
/// the thresholds seen so far. `None` when no stream went to SSD.
pub fn success_rate(log: &[DecisionRecord]) -> Option<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    let (mut hits, mut ssd) = (0usize, 0usize);
    for rec in log {
        if let Some(t) = rec.threshold {
            sum += t;
            count += 1;
        }
        if rec.target == Target::Ssd {
            ssd += 1;
            if count > 0 && rec.percentage > sum / count as f64 {
                hits += 1;
            }
        }
    }
    (ssd > 0).then(|| hits as f64 / ssd as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE_STUDY: [f64; 10] = [
        0.3937, 0.5433, 0.5905, 0.6299, 0.6062, 0.5826, 0.622, 0.622, 0.622, 0.6771,
    ];

    fn list_of(values: &[f64], cap: usize) -> PercentList {
        let mut l = PercentList::new(cap).unwrap();
        for &v in values {
            l.insert(v).unwrap();
        }
        l
    }

    #[test]
    fn avgper_examples() {
        assert_eq!(avgper(&[0.5]), Some(0.5));
        assert!((avgper(&[0.3937, 0.5433]).unwrap() - 0.4685).abs() < 1e-12);
        assert_eq!(avgper(&[0.0, 1.0]), Some(0.5));
        assert_eq!(avgper(&[]), None);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold(&[0.37]), Some(0.37));
        assert_eq!(threshold(&[0.5; 10]), Some(0.5));
        assert_eq!(threshold_index(&[0.2, 0.4, 0.6, 0.8]), Some(1));
        assert_eq!(threshold(&[0.2, 0.4, 0.6, 0.8]), Some(0.4));
        assert_eq!(threshold(&[]), None);
        // all-zero history selects the largest element, all-one the smallest
        assert_eq!(threshold_index(&[0.0; 5]), Some(4));
        assert_eq!(threshold_index(&[1.0; 5]), Some(0));
    }

    #[test]
    fn case_study_history() {
        let mut r = Redirector::new(10, 0.5).unwrap();
        for &p in &CASE_STUDY {
            r.observe(p).unwrap();
        }
        let mut sorted = CASE_STUDY.to_vec();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(r.list().values(), sorted.as_slice());
        // mean of the ten recorded values, by hand: 5.8893 / 10
        assert!((r.list().avgper().unwrap() - 0.58893).abs() < 1e-9);
        // floor((1 - 0.58893) * 9) = floor(3.69963) = 3
        assert_eq!(r.list().threshold_index(), Some(3));
        assert_eq!(r.threshold(), 0.5905);
    }

    #[test]
    fn fifo_eviction() {
        let l = list_of(&[0.1, 0.9, 0.5], 2);
        assert_eq!(l.values(), &[0.5, 0.9]);
        let l = list_of(&[0.5, 0.5, 0.2, 0.5], 3);
        assert_eq!(l.values(), &[0.2, 0.5, 0.5]);
    }

    #[test]
    fn first_observation_becomes_threshold() {
        let mut r = Redirector::new(10, 0.5).unwrap();
        r.observe(0.73).unwrap();
        assert_eq!(r.threshold(), 0.73);
    }

    #[test]
    fn decide_branches() {
        let mut r = Redirector::new(10, 0.6).unwrap();
        assert_eq!(r.decide(0.8), Target::Ssd);
        assert_eq!(r.decide(0.5), Target::Hdd);
        assert_eq!(r.decide(0.6), Target::Hdd);
        r.decide(0.9);
        assert_eq!(r.decide(0.6), Target::Ssd);
    }

    #[test]
    fn reset_restores_defaults() {
        let mut r = Redirector::new(10, 0.5).unwrap();
        for &p in &CASE_STUDY {
            r.step(p).unwrap();
        }
        r.reset();
        assert_eq!(r.threshold(), 0.5);
        assert_eq!(r.target(), Target::Hdd);
        assert!(r.list().is_empty());
        let again = r.clone();
        r.reset();
        assert_eq!(r, again);
        assert_eq!(r.decide(0.51), Target::Ssd);
    }

    #[test]
    fn step_compares_before_recording() {
        let mut r = Redirector::new(10, 0.5).unwrap();
        let s = r.step(1.0).unwrap();
        assert_eq!(s, Step { threshold: 0.5, next: Target::Ssd });
        assert_eq!(r.threshold(), 1.0);
        // an all-random history keeps the stream on SSD
        for _ in 0..20 {
            assert_eq!(r.step(1.0).unwrap().next, Target::Ssd);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let mut r = Redirector::new(10, 0.5).unwrap();
        assert!(matches!(r.observe(1.5), Err(Error::InvalidPercentage(_))));
        assert!(r.step(f64::NAN).is_err());
        assert!(Redirector::new(0, 0.5).is_err());
    }

    #[test]
    fn water_marks_have_hysteresis() {
        let mut w = WaterMarks::new(STATIC_HIGH, STATIC_LOW).unwrap();
        assert_eq!(w.step(0.40).unwrap().next, Target::Hdd);
        assert_eq!(w.step(0.46).unwrap().next, Target::Ssd);
        assert_eq!(w.step(0.35).unwrap().next, Target::Ssd);
        let s = w.step(0.29).unwrap();
        assert_eq!((s.threshold, s.next), (STATIC_LOW, Target::Hdd));
        assert!(WaterMarks::new(0.2, 0.3).is_err());
    }

    #[test]
    fn success_rate_counts_ssd_streams() {
        let rec = |p, t, target| DecisionRecord { stream_idx: 0, percentage: p, threshold: Some(t), target };
        let log = [
            rec(0.9, 0.5, Target::Hdd),
            rec(0.8, 0.5, Target::Ssd),
            rec(0.4, 0.5, Target::Ssd),
            rec(0.7, 0.8, Target::Ssd),
        ];
        // running means: 0.5, 0.5, 0.6 -> hits for 0.8 and 0.7
        assert!((success_rate(&log).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(success_rate(&log[..1]), None);
    }
}
