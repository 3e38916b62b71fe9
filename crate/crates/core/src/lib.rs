//! Simulator for a traffic-aware SSD burst buffer in front of a disk.
//!
//! The pipeline mirrors an I/O node:
//!
//! 1. [`detector`] scores every window of incoming writes by how much head
//!    movement it would cause;
//! 2. [`redirector`] picks SSD or HDD for the next window from an adaptive
//!    threshold over recent scores;
//! 3. [`buffer`] absorbs SSD-bound writes in two alternating regions and
//!    writes them back in offset order;
//! 4. [`devices`] prices every write;
//! 5. [`engine`] runs whole traces and evaluates the stage-time model.
//!
//! ```
//! use burstsim::{generate, simulate, AccessPattern, Config, InterleavePolicy, PatternSpec, PolicyMode};
//!
//! let spec = PatternSpec::new(AccessPattern::SegmentedRandom, 4, 64 << 20, 1 << 20);
//! let trace = generate(&spec, InterleavePolicy::RoundRobin).unwrap();
//! let m = simulate(&trace, PolicyMode::SsdupAdaptive, &Config::default()).unwrap();
//! assert_eq!(m.bytes_to_ssd + m.bytes_to_hdd_direct, trace.total_bytes());
//! ```

pub mod buffer;
pub mod config;
pub mod detector;
pub mod devices;
pub mod engine;
pub mod error;
pub mod redirector;
pub mod report;
pub mod trace;

pub use buffer::{flush_gate, metadata_footprint, plan_flush, GateDecision, MetaNode, MetaTree, SsdBuffer};
pub use config::{Config, Devices};
pub use detector::{analyze, stream_stats, StreamStats, DEFAULT_WINDOW};
pub use devices::{service_time, service_window, DeviceProfile, Extent, HeadState};
pub use engine::{
    predict_no_pipeline, predict_pipeline, simulate, simulate_phases, Metrics, Phase, PipelineParams, PolicyMode,
};
pub use error::{Error, Result};
pub use redirector::{success_rate, DecisionRecord, PercentList, Redirector, Target, WaterMarks};
pub use trace::{
    generate, load_trace, mix, save_trace, AccessPattern, InterleavePolicy, PatternSpec, Request, Trace,
};
