//! Simulation runs and the analytic completion-time model.

mod analytic;
mod metrics;
mod sim;

pub use analytic::{predict_no_pipeline, predict_pipeline, PipelineParams};
pub use metrics::{Metrics, PolicyMode};
pub use sim::{simulate, simulate_phases, Phase};
