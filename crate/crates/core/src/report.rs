//! CSV writers for stream statistics, decision logs and run metrics.

use std::io::Write;

use crate::detector::StreamStats;
use crate::engine::Metrics;
use crate::error::Result;
use crate::redirector::DecisionRecord;
use crate::trace::csv_writer;

pub const STATS_HEADER: [&str; 4] = ["stream_idx", "N", "S", "percentage"];
pub const DECISIONS_HEADER: [&str; 4] = ["stream_idx", "percentage", "threshold", "target"];
pub const METRICS_HEADER: [&str; 6] =
    ["mode", "total_time_s", "throughput_MBps", "ssd_fraction", "flush_pause_s", "stall_s"];

pub fn write_stats<W: Write>(stats: &[StreamStats], sink: W) -> Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(STATS_HEADER)?;
    for (i, s) in stats.iter().enumerate() {
        w.write_record([i.to_string(), s.n.to_string(), s.s.to_string(), s.percentage.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-target modes have no threshold; that column is left empty.
pub fn write_decisions<W: Write>(log: &[DecisionRecord], sink: W) -> Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(DECISIONS_HEADER)?;
    for d in log {
        w.write_record([
            d.stream_idx.to_string(),
            d.percentage.to_string(),
            d.threshold.map(|t| t.to_string()).unwrap_or_default(),
            d.target.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics<W: Write>(rows: &[Metrics], sink: W) -> Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(METRICS_HEADER)?;
    for m in rows {
        w.write_record([
            m.mode.to_string(),
            format!("{:.6}", m.total_time),
            format!("{:.3}", m.throughput_mbps()),
            format!("{:.6}", m.ssd_fraction),
            format!("{:.6}", m.flush_pause_total),
            format!("{:.6}", m.producer_stall_total),
        ])?;
    }
    w.flush()?;
    Ok(())
}
