//! The pipelined SSD buffer.
//!
//! The buffer is split into equal regions. Requests are appended to the
//! active region log-style while a full region is written back to disk in
//! original-offset order, which its metadata tree yields directly.

mod flush;
mod meta_tree;
mod region;

pub use flush::{plan_flush, FlushEntry, FlushPlan, SsdRead};
pub use meta_tree::{metadata_footprint, Iter, MetaNode, MetaTree, NODE_BYTES};
pub use region::{BufferError, Region, RegionState, SsdBuffer, SsdLocation};

/// Whether a pending flush may use the disk right now.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    Proceed,
    Pause,
}

/// Traffic-aware flush gate. A random current stream means most traffic is
/// going to SSD and the disk is free, so flushing proceeds; a sequential one
/// means direct disk traffic is heavy and flushing waits. Ties proceed. With
/// no current stream (traffic has ended) flushing always proceeds.
pub fn flush_gate(current_percentage: Option<f64>, threshold: f64) -> GateDecision {
    match current_percentage {
        Some(p) if p < threshold => GateDecision::Pause,
        _ => GateDecision::Proceed,
    }
}
