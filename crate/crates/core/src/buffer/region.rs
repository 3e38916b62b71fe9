use std::fmt;

use thiserror::Error;

use super::meta_tree::{MetaNode, MetaTree};
use crate::trace::Request;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionState {
    Empty,
    Filling,
    Full,
    Flushing,
}

impl fmt::Display for RegionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Signals from the buffer; most ask the caller to swap or wait.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BufferError {
    #[error("region {region} has {remaining} bytes left, request needs {needed}")]
    RegionFull { region: usize, needed: u64, remaining: u64 },

    #[error("no empty region to switch to")]
    BufferExhausted,

    #[error("region {region} cannot go from {from} to {to}")]
    InvalidTransition { region: usize, from: RegionState, to: RegionState },
}

/// Where a buffered request's bytes live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsdLocation {
    pub region: usize,
    pub offset: u64,
    pub size: u64,
}

/// One append-only area of the SSD buffer with its own metadata tree.
#[derive(Debug, Clone)]
pub struct Region {
    id: usize,
    capacity: u64,
    used: u64,
    state: RegionState,
    tree: MetaTree,
}

impl Region {
    pub fn new(id: usize, capacity: u64) -> Self {
        Self { id, capacity, used: 0, state: RegionState::Empty, tree: MetaTree::new() }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.capacity - self.used
    }

    /// Next append position; always equal to `used`.
    pub fn cursor(&self) -> u64 {
        self.used
    }

    pub fn state(&self) -> RegionState {
        self.state
    }

    pub fn tree(&self) -> &MetaTree {
        &self.tree
    }

    fn transition(&mut self, from: &[RegionState], to: RegionState) -> Result<(), BufferError> {
        if !from.contains(&self.state) {
            return Err(BufferError::InvalidTransition { region: self.id, from: self.state, to });
        }
        self.state = to;
        Ok(())
    }

    /// Appends `req` at the cursor and records its metadata. On
    /// [`BufferError::RegionFull`] the region is untouched.
    pub fn append(&mut self, req: &Request) -> Result<SsdLocation, BufferError> {
        if !matches!(self.state, RegionState::Empty | RegionState::Filling) {
            return Err(BufferError::InvalidTransition {
                region: self.id,
                from: self.state,
                to: RegionState::Filling,
            });
        }
        if req.size > self.remaining() {
            return Err(BufferError::RegionFull {
                region: self.id,
                needed: req.size,
                remaining: self.remaining(),
            });
        }
        let loc = SsdLocation { region: self.id, offset: self.used, size: req.size };
        self.tree.insert(MetaNode {
            orig_file: req.file,
            orig_offset: req.offset,
            orig_size: req.size,
            ssd_region: self.id,
            ssd_offset: loc.offset,
            ssd_size: req.size,
        });
        self.used += req.size;
        self.state = if self.used == self.capacity { RegionState::Full } else { RegionState::Filling };
        Ok(loc)
    }

    /// Closes a region that holds data but cannot take the next request.
    pub fn seal(&mut self) -> Result<(), BufferError> {
        if self.state == RegionState::Filling && self.used > 0 {
            self.state = RegionState::Full;
            return Ok(());
        }
        self.transition(&[RegionState::Full], RegionState::Full)
    }

    pub(crate) fn activate(&mut self) -> Result<(), BufferError> {
        self.transition(&[RegionState::Empty], RegionState::Filling)
    }

    pub fn begin_flush(&mut self) -> Result<(), BufferError> {
        self.transition(&[RegionState::Full], RegionState::Flushing)
    }

    /// Releases the space of a flushed region.
    pub fn finish_flush(&mut self) -> Result<(), BufferError> {
        self.transition(&[RegionState::Flushing], RegionState::Empty)?;
        self.used = 0;
        self.tree.clear();
        Ok(())
    }
}

/// The SSD buffer: equal regions, one of which accepts appends at a time.
#[derive(Debug, Clone)]
pub struct SsdBuffer {
    regions: Vec<Region>,
    active: usize,
}

impl SsdBuffer {
    /// Two equal regions that alternate between filling and flushing.
    pub fn pipelined(region_bytes: u64) -> Self {
        Self::with_regions(2, region_bytes)
    }

    /// One region spanning the whole buffer.
    pub fn single(capacity: u64) -> Self {
        Self::with_regions(1, capacity)
    }

    fn with_regions(count: usize, bytes: u64) -> Self {
        Self { regions: (0..count).map(|id| Region::new(id, bytes)).collect(), active: 0 }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: usize) -> &Region {
        &self.regions[id]
    }

    pub fn region_mut(&mut self, id: usize) -> &mut Region {
        &mut self.regions[id]
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn append(&mut self, req: &Request) -> Result<SsdLocation, BufferError> {
        self.regions[self.active].append(req)
    }

    /// Hands the full active region over for flushing and starts filling an
    /// empty one. Returns the id of the region to flush. When no region is
    /// empty nothing changes and [`BufferError::BufferExhausted`] is returned:
    /// the producer has to wait.
    pub fn swap(&mut self) -> Result<usize, BufferError> {
        let full = self.active;
        if self.regions[full].state() != RegionState::Full {
            return Err(BufferError::InvalidTransition {
                region: full,
                from: self.regions[full].state(),
                to: RegionState::Flushing,
            });
        }
        let next = (1..self.regions.len())
            .map(|k| (full + k) % self.regions.len())
            .find(|&id| self.regions[id].state() == RegionState::Empty)
            .ok_or(BufferError::BufferExhausted)?;
        self.regions[full].begin_flush()?;
        self.regions[next].activate()?;
        self.active = next;
        Ok(full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(seq: u64, offset: u64, size: u64) -> Request {
        Request { seq, proc: 0, file: 0, offset, size }
    }

    #[test]
    fn appends_are_log_structured() {
        let mut r = Region::new(0, 100);
        let offs: Vec<u64> = [1u64, 7, 8]
            .iter()
            .enumerate()
            .map(|(i, &k)| r.append(&req(i as u64, k * 10, 10)).unwrap().offset)
            .collect();
        assert_eq!(offs, vec![0, 10, 20]);
        assert_eq!(r.cursor(), r.used());
        assert_eq!(r.state(), RegionState::Filling);
    }

    #[test]
    fn overflow_leaves_region_unchanged() {
        let mut r = Region::new(0, 25);
        r.append(&req(0, 0, 10)).unwrap();
        r.append(&req(1, 10, 10)).unwrap();
        let before = (r.used(), r.state(), r.tree().len());
        let err = r.append(&req(2, 20, 10)).unwrap_err();
        assert_eq!(err, BufferError::RegionFull { region: 0, needed: 10, remaining: 5 });
        assert_eq!((r.used(), r.state(), r.tree().len()), before);
    }

    #[test]
    fn exact_fill_marks_full() {
        let mut r = Region::new(0, 20);
        r.append(&req(0, 0, 10)).unwrap();
        r.append(&req(1, 10, 10)).unwrap();
        assert_eq!(r.state(), RegionState::Full);
        assert!(matches!(r.append(&req(2, 20, 10)), Err(BufferError::InvalidTransition { .. })));
    }

    #[test]
    fn state_machine_cycle() {
        let mut r = Region::new(0, 20);
        assert!(r.seal().is_err());
        r.append(&req(0, 0, 10)).unwrap();
        assert!(r.begin_flush().is_err());
        r.seal().unwrap();
        r.begin_flush().unwrap();
        assert!(r.append(&req(1, 0, 10)).is_err());
        r.finish_flush().unwrap();
        assert_eq!((r.state(), r.used(), r.tree().len()), (RegionState::Empty, 0, 0));
        assert!(r.finish_flush().is_err());
    }

    #[test]
    fn swap_exchanges_roles() {
        let mut b = SsdBuffer::pipelined(10);
        b.append(&req(0, 0, 10)).unwrap();
        assert_eq!(b.swap().unwrap(), 0);
        assert_eq!(b.active(), 1);
        assert_eq!(b.region(0).state(), RegionState::Flushing);
        assert_eq!(b.region(1).state(), RegionState::Filling);
    }

    #[test]
    fn swap_without_empty_region_is_exhausted() {
        let mut b = SsdBuffer::pipelined(10);
        b.append(&req(0, 0, 10)).unwrap();
        b.swap().unwrap();
        b.append(&req(1, 10, 10)).unwrap();
        assert_eq!(b.swap(), Err(BufferError::BufferExhausted));
        assert_eq!(b.active(), 1);
        assert_eq!(b.region(1).state(), RegionState::Full);
        b.region_mut(0).finish_flush().unwrap();
        assert_eq!(b.swap().unwrap(), 1);
    }

    #[test]
    fn double_swap_without_fill_fails() {
        let mut b = SsdBuffer::pipelined(10);
        b.append(&req(0, 0, 10)).unwrap();
        b.swap().unwrap();
        assert!(matches!(b.swap(), Err(BufferError::InvalidTransition { .. })));
    }
}
