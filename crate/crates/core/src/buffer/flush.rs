use super::meta_tree::MetaTree;

/// One SSD read feeding a flush write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsdRead {
    pub region: usize,
    pub offset: u64,
    pub size: u64,
}

/// One HDD write: a run of original bytes with no gaps, plus the SSD pieces
/// that hold it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlushEntry {
    pub file: u32,
    pub offset: u64,
    pub size: u64,
    pub reads: Vec<SsdRead>,
}

impl FlushEntry {
    pub fn end(&self) -> u64 {
        self.offset + self.size
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlushPlan {
    entries: Vec<FlushEntry>,
}

impl FlushPlan {
    pub fn entries(&self) -> &[FlushEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.iter().map(|e| e.size).sum()
    }
}

/// Walks the tree in order and merges nodes whose original ranges touch.
/// SSD reads keep their per-node locations; they need not be ordered.
pub fn plan_flush(tree: &MetaTree) -> FlushPlan {
    let mut entries: Vec<FlushEntry> = Vec::new();
    for node in tree {
        let read = SsdRead { region: node.ssd_region, offset: node.ssd_offset, size: node.ssd_size };
        match entries.last_mut() {
            Some(last) if last.file == node.orig_file && last.end() == node.orig_offset => {
                last.size += node.orig_size;
                last.reads.push(read);
            }
            _ => entries.push(FlushEntry {
                file: node.orig_file,
                offset: node.orig_offset,
                size: node.orig_size,
                reads: vec![read],
            }),
        }
    }
    FlushPlan { entries }
}
