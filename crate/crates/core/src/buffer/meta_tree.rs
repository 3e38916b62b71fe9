//! AVL tree of buffered-request metadata.
//!
//! Data lands in the SSD in arrival order; each node remembers where a
//! request originally belonged and where its bytes now sit. Keys are
//! `(file, offset)`, so an in-order walk is exactly the order in which the
//! data should be written back.

use std::cmp::Ordering;

/// Accounted size of one node: original offset, size and SSD offset, 8 bytes each.
pub const NODE_BYTES: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaNode {
    pub orig_file: u32,
    pub orig_offset: u64,
    pub orig_size: u64,
    pub ssd_region: usize,
    pub ssd_offset: u64,
    pub ssd_size: u64,
}

impl MetaNode {
    pub fn key(&self) -> (u32, u64) {
        (self.orig_file, self.orig_offset)
    }
}

type Link = Option<Box<Node>>;

#[derive(Debug, Clone)]
struct Node {
    meta: MetaNode,
    height: u32,
    left: Link,
    right: Link,
}

fn height(link: &Link) -> u32 {
    link.as_ref().map_or(0, |n| n.height)
}

impl Node {
    fn leaf(meta: MetaNode) -> Box<Self> {
        Box::new(Self { meta, height: 1, left: None, right: None })
    }

    fn update(&mut self) {
        self.height = 1 + height(&self.left).max(height(&self.right));
    }

    fn balance(&self) -> i64 {
        i64::from(height(&self.left)) - i64::from(height(&self.right))
    }
}

fn rotate_right(mut node: Box<Node>) -> Box<Node> {
    let mut pivot = node.left.take().expect("left child exists");
    node.left = pivot.right.take();
    node.update();
    pivot.right = Some(node);
    pivot.update();
    pivot
}

fn rotate_left(mut node: Box<Node>) -> Box<Node> {
    let mut pivot = node.right.take().expect("right child exists");
    node.right = pivot.left.take();
    node.update();
    pivot.left = Some(node);
    pivot.update();
    pivot
}

fn rebalance(mut node: Box<Node>) -> Box<Node> {
    node.update();
    match node.balance() {
        2 => {
            if node.left.as_ref().is_some_and(|l| l.balance() < 0) {
                node.left = node.left.take().map(rotate_left);
            }
            rotate_right(node)
        }
        -2 => {
            if node.right.as_ref().is_some_and(|r| r.balance() > 0) {
                node.right = node.right.take().map(rotate_right);
            }
            rotate_left(node)
        }
        _ => node,
    }
}

fn insert(link: Link, meta: MetaNode, replaced: &mut Option<MetaNode>) -> Box<Node> {
    let Some(mut node) = link else {
        return Node::leaf(meta);
    };
    match meta.key().cmp(&node.meta.key()) {
        Ordering::Less => node.left = Some(insert(node.left.take(), meta, replaced)),
        Ordering::Greater => node.right = Some(insert(node.right.take(), meta, replaced)),
        Ordering::Equal => {
            *replaced = Some(std::mem::replace(&mut node.meta, meta));
            return node;
        }
    }
    rebalance(node)
}

/// Height-balanced search tree over [`MetaNode`]s.
#[derive(Debug, Clone, Default)]
pub struct MetaTree {
    root: Link,
    len: usize,
}

impl MetaTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn height(&self) -> u32 {
        height(&self.root)
    }

    /// Inserts `meta`. An existing node with the same key is overwritten
    /// (last write wins) and returned.
    pub fn insert(&mut self, meta: MetaNode) -> Option<MetaNode> {
        let mut replaced = None;
        self.root = Some(insert(self.root.take(), meta, &mut replaced));
        if replaced.is_none() {
            self.len += 1;
        }
        replaced
    }

    pub fn get(&self, file: u32, offset: u64) -> Option<&MetaNode> {
        let key = (file, offset);
        let mut cur = self.root.as_deref();
        while let Some(node) = cur {
            cur = match key.cmp(&node.meta.key()) {
                Ordering::Less => node.left.as_deref(),
                Ordering::Greater => node.right.as_deref(),
                Ordering::Equal => return Some(&node.meta),
            };
        }
        None
    }

    pub fn clear(&mut self) {
        self.root = None;
        self.len = 0;
    }

    /// In-order (ascending key) traversal.
    pub fn iter(&self) -> Iter<'_> {
        let mut it = Iter { stack: Vec::with_capacity(self.height() as usize) };
        it.push_left(self.root.as_deref());
        it
    }

    /// Checks ordering, stored heights and the AVL balance condition at
    /// every node.
    pub fn is_valid_avl(&self) -> bool {
        fn check(link: &Link, lo: Option<(u32, u64)>, hi: Option<(u32, u64)>) -> Option<u32> {
            let Some(node) = link else { return Some(0) };
            let key = node.meta.key();
            if lo.is_some_and(|l| key <= l) || hi.is_some_and(|h| key >= h) {
                return None;
            }
            let lh = check(&node.left, lo, Some(key))?;
            let rh = check(&node.right, Some(key), hi)?;
            let h = 1 + lh.max(rh);
            (lh.abs_diff(rh) <= 1 && h == node.height).then_some(h)
        }
        check(&self.root, None, None).is_some()
    }
}

pub struct Iter<'a> {
    stack: Vec<&'a Node>,
}

impl<'a> Iter<'a> {
    fn push_left(&mut self, mut cur: Option<&'a Node>) {
        while let Some(node) = cur {
            self.stack.push(node);
            cur = node.left.as_deref();
        }
    }
}

impl<'a> Iterator for Iter<'a> {
    type Item = &'a MetaNode;

    fn next(&mut self) -> Option<&'a MetaNode> {
        let node = self.stack.pop()?;
        self.push_left(node.right.as_deref());
        Some(&node.meta)
    }
}

impl<'a> IntoIterator for &'a MetaTree {
    type Item = &'a MetaNode;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

/// Metadata bytes for the tree under the 24-bytes-per-node accounting.
pub fn metadata_footprint(tree: &MetaTree) -> u64 {
    tree.len() as u64 * NODE_BYTES
}
