//! Agglomerative complete-linkage clustering and the resulting merge tree.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use crate::cluster::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Dendrogram node. Leaves are `0..n` in input order; the `k`-th merge
/// creates node `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::str::FromStr for NodeId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.parse().map(NodeId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    /// Smaller of the two merged node ids.
    pub left: NodeId,
    pub right: NodeId,
    pub height: f64,
    pub id: NodeId,
}

/// Full binary merge tree over `n` labelled leaves.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    leaves: Vec<String>,
    merges: Vec<Merge>,
    sizes: Vec<usize>,
    parents: Vec<Option<NodeId>>,
    leaf_index: HashMap<String, usize>,
}

impl PartialEq for Dendrogram {
    fn eq(&self, other: &Self) -> bool {
        self.leaves == other.leaves && self.merges == other.merges
    }
}

impl Dendrogram {
    /// Validates and indexes a merge list.
    pub fn new(leaves: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let n = leaves.len();
        if n == 0 || merges.len() + 1 != n {
            return Err(Error::Size(format!(
                "{} merges cannot join {n} leaves",
                merges.len()
            )));
        }
        let total = 2 * n - 1;
        let mut sizes = vec![1usize; total];
        let mut parents = vec![None; total];
        for (k, m) in merges.iter().enumerate() {
            let id = n + k;
            if m.id.0 != id || m.left >= m.right || m.right.0 >= id {
                return Err(Error::InvalidConfig(format!("malformed merge #{k}: {m:?}")));
            }
            for child in [m.left, m.right] {
                if parents[child.0].replace(m.id).is_some() {
                    return Err(Error::InvalidConfig(format!("node {child} merged twice")));
                }
            }
            sizes[id] = sizes[m.left.0] + sizes[m.right.0];
        }
        let mut leaf_index = HashMap::with_capacity(n);
        for (i, id) in leaves.iter().enumerate() {
            if leaf_index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate leaf `{id}`")));
            }
        }
        Ok(Dendrogram {
            leaves,
            merges,
            sizes,
            parents,
            leaf_index,
        })
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn node_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn root(&self) -> NodeId {
        NodeId(self.node_count() - 1)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count()
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        node.0 < self.n_leaves()
    }

    pub fn size(&self, node: NodeId) -> usize {
        self.sizes[node.0]
    }

    /// Merge height; zero for leaves.
    pub fn height(&self, node: NodeId) -> f64 {
        self.merge(node).map_or(0.0, |m| m.height)
    }

    pub fn children(&self, node: NodeId) -> Option<(NodeId, NodeId)> {
        self.merge(node).map(|m| (m.left, m.right))
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parents[node.0]
    }

    fn merge(&self, node: NodeId) -> Option<&Merge> {
        node.0
            .checked_sub(self.n_leaves())
            .and_then(|k| self.merges.get(k))
    }

    pub fn leaf_of(&self, series_id: &str) -> Option<NodeId> {
        self.leaf_index.get(series_id).map(|&i| NodeId(i))
    }

    /// Leaf indices under `node`, left to right.
    pub fn leaves_under(&self, node: NodeId) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size(node));
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            match self.children(id) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(id.0),
            }
        }
        out
    }

    pub fn members(&self, node: NodeId) -> Vec<&str> {
        self.leaves_under(node)
            .into_iter()
            .map(|i| self.leaves[i].as_str())
            .collect()
    }

    /// Root-to-leaf node sequence for a series id.
    pub fn path_to_leaf(&self, series_id: &str) -> Result<Vec<NodeId>> {
        let leaf = self
            .leaf_of(series_id)
            .ok_or_else(|| Error::NotFound(format!("series `{series_id}`")))?;
        let mut path = vec![leaf];
        let mut cur = leaf;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Ok(path)
    }

    /// Flat labels for `k` clusters, obtained by undoing the last `k - 1`
    /// merges. Labels are numbered in order of first appearance.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return Err(Error::InvalidConfig(format!("cannot cut {n} leaves into {k} clusters")));
        }
        let mut owner: Vec<usize> = (0..self.node_count()).collect();
        for m in &self.merges[..n - k] {
            owner[m.left.0] = m.id.0;
            owner[m.right.0] = m.id.0;
        }
        // Resolve each leaf to its top-most kept ancestor.
        let mut top = vec![0usize; self.node_count()];
        for id in (0..self.node_count()).rev() {
            top[id] = if owner[id] == id { id } else { top[owner[id]] };
        }
        let mut relabel = HashMap::new();
        Ok((0..n)
            .map(|leaf| {
                let next = relabel.len();
                *relabel.entry(top[leaf]).or_insert(next)
            })
            .collect())
    }
}

/// Front entry of one row's partner list.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    dist: f64,
    lo: usize,
    hi: usize,
    row: usize,
    row_node: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
            .then(self.row.cmp(&other.row))
    }
}

/// Partners of one active cluster sorted by `(distance, partner node)`, which
/// within a single row is the same order as the global `(distance, lo, hi)`
/// key. Entries whose partner has since been merged are skipped lazily.
#[derive(Default)]
struct Row {
    partners: Vec<(f64, usize)>,
    cursor: usize,
}

impl Row {
    fn sorted(mut partners: Vec<(f64, usize)>) -> Self {
        partners.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Row {
            partners,
            cursor: 0,
        }
    }

    fn front(&mut self, node_alive: &[bool]) -> Option<(f64, usize)> {
        while let Some(&(d, node)) = self.partners.get(self.cursor) {
            if node_alive[node] {
                return Some((d, node));
            }
            self.cursor += 1;
        }
        None
    }
}

/// Complete-linkage agglomeration.
///
/// Each step merges the pair of active clusters with the smallest linkage,
/// ties broken by the smallest `(left id, right id)` pair. The linkage of a
/// merged cluster to any other is the maximum of its two parts' linkages.
///
/// Every live pair is listed in the row of its younger node, and a heap holds
/// the front of each row. A merge rebuilds only the merged row, so the run is
/// `O(n^2 log n)` however many distances tie.
pub fn agglomerate(matrix: &DistanceMatrix, leaves: Vec<String>) -> Result<Dendrogram> {
    let n = matrix.len();
    if leaves.len() != n {
        return Err(Error::Size(format!(
            "{} leaf labels for a {n}-point matrix",
            leaves.len()
        )));
    }
    let idx = |i: usize, j: usize| {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        n * i - i * (i + 1) / 2 + (j - i - 1)
    };
    let mut dist = matrix.condensed().to_vec();
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut node_alive = vec![true; 2 * n - 1];
    let mut alive: Vec<usize> = (0..n).collect();

    let mut rows: Vec<Row> = (0..n)
        .map(|j| Row::sorted((0..j).map(|i| (dist[idx(i, j)], i)).collect()))
        .collect();
    let front = |rows: &mut [Row], node_alive: &[bool], node_of: &[usize], slot: usize| {
        let row_node = node_of[slot];
        rows[slot].front(node_alive).map(|(d, partner)| Candidate {
            dist: d,
            lo: row_node.min(partner),
            hi: row_node.max(partner),
            row: slot,
            row_node,
        })
    };
    let mut queue: BinaryHeap<Reverse<Candidate>> = (0..n)
        .filter_map(|s| front(&mut rows, &node_alive, &node_of, s))
        .map(Reverse)
        .collect();
    let mut slot_of: Vec<usize> = (0..2 * n - 1).collect();
    let mut merges = Vec::with_capacity(n - 1);

    while merges.len() + 1 < n {
        let Reverse(c) = queue.pop().expect("a live pair is always queued");
        if node_of[c.row] != c.row_node || !node_alive[c.row_node] {
            continue;
        }
        let partner = if c.lo == c.row_node { c.hi } else { c.lo };
        if !node_alive[partner] {
            if let Some(next) = front(&mut rows, &node_alive, &node_of, c.row) {
                queue.push(Reverse(next));
            }
            continue;
        }
        let (p, q) = (c.row, slot_of[partner]);
        let new_id = n + merges.len();
        merges.push(Merge {
            left: NodeId(c.lo),
            right: NodeId(c.hi),
            height: c.dist,
            id: NodeId(new_id),
        });

        // The merged cluster lives on in slot `p`; slot `q` retires.
        node_alive[node_of[p]] = false;
        node_alive[node_of[q]] = false;
        node_alive[new_id] = true;
        node_of[p] = new_id;
        slot_of[new_id] = p;
        alive.retain(|&s| s != q);
        rows[q] = Row::default();
        let mut partners = Vec::with_capacity(alive.len() - 1);
        for &k in &alive {
            if k != p {
                let merged = dist[idx(p, k)].max(dist[idx(q, k)]);
                dist[idx(p, k)] = merged;
                partners.push((merged, node_of[k]));
            }
        }
        rows[p] = Row::sorted(partners);
        if let Some(next) = front(&mut rows, &node_alive, &node_of, p) {
            queue.push(Reverse(next));
        }
    }
    Dendrogram::new(leaves, merges)
}
