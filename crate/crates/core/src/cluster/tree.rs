//! Pruned, expandable presentation of a dendrogram.

use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::cluster::linkage::{Dendrogram, NodeId};
use crate::error::{Error, Result};

/// Default share of the collection a cluster must exceed to be shown.
pub const DEFAULT_MIN_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct ViewNode {
    pub size: usize,
    pub height: f64,
    /// Visible children, left before right.
    pub children: Vec<NodeId>,
    pub expanded: bool,
}

/// The visible part of a dendrogram. Only clusters larger than
/// `min_fraction * n_total` are shown, plus the root and anything the user
/// expanded into view.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeView {
    pub nodes: BTreeMap<NodeId, ViewNode>,
    pub root: NodeId,
    pub min_fraction: f64,
    pub n_total: usize,
}

pub fn prune_tree(dendrogram: &Dendrogram, n_total: usize, min_fraction: f64) -> Result<TreeView> {
    if !(0.0..1.0).contains(&min_fraction) {
        return Err(Error::InvalidConfig(format!(
            "min_fraction must be in [0, 1), got {min_fraction}"
        )));
    }
    let threshold = min_fraction * n_total as f64;
    let root = dendrogram.root();
    let mut nodes = BTreeMap::new();
    // Sizes shrink going down, so the visible set is a connected top part.
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        let children: Vec<NodeId> = dendrogram
            .children(id)
            .map(|(l, r)| {
                [l, r]
                    .into_iter()
                    .filter(|c| dendrogram.size(*c) as f64 > threshold)
                    .collect()
            })
            .unwrap_or_default();
        stack.extend(children.iter().rev());
        nodes.insert(
            id,
            ViewNode {
                size: dendrogram.size(id),
                height: dendrogram.height(id),
                children,
                expanded: false,
            },
        );
    }
    Ok(TreeView {
        nodes,
        root,
        min_fraction,
        n_total,
    })
}

/// Makes a visible node's immediate children visible regardless of size.
/// Expanding a leaf or an already expanded node changes nothing.
pub fn expand_node(view: &TreeView, dendrogram: &Dendrogram, node: NodeId) -> Result<TreeView> {
    if !view.is_visible(node) {
        return Err(Error::NotFound(format!("visible node {node}")));
    }
    let Some((left, right)) = dendrogram.children(node) else {
        return Ok(view.clone());
    };
    let mut next = view.clone();
    for child in [left, right] {
        next.nodes.entry(child).or_insert_with(|| ViewNode {
            size: dendrogram.size(child),
            height: dendrogram.height(child),
            children: Vec::new(),
            expanded: false,
        });
    }
    let entry = next.nodes.get_mut(&node).expect("checked visible");
    entry.children = vec![left, right];
    entry.expanded = true;
    Ok(next)
}

impl TreeView {
    pub fn is_visible(&self, node: NodeId) -> bool {
        self.nodes.contains_key(&node)
    }

    pub fn visible_count(&self) -> usize {
        self.nodes.len()
    }

    /// An internal node some of whose children are hidden.
    pub fn is_collapsed(&self, dendrogram: &Dendrogram, node: NodeId) -> bool {
        !dendrogram.is_leaf(node) && self.nodes.get(&node).is_some_and(|v| v.children.len() < 2)
    }

    /// Nested JSON tree consumed by the browser front end.
    pub fn to_json<'a>(&'a self, dendrogram: &'a Dendrogram) -> TreeJson<'a> {
        TreeJson {
            view: self,
            dendrogram,
            node: self.root,
        }
    }
}

/// Serializable borrowed view of one subtree of a [`TreeView`].
pub struct TreeJson<'a> {
    view: &'a TreeView,
    dendrogram: &'a Dendrogram,
    node: NodeId,
}

impl Serialize for TreeJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entry = &self.view.nodes[&self.node];
        let collapsed = self.view.is_collapsed(self.dendrogram, self.node);
        let children: Vec<TreeJson<'_>> = entry
            .children
            .iter()
            .map(|&node| TreeJson { node, ..*self })
            .collect();
        let members: Vec<&str> = if collapsed || self.dendrogram.is_leaf(self.node) {
            self.dendrogram.members(self.node)
        } else {
            Vec::new()
        };
        let mut s = serializer.serialize_struct("Node", 6)?;
        s.serialize_field("id", &self.node.to_string())?;
        s.serialize_field("size", &entry.size)?;
        s.serialize_field("height", &entry.height)?;
        s.serialize_field("collapsed", &collapsed)?;
        s.serialize_field("children", &children)?;
        s.serialize_field("member_ids", &members)?;
        s.end()
    }
}
