//! Word distance, complete-linkage agglomeration and the pruned tree view.

mod distance;
mod linkage;
mod tree;

pub use distance::{agreement, distance_matrix, word_distance, DistanceMatrix};
pub use linkage::{agglomerate, Dendrogram, Merge, NodeId};
pub use tree::{expand_node, prune_tree, TreeJson, TreeView, ViewNode, DEFAULT_MIN_FRACTION};
