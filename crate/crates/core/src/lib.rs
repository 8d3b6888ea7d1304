//! Exploration engine for large time-series collections.
//!
//! Series are z-normalized, turned into SAX words against breakpoints fitted
//! on the pooled values, and clustered with complete linkage under a
//! gap-tolerant word distance. Clusters are summarized as letter heat maps,
//! compared pairwise, and searched with sketch patterns compiled to regular
//! expressions.

pub mod aggregate;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod pipeline;
pub mod query;
pub mod sax;
pub mod synthetic;

pub use aggregate::{
    band_stats, cluster_heatmap, compare_clusters, BandStats, ComparisonHeatMap, ComparisonMode,
    HeatMap,
};
pub use cluster::{
    agglomerate, distance_matrix, expand_node, prune_tree, word_distance, Dendrogram,
    DistanceMatrix, Merge, NodeId, TreeView, DEFAULT_MIN_FRACTION,
};
pub use dataset::{load_dataset, znormalize, Dataset, Format, TimeSeries};
pub use error::{Error, Result};
pub use pipeline::{analyze, cluster_words, Analysis};
pub use query::{
    highlight_branches, lookup_by_id, run_sketch, search, sketch_to_regex, QueryRequest,
    QueryResult, SketchPattern, WordIndex,
};
pub use sax::{
    encode, encode_dataset, fit_breakpoints, BreakpointModel, Cell, EncodedCorpus, SaxConfig,
    SaxWord,
};
