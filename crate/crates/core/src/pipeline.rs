//! End-to-end run: normalize, fit, encode, cluster, prune.

use crate::cluster::{agglomerate, distance_matrix, prune_tree, Dendrogram, TreeView};
use crate::dataset::{znormalize, Dataset};
use crate::error::Result;
use crate::sax::{encode_dataset, EncodedCorpus, SaxConfig, SaxWord};

/// Every artifact derived from one dataset and one configuration.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub raw: Dataset,
    pub normalized: Dataset,
    pub corpus: EncodedCorpus,
    pub dendrogram: Dendrogram,
    pub view: TreeView,
}

impl Analysis {
    pub fn config(&self) -> SaxConfig {
        self.corpus.config
    }

    pub fn words(&self) -> &[SaxWord] {
        &self.corpus.words
    }
}

/// Clusters already-encoded words and prunes the resulting tree.
pub fn cluster_words(
    words: &[SaxWord],
    omega: usize,
    min_fraction: f64,
) -> Result<(Dendrogram, TreeView)> {
    let matrix = distance_matrix(words, omega)?;
    let leaves = words.iter().map(|w| w.series_id.clone()).collect();
    let dendrogram = agglomerate(&matrix, leaves)?;
    let view = prune_tree(&dendrogram, words.len(), min_fraction)?;
    Ok((dendrogram, view))
}

pub fn analyze(raw: Dataset, config: SaxConfig, min_fraction: f64) -> Result<Analysis> {
    config.validate()?;
    let normalized = znormalize(&raw)?;
    let corpus = encode_dataset(&normalized, config)?;
    let (dendrogram, view) = cluster_words(&corpus.words, config.omega, min_fraction)?;
    Ok(Analysis {
        raw,
        normalized,
        corpus,
        dendrogram,
        view,
    })
}
