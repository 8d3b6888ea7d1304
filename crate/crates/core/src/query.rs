//! Sketch-to-regex compilation, substring search over SAX words and branch
//! highlighting.

use std::collections::BTreeSet;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize, Serializer};

use crate::cluster::{Dendrogram, NodeId};
use crate::error::{Error, Result};
use crate::sax::SaxWord;

/// A drawn query: one set of acceptable letters per column. An empty set
/// accepts any letter (but never a gap).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchPattern {
    pub columns: Vec<Vec<usize>>,
}

impl SketchPattern {
    pub fn new(columns: Vec<Vec<usize>>) -> Self {
        SketchPattern { columns }
    }

    /// Single-letter columns spelled out, e.g. `"abcba"`.
    pub fn from_letters(text: &str) -> Result<Self> {
        text.chars()
            .map(|c| match c {
                'a'..='z' => Ok(vec![(c as u8 - b'a') as usize]),
                _ => Err(Error::InvalidPattern(format!("`{c}` is not a letter"))),
            })
            .collect::<Result<_>>()
            .map(SketchPattern::new)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn validate(&self, alpha: usize) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::InvalidPattern("sketch has no columns".into()));
        }
        if self.columns.iter().all(Vec::is_empty) {
            return Err(Error::InvalidPattern("sketch has no drawn cells".into()));
        }
        if let Some(bad) = self.columns.iter().flatten().find(|&&l| l >= alpha) {
            return Err(Error::InvalidPattern(format!(
                "letter index {bad} outside alphabet of size {alpha}"
            )));
        }
        Ok(())
    }
}

fn letter(index: usize) -> char {
    (b'a' + index as u8) as char
}

/// Compiles a sketch into a regular expression over word text.
pub fn sketch_to_regex(pattern: &SketchPattern, alpha: usize) -> Result<String> {
    pattern.validate(alpha)?;
    let mut out = String::new();
    for column in &pattern.columns {
        let set: BTreeSet<usize> = if column.is_empty() {
            (0..alpha).collect()
        } else {
            column.iter().copied().collect()
        };
        if set.len() == 1 {
            out.push(letter(*set.first().unwrap()));
        } else {
            out.push('[');
            out.extend(set.into_iter().map(letter));
            out.push(']');
        }
    }
    Ok(out)
}

/// Serialized words ready for repeated pattern searches.
#[derive(Debug, Clone)]
pub struct WordIndex {
    entries: Vec<(String, String)>,
}

impl WordIndex {
    pub fn new(words: &[SaxWord]) -> Self {
        WordIndex {
            entries: words
                .iter()
                .map(|w| (w.series_id.clone(), w.to_string()))
                .collect(),
        }
    }

    /// Ids of all words containing a match of `pattern`, in corpus order.
    pub fn search(&self, pattern: &str) -> Result<Vec<String>> {
        let re = Regex::new(pattern)?;
        Ok(self
            .entries
            .par_iter()
            .filter(|(_, text)| re.is_match(text))
            .map(|(id, _)| id.clone())
            .collect())
    }
}

/// One-shot form of [`WordIndex::search`].
pub fn search(pattern: &str, words: &[SaxWord]) -> Result<Vec<String>> {
    WordIndex::new(words).search(pattern)
}

/// Union of the root paths of every matched leaf.
pub fn highlight_branches<S: AsRef<str>>(
    dendrogram: &Dendrogram,
    matched_ids: &[S],
) -> Result<BTreeSet<NodeId>> {
    let mut nodes = BTreeSet::new();
    for id in matched_ids {
        let leaf = dendrogram
            .leaf_of(id.as_ref())
            .ok_or_else(|| Error::NotFound(format!("series `{}`", id.as_ref())))?;
        let mut cur = Some(leaf);
        while let Some(node) = cur {
            // Everything above an already highlighted node is highlighted too.
            if !nodes.insert(node) {
                break;
            }
            cur = dendrogram.parent(node);
        }
    }
    Ok(nodes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternSource {
    Sketch,
    IdLookup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub matched_ids: Vec<String>,
    #[serde(serialize_with = "node_strings")]
    pub highlight_nodes: BTreeSet<NodeId>,
    #[serde(skip)]
    pub source: PatternSource,
}

fn node_strings<S: Serializer>(nodes: &BTreeSet<NodeId>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(nodes.iter().map(NodeId::to_string))
}

pub fn lookup_by_id(dendrogram: &Dendrogram, series_id: &str) -> Result<QueryResult> {
    let path = dendrogram.path_to_leaf(series_id)?;
    Ok(QueryResult {
        matched_ids: vec![series_id.to_string()],
        highlight_nodes: path.into_iter().collect(),
        source: PatternSource::IdLookup,
    })
}

/// Compiles, searches and highlights in one step.
pub fn run_sketch(
    pattern: &SketchPattern,
    alpha: usize,
    index: &WordIndex,
    dendrogram: &Dendrogram,
) -> Result<QueryResult> {
    let regex = sketch_to_regex(pattern, alpha)?;
    let matched_ids = index.search(&regex)?;
    let highlight_nodes = highlight_branches(dendrogram, &matched_ids)?;
    Ok(QueryResult {
        matched_ids,
        highlight_nodes,
        source: PatternSource::Sketch,
    })
}

/// Wire form of a query request.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum QueryRequest {
    Sketch { columns: Vec<Vec<usize>> },
    Id { id: String },
}
