//! One uploaded dataset analyzed under one configuration, plus the store
//! that owns every live session.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use saxnav_core::{
    analyze, cluster_heatmap, compare_clusters, expand_node, load_dataset, lookup_by_id,
    run_sketch, Analysis, ComparisonHeatMap, ComparisonMode, Format, HeatMap, NodeId,
    QueryRequest, QueryResult, SaxConfig, SaxWord, SketchPattern, TimeSeries, TreeView,
    WordIndex,
};
use serde::{Deserialize, Serialize};

use crate::config::ServiceConfig;
use crate::detail::downsample;
use crate::error::{Result, ServiceError};

/// Everything needed to (re)build a session.
#[derive(Debug, Clone)]
pub struct Upload {
    pub data: Vec<u8>,
    pub format: Format,
    /// Optional `series_id,key,value` sidecar.
    pub metadata: Option<Vec<u8>>,
    pub alpha: usize,
    pub omega: usize,
}

#[derive(Serialize, Deserialize)]
struct StoredParams {
    alpha: usize,
    omega: usize,
    format: String,
    min_fraction: f64,
    metadata: bool,
}

const PARAMS_FILE: &str = "params.json";
const UPLOAD_FILE: &str = "upload.dat";
const METADATA_FILE: &str = "metadata.csv";
const WORDS_FILE: &str = "words.json";
const TREE_FILE: &str = "tree.json";
const EXPANDED_FILE: &str = "expanded.json";

fn format_name(format: Format) -> &'static str {
    match format {
        Format::LongCsv => "long-csv",
        Format::SeriesJson => "series-json",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberSeries {
    pub id: String,
    pub word: String,
    pub metadata: BTreeMap<String, String>,
    /// Sample count before any downsampling.
    pub n_samples: usize,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterDetail {
    pub node: String,
    pub size: usize,
    pub members: Vec<MemberSeries>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesDetail {
    #[serde(flatten)]
    pub series: MemberSeries,
    /// Root-to-leaf node ids.
    pub path: Vec<String>,
}

struct ViewState {
    view: TreeView,
    expanded: Vec<NodeId>,
}

type ComparisonKey = (NodeId, NodeId, ComparisonMode);

pub struct Session {
    id: String,
    analysis: Analysis,
    index: WordIndex,
    positions: HashMap<String, usize>,
    state: Mutex<ViewState>,
    heatmaps: Mutex<HashMap<NodeId, Arc<HeatMap>>>,
    comparisons: Mutex<HashMap<ComparisonKey, Arc<ComparisonHeatMap>>>,
    cache_dir: Option<PathBuf>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("series", &self.analysis.raw.len())
            .field("config", &self.analysis.config())
            .finish_non_exhaustive()
    }
}

impl Session {
    /// Runs the full pipeline over an upload.
    pub fn build(id: String, upload: &Upload, config: &ServiceConfig) -> Result<Session> {
        let sax = SaxConfig::new(upload.alpha, upload.omega)?;
        let mut raw = load_dataset(upload.data.as_slice(), upload.format)?;
        if raw.len() > config.max_series {
            return Err(ServiceError::TooLarge {
                count: raw.len(),
                max: config.max_series,
            });
        }
        if let Some(meta) = &upload.metadata {
            raw.attach_metadata(meta.as_slice())?;
        }
        let analysis = analyze(raw, sax, config.min_fraction)?;
        let index = WordIndex::new(analysis.words());
        let positions = analysis
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.series_id.clone(), i))
            .collect();
        let view = analysis.view.clone();
        Ok(Session {
            id,
            analysis,
            index,
            positions,
            state: Mutex::new(ViewState {
                view,
                expanded: Vec::new(),
            }),
            heatmaps: Mutex::default(),
            comparisons: Mutex::default(),
            cache_dir: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn analysis(&self) -> &Analysis {
        &self.analysis
    }

    pub fn config(&self) -> SaxConfig {
        self.analysis.config()
    }

    /// Resolves a node id from its wire form.
    pub fn node(&self, raw: &str) -> Result<NodeId> {
        raw.parse::<NodeId>()
            .ok()
            .filter(|&n| self.analysis.dendrogram.contains(n))
            .ok_or_else(|| ServiceError::UnknownNode(raw.to_string()))
    }

    pub fn view(&self) -> TreeView {
        self.state.lock().unwrap().view.clone()
    }

    pub fn expanded(&self) -> Vec<NodeId> {
        self.state.lock().unwrap().expanded.clone()
    }

    pub fn tree_json(&self) -> Vec<u8> {
        let state = self.state.lock().unwrap();
        self.render(&state.view)
    }

    fn render(&self, view: &TreeView) -> Vec<u8> {
        serde_json::to_vec(&view.to_json(&self.analysis.dendrogram)).expect("tree serializes")
    }

    /// Expands a visible node and returns the updated tree JSON.
    pub fn expand(&self, node: NodeId) -> Result<Vec<u8>> {
        let mut state = self.state.lock().unwrap();
        let next = expand_node(&state.view, &self.analysis.dendrogram, node)?;
        let changed = next != state.view;
        state.view = next;
        if changed {
            state.expanded.push(node);
        }
        let json = self.render(&state.view);
        if changed {
            if let Some(dir) = &self.cache_dir {
                fs::write(dir.join(TREE_FILE), &json)?;
                fs::write(dir.join(EXPANDED_FILE), expanded_json(&state.expanded))?;
            }
        }
        Ok(json)
    }

    fn words_under(&self, node: NodeId) -> Vec<SaxWord> {
        let words = self.analysis.words();
        self.analysis
            .dendrogram
            .leaves_under(node)
            .into_iter()
            .map(|i| words[i].clone())
            .collect()
    }

    pub fn heatmap(&self, node: NodeId) -> Result<Arc<HeatMap>> {
        if let Some(hit) = self.heatmaps.lock().unwrap().get(&node) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(cluster_heatmap(&self.words_under(node), self.config())?);
        Ok(self
            .heatmaps
            .lock()
            .unwrap()
            .entry(node)
            .or_insert(fresh)
            .clone())
    }

    pub fn compare(&self, a: NodeId, b: NodeId, mode: ComparisonMode) -> Result<Arc<ComparisonHeatMap>> {
        let key = (a, b, mode);
        if let Some(hit) = self.comparisons.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(compare_clusters(
            &self.words_under(a),
            &self.words_under(b),
            mode,
            self.config(),
        )?);
        Ok(self
            .comparisons
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(fresh)
            .clone())
    }

    pub fn query(&self, request: &QueryRequest) -> Result<QueryResult> {
        let dendrogram = &self.analysis.dendrogram;
        Ok(match request {
            QueryRequest::Sketch { columns } => run_sketch(
                &SketchPattern::new(columns.clone()),
                self.config().alpha,
                &self.index,
                dendrogram,
            )?,
            QueryRequest::Id { id } => lookup_by_id(dendrogram, id)?,
        })
    }

    fn member(&self, index: usize, max_points: Option<usize>) -> MemberSeries {
        let series: &TimeSeries = &self.analysis.raw.series()[index];
        let (t, v) = match max_points {
            Some(max) => downsample(series.timestamps(), series.values(), max),
            None => (series.timestamps().to_vec(), series.values().to_vec()),
        };
        MemberSeries {
            id: series.id.clone(),
            word: self.analysis.words()[index].to_string(),
            metadata: series.metadata.clone(),
            n_samples: series.len(),
            t,
            v,
        }
    }

    /// Members of a node with raw samples reduced to `max_points` each.
    pub fn detail(&self, node: NodeId, max_points: usize) -> ClusterDetail {
        let members: Vec<MemberSeries> = self
            .analysis
            .dendrogram
            .leaves_under(node)
            .into_iter()
            .map(|i| self.member(i, Some(max_points)))
            .collect();
        ClusterDetail {
            node: node.to_string(),
            size: members.len(),
            members,
        }
    }

    pub fn series(&self, series_id: &str) -> Result<SeriesDetail> {
        let &index = self
            .positions
            .get(series_id)
            .ok_or_else(|| saxnav_core::Error::NotFound(format!("series `{series_id}`")))?;
        let path = self.analysis.dendrogram.path_to_leaf(series_id)?;
        Ok(SeriesDetail {
            series: self.member(index, None),
            path: path.iter().map(NodeId::to_string).collect(),
        })
    }
}

fn expanded_json(expanded: &[NodeId]) -> Vec<u8> {
    let ids: Vec<usize> = expanded.iter().map(|n| n.0).collect();
    serde_json::to_vec(&ids).expect("ids serialize")
}

/// Live sessions, optionally mirrored to a cache directory so they survive
/// restarts.
#[derive(Debug)]
pub struct SessionStore {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl SessionStore {
    pub fn new(config: ServiceConfig) -> Result<Self> {
        if let Some(dir) = &config.cache_dir {
            fs::create_dir_all(dir)?;
        }
        Ok(SessionStore {
            config,
            sessions: RwLock::default(),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Number of sessions held in memory.
    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(&self, upload: Upload) -> Result<Arc<Session>> {
        let id = uuid::Uuid::new_v4().to_string();
        let mut session = Session::build(id.clone(), &upload, &self.config)?;
        if let Some(root) = &self.config.cache_dir {
            let dir = root.join(&id);
            self.persist(&dir, &upload, &session)?;
            session.cache_dir = Some(dir);
        }
        let session = Arc::new(session);
        self.sessions.write().unwrap().insert(id, session.clone());
        tracing::info!(session = %session.id, series = session.analysis.raw.len(), "session created");
        Ok(session)
    }

    fn persist(&self, dir: &Path, upload: &Upload, session: &Session) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(UPLOAD_FILE), &upload.data)?;
        if let Some(meta) = &upload.metadata {
            fs::write(dir.join(METADATA_FILE), meta)?;
        }
        let words = serde_json::to_vec(&session.analysis.corpus.to_json()).expect("words serialize");
        fs::write(dir.join(WORDS_FILE), words)?;
        fs::write(dir.join(TREE_FILE), session.tree_json())?;
        fs::write(dir.join(EXPANDED_FILE), expanded_json(&[]))?;
        // Written last: a directory without params is an incomplete write.
        let params = StoredParams {
            alpha: upload.alpha,
            omega: upload.omega,
            format: format_name(upload.format).into(),
            min_fraction: self.config.min_fraction,
            metadata: upload.metadata.is_some(),
        };
        fs::write(dir.join(PARAMS_FILE), serde_json::to_vec(&params).expect("params serialize"))?;
        Ok(())
    }

    /// Looks a session up in memory, falling back to the cache directory.
    pub fn get(&self, id: &str) -> Result<Arc<Session>> {
        if let Some(hit) = self.sessions.read().unwrap().get(id) {
            return Ok(hit.clone());
        }
        let restored = Arc::new(self.restore(id)?);
        let mut sessions = self.sessions.write().unwrap();
        Ok(sessions.entry(id.to_string()).or_insert(restored).clone())
    }

    fn restore(&self, id: &str) -> Result<Session> {
        let unknown = || ServiceError::UnknownSession(id.to_string());
        let root = self.config.cache_dir.as_ref().ok_or_else(unknown)?;
        // Only canonical uuids name cache directories.
        let uuid = uuid::Uuid::parse_str(id).map_err(|_| unknown())?;
        if uuid.to_string() != id {
            return Err(unknown());
        }
        let dir = root.join(id);
        let params = match fs::read(dir.join(PARAMS_FILE)) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(unknown()),
            Err(e) => return Err(e.into()),
        };
        let params: StoredParams = serde_json::from_slice(&params)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let upload = Upload {
            data: fs::read(dir.join(UPLOAD_FILE))?,
            format: params.format.parse()?,
            metadata: if params.metadata {
                Some(fs::read(dir.join(METADATA_FILE))?)
            } else {
                None
            },
            alpha: params.alpha,
            omega: params.omega,
        };
        let expanded: Vec<usize> = fs::read(dir.join(EXPANDED_FILE))
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok())
            .unwrap_or_default();
        let config = ServiceConfig {
            min_fraction: params.min_fraction,
            ..self.config.clone()
        };
        let session = Session::build(id.to_string(), &upload, &config)?;
        for node in expanded {
            session.expand(NodeId(node))?;
        }
        tracing::info!(session = id, "session restored from cache");
        Ok(Session {
            cache_dir: Some(dir),
            ..session
        })
    }
}
