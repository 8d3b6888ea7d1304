//! JSON routes over a [`SessionStore`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::multipart::Multipart;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use saxnav_core::{ComparisonMode, Error as CoreError, Format, QueryRequest};
use serde::Deserialize;
use serde_json::json;

use crate::detail::MAX_DETAIL_POINTS;
use crate::error::{Result, ServiceError};
use crate::session::{Session, SessionStore, Upload};

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Core(e) => match e {
                CoreError::Parse { .. }
                | CoreError::DuplicateSample { .. }
                | CoreError::EmptyDataset
                | CoreError::InvalidConfig(_)
                | CoreError::InvalidValue(_)
                | CoreError::InvalidPattern(_)
                | CoreError::Regex(_) => StatusCode::BAD_REQUEST,
                CoreError::Degenerate(_) | CoreError::Size(_) => StatusCode::UNPROCESSABLE_ENTITY,
                CoreError::NotFound(_) => StatusCode::NOT_FOUND,
                CoreError::State(_) | CoreError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            },
            ServiceError::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            ServiceError::UnknownSession(_) | ServiceError::UnknownNode(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Cache(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let mut body = json!({ "error": self.to_string() });
        match &self {
            ServiceError::Core(CoreError::Parse { line, .. })
            | ServiceError::Core(CoreError::DuplicateSample { line, .. }) => {
                body["line"] = json!(line);
            }
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ServiceError {
    fn from(rejection: JsonRejection) -> Self {
        ServiceError::BadRequest(rejection.body_text())
    }
}

type AppState = Arc<SessionStore>;

/// Builds the application router.
pub fn router(store: AppState) -> Router {
    let body_limit = store.config().max_upload_bytes;
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/tree", get(get_tree))
        .route("/sessions/{id}/tree/{node}/expand", post(expand))
        .route("/sessions/{id}/clusters/{node}", get(cluster_detail))
        .route("/sessions/{id}/clusters/{node}/heatmap", get(heatmap))
        .route("/sessions/{id}/compare", post(compare))
        .route("/sessions/{id}/query", post(query))
        .route("/sessions/{id}/series/{sid}", get(series))
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(store)
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(store: SessionStore, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(store))).await
}

/// Runs pipeline work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T>
where
    F: FnOnce() -> Result<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| std::panic::resume_unwind(e.into_panic()))
}

async fn session(store: &AppState, id: String) -> Result<Arc<Session>> {
    let store = store.clone();
    blocking(move || store.get(&id)).await
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn text_field(name: &str, bytes: &[u8]) -> Result<String> {
    String::from_utf8(bytes.to_vec())
        .map(|s| s.trim().to_string())
        .map_err(|_| ServiceError::BadRequest(format!("field `{name}` is not UTF-8")))
}

fn number_field(name: &str, bytes: &[u8]) -> Result<usize> {
    let text = text_field(name, bytes)?;
    text.parse()
        .map_err(|_| ServiceError::BadRequest(format!("field `{name}` must be a non-negative integer, got `{text}`")))
}

fn sniff_format(file_name: Option<&str>, data: &[u8]) -> Format {
    if let Some(name) = file_name {
        if std::path::Path::new(name).extension().is_some() {
            return Format::from_path(std::path::Path::new(name));
        }
    }
    match data.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'[') => Format::SeriesJson,
        _ => Format::LongCsv,
    }
}

/// Multipart fields: `file` (required), `alpha`, `omega` (required),
/// `format` (`long-csv` or `series-json`, otherwise inferred) and
/// `metadata` (optional `series_id,key,value` CSV).
async fn create_session(State(store): State<AppState>, mut form: Multipart) -> Result<Response> {
    let (mut data, mut file_name, mut format, mut metadata) = (None, None, None, None);
    let (mut alpha, mut omega) = (None, None);
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ServiceError::BadRequest(e.body_text()))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let field_file = field.file_name().map(str::to_string);
        let bytes = field
            .bytes()
            .await
            .map_err(|e| ServiceError::BadRequest(e.body_text()))?;
        match name.as_str() {
            "file" | "data" => {
                file_name = field_file;
                data = Some(bytes.to_vec());
            }
            "alpha" => alpha = Some(number_field("alpha", &bytes)?),
            "omega" => omega = Some(number_field("omega", &bytes)?),
            "format" => format = Some(text_field("format", &bytes)?.parse::<Format>()?),
            "metadata" => metadata = Some(bytes.to_vec()),
            other => return Err(ServiceError::BadRequest(format!("unexpected field `{other}`"))),
        }
    }
    let missing = |f: &str| ServiceError::BadRequest(format!("missing field `{f}`"));
    let data = data.ok_or_else(|| missing("file"))?;
    let upload = Upload {
        format: format.unwrap_or_else(|| sniff_format(file_name.as_deref(), &data)),
        data,
        metadata,
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
        omega: omega.ok_or_else(|| missing("omega"))?,
    };
    let session = blocking(move || store.create(upload)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": session.id() }))).into_response())
}

async fn get_tree(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response> {
    let session = session(&store, id).await?;
    Ok(json_bytes(session.tree_json()))
}

async fn expand(
    State(store): State<AppState>,
    Path((id, node)): Path<(String, String)>,
) -> Result<Response> {
    let session = session(&store, id).await?;
    let node = session.node(&node)?;
    Ok(json_bytes(blocking(move || session.expand(node)).await?))
}

async fn cluster_detail(
    State(store): State<AppState>,
    Path((id, node)): Path<(String, String)>,
) -> Result<Response> {
    let session = session(&store, id).await?;
    let node = session.node(&node)?;
    let detail = blocking(move || Ok(session.detail(node, MAX_DETAIL_POINTS))).await?;
    Ok(Json(detail).into_response())
}

async fn heatmap(
    State(store): State<AppState>,
    Path((id, node)): Path<(String, String)>,
) -> Result<Response> {
    let session = session(&store, id).await?;
    let node = session.node(&node)?;
    let map = blocking(move || session.heatmap(node)).await?;
    Ok(Json(&*map).into_response())
}

/// Node ids arrive as strings, but bare numbers are accepted too.
#[derive(Deserialize)]
#[serde(untagged)]
enum NodeRef {
    Text(String),
    Number(usize),
}

impl NodeRef {
    fn text(self) -> String {
        match self {
            NodeRef::Text(s) => s,
            NodeRef::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
struct CompareRequest {
    a: NodeRef,
    b: NodeRef,
    mode: String,
}

async fn compare(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: std::result::Result<Json<CompareRequest>, JsonRejection>,
) -> Result<Response> {
    let Json(request) = body?;
    let session = session(&store, id).await?;
    let mode: ComparisonMode = request.mode.parse()?;
    let a = session.node(&request.a.text())?;
    let b = session.node(&request.b.text())?;
    let result = blocking(move || session.compare(a, b, mode)).await?;
    Ok(Json(&*result).into_response())
}

async fn query(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: std::result::Result<Json<QueryRequest>, JsonRejection>,
) -> Result<Response> {
    let Json(request) = body?;
    let session = session(&store, id).await?;
    let result = blocking(move || session.query(&request)).await?;
    Ok(Json(result).into_response())
}

async fn series(
    State(store): State<AppState>,
    Path((id, sid)): Path<(String, String)>,
) -> Result<Response> {
    let session = session(&store, id).await?;
    Ok(Json(session.series(&sid)?).into_response())
}
