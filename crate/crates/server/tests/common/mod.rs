#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use saxnav_server::{router, ServiceConfig, SessionStore};
use serde_json::Value;
use tower::ServiceExt;

pub const BOUNDARY: &str = "saxnav-test-boundary";

pub fn app(config: ServiceConfig) -> Router {
    router(Arc::new(SessionStore::new(config).unwrap()))
}

/// Text fields and one file part, encoded as multipart/form-data.
pub fn multipart(fields: &[(&str, &str)], file: Option<(&str, &[u8])>) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, value) in fields {
        body.extend(format!(
            "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"\r\n\r\n{value}\r\n"
        ).bytes());
    }
    if let Some((file_name, data)) = file {
        body.extend(format!(
            "--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"{file_name}\"\r\nContent-Type: application/octet-stream\r\n\r\n"
        ).bytes());
        body.extend_from_slice(data);
        body.extend(b"\r\n");
    }
    body.extend(format!("--{BOUNDARY}--\r\n").bytes());
    body
}

pub async fn send(app: &Router, request: Request<Body>) -> (StatusCode, Vec<u8>) {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, bytes.to_vec())
}

pub async fn send_json(app: &Router, request: Request<Body>) -> (StatusCode, Value) {
    let (status, bytes) = send(app, request).await;
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|e| panic!("non-JSON body ({e}): {}", String::from_utf8_lossy(&bytes)));
    (status, value)
}

pub fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

pub fn post_json(uri: &str, body: Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

pub fn post_empty(uri: &str) -> Request<Body> {
    Request::post(uri).body(Body::empty()).unwrap()
}

pub fn upload_request(alpha: usize, omega: usize, file_name: &str, data: &[u8]) -> Request<Body> {
    let (a, w) = (alpha.to_string(), omega.to_string());
    let body = multipart(&[("alpha", &a), ("omega", &w)], Some((file_name, data)));
    Request::post("/sessions")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))
        .unwrap()
}

pub async fn create(app: &Router, alpha: usize, omega: usize, file_name: &str, data: &[u8]) -> String {
    let (status, body) = send_json(app, upload_request(alpha, omega, file_name, data)).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["id"].as_str().unwrap().to_string()
}

/// Long-format CSV of the given series.
pub fn long_csv(series: &[(String, Vec<f64>, Vec<f64>)]) -> Vec<u8> {
    let mut out = String::from("series_id,timestamp,value\n");
    for (id, t, v) in series {
        for (t, v) in t.iter().zip(v) {
            out.push_str(&format!("{id},{t},{v}\n"));
        }
    }
    out.into_bytes()
}

pub fn collect_nodes<'a>(node: &'a Value, out: &mut Vec<&'a Value>) {
    out.push(node);
    for child in node["children"].as_array().unwrap() {
        collect_nodes(child, out);
    }
}

pub fn find_node<'a>(tree: &'a Value, id: &str) -> Option<&'a Value> {
    let mut all = Vec::new();
    collect_nodes(tree, &mut all);
    all.into_iter().find(|n| n["id"] == id)
}

/// Synthetic three-family collection as long-format CSV.
pub fn synthetic_csv(count: usize, seed: u64) -> Vec<u8> {
    use saxnav_core::synthetic::{generate, SyntheticSpec};
    let spec = SyntheticSpec {
        count,
        seed,
        ..SyntheticSpec::default()
    };
    let (dataset, _) = generate(&spec).unwrap();
    let series: Vec<_> = dataset
        .series()
        .iter()
        .map(|s| (s.id.clone(), s.timestamps().to_vec(), s.values().to_vec()))
        .collect();
    long_csv(&series)
}

/// Does `word` contain a run matching one letter set per column?
pub fn naive_contains(word: &str, columns: &[Vec<usize>], alpha: usize) -> bool {
    let cells: Vec<Option<usize>> = word
        .chars()
        .map(|c| (c != '_').then(|| (c as u8 - b'a') as usize))
        .collect();
    (0..=cells.len().saturating_sub(columns.len()))
        .filter(|_| cells.len() >= columns.len())
        .any(|start| {
            columns.iter().enumerate().all(|(k, set)| match cells[start + k] {
                Some(l) => (set.is_empty() && l < alpha) || set.contains(&l),
                None => false,
            })
        })
}
