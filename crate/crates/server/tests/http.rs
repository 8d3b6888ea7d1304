mod common;

use std::collections::BTreeSet;

use axum::http::StatusCode;
use common::*;
use saxnav_server::ServiceConfig;
use serde_json::{json, Value};

const THREE: &[u8] = b"series_id,timestamp,value\n\
    a,0,1\na,1,2\na,2,3\na,3,4\n\
    b,0,1\nb,1,2\nb,2,3\nb,3,5\n\
    c,0,4\nc,1,3\nc,2,2\nc,3,1\n";

#[tokio::test]
async fn create_and_fetch_tree() {
    let app = app(ServiceConfig::default());
    let id = create(&app, 4, 8, "data.csv", THREE).await;
    let (status, tree) = send_json(&app, get(&format!("/sessions/{id}/tree"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(tree["size"], 3);
    assert_eq!(tree["id"], "4");
}

#[tokio::test]
async fn upload_validation_errors() {
    let app = app(ServiceConfig::default());
    let (status, body) = send_json(&app, upload_request(1, 8, "d.csv", THREE)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");

    let bad = b"series_id,timestamp,value\na,0,1\na,x,2\n";
    let (status, body) = send_json(&app, upload_request(4, 8, "d.csv", bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["line"], 3, "{body}");

    let constant = b"series_id,timestamp,value\na,0,1\na,1,1\nb,0,2\nb,1,2\n";
    let (status, _) = send_json(&app, upload_request(4, 8, "d.csv", constant)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let missing = multipart(&[("alpha", "4")], Some(("d.csv", THREE)));
    let request = axum::http::Request::post("/sessions")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(axum::body::Body::from(missing))
        .unwrap();
    let (status, body) = send_json(&app, request).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("omega"));
}

#[tokio::test]
async fn oversize_upload() {
    let app = app(ServiceConfig {
        max_series: 2,
        ..ServiceConfig::default()
    });
    let (status, _) = send_json(&app, upload_request(4, 8, "d.csv", THREE)).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn unknown_session_and_node() {
    let app = app(ServiceConfig::default());
    let (status, _) = send_json(&app, get("/sessions/nope/tree")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let id = create(&app, 4, 4, "d.csv", THREE).await;
    for uri in [
        format!("/sessions/{id}/clusters/99"),
        format!("/sessions/{id}/clusters/abc/heatmap"),
        format!("/sessions/{id}/series/zzz"),
    ] {
        let (status, _) = send_json(&app, get(&uri)).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
    }
    let (status, _) = send_json(&app, post_empty(&format!("/sessions/{id}/tree/77/expand"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn expand_reveals_children() {
    let app = app(ServiceConfig::default());
    let csv = synthetic_csv(300, 3);
    let id = create(&app, 4, 16, "d.csv", &csv).await;
    let (_, tree) = send_json(&app, get(&format!("/sessions/{id}/tree"))).await;
    let mut nodes = Vec::new();
    collect_nodes(&tree, &mut nodes);
    let target = nodes
        .iter()
        .find(|n| n["collapsed"] == true)
        .expect("some cluster is pruned at 2%");
    let target_id = target["id"].as_str().unwrap().to_string();
    let hidden_before = target["children"].as_array().unwrap().len();
    assert!(hidden_before < 2);
    assert_eq!(target["member_ids"].as_array().unwrap().len(), target["size"].as_u64().unwrap() as usize);

    let uri = format!("/sessions/{id}/tree/{target_id}/expand");
    let (status, expanded) = send_json(&app, post_empty(&uri)).await;
    assert_eq!(status, StatusCode::OK);
    let node = find_node(&expanded, &target_id).unwrap();
    assert_eq!(node["children"].as_array().unwrap().len(), 2);
    assert_eq!(node["collapsed"], false);

    let (_, again) = send_json(&app, post_empty(&uri)).await;
    assert_eq!(again, expanded);
    let (_, fetched) = send_json(&app, get(&format!("/sessions/{id}/tree"))).await;
    assert_eq!(fetched, expanded);
}

#[tokio::test]
async fn cluster_detail_members() {
    let app = app(ServiceConfig::default());
    let id = create(&app, 4, 4, "d.csv", THREE).await;
    let (status, root) = send_json(&app, get(&format!("/sessions/{id}/clusters/4"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(root["size"], 3);
    let ids: BTreeSet<&str> = root["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, BTreeSet::from(["a", "b", "c"]));

    let (_, leaf) = send_json(&app, get(&format!("/sessions/{id}/clusters/0"))).await;
    assert_eq!(leaf["size"], 1);
    assert_eq!(leaf["members"][0]["id"], "a");
    assert_eq!(leaf["members"][0]["v"], json!([1.0, 2.0, 3.0, 4.0]));
    assert_eq!(leaf["members"][0]["word"].as_str().unwrap().len(), 4);
}

#[tokio::test]
async fn detail_is_downsampled() {
    let t: Vec<f64> = (0..3000).map(f64::from).collect();
    let spike: Vec<f64> = t.iter().map(|&x| if x == 1777.0 { 40.0 } else { (x / 50.0).sin() }).collect();
    let ramp: Vec<f64> = t.iter().map(|&x| x / 3000.0).collect();
    let csv = long_csv(&[("spiky".into(), t.clone(), spike), ("ramp".into(), t, ramp)]);
    let app = app(ServiceConfig::default());
    let id = create(&app, 4, 8, "d.csv", &csv).await;
    let (_, detail) = send_json(&app, get(&format!("/sessions/{id}/clusters/2"))).await;
    for member in detail["members"].as_array().unwrap() {
        let v = member["v"].as_array().unwrap();
        assert!(v.len() <= 500);
        assert_eq!(member["n_samples"], 3000);
        assert_eq!(member["t"][0], 0.0);
        assert_eq!(member["t"][v.len() - 1], 2999.0);
        if member["id"] == "spiky" {
            assert!(v.contains(&json!(40.0)));
        }
    }
    let (_, full) = send_json(&app, get(&format!("/sessions/{id}/series/spiky"))).await;
    assert_eq!(full["v"].as_array().unwrap().len(), 3000);
    assert_eq!(full["path"], json!(["2", "0"]));
}

#[tokio::test]
async fn heatmap_and_compare() {
    let app = app(ServiceConfig::default());
    let id = create(&app, 4, 4, "d.csv", THREE).await;
    let (status, map) = send_json(&app, get(&format!("/sessions/{id}/clusters/4/heatmap"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(map["size"], 3);
    for bin in 0..4 {
        let col: f64 = (0..4).map(|l| map["cells"][l][bin].as_f64().unwrap()).sum::<f64>()
            + map["gap"][bin].as_f64().unwrap();
        assert!((col - 1.0).abs() < 1e-12);
    }
    let (_, cached) = send_json(&app, get(&format!("/sessions/{id}/clusters/4/heatmap"))).await;
    assert_eq!(cached, map);

    let uri = format!("/sessions/{id}/compare");
    let (status, same) = send_json(&app, post_json(&uri, json!({"a": "4", "b": "4", "mode": "percent"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert!(same["diff"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).all(|x| x == 0.0));

    let (status, counts) = send_json(&app, post_json(&uri, json!({"a": 0, "b": "2", "mode": "counts"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(counts["mode"], "counts");
    assert_eq!((counts["size_a"].clone(), counts["size_b"].clone()), (json!(1), json!(1)));

    let (status, body) = send_json(&app, post_json(&uri, json!({"a": "4", "b": "4", "mode": "foo"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    let (status, _) = send_json(&app, post_json(&uri, json!({"a": "4", "b": "42", "mode": "counts"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = send_json(&app, post_json(&uri, json!({"a": "4"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

async fn words(app: &axum::Router, id: &str, root: &str) -> Vec<(String, String)> {
    let (_, detail) = send_json(app, get(&format!("/sessions/{id}/clusters/{root}"))).await;
    detail["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| (m["id"].as_str().unwrap().to_string(), m["word"].as_str().unwrap().to_string()))
        .collect()
}

#[tokio::test]
async fn query_matches_naive_scan() {
    let app = app(ServiceConfig::default());
    let csv = synthetic_csv(150, 11);
    let id = create(&app, 4, 16, "d.csv", &csv).await;
    let (_, tree) = send_json(&app, get(&format!("/sessions/{id}/tree"))).await;
    let root = tree["id"].as_str().unwrap().to_string();
    let corpus = words(&app, &id, &root).await;

    let sketches = [
        json!([[0], [1], [2], [1], [0]]),
        json!([[3], [3]]),
        json!([[0, 1], [], [2, 3]]),
        json!([[3], [2], [1]]),
    ];
    for columns in sketches {
        let cols: Vec<Vec<usize>> = serde_json::from_value(columns.clone()).unwrap();
        let (status, result) = send_json(
            &app,
            post_json(&format!("/sessions/{id}/query"), json!({"type": "sketch", "columns": columns})),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        let got: BTreeSet<String> = serde_json::from_value(result["matched_ids"].clone()).unwrap();
        let want: BTreeSet<String> = corpus
            .iter()
            .filter(|(_, w)| naive_contains(w, &cols, 4))
            .map(|(id, _)| id.clone())
            .collect();
        assert_eq!(got, want);

        let mut expected_nodes = BTreeSet::new();
        for sid in &want {
            let (_, s) = send_json(&app, get(&format!("/sessions/{id}/series/{sid}"))).await;
            for n in s["path"].as_array().unwrap() {
                expected_nodes.insert(n.as_str().unwrap().to_string());
            }
        }
        let highlight: BTreeSet<String> = serde_json::from_value(result["highlight_nodes"].clone()).unwrap();
        assert_eq!(highlight, expected_nodes);
    }
}

#[tokio::test]
async fn query_errors_and_id_lookup() {
    let app = app(ServiceConfig::default());
    let id = create(&app, 4, 4, "d.csv", THREE).await;
    let uri = format!("/sessions/{id}/query");
    let (status, found) = send_json(&app, post_json(&uri, json!({"type": "id", "id": "c"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(found["matched_ids"], json!(["c"]));
    assert_eq!(found["highlight_nodes"], json!(["2", "4"]));

    let (status, _) = send_json(&app, post_json(&uri, json!({"type": "id", "id": "zz"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    for bad in [
        json!({"type": "sketch", "columns": []}),
        json!({"type": "sketch", "columns": [[7]]}),
        json!({"type": "regex", "pattern": "a"}),
    ] {
        let (status, body) = send_json(&app, post_json(&uri, bad.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad} -> {body}");
    }
}

#[tokio::test]
async fn json_upload_with_metadata() {
    let data = br#"[
        {"id": "x", "t": [0, 1, 2, 3], "v": [0, 1, 0, 1]},
        {"id": "y", "t": [0, 1, 2, 3], "v": [3, 2, 1, 0]},
        {"id": "z", "t": [0, 1, 2, 3], "v": [1, 1, 2, 2]}
    ]"#;
    let body = multipart(
        &[("alpha", "3"), ("omega", "4"), ("metadata", "series_id,key,value\nx,site,north\n")],
        Some(("series.json", data)),
    );
    let request = axum::http::Request::post("/sessions")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(axum::body::Body::from(body))
        .unwrap();
    let app = app(ServiceConfig::default());
    let (status, created) = send_json(&app, request).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    let id = created["id"].as_str().unwrap();
    let (_, x) = send_json(&app, get(&format!("/sessions/{id}/series/x"))).await;
    assert_eq!(x["metadata"], json!({"site": "north"}));
}

#[tokio::test]
async fn tree_json_is_deterministic() {
    let app = app(ServiceConfig::default());
    let csv = synthetic_csv(240, 5);
    let a = create(&app, 5, 12, "d.csv", &csv).await;
    let b = create(&app, 5, 12, "d.csv", &csv).await;
    assert_ne!(a, b);
    let (_, ta) = send(&app, get(&format!("/sessions/{a}/tree"))).await;
    let (_, tb) = send(&app, get(&format!("/sessions/{b}/tree"))).await;
    assert_eq!(ta, tb);
    let other = common::app(ServiceConfig::default());
    let c = create(&other, 5, 12, "d.csv", &csv).await;
    let (_, tc) = send(&other, get(&format!("/sessions/{c}/tree"))).await;
    assert_eq!(ta, tc);
    let _: Value = serde_json::from_slice(&ta).unwrap();
}

#[tokio::test]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        cache_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    };
    let first = app(config.clone());
    let id = create(&first, 4, 16, "d.csv", &synthetic_csv(120, 2)).await;
    let (_, tree) = send_json(&first, get(&format!("/sessions/{id}/tree"))).await;
    let mut nodes = Vec::new();
    collect_nodes(&tree, &mut nodes);
    let collapsed = nodes.iter().find(|n| n["collapsed"] == true).unwrap()["id"].as_str().unwrap().to_string();
    let (_, expanded) = send(&first, post_empty(&format!("/sessions/{id}/tree/{collapsed}/expand"))).await;
    drop(first);

    let second = app(config);
    let (status, restored) = send(&second, get(&format!("/sessions/{id}/tree"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(restored, expanded);
}
