use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use scha_service::{router, Store};
use scha_testkit::fixtures;

struct Reply {
    status: StatusCode,
    etag: Option<String>,
    content_type: Option<String>,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

async fn send(app: &Router, method: &str, uri: &str, if_match: Option<&str>, body: &str) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(tag) = if_match {
        req = req.header(header::IF_MATCH, tag);
    }
    let resp = app
        .clone()
        .oneshot(req.body(Body::from(body.to_string())).unwrap())
        .await
        .unwrap();
    let (parts, body) = resp.into_parts();
    let header = |name| parts.headers.get(name).map(|v| v.to_str().unwrap().to_string());
    let (etag, content_type) = (header(header::ETAG), header(header::CONTENT_TYPE));
    let bytes = body.collect().await.unwrap().to_bytes();
    Reply {
        status: parts.status,
        etag,
        content_type,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

fn app() -> (tempfile::TempDir, Router) {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Store::new(dir.path()));
    (dir, app)
}

#[tokio::test]
async fn create_read_update() {
    let (dir, app) = app();
    let created = send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await;
    assert_eq!(created.status, StatusCode::CREATED);
    let etag = created.etag.clone().unwrap();
    assert!(dir.path().join("a.scha.json").is_file());

    let read = send(&app, "GET", "/api/analyses/a", None, "").await;
    assert_eq!(read.status, StatusCode::OK);
    assert_eq!(read.body, fixtures::FIXTURE_A);
    assert_eq!(read.etag.as_deref(), Some(etag.as_str()));

    let mut doc = read.json();
    doc["meta"]["title"] = "Renamed".into();
    let updated = send(&app, "PUT", "/api/analyses/a", Some(&etag), &doc.to_string()).await;
    assert_eq!(updated.status, StatusCode::OK);
    assert_ne!(updated.etag.as_ref(), Some(&etag));

    // the old tag is now stale
    let stale = send(&app, "PUT", "/api/analyses/a", Some(&etag), fixtures::FIXTURE_A).await;
    assert_eq!(stale.status, StatusCode::CONFLICT);
    assert_eq!(stale.json()["code"], "E_STALE");

    let list = send(&app, "GET", "/api/analyses", None, "").await.json();
    assert_eq!(list[0]["id"], "a");
    assert_eq!(list[0]["meta"]["title"], "Renamed");
    assert_eq!(list[0]["nv"], 5);
    assert_eq!(list[0]["maxDepth"], 3);
}

#[tokio::test]
async fn same_content_same_etag() {
    let (_dir, app) = app();
    let first = send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await;
    // a non-canonical spelling of the same document
    let compact = serde_json::to_string(&serde_json::from_str::<Value>(fixtures::FIXTURE_A).unwrap()).unwrap();
    let second = send(&app, "PUT", "/api/analyses/b", None, &compact).await;
    assert_eq!(first.etag, second.etag);
}

#[tokio::test]
async fn preconditions() {
    let (_dir, app) = app();
    send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await;
    let no_tag = send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await;
    assert_eq!(no_tag.status, StatusCode::PRECONDITION_REQUIRED);
    let missing = send(&app, "PUT", "/api/analyses/new", Some("\"abc\""), fixtures::FIXTURE_A).await;
    assert_eq!(missing.status, StatusCode::CONFLICT);
    let wildcard = send(&app, "PUT", "/api/analyses/a", Some("*"), fixtures::FIXTURE_B).await;
    assert_eq!(wildcard.status, StatusCode::OK);
}

#[tokio::test]
async fn invalid_documents() {
    let (dir, app) = app();
    let malformed = send(&app, "PUT", "/api/analyses/a", None, "{not json").await;
    assert_eq!(malformed.status, StatusCode::BAD_REQUEST);
    assert_eq!(malformed.json()["code"], "E_SYNTAX");

    let bad_length = send(&app, "PUT", "/api/analyses/a", None, fixtures::BAD_LENGTH).await;
    assert_eq!(bad_length.status, StatusCode::UNPROCESSABLE_ENTITY);
    let body = bad_length.json();
    assert_eq!(body["code"], "E_LENGTH");
    assert_eq!(body["findings"][0]["code"], "E_LENGTH");

    let infeasible = r#"{"voices": {"soprano": {"pitches": ["C5", "D5"], "depths": [0, 0]}}}"#;
    let rejected = send(&app, "PUT", "/api/analyses/a", None, infeasible).await;
    assert_eq!(rejected.status, StatusCode::UNPROCESSABLE_ENTITY);
    let body = rejected.json();
    assert_eq!(body["code"], "E_VALIDATION");
    assert_eq!(body["findings"][0]["code"], "V_NO_SURVIVOR");
    assert_eq!(body["findings"][0]["severity"], "error");

    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "nothing written");

    let bad_id = send(&app, "PUT", "/api/analyses/..evil", None, fixtures::FIXTURE_A).await;
    assert_eq!(bad_id.status, StatusCode::BAD_REQUEST);
    assert_eq!(send(&app, "GET", "/api/analyses/nope", None, "").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn warnings_do_not_block() {
    let (_dir, app) = app();
    let created = send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await;
    assert_eq!(created.status, StatusCode::CREATED);
    assert_eq!(created.json()["findings"][0]["code"], "W_NO_URSATZ");
}

#[tokio::test]
async fn validate_endpoint() {
    let (_dir, app) = app();
    send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_B).await;
    let stored = send(&app, "POST", "/api/analyses/a/validate", None, "").await;
    assert_eq!(stored.status, StatusCode::OK);
    assert_eq!(stored.json()["findings"], serde_json::json!([]));

    let draft = r#"{"voices": {"soprano": {"pitches": ["C5", "D5"], "depths": [0, 0]}}}"#;
    let report = send(&app, "POST", "/api/analyses/a/validate", None, draft).await.json();
    assert_eq!(report["findings"][0]["code"], "V_NO_SURVIVOR");

    let parse_error = send(&app, "POST", "/api/analyses/a/validate", None, fixtures::BAD_LENGTH).await;
    assert_eq!(parse_error.json()["findings"][0]["code"], "E_LENGTH");
}

#[tokio::test]
async fn derived_views() {
    let (_dir, app) = app();
    let tag = send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await.etag;

    let clusters = send(&app, "GET", "/api/analyses/a/derived/clusters", None, "").await;
    assert_eq!(clusters.etag, tag);
    let body = clusters.json();
    assert_eq!(body["shapes"], serde_json::json!([[5, 4], [4, 3], [3, 2]]));
    let layers = body["layers"].as_array().unwrap();
    assert_eq!(layers.len(), 3);
    assert_eq!(layers[2]["colLabels"], serde_json::json!(["sop:0", "sop:4"]));

    let prolongations = send(&app, "GET", "/api/analyses/a/derived/prolongations", None, "").await.json();
    assert_eq!(
        prolongations["kirlin"],
        "sop:1 ( sop:2 ) sop:3\nsop:0 ( sop:1 sop:2 ) sop:3\nsop:0 ( sop:1 sop:2 sop:3 ) sop:4\n"
    );

    let graph = send(&app, "GET", "/api/analyses/a/derived/graph", None, "").await;
    assert_eq!(graph.json()["nodes"].as_array().unwrap().len(), 5);
    let dot = send(&app, "GET", "/api/analyses/a/derived/graph?format=dot", None, "").await;
    assert!(dot.body.starts_with("digraph"));

    let svg = send(&app, "GET", "/api/analyses/a/derived/render", None, "").await;
    assert_eq!(svg.content_type.as_deref(), Some("image/svg+xml"));
    assert_eq!(svg.body.matches(r#"class="notehead""#).count(), 5);
    let again = send(&app, "GET", "/api/analyses/a/derived/render", None, "").await;
    assert_eq!(svg.body, again.body);

    let model = send(&app, "GET", "/api/analyses/a/derived/render?format=json", None, "").await.json();
    assert_eq!(model["voices"][0]["beams"].as_array().unwrap().len(), 3);

    assert_eq!(send(&app, "GET", "/api/analyses/a/derived/mop", None, "").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn corpus_stats() {
    let (_dir, app) = app();
    send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await;
    send(&app, "PUT", "/api/analyses/b", None, fixtures::FIXTURE_B).await;
    let stats = send(&app, "GET", "/api/corpus/stats", None, "").await.json();
    assert_eq!(stats["excerpts"], 2);
    assert_eq!(stats["notes"], 12);
    assert_eq!(stats["depths"]["inclusive"]["0"], 12);
    assert_eq!(stats["intervals"]["treble"]["0"]["2"], 2);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writers_one_conflict() {
    let (_dir, app) = app();
    let tag = send(&app, "PUT", "/api/analyses/a", None, fixtures::FIXTURE_A).await.etag.unwrap();
    let mut edited = serde_json::from_str::<Value>(fixtures::FIXTURE_A).unwrap();
    let writers: Vec<_> = ["one", "two"]
        .into_iter()
        .map(|title| {
            edited["meta"]["title"] = title.into();
            let (app, tag, body) = (app.clone(), tag.clone(), edited.to_string());
            tokio::spawn(async move { send(&app, "PUT", "/api/analyses/a", Some(&tag), &body).await.status })
        })
        .collect();
    let mut statuses = Vec::new();
    for w in writers {
        statuses.push(w.await.unwrap());
    }
    statuses.sort();
    assert_eq!(statuses, vec![StatusCode::OK, StatusCode::CONFLICT]);
}

#[tokio::test]
async fn cors_preflight() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Store::new(dir.path())).layer(scha_service::cors_layer("http://localhost:5173").unwrap());
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/api/analyses/a")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "PUT")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(
        resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap(),
        "http://localhost:5173"
    );
}
