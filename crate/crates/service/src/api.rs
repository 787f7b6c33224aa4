//! Route handlers and the JSON error body.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};

use scha_core::graph::{build_graph, export_graph, GraphConfig, GraphFormat};
use scha_core::reduction::{all_prolongations, cluster_stack, export_kirlin_text, ClusterOptions};
use scha_core::render::{derive_render_model, render_svg};
use scha_core::stats::CorpusStats;
use scha_core::validate::{Finding, ValidationReport};
use scha_core::{format, validate, Analysis};

use crate::store::{PutOutcome, Store, StoreError, Stored};

pub type AppState = Arc<Store>;

/// Error body: `{code, message, findings?}`.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    code: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    findings: Option<Vec<Finding>>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            findings: None,
        }
    }

    fn with_findings(mut self, findings: Vec<Finding>) -> Self {
        self.findings = Some(findings);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::Id(_) => ApiError::new(StatusCode::BAD_REQUEST, "E_ID", message),
            StoreError::NotFound { .. } => ApiError::new(StatusCode::NOT_FOUND, "E_NOT_FOUND", message),
            StoreError::Stale { .. } | StoreError::Vanished { .. } => {
                ApiError::new(StatusCode::CONFLICT, "E_STALE", message)
            }
            StoreError::PreconditionRequired { .. } => {
                ApiError::new(StatusCode::PRECONDITION_REQUIRED, "E_PRECONDITION", message)
            }
            StoreError::Corrupt { ref source, .. } => {
                let finding = parse_finding(source);
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "E_CORRUPT", message).with_findings(vec![finding])
            }
            StoreError::Io(_) => {
                log::error!("{message}");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "E_IO", message)
            }
        }
    }
}

fn parse_finding(e: &format::ParseError) -> Finding {
    Finding::error(e.code(), e.location(), e.message())
}

fn etag_header(stored: &Stored) -> [(header::HeaderName, HeaderValue); 1] {
    let value = HeaderValue::from_str(&stored.etag).expect("hex etag is a valid header");
    [(header::ETAG, value)]
}

fn json_body(body: String) -> ([(header::HeaderName, HeaderValue); 1], String) {
    ([(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], body)
}

fn lenient(query: &HashMap<String, String>) -> bool {
    query.get("lenient").is_some_and(|v| v == "true" || v == "1")
}

/// Parses a request body, separating malformed JSON (400) from documents
/// that break the format rules (422).
fn parse_body(body: &[u8]) -> Result<Analysis, ApiError> {
    let text = std::str::from_utf8(body)
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "E_SYNTAX", "body is not UTF-8"))?;
    if let Err(e) = serde_json::from_str::<Value>(text) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "E_SYNTAX", format!("malformed JSON: {e}")));
    }
    format::parse(text).map_err(|e| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string()).with_findings(vec![parse_finding(&e)])
    })
}

pub async fn list(State(store): State<AppState>) -> Result<Response, ApiError> {
    let entries: Vec<Value> = store
        .all()
        .await?
        .into_iter()
        .map(|s| {
            json!({
                "id": s.id,
                "meta": s.analysis.meta,
                "nv": s.analysis.nv(),
                "maxDepth": s.analysis.max_depth(),
            })
        })
        .collect();
    Ok(Json(entries).into_response())
}

pub async fn get_document(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let stored = store.get(&id).await?;
    Ok((etag_header(&stored), json_body(stored.canonical)).into_response())
}

pub async fn put_document(
    State(store): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let if_match = match headers.get(header::IF_MATCH) {
        Some(v) => Some(
            v.to_str()
                .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "E_HEADER", "If-Match is not ASCII"))?,
        ),
        None => None,
    };
    let analysis = parse_body(&body)?;
    let report = validate(&analysis, false);
    if report.has_errors() {
        let n = report.errors().count();
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "E_VALIDATION",
            format!("{n} validation error(s)"),
        )
        .with_findings(report.findings));
    }
    let (outcome, stored) = store.put(&id, analysis, if_match).await?;
    let status = match outcome {
        PutOutcome::Created => StatusCode::CREATED,
        PutOutcome::Updated => StatusCode::OK,
    };
    let body = json!({
        "id": stored.id,
        "etag": stored.etag,
        "findings": report.findings,
    });
    Ok((status, etag_header(&stored), Json(body)).into_response())
}

/// Validates the request body if there is one, the stored document otherwise.
pub async fn validate_document(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
    body: Bytes,
) -> Result<Json<ValidationReport>, ApiError> {
    let analysis = if body.iter().all(u8::is_ascii_whitespace) {
        store.get(&id).await?.analysis
    } else {
        match parse_body(&body) {
            Ok(a) => a,
            Err(ApiError { findings: Some(findings), .. }) => return Ok(Json(ValidationReport { findings })),
            Err(e) => return Err(e),
        }
    };
    Ok(Json(validate(&analysis, lenient(&query))))
}

pub async fn derived(
    State(store): State<AppState>,
    Path((id, kind)): Path<(String, String)>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let stored = store.get(&id).await?;
    let a = &stored.analysis;
    let tag = etag_header(&stored);
    let response = match kind.as_str() {
        "clusters" => {
            let options = ClusterOptions { lenient: lenient(&query) };
            let stack = cluster_stack(a, options).map_err(|e| {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())
                    .with_findings(validate(a, options.lenient).errors().cloned().collect())
            })?;
            let mut body = stack.to_json();
            body["shapes"] = json!(stack.shapes().iter().map(|&(r, c)| [r, c]).collect::<Vec<_>>());
            (tag, Json(body)).into_response()
        }
        "prolongations" => {
            let set = all_prolongations(a);
            let body = json!({
                "derived": set.derived,
                "custom": set.custom,
                "kirlin": export_kirlin_text(a),
            });
            (tag, Json(body)).into_response()
        }
        "graph" => {
            let format = match query.get("format").map(String::as_str) {
                None | Some("edgelist") => GraphFormat::EdgelistJson,
                Some("dot") => GraphFormat::Dot,
                Some(other) => {
                    return Err(ApiError::new(
                        StatusCode::BAD_REQUEST,
                        "E_FORMAT",
                        format!("unknown graph format {other:?}; use edgelist or dot"),
                    ))
                }
            };
            let text = export_graph(&build_graph(a, &GraphConfig::default()), format);
            let content_type = match format {
                GraphFormat::EdgelistJson => "application/json",
                GraphFormat::Dot => "text/vnd.graphviz",
            };
            (tag, [(header::CONTENT_TYPE, content_type)], text).into_response()
        }
        "render" => {
            let model = derive_render_model(a);
            if query.get("format").is_some_and(|f| f == "json") {
                (tag, Json(model)).into_response()
            } else {
                (tag, [(header::CONTENT_TYPE, "image/svg+xml")], render_svg(&model)).into_response()
            }
        }
        other => {
            return Err(ApiError::new(
                StatusCode::NOT_FOUND,
                "E_NOT_FOUND",
                format!("no derived view {other:?}; use clusters, prolongations, graph or render"),
            ))
        }
    };
    Ok(response)
}

pub async fn corpus_stats(State(store): State<AppState>) -> Result<Json<CorpusStats>, ApiError> {
    let stats = store
        .all()
        .await?
        .iter()
        .map(|s| CorpusStats::of(&s.analysis))
        .fold(CorpusStats::default(), CorpusStats::merge);
    Ok(Json(stats))
}
