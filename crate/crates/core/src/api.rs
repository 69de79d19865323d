//! Read-only HTTP facade over a loaded model and mounted portfolio outputs.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::estimate::{estimate, EstimateError, EstimateRequest};
use crate::model::{BareHomeModel, DwellingGroup};
use crate::portfolio::{heatmap_file_name, METRICS};

#[derive(Debug, Clone)]
pub struct AppState {
    pub model: Arc<BareHomeModel>,
    /// Directory holding `heatmap_<metric>.json` files.
    pub portfolio_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct ApiConfig {
    /// Allowed UI origins; `*` allows any. Empty disables CORS headers.
    pub cors_origins: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn fail(status: StatusCode, code: &str, message: impl Into<String>, path: Option<String>) -> Response {
    (status, Json(ApiError { error: code.to_string(), message: message.into(), path })).into_response()
}

pub fn router(state: AppState, config: &ApiConfig) -> Router {
    let r = Router::new()
        .route("/health", get(health))
        .route("/model", get(model_info))
        .route("/estimate", post(post_estimate))
        .route("/boroughs", get(boroughs))
        .with_state(state);
    match cors_layer(config) {
        Some(c) => r.layer(c),
        None => r,
    }
}

fn cors_layer(config: &ApiConfig) -> Option<CorsLayer> {
    if config.cors_origins.is_empty() {
        return None;
    }
    let origin = if config.cors_origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(config.cors_origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    Some(
        CorsLayer::new()
            .allow_origin(origin)
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([header::CONTENT_TYPE]),
    )
}

async fn health(State(s): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "model_version": s.model.model_version }))
}

async fn model_info(State(s): State<AppState>) -> Response {
    let m = &s.model;
    let fit = &m.fit;
    let coefficients: Vec<_> = (0..fit.columns.len())
        .map(|i| {
            json!({
                "name": fit.columns[i],
                "coef": fit.coef[i],
                "stderr": fit.stderr[i],
                "t": fit.t[i],
                "p": fit.p[i],
                "ci_low": fit.ci_low[i],
                "ci_high": fit.ci_high[i],
            })
        })
        .collect();
    let factor = |g| m.rescale.factor(g).ok();
    Json(json!({
        "model_version": m.model_version,
        "basis": m.basis,
        "checksum": m.checksum,
        "unit": "kWh/month",
        "coefficients": coefficients,
        "residual_variance": fit.residual_variance,
        "n_obs": fit.n_obs,
        "r_squared": fit.r_squared,
        "cv": m.cv,
        "height_means": m.height_means,
        "rescale": m.rescale,
        "rescale_factors": { "house": factor(DwellingGroup::House), "other": factor(DwellingGroup::Other) },
        "provenance": m.provenance,
    }))
    .into_response()
}

async fn post_estimate(State(s): State<AppState>, body: Bytes) -> Response {
    let de = &mut serde_json::Deserializer::from_slice(&body);
    let req: EstimateRequest = match serde_path_to_error::deserialize(de) {
        Ok(r) => r,
        Err(e) => {
            let path = e.path().to_string();
            return fail(StatusCode::BAD_REQUEST, "schema", e.into_inner().to_string(), Some(path));
        }
    };
    let model = s.model.clone();
    let out = tokio::task::spawn_blocking(move || estimate(&req, Some(&model))).await;
    match out {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(EstimateError::Invalid { field, message })) => {
            fail(StatusCode::UNPROCESSABLE_ENTITY, "domain", message, Some(field))
        }
        Ok(Err(e)) => fail(StatusCode::UNPROCESSABLE_ENTITY, "domain", e.to_string(), None),
        Err(e) => fail(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string(), None),
    }
}

#[derive(Debug, Deserialize)]
struct BoroughQuery {
    metric: Option<String>,
}

async fn boroughs(State(s): State<AppState>, Query(q): Query<BoroughQuery>) -> Response {
    let Some(dir) = &s.portfolio_dir else {
        return fail(
            StatusCode::NOT_FOUND,
            "no_portfolio",
            "no portfolio outputs are mounted; run `retrofit portfolio` and start the server with --portfolio <dir>",
            None,
        );
    };
    let metric = q.metric.unwrap_or_else(|| "energy".into());
    if !METRICS.contains(&metric.as_str()) {
        return fail(
            StatusCode::BAD_REQUEST,
            "unknown_metric",
            format!("unknown metric {metric:?}; valid metrics: {}", METRICS.join(", ")),
            Some("metric".into()),
        );
    }
    let path = dir.join(heatmap_file_name(&metric));
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(_) => fail(
            StatusCode::NOT_FOUND,
            "no_portfolio",
            format!("{} is not present in the mounted portfolio directory", heatmap_file_name(&metric)),
            None,
        ),
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: AppState, config: ApiConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state, &config)).await
}
