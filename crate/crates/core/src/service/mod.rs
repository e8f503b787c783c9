//! HTTP/JSON front end over a persisted [`Study`].

mod error;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::analytics::{report_from_dataset, ReportOptions};
use crate::clock::{Clock, SystemClock};
use crate::dreyfus::{dreyfus_label, DreyfusLevel};
use crate::recommender::CatalogEntry;
use crate::steering::{Group, HistoryPoint, SteeringStep};
use crate::study::{
    export_dataset, FlowState, LearnerState, QuestionnaireResponse, Screen, Study, StudyConfig,
    PRACTICE_PAGE_EXPLAINER,
};

pub use error::{ApiError, ErrorBody};
pub use store::{read_log_file, Store, StoreError, CONFIG_FILE, EVENTS_FILE, SNAPSHOT_FILE};

pub const ADMIN_TOKEN_HEADER: &str = "x-admin-token";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApiConfig {
    pub bind: SocketAddr,
    pub data_dir: PathBuf,
    /// Origins allowed to call the API from a browser.
    pub cors_allow: Vec<String>,
    /// Token for `/admin` routes; admin routes are refused when unset.
    pub admin_token: Option<String>,
    /// Records between snapshots; 0 disables snapshots.
    pub snapshot_every: u64,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("data"),
            cors_allow: Vec::new(),
            admin_token: None,
            snapshot_every: 500,
        }
    }
}

/// Contents of the `serve` config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub service: ApiConfig,
    pub study: StudyConfig,
}

struct Inner {
    study: Study,
    store: Store,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Mutex<Inner>>,
    admin_token: Option<Arc<str>>,
}

impl AppState {
    pub fn open(config: &ServeConfig) -> Result<Self, StoreError> {
        Self::open_with_clock(config, Arc::new(SystemClock))
    }

    pub fn open_with_clock(config: &ServeConfig, clock: Arc<dyn Clock>) -> Result<Self, StoreError> {
        let (store, study) = Store::open(
            &config.service.data_dir,
            config.study.clone(),
            clock,
            config.service.snapshot_every,
        )?;
        Ok(AppState {
            inner: Arc::new(Mutex::new(Inner { study, store })),
            admin_token: config.service.admin_token.as_deref().map(Arc::from),
        })
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // A panic mid-request leaves the study as it was before the command.
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Runs a command and persists whatever it logged, even on failure.
    fn command<T>(&self, f: impl FnOnce(&mut Study) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let mut guard = self.lock();
        let inner = &mut *guard;
        let out = f(&mut inner.study);
        if let Err(e) = inner.store.persist(&inner.study) {
            tracing::error!("persisting events failed: {e}");
            return Err(ApiError::internal(e.to_string()));
        }
        out
    }

    fn read<T>(&self, f: impl FnOnce(&Study) -> Result<T, ApiError>) -> Result<T, ApiError> {
        f(&self.lock().study)
    }

    /// Copy of the current study state, for tests and tooling.
    pub fn snapshot_state(&self) -> crate::study::StudyState {
        self.lock().study.state().clone()
    }

    pub fn write_snapshot(&self) -> Result<(), StoreError> {
        let mut guard = self.lock();
        let inner = &mut *guard;
        inner.store.snapshot(&inner.study)
    }
}

pub fn router(state: AppState, cors_allow: &[String]) -> Router {
    let app = Router::new()
        .route("/learners", post(register))
        .route("/learners/{id}", get(learner))
        .route("/learners/{id}/mastery", post(mastery))
        .route("/learners/{id}/explanation", post(explanation))
        .route("/learners/{id}/screens", get(screens))
        .route("/learners/{id}/series", get(series))
        .route("/learners/{id}/attempts", post(attempt))
        .route("/learners/{id}/steer", post(steer))
        .route("/learners/{id}/impact/ack", post(impact_ack))
        .route("/learners/{id}/history", get(history))
        .route("/learners/{id}/questionnaire", post(questionnaire))
        .route("/study/report", get(report))
        .route("/admin/catalog", post(admin_catalog))
        .with_state(state);
    if cors_allow.is_empty() {
        return app;
    }
    let origins: Vec<HeaderValue> = cors_allow
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    app.layer(
        CorsLayer::new()
            .allow_origin(AllowOrigin::list(origins))
            .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
            .allow_headers([header::CONTENT_TYPE, header::HeaderName::from_static(ADMIN_TOKEN_HEADER)]),
    )
}

pub async fn serve(config: ServeConfig) -> anyhow::Result<()> {
    let state = AppState::open(&config)?;
    let app = router(state.clone(), &config.service.cors_allow);
    let listener = tokio::net::TcpListener::bind(config.service.bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    state.write_snapshot()?;
    Ok(())
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

// ----- views -----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerView {
    pub id: String,
    pub group: Group,
    pub state: String,
    pub flow: FlowState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<DreyfusLevel>,
    pub can_steer: bool,
    pub sees_impact: bool,
}

impl From<&LearnerState> for LearnerView {
    fn from(l: &LearnerState) -> Self {
        let rating = l.profile.rating().ok().map(|r| r.value());
        LearnerView {
            id: l.profile.id.clone(),
            group: l.profile.group,
            state: l.state.to_string(),
            flow: l.state,
            rating,
            level: rating.map(dreyfus_label),
            can_steer: l.profile.group.can_steer(),
            sees_impact: l.profile.group.sees_impact(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasteryRequest {
    pub slider_position: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreensView {
    pub group: Group,
    pub screens: Vec<Screen>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesQuery {
    pub topic: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesExercise {
    pub id: String,
    pub statement: String,
    pub choices: Vec<String>,
    pub expected_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesView {
    pub learner_id: String,
    /// 0 for series after the study proper.
    pub series_index: u32,
    pub topic: String,
    pub explainer: String,
    pub exercises: Vec<SeriesExercise>,
    pub learner: LearnerView,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptRequest {
    pub exercise_id: String,
    pub answer_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptView {
    pub exercise_id: String,
    pub correct: bool,
    pub correct_index: usize,
    pub expected_probability: f64,
    pub delta: f64,
    pub learner_pre: f64,
    pub learner_post: f64,
    pub exercise_pre: f64,
    pub exercise_post: f64,
    pub learner: LearnerView,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteerRequest {
    pub step: SteeringStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteerView {
    pub step: SteeringStep,
    pub pre: f64,
    pub post: f64,
    pub learner: LearnerView,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportQuery {
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub welch: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestView {
    pub ingested: usize,
    pub catalog_size: usize,
}

fn view(study: &Study, id: &str) -> Result<LearnerView, ApiError> {
    Ok(study.learner(id)?.into())
}

// ----- handlers -----

async fn register(State(app): State<AppState>) -> Result<(StatusCode, Json<LearnerView>), ApiError> {
    let v = app.command(|s| Ok(LearnerView::from(s.register()?)))?;
    Ok((StatusCode::CREATED, Json(v)))
}

async fn learner(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<LearnerView>, ApiError> {
    app.read(|s| view(s, &id)).map(Json)
}

async fn mastery(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<MasteryRequest>, JsonRejection>,
) -> Result<Json<LearnerView>, ApiError> {
    let req = body(payload)?;
    app.command(|s| {
        s.initialize_mastery(&id, req.slider_position)?;
        view(s, &id)
    })
    .map(Json)
}

async fn explanation(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<LearnerView>, ApiError> {
    app.command(|s| {
        s.acknowledge_explanation(&id)?;
        view(s, &id)
    })
    .map(Json)
}

async fn screens(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<ScreensView>, ApiError> {
    app.read(|s| {
        Ok(ScreensView {
            group: s.learner(&id)?.profile.group,
            screens: s.screens(&id)?,
        })
    })
    .map(Json)
}

async fn series(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SeriesQuery>,
) -> Result<Json<SeriesView>, ApiError> {
    app.command(|s| {
        let rec = s.start_series(&id, q.topic.as_deref())?;
        let exercises = rec
            .exercises
            .iter()
            .zip(&rec.expected_probabilities)
            .map(|(ex_id, p)| {
                let ex = s.catalog().get(ex_id).expect("series drawn from catalog");
                SeriesExercise {
                    id: ex.id.clone(),
                    statement: ex.statement.clone(),
                    choices: ex.choices.clone(),
                    expected_probability: *p,
                }
            })
            .collect();
        let learner = s.learner(&id)?;
        Ok(SeriesView {
            learner_id: id.clone(),
            series_index: learner.active_series.as_ref().map_or(0, |a| a.series_index),
            topic: rec.topic,
            explainer: PRACTICE_PAGE_EXPLAINER.to_string(),
            exercises,
            learner: learner.into(),
        })
    })
    .map(Json)
}

async fn attempt(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<AttemptRequest>, JsonRejection>,
) -> Result<Json<AttemptView>, ApiError> {
    let req = body(payload)?;
    app.command(|s| {
        let rec = s.attempt(&id, &req.exercise_id, req.answer_index)?;
        let correct_index = s
            .catalog()
            .get(&rec.exercise_id)
            .expect("attempted exercise exists")
            .correct_index;
        Ok(AttemptView {
            exercise_id: rec.exercise_id,
            correct: rec.correct,
            correct_index,
            expected_probability: rec.expected_probability,
            delta: rec.delta,
            learner_pre: rec.learner_pre.value(),
            learner_post: rec.learner_post.value(),
            exercise_pre: rec.exercise_pre.value(),
            exercise_post: rec.exercise_post.value(),
            learner: view(s, &id)?,
        })
    })
    .map(Json)
}

async fn steer(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<SteerRequest>, JsonRejection>,
) -> Result<Json<SteerView>, ApiError> {
    let req = body(payload)?;
    app.command(|s| {
        let point = s.steer(&id, req.step)?;
        Ok(SteerView {
            step: req.step,
            pre: point.pre_rating,
            post: point.post_rating,
            learner: view(s, &id)?,
        })
    })
    .map(Json)
}

async fn impact_ack(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<LearnerView>, ApiError> {
    app.command(|s| {
        s.acknowledge_impact(&id)?;
        view(s, &id)
    })
    .map(Json)
}

async fn history(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Vec<HistoryPoint>>, ApiError> {
    app.read(|s| Ok(s.history(&id)?)).map(Json)
}

async fn questionnaire(
    State(app): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<QuestionnaireResponse>, JsonRejection>,
) -> Result<Json<LearnerView>, ApiError> {
    let response = body(payload)?;
    app.command(|s| {
        s.submit_questionnaire(&id, response)?;
        view(s, &id)
    })
    .map(Json)
}

async fn report(State(app): State<AppState>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let records = {
        let guard = app.lock();
        guard
            .store
            .read_log()
            .map_err(|e| ApiError::internal(e.to_string()))?
    };
    let rows = export_dataset(&records)?;
    let opts = ReportOptions {
        welch: q.welch.unwrap_or(false),
    };
    let report = report_from_dataset(&rows, opts)?;
    Ok(match q.format.as_deref() {
        None | Some("json") => Json(report).into_response(),
        Some("text") => report.to_text().into_response(),
        Some("jsonl") => report.to_jsonl().into_response(),
        Some(other) => {
            return Err(ApiError::bad_request(format!(
                "unknown format {other:?}; use json, jsonl or text"
            )))
        }
    })
}

async fn admin_catalog(
    State(app): State<AppState>,
    headers: HeaderMap,
    payload: Result<Json<Vec<CatalogEntry>>, JsonRejection>,
) -> Result<Json<IngestView>, ApiError> {
    let presented = headers.get(ADMIN_TOKEN_HEADER).and_then(|v| v.to_str().ok());
    match (&app.admin_token, presented) {
        (Some(expected), Some(got)) if expected.as_ref() == got => {}
        _ => return Err(ApiError::unauthorized()),
    }
    let entries = body(payload)?;
    app.command(|s| {
        let ingested = s.ingest_catalog(entries)?;
        Ok(IngestView {
            ingested,
            catalog_size: s.catalog().len(),
        })
    })
    .map(Json)
}
