use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticsError;
use crate::recommender::RecommendError;
use crate::steering::SteeringError;
use crate::study::{FlowState, StudyError};

/// JSON body of every error response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    /// Current flow state in display form, e.g. `PRACTISING(1,2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowState>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub flow: Option<FlowState>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            flow: None,
        }
    }

    pub fn with_flow(mut self, flow: Option<FlowState>) -> Self {
        self.flow = flow;
        self
    }

    pub fn unauthorized() -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong admin token")
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl From<StudyError> for ApiError {
    fn from(e: StudyError) -> Self {
        use StatusCode as S;
        let (status, code) = match &e {
            StudyError::Flow(_) => (S::CONFLICT, "flow_violation"),
            StudyError::UnknownLearner(_) => (S::NOT_FOUND, "unknown_learner"),
            StudyError::NoActiveSeries { .. } => (S::CONFLICT, "no_active_series"),
            StudyError::NotNextExercise { .. } => (S::CONFLICT, "not_next_exercise"),
            StudyError::MissingTopic => (S::UNPROCESSABLE_ENTITY, "missing_topic"),
            StudyError::Recommend(r) => match r {
                RecommendError::UnknownTopic(_) => (S::NOT_FOUND, "unknown_topic"),
                RecommendError::UnknownExercise(_) => (S::NOT_FOUND, "unknown_exercise"),
                RecommendError::InsufficientPool { .. } => (S::CONFLICT, "insufficient_pool"),
                RecommendError::DuplicateId(_) => (S::CONFLICT, "duplicate_exercise"),
                RecommendError::InvalidAnswer { .. } => (S::UNPROCESSABLE_ENTITY, "invalid_answer"),
                _ => (S::UNPROCESSABLE_ENTITY, "invalid_catalog"),
            },
            StudyError::Steering(s) => match s {
                SteeringError::ForbiddenControl { .. } => (S::FORBIDDEN, "forbidden_control"),
                SteeringError::AlreadyInitialized(_) | SteeringError::Uninitialized(_) => {
                    (S::CONFLICT, "flow_violation")
                }
                _ => (S::UNPROCESSABLE_ENTITY, "invalid_steering"),
            },
            StudyError::Questionnaire(_) => (S::UNPROCESSABLE_ENTITY, "invalid_questionnaire"),
            StudyError::InvalidConfig(_) => (S::INTERNAL_SERVER_ERROR, "invalid_config"),
            StudyError::Replay { .. } => (S::INTERNAL_SERVER_ERROR, "replay"),
        };
        ApiError::new(status, code, e.to_string()).with_flow(e.flow_state())
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        let code = match e {
            AnalyticsError::MissingGroup { .. } => "insufficient_data",
            _ => "analysis_failed",
        };
        ApiError::new(StatusCode::CONFLICT, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.code.to_string(),
            message: self.message,
            state: self.flow.map(|f| f.to_string()),
            flow: self.flow,
        };
        (self.status, Json(body)).into_response()
    }
}
