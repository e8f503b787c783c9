//! Per-learner study flow.
//!
//! ```text
//! REGISTERED -> MASTERY_SET -> EXPLAINED -> PRACTISING(1,1)
//!   series s: PRACTISING(s,1) .. PRACTISING(s,n)
//!             then AWAIT_STEER(s)        (control groups)
//!             then AWAIT_IMPACT_ACK(s)   (control+impact only)
//!   after the last series: QUESTIONNAIRE -> FREE_USE
//! ```
//!
//! `StartSeries` chooses the topic and composes a series. It is accepted
//! while no exercise of the current series has been answered, so a learner
//! can switch topic before starting.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::steering::Group;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum FlowState {
    Registered,
    MasterySet,
    Explained,
    /// 1-based series and exercise indices; `exercise` is the next to answer.
    Practising {
        series: u32,
        exercise: u32,
    },
    AwaitSteer {
        series: u32,
    },
    AwaitImpactAck {
        series: u32,
    },
    Questionnaire,
    FreeUse,
}

impl fmt::Display for FlowState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowState::Registered => f.write_str("REGISTERED"),
            FlowState::MasterySet => f.write_str("MASTERY_SET"),
            FlowState::Explained => f.write_str("EXPLAINED"),
            FlowState::Practising { series, exercise } => {
                write!(f, "PRACTISING({series},{exercise})")
            }
            FlowState::AwaitSteer { series } => write!(f, "AWAIT_STEER({series})"),
            FlowState::AwaitImpactAck { series } => write!(f, "AWAIT_IMPACT_ACK({series})"),
            FlowState::Questionnaire => f.write_str("QUESTIONNAIRE"),
            FlowState::FreeUse => f.write_str("FREE_USE"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowEvent {
    InitializeMastery,
    AcknowledgeExplanation,
    StartSeries,
    Attempt,
    Steer,
    AcknowledgeImpact,
    SubmitQuestionnaire,
}

impl FlowEvent {
    pub const ALL: [FlowEvent; 7] = [
        FlowEvent::InitializeMastery,
        FlowEvent::AcknowledgeExplanation,
        FlowEvent::StartSeries,
        FlowEvent::Attempt,
        FlowEvent::Steer,
        FlowEvent::AcknowledgeImpact,
        FlowEvent::SubmitQuestionnaire,
    ];
}

impl fmt::Display for FlowEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowEvent::InitializeMastery => "initialize_mastery",
            FlowEvent::AcknowledgeExplanation => "acknowledge_explanation",
            FlowEvent::StartSeries => "start_series",
            FlowEvent::Attempt => "attempt",
            FlowEvent::Steer => "steer",
            FlowEvent::AcknowledgeImpact => "acknowledge_impact",
            FlowEvent::SubmitQuestionnaire => "submit_questionnaire",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("event {event} is not allowed in state {state} for group {group}")]
pub struct FlowViolation {
    pub state: FlowState,
    pub event: FlowEvent,
    pub group: Group,
}

/// Shape of the study: how many series and how long each is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowShape {
    pub series_count: u32,
    pub series_size: u32,
}

impl FlowState {
    pub fn advance(
        self,
        group: Group,
        event: FlowEvent,
        shape: FlowShape,
    ) -> Result<FlowState, FlowViolation> {
        use FlowEvent as E;
        use FlowState as S;

        let after_series = |series: u32| {
            if series < shape.series_count {
                S::Practising {
                    series: series + 1,
                    exercise: 1,
                }
            } else {
                S::Questionnaire
            }
        };

        let next = match (self, event) {
            (S::Registered, E::InitializeMastery) => Some(S::MasterySet),
            (S::MasterySet, E::AcknowledgeExplanation) => Some(S::Explained),
            (S::Explained, E::StartSeries) => Some(S::Practising {
                series: 1,
                exercise: 1,
            }),
            (s @ S::Practising { exercise: 1, .. }, E::StartSeries) => Some(s),
            (S::Practising { series, exercise }, E::Attempt) => Some(if exercise < shape.series_size {
                S::Practising {
                    series,
                    exercise: exercise + 1,
                }
            } else if group.can_steer() {
                S::AwaitSteer { series }
            } else {
                after_series(series)
            }),
            (S::AwaitSteer { series }, E::Steer) if group.can_steer() => Some(if group.sees_impact() {
                S::AwaitImpactAck { series }
            } else {
                after_series(series)
            }),
            (S::AwaitImpactAck { series }, E::AcknowledgeImpact) if group.sees_impact() => {
                Some(after_series(series))
            }
            (S::Questionnaire, E::SubmitQuestionnaire) => Some(S::FreeUse),
            (S::FreeUse, E::StartSeries | E::Attempt) => Some(S::FreeUse),
            _ => None,
        };
        next.ok_or(FlowViolation {
            state: self,
            event,
            group,
        })
    }

    /// Whether this state is inside the measured part of the study.
    pub fn is_post_study(self) -> bool {
        matches!(self, FlowState::FreeUse)
    }
}
