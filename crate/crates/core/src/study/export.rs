//! Shareable dataset: one row per learner rating change and one per
//! accepted questionnaire, derived from the event log alone.

use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::log::{LogRecord, StudyEvent};
use super::StudyError;
use crate::steering::Group;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeSource {
    Init,
    Attempt,
    Steer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetRow {
    EloChange {
        learner: String,
        group: Group,
        seq: u64,
        source: ChangeSource,
        /// 0 for the initial rating and for free-use series.
        series_index: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exercise_id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        correct: Option<bool>,
        pre: f64,
        post: f64,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exercise_pre: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exercise_post: Option<f64>,
        post_study: bool,
        timestamp: DateTime<Utc>,
    },
    Questionnaire {
        learner: String,
        group: Group,
        seq: u64,
        answers: BTreeMap<String, i64>,
        free_text: BTreeMap<String, String>,
        timestamp: DateTime<Utc>,
    },
}

impl DatasetRow {
    pub fn group(&self) -> Group {
        match self {
            DatasetRow::EloChange { group, .. } | DatasetRow::Questionnaire { group, .. } => *group,
        }
    }
}

pub fn export_dataset(records: &[LogRecord]) -> Result<Vec<DatasetRow>, StudyError> {
    let mut groups: HashMap<&str, Group> = HashMap::new();
    let mut rows = Vec::new();
    for rec in records {
        let Some(learner) = rec.learner.as_deref() else {
            continue;
        };
        if let StudyEvent::Registered { group } = rec.event {
            groups.insert(learner, group);
            continue;
        }
        let group = *groups.get(learner).ok_or_else(|| StudyError::Replay {
            seq: rec.seq,
            reason: format!("learner {learner} appears before registration"),
        })?;
        let row = match &rec.event {
            StudyEvent::MasteryInitialized { rating, .. } => Some(DatasetRow::EloChange {
                learner: learner.to_string(),
                group,
                seq: rec.seq,
                source: ChangeSource::Init,
                series_index: 0,
                exercise_id: None,
                correct: None,
                pre: rating.value(),
                post: rating.value(),
                delta: 0.0,
                exercise_pre: None,
                exercise_post: None,
                post_study: false,
                timestamp: rec.timestamp,
            }),
            StudyEvent::AttemptRecorded {
                series_index,
                post_study,
                attempt,
            } => Some(DatasetRow::EloChange {
                learner: learner.to_string(),
                group,
                seq: rec.seq,
                source: ChangeSource::Attempt,
                series_index: *series_index,
                exercise_id: Some(attempt.exercise_id.clone()),
                correct: Some(attempt.correct),
                pre: attempt.learner_pre.value(),
                post: attempt.learner_post.value(),
                delta: attempt.delta,
                exercise_pre: Some(attempt.exercise_pre.value()),
                exercise_post: Some(attempt.exercise_post.value()),
                post_study: *post_study,
                timestamp: rec.timestamp,
            }),
            StudyEvent::Steered {
                series_index,
                pre,
                post,
                ..
            } => Some(DatasetRow::EloChange {
                learner: learner.to_string(),
                group,
                seq: rec.seq,
                source: ChangeSource::Steer,
                series_index: *series_index,
                exercise_id: None,
                correct: None,
                pre: pre.value(),
                post: post.value(),
                delta: post.value() - pre.value(),
                exercise_pre: None,
                exercise_post: None,
                post_study: false,
                timestamp: rec.timestamp,
            }),
            StudyEvent::QuestionnaireSubmitted { response } => Some(DatasetRow::Questionnaire {
                learner: learner.to_string(),
                group,
                seq: rec.seq,
                answers: response.answers.clone(),
                free_text: response.free_text.clone(),
                timestamp: rec.timestamp,
            }),
            _ => None,
        };
        rows.extend(row);
    }
    Ok(rows)
}
