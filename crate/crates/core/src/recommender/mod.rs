//! Exercise catalog and series composition.
//!
//! A series is the `series_size` exercises of a topic whose modelled success
//! probability for the learner is closest to the target. Ranking is greedy:
//! with a scalar target, taking the best exercises one at a time gives the
//! same set as searching all subsets.

mod catalog;

use std::cmp::Ordering;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{ingest_catalog, parse_catalog_jsonl, Catalog, CatalogEntry, Exercise};

use crate::clock::Clock;
use crate::elo::{expected_probability, target_rating_gap, update_ratings, EloConfig, EloError, Rating};
use crate::steering::{LearnerProfile, MasteryDetail, MasteryEvent, MasteryEventKind, SteeringError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecommendError {
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("unknown exercise {0:?}")]
    UnknownExercise(String),
    #[error("topic {topic:?} has {available} exercises, series needs {required}")]
    InsufficientPool {
        topic: String,
        available: usize,
        required: usize,
    },
    #[error("duplicate exercise id {0:?}")]
    DuplicateId(String),
    #[error("exercise {id:?} has unknown level label {label:?}")]
    UnknownLevel { id: String, label: String },
    #[error("malformed catalog entry{}: {reason}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    MalformedEntry { line: Option<usize>, reason: String },
    #[error("answer index {index} is invalid for exercise {exercise:?} with {choices} choices")]
    InvalidAnswer {
        exercise: String,
        index: usize,
        choices: usize,
    },
    #[error("invalid recommender config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Elo(#[from] EloError),
    #[error(transparent)]
    Steering(#[from] SteeringError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommenderConfig {
    pub target_p: f64,
    pub series_size: usize,
    /// Number of the learner's most recent attempts whose exercises are
    /// avoided when the pool allows it. Zero allows repeats.
    pub no_repeat_window: usize,
    pub freeze_exercise_ratings: bool,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            target_p: 0.7,
            series_size: 2,
            no_repeat_window: 0,
            freeze_exercise_ratings: false,
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<(), RecommendError> {
        if !(self.target_p > 0.0 && self.target_p < 1.0) {
            return Err(RecommendError::InvalidConfig(format!(
                "target_p must lie in (0, 1), got {}",
                self.target_p
            )));
        }
        if self.series_size == 0 {
            return Err(RecommendError::InvalidConfig("series_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecommendation {
    pub learner_id: String,
    pub topic: String,
    pub exercises: Vec<String>,
    pub expected_probabilities: Vec<f64>,
}

/// Sort key of a candidate; smaller is better.
#[derive(Clone, Copy, Debug)]
struct Closeness<'a> {
    recent: bool,
    distance: f64,
    rating_distance: f64,
    id: &'a str,
}

impl Closeness<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.recent
            .cmp(&other.recent)
            .then(self.distance.total_cmp(&other.distance))
            .then(self.rating_distance.total_cmp(&other.rating_distance))
            .then(self.id.cmp(other.id))
    }
}

/// Picks the `series_size` exercises of `pool` closest to the target.
///
/// Exercises whose id is in `recent` rank after every other exercise, so they
/// are only used to fill a series the rest of the pool cannot.
pub fn select_series<'a>(
    learner_rating: Rating,
    pool: &[&'a Exercise],
    recent: &[&str],
    config: &RecommenderConfig,
    elo: &EloConfig,
) -> Result<Vec<(&'a Exercise, f64)>, RecommendError> {
    config.validate()?;
    if pool.len() < config.series_size {
        return Err(RecommendError::InsufficientPool {
            topic: pool.first().map(|e| e.topic.clone()).unwrap_or_default(),
            available: pool.len(),
            required: config.series_size,
        });
    }
    let ideal = learner_rating.value() - target_rating_gap(config.target_p, elo)?;
    let mut ranked: Vec<(Closeness<'a>, &'a Exercise, f64)> = pool
        .iter()
        .map(|ex| {
            let p = expected_probability(learner_rating, ex.rating, elo);
            let key = Closeness {
                recent: recent.contains(&ex.id.as_str()),
                distance: (p - config.target_p).abs(),
                rating_distance: (ex.rating.value() - ideal).abs(),
                id: ex.id.as_str(),
            };
            (key, *ex, p)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ranked
        .into_iter()
        .take(config.series_size)
        .map(|(_, ex, p)| (ex, p))
        .collect())
}

/// Composes the next series for a learner on `topic`.
///
/// `history` lists the exercise ids of the learner's attempts, oldest first.
pub fn compose_series(
    learner_id: &str,
    learner_rating: Rating,
    topic: &str,
    catalog: &Catalog,
    config: &RecommenderConfig,
    elo: &EloConfig,
    history: &[String],
) -> Result<SeriesRecommendation, RecommendError> {
    let pool: Vec<&Exercise> = catalog.in_topic(topic).collect();
    if pool.is_empty() {
        return Err(RecommendError::UnknownTopic(topic.to_string()));
    }
    let skip = history.len().saturating_sub(config.no_repeat_window);
    let recent: Vec<&str> = history[skip..].iter().map(String::as_str).collect();
    let picked = select_series(learner_rating, &pool, &recent, config, elo).map_err(|e| match e {
        RecommendError::InsufficientPool {
            available,
            required,
            ..
        } => RecommendError::InsufficientPool {
            topic: topic.to_string(),
            available,
            required,
        },
        other => other,
    })?;
    let (exercises, expected_probabilities) = picked
        .into_iter()
        .map(|(ex, p)| (ex.id.clone(), p))
        .unzip();
    Ok(SeriesRecommendation {
        learner_id: learner_id.to_string(),
        topic: topic.to_string(),
        exercises,
        expected_probabilities,
    })
}

/// One learner-exercise interaction with the ratings on both sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub learner_id: String,
    pub exercise_id: String,
    pub answer_index: usize,
    pub correct: bool,
    pub expected_probability: f64,
    pub delta: f64,
    pub learner_pre: Rating,
    pub learner_post: Rating,
    pub exercise_pre: Rating,
    pub exercise_post: Rating,
    pub exercise_frozen: bool,
    pub timestamp: DateTime<Utc>,
}

/// Scores an answer, updates both ratings and appends an attempt event to the
/// learner's timeline.
pub fn record_attempt(
    learner: &mut LearnerProfile,
    catalog: &mut Catalog,
    exercise_id: &str,
    answer_index: usize,
    config: &RecommenderConfig,
    elo: &EloConfig,
    clock: &dyn Clock,
) -> Result<AttemptRecord, RecommendError> {
    let record = score_attempt(learner, catalog, exercise_id, answer_index, config, elo, clock)?;
    apply_attempt(learner, catalog, &record)?;
    Ok(record)
}

/// Computes an attempt without mutating anything.
pub(crate) fn score_attempt(
    learner: &LearnerProfile,
    catalog: &Catalog,
    exercise_id: &str,
    answer_index: usize,
    config: &RecommenderConfig,
    elo: &EloConfig,
    clock: &dyn Clock,
) -> Result<AttemptRecord, RecommendError> {
    let exercise = catalog
        .get(exercise_id)
        .ok_or_else(|| RecommendError::UnknownExercise(exercise_id.to_string()))?;
    if answer_index >= exercise.choices.len() {
        return Err(RecommendError::InvalidAnswer {
            exercise: exercise.id.clone(),
            index: answer_index,
            choices: exercise.choices.len(),
        });
    }
    let learner_pre = learner.rating()?;
    let correct = exercise.is_correct(answer_index);
    let update = update_ratings(learner_pre, exercise.rating, correct.into(), elo)?;
    let exercise_post = if config.freeze_exercise_ratings {
        exercise.rating
    } else {
        update.exercise
    };
    Ok(AttemptRecord {
        learner_id: learner.id.clone(),
        exercise_id: exercise.id.clone(),
        answer_index,
        correct,
        expected_probability: update.expected,
        delta: update.delta,
        learner_pre,
        learner_post: update.learner,
        exercise_pre: exercise.rating,
        exercise_post,
        exercise_frozen: config.freeze_exercise_ratings,
        timestamp: clock.now(),
    })
}

/// Persists a scored attempt. Also used when replaying a log, so it trusts
/// the stored post-ratings rather than recomputing them.
pub(crate) fn apply_attempt(
    learner: &mut LearnerProfile,
    catalog: &mut Catalog,
    record: &AttemptRecord,
) -> Result<(), RecommendError> {
    catalog.set_rating(&record.exercise_id, record.exercise_post)?;
    learner.push_event(MasteryEvent {
        kind: MasteryEventKind::Attempt,
        pre_rating: record.learner_pre,
        post_rating: record.learner_post,
        detail: MasteryDetail::Attempt {
            exercise_id: record.exercise_id.clone(),
            correct: record.correct,
        },
        timestamp: record.timestamp,
    });
    Ok(())
}
