//! Randomized three-arm study: assignment, per-learner flow, questionnaires
//! and the event log everything is rebuilt from.
//!
//! Every mutating command produces one [`StudyEvent`]. The event is applied
//! through the same code path used by [`Study::replay`], then appended to the
//! log, so a log always replays to the state that produced it.

mod export;
mod flow;
mod log;
mod questionnaire;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{export_dataset, ChangeSource, DatasetRow};
pub use flow::{FlowEvent, FlowShape, FlowState, FlowViolation};
pub use log::{read_jsonl, to_jsonl, write_jsonl, LogRecord, StudyEvent, SCHEMA_VERSION};
pub use questionnaire::{
    item_id, QuestionnaireError, QuestionnaireResponse, ITEM_COUNT, LIKERT_MAX, LIKERT_MIN,
    TRUST_QUESTION,
};

use crate::clock::{Clock, SystemClock};
use crate::elo::{update_ratings, EloConfig, Rating};
use crate::recommender::{
    apply_attempt, compose_series, score_attempt, Catalog, CatalogEntry, RecommendError,
    RecommenderConfig, SeriesRecommendation,
};
use crate::steering::{
    apply_steering, initialize_mastery, mastery_history, slider_to_rating, Group, HistoryPoint,
    LearnerProfile, SteeringError, SteeringStep,
};

/// Sentence shown on every practice page.
pub const PRACTICE_PAGE_EXPLAINER: &str =
    "Exercises are picked automatically so that they match your current level.";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StudyError {
    #[error(transparent)]
    Flow(#[from] FlowViolation),
    #[error("unknown learner {0:?}")]
    UnknownLearner(String),
    #[error("learner {learner} has no series in progress (state {state})")]
    NoActiveSeries { learner: String, state: FlowState },
    #[error("exercise {got:?} is not the next exercise of the series, expected {expected:?}")]
    NotNextExercise { expected: String, got: String },
    #[error("no topic chosen yet")]
    MissingTopic,
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Steering(#[from] SteeringError),
    #[error("questionnaire rejected: {0}")]
    Questionnaire(#[from] QuestionnaireError),
    #[error("invalid study config: {0}")]
    InvalidConfig(String),
    #[error("log record {seq}: {reason}")]
    Replay { seq: u64, reason: String },
}

impl StudyError {
    /// Flow state to report alongside the error, if it has one.
    pub fn flow_state(&self) -> Option<FlowState> {
        match self {
            StudyError::Flow(v) => Some(v.state),
            StudyError::NoActiveSeries { state, .. } => Some(*state),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub series_count: u32,
    /// Relative assignment weights for NONE, CONTROL and CONTROL+IMPACT.
    pub group_weights: [f64; 3],
    pub seed: u64,
    pub elo: EloConfig,
    pub recommender: RecommenderConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            series_count: 3,
            group_weights: [1.0, 1.0, 1.0],
            seed: 0,
            elo: EloConfig::default(),
            recommender: RecommenderConfig::default(),
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.series_count == 0 {
            return Err(StudyError::InvalidConfig("series_count must be positive".into()));
        }
        if self.group_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || self.group_weights.iter().sum::<f64>() <= 0.0
        {
            return Err(StudyError::InvalidConfig(
                "group weights must be non-negative and not all zero".into(),
            ));
        }
        self.elo
            .validate()
            .map_err(|e| StudyError::InvalidConfig(e.to_string()))?;
        self.recommender.validate()?;
        Ok(())
    }

    pub fn shape(&self) -> FlowShape {
        FlowShape {
            series_count: self.series_count,
            series_size: self.recommender.series_size as u32,
        }
    }
}

/// Draws a group with probability proportional to `weights`.
pub fn assign_group<R: Rng + ?Sized>(rng: &mut R, weights: &[f64; 3]) -> Group {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for g in Group::ALL {
        let w = weights[g.index()];
        if x < w {
            return g;
        }
        x -= w;
    }
    // Rounding can leave x at the top edge; fall back to the last positive weight.
    *Group::ALL
        .iter()
        .rev()
        .find(|g| weights[g.index()] > 0.0)
        .expect("weights validated")
}

/// Generator for the `index`-th registration. Independent of every other
/// registration, so assignments survive restarts.
pub fn assignment_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Introductory screens a group sees after setting its mastery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Screen {
    Global,
    ControlExplainer,
}

pub fn explanation_screens(group: Group) -> Vec<Screen> {
    if group.can_steer() {
        vec![Screen::Global, Screen::ControlExplainer]
    } else {
        vec![Screen::Global]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveSeries {
    /// 0 when started during free use.
    pub series_index: u32,
    pub recommendation: SeriesRecommendation,
    pub answered: usize,
}

impl ActiveSeries {
    fn next_exercise(&self) -> Option<&str> {
        self.recommendation
            .exercises
            .get(self.answered)
            .map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub profile: LearnerProfile,
    pub state: FlowState,
    pub active_series: Option<ActiveSeries>,
    /// Exercise ids of every attempt, oldest first.
    pub attempt_history: Vec<String>,
    pub last_topic: Option<String>,
    pub questionnaire: Option<QuestionnaireResponse>,
    pub records: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarantinedResponse {
    pub learner: String,
    pub response: QuestionnaireResponse,
    pub reason: String,
}

/// Everything a log replays into. Serializable for snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyState {
    pub config: StudyConfig,
    pub catalog: Catalog,
    pub learners: BTreeMap<String, LearnerState>,
    pub quarantine: Vec<QuarantinedResponse>,
    pub registrations: u64,
    pub next_seq: u64,
}

/// Tolerance when checking stored rating arithmetic during replay.
const REPLAY_TOLERANCE: f64 = 1e-9;

struct FixedClock(DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

pub struct Study {
    state: StudyState,
    log: Vec<LogRecord>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for Study {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Study")
            .field("learners", &self.state.learners.len())
            .field("exercises", &self.state.catalog.len())
            .field("records", &self.log.len())
            .finish()
    }
}

impl Study {
    pub fn new(config: StudyConfig) -> Result<Self, StudyError> {
        Self::with_clock(config, Arc::new(SystemClock))
    }

    pub fn with_clock(config: StudyConfig, clock: Arc<dyn Clock>) -> Result<Self, StudyError> {
        config.validate()?;
        Ok(Study {
            state: StudyState {
                config,
                catalog: Catalog::new(),
                learners: BTreeMap::new(),
                quarantine: Vec::new(),
                registrations: 0,
                next_seq: 1,
            },
            log: Vec::new(),
            clock,
        })
    }

    /// Resumes from a snapshot. The in-memory log starts empty.
    pub fn from_snapshot(state: StudyState, clock: Arc<dyn Clock>) -> Result<Self, StudyError> {
        state.config.validate()?;
        Ok(Study {
            state,
            log: Vec::new(),
            clock,
        })
    }

    /// Rebuilds a study from its log.
    pub fn replay(
        config: StudyConfig,
        records: &[LogRecord],
        clock: Arc<dyn Clock>,
    ) -> Result<Self, StudyError> {
        let mut study = Study::with_clock(config, clock)?;
        study.replay_records(records)?;
        Ok(study)
    }

    /// Applies records on top of the current state, e.g. after a snapshot.
    /// Records at or below the current sequence number are skipped.
    pub fn replay_records(&mut self, records: &[LogRecord]) -> Result<(), StudyError> {
        for rec in records {
            if rec.seq < self.state.next_seq {
                continue;
            }
            if rec.v != SCHEMA_VERSION {
                return Err(StudyError::Replay {
                    seq: rec.seq,
                    reason: format!("unsupported schema version {}", rec.v),
                });
            }
            if rec.seq != self.state.next_seq {
                return Err(StudyError::Replay {
                    seq: rec.seq,
                    reason: format!("expected sequence number {}", self.state.next_seq),
                });
            }
            self.verify(rec).map_err(|reason| StudyError::Replay {
                seq: rec.seq,
                reason,
            })?;
            let learner_seq = self.apply(rec.learner.as_deref(), &rec.event, rec.timestamp)?;
            if learner_seq != rec.learner_seq {
                return Err(StudyError::Replay {
                    seq: rec.seq,
                    reason: format!(
                        "learner sequence {:?} does not match {:?}",
                        rec.learner_seq, learner_seq
                    ),
                });
            }
            self.state.next_seq += 1;
            self.log.push(rec.clone());
        }
        Ok(())
    }

    pub fn config(&self) -> &StudyConfig {
        &self.state.config
    }

    pub fn catalog(&self) -> &Catalog {
        &self.state.catalog
    }

    pub fn state(&self) -> &StudyState {
        &self.state
    }

    /// Records appended since this instance was created or restored.
    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn learners(&self) -> impl Iterator<Item = &LearnerState> {
        self.state.learners.values()
    }

    pub fn learner(&self, id: &str) -> Result<&LearnerState, StudyError> {
        self.state
            .learners
            .get(id)
            .ok_or_else(|| StudyError::UnknownLearner(id.to_string()))
    }

    pub fn quarantine(&self) -> &[QuarantinedResponse] {
        &self.state.quarantine
    }

    pub fn history(&self, id: &str) -> Result<Vec<HistoryPoint>, StudyError> {
        Ok(mastery_history(&self.learner(id)?.profile)?)
    }

    pub fn screens(&self, id: &str) -> Result<Vec<Screen>, StudyError> {
        Ok(explanation_screens(self.learner(id)?.profile.group))
    }

    // ----- commands -----

    pub fn ingest_catalog(&mut self, entries: Vec<CatalogEntry>) -> Result<usize, StudyError> {
        let exercises = entries
            .into_iter()
            .map(CatalogEntry::into_exercise)
            .collect::<Result<Vec<_>, _>>()?;
        let n = exercises.len();
        self.commit(None, StudyEvent::CatalogIngested { exercises }, self.clock.now())?;
        Ok(n)
    }

    /// Registers a learner in a randomly drawn group.
    pub fn register(&mut self) -> Result<&LearnerState, StudyError> {
        let mut rng = assignment_rng(self.state.config.seed, self.state.registrations);
        let group = assign_group(&mut rng, &self.state.config.group_weights);
        self.register_in_group(group)
    }

    /// Registers a learner in a fixed group, bypassing randomization.
    pub fn register_in_group(&mut self, group: Group) -> Result<&LearnerState, StudyError> {
        let id = learner_id(self.state.registrations + 1);
        self.commit(Some(&id), StudyEvent::Registered { group }, self.clock.now())?;
        self.learner(&id)
    }

    pub fn initialize_mastery(&mut self, id: &str, slider_position: f64) -> Result<Rating, StudyError> {
        self.check_flow(id, FlowEvent::InitializeMastery)?;
        let rating = slider_to_rating(slider_position)?;
        self.commit(
            Some(id),
            StudyEvent::MasteryInitialized {
                slider_position,
                rating,
            },
            self.clock.now(),
        )?;
        Ok(rating)
    }

    pub fn acknowledge_explanation(&mut self, id: &str) -> Result<Vec<Screen>, StudyError> {
        self.check_flow(id, FlowEvent::AcknowledgeExplanation)?;
        let screens = explanation_screens(self.learner(id)?.profile.group);
        self.commit(
            Some(id),
            StudyEvent::ExplanationAcknowledged {
                screens: screens.clone(),
            },
            self.clock.now(),
        )?;
        Ok(screens)
    }

    /// Composes a series on `topic`, or on the previously chosen topic.
    pub fn start_series(
        &mut self,
        id: &str,
        topic: Option<&str>,
    ) -> Result<SeriesRecommendation, StudyError> {
        let next = self.check_flow(id, FlowEvent::StartSeries)?;
        let learner = self.learner(id)?;
        let topic = topic
            .map(str::to_string)
            .or_else(|| learner.last_topic.clone())
            .ok_or(StudyError::MissingTopic)?;
        let cfg = &self.state.config;
        let rec = compose_series(
            id,
            learner.profile.rating()?,
            &topic,
            &self.state.catalog,
            &cfg.recommender,
            &cfg.elo,
            &learner.attempt_history,
        )?;
        let series_index = match next {
            FlowState::Practising { series, .. } => series,
            _ => 0,
        };
        self.commit(
            Some(id),
            StudyEvent::SeriesComposed {
                series_index,
                topic,
                exercises: rec.exercises.clone(),
                expected_probabilities: rec.expected_probabilities.clone(),
            },
            self.clock.now(),
        )?;
        Ok(rec)
    }

    pub fn attempt(
        &mut self,
        id: &str,
        exercise_id: &str,
        answer_index: usize,
    ) -> Result<crate::recommender::AttemptRecord, StudyError> {
        self.check_flow(id, FlowEvent::Attempt)?;
        let learner = self.learner(id)?;
        let active = self.expect_next(learner, exercise_id)?;
        let series_index = active.series_index;
        let post_study = learner.state.is_post_study();
        let ts = self.clock.now();
        let cfg = &self.state.config;
        let attempt = score_attempt(
            &learner.profile,
            &self.state.catalog,
            exercise_id,
            answer_index,
            &cfg.recommender,
            &cfg.elo,
            &FixedClock(ts),
        )?;
        self.commit(
            Some(id),
            StudyEvent::AttemptRecorded {
                series_index,
                post_study,
                attempt: attempt.clone(),
            },
            ts,
        )?;
        Ok(attempt)
    }

    pub fn steer(&mut self, id: &str, step: SteeringStep) -> Result<HistoryPoint, StudyError> {
        let learner = self.learner(id)?;
        if !learner.profile.group.can_steer() {
            return Err(SteeringError::ForbiddenControl {
                learner: id.to_string(),
                group: learner.profile.group,
            }
            .into());
        }
        self.check_flow(id, FlowEvent::Steer)?;
        let learner = self.learner(id)?;
        let series_index = match learner.state {
            FlowState::AwaitSteer { series } => series,
            _ => unreachable!("flow check passed"),
        };
        let mut scratch = learner.profile.clone();
        let ts = self.clock.now();
        let ev = apply_steering(&mut scratch, step, &FixedClock(ts))?;
        self.commit(
            Some(id),
            StudyEvent::Steered {
                series_index,
                step,
                pre: ev.pre_rating,
                post: ev.post_rating,
            },
            ts,
        )?;
        Ok(self
            .history(id)?
            .pop()
            .expect("steering appended an event"))
    }

    pub fn acknowledge_impact(&mut self, id: &str) -> Result<FlowState, StudyError> {
        self.check_flow(id, FlowEvent::AcknowledgeImpact)?;
        let series_index = match self.learner(id)?.state {
            FlowState::AwaitImpactAck { series } => series,
            _ => unreachable!("flow check passed"),
        };
        self.commit(
            Some(id),
            StudyEvent::ImpactAcknowledged { series_index },
            self.clock.now(),
        )?;
        Ok(self.learner(id)?.state)
    }

    /// Stores a complete questionnaire. Invalid submissions are quarantined
    /// and rejected as a whole; the learner stays in the questionnaire state.
    pub fn submit_questionnaire(
        &mut self,
        id: &str,
        response: QuestionnaireResponse,
    ) -> Result<(), StudyError> {
        self.check_flow(id, FlowEvent::SubmitQuestionnaire)?;
        if let Err(e) = response.validate() {
            self.commit(
                Some(id),
                StudyEvent::QuestionnaireQuarantined {
                    response,
                    reason: e.to_string(),
                },
                self.clock.now(),
            )?;
            return Err(e.into());
        }
        self.commit(
            Some(id),
            StudyEvent::QuestionnaireSubmitted { response },
            self.clock.now(),
        )?;
        Ok(())
    }

    // ----- internals -----

    fn check_flow(&self, id: &str, event: FlowEvent) -> Result<FlowState, StudyError> {
        let learner = self.learner(id)?;
        Ok(learner
            .state
            .advance(learner.profile.group, event, self.state.config.shape())?)
    }

    fn expect_next<'a>(
        &self,
        learner: &'a LearnerState,
        exercise_id: &str,
    ) -> Result<&'a ActiveSeries, StudyError> {
        let active = learner
            .active_series
            .as_ref()
            .ok_or_else(|| StudyError::NoActiveSeries {
                learner: learner.profile.id.clone(),
                state: learner.state,
            })?;
        let expected = active.next_exercise().ok_or_else(|| StudyError::NoActiveSeries {
            learner: learner.profile.id.clone(),
            state: learner.state,
        })?;
        if expected != exercise_id {
            return Err(StudyError::NotNextExercise {
                expected: expected.to_string(),
                got: exercise_id.to_string(),
            });
        }
        Ok(active)
    }

    fn commit(
        &mut self,
        learner: Option<&str>,
        event: StudyEvent,
        timestamp: DateTime<Utc>,
    ) -> Result<&LogRecord, StudyError> {
        let learner_seq = self.apply(learner, &event, timestamp)?;
        let rec = LogRecord {
            v: SCHEMA_VERSION,
            seq: self.state.next_seq,
            learner: learner.map(str::to_string),
            learner_seq,
            timestamp,
            event,
        };
        self.state.next_seq += 1;
        self.log.push(rec);
        Ok(self.log.last().expect("just pushed"))
    }

    /// Checks stored arithmetic in a record against the current state before
    /// it is applied.
    fn verify(&self, rec: &LogRecord) -> Result<(), String> {
        let StudyEvent::AttemptRecorded { attempt, .. } = &rec.event else {
            return Ok(());
        };
        let cfg = &self.state.config;
        let learner = rec
            .learner
            .as_deref()
            .and_then(|id| self.state.learners.get(id))
            .ok_or("attempt for an unknown learner")?;
        let current = learner.profile.rating().map_err(|e| e.to_string())?;
        let exercise = self
            .state
            .catalog
            .get(&attempt.exercise_id)
            .ok_or("attempt on an unknown exercise")?;
        let close = |a: f64, b: f64| (a - b).abs() <= REPLAY_TOLERANCE;
        if !close(current.value(), attempt.learner_pre.value())
            || !close(exercise.rating.value(), attempt.exercise_pre.value())
        {
            return Err("pre-attempt ratings do not match the replayed state".into());
        }
        let update = update_ratings(
            attempt.learner_pre,
            attempt.exercise_pre,
            exercise.is_correct(attempt.answer_index).into(),
            &cfg.elo,
        )
        .map_err(|e| e.to_string())?;
        let exercise_post = if attempt.exercise_frozen {
            attempt.exercise_pre
        } else {
            update.exercise
        };
        if !close(update.delta, attempt.delta)
            || !close(update.learner.value(), attempt.learner_post.value())
            || !close(exercise_post.value(), attempt.exercise_post.value())
            || exercise.is_correct(attempt.answer_index) != attempt.correct
        {
            return Err("stored rating change disagrees with the Elo update".into());
        }
        Ok(())
    }

    /// The single state mutator. Validates first, then mutates. Returns the
    /// learner sequence number assigned to the event.
    fn apply(
        &mut self,
        learner: Option<&str>,
        event: &StudyEvent,
        ts: DateTime<Utc>,
    ) -> Result<Option<u64>, StudyError> {
        let shape = self.state.config.shape();
        let clock = FixedClock(ts);

        let Some(id) = learner else {
            return match event {
                StudyEvent::CatalogIngested { exercises } => {
                    self.state.catalog.extend(exercises.clone())?;
                    Ok(None)
                }
                other => Err(StudyError::Replay {
                    seq: self.state.next_seq,
                    reason: format!("event {} needs a learner", event_name(other)),
                }),
            };
        };

        if let StudyEvent::Registered { group } = event {
            if self.state.learners.contains_key(id) {
                return Err(StudyError::Replay {
                    seq: self.state.next_seq,
                    reason: format!("learner {id} registered twice"),
                });
            }
            self.state.registrations += 1;
            self.state.learners.insert(
                id.to_string(),
                LearnerState {
                    profile: LearnerProfile::new(id, *group),
                    state: FlowState::Registered,
                    active_series: None,
                    attempt_history: Vec::new(),
                    last_topic: None,
                    questionnaire: None,
                    records: 1,
                },
            );
            return Ok(Some(1));
        }

        let catalog = &mut self.state.catalog;
        let quarantine = &mut self.state.quarantine;
        let learner = self
            .state
            .learners
            .get_mut(id)
            .ok_or_else(|| StudyError::UnknownLearner(id.to_string()))?;
        let group = learner.profile.group;

        match event {
            StudyEvent::CatalogIngested { .. } | StudyEvent::Registered { .. } => {
                return Err(StudyError::Replay {
                    seq: 0,
                    reason: format!("event {} cannot target a learner", event_name(event)),
                })
            }
            StudyEvent::MasteryInitialized {
                slider_position,
                rating,
            } => {
                let next = learner.state.advance(group, FlowEvent::InitializeMastery, shape)?;
                let ev = initialize_mastery(&mut learner.profile, *slider_position, &clock)?;
                debug_assert_eq!(ev.post_rating, *rating);
                learner.state = next;
            }
            StudyEvent::ExplanationAcknowledged { .. } => {
                learner.state = learner
                    .state
                    .advance(group, FlowEvent::AcknowledgeExplanation, shape)?;
            }
            StudyEvent::SeriesComposed {
                series_index,
                topic,
                exercises,
                expected_probabilities,
            } => {
                let next = learner.state.advance(group, FlowEvent::StartSeries, shape)?;
                if let Some(missing) = exercises.iter().find(|e| catalog.get(e).is_none()) {
                    return Err(RecommendError::UnknownExercise(missing.clone()).into());
                }
                learner.state = next;
                learner.last_topic = Some(topic.clone());
                learner.active_series = Some(ActiveSeries {
                    series_index: *series_index,
                    recommendation: SeriesRecommendation {
                        learner_id: id.to_string(),
                        topic: topic.clone(),
                        exercises: exercises.clone(),
                        expected_probabilities: expected_probabilities.clone(),
                    },
                    answered: 0,
                });
            }
            StudyEvent::AttemptRecorded { attempt, .. } => {
                let next = learner.state.advance(group, FlowEvent::Attempt, shape)?;
                let expected = learner
                    .active_series
                    .as_ref()
                    .and_then(ActiveSeries::next_exercise)
                    .ok_or_else(|| StudyError::NoActiveSeries {
                        learner: id.to_string(),
                        state: learner.state,
                    })?;
                if expected != attempt.exercise_id {
                    return Err(StudyError::NotNextExercise {
                        expected: expected.to_string(),
                        got: attempt.exercise_id.clone(),
                    });
                }
                apply_attempt(&mut learner.profile, catalog, attempt)?;
                learner.state = next;
                learner.attempt_history.push(attempt.exercise_id.clone());
                let active = learner.active_series.as_mut().expect("checked above");
                active.answered += 1;
                if active.next_exercise().is_none() {
                    learner.active_series = None;
                }
            }
            StudyEvent::Steered { step, post, .. } => {
                let next = learner.state.advance(group, FlowEvent::Steer, shape)?;
                let ev = apply_steering(&mut learner.profile, *step, &clock)?;
                if ev.post_rating != *post {
                    return Err(StudyError::Replay {
                        seq: self.state.next_seq,
                        reason: "stored steering result disagrees with the step".into(),
                    });
                }
                learner.state = next;
            }
            StudyEvent::ImpactAcknowledged { .. } => {
                learner.state = learner
                    .state
                    .advance(group, FlowEvent::AcknowledgeImpact, shape)?;
            }
            StudyEvent::QuestionnaireSubmitted { response } => {
                let next = learner
                    .state
                    .advance(group, FlowEvent::SubmitQuestionnaire, shape)?;
                response.validate()?;
                learner.state = next;
                learner.questionnaire = Some(response.clone());
            }
            StudyEvent::QuestionnaireQuarantined { response, reason } => {
                learner
                    .state
                    .advance(group, FlowEvent::SubmitQuestionnaire, shape)?;
                quarantine.push(QuarantinedResponse {
                    learner: id.to_string(),
                    response: response.clone(),
                    reason: reason.clone(),
                });
            }
        }
        learner.records += 1;
        Ok(Some(learner.records))
    }
}

fn learner_id(n: u64) -> String {
    format!("L{n:05}")
}

fn event_name(event: &StudyEvent) -> &'static str {
    match event {
        StudyEvent::CatalogIngested { .. } => "catalog_ingested",
        StudyEvent::Registered { .. } => "registered",
        StudyEvent::MasteryInitialized { .. } => "mastery_initialized",
        StudyEvent::ExplanationAcknowledged { .. } => "explanation_acknowledged",
        StudyEvent::SeriesComposed { .. } => "series_composed",
        StudyEvent::AttemptRecorded { .. } => "attempt_recorded",
        StudyEvent::Steered { .. } => "steered",
        StudyEvent::ImpactAcknowledged { .. } => "impact_acknowledged",
        StudyEvent::QuestionnaireSubmitted { .. } => "questionnaire_submitted",
        StudyEvent::QuestionnaireQuarantined { .. } => "questionnaire_quarantined",
    }
}

#[cfg(test)]
mod tests;
