//! Rating arithmetic shared by learners and exercises.
//!
//! Both sides of an attempt carry an Elo rating on the same interval scale.
//! The success probability of a learner on an exercise depends only on the
//! rating gap, and every update moves the two ratings by the same amount in
//! opposite directions.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default learning rate. Large enough that a single surprising answer moves
/// a rating by a visible amount on a 1000..2000 scale.
pub const DEFAULT_K: f64 = 160.0;

/// Scale of the base-10 probability model: a 400 point gap is 10:1 odds.
pub const CHESS_SCALE: f64 = 400.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EloError {
    #[error("rating must be finite, got {0}")]
    InvalidRating(f64),
    #[error("learning rate k must be positive and finite, got {0}")]
    InvalidLearningRate(f64),
    #[error("probability must lie strictly between 0 and 1, got {0}")]
    ProbabilityOutOfRange(f64),
}

/// An Elo score. Finite, otherwise unbounded.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Rating(f64);

impl Rating {
    pub fn new(value: f64) -> Result<Self, EloError> {
        if value.is_finite() {
            Ok(Rating(value))
        } else {
            Err(EloError::InvalidRating(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Moves the rating by `delta`, failing only if the result overflows.
    pub fn shifted(self, delta: f64) -> Result<Self, EloError> {
        Rating::new(self.0 + delta)
    }
}

impl TryFrom<f64> for Rating {
    type Error = EloError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Rating::new(value)
    }
}

impl From<Rating> for f64 {
    fn from(r: Rating) -> f64 {
        r.0
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.0)
    }
}

/// How a rating gap turns into a success probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityModel {
    /// `1 / (1 + exp(exercise - learner))`, natural-log odds per rating point.
    Logistic,
    /// `1 / (1 + 10^((exercise - learner) / 400))`.
    #[default]
    Chess,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EloConfig {
    pub k: f64,
    pub model: ProbabilityModel,
}

impl Default for EloConfig {
    fn default() -> Self {
        EloConfig {
            k: DEFAULT_K,
            model: ProbabilityModel::Chess,
        }
    }
}

impl EloConfig {
    pub fn new(k: f64, model: ProbabilityModel) -> Result<Self, EloError> {
        let cfg = EloConfig { k, model };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EloError> {
        if self.k.is_finite() && self.k > 0.0 {
            Ok(())
        } else {
            Err(EloError::InvalidLearningRate(self.k))
        }
    }
}

/// Whether the learner answered correctly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Incorrect,
    Correct,
}

impl Outcome {
    #[inline]
    pub fn score(self) -> f64 {
        match self {
            Outcome::Incorrect => 0.0,
            Outcome::Correct => 1.0,
        }
    }

    pub fn is_correct(self) -> bool {
        self == Outcome::Correct
    }
}

impl From<bool> for Outcome {
    fn from(correct: bool) -> Self {
        if correct {
            Outcome::Correct
        } else {
            Outcome::Incorrect
        }
    }
}

/// Success probability for a gap `learner - exercise`.
fn probability_from_gap(gap: f64, model: ProbabilityModel) -> f64 {
    match model {
        ProbabilityModel::Logistic => 1.0 / (1.0 + (-gap).exp()),
        ProbabilityModel::Chess => 1.0 / (1.0 + 10f64.powf(-gap / CHESS_SCALE)),
    }
}

/// Probability that `learner` answers `exercise` correctly.
///
/// Strictly increasing in the learner rating and strictly decreasing in the
/// exercise rating. For gaps beyond roughly 1.2e5 points (chess) or 700
/// points (logistic) the result rounds to exactly 0 or 1 in double precision.
pub fn expected_probability(learner: Rating, exercise: Rating, config: &EloConfig) -> f64 {
    probability_from_gap(learner.value() - exercise.value(), config.model)
}

/// Result of one rating update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingUpdate {
    pub learner: Rating,
    pub exercise: Rating,
    /// `k * (X - P)`: added to the learner, subtracted from the exercise.
    pub delta: f64,
    pub expected: f64,
}

/// Symmetric Elo update after a single attempt.
pub fn update_ratings(
    learner: Rating,
    exercise: Rating,
    outcome: Outcome,
    config: &EloConfig,
) -> Result<RatingUpdate, EloError> {
    config.validate()?;
    let expected = expected_probability(learner, exercise, config);
    let delta = config.k * (outcome.score() - expected);
    Ok(RatingUpdate {
        learner: learner.shifted(delta)?,
        exercise: exercise.shifted(-delta)?,
        delta,
        expected,
    })
}

/// Gap `learner - exercise` at which the modelled success probability equals
/// `target_p`. Inverse of [`expected_probability`] in the gap.
pub fn target_rating_gap(target_p: f64, config: &EloConfig) -> Result<f64, EloError> {
    if !(target_p > 0.0 && target_p < 1.0) {
        return Err(EloError::ProbabilityOutOfRange(target_p));
    }
    let odds = target_p / (1.0 - target_p);
    Ok(match config.model {
        ProbabilityModel::Logistic => odds.ln(),
        ProbabilityModel::Chess => CHESS_SCALE * odds.log10(),
    })
}
