//! Seeded synthetic study runs. Simulated learners have a hidden ability,
//! answer with the engine's own success model and steer by a fixed policy.

mod convergence;

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{elo_growth, EloGrowthSummary};
use crate::clock::StepClock;
use crate::elo::{expected_probability, EloConfig, Outcome, ProbabilityModel, Rating};
use crate::recommender::{parse_catalog_jsonl, CatalogEntry, Exercise, RecommenderConfig};
use crate::steering::{Group, SteeringStep};
use crate::study::{export_dataset, LogRecord, QuestionnaireResponse, Study, StudyConfig, StudyError};

pub use convergence::{
    convergence_experiment, dense_catalog, ConvergenceRun, ConvergenceSetup, NARROW_CATALOG_RADIUS,
    TERMINAL_WINDOW,
};

/// Keeps simulator streams apart from group-assignment streams.
const STREAM_SALT: u64 = 0x5EED_51A7_0000_0001;
/// Step size of the random policy.
pub const RANDOM_POLICY_STEP: i64 = 5;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid trial config: {0}")]
    InvalidConfig(String),
    #[error("reading catalog {path}: {source}")]
    Catalog {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SteeringPolicy {
    Never,
    /// Up after a fully correct series, down after a fully incorrect one.
    Ambitious { up: SteeringStep, down: SteeringStep },
    /// Up with probability `p_up`, otherwise down, by [`RANDOM_POLICY_STEP`].
    Random { p_up: f64 },
}

impl Default for SteeringPolicy {
    fn default() -> Self {
        SteeringPolicy::Ambitious {
            up: SteeringStep::new(10).expect("valid step"),
            down: SteeringStep::new(-5).expect("valid step"),
        }
    }
}

impl SteeringPolicy {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            SteeringPolicy::Random { p_up } if !(0.0..=1.0).contains(p_up) => Err(
                SimError::InvalidConfig(format!("p_up must lie in [0, 1], got {p_up}")),
            ),
            _ => Ok(()),
        }
    }

    /// Step after a series with `correct` right answers out of `total`.
    pub fn choose<R: Rng + ?Sized>(&self, correct: usize, total: usize, rng: &mut R) -> SteeringStep {
        match *self {
            SteeringPolicy::Never => SteeringStep::KEEP,
            SteeringPolicy::Ambitious { up, down } => {
                if correct == total {
                    up
                } else if correct == 0 {
                    down
                } else {
                    SteeringStep::KEEP
                }
            }
            SteeringPolicy::Random { p_up } => {
                let s = if rng.random::<f64>() < p_up {
                    RANDOM_POLICY_STEP
                } else {
                    -RANDOM_POLICY_STEP
                };
                SteeringStep::new(s).expect("valid step")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimLearner {
    pub latent_theta: f64,
    pub start_rating: Rating,
    pub policy: SteeringPolicy,
    pub rng: ChaCha8Rng,
}

impl SimLearner {
    pub fn new(latent_theta: f64, start_rating: Rating, policy: SteeringPolicy, rng: ChaCha8Rng) -> Self {
        assert!(latent_theta.is_finite(), "latent ability must be finite");
        SimLearner {
            latent_theta,
            start_rating,
            policy,
            rng,
        }
    }
}

/// Stream for the learner with registration number `index`.
pub fn learner_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ STREAM_SALT);
    rng.set_stream(index);
    rng
}

/// Draws an answer: correct with the chess-model probability of the latent
/// ability against the exercise rating.
pub fn simulate_answer(sim: &mut SimLearner, exercise: &Exercise) -> Outcome {
    let p = expected_probability(
        Rating::new(sim.latent_theta).expect("finite ability"),
        exercise.rating,
        &EloConfig {
            k: 1.0,
            model: ProbabilityModel::Chess,
        },
    );
    Outcome::from(sim.rng.random::<f64>() < p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogSpec {
    /// `count` exercises on one topic with evenly spaced ratings.
    Generated {
        topic: String,
        count: usize,
        min_rating: f64,
        max_rating: f64,
    },
    /// A catalog file in the ingest format.
    File { path: PathBuf },
}

impl Default for CatalogSpec {
    fn default() -> Self {
        CatalogSpec::Generated {
            topic: "practice".into(),
            count: 71,
            min_rating: 800.0,
            max_rating: 2200.0,
        }
    }
}

impl CatalogSpec {
    pub fn entries(&self) -> Result<Vec<CatalogEntry>, SimError> {
        match self {
            CatalogSpec::Generated {
                topic,
                count,
                min_rating,
                max_rating,
            } => {
                if *count < 2 || min_rating.partial_cmp(max_rating) != Some(std::cmp::Ordering::Less) {
                    return Err(SimError::InvalidConfig(
                        "generated catalog needs count >= 2 and min_rating < max_rating".into(),
                    ));
                }
                Ok(dense_catalog(topic, *min_rating, *max_rating, *count)
                    .into_iter()
                    .map(|e| CatalogEntry {
                        id: e.id,
                        topic: e.topic,
                        statement: e.statement,
                        choices: e.choices,
                        correct_index: e.correct_index,
                        rating: Some(e.rating.value()),
                        level: None,
                    })
                    .collect())
            }
            CatalogSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|source| SimError::Catalog {
                    path: path.clone(),
                    source,
                })?;
                parse_catalog_jsonl(&text).map_err(|e| SimError::Study(e.into()))
            }
        }
    }
}

/// Hidden abilities and self-assessed starting positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Population {
    pub theta_mean: f64,
    pub theta_sd: f64,
    /// Noise of the learner's own starting estimate around the true ability.
    pub self_assessment_sd: f64,
}

impl Default for Population {
    fn default() -> Self {
        Population {
            theta_mean: 1500.0,
            theta_sd: 200.0,
            self_assessment_sd: 150.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub learners_per_group: usize,
    pub series_count: u32,
    pub k: f64,
    pub seed: u64,
    pub policy: SteeringPolicy,
    pub catalog: CatalogSpec,
    /// Defaults to the first topic of the catalog.
    pub topic: Option<String>,
    pub population: Population,
    pub recommender: RecommenderConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            learners_per_group: 25,
            series_count: 3,
            k: crate::elo::DEFAULT_K,
            seed: 0,
            policy: SteeringPolicy::default(),
            catalog: CatalogSpec::default(),
            topic: None,
            population: Population::default(),
            recommender: RecommenderConfig::default(),
        }
    }
}

impl TrialConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: TrialConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn study_config(&self) -> StudyConfig {
        StudyConfig {
            series_count: self.series_count,
            group_weights: [1.0; 3],
            seed: self.seed,
            elo: EloConfig {
                k: self.k,
                model: ProbabilityModel::Chess,
            },
            recommender: self.recommender.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.policy.validate()?;
        let p = &self.population;
        if !(p.theta_mean.is_finite() && p.theta_sd >= 0.0 && p.self_assessment_sd >= 0.0) {
            return Err(SimError::InvalidConfig("population parameters must be finite and sds non-negative".into()));
        }
        self.study_config().validate()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub log: Vec<LogRecord>,
    pub growth: EloGrowthSummary,
}

/// Draws a learner's hidden ability and starting slider position.
fn draw_learner(cfg: &TrialConfig, index: u64) -> (SimLearner, f64) {
    let mut rng = learner_rng(cfg.seed, index);
    let p = &cfg.population;
    let theta = Normal::new(p.theta_mean, p.theta_sd)
        .expect("validated sd")
        .sample(&mut rng);
    let guess = Normal::new(theta, p.self_assessment_sd)
        .expect("validated sd")
        .sample(&mut rng);
    let position = ((guess - 1000.0) / 1000.0).clamp(0.0, 1.0);
    let start = crate::steering::slider_to_rating(position).expect("clamped position");
    (SimLearner::new(theta, start, cfg.policy, rng), position)
}

/// Runs every simulated learner through the full study flow.
///
/// Learners register round-robin over the groups and then run one after the
/// other in registration order, sharing the catalog.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialOutcome, SimError> {
    cfg.validate()?;
    if cfg.learners_per_group == 0 {
        return Ok(TrialOutcome {
            log: Vec::new(),
            growth: elo_growth(&[]),
        });
    }
    let mut study = Study::with_clock(cfg.study_config(), Arc::new(StepClock::epoch()))?;
    study.ingest_catalog(cfg.catalog.entries()?)?;
    let topic = match &cfg.topic {
        Some(t) => t.clone(),
        None => study
            .catalog()
            .topics()
            .into_iter()
            .next()
            .ok_or_else(|| SimError::InvalidConfig("catalog is empty".into()))?
            .to_string(),
    };

    let mut ids = Vec::new();
    for _ in 0..cfg.learners_per_group {
        for g in Group::ALL {
            ids.push((study.register_in_group(g)?.profile.id.clone(), g));
        }
    }
    let questionnaire = QuestionnaireResponse::uniform(4);
    for (index, (id, group)) in ids.iter().enumerate() {
        let (mut sim, position) = draw_learner(cfg, index as u64 + 1);
        study.initialize_mastery(id, position)?;
        study.acknowledge_explanation(id)?;
        for _ in 0..cfg.series_count {
            let rec = study.start_series(id, Some(&topic))?;
            let mut correct = 0;
            for ex_id in &rec.exercises {
                let ex = study.catalog().get(ex_id).expect("composed from catalog").clone();
                let outcome = simulate_answer(&mut sim, &ex);
                let answer = if outcome.is_correct() {
                    ex.correct_index
                } else {
                    (ex.correct_index + 1) % ex.choices.len()
                };
                correct += usize::from(outcome.is_correct());
                study.attempt(id, ex_id, answer)?;
            }
            if group.can_steer() {
                let step = sim.policy.choose(correct, rec.exercises.len(), &mut sim.rng);
                study.steer(id, step)?;
            }
            if group.sees_impact() {
                study.acknowledge_impact(id)?;
            }
        }
        study.submit_questionnaire(id, questionnaire.clone())?;
    }
    let log = study.log().to_vec();
    let growth = elo_growth(&export_dataset(&log)?);
    Ok(TrialOutcome { log, growth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn learner(theta: f64, seed: u64) -> SimLearner {
        SimLearner::new(theta, Rating::new(1500.0).unwrap(), SteeringPolicy::Never, learner_rng(seed, 1))
    }

    fn exercise(rating: f64) -> Exercise {
        dense_catalog("t", rating, rating + 1.0, 2).remove(0)
    }

    fn rate(theta: f64, rating: f64) -> f64 {
        let mut sim = learner(theta, 11);
        let ex = exercise(rating);
        let n = 100_000;
        (0..n).filter(|_| simulate_answer(&mut sim, &ex).is_correct()).count() as f64 / n as f64
    }

    #[test]
    fn answer_rates_match_model() {
        assert!((rate(1500.0, 1500.0) - 0.5).abs() < 0.01);
        assert!((rate(1900.0, 1500.0) - 10.0 / 11.0).abs() < 0.01);
    }

    #[test]
    fn answers_are_deterministic() {
        let ex = exercise(1400.0);
        let draw = || {
            let mut sim = learner(1500.0, 3);
            (0..64).map(|_| simulate_answer(&mut sim, &ex)).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn ambitious_policy() {
        let p = SteeringPolicy::default();
        let mut rng = learner_rng(0, 0);
        assert_eq!(p.choose(2, 2, &mut rng).percent(), 10);
        assert_eq!(p.choose(0, 2, &mut rng).percent(), -5);
        assert_eq!(p.choose(1, 2, &mut rng), SteeringStep::KEEP);
        assert_eq!(SteeringPolicy::Never.choose(2, 2, &mut rng), SteeringStep::KEEP);
    }

    #[test]
    fn config_from_toml() {
        let cfg = TrialConfig::from_toml(
            r#"
            learners_per_group = 4
            seed = 9
            [policy]
            kind = "random"
            p_up = 0.25
            [catalog]
            kind = "generated"
            topic = "fractions"
            count = 30
            min_rating = 900.0
            max_rating = 2100.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.learners_per_group, 4);
        assert_eq!(cfg.policy, SteeringPolicy::Random { p_up: 0.25 });
        assert!(TrialConfig::from_toml("series_count = 0").is_err());
        assert!(TrialConfig::from_toml("[policy]\nkind = \"ambitious\"\nup = 11\ndown = -1").is_err());
        assert!(TrialConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn empty_trial_has_empty_log() {
        let cfg = TrialConfig {
            learners_per_group: 0,
            ..Default::default()
        };
        assert!(run_trial(&cfg).unwrap().log.is_empty());
    }

    #[test]
    fn small_trial_completes_and_is_deterministic() {
        let cfg = TrialConfig {
            learners_per_group: 3,
            seed: 5,
            ..Default::default()
        };
        let a = run_trial(&cfg).unwrap();
        let b = run_trial(&cfg).unwrap();
        assert_eq!(crate::study::to_jsonl(&a.log), crate::study::to_jsonl(&b.log));
        assert_eq!(a.growth.learners.len(), 9);
        let none = &a.growth.groups[0];
        assert_eq!(none.group, Group::None);
        assert_eq!(none.mean_steer_change, 0.0);
    }
}
