//! Does the rating estimate find a known ability? Exercise ratings are held
//! fixed so the only moving quantity is the learner rating.

use serde::{Deserialize, Serialize};

use super::{learner_rng, simulate_answer, SimLearner, SteeringPolicy};
use crate::elo::{update_ratings, EloConfig, ProbabilityModel, Rating};
use crate::recommender::{select_series, Exercise, RecommenderConfig};

/// Number of trailing ratings averaged for the terminal estimate.
pub const TERMINAL_WINDOW: usize = 50;
/// A catalog with no exercise this close to the ability is flagged narrow.
pub const NARROW_CATALOG_RADIUS: f64 = 400.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSetup {
    pub latent_theta: f64,
    pub start_rating: f64,
    pub attempts: usize,
    /// Zero disables learning.
    pub k: f64,
    pub target_p: f64,
    pub seed: u64,
}

impl Default for ConvergenceSetup {
    fn default() -> Self {
        ConvergenceSetup {
            latent_theta: 1600.0,
            start_rating: 1200.0,
            attempts: 200,
            k: crate::elo::DEFAULT_K,
            target_p: 0.7,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRun {
    /// Start rating followed by the rating after each attempt.
    pub trajectory: Vec<f64>,
    pub terminal_mean: f64,
    pub abs_error: f64,
    pub narrow_catalog: bool,
}

/// `count` single-topic exercises with ratings evenly spaced over `[min, max]`.
pub fn dense_catalog(topic: &str, min: f64, max: f64, count: usize) -> Vec<Exercise> {
    let step = if count > 1 { (max - min) / (count - 1) as f64 } else { 0.0 };
    (0..count)
        .map(|i| {
            let rating = min + step * i as f64;
            Exercise::new(
                format!("{topic}-{i:04}"),
                topic,
                format!("{topic} exercise {i}"),
                vec!["A".into(), "B".into(), "C".into(), "D".into()],
                0,
                Rating::new(rating).expect("finite rating"),
            )
            .expect("well-formed generated exercise")
        })
        .collect()
}

pub fn convergence_experiment(
    setup: &ConvergenceSetup,
    catalog: &[Exercise],
) -> Result<ConvergenceRun, crate::recommender::RecommendError> {
    let narrow_catalog = !catalog
        .iter()
        .any(|e| (e.rating.value() - setup.latent_theta).abs() <= NARROW_CATALOG_RADIUS);
    let rec_cfg = RecommenderConfig {
        target_p: setup.target_p,
        series_size: 1,
        no_repeat_window: 0,
        freeze_exercise_ratings: true,
    };
    let elo = EloConfig {
        k: setup.k,
        model: ProbabilityModel::Chess,
    };
    let pool: Vec<&Exercise> = catalog.iter().collect();
    let mut sim = SimLearner::new(
        setup.latent_theta,
        Rating::new(setup.start_rating)?,
        SteeringPolicy::Never,
        learner_rng(setup.seed, 0),
    );
    let mut rating = sim.start_rating;
    let mut trajectory = Vec::with_capacity(setup.attempts + 1);
    trajectory.push(rating.value());
    for _ in 0..setup.attempts {
        if setup.k > 0.0 {
            // Selection uses a unit k so k = 0 never reaches validation.
            let sel_elo = EloConfig { k: 1.0, ..elo };
            let (ex, _) = select_series(rating, &pool, &[], &rec_cfg, &sel_elo)?[0];
            let outcome = simulate_answer(&mut sim, ex);
            rating = update_ratings(rating, ex.rating, outcome, &elo)?.learner;
        }
        trajectory.push(rating.value());
    }
    let tail = &trajectory[trajectory.len().saturating_sub(TERMINAL_WINDOW)..];
    let terminal_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    Ok(ConvergenceRun {
        abs_error: (terminal_mean - setup.latent_theta).abs(),
        trajectory,
        terminal_mean,
        narrow_catalog,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_learning_rate_is_constant() {
        let setup = ConvergenceSetup {
            k: 0.0,
            ..Default::default()
        };
        let run = convergence_experiment(&setup, &dense_catalog("c", 1000.0, 2000.0, 101)).unwrap();
        assert_eq!(run.trajectory.len(), 201);
        assert!(run.trajectory.iter().all(|&r| r == 1200.0));
    }

    #[test]
    fn narrow_catalog_is_flagged() {
        let setup = ConvergenceSetup::default();
        let run = convergence_experiment(&setup, &dense_catalog("c", 500.0, 1100.0, 20)).unwrap();
        assert!(run.narrow_catalog);
        let run = convergence_experiment(&setup, &dense_catalog("c", 1000.0, 2000.0, 101)).unwrap();
        assert!(!run.narrow_catalog);
    }

    #[test]
    fn start_at_ability_stays_close() {
        let setup = ConvergenceSetup {
            start_rating: 1600.0,
            seed: 3,
            ..Default::default()
        };
        let run = convergence_experiment(&setup, &dense_catalog("c", 1000.0, 2000.0, 101)).unwrap();
        let k = setup.k;
        assert!(run
            .trajectory
            .iter()
            .all(|r| (r - 1600.0).abs() <= k * setup.attempts as f64));
    }
}
