//! Elo-rated exercise recommendation with learner-steerable mastery.

pub mod analytics;
pub mod clock;
pub mod dreyfus;
pub mod elo;
pub mod recommender;
pub mod service;
pub mod sim;
pub mod steering;
pub mod study;
