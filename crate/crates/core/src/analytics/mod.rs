//! Questionnaire scoring and group comparisons over an exported dataset.

mod constructs;
mod growth;
mod hypothesis;
mod report;
pub mod special;

use thiserror::Error;

use crate::steering::Group;
use crate::study::QuestionnaireError;

pub use constructs::{reverse_score, score_constructs, Construct, ConstructScores, REVERSED_ITEMS};
pub use growth::{elo_growth, EloGrowthSummary, GroupGrowth, LearnerGrowth};
pub use hypothesis::{
    f_test_equal_variance, mann_whitney_null_counts, mann_whitney_u_one_sided, mean,
    one_way_anova, pearson, t_test_one_sided, variance, Method, TestResult, EXACT_MWU_MAX_N,
};
pub use report::{
    build_report, report_from_dataset, scored_responses, significance_marker, ConstructRow,
    Correlation, GroupReport, PairCell, ReportOptions, ScoredResponse, ALPHA, PAIRS,
    SCREEN_ALPHA, STAR_ALPHA, STAR2_ALPHA,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("need at least two groups, got {0}")]
    TooFewGroups(usize),
    #[error("observations must be finite")]
    NonFinite,
    #[error("reference sample has zero variance")]
    ZeroVariance,
    #[error("group {group} has {got} responses, need at least 2")]
    MissingGroup { group: Group, got: usize },
    #[error(transparent)]
    Questionnaire(#[from] QuestionnaireError),
}
