//! Rating growth per learner and group, keeping changes from answering
//! apart from changes the learner steered.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hypothesis::{mean, t_test_one_sided, TestResult};
use super::report::PAIRS;
use crate::steering::Group;
use crate::study::{ChangeSource, DatasetRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerGrowth {
    pub learner: String,
    pub group: Group,
    pub start: f64,
    pub last: f64,
    pub attempt_change: f64,
    pub steer_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupGrowth {
    pub group: Group,
    pub learners: usize,
    pub mean_start: f64,
    pub mean_last: f64,
    pub mean_total_change: f64,
    pub mean_attempt_change: f64,
    pub mean_steer_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloGrowthSummary {
    pub learners: Vec<LearnerGrowth>,
    pub groups: Vec<GroupGrowth>,
    /// One-sided t-tests on attempt-only change, in report pair order.
    /// `None` where a group has fewer than two learners.
    pub attempt_change_tests: Vec<Option<TestResult>>,
}

/// Summarises in-study rating changes; free-use attempts are ignored.
pub fn elo_growth(rows: &[DatasetRow]) -> EloGrowthSummary {
    let mut per: BTreeMap<&str, LearnerGrowth> = BTreeMap::new();
    for row in rows {
        let DatasetRow::EloChange {
            learner,
            group,
            source,
            pre,
            post,
            delta,
            post_study,
            ..
        } = row
        else {
            continue;
        };
        if *post_study {
            continue;
        }
        let g = per.entry(learner).or_insert_with(|| LearnerGrowth {
            learner: learner.clone(),
            group: *group,
            start: *pre,
            last: *pre,
            attempt_change: 0.0,
            steer_change: 0.0,
        });
        match source {
            ChangeSource::Init => g.start = *post,
            ChangeSource::Attempt => g.attempt_change += delta,
            ChangeSource::Steer => g.steer_change += delta,
        }
        g.last = *post;
    }
    let learners: Vec<LearnerGrowth> = per.into_values().collect();
    let of = |g: Group| learners.iter().filter(move |l| l.group == g);
    let groups = Group::ALL
        .iter()
        .filter_map(|&group| {
            let ls: Vec<_> = of(group).collect();
            if ls.is_empty() {
                return None;
            }
            let m = |f: &dyn Fn(&LearnerGrowth) -> f64| mean(&ls.iter().map(|l| f(l)).collect::<Vec<_>>());
            Some(GroupGrowth {
                group,
                learners: ls.len(),
                mean_start: m(&|l| l.start),
                mean_last: m(&|l| l.last),
                mean_total_change: m(&|l| l.last - l.start),
                mean_attempt_change: m(&|l| l.attempt_change),
                mean_steer_change: m(&|l| l.steer_change),
            })
        })
        .collect();
    let attempt_change_tests = PAIRS
        .iter()
        .map(|&(first, second)| {
            let a: Vec<f64> = of(first).map(|l| l.attempt_change).collect();
            let b: Vec<f64> = of(second).map(|l| l.attempt_change).collect();
            t_test_one_sided(&a, &b, false).ok()
        })
        .collect();
    EloGrowthSummary {
        learners,
        groups,
        attempt_change_tests,
    }
}
