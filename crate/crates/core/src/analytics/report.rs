//! Group comparison report: screen each construct with a one-way ANOVA,
//! then compare the screened constructs pairwise.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::constructs::{score_constructs, Construct, ConstructScores};
use super::growth::{elo_growth, EloGrowthSummary};
use super::hypothesis::{
    f_test_equal_variance, mann_whitney_u_one_sided, mean, one_way_anova, pearson,
    t_test_one_sided, TestResult,
};
use super::AnalyticsError;
use crate::steering::Group;
use crate::study::{DatasetRow, QuestionnaireResponse};

pub const SCREEN_ALPHA: f64 = 0.10;
pub const ALPHA: f64 = 0.05;
pub const STAR_ALPHA: f64 = 0.01;
pub const STAR2_ALPHA: f64 = 0.001;

/// Column order of the pairwise comparisons.
pub const PAIRS: [(Group, Group); 3] = [
    (Group::None, Group::Control),
    (Group::None, Group::ControlImpact),
    (Group::Control, Group::ControlImpact),
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Welch instead of pooled-variance t-tests.
    #[serde(default)]
    pub welch: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredResponse {
    pub learner: String,
    pub group: Group,
    pub scores: ConstructScores,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCell {
    pub first: Group,
    pub second: Group,
    pub test: TestResult,
    /// Equal-variance F-test; absent when a sample has zero variance.
    pub variance_check: Option<TestResult>,
    pub significant: bool,
    /// `""` significant at 0.05, `"*"` below 0.01, `"**"` below 0.001, `"ns"` otherwise.
    pub marker: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructRow {
    pub construct: Construct,
    /// Group means in `Group::ALL` order.
    pub means: [f64; 3],
    pub anova: TestResult,
    pub screen_pass: bool,
    /// Empty unless the construct passed the screen.
    pub pairs: Vec<PairCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub first: Construct,
    pub second: Construct,
    pub r: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group_sizes: [usize; 3],
    pub rows: Vec<ConstructRow>,
    pub correlations: Vec<Correlation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<EloGrowthSummary>,
}

pub fn significance_marker(p: f64) -> &'static str {
    if p < STAR2_ALPHA {
        "**"
    } else if p < STAR_ALPHA {
        "*"
    } else if p < ALPHA {
        ""
    } else {
        "ns"
    }
}

/// Scores every accepted questionnaire in the dataset. A learner with more
/// than one accepted response contributes the last one.
pub fn scored_responses(rows: &[DatasetRow]) -> Result<Vec<ScoredResponse>, AnalyticsError> {
    type Latest<'a> = (Group, &'a BTreeMap<String, i64>, &'a BTreeMap<String, String>);
    let mut latest: BTreeMap<&str, Latest> = BTreeMap::new();
    for row in rows {
        if let DatasetRow::Questionnaire {
            learner,
            group,
            answers,
            free_text,
            ..
        } = row
        {
            latest.insert(learner, (*group, answers, free_text));
        }
    }
    latest
        .into_iter()
        .map(|(learner, (group, answers, free_text))| {
            let response = QuestionnaireResponse {
                answers: answers.clone(),
                free_text: free_text.clone(),
            };
            Ok(ScoredResponse {
                learner: learner.to_string(),
                group,
                scores: score_constructs(&response)?,
            })
        })
        .collect()
}

pub fn build_report(
    responses: &[ScoredResponse],
    opts: ReportOptions,
) -> Result<GroupReport, AnalyticsError> {
    let mut group_sizes = [0usize; 3];
    for r in responses {
        group_sizes[r.group.index()] += 1;
    }
    for g in Group::ALL {
        if group_sizes[g.index()] < 2 {
            return Err(AnalyticsError::MissingGroup {
                group: g,
                got: group_sizes[g.index()],
            });
        }
    }
    let values = |c: Construct, g: Group| -> Vec<f64> {
        responses
            .iter()
            .filter(|r| r.group == g)
            .map(|r| r.scores.get(c))
            .collect()
    };

    let mut rows = Vec::new();
    for c in Construct::ALL {
        let samples = Group::ALL.map(|g| values(c, g));
        let means = [mean(&samples[0]), mean(&samples[1]), mean(&samples[2])];
        let anova = one_way_anova(&[&samples[0], &samples[1], &samples[2]])?;
        let screen_pass = anova.p_value < SCREEN_ALPHA;
        let mut pairs = Vec::new();
        if screen_pass {
            for (first, second) in PAIRS {
                let a = &samples[first.index()];
                let b = &samples[second.index()];
                let test = if c == Construct::OneDimTrust {
                    mann_whitney_u_one_sided(a, b)?
                } else {
                    t_test_one_sided(a, b, opts.welch)?
                };
                pairs.push(PairCell {
                    first,
                    second,
                    variance_check: f_test_equal_variance(a, b).ok(),
                    significant: test.p_value < ALPHA,
                    marker: significance_marker(test.p_value).to_string(),
                    test,
                });
            }
        }
        rows.push(ConstructRow {
            construct: c,
            means,
            anova,
            screen_pass,
            pairs,
        });
    }

    let mut correlations = Vec::new();
    for (i, &x) in Construct::ALL.iter().enumerate() {
        let xs: Vec<f64> = responses.iter().map(|r| r.scores.get(x)).collect();
        for &y in &Construct::ALL[i + 1..] {
            let ys: Vec<f64> = responses.iter().map(|r| r.scores.get(y)).collect();
            correlations.push(Correlation {
                first: x,
                second: y,
                r: pearson(&xs, &ys),
            });
        }
    }

    Ok(GroupReport {
        group_sizes,
        rows,
        correlations,
        growth: None,
    })
}

/// Scores the questionnaires in an exported dataset, builds the report and
/// attaches the rating growth summary.
pub fn report_from_dataset(
    rows: &[DatasetRow],
    opts: ReportOptions,
) -> Result<GroupReport, AnalyticsError> {
    let responses = scored_responses(rows)?;
    let mut report = build_report(&responses, opts)?;
    report.growth = Some(elo_growth(rows));
    Ok(report)
}

fn cell(c: &PairCell) -> String {
    let mut s = format!("{:+.2}", c.test.effect_size);
    if c.marker == "ns" {
        s.push_str(" ns");
    } else {
        s.push_str(&c.marker);
    }
    s
}

impl GroupReport {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let [n0, n1, n2] = self.group_sizes;
        let _ = writeln!(out, "responses: NONE={n0} CONTROL={n1} CONTROL+IMPACT={n2}");
        let _ = writeln!(
            out,
            "{:<24}{:>7}{:>7}{:>7}{:>9}  {:<14}{:<14}{:<14}",
            "construct",
            "NONE",
            "CTRL",
            "C+I",
            "anova p",
            "NONE/CONTROL",
            "NONE/C+I",
            "CONTROL/C+I"
        );
        for row in &self.rows {
            let cells: Vec<String> = if row.pairs.is_empty() {
                vec!["-".into(); 3]
            } else {
                row.pairs.iter().map(cell).collect()
            };
            let _ = writeln!(
                out,
                "{:<24}{:>7.2}{:>7.2}{:>7.2}{:>9.4}  {:<14}{:<14}{:<14}",
                row.construct.as_str(),
                row.means[0],
                row.means[1],
                row.means[2],
                row.anova.p_value,
                cells[0],
                cells[1],
                cells[2]
            );
        }
        let _ = writeln!(
            out,
            "effect = second mean - first; * p<{STAR_ALPHA}, ** p<{STAR2_ALPHA}, ns p>={ALPHA}; \
             '-' = not screened (anova p>={SCREEN_ALPHA})"
        );
        if let Some(g) = &self.growth {
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "{:<16}{:>9}{:>10}{:>10}{:>10}{:>10}",
                "group", "learners", "start", "total", "attempts", "steering"
            );
            for gg in &g.groups {
                let _ = writeln!(
                    out,
                    "{:<16}{:>9}{:>10.1}{:>10.1}{:>10.1}{:>10.1}",
                    gg.group.to_string(),
                    gg.learners,
                    gg.mean_start,
                    gg.mean_total_change,
                    gg.mean_attempt_change,
                    gg.mean_steer_change
                );
            }
        }
        out
    }

    /// One JSON object per line: construct rows, then growth groups.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut v = serde_json::to_value(row).expect("report rows serialize");
            v["record"] = json!("construct");
            out.push_str(&v.to_string());
            out.push('\n');
        }
        if let Some(g) = &self.growth {
            for gg in &g.groups {
                let mut v = serde_json::to_value(gg).expect("growth rows serialize");
                v["record"] = json!("growth");
                out.push_str(&v.to_string());
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn response(learner: usize, group: Group, transparency_shift: i64, jitter: i64) -> ScoredResponse {
        let mut items = [4i64; 31];
        for (i, v) in items.iter_mut().enumerate() {
            *v = (3 + ((learner + i) as i64 + jitter) % 3).clamp(1, 7);
        }
        for v in &mut items[14..17] {
            *v += transparency_shift;
        }
        let r = QuestionnaireResponse::from_items(&items, "fine");
        ScoredResponse {
            learner: format!("L{learner}"),
            group,
            scores: score_constructs(&r).unwrap(),
        }
    }

    #[test]
    fn identical_groups_pass_nothing() {
        let rs: Vec<_> = (0..12)
            .map(|i| {
                let r = QuestionnaireResponse::uniform(4);
                ScoredResponse {
                    learner: format!("L{i}"),
                    group: Group::ALL[i % 3],
                    scores: score_constructs(&r).unwrap(),
                }
            })
            .collect();
        let rep = build_report(&rs, ReportOptions::default()).unwrap();
        assert!(rep.rows.iter().all(|r| !r.screen_pass && r.pairs.is_empty()));
    }

    #[test]
    fn shifted_transparency_is_flagged() {
        let mut rs = Vec::new();
        for i in 0..30 {
            let g = Group::ALL[i % 3];
            let shift = i64::from(g == Group::ControlImpact);
            rs.push(response(i / 3, g, shift, 0));
        }
        let rep = build_report(&rs, ReportOptions::default()).unwrap();
        let row = rep
            .rows
            .iter()
            .find(|r| r.construct == Construct::Transparency)
            .unwrap();
        assert!(row.screen_pass);
        let order: Vec<_> = row.pairs.iter().map(|p| (p.first, p.second)).collect();
        assert_eq!(order, PAIRS);
        assert!(row.pairs[1].test.effect_size > 0.0 && row.pairs[1].significant);
        assert!(row.pairs[2].test.effect_size > 0.0 && row.pairs[2].significant);
        let text = rep.to_text();
        assert!(text.contains("transparency"));
        assert_eq!(rep.to_jsonl().lines().count(), Construct::ALL.len());
    }

    #[test]
    fn missing_group_is_an_error() {
        let rs: Vec<_> = (0..6).map(|i| response(i, Group::ALL[i % 2], 0, 0)).collect();
        assert!(matches!(
            build_report(&rs, ReportOptions::default()),
            Err(AnalyticsError::MissingGroup {
                group: Group::ControlImpact,
                ..
            })
        ));
    }

    #[test]
    fn markers() {
        assert_eq!(significance_marker(0.0005), "**");
        assert_eq!(significance_marker(0.005), "*");
        assert_eq!(significance_marker(0.03), "");
        assert_eq!(significance_marker(0.05), "ns");
    }
}
