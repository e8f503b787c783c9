use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::study::{QuestionnaireError, QuestionnaireResponse};

/// Items whose wording is negated and must be reversed before averaging.
pub const REVERSED_ITEMS: [u8; 3] = [19, 20, 25];

pub fn reverse_score(value: i64) -> Result<i64, AnalyticsError> {
    if !(1..=7).contains(&value) {
        return Err(AnalyticsError::Questionnaire(QuestionnaireError::OutOfRange {
            item: "value".into(),
            value,
        }));
    }
    Ok(8 - value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construct {
    Competence,
    Benevolence,
    Integrity,
    OneDimTrust,
    IntentionToReturn,
    Transparency,
    Control,
    PreferenceElicitation,
    PreferenceRevision,
    TrustingBeliefs,
    MultidimTrust,
}

impl Construct {
    /// Report order: composites next to their parts.
    pub const ALL: [Construct; 11] = [
        Construct::Competence,
        Construct::Benevolence,
        Construct::Integrity,
        Construct::TrustingBeliefs,
        Construct::IntentionToReturn,
        Construct::Transparency,
        Construct::MultidimTrust,
        Construct::OneDimTrust,
        Construct::Control,
        Construct::PreferenceElicitation,
        Construct::PreferenceRevision,
    ];

    /// Questionnaire items of a subscale; empty for composites.
    pub fn items(self) -> std::ops::RangeInclusive<u8> {
        match self {
            Construct::Competence => 1..=5,
            Construct::Benevolence => 6..=8,
            Construct::Integrity => 9..=11,
            Construct::OneDimTrust => 12..=12,
            Construct::IntentionToReturn => 13..=14,
            Construct::Transparency => 15..=17,
            Construct::Control => 18..=21,
            Construct::PreferenceElicitation => 22..=25,
            Construct::PreferenceRevision => 26..=31,
            #[allow(clippy::reversed_empty_ranges)]
            Construct::TrustingBeliefs | Construct::MultidimTrust => 1..=0,
        }
    }

    pub fn is_composite(self) -> bool {
        matches!(self, Construct::TrustingBeliefs | Construct::MultidimTrust)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Construct::Competence => "competence",
            Construct::Benevolence => "benevolence",
            Construct::Integrity => "integrity",
            Construct::OneDimTrust => "one_dim_trust",
            Construct::IntentionToReturn => "intention_to_return",
            Construct::Transparency => "transparency",
            Construct::Control => "control",
            Construct::PreferenceElicitation => "preference_elicitation",
            Construct::PreferenceRevision => "preference_revision",
            Construct::TrustingBeliefs => "trusting_beliefs",
            Construct::MultidimTrust => "multidim_trust",
        }
    }
}

impl fmt::Display for Construct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructScores {
    pub competence: f64,
    pub benevolence: f64,
    pub integrity: f64,
    pub one_dim_trust: f64,
    pub intention_to_return: f64,
    pub transparency: f64,
    pub control: f64,
    pub preference_elicitation: f64,
    pub preference_revision: f64,
    pub trusting_beliefs: f64,
    pub multidim_trust: f64,
}

impl ConstructScores {
    pub fn get(&self, c: Construct) -> f64 {
        match c {
            Construct::Competence => self.competence,
            Construct::Benevolence => self.benevolence,
            Construct::Integrity => self.integrity,
            Construct::OneDimTrust => self.one_dim_trust,
            Construct::IntentionToReturn => self.intention_to_return,
            Construct::Transparency => self.transparency,
            Construct::Control => self.control,
            Construct::PreferenceElicitation => self.preference_elicitation,
            Construct::PreferenceRevision => self.preference_revision,
            Construct::TrustingBeliefs => self.trusting_beliefs,
            Construct::MultidimTrust => self.multidim_trust,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn score_constructs(response: &QuestionnaireResponse) -> Result<ConstructScores, AnalyticsError> {
    response.validate()?;
    let item = |n: u8| -> f64 {
        let v = response.item(n).expect("validated response has every item");
        if REVERSED_ITEMS.contains(&n) {
            (8 - v) as f64
        } else {
            v as f64
        }
    };
    let sub = |c: Construct| -> f64 {
        let vals: Vec<f64> = c.items().map(item).collect();
        mean(&vals)
    };
    let competence = sub(Construct::Competence);
    let benevolence = sub(Construct::Benevolence);
    let integrity = sub(Construct::Integrity);
    let intention_to_return = sub(Construct::IntentionToReturn);
    let transparency = sub(Construct::Transparency);
    let trusting_beliefs = mean(&[competence, benevolence, integrity]);
    Ok(ConstructScores {
        competence,
        benevolence,
        integrity,
        one_dim_trust: sub(Construct::OneDimTrust),
        intention_to_return,
        transparency,
        control: sub(Construct::Control),
        preference_elicitation: sub(Construct::PreferenceElicitation),
        preference_revision: sub(Construct::PreferenceRevision),
        trusting_beliefs,
        multidim_trust: mean(&[trusting_beliefs, intention_to_return, transparency]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reverse_endpoints() {
        assert_eq!(reverse_score(1).unwrap(), 7);
        assert_eq!(reverse_score(4).unwrap(), 4);
        assert_eq!(reverse_score(7).unwrap(), 1);
        assert!(reverse_score(0).is_err());
        assert!(reverse_score(8).is_err());
    }

    #[test]
    fn neutral_response_scores_four() {
        let s = score_constructs(&QuestionnaireResponse::uniform(4)).unwrap();
        for c in Construct::ALL {
            assert_eq!(s.get(c), 4.0, "{c}");
        }
    }

    #[test]
    fn subscale_means() {
        let mut items = [4i64; 31];
        items[..5].copy_from_slice(&[7, 7, 7, 1, 1]);
        items[17..21].copy_from_slice(&[7, 1, 1, 1]);
        let s = score_constructs(&QuestionnaireResponse::from_items(&items, "ok")).unwrap();
        assert!((s.competence - 4.6).abs() < 1e-12);
        // Q19 and Q20 reversed, Q21 not
        assert_eq!(s.control, 5.5);
    }

    #[test]
    fn incomplete_response_rejected() {
        let mut r = QuestionnaireResponse::uniform(4);
        r.answers.remove("Q12");
        assert!(score_constructs(&r).is_err());
    }

    proptest! {
        #[test]
        fn reverse_is_involution(v in 1i64..=7) {
            prop_assert_eq!(reverse_score(reverse_score(v).unwrap()).unwrap(), v);
        }

        #[test]
        fn scores_bounded_and_composites_exact(items in proptest::array::uniform31(1i64..=7)) {
            let s = score_constructs(&QuestionnaireResponse::from_items(&items, "t")).unwrap();
            for c in Construct::ALL {
                prop_assert!((1.0..=7.0).contains(&s.get(c)));
            }
            let tb = (s.competence + s.benevolence + s.integrity) / 3.0;
            prop_assert!((s.trusting_beliefs - tb).abs() < 1e-12);
            let md = (s.trusting_beliefs + s.intention_to_return + s.transparency) / 3.0;
            prop_assert!((s.multidim_trust - md).abs() < 1e-12);
        }
    }
}
