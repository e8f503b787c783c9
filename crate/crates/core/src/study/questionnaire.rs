use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of Likert items.
pub const ITEM_COUNT: u8 = 31;
pub const LIKERT_MIN: u8 = 1;
pub const LIKERT_MAX: u8 = 7;
/// Free-text question every participant must answer.
pub const TRUST_QUESTION: &str = "trust";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuestionnaireError {
    #[error("missing answer for {0}")]
    MissingItem(String),
    #[error("answer {value} for {item} is outside 1..=7")]
    OutOfRange { item: String, value: i64 },
    #[error("unknown questionnaire item {0:?}")]
    UnknownItem(String),
    #[error("free-text answer to the trust question is required")]
    MissingTrustText,
}

pub fn item_id(n: u8) -> String {
    format!("Q{n}")
}

fn item_number(id: &str) -> Option<u8> {
    let n: u8 = id.strip_prefix('Q')?.parse().ok()?;
    (1..=ITEM_COUNT).contains(&n).then_some(n)
}

/// Answers keyed `Q1`..`Q31`, plus free-text answers keyed by question id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireResponse {
    pub answers: BTreeMap<String, i64>,
    #[serde(default)]
    pub free_text: BTreeMap<String, String>,
}

impl QuestionnaireResponse {
    /// Every item answered with `value`, with a placeholder trust answer.
    pub fn uniform(value: i64) -> Self {
        let answers = (1..=ITEM_COUNT).map(|n| (item_id(n), value)).collect();
        let free_text = [(TRUST_QUESTION.to_string(), "no comment".to_string())].into();
        QuestionnaireResponse { answers, free_text }
    }

    /// Builds a response from 31 answers in item order.
    pub fn from_items(items: &[i64; ITEM_COUNT as usize], trust_text: &str) -> Self {
        let answers = items
            .iter()
            .enumerate()
            .map(|(i, v)| (item_id(i as u8 + 1), *v))
            .collect();
        let free_text = [(TRUST_QUESTION.to_string(), trust_text.to_string())].into();
        QuestionnaireResponse { answers, free_text }
    }

    pub fn validate(&self) -> Result<(), QuestionnaireError> {
        for key in self.answers.keys() {
            if item_number(key).is_none() {
                return Err(QuestionnaireError::UnknownItem(key.clone()));
            }
        }
        for n in 1..=ITEM_COUNT {
            let id = item_id(n);
            match self.answers.get(&id) {
                None => return Err(QuestionnaireError::MissingItem(id)),
                Some(&v) if !(i64::from(LIKERT_MIN)..=i64::from(LIKERT_MAX)).contains(&v) => {
                    return Err(QuestionnaireError::OutOfRange { item: id, value: v })
                }
                Some(_) => {}
            }
        }
        match self.free_text.get(TRUST_QUESTION) {
            Some(t) if !t.trim().is_empty() => Ok(()),
            _ => Err(QuestionnaireError::MissingTrustText),
        }
    }

    /// Answer to item `n` (1-based). Only meaningful after validation.
    pub fn item(&self, n: u8) -> Option<u8> {
        self.answers.get(&item_id(n)).map(|v| *v as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_response_accepted() {
        QuestionnaireResponse::uniform(4).validate().unwrap();
    }

    #[test]
    fn missing_item_named() {
        let mut r = QuestionnaireResponse::uniform(4);
        r.answers.remove("Q17");
        assert_eq!(r.validate(), Err(QuestionnaireError::MissingItem("Q17".into())));
    }

    #[test]
    fn out_of_range_rejected() {
        let mut r = QuestionnaireResponse::uniform(4);
        r.answers.insert("Q3".into(), 8);
        assert_eq!(
            r.validate(),
            Err(QuestionnaireError::OutOfRange {
                item: "Q3".into(),
                value: 8
            })
        );
        r.answers.insert("Q3".into(), 0);
        assert!(r.validate().is_err());
    }

    #[test]
    fn unknown_items_and_trust_text() {
        let mut r = QuestionnaireResponse::uniform(4);
        r.answers.insert("Q32".into(), 4);
        assert_eq!(r.validate(), Err(QuestionnaireError::UnknownItem("Q32".into())));

        let mut r = QuestionnaireResponse::uniform(4);
        r.free_text.insert(TRUST_QUESTION.into(), "   ".into());
        assert_eq!(r.validate(), Err(QuestionnaireError::MissingTrustText));
        r.free_text.clear();
        assert_eq!(r.validate(), Err(QuestionnaireError::MissingTrustText));
    }
}
