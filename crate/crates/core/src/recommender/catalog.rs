use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::RecommendError;
use crate::dreyfus::dreyfus_to_rating;
use crate::elo::Rating;

/// A multiple-choice item with its difficulty rating.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exercise {
    pub id: String,
    pub topic: String,
    pub statement: String,
    pub choices: Vec<String>,
    pub correct_index: usize,
    pub rating: Rating,
}

impl Exercise {
    pub fn new(
        id: impl Into<String>,
        topic: impl Into<String>,
        statement: impl Into<String>,
        choices: Vec<String>,
        correct_index: usize,
        rating: Rating,
    ) -> Result<Self, RecommendError> {
        let ex = Exercise {
            id: id.into(),
            topic: topic.into(),
            statement: statement.into(),
            choices,
            correct_index,
            rating,
        };
        ex.validate()?;
        Ok(ex)
    }

    pub fn validate(&self) -> Result<(), RecommendError> {
        let malformed = |reason: &str| RecommendError::MalformedEntry {
            line: None,
            reason: format!("exercise {:?}: {reason}", self.id),
        };
        if self.id.trim().is_empty() {
            return Err(malformed("empty id"));
        }
        if self.topic.trim().is_empty() {
            return Err(malformed("empty topic"));
        }
        if self.choices.len() < 2 {
            return Err(malformed("needs at least two choices"));
        }
        if self.correct_index >= self.choices.len() {
            return Err(malformed("correct_index out of range"));
        }
        Ok(())
    }

    pub fn is_correct(&self, answer_index: usize) -> bool {
        answer_index == self.correct_index
    }
}

/// One line of a catalog file. Exactly one of `rating` and `level` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub id: String,
    pub topic: String,
    pub statement: String,
    pub choices: Vec<String>,
    pub correct_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
}

impl CatalogEntry {
    pub fn into_exercise(self) -> Result<Exercise, RecommendError> {
        let rating = match (self.rating, self.level.as_deref()) {
            (Some(r), None) => Rating::new(r).map_err(|e| RecommendError::MalformedEntry {
                line: None,
                reason: format!("exercise {:?}: {e}", self.id),
            })?,
            (None, Some(label)) => {
                let r = dreyfus_to_rating(label).map_err(|_| RecommendError::UnknownLevel {
                    id: self.id.clone(),
                    label: label.to_string(),
                })?;
                Rating::new(r).expect("anchor ratings are finite")
            }
            _ => {
                return Err(RecommendError::MalformedEntry {
                    line: None,
                    reason: format!(
                        "exercise {:?}: exactly one of `rating` and `level` is required",
                        self.id
                    ),
                })
            }
        };
        Exercise::new(
            self.id,
            self.topic,
            self.statement,
            self.choices,
            self.correct_index,
            rating,
        )
    }
}

/// Parses a line-delimited catalog file. Blank lines and lines starting with
/// `#` are skipped.
pub fn parse_catalog_jsonl(text: &str) -> Result<Vec<CatalogEntry>, RecommendError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| RecommendError::MalformedEntry {
                line: Some(i + 1),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Exercise store keyed by id, with topic lookup.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    exercises: BTreeMap<String, Exercise>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.exercises.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exercises.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Exercise> {
        self.exercises.get(id)
    }

    pub fn exercises(&self) -> impl Iterator<Item = &Exercise> {
        self.exercises.values()
    }

    pub fn topics(&self) -> BTreeSet<&str> {
        self.exercises.values().map(|e| e.topic.as_str()).collect()
    }

    pub fn has_topic(&self, topic: &str) -> bool {
        self.exercises.values().any(|e| e.topic == topic)
    }

    pub fn in_topic<'a>(&'a self, topic: &'a str) -> impl Iterator<Item = &'a Exercise> + 'a {
        self.exercises.values().filter(move |e| e.topic == topic)
    }

    pub fn insert(&mut self, exercise: Exercise) -> Result<(), RecommendError> {
        exercise.validate()?;
        match self.exercises.entry(exercise.id.clone()) {
            Entry::Occupied(_) => Err(RecommendError::DuplicateId(exercise.id)),
            Entry::Vacant(v) => {
                v.insert(exercise);
                Ok(())
            }
        }
    }

    /// Adds every exercise or none of them.
    pub fn extend(&mut self, exercises: Vec<Exercise>) -> Result<(), RecommendError> {
        let mut seen = BTreeSet::new();
        for ex in &exercises {
            ex.validate()?;
            if self.exercises.contains_key(&ex.id) || !seen.insert(ex.id.as_str()) {
                return Err(RecommendError::DuplicateId(ex.id.clone()));
            }
        }
        for ex in exercises {
            self.exercises.insert(ex.id.clone(), ex);
        }
        Ok(())
    }

    pub(crate) fn set_rating(&mut self, id: &str, rating: Rating) -> Result<(), RecommendError> {
        let ex = self
            .exercises
            .get_mut(id)
            .ok_or_else(|| RecommendError::UnknownExercise(id.to_string()))?;
        ex.rating = rating;
        Ok(())
    }
}

/// Builds a catalog from file entries, mapping level labels to ratings.
pub fn ingest_catalog(
    entries: impl IntoIterator<Item = CatalogEntry>,
) -> Result<Catalog, RecommendError> {
    let exercises = entries
        .into_iter()
        .map(CatalogEntry::into_exercise)
        .collect::<Result<Vec<_>, _>>()?;
    let mut catalog = Catalog::new();
    catalog.extend(exercises)?;
    Ok(catalog)
}
