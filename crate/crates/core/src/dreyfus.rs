//! Five-level mastery vocabulary shown to learners and teachers.
//!
//! Levels are anchored evenly over the 1000..2000 initialization range. Band
//! edges are half-open and lower-inclusive, so every anchor rating maps back
//! to its own level.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown mastery level {0:?}")]
pub struct UnknownLevel(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DreyfusLevel {
    Novice,
    AdvancedBeginner,
    Competent,
    Proficient,
    Expert,
}

impl DreyfusLevel {
    pub const ALL: [DreyfusLevel; 5] = [
        DreyfusLevel::Novice,
        DreyfusLevel::AdvancedBeginner,
        DreyfusLevel::Competent,
        DreyfusLevel::Proficient,
        DreyfusLevel::Expert,
    ];

    /// Rating a teacher label translates to on ingestion.
    pub fn anchor_rating(self) -> f64 {
        match self {
            DreyfusLevel::Novice => 1000.0,
            DreyfusLevel::AdvancedBeginner => 1250.0,
            DreyfusLevel::Competent => 1500.0,
            DreyfusLevel::Proficient => 1750.0,
            DreyfusLevel::Expert => 2000.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DreyfusLevel::Novice => "novice",
            DreyfusLevel::AdvancedBeginner => "advanced beginner",
            DreyfusLevel::Competent => "competent",
            DreyfusLevel::Proficient => "proficient",
            DreyfusLevel::Expert => "expert",
        }
    }
}

impl fmt::Display for DreyfusLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DreyfusLevel {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == '_' || c == '-' { ' ' } else { c })
            .collect();
        match norm.as_str() {
            "novice" => Ok(DreyfusLevel::Novice),
            "advanced beginner" => Ok(DreyfusLevel::AdvancedBeginner),
            "competent" => Ok(DreyfusLevel::Competent),
            "proficient" => Ok(DreyfusLevel::Proficient),
            "expert" => Ok(DreyfusLevel::Expert),
            _ => Err(UnknownLevel(s.to_string())),
        }
    }
}

/// Rating for a teacher-assigned level label.
pub fn dreyfus_to_rating(label: &str) -> Result<f64, UnknownLevel> {
    label.parse::<DreyfusLevel>().map(DreyfusLevel::anchor_rating)
}

/// Level band a rating falls into. Ratings below the scale are novices and
/// ratings above it are experts.
pub fn dreyfus_label(rating: f64) -> DreyfusLevel {
    if rating < 1250.0 {
        DreyfusLevel::Novice
    } else if rating < 1500.0 {
        DreyfusLevel::AdvancedBeginner
    } else if rating < 1750.0 {
        DreyfusLevel::Competent
    } else if rating < 2000.0 {
        DreyfusLevel::Proficient
    } else {
        DreyfusLevel::Expert
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(dreyfus_label(1000.0), DreyfusLevel::Novice);
        assert_eq!(dreyfus_label(1500.0), DreyfusLevel::Competent);
        assert_eq!(dreyfus_label(2400.0), DreyfusLevel::Expert);
        assert_eq!(dreyfus_label(-50.0), DreyfusLevel::Novice);
        assert_eq!(dreyfus_label(1749.999), DreyfusLevel::Competent);
        assert_eq!(dreyfus_label(1750.0), DreyfusLevel::Proficient);
    }

    #[test]
    fn labels_round_trip_through_ratings() {
        for level in DreyfusLevel::ALL {
            assert_eq!(dreyfus_label(level.anchor_rating()), level);
            assert_eq!(level.as_str().parse::<DreyfusLevel>().unwrap(), level);
        }
        assert_eq!(dreyfus_to_rating("competent").unwrap(), 1500.0);
        assert_eq!(dreyfus_to_rating("Novice").unwrap(), 1000.0);
        assert_eq!(dreyfus_to_rating("advanced_beginner").unwrap(), 1250.0);
        assert!(dreyfus_to_rating("grandmaster").is_err());
    }
}
