//! Append-only study event log.
//!
//! Each line is one JSON record. `seq` is global and strictly increasing;
//! `learner_seq` counts the records of one learner starting at 1. Replaying
//! the records in order rebuilds the study state exactly.

use std::io::{self, BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::questionnaire::QuestionnaireResponse;
use super::Screen;
use crate::elo::Rating;
use crate::recommender::{AttemptRecord, Exercise};
use crate::steering::{Group, SteeringStep};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StudyEvent {
    CatalogIngested {
        exercises: Vec<Exercise>,
    },
    Registered {
        group: Group,
    },
    MasteryInitialized {
        slider_position: f64,
        rating: Rating,
    },
    ExplanationAcknowledged {
        screens: Vec<Screen>,
    },
    SeriesComposed {
        /// 0 for series started after the study proper.
        series_index: u32,
        topic: String,
        exercises: Vec<String>,
        expected_probabilities: Vec<f64>,
    },
    AttemptRecorded {
        series_index: u32,
        post_study: bool,
        attempt: AttemptRecord,
    },
    Steered {
        series_index: u32,
        step: SteeringStep,
        pre: Rating,
        post: Rating,
    },
    ImpactAcknowledged {
        series_index: u32,
    },
    QuestionnaireSubmitted {
        response: QuestionnaireResponse,
    },
    /// An invalid submission, kept aside and excluded from analysis.
    QuestionnaireQuarantined {
        response: QuestionnaireResponse,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub v: u32,
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner_seq: Option<u64>,
    pub timestamp: DateTime<Utc>,
    #[serde(flatten)]
    pub event: StudyEvent,
}

pub fn write_jsonl<W: Write>(records: &[LogRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl(records: &[LogRecord]) -> String {
    let mut buf = Vec::new();
    write_jsonl(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<Vec<LogRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogRecord = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("log line {}: {e}", i + 1))
        })?;
        out.push(rec);
    }
    Ok(out)
}
