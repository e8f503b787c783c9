//! Learner-facing mastery: initialization from the level slider, bounded
//! self-steering, and the timeline behind the impact chart.

use std::fmt;
use std::io::{self, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Clock;
use crate::dreyfus::{dreyfus_label, DreyfusLevel};
use crate::elo::{EloError, Rating};

/// Bottom of the initialization slider.
pub const SCALE_MIN: f64 = 1000.0;
/// Top of the initialization slider.
pub const SCALE_MAX: f64 = 2000.0;
/// Largest steering magnitude, in percent of the current rating.
pub const MAX_STEER_PERCENT: i8 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SteeringError {
    #[error("slider position must lie in [0, 1], got {0}")]
    SliderOutOfRange(f64),
    #[error("learner {0} already initialized their mastery")]
    AlreadyInitialized(String),
    #[error("learner {0} has not initialized their mastery")]
    Uninitialized(String),
    #[error("steering step must be an integer in [-10, 10], got {0}")]
    StepOutOfRange(f64),
    #[error("learner {learner} is in group {group} which has no steering control")]
    ForbiddenControl { learner: String, group: Group },
    #[error(transparent)]
    Rating(#[from] EloError),
}

/// Research arm. Decides which control features a learner sees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    None,
    Control,
    ControlImpact,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::None, Group::Control, Group::ControlImpact];

    pub fn can_steer(self) -> bool {
        !matches!(self, Group::None)
    }

    pub fn sees_impact(self) -> bool {
        matches!(self, Group::ControlImpact)
    }

    pub fn index(self) -> usize {
        match self {
            Group::None => 0,
            Group::Control => 1,
            Group::ControlImpact => 2,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::None => "NONE",
            Group::Control => "CONTROL",
            Group::ControlImpact => "CONTROL+IMPACT",
        })
    }
}

/// One detent of the 21-position steering slider, in percent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct SteeringStep(i8);

impl SteeringStep {
    pub const KEEP: SteeringStep = SteeringStep(0);

    pub fn new(step: i64) -> Result<Self, SteeringError> {
        if step.unsigned_abs() <= MAX_STEER_PERCENT as u64 {
            Ok(SteeringStep(step as i8))
        } else {
            Err(SteeringError::StepOutOfRange(step as f64))
        }
    }

    /// Accepts only integral values, e.g. from a JSON number.
    pub fn from_f64(step: f64) -> Result<Self, SteeringError> {
        if step.is_finite() && step.fract() == 0.0 && step.abs() <= MAX_STEER_PERCENT as f64 {
            Ok(SteeringStep(step as i8))
        } else {
            Err(SteeringError::StepOutOfRange(step))
        }
    }

    pub fn percent(self) -> i8 {
        self.0
    }

    /// Multiplier applied to the current rating.
    pub fn factor(self) -> f64 {
        f64::from(100 + i32::from(self.0)) / 100.0
    }

    /// All 21 detents from -10 to +10.
    pub fn detents() -> impl Iterator<Item = SteeringStep> {
        (-MAX_STEER_PERCENT..=MAX_STEER_PERCENT).map(SteeringStep)
    }
}

impl TryFrom<i64> for SteeringStep {
    type Error = SteeringError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        SteeringStep::new(v)
    }
}

impl From<SteeringStep> for i64 {
    fn from(s: SteeringStep) -> i64 {
        i64::from(s.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasteryEventKind {
    Init,
    Attempt,
    Steer,
}

impl fmt::Display for MasteryEventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MasteryEventKind::Init => "INIT",
            MasteryEventKind::Attempt => "ATTEMPT",
            MasteryEventKind::Steer => "STEER",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MasteryDetail {
    Init { slider_position: f64 },
    Attempt { exercise_id: String, correct: bool },
    Steer { step: SteeringStep },
}

/// One node of a learner's mastery timeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasteryEvent {
    pub kind: MasteryEventKind,
    #[serde(rename = "pre")]
    pub pre_rating: Rating,
    #[serde(rename = "post")]
    pub post_rating: Rating,
    pub detail: MasteryDetail,
    pub timestamp: DateTime<Utc>,
}

impl MasteryEvent {
    pub fn delta(&self) -> f64 {
        self.post_rating.value() - self.pre_rating.value()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerProfile {
    pub id: String,
    pub group: Group,
    timeline: Vec<MasteryEvent>,
}

impl LearnerProfile {
    pub fn new(id: impl Into<String>, group: Group) -> Self {
        LearnerProfile {
            id: id.into(),
            group,
            timeline: Vec::new(),
        }
    }

    pub fn is_initialized(&self) -> bool {
        !self.timeline.is_empty()
    }

    /// Current mastery rating: the post-rating of the latest timeline event.
    pub fn rating(&self) -> Result<Rating, SteeringError> {
        self.timeline
            .last()
            .map(|e| e.post_rating)
            .ok_or_else(|| SteeringError::Uninitialized(self.id.clone()))
    }

    pub fn timeline(&self) -> &[MasteryEvent] {
        &self.timeline
    }

    /// Appends an event. Callers are responsible for keeping `pre_rating`
    /// equal to the current rating.
    pub(crate) fn push_event(&mut self, event: MasteryEvent) {
        debug_assert!(self
            .timeline
            .last()
            .is_none_or(|last| last.post_rating == event.pre_rating));
        self.timeline.push(event);
    }

    /// Folds the recorded deltas from the initial rating.
    pub fn replayed_rating(&self) -> Option<f64> {
        let first = self.timeline.first()?;
        Some(
            self.timeline
                .iter()
                .skip(1)
                .fold(first.post_rating.value(), |acc, e| acc + e.delta()),
        )
    }
}

/// Rating for a position on the initialization slider.
pub fn slider_to_rating(position: f64) -> Result<Rating, SteeringError> {
    if !(0.0..=1.0).contains(&position) {
        return Err(SteeringError::SliderOutOfRange(position));
    }
    Ok(Rating::new(SCALE_MIN + (SCALE_MAX - SCALE_MIN) * position)?)
}

pub fn initialize_mastery(
    profile: &mut LearnerProfile,
    slider_position: f64,
    clock: &dyn Clock,
) -> Result<MasteryEvent, SteeringError> {
    if profile.is_initialized() {
        return Err(SteeringError::AlreadyInitialized(profile.id.clone()));
    }
    let rating = slider_to_rating(slider_position)?;
    let event = MasteryEvent {
        kind: MasteryEventKind::Init,
        pre_rating: rating,
        post_rating: rating,
        detail: MasteryDetail::Init { slider_position },
        timestamp: clock.now(),
    };
    profile.push_event(event.clone());
    Ok(event)
}

/// Scales the learner's rating by `1 + step/100`. A zero step is recorded
/// as an explicit "keep".
pub fn apply_steering(
    profile: &mut LearnerProfile,
    step: SteeringStep,
    clock: &dyn Clock,
) -> Result<MasteryEvent, SteeringError> {
    if !profile.group.can_steer() {
        return Err(SteeringError::ForbiddenControl {
            learner: profile.id.clone(),
            group: profile.group,
        });
    }
    let pre = profile.rating()?;
    let post = Rating::new(pre.value() * step.factor())?;
    let event = MasteryEvent {
        kind: MasteryEventKind::Steer,
        pre_rating: pre,
        post_rating: post,
        detail: MasteryDetail::Steer { step },
        timestamp: clock.now(),
    };
    profile.push_event(event.clone());
    Ok(event)
}

/// One point of the impact chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub kind: MasteryEventKind,
    pub level: DreyfusLevel,
    pub pre_rating: f64,
    pub post_rating: f64,
    pub detail: MasteryDetail,
    pub timestamp: DateTime<Utc>,
}

pub fn mastery_history(profile: &LearnerProfile) -> Result<Vec<HistoryPoint>, SteeringError> {
    if !profile.is_initialized() {
        return Err(SteeringError::Uninitialized(profile.id.clone()));
    }
    Ok(profile
        .timeline
        .iter()
        .map(|e| HistoryPoint {
            kind: e.kind,
            level: dreyfus_label(e.post_rating.value()),
            pre_rating: e.pre_rating.value(),
            post_rating: e.post_rating.value(),
            detail: e.detail.clone(),
            timestamp: e.timestamp,
        })
        .collect())
}

/// Writes the timeline as one JSON record per line.
pub fn write_timeline_jsonl<W: Write>(profile: &LearnerProfile, mut out: W) -> io::Result<()> {
    for event in &profile.timeline {
        serde_json::to_writer(&mut out, event)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::StepClock;
    use proptest::prelude::*;

    fn profile(group: Group, start: f64) -> LearnerProfile {
        let mut p = LearnerProfile::new("L1", group);
        initialize_mastery(&mut p, (start - SCALE_MIN) / 1000.0, &StepClock::epoch()).unwrap();
        p
    }

    #[test]
    fn slider_endpoints() {
        let clock = StepClock::epoch();
        for (pos, expected) in [(0.0, 1000.0), (1.0, 2000.0), (0.5, 1500.0)] {
            let mut p = LearnerProfile::new("a", Group::None);
            let ev = initialize_mastery(&mut p, pos, &clock).unwrap();
            assert_eq!(ev.post_rating.value(), expected);
            assert_eq!(ev.pre_rating, ev.post_rating);
            assert_eq!(p.rating().unwrap().value(), expected);
        }
    }

    #[test]
    fn slider_rejects_bad_positions_and_double_init() {
        let clock = StepClock::epoch();
        let mut p = LearnerProfile::new("a", Group::Control);
        assert!(matches!(
            initialize_mastery(&mut p, 1.01, &clock),
            Err(SteeringError::SliderOutOfRange(_))
        ));
        assert!(initialize_mastery(&mut p, f64::NAN, &clock).is_err());
        initialize_mastery(&mut p, 0.3, &clock).unwrap();
        assert!(matches!(
            initialize_mastery(&mut p, 0.3, &clock),
            Err(SteeringError::AlreadyInitialized(_))
        ));
    }

    #[test]
    fn steering_bounds() {
        let clock = StepClock::epoch();
        for (step, expected) in [(10, 1650.0), (-10, 1350.0), (0, 1500.0)] {
            let mut p = profile(Group::Control, 1500.0);
            let ev = apply_steering(&mut p, SteeringStep::new(step).unwrap(), &clock).unwrap();
            assert!((ev.post_rating.value() - expected).abs() < 1e-9);
            assert_eq!(p.timeline().len(), 2);
        }
    }

    #[test]
    fn none_group_cannot_steer() {
        let mut p = profile(Group::None, 1500.0);
        let before = p.clone();
        let err = apply_steering(&mut p, SteeringStep::new(5).unwrap(), &StepClock::epoch());
        assert!(matches!(err, Err(SteeringError::ForbiddenControl { .. })));
        assert_eq!(p, before);
    }

    #[test]
    fn step_validation() {
        assert!(SteeringStep::new(11).is_err());
        assert!(SteeringStep::new(-11).is_err());
        assert!(SteeringStep::from_f64(2.5).is_err());
        assert!(SteeringStep::from_f64(f64::NAN).is_err());
        assert_eq!(SteeringStep::from_f64(-3.0).unwrap().percent(), -3);
        assert_eq!(SteeringStep::detents().count(), 21);
        assert!(serde_json::from_str::<SteeringStep>("12").is_err());
        assert!(serde_json::from_str::<SteeringStep>("1.5").is_err());
    }

    #[test]
    fn history_requires_init() {
        let p = LearnerProfile::new("x", Group::Control);
        assert!(matches!(mastery_history(&p), Err(SteeringError::Uninitialized(_))));
        let p = profile(Group::Control, 1500.0);
        let h = mastery_history(&p).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].kind, MasteryEventKind::Init);
        assert_eq!((h[0].pre_rating, h[0].post_rating), (1500.0, 1500.0));
        assert_eq!(h[0].level, DreyfusLevel::Competent);
    }

    #[test]
    fn timeline_export_is_line_delimited() {
        let mut p = profile(Group::Control, 1500.0);
        apply_steering(&mut p, SteeringStep::new(-4).unwrap(), &StepClock::epoch()).unwrap();
        let mut buf = Vec::new();
        write_timeline_jsonl(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["kind"], "steer");
        assert_eq!(v["detail"]["step"], -4);
        assert_eq!(v["pre"], 1500.0);
        let back: MasteryEvent = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(&back, &p.timeline()[1]);
    }

    proptest! {
        #[test]
        fn steering_never_exceeds_ten_percent(
            start in 0.0f64..=1.0,
            steps in proptest::collection::vec(-10i64..=10, 1..40),
        ) {
            let clock = StepClock::epoch();
            let mut p = LearnerProfile::new("p", Group::ControlImpact);
            initialize_mastery(&mut p, start, &clock).unwrap();
            for s in steps {
                let ev = apply_steering(&mut p, SteeringStep::new(s).unwrap(), &clock).unwrap();
                let pre = ev.pre_rating.value();
                prop_assert!(ev.delta().abs() <= 0.10 * pre.abs() + 1e-9);
            }
            let replayed = p.replayed_rating().unwrap();
            prop_assert!((replayed - p.rating().unwrap().value()).abs() < 1e-9);
        }
    }
}
