use super::*;
use crate::clock::StepClock;

fn entry(id: &str, topic: &str, rating: f64) -> CatalogEntry {
    CatalogEntry {
        id: id.into(),
        topic: topic.into(),
        statement: format!("exercise {id}"),
        choices: vec!["a".into(), "b".into(), "c".into()],
        correct_index: 1,
        rating: Some(rating),
        level: None,
    }
}

fn study(weights: [f64; 3]) -> Study {
    let cfg = StudyConfig {
        group_weights: weights,
        seed: 7,
        ..Default::default()
    };
    let mut s = Study::with_clock(cfg, Arc::new(StepClock::epoch())).unwrap();
    let entries = (0..12)
        .map(|i| entry(&format!("alg{i:02}"), "algebra", 1000.0 + 90.0 * i as f64))
        .chain((0..4).map(|i| entry(&format!("geo{i}"), "geometry", 1400.0 + 50.0 * i as f64)))
        .collect();
    s.ingest_catalog(entries).unwrap();
    s
}

fn run_series(s: &mut Study, id: &str, topic: Option<&str>, answers: &[usize]) {
    let rec = s.start_series(id, topic).unwrap();
    for (ex, a) in rec.exercises.iter().zip(answers) {
        s.attempt(id, ex, *a).unwrap();
    }
}

#[test]
fn degenerate_weights_fix_the_group() {
    let mut s = study([1.0, 0.0, 0.0]);
    for _ in 0..20 {
        assert_eq!(s.register().unwrap().profile.group, Group::None);
    }
    let mut s = study([0.0, 0.0, 2.0]);
    for _ in 0..20 {
        assert_eq!(s.register().unwrap().profile.group, Group::ControlImpact);
    }
}

#[test]
fn assignments_replay_under_fixed_seed() {
    let groups = |seed| {
        let cfg = StudyConfig {
            seed,
            ..Default::default()
        };
        let mut s = Study::with_clock(cfg, Arc::new(StepClock::epoch())).unwrap();
        (0..6)
            .map(|_| s.register().unwrap().profile.group)
            .collect::<Vec<_>>()
    };
    assert_eq!(groups(42), groups(42));
}

#[test]
fn invalid_configs() {
    let bad = StudyConfig {
        group_weights: [0.0; 3],
        ..Default::default()
    };
    assert!(Study::new(bad).is_err());
    let bad = StudyConfig {
        group_weights: [1.0, -1.0, 1.0],
        ..Default::default()
    };
    assert!(Study::new(bad).is_err());
    let bad = StudyConfig {
        series_count: 0,
        ..Default::default()
    };
    assert!(Study::new(bad).is_err());
}

#[test]
fn happy_path_control_impact() {
    let mut s = study([0.0, 0.0, 1.0]);
    let id = s.register().unwrap().profile.id.clone();
    assert_eq!(s.initialize_mastery(&id, 0.5).unwrap().value(), 1500.0);
    assert_eq!(
        s.acknowledge_explanation(&id).unwrap(),
        vec![Screen::Global, Screen::ControlExplainer]
    );
    for series in 1..=3 {
        run_series(&mut s, &id, Some("algebra"), &[1, 0]);
        assert_eq!(s.learner(&id).unwrap().state, FlowState::AwaitSteer { series });
        s.steer(&id, SteeringStep::new(5).unwrap()).unwrap();
        let next = s.acknowledge_impact(&id).unwrap();
        if series < 3 {
            assert_eq!(
                next,
                FlowState::Practising {
                    series: series + 1,
                    exercise: 1
                }
            );
        } else {
            assert_eq!(next, FlowState::Questionnaire);
        }
    }
    s.submit_questionnaire(&id, QuestionnaireResponse::uniform(4))
        .unwrap();
    let l = s.learner(&id).unwrap();
    assert_eq!(l.state, FlowState::FreeUse);
    assert_eq!(l.attempt_history.len(), 6);
    // init + 6 attempts + 3 steers
    assert_eq!(s.history(&id).unwrap().len(), 10);
}

#[test]
fn none_group_gets_forbidden_control() {
    let mut s = study([1.0, 0.0, 0.0]);
    let id = s.register().unwrap().profile.id.clone();
    s.initialize_mastery(&id, 0.2).unwrap();
    s.acknowledge_explanation(&id).unwrap();
    run_series(&mut s, &id, Some("algebra"), &[1, 1]);
    let before = s.learner(&id).unwrap().clone();
    let err = s.steer(&id, SteeringStep::new(3).unwrap()).unwrap_err();
    assert!(matches!(
        err,
        StudyError::Steering(SteeringError::ForbiddenControl { .. })
    ));
    assert_eq!(s.learner(&id).unwrap(), &before);
}

#[test]
fn series_requires_mastery_and_explanation() {
    let mut s = study([1.0, 1.0, 1.0]);
    let id = s.register().unwrap().profile.id.clone();
    let err = s.start_series(&id, Some("algebra")).unwrap_err();
    assert_eq!(err.flow_state(), Some(FlowState::Registered));
    s.initialize_mastery(&id, 0.4).unwrap();
    assert!(matches!(
        s.start_series(&id, Some("algebra")),
        Err(StudyError::Flow(_))
    ));
    assert!(matches!(
        s.initialize_mastery(&id, 0.4),
        Err(StudyError::Flow(_))
    ));
}

#[test]
fn attempts_must_follow_the_series() {
    let mut s = study([1.0, 0.0, 0.0]);
    let id = s.register().unwrap().profile.id.clone();
    s.initialize_mastery(&id, 0.5).unwrap();
    s.acknowledge_explanation(&id).unwrap();
    let rec = s.start_series(&id, Some("algebra")).unwrap();
    let err = s.attempt(&id, &rec.exercises[1], 0).unwrap_err();
    assert!(matches!(err, StudyError::NotNextExercise { .. }));
    s.attempt(&id, &rec.exercises[0], 0).unwrap();
    s.attempt(&id, &rec.exercises[1], 0).unwrap();
    // Series 2 has not been composed yet.
    let err = s.attempt(&id, &rec.exercises[0], 0).unwrap_err();
    assert!(matches!(err, StudyError::NoActiveSeries { .. }));
    // The topic carries over when not given.
    let rec2 = s.start_series(&id, None).unwrap();
    assert_eq!(rec2.topic, "algebra");
}

#[test]
fn incomplete_questionnaire_is_quarantined() {
    let mut s = study([1.0, 0.0, 0.0]);
    let id = s.register().unwrap().profile.id.clone();
    s.initialize_mastery(&id, 0.5).unwrap();
    s.acknowledge_explanation(&id).unwrap();
    for _ in 0..3 {
        run_series(&mut s, &id, Some("geometry"), &[1, 2]);
    }
    let mut partial = QuestionnaireResponse::uniform(4);
    partial.answers.remove("Q30");
    let err = s.submit_questionnaire(&id, partial).unwrap_err();
    assert_eq!(
        err,
        StudyError::Questionnaire(QuestionnaireError::MissingItem("Q30".into()))
    );
    assert_eq!(s.quarantine().len(), 1);
    assert_eq!(s.learner(&id).unwrap().state, FlowState::Questionnaire);
    s.submit_questionnaire(&id, QuestionnaireResponse::uniform(5))
        .unwrap();
    assert_eq!(s.learner(&id).unwrap().state, FlowState::FreeUse);
}

#[test]
fn free_use_attempts_are_flagged() {
    let mut s = study([1.0, 0.0, 0.0]);
    let id = s.register().unwrap().profile.id.clone();
    s.initialize_mastery(&id, 0.5).unwrap();
    s.acknowledge_explanation(&id).unwrap();
    for _ in 0..3 {
        run_series(&mut s, &id, Some("algebra"), &[1, 1]);
    }
    s.submit_questionnaire(&id, QuestionnaireResponse::uniform(4))
        .unwrap();
    run_series(&mut s, &id, Some("algebra"), &[1]);
    let rows = export_dataset(s.log()).unwrap();
    let post: Vec<_> = rows
        .iter()
        .filter(|r| matches!(r, DatasetRow::EloChange { post_study: true, .. }))
        .collect();
    assert_eq!(post.len(), 1);
    let questionnaires = rows
        .iter()
        .filter(|r| matches!(r, DatasetRow::Questionnaire { .. }))
        .count();
    assert_eq!(questionnaires, 1);
}

#[test]
fn log_replays_to_identical_state() {
    let mut s = study([1.0, 1.0, 1.0]);
    for n in 0..9 {
        let l = s.register().unwrap();
        let id = l.profile.id.clone();
        let group = l.profile.group;
        s.initialize_mastery(&id, n as f64 / 9.0).unwrap();
        s.acknowledge_explanation(&id).unwrap();
        for k in 0..3 {
            run_series(&mut s, &id, Some("algebra"), &[(n + k) % 3, 1]);
            if group.can_steer() {
                s.steer(&id, SteeringStep::new(n as i64 - 4).unwrap()).unwrap();
            }
            if group.sees_impact() {
                s.acknowledge_impact(&id).unwrap();
            }
        }
    }
    let text = to_jsonl(s.log());
    let records = read_jsonl(text.as_bytes()).unwrap();
    assert_eq!(records, s.log());
    let replayed = Study::replay(s.config().clone(), &records, Arc::new(StepClock::epoch())).unwrap();
    assert_eq!(replayed.state(), s.state());
    assert_eq!(to_jsonl(replayed.log()), text);
}

#[test]
fn tampered_log_is_rejected() {
    let mut s = study([1.0, 0.0, 0.0]);
    let id = s.register().unwrap().profile.id.clone();
    s.initialize_mastery(&id, 0.5).unwrap();
    s.acknowledge_explanation(&id).unwrap();
    run_series(&mut s, &id, Some("algebra"), &[1, 1]);
    let mut records = s.log().to_vec();
    let pos = records
        .iter()
        .position(|r| matches!(r.event, StudyEvent::AttemptRecorded { .. }))
        .unwrap();
    if let StudyEvent::AttemptRecorded { attempt, .. } = &mut records[pos].event {
        attempt.delta += 1.0;
    }
    let err = Study::replay(s.config().clone(), &records, Arc::new(StepClock::epoch())).unwrap_err();
    assert!(matches!(err, StudyError::Replay { .. }), "{err}");

    let mut gap = s.log().to_vec();
    gap.remove(1);
    assert!(Study::replay(s.config().clone(), &gap, Arc::new(StepClock::epoch())).is_err());
}

#[test]
fn learner_sequence_numbers_are_monotone() {
    let mut s = study([0.0, 1.0, 0.0]);
    let a = s.register().unwrap().profile.id.clone();
    let b = s.register().unwrap().profile.id.clone();
    s.initialize_mastery(&a, 0.1).unwrap();
    s.initialize_mastery(&b, 0.9).unwrap();
    s.acknowledge_explanation(&a).unwrap();
    for id in [&a, &b] {
        let seqs: Vec<u64> = s
            .log()
            .iter()
            .filter(|r| r.learner.as_deref() == Some(id.as_str()))
            .map(|r| r.learner_seq.unwrap())
            .collect();
        assert!(seqs.windows(2).all(|w| w[1] == w[0] + 1));
        assert_eq!(seqs[0], 1);
    }
    let global: Vec<u64> = s.log().iter().map(|r| r.seq).collect();
    assert!(global.windows(2).all(|w| w[1] == w[0] + 1));
}

#[test]
fn screens_by_group() {
    assert_eq!(explanation_screens(Group::None).len(), 1);
    assert_eq!(explanation_screens(Group::Control).len(), 2);
    assert_eq!(explanation_screens(Group::ControlImpact).len(), 2);
}

#[test]
fn log_record_wire_shape() {
    let mut s = study([0.0, 1.0, 0.0]);
    s.register().unwrap();
    let v: serde_json::Value = serde_json::to_value(&s.log()[1]).unwrap();
    assert_eq!(v["v"], 1);
    assert_eq!(v["seq"], 2);
    assert_eq!(v["learner"], "L00001");
    assert_eq!(v["learner_seq"], 1);
    assert_eq!(v["type"], "registered");
    assert_eq!(v["group"], "control");
    assert_eq!(v["timestamp"], "1970-01-01T00:00:01Z");
}
