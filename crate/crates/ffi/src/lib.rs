//! C ABI over the rating engine and the study orchestrator.
//!
//! Every function returns an [`EsStatus`]. On failure a description is kept
//! per thread and can be read with [`es_last_error_message`]. Strings handed
//! out by the library are owned by the caller and released with
//! [`es_string_free`]; structured values travel as JSON text.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use elosteer::dreyfus::{dreyfus_label, DreyfusLevel};
use elosteer::elo::{self, EloConfig, Outcome, ProbabilityModel, Rating};
use elosteer::recommender::CatalogEntry;
use elosteer::steering::{SteeringError, SteeringStep};
use elosteer::study::{QuestionnaireResponse, Study, StudyConfig, StudyError};
use serde_json::json;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    InvalidJson = 4,
    FlowViolation = 5,
    ForbiddenControl = 6,
    NotFound = 7,
    Rejected = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EsModel {
    Chess = 0,
    Logistic = 1,
}

impl From<EsModel> for ProbabilityModel {
    fn from(m: EsModel) -> Self {
        match m {
            EsModel::Chess => ProbabilityModel::Chess,
            EsModel::Logistic => ProbabilityModel::Logistic,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EsRatingUpdate {
    pub learner: f64,
    pub exercise: f64,
    pub delta: f64,
    pub expected: f64,
}

/// Opaque study handle.
pub struct EsStudy {
    study: Study,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(EsStatus, String);

impl From<StudyError> for Failure {
    fn from(e: StudyError) -> Self {
        let status = match &e {
            StudyError::Flow(_) | StudyError::NoActiveSeries { .. } | StudyError::NotNextExercise { .. } => {
                EsStatus::FlowViolation
            }
            StudyError::Steering(SteeringError::ForbiddenControl { .. }) => EsStatus::ForbiddenControl,
            StudyError::UnknownLearner(_) => EsStatus::NotFound,
            _ => EsStatus::Rejected,
        };
        Failure(status, e.to_string())
    }
}

impl From<elo::EloError> for Failure {
    fn from(e: elo::EloError) -> Self {
        Failure(EsStatus::InvalidArgument, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(EsStatus::InvalidJson, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording the error message and catching panics.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            EsStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(EsStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(EsStatus::InvalidUtf8, e.to_string()))
}

unsafe fn study<'a>(h: *mut EsStudy) -> Result<&'a mut Study, Failure> {
    h.as_mut().map(|h| &mut h.study).ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn write_json(out: *mut *mut c_char, v: &serde_json::Value) -> Result<(), Failure> {
    let s = CString::new(v.to_string()).expect("JSON has no nul bytes");
    write(out, s.into_raw())
}

fn config(k: f64, model: EsModel) -> EloConfig {
    EloConfig {
        k,
        model: model.into(),
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn es_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn es_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_expected_probability(
    learner: f64,
    exercise: f64,
    model: EsModel,
    out: *mut f64,
) -> EsStatus {
    guard(|| {
        let p = elo::expected_probability(
            Rating::new(learner)?,
            Rating::new(exercise)?,
            &config(elo::DEFAULT_K, model),
        );
        write(out, p)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_update_ratings(
    learner: f64,
    exercise: f64,
    correct: bool,
    k: f64,
    model: EsModel,
    out: *mut EsRatingUpdate,
) -> EsStatus {
    guard(|| {
        let u = elo::update_ratings(
            Rating::new(learner)?,
            Rating::new(exercise)?,
            Outcome::from(correct),
            &config(k, model),
        )?;
        write(
            out,
            EsRatingUpdate {
                learner: u.learner.value(),
                exercise: u.exercise.value(),
                delta: u.delta,
                expected: u.expected,
            },
        )
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_target_rating_gap(target_p: f64, model: EsModel, out: *mut f64) -> EsStatus {
    guard(|| write(out, elo::target_rating_gap(target_p, &config(elo::DEFAULT_K, model))?))
}

/// Multiplicative factor of a steering step in -10..=10.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_steering_factor(step: i32, out: *mut f64) -> EsStatus {
    guard(|| {
        let s = SteeringStep::new(i64::from(step))
            .map_err(|e| Failure(EsStatus::InvalidArgument, e.to_string()))?;
        write(out, s.factor())
    })
}

/// Label of the level band containing `rating`; a static string.
#[no_mangle]
pub extern "C" fn es_dreyfus_label(rating: f64) -> *const c_char {
    let label: &'static CStr = match dreyfus_label(rating) {
        DreyfusLevel::Novice => c"novice",
        DreyfusLevel::AdvancedBeginner => c"advanced_beginner",
        DreyfusLevel::Competent => c"competent",
        DreyfusLevel::Proficient => c"proficient",
        DreyfusLevel::Expert => c"expert",
    };
    label.as_ptr()
}

/// Creates a study. `config_json` may be NULL for the defaults.
///
/// # Safety
/// `config_json` must be NULL or a nul-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_new(config_json: *const c_char, out: *mut *mut EsStudy) -> EsStatus {
    guard(|| {
        let cfg: StudyConfig = if config_json.is_null() {
            StudyConfig::default()
        } else {
            serde_json::from_str(text(config_json)?)?
        };
        let study = Study::new(cfg)?;
        write(out, Box::into_raw(Box::new(EsStudy { study })))
    })
}

/// # Safety
/// `h` must be NULL or a handle from [`es_study_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_study_free(h: *mut EsStudy) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Adds exercises given as a JSON array of catalog entries.
///
/// # Safety
/// `h` must be a live handle, `entries_json` nul-terminated, `out_count` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_ingest_catalog(
    h: *mut EsStudy,
    entries_json: *const c_char,
    out_count: *mut usize,
) -> EsStatus {
    guard(|| {
        let entries: Vec<CatalogEntry> = serde_json::from_str(text(entries_json)?)?;
        let n = study(h)?.ingest_catalog(entries)?;
        write(out_count, n)
    })
}

/// Registers a learner; writes `{"id": ..., "group": ...}`.
///
/// # Safety
/// `h` must be a live handle and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_register(h: *mut EsStudy, out_json: *mut *mut c_char) -> EsStatus {
    guard(|| {
        let l = study(h)?.register()?;
        write_json(out_json, &json!({ "id": l.profile.id, "group": l.profile.group }))
    })
}

/// # Safety
/// `h` must be a live handle, `learner` nul-terminated, `out_rating` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_initialize_mastery(
    h: *mut EsStudy,
    learner: *const c_char,
    slider_position: f64,
    out_rating: *mut f64,
) -> EsStatus {
    guard(|| {
        let r = study(h)?.initialize_mastery(text(learner)?, slider_position)?;
        write(out_rating, r.value())
    })
}

/// # Safety
/// `h` must be a live handle and `learner` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn es_study_acknowledge_explanation(h: *mut EsStudy, learner: *const c_char) -> EsStatus {
    guard(|| {
        study(h)?.acknowledge_explanation(text(learner)?)?;
        Ok(())
    })
}

/// Composes the next series; `topic` may be NULL to reuse the last topic.
/// Writes the recommendation as JSON.
///
/// # Safety
/// `h` must be a live handle, strings nul-terminated, `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_start_series(
    h: *mut EsStudy,
    learner: *const c_char,
    topic: *const c_char,
    out_json: *mut *mut c_char,
) -> EsStatus {
    guard(|| {
        let topic = if topic.is_null() { None } else { Some(text(topic)?) };
        let rec = study(h)?.start_series(text(learner)?, topic)?;
        write_json(out_json, &serde_json::to_value(rec)?)
    })
}

/// Records an answer; writes the attempt record as JSON.
///
/// # Safety
/// `h` must be a live handle, strings nul-terminated, `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_attempt(
    h: *mut EsStudy,
    learner: *const c_char,
    exercise_id: *const c_char,
    answer_index: usize,
    out_json: *mut *mut c_char,
) -> EsStatus {
    guard(|| {
        let rec = study(h)?.attempt(text(learner)?, text(exercise_id)?, answer_index)?;
        write_json(out_json, &serde_json::to_value(rec)?)
    })
}

/// # Safety
/// `h` must be a live handle, `learner` nul-terminated, `out_rating` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_steer(
    h: *mut EsStudy,
    learner: *const c_char,
    step: i32,
    out_rating: *mut f64,
) -> EsStatus {
    guard(|| {
        let step = SteeringStep::new(i64::from(step))
            .map_err(|e| Failure(EsStatus::InvalidArgument, e.to_string()))?;
        let p = study(h)?.steer(text(learner)?, step)?;
        write(out_rating, p.post_rating)
    })
}

/// # Safety
/// `h` must be a live handle and `learner` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn es_study_acknowledge_impact(h: *mut EsStudy, learner: *const c_char) -> EsStatus {
    guard(|| {
        study(h)?.acknowledge_impact(text(learner)?)?;
        Ok(())
    })
}

/// Submits `{"answers": {"Q1": 4, ...}, "free_text": {"trust": "..."}}`.
///
/// # Safety
/// `h` must be a live handle and strings nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn es_study_submit_questionnaire(
    h: *mut EsStudy,
    learner: *const c_char,
    response_json: *const c_char,
) -> EsStatus {
    guard(|| {
        let r: QuestionnaireResponse = serde_json::from_str(text(response_json)?)?;
        study(h)?.submit_questionnaire(text(learner)?, r)?;
        Ok(())
    })
}

/// Writes `{"id", "group", "state", "rating"}` for a learner.
///
/// # Safety
/// `h` must be a live handle, `learner` nul-terminated, `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_learner(
    h: *mut EsStudy,
    learner: *const c_char,
    out_json: *mut *mut c_char,
) -> EsStatus {
    guard(|| {
        let l = study(h)?.learner(text(learner)?)?;
        write_json(
            out_json,
            &json!({
                "id": l.profile.id,
                "group": l.profile.group,
                "state": l.state.to_string(),
                "rating": l.profile.rating().ok().map(|r| r.value()),
            }),
        )
    })
}

/// Writes the learner's mastery history as a JSON array.
///
/// # Safety
/// `h` must be a live handle, `learner` nul-terminated, `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_history(
    h: *mut EsStudy,
    learner: *const c_char,
    out_json: *mut *mut c_char,
) -> EsStatus {
    guard(|| {
        let points = study(h)?.history(text(learner)?)?;
        write_json(out_json, &serde_json::to_value(points)?)
    })
}

/// Writes the event log as JSON lines.
///
/// # Safety
/// `h` must be a live handle and `out_jsonl` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn es_study_log_jsonl(h: *mut EsStudy, out_jsonl: *mut *mut c_char) -> EsStatus {
    guard(|| {
        let text = elosteer::study::to_jsonl(study(h)?.log());
        let s = CString::new(text).expect("JSON has no nul bytes");
        write(out_jsonl, s.into_raw())
    })
}
