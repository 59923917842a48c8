// SPDX-License-Identifier: Apache-2.0

//! C ABI over the simulator.
//!
//! Handles are opaque pointers created by `*_new`/`*_parse` and released by
//! the matching `*_free`. Every fallible call returns a [`SlaacStatus`]; the
//! message for the most recent failure on the calling thread is available
//! from [`slaac_last_error`]. Strings returned as `char *` are owned by the
//! caller and must be released with [`slaac_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use slaac_sim::cli::evaluate_expectations;
use slaac_sim::host::apply_two_hour_rule;
use slaac_sim::net_model::{derive_eui64, MacAddress};
use slaac_sim::scenario::{parse_scenario, print_scenario, Scenario, ScenarioError};
use slaac_sim::{Engine, SimError};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlaacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Simulation = 5,
    Invariant = 6,
    ExpectationFailed = 7,
}

/// Attack outcome of the last measurement.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlaacAttackFlags {
    pub dos_success: bool,
    pub mitm_success: bool,
    pub dualstack_success: bool,
}

/// Parsed, validated scenario.
pub struct SlaacScenario {
    inner: Scenario,
}

/// Simulation engine plus the scenario it was built from.
pub struct SlaacEngine {
    engine: Engine,
    scenario: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: SlaacStatus, message: impl Into<String>) -> SlaacStatus {
    let msg = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
    status
}

fn sim_status(e: &SimError) -> SlaacStatus {
    match e {
        SimError::Invariant { .. } => SlaacStatus::Invariant,
        _ => SlaacStatus::Simulation,
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

/// Message describing the last failure on this thread, or NULL. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn slaac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses scenario text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slaac_scenario_parse(
    text: *const c_char,
    out: *mut *mut SlaacScenario,
) -> SlaacStatus {
    if text.is_null() || out.is_null() {
        return fail(SlaacStatus::NullPointer, "null argument");
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        return fail(SlaacStatus::InvalidUtf8, "scenario text is not UTF-8");
    };
    match parse_scenario(text) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SlaacScenario { inner }));
            SlaacStatus::Ok
        }
        Err(e @ ScenarioError::Parse { .. }) => fail(SlaacStatus::Parse, e.to_string()),
        Err(e) => fail(SlaacStatus::Validation, e.to_string()),
    }
}

/// Canonical text of a scenario.
///
/// # Safety
/// `scenario` must come from [`slaac_scenario_parse`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn slaac_scenario_normalized(scenario: *const SlaacScenario) -> *mut c_char {
    match scenario.as_ref() {
        Some(s) => into_c_string(print_scenario(&s.inner)),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `scenario` must come from [`slaac_scenario_parse`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn slaac_scenario_free(scenario: *mut SlaacScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Builds an engine for `scenario`. When `override_seed` is true, `seed`
/// replaces the scenario's seed. The scenario handle stays owned by the
/// caller.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slaac_engine_new(
    scenario: *const SlaacScenario,
    override_seed: bool,
    seed: u64,
    out: *mut *mut SlaacEngine,
) -> SlaacStatus {
    let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
        return fail(SlaacStatus::NullPointer, "null argument");
    };
    match Engine::from_scenario(&s.inner, override_seed.then_some(seed)) {
        Ok(engine) => {
            *out = Box::into_raw(Box::new(SlaacEngine {
                engine,
                scenario: s.inner.clone(),
            }));
            SlaacStatus::Ok
        }
        Err(e) => fail(sim_status(&e), e.to_string()),
    }
}

/// Runs the engine to the scenario's end time.
///
/// # Safety
/// `engine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn slaac_engine_run(engine: *mut SlaacEngine) -> SlaacStatus {
    let Some(e) = engine.as_mut() else {
        return fail(SlaacStatus::NullPointer, "null engine");
    };
    match e.engine.run() {
        Ok(()) => SlaacStatus::Ok,
        Err(err) => fail(sim_status(&err), err.to_string()),
    }
}

/// Trace text so far, one record per line.
///
/// # Safety
/// `engine` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn slaac_engine_trace(engine: *const SlaacEngine) -> *mut c_char {
    match engine.as_ref() {
        Some(e) => into_c_string(e.engine.trace_text()),
        None => ptr::null_mut(),
    }
}

/// All measurement snapshots taken so far.
///
/// # Safety
/// `engine` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn slaac_engine_metrics(engine: *const SlaacEngine) -> *mut c_char {
    match engine.as_ref() {
        Some(e) => into_c_string(
            e.engine
                .measurements()
                .iter()
                .map(ToString::to_string)
                .collect(),
        ),
        None => ptr::null_mut(),
    }
}

/// Attack flags of the last measurement; all false before any.
///
/// # Safety
/// `engine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slaac_engine_attack_flags(
    engine: *const SlaacEngine,
    out: *mut SlaacAttackFlags,
) -> SlaacStatus {
    let (Some(e), Some(out)) = (engine.as_ref(), out.as_mut()) else {
        return fail(SlaacStatus::NullPointer, "null argument");
    };
    *out = e
        .engine
        .measurements()
        .last()
        .map_or_else(SlaacAttackFlags::default, |m| SlaacAttackFlags {
            dos_success: m.dos_success,
            mitm_success: m.mitm_success,
            dualstack_success: m.dualstack_success,
        });
    SlaacStatus::Ok
}

/// Evaluates the scenario's `expect` lines. Writes the number of failures
/// to `failed` (if not NULL) and returns `ExpectationFailed` when nonzero.
///
/// # Safety
/// `engine` must be a live handle; `failed` must be writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn slaac_engine_check(
    engine: *const SlaacEngine,
    failed: *mut u32,
) -> SlaacStatus {
    let Some(e) = engine.as_ref() else {
        return fail(SlaacStatus::NullPointer, "null engine");
    };
    let bad: Vec<_> = evaluate_expectations(&e.scenario, &e.engine)
        .into_iter()
        .filter(|r| !r.passed)
        .collect();
    if let Some(f) = failed.as_mut() {
        *f = bad.len() as u32;
    }
    match bad.first() {
        None => SlaacStatus::Ok,
        Some(r) => fail(
            SlaacStatus::ExpectationFailed,
            format!(
                "expect {} failed (actual {})",
                r.expectation,
                r.actual.as_deref().unwrap_or("<missing>")
            ),
        ),
    }
}

/// # Safety
/// `engine` must come from [`slaac_engine_new`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn slaac_engine_free(engine: *mut SlaacEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn slaac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Modified EUI-64 interface identifier of a 6-byte MAC.
///
/// # Safety
/// `mac` must point to 6 readable bytes.
#[no_mangle]
pub unsafe extern "C" fn slaac_derive_eui64(mac: *const u8) -> u64 {
    if mac.is_null() {
        return 0;
    }
    let mut m = [0u8; 6];
    ptr::copy_nonoverlapping(mac, m.as_mut_ptr(), 6);
    derive_eui64(MacAddress(m)).0
}

/// Valid lifetime after an unauthenticated prefix update.
#[no_mangle]
pub extern "C" fn slaac_apply_two_hour_rule(remaining: u32, received: u32) -> u32 {
    apply_two_hour_rule(remaining, received)
}
