//! C ABI over `ecs-metrology`.
//!
//! Probes and loss scenarios are opaque heap handles created by `*_new` and
//! released by `*_free`. Every fallible call returns an [`EcsStatus`] and
//! writes its result through an out-pointer; on failure the message is kept
//! per thread and read back with [`ecs_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ecs_metrology::channels::{LossModel, LossScenario};
use ecs_metrology::economical::{eco_ratio, optimize_beta};
use ecs_metrology::entanglement::negativity;
use ecs_metrology::fock_oracle::{auto_cutoff_for, oracle_qfi_for, OracleOptions};
use ecs_metrology::qfi::{qfi_ecs, qfi_separable_coherent};
use ecs_metrology::states::{degree_of_entanglement, mean_photon_a, ProbeSpec, Sign};
use ecs_metrology::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad probe, scenario or argument.
    InvalidArgument = 2,
    /// Truncation, eigensolver or root-finding failure.
    Numerical = 3,
    /// The request is outside what the model describes (degenerate support, minus-sign SLD).
    Unsupported = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcsSign {
    Plus = 0,
    Minus = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcsLossModel {
    BothArms = 0,
    OneArmA = 1,
}

/// Opaque probe state `|α⟩|β⟩ ± |β⟩|α⟩`.
pub struct EcsProbe(ProbeSpec);

/// Opaque loss scenario: model, loss rate and phase.
pub struct EcsScenario(LossScenario);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EcsEcoOptimum {
    pub beta_opt: f64,
    pub eco_value: f64,
    /// Nonzero when no interior β beats the separable limit.
    pub boundary: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EcsStatus {
    match e {
        Error::DegenerateSupport | Error::DegenerateMinus | Error::Unsupported(_) => EcsStatus::Unsupported,
        e if e.is_numerical() => EcsStatus::Numerical,
        _ => EcsStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> EcsStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn guard<F: FnOnce() -> EcsStatus>(f: F) -> EcsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_owned())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EcsStatus::Panic
        }
    }
}

macro_rules! deref {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(v) => v,
            None => {
                set_error(format!("null pointer: {}", stringify!($ptr)));
                return EcsStatus::NullPointer;
            }
        }
    };
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn write<T>(out: *mut T, value: T) -> EcsStatus {
    match unsafe { out.as_mut() } {
        Some(slot) => {
            *slot = value;
            EcsStatus::Ok
        }
        None => {
            set_error("null output pointer".into());
            EcsStatus::NullPointer
        }
    }
}

/// # Safety
/// As for [`write`].
unsafe fn value_or_fail<T>(r: ecs_metrology::Result<T>, out: *mut T) -> EcsStatus {
    match r {
        Ok(v) => unsafe { write(out, v) },
        Err(e) => fail(e),
    }
}

/// Creates a probe. Release it with [`ecs_probe_free`].
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_probe_new(alpha: f64, beta: f64, sign: EcsSign, out: *mut *mut EcsProbe) -> EcsStatus {
    guard(|| {
        let sign = match sign {
            EcsSign::Plus => Sign::Plus,
            EcsSign::Minus => Sign::Minus,
        };
        let probe = ProbeSpec::new(alpha, beta, sign).map(|p| Box::into_raw(Box::new(EcsProbe(p))));
        value_or_fail(probe, out)
    })
}

/// # Safety
/// `probe` must come from [`ecs_probe_new`] and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ecs_probe_free(probe: *mut EcsProbe) {
    if !probe.is_null() {
        drop(unsafe { Box::from_raw(probe) });
    }
}

/// Creates a loss scenario with `rate` in `[0, 1]`. Release it with [`ecs_scenario_free`].
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_scenario_new(
    model: EcsLossModel,
    rate: f64,
    phase: f64,
    out: *mut *mut EcsScenario,
) -> EcsStatus {
    guard(|| {
        let model = match model {
            EcsLossModel::BothArms => LossModel::BothArms,
            EcsLossModel::OneArmA => LossModel::OneArmA,
        };
        let scenario = LossScenario::new(model, rate, phase).map(|s| Box::into_raw(Box::new(EcsScenario(s))));
        value_or_fail(scenario, out)
    })
}

/// # Safety
/// `scenario` must come from [`ecs_scenario_new`] and not have been freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ecs_scenario_free(scenario: *mut EcsScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Closed-form QFI of the lossy output state.
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_qfi(probe: *const EcsProbe, scenario: *const EcsScenario, out: *mut f64) -> EcsStatus {
    guard(|| {
        let (p, s) = (deref!(probe), deref!(scenario));
        value_or_fail(qfi_ecs(&p.0, &s.0).map(|q| q.value), out)
    })
}

/// `4(1−R)α²`, the QFI of `|α⟩|α⟩` under loss in both arms.
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_separable_qfi(alpha: f64, scenario: *const EcsScenario, out: *mut f64) -> EcsStatus {
    guard(|| {
        let s = deref!(scenario);
        value_or_fail(qfi_separable_coherent(alpha, &s.0).map(|q| q.value), out)
    })
}

/// Fock-space QFI; `cutoff == 0` picks the cutoff from the probe amplitudes.
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_oracle_qfi(
    probe: *const EcsProbe,
    scenario: *const EcsScenario,
    cutoff: usize,
    out: *mut f64,
) -> EcsStatus {
    guard(|| {
        let (p, s) = (deref!(probe), deref!(scenario));
        let n = if cutoff == 0 { auto_cutoff_for(&p.0) } else { cutoff };
        value_or_fail(oracle_qfi_for(&p.0, &s.0, n, &OracleOptions::default()).map(|q| q.value), out)
    })
}

/// Negativity of the lossy output state (plus sign).
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_negativity(
    probe: *const EcsProbe,
    scenario: *const EcsScenario,
    out: *mut f64,
) -> EcsStatus {
    guard(|| {
        let (p, s) = (deref!(probe), deref!(scenario));
        value_or_fail(negativity(&p.0, &s.0).map(|n| n.value), out)
    })
}

/// Degree of entanglement of the input probe, in bits.
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_degree_of_entanglement(probe: *const EcsProbe, out: *mut f64) -> EcsStatus {
    guard(|| write(out, degree_of_entanglement(&deref!(probe).0)))
}

/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_mean_photon_a(probe: *const EcsProbe, out: *mut f64) -> EcsStatus {
    guard(|| write(out, mean_photon_a(&deref!(probe).0)))
}

/// QFI per input photon in mode `a`.
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_eco_ratio(
    probe: *const EcsProbe,
    scenario: *const EcsScenario,
    out: *mut f64,
) -> EcsStatus {
    guard(|| {
        let (p, s) = (deref!(probe), deref!(scenario));
        value_or_fail(eco_ratio(&p.0, &s.0), out)
    })
}

/// Plus-sign `β` maximizing the QFI per input photon at fixed `α`.
///
/// # Safety
/// Every pointer argument must be null or valid for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn ecs_optimize_beta(
    alpha: f64,
    scenario: *const EcsScenario,
    grid_points: usize,
    out: *mut EcsEcoOptimum,
) -> EcsStatus {
    guard(|| {
        let s = deref!(scenario);
        let r = optimize_beta(alpha, &s.0, grid_points).map(|r| EcsEcoOptimum {
            beta_opt: r.beta_opt,
            eco_value: r.eco_value,
            boundary: u8::from(r.boundary),
        });
        value_or_fail(r, out)
    })
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ecs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ecs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
