//! C ABI for the one-shot quantum information library. All objects are
//! opaque handles created from the JSON interchange formats; every
//! function returns a status code (0 ok, 1 failure, 2 parse error,
//! 3 domain violation) and writes results through out-pointers. The
//! last error message is kept per thread and retrievable as a C string.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use oneshot_qit::entropies;
use oneshot_qit::error::QitError;
use oneshot_qit::hypotest;
use oneshot_qit::optimize::OptimizerConfig;
use oneshot_qit::qchannels::{channel_functionals, Channel, ChannelJson};
use oneshot_qit::qregisters::{DensityState, HermitianOperator, MatrixJson};
use oneshot_qit::smoothing;
use oneshot_qit::verify::{run_suite, VerifyConfig};

pub const OSQIT_OK: i32 = 0;
pub const OSQIT_ERR: i32 = 1;
pub const OSQIT_PARSE: i32 = 2;
pub const OSQIT_DOMAIN: i32 = 3;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &QitError) -> i32 {
    match e {
        QitError::Parse(_) | QitError::Io(_) => OSQIT_PARSE,
        QitError::Domain(_)
        | QitError::Cutoff(_)
        | QitError::ShapeMismatch(_)
        | QitError::UnknownLabel(_)
        | QitError::LabelCollision(_)
        | QitError::NotHermitian(_)
        | QitError::NotPositive(_)
        | QitError::InvalidTrace(_)
        | QitError::FunctionUndefined(_) => OSQIT_DOMAIN,
        _ => OSQIT_ERR,
    }
}

fn fail(e: QitError) -> i32 {
    let code = status_of(&e);
    set_error(&e.to_string());
    code
}

/// Opaque density state handle.
pub struct OsqitState(DensityState);

/// Opaque Hermitian operator handle.
pub struct OsqitOperator(HermitianOperator);

/// Opaque channel handle.
pub struct OsqitChannel(Channel);

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        set_error("null string pointer");
        return Err(OSQIT_PARSE);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        OSQIT_PARSE
    })
}

/// Copies the last error message on this thread into `buf` (truncated,
/// always NUL-terminated). Returns the full message length in bytes.
#[no_mangle]
pub unsafe extern "C" fn osqit_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Parses a density state from matrix JSON. On success writes a handle
/// the caller must release with `osqit_state_free`.
#[no_mangle]
pub unsafe extern "C" fn osqit_state_from_json(
    json: *const c_char,
    out: *mut *mut OsqitState,
) -> i32 {
    let text = match read_str(json) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let parsed: Result<MatrixJson, _> = serde_json::from_str(text);
    let op = match parsed {
        Ok(mj) => mj.to_operator(),
        Err(e) => {
            set_error(&format!("parse error: {e}"));
            return OSQIT_PARSE;
        }
    };
    match op.and_then(DensityState::new) {
        Ok(state) => {
            *out = Box::into_raw(Box::new(OsqitState(state)));
            OSQIT_OK
        }
        Err(e) => fail(e),
    }
}

/// Parses a Hermitian operator from matrix JSON. Release with
/// `osqit_operator_free`.
#[no_mangle]
pub unsafe extern "C" fn osqit_operator_from_json(
    json: *const c_char,
    out: *mut *mut OsqitOperator,
) -> i32 {
    let text = match read_str(json) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let parsed: Result<MatrixJson, _> = serde_json::from_str(text);
    match parsed {
        Ok(mj) => match mj.to_operator() {
            Ok(op) => {
                *out = Box::into_raw(Box::new(OsqitOperator(op)));
                OSQIT_OK
            }
            Err(e) => fail(e),
        },
        Err(e) => {
            set_error(&format!("parse error: {e}"));
            OSQIT_PARSE
        }
    }
}

/// Parses a channel from Kraus JSON. Release with `osqit_channel_free`.
#[no_mangle]
pub unsafe extern "C" fn osqit_channel_from_json(
    json: *const c_char,
    out: *mut *mut OsqitChannel,
) -> i32 {
    let text = match read_str(json) {
        Ok(t) => t,
        Err(c) => return c,
    };
    let parsed: Result<ChannelJson, _> = serde_json::from_str(text);
    match parsed {
        Ok(cj) => match cj.to_channel() {
            Ok(ch) => {
                *out = Box::into_raw(Box::new(OsqitChannel(ch)));
                OSQIT_OK
            }
            Err(e) => fail(e),
        },
        Err(e) => {
            set_error(&format!("parse error: {e}"));
            OSQIT_PARSE
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn osqit_state_free(state: *mut OsqitState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

#[no_mangle]
pub unsafe extern "C" fn osqit_operator_free(op: *mut OsqitOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

#[no_mangle]
pub unsafe extern "C" fn osqit_channel_free(ch: *mut OsqitChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, i32> {
    if ptr.is_null() {
        set_error(&format!("null {what} handle"));
        Err(OSQIT_PARSE)
    } else {
        Ok(&*ptr)
    }
}

/// Von Neumann entropy in bits.
#[no_mangle]
pub unsafe extern "C" fn osqit_von_neumann(state: *const OsqitState, out: *mut f64) -> i32 {
    let s = match deref(state, "state") {
        Ok(s) => s,
        Err(c) => return c,
    };
    *out = entropies::von_neumann(&s.0).bits;
    OSQIT_OK
}

/// Umegaki relative entropy D(rho || sigma) in bits; writes infinity on
/// support violation.
#[no_mangle]
pub unsafe extern "C" fn osqit_relative_entropy(
    state: *const OsqitState,
    sigma: *const OsqitOperator,
    out: *mut f64,
) -> i32 {
    let (s, g) = match (deref(state, "state"), deref(sigma, "operator")) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    let v = entropies::relative_entropy(&s.0.as_subnormalized(), &g.0);
    *out = if v.finite { v.bits } else { f64::INFINITY };
    OSQIT_OK
}

/// Max-relative entropy D_max in bits.
#[no_mangle]
pub unsafe extern "C" fn osqit_dmax(
    state: *const OsqitState,
    sigma: *const OsqitOperator,
    out: *mut f64,
) -> i32 {
    let (s, g) = match (deref(state, "state"), deref(sigma, "operator")) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    let v = entropies::dmax(&s.0.as_subnormalized(), &g.0);
    *out = if v.finite { v.bits } else { f64::INFINITY };
    OSQIT_OK
}

/// Hypothesis-testing relative entropy D_h^eps in bits; `eps` is the
/// type-I error budget.
#[no_mangle]
pub unsafe extern "C" fn osqit_dh(
    state: *const OsqitState,
    sigma: *const OsqitOperator,
    eps: f64,
    out: *mut f64,
) -> i32 {
    let (s, g) = match (deref(state, "state"), deref(sigma, "operator")) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    match hypotest::dh(&s.0, &g.0, eps) {
        Ok(v) => {
            *out = if v.finite { v.bits } else { f64::INFINITY };
            OSQIT_OK
        }
        Err(e) => fail(e),
    }
}

/// Purified distance P(rho, sigma) between two states.
#[no_mangle]
pub unsafe extern "C" fn osqit_purified_distance(
    rho: *const OsqitState,
    sigma: *const OsqitState,
    out: *mut f64,
) -> i32 {
    let (r, s) = match (deref(rho, "state"), deref(sigma, "state")) {
        (Ok(r), Ok(s)) => (r, s),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    match oneshot_qit::distances::purified_distance(
        &r.0.as_subnormalized(),
        &s.0.as_subnormalized(),
    ) {
        Ok(v) => {
            *out = v;
            OSQIT_OK
        }
        Err(e) => fail(e),
    }
}

/// Root fidelity F(rho, sigma).
#[no_mangle]
pub unsafe extern "C" fn osqit_fidelity(
    rho: *const OsqitState,
    sigma: *const OsqitState,
    out: *mut f64,
) -> i32 {
    let (r, s) = match (deref(rho, "state"), deref(sigma, "state")) {
        (Ok(r), Ok(s)) => (r, s),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    match oneshot_qit::distances::fidelity(&r.0.as_subnormalized(), &s.0.as_subnormalized()) {
        Ok(v) => {
            *out = v;
            OSQIT_OK
        }
        Err(e) => fail(e),
    }
}

/// Two-sided bounds on the smoothed max-relative entropy D_max^eps.
#[no_mangle]
pub unsafe extern "C" fn osqit_dmax_smoothed_bounds(
    state: *const OsqitState,
    sigma: *const OsqitOperator,
    eps: f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> i32 {
    let (s, g) = match (deref(state, "state"), deref(sigma, "operator")) {
        (Ok(s), Ok(g)) => (s, g),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    match smoothing::dmax_smoothed_bounds(&s.0, &g.0, eps) {
        Ok(iv) => {
            *out_lower = iv.lower;
            *out_upper = iv.upper;
            OSQIT_OK
        }
        Err(e) => fail(e),
    }
}

/// Channel functionals: certified lower bounds on the capacity-like
/// quantity and the variance maximum, from a seeded multi-start search.
#[no_mangle]
pub unsafe extern "C" fn osqit_channel_functionals(
    channel: *const OsqitChannel,
    seed: u64,
    out_capacity: *mut f64,
    out_vmax: *mut f64,
) -> i32 {
    let ch = match deref(channel, "channel") {
        Ok(c) => c,
        Err(c) => return c,
    };
    let cfg = OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    };
    match channel_functionals(&ch.0, &cfg) {
        Ok(f) => {
            *out_capacity = f.capacity_like;
            *out_vmax = f.vmax;
            OSQIT_OK
        }
        Err(e) => fail(e),
    }
}

/// Runs one named verification suite. Writes 1 into `out_pass` when the
/// suite's property held, 0 otherwise; the detail line lands in the
/// per-thread error slot either way.
#[no_mangle]
pub unsafe extern "C" fn osqit_verify_suite(
    name: *const c_char,
    trials: usize,
    seed: u64,
    out_pass: *mut i32,
) -> i32 {
    let suite = match read_str(name) {
        Ok(s) => s,
        Err(c) => return c,
    };
    match run_suite(suite, &VerifyConfig { trials, seed }) {
        Ok(res) => {
            *out_pass = i32::from(res.pass);
            set_error(&format!("{}: {}", res.name, res.detail));
            OSQIT_OK
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q34_json() -> CString {
        CString::new(
            r#"{"labels":["B"],"dims":[2],"entries":[[0.75,0.0],[0.0,0.0],[0.0,0.0],[0.25,0.0]]}"#,
        )
        .unwrap()
    }

    fn mix_json() -> CString {
        CString::new(
            r#"{"labels":["B"],"dims":[2],"entries":[[0.5,0.0],[0.0,0.0],[0.0,0.0],[0.5,0.0]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn state_lifecycle_and_entropy() {
        unsafe {
            let mut state: *mut OsqitState = std::ptr::null_mut();
            assert_eq!(osqit_state_from_json(q34_json().as_ptr(), &mut state), OSQIT_OK);
            let mut bits = 0.0f64;
            assert_eq!(osqit_von_neumann(state, &mut bits), OSQIT_OK);
            assert!((bits - 0.8112781244591328).abs() < 1e-12);
            osqit_state_free(state);
        }
    }

    #[test]
    fn dh_and_relative_entropy() {
        unsafe {
            let mut rho: *mut OsqitState = std::ptr::null_mut();
            let mut sigma: *mut OsqitOperator = std::ptr::null_mut();
            assert_eq!(osqit_state_from_json(q34_json().as_ptr(), &mut rho), OSQIT_OK);
            assert_eq!(
                osqit_operator_from_json(mix_json().as_ptr(), &mut sigma),
                OSQIT_OK
            );
            let mut v = 0.0f64;
            assert_eq!(osqit_dh(rho, sigma, 0.1, &mut v), OSQIT_OK);
            assert!(v.is_finite());
            assert_eq!(osqit_dh(rho, sigma, 1.5, &mut v), OSQIT_DOMAIN);
            let mut buf = [0i8; 128];
            let n = osqit_last_error(buf.as_mut_ptr() as *mut c_char, buf.len());
            assert!(n > 0);
            assert_eq!(osqit_relative_entropy(rho, sigma, &mut v), OSQIT_OK);
            assert!((v - 0.18872187554086717).abs() < 1e-9);
            osqit_state_free(rho);
            osqit_operator_free(sigma);
        }
    }

    #[test]
    fn parse_errors_report_code_2() {
        unsafe {
            let mut state: *mut OsqitState = std::ptr::null_mut();
            let bad = CString::new("{not json").unwrap();
            assert_eq!(osqit_state_from_json(bad.as_ptr(), &mut state), OSQIT_PARSE);
            assert!(state.is_null());
        }
    }

    #[test]
    fn verify_suite_reports_detail() {
        unsafe {
            let name = CString::new("lemma15").unwrap();
            let mut pass = 0i32;
            assert_eq!(osqit_verify_suite(name.as_ptr(), 10, 1, &mut pass), OSQIT_OK);
            assert_eq!(pass, 1);
        }
    }
}
