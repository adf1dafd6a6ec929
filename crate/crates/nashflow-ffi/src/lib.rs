//! C ABI for the nashflow solver.
//!
//! Conventions:
//! - Every fallible call returns an [`nf_status`]; `NF_OK` is zero. On
//!   failure a thread-local message is recorded and can be read with
//!   [`nf_last_error`] until the next failure on the same thread.
//! - Games and flow results are opaque handles; release them with the
//!   matching `*_free` function. Passing a freed or foreign pointer is
//!   undefined behavior, passing NULL is reported as `NF_ERR_NULL`.
//! - Strategy profiles cross the boundary as a single flat array: each
//!   player's simplex vector, concatenated in player order. Player and
//!   action indices are 0-based on this interface.
//! - Every entry point catches panics and converts them to `NF_ERR_PANIC`,
//!   so Rust unwinding never crosses into C.
//!
//! The mean-field, analytic-benchmark, and Gaussian-check layers are
//! library-only; this ABI covers the tensor-game core (construction, file
//! loading, evaluation, projection, flow integration, monotonicity
//! certification) that other languages are expected to bind.

#![allow(non_camel_case_types)]
#![allow(clippy::missing_safety_doc)]

use libc::{c_char, c_int};
use nashflow::flow::{integrate, FlowConfig, FlowResult, Scheme};
use nashflow::flow::{default_step, StopReason};
use nashflow::game::{simplex_project, MixedStrategy, StrategyProfile, TensorGame};
use nashflow::monotonicity::{
    pure_monotonicity_check, variational_monotonicity_check, Verdict,
};
use nashflow::Error;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum nf_status {
    NF_OK = 0,
    NF_ERR_INVALID_INPUT = 1,
    NF_ERR_DIMENSION = 2,
    NF_ERR_DOMAIN = 3,
    NF_ERR_IO = 4,
    NF_ERR_FORMAT = 5,
    NF_ERR_NULL = 6,
    NF_ERR_UTF8 = 7,
    NF_ERR_PANIC = 8,
}

/// Time-stepping scheme selector for [`nf_flow_config`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum nf_scheme {
    NF_SCHEME_PROJECTED_EULER = 0,
    NF_SCHEME_PROXIMAL_IMPLICIT = 1,
    NF_SCHEME_INTERIOR_RK4 = 2,
}

/// Plain-data mirror of the integrator configuration.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct nf_flow_config {
    pub scheme: nf_scheme,
    pub h: f64,
    pub t_max: f64,
    pub gap_tol: f64,
    pub record_every: usize,
    pub inner_tol: f64,
    pub inner_max: usize,
}

/// Opaque game handle.
pub struct nf_game {
    inner: TensorGame,
}

/// Opaque flow-result handle holding the recorded trajectory.
pub struct nf_flow_result {
    inner: FlowResult,
    strategy_len: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn fail(e: &Error) -> nf_status {
    set_error(&e.to_string());
    match e {
        Error::InvalidInput(_) => nf_status::NF_ERR_INVALID_INPUT,
        Error::DimensionMismatch(_) => nf_status::NF_ERR_DIMENSION,
        Error::Domain(_) => nf_status::NF_ERR_DOMAIN,
        Error::Io(_) => nf_status::NF_ERR_IO,
        Error::Format { .. } => nf_status::NF_ERR_FORMAT,
    }
}

macro_rules! guard {
    ($body:block) => {
        match catch_unwind(AssertUnwindSafe(|| $body)) {
            Ok(status) => status,
            Err(_) => {
                set_error("internal panic");
                nf_status::NF_ERR_PANIC
            }
        }
    };
}

macro_rules! nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!(stringify!($ptr), " is NULL"));
            return nf_status::NF_ERR_NULL;
        }
    };
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn nf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn parse_profile(
    game: &TensorGame,
    data: *const f64,
    len: usize,
) -> Result<StrategyProfile, Error> {
    let expected: usize = game.action_counts().iter().sum();
    if len != expected {
        return Err(Error::DimensionMismatch(format!(
            "flat profile has {len} entries, game expects {expected}"
        )));
    }
    let flat = std::slice::from_raw_parts(data, len);
    let mut strategies = Vec::with_capacity(game.num_players());
    let mut offset = 0;
    for &m in game.action_counts() {
        strategies.push(MixedStrategy::new(flat[offset..offset + m].to_vec())?);
        offset += m;
    }
    StrategyProfile::new(strategies)
}

fn flatten_profile(profile: &StrategyProfile, out: &mut [f64]) {
    let mut offset = 0;
    for j in 0..profile.num_players() {
        let probs = profile.strategy(j).probs();
        out[offset..offset + probs.len()].copy_from_slice(probs);
        offset += probs.len();
    }
}

/// Build a game from flat buffers: `action_counts` has `num_players`
/// entries, `costs` holds the players' dense cost tensors concatenated in
/// player order (each row-major over joint actions, first player's action
/// slowest). `costs_len` must equal `num_players · ∏ action_counts`.
#[no_mangle]
pub unsafe extern "C" fn nf_game_new(
    num_players: usize,
    action_counts: *const usize,
    costs: *const f64,
    costs_len: usize,
    out: *mut *mut nf_game,
) -> nf_status {
    guard!({
        nonnull!(action_counts);
        nonnull!(costs);
        nonnull!(out);
        if num_players == 0 {
            set_error("num_players must be at least 1");
            return nf_status::NF_ERR_INVALID_INPUT;
        }
        let counts = std::slice::from_raw_parts(action_counts, num_players).to_vec();
        let per_player: usize = match counts.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m)) {
            Some(p) => p,
            None => {
                set_error("joint action space overflows");
                return nf_status::NF_ERR_INVALID_INPUT;
            }
        };
        let expected = match per_player.checked_mul(num_players) {
            Some(e) => e,
            None => {
                set_error("cost buffer size overflows");
                return nf_status::NF_ERR_INVALID_INPUT;
            }
        };
        if costs_len != expected {
            set_error(&format!(
                "costs buffer has {costs_len} entries, expected {expected}"
            ));
            return nf_status::NF_ERR_DIMENSION;
        }
        let flat = std::slice::from_raw_parts(costs, costs_len);
        let tensors: Vec<Vec<f64>> = flat.chunks_exact(per_player).map(|c| c.to_vec()).collect();
        match TensorGame::new(counts, tensors) {
            Ok(game) => {
                *out = Box::into_raw(Box::new(nf_game { inner: game }));
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Load a game from a `.game` file (see the library documentation for the
/// format). `path` must be NUL-terminated UTF-8.
#[no_mangle]
pub unsafe extern "C" fn nf_game_load(path: *const c_char, out: *mut *mut nf_game) -> nf_status {
    guard!({
        nonnull!(path);
        nonnull!(out);
        let raw = CStr::from_ptr(path);
        let utf8 = match raw.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("path is not valid UTF-8");
                return nf_status::NF_ERR_UTF8;
            }
        };
        match nashflow::io::load_game(Path::new(utf8)) {
            Ok(game) => {
                *out = Box::into_raw(Box::new(nf_game { inner: game }));
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// The built-in closed-form 2×2 zero-sum benchmark game.
#[no_mangle]
pub unsafe extern "C" fn nf_game_appendix_b(out: *mut *mut nf_game) -> nf_status {
    guard!({
        nonnull!(out);
        *out = Box::into_raw(Box::new(nf_game {
            inner: nashflow::analytic::appendix_game(),
        }));
        nf_status::NF_OK
    })
}

/// Release a game handle. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn nf_game_free(game: *mut nf_game) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of players, or 0 if `game` is NULL.
#[no_mangle]
pub unsafe extern "C" fn nf_game_num_players(game: *const nf_game) -> usize {
    match game.as_ref() {
        Some(g) => g.inner.num_players(),
        None => 0,
    }
}

/// Action count of `player` (0-based), or 0 on NULL/out-of-range input.
#[no_mangle]
pub unsafe extern "C" fn nf_game_action_count(game: *const nf_game, player: usize) -> usize {
    match game.as_ref() {
        Some(g) => g.inner.action_counts().get(player).copied().unwrap_or(0),
        None => 0,
    }
}

/// 1 if the costs sum to zero across players at every joint action, else 0.
#[no_mangle]
pub unsafe extern "C" fn nf_game_is_zero_sum(game: *const nf_game) -> c_int {
    match game.as_ref() {
        Some(g) => c_int::from(g.inner.is_zero_sum()),
        None => 0,
    }
}

/// Expected cost of `player` (0-based) at a flat mixed profile.
#[no_mangle]
pub unsafe extern "C" fn nf_expected_cost(
    game: *const nf_game,
    profile: *const f64,
    profile_len: usize,
    player: usize,
    out: *mut f64,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(profile);
        nonnull!(out);
        let g = &(*game).inner;
        let x = match parse_profile(g, profile, profile_len) {
            Ok(x) => x,
            Err(e) => return fail(&e),
        };
        match g.expected_cost(&x, player) {
            Ok(v) => {
                *out = v;
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Own-strategy cost gradient of `player`: component k is the player's cost
/// when they switch to pure action k while everyone else keeps the profile.
/// `out` must hold the player's action count.
#[no_mangle]
pub unsafe extern "C" fn nf_own_gradient(
    game: *const nf_game,
    profile: *const f64,
    profile_len: usize,
    player: usize,
    out: *mut f64,
    out_len: usize,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(profile);
        nonnull!(out);
        let g = &(*game).inner;
        if player >= g.num_players() {
            set_error("player index out of range");
            return nf_status::NF_ERR_INVALID_INPUT;
        }
        if out_len != g.action_counts()[player] {
            set_error(&format!(
                "gradient buffer has {out_len} entries, player has {} actions",
                g.action_counts()[player]
            ));
            return nf_status::NF_ERR_DIMENSION;
        }
        let x = match parse_profile(g, profile, profile_len) {
            Ok(x) => x,
            Err(e) => return fail(&e),
        };
        match g.own_gradient(&x, player) {
            Ok(grad) => {
                std::slice::from_raw_parts_mut(out, out_len).copy_from_slice(&grad);
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Nash gap (total exploitability) of a flat mixed profile; zero exactly at
/// equilibria.
#[no_mangle]
pub unsafe extern "C" fn nf_nash_gap(
    game: *const nf_game,
    profile: *const f64,
    profile_len: usize,
    out: *mut f64,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(profile);
        nonnull!(out);
        let g = &(*game).inner;
        let x = match parse_profile(g, profile, profile_len) {
            Ok(x) => x,
            Err(e) => return fail(&e),
        };
        match g.nash_gap(&x) {
            Ok(v) => {
                *out = v;
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Index (0-based) of a best-response pure action for `player`; ties go to
/// the lowest index.
#[no_mangle]
pub unsafe extern "C" fn nf_best_response(
    game: *const nf_game,
    profile: *const f64,
    profile_len: usize,
    player: usize,
    out_action: *mut usize,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(profile);
        nonnull!(out_action);
        let g = &(*game).inner;
        let x = match parse_profile(g, profile, profile_len) {
            Ok(x) => x,
            Err(e) => return fail(&e),
        };
        match g.best_response(&x, player) {
            Ok((_, action)) => {
                *out_action = action;
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Euclidean projection of `v` onto the probability simplex; `out` must hold
/// `len` entries (in-place use, `out == v`, is allowed).
#[no_mangle]
pub unsafe extern "C" fn nf_simplex_project(
    v: *const f64,
    len: usize,
    out: *mut f64,
) -> nf_status {
    guard!({
        nonnull!(v);
        nonnull!(out);
        let input = std::slice::from_raw_parts(v, len).to_vec();
        match simplex_project(&input) {
            Ok(p) => {
                std::slice::from_raw_parts_mut(out, len).copy_from_slice(p.probs());
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Fill `out` with the default integrator configuration for `game`:
/// projected Euler, h = min(0.1/L, 1) for the game's gradient Lipschitz
/// bound L, t_max = 100, gap_tol = 1e-2, full-resolution recording.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_config_default(
    game: *const nf_game,
    out: *mut nf_flow_config,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(out);
        let cfg = FlowConfig::default();
        *out = nf_flow_config {
            scheme: nf_scheme::NF_SCHEME_PROJECTED_EULER,
            h: default_step(&(*game).inner),
            t_max: cfg.t_max,
            gap_tol: cfg.gap_tol,
            record_every: cfg.record_every,
            inner_tol: cfg.inner_tol,
            inner_max: cfg.inner_max,
        };
        nf_status::NF_OK
    })
}

/// Integrate the projected subgradient flow. `x0` may be NULL for a uniform
/// start, otherwise it is a flat profile of length `x0_len`. On success the
/// caller owns the returned handle and must free it with
/// [`nf_flow_result_free`].
#[no_mangle]
pub unsafe extern "C" fn nf_integrate(
    game: *const nf_game,
    x0: *const f64,
    x0_len: usize,
    config: *const nf_flow_config,
    out: *mut *mut nf_flow_result,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(config);
        nonnull!(out);
        let g = &(*game).inner;
        let start = if x0.is_null() {
            StrategyProfile::uniform(g)
        } else {
            match parse_profile(g, x0, x0_len) {
                Ok(x) => x,
                Err(e) => return fail(&e),
            }
        };
        let c = &*config;
        let cfg = FlowConfig {
            scheme: match c.scheme {
                nf_scheme::NF_SCHEME_PROJECTED_EULER => Scheme::ProjectedEuler,
                nf_scheme::NF_SCHEME_PROXIMAL_IMPLICIT => Scheme::ProximalImplicit,
                nf_scheme::NF_SCHEME_INTERIOR_RK4 => Scheme::InteriorRk4,
            },
            h: c.h,
            t_max: c.t_max,
            gap_tol: c.gap_tol,
            record_every: c.record_every,
            inner_tol: c.inner_tol,
            inner_max: c.inner_max,
        };
        match integrate(g, &start, &cfg) {
            Ok(result) => {
                let strategy_len = g.action_counts().iter().sum();
                *out = Box::into_raw(Box::new(nf_flow_result {
                    inner: result,
                    strategy_len,
                }));
                nf_status::NF_OK
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a flow-result handle. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_free(result: *mut nf_flow_result) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of recorded instants (including t = 0), or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_len(result: *const nf_flow_result) -> usize {
    match result.as_ref() {
        Some(r) => r.inner.times.len(),
        None => 0,
    }
}

/// Length of a flat profile for this result (sum of action counts), or 0.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_strategy_len(result: *const nf_flow_result) -> usize {
    match result.as_ref() {
        Some(r) => r.strategy_len,
        None => 0,
    }
}

/// 0 when the run stopped because the gap tolerance was met, 1 when the time
/// horizon ran out, -1 for NULL.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_stop_reason(result: *const nf_flow_result) -> c_int {
    match result.as_ref() {
        Some(r) => match r.inner.stop_reason {
            StopReason::GapTolMet => 0,
            StopReason::TMaxReached => 1,
        },
        None => -1,
    }
}

unsafe fn record_scalar(
    result: *const nf_flow_result,
    index: usize,
    out: *mut f64,
    pick: impl Fn(&FlowResult, usize) -> f64,
) -> nf_status {
    nonnull!(result);
    nonnull!(out);
    let r = &(*result).inner;
    if index >= r.times.len() {
        set_error(&format!(
            "record index {index} out of range (len {})",
            r.times.len()
        ));
        return nf_status::NF_ERR_INVALID_INPUT;
    }
    *out = pick(r, index);
    nf_status::NF_OK
}

/// Time of a recorded instant.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_time(
    result: *const nf_flow_result,
    index: usize,
    out: *mut f64,
) -> nf_status {
    guard!({ record_scalar(result, index, out, |r, i| r.times[i]) })
}

/// Gap of the Cesàro mean at a recorded instant.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_gap(
    result: *const nf_flow_result,
    index: usize,
    out: *mut f64,
) -> nf_status {
    guard!({ record_scalar(result, index, out, |r, i| r.gaps[i]) })
}

unsafe fn record_profile(
    result: *const nf_flow_result,
    index: usize,
    out: *mut f64,
    out_len: usize,
    cesaro: bool,
) -> nf_status {
    nonnull!(result);
    nonnull!(out);
    let handle = &*result;
    let r = &handle.inner;
    if index >= r.times.len() {
        set_error(&format!(
            "record index {index} out of range (len {})",
            r.times.len()
        ));
        return nf_status::NF_ERR_INVALID_INPUT;
    }
    if out_len != handle.strategy_len {
        set_error(&format!(
            "buffer has {out_len} entries, flat profile needs {}",
            handle.strategy_len
        ));
        return nf_status::NF_ERR_DIMENSION;
    }
    let profile = if cesaro { &r.cesaro[index] } else { &r.states[index] };
    flatten_profile(profile, std::slice::from_raw_parts_mut(out, out_len));
    nf_status::NF_OK
}

/// Raw state at a recorded instant, flattened into `out`.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_state(
    result: *const nf_flow_result,
    index: usize,
    out: *mut f64,
    out_len: usize,
) -> nf_status {
    guard!({ record_profile(result, index, out, out_len, false) })
}

/// Cesàro mean at a recorded instant, flattened into `out`.
#[no_mangle]
pub unsafe extern "C" fn nf_flow_result_cesaro(
    result: *const nf_flow_result,
    index: usize,
    out: *mut f64,
    out_len: usize,
) -> nf_status {
    guard!({ record_profile(result, index, out, out_len, true) })
}

fn verdict_code(v: Verdict) -> c_int {
    match v {
        Verdict::CertifiedExhaustive => 0,
        Verdict::CertifiedSampled => 1,
        Verdict::Violated => 2,
    }
}

/// Pure-action monotonicity check. On success writes a verdict code
/// (0 certified-exhaustive, 1 certified-sampled, 2 violated) and the worst
/// per-player margin observed.
#[no_mangle]
pub unsafe extern "C" fn nf_pure_monotonicity(
    game: *const nf_game,
    cap: u64,
    tol: f64,
    seed: u64,
    verdict: *mut c_int,
    worst_margin: *mut f64,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(verdict);
        nonnull!(worst_margin);
        let report = pure_monotonicity_check(&(*game).inner, cap, tol, seed);
        *verdict = verdict_code(report.verdict);
        *worst_margin = report.worst_margin;
        nf_status::NF_OK
    })
}

/// Sampled variational monotonicity check; same outputs as
/// [`nf_pure_monotonicity`].
#[no_mangle]
pub unsafe extern "C" fn nf_variational_monotonicity(
    game: *const nf_game,
    n_samples: u64,
    tol: f64,
    seed: u64,
    verdict: *mut c_int,
    worst_margin: *mut f64,
) -> nf_status {
    guard!({
        nonnull!(game);
        nonnull!(verdict);
        nonnull!(worst_margin);
        let report = variational_monotonicity_check(&(*game).inner, n_samples, tol, seed);
        *verdict = verdict_code(report.verdict);
        *worst_margin = report.worst_margin;
        nf_status::NF_OK
    })
}
