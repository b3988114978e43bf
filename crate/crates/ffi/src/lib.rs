//! C ABI for the coverage laboratory.
//!
//! The surface is deliberately small: embed a batch of states with t-SNE,
//! run one training arm to completion, and read the per-episode rewards and
//! per-batch coverage out of an opaque run handle. Every fallible entry
//! point returns a [`DrlcovStatus`]; on any failure a human-readable message
//! is stored per thread and can be fetched with [`drlcov_last_error`].
//!
//! Conventions:
//! - Pointers are never stored past the call; buffers are caller-owned.
//! - A `DrlcovRun` obtained from [`drlcov_run_training`] must be released
//!   with [`drlcov_run_free`] exactly once.
//! - Strings returned by the API are NUL-terminated and remain valid until
//!   the next `drlcov_*` call on the same thread ([`drlcov_version`] is
//!   static and always valid).
//! - Panics never cross the boundary; they surface as `DRLCOV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use drlcov::embed::{tsne_embed, EmbedError, TsneParams};
use drlcov::harness::config::EnvId;
use drlcov::harness::{run_training, ExperimentConfig, RunResult};
use drlcov::rng::seeded_rng;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrlcovStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// An argument was out of range or otherwise malformed.
    InvalidArgument = 2,
    /// The computation itself failed; see `drlcov_last_error`.
    RunFailed = 3,
    /// An internal invariant was violated. This is a bug worth reporting.
    Panic = 4,
}

/// Environment selector for `drlcov_run_training`. Passed as a plain `int`
/// so that an out-of-range value can be rejected instead of being undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrlcovEnvironment {
    /// Pole balancing on a cart; 4-dimensional observations, 2 actions.
    Cartpole = 0,
    /// Multi-lane traffic with IDM/MOBIL peers; 5 actions.
    Highway = 1,
}

/// A completed training run. Opaque: read it through the `drlcov_run_*`
/// accessors and release it with `drlcov_run_free`.
pub struct DrlcovRun {
    inner: RunResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NULs removed");
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn fail(status: DrlcovStatus, message: &str) -> DrlcovStatus {
    set_last_error(message);
    status
}

/// Run `body` with panics converted to `DRLCOV_STATUS_PANIC`.
fn guarded(body: impl FnOnce() -> DrlcovStatus) -> DrlcovStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(DrlcovStatus::Panic, &format!("internal panic: {message}"))
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn drlcov_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread, or an empty
/// string if the last call succeeded. Valid until the next `drlcov_*` call
/// on the same thread.
#[no_mangle]
pub extern "C" fn drlcov_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Embed `n` samples of dimension `dim` (row-major in `samples`) into 2-D
/// with t-SNE. Writes `n` (x, y) pairs row-major into `out_xy`, which must
/// hold `2 * n` doubles. The run is deterministic in `seed`.
///
/// Requirements: `n >= 4`, `dim >= 1`, `iterations >= 1`, and
/// `1 <= perplexity < n`; every sample component must be finite.
///
/// # Safety
/// `samples` must point to `n * dim` readable doubles and `out_xy` to
/// `2 * n` writable doubles; the regions must not overlap.
#[no_mangle]
pub unsafe extern "C" fn drlcov_tsne_embed(
    samples: *const f64,
    n: usize,
    dim: usize,
    perplexity: f64,
    iterations: usize,
    seed: u64,
    out_xy: *mut f64,
) -> DrlcovStatus {
    clear_last_error();
    guarded(|| {
        if samples.is_null() {
            return fail(DrlcovStatus::NullArgument, "samples is NULL");
        }
        if out_xy.is_null() {
            return fail(DrlcovStatus::NullArgument, "out_xy is NULL");
        }
        if dim == 0 {
            return fail(DrlcovStatus::InvalidArgument, "dim must be at least 1");
        }
        if iterations == 0 {
            return fail(DrlcovStatus::InvalidArgument, "iterations must be at least 1");
        }
        let Some(total) = n.checked_mul(dim) else {
            return fail(DrlcovStatus::InvalidArgument, "n * dim overflows");
        };
        let flat = std::slice::from_raw_parts(samples, total);
        for (i, &v) in flat.iter().enumerate() {
            if !v.is_finite() {
                return fail(
                    DrlcovStatus::InvalidArgument,
                    &format!("sample {} component {} is not finite", i / dim, i % dim),
                );
            }
        }
        let rows: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let params = TsneParams { perplexity, iterations, ..TsneParams::default() };
        let mut rng = seeded_rng(seed);
        match tsne_embed(&rows, &params, &mut rng) {
            Ok(result) => {
                let out = std::slice::from_raw_parts_mut(out_xy, 2 * n);
                for (slot, point) in out.chunks_mut(2).zip(&result.points) {
                    slot[0] = point[0];
                    slot[1] = point[1];
                }
                DrlcovStatus::Ok
            }
            Err(
                err @ (EmbedError::TooFewSamples { .. }
                | EmbedError::BadPerplexity { .. }
                | EmbedError::RaggedInput { .. }),
            ) => fail(DrlcovStatus::InvalidArgument, &err.to_string()),
            Err(err) => fail(DrlcovStatus::RunFailed, &err.to_string()),
        }
    })
}

/// Train one arm to completion and hand back an opaque run handle in
/// `*out_run`. `environment` takes a `DrlcovEnvironment` value. `episodes`
/// and `batch_episodes` override the environment defaults when nonzero; a
/// zero `batch_episodes` is clamped to `episodes` when the default cadence
/// would not fit. `maximize` switches initial-state selection from the
/// environment's own sampling to the coverage-maximizing scheduler.
///
/// On success the caller owns the handle and must release it with
/// `drlcov_run_free`.
///
/// # Safety
/// `out_run` must point to a writable `DrlcovRun*` slot.
#[no_mangle]
pub unsafe extern "C" fn drlcov_run_training(
    environment: c_int,
    episodes: usize,
    batch_episodes: usize,
    seed: u64,
    maximize: bool,
    out_run: *mut *mut DrlcovRun,
) -> DrlcovStatus {
    clear_last_error();
    guarded(|| {
        if out_run.is_null() {
            return fail(DrlcovStatus::NullArgument, "out_run is NULL");
        }
        let env = match environment {
            0 => EnvId::Cartpole,
            1 => EnvId::Highway,
            other => {
                return fail(
                    DrlcovStatus::InvalidArgument,
                    &format!("unknown environment code {other} (0 = cartpole, 1 = highway)"),
                )
            }
        };
        let mut config = ExperimentConfig::defaults(env);
        if episodes > 0 {
            config.episodes = episodes;
        }
        if batch_episodes > 0 {
            config.batch_episodes = batch_episodes;
        } else {
            config.batch_episodes = config.batch_episodes.min(config.episodes);
        }
        if let Err(err) = config.validate() {
            return fail(DrlcovStatus::InvalidArgument, &err.to_string());
        }
        match run_training(&config, seed, maximize) {
            Ok(result) => {
                *out_run = Box::into_raw(Box::new(DrlcovRun { inner: result }));
                DrlcovStatus::Ok
            }
            Err(err) => fail(DrlcovStatus::RunFailed, &err.to_string()),
        }
    })
}

/// Number of episodes in the run, or 0 if `run` is NULL.
///
/// # Safety
/// `run` must be NULL or a live handle from `drlcov_run_training`.
#[no_mangle]
pub unsafe extern "C" fn drlcov_run_episodes(run: *const DrlcovRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.rewards.len())
}

/// Cumulative reward of one episode, written to `*out`.
///
/// # Safety
/// `run` must be NULL or a live handle from `drlcov_run_training`; `out`
/// must be NULL or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn drlcov_run_reward(
    run: *const DrlcovRun,
    episode: usize,
    out: *mut f64,
) -> DrlcovStatus {
    clear_last_error();
    guarded(|| {
        let Some(run) = run.as_ref() else {
            return fail(DrlcovStatus::NullArgument, "run is NULL");
        };
        if out.is_null() {
            return fail(DrlcovStatus::NullArgument, "out is NULL");
        }
        match run.inner.rewards.get(episode) {
            Some(&reward) => {
                *out = reward;
                DrlcovStatus::Ok
            }
            None => fail(
                DrlcovStatus::InvalidArgument,
                &format!("episode {episode} out of range ({} episodes)", run.inner.rewards.len()),
            ),
        }
    })
}

/// Number of coverage batches in the run, or 0 if `run` is NULL.
///
/// # Safety
/// `run` must be NULL or a live handle from `drlcov_run_training`.
#[no_mangle]
pub unsafe extern "C" fn drlcov_run_batches(run: *const DrlcovRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.ledger.rows().len())
}

/// Cumulative coverage after one batch (0-indexed), written to `*out`.
///
/// # Safety
/// `run` must be NULL or a live handle from `drlcov_run_training`; `out`
/// must be NULL or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn drlcov_run_apc(
    run: *const DrlcovRun,
    batch: usize,
    out: *mut f64,
) -> DrlcovStatus {
    clear_last_error();
    guarded(|| {
        let Some(run) = run.as_ref() else {
            return fail(DrlcovStatus::NullArgument, "run is NULL");
        };
        if out.is_null() {
            return fail(DrlcovStatus::NullArgument, "out is NULL");
        }
        match run.inner.ledger.rows().get(batch) {
            Some(row) => {
                *out = row.apc;
                DrlcovStatus::Ok
            }
            None => fail(
                DrlcovStatus::InvalidArgument,
                &format!("batch {batch} out of range ({} batches)", run.inner.ledger.rows().len()),
            ),
        }
    })
}

/// Coverage after the final batch; NaN if `run` is NULL or no batch ran.
///
/// # Safety
/// `run` must be NULL or a live handle from `drlcov_run_training`.
#[no_mangle]
pub unsafe extern "C" fn drlcov_run_final_apc(run: *const DrlcovRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| {
        if r.inner.ledger.rows().is_empty() {
            f64::NAN
        } else {
            r.inner.final_apc
        }
    })
}

/// Release a run handle. NULL is a no-op; releasing twice is undefined.
///
/// # Safety
/// `run` must be NULL or a handle from `drlcov_run_training` that has not
/// been freed yet; it must not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn drlcov_run_free(run: *mut DrlcovRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
