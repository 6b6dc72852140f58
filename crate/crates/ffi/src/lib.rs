//! C ABI over the `cellsched` simulator, schedulers, rewards and trained
//! agents.
//!
//! Every fallible function returns a [`CsStatus`]; on failure a message is
//! kept per thread and can be copied out with [`cs_last_error_message`].
//! Environments and agents are opaque handles owned by the caller and
//! released with their `_free` functions. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use cellsched::agent::{checkpoint, scheduled_ue, DdpgAgent};
use cellsched::harness::normalize_rates;
use cellsched::reward::{self, Comparison, ComparisonOutcome, RewardSnapshot, RewardWeights};
use cellsched::sched::{jain_index, max_ci_select, pf_select, round_robin_select};
use cellsched::sim::{CellEnv, SimConfig};
use cellsched::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Contract = 4,
    NonFinite = 5,
    Io = 6,
    Checkpoint = 7,
    Panic = 8,
}

/// Comparison outcome codes used by the reward functions.
pub const CS_LESS: i32 = -1;
pub const CS_EQUAL: i32 = 0;
pub const CS_GREATER: i32 = 1;

/// Outcome of one TTI.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CsStepResult {
    pub tti: u64,
    pub delivered_bits: u64,
    pub ack: bool,
    pub retransmission: bool,
    pub mcs_index: u8,
}

/// Opaque simulator handle.
pub struct CsEnv(CellEnv);

/// Opaque trained-agent handle.
pub struct CsAgent(DdpgAgent);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> CsStatus {
    match err {
        Error::Config(_) | Error::Toml(_) | Error::Csv(_) => CsStatus::Config,
        Error::Contract(_) | Error::Empty(_) => CsStatus::Contract,
        Error::NonFinite(_) => CsStatus::NonFinite,
        Error::Checkpoint(_) => CsStatus::Checkpoint,
        Error::Io(_) | Error::Plot(_) => CsStatus::Io,
    }
}

enum Fail {
    Null,
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument");
            CsStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            CsStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Err(_) => {
            set_error("internal panic");
            CsStatus::Panic
        }
    }
}

unsafe fn in_slice<'a, T>(p: *const T, n: usize) -> Result<&'a [T], Fail> {
    if p.is_null() {
        return if n == 0 { Ok(&[]) } else { Err(Fail::Null) };
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn out_slice<'a, T>(p: *mut T, n: usize) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return if n == 0 { Ok(&mut []) } else { Err(Fail::Null) };
    }
    Ok(slice::from_raw_parts_mut(p, n))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null)
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Arg("string is not valid UTF-8".into()))
}

fn comparison(code: i32) -> Result<Comparison, Fail> {
    match code {
        CS_GREATER => Ok(Comparison::Greater),
        CS_EQUAL => Ok(Comparison::Equal),
        CS_LESS => Ok(Comparison::Less),
        other => Err(Fail::Arg(format!("invalid comparison code {other}"))),
    }
}

fn comparison_code(c: Comparison) -> i32 {
    match c {
        Comparison::Greater => CS_GREATER,
        Comparison::Equal => CS_EQUAL,
        Comparison::Less => CS_LESS,
    }
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates an environment. `sim_toml` holds simulator settings as TOML
/// and may be null for defaults.
///
/// # Safety
/// `sim_toml` must be null or a NUL-terminated string; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cs_env_new(sim_toml: *const c_char, out: *mut *mut CsEnv) -> CsStatus {
    guard(|| {
        let out = out_ref(out)?;
        let cfg = if sim_toml.is_null() {
            SimConfig::default()
        } else {
            SimConfig::from_toml_str(c_str(sim_toml)?)?
        };
        let env = CellEnv::with_default_table(cfg)?;
        *out = Box::into_raw(Box::new(CsEnv(env)));
        Ok(())
    })
}

/// # Safety
/// `env` must be null or a handle from [`cs_env_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_env_free(env: *mut CsEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Number of UEs, or 0 for a null handle.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_env_n_ue(env: *const CsEnv) -> usize {
    env.as_ref().map_or(0, |e| e.0.n_ue())
}

unsafe fn write_observation(env: &CellEnv, inst: *mut f64, avg: *mut f64, n: usize) -> Result<(), Fail> {
    if n != env.n_ue() {
        return Err(Fail::Arg(format!("buffers hold {n} values, environment has {} UEs", env.n_ue())));
    }
    let obs = env.observation();
    out_slice(inst, n)?.copy_from_slice(&obs.inst_rate);
    out_slice(avg, n)?.copy_from_slice(&obs.avg_rate);
    Ok(())
}

/// Starts an episode and writes the first observation (`I_n` and `T_n`,
/// `n` values each).
///
/// # Safety
/// `env` must be a live handle; `inst` and `avg` valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_env_reset(env: *mut CsEnv, seed: u64, inst: *mut f64, avg: *mut f64, n: usize) -> CsStatus {
    guard(|| {
        let env = &mut out_ref(env)?.0;
        env.reset(seed);
        write_observation(env, inst, avg, n)
    })
}

/// Writes the current observation.
///
/// # Safety
/// As for [`cs_env_reset`].
#[no_mangle]
pub unsafe extern "C" fn cs_env_observe(env: *const CsEnv, inst: *mut f64, avg: *mut f64, n: usize) -> CsStatus {
    guard(|| {
        let env = &env.as_ref().ok_or(Fail::Null)?.0;
        write_observation(env, inst, avg, n)
    })
}

/// Serves `ue` for one TTI.
///
/// # Safety
/// `env` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_env_step(env: *mut CsEnv, ue: usize, out: *mut CsStepResult) -> CsStatus {
    guard(|| {
        let env = &mut out_ref(env)?.0;
        let out = out_ref(out)?;
        let (res, _) = env.step(ue)?;
        *out = CsStepResult {
            tti: res.tti,
            delivered_bits: res.delivered_bits,
            ack: res.ack,
            retransmission: res.retransmission,
            mcs_index: res.mcs_index,
        };
        Ok(())
    })
}

/// # Safety
/// `inst` and `avg` valid for `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_pf_select(inst: *const f64, avg: *const f64, n: usize, out: *mut usize) -> CsStatus {
    guard(|| {
        *out_ref(out)? = pf_select(in_slice(inst, n)?, in_slice(avg, n)?)?;
        Ok(())
    })
}

/// # Safety
/// `inst` valid for `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_maxci_select(inst: *const f64, n: usize, out: *mut usize) -> CsStatus {
    guard(|| {
        *out_ref(out)? = max_ci_select(in_slice(inst, n)?)?;
        Ok(())
    })
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_rr_select(tti: u64, n: usize, out: *mut usize) -> CsStatus {
    guard(|| {
        *out_ref(out)? = round_robin_select(tti, n)?;
        Ok(())
    })
}

/// # Safety
/// `v` valid for `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_jain_index(v: *const f64, n: usize, out: *mut f64) -> CsStatus {
    guard(|| {
        *out_ref(out)? = jain_index(in_slice(v, n)?)?;
        Ok(())
    })
}

/// Writes `CS_GREATER`, `CS_EQUAL` or `CS_LESS`.
///
/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_compare_metrics(mine: f64, theirs: f64, rel_tol: f64, out: *mut i32) -> CsStatus {
    guard(|| {
        if !(rel_tol >= 0.0) {
            return Err(Fail::Arg("rel_tol must be non-negative".into()));
        }
        *out_ref(out)? = comparison_code(reward::compare_metrics(mine, theirs, rel_tol));
        Ok(())
    })
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_direct_reward(
    inst_throughput: f64,
    jfi: f64,
    alpha: f64,
    beta: f64,
    tp_scale: f64,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let w = RewardWeights::new(alpha, beta)?;
        let snap = RewardSnapshot {
            inst_throughput,
            window_throughput: 0.0,
            jfi,
        };
        *out_ref(out)? = reward::direct_reward(&snap, &w, tp_scale)?;
        Ok(())
    })
}

fn outcome(tp: i32, jfi: i32) -> Result<ComparisonOutcome, Fail> {
    Ok(ComparisonOutcome {
        throughput: comparison(tp)?,
        jfi: comparison(jfi)?,
    })
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_dual_reward(tp_cmp: i32, jfi_cmp: i32, alpha: f64, beta: f64, out: *mut f64) -> CsStatus {
    guard(|| {
        let w = RewardWeights::new(alpha, beta)?;
        *out_ref(out)? = reward::dual_reward(outcome(tp_cmp, jfi_cmp)?, &w);
        Ok(())
    })
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_expert_reward(tp_cmp: i32, jfi_cmp: i32, alpha: f64, beta: f64, out: *mut f64) -> CsStatus {
    guard(|| {
        let w = RewardWeights::new(alpha, beta)?;
        *out_ref(out)? = reward::expert_reward(outcome(tp_cmp, jfi_cmp)?, &w);
        Ok(())
    })
}

/// Writes the `2n` network inputs for an observation.
///
/// # Safety
/// `inst` and `avg` valid for `n` doubles, `state` for `2n`.
#[no_mangle]
pub unsafe extern "C" fn cs_normalize_state(inst: *const f64, avg: *const f64, n: usize, state: *mut f64) -> CsStatus {
    guard(|| {
        let s = normalize_rates(in_slice(inst, n)?, in_slice(avg, n)?)?;
        out_slice(state, 2 * n)?.copy_from_slice(&s);
        Ok(())
    })
}

/// Loads a checkpoint written by `cellsched train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_agent_load(path: *const c_char, out: *mut *mut CsAgent) -> CsStatus {
    guard(|| {
        let out = out_ref(out)?;
        let agent = checkpoint::load(c_str(path)?, 0)?;
        *out = Box::into_raw(Box::new(CsAgent(agent)));
        Ok(())
    })
}

/// # Safety
/// `agent` must be null or a handle from [`cs_agent_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_agent_free(agent: *mut CsAgent) {
    if !agent.is_null() {
        drop(Box::from_raw(agent));
    }
}

/// Number of UEs the agent schedules, or 0 for a null handle.
///
/// # Safety
/// `agent` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cs_agent_n_ue(agent: *const CsAgent) -> usize {
    agent.as_ref().map_or(0, |a| a.0.n_ue())
}

/// Noise-free action for a normalized state of `2n` values. Writes the `n`
/// metrics to `action` (may be null) and the scheduled UE to `ue`.
///
/// # Safety
/// `agent` must be a live handle, `state` valid for `2n` doubles, `action`
/// null or valid for `n`, `ue` writable.
#[no_mangle]
pub unsafe extern "C" fn cs_agent_act(
    agent: *const CsAgent,
    state: *const f64,
    n: usize,
    action: *mut f64,
    ue: *mut usize,
) -> CsStatus {
    guard(|| {
        let agent = &agent.as_ref().ok_or(Fail::Null)?.0;
        if n != agent.n_ue() {
            return Err(Fail::Arg(format!("agent schedules {} UEs, got {n}", agent.n_ue())));
        }
        let a = agent.actor().predict(in_slice(state, 2 * n)?)?;
        if !action.is_null() {
            out_slice(action, n)?.copy_from_slice(&a);
        }
        *out_ref(ue)? = scheduled_ue(&a);
        Ok(())
    })
}
