//! C ABI over the agentloop scenarios, the action message codec and
//! default belief revision.
//!
//! Every fallible call returns an [`AlStatus`] and writes its result through
//! an out pointer. On failure the out pointer is left untouched and
//! [`al_last_error_message`] describes the problem. Strings handed to the
//! caller must be released with [`al_string_free`]; simulations with
//! [`al_sim_free`]. A simulation may be used from one thread at a time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use agentloop::distributed::{decode_action_message, encode_action_message, ActionMessage};
use agentloop::scenarios::excuse::{self, ExcuseConfig, StubGenerator};
use agentloop::scenarios::gol::{self, GolConfig};
use agentloop::scenarios::porter;
use agentloop::trace::write_jsonl;
use agentloop::value::canonical_string;
use agentloop::{default_revise, Action, BeliefBase, Environment};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument was out of range or inconsistent.
    InvalidArgument = 3,
    /// A JSON or pattern argument did not parse.
    Parse = 4,
    /// The environment reported an error while stepping.
    Environment = 5,
    /// The library panicked; the handle involved should be freed.
    Panic = 6,
}

/// Opaque handle to a running scenario.
pub struct AlSimulation {
    env: Environment,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AlStatus, String);

impl Failure {
    fn new(status: AlStatus, message: impl std::fmt::Display) -> Self {
        Failure(status, message.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            AlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(AlStatus::NullArgument, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(AlStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

fn check_out<T>(out: *mut T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::new(AlStatus::NullArgument, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn sim_arg<'a>(sim: *mut AlSimulation) -> Result<&'a mut AlSimulation, Failure> {
    sim.as_mut()
        .ok_or_else(|| Failure::new(AlStatus::NullArgument, "sim is NULL"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure::new(AlStatus::InvalidArgument, e))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_sim(out: *mut *mut AlSimulation, env: Environment) {
    *out = Box::into_raw(Box::new(AlSimulation { env }));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn al_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn al_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Single porter serving random lock and unlock requests drawn from `seed`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_porter_new(seed: u64, out: *mut *mut AlSimulation) -> AlStatus {
    guard(|| {
        check_out(out, "out")?;
        write_sim(out, porter::porter_environment(seed));
        Ok(())
    })
}

/// Paranoid, claustrophobe and porter sharing one door.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_porter_mas_new(out: *mut *mut AlSimulation) -> AlStatus {
    guard(|| {
        check_out(out, "out")?;
        write_sim(out, porter::porter_mas_environment());
        Ok(())
    })
}

/// Toroidal Game of Life with a random initial grid.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_gol_random_new(
    width: usize,
    height: usize,
    seed: u64,
    out: *mut *mut AlSimulation,
) -> AlStatus {
    guard(|| {
        check_out(out, "out")?;
        let cfg = GolConfig::random(width, height, seed)
            .map_err(|e| Failure::new(AlStatus::InvalidArgument, e))?;
        write_sim(out, gol::gol_environment(&cfg));
        Ok(())
    })
}

/// Game of Life seeded from a `.`/`#` pattern. With `width` and `height`
/// both 0 the grid is the pattern's size; otherwise the pattern is placed
/// in the top-left corner of a grid that size.
///
/// # Safety
/// `pattern` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_gol_pattern_new(
    pattern: *const c_char,
    width: usize,
    height: usize,
    out: *mut *mut AlSimulation,
) -> AlStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = str_arg(pattern, "pattern")?;
        let mut cfg = GolConfig::parse_pattern(text).map_err(|e| Failure::new(AlStatus::Parse, e))?;
        if width != 0 || height != 0 {
            cfg = cfg
                .placed_in(width, height)
                .map_err(|e| Failure::new(AlStatus::InvalidArgument, e))?;
        }
        write_sim(out, gol::gol_environment(&cfg));
        Ok(())
    })
}

/// Excuse-writing student with the built-in offline generator. NULL names
/// fall back to the defaults.
///
/// # Safety
/// Non-NULL names must be NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn al_excuse_new(
    name: *const c_char,
    teacher_name: *const c_char,
    out: *mut *mut AlSimulation,
) -> AlStatus {
    guard(|| {
        check_out(out, "out")?;
        let mut cfg = ExcuseConfig::default();
        if let Some(n) = opt_str_arg(name, "name")? {
            cfg.name = n.to_owned();
        }
        if let Some(t) = opt_str_arg(teacher_name, "teacher_name")? {
            cfg.teacher_name = t.to_owned();
        }
        write_sim(out, excuse::excuse_environment(&cfg, Arc::new(StubGenerator)));
        Ok(())
    })
}

/// Runs `steps` environment steps and returns their trace records as JSON
/// lines, each terminated by `\n`.
///
/// # Safety
/// `sim` must be a live handle and `out_jsonl` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_sim_run(
    sim: *mut AlSimulation,
    steps: usize,
    out_jsonl: *mut *mut c_char,
) -> AlStatus {
    guard(|| {
        check_out(out_jsonl, "out_jsonl")?;
        let sim = sim_arg(sim)?;
        if steps == 0 {
            return Err(Failure::new(AlStatus::InvalidArgument, "steps must be positive"));
        }
        let records = sim
            .env
            .run(steps)
            .map_err(|e| Failure::new(AlStatus::Environment, e))?;
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &records).map_err(|e| Failure::new(AlStatus::Environment, e))?;
        let text = String::from_utf8(buf).map_err(|e| Failure::new(AlStatus::Environment, e))?;
        write_string(out_jsonl, text)
    })
}

/// One environment step; same output as `al_sim_run(sim, 1, out_jsonl)`.
///
/// # Safety
/// `sim` must be a live handle and `out_jsonl` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_sim_step(sim: *mut AlSimulation, out_jsonl: *mut *mut c_char) -> AlStatus {
    al_sim_run(sim, 1, out_jsonl)
}

/// Current environment state as canonical JSON.
///
/// # Safety
/// `sim` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_sim_state_json(sim: *mut AlSimulation, out_json: *mut *mut c_char) -> AlStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let sim = sim_arg(sim)?;
        write_string(out_json, canonical_string(sim.env.state()))
    })
}

/// Number of steps run so far.
///
/// # Safety
/// `sim` must be a live handle and `out_step` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_sim_current_step(sim: *mut AlSimulation, out_step: *mut u64) -> AlStatus {
    guard(|| {
        check_out(out_step, "out_step")?;
        *out_step = sim_arg(sim)?.env.current_step();
        Ok(())
    })
}

/// Releases a simulation. NULL is ignored.
///
/// # Safety
/// `sim` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn al_sim_free(sim: *mut AlSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Applies default belief revision. Both inputs and the output are belief
/// bases in canonical JSON.
///
/// # Safety
/// Inputs must be NUL-terminated strings and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_default_revise_json(
    beliefs_json: *const c_char,
    percepts_json: *const c_char,
    out_json: *mut *mut c_char,
) -> AlStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let parse = |p, name: &str| -> Result<BeliefBase, Failure> {
            BeliefBase::from_canonical_json(str_arg(p, name)?)
                .map_err(|e| Failure::new(AlStatus::Parse, format!("{name}: {e}")))
        };
        let beliefs = parse(beliefs_json, "beliefs_json")?;
        let percepts = parse(percepts_json, "percepts_json")?;
        write_string(out_json, default_revise(&beliefs, &percepts).to_canonical_json())
    })
}

/// Builds an action message. `actions_json` is a JSON array of batches,
/// each an array of actions.
///
/// # Safety
/// Inputs must be NUL-terminated strings and `out_message` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn al_encode_action_message(
    agent_id: *const c_char,
    actions_json: *const c_char,
    out_message: *mut *mut c_char,
) -> AlStatus {
    guard(|| {
        check_out(out_message, "out_message")?;
        let id = str_arg(agent_id, "agent_id")?;
        if id.is_empty() {
            return Err(Failure::new(AlStatus::InvalidArgument, "agent_id must be non-empty"));
        }
        let actions: Vec<Vec<Action>> = serde_json::from_str(str_arg(actions_json, "actions_json")?)
            .map_err(|e| Failure::new(AlStatus::Parse, format!("actions_json: {e}")))?;
        write_string(out_message, encode_action_message(&ActionMessage::new(id, actions)))
    })
}

/// Splits an action message into its agent id and its batches (canonical
/// JSON).
///
/// # Safety
/// `message` must be a NUL-terminated string; both out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn al_decode_action_message(
    message: *const c_char,
    out_agent_id: *mut *mut c_char,
    out_actions_json: *mut *mut c_char,
) -> AlStatus {
    guard(|| {
        check_out(out_agent_id, "out_agent_id")?;
        check_out(out_actions_json, "out_actions_json")?;
        let msg = decode_action_message(str_arg(message, "message")?)
            .map_err(|e| Failure::new(AlStatus::Parse, e))?;
        let id = CString::new(msg.agent_id).map_err(|e| Failure::new(AlStatus::Parse, e))?;
        let actions = CString::new(canonical_string(&msg.actions)).map_err(|e| Failure::new(AlStatus::Parse, e))?;
        *out_agent_id = id.into_raw();
        *out_actions_json = actions.into_raw();
        Ok(())
    })
}
