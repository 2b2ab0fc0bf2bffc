//! A student's agent asks a text generator for a homework excuse and
//! retries with the teacher's feedback until the excuse is accepted.

use std::sync::Arc;
use std::thread;
use std::time::Duration;

use crate::agent::Agent;
use crate::belief::{BeliefBase, Percepts, ReviseError};
use crate::environment::{EnvError, Environment};
use crate::plan::{Action, Plan, PlanError};
use crate::scenarios::generator::{GeneratorError, TextGenerator};
use crate::trace::{EnvState, TraceRecord};
use crate::value::BeliefValue;

pub const STUDENT: &str = "student";
pub const DEFAULT_INTERVAL: Duration = Duration::from_millis(3000);
pub const DEFAULT_MAX_CYCLES: u64 = 10;
pub const MAX_EXCUSE_CHARS: usize = 1200;

pub const R1_TEACHER: &str = "The excuse does not address the teacher by name.";
pub const R2_SIGNATURE: &str = "The excuse is not signed with the student's name.";
pub const R3_LENGTH: &str = "The excuse is too long; keep it under 1200 characters.";
pub const R4_REPEAT: &str = "The excuse repeats one that was already rejected.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcuseConfig {
    pub name: String,
    pub teacher_name: String,
}

impl Default for ExcuseConfig {
    fn default() -> Self {
        ExcuseConfig {
            name: "Bart".into(),
            teacher_name: "Edna Krabappel".into(),
        }
    }
}

pub fn excuse_beliefs(config: &ExcuseConfig) -> BeliefBase {
    BeliefBase::new()
        .with("rejectExps", BeliefValue::empty_list())
        .and_then(|b| b.with("excuseAccepted", false))
        .and_then(|b| b.with("name", config.name.as_str()))
        .and_then(|b| b.with("teacherName", config.teacher_name.as_str()))
        .expect("static keys are valid")
}

fn text<'a>(beliefs: &'a BeliefBase, key: &str) -> Result<&'a str, PlanError> {
    beliefs
        .value(key)
        .and_then(BeliefValue::as_str)
        .ok_or_else(|| PlanError::missing(key))
}

fn reject_exps(beliefs: &BeliefBase) -> &[BeliefValue] {
    beliefs
        .value("rejectExps")
        .and_then(BeliefValue::as_list)
        .unwrap_or(&[])
}

pub fn prompt_text(teacher_name: &str, name: &str, reject_exps: &[&str]) -> String {
    let feedback = reject_exps
        .iter()
        .map(|exp| format!("• {exp}"))
        .collect::<Vec<_>>()
        .join("\n");
    format!(
        "Can you write a charming yet convincing excuse\n\
         for a student who forgot their homework?\n\
         The names of teacher and student are\n\
         {teacher_name}, and {name},\n\
         respectively (i.e., sign the excuse with {name}).\n\
         \n\
         Consider the following feedback\n\
         received from past rejected excuses:\n\
         \n\
         {feedback}"
    )
}

pub fn gen_prompt(beliefs: &BeliefBase) -> Result<String, PlanError> {
    let exps: Vec<&str> = reject_exps(beliefs).iter().filter_map(BeliefValue::as_str).collect();
    Ok(prompt_text(text(beliefs, "teacherName")?, text(beliefs, "name")?, &exps))
}

/// While no excuse has been accepted, asks the generator for one and
/// submits it as a single text action.
pub fn excuse_plan(generator: Arc<dyn TextGenerator>) -> Plan {
    Plan::new(
        |b| {
            let accepted = b.value("excuseAccepted").is_some_and(BeliefValue::is_truthy);
            Ok(!accepted)
        },
        move |b| {
            let prompt = gen_prompt(b)?;
            let excuse = generator
                .generate(&prompt)
                .map_err(|e| PlanError::new(e.to_string()))?;
            Ok(vec![Action::Token(excuse)])
        },
    )
}

/// Marks acceptance, or records a novel non-empty rejection explanation.
pub fn excuse_revise_beliefs(
    beliefs: &BeliefBase,
    percepts: &Percepts,
) -> Result<BeliefBase, ReviseError> {
    let mut out = beliefs.clone();
    let set = |out: &mut BeliefBase, k: &str, v: BeliefValue| {
        out.set(k, v).map_err(|e| ReviseError::new(e.to_string()))
    };
    if percepts.value("excuseAccepted").is_some_and(BeliefValue::is_truthy) {
        set(&mut out, "excuseAccepted", true.into())?;
        return Ok(out);
    }
    let current = reject_exps(beliefs);
    if let Some(exp) = percepts.value("rejectExp").filter(|v| v.is_truthy()) {
        if !current.contains(exp) {
            let mut next = current.to_vec();
            next.push(exp.clone());
            set(&mut out, "rejectExps", BeliefValue::list(next))?;
        }
    }
    Ok(out)
}

pub fn excuse_agent(config: &ExcuseConfig, generator: Arc<dyn TextGenerator>) -> Agent {
    Agent::new(STUDENT, excuse_beliefs(config), vec![excuse_plan(generator)])
        .expect("static id is valid")
        .with_revision(excuse_revise_beliefs)
}

/// The first rule the excuse breaks, if any.
///
/// R1 names the teacher, R2 names (signs with) the student, R3 is at most
/// [`MAX_EXCUSE_CHARS`] characters, R4 differs from every rejected excuse.
pub fn check_excuse(excuse: &str, config: &ExcuseConfig, rejected: &[BeliefValue]) -> Option<&'static str> {
    if !excuse.contains(&config.teacher_name) {
        Some(R1_TEACHER)
    } else if !excuse.contains(&config.name) {
        Some(R2_SIGNATURE)
    } else if excuse.chars().count() > MAX_EXCUSE_CHARS {
        Some(R3_LENGTH)
    } else if rejected.iter().any(|r| r.as_str() == Some(excuse)) {
        Some(R4_REPEAT)
    } else {
        None
    }
}

pub fn excuse_initial_state() -> EnvState {
    let mut s = EnvState::new();
    s.insert("excuseAccepted".into(), false.into());
    s.insert("rejectExp".into(), "".into());
    s.insert("rejectedExcuses".into(), BeliefValue::empty_list());
    s
}

/// Judges the first action as the excuse. Without one, only `rejectExp`
/// is cleared. A rejection sets `rejectExp` and remembers the excuse in
/// `rejectedExcuses`; acceptance sets `excuseAccepted` and drops
/// `rejectExp`.
pub fn excuse_update_state(actions: &[Action], state: &EnvState, config: &ExcuseConfig) -> EnvState {
    let mut next = state.clone();
    let Some(excuse) = actions.first().and_then(Action::as_token).filter(|e| !e.is_empty()) else {
        next.insert("rejectExp".into(), "".into());
        return next;
    };
    let rejected = state
        .get("rejectedExcuses")
        .and_then(BeliefValue::as_list)
        .unwrap_or(&[]);
    match check_excuse(excuse, config, rejected) {
        Some(explanation) => {
            let mut history = rejected.to_vec();
            history.push(excuse.into());
            next.insert("excuseAccepted".into(), false.into());
            next.insert("rejectExp".into(), explanation.into());
            next.insert("rejectedExcuses".into(), BeliefValue::list(history));
        }
        None => {
            next.insert("excuseAccepted".into(), true.into());
            next.remove("rejectExp");
        }
    }
    next
}

pub fn excuse_environment(config: &ExcuseConfig, generator: Arc<dyn TextGenerator>) -> Environment {
    let rules = config.clone();
    Environment::builder(
        vec![Box::new(excuse_agent(config, generator))],
        excuse_initial_state(),
    )
    .update_state(move |actions, _, state| Ok(excuse_update_state(actions, state, &rules)))
    .build()
    .expect("single agent")
}

pub fn excuse_accepted(state: &EnvState) -> bool {
    state.get("excuseAccepted").is_some_and(BeliefValue::is_truthy)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcuseRun {
    pub records: Vec<TraceRecord>,
    pub cycles: u64,
    pub accepted: bool,
}

/// Steps the environment every `interval` until an excuse is accepted or
/// `max_cycles` cycles have run.
pub fn run_excuse(env: &mut Environment, interval: Duration, max_cycles: u64) -> Result<ExcuseRun, EnvError> {
    run_excuse_with(env, interval, max_cycles, |_| {})
}

/// [`run_excuse`] that hands each cycle's records to `on_cycle` as they
/// are produced.
pub fn run_excuse_with(
    env: &mut Environment,
    interval: Duration,
    max_cycles: u64,
    mut on_cycle: impl FnMut(&[TraceRecord]),
) -> Result<ExcuseRun, EnvError> {
    if max_cycles == 0 {
        return Err(EnvError::ZeroSteps);
    }
    let mut run = ExcuseRun {
        records: Vec::new(),
        cycles: 0,
        accepted: false,
    };
    while run.cycles < max_cycles {
        if run.cycles > 0 && !interval.is_zero() {
            thread::sleep(interval);
        }
        let records = env.step()?;
        on_cycle(&records);
        run.records.extend(records);
        run.cycles += 1;
        if excuse_accepted(env.state()) {
            run.accepted = true;
            break;
        }
    }
    Ok(run)
}

/// Deterministic offline generator.
///
/// Reads the names and the feedback bullets back out of the prompt. The
/// first draft is a bare apology; feedback about the teacher adds a
/// greeting, feedback about the signature adds a signature, and feedback
/// about length switches to a short apology. Every draft carries its
/// number, so no two drafts repeat.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubGenerator;

impl TextGenerator for StubGenerator {
    fn generate(&self, prompt: &str) -> Result<String, GeneratorError> {
        let (teacher, name) = names_in_prompt(prompt)
            .ok_or_else(|| GeneratorError::Failed("prompt does not name teacher and student".into()))?;
        let feedback: Vec<&str> = prompt.lines().filter_map(|l| l.strip_prefix("• ")).collect();
        let mentions = |word: &str| feedback.iter().any(|f| f.contains(word));
        let draft = feedback.len() + 1;
        let mut out = String::new();
        if mentions("teacher") {
            out.push_str(&format!("Dear {teacher},\n\n"));
        }
        if mentions("too long") {
            out.push_str(&format!("I am sorry, I forgot my homework. (draft {draft})"));
        } else {
            out.push_str(&format!(
                "I am truly sorry. My homework was finished, but a gust of wind took it \
                 off the bus and into the river. I will redo it tonight and hand it in \
                 tomorrow morning. (draft {draft})"
            ));
        }
        if mentions("signed") {
            out.push_str(&format!("\n\nSincerely,\n{name}"));
        }
        Ok(out)
    }
}

fn names_in_prompt(prompt: &str) -> Option<(String, String)> {
    let mut lines = prompt.lines();
    lines.find(|l| l.starts_with("The names of teacher and student are"))?;
    let names = lines.next()?.strip_suffix(',')?;
    let sign = lines.next()?;
    let name = sign
        .strip_prefix("respectively (i.e., sign the excuse with ")?
        .strip_suffix(").")?;
    let teacher = names.strip_suffix(name)?.strip_suffix(", and ")?;
    Some((teacher.to_owned(), name.to_owned()))
}
