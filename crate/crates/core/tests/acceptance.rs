//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion, and exits non-zero if any failed.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use agentloop::belief::default_revise;
use agentloop::distributed::{
    client_loop, decode_action_message, decode_belief_update, encode_action_message,
    encode_belief_update, BeliefUpdateMessage, Channel, ChannelError, ClientExit, LoopbackChannel,
    RemoteTurn, ServeEnd, Server, SharedChannel, SharedRegistry,
};
use agentloop::scenarios::excuse::{self, ExcuseConfig, StubGenerator};
use agentloop::scenarios::gol::{self, GolConfig};
use agentloop::scenarios::porter::{self, door_locked};
use agentloop::scenarios::{GeneratorError, TextGenerator};
use agentloop::{deliberate, Action, BeliefBase, BeliefValue, Plan, TraceRecord};
use common::conway;
use common::strategies;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn timed(limit: Duration, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let took = start.elapsed();
    if took >= limit {
        return Err(format!("{detail}; took {took:?}, limit {limit:?}"));
    }
    Ok(format!("{detail}; {took:.2?} < {limit:?}"))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tokens(v: Option<&BeliefValue>) -> Vec<String> {
    v.and_then(BeliefValue::as_list)
        .unwrap_or(&[])
        .iter()
        .filter_map(|t| t.as_str().map(String::from))
        .collect()
}

fn action_tokens(r: &TraceRecord) -> Vec<String> {
    r.actions.iter().filter_map(|a| a.as_token().map(String::from)).collect()
}

// 1. porter, single agent, 20 steps, fixed seed
fn porter_single() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mut env = porter::porter_environment(7);
        let records = env.run(20).map_err(|e| e.to_string())?;
        check(records.len() == 20, || format!("{} records", records.len()))?;
        // reference model of the porter's request queue
        let mut queue: Vec<String> = Vec::new();
        let mut locked = true;
        let mut piled_up = 0;
        for r in &records {
            let executed_before = tokens(r.percepts.value("executions"));
            queue.retain(|t| !executed_before.contains(t));
            let incoming = tokens(r.percepts.value("requests"));
            queue.extend(incoming.iter().cloned());
            let acts = action_tokens(r);
            // (b) requested and applicable
            for a in &acts {
                check(queue.contains(a), || format!("step {}: {a} was never requested", r.step))?;
                let applicable = (a == "lock" && !locked) || (a == "unlock" && locked);
                check(applicable, || format!("step {}: {a} with door locked={locked}", r.step))?;
            }
            // (c) requests that cannot be served wait in the queue
            let expect = if locked { "unlock" } else { "lock" };
            let want: Vec<&str> = if queue.iter().any(|t| t == expect) { vec![expect] } else { vec![] };
            check(acts == want, || format!("step {}: acted {acts:?} with queue {queue:?}", r.step))?;
            piled_up += queue.iter().filter(|t| t.as_str() != expect).count();
            // (a) door follows the last executed action
            if let Some(last) = acts.last() {
                locked = last == "lock";
            }
            check(door_locked(&r.post_state) == Some(locked), || format!("step {}: door mismatch", r.step))?;
        }
        let porter_queue = tokens(env.participant("porter").unwrap().beliefs().value("requests"));
        check(porter_queue == queue, || format!("porter queue {porter_queue:?} vs model {queue:?}"))?;
        check(piled_up > 0, || "seed produced no inapplicable requests".into())?;
        Ok(format!("20 steps, door/requests/pile-up consistent ({piled_up} queued-inapplicable observations)"))
    })
}

fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<bool> {
    (0..w * h).map(|_| rng.gen_bool(0.5)).collect()
}

// 2. GoL vs brute-force oracle
fn gol_oracle() -> Outcome {
    timed(Duration::from_secs(10), || {
        let (w, h, grids, gens) = (16, 16, 100, 50);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for g in 0..grids {
            let cells = random_grid(&mut rng, w, h);
            let mut oracle = conway::from_flat(&cells, w);
            let mut env = gol::gol_environment(&GolConfig::new(w, h, cells).unwrap());
            for k in 1..=gens {
                env.step().map_err(|e| e.to_string())?;
                oracle = conway::generation(&oracle);
                let got = gol::current_activity(env.state()).ok_or("malformed state")?;
                check(got == conway::to_flat(&oracle), || format!("grid {g} diverges at generation {k}"))?;
            }
        }
        Ok(format!("{grids} random {w}x{h} grids x {gens} generations bit-exact"))
    })
}

fn run_gol(pattern: &str, size: Option<(usize, usize)>, gens: usize) -> Result<Vec<Vec<bool>>, String> {
    let mut cfg = GolConfig::parse_pattern(pattern).map_err(|e| e.to_string())?;
    if let Some((w, h)) = size {
        cfg = cfg.placed_in(w, h).map_err(|e| e.to_string())?;
    }
    let mut env = gol::gol_environment(&cfg);
    let mut out = vec![cfg.initial_activity().to_vec()];
    for _ in 0..gens {
        env.step().map_err(|e| e.to_string())?;
        out.push(gol::current_activity(env.state()).ok_or("malformed state")?);
    }
    Ok(out)
}

// 3. known patterns
fn gol_patterns() -> Outcome {
    timed(Duration::from_secs(1), || {
        let block = run_gol("......\n..##..\n..##..\n......", None, 10)?;
        check(block.iter().all(|g| *g == block[0]), || "block changed".into())?;

        let blinker = run_gol(".....\n.....\n.###.\n.....\n.....", None, 4)?;
        check(blinker[1] != blinker[0], || "blinker has period 1".into())?;
        check(blinker[2] == blinker[0] && blinker[4] == blinker[0], || "blinker period is not 2".into())?;
        let oracle_next = conway::to_flat(&conway::generation(&conway::from_flat(&blinker[0], 5)));
        check(blinker[1] == oracle_next, || "blinker phase disagrees with oracle".into())?;

        let glider = run_gol(".#.\n..#\n###", Some((10, 10)), 4)?;
        let shifted = conway::to_flat(&conway::translate(&conway::from_flat(&glider[0], 10), 1, 1));
        check(glider[4] == shifted, || "glider not translated by (+1,+1) after 4 generations".into())?;
        check(glider[1..4].iter().all(|g| *g != shifted), || "glider arrived early".into())?;
        Ok("block still for 10, blinker period 2, glider (+1,+1) after 4 on 10x10".into())
    })
}

/// Client end that slips an unparseable frame in before every tenth
/// message.
struct Noisy {
    inner: LoopbackChannel,
    sent: u64,
    junk: Arc<AtomicUsize>,
}

impl Channel for Noisy {
    fn send(&mut self, frame: &str) -> Result<(), ChannelError> {
        if self.sent % 10 == 9 {
            self.inner.send("{not json")?;
            self.junk.fetch_add(1, Ordering::SeqCst);
        }
        self.sent += 1;
        self.inner.send(frame)
    }
    fn recv(&mut self) -> Result<String, ChannelError> {
        self.inner.recv()
    }
    fn close(&mut self) {
        self.inner.close()
    }
}

// 4. distributed porter MAS over loopback
fn distributed_porter() -> Outcome {
    timed(Duration::from_secs(5), || {
        let messages = 100;
        let (server_end, client_end) = LoopbackChannel::pair();
        let junk = Arc::new(AtomicUsize::new(0));
        let mut client_end = Noisy { inner: client_end, sent: 0, junk: junk.clone() };
        let client = thread::spawn(move || {
            let mut agent = porter::claustrophobe_agent();
            client_loop(&mut agent, &mut client_end, Some(messages))
        });
        let channel = SharedChannel::new(server_end);
        let registry = SharedRegistry::new();
        let env = porter::porter_mas_server_environment(channel.clone(), registry.clone(), RemoteTurn::Lockstep)
            .map_err(|e| e.to_string())?;
        let mut server = Server::new(env, registry, channel).map_err(|e| e.to_string())?;
        let mut per_cycle = Vec::new();
        let mut records = Vec::new();
        let report = server
            .serve(None, |r| {
                per_cycle.push(r.len());
                records.extend_from_slice(r);
            })
            .map_err(|e| e.to_string())?;
        let exit = client.join().map_err(|_| "client panicked")?.map_err(|e| e.to_string())?;
        check(exit == ClientExit::BudgetExhausted { sent: messages }, || format!("client {exit:?}"))?;
        let junk = junk.load(Ordering::SeqCst) as u64;
        // (a)
        check(report.end == ServeEnd::PeerClosed, || format!("{report:?}"))?;
        check(report.frames == messages + junk && junk > 0, || format!("{report:?}, {junk} junk"))?;
        check(report.cycles == messages && per_cycle.len() as u64 == messages, || {
            format!("{} cycles for {messages} valid messages", report.cycles)
        })?;
        check(server.warnings().len() as u64 == junk, || format!("{:?}", server.warnings()))?;
        // (b)
        let doors: Vec<bool> = records.iter().filter_map(|r| door_locked(&r.post_state)).collect();
        let changes = doors.windows(2).filter(|w| w[0] != w[1]).count()
            + usize::from(doors.first() == Some(&false));
        check(changes >= 10, || format!("door changed {changes} times"))?;
        // (c)
        let local = porter::porter_mas_environment().run(messages as usize).map_err(|e| e.to_string())?;
        let key = |r: &TraceRecord| (r.agent_id.clone(), r.actions.clone());
        let remote: Vec<_> = records.iter().map(key).collect();
        let local: Vec<_> = local.iter().map(key).collect();
        check(remote.len() == 3 * (messages as usize - 1) + 1, || format!("{} records", remote.len()))?;
        check(remote[..] == local[..remote.len()], || {
            let i = remote.iter().zip(&local).position(|(a, b)| a != b).unwrap_or(0);
            format!("traces differ at record {i}: {:?} vs {:?}", remote[i], local[i])
        })?;
        Ok(format!(
            "{messages} messages + {junk} junk -> {} cycles, {changes} door changes, {} records match the local run",
            report.cycles,
            remote.len()
        ))
    })
}

struct Recording {
    inner: StubGenerator,
    prompts: Mutex<Vec<String>>,
}

impl TextGenerator for Recording {
    fn generate(&self, prompt: &str) -> Result<String, GeneratorError> {
        self.prompts.lock().unwrap().push(prompt.to_owned());
        self.inner.generate(prompt)
    }
}

fn feedback(prompt: &str) -> Vec<&str> {
    prompt.lines().filter_map(|l| l.strip_prefix("• ")).collect()
}

// 5. excuse with the stub generator
fn excuse_stub() -> Outcome {
    timed(Duration::from_secs(1), || {
        let generator = Arc::new(Recording { inner: StubGenerator, prompts: Mutex::new(Vec::new()) });
        let mut env = excuse::excuse_environment(&ExcuseConfig::default(), generator.clone());
        let run = excuse::run_excuse(&mut env, Duration::ZERO, excuse::DEFAULT_MAX_CYCLES)
            .map_err(|e| e.to_string())?;
        check(run.accepted && run.cycles <= 4, || format!("accepted={} after {}", run.accepted, run.cycles))?;
        let calls = generator.prompts.lock().unwrap().len();
        check(calls as u64 == run.cycles, || format!("{calls} calls in {} cycles", run.cycles))?;
        env.run(5).map_err(|e| e.to_string())?;
        let after = generator.prompts.lock().unwrap().clone();
        check(after.len() == calls, || format!("{} generator calls after acceptance", after.len() - calls))?;
        for (i, p) in after.iter().enumerate() {
            let f = feedback(p);
            let mut dedup = f.clone();
            dedup.sort_unstable();
            dedup.dedup();
            check(dedup.len() == f.len(), || format!("prompt {i} repeats feedback"))?;
        }
        let beliefs = env.participant(excuse::STUDENT).unwrap().beliefs();
        let exps = tokens(beliefs.value("rejectExps"));
        check(beliefs.value("excuseAccepted") == Some(&true.into()), || "agent never saw acceptance".into())?;
        check(exps.len() == run.cycles as usize - 1, || format!("rejectExps {exps:?}"))?;
        for (i, r) in run.records.iter().enumerate() {
            let Some(exp) = r.post_state.get("rejectExp").and_then(BeliefValue::as_str).filter(|e| !e.is_empty()) else {
                continue;
            };
            let next = after.get(i + 1).ok_or_else(|| format!("no prompt after rejection {i}"))?;
            check(next.contains(&format!("• {exp}")), || format!("prompt {} lacks {exp:?}", i + 1))?;
        }
        Ok(format!("accepted after {} cycles, {} rejections fed back, no calls after", run.cycles, exps.len()))
    })
}

fn property<T: std::fmt::Debug>(name: &str, result: Result<(), TestError<T>>) -> Result<(), String> {
    result.map_err(|e| format!("{name}: {e}"))
}

fn scenario_plans() -> Vec<(&'static str, Vec<Plan>)> {
    vec![
        ("porter", porter::porter_plans()),
        ("paranoid", porter::paranoid_agent().plans().to_vec()),
        ("claustrophobe", porter::claustrophobe_agent().plans().to_vec()),
        ("gol", vec![gol::gol_plan(3, 3)]),
        ("excuse", vec![excuse::excuse_plan(Arc::new(StubGenerator))]),
    ]
}

fn scenario_beliefs() -> impl Strategy<Value = BeliefBase> {
    let porter = (any::<bool>(), strategies::token_list()).prop_map(|(locked, reqs)| {
        porter::porter_beliefs()
            .with("door", porter::door(locked))
            .unwrap()
            .with("requests", BeliefValue::list(reqs))
            .unwrap()
    });
    let gol = (0usize..9, prop::collection::vec(any::<bool>(), 9)).prop_map(|(i, cells)| {
        BeliefBase::new()
            .with("index", i)
            .unwrap()
            .with("activityArray", BeliefValue::list(cells))
            .unwrap()
    });
    let excuse = (any::<bool>(), prop::collection::vec("[a-z ]{1,12}", 0..3)).prop_map(|(done, exps)| {
        excuse::excuse_beliefs(&ExcuseConfig::default())
            .with("excuseAccepted", done)
            .unwrap()
            .with("rejectExps", BeliefValue::list(exps))
            .unwrap()
    });
    prop_oneof![porter, gol, excuse, strategies::belief_base()]
}

// 6. core properties
fn core_properties() -> Outcome {
    timed(Duration::from_secs(10), || {
        let cases = 1000;
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        let base = (strategies::belief_base(), strategies::belief_base());

        let r = runner.run(&base, |(b, p)| {
            let once = default_revise(&b, &p);
            prop_assert_eq!(default_revise(&once, &p).to_canonical_json(), once.to_canonical_json());
            Ok(())
        });
        property("idempotence", r)?;

        let r = runner.run(&(strategies::plain_base(), strategies::plain_base()), |(b, p)| {
            let out = default_revise(&b, &p);
            for belief in &p {
                prop_assert_eq!(out.value(belief.key()), Some(belief.value()));
            }
            Ok(())
        });
        property("percept dominance", r)?;

        let r = runner.run(&base, |(b, p)| {
            let out = default_revise(&b, &p);
            let mut expected: Vec<&str> = b.keys().chain(p.keys()).collect();
            expected.sort_unstable();
            expected.dedup();
            prop_assert_eq!(out.keys().collect::<Vec<_>>(), expected);
            Ok(())
        });
        property("key preservation", r)?;

        let plans_strategy = prop::collection::vec(
            (any::<bool>(), prop::collection::vec("[a-z]{1,4}", 0..3)),
            0..6,
        );
        let r = runner.run(&(plans_strategy, strategies::belief_base()), |(specs, beliefs)| {
            let plans: Vec<Plan> = specs
                .iter()
                .map(|(active, body)| {
                    let active = *active;
                    let body: Vec<Action> = body.iter().map(|t| Action::token(t.as_str())).collect();
                    Plan::new(move |_| Ok(active), move |_| Ok(body.clone()))
                })
                .collect();
            let expected: Vec<Action> = specs
                .iter()
                .filter(|(active, _)| *active)
                .flat_map(|(_, body)| body.iter().map(|t| Action::token(t.as_str())))
                .collect();
            prop_assert_eq!(deliberate(&beliefs, &plans).actions, expected);
            Ok(())
        });
        property("deliberation order", r)?;

        let all_plans = scenario_plans();
        let r = runner.run(&scenario_beliefs(), |beliefs| {
            let before = beliefs.to_canonical_json();
            for (_, plans) in &all_plans {
                for plan in plans {
                    let _ = plan.is_active(&beliefs);
                }
                let _ = deliberate(&beliefs, plans);
                prop_assert_eq!(&beliefs.to_canonical_json(), &before);
            }
            Ok(())
        });
        property("deliberation purity", r)?;

        let r = runner.run(&strategies::action_message(), |m| {
            let text = encode_action_message(&m);
            prop_assert_eq!(decode_action_message(&text).unwrap(), m);
            Ok(())
        });
        property("action message round-trip", r)?;

        let r = runner.run(&strategies::belief_base(), |percepts| {
            let m = BeliefUpdateMessage { percepts };
            let text = encode_belief_update(&m);
            let back = decode_belief_update(&text).unwrap();
            prop_assert_eq!(encode_belief_update(&back), text);
            prop_assert_eq!(back, m);
            Ok(())
        });
        property("belief update round-trip", r)?;

        Ok(format!("7 properties x {cases} cases"))
    })
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("1 porter single agent", porter_single),
        ("2 gol oracle equivalence", gol_oracle),
        ("3 gol known patterns", gol_patterns),
        ("4 distributed porter mas", distributed_porter),
        ("5 excuse stub", excuse_stub),
        ("6 core properties", core_properties),
    ];
    // keep panics from individual criteria on one line each
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 6 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
