use std::net::TcpListener;
use std::thread;

use agentloop::distributed::{
    client_loop, Channel, ChannelError, ClientExit, LoopbackChannel, ProtocolWarning, RemoteTurn,
    ServeEnd, Server, SharedChannel, SharedRegistry, WsChannel,
};
use agentloop::scenarios::porter::{self, door_locked, CLAUSTROPHOBE};
use agentloop::{Action, Environment, EnvError, Runner, TraceErrorKind, TraceRecord};

fn server(mode: RemoteTurn) -> (Server, LoopbackChannel) {
    let (server_end, client_end) = LoopbackChannel::pair();
    let channel = SharedChannel::new(server_end);
    let registry = SharedRegistry::new();
    let env = porter::porter_mas_server_environment(channel.clone(), registry.clone(), mode).unwrap();
    (Server::new(env, registry, channel).unwrap(), client_end)
}

fn ids(records: &[TraceRecord]) -> Vec<&str> {
    records.iter().map(|r| r.agent_id.as_str()).collect()
}

#[test]
fn lockstep_cycle_shape() {
    let (mut s, mut client) = server(RemoteTurn::Lockstep);
    let first = s.handle_message(r#"{"actions":[[]],"agentId":"claustrophobe"}"#).unwrap().unwrap();
    assert_eq!(ids(&first), ["paranoid"]);
    assert!(s.environment().is_suspended());
    assert_eq!(client.recv().unwrap(), r#"{"door":{"locked":true},"executions":[],"requests":[]}"#);
    let second = s.handle_message(r#"{"actions":[["unlock"]],"agentId":"claustrophobe"}"#).unwrap().unwrap();
    assert_eq!(ids(&second), ["claustrophobe", "porter", "paranoid"]);
    assert_eq!(second[0].actions, vec![Action::token("unlock")]);
    assert_eq!(second[1].actions, vec![Action::token("unlock")]);
    assert_eq!(door_locked(&second[1].post_state), Some(false));
}

#[test]
fn immediate_mode_answers_with_previous_request() {
    let (mut s, mut client) = server(RemoteTurn::Immediate);
    let first = s.handle_message(r#"{"actions":[[]],"agentId":"claustrophobe"}"#).unwrap().unwrap();
    assert_eq!(ids(&first), ["paranoid", "claustrophobe", "porter"]);
    assert!(first.iter().all(|r| r.actions.is_empty()));
    client.recv().unwrap();
    let second = s.handle_message(r#"{"actions":[["unlock"]],"agentId":"claustrophobe"}"#).unwrap().unwrap();
    assert_eq!(ids(&second), ["paranoid", "claustrophobe", "porter"]);
    assert_eq!(second[1].actions, vec![Action::token("unlock")]);
}

#[test]
fn unknown_and_malformed_messages_still_trigger() {
    let (mut s, _client) = server(RemoteTurn::Immediate);
    assert!(s.handle_message(r#"{"agentId":"ghost","actions":[["lock"]]}"#).unwrap().is_some());
    assert!(s.handle_message(r#"{"agentId":"claustrophobe","actions":"lock"}"#).unwrap().is_some());
    assert!(s.handle_message(r#"{"hello":1}"#).unwrap().is_some());
    assert!(s.handle_message("{").unwrap().is_none());
    assert_eq!(s.cycles(), 3);
    let w = s.warnings();
    assert_eq!(w.len(), 3);
    assert_eq!(w[0], ProtocolWarning::UnknownAgent("ghost".into()));
    assert!(matches!(w[1], ProtocolWarning::MalformedEnvelope { .. }));
    assert!(matches!(w[2], ProtocolWarning::Unparseable { .. }));
}

#[test]
fn dropped_client_leaves_stale_shadow() {
    let (mut s, client) = server(RemoteTurn::Lockstep);
    s.handle_message(r#"{"actions":[[]],"agentId":"claustrophobe"}"#).unwrap();
    s.handle_message(r#"{"actions":[["unlock"]],"agentId":"claustrophobe"}"#).unwrap();
    drop(client);
    // the pending turn completes with the last request, then the next send
    // fails and the shadow keeps repeating it
    let records = s.handle_message(r#"{"actions":[["unlock"]],"agentId":"claustrophobe"}"#).unwrap().unwrap();
    let claus: Vec<_> = records.iter().filter(|r| r.agent_id == CLAUSTROPHOBE).collect();
    assert_eq!(claus.len(), 2);
    let kinds: Vec<_> = claus[1].errors.iter().map(|e| e.kind).collect();
    assert_eq!(kinds, [TraceErrorKind::ChannelClosed, TraceErrorKind::StaleActions]);
    assert_eq!(claus[1].actions, vec![Action::token("unlock")]);
    assert!(!s.environment().is_suspended());
}

#[test]
fn server_requires_message_triggered_runner() {
    let (a, _b) = LoopbackChannel::pair();
    let env = Environment::builder(vec![], Default::default()).build().unwrap();
    let err = Server::new(env, SharedRegistry::new(), SharedChannel::new(a)).unwrap_err();
    assert_eq!(
        err,
        EnvError::WrongRunner { expected: Runner::MessageTriggered }.into()
    );
}

#[test]
fn serve_stops_at_cycle_limit_and_client_sees_close() {
    let (mut s, mut client_end) = server(RemoteTurn::Lockstep);
    let client = thread::spawn(move || client_loop(&mut porter::claustrophobe_agent(), &mut client_end, None));
    let mut n = 0;
    let report = s.serve(Some(7), |r| n += r.len()).unwrap();
    assert_eq!((report.end, report.cycles), (ServeEnd::CycleLimit, 7));
    assert_eq!(n, 1 + 3 * 6);
    drop(s);
    assert!(matches!(client.join().unwrap(), Ok(ClientExit::RemoteClosed { .. })));
}

#[test]
fn websocket_round_trip() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("ws://{}", listener.local_addr().unwrap());
    let client = thread::spawn(move || {
        let mut ch = WsChannel::connect(&url).unwrap();
        client_loop(&mut porter::claustrophobe_agent(), &mut ch, Some(30))
    });
    let channel = SharedChannel::new(WsChannel::accept(&listener).unwrap());
    let registry = SharedRegistry::new();
    let env = porter::porter_mas_server_environment(channel.clone(), registry.clone(), RemoteTurn::Lockstep).unwrap();
    let mut s = Server::new(env, registry, channel).unwrap();
    let mut records = Vec::new();
    let report = s.serve(None, |r| records.extend_from_slice(r)).unwrap();
    assert_eq!(report.end, ServeEnd::PeerClosed);
    assert_eq!(report.cycles, 30);
    assert_eq!(client.join().unwrap(), Ok(ClientExit::BudgetExhausted { sent: 30 }));
    let local = porter::porter_mas_environment().run(30).unwrap();
    let key = |r: &TraceRecord| (r.agent_id.clone(), r.actions.clone());
    let remote: Vec<_> = records.iter().map(key).collect();
    let local: Vec<_> = local.iter().map(key).collect();
    assert_eq!(remote[..], local[..remote.len()]);
}

#[test]
fn websocket_connect_failures_are_transport_errors() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    assert!(matches!(WsChannel::connect(&format!("ws://{addr}")), Err(ChannelError::Transport(_))));
    assert!(matches!(WsChannel::connect("http://example.invalid"), Err(ChannelError::Transport(_))));
}

#[test]
fn websocket_close_is_seen_as_closed() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("ws://{}", listener.local_addr().unwrap());
    let t = thread::spawn(move || {
        let mut ch = WsChannel::connect(&url).unwrap();
        ch.send("hi").unwrap();
        ch.close();
    });
    let mut server = WsChannel::accept(&listener).unwrap();
    assert_eq!(server.recv().unwrap(), "hi");
    assert_eq!(server.recv(), Err(ChannelError::Closed));
    t.join().unwrap();
}
