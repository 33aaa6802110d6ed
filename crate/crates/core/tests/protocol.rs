use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::thread;

use escaperoom_core::env::{Action, EnvConfig, GridWorld};
use escaperoom_core::graph::Template;
use escaperoom_core::rng::{Rng, Stream};
use escaperoom_core::server::{serve_stdio, Server, Session, SessionDefaults};
use serde_json::Value;

const GOLDEN: &str = include_str!("golden/protocol_v1.transcript");

fn golden_pairs() -> (Vec<&'static str>, Vec<&'static str>) {
    let mut requests = Vec::new();
    let mut responses = Vec::new();
    for line in GOLDEN.lines() {
        if let Some(r) = line.strip_prefix("> ") {
            requests.push(r);
        } else if let Some(r) = line.strip_prefix("< ") {
            responses.push(r);
        } else {
            panic!("bad transcript line: {line}");
        }
    }
    assert_eq!(requests.len(), responses.len());
    (requests, responses)
}

#[test]
fn golden_transcript_over_stdio() {
    let (requests, responses) = golden_pairs();
    let input = requests.join("\n") + "\n";
    let mut out = Vec::new();
    serve_stdio(input.as_bytes(), &mut out, SessionDefaults::default(), None).unwrap();
    let out = String::from_utf8(out).unwrap();
    let got: Vec<&str> = out.lines().collect();
    assert_eq!(got.len(), responses.len());
    for (i, (g, want)) in got.iter().zip(&responses).enumerate() {
        assert_eq!(g, want, "response {} differs", i + 1);
    }
}

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> Self {
        let writer = TcpStream::connect(addr).unwrap();
        let reader = BufReader::new(writer.try_clone().unwrap());
        Client { reader, writer }
    }

    fn call(&mut self, request: &str) -> String {
        writeln!(self.writer, "{request}").unwrap();
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        line.trim_end_matches('\n').to_string()
    }
}

fn with_server(f: impl FnOnce(std::net::SocketAddr)) {
    let server = Server::bind("127.0.0.1:0", SessionDefaults::default(), None).unwrap();
    let addr = server.local_addr().unwrap();
    let handle = server.handle().unwrap();
    let join = thread::spawn(move || server.run().unwrap());
    f(addr);
    handle.shutdown();
    join.join().unwrap();
}

#[test]
fn golden_transcript_over_tcp() {
    let (requests, responses) = golden_pairs();
    with_server(|addr| {
        let mut c = Client::connect(addr);
        for (req, want) in requests.iter().zip(&responses) {
            assert_eq!(&c.call(req), want, "request {req}");
        }
    });
}

#[test]
fn session_survives_garbage_over_tcp() {
    with_server(|addr| {
        let mut c = Client::connect(addr);
        assert_eq!(c.call("{{{"), r#"{"ok":false,"error":"parse"}"#);
        assert!(c.call(r#"{"cmd":"hello"}"#).starts_with(r#"{"ok":true"#));
    });
}

#[test]
fn sessions_are_isolated() {
    let script_a: Vec<String> =
        std::iter::once(r#"{"cmd":"reset","template":"b","seed":1}"#.to_string())
            .chain((0..40).map(|i| format!(r#"{{"cmd":"step","action":{}}}"#, i % 3)))
            .collect();
    let script_b: Vec<String> =
        std::iter::once(r#"{"cmd":"reset","template":"e","seed":2}"#.to_string())
            .chain((0..40).map(|i| format!(r#"{{"cmd":"step","action":{}}}"#, (i * 7) % 5)))
            .collect();
    let serial = |script: &[String]| {
        let mut s = Session::new(SessionDefaults::default(), None);
        script.iter().map(|r| s.handle(r)).collect::<Vec<_>>()
    };
    let (want_a, want_b) = (serial(&script_a), serial(&script_b));
    with_server(|addr| {
        let mut a = Client::connect(addr);
        let mut b = Client::connect(addr);
        let (mut got_a, mut got_b) = (Vec::new(), Vec::new());
        for (ra, rb) in script_a.iter().zip(&script_b) {
            got_a.push(a.call(ra));
            got_b.push(b.call(rb));
        }
        assert_eq!(got_a, want_a);
        assert_eq!(got_b, want_b);
    });
}

#[test]
fn wire_stream_matches_in_process() {
    for (t, seed) in [(Template::A, 3u64), (Template::D, 5), (Template::G, 8)] {
        let mut world = GridWorld::generate(EnvConfig::for_template(t, seed)).unwrap();
        let mut session = Session::new(SessionDefaults::default(), None);
        let reset = session.handle(&format!(
            r#"{{"cmd":"reset","template":"{t}","seed":{seed}}}"#
        ));
        let reset: Value = serde_json::from_str(&reset).unwrap();
        assert_eq!(reset["obs"], serde_json::to_value(world.observe()).unwrap());
        let mut rng = Rng::new(seed, Stream::Policy);
        while !world.is_over() {
            let action = Action::ALL[rng.below(5)];
            let local = world.step(action).unwrap();
            let raw = session.handle(&format!(r#"{{"cmd":"step","action":{}}}"#, action.code()));
            let wire: Value = serde_json::from_str(&raw).unwrap();
            assert_eq!(
                wire["reward"].as_f64().unwrap().to_bits(),
                local.reward.to_bits()
            );
            assert_eq!(wire["done"], local.done);
            assert_eq!(wire["truncated"], local.truncated);
            let events = format!(
                r#""events":{}"#,
                serde_json::to_string(&local.events).unwrap()
            );
            assert!(raw.contains(&events), "{raw}");
            assert_eq!(
                wire["obs"],
                serde_json::to_value(local.observation).unwrap()
            );
        }
    }
}
