use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Stdio};
use std::thread;

use d2d_core::agents::RandomPolicy;
use d2d_core::rng::{substream, Stream};
use d2d_core::ScenarioConfig;
use d2dsim::format::to_rounded_value;
use d2dsim::protocol::{serve_listener, Session};
use d2dsim::runner::run_policy;
use rand::Rng;
use serde_json::{json, Value};

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(config: ScenarioConfig) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        thread::spawn(move || serve_listener(config, listener));
        let writer = TcpStream::connect(addr).unwrap();
        Self {
            reader: BufReader::new(writer.try_clone().unwrap()),
            writer,
        }
    }

    fn request(&mut self, message: Value) -> Value {
        writeln!(self.writer, "{message}").unwrap();
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap()
    }
}

#[test]
fn spaces_describe_action_and_observation_sizes() {
    let mut s = Session::new(ScenarioConfig::default()).unwrap();
    let r: Value = serde_json::from_str(&s.handle_line(r#"{"type":"spaces"}"#)).unwrap();
    assert_eq!(r["type"], "spaces");
    assert_eq!(r["action_size"], 25 * 21);
    assert_eq!(r["observation_len"], 5 + 2 * 25 + 25);
    assert_eq!(r["num_pairs"], 10);
    assert_eq!(r["observation_low"].as_array().unwrap().len(), 80);
}

#[test]
fn seeded_resets_repeat() {
    let mut s = Session::new(ScenarioConfig::default()).unwrap();
    let a = s.handle_line(r#"{"type":"reset","seed":42}"#);
    s.handle_line(r#"{"type":"step","actions":{"0":1}}"#);
    let b = s.handle_line(r#"{"type":"reset","seed":42}"#);
    assert_eq!(a, b);
    let c = s.handle_line(r#"{"type":"reset","seed":43}"#);
    assert_ne!(a, c);
}

#[test]
fn sessions_replay_byte_identically() {
    let script = [
        r#"{"type":"spaces"}"#,
        r#"{"type":"step","actions":{}}"#,
        r#"{"type":"reset","seed":7}"#,
        r#"{"type":"step","actions":{"0":12,"3":400}}"#,
        r#"{"type":"step","actions":{"9":524}}"#,
        r#"{"type":"reset"}"#,
        r#"{"type":"step","actions":{"1":0}}"#,
    ];
    let play = || {
        let mut s = Session::new(ScenarioConfig::default()).unwrap();
        script.iter().map(|l| s.handle_line(l)).collect::<Vec<_>>()
    };
    assert_eq!(play(), play());
}

fn random_rollout_over_tcp(config: &ScenarioConfig, episodes: usize, seed: u64) -> Vec<Value> {
    let mut client = Client::connect(config.clone());
    let size = client.request(json!({"type": "spaces"}))["action_size"]
        .as_u64()
        .unwrap() as usize;
    let mut rng = substream(seed, Stream::Policy);
    let mut metrics = Vec::new();
    for e in 0..episodes {
        let reset = if e == 0 {
            json!({"type": "reset", "seed": seed})
        } else {
            json!({"type": "reset"})
        };
        assert_eq!(client.request(reset)["type"], "reset");
        loop {
            let actions: serde_json::Map<String, Value> = (0..config.num_due_pairs)
                .map(|n| (n.to_string(), json!(rng.gen_range(0..size))))
                .collect();
            let reply = client.request(json!({"type": "step", "actions": actions}));
            assert_eq!(reply["type"], "step", "{reply}");
            metrics.push(reply["info"].clone());
            if reply["done"] == true {
                break;
            }
        }
    }
    assert_eq!(client.request(json!({"type": "close"}))["type"], "closed");
    metrics
}

#[test]
fn loopback_matches_in_process_run() {
    let config = ScenarioConfig::default().with_due_pairs(6);
    let (episodes, seed) = (5, 31);
    let remote = random_rollout_over_tcp(&config, episodes, seed);
    let mut local = Vec::new();
    run_policy(&config, &mut RandomPolicy, episodes, seed, &mut |m| {
        local.push(to_rounded_value(m).unwrap());
        Ok(())
    })
    .unwrap();
    assert_eq!(remote.len(), episodes * config.episode_length_steps);
    assert_eq!(remote, local);
}

#[test]
fn concurrent_sessions_are_independent() {
    let config = ScenarioConfig::default().with_due_pairs(3);
    let handles: Vec<_> = (0..4)
        .map(|i| {
            let config = config.clone();
            thread::spawn(move || random_rollout_over_tcp(&config, 2, i % 2))
        })
        .collect();
    let results: Vec<Vec<Value>> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_eq!(results[0], results[2]);
    assert_eq!(results[1], results[3]);
    assert_ne!(results[0], results[1]);
}

#[test]
fn stdio_server_binary() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_d2dsim"))
        .arg("serve")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let input = "{\"type\":\"step\",\"actions\":{}}\n{\"type\":\"reset\",\"seed\":3}\n{\"type\":\"bogus\"}\n{\"type\":\"close\"}\n";
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    let replies: Vec<Value> = String::from_utf8(output.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(replies.len(), 4);
    assert_eq!(replies[0]["code"], "reset_required");
    assert_eq!(replies[1]["type"], "reset");
    assert_eq!(replies[2]["code"], "unknown_type");
    assert_eq!(replies[3]["type"], "closed");
}
