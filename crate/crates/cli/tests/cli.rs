use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", &format!("{name}.json")].iter().collect();
    p.to_string_lossy().into_owned()
}

fn entgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entgame"))
        .args(args)
        .env_remove("ENTGAME_TOL")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = entgame(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn kl_divergence_on_two_state_fixture() {
    let r = report(&["divergence", "--kind", "kl", &fixture("two_state")]);
    assert!((f(&r["results"]["value"]) - 0.287682).abs() < 1e-6);
    assert_eq!(r["results"]["m"]["label"], "P1");
    assert_eq!(r["inputs"]["divergence"], "kl");
    assert_eq!(r["inputs"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reported_numbers_round_trip() {
    use entgame::{divergence, Distribution, DivergenceSpec, Generator};
    let r = report(&["divergence", "--kind", "kl", &fixture("two_state")]);
    let pi = Distribution::uniform(2).unwrap();
    let m = Generator::from_rows(&[vec![-2.0, 2.0], vec![2.0, -2.0]], 1e-12).unwrap();
    let l = Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]], 1e-12).unwrap();
    let exact = divergence(&DivergenceSpec::Kl, &m, &l, &pi).unwrap().value();
    assert_eq!(f(&r["results"]["value"]).to_bits(), exact.to_bits());
}

#[test]
fn solve_on_bisection_pair() {
    let r = report(&["solve", &fixture("bisection_pair"), "--iters", "1000"]);
    let res = &r["results"];
    assert!(f(&res["gap"]).abs() <= 1e-12);
    for key in ["weights", "weights_last"] {
        assert!(res[key].as_array().unwrap().iter().all(|w| (f(w) - 0.5).abs() < 1e-15));
    }
    assert_eq!(res["iterations"], 1000);
    let trace = r["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 1000);
    assert!(trace.iter().all(|row| f(&row["gap"]).abs() <= 1e-12));
    assert_eq!(r["command"]["parameters"]["eta"], "auto");
}

#[test]
fn pure_nash_fixtures() {
    let r = report(&["pure-nash", &fixture("no_pure")]);
    assert_eq!(r["results"]["exists"], false);
    assert!(r["results"]["saddle"].is_null());

    let r = report(&["pure-nash", &fixture("unique_pure")]);
    assert_eq!(r["results"]["exists"], true);
    assert_eq!(r["results"]["saddle"]["index"], 0);

    let r = report(&["pure-nash", &fixture("bisection_pair"), "--iters", "100"]);
    assert_eq!(r["results"]["maximizers"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_and_solver_documents_share_shape() {
    let solve = report(&["solve", &fixture("no_pure"), "--iters", "200", "--trace-every", "0"]);
    let oracle = report(&["oracle", "dual", &fixture("no_pure"), "--resolution", "0.01"]);
    for key in ["weights", "centroid", "value", "chebyshev_radius", "gap", "divergences", "slackness"] {
        assert!(solve["results"].get(key).is_some() && oracle["results"].get(key).is_some(), "{key}");
    }
    assert!((f(&solve["results"]["value"]) - f(&oracle["results"]["value"])).abs() < 1e-9);

    let edge = report(&["oracle", "edge", &fixture("bisection_pair_tv"), "--resolution", "1e-4"]);
    let centroid = report(&["centroid", &fixture("bisection_pair_tv")]);
    for key in ["weights", "centroid", "divergences", "flat_interval"] {
        assert!(edge["results"].get(key).is_some() && centroid["results"].get(key).is_some(), "{key}");
    }

    let pure = report(&["oracle", "pure", &fixture("unique_pure")]);
    assert_eq!(f(&pure["results"]["maximin"]), 0.25);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["solve", "--random", "3x3", "--seed", "11", "--divergence", "alpha:2", "--iters", "300"];
    let a = entgame(&args);
    let b = entgame(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = entgame(&["solve", "--random", "3x3", "--seed", "12", "--divergence", "alpha:2", "--iters", "300"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn every_fixture_validates() {
    for name in [
        "two_state",
        "bisection_pair",
        "bisection_pair_tv",
        "unique_pure",
        "no_pure",
        "dominant_middle",
        "uniformizable",
        "jump_class",
    ] {
        let r = report(&["validate", &fixture(name)]);
        assert_eq!(r["results"]["valid"], true, "{name}");
        assert!(r["warnings"].as_array().unwrap().is_empty(), "{name}");
    }
    let r = report(&["validate", &fixture("unique_pure")]);
    let gens = r["results"]["generators"].as_array().unwrap();
    assert_eq!(gens[0]["reversible"], false);
    assert_eq!(gens[1]["reversible"], true);
}

#[test]
fn transforms() {
    let r = report(&["reversiblize", &fixture("two_state"), "--p", "1", "--index", "1"]);
    assert_eq!(r["results"]["generators"][0]["reversiblization"], serde_json::json!([[-2.0, 2.0], [2.0, -2.0]]));
    let r = report(&["dual", &fixture("two_state"), "--index", "1"]);
    assert_eq!(r["results"]["generators"][0]["dual"], serde_json::json!([[-3.0, 3.0], [1.0, -1.0]]));
    let r = report(&["project", &fixture("bisection_pair_tv")]);
    assert!(r["results"]["generators"][0]["flat_interval"].is_object());
    let r = report(&["centroid", &fixture("no_pure"), "--weights", "e:0", "--method", "generic"]);
    assert_eq!(r["results"]["weights"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn probe_rate_tables() {
    let r = report(&[
        "probe-rate",
        &fixture("jump_class"),
        "--t-list",
        "100,1000",
        "--ref-factor",
        "10",
        "--trace-every",
        "100",
    ]);
    assert_eq!(r["results"]["distance"].as_array().unwrap().len(), 2);
    assert_eq!(r["results"]["reference_iters"], 10_000);
    assert_eq!(r["trace"].as_array().unwrap().len(), 10);
    assert!(f(&r["results"]["slope"]) < 0.0);
}

#[test]
fn output_file_and_stdin() {
    let dir = std::env::temp_dir().join(format!("entgame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = entgame(&["validate", &fixture("two_state"), "-o", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"]["name"], "validate");
    std::fs::remove_dir_all(&dir).unwrap();

    let mut child = Command::new(env!("CARGO_BIN_EXE_entgame"))
        .args(["divergence", "-", "--kind", "tv-half", "--compact"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    std::io::Write::write_all(
        child.stdin.as_mut().unwrap(),
        std::fs::read(fixture("two_state")).unwrap().as_slice(),
    )
    .unwrap();
    let out = child.wait_with_output().unwrap();
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((f(&doc["results"]["value"]) - 0.5).abs() < 1e-15);
    assert_eq!(out.stdout.iter().filter(|&&b| b == b'\n').count(), 1);
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice::<Value>(&out.stderr).unwrap()["error"].clone()
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("entgame-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };

    let bad_json = write("bad.json", "{\"pi\": [0.5, 0.5], ");
    let out = entgame(&["validate", &bad_json]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "parse");

    let bad_rate = write("rate.json", r#"{"pi": [0.5, 0.5], "generators": [[[null, 1], [true, null]]]}"#);
    let out = entgame(&["validate", &bad_rate]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["path"], "generators[0][1][0]");

    let no_div = write("nodiv.json", r#"{"pi": [0.5, 0.5], "generators": [[[null, 1], [2, null]]]}"#);
    let out = entgame(&["solve", &no_div]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["path"], "divergence");

    let out = entgame(&["oracle", "dual", &fixture("uniformizable")]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["kind"], "domain");

    let out = entgame(&["pure-nash", &fixture("bisection_pair_tv")]);
    assert_eq!(out.status.code(), Some(3));

    let out = entgame(&["solve", &fixture("no_pure"), "--divergence", "kl", "--w0", "e:0", "--iters", "5", "--epsilon", "1e-12"]);
    assert_eq!(out.status.code(), Some(4));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["results"]["converged"], false);
    assert_eq!(doc["warnings"].as_array().unwrap().len(), 1);

    let out = entgame(&["solve", &fixture("two_state"), "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let unknown = write("unknown.json", r#"{"pi": [0.5, 0.5], "generators": [[[null, 1], [2, null]]], "options": {"iter": 3}}"#);
    let r = report(&["validate", &unknown]);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_entgame"))
        .args(["validate", &fixture("two_state")])
        .env("ENTGAME_TOL", "1e-6")
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(f(&doc["command"]["parameters"]["tol"]), 1e-6);

    // A row-sum error of 1e-9 is rejected at the default tolerance and accepted at a looser one.
    let dir = std::env::temp_dir().join(format!("entgame-tol-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("rowsum.json");
    std::fs::write(&p, r#"{"pi": [0.5, 0.5], "generators": [[[-1.000000001, 1], [2, -2]]]}"#).unwrap();
    let strict = entgame(&["validate", p.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(2));
    let loose = Command::new(env!("CARGO_BIN_EXE_entgame"))
        .args(["validate", p.to_str().unwrap()])
        .env("ENTGAME_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(loose.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_lists_every_command() {
    let out = entgame(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in [
        "validate",
        "dual",
        "reversiblize",
        "divergence",
        "project",
        "centroid",
        "solve",
        "pure-nash",
        "oracle",
        "probe-rate",
    ] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
