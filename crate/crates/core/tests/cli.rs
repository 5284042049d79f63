use std::process::{Command, Output};

use serde_json::Value;

fn qseries(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qseries"))
        .args(args)
        .env_remove("QSERIES_DIGITS")
        .output()
        .expect("binary runs")
}

fn sh(line: &str) -> Output {
    qseries(&line.split_whitespace().collect::<Vec<_>>())
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn list_shows_every_identity_with_domain() {
    let out = qseries(&["list"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let ids: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with(' '))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    assert_eq!(ids.len(), 24);
    assert!(ids.contains(&"eq-1.1") && ids.contains(&"thm-5.3"));
    assert_eq!(text.matches("domain:").count(), 24);
}

#[test]
fn verify_campaign_passes_with_json_report() {
    let out = sh("verify --identity eq-1.1 --points 10 --seed 1 --digits 40 --tol 1e-25 --report json");
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let r = &v["results"][0];
    assert_eq!(r["id"], "eq-1.1");
    assert_eq!(r["aggregate"]["passed"], 10);
    assert_eq!(r["points"].as_array().unwrap().len(), 10);
    // numbers travel as decimal strings
    assert!(r["points"][0]["lhs"].is_string());
    assert!(r["points"][0]["relErr"].is_string());
}

#[test]
fn digits_come_from_environment_unless_flag_given() {
    let run = |extra: &[&str]| {
        let mut args = vec!["verify", "--identity", "eq-1.1", "--points", "1"];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_qseries"))
            .args(&args)
            .env("QSERIES_DIGITS", "30")
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        json(&out)["config"]["digits"].as_u64().unwrap()
    };
    assert_eq!(run(&[]), 30);
    assert_eq!(run(&["--digits", "50"]), 50);

    let bad = Command::new(env!("CARGO_BIN_EXE_qseries"))
        .args(["verify", "--identity", "eq-1.1"])
        .env("QSERIES_DIGITS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn explicit_point_from_flags() {
    let out = sh("verify --identity eq-1.1 --q 0.5 --set a=2 --set b=0.3 --set z=0.4");
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let p = &v["results"][0]["points"][0];
    assert_eq!(p["params"]["q"], "0.5");
    assert_eq!(p["params"]["z"], "0.4");
    assert_eq!(v["results"][0]["points"].as_array().unwrap().len(), 1);
}

#[test]
fn out_of_domain_point_fails_without_aborting() {
    let out = sh("verify --identity eq-1.1 --q 0.5 --set a=2 --set b=0.3 --set z=1.5");
    assert_eq!(code(&out), 1);
    let v = json(&out);
    let p = &v["results"][0]["points"][0];
    assert_eq!(p["pass"], false);
    assert!(p["error"].as_str().unwrap().contains("|z| < 1"));
}

#[test]
fn bad_expression_prints_grammar() {
    let out = qseries(&["verify", "--identity", "eq-1.1", "--q", "0.5", "--set", "z=bad"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("grammar"));
}

#[test]
fn unknown_identity_is_a_usage_error() {
    assert_eq!(code(&qseries(&["verify", "--identity", "no-such-id"])), 2);
    assert_eq!(code(&qseries(&["frobnicate"])), 2);
}

#[test]
fn config_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.json");
    std::fs::write(
        &cfg,
        r#"{"identities": ["eq-3.2"], "pointsPerIdentity": 3, "seed": 4, "digits": 30, "tolerance": 1e-20}"#,
    )
    .unwrap();
    let report = dir.path().join("report.json");
    let out = qseries(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--points",
        "2",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["config"]["pointsPerIdentity"], 2);
    assert_eq!(v["config"]["digits"], 30);
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["results"][0]["aggregate"]["passed"], 2);

    std::fs::write(&cfg, r#"{"identities": ["no-such-id"]}"#).unwrap();
    assert_eq!(code(&qseries(&["verify", "--config", cfg.to_str().unwrap()])), 2);
    std::fs::write(&cfg, r#"{"identity": "eq-1.1"}"#).unwrap();
    assert_eq!(code(&qseries(&["verify", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn text_report() {
    let out = sh("verify --identity eq-3.2 --points 2 --report text");
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("eq-3.2") && text.contains("PASS  2/2"));
}

#[test]
fn eval_one_side() {
    let point = ["--q", "0.5", "--set", "a=2", "--set", "b=0.3", "--set", "z=0.9"];
    let side = |s: &str| {
        let mut args = vec!["eval", "--identity", "eq-1.1", "--side", s, "--digits", "30"];
        args.extend_from_slice(&point);
        let out = qseries(&args);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        assert!(text.lines().nth(1).unwrap().starts_with("err "));
        text.lines().next().unwrap().parse::<f64>().unwrap()
    };
    let (l, r) = (side("lhs"), side("rhs"));
    assert!(((l - r) / r).abs() < 1e-14);
    assert_eq!(
        code(&qseries(&["eval", "--identity", "eq-1.1", "--side", "middle"])),
        2
    );
}
