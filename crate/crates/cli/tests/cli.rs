use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn fcmj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcmj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn eval_figure_one() {
    let out = fcmj(&["eval", &data("figure1.json"), r#"{"1":4,"2":6}"#]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("total = 5/3 (≈1.6667)"), "{}", stdout(&out));

    let from_file = fcmj(&["eval", &data("figure1.json"), &data("schedule-4-6.json")]);
    assert_eq!(stdout(&from_file), stdout(&out));
}

#[test]
fn eval_json_matches_text() {
    let out = fcmj(&["--json", "eval", &data("figure1.json"), r#"{"1":4,"2":6}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["total"], "5/3");
    assert_eq!(v["per_module"]["0"], "1");
    assert_eq!(v["per_component"]["1"], "1/2");
}

#[test]
fn eval_rejects_cycle_limit_violation() {
    let out = fcmj(&["eval", &data("figure1.json"), r#"{"1":6,"2":6}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("component 1"), "{}", stderr(&out));
}

#[test]
fn malformed_input_exits_2() {
    let out = fcmj(&["eval", &data("malformed.json"), r#"{"1":1}"#]);
    assert_eq!(out.status.code(), Some(2));
    let out = fcmj(&["eval", &data("figure1.json"), r#"{"1":"#]);
    assert_eq!(out.status.code(), Some(2));
    let out = fcmj(&["solve", &data("does-not-exist.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_examples() {
    let out = fcmj(&["solve", &data("fcmj15.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("(q1,q2)=(15,10), value 3151/15"), "{}", stdout(&out));

    let out = fcmj(&["solve", &data("figure1.json")]);
    assert!(stdout(&out).contains("(q1,q2)=(5,5), value 6/5"), "{}", stdout(&out));

    let out = fcmj(&["solve", &data("single.json")]);
    assert!(stdout(&out).contains("(qc)=(4), value 7/4"), "{}", stdout(&out));

    let out = fcmj(&["--json", "solve", &data("fcmj15.json")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["optimal_value"], "3151/15");
    assert_eq!(v["optimal_schedule"]["2"], 10);
}

#[test]
fn solve_budget_exhaustion_exits_4() {
    let out = fcmj(&["--budget", "2", "solve", &data("figure1.json")]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("best incumbent"), "{}", stderr(&out));
}

#[test]
fn trigger_mode_override() {
    let s = r#"{"c1":2,"c2":3}"#;
    let desc = fcmj(&["eval", &data("two-level.json"), s]);
    assert!(stdout(&desc).contains("module r: 20/3"), "{}", stdout(&desc));
    let direct = fcmj(&["--trigger-mode", "direct-children", "eval", &data("two-level.json"), s]);
    assert!(stdout(&direct).contains("module r: 0"), "{}", stdout(&direct));
    assert!(stderr(&direct).contains("empty trigger set"));
}

#[test]
fn subset_cap_flag() {
    let out = fcmj(&["--subset-cap", "1", "eval", &data("figure1.json"), r#"{"1":4,"2":6}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("subset cap"));
}

#[test]
fn simulate_examples() {
    let out = fcmj(&["simulate", &data("figure1.json"), r#"{"1":4,"2":6}"#, "--horizon", "12"]);
    assert!(stdout(&out).contains("= 5/3"), "{}", stdout(&out));

    let out = fcmj(&["simulate", &data("figure1.json"), r#"{"1":1,"2":1}"#, "--horizon", "1"]);
    assert!(stdout(&out).contains("horizon 1 = 6 "), "{}", stdout(&out));

    let out = fcmj(&["simulate", &data("figure1.json"), r#"{"1":4,"2":6}"#]);
    assert!(stdout(&out).contains("horizon 12 = 5/3"), "{}", stdout(&out));

    let out = fcmj(&["--json", "simulate", &data("figure1.json"), r#"{"1":4,"2":6}"#]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["average_cost"], "5/3");
    assert_eq!(v["horizon"], 12);
}

#[test]
fn factor_examples() {
    assert_eq!(stdout(&fcmj(&["factor", "15"])).trim(), "15 = 3 · 5");
    assert_eq!(stdout(&fcmj(&["factor", "97"])).trim(), "97 is prime");
    assert_eq!(stdout(&fcmj(&["factor", "1"])).trim(), "1 = (empty product)");
    assert_eq!(stdout(&fcmj(&["factor", "360"])).trim(), "360 = 2 · 2 · 2 · 3 · 3 · 5");
    for bad in ["abc", "0", "-4", "1.5"] {
        assert_eq!(fcmj(&["factor", bad]).status.code(), Some(2), "{bad}");
    }
}

#[test]
fn factor_trace_dumps_instances() {
    let out = fcmj(&["--json", "factor", "15", "--trace"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["factors"], serde_json::json!([3, 5]));
    let trace = &v["trace"];
    assert_eq!(trace["kind"], "split");
    assert_eq!(trace["divisor"], 5);
    assert_eq!(trace["solved"], serde_json::json!([15, 10]));
    assert_eq!(trace["instance"]["nodes"][1]["setup_cost"], "3149");
    assert_eq!(trace["children"][0]["kind"], "prime");

    let text = fcmj(&["factor", "15", "--trace"]);
    assert!(stdout(&text).starts_with("15 = 3 · 5\n{"));
}

#[test]
fn verify_examples() {
    let out = fcmj(&["verify", "15"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("step 1: ok"), "{text}");
    assert!(text.contains("lemma: ok"), "{text}");
    assert!(text.contains("gcd(10, 15) = 5"), "{text}");

    let out = fcmj(&["verify", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("step 1: ok"), "{text}");
    assert!(text.contains("lemma: not applicable, M is prime"), "{text}");
    assert!(text.contains("6/35"), "{text}");

    assert_eq!(fcmj(&["verify", "3"]).status.code(), Some(2));
    assert_eq!(fcmj(&["verify", "20", "--cap", "10"]).status.code(), Some(2));

    let out = fcmj(&["--json", "verify", "15"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_ok"], true);
    assert_eq!(v["optimal_v"], "1/15");
    assert_eq!(v["divisor"], 5);
}
