use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fx(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn xplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xplab"))
        .args(args)
        .env_remove("XPLAB_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs and parses the stdout report, asserting the exit code.
fn report(args: &[&str], expect: i32) -> Value {
    let o = xplab(args);
    assert_eq!(code(&o), expect, "args {args:?}\nstderr: {}", stderr(&o));
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name:?}"))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

#[test]
fn norm_on_the_two_coordinate_example() {
    let r = report(&["norm", "--x", &fx("x.json")], 0);
    let res = &r["result"];
    // p = 4, w = (1, 1/2), x = (1, 2): |x|_4 = 17^(1/4), |x|_{2,w} = sqrt(1 + 1) .
    assert!(close(res["norm_p"].as_f64().unwrap(), 17f64.powf(0.25)));
    assert!(close(res["norm_2w"].as_f64().unwrap(), 2f64.sqrt()));
    assert!(close(res["xp_norm"].as_f64().unwrap(), 17f64.powf(0.25)));
    assert!(close(
        res["ratio"].as_f64().unwrap(),
        2f64.sqrt() / 17f64.powf(0.25)
    ));
    assert_eq!(r["command"], "norm");
    assert_eq!(r["verdict"], true);
    assert!(r.get("wall_time_s").is_none());
}

#[test]
fn blocks_make_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("block.json");
    let o = xplab(&[
        "blocks",
        "make",
        "--space",
        &fx("space.json"),
        "--support",
        "3,4,5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty(), "--out replaces stdout");
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["result"]["E"], serde_json::json!([3, 4, 5]));

    let r = report(&["blocks", "check", "--system", &fx("system.json")], 0);
    assert_eq!(r["result"]["blocks"], 2);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

#[test]
fn blocks_make_rejects_e_outside_support() {
    let o = xplab(&[
        "blocks",
        "make",
        "--space",
        &fx("space.json"),
        "--support",
        "3,4",
        "--E",
        "5",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn project_with_each_operator_kind() {
    let r = report(
        &["project", "--op", &fx("system.json"), "--x", &fx("x8.json")],
        0,
    );
    assert_eq!(r["result"]["coefficients"].as_array().unwrap().len(), 2);
    let r = report(
        &["project", "--op", &fx("gram.json"), "--x", &fx("x4.json")],
        0,
    );
    // x = (1, -1/2, 2, 1/4); the span of e1+e2 and e3-2e4 under w = (1, 1/2, 1/4, 1/8).
    let c = r["result"]["coefficients"].as_array().unwrap();
    assert!(close(c[0].as_f64().unwrap(), (1.0 - 0.5 * 0.25) / 1.25));
    assert!(close(
        c[1].as_f64().unwrap(),
        (2.0 * 0.0625 - 0.5 * 0.015625) / (0.0625 + 4.0 * 0.015625)
    ));
    let r = report(
        &["project", "--op", &fx("matrix.json"), "--x", &fx("x3.json")],
        0,
    );
    assert_eq!(
        r["result"]["px"],
        serde_json::json!([[1, 1.0], [2, 0.5], [3, 0.5]])
    );
}

#[test]
fn space_mismatch_is_a_usage_error() {
    let o = xplab(&["project", "--op", &fx("system.json"), "--x", &fx("x4.json")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("space"), "{}", stderr(&o));
}

#[test]
fn opnorm_both_modes_and_seed_from_env() {
    let r = report(
        &[
            "opnorm",
            "--op",
            &fx("matrix.json"),
            "--budget",
            "64",
            "--seed",
            "3",
        ],
        0,
    );
    assert!(r["result"]["lower"].as_f64().unwrap() >= 1.0 - 1e-9);
    report(
        &[
            "opnorm",
            "--op",
            &fx("system.json"),
            "--mode",
            "2w",
            "--budget",
            "64",
            "--seed",
            "3",
        ],
        0,
    );

    let with_env = Command::new(env!("CARGO_BIN_EXE_xplab"))
        .args(["opnorm", "--op", &fx("matrix.json"), "--budget", "64"])
        .env("XPLAB_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(code(&with_env), 0);
    let a: Value = serde_json::from_slice(&with_env.stdout).unwrap();
    assert_eq!(a["result"], r["result"]);

    assert_eq!(
        code(&xplab(&["opnorm", "--op", &fx("matrix.json")])),
        1,
        "seed is required"
    );
}

#[test]
fn split_generated_instance() {
    let r = report(
        &[
            "split",
            "--x",
            &fx("split_x.json"),
            "--projection",
            &fx("split_system.json"),
            "--constants",
            &fx("split_constants.json"),
            "--N",
            "2",
        ],
        0,
    );
    assert_eq!(r["result"]["premise_met"], true);
    assert_eq!(check(&r, "y + z = x")["pass"], true);
    assert_eq!(check(&r, "r(y) <= alpha")["applicable"], true);
}

#[test]
fn split_names_the_failed_precondition() {
    let o = xplab(&[
        "split",
        "--x",
        &fx("x8.json"),
        "--projection",
        &fx("system.json"),
        "--constants",
        r#"{"delta": 0.99, "c": 1.01, "eps": 0.5}"#,
        "--N",
        "0",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("norm"), "{}", stderr(&o));
}

#[test]
fn generator_output_passes_the_checker() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let gen = [
        "gen",
        "thm13",
        "--space",
        &fx("space_long.json"),
        "--eps",
        "0.5",
        "--delta",
        "1",
        "--c",
        "1",
        "--count",
        "3",
        "--N",
        "2",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(code(&xplab(&gen)), 0);
    let r = report(&["check", "thm13", "--witness", out.to_str().unwrap()], 0);
    assert_eq!(
        r["result"]["verdicts"],
        serde_json::json!([true, true, true])
    );

    report(
        &[
            "check",
            "thm13",
            "--witness",
            &fx("witness.json"),
            "--constants",
            &fx("thm13_constants.json"),
        ],
        0,
    );
    assert_eq!(
        code(&xplab(&[
            "check",
            "thm13",
            "--witness",
            &fx("witness.json")
        ])),
        1
    );
}

#[test]
fn generator_reports_an_exhausted_tail() {
    let o = xplab(&[
        "gen",
        "thm13",
        "--space",
        &fx("space.json"),
        "--eps",
        "0.5",
        "--delta",
        "1",
        "--c",
        "1",
        "--count",
        "2",
        "--N",
        "1",
        "--seed",
        "9",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("infeasible"), "{}", stderr(&o));
}

#[test]
fn failing_criterion_exits_2_with_report() {
    let r = report(
        &[
            "check",
            "prop24",
            "--z",
            &fx("vectors.json"),
            "--samples",
            &fx("samples.json"),
            "--eps",
            "0.1",
            "--beta",
            "0.5",
            "--beta-prime",
            "0.9",
            "--budget",
            "64",
            "--seed",
            "5",
        ],
        2,
    );
    assert_eq!(r["verdict"], false);
    assert_eq!(check(&r, "a: h(Z) >= beta'")["pass"], false);
}

#[test]
fn classify_and_diagnostics_report_without_asserting() {
    let r = report(
        &[
            "classify",
            "kp",
            "--vectors",
            &fx("vectors.json"),
            "--C",
            "2",
            "--budget",
            "64",
            "--seed",
            "1",
        ],
        0,
    );
    assert!(r["result"]["class"].is_string());
    let r = report(
        &[
            "diag",
            "prop21",
            "--vectors",
            &fx("prop21.json"),
            "--projection",
            &fx("system.json"),
            "--K",
            "2",
            "--window",
            "2",
            "--budget",
            "64",
            "--seed",
            "1",
        ],
        0,
    );
    assert_eq!(r["result"]["window"], 2);
    let r = report(
        &[
            "experiment",
            "defect",
            "--vectors",
            &fx("vectors.json"),
            "--alpha",
            "0.5",
            "--samples",
            "32",
            "--seed",
            "1",
        ],
        0,
    );
    let d = r["result"]["worst_defect"].as_f64().unwrap();
    assert!((0.0..=1.0 + 1e-9).contains(&d));
}

#[test]
fn weights_commands() {
    let r = report(&["weights", "gen", "--family", &fx("family.json")], 0);
    let w = r["result"]["weights"].as_array().unwrap();
    assert_eq!(w.len(), 64);
    assert!(close(w[3].as_f64().unwrap(), 0.5));

    let r = report(
        &[
            "weights",
            "gen",
            "--family",
            r#"{"kind": "geometric", "ratio": 0.5, "D": 3}"#,
        ],
        0,
    );
    assert_eq!(
        r["result"]["weights"],
        serde_json::json!([0.5, 0.25, 0.125])
    );

    let r = report(
        &[
            "weights",
            "diag",
            "--family",
            &fx("family.json"),
            "--p",
            "4",
            "--eps",
            "0.1,0.3",
            "--D",
            "16,32",
        ],
        0,
    );
    assert_eq!(r["result"]["rows"].as_array().unwrap().len(), 4);

    let r = report(&["weights", "induced", "--system", &fx("system.json")], 0);
    assert_eq!(r["result"]["induced_weights"].as_array().unwrap().len(), 2);
}

#[test]
fn experiment_criterion_with_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c1.json");
    std::fs::write(
        &cfg,
        r#"{"criterion": "rosenthal-identities", "cases": 20}"#,
    )
    .unwrap();
    let r = report(
        &[
            "experiment",
            "criterion",
            "--id",
            "1",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "4",
        ],
        0,
    );
    assert_eq!(r["result"]["metrics"]["cases"], 20.0);
    assert_eq!(
        code(&xplab(&[
            "experiment",
            "criterion",
            "--id",
            "2",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "4"
        ])),
        1
    );
    assert_eq!(
        code(&xplab(&[
            "experiment",
            "criterion",
            "--id",
            "9",
            "--seed",
            "4"
        ])),
        1
    );
}

#[test]
fn csv_export_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let r = report(
        &[
            "blocks",
            "check",
            "--system",
            &fx("system.json"),
            "--csv",
            csv.to_str().unwrap(),
            "--timing",
        ],
        0,
    );
    assert!(r["wall_time_s"].as_f64().unwrap() >= 0.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,name,lhs,relation,rhs,pass,applicable"
    );
    assert_eq!(lines.count(), r["checks"].as_array().unwrap().len());
}

#[test]
fn tol_is_recorded_and_validated() {
    let r = report(&["norm", "--x", &fx("x.json"), "--tol", "1e-6"], 0);
    assert_eq!(r["config"]["tol"], 1e-6);
    assert_eq!(
        code(&xplab(&["norm", "--x", &fx("x.json"), "--tol", "-1"])),
        1
    );
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&xplab(&["frobnicate"])), 1);
    assert_eq!(code(&xplab(&["norm"])), 1);
    assert_eq!(code(&xplab(&["norm", "--x", &fx("x.json"), "--bogus"])), 1);
    let o = xplab(&["norm", "--x", "/nonexistent/x.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("/nonexistent/x.json"));
    assert_eq!(code(&xplab(&["--help"])), 0);
    assert_eq!(code(&xplab(&["--version"])), 0);
}

#[test]
fn malformed_json_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("x.json");
    std::fs::write(
        &bad,
        r#"{"p": 4.0, "weights": [1.0, 0.5], "entries": [[1, "one"]]}"#,
    )
    .unwrap();
    let o = xplab(&["norm", "--x", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("entries"), "{}", stderr(&o));

    std::fs::write(&bad, r#"{"p": 1.5, "weights": [1.0], "entries": []}"#).unwrap();
    let o = xplab(&["norm", "--x", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains('p'), "{}", stderr(&o));

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&xplab(&["norm", "--x", bad.to_str().unwrap()])), 1);
}

#[test]
fn empty_batch_exits_0() {
    let r = report(&["batch", "--config", &fx("batch_empty.json")], 0);
    assert_eq!(r["result"]["passed"], 0);
    assert_eq!(r["result"]["runs"], serde_json::json!([]));
}

#[test]
fn batch_with_one_failing_check_exits_2() {
    let r = report(&["batch", "--config", &fx("batch_one_failing.json")], 2);
    let res = &r["result"];
    assert_eq!(
        (
            res["passed"].as_u64(),
            res["failed"].as_u64(),
            res["errors"].as_u64()
        ),
        (Some(2), Some(1), Some(0))
    );
    let names: Vec<_> = res["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["norm", "prop24 strict", "thm13"]);
    assert_eq!(res["runs"][1]["exit_code"], 2);
}

#[test]
fn batch_validates_every_member_before_running() {
    let o = xplab(&["batch", "--config", &fx("batch_bad_member.json")]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty(), "nothing runs");
    assert!(stderr(&o).contains("bad"));
}

#[test]
fn batch_member_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.json");
    std::fs::write(
        &cfg,
        r#"{"runs": [{"name": "missing", "args": ["norm", "--x", "absent.json"]}]}"#,
    )
    .unwrap();
    let r = report(&["batch", "--config", cfg.to_str().unwrap()], 1);
    assert_eq!(r["result"]["errors"], 1);
    assert!(r["result"]["runs"][0]["error"]
        .as_str()
        .unwrap()
        .contains("absent.json"));

    std::fs::write(
        &cfg,
        r#"{"runs": [{"name": "nest", "args": ["batch", "--config", "b.json"]}]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&xplab(&["batch", "--config", cfg.to_str().unwrap()])),
        1
    );
}
