use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadow-orbits"))
        .args(args)
        .env_remove("SHADOW_ORBITS_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn verify_sl2_theorems_pass() {
    for target in ["thmA", "thmB", "thmD", "shadows"] {
        let out = run(&["verify", target, "--algebra", "sl2", "--p", "3", "--r", "1"]);
        assert_eq!(out.status.code(), Some(0), "{target}: {}", String::from_utf8_lossy(&out.stderr));
        let report = json(&out);
        assert_eq!(report["passed"], Value::Bool(true));
        assert!(report["checks"].as_object().is_some_and(|c| !c.is_empty()));
    }
}

#[test]
fn verify_exp_passes_and_lists_domains() {
    let out = run(&["verify", "exp", "--algebra", "sl2", "--p", "3", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let domains = report["domains"].as_array().unwrap();
    assert_eq!(domains.len(), 3);
    assert_eq!(domains[0]["elements"], 81);
    assert_eq!(domains[1]["elements"], 729);
    assert_eq!(domains[2]["exhaustive"], false);
}

#[test]
fn infeasible_and_invalid_configurations_exit_two() {
    for args in [
        &["verify", "thmA", "--algebra", "sl3", "--p", "5", "--r", "2"][..],
        &["verify", "thmA", "--algebra", "sl2", "--p", "7", "--r", "2", "--bound", "1000"],
        &["table", "--q", "9"],
        &["table", "--q", "3"],
        &["zeta", "--q", "2"],
        &["table", "--algebra", "sl2"],
        &["census", "--q", "5", "--bound", "0"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn table_at_five() {
    let out = run(&["table", "--q", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let table = json(&out);
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(table["allMatch"], true);
    let oracle: Vec<i64> = rows.iter().filter_map(|r| r["DeltaOracle"]["value"].as_i64()).collect();
    assert_eq!(oracle, vec![3100, 744, 386_780, 620, 620]);
    assert!(rows.iter().all(|r| r["match"] == true));
    assert_eq!(rows[2]["DeltaPoly"]["provenance"], "POLY");
    assert_eq!(rows[2]["DeltaOracle"]["provenance"], "ORACLE");
}

#[test]
fn table_above_the_bound_uses_polynomials() {
    let out = run(&["table", "--q", "11", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("S,dPrime,zPrime,deltaPrime,T,DeltaPoly,DeltaOracle,match\n"));
    // q(q^3 - 1) at q = 11
    assert!(csv.contains("L,4,1,2,R,14630,,true"));
}

#[test]
fn zeta_scale_and_large_integers() {
    let report = json(&run(&["zeta", "--q", "5", "--m", "1", "--terms", "3"]));
    assert_eq!(report["scale"]["value"], 390_625);
    assert_eq!(report["truncation"][0]["zetaCoefficient"], serde_json::json!([390_625, 1]));
    assert_eq!(report["truncation"][2]["enumerated"], 3844);
    assert_eq!(report["truncation"][3]["provenance"], "ORACLE");
    assert_eq!(report["identityHolds"], true);
    let report = json(&run(&["zeta", "--q", "5", "--m", "2"]));
    assert_eq!(report["scale"]["value"], 152_587_890_625i64);
    let report = json(&run(&["zeta", "--q", "5", "--m", "3", "--terms", "5"]));
    assert_eq!(report["scale"]["value"], "59604644775390625");
    assert_eq!(report["truncation"][4]["provenance"], "FORMULA-ONLY");
}

#[test]
fn zeta_sl2_closed_form() {
    let out = run(&["zeta", "--algebra", "sl2", "--p", "5", "--m", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["closedForm"], "5^(3*1) * (1 - 5^(-2-s)) / (1 - 5^(1-s))");
    assert_eq!(report["poincare"]["numerator"], serde_json::json!([[1, 1], [-1, 1]]));
    assert_eq!(report["poincare"]["denominator"], serde_json::json!([[1, 1], [-125, 1]]));
    assert_eq!(report["truncation"][1]["enumerated"], 124);
    assert_eq!(report["truncation"][2]["enumerated"], 15_500);
}

#[test]
fn census_csv() {
    let out = run(&["census", "--q", "5", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "algebra,q,rank,count\nsl3,5,4,3844\nsl3,5,6,386780\n");
}

#[test]
fn estimates_only_with_samples() {
    let base = json(&run(&["zeta", "--q", "5", "--terms", "4"]));
    assert!(base["estimates"].as_array().unwrap().is_empty());
    let sampled = json(&run(&["zeta", "--q", "5", "--terms", "4", "--samples", "200", "--seed", "3"]));
    let est = sampled["estimates"].as_array().unwrap();
    assert_eq!(est.len(), 1);
    assert_eq!(est[0]["provenance"], "ESTIMATE");
    assert_eq!(sampled["truncation"], base["truncation"]);
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let args = ["zeta", "--q", "5", "--terms", "4"];
    let reference = run(&[&args[..], &["--threads", "1"]].concat()).stdout;
    for threads in ["4", "8"] {
        assert_eq!(run(&[&args[..], &["--threads", threads]].concat()).stdout, reference);
    }
    let from_env = Command::new(env!("CARGO_BIN_EXE_shadow-orbits"))
        .args(args)
        .env("SHADOW_ORBITS_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(from_env.stdout, reference);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("shadow-orbits-{}.json", std::process::id()));
    let out = run(&["census", "--algebra", "sl2", "--q", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["histogram"]["2"], 342);
    std::fs::remove_file(path).unwrap();
}
