use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distchar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn temp_csv(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn corr_ex8_json() {
    let v = json(&["corr", "--m", "p1", "--l", "L", "--x", &fixture("ex8_y.csv"), "--conv", "grid", "--format", "json"]);
    let rho = v["rho"].as_f64().unwrap();
    assert!((rho - 0.959264).abs() < 1e-6, "{rho}");
    assert_eq!(v["convention"], "grid");
    assert_eq!(v["n"], "L");
}

#[test]
fn corr_undefined_is_null() {
    let f = temp_csv("1,2\n1,2\n");
    let v = json(&["corr", "--m", "p1", "--n", "p2", "--x", f.path().to_str().unwrap(), "--format", "json"]);
    assert!(v["rho"].is_null());
    let text = stdout(&run(&["corr", "--m", "p1", "--n", "p2", "--x", f.path().to_str().unwrap()]));
    assert!(text.starts_with("rho: undefined\n"), "{text}");
}

#[test]
fn distmat_ex4_csv() {
    let o = run(&["distmat", "--c", "p2", "--x", &fixture("ex4.csv")]);
    assert!(o.status.success());
    let t = "3.46410162";
    assert_eq!(
        stdout(&o),
        format!("0,2,2,2\n2,0,{t},{t}\n2,{t},0,{t}\n2,{t},{t},0\n")
    );
}

#[test]
fn distmat_json_shape() {
    let v = json(&["distmat", "--c", "pinf", "--x", &fixture("ex6.csv"), "--format", "json"]);
    assert_eq!(v["order"], 3);
    assert_eq!(v["entries"], serde_json::json!([[0.0, 30.0, 40.0], [30.0, 0.0, 10.0], [40.0, 10.0, 0.0]]));
}

#[test]
fn verify_passes() {
    let o = run(&["verify"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    let v = json(&["verify", "--format", "json"]);
    assert!(v.as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn near_one_based() {
    let v = json(&["near", "--c", "p1", "--x", &fixture("ex6_x.csv"), "--format", "json"]);
    assert_eq!(v["sets"], serde_json::json!([[3], [1], [1]]));
    assert_eq!(v["total"], 3);
    let exact = json(&["near", "--c", "p1", "--x", &fixture("ex6_x.csv"), "--exact", "--format", "json"]);
    assert_eq!(exact["sets"], v["sets"]);
    let text = stdout(&run(&["near", "--c", "p1", "--x", &fixture("ex6_x.csv")]));
    assert_eq!(text, "1: {3}\n2: {1}\n3: {1}\ntotal: 3\n");
}

#[test]
fn near_positive_only() {
    let f = temp_csv("0\n0\n0\n");
    let zero = json(&["near", "--c", "p1", "--x", f.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(zero["total"], 6);
    let pos = json(&["near", "--c", "p1", "--x", f.path().to_str().unwrap(), "--positive-only", "--format", "json"]);
    assert_eq!(pos["total"], 0);
}

#[test]
fn robustness_commands() {
    let x = fixture("ex6_x.csv");
    let xp = fixture("ex6.csv");
    for c in ["p1", "p2", "p7", "pinf"] {
        let v = json(&["rob-plus", "--c", c, "--x", &x, "--xp", &xp, "--format", "json"]);
        assert_eq!(v["score"], serde_json::json!({"num": 0, "den": 3, "value": 0.0}), "{c}");
    }
    let v = json(&["rob-minus", "--c", "pinf", "--x", &fixture("ex7.csv"), "--format", "json"]);
    assert_eq!(v["score"]["num"], 2);
    assert_eq!(v["score"]["den"], 6);
    assert_eq!(v["changed_per_column"], serde_json::json!([2, 2]));
}

#[test]
fn concord_ex4() {
    let v = json(&["concord", "--m", "p1", "--n", "p2", "--x", &fixture("ex9.csv"), "--format", "json"]);
    assert_eq!(v["score"]["num"], 1);
    assert_eq!(v["score"]["den"], 3);
}

#[test]
fn adversarial_json() {
    let v = json(&["adversarial", "--c", "p2", "--x", &fixture("ex9.csv"), "--format", "json"]);
    assert_eq!(v["achieved_near_total"], 3);
    assert_eq!(v["original_near_total"], 6);
    assert_eq!(v["spacing"], serde_json::json!([1, 2, 4]));
    assert!(v["t"].as_f64().unwrap() > 0.0);
    let o = run(&["adversarial", "--c", "L", "--x", &fixture("ex9.csv")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn delta_cf_json() {
    let v = json(&["delta-cf", "--digits", "20", "--max-q", "200000000", "--format", "json"]);
    let qs: Vec<u64> = v["convergents"].as_array().unwrap().iter().map(|c| c["q"].as_u64().unwrap()).collect();
    assert!(qs.contains(&5_382_609));
    assert!(v["next_q"].as_u64().unwrap() > 169_229_911);
    assert_eq!(v["delta"], "0.57037600167502303696");
    assert!(v["convergents"][0].get("truncated").is_some());
}

#[test]
fn mc_nn_is_deterministic() {
    let args = ["mc-nn", "--n", "2", "--samples", "50000", "--seed", "4", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["conjecture"], 1.0 / 3.0);
    assert_eq!(v["seed"], 4);
}

#[test]
fn explore_near_small() {
    let v = json(&["explore-near", "--rows", "3", "--c", "p1", "--samples", "200", "--format", "json"]);
    assert_eq!(v["observed"], serde_json::json!([3, 4, 6]));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["nope"]).status.code(), Some(2));
    assert_eq!(run(&["distmat", "--c", "p2"]).status.code(), Some(2));
    assert_eq!(run(&["distmat", "--c", "q2", "--x", "a.csv"]).status.code(), Some(2));
    assert_eq!(run(&["distmat", "--c", "p2", "--x", "a.csv", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["corr", "--m", "p1", "--n", "p2", "--x", "a.csv", "--conv", "diag"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1_with_one_line() {
    let bad = temp_csv("1,2\n3,oops\n");
    let o = run(&["distmat", "--c", "p1", "--x", bad.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("line 2") && err.contains("column 2"), "{err}");

    let one_col = temp_csv("1\n2\n3\n");
    let o = run(&["rob-minus", "--c", "p1", "--x", one_col.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["rob-plus", "--c", "p1", "--x", &fixture("ex4.csv"), "--xp", &fixture("ex6.csv")]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["distmat", "--c", "p1", "--x", "/nonexistent/file.csv"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["delta-cf", "--digits", "40"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["near", "--c", "p3", "--x", &fixture("ex4.csv"), "--exact"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_is_byte_identical() {
    for args in [
        vec!["distmat", "--c", "p3.5", "--x", "EX", "--format", "json"],
        vec!["corr", "--m", "p2", "--n", "pinf", "--x", "EX", "--format", "json"],
        vec!["explore-near", "--rows", "4", "--c", "p2", "--samples", "3000", "--seed", "7", "--format", "json"],
    ] {
        let x = fixture("ex5.csv");
        let args: Vec<&str> = args.iter().map(|a| if *a == "EX" { x.as_str() } else { a }).collect();
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}
