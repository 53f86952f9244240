use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embezzle-lab"))
        .args(args)
        .env_remove("EMBEZZLE_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spectrum_csv_rows() {
    let o = lab(&["diagonal", "spectrum", "--n", "3", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("lambda,multiplicity\n0.375,2\n0.125,2\n0,4\n"), "{text}");
    assert!(text.starts_with("# schema_version: 1\n"));
}

#[test]
fn vdh_distance_row() {
    let o = lab(&["vdh", "--m", "1", "--n-exp", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().find(|l| l.starts_with("16,1,")).unwrap().to_string();
    let distance: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((distance - 0.0594).abs() < 1e-4);
}

#[test]
fn catalyst_table_has_bound_column() {
    let o = lab(&["catalyst", "--d", "2", "--N", "2", "--n", "8", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# bound bound: catalyst_shift = 2/sqrt(n+1)"));
    assert!(text.contains("n,pair,overlap,normalization,exact_error,closed_form,bound\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("8,")).count(), 10);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["ltw", "--epsilon", "0.5", "--seed", "3", "--pairs", "2", "--format", "json"];
    let (a, b) = (lab(&args), lab(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["provenance"]["seed"], 3);
    assert_eq!(v["provenance"]["config"]["epsilon"], "0.5");
    assert_eq!(v["protocols"].as_array().unwrap().len(), 2);
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(lab(&["catalyst", "--d", "2"]).status.code(), Some(2));
    assert_eq!(lab(&["catalyst", "--seed", "1", "--bogus", "3"]).status.code(), Some(2));
    assert_eq!(lab(&["diagonal", "spectrum", "--n", "1", "--d", "2"]).status.code(), Some(2));
    let o = lab(&["diagonal", "mixed", "--target", "0.6666666666666666,0.3333333333333333", "--epsilon", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the cap"));
}

#[test]
fn dimension_cap_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_embezzle-lab"))
        .args(["diagonal", "error", "--n", "8", "--d", "3"])
        .env("EMBEZZLE_DIM_CAP", "1000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(lab(&["diagonal", "error", "--n", "8", "--d", "3"]).status.code(), Some(0));
}

#[test]
fn mixed_construction_writes_a_replayable_trace() {
    let dir = std::env::temp_dir().join(format!("embezzle-lab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("mixed.json");
    let o = lab(&[
        "diagonal", "mixed", "--target", "0.6666666666666666,0.3333333333333333", "--epsilon", "0.5",
        "--format", "json", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let c = &v["protocols"][0];
    assert_eq!(c["rationals"], serde_json::json!([[2, 3], [1, 3]]));
    assert!((c["report"]["exact_error"].as_f64().unwrap() - 0.5510425240054867).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ratio_and_polar_probes() {
    let o = lab(&["diagonal", "ratio", "--d1", "2", "--d2", "3", "--n-max", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let o = lab(&["probe", "polar", "--seed", "5", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let o = lab(&["probe", "optimal", "--seed", "5", "--instances", "3"]);
    assert_eq!(o.status.code(), Some(0));
}
