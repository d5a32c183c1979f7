use std::fs;
use std::path::Path;

use sfp_core::error::Error;
use sfp_core::harness::{run_experiment, trace_file_name, ExperimentConfig, SUMMARY_FILE};

fn config(out: &Path, seeds: &[u64], algorithm: &str) -> ExperimentConfig {
    let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
    let length = if algorithm.ends_with("fp") {
        "steps = 2000"
    } else {
        "t_end = 1.0"
    };
    let text = format!(
        r#"
algorithm = "{algorithm}"
{length}
cadence = 50
master_seed = 11
seeds = [{}]
output_dir = "{}"

[game.generate]
num_states = 2
action_counts = [2, 2]
discount = 0.5
class = "zero-sum"
seed = 3
"#,
        seeds.join(", "),
        out.display()
    );
    ExperimentConfig::from_toml_str(&text, "test.toml").unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn writes_one_trace_per_seed_and_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let report = run_experiment(&config(&out, &[1, 2, 3], "mfp")).unwrap();
    assert!(report.pass);
    assert_eq!(report.seeds.len(), 3);
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut expected: Vec<String> = [1, 2, 3].iter().map(|&s| trace_file_name(s)).collect();
    expected.push(SUMMARY_FILE.to_string());
    expected.sort();
    assert_eq!(names, expected);

    let summary: serde_json::Value = serde_json::from_str(&read(&out, SUMMARY_FILE)).unwrap();
    assert_eq!(summary["algorithm"], "mfp");
    assert!(summary["metrics"]["duality_gap_max"]["median"].is_number());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for algorithm in ["sfp", "mfp", "mbrd"] {
        run_experiment(&config(&a, &[4, 5], algorithm)).unwrap();
        run_experiment(&config(&b, &[4, 5], algorithm)).unwrap();
        for name in [trace_file_name(4), trace_file_name(5)] {
            assert_eq!(read(&a, &name), read(&b, &name), "{algorithm}: {name}");
        }
    }
}

#[test]
fn adding_a_seed_leaves_existing_traces_unchanged() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(&config(&a, &[1, 2], "mfp")).unwrap();
    run_experiment(&config(&b, &[9, 2, 1], "mfp")).unwrap();
    for seed in [1, 2] {
        let name = trace_file_name(seed);
        assert_eq!(read(&a, &name), read(&b, &name));
    }
}

#[test]
fn missing_game_fails_before_writing_anything() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut cfg = config(&out, &[1], "sfp");
    cfg.game = sfp_core::harness::GameSource::Path(tmp.path().join("nope.json"));
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    assert!(!out.exists());
}

#[test]
fn trace_headers_are_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    run_experiment(&config(&out, &[1], "mfp")).unwrap();
    let header = read(&out, &trace_file_name(1))
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(
        header,
        "step,u0_s0,u0_s1,rho_val_s0,rho_val_s1,rho_val_max,rho_br_s0,rho_br_s1,rho_br_max,\
         duality_gap_s0,duality_gap_s1,duality_gap_max,q_err,r_err,value_rate"
    );

    run_experiment(&config(&out, &[1], "sbrd")).unwrap();
    let header = read(&out, &trace_file_name(1))
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(
        header,
        "t,u0_s0,u0_s1,rho_val_s0,rho_val_s1,rho_val_max,rho_br_s0,rho_br_s1,rho_br_max,\
         duality_gap_s0,duality_gap_s1,duality_gap_max,value_rate"
    );
}
