use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn sfplab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfplab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn sfplab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sfplab(dir.path(), &["--help"])), 0);
    for sub in ["check-game", "gen-game", "solve-oracle", "run", "plot-data"] {
        let out = sfplab(dir.path(), &[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub}");
        assert!(stdout(&out).contains("Usage"), "{sub}");
    }
}

#[test]
fn unknown_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("matching_pennies.json");
    let out = sfplab(
        dir.path(),
        &["check-game", "--game", path_str(&game), "--verbose"],
    );
    assert_eq!(code(&out), 2);
    assert_eq!(code(&sfplab(dir.path(), &["no-such-command"])), 2);
}

#[test]
fn check_game_reports_zero_sum_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("zero_sum_three_state.json");
    let out = sfplab(dir.path(), &["check-game", "--game", path_str(&game)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("valid"));
    assert!(text.contains("ZeroSum"));
    assert!(text.contains("ergodic: certified T=1"));
}

#[test]
fn check_game_swap_chain_is_valid_but_not_certified() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("swap_chain.json");
    let out = sfplab(dir.path(), &["check-game", "--game", path_str(&game)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("ergodic: not certified"));
}

#[test]
fn check_game_exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("broken.json"), "{\"num_states\": ").unwrap();
    assert_eq!(
        code(&sfplab(
            dir.path(),
            &["check-game", "--game", "broken.json"]
        )),
        2
    );
    assert_eq!(
        code(&sfplab(
            dir.path(),
            &["check-game", "--game", "absent.json"]
        )),
        2
    );
    let bad = fixture("bad_transition.json");
    let out = sfplab(dir.path(), &["check-game", "--game", path_str(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("invalid"));
}

#[test]
fn gen_game_is_deterministic_and_checks_clean() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "gen-game",
            "--states",
            "3",
            "--players",
            "2",
            "--actions",
            "2,3",
            "--class",
            "zero-sum",
            "--seed",
            "11",
            "--out",
            out,
        ]
    };
    assert_eq!(code(&sfplab(dir.path(), &args("a.json"))), 0);
    assert_eq!(code(&sfplab(dir.path(), &args("b.json"))), 0);
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
    let out = sfplab(dir.path(), &["check-game", "--game", "a.json"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("ZeroSum"));
    assert!(stdout(&out).contains("certified"));
}

#[test]
fn gen_game_rejects_unknown_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfplab(
        dir.path(),
        &[
            "gen-game",
            "--states",
            "2",
            "--players",
            "2",
            "--actions",
            "2",
            "--class",
            "potential",
            "--seed",
            "1",
            "--out",
            "g.json",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("g.json").exists());
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_oracle_matching_pennies_has_value_zero() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("matching_pennies.json");
    let out = sfplab(
        dir.path(),
        &[
            "solve-oracle",
            "--game",
            path_str(&game),
            "--beta",
            "0.1",
            "--out",
            "mp.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("mp.json"));
    assert_eq!(doc["values"][0][0].as_f64().unwrap(), 0.0);
    for p in doc["profile"][0].as_array().unwrap() {
        for x in p.as_array().unwrap() {
            assert!((x.as_f64().unwrap() - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn solve_oracle_single_player_log_sum_exp() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("single_player_bandit.json");
    let out = sfplab(
        dir.path(),
        &[
            "solve-oracle",
            "--game",
            path_str(&game),
            "--beta",
            "1",
            "--out",
            "sp.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read_json(&dir.path().join("sp.json"));
    let v = doc["values"][0][0].as_f64().unwrap();
    let expected = (1.0 + std::f64::consts::E).ln();
    assert!((v - expected).abs() < 1e-9, "{v}");
    assert!((v - 1.3133).abs() < 1e-4);
}

#[test]
fn solve_oracle_rejects_identical_interest() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("identical_interest.json");
    let out = sfplab(
        dir.path(),
        &[
            "solve-oracle",
            "--game",
            path_str(&game),
            "--out",
            "ii.json",
        ],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("equilibrium_residuals"));
    assert!(!dir.path().join("ii.json").exists());
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let game = fixture("zero_sum_three_state.json");
    let text = format!(
        "algorithm = \"mfp\"\nsteps = 4000\ncadence = 400\nseeds = [0, 1, 2]\noutput_dir = \"out\"\n\
         game = {{ path = \"{}\" }}\n{extra}",
        game.display()
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "\n[[thresholds]]\nmetric = \"duality_gap_max\"\nmax = 1.0\n",
    );
    let out = sfplab(dir.path(), &["run", "--config", "run.toml"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for seed in 0..3 {
        assert!(dir
            .path()
            .join(format!("out/trace_seed{seed}.csv"))
            .is_file());
    }
    let summary = read_json(&dir.path().join("out/summary.json"));
    assert_eq!(summary["pass"], serde_json::Value::Bool(true));
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 3);
}

#[test]
fn run_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "");
    assert_eq!(
        code(&sfplab(dir.path(), &["run", "--config", "run.toml"])),
        0
    );
    let first = fs::read(dir.path().join("out/trace_seed1.csv")).unwrap();
    let first_summary = fs::read(dir.path().join("out/summary.json")).unwrap();
    assert_eq!(
        code(&sfplab(dir.path(), &["run", "--config", "run.toml"])),
        0
    );
    assert_eq!(
        first,
        fs::read(dir.path().join("out/trace_seed1.csv")).unwrap()
    );
    assert_eq!(
        first_summary,
        fs::read(dir.path().join("out/summary.json")).unwrap()
    );
}

#[test]
fn run_fails_threshold_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "\n[[thresholds]]\nmetric = \"duality_gap_max\"\nmax = 0.0\n",
    );
    let out = sfplab(dir.path(), &["run", "--config", "run.toml"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn run_with_missing_game_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        "algorithm = \"sfp\"\nsteps = 100\ncadence = 10\nseeds = [0]\noutput_dir = \"out\"\n\
                game = { path = \"nowhere.json\" }\n";
    fs::write(dir.path().join("run.toml"), text).unwrap();
    let out = sfplab(dir.path(), &["run", "--config", "run.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nowhere.json"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn run_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "colour = \"blue\"\n");
    assert_eq!(
        code(&sfplab(dir.path(), &["run", "--config", "run.toml"])),
        2
    );
}

#[test]
fn plot_data_reshapes_a_run() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "");
    assert_eq!(
        code(&sfplab(dir.path(), &["run", "--config", "run.toml"])),
        0
    );
    let out = sfplab(
        dir.path(),
        &[
            "plot-data",
            "--dir",
            "out",
            "--metric",
            "duality_gap_max",
            "--out",
            "long.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("long.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,seed,value,median"));
    assert_eq!(lines.count(), 30);

    let out = sfplab(
        dir.path(),
        &["plot-data", "--dir", "out", "--metric", "nope"],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("duality_gap_max"));
}

#[test]
fn continuous_run_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let game = fixture("identical_interest.json");
    let text = format!(
        "algorithm = \"sbrd\"\nt_end = 2.0\nstep_size = 0.05\ncadence = 10\nseeds = [4]\noutput_dir = \"out\"\n\
         game = {{ path = \"{}\" }}\n",
        game.display()
    );
    fs::write(dir.path().join("run.toml"), text).unwrap();
    let out = sfplab(dir.path(), &["run", "--config", "run.toml"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace = fs::read_to_string(dir.path().join("out/trace_seed4.csv")).unwrap();
    assert!(trace.starts_with("t,"));
    assert_eq!(trace.lines().count(), 1 + 4);
}
