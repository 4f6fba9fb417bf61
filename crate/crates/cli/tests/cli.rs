use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
    "label": "small",
    "rounds": 4,
    "num_clients": 8,
    "num_malicious": 2,
    "data": {"num_classes": 4, "num_features": 6, "samples_per_class": 60},
    "train": {"learning_rate": 0.05},
    "attack": {"kind": "standard"}
}"#;

fn aggpilot(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggpilot"))
        .current_dir(dir)
        .env_remove("AGGPILOT_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), config).unwrap();
    dir
}

#[test]
fn run_writes_csv_summary_and_manifest() {
    let dir = setup(SMALL);
    let out = aggpilot(dir.path(), &["run", "c.json", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let run = dir.path().join("o/small");
    let csv = fs::read_to_string(run.join("rounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("round,chosen_rule,norm_variance,avg_cos_sim,mean_update_norm,scaled_s1,scaled_s2,scaled_s3,val_accuracy,test_accuracy,reward,ucb_fedavg,ucb_median,ucb_krum,wall_time_ms\n"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    for key in ["final_accuracy", "std_last10", "selection_pct"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["label"], "small");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn rerun_is_byte_identical_and_changed_config_is_refused() {
    let dir = setup(SMALL);
    assert!(aggpilot(dir.path(), &["run", "c.json", "--out", "o", "--threads", "1"]).status.success());
    let first = fs::read(dir.path().join("o/small/rounds.csv")).unwrap();
    assert!(aggpilot(dir.path(), &["run", "c.json", "--out", "o", "--threads", "4"]).status.success());
    assert_eq!(first, fs::read(dir.path().join("o/small/rounds.csv")).unwrap());

    fs::write(dir.path().join("c.json"), SMALL.replace("\"rounds\": 4", "\"rounds\": 3")).unwrap();
    let out = aggpilot(dir.path(), &["run", "c.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("different config"));
    assert_eq!(first, fs::read(dir.path().join("o/small/rounds.csv")).unwrap());
    assert!(aggpilot(dir.path(), &["run", "c.json", "--out", "o", "--force"]).status.success());
}

#[test]
fn krum_precondition_exits_2() {
    let dir = setup(r#"{"num_clients": 20, "num_malicious": 18}"#);
    let out = aggpilot(dir.path(), &["run", "c.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("N >= f + 3"), "{}", stderr(&out));
}

#[test]
fn malformed_config_exits_2() {
    let dir = setup(r#"{"rounds": "many"}"#);
    assert_eq!(aggpilot(dir.path(), &["run", "c.json"]).status.code(), Some(2));
    assert_eq!(aggpilot(dir.path(), &["run", "missing.json"]).status.code(), Some(2));
}

#[test]
fn output_root_comes_from_env_and_seed_override_relabels() {
    let dir = setup(SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_aggpilot"))
        .current_dir(dir.path())
        .env("AGGPILOT_OUT", "from_env")
        .args(["run", "c.json", "--seed-override", "9"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let cfg = fs::read_to_string(dir.path().join("from_env/small-seed9/config.json")).unwrap();
    assert!(cfg.contains("\"seed\": 9"));
}

#[test]
fn lambda_sweep_writes_one_dir_per_value_and_a_comparison() {
    let dir = setup(SMALL);
    let out = aggpilot(dir.path(), &["sweep", "c.json", "--key", "lambda", "--values", "0.1,0.5,1.0,2.0", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let sweep = dir.path().join("o/small-sweep-lambda_cost");
    let runs = fs::read_dir(&sweep).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(runs, 4);
    let mut rd = csv::Reader::from_path(sweep.join("comparison.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[3][1], "2.0");
    let cfg = fs::read_to_string(sweep.join("small-lambda_cost=2.0/config.json")).unwrap();
    assert!(cfg.contains("\"lambda_cost\": 2.0"));
}

#[test]
fn single_value_sweep_matches_plain_run() {
    let dir = setup(SMALL);
    assert!(aggpilot(dir.path(), &["run", "c.json", "--out", "o"]).status.success());
    assert!(aggpilot(dir.path(), &["sweep", "c.json", "--key", "seed", "--values", "0", "--out", "o"]).status.success());
    assert_eq!(
        fs::read(dir.path().join("o/small/rounds.csv")).unwrap(),
        fs::read(dir.path().join("o/small-sweep-seed/small-seed=0/rounds.csv")).unwrap()
    );
}

#[test]
fn bad_sweep_value_fails_before_running() {
    let dir = setup(SMALL);
    let out = aggpilot(dir.path(), &["sweep", "c.json", "--key", "beta", "--values", "0.5,-1", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn plot_renders_svgs_and_names_bad_files() {
    let dir = setup(SMALL);
    assert!(aggpilot(dir.path(), &["run", "c.json", "--out", "o"]).status.success());
    let out = aggpilot(dir.path(), &["plot", "o/small", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["accuracy.svg", "selection.svg"] {
        let svg = fs::read_to_string(dir.path().join("o/plots").join(f)).unwrap();
        assert!(svg.contains("<svg"));
    }

    fs::create_dir_all(dir.path().join("broken")).unwrap();
    fs::write(dir.path().join("broken/rounds.csv"), "round,oops\n1,2\n").unwrap();
    let out = aggpilot(dir.path(), &["plot", "o/small", "broken"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("broken/rounds.csv"));
    let out = aggpilot(dir.path(), &["plot", "nowhere"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nowhere/rounds.csv"));
}
