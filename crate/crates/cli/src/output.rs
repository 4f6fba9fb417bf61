//! Run directories: rounds.csv, summary.json and manifest.json.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use aggpilot::orchestrator::Summary;
use aggpilot::report::write_rounds_csv;
use aggpilot::{run_scenario, ScenarioConfig};

use crate::{CliResult, Failure};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: String,
    pub output_dir: String,
    pub label: String,
    /// `sha256("blob <len>\0" + canonical config JSON)`, git-object style.
    pub config_hash: String,
}

pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let body = serde_json::to_string(cfg).expect("config serializes");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()));
    h.update(body.as_bytes());
    hex::encode(h.finalize())
}

/// Refuses to reuse a directory whose manifest records a different config.
fn claim_dir(dir: &Path, hash: &str, force: bool) -> CliResult<()> {
    let manifest = dir.join("manifest.json");
    if manifest.exists() && !force {
        let text = fs::read_to_string(&manifest)
            .with_context(|| format!("reading {}", manifest.display()))
            .map_err(Failure::runtime)?;
        let old: RunManifest = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", manifest.display()))
            .map_err(Failure::runtime)?;
        if old.config_hash != hash {
            return Err(Failure::runtime(anyhow!(
                "{} holds a run of a different config (hash {}); pick another label or pass --force",
                dir.display(),
                &old.config_hash[..12]
            )));
        }
    }
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::runtime)
}

/// Runs `cfg` and writes its artifacts under `root/<label>`.
pub fn run_and_write(cfg: &ScenarioConfig, config_path: &Path, root: &Path, force: bool) -> CliResult<Summary> {
    write_run(cfg, config_path, &root.join(&cfg.label), force)
}

pub fn write_run(cfg: &ScenarioConfig, config_path: &Path, dir: &Path, force: bool) -> CliResult<Summary> {
    let hash = config_hash(cfg);
    claim_dir(dir, &hash, force)?;
    let report = run_scenario(cfg)
        .with_context(|| format!("scenario `{}`", cfg.label))
        .map_err(Failure::runtime)?;

    let io = |p: PathBuf, r: std::io::Result<()>| {
        r.with_context(|| format!("writing {}", p.display()))
            .map_err(Failure::runtime)
    };
    let csv_path = dir.join("rounds.csv");
    let file = fs::File::create(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))
        .map_err(Failure::runtime)?;
    write_rounds_csv(&report.rounds, std::io::BufWriter::new(file))
        .with_context(|| format!("writing {}", csv_path.display()))
        .map_err(Failure::runtime)?;

    let summary_json = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    io(dir.join("summary.json"), fs::write(dir.join("summary.json"), summary_json + "\n"))?;
    io(dir.join("config.json"), fs::write(dir.join("config.json"), cfg.to_json() + "\n"))?;
    let manifest = RunManifest {
        config_path: config_path.display().to_string(),
        output_dir: dir.display().to_string(),
        label: cfg.label.clone(),
        config_hash: hash,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    io(dir.join("manifest.json"), fs::write(dir.join("manifest.json"), manifest_json + "\n"))?;
    Ok(report.summary)
}

pub fn print_summaries(rows: &[Summary]) {
    let width = rows.iter().map(|s| s.label.len()).max().unwrap_or(5).max(5);
    println!(
        "{:<width$}  {:>9}  {:>8}  {:>8}  {:>7}  {:>7}  {:>7}  {:>6}",
        "label", "strategy", "final", "std10", "fedavg%", "median%", "krum%", "cost"
    );
    for s in rows {
        println!(
            "{:<width$}  {:>9}  {:>8.4}  {:>8.4}  {:>7.1}  {:>7.1}  {:>7.1}  {:>6.3}",
            s.label,
            s.strategy,
            s.final_accuracy,
            s.std_last10,
            s.selection_pct.fedavg,
            s.selection_pct.median,
            s.selection_pct.krum,
            s.mean_cost
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_formatting_but_not_content() {
        let a = ScenarioConfig::from_json(r#"{"rounds": 5}"#).unwrap();
        let b = ScenarioConfig::from_json("{\n  \"rounds\":5\n}").unwrap();
        let c = ScenarioConfig::from_json(r#"{"rounds": 6}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
