//! One run per value of a config key, plus a comparison table.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde_json::Value;

use crate::output::{print_summaries, write_run};
use crate::{finish_config, load_config, CliResult, Failure, Globals};

pub const COMPARISON_HEADER: [&str; 12] = [
    "key",
    "value",
    "seed",
    "label",
    "strategy",
    "final_accuracy",
    "final_val_accuracy",
    "std_last10",
    "pct_fedavg",
    "pct_median",
    "pct_krum",
    "mean_cost",
];

/// Expands the short names used in experiment scripts.
pub fn resolve_key(key: &str) -> String {
    let path = match key {
        "lambda" => "reward.lambda_cost",
        "beta" => "partition.beta",
        "alpha" => "bandit.alpha",
        other => other,
    };
    path.split('.').fold(String::new(), |mut acc, part| {
        acc.push('/');
        acc.push_str(part);
        acc
    })
}

/// Numbers, booleans and `null` keep their JSON type; anything else is a string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_pointer(doc: &mut Value, pointer: &str, value: Value) -> CliResult<()> {
    let (parent, leaf) = pointer.rsplit_once('/').expect("pointer starts with '/'");
    let mut node = doc;
    for part in parent.split('/').skip(1) {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Failure::invalid(anyhow!("sweep key {pointer} crosses a non-object")))?;
        node = obj.entry(part).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Failure::invalid(anyhow!("sweep key {pointer} crosses a non-object")))?;
    if obj.get(leaf).is_some_and(|v| v.is_object() || v.is_array()) {
        return Err(Failure::invalid(anyhow!("sweep key {pointer} is not a scalar field")));
    }
    obj.insert(leaf.to_string(), value);
    Ok(())
}

pub fn cmd_sweep(config: &Path, key: &str, values: &[String], seeds: u64, globals: &Globals) -> CliResult<()> {
    if seeds == 0 {
        return Err(Failure::invalid(anyhow!("--seeds must be positive")));
    }
    let base = load_config(config)?;
    let pointer = resolve_key(key);
    let short = pointer.rsplit('/').next().unwrap_or(key).to_string();
    let base_cfg = finish_config(base.clone(), globals)?;
    let sweep_dir = globals.out.join(format!("{}-sweep-{short}", base_cfg.label));

    // Validate every variant before spending time on any run.
    let mut plans = Vec::new();
    for raw in values {
        for offset in 0..seeds {
            let mut doc = base.clone();
            set_pointer(&mut doc, &pointer, parse_value(raw))?;
            let mut cfg = finish_config(doc, globals)
                .map_err(|f| match f {
                    Failure::Invalid(e) => Failure::Invalid(e.context(format!("{key} = {raw}"))),
                    other => other,
                })?;
            cfg.seed = cfg.seed.wrapping_add(offset);
            cfg.label = if seeds > 1 {
                format!("{}-{short}={raw}-s{}", base_cfg.label, cfg.seed)
            } else {
                format!("{}-{short}={raw}", base_cfg.label)
            };
            cfg.validate()
                .map_err(|e| Failure::invalid(anyhow!("{key} = {raw}: {e}")))?;
            plans.push((raw.clone(), cfg));
        }
    }

    fs::create_dir_all(&sweep_dir)
        .with_context(|| format!("creating {}", sweep_dir.display()))
        .map_err(Failure::runtime)?;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for (raw, cfg) in &plans {
        let summary = write_run(cfg, config, &sweep_dir.join(&cfg.label), globals.force)?;
        rows.push(vec![
            key.to_string(),
            raw.clone(),
            cfg.seed.to_string(),
            summary.label.clone(),
            summary.strategy.clone(),
            summary.final_accuracy.to_string(),
            summary.final_val_accuracy.to_string(),
            summary.std_last10.to_string(),
            summary.selection_pct.fedavg.to_string(),
            summary.selection_pct.median.to_string(),
            summary.selection_pct.krum.to_string(),
            summary.mean_cost.to_string(),
        ]);
        summaries.push(summary);
    }

    let path = sweep_dir.join("comparison.csv");
    let write = || -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(COMPARISON_HEADER)?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    };
    write()
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::runtime)?;

    print_summaries(&summaries);
    println!();
    print_selection_table(key, values, &plans, &summaries);
    println!("\ncomparison: {}", path.display());
    Ok(())
}

/// Mean selection percentages per swept value.
fn print_selection_table(
    key: &str,
    values: &[String],
    plans: &[(String, aggpilot::ScenarioConfig)],
    summaries: &[aggpilot::orchestrator::Summary],
) {
    println!("{:>10}  {:>8}  {:>8}  {:>8}  {:>9}  {:>8}", key, "fedavg%", "median%", "krum%", "mean_cost", "final");
    for v in values {
        let picked: Vec<_> = plans
            .iter()
            .zip(summaries)
            .filter(|((raw, _), _)| raw == v)
            .map(|(_, s)| s)
            .collect();
        let n = picked.len().max(1) as f64;
        let mean = |f: &dyn Fn(&aggpilot::orchestrator::Summary) -> f64| picked.iter().map(|s| f(s)).sum::<f64>() / n;
        println!(
            "{:>10}  {:>8.1}  {:>8.1}  {:>8.1}  {:>9.3}  {:>8.4}",
            v,
            mean(&|s| s.selection_pct.fedavg),
            mean(&|s| s.selection_pct.median),
            mean(&|s| s.selection_pct.krum),
            mean(&|s| s.mean_cost),
            mean(&|s| s.final_accuracy)
        );
    }
}
