//! SVG figures over run directories.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use plotters::prelude::*;

use aggpilot::report::read_rounds_csv;
use aggpilot::{RoundLog, RuleId};

use crate::{CliResult, Failure};

struct Run {
    name: String,
    rounds: Vec<RoundLog>,
}

fn load(dir: &Path) -> CliResult<Run> {
    let path = dir.join("rounds.csv");
    let file = fs::File::open(&path)
        .map_err(|e| Failure::runtime(anyhow!("{}: {e}", path.display())))?;
    let rounds = read_rounds_csv(file).map_err(|e| Failure::runtime(anyhow!("{}: {e}", path.display())))?;
    if rounds.is_empty() {
        return Err(Failure::runtime(anyhow!("{}: no rounds", path.display())));
    }
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Ok(Run { name, rounds })
}

/// Share of rounds per rule, in percent.
fn selection(rounds: &[RoundLog]) -> [f64; 3] {
    let mut pct = [0.0; 3];
    for r in rounds {
        pct[r.chosen_rule.index()] += 100.0 / rounds.len() as f64;
    }
    pct
}

pub fn cmd_plot(dirs: &[PathBuf], dest: &Path) -> CliResult<()> {
    let runs = dirs.iter().map(|d| load(d)).collect::<CliResult<Vec<_>>>()?;
    fs::create_dir_all(dest)
        .with_context(|| format!("creating {}", dest.display()))
        .map_err(Failure::runtime)?;
    let acc = dest.join("accuracy.svg");
    accuracy_plot(&runs, &acc)
        .with_context(|| format!("rendering {}", acc.display()))
        .map_err(Failure::runtime)?;
    let sel = dest.join("selection.svg");
    selection_plot(&runs, &sel)
        .with_context(|| format!("rendering {}", sel.display()))
        .map_err(Failure::runtime)?;
    println!("{}\n{}", acc.display(), sel.display());
    Ok(())
}

fn accuracy_plot(runs: &[Run], path: &Path) -> anyhow::Result<()> {
    let root = SVGBackend::new(path, (900, 560)).into_drawing_area();
    root.fill(&WHITE)?;
    let max_round = runs.iter().map(|r| r.rounds.len()).max().unwrap_or(1);
    let mut chart = ChartBuilder::on(&root)
        .caption("Test accuracy per round", ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0usize..max_round, 0f64..1f64)?;
    chart
        .configure_mesh()
        .x_desc("round")
        .y_desc("accuracy")
        .draw()?;
    for (i, run) in runs.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(
                run.rounds.iter().map(|r| (r.round, r.test_accuracy)),
                color.stroke_width(2),
            ))?
            .label(run.name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::LowerRight)
        .draw()?;
    root.present()?;
    Ok(())
}

fn selection_plot(runs: &[Run], path: &Path) -> anyhow::Result<()> {
    let root = SVGBackend::new(path, (900, 480)).into_drawing_area();
    root.fill(&WHITE)?;
    let groups = runs.len();
    let mut chart = ChartBuilder::on(&root)
        .caption("Rule selection (% of rounds)", ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0f64..groups as f64, 0f64..100f64)?;
    let names: Vec<String> = runs.iter().map(|r| r.name.clone()).collect();
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(groups.max(1))
        .x_label_formatter(&|x| {
            let i = x.floor() as usize;
            names.get(i).cloned().unwrap_or_default()
        })
        .y_desc("% of rounds")
        .draw()?;
    for (k, rule) in RuleId::ALL.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(runs.iter().enumerate().map(|(g, run)| {
                let pct = selection(&run.rounds)[rule.index()];
                let left = g as f64 + 0.15 + 0.7 * k as f64 / 3.0;
                Rectangle::new([(left, 0.0), (left + 0.7 / 3.0, pct)], color.filled())
            }))?
            .label(rule.name())
            .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 12, y + 5)], color.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperRight)
        .draw()?;
    root.present()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use aggpilot::StateVector;

    #[test]
    fn selection_sums_to_100() {
        let row = |rule| RoundLog {
            round: 0,
            chosen_rule: rule,
            state: StateVector { norm_variance: 0.0, avg_cosine_similarity: 0.0, mean_update_norm: 0.0 },
            scaled_state: [0.0; 3],
            val_accuracy: 0.0,
            test_accuracy: 0.0,
            reward: 0.0,
            ucb_scores: None,
            wall_time_ms: None,
        };
        let rounds = vec![row(RuleId::FedAvg), row(RuleId::Krum), row(RuleId::Krum)];
        let pct = selection(&rounds);
        assert!((pct.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        assert!((pct[2] - 200.0 / 3.0).abs() < 1e-9);
    }
}
