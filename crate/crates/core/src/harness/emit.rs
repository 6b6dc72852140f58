//! CSV and SVG output.

use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::RunLog;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub update_count: u64,
    pub tp_diff: f64,
    pub jfi_diff: f64,
    pub seed: u64,
}

/// One row per evaluation per run, runs in the given order.
pub fn rows(logs: &[RunLog]) -> Vec<CsvRow> {
    logs.iter()
        .flat_map(|log| {
            log.evals.iter().map(move |e| CsvRow {
                update_count: e.update_count,
                tp_diff: e.tp_diff,
                jfi_diff: e.jfi_diff,
                seed: log.seed,
            })
        })
        .collect()
}

pub fn write_csv(rows: &[CsvRow], path: impl AsRef<Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty("no evaluations to write".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}

/// Per-update mean training reward: `update_count,mean_reward,seed`.
pub fn write_rewards_csv(logs: &[RunLog], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["update_count", "mean_reward", "seed"])?;
    for log in logs {
        for (i, r) in log.rewards.iter().enumerate() {
            w.write_record(&[(i + 1).to_string(), r.to_string(), log.seed.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn plot_err(e: impl std::fmt::Display) -> Error {
    Error::Plot(e.to_string())
}

/// Throughput and fairness differences to PF against update count; solid
/// lines for throughput, dashed for fairness, one color per seed.
pub fn plot_svg(rows: &[CsvRow], path: impl AsRef<Path>, title: &str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Empty("no evaluations to plot".into()));
    }
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let x_max = rows.iter().map(|r| r.update_count).max().unwrap_or(0).max(1);
    let (mut y_lo, mut y_hi) = rows
        .iter()
        .flat_map(|r| [r.tp_diff, r.jfi_diff])
        .fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pad = ((y_hi - y_lo) * 0.05).max(0.01);
    y_lo -= pad;
    y_hi += pad;

    let root = SVGBackend::new(path.as_ref(), (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0u64..x_max, y_lo..y_hi)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("training updates")
        .y_desc("normalized difference to PF")
        .draw()
        .map_err(plot_err)?;

    for (k, seed) in seeds.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts = |f: fn(&CsvRow) -> f64| -> Vec<(u64, f64)> {
            rows.iter()
                .filter(|r| r.seed == *seed)
                .map(|r| (r.update_count, f(r)))
                .collect()
        };
        chart
            .draw_series(LineSeries::new(pts(|r| r.tp_diff), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("throughput, seed {seed}"))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        chart
            .draw_series(DashedLineSeries::new(pts(|r| r.jfi_diff), 6, 4, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("fairness, seed {seed}"))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(1)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.svg` under `out_dir`.
pub fn emit_results(logs: &[RunLog], out_dir: impl AsRef<Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let rows = rows(logs);
    if rows.is_empty() {
        return Err(Error::Empty("no evaluations to write".into()));
    }
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let svg_path = out_dir.join(format!("{stem}.svg"));
    write_csv(&rows, &csv_path)?;
    plot_svg(&rows, &svg_path, stem)?;
    Ok((csv_path, svg_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::eval::EvalRecord;

    fn log(seed: u64, n: u64) -> RunLog {
        RunLog {
            seed,
            agent: 0,
            evals: (0..n)
                .map(|k| EvalRecord {
                    update_count: k * 50,
                    tp_diff: -0.1 + 0.01 * k as f64,
                    jfi_diff: 0.05 - 0.01 * k as f64,
                    per_seed: Vec::new(),
                })
                .collect(),
            rewards: vec![0.5, 0.75],
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let logs = [log(0, 3), log(1, 3)];
        let (csv_path, svg_path) = emit_results(&logs, dir.path(), "results").unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with("update_count,tp_diff,jfi_diff,seed\n"));
        assert_eq!(text.lines().count(), 1 + 6);
        assert_eq!(read_csv(&csv_path).unwrap(), rows(&logs));
        assert!(std::fs::read_to_string(svg_path).unwrap().contains("<svg"));
    }

    #[test]
    fn empty_log_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_results(&[log(0, 0)], dir.path(), "results").unwrap_err();
        assert!(matches!(err, Error::Empty(_)));
        assert!(!dir.path().join("results.csv").exists());
    }

    #[test]
    fn rewards_csv_counts_updates_from_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_rewards_csv(&[log(4, 1)], &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "update_count,mean_reward,seed\n1,0.5,4\n2,0.75,4\n");
    }
}
