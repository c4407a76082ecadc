use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BenchOutcome, MetricsReport, SweepPoint, METRIC_NAMES};
use crate::error::{Error, Result};
use crate::jsonl;

pub const REPORTS_FILE: &str = "reports.jsonl";
pub const TABLE_FILE: &str = "report.md";
pub const SWEEP_FILE: &str = "sweep.jsonl";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_SVG: &str = "sweep.svg";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RAW_DIR: &str = "raw";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Table,
    Plot,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            "plot" => Ok(ReportFormat::Plot),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

const HEADERS: [&str; 7] = ["R@8", "MRR", "c@1", "LUAR dist", "SBERT", "CoLA", "LenRatio"];

/// Markdown table, one row per system in `system_id` order.
pub fn render_table(reports: &[MetricsReport]) -> String {
    let mut sorted: Vec<&MetricsReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.system_id.cmp(&b.system_id));
    let mut out = format!("| system | {} |\n", HEADERS.join(" | "));
    out.push_str(&format!("|---{}|\n", "|---:".repeat(HEADERS.len())));
    for r in sorted {
        let cells: Vec<String> = METRIC_NAMES
            .iter()
            .map(|m| match r.metric(m) {
                Some(v) => format!("{v:.1}"),
                None => "skipped".to_string(),
            })
            .collect();
        let _ = writeln!(out, "| {} | {} |", r.system_id, cells.join(" | "));
    }
    out
}

/// Writes `reports.jsonl` (sorted by system id) and `report.md`; returns
/// the written paths.
pub fn emit_report(dir: &Path, reports: &[MetricsReport]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sorted = reports.to_vec();
    sorted.sort_by(|a, b| a.system_id.cmp(&b.system_id));
    let json = dir.join(REPORTS_FILE);
    jsonl::write(&json, &sorted)?;
    let table = dir.join(TABLE_FILE);
    std::fs::write(&table, render_table(&sorted)).map_err(|e| Error::io(&table, e))?;
    Ok(vec![json, table])
}

/// Writes a whole bench run: manifest, reports, table, and per-system raw
/// adversary outputs under `raw/<system>.{retrieval,verification}.jsonl`.
pub fn write_run(dir: &Path, outcome: &BenchOutcome) -> Result<()> {
    emit_report(dir, &outcome.reports)?;
    let manifest = dir.join(MANIFEST_FILE);
    let body = serde_json::to_string_pretty(&outcome.manifest)? + "\n";
    std::fs::write(&manifest, body).map_err(|e| Error::io(&manifest, e))?;
    let raw = dir.join(RAW_DIR);
    std::fs::create_dir_all(&raw).map_err(|e| Error::io(&raw, e))?;
    for (id, sys) in &outcome.raw {
        jsonl::write(raw.join(format!("{id}.retrieval.jsonl")), &sys.retrieval)?;
        jsonl::write(raw.join(format!("{id}.verification.jsonl")), &sys.verification)?;
    }
    Ok(())
}

pub fn read_reports(dir: &Path) -> Result<Vec<MetricsReport>> {
    jsonl::read(dir.join(REPORTS_FILE))
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("comments_per_profile,r_at_8,mrr,c_at_1\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.comments_per_profile, p.r_at_8, p.mrr, p.c_at_1);
    }
    out
}

/// R@8 and c@1 against profile length, log2 x axis.
pub fn plot_sweep(path: &Path, title: &str, points: &[SweepPoint]) -> Result<()> {
    let plot_err = |e: &dyn std::fmt::Display| Error::Plot(e.to_string());
    let root = SVGBackend::new(path, (640, 420)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let max_x = points.iter().map(|p| p.comments_per_profile).max().unwrap_or(1).max(2) as f64;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(44)
        .build_cartesian_2d(0f64..max_x.log2(), 0f64..100f64)
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc("comments per profile")
        .y_desc("%")
        .x_label_formatter(&|x| format!("{}", 2f64.powf(*x).round()))
        .draw()
        .map_err(|e| plot_err(&e))?;
    type Series = (&'static str, RGBColor, fn(&SweepPoint) -> f64);
    let series: [Series; 2] = [("R@8", BLUE, |p| p.r_at_8), ("c@1", RED, |p| p.c_at_1)];
    for (label, color, f) in series {
        let xy: Vec<(f64, f64)> = points
            .iter()
            .map(|p| ((p.comments_per_profile as f64).log2(), f(p)))
            .collect();
        chart
            .draw_series(LineSeries::new(xy.clone(), color.stroke_width(2)))
            .map_err(|e| plot_err(&e))?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
        chart
            .draw_series(xy.into_iter().map(|c| Circle::new(c, 3, color.filled())))
            .map_err(|e| plot_err(&e))?;
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))?;
    Ok(())
}

/// Writes `sweep.jsonl`, `sweep.csv` and `sweep.svg`.
pub fn emit_sweep(dir: &Path, system_id: &str, points: &[SweepPoint]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = dir.join(SWEEP_FILE);
    jsonl::write(&json, points)?;
    let csv = dir.join(SWEEP_CSV);
    std::fs::write(&csv, sweep_csv(points)).map_err(|e| Error::io(&csv, e))?;
    let svg = dir.join(SWEEP_SVG);
    plot_sweep(&svg, &format!("{system_id}: attack strength vs profile length"), points)?;
    Ok(vec![json, csv, svg])
}

pub fn read_sweep(dir: &Path) -> Result<Vec<SweepPoint>> {
    jsonl::read(dir.join(SWEEP_FILE))
}
