//! Deterministic CSV and JSON report writers. Floats print with Rust's
//! shortest-round-trip formatting, so identical runs produce identical bytes
//! regardless of worker count.

use super::{ExperimentReport, VolumeRadiusReport};
use serde::Serialize;
use std::io::Write;

pub const EXPERIMENT_CSV_HEADER: &str = "trial,n,N,body,l_exact,l1_bound_raw,l2_bound,\
facet_l1,facet_l2sq,vol_radius,seed,cell,l_normalized,vertex_count,coplanar_faces,stream";

pub const VOLUME_RADIUS_CSV_HEADER: &str = "cell,trial,n,N,body,vol_radius_cone,\
vol_radius_uniform,normalizer_a,normalizer_b,ratio_a,ratio_b,inclusion_ok,seed,stream";

/// One row per successful trial, in deterministic (cell, trial) order.
pub fn write_experiment_csv<W: Write>(report: &ExperimentReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{EXPERIMENT_CSV_HEADER}")?;
    let mut rows: Vec<&super::TrialRow> = report.rows.iter().collect();
    rows.sort_by_key(|r| (r.cell, r.trial));
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.n,
            r.big_n,
            r.body,
            r.chain.l_exact,
            r.chain.l1_bound_raw,
            r.chain.l2_bound,
            r.chain.facet_l1,
            r.chain.facet_l2sq,
            r.chain.volume_radius,
            r.seed,
            r.cell,
            r.l_normalized,
            r.vertex_count,
            r.coplanar_faces,
            r.stream
        )?;
    }
    Ok(())
}

pub fn write_volume_radius_csv<W: Write>(
    report: &VolumeRadiusReport,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "{VOLUME_RADIUS_CSV_HEADER}")?;
    let mut rows: Vec<&super::VolumeRadiusRow> = report.rows.iter().collect();
    rows.sort_by_key(|r| (r.cell, r.trial));
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cell,
            r.trial,
            r.n,
            r.big_n,
            r.body,
            r.vol_radius_cone,
            r.vol_radius_uniform,
            r.normalizer_a,
            r.normalizer_b,
            r.ratio_a,
            r.ratio_b,
            r.inclusion_ok,
            r.seed,
            r.stream
        )?;
    }
    Ok(())
}

/// The JSON summary: everything except the per-trial rows.
#[derive(Serialize)]
struct ExperimentSummary<'a> {
    mode: &'a super::ExperimentMode,
    family: &'a str,
    master_seed: u64,
    warnings: &'a [String],
    failures: &'a [String],
    cells: &'a [super::CellSummary],
    trends: &'a [super::TrendCheck],
    max_l: f64,
    rows: usize,
    pass: bool,
}

pub fn write_experiment_summary<W: Write>(
    report: &ExperimentReport,
    w: W,
) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(
        w,
        &ExperimentSummary {
            mode: &report.mode,
            family: &report.family,
            master_seed: report.master_seed,
            warnings: &report.warnings,
            failures: &report.failures,
            cells: &report.cells,
            trends: &report.trends,
            max_l: report.max_l,
            rows: report.rows.len(),
            pass: report.pass,
        },
    )
}

#[derive(Serialize)]
struct VolumeRadiusSummaryJson<'a> {
    family: &'a str,
    master_seed: u64,
    failures: &'a [String],
    summaries: &'a [super::VolumeRadiusSummary],
    rows: usize,
    pass: bool,
}

pub fn write_volume_radius_summary<W: Write>(
    report: &VolumeRadiusReport,
    w: W,
) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(
        w,
        &VolumeRadiusSummaryJson {
            family: &report.family,
            master_seed: report.master_seed,
            failures: &report.failures,
            summaries: &report.summaries,
            rows: report.rows.len(),
            pass: report.pass,
        },
    )
}
