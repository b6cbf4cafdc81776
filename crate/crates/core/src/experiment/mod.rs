//! Config-driven experiment runs: sample cone points on an
//! isotropic-normalized body, build the symmetric hull, evaluate the bound
//! chain, and summarize trends across the (n, N) grid. Every trial draws
//! from a stream derived from (master seed, cell, trial), so reports are
//! byte-identical across worker counts.

pub mod report;
pub mod suite;

use crate::body::{BodyError, BodySpec};
use crate::concentration::body_label;
use crate::hull::MAX_EXACT_DIM;
use crate::isotropy::{self, BoundChain, IsotropyError, L1Mode};
use crate::sampling::{self, derive_stream, SampleError, StreamRng};
use crate::stats;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const TAG_TRIAL: u64 = 0x7431;
const TAG_L1MC: u64 = 0x7432;
const TAG_BOOTSTRAP: u64 = 0x7433;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Isotropy(#[from] IsotropyError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// The body family an experiment samples from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BodyFamily {
    L1Ball,
    Cube,
    LpBall { p: f64 },
    RotatedCube { rotation_seed: u64 },
}

impl BodyFamily {
    pub fn body(&self, dim: usize) -> Result<BodySpec, BodyError> {
        match self {
            BodyFamily::L1Ball => Ok(BodySpec::l1_ball(dim)),
            BodyFamily::Cube => Ok(BodySpec::cube(dim)),
            BodyFamily::LpBall { p } => BodySpec::lp_ball(crate::body::PNorm::Finite(*p), dim),
            BodyFamily::RotatedCube { rotation_seed } => {
                BodySpec::rotated_cube(dim, *rotation_seed)
            }
        }
    }
}

/// One entry of the N schedule, resolved per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleEntry {
    TwoN,
    FourN,
    NSquared,
    NLogN,
    Fixed(usize),
}

impl ScheduleEntry {
    pub fn resolve(&self, n: usize) -> usize {
        match self {
            ScheduleEntry::TwoN => 2 * n,
            ScheduleEntry::FourN => 4 * n,
            ScheduleEntry::NSquared => n * n,
            ScheduleEntry::NLogN => ((n as f64) * (n as f64).ln()).ceil() as usize,
            ScheduleEntry::Fixed(v) => *v,
        }
    }
}

impl Serialize for ScheduleEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ScheduleEntry::TwoN => s.serialize_str("2n"),
            ScheduleEntry::FourN => s.serialize_str("4n"),
            ScheduleEntry::NSquared => s.serialize_str("n^2"),
            ScheduleEntry::NLogN => s.serialize_str("nlogn"),
            ScheduleEntry::Fixed(v) => s.serialize_u64(*v as u64),
        }
    }
}

impl<'de> Deserialize<'de> for ScheduleEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ScheduleEntry::Fixed(v as usize)),
            Raw::Str(s) => match s.as_str() {
                "2n" => Ok(ScheduleEntry::TwoN),
                "4n" => Ok(ScheduleEntry::FourN),
                "n^2" | "n2" => Ok(ScheduleEntry::NSquared),
                "nlogn" | "n log n" => Ok(ScheduleEntry::NLogN),
                other => Err(D::Error::custom(format!("unknown schedule entry {other:?}"))),
            },
        }
    }
}

fn default_mc_samples() -> usize {
    4096
}

fn default_subset_budget() -> usize {
    10_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub family: BodyFamily,
    pub dims: Vec<usize>,
    pub n_schedule: Vec<ScheduleEntry>,
    pub trials: usize,
    pub master_seed: u64,
    /// Exact geometry path (hull facet enumeration); requires n ≤ 8.
    #[serde(default = "default_true")]
    pub exact: bool,
    /// Monte Carlo samples for `∫‖x‖₁` when n > 4.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Budget for sampled subset sign-sum maxima.
    #[serde(default = "default_subset_budget")]
    pub subset_budget: usize,
    /// Worker threads; 0 picks the rayon default.
    #[serde(default)]
    pub threads: usize,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<Vec<String>, ExperimentError> {
        if self.dims.is_empty() {
            return Err(ExperimentError::Config("dims must be nonempty".into()));
        }
        if self.n_schedule.is_empty() {
            return Err(ExperimentError::Config("n_schedule must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(ExperimentError::Config("trials must be positive".into()));
        }
        let mut warnings = Vec::new();
        for &n in &self.dims {
            if self.exact && n > MAX_EXACT_DIM {
                return Err(ExperimentError::Config(format!(
                    "exact path requires n ≤ {MAX_EXACT_DIM}, got {n}"
                )));
            }
            for entry in &self.n_schedule {
                let count = entry.resolve(n);
                if count <= n {
                    return Err(ExperimentError::Config(format!(
                        "cell (n = {n}, N = {count}) violates the standing assumption N > n"
                    )));
                }
                let cap = (n as f64).sqrt().exp();
                if (count as f64) > cap {
                    warnings.push(format!(
                        "cell (n = {n}, N = {count}) leaves the general-case hypothesis \
                         N ≤ e^√n ≈ {cap:.1}; results outside the proven regime are \
                         informative but not covered by it"
                    ));
                }
            }
        }
        Ok(warnings)
    }

    fn pool(&self) -> rayon::ThreadPool {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if self.threads > 0 {
            builder = builder.num_threads(self.threads);
        }
        builder.build().expect("thread pool")
    }
}

/// Which theorem-shape gate applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentMode {
    /// Unconditional bodies: `L_{K_N}` itself must show no growth in N.
    Unconditional,
    /// General bodies: `L_{K_N}/√(log(2N/n))` must show no growth in N.
    General,
}

/// One successful trial.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub cell: usize,
    pub trial: usize,
    pub n: usize,
    pub big_n: usize,
    pub body: String,
    #[serde(flatten)]
    pub chain: BoundChain,
    /// `l_exact / √(log(2N/n))`, the general-case normalizer.
    pub l_normalized: f64,
    pub vertex_count: usize,
    pub coplanar_faces: bool,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n: usize,
    pub big_n: usize,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub cell_pass: bool,
    pub median_l: f64,
    pub p99_l: f64,
    pub max_l: f64,
    pub median_l_normalized: f64,
    pub p99_l_normalized: f64,
    pub median_volume_radius: f64,
    /// Quantiles of `l_exact / l1_bound_raw`: an empirical estimate of the
    /// unnamed absolute constant in the 1-norm bound.
    pub median_c_estimate: f64,
    pub max_c_estimate: f64,
    /// Fraction of trials where all 2N symmetrized points are vertices.
    pub full_vertex_fraction: f64,
}

/// A Theil-Sen slope with its bootstrap 95% band.
#[derive(Clone, Debug, Serialize)]
pub struct TrendCheck {
    pub n: usize,
    pub metric: String,
    pub slope: f64,
    pub band: (f64, f64),
    /// Passes when the band contains zero or only negative values.
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub mode: ExperimentMode,
    pub family: String,
    pub master_seed: u64,
    pub warnings: Vec<String>,
    pub rows: Vec<TrialRow>,
    pub failures: Vec<String>,
    pub cells: Vec<CellSummary>,
    pub trends: Vec<TrendCheck>,
    pub max_l: f64,
    pub pass: bool,
}

/// Theorem-shape run for unconditional bodies.
pub fn run_unconditional_experiment(
    config: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    run_experiment(config, ExperimentMode::Unconditional)
}

/// Theorem-shape run for general (possibly non-unconditional) bodies.
pub fn run_general_experiment(
    config: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    run_experiment(config, ExperimentMode::General)
}

pub fn run_experiment(
    config: &ExperimentConfig,
    mode: ExperimentMode,
) -> Result<ExperimentReport, ExperimentError> {
    let warnings = config.validate()?;
    // Pre-normalize one body per dimension.
    let mut bodies: Vec<(usize, BodySpec)> = Vec::new();
    for &n in &config.dims {
        let raw = config.family.body(n)?;
        if mode == ExperimentMode::Unconditional && !raw.is_unconditional() {
            return Err(ExperimentError::Config(format!(
                "unconditional experiment requires an unconditional body, got {}",
                body_label(&raw)
            )));
        }
        bodies.push((n, raw.isotropic_normalize()?));
    }

    // The (cell, trial) grid, fully independent trials.
    struct CellSpec<'a> {
        cell: usize,
        n: usize,
        big_n: usize,
        body: &'a BodySpec,
    }
    let mut cells: Vec<CellSpec> = Vec::new();
    for (dim_idx, &n) in config.dims.iter().enumerate() {
        for entry in &config.n_schedule {
            cells.push(CellSpec {
                cell: cells.len(),
                n,
                big_n: entry.resolve(n),
                body: &bodies[dim_idx].1,
            });
        }
    }

    let master = config.master_seed;
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .flat_map(|c| (0..config.trials).map(move |t| (c.cell, t)))
        .collect();
    let pool = config.pool();
    let results: Vec<Result<TrialRow, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell_idx, trial)| {
                let cell = &cells[cell_idx];
                run_one_trial(config, master, cell.cell, trial, cell.n, cell.big_n, cell.body)
                    .map_err(|e| format!("cell {cell_idx} trial {trial}: {e}"))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(e),
        }
    }

    let cells_summary: Vec<CellSummary> = cells
        .iter()
        .map(|c| summarize_cell(c.cell, c.n, c.big_n, config.trials, &rows))
        .collect();

    let trends = trend_checks(config, mode, &cells_summary, &rows);
    let max_l = rows.iter().map(|r| r.chain.l_exact).fold(0.0, f64::max);
    let pass = cells_summary.iter().all(|c| c.cell_pass) && trends.iter().all(|t| t.pass);
    Ok(ExperimentReport {
        mode,
        family: serde_json::to_string(&config.family).unwrap_or_default(),
        master_seed: master,
        warnings,
        rows,
        failures,
        cells: cells_summary,
        trends,
        max_l,
        pass,
    })
}

fn run_one_trial(
    config: &ExperimentConfig,
    master: u64,
    cell: usize,
    trial: usize,
    n: usize,
    big_n: usize,
    body: &BodySpec,
) -> Result<TrialRow, ExperimentError> {
    let stream = StreamRng::new(master, derive_stream(&[TAG_TRIAL, cell as u64, trial as u64]));
    let batch = sampling::sample_cone_boundary(body, big_n, stream)?;
    let poly = batch.build_hull().map_err(IsotropyError::from)?;
    let l1_mode = if n <= crate::hull::measures::MAX_L1_EXACT_DIM {
        L1Mode::Exact
    } else {
        L1Mode::MonteCarlo {
            samples: config.mc_samples,
            stream: StreamRng::new(master, derive_stream(&[TAG_L1MC, cell as u64, trial as u64])),
        }
    };
    let chain = isotropy::bound_chain(&poly, l1_mode)?;
    let log_ratio = (2.0 * big_n as f64 / n as f64).ln();
    Ok(TrialRow {
        cell,
        trial,
        n,
        big_n,
        body: body_label(body),
        l_normalized: chain.l_exact / log_ratio.sqrt(),
        vertex_count: poly.vertex_count(),
        coplanar_faces: poly.has_coplanar_faces(),
        chain,
        seed: master,
        stream: stream.stream_id,
    })
}

fn summarize_cell(
    cell: usize,
    n: usize,
    big_n: usize,
    trials: usize,
    rows: &[TrialRow],
) -> CellSummary {
    let cell_rows: Vec<&TrialRow> = rows.iter().filter(|r| r.cell == cell).collect();
    let ls: Vec<f64> = cell_rows.iter().map(|r| r.chain.l_exact).collect();
    let lns: Vec<f64> = cell_rows.iter().map(|r| r.l_normalized).collect();
    let vrs: Vec<f64> = cell_rows.iter().map(|r| r.chain.volume_radius).collect();
    let cs: Vec<f64> = cell_rows
        .iter()
        .map(|r| r.chain.l_exact / r.chain.l1_bound_raw)
        .collect();
    let trials_ok = cell_rows.len();
    let trials_failed = trials - trials_ok;
    let full_vertex = cell_rows
        .iter()
        .filter(|r| r.vertex_count == 2 * r.big_n)
        .count();
    let q = |v: &[f64], p: f64| {
        if v.is_empty() {
            f64::NAN
        } else {
            stats::quantile(&stats::sorted_copy(v), p)
        }
    };
    CellSummary {
        cell,
        n,
        big_n,
        trials_ok,
        trials_failed,
        // More than 1% failed trials fails the cell.
        cell_pass: (trials_failed as f64) <= 0.01 * trials as f64,
        median_l: q(&ls, 0.5),
        p99_l: q(&ls, 0.99),
        max_l: ls.iter().copied().fold(f64::NAN, f64::max),
        median_l_normalized: q(&lns, 0.5),
        p99_l_normalized: q(&lns, 0.99),
        median_volume_radius: q(&vrs, 0.5),
        median_c_estimate: q(&cs, 0.5),
        max_c_estimate: cs.iter().copied().fold(f64::NAN, f64::max),
        full_vertex_fraction: if trials_ok == 0 {
            f64::NAN
        } else {
            full_vertex as f64 / trials_ok as f64
        },
    }
}

/// Theil-Sen slope of the per-cell quantile statistic against `log log N`,
/// with a bootstrap band from resampling trials within each cell.
fn trend_checks(
    config: &ExperimentConfig,
    mode: ExperimentMode,
    cells: &[CellSummary],
    rows: &[TrialRow],
) -> Vec<TrendCheck> {
    let metric: fn(&TrialRow) -> f64 = match mode {
        ExperimentMode::Unconditional => |r| r.chain.l_exact,
        ExperimentMode::General => |r| r.l_normalized,
    };
    let base_name = match mode {
        ExperimentMode::Unconditional => "l_vs_loglogN",
        ExperimentMode::General => "l_normalized_vs_loglogN",
    };
    let mut checks = Vec::new();
    for &n in &config.dims {
        // Cells of this dimension with their trial metric values.
        let mut cell_values: Vec<(f64, Vec<f64>)> = Vec::new();
        for c in cells.iter().filter(|c| c.n == n) {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.cell == c.cell)
                .map(metric)
                .collect();
            if !values.is_empty() {
                cell_values.push(((c.big_n as f64).ln().ln(), values));
            }
        }
        if cell_values.len() < 2 {
            continue;
        }
        // Trend of the per-cell median (the grid gate) and of the 99th
        // percentile (the high-quantile form of the no-growth assertion).
        for (quantile_name, q) in [("median", 0.5f64), ("p99", 0.99)] {
            let points: Vec<(f64, f64)> = cell_values
                .iter()
                .map(|(x, v)| (*x, stats::quantile(&stats::sorted_copy(v), q)))
                .collect();
            let slope = stats::theil_sen_slope(&points).unwrap_or(0.0);
            // Bootstrap the slope by resampling trials within each cell.
            let mut rng = StreamRng::new(
                config.master_seed,
                derive_stream(&[TAG_BOOTSTRAP, n as u64, q.to_bits()]),
            )
            .rng();
            let mut slopes = Vec::with_capacity(200);
            let mut buf = Vec::new();
            for _ in 0..200 {
                let resampled: Vec<(f64, f64)> = cell_values
                    .iter()
                    .map(|(x, v)| {
                        buf.clear();
                        buf.extend((0..v.len()).map(|_| v[rng.random_range(0..v.len())]));
                        buf.sort_by(|a: &f64, b| a.partial_cmp(b).expect("non-NaN"));
                        (*x, stats::quantile(&buf, q))
                    })
                    .collect();
                if let Some(s) = stats::theil_sen_slope(&resampled) {
                    slopes.push(s);
                }
            }
            slopes.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN"));
            let band = (
                stats::quantile(&slopes, 0.025),
                stats::quantile(&slopes, 0.975),
            );
            checks.push(TrendCheck {
                n,
                metric: format!("{quantile_name}_{base_name}"),
                slope,
                band,
                // Pass when the band contains 0 or lies entirely below it.
                pass: band.0 <= 0.0,
            });
        }
    }
    checks
}

/// One volume-radius trial at a specific prefix size N.
#[derive(Clone, Debug, Serialize)]
pub struct VolumeRadiusRow {
    pub cell: usize,
    pub trial: usize,
    pub n: usize,
    pub big_n: usize,
    pub body: String,
    /// `|K_N|^{1/n}` for the cone hull.
    pub vol_radius_cone: f64,
    /// `|K̃_N|^{1/n}` for the uniform hull.
    pub vol_radius_uniform: f64,
    /// `min{√(log(2N/n)/n), 1}`.
    pub normalizer_a: f64,
    /// `L_K √(log(2N/n)/n)`.
    pub normalizer_b: f64,
    pub ratio_a: f64,
    pub ratio_b: f64,
    /// Realization-wise inclusion `conv{±Y} ⊆ conv{±X}` (membership of every
    /// uniform point, and `|K̃_N| ≤ |K_N|`).
    pub inclusion_ok: bool,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeRadiusSummary {
    pub n: usize,
    pub big_n: usize,
    pub trials: usize,
    pub inclusion_fraction: f64,
    pub ratio_a_p01: f64,
    pub ratio_a_median: f64,
    /// Median volume radius is nondecreasing along the nested N schedule.
    pub median_vol_radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeRadiusReport {
    pub family: String,
    pub master_seed: u64,
    pub rows: Vec<VolumeRadiusRow>,
    pub failures: Vec<String>,
    pub summaries: Vec<VolumeRadiusSummary>,
    /// All inclusions held and per-trial volume radii were monotone in N.
    pub pass: bool,
}

/// Volume-radius comparison over coupled samples with nested prefixes.
pub fn run_volume_radius_check(
    config: &ExperimentConfig,
) -> Result<VolumeRadiusReport, ExperimentError> {
    config.validate()?;
    let master = config.master_seed;
    let mut bodies: Vec<(usize, BodySpec, f64)> = Vec::new();
    for &n in &config.dims {
        let body = config.family.body(n)?.isotropic_normalize()?;
        let l_k = body.isotropic_constant()?;
        bodies.push((n, body, l_k));
    }
    let pool = config.pool();

    struct TrialOutput {
        rows: Vec<VolumeRadiusRow>,
        monotone: bool,
    }

    let jobs: Vec<(usize, usize)> = (0..bodies.len())
        .flat_map(|b| (0..config.trials).map(move |t| (b, t)))
        .collect();
    let results: Vec<Result<TrialOutput, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(body_idx, trial)| {
                let (n, ref body, l_k) = bodies[body_idx];
                let mut counts: Vec<usize> =
                    config.n_schedule.iter().map(|e| e.resolve(n)).collect();
                counts.sort_unstable();
                counts.dedup();
                let max_n = *counts.last().expect("nonempty schedule");
                let stream = StreamRng::new(
                    master,
                    derive_stream(&[TAG_TRIAL, body_idx as u64, trial as u64]),
                );
                let run = || -> Result<TrialOutput, ExperimentError> {
                    let (uniform, cone) = sampling::sample_coupled_pair(body, max_n, stream)?;
                    let mut rows = Vec::new();
                    let mut prev_radius = 0.0;
                    let mut monotone = true;
                    for (ci, &count) in counts.iter().enumerate() {
                        let cone_hull = crate::hull::build_hull(n, &cone.points[..count])
                            .map_err(IsotropyError::from)?;
                        let uni_hull = crate::hull::build_hull(n, &uniform.points[..count])
                            .map_err(IsotropyError::from)?;
                        let vr_cone = cone_hull.volume().powf(1.0 / n as f64);
                        let vr_uni = uni_hull.volume().powf(1.0 / n as f64);
                        let log_term = ((2.0 * count as f64 / n as f64).ln() / n as f64).sqrt();
                        let normalizer_a = log_term.min(1.0);
                        let normalizer_b = l_k * log_term;
                        let inclusion_ok = uni_hull.volume() <= cone_hull.volume()
                            && uniform.points[..count]
                                .iter()
                                .all(|y| cone_hull.contains(y, 1e-9));
                        if vr_cone < prev_radius {
                            monotone = false;
                        }
                        prev_radius = vr_cone;
                        rows.push(VolumeRadiusRow {
                            cell: body_idx * counts.len() + ci,
                            trial,
                            n,
                            big_n: count,
                            body: body_label(body),
                            vol_radius_cone: vr_cone,
                            vol_radius_uniform: vr_uni,
                            normalizer_a,
                            normalizer_b,
                            ratio_a: vr_cone / normalizer_a,
                            ratio_b: vr_cone / normalizer_b,
                            inclusion_ok,
                            seed: master,
                            stream: stream.stream_id,
                        });
                    }
                    Ok(TrialOutput { rows, monotone })
                };
                run().map_err(|e| format!("body {body_idx} trial {trial}: {e}"))
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut all_monotone = true;
    for r in results {
        match r {
            Ok(out) => {
                all_monotone &= out.monotone;
                rows.extend(out.rows);
            }
            Err(e) => failures.push(e),
        }
    }

    let mut summaries = Vec::new();
    for (body_idx, &(n, _, _)) in bodies.iter().enumerate() {
        let mut counts: Vec<usize> = config.n_schedule.iter().map(|e| e.resolve(n)).collect();
        counts.sort_unstable();
        counts.dedup();
        for (ci, &count) in counts.iter().enumerate() {
            let cell = body_idx * counts.len() + ci;
            let cell_rows: Vec<&VolumeRadiusRow> =
                rows.iter().filter(|r| r.cell == cell && r.n == n).collect();
            if cell_rows.is_empty() {
                continue;
            }
            let ratios: Vec<f64> = cell_rows.iter().map(|r| r.ratio_a).collect();
            let sorted = stats::sorted_copy(&ratios);
            let vrs: Vec<f64> = cell_rows.iter().map(|r| r.vol_radius_cone).collect();
            summaries.push(VolumeRadiusSummary {
                n,
                big_n: count,
                trials: cell_rows.len(),
                inclusion_fraction: cell_rows.iter().filter(|r| r.inclusion_ok).count() as f64
                    / cell_rows.len() as f64,
                ratio_a_p01: stats::quantile(&sorted, 0.01),
                ratio_a_median: stats::quantile(&sorted, 0.5),
                median_vol_radius: stats::median(&vrs),
            });
        }
    }

    let pass = failures.is_empty()
        && all_monotone
        && summaries.iter().all(|s| s.inclusion_fraction == 1.0)
        && summaries.iter().all(|s| s.ratio_a_p01 > 0.0);
    Ok(VolumeRadiusReport {
        family: serde_json::to_string(&config.family).unwrap_or_default(),
        master_seed: master,
        rows,
        failures,
        summaries,
        pass,
    })
}
