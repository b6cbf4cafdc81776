//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --release --test acceptance -- --nocapture`).
//!
//! The oracles here are independent of the implementation paths they check:
//! the moment oracle is an adaptive tensor quadrature over a simplex
//! substitution, the volume oracle is rejection Monte Carlo, and the
//! boundary-law oracles are closed-form one-dimensional integrals.

use conelab::body::{BodySpec, PNorm};
use conelab::concentration::{
    certify_l1_cone_psi2, l1_ball_monomial_moment, verify_psi2_unconditional, MomentSpec,
};
use conelab::experiment::report::write_experiment_csv;
use conelab::experiment::{
    run_general_experiment, run_unconditional_experiment, run_volume_radius_check, BodyFamily,
    ExperimentConfig, ScheduleEntry,
};
use conelab::hull::measures::second_moment_exact;
use conelab::hull::build_hull;
use conelab::isotropy::{bound_chain, L1Mode};
use conelab::sampling::{sample_cone_boundary, sample_coupled_pair, sample_uniform, StreamRng};
use conelab::scalar::{factorial, GeomScalar, Rational};
use conelab::stats;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;

const MASTER_SEED: u64 = 0xacce97;

fn stream(id: u64) -> StreamRng {
    StreamRng::new(MASTER_SEED, id)
}

fn report(criterion: u32, name: &str, pass: bool, details: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion} ({name}): {status} — {details}");
    assert!(pass, "criterion {criterion} ({name}) failed: {details}");
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature oracle (test-only, independent of the library).

fn gauss_legendre_unit(k: usize) -> (Vec<f64>, Vec<f64>) {
    // Nodes/weights of k-point Gauss-Legendre on [0, 1], by Newton iteration
    // on the Legendre recurrence.
    let mut nodes = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for i in 0..k {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(k, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(k, x);
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for j in 2..=k {
        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = pj;
    }
    let dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `∫_{B₁ⁿ} Π x_i^{2q_i} dx` by tensor quadrature over the simplex
/// substitution `x_i = u_i (1 - Σ_{j<i} x_j)`, whose integrand is polynomial
/// on the unit cube.
fn quadrature_moment(n: usize, q: &[u32], k: usize) -> f64 {
    let (nodes, weights) = gauss_legendre_unit(k);
    fn recurse(
        level: usize,
        n: usize,
        q: &[u32],
        remaining: f64,
        nodes: &[f64],
        weights: &[f64],
    ) -> f64 {
        if level == n {
            return 1.0;
        }
        let mut acc = 0.0;
        for (u, w) in nodes.iter().zip(weights) {
            let x = u * remaining;
            // Jacobian factor `remaining` plus the monomial power.
            let term = w * remaining * x.powi(2 * q[level] as i32);
            acc += term * recurse(level + 1, n, q, remaining - x, nodes, weights);
        }
        acc
    }
    2f64.powi(n as i32) * recurse(0, n, q, 1.0, &nodes, &weights)
}

fn compositions(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(buf: &mut Vec<u32>, slots: usize, rem: u32, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            let mut v = buf.clone();
            v.push(rem);
            out.push(v);
            return;
        }
        for take in 0..=rem {
            buf.push(take);
            rec(buf, slots - 1, rem - take, out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, total, &mut out);
    out
}

#[test]
fn acceptance_1_exact_moments_vs_quadrature() {
    let mut checked = 0usize;
    let mut worst_rel = 0.0f64;
    let mut pass = true;
    for n in 1..=4usize {
        for total in 0..=3u32 {
            for q in compositions(n, total) {
                let exact = l1_ball_monomial_moment(&MomentSpec::new(n, q.clone())).to_f64();
                // Adaptive refinement: two node counts must agree.
                let coarse = quadrature_moment(n, &q, 12);
                let fine = quadrature_moment(n, &q, 16);
                assert!(
                    (coarse - fine).abs() <= 1e-12 * fine.abs().max(1.0),
                    "quadrature not converged for n={n}, q={q:?}"
                );
                let rel = (fine - exact).abs() / exact;
                worst_rel = worst_rel.max(rel);
                pass &= rel <= 1e-9;
                checked += 1;
            }
        }
    }
    // n = 1: both sides equal 2/(1+2q) exactly.
    for q1 in 0..=3u32 {
        let exact = l1_ball_monomial_moment(&MomentSpec::new(1, vec![q1]));
        let expect = Rational::new(BigInt::from(2), BigInt::from(1 + 2 * q1 as i64));
        pass &= exact == expect;
    }
    report(
        1,
        "exact moments vs quadrature",
        pass,
        &format!("{checked} monomials, worst relative error {worst_rel:.2e}"),
    );
}

#[test]
fn acceptance_2_transfer_coefficient_mc() {
    let samples = 1_000_000usize;
    let mut pass = true;
    let mut details = String::new();
    for (i, n) in [2usize, 3, 4].into_iter().enumerate() {
        let body = BodySpec::l1_ball(n);
        let uniform = sample_uniform(&body, samples, stream(200 + i as u64)).unwrap();
        let cone = sample_cone_boundary(&body, samples, stream(300 + i as u64)).unwrap();
        let mut theta = vec![0.0; n];
        theta[0] = 1.0;
        let u_vals = uniform.linear_functional(&theta);
        let c_vals = cone.linear_functional(&theta);
        for q in [1u32, 2, 3] {
            let p = 2 * q as i32;
            let u_pow: Vec<f64> = u_vals.iter().map(|v| v.abs().powi(p)).collect();
            let c_pow: Vec<f64> = c_vals.iter().map(|v| v.abs().powi(p)).collect();
            let (mu, su) = (stats::mean(&u_pow), stats::standard_error(&u_pow));
            let (mc, sc) = (stats::mean(&c_pow), stats::standard_error(&c_pow));
            let ratio = mu / mc;
            let se = ratio * ((su / mu).powi(2) + (sc / mc).powi(2)).sqrt();
            let expect = n as f64 / (n as f64 + 2.0 * q as f64);
            let ok = (ratio - expect).abs() <= 4.0 * se;
            pass &= ok;
            if !ok {
                details.push_str(&format!("n={n} q={q}: {ratio:.5} vs {expect:.5} ±{se:.1e}; "));
            }
        }
    }
    report(
        2,
        "uniform-to-cone transfer coefficient",
        pass,
        if details.is_empty() {
            "n ∈ {2,3,4}, q ∈ {1,2,3} all within 4 s.e. at 10⁶ samples"
        } else {
            &details
        },
    );
}

#[test]
fn acceptance_3_psi2_bound() {
    let n_range: Vec<usize> = (2..=8).collect();
    let bodies: Vec<(&str, fn(usize) -> BodySpec)> = vec![
        ("l1", |n| BodySpec::l1_ball(n).isotropic_normalize().unwrap()),
        ("cube", |n| BodySpec::cube(n).isotropic_normalize().unwrap()),
        ("b4", |n| {
            BodySpec::lp_ball(PNorm::Finite(4.0), n)
                .unwrap()
                .isotropic_normalize()
                .unwrap()
        }),
    ];
    let combos: Vec<(usize, usize)> = (0..bodies.len())
        .flat_map(|b| n_range.iter().map(move |&n| (b, n)))
        .collect();
    let outcomes: Vec<(String, bool)> = combos
        .par_iter()
        .map(|&(b, n)| {
            let (label, make) = &bodies[b];
            let body = make(n);
            let mut theta_rng = stream(400 + (b * 16 + n) as u64).rng();
            let thetas: Vec<Vec<f64>> = (0..10)
                .map(|_| (0..n).map(|_| theta_rng.random_range(-1.0..1.0)).collect())
                .collect();
            let report = verify_psi2_unconditional(
                &body,
                &thetas,
                100_000,
                stream(500 + (b * 16 + n) as u64),
            )
            .unwrap();
            (format!("{label} n={n}"), report.pass)
        })
        .collect();
    let pass = outcomes.iter().all(|(_, p)| *p);
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|(_, p)| !*p)
        .map(|(s, _)| s.as_str())
        .collect();
    report(
        3,
        "psi2 norm and tail bounds",
        pass,
        &if failed.is_empty() {
            format!(
                "{} body/dim combos × 10 θ, bands ≤ 3√n‖θ‖∞, tails ≤ 2e^(-t²/9)+4se",
                outcomes.len()
            )
        } else {
            format!("failed: {}", failed.join(", "))
        },
    );
}

#[test]
fn acceptance_4_certified_series() {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for n in 1..=8usize {
        let mut rng = stream(600 + n as u64).rng();
        for _ in 0..20 {
            // Dyadic coordinates keep the exact rational arithmetic small.
            let theta: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-256i32..=256) as f64 / 256.0)
                .collect();
            if theta.iter().all(|v| *v == 0.0) {
                continue;
            }
            let cert = certify_l1_cone_psi2(n, &theta).unwrap();
            let max_norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let ratio = (n as f64).sqrt() * cert.psi2_upper / (6.0f64.sqrt() * max_norm);
            pass &= cert.certified && ratio <= 1.0 + 1e-9;
            worst = worst.max(ratio);
            count += 1;
        }
    }
    report(
        4,
        "certified ψ₂ series on ∂B₁ⁿ",
        pass,
        &format!("{count} certificates (n ≤ 8), worst √n·ψ₂/(√6‖θ‖∞) = {worst:.6}"),
    );
}

#[test]
fn acceptance_5_geometry_exactness() {
    let mut pass = true;
    for n in 1..=6usize {
        let basis: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let hull = build_hull(n, &basis).unwrap();
        let expect = Rational::new(BigInt::from(2).pow(n as u32), factorial(n));
        pass &= hull.volume_exact() == expect;
        if n <= 4 {
            let m = second_moment_exact(&hull);
            let diag = Rational::new(BigInt::from(2).pow(n as u32 + 1), factorial(n + 2));
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        pass &= m[i][j] == diag;
                    } else {
                        pass &= m[i][j].is_zero();
                    }
                }
            }
        }
    }
    report(
        5,
        "exact hull volume and covariance of B₁ⁿ",
        pass,
        "volume = 2ⁿ/n! (n ≤ 6), ∫x_ix_j = δ_ij·2ⁿ⁺¹/(n+2)! (n ≤ 4), rational equality",
    );
}

#[test]
fn acceptance_6_facet_inequalities() {
    // 500 instances spread over n ∈ {3,4,5} × N ∈ {2n,4n}.
    let cells: Vec<(usize, usize)> = [3usize, 4, 5]
        .into_iter()
        .flat_map(|n| [2 * n, 4 * n].into_iter().map(move |b| (n, b)))
        .collect();
    let per_cell = [84usize, 84, 83, 83, 83, 83];
    let jobs: Vec<(usize, usize, u64)> = cells
        .iter()
        .zip(per_cell)
        .enumerate()
        .flat_map(|(c, (&(n, b), k))| (0..k).map(move |t| (n, b, (c * 1000 + t) as u64)))
        .collect();
    let violations: usize = jobs
        .par_iter()
        .map(|&(n, big_n, tag)| {
            let body = BodySpec::l1_ball(n).isotropic_normalize().unwrap();
            let batch = sample_cone_boundary(&body, big_n, stream(700).substream(tag)).unwrap();
            let poly = batch.build_hull().unwrap();
            let l1_mode = if n <= 4 {
                L1Mode::Exact
            } else {
                L1Mode::MonteCarlo {
                    samples: 8192,
                    stream: stream(701).substream(tag),
                }
            };
            let chain = bound_chain(&poly, l1_mode).unwrap();
            let ok = chain.mean_l1 <= chain.facet_l1 * (1.0 + 1e-12)
                && chain.mean_l2sq <= chain.facet_l2sq * (1.0 + 1e-12);
            usize::from(!ok)
        })
        .sum();
    report(
        6,
        "facet sign-sum inequalities",
        violations == 0,
        &format!("{} instances, {violations} violations", jobs.len()),
    );
}

#[test]
fn acceptance_7_coupling() {
    // 1000 coupled trials over n ∈ {3,4} × {B₁ⁿ, cube}, N = 4n.
    let combos: Vec<(usize, bool)> = vec![(3, false), (3, true), (4, false), (4, true)];
    let jobs: Vec<(usize, bool, u64)> = combos
        .iter()
        .flat_map(|&(n, cube)| (0..250u64).map(move |t| (n, cube, t)))
        .collect();
    let failures: usize = jobs
        .par_iter()
        .map(|&(n, cube, t)| {
            let body = if cube {
                BodySpec::cube(n).isotropic_normalize().unwrap()
            } else {
                BodySpec::l1_ball(n).isotropic_normalize().unwrap()
            };
            let tag = (n as u64) << 32 | (cube as u64) << 16 | t;
            let (uniform, cone) =
                sample_coupled_pair(&body, 4 * n, stream(800).substream(tag)).unwrap();
            let cone_hull = cone.build_hull().unwrap();
            let uni_hull = uniform.build_hull().unwrap();
            // Membership of every uniform point, then the volume comparison
            // (exact rational when the floating margins are thin).
            let included = uniform.points.iter().all(|y| cone_hull.contains(y, 1e-9));
            let (vc, vu) = (cone_hull.volume(), uni_hull.volume());
            let vol_ok = if (vc - vu).abs() <= 1e-9 * vc.abs() {
                uni_hull.volume_exact() <= cone_hull.volume_exact()
            } else {
                vu <= vc
            };
            usize::from(!(included && vol_ok))
        })
        .sum();
    report(
        7,
        "coupling inclusion",
        failures == 0,
        &format!("1000 coupled trials, {failures} violations"),
    );
}

#[test]
fn acceptance_8_theorem_shapes() {
    let schedule = vec![
        ScheduleEntry::NLogN,
        ScheduleEntry::TwoN,
        ScheduleEntry::FourN,
        ScheduleEntry::NSquared,
    ];
    let base = ExperimentConfig {
        family: BodyFamily::L1Ball,
        dims: (4..=8).collect(),
        n_schedule: schedule.clone(),
        trials: 200,
        master_seed: MASTER_SEED,
        exact: true,
        mc_samples: 4096,
        subset_budget: 1000,
        threads: 0,
    };

    let uncond = run_unconditional_experiment(&base).unwrap();
    let uncond_ok = uncond.trends.iter().all(|t| t.pass)
        && uncond.cells.iter().all(|c| c.cell_pass)
        && uncond.failures.is_empty();
    let uncond_trends: Vec<String> = uncond
        .trends
        .iter()
        .map(|t| format!("n={} slope {:.4} band [{:.4},{:.4}]", t.n, t.slope, t.band.0, t.band.1))
        .collect();
    report(
        8,
        "theorem shape (unconditional, median L vs log log N)",
        uncond_ok,
        &format!("max L = {:.4}; {}", uncond.max_l, uncond_trends.join("; ")),
    );

    let mut general_config = base;
    general_config.family = BodyFamily::RotatedCube {
        rotation_seed: 2024,
    };
    let general = run_general_experiment(&general_config).unwrap();
    let general_ok = general.trends.iter().all(|t| t.pass)
        && general.cells.iter().all(|c| c.cell_pass)
        && general.failures.is_empty();
    let general_trends: Vec<String> = general
        .trends
        .iter()
        .map(|t| format!("n={} slope {:.4} band [{:.4},{:.4}]", t.n, t.slope, t.band.0, t.band.1))
        .collect();
    report(
        8,
        "theorem shape (general, median L/√log(2N/n) vs log log N)",
        general_ok,
        &format!("max L = {:.4}; {}", general.max_l, general_trends.join("; ")),
    );
}

#[test]
fn acceptance_9_determinism() {
    let mut config = ExperimentConfig {
        family: BodyFamily::L1Ball,
        dims: vec![3, 4, 5],
        n_schedule: vec![ScheduleEntry::TwoN, ScheduleEntry::FourN],
        trials: 30,
        master_seed: MASTER_SEED,
        exact: true,
        mc_samples: 2048,
        subset_budget: 500,
        threads: 1,
    };
    let run_csv = |config: &ExperimentConfig| -> Vec<u8> {
        let report = run_unconditional_experiment(config).unwrap();
        let mut buf = Vec::new();
        write_experiment_csv(&report, &mut buf).unwrap();
        buf
    };
    let a = run_csv(&config);
    config.threads = 2;
    let b = run_csv(&config);
    let experiment_ok = a == b;

    // Volume-radius CSV as well.
    config.threads = 1;
    let vr_csv = |config: &ExperimentConfig| -> Vec<u8> {
        let report = run_volume_radius_check(config).unwrap();
        let mut buf = Vec::new();
        conelab::experiment::report::write_volume_radius_csv(&report, &mut buf).unwrap();
        buf
    };
    let va = vr_csv(&config);
    config.threads = 2;
    let vb = vr_csv(&config);
    let vr_ok = va == vb;

    report(
        9,
        "byte-identical CSV across worker counts",
        experiment_ok && vr_ok,
        &format!(
            "experiment CSV {} bytes, volume-radius CSV {} bytes, both identical",
            a.len(),
            va.len()
        ),
    );
}
