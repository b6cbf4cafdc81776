//! The verification suite: every invariant of the hull, isotropy and
//! concentration modules as an executable check with a pass/fail/widened
//! status. Exact-arithmetic ("hard") failures drive the nonzero exit code;
//! statistical checks at severely reduced sample counts degrade to a
//! widened-band report instead of failing.

use crate::body::BodySpec;
use crate::concentration::{
    self, body_label, certify_l1_cone_psi2, comparison_moments, empirical_orlicz_norm,
    transfer_identity, verify_psi1_general, verify_psi2_unconditional, verify_psi2_with_constant,
    Alpha, BernsteinVariant,
};
use crate::hull::measures::{self, SignSumNorm};
use crate::hull::{build_hull, SymmetricPolytope};
use crate::isotropy::{self, L1Mode, SubsetNorm};
use crate::sampling::{self, derive_stream, StreamRng};
use crate::scalar::{GeomScalar, Rational};
use num_traits::Zero;
use serde::Serialize;

/// Statistical checks below this sample count report WIDENED-BAND instead of
/// pass/fail.
pub const WIDENED_BAND_THRESHOLD: usize = 1000;

/// Frozen empirical cap for the ψ₁/L_K ratios across the shipped body
/// family: the observed maximum is ≈ 1.98 (n = 2, decreasing in n, stable
/// across bodies at 10⁵ samples), held with a 1.5× margin. The absolute
/// constant behind the ψ₁ estimate is estimated, never asserted.
pub const PSI1_RATIO_FROZEN_CAP: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    WidenedBand,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Hard checks are exact-arithmetic or deterministic identities; their
    /// failure sets the nonzero exit code.
    pub hard: bool,
    pub status: CheckStatus,
    pub details: serde_json::Value,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SuiteConfig {
    pub master_seed: u64,
    /// Sample count for the statistical checks.
    pub sample_count: usize,
    /// Instance count for the randomized exact checks.
    pub instances: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            master_seed: 20_260_810,
            sample_count: 50_000,
            instances: 40,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckOutcome>,
    pub hard_failures: usize,
    pub statistical_failures: usize,
    pub widened: usize,
    /// True when no hard check failed (the release criterion).
    pub pass: bool,
}

struct Ctx {
    config: SuiteConfig,
}

impl Ctx {
    fn stream(&self, tag: u64) -> StreamRng {
        StreamRng::new(self.config.master_seed, derive_stream(&[0x5017e, tag]))
    }

    fn statistical(&self, name: &str, pass: bool, details: serde_json::Value) -> CheckOutcome {
        let status = if self.config.sample_count < WIDENED_BAND_THRESHOLD {
            CheckStatus::WidenedBand
        } else if pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckOutcome {
            name: name.to_string(),
            hard: false,
            status,
            details,
        }
    }

    fn hard(&self, name: &str, pass: bool, details: serde_json::Value) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            hard: true,
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            details,
        }
    }

    fn error(&self, name: &str, hard: bool, err: String) -> CheckOutcome {
        CheckOutcome {
            name: name.to_string(),
            hard,
            status: CheckStatus::Fail,
            details: serde_json::json!({ "error": err }),
        }
    }
}

fn random_hulls(
    ctx: &Ctx,
    body: &BodySpec,
    big_n: usize,
    count: usize,
    tag: u64,
) -> Result<Vec<SymmetricPolytope>, String> {
    (0..count)
        .map(|trial| {
            let stream = ctx.stream(derive_stream(&[tag, trial as u64]));
            let batch = sampling::sample_cone_boundary(body, big_n, stream)
                .map_err(|e| e.to_string())?;
            batch.build_hull().map_err(|e| e.to_string())
        })
        .collect()
}

/// Run every suite check at the configured scale.
pub fn run_verification_suite(config: SuiteConfig) -> SuiteReport {
    let ctx = Ctx { config };
    let mut checks = Vec::new();

    checks.push(check_hull_b1_volume(&ctx));
    checks.push(check_hull_covariance_symmetry(&ctx));
    checks.push(check_hull_volume_monotonicity(&ctx));
    checks.extend(check_facet_inequalities_and_l2(&ctx));
    checks.push(check_subset_max_dominates(&ctx));
    checks.push(check_isotropic_scaling(&ctx));
    checks.push(check_lemma35_certificate(&ctx));
    checks.push(check_luxemburg_residual(&ctx));
    checks.push(check_bernstein_values(&ctx));
    checks.push(check_comparison_lemma(&ctx));
    checks.push(check_psi2_scaling(&ctx));
    checks.push(check_transfer_identity(&ctx));
    checks.push(check_psi2_unconditional(&ctx));
    checks.push(check_psi2_negative_control(&ctx));
    checks.push(check_psi1_bounded(&ctx));
    checks.push(check_sum_tail(&ctx));

    let hard_failures = checks
        .iter()
        .filter(|c| c.hard && c.status == CheckStatus::Fail)
        .count();
    let statistical_failures = checks
        .iter()
        .filter(|c| !c.hard && c.status == CheckStatus::Fail)
        .count();
    let widened = checks
        .iter()
        .filter(|c| c.status == CheckStatus::WidenedBand)
        .count();
    SuiteReport {
        config: ctx.config,
        checks,
        hard_failures,
        statistical_failures,
        widened,
        pass: hard_failures == 0,
    }
}

fn unit_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn check_hull_b1_volume(ctx: &Ctx) -> CheckOutcome {
    let mut pass = true;
    let mut values = Vec::new();
    for n in 1..=6usize {
        match build_hull(n, &unit_vectors(n)) {
            Ok(hull) => {
                let mut expect = Rational::from_int(2);
                for k in 2..=n {
                    expect = expect * Rational::from_int(2) / Rational::from_int(k as i64);
                }
                let got = hull.volume_exact();
                values.push(serde_json::json!({ "n": n, "exact_match": got == expect }));
                pass &= got == expect;
            }
            Err(e) => return ctx.error("hull_b1_volume_exact", true, e.to_string()),
        }
    }
    ctx.hard("hull_b1_volume_exact", pass, serde_json::json!(values))
}

fn check_hull_covariance_symmetry(ctx: &Ctx) -> CheckOutcome {
    // Exact path: permutation-invariant input gives an exact multiple of the
    // identity; random hulls give symmetric covariance.
    let mut pass = true;
    for n in 2..=4usize {
        let hull = match build_hull(n, &unit_vectors(n)) {
            Ok(h) => h,
            Err(e) => return ctx.error("hull_covariance_symmetry", true, e.to_string()),
        };
        let m = measures::second_moment_exact(&hull);
        let diag = m[0][0].clone();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i == j {
                    pass &= *v == diag;
                } else {
                    pass &= v.is_zero();
                }
            }
        }
    }
    let body = BodySpec::lp_ball(crate::body::PNorm::Finite(3.0), 3).expect("valid");
    match random_hulls(ctx, &body, 8, ctx.config.instances.min(10), 0x01) {
        Ok(hulls) => {
            for h in hulls {
                let m = h.second_moment();
                for i in 0..3 {
                    for j in 0..3 {
                        pass &= (m[(i, j)] - m[(j, i)]).abs() <= 1e-12;
                    }
                }
            }
        }
        Err(e) => return ctx.error("hull_covariance_symmetry", true, e),
    }
    ctx.hard("hull_covariance_symmetry", pass, serde_json::json!({}))
}

fn check_hull_volume_monotonicity(ctx: &Ctx) -> CheckOutcome {
    let body = BodySpec::l1_ball(3).isotropic_normalize().expect("valid");
    let mut pass = true;
    for trial in 0..ctx.config.instances {
        let stream = ctx.stream(derive_stream(&[0x02, trial as u64]));
        let batch = match sampling::sample_cone_boundary(&body, 8, stream) {
            Ok(b) => b,
            Err(e) => return ctx.error("hull_volume_monotonicity", true, e.to_string()),
        };
        let small = build_hull(3, &batch.points[..7]);
        let full = build_hull(3, &batch.points);
        match (small, full) {
            (Ok(a), Ok(b)) => {
                // Exact rational comparison: adding a generator never
                // decreases the volume.
                pass &= a.volume_exact() <= b.volume_exact();
            }
            (Err(e), _) | (_, Err(e)) => {
                return ctx.error("hull_volume_monotonicity", true, e.to_string())
            }
        }
    }
    ctx.hard("hull_volume_monotonicity", pass, serde_json::json!({}))
}

/// Lemma-style facet inequalities and the l2 bound, instance by instance.
fn check_facet_inequalities_and_l2(ctx: &Ctx) -> Vec<CheckOutcome> {
    let mut pass_23a = true;
    let mut pass_23b = true;
    let mut pass_l2 = true;
    let mut worst_23a = f64::NEG_INFINITY;
    let mut worst_23b = f64::NEG_INFINITY;
    let mut err: Option<String> = None;
    'outer: for n in [3usize, 4] {
        let body = match BodySpec::l1_ball(n).isotropic_normalize() {
            Ok(b) => b,
            Err(e) => {
                err = Some(e.to_string());
                break 'outer;
            }
        };
        for &big_n in &[2 * n, 4 * n] {
            let hulls = match random_hulls(ctx, &body, big_n, ctx.config.instances, 0x03) {
                Ok(h) => h,
                Err(e) => {
                    err = Some(e);
                    break 'outer;
                }
            };
            for hull in hulls {
                let chain = match isotropy::bound_chain(&hull, L1Mode::Exact) {
                    Ok(c) => c,
                    Err(e) => {
                        err = Some(e.to_string());
                        break 'outer;
                    }
                };
                pass_23a &= chain.mean_l1 <= chain.facet_l1 * (1.0 + 1e-12);
                pass_23b &= chain.mean_l2sq <= chain.facet_l2sq * (1.0 + 1e-12);
                pass_l2 &= chain.l_exact <= chain.l2_bound + 1e-12;
                worst_23a = worst_23a.max(chain.mean_l1 / chain.facet_l1);
                worst_23b = worst_23b.max(chain.mean_l2sq / chain.facet_l2sq);
            }
        }
    }
    if let Some(e) = err {
        return vec![
            ctx.error("lemma_2_3a_facet_bound", true, e.clone()),
            ctx.error("lemma_2_3b_facet_bound", true, e.clone()),
            ctx.error("l_exact_le_l2_bound", true, e),
        ];
    }
    vec![
        ctx.hard(
            "lemma_2_3a_facet_bound",
            pass_23a,
            serde_json::json!({ "worst_ratio": worst_23a }),
        ),
        ctx.hard(
            "lemma_2_3b_facet_bound",
            pass_23b,
            serde_json::json!({ "worst_ratio": worst_23b }),
        ),
        ctx.hard("l_exact_le_l2_bound", pass_l2, serde_json::json!({})),
    ]
}

fn check_subset_max_dominates(ctx: &Ctx) -> CheckOutcome {
    let body = BodySpec::lp_ball(crate::body::PNorm::Finite(4.0), 3).expect("valid");
    let mut pass = true;
    for trial in 0..ctx.config.instances.min(20) {
        let stream = ctx.stream(derive_stream(&[0x04, trial as u64]));
        let batch = match sampling::sample_cone_boundary(&body, 6, stream) {
            Ok(b) => b,
            Err(e) => return ctx.error("subset_max_dominates_facets", true, e.to_string()),
        };
        let hull = match batch.build_hull() {
            Ok(h) => h,
            Err(e) => return ctx.error("subset_max_dominates_facets", true, e.to_string()),
        };
        for (norm, facet_norm) in [
            (SubsetNorm::L1, SignSumNorm::L1),
            (SubsetNorm::L2, SignSumNorm::L2Squared),
        ] {
            let facet_max = match facet_norm {
                SignSumNorm::L1 => measures::facet_sign_sum_max(&hull, facet_norm),
                SignSumNorm::L2Squared => {
                    measures::facet_sign_sum_max(&hull, facet_norm).sqrt()
                }
            };
            match isotropy::max_subset_sign_sum_exhaustive(&batch, norm) {
                Ok(est) => pass &= est.value >= facet_max - 1e-12,
                Err(e) => {
                    return ctx.error("subset_max_dominates_facets", true, e.to_string())
                }
            }
        }
    }
    ctx.hard("subset_max_dominates_facets", pass, serde_json::json!({}))
}

fn check_isotropic_scaling(ctx: &Ctx) -> CheckOutcome {
    let body = BodySpec::l1_ball(3);
    let mut pass = true;
    for trial in 0..ctx.config.instances.min(10) {
        let stream = ctx.stream(derive_stream(&[0x05, trial as u64]));
        let batch = match sampling::sample_cone_boundary(&body, 7, stream) {
            Ok(b) => b,
            Err(e) => return ctx.error("isotropic_constant_scaling", true, e.to_string()),
        };
        let hull = match batch.build_hull() {
            Ok(h) => h,
            Err(e) => return ctx.error("isotropic_constant_scaling", true, e.to_string()),
        };
        let l0 = isotropy::isotropic_constant_polytope(&hull).expect("nondegenerate");
        for r in [0.5f64, 3.0] {
            let scaled: Vec<Vec<f64>> = batch
                .points
                .iter()
                .map(|p| p.iter().map(|v| r * v).collect())
                .collect();
            let hull_r = match build_hull(3, &scaled) {
                Ok(h) => h,
                Err(e) => return ctx.error("isotropic_constant_scaling", true, e.to_string()),
            };
            let lr = isotropy::isotropic_constant_polytope(&hull_r).expect("nondegenerate");
            pass &= (lr - l0).abs() <= 1e-10;
        }
    }
    ctx.hard("isotropic_constant_scaling", pass, serde_json::json!({}))
}

fn check_lemma35_certificate(ctx: &Ctx) -> CheckOutcome {
    let mut rng = ctx.stream(0x06).rng();
    let mut pass = true;
    let mut worst = 0.0f64;
    for n in 1..=8usize {
        let mut thetas = vec![unit_vectors(n)[0].clone(), vec![1.0; n]];
        for _ in 0..3 {
            // Dyadic random directions keep the exact arithmetic small.
            thetas.push(
                (0..n)
                    .map(|_| {
                        use rand::Rng as _;
                        (rng.random_range(-256i32..=256) as f64) / 256.0
                    })
                    .collect(),
            );
        }
        for theta in thetas {
            let max_norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if max_norm == 0.0 {
                continue;
            }
            match certify_l1_cone_psi2(n, &theta) {
                Ok(cert) => {
                    pass &= cert.certified;
                    let ratio =
                        (n as f64).sqrt() * cert.psi2_upper / (6.0f64.sqrt() * max_norm);
                    pass &= ratio <= 1.0 + 1e-9;
                    worst = worst.max(ratio);
                }
                Err(e) => return ctx.error("lemma_3_5_certified_series", true, e.to_string()),
            }
        }
    }
    ctx.hard(
        "lemma_3_5_certified_series",
        pass,
        serde_json::json!({ "worst_ratio": worst }),
    )
}

fn check_luxemburg_residual(ctx: &Ctx) -> CheckOutcome {
    let mut rng = ctx.stream(0x07).rng();
    let mut pass = true;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        use rand::Rng as _;
        let values: Vec<f64> = (0..2000).map(|_| rng.random_range(-2.0..2.0)).collect();
        for alpha in [Alpha::Psi1, Alpha::Psi2] {
            match empirical_orlicz_norm(&values, alpha) {
                Ok(est) => {
                    let mean: f64 = values
                        .iter()
                        .map(|v| {
                            let t = v.abs() / est.value;
                            match alpha {
                                Alpha::Psi2 => (t * t).exp(),
                                Alpha::Psi1 => t.exp(),
                            }
                        })
                        .sum::<f64>()
                        / values.len() as f64;
                    let residual = (mean - 2.0).abs();
                    worst = worst.max(residual);
                    pass &= residual <= 1e-6;
                }
                Err(e) => return ctx.error("luxemburg_residual", true, e.to_string()),
            }
        }
    }
    ctx.hard(
        "luxemburg_residual",
        pass,
        serde_json::json!({ "worst_residual": worst }),
    )
}

fn check_bernstein_values(ctx: &Ctx) -> CheckOutcome {
    let a = concentration::bernstein_bound(BernsteinVariant::Psi2, 1.0, 1.0, 8);
    let b = concentration::bernstein_bound(BernsteinVariant::Psi1, 1.0, 2.0, 6);
    let c = concentration::bernstein_bound(BernsteinVariant::Psi1, 2.0, 1.0, 6);
    let pass = (a - 2.0 * (-1.0f64).exp()).abs() < 1e-12
        && (b - 2.0 * (-2.0f64).exp()).abs() < 1e-12
        && (c - 2.0 * (-0.25f64).exp()).abs() < 1e-12;
    ctx.hard("bernstein_formula_values", pass, serde_json::json!({}))
}

fn check_comparison_lemma(ctx: &Ctx) -> CheckOutcome {
    let n = 4usize;
    let bodies = [
        BodySpec::l1_ball(n).isotropic_normalize(),
        BodySpec::cube(n).isotropic_normalize(),
        BodySpec::lp_ball(crate::body::PNorm::Finite(4.0), n)
            .and_then(|b| b.isotropic_normalize()),
    ];
    let thetas = vec![unit_vectors(n)[0].clone(), vec![1.0; n]];
    let mut pass = true;
    let mut rows_out = Vec::new();
    for (bi, body) in bodies.into_iter().enumerate() {
        let body = match body {
            Ok(b) => b,
            Err(e) => return ctx.error("comparison_lemma_moments", false, e.to_string()),
        };
        match comparison_moments(
            &body,
            &thetas,
            &[1, 2, 3],
            ctx.config.sample_count,
            ctx.stream(derive_stream(&[0x08, bi as u64])),
        ) {
            Ok(rows) => {
                for r in rows {
                    pass &= r.pass;
                    rows_out.push(serde_json::json!({
                        "check": "comparison_lemma_moments",
                        "body": body_label(&body), "n": n,
                        "params": { "q": r.q, "theta": r.theta },
                        "empirical": r.empirical, "bound": r.exact_v_moment,
                        "se": r.se, "pass": r.pass,
                    }));
                }
            }
            Err(e) => return ctx.error("comparison_lemma_moments", false, e.to_string()),
        }
    }
    ctx.statistical("comparison_lemma_moments", pass, serde_json::json!(rows_out))
}

fn check_psi2_scaling(ctx: &Ctx) -> CheckOutcome {
    let n = 3usize;
    let theta = vec![1.0, -0.4, 0.7];
    let count = ctx.config.sample_count;
    let base = BodySpec::l1_ball(n);
    let run = |body: &BodySpec, tag: u64| -> Result<(f64, f64), String> {
        let batch =
            sampling::sample_cone_boundary(body, count, ctx.stream(derive_stream(&[0x09, tag])))
                .map_err(|e| e.to_string())?;
        let values = batch.linear_functional(&theta);
        let mut rng = ctx.stream(derive_stream(&[0x0a, tag])).rng();
        let rep = concentration::bootstrap_orlicz_norm(&values, Alpha::Psi2, &mut rng)
            .map_err(|e| e.to_string())?;
        // Bootstrap standard deviation as the standard error.
        let se = (rep.band_upper - rep.band_lower) / 3.92;
        Ok((rep.estimate.value, se))
    };
    let (v1, se1) = match run(&base, 1) {
        Ok(v) => v,
        Err(e) => return ctx.error("psi2_scaling_lemma", false, e),
    };
    let mut pass = true;
    let mut rows = Vec::new();
    for (k, c) in [0.5f64, 3.0].into_iter().enumerate() {
        let scaled = match BodySpec::scaled_l1(c, n) {
            Ok(b) => b,
            Err(e) => return ctx.error("psi2_scaling_lemma", false, e.to_string()),
        };
        let (vc, sec) = match run(&scaled, 2 + k as u64) {
            Ok(v) => v,
            Err(e) => return ctx.error("psi2_scaling_lemma", false, e),
        };
        let combined_se = (sec * sec + c * c * se1 * se1).sqrt();
        let ok = (vc - c * v1).abs() <= 2.0 * combined_se;
        pass &= ok;
        rows.push(serde_json::json!({
            "c": c, "psi2_scaled": vc, "c_times_base": c * v1,
            "se": combined_se, "pass": ok,
        }));
    }
    ctx.statistical("psi2_scaling_lemma", pass, serde_json::json!(rows))
}

fn check_transfer_identity(ctx: &Ctx) -> CheckOutcome {
    let n = 3usize;
    let bodies = [
        BodySpec::l1_ball(n),
        BodySpec::cube(n),
        BodySpec::rotated_cube(n, 1234).expect("valid"),
    ];
    let mut pass = true;
    let mut rows_out = Vec::new();
    for (bi, body) in bodies.iter().enumerate() {
        match transfer_identity(
            body,
            &[2, 4, 6],
            ctx.config.sample_count,
            ctx.stream(derive_stream(&[0x0b, bi as u64])),
        ) {
            Ok(rows) => {
                for r in rows {
                    pass &= r.pass;
                    rows_out.push(serde_json::json!({
                        "check": "transfer_identity",
                        "body": body_label(body), "n": n,
                        "params": { "p": r.p },
                        "empirical": r.ratio, "bound": r.expected,
                        "se": r.se, "pass": r.pass,
                    }));
                }
            }
            Err(e) => return ctx.error("transfer_identity", false, e.to_string()),
        }
    }
    ctx.statistical("transfer_identity", pass, serde_json::json!(rows_out))
}

fn check_psi2_unconditional(ctx: &Ctx) -> CheckOutcome {
    let n = 4usize;
    let mut thetas = vec![unit_vectors(n)[0].clone(), vec![1.0; n]];
    let mut rng = ctx.stream(0x0c).rng();
    for _ in 0..3 {
        use rand::Rng as _;
        thetas.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    let mut pass = true;
    for (bi, body) in [
        BodySpec::l1_ball(n).isotropic_normalize(),
        BodySpec::cube(n).isotropic_normalize(),
    ]
    .into_iter()
    .enumerate()
    {
        let body = match body {
            Ok(b) => b,
            Err(e) => return ctx.error("psi2_unconditional", false, e.to_string()),
        };
        match verify_psi2_unconditional(
            &body,
            &thetas,
            ctx.config.sample_count,
            ctx.stream(derive_stream(&[0x0d, bi as u64])),
        ) {
            Ok(report) => pass &= report.pass,
            Err(e) => return ctx.error("psi2_unconditional", false, e.to_string()),
        }
    }
    ctx.statistical("psi2_unconditional", pass, serde_json::json!({}))
}

fn check_psi2_negative_control(ctx: &Ctx) -> CheckOutcome {
    // Sabotage the constant (3 → 0.3): the check must fail.
    let body = match BodySpec::cube(3).isotropic_normalize() {
        Ok(b) => b,
        Err(e) => return ctx.error("psi2_negative_control", false, e.to_string()),
    };
    let thetas = vec![vec![1.0, 1.0, 1.0]];
    match verify_psi2_with_constant(
        &body,
        &thetas,
        ctx.config.sample_count,
        ctx.stream(0x0e),
        0.3,
    ) {
        Ok(report) => ctx.statistical(
            "psi2_negative_control",
            !report.pass,
            serde_json::json!({ "sabotaged_pass": report.pass }),
        ),
        Err(e) => ctx.error("psi2_negative_control", false, e.to_string()),
    }
}

fn check_psi1_bounded(ctx: &Ctx) -> CheckOutcome {
    let n = 4usize;
    let bodies = [
        BodySpec::rotated_cube(n, 55),
        BodySpec::l1_ball(n).isotropic_normalize(),
        BodySpec::cube(n).isotropic_normalize(),
    ];
    let mut rng = ctx.stream(0x0f).rng();
    let mut pass = true;
    let mut max_ratio = 0.0f64;
    for (bi, body) in bodies.into_iter().enumerate() {
        let body = match body {
            Ok(b) => b,
            Err(e) => return ctx.error("psi1_ratio_bounded", false, e.to_string()),
        };
        let mut thetas = Vec::new();
        for _ in 0..3 {
            use rand::Rng as _;
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= len;
            }
            thetas.push(v);
        }
        match verify_psi1_general(
            &body,
            &thetas,
            ctx.config.sample_count,
            ctx.stream(derive_stream(&[0x10, bi as u64])),
        ) {
            Ok(report) => {
                max_ratio = max_ratio.max(report.max_ratio);
                pass &= report.max_ratio <= PSI1_RATIO_FROZEN_CAP;
                pass &= report.thetas.iter().all(|t| t.conversion_pass);
            }
            Err(e) => return ctx.error("psi1_ratio_bounded", false, e.to_string()),
        }
    }
    ctx.statistical(
        "psi1_ratio_bounded",
        pass,
        serde_json::json!({ "max_ratio": max_ratio, "cap": PSI1_RATIO_FROZEN_CAP }),
    )
}

fn check_sum_tail(ctx: &Ctx) -> CheckOutcome {
    let n = 4usize;
    let body = match BodySpec::cube(n).isotropic_normalize() {
        Ok(b) => b,
        Err(e) => return ctx.error("sum_tail_dominance", false, e.to_string()),
    };
    let theta = vec![1.0; n];
    let trials = (ctx.config.sample_count / n).max(1);
    match concentration::empirical_sum_tail(
        &body,
        &theta,
        n,
        &concentration::default_t_grid(),
        trials,
        ctx.stream(0x11),
    ) {
        Ok(report) => ctx.statistical(
            "sum_tail_dominance",
            report.pass,
            serde_json::json!({ "observed_psi1": report.observed_psi1 }),
        ),
        Err(e) => ctx.error("sum_tail_dominance", false, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_has_no_hard_failures() {
        let report = run_verification_suite(SuiteConfig {
            master_seed: 1,
            sample_count: 20_000,
            instances: 10,
        });
        for c in &report.checks {
            if c.hard {
                assert_eq!(
                    c.status,
                    CheckStatus::Pass,
                    "hard check {} failed: {}",
                    c.name,
                    c.details
                );
            }
        }
        assert!(report.pass);
        assert_eq!(report.statistical_failures, 0, "{:#?}", report.checks);
    }

    #[test]
    fn tiny_sample_count_reports_widened_band() {
        let report = run_verification_suite(SuiteConfig {
            master_seed: 2,
            sample_count: 100,
            instances: 5,
        });
        assert!(report.widened > 0);
        // Statistical checks never fail in the widened regime.
        assert_eq!(report.statistical_failures, 0);
        // Hard checks still run and pass.
        assert!(report.pass);
    }
}
