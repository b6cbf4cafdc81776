//! Empirical verification of the concentration estimates: the ψ₂ bound for
//! linear functionals under the cone measure on unconditional bodies, the ψ₁
//! bound for general isotropic bodies, tail dominance for sign-sum averages,
//! and the moment-comparison and moment-transfer identities.

use super::moments::{self, ConcError};
use super::orlicz::{bootstrap_orlicz_norm, Alpha, OrliczReport};
use crate::body::{BodyError, BodySpec};
use crate::sampling::{self, SampleBatch, SampleError, StreamRng};
use crate::stats;
use serde::Serialize;
use thiserror::Error;

/// Constant in the unconditional cone-measure ψ₂ estimate
/// `‖⟨·,θ⟩‖_ψ₂ ≤ 3 √n ‖θ‖∞`.
pub const PSI2_CONSTANT: f64 = 3.0;
/// Tail form of the ψ₂ estimate: `P(|⟨x,θ⟩| ≥ t √n ‖θ‖∞) ≤ 2 e^{-t²/9}`.
pub const PSI2_TAIL_DECAY: f64 = 9.0;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Conc(#[from] ConcError),
    #[error(transparent)]
    Body(#[from] BodyError),
}

/// Which Bernstein inequality to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BernsteinVariant {
    /// Sub-Gaussian summands: `2 exp(-t² n / (8R²))`.
    Psi2,
    /// Sub-exponential summands: `2 exp(-(t n / (6R)) min{t/R, 1})`.
    Psi1,
}

/// The Bernstein tail bound for `P(|Σ Y_i| > t n)` with `n` centred summands
/// of ψ-norm at most `R`. Returns the raw bound in (0, 2]; reports cap it
/// at 1.
pub fn bernstein_bound(variant: BernsteinVariant, r: f64, t: f64, n: usize) -> f64 {
    assert!(r > 0.0 && t > 0.0 && n >= 1);
    let nf = n as f64;
    match variant {
        BernsteinVariant::Psi2 => 2.0 * (-t * t * nf / (8.0 * r * r)).exp(),
        BernsteinVariant::Psi1 => {
            let ratio = (t / r).min(1.0);
            2.0 * (-(t * nf / (6.0 * r)) * ratio).exp()
        }
    }
}

/// Default tail grid `t ∈ {0.5, 1.0, …, 4.0}`.
pub fn default_t_grid() -> Vec<f64> {
    (1..=8).map(|k| k as f64 * 0.5).collect()
}

/// A short human-readable body label for reports.
pub fn body_label(body: &BodySpec) -> String {
    match body {
        BodySpec::LpBall { p, dim } => match p {
            crate::body::PNorm::Infinity => format!("cube(n={dim})"),
            crate::body::PNorm::Finite(p) => format!("lp_ball(p={p}, n={dim})"),
        },
        BodySpec::ScaledL1 { c, dim } => format!("scaled_l1(c={c}, n={dim})"),
        BodySpec::SymmetricHPolytope { rows, dim } => {
            format!("h_polytope(rows={}, n={dim})", rows.len())
        }
        BodySpec::LinearImage { inner, .. } => format!("linear_image({})", body_label(inner)),
    }
}

/// One tail-grid row: empirical frequency against the asserted bound.
#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    pub se: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Psi2ThetaReport {
    pub theta: Vec<f64>,
    pub psi2: OrliczReport,
    pub bound: f64,
    pub norm_pass: bool,
    pub tails: Vec<TailRow>,
    pub tails_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Psi2Report {
    pub body: String,
    pub n: usize,
    pub sample_count: usize,
    pub constant: f64,
    pub thetas: Vec<Psi2ThetaReport>,
    pub pass: bool,
}

/// Verify the ψ₂ estimate on an isotropic-normalized unconditional body:
/// for each θ the upper bootstrap band of the empirical ψ₂-norm of `⟨X,θ⟩`
/// under cone samples must stay below `3 √n ‖θ‖∞`, and the empirical tail
/// frequencies must stay below `2 e^{-t²/9}` (plus four binomial standard
/// errors) on the t-grid.
pub fn verify_psi2_unconditional(
    body: &BodySpec,
    thetas: &[Vec<f64>],
    sample_count: usize,
    stream: StreamRng,
) -> Result<Psi2Report, CheckError> {
    verify_psi2_with_constant(body, thetas, sample_count, stream, PSI2_CONSTANT)
}

/// Same check with an explicit constant; the suite's negative control runs
/// it with a sabotaged constant and expects failure.
pub fn verify_psi2_with_constant(
    body: &BodySpec,
    thetas: &[Vec<f64>],
    sample_count: usize,
    stream: StreamRng,
    constant: f64,
) -> Result<Psi2Report, CheckError> {
    let n = body.dim();
    let batch = sampling::sample_cone_boundary(body, sample_count, stream)?;
    let mut boot_rng = stream.substream(0xb00).rng();
    let t_grid = default_t_grid();
    let decay = PSI2_TAIL_DECAY * (constant / PSI2_CONSTANT) * (constant / PSI2_CONSTANT);
    let mut reports = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let values = batch.linear_functional(theta);
        let max_norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let psi2 = bootstrap_orlicz_norm(&values, Alpha::Psi2, &mut boot_rng)?;
        let bound = constant * (n as f64).sqrt() * max_norm;
        let norm_pass = psi2.band_upper <= bound;
        let scale = (n as f64).sqrt() * max_norm;
        let tails: Vec<TailRow> = t_grid
            .iter()
            .map(|&t| {
                let count = values.iter().filter(|v| v.abs() >= t * scale).count();
                let empirical = count as f64 / values.len() as f64;
                let se = stats::binomial_se(empirical, values.len());
                let bound = 2.0 * (-t * t / decay).exp();
                TailRow {
                    t,
                    empirical,
                    bound,
                    se,
                    pass: empirical <= bound + 4.0 * se,
                }
            })
            .collect();
        let tails_pass = tails.iter().all(|r| r.pass);
        reports.push(Psi2ThetaReport {
            theta: theta.clone(),
            psi2,
            bound,
            norm_pass,
            tails,
            tails_pass,
        });
    }
    let pass = reports.iter().all(|r| r.norm_pass && r.tails_pass);
    Ok(Psi2Report {
        body: body_label(body),
        n,
        sample_count,
        constant,
        thetas: reports,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Psi1ThetaReport {
    pub theta: Vec<f64>,
    pub psi1: OrliczReport,
    /// ψ₁ estimate divided by L_K; the absolute constant is estimated, never
    /// asserted.
    pub ratio_to_lk: f64,
    pub psi2_value: f64,
    /// Empirical consistency `ψ₁ ≤ ψ₂ / ln 2`.
    pub conversion_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Psi1Report {
    pub body: String,
    pub n: usize,
    pub sample_count: usize,
    pub isotropic_constant: f64,
    pub thetas: Vec<Psi1ThetaReport>,
    pub max_ratio: f64,
}

/// ψ₁-norms of linear functionals under the cone measure on a general
/// isotropic body (unconditionality not required), reported as ratios to
/// L_K.
pub fn verify_psi1_general(
    body: &BodySpec,
    thetas: &[Vec<f64>],
    sample_count: usize,
    stream: StreamRng,
) -> Result<Psi1Report, CheckError> {
    let n = body.dim();
    let l_k = body.isotropic_constant()?;
    let batch = sampling::sample_cone_boundary(body, sample_count, stream)?;
    let mut boot_rng = stream.substream(0xb01).rng();
    let mut reports = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let values = batch.linear_functional(theta);
        let psi1 = bootstrap_orlicz_norm(&values, Alpha::Psi1, &mut boot_rng)?;
        let psi2 = super::orlicz::empirical_orlicz_norm(&values, Alpha::Psi2)?;
        let conversion_pass = psi1.estimate.value <= psi2.value / std::f64::consts::LN_2 * (1.0 + 1e-9);
        reports.push(Psi1ThetaReport {
            theta: theta.clone(),
            ratio_to_lk: psi1.estimate.value / l_k,
            psi2_value: psi2.value,
            conversion_pass,
            psi1,
        });
    }
    let max_ratio = reports.iter().map(|r| r.ratio_to_lk).fold(0.0, f64::max);
    Ok(Psi1Report {
        body: body_label(body),
        n,
        sample_count,
        isotropic_constant: l_k,
        thetas: reports,
        max_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SumTailRow {
    pub t: f64,
    pub empirical: f64,
    pub se: f64,
    /// `2 exp(-t² m/(8 R²))` with `R = 3√n‖θ‖∞` (unconditional path);
    /// `None` when the body is not unconditional.
    pub psi2_bound: Option<f64>,
    /// Bernstein ψ₁ bound with `R` the observed ψ₁-norm.
    pub psi1_bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SumTailReport {
    pub body: String,
    pub n: usize,
    pub n_terms: usize,
    pub trials: usize,
    pub observed_psi1: f64,
    pub rows: Vec<SumTailRow>,
    pub pass: bool,
}

/// Simulate `S = ⟨X_1 + … + X_m, θ⟩` over independent trials and compare
/// `P(|S| > t·m)` with the Bernstein bounds. Sign choices are immaterial
/// because the cone measure is symmetric.
pub fn empirical_sum_tail(
    body: &BodySpec,
    theta: &[f64],
    n_terms: usize,
    t_grid: &[f64],
    trials: usize,
    stream: StreamRng,
) -> Result<SumTailReport, CheckError> {
    let n = body.dim();
    let batch = sampling::sample_cone_boundary(body, trials * n_terms, stream)?;
    let values = batch.linear_functional(theta);
    let sums: Vec<f64> = values
        .chunks_exact(n_terms)
        .map(|chunk| chunk.iter().sum::<f64>())
        .collect();
    let observed_psi1 = super::orlicz::empirical_orlicz_norm(&values, Alpha::Psi1)?.value;
    let max_norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let unconditional = body.is_unconditional();
    let m = n_terms as f64;
    let rows: Vec<SumTailRow> = t_grid
        .iter()
        .map(|&t| {
            let count = sums.iter().filter(|s| s.abs() > t * m).count();
            let empirical = count as f64 / sums.len() as f64;
            let se = stats::binomial_se(empirical, sums.len());
            let psi2_bound = if unconditional {
                let r = PSI2_CONSTANT * (n as f64).sqrt() * max_norm;
                Some((bernstein_bound(BernsteinVariant::Psi2, r, t, n_terms)).min(1.0))
            } else {
                None
            };
            let psi1_bound =
                bernstein_bound(BernsteinVariant::Psi1, observed_psi1, t, n_terms).min(1.0);
            let reference = psi2_bound.unwrap_or(psi1_bound);
            SumTailRow {
                t,
                empirical,
                se,
                psi2_bound,
                psi1_bound,
                pass: empirical <= reference + 4.0 * se,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(SumTailReport {
        body: body_label(body),
        n,
        n_terms,
        trials,
        observed_psi1,
        rows,
        pass,
    })
}

/// Monte Carlo `E_μ |⟨x,θ⟩|^{2q}` on the boundary: `(mean, se)`.
pub fn mc_cone_moment(
    body: &BodySpec,
    theta: &[f64],
    q: u32,
    count: usize,
    stream: StreamRng,
) -> Result<(f64, f64), CheckError> {
    let batch = sampling::sample_cone_boundary(body, count, stream)?;
    Ok(moment_of(&batch, theta, 2 * q as i32))
}

/// Monte Carlo `E_ν |⟨x,θ⟩|^{2q}` for the uniform distribution.
pub fn mc_uniform_moment(
    body: &BodySpec,
    theta: &[f64],
    q: u32,
    count: usize,
    stream: StreamRng,
) -> Result<(f64, f64), CheckError> {
    let batch = sampling::sample_uniform(body, count, stream)?;
    Ok(moment_of(&batch, theta, 2 * q as i32))
}

fn moment_of(batch: &SampleBatch, theta: &[f64], power: i32) -> (f64, f64) {
    let values: Vec<f64> = batch
        .linear_functional(theta)
        .iter()
        .map(|v| v.abs().powi(power))
        .collect();
    (stats::mean(&values), stats::standard_error(&values))
}

/// One comparison-lemma entry: cone moments on ∂K against the exact cone
/// moments on ∂V, `V = (√6/2) n B₁ⁿ`.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub theta: Vec<f64>,
    pub q: u32,
    pub empirical: f64,
    pub se: f64,
    pub exact_v_moment: f64,
    pub pass: bool,
}

/// Moment-level comparison for an isotropic unconditional body: the MC cone
/// moment of `|⟨x,θ⟩|^{2q}` on ∂K must not exceed the exact moment on ∂V
/// (one-sided, four standard errors of slack).
pub fn comparison_moments(
    body: &BodySpec,
    thetas: &[Vec<f64>],
    qs: &[u32],
    count: usize,
    stream: StreamRng,
) -> Result<Vec<ComparisonRow>, CheckError> {
    let n = body.dim();
    let batch = sampling::sample_cone_boundary(body, count, stream)?;
    let mut rows = Vec::new();
    for theta in thetas {
        for &q in qs {
            let (empirical, se) = moment_of(&batch, theta, 2 * q as i32);
            // Scaling: moments on ∂(cB₁ⁿ) are c^{2q} times those on ∂B₁ⁿ,
            // and c² = (6/4) n² is rational.
            let m_q = moments::cone_moment_linear(n, theta, q)?;
            let c_sq = crate::scalar::Rational::new(
                num_bigint::BigInt::from(6 * n * n),
                num_bigint::BigInt::from(4),
            );
            let mut scale =
                <crate::scalar::Rational as crate::scalar::GeomScalar>::from_int(1);
            for _ in 0..q {
                scale *= c_sq.clone();
            }
            let exact = crate::scalar::GeomScalar::to_f64(&(m_q * scale));
            rows.push(ComparisonRow {
                theta: theta.clone(),
                q,
                empirical,
                se,
                exact_v_moment: exact,
                pass: empirical <= exact + 4.0 * se,
            });
        }
    }
    Ok(rows)
}

/// Transfer-identity entry: MC uniform/cone moment ratio against `n/(n+p)`.
#[derive(Clone, Debug, Serialize)]
pub struct TransferRow {
    pub p: u32,
    pub ratio: f64,
    pub se: f64,
    pub expected: f64,
    pub pass: bool,
}

/// Check `E_ν |⟨x,e₁⟩|^p / E_μ |⟨x,e₁⟩|^p = n/(n+p)` by MC on both sides.
pub fn transfer_identity(
    body: &BodySpec,
    ps: &[u32],
    count: usize,
    stream: StreamRng,
) -> Result<Vec<TransferRow>, CheckError> {
    let n = body.dim();
    let mut theta = vec![0.0; n];
    theta[0] = 1.0;
    let uniform = sampling::sample_uniform(body, count, stream.substream(1))?;
    let cone = sampling::sample_cone_boundary(body, count, stream.substream(2))?;
    let mut rows = Vec::new();
    for &p in ps {
        assert!(p % 2 == 0, "even exponents only");
        let (mu_u, se_u) = moment_of(&uniform, &theta, p as i32);
        let (mu_c, se_c) = moment_of(&cone, &theta, p as i32);
        let ratio = mu_u / mu_c;
        // Delta-method standard error for the ratio of independent means.
        let se = ratio * ((se_u / mu_u).powi(2) + (se_c / mu_c).powi(2)).sqrt();
        let expected = moments::moment_transfer_coefficient(n, p as f64);
        rows.push(TransferRow {
            p,
            ratio,
            se,
            expected,
            pass: (ratio - expected).abs() <= 4.0 * se,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::PNorm;
    use approx::assert_relative_eq;

    fn stream(id: u64) -> StreamRng {
        StreamRng::new(0xdecade, id)
    }

    #[test]
    fn bernstein_examples() {
        assert_relative_eq!(
            bernstein_bound(BernsteinVariant::Psi2, 1.0, 1.0, 8),
            2.0 * (-1.0f64).exp(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            bernstein_bound(BernsteinVariant::Psi1, 1.0, 2.0, 6),
            2.0 * (-2.0f64).exp(),
            epsilon = 1e-12
        );
        // t → 0⁺ is vacuous: bound 2.
        assert!(bernstein_bound(BernsteinVariant::Psi2, 1.0, 1e-12, 4) > 2.0 - 1e-9);
    }

    #[test]
    fn psi2_holds_on_normalized_l1_ball() {
        let body = BodySpec::l1_ball(4).isotropic_normalize().unwrap();
        let mut theta = vec![0.0; 4];
        theta[0] = 1.0;
        let report =
            verify_psi2_unconditional(&body, &[theta.clone()], 100_000, stream(1)).unwrap();
        assert!(report.pass, "{report:?}");
        // Empirical ψ₂ ≤ 3·√4·1 = 6 with margin; the certified series bound
        // on the unnormalized ball, rescaled, is the analytic oracle.
        let r = &report.thetas[0];
        assert!(r.psi2.band_upper <= 6.0, "band {}", r.psi2.band_upper);
        let cert = moments::certify_l1_cone_psi2(4, &theta).unwrap();
        // Isotropic B₁ⁿ is r·B₁ⁿ with r = (n!)^{1/n}/2; ψ₂ scales linearly.
        let scale = (24.0f64).powf(0.25) / 2.0;
        assert!(
            r.psi2.estimate.value <= scale * cert.psi2_upper * 1.05,
            "empirical {} vs certified {}",
            r.psi2.estimate.value,
            scale * cert.psi2_upper
        );
    }

    #[test]
    fn psi2_tail_trivial_at_t_zero() {
        // t = 0 bound is 2, above any frequency: implicit in grid > 0, so
        // check the bound formula directly.
        assert_relative_eq!(2.0 * (0.0f64 / -PSI2_TAIL_DECAY).exp(), 2.0);
    }

    #[test]
    fn psi2_negative_control_fails() {
        let body = BodySpec::cube(3).isotropic_normalize().unwrap();
        let theta = vec![1.0, 1.0, 1.0];
        let report =
            verify_psi2_with_constant(&body, &[theta], 20_000, stream(2), 0.3).unwrap();
        assert!(!report.pass, "sabotaged constant must fail");
    }

    #[test]
    fn psi1_on_rotated_cube() {
        let body = BodySpec::rotated_cube(4, 77).unwrap();
        let mut theta = vec![0.0; 4];
        theta[1] = 1.0;
        let report = verify_psi1_general(&body, &[theta.clone()], 50_000, stream(3)).unwrap();
        let r = &report.thetas[0];
        assert!(r.ratio_to_lk.is_finite() && r.ratio_to_lk > 0.0);
        assert!(r.conversion_pass);
        // Homogeneity: scaling θ scales the estimate.
        let theta2: Vec<f64> = theta.iter().map(|v| 3.0 * v).collect();
        let report2 = verify_psi1_general(&body, &[theta2], 50_000, stream(3)).unwrap();
        assert_relative_eq!(
            report2.thetas[0].psi1.estimate.value,
            3.0 * r.psi1.estimate.value,
            max_relative = 1e-4
        );
    }

    #[test]
    fn sum_tail_dominated_on_cube() {
        let body = BodySpec::cube(4).isotropic_normalize().unwrap();
        let theta = vec![1.0; 4];
        let report =
            empirical_sum_tail(&body, &theta, 4, &default_t_grid(), 20_000, stream(4)).unwrap();
        assert!(report.pass, "{:?}", report.rows);
        // Beyond the largest observed |S|/m the empirical tail is zero.
        let rows = empirical_sum_tail(&body, &theta, 4, &[50.0], 1_000, stream(5)).unwrap();
        assert_eq!(rows.rows[0].empirical, 0.0);
        assert!(rows.rows[0].pass);
    }

    #[test]
    fn sum_tail_single_term_matches_psi2_tail() {
        // m = 1 reduces to the single-functional tail; cross-check the
        // empirical frequencies against the ψ₂ report on shared samples.
        let body = BodySpec::l1_ball(2).isotropic_normalize().unwrap();
        let theta = vec![1.0, 0.0];
        let trials = 40_000;
        let report = empirical_sum_tail(&body, &theta, 1, &[1.0], trials, stream(6)).unwrap();
        let batch = sampling::sample_cone_boundary(&body, trials, stream(6)).unwrap();
        let values = batch.linear_functional(&theta);
        let direct = values.iter().filter(|v| v.abs() > 1.0).count() as f64 / trials as f64;
        assert_relative_eq!(report.rows[0].empirical, direct);
    }

    #[test]
    fn comparison_lemma_on_cube() {
        let body = BodySpec::cube(3).isotropic_normalize().unwrap();
        let thetas = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]];
        let rows = comparison_moments(&body, &thetas, &[1, 2, 3], 50_000, stream(7)).unwrap();
        for row in rows {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn transfer_identity_on_bodies() {
        for body in [
            BodySpec::l1_ball(3),
            BodySpec::cube(3),
            BodySpec::rotated_cube(3, 9).unwrap(),
        ] {
            let rows = transfer_identity(&body, &[2, 4, 6], 100_000, stream(8)).unwrap();
            for row in rows {
                assert!(row.pass, "{} {row:?}", body_label(&body));
            }
        }
    }

    #[test]
    fn lp_second_moment_mc_cross_check() {
        // Gamma-formula covariance for p ∉ {1,2,∞} against MC.
        let body = BodySpec::lp_ball(PNorm::Finite(3.0), 3).unwrap();
        let (m, se) = mc_uniform_moment(
            &body,
            &[1.0, 0.0, 0.0],
            1,
            100_000,
            stream(9),
        )
        .unwrap();
        let exact = crate::body::lp_ball_second_moment(PNorm::Finite(3.0), 3);
        assert!((m - exact).abs() <= 4.0 * se, "{m} vs {exact}");
    }
}
