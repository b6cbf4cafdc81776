//! Exact ℓ1-ball moments, the uniform-to-cone moment transfer, and the
//! certified sub-Gaussian series bound for the cone measure on ∂B₁ⁿ.
//!
//! Everything here is exact rational arithmetic. The key identities:
//!
//! * `∫_{B₁ⁿ} Π x_i^{2q_i} dx = 2ⁿ Π (2q_i)! / (n + 2q)!` with `q = Σ q_i`;
//! * the polar integration formula turns uniform moments into cone-measure
//!   moments: `E_ν |⟨x,θ⟩|^p = n/(n+p) · E_μ |⟨x,θ⟩|^p`;
//! * the even moments of `⟨x,θ⟩` under the cone measure expand over even
//!   multi-indices (odd terms vanish by unconditionality), which feeds a
//!   finite certified bound for the exponential-moment series.

use crate::scalar::{factorial, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Budget caps for the exact composition enumeration.
pub const MAX_MOMENT_Q: u32 = 6;
pub const MAX_MOMENT_DIM: usize = 12;

#[derive(Debug, Error)]
pub enum ConcError {
    #[error("degenerate input (empty or all-zero values)")]
    Degenerate,
    #[error("moment budget exceeded: q = {q} (max {max_q}), n = {n} (max {max_n})")]
    BudgetExceeded {
        q: u32,
        n: usize,
        max_q: u32,
        max_n: usize,
    },
}

/// A monomial moment specification: per-coordinate half-exponents `q_i`,
/// i.e. the integrand `Π x_i^{2 q_i}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentSpec {
    pub n: usize,
    pub q: Vec<u32>,
}

impl MomentSpec {
    pub fn new(n: usize, q: Vec<u32>) -> Self {
        assert_eq!(q.len(), n, "one half-exponent per coordinate");
        MomentSpec { n, q }
    }

    pub fn total_q(&self) -> u32 {
        self.q.iter().sum()
    }
}

/// Exact `∫_{B₁ⁿ} Π x_i^{2 q_i} dx = 2ⁿ Π (2q_i)! / (n + 2q)!`.
pub fn l1_ball_monomial_moment(spec: &MomentSpec) -> Rational {
    let n = spec.n;
    let total = spec.total_q() as usize;
    let mut num = BigInt::from(2).pow(n as u32);
    for &qi in &spec.q {
        num *= factorial(2 * qi as usize);
    }
    Rational::new(num, factorial(n + 2 * total))
}

/// The same moment under the uniform *probability* measure on B₁ⁿ:
/// `n! Π (2q_i)! / (n + 2q)!`.
pub fn l1_ball_monomial_moment_normalized(spec: &MomentSpec) -> Rational {
    let n = spec.n;
    let total = spec.total_q() as usize;
    let mut num = factorial(n);
    for &qi in &spec.q {
        num *= factorial(2 * qi as usize);
    }
    Rational::new(num, factorial(n + 2 * total))
}

/// Ratio (uniform moment)/(cone moment) for the exponent `p`: `n/(n+p)`.
///
/// From the polar integration formula for the cone measure; `p = 2q` for the
/// even-moment usage, general `p > 0` for the ψ₁ moment transfer.
pub fn moment_transfer_coefficient(n: usize, p: f64) -> f64 {
    n as f64 / (n as f64 + p)
}

/// Exact transfer coefficient for integer exponents.
pub fn moment_transfer_coefficient_exact(n: usize, p: u32) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(n) + BigInt::from(p))
}

fn for_each_composition<F: FnMut(&[u32])>(n: usize, q: u32, f: &mut F) {
    fn rec<F: FnMut(&[u32])>(buf: &mut Vec<u32>, remaining: u32, slots: usize, f: &mut F) {
        if slots == 1 {
            buf.push(remaining);
            f(buf);
            buf.pop();
            return;
        }
        for take in 0..=remaining {
            buf.push(take);
            rec(buf, remaining - take, slots - 1, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(n);
    rec(&mut buf, q, n, f);
}

/// Exact `∫_{∂B₁ⁿ} |⟨x,θ⟩|^{2q} dμ` by multinomial expansion over the even
/// compositions, the monomial moments, and the transfer factor `(n+2q)/n`.
pub fn cone_moment_linear(n: usize, theta: &[f64], q: u32) -> Result<Rational, ConcError> {
    assert_eq!(theta.len(), n);
    if q > MAX_MOMENT_Q || n > MAX_MOMENT_DIM {
        return Err(ConcError::BudgetExceeded {
            q,
            n,
            max_q: MAX_MOMENT_Q,
            max_n: MAX_MOMENT_DIM,
        });
    }
    if q == 0 {
        return Ok(Rational::one());
    }
    // Power tables θ_i^{2k} for k ≤ q.
    let theta_r: Vec<Rational> = theta
        .iter()
        .map(|&t| <Rational as crate::scalar::GeomScalar>::from_f64_exact(t))
        .collect();
    let mut powers: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for t in &theta_r {
        let t2 = t.clone() * t.clone();
        let mut row = Vec::with_capacity(q as usize + 1);
        row.push(Rational::one());
        for k in 1..=q as usize {
            let prev = row[k - 1].clone();
            row.push(prev * t2.clone());
        }
        powers.push(row);
    }
    let fact_2q = factorial(2 * q as usize);
    let mut nu_moment = Rational::zero();
    for_each_composition(n, q, &mut |comp: &[u32]| {
        // Multinomial coefficient (2q)! / Π (2q_i)!.
        let mut denom = BigInt::one();
        for &qi in comp {
            denom *= factorial(2 * qi as usize);
        }
        let multinomial = Rational::new(fact_2q.clone(), denom);
        let mut theta_pow = Rational::one();
        for (i, &qi) in comp.iter().enumerate() {
            if qi > 0 {
                theta_pow *= powers[i][qi as usize].clone();
            }
        }
        if theta_pow.is_zero() {
            return;
        }
        let monomial = l1_ball_monomial_moment_normalized(&MomentSpec::new(n, comp.to_vec()));
        nu_moment += multinomial * theta_pow * monomial;
    });
    // Uniform-to-cone transfer: multiply by (n + 2q)/n.
    Ok(nu_moment * Rational::new(BigInt::from(n + 2 * q as usize), BigInt::from(n)))
}

/// Certified evaluator for the cone-measure exponential moment series
/// `E_μ exp((⟨x,θ⟩/λ)²)` on ∂B₁ⁿ: exact terms up to `q = MAX_MOMENT_Q`
/// (computed once), then the geometric remainder from the term bound
/// `E_μ|⟨x,θ⟩|^{2q} ≤ (q!/2)(2α/n)^{2q}` with `α = √n ‖θ‖∞`.
pub struct Psi2SeriesEvaluator {
    moments: Vec<Rational>,
    max_norm_sq: Rational,
    n: usize,
    zero_theta: bool,
}

impl Psi2SeriesEvaluator {
    pub fn new(n: usize, theta: &[f64]) -> Result<Self, ConcError> {
        let max_norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_norm == 0.0 {
            return Ok(Psi2SeriesEvaluator {
                moments: Vec::new(),
                max_norm_sq: Rational::zero(),
                n,
                zero_theta: true,
            });
        }
        let moments = (1..=MAX_MOMENT_Q)
            .map(|q| cone_moment_linear(n, theta, q))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Psi2SeriesEvaluator {
            moments,
            max_norm_sq: <Rational as crate::scalar::GeomScalar>::from_f64_exact(
                max_norm * max_norm,
            ),
            n,
            zero_theta: false,
        })
    }

    /// Exact rational upper bound at `λ² = lambda_sq`, or `None` when the
    /// remainder series does not converge (`r ≥ 1`).
    pub fn upper(&self, lambda_sq: &Rational) -> Option<Rational> {
        assert!(lambda_sq.is_positive());
        if self.zero_theta {
            return Some(Rational::one());
        }
        // r = (2α/n)²/λ² = 4‖θ‖∞²/(n λ²).
        let r: Rational = Rational::new(BigInt::from(4), BigInt::from(self.n))
            * self.max_norm_sq.clone()
            / lambda_sq.clone();
        if r >= Rational::one() {
            return None;
        }
        let mut sum = Rational::one();
        let mut lambda_pow = Rational::one();
        for (qi, m_q) in self.moments.iter().enumerate() {
            lambda_pow *= lambda_sq.clone();
            sum += m_q.clone()
                / (Rational::from_integer(factorial(qi + 1)) * lambda_pow.clone());
        }
        // Tail: Σ_{q > MAX_MOMENT_Q} (1/2) r^q = (1/2) r^{Q+1} / (1 - r).
        let mut r_pow = Rational::one();
        for _ in 0..=MAX_MOMENT_Q {
            r_pow *= r.clone();
        }
        let tail =
            r_pow * Rational::new(BigInt::from(1), BigInt::from(2)) / (Rational::one() - r);
        Some(sum + tail)
    }
}

/// One-shot form of [`Psi2SeriesEvaluator`].
pub fn l1_cone_exp_moment_upper(
    n: usize,
    theta: &[f64],
    lambda_sq: &Rational,
) -> Result<Option<Rational>, ConcError> {
    Ok(Psi2SeriesEvaluator::new(n, theta)?.upper(lambda_sq))
}

/// Outcome of the certified ψ₂ check for the cone measure on ∂B₁ⁿ.
#[derive(Clone, Debug, Serialize)]
pub struct Psi2Certificate {
    pub n: usize,
    pub theta: Vec<f64>,
    /// Certified: `E exp((⟨x,θ⟩/λ₀)²) ≤ series_at_target ≤ 2` with
    /// `λ₀ = √6 ‖θ‖∞ / √n`, i.e. `√n · ψ₂ ≤ √6 ‖θ‖∞`.
    pub certified: bool,
    /// Exact series bound at the target λ₀, as f64 for reporting.
    pub series_at_target: f64,
    /// Bisected certified upper estimate of the ψ₂ norm itself.
    pub psi2_upper: f64,
}

/// Certify `√n · ‖⟨·,θ⟩‖_{ψ₂(μ_{B₁ⁿ})} ≤ √6 ‖θ‖∞` by exact series
/// evaluation, and bisect for the smallest certifiable λ.
pub fn certify_l1_cone_psi2(n: usize, theta: &[f64]) -> Result<Psi2Certificate, ConcError> {
    let max_norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_norm > 0.0, "theta must be nonzero");
    let max_norm_sq = <Rational as crate::scalar::GeomScalar>::from_f64_exact(max_norm * max_norm);
    // λ₀² = 6‖θ‖∞²/n.
    let target_sq: Rational =
        Rational::new(BigInt::from(6), BigInt::from(n)) * max_norm_sq.clone();
    let two = Rational::new(BigInt::from(2), BigInt::from(1));
    let evaluator = Psi2SeriesEvaluator::new(n, theta)?;
    let at_target = evaluator.upper(&target_sq);
    let (certified, series_at_target) = match &at_target {
        Some(v) => (*v <= two, crate::scalar::GeomScalar::to_f64(v)),
        None => (false, f64::INFINITY),
    };

    // Bisect on λ² for the smallest λ with a certified bound ≤ 2. The series
    // bound is monotone decreasing in λ², so plain bisection applies.
    let mut hi = target_sq.clone();
    if !certified {
        for _ in 0..64 {
            hi *= two.clone();
            if matches!(evaluator.upper(&hi), Some(ref v) if *v <= two) {
                break;
            }
        }
    }
    let mut lo = hi.clone() / Rational::new(BigInt::from(4096), BigInt::from(1));
    for _ in 0..48 {
        let mid = (lo.clone() + hi.clone()) / two.clone();
        let ok = matches!(evaluator.upper(&mid), Some(ref v) if *v <= two);
        if ok {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let psi2_upper = crate::scalar::GeomScalar::to_f64(&hi).sqrt();
    Ok(Psi2Certificate {
        n,
        theta: theta.to_vec(),
        certified,
        series_at_target,
        psi2_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rational(num: i64, den: i64) -> Rational {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn monomial_moments_match_paper_values() {
        // n = 1, q = 1: both sides equal 2/(1 + 2q).
        assert_eq!(
            l1_ball_monomial_moment(&MomentSpec::new(1, vec![1])),
            rational(2, 3)
        );
        for q1 in 0..5u32 {
            assert_eq!(
                l1_ball_monomial_moment(&MomentSpec::new(1, vec![q1])),
                rational(2, 1 + 2 * q1 as i64)
            );
        }
        // n = 2, q = (1,0): 1/3.
        assert_eq!(
            l1_ball_monomial_moment(&MomentSpec::new(2, vec![1, 0])),
            rational(1, 3)
        );
        // q = 0 reduces to the volume 2ⁿ/n!.
        assert_eq!(
            l1_ball_monomial_moment(&MomentSpec::new(2, vec![0, 0])),
            rational(2, 1)
        );
    }

    #[test]
    fn transfer_coefficient_values() {
        assert_relative_eq!(moment_transfer_coefficient(2, 2.0), 0.5);
        assert!((moment_transfer_coefficient(5, 1e-12) - 1.0).abs() < 1e-12);
        assert_eq!(moment_transfer_coefficient_exact(2, 2), rational(1, 2));
        assert_eq!(moment_transfer_coefficient_exact(3, 4), rational(3, 7));
    }

    #[test]
    fn cone_moments_on_l1_sphere() {
        // n = 2, θ = e₁, q = 1: the facet line integral ∫₀¹ t² dt = 1/3.
        let m = cone_moment_linear(2, &[1.0, 0.0], 1).unwrap();
        assert_eq!(m, rational(1, 3));
        // θ = (1,1): E(x₁+x₂)² = 2 E x₁² + 2 E x₁x₂; the cross term vanishes
        // by odd symmetry, so 2/3.
        let m = cone_moment_linear(2, &[1.0, 1.0], 1).unwrap();
        assert_eq!(m, rational(2, 3));
        // θ = 0 gives 0 for q ≥ 1.
        let m = cone_moment_linear(3, &[0.0, 0.0, 0.0], 2).unwrap();
        assert!(m.is_zero());
    }

    #[test]
    fn cone_moment_budget() {
        assert!(matches!(
            cone_moment_linear(2, &[1.0, 0.0], 9),
            Err(ConcError::BudgetExceeded { .. })
        ));
        let theta = vec![1.0; 13];
        assert!(matches!(
            cone_moment_linear(13, &theta, 1),
            Err(ConcError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn psi2_certificate_holds_for_small_dims() {
        for n in 1..=8 {
            let mut theta = vec![0.0; n];
            theta[0] = 1.0;
            let cert = certify_l1_cone_psi2(n, &theta).unwrap();
            assert!(cert.certified, "n = {n}: series {}", cert.series_at_target);
            assert!(cert.series_at_target <= 2.0);
            // The bisected upper estimate is at most the target √6‖θ‖∞/√n.
            assert!(cert.psi2_upper <= (6.0 / n as f64).sqrt() * 1.0000001);
        }
    }

    #[test]
    fn exact_terms_stay_below_paper_term_bound() {
        // E|⟨x,θ⟩|^{2q} ≤ (q!/2)(2α/n)^{2q}, α = √n‖θ‖∞.
        let n = 4;
        let theta = [0.3, -0.9, 0.5, 0.1];
        let alpha_sq = n as f64 * 0.81;
        for q in 1..=MAX_MOMENT_Q {
            let m = cone_moment_linear(n, &theta, q).unwrap();
            let m_f = crate::scalar::GeomScalar::to_f64(&m);
            let mut fact = 1.0;
            for k in 2..=q {
                fact *= k as f64;
            }
            let bound = fact / 2.0 * (4.0 * alpha_sq / (n * n) as f64).powi(q as i32);
            assert!(m_f <= bound, "q = {q}: {m_f} > {bound}");
        }
    }
}
