//! Symmetric convex bodies and their oracles: Minkowski functional, volume,
//! covariance of the uniform distribution, and isotropic normalization.
//!
//! A body is origin-symmetric by construction. Supported kinds: ℓp balls
//! (p = ∞ is the cube and is represented explicitly, never as a large float),
//! scaled ℓ1 balls, symmetric H-polytopes `|⟨a_i, x⟩| ≤ b_i`, and invertible
//! linear images of other bodies.

use crate::hull::{self, HullError};
use crate::scalar::{GeomScalar, Rational};
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Cap on the condition number of user-supplied linear images.
pub const CONDITION_NUMBER_CAP: f64 = 1e6;

#[derive(Debug, Error)]
pub enum BodyError {
    #[error("invalid body: {0}")]
    Invalid(String),
    #[error("dimension {dim} too large for the exact path (max {max})")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("covariance is not positive definite")]
    SingularCovariance,
    #[error("matrix condition number {cond:.3e} exceeds cap {cap:.1e}")]
    ConditionNumber { cond: f64, cap: f64 },
    #[error(transparent)]
    Hull(#[from] HullError),
}

/// The exponent of an ℓp ball; infinity is explicit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub fn is_infinite(self) -> bool {
        matches!(self, PNorm::Infinity)
    }

    pub fn value(self) -> f64 {
        match self {
            PNorm::Finite(p) => p,
            PNorm::Infinity => f64::INFINITY,
        }
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PNorm::Finite(p) => s.serialize_f64(*p),
            PNorm::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PNorm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(PNorm::Finite(p)),
            Raw::Str(s) if s == "inf" => Ok(PNorm::Infinity),
            Raw::Str(s) => Err(D::Error::custom(format!("invalid p value {s:?}"))),
        }
    }
}

/// One symmetric slab constraint `|⟨normal, x⟩| ≤ offset`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfspacePair {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    LpBall {
        p: PNorm,
        dim: usize,
    },
    ScaledL1 {
        c: f64,
        dim: usize,
    },
    SymmetricHPolytope {
        rows: Vec<HalfspacePair>,
        dim: usize,
    },
    LinearImage {
        inner: Box<BodySpec>,
        matrix: Vec<Vec<f64>>,
    },
}

/// Volume, covariance and isotropic constant of a body in one record.
#[derive(Clone, Debug, Serialize)]
pub struct IsotropicProfile {
    pub volume: f64,
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
    pub isotropic_constant: f64,
    pub is_unconditional: bool,
}

impl BodySpec {
    pub fn lp_ball(p: PNorm, dim: usize) -> Result<Self, BodyError> {
        if let PNorm::Finite(v) = p {
            if !(v >= 1.0) || !v.is_finite() {
                return Err(BodyError::Invalid(format!("p must be ≥ 1, got {v}")));
            }
        }
        if dim == 0 {
            return Err(BodyError::Invalid("dimension must be positive".into()));
        }
        Ok(BodySpec::LpBall { p, dim })
    }

    pub fn l1_ball(dim: usize) -> Self {
        Self::lp_ball(PNorm::Finite(1.0), dim).expect("valid")
    }

    /// The cube `[-1, 1]^n`.
    pub fn cube(dim: usize) -> Self {
        Self::lp_ball(PNorm::Infinity, dim).expect("valid")
    }

    pub fn scaled_l1(c: f64, dim: usize) -> Result<Self, BodyError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(BodyError::Invalid(format!("scale must be positive, got {c}")));
        }
        if dim == 0 {
            return Err(BodyError::Invalid("dimension must be positive".into()));
        }
        Ok(BodySpec::ScaledL1 { c, dim })
    }

    pub fn h_polytope(rows: Vec<HalfspacePair>, dim: usize) -> Result<Self, BodyError> {
        if rows.len() < dim {
            return Err(BodyError::Invalid(
                "need at least n slab constraints for a bounded body".into(),
            ));
        }
        for r in &rows {
            if r.normal.len() != dim {
                return Err(BodyError::Invalid("row normal has wrong dimension".into()));
            }
            let len: f64 = r.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len == 0.0 || !r.offset.is_finite() || r.offset <= 0.0 {
                return Err(BodyError::Invalid("row needs nonzero normal, positive offset".into()));
            }
        }
        Ok(BodySpec::SymmetricHPolytope { rows, dim })
    }

    pub fn linear_image(inner: BodySpec, matrix: DMatrix<f64>) -> Result<Self, BodyError> {
        let n = inner.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(BodyError::Invalid("matrix must be n×n".into()));
        }
        let svd = matrix.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 0.0 {
            return Err(BodyError::Invalid("matrix must be invertible".into()));
        }
        let cond = smax / smin;
        if cond > CONDITION_NUMBER_CAP {
            return Err(BodyError::ConditionNumber {
                cond,
                cap: CONDITION_NUMBER_CAP,
            });
        }
        Ok(BodySpec::LinearImage {
            inner: Box::new(inner),
            matrix: matrix_to_rows(&matrix),
        })
    }

    /// Volume-one rotated cube: `Q · [-1/2, 1/2]^n` for a seeded random
    /// rotation `Q`. Isotropic by construction, not unconditional.
    pub fn rotated_cube(dim: usize, seed: u64) -> Result<Self, BodyError> {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
        let qr = g.qr();
        let q = qr.q();
        Self::linear_image(Self::cube(dim), q * 0.5)
    }

    /// Axis-aligned box with the given half-widths, as a linear image of the cube.
    pub fn diagonal_box(half_widths: &[f64]) -> Result<Self, BodyError> {
        let n = half_widths.len();
        let t = DMatrix::from_fn(n, n, |i, j| if i == j { half_widths[i] } else { 0.0 });
        Self::linear_image(Self::cube(n), t)
    }

    pub fn dim(&self) -> usize {
        match self {
            BodySpec::LpBall { dim, .. }
            | BodySpec::ScaledL1 { dim, .. }
            | BodySpec::SymmetricHPolytope { dim, .. } => *dim,
            BodySpec::LinearImage { inner, .. } => inner.dim(),
        }
    }

    /// Validate a deserialized spec (constructor invariants).
    pub fn validate(&self) -> Result<(), BodyError> {
        match self {
            BodySpec::LpBall { p, dim } => {
                Self::lp_ball(*p, *dim)?;
            }
            BodySpec::ScaledL1 { c, dim } => {
                Self::scaled_l1(*c, *dim)?;
            }
            BodySpec::SymmetricHPolytope { rows, dim } => {
                Self::h_polytope(rows.clone(), *dim)?;
            }
            BodySpec::LinearImage { inner, matrix } => {
                inner.validate()?;
                Self::linear_image((**inner).clone(), rows_to_matrix(matrix))?;
            }
        }
        Ok(())
    }

    /// The Minkowski functional `‖x‖_K = inf{r > 0 : x ∈ rK}`.
    pub fn minkowski_functional(&self, x: &[f64]) -> f64 {
        match self {
            BodySpec::LpBall { p, .. } => match p {
                PNorm::Infinity => x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                PNorm::Finite(p) => {
                    if *p == 1.0 {
                        x.iter().map(|v| v.abs()).sum()
                    } else if *p == 2.0 {
                        x.iter().map(|v| v * v).sum::<f64>().sqrt()
                    } else {
                        // Scale out the max to avoid overflow for large p.
                        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        if m == 0.0 {
                            0.0
                        } else {
                            m * x
                                .iter()
                                .map(|v| (v.abs() / m).powf(*p))
                                .sum::<f64>()
                                .powf(1.0 / *p)
                        }
                    }
                }
            },
            BodySpec::ScaledL1 { c, .. } => x.iter().map(|v| v.abs()).sum::<f64>() / c,
            BodySpec::SymmetricHPolytope { rows, .. } => rows
                .iter()
                .map(|r| {
                    let dot: f64 = r.normal.iter().zip(x).map(|(a, b)| a * b).sum();
                    dot.abs() / r.offset
                })
                .fold(0.0f64, f64::max),
            BodySpec::LinearImage { inner, matrix } => {
                let t = rows_to_matrix(matrix);
                let y = t
                    .clone()
                    .lu()
                    .solve(&DVector::from_column_slice(x))
                    .expect("matrix validated invertible");
                inner.minkowski_functional(y.as_slice())
            }
        }
    }

    /// Support function `h_K(θ) = max_{x ∈ K} ⟨θ, x⟩`.
    pub fn support_function(&self, theta: &[f64]) -> Result<f64, BodyError> {
        Ok(match self {
            BodySpec::LpBall { p, .. } => match p {
                // Dual norm: q with 1/p + 1/q = 1.
                PNorm::Infinity => theta.iter().map(|v| v.abs()).sum(),
                PNorm::Finite(p) => {
                    if *p == 1.0 {
                        theta.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                    } else {
                        let q = p / (p - 1.0);
                        let m = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        if m == 0.0 {
                            0.0
                        } else {
                            m * theta
                                .iter()
                                .map(|v| (v.abs() / m).powf(q))
                                .sum::<f64>()
                                .powf(1.0 / q)
                        }
                    }
                }
            },
            BodySpec::ScaledL1 { c, .. } => c * theta.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            BodySpec::SymmetricHPolytope { .. } => {
                let verts = self.h_polytope_vertices()?;
                verts
                    .iter()
                    .map(|v| v.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            BodySpec::LinearImage { inner, matrix } => {
                let t = rows_to_matrix(matrix);
                let tt_theta = t.transpose() * DVector::from_column_slice(theta);
                inner.support_function(tt_theta.as_slice())?
            }
        })
    }

    /// Half-widths of the tightest axis-aligned bounding box.
    pub fn bounding_box(&self) -> Result<Vec<f64>, BodyError> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                self.support_function(&e)
            })
            .collect()
    }

    /// Lebesgue volume of the body.
    pub fn volume(&self) -> Result<f64, BodyError> {
        Ok(match self {
            BodySpec::LpBall { p, dim } => lp_ball_volume(*p, *dim),
            BodySpec::ScaledL1 { c, dim } => {
                lp_ball_volume(PNorm::Finite(1.0), *dim) * c.powi(*dim as i32)
            }
            BodySpec::SymmetricHPolytope { .. } => {
                let hull = self.h_polytope_hull()?;
                hull.volume()
            }
            BodySpec::LinearImage { inner, matrix } => {
                let t = rows_to_matrix(matrix);
                inner.volume()? * t.determinant().abs()
            }
        })
    }

    /// Exact rational volume where available (ℓ1, cube, scaled ℓ1,
    /// H-polytopes in the exact range, and linear images of those).
    pub fn volume_exact(&self) -> Result<Option<Rational>, BodyError> {
        Ok(match self {
            BodySpec::LpBall { p, dim } => match p {
                PNorm::Infinity => Some(pow_rational(&Rational::from_int(2), *dim)),
                PNorm::Finite(p) if *p == 1.0 => Some(l1_volume_exact(*dim)),
                _ => None,
            },
            BodySpec::ScaledL1 { c, dim } => {
                Some(l1_volume_exact(*dim) * pow_rational(&Rational::from_f64_exact(*c), *dim))
            }
            BodySpec::SymmetricHPolytope { .. } => {
                Some(self.h_polytope_hull()?.volume_exact())
            }
            BodySpec::LinearImage { inner, matrix } => match inner.volume_exact()? {
                None => None,
                Some(v) => {
                    let rows: Vec<Vec<f64>> = matrix.clone();
                    let det = hull::predicates::det_exact_rational(&rows);
                    Some(v * num_traits::Signed::abs(&det))
                }
            },
        })
    }

    /// Normalized second moment matrix `E[x xᵀ]` of the uniform distribution.
    pub fn covariance(&self) -> Result<DMatrix<f64>, BodyError> {
        let n = self.dim();
        Ok(match self {
            BodySpec::LpBall { p, dim } => {
                DMatrix::identity(n, n) * lp_ball_second_moment(*p, *dim)
            }
            BodySpec::ScaledL1 { c, dim } => {
                DMatrix::identity(n, n) * (lp_ball_second_moment(PNorm::Finite(1.0), *dim) * c * c)
            }
            BodySpec::SymmetricHPolytope { .. } => {
                let hull = self.h_polytope_hull()?;
                hull.covariance()
            }
            BodySpec::LinearImage { inner, matrix } => {
                let t = rows_to_matrix(matrix);
                let m = inner.covariance()?;
                &t * m * t.transpose()
            }
        })
    }

    /// True when the body is invariant under all coordinate sign flips.
    ///
    /// Detection is structural and conservative: box-like H-polytopes and
    /// diagonal linear images of unconditional bodies are recognized; other
    /// configurations report `false` even if they happen to be unconditional.
    pub fn is_unconditional(&self) -> bool {
        match self {
            BodySpec::LpBall { .. } | BodySpec::ScaledL1 { .. } => true,
            BodySpec::SymmetricHPolytope { rows, .. } => rows
                .iter()
                .all(|r| r.normal.iter().filter(|v| **v != 0.0).count() <= 1),
            BodySpec::LinearImage { inner, matrix } => {
                inner.is_unconditional()
                    && matrix
                        .iter()
                        .enumerate()
                        .all(|(i, row)| row.iter().enumerate().all(|(j, v)| i == j || *v == 0.0))
            }
        }
    }

    /// Volume, covariance and isotropic constant in one record.
    pub fn isotropic_profile(&self) -> Result<IsotropicProfile, BodyError> {
        let volume = self.volume()?;
        let covariance = self.covariance()?;
        let isotropic_constant = isotropic_constant_from(volume, &covariance)?;
        Ok(IsotropicProfile {
            volume,
            covariance,
            isotropic_constant,
            is_unconditional: self.is_unconditional(),
        })
    }

    /// Isotropic constant `L_K = det(Cov)^{1/2n} / |K|^{1/n}`, the closed-form
    /// minimizer of the GL(n) volume-normalized second-moment functional.
    pub fn isotropic_constant(&self) -> Result<f64, BodyError> {
        let p = self.isotropic_profile()?;
        Ok(p.isotropic_constant)
    }

    /// The linear map that puts the body in isotropic position, and the body.
    ///
    /// Returns `LinearImage(self, T)` with `|TK| = 1` and covariance `L_K² I`.
    /// For bodies with diagonal covariance the map is diagonal.
    pub fn isotropic_normalize(&self) -> Result<BodySpec, BodyError> {
        let t = self.isotropic_map()?;
        BodySpec::linear_image(self.clone(), t)
    }

    /// The normalization map alone.
    pub fn isotropic_map(&self) -> Result<DMatrix<f64>, BodyError> {
        let n = self.dim();
        let volume = self.volume()?;
        let m = self.covariance()?;
        let chol = m.clone().cholesky().ok_or(BodyError::SingularCovariance)?;
        let ln_det_m = 2.0 * (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>();
        // s^n = sqrt(det M) / volume, so that |T K| = 1.
        let s = ((0.5 * ln_det_m - volume.ln()) / n as f64).exp();
        let off_diag_max = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m[(i, j)].abs())
            .fold(0.0f64, f64::max);
        let diag_scale = (0..n).map(|i| m[(i, i)].abs()).fold(f64::NEG_INFINITY, f64::max);
        if off_diag_max <= 1e-12 * diag_scale {
            // Diagonal covariance: keep the map diagonal.
            Ok(DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    s / m[(i, i)].sqrt()
                } else {
                    0.0
                }
            }))
        } else {
            let eig = nalgebra::SymmetricEigen::new(m);
            if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
                return Err(BodyError::SingularCovariance);
            }
            let d_inv_sqrt = DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    1.0 / eig.eigenvalues[i].sqrt()
                } else {
                    0.0
                }
            });
            Ok(d_inv_sqrt * eig.eigenvectors.transpose() * s)
        }
    }

    /// Vertices of a symmetric H-polytope by constraint-intersection
    /// enumeration (exact path limited to dim ≤ 8).
    pub fn h_polytope_vertices(&self) -> Result<Vec<Vec<f64>>, BodyError> {
        let BodySpec::SymmetricHPolytope { rows, dim } = self else {
            return Err(BodyError::Invalid("not an H-polytope".into()));
        };
        let n = *dim;
        if n > hull::MAX_EXACT_DIM {
            return Err(BodyError::DimensionTooLarge {
                dim: n,
                max: hull::MAX_EXACT_DIM,
            });
        }
        // The 2m halfspaces ⟨±a_i, x⟩ ≤ b_i.
        let mut halfspaces: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * rows.len());
        for r in rows {
            halfspaces.push((r.normal.clone(), r.offset));
            halfspaces.push((r.normal.iter().map(|v| -v).collect(), r.offset));
        }
        let m = halfspaces.len();
        let combos = count_combinations(m, n);
        if combos > 2_000_000 {
            return Err(BodyError::Invalid(format!(
                "H-polytope vertex enumeration too large: C({m},{n}) = {combos}"
            )));
        }
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let a = DMatrix::from_fn(n, n, |r, c| halfspaces[idx[r]].0[c]);
            let b = DVector::from_fn(n, |r, _| halfspaces[idx[r]].1);
            if let Some(x) = a.lu().solve(&b) {
                if x.iter().all(|v| v.is_finite()) {
                    let feasible = halfspaces.iter().all(|(normal, offset)| {
                        let dot: f64 = normal.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                        dot <= offset * (1.0 + 1e-9) + 1e-12
                    });
                    if feasible {
                        let xs: Vec<f64> = x.iter().copied().collect();
                        let is_new = vertices.iter().all(|v| {
                            v.iter()
                                .zip(&xs)
                                .map(|(a, b)| (a - b).abs())
                                .fold(0.0f64, f64::max)
                                > 1e-9
                        });
                        if is_new {
                            vertices.push(xs);
                        }
                    }
                }
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
        if vertices.len() < n + 1 {
            return Err(BodyError::Invalid("H-polytope appears unbounded or empty".into()));
        }
        Ok(vertices)
    }

    fn h_polytope_hull(&self) -> Result<hull::SymmetricPolytope, BodyError> {
        let vertices = self.h_polytope_vertices()?;
        Ok(hull::build_hull(self.dim(), &vertices)?)
    }
}

/// L_K from a volume and a normalized covariance matrix.
pub fn isotropic_constant_from(volume: f64, cov: &DMatrix<f64>) -> Result<f64, BodyError> {
    let n = cov.nrows();
    let chol = cov.clone().cholesky().ok_or(BodyError::SingularCovariance)?;
    let ln_det = 2.0 * (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>();
    Ok((ln_det / (2.0 * n as f64) - volume.ln() / n as f64).exp())
}

/// `|B_p^n| = (2 Γ(1 + 1/p))^n / Γ(1 + n/p)`.
pub fn lp_ball_volume(p: PNorm, n: usize) -> f64 {
    match p {
        PNorm::Infinity => 2f64.powi(n as i32),
        PNorm::Finite(p) => {
            let ln_vol = n as f64 * (std::f64::consts::LN_2 + ln_gamma(1.0 + 1.0 / p))
                - ln_gamma(1.0 + n as f64 / p);
            ln_vol.exp()
        }
    }
}

/// `E[x_1²]` under the uniform distribution on `B_p^n`, by the Dirichlet
/// (one-dimensional Gamma) reduction.
pub fn lp_ball_second_moment(p: PNorm, n: usize) -> f64 {
    match p {
        PNorm::Infinity => 1.0 / 3.0,
        PNorm::Finite(p) => {
            let ln_m = ln_gamma(3.0 / p) + ln_gamma(1.0 + n as f64 / p)
                - ln_gamma(1.0 / p)
                - ln_gamma(1.0 + (n as f64 + 2.0) / p);
            ln_m.exp()
        }
    }
}

/// Exact `|B_1^n| = 2^n / n!`.
pub fn l1_volume_exact(n: usize) -> Rational {
    Rational::new(BigInt::from(2).pow(n as u32), crate::scalar::factorial(n))
}

fn pow_rational(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::from_int(1);
    for _ in 0..exp {
        acc *= base.clone();
    }
    acc
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let cols = if n == 0 { 0 } else { rows[0].len() };
    DMatrix::from_fn(n, cols, |i, j| rows[i][j])
}

fn count_combinations(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(m - k) {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Advance `idx` to the next k-combination of `0..m`; false when exhausted.
pub(crate) fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + m - k {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn minkowski_functional_examples() {
        let cube = BodySpec::cube(2);
        assert_relative_eq!(cube.minkowski_functional(&[0.5, -0.2]), 0.5);
        let b1 = BodySpec::l1_ball(2);
        assert_relative_eq!(b1.minkowski_functional(&[0.3, 0.3]), 0.6);
        let scaled = BodySpec::linear_image(b1, DMatrix::identity(2, 2) * 2.0).unwrap();
        assert_relative_eq!(scaled.minkowski_functional(&[0.3, 0.3]), 0.3, epsilon = 1e-12);
        assert_eq!(BodySpec::cube(3).minkowski_functional(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn volumes() {
        assert_relative_eq!(BodySpec::l1_ball(2).volume().unwrap(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(
            BodySpec::l1_ball(3).volume().unwrap(),
            4.0 / 3.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(BodySpec::cube(3).volume().unwrap(), 8.0);
        // p = 2 gives the Euclidean ball.
        let b2 = BodySpec::lp_ball(PNorm::Finite(2.0), 2).unwrap();
        assert_relative_eq!(b2.volume().unwrap(), std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn second_moments() {
        // Uniform on [-1,1]: variance 1/3.
        assert_relative_eq!(lp_ball_second_moment(PNorm::Infinity, 4), 1.0 / 3.0);
        // B_1^n: 2/((n+1)(n+2)).
        for n in 1..=5 {
            assert_relative_eq!(
                lp_ball_second_moment(PNorm::Finite(1.0), n),
                2.0 / ((n as f64 + 1.0) * (n as f64 + 2.0)),
                epsilon = 1e-12
            );
        }
        // Euclidean disk: 1/4.
        assert_relative_eq!(
            lp_ball_second_moment(PNorm::Finite(2.0), 2),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn isotropic_constants() {
        for n in [2usize, 3, 5] {
            assert_relative_eq!(
                BodySpec::cube(n).isotropic_constant().unwrap(),
                1.0 / 12f64.sqrt(),
                epsilon = 1e-12
            );
        }
        assert_relative_eq!(
            BodySpec::l1_ball(2).isotropic_constant().unwrap(),
            1.0 / 12f64.sqrt(),
            epsilon = 1e-12
        );
        // Scale invariance via diagonal boxes.
        let b = BodySpec::diagonal_box(&[0.5, 2.0, 7.0]).unwrap();
        assert_relative_eq!(
            b.isotropic_constant().unwrap(),
            1.0 / 12f64.sqrt(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn normalize_cube_and_l1() {
        let cube = BodySpec::cube(3);
        let norm = cube.isotropic_normalize().unwrap();
        assert_relative_eq!(norm.volume().unwrap(), 1.0, epsilon = 1e-12);
        // [-1/2, 1/2]^n: map is I/2.
        if let BodySpec::LinearImage { matrix, .. } = &norm {
            for (i, row) in matrix.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let expect = if i == j { 0.5 } else { 0.0 };
                    assert_relative_eq!(*v, expect, epsilon = 1e-12);
                }
            }
        } else {
            panic!("normalize must return a linear image");
        }

        let b1 = BodySpec::l1_ball(2).isotropic_normalize().unwrap();
        assert_relative_eq!(b1.volume().unwrap(), 1.0, epsilon = 1e-12);
        let cov = b1.covariance().unwrap();
        // Covariance (1/12) I, i.e. the isotropic constant squared.
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 / 12.0 } else { 0.0 };
                assert_relative_eq!(cov[(i, j)], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let body = BodySpec::diagonal_box(&[0.3, 1.0, 4.0]).unwrap();
        let once = body.isotropic_normalize().unwrap();
        let twice = once.isotropic_normalize().unwrap();
        if let BodySpec::LinearImage { matrix, .. } = &twice {
            for (i, row) in matrix.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-9, "second map not identity");
                }
            }
        } else {
            panic!("expected linear image");
        }
    }

    #[test]
    fn condition_number_cap_enforced() {
        let mut t = DMatrix::identity(3, 3);
        t[(0, 0)] = 1e8;
        match BodySpec::linear_image(BodySpec::cube(3), t) {
            Err(BodyError::ConditionNumber { .. }) => {}
            other => panic!("expected condition-number error, got {other:?}"),
        }
    }

    #[test]
    fn h_polytope_box_vertices_and_volume() {
        // |x| ≤ 1, |y| ≤ 2 → rectangle, volume 8.
        let rows = vec![
            HalfspacePair {
                normal: vec![1.0, 0.0],
                offset: 1.0,
            },
            HalfspacePair {
                normal: vec![0.0, 1.0],
                offset: 2.0,
            },
        ];
        let body = BodySpec::h_polytope(rows, 2).unwrap();
        let verts = body.h_polytope_vertices().unwrap();
        assert_eq!(verts.len(), 4);
        assert_relative_eq!(body.volume().unwrap(), 8.0, epsilon = 1e-9);
        assert!(body.is_unconditional());
        let cov = body.covariance().unwrap();
        assert_relative_eq!(cov[(0, 0)], 1.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(cov[(1, 1)], 4.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn rotated_cube_is_isotropic_not_unconditional() {
        let rc = BodySpec::rotated_cube(4, 11).unwrap();
        assert!(!rc.is_unconditional());
        assert_relative_eq!(rc.volume().unwrap(), 1.0, epsilon = 1e-9);
        let cov = rc.covariance().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 / 12.0 } else { 0.0 };
                assert_relative_eq!(cov[(i, j)], expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"kind": "lp_ball", "p": 1.0, "dim": 4}"#;
        let body: BodySpec = serde_json::from_str(json).unwrap();
        assert_eq!(body.dim(), 4);
        body.validate().unwrap();
        let cube: BodySpec = serde_json::from_str(r#"{"kind": "lp_ball", "p": "inf", "dim": 3}"#).unwrap();
        assert!(matches!(cube, BodySpec::LpBall { p: PNorm::Infinity, dim: 3 }));
        let round = serde_json::to_string(&cube).unwrap();
        let back: BodySpec = serde_json::from_str(&round).unwrap();
        assert!(matches!(back, BodySpec::LpBall { p: PNorm::Infinity, dim: 3 }));
    }

    #[test]
    fn exact_volumes() {
        use num_bigint::BigInt;
        let v = BodySpec::l1_ball(4).volume_exact().unwrap().unwrap();
        assert_eq!(v, Rational::new(BigInt::from(16), BigInt::from(24)));
        let c = BodySpec::cube(3).volume_exact().unwrap().unwrap();
        assert_eq!(c, Rational::from_int(8));
        assert!(BodySpec::lp_ball(PNorm::Finite(3.0), 3)
            .unwrap()
            .volume_exact()
            .unwrap()
            .is_none());
    }
}
