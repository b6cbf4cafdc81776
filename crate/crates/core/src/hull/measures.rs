//! Measures over the cone-simplex decomposition of a symmetric polytope.
//!
//! Every facet `{y_1, …, y_n}` spans the cone simplex `conv{0, y_1, …, y_n}`;
//! the facets tile the boundary, so these simplices tile the polytope. Volume
//! is `Σ |det[y_1 … y_n]| / n!`, second moments come from the standard simplex
//! moment formula, and `∫ ‖x‖₁` is computed exactly by clipping each simplex
//! to the coordinate orthants. All kernels are generic over the scalar, so the
//! same code yields the fast f64 values and the exact rational ones.

use super::{predicates, SymmetricPolytope};
use crate::scalar::{GeomScalar, Rational};
use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

/// Exact orthant clipping for `∫ ‖x‖₁` is limited to this dimension
/// (the piece count grows quickly with the number of coordinate cuts).
pub const MAX_L1_EXACT_DIM: usize = 4;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("exact ∫‖x‖₁ requested in dimension {dim}, supported only for n ≤ {max}")]
    DimensionTooLarge { dim: usize, max: usize },
}

fn facet_matrix<S: GeomScalar>(poly: &SymmetricPolytope, facet: usize) -> Vec<Vec<S>> {
    poly.facets()[facet]
        .vertices
        .iter()
        .map(|&vi| poly.point(vi).iter().map(|&x| S::from_f64_exact(x)).collect())
        .collect()
}

/// Volume over any scalar: Σ |det| / n!.
pub fn volume_generic<S: GeomScalar>(poly: &SymmetricPolytope) -> S {
    let n = poly.dim();
    let mut total = S::zero();
    for fi in 0..poly.facets().len() {
        let det = predicates::det_generic::<S>(facet_matrix(poly, fi));
        total = total + det.abs();
    }
    let mut fact = S::one();
    for k in 2..=n {
        fact = fact * S::from_int(k as i64);
    }
    total / fact
}

pub fn volume_exact(poly: &SymmetricPolytope) -> Rational {
    volume_generic::<Rational>(poly)
}

/// Second moment matrix `∫_P x xᵀ dx` over any scalar.
///
/// Per cone simplex with vertices `0, y_1, …, y_n` and volume `v`:
/// `∫ x_a x_b = v/((n+1)(n+2)) (Σ_i y_ia y_ib + s_a s_b)`, `s = Σ_i y_i`.
pub fn second_moment_generic<S: GeomScalar>(poly: &SymmetricPolytope) -> Vec<Vec<S>> {
    let n = poly.dim();
    let mut fact = S::one();
    for k in 2..=n {
        fact = fact * S::from_int(k as i64);
    }
    let denom = fact * S::from_int(((n + 1) * (n + 2)) as i64);
    let mut m: Vec<Vec<S>> = vec![vec![S::zero(); n]; n];
    for fi in 0..poly.facets().len() {
        let ys = facet_matrix::<S>(poly, fi);
        let vol_scaled = predicates::det_generic::<S>(ys.clone()).abs();
        if vol_scaled.is_zero() {
            continue;
        }
        let mut s = vec![S::zero(); n];
        for y in &ys {
            for (si, yi) in s.iter_mut().zip(y.iter()) {
                *si = si.clone() + yi.clone();
            }
        }
        for a in 0..n {
            for b in a..n {
                let mut acc = S::zero();
                for y in &ys {
                    acc = acc + y[a].clone() * y[b].clone();
                }
                acc = acc + s[a].clone() * s[b].clone();
                let contrib = vol_scaled.clone() * acc / denom.clone();
                m[a][b] = m[a][b].clone() + contrib.clone();
                if a != b {
                    m[b][a] = m[b][a].clone() + contrib;
                }
            }
        }
    }
    m
}

/// f64 volume and second moment in one pass (used by `build_hull`).
pub fn volume_and_second_moment(poly: &SymmetricPolytope) -> (f64, DMatrix<f64>) {
    let n = poly.dim();
    let mut fact = 1.0f64;
    for k in 2..=n {
        fact *= k as f64;
    }
    let moment_denom = fact * ((n + 1) * (n + 2)) as f64;
    let mut total_det = 0.0f64;
    let mut m = DMatrix::zeros(n, n);
    let mut a = vec![0.0f64; n * n];
    let mut s = vec![0.0f64; n];
    for facet in poly.facets() {
        for (i, &vi) in facet.vertices.iter().enumerate() {
            a[i * n..(i + 1) * n].copy_from_slice(poly.point(vi));
        }
        let det = det_flat(&mut a, n).abs();
        total_det += det;
        if det == 0.0 {
            continue;
        }
        for (j, slot) in s.iter_mut().enumerate() {
            *slot = facet
                .vertices
                .iter()
                .map(|&vi| poly.point(vi)[j])
                .sum::<f64>();
        }
        let w = det / moment_denom;
        for i in 0..n {
            for j in i..n {
                let mut acc = s[i] * s[j];
                for &vi in &facet.vertices {
                    let y = poly.point(vi);
                    acc += y[i] * y[j];
                }
                m[(i, j)] += w * acc;
                if i != j {
                    m[(j, i)] += w * acc;
                }
            }
        }
    }
    (total_det / fact, m)
}

/// Plain in-place LU determinant on a flat row-major matrix (destructive).
fn det_flat(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0f64;
    for k in 0..n {
        let mut piv = k;
        for r in (k + 1)..n {
            if a[r * n + k].abs() > a[piv * n + k].abs() {
                piv = r;
            }
        }
        if a[piv * n + k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in k..n {
                a.swap(piv * n + j, k * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for r in (k + 1)..n {
            let f = a[r * n + k] / pivot;
            if f != 0.0 {
                for j in (k + 1)..n {
                    a[r * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    det
}

pub fn second_moment_exact(poly: &SymmetricPolytope) -> Vec<Vec<Rational>> {
    second_moment_generic::<Rational>(poly)
}

/// A simplex as a vertex list (n+1 points of dimension n).
type Simplex<S> = Vec<Vec<S>>;

fn simplex_volume<S: GeomScalar>(simplex: &Simplex<S>, factorial_n: &S) -> S {
    let n = simplex.len() - 1;
    let rows: Vec<Vec<S>> = (1..=n)
        .map(|i| {
            simplex[i]
                .iter()
                .zip(simplex[0].iter())
                .map(|(a, b)| a.clone() - b.clone())
                .collect()
        })
        .collect();
    predicates::det_generic::<S>(rows).abs() / factorial_n.clone()
}

/// Split `simplex` by the hyperplane `x_coord = 0` into one-signed pieces.
fn split_by_coordinate<S: GeomScalar>(simplex: Simplex<S>, coord: usize, out: &mut Vec<Simplex<S>>) {
    let pos = simplex.iter().position(|v| v[coord] > S::zero());
    let neg = simplex.iter().position(|v| v[coord] < S::zero());
    match (pos, neg) {
        (Some(ip), Some(im)) => {
            let vp = simplex[ip].clone();
            let vm = simplex[im].clone();
            // Intersection of the edge [vp, vm] with the hyperplane.
            let t = vp[coord].clone() / (vp[coord].clone() - vm[coord].clone());
            let w: Vec<S> = vp
                .iter()
                .zip(vm.iter())
                .map(|(a, b)| a.clone() + t.clone() * (b.clone() - a.clone()))
                .collect();
            let mut s1 = simplex.clone();
            s1[ip] = w.clone();
            let mut s2 = simplex;
            s2[im] = w;
            split_by_coordinate(s1, coord, out);
            split_by_coordinate(s2, coord, out);
        }
        _ => out.push(simplex),
    }
}

/// Exact `∫_P ‖x‖₁ dx` by orthant clipping (n ≤ MAX_L1_EXACT_DIM).
pub fn integral_l1_generic<S: GeomScalar>(poly: &SymmetricPolytope) -> Result<S, MeasureError> {
    let n = poly.dim();
    if n > MAX_L1_EXACT_DIM {
        return Err(MeasureError::DimensionTooLarge {
            dim: n,
            max: MAX_L1_EXACT_DIM,
        });
    }
    let mut factorial_n = S::one();
    for k in 2..=n {
        factorial_n = factorial_n * S::from_int(k as i64);
    }
    let np1 = S::from_int((n + 1) as i64);
    let mut total = S::zero();
    for fi in 0..poly.facets().len() {
        let mut ys = facet_matrix::<S>(poly, fi);
        ys.insert(0, vec![S::zero(); n]);
        let mut pieces: Vec<Simplex<S>> = vec![ys];
        for coord in 0..n {
            let mut next = Vec::with_capacity(pieces.len() * 2);
            for s in pieces {
                split_by_coordinate(s, coord, &mut next);
            }
            pieces = next;
        }
        for piece in pieces {
            let vol = simplex_volume(&piece, &factorial_n);
            if vol.is_zero() {
                continue;
            }
            // ∫_S Σ_j σ_j x_j = vol * Σ_j σ_j centroid_j; the piece lies in one
            // orthant, so σ_j is the sign of the centroid coordinate.
            let mut acc = S::zero();
            for j in 0..n {
                let mut cj = S::zero();
                for v in &piece {
                    cj = cj + v[j].clone();
                }
                acc = acc + (cj / np1.clone()).abs();
            }
            total = total + vol * acc;
        }
    }
    Ok(total)
}

pub fn integral_l1_exact(poly: &SymmetricPolytope) -> Result<Rational, MeasureError> {
    integral_l1_generic::<Rational>(poly)
}

/// Cumulative cone-simplex volumes, for uniform sampling inside the polytope.
pub struct SimplexSampler {
    cumulative: Vec<f64>,
}

impl SimplexSampler {
    pub fn new(poly: &SymmetricPolytope) -> Self {
        let mut cumulative = Vec::with_capacity(poly.facets().len());
        let mut acc = 0.0;
        for fi in 0..poly.facets().len() {
            let det = predicates::det_generic::<f64>(facet_matrix::<f64>(poly, fi)).abs();
            acc += det;
            cumulative.push(acc);
        }
        SimplexSampler { cumulative }
    }

    /// One uniform point in the polytope: pick a cone simplex by volume, then
    /// a Dirichlet(1,…,1) point inside it.
    pub fn sample<R: Rng>(&self, poly: &SymmetricPolytope, rng: &mut R) -> Vec<f64> {
        let total = *self.cumulative.last().expect("at least one facet");
        let u: f64 = rng.random::<f64>() * total;
        let fi = self.cumulative.partition_point(|&c| c < u).min(self.cumulative.len() - 1);
        let n = poly.dim();
        let mut weights: Vec<f64> = (0..=n)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let sum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= sum;
        }
        // Vertex 0 of the cone simplex is the origin; skip its contribution.
        let mut x = vec![0.0; n];
        for (k, &vi) in poly.facets()[fi].vertices.iter().enumerate() {
            let w = weights[k + 1];
            for (xj, &pj) in x.iter_mut().zip(poly.point(vi)) {
                *xj += w * pj;
            }
        }
        x
    }
}

/// Monte Carlo `∫_P ‖x‖₁ dx` via uniform simplex sampling.
///
/// Returns `(estimate, standard_error)`.
pub fn integral_l1_mc<R: Rng>(poly: &SymmetricPolytope, samples: usize, rng: &mut R) -> (f64, f64) {
    let sampler = SimplexSampler::new(poly);
    let vol = poly.volume();
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let x = sampler.sample(poly, rng);
            x.iter().map(|v| v.abs()).sum::<f64>()
        })
        .collect();
    let mean = crate::stats::mean(&values);
    let se = crate::stats::standard_error(&values);
    (mean * vol, se * vol)
}

/// Which norm the facet sign-sum statistic maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignSumNorm {
    L1,
    L2Squared,
}

/// `max` over facets `{y_1..y_n}` and sign vectors `ε` of `‖Σ ε_i y_i‖`
/// (1-norm or squared 2-norm). Signs are enumerated in Gray-code order with
/// the ε ↔ -ε symmetry factored out.
pub fn facet_sign_sum_max(poly: &SymmetricPolytope, norm: SignSumNorm) -> f64 {
    let n = poly.dim();
    assert!(n <= 20, "sign enumeration capped at n ≤ 20");
    let mut best = 0.0f64;
    let mut sum = vec![0.0f64; n];
    for facet in poly.facets() {
        let ys: Vec<&[f64]> = facet.vertices.iter().map(|&vi| poly.point(vi)).collect();
        best = best.max(sign_sum_max_over(&ys, norm, &mut sum));
    }
    best
}

/// Gray-code maximum of `‖Σ ε_i y_i‖` over ε with ε_1 fixed to +1.
pub(crate) fn sign_sum_max_over(ys: &[&[f64]], norm: SignSumNorm, sum: &mut [f64]) -> f64 {
    let n = ys.len();
    let dim = sum.len();
    for slot in sum.iter_mut() {
        *slot = 0.0;
    }
    for y in ys {
        for (s, &v) in sum.iter_mut().zip(y.iter()) {
            *s += v;
        }
    }
    let eval = |s: &[f64]| -> f64 {
        match norm {
            SignSumNorm::L1 => s.iter().map(|v| v.abs()).sum(),
            SignSumNorm::L2Squared => s.iter().map(|v| v * v).sum(),
        }
    };
    let mut best = eval(sum);
    if n <= 1 {
        return best;
    }
    // Gray code over the last n-1 signs; bit i of the code controls y_{i+1}.
    let steps = 1u64 << (n - 1);
    let mut code = 0u64;
    for k in 1..steps {
        let next = k ^ (k >> 1);
        let flipped = (code ^ next).trailing_zeros() as usize;
        code = next;
        let y = ys[flipped + 1];
        let sign_now = if next >> flipped & 1 == 1 { -1.0 } else { 1.0 };
        // Transition: the sign of y flips, so the sum changes by ±2y.
        for j in 0..dim {
            sum[j] += 2.0 * sign_now * y[j];
        }
        let v = eval(sum);
        if v > best {
            best = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::build_hull;
    use crate::scalar::Rational;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_vectors(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    fn rational(num: i64, den: i64) -> Rational {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn cross_polytope_volume_is_exact() {
        for n in 1..=6 {
            let hull = build_hull(n, &unit_vectors(n)).unwrap();
            let mut expect = rational(2, 1);
            for k in 2..=n {
                expect *= rational(2, k as i64);
            }
            assert_eq!(hull.volume_exact(), expect, "n = {n}");
        }
    }

    #[test]
    fn cross_polytope_second_moment_matches_monomial_formula() {
        // ∫_{B1^n} x_i^2 dx = 2^{n+1} / (n+2)!; off-diagonal entries vanish.
        for n in 2..=4 {
            let hull = build_hull(n, &unit_vectors(n)).unwrap();
            let m = second_moment_exact(&hull);
            let mut fact = BigInt::from(1);
            for k in 2..=(n + 2) {
                fact *= BigInt::from(k);
            }
            let expect = Rational::new(BigInt::from(2).pow((n + 1) as u32), fact);
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        assert_eq!(m[i][j], expect);
                    } else {
                        assert!(m[i][j].is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn square_l1_integral() {
        // Square [-1,1]^2: ∫ ‖x‖₁ = 4 (mean 1 over volume 4).
        let hull = build_hull(2, &[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(integral_l1_exact(&hull).unwrap(), rational(4, 1));
    }

    #[test]
    fn cross_polytope_l1_integral() {
        // B1^2: ∫ ‖x‖₁ = 4/3 (the gauge equals the 1-norm).
        let hull = build_hull(2, &unit_vectors(2)).unwrap();
        assert_eq!(integral_l1_exact(&hull).unwrap(), rational(4, 3));
        // B1^3: ∫ ‖x‖₁ = |B1^3| * n/(n+1) = (4/3)(3/4) = 1.
        let hull3 = build_hull(3, &unit_vectors(3)).unwrap();
        assert_eq!(integral_l1_exact(&hull3).unwrap(), rational(1, 1));
    }

    #[test]
    fn l1_exact_dimension_cap() {
        let hull = build_hull(5, &unit_vectors(5)).unwrap();
        assert!(matches!(
            integral_l1_exact(&hull),
            Err(MeasureError::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn l1_mc_agrees_with_exact() {
        let pts = vec![
            vec![0.9, 0.1, -0.3],
            vec![-0.2, 0.8, 0.4],
            vec![0.3, -0.5, 0.7],
            vec![0.6, 0.6, 0.1],
        ];
        let hull = build_hull(3, &pts).unwrap();
        let exact = integral_l1_exact(&hull).unwrap().to_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (mc, se) = integral_l1_mc(&hull, 40_000, &mut rng);
        assert!(
            (mc - exact).abs() <= 4.0 * se,
            "mc {mc} vs exact {exact} (se {se})"
        );
    }

    #[test]
    fn sign_sum_max_cross_polytope() {
        let hull = build_hull(2, &unit_vectors(2)).unwrap();
        assert_relative_eq!(facet_sign_sum_max(&hull, SignSumNorm::L1), 2.0);
        assert_relative_eq!(facet_sign_sum_max(&hull, SignSumNorm::L2Squared), 2.0);
    }

    #[test]
    fn sign_sum_max_matches_brute_force() {
        let pts = vec![
            vec![0.9, 0.1, -0.3],
            vec![-0.2, 0.8, 0.4],
            vec![0.3, -0.5, 0.7],
            vec![0.6, 0.6, 0.1],
            vec![-0.4, 0.2, 0.9],
            vec![0.1, -0.7, -0.2],
        ];
        let hull = build_hull(3, &pts).unwrap();
        for norm in [SignSumNorm::L1, SignSumNorm::L2Squared] {
            let fast = facet_sign_sum_max(&hull, norm);
            // Unpruned enumeration over all facets and all 2^n sign vectors.
            let mut brute = 0.0f64;
            for facet in hull.facets() {
                let n = hull.dim();
                for mask in 0..(1u32 << n) {
                    let mut s = vec![0.0; n];
                    for (i, &vi) in facet.vertices.iter().enumerate() {
                        let sign = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                        for (sj, &pj) in s.iter_mut().zip(hull.point(vi)) {
                            *sj += sign * pj;
                        }
                    }
                    let v = match norm {
                        SignSumNorm::L1 => s.iter().map(|v| v.abs()).sum::<f64>(),
                        SignSumNorm::L2Squared => s.iter().map(|v| v * v).sum::<f64>(),
                    };
                    brute = brute.max(v);
                }
            }
            assert_relative_eq!(fast, brute, epsilon = 1e-10);
        }
    }

    #[test]
    fn volume_monotone_under_generators() {
        let mut pts = vec![
            vec![0.9, 0.1, -0.3],
            vec![-0.2, 0.8, 0.4],
            vec![0.3, -0.5, 0.7],
        ];
        let v0 = build_hull(3, &pts).unwrap().volume();
        pts.push(vec![0.7, -0.6, 0.2]);
        let v1 = build_hull(3, &pts).unwrap().volume();
        assert!(v1 >= v0);
    }

    #[test]
    fn mc_volume_cross_check() {
        // Rejection sampling over the bounding box as an independent oracle.
        let pts = vec![
            vec![0.9, 0.1, -0.3],
            vec![-0.2, 0.8, 0.4],
            vec![0.3, -0.5, 0.7],
            vec![0.6, 0.6, 0.1],
        ];
        let hull = build_hull(3, &pts).unwrap();
        let box_half = hull.bounding_box();
        let box_vol: f64 = box_half.iter().map(|h| 2.0 * h).product();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let total = 200_000usize;
        let mut hits = 0usize;
        for _ in 0..total {
            let x: Vec<f64> = box_half
                .iter()
                .map(|&h| rng.random_range(-h..h))
                .collect();
            if hull.contains(&x, 0.0) {
                hits += 1;
            }
        }
        let p = hits as f64 / total as f64;
        let est = p * box_vol;
        let se = crate::stats::binomial_se(p, total) * box_vol;
        assert!(
            (est - hull.volume()).abs() <= 4.0 * se,
            "mc {est} vs exact {} (se {se})",
            hull.volume()
        );
    }
}
