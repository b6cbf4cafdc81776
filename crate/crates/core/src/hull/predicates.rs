//! Determinant sign predicates for the hull construction.
//!
//! The fast path runs floating-point Gaussian elimination while tracking a
//! certified absolute error bound for every intermediate quantity. When the
//! bound cannot separate the determinant from zero the computation falls back
//! to exact big-integer arithmetic: every `f64` is a dyadic rational, so the
//! matrix can be row-scaled to integers without changing the sign.

use crate::scalar::{GeomScalar, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Unit roundoff of f64 under round-to-nearest.
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
/// Final inflation of the accumulated bound, covering the rounding of the
/// bound arithmetic itself ((1+u)^{O(n³)} ≤ 1 + 1e-11 for n ≤ 8, so 1e-6 of
/// slack is rigorous with eight orders of margin).
const BOUND_INFLATE: f64 = 1.0 + 1e-6;

/// A value with a certified absolute error bound: |true - v| <= e (up to the
/// final [`BOUND_INFLATE`] applied at the sign decision).
#[derive(Clone, Copy, Debug)]
struct Bounded {
    v: f64,
    e: f64,
}

impl Bounded {
    #[inline]
    fn exact(v: f64) -> Self {
        Bounded { v, e: 0.0 }
    }

    #[inline]
    fn sub(self, o: Self) -> Self {
        let v = self.v - o.v;
        Bounded {
            v,
            e: self.e + o.e + UNIT_ROUNDOFF * v.abs(),
        }
    }

    #[inline]
    fn mul(self, o: Self) -> Self {
        let v = self.v * o.v;
        Bounded {
            v,
            e: self.v.abs() * o.e + o.v.abs() * self.e + self.e * o.e + UNIT_ROUNDOFF * v.abs(),
        }
    }

    /// Division; `None` when the divisor's sign is itself uncertain.
    #[inline]
    fn div(self, o: Self) -> Option<Self> {
        if o.v.abs() <= o.e * BOUND_INFLATE {
            return None;
        }
        let v = self.v / o.v;
        Some(Bounded {
            v,
            e: (self.e + v.abs() * o.e) / (o.v.abs() - o.e) + UNIT_ROUNDOFF * v.abs(),
        })
    }

    /// Certain sign, if the bound separates the value from zero.
    #[inline]
    fn sign(self) -> Option<i8> {
        if self.v.abs() > self.e * BOUND_INFLATE {
            Some(if self.v > 0.0 { 1 } else { -1 })
        } else if self.v == 0.0 && self.e == 0.0 {
            Some(0)
        } else {
            None
        }
    }
}

/// Reusable workspace for the allocation-free sign predicates.
#[derive(Default)]
pub struct DetScratch {
    bnd: Vec<Bounded>,
    rows: Vec<Vec<f64>>,
}

/// Sign of the determinant of the n×n matrix `get(i, j)`, allocation-free on
/// the fast path. Falls back to exact big-integer arithmetic when the
/// certified bound cannot separate the value from zero.
pub fn det_sign_with<F: Fn(usize, usize) -> f64>(
    scratch: &mut DetScratch,
    n: usize,
    get: F,
) -> i8 {
    scratch.bnd.clear();
    scratch
        .bnd
        .extend((0..n * n).map(|k| Bounded::exact(get(k / n, k % n))));
    if let Some(s) = det_sign_bounded_flat(&mut scratch.bnd, n) {
        return s;
    }
    scratch.rows.clear();
    scratch
        .rows
        .extend((0..n).map(|i| (0..n).map(|j| get(i, j)).collect::<Vec<f64>>()));
    let d = det_exact_rational(&scratch.rows);
    if d.is_zero() {
        0
    } else if d.is_positive() {
        1
    } else {
        -1
    }
}

/// In-place bounded-error LU on a flat row-major matrix; `None` if uncertain.
fn det_sign_bounded_flat(a: &mut [Bounded], n: usize) -> Option<i8> {
    let mut sign = 1i8;
    for k in 0..n {
        // Partial pivoting by approximate magnitude.
        let mut piv = k;
        for r in (k + 1)..n {
            if a[r * n + k].v.abs() > a[piv * n + k].v.abs() {
                piv = r;
            }
        }
        if piv != k {
            for j in 0..n {
                a.swap(piv * n + j, k * n + j);
            }
            sign = -sign;
        }
        match a[k * n + k].sign() {
            Some(0) => {
                // Pivot certainly zero: determinant zero only if the whole
                // column below is certainly zero too.
                if (k..n).all(|r| a[r * n + k].sign() == Some(0)) {
                    return Some(0);
                }
                return None;
            }
            None => return None,
            Some(_) => {}
        }
        for i in (k + 1)..n {
            let factor = a[i * n + k].div(a[k * n + k])?;
            for j in (k + 1)..n {
                let adj = a[k * n + j].mul(factor);
                a[i * n + j] = a[i * n + j].sub(adj);
            }
            a[i * n + k] = Bounded::exact(0.0);
        }
    }
    let mut det = Bounded::exact(1.0);
    for k in 0..n {
        det = det.mul(a[k * n + k]);
    }
    det.sign().map(|s| s * sign)
}

/// Decompose a finite `f64` into `(mantissa, exponent)` with x = m * 2^e.
fn decode_f64(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    let (m, e) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), exp_field - 1075)
    };
    (if neg { -m } else { m }, e)
}

/// Exact determinant of a matrix of f64 values as a rational number.
///
/// Rows are scaled by powers of two to integers, the integer determinant is
/// computed by fraction-free (Bareiss) elimination, and the scaling is undone.
pub fn det_exact_rational(m: &[Vec<f64>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let mut shift_total: i64 = 0;
    for row in m {
        debug_assert_eq!(row.len(), n);
        let decoded: Vec<(i64, i32)> = row.iter().map(|&x| decode_f64(x)).collect();
        let min_e = decoded
            .iter()
            .filter(|(m, _)| *m != 0)
            .map(|&(_, e)| e)
            .min()
            .unwrap_or(0);
        shift_total += min_e as i64;
        a.push(
            decoded
                .iter()
                .map(|&(m, e)| {
                    if m == 0 {
                        BigInt::zero()
                    } else {
                        BigInt::from(m) << ((e - min_e) as usize)
                    }
                })
                .collect(),
        );
    }
    let det_int = det_bareiss(&mut a);
    let num = Rational::from_integer(det_int);
    let two = Rational::from_int(2);
    let scale = pow_signed(&two, shift_total);
    num * scale
}

fn pow_signed(base: &Rational, exp: i64) -> Rational {
    let mut acc = Rational::one();
    let b = if exp >= 0 {
        base.clone()
    } else {
        Rational::one() / base.clone()
    };
    for _ in 0..exp.unsigned_abs() {
        acc *= b.clone();
    }
    acc
}

/// Fraction-free Bareiss elimination; consumes the matrix.
fn det_bareiss(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..(n - 1) {
        if a[k][k].is_zero() {
            match ((k + 1)..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Exact sign of `det(m)`: fast bounded path with exact fallback.
pub fn det_sign(m: &[Vec<f64>]) -> i8 {
    let mut scratch = DetScratch::default();
    det_sign_with(&mut scratch, m.len(), |i, j| m[i][j])
}

/// Determinant over any [`GeomScalar`] by Gaussian elimination with
/// magnitude pivoting. Exact for the rational scalar.
pub fn det_generic<S: GeomScalar>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    if n == 0 {
        return S::one();
    }
    let mut det = S::one();
    for k in 0..n {
        let mut piv = k;
        for r in (k + 1)..n {
            if a[r][k].abs() > a[piv][k].abs() {
                piv = r;
            }
        }
        if a[piv][k].is_zero() {
            return S::zero();
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det = det * pivot.clone();
        for i in (k + 1)..n {
            let factor = a[i][k].clone() / pivot.clone();
            for j in (k + 1)..n {
                let adj = factor.clone() * a[k][j].clone();
                a[i][j] = a[i][j].clone() - adj;
            }
            a[i][k] = S::zero();
        }
    }
    det
}

/// Rank of a set of vectors over the rationals (exact).
pub fn exact_rank(rows: &[Vec<f64>]) -> usize {
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Rational::from_f64_exact(x)).collect())
        .collect();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        match (rank..nrows).find(|&r| !a[r][col].is_zero()) {
            None => continue,
            Some(p) => {
                a.swap(rank, p);
                let pivot = a[rank][col].clone();
                for r in (rank + 1)..nrows {
                    if !a[r][col].is_zero() {
                        let f = a[r][col].clone() / pivot.clone();
                        for c in col..ncols {
                            let adj = f.clone() * a[rank][c].clone();
                            a[r][c] = a[r][c].clone() - adj;
                        }
                    }
                }
                rank += 1;
            }
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det_f64(m: &[Vec<f64>]) -> f64 {
        det_generic::<f64>(m.to_vec())
    }

    #[test]
    fn small_determinants() {
        let m = vec![vec![2.0, 0.0], vec![0.0, 3.0]];
        assert_eq!(det_f64(&m), 6.0);
        assert_eq!(det_sign(&m), 1);
        assert_eq!(
            det_exact_rational(&m),
            Rational::from_int(6)
        );

        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(det_sign(&singular), 0);
        assert!(det_exact_rational(&singular).is_zero());
    }

    #[test]
    fn filtered_sign_matches_exact_on_near_degenerate() {
        // det = (1+x)(1-x) - 1 = -x² = -2^-52 exactly: far below the
        // roundoff of the floating path, so only the exact fallback can
        // certify the sign.
        let x = 2f64.powi(-26);
        let m = vec![vec![1.0 + x, 1.0], vec![1.0, 1.0 - x]];
        assert_eq!(det_sign(&m), -1);
        assert_eq!(
            det_exact_rational(&m),
            Rational::new(BigInt::from(-1), BigInt::from(1i64 << 52))
        );
    }

    #[test]
    fn exact_rational_det_on_dyadics() {
        let m = vec![vec![0.5, 0.25], vec![0.125, 0.5]];
        // det = 0.25 - 0.03125 = 0.21875 = 7/32
        assert_eq!(
            det_exact_rational(&m),
            Rational::new(7.into(), 32.into())
        );
    }

    #[test]
    fn rank_detects_degeneracy() {
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert_eq!(exact_rank(&rows), 2);
        let full = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1e-30],
        ];
        assert_eq!(exact_rank(&full), 3);
    }

    #[test]
    fn generic_det_rational_is_exact() {
        let m: Vec<Vec<Rational>> = vec![
            vec![Rational::from_f64_exact(0.1), Rational::from_f64_exact(0.2)],
            vec![Rational::from_f64_exact(0.3), Rational::from_f64_exact(0.4)],
        ];
        let d = det_generic(m.clone());
        let direct = m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone();
        assert_eq!(d, direct);
    }
}
