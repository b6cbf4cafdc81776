//! Reproducible i.i.d. samplers for the uniform distribution in a body and
//! the cone probability measure on its boundary.
//!
//! Streams are counter-based: a master seed plus a stream id select an
//! independent ChaCha stream, so parallel trials reproduce bit-for-bit
//! regardless of scheduling. Cone samples are realized as the push-forward
//! `X = Y/‖Y‖_K` of a uniform draw `Y`, which also yields the coupled pair
//! used by the volume-radius comparison; for ℓp balls a direct generator
//! (p-generalized normals normalized by their ℓp norm) is available and must
//! pass the same distribution tests.

use crate::body::{BodyError, BodySpec, PNorm};
use crate::hull::{self, HullError, SymmetricPolytope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// Hit-and-run burn-in: `10 n²` steps, thinning `n²`.
pub const HIT_AND_RUN_BURN_IN_FACTOR: usize = 10;
/// Rejection sampling is used while the acceptance rate stays above this.
pub const MIN_REJECTION_ACCEPTANCE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("rejection acceptance {acceptance:.3e} too low and hit-and-run disabled")]
    AcceptanceTooLow { acceptance: f64 },
    #[error(transparent)]
    Body(#[from] BodyError),
}

/// A counter-based RNG stream: (master seed, stream id) fixes the draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamRng {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl StreamRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        StreamRng {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A derived stream for a sub-task, stable under reordering of tasks.
    pub fn substream(&self, tag: u64) -> StreamRng {
        StreamRng {
            master_seed: self.master_seed,
            stream_id: derive_stream(&[self.stream_id, tag]),
        }
    }
}

/// Mix labels into a stream id (splitmix64 over the parts).
pub fn derive_stream(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        let mut z = h ^ p.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    UniformInBody,
    ConeOnBoundary,
}

/// A batch of i.i.d. draws with full reproducibility metadata.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub distribution: DistributionKind,
    pub body: BodySpec,
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub stream_id: u64,
    /// True when the points come from a Markov chain rather than an exact
    /// generator (hit-and-run path).
    pub mc_approximate: bool,
    /// Zero draws that were redrawn during cone projection.
    pub redraws: u64,
}

impl SampleBatch {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Hull of the batch points and their antipodes.
    pub fn build_hull(&self) -> Result<SymmetricPolytope, HullError> {
        hull::build_hull(self.body.dim(), &self.points)
    }

    /// Values `⟨x_i, θ⟩` over the batch.
    pub fn linear_functional(&self, theta: &[f64]) -> Vec<f64> {
        self.points
            .iter()
            .map(|x| x.iter().zip(theta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// CSV dump: a JSON header line (prefixed `#`), a column header, one
    /// point per row. Float formatting is shortest-round-trip, so equal
    /// batches serialize to identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = serde_json::json!({
            "body": self.body,
            "distribution": self.distribution,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "count": self.points.len(),
            "mc_approximate": self.mc_approximate,
            "redraws": self.redraws,
        });
        writeln!(w, "# {header}")?;
        let dim = self.body.dim();
        let cols: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", cols.join(","))?;
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Options for the uniform sampler.
#[derive(Clone, Copy, Debug)]
pub struct UniformOptions {
    pub allow_hit_and_run: bool,
}

impl Default for UniformOptions {
    fn default() -> Self {
        UniformOptions {
            allow_hit_and_run: true,
        }
    }
}

/// i.i.d. uniform draws in the body.
pub fn sample_uniform(
    body: &BodySpec,
    count: usize,
    stream: StreamRng,
) -> Result<SampleBatch, SampleError> {
    sample_uniform_opts(body, count, stream, UniformOptions::default())
}

pub fn sample_uniform_opts(
    body: &BodySpec,
    count: usize,
    stream: StreamRng,
    opts: UniformOptions,
) -> Result<SampleBatch, SampleError> {
    assert!(count >= 1, "count must be positive");
    let mut rng = stream.rng();
    let mut gen = UniformGenerator::new(body, opts)?;
    let points: Vec<Vec<f64>> = (0..count).map(|_| gen.draw(&mut rng)).collect();
    Ok(SampleBatch {
        distribution: DistributionKind::UniformInBody,
        body: body.clone(),
        points,
        seed: stream.master_seed,
        stream_id: stream.stream_id,
        mc_approximate: gen.mc_approximate(),
        redraws: 0,
    })
}

/// i.i.d. cone-measure draws on the boundary, as the push-forward
/// `X = Y/‖Y‖_K` of uniform draws.
pub fn sample_cone_boundary(
    body: &BodySpec,
    count: usize,
    stream: StreamRng,
) -> Result<SampleBatch, SampleError> {
    let (_, cone) = sample_coupled_pair(body, count, stream)?;
    Ok(cone)
}

/// The coupled pair `(Y_i, X_i)` with `X_i = Y_i/‖Y_i‖_K` drawn from the same
/// uniform variables, so that `conv{±Y} ⊆ conv{±X}` holds realization-wise.
pub fn sample_coupled_pair(
    body: &BodySpec,
    count: usize,
    stream: StreamRng,
) -> Result<(SampleBatch, SampleBatch), SampleError> {
    assert!(count >= 1, "count must be positive");
    let mut rng = stream.rng();
    let mut gen = UniformGenerator::new(body, UniformOptions::default())?;
    let mut uniform_points = Vec::with_capacity(count);
    let mut cone_points = Vec::with_capacity(count);
    let mut redraws = 0u64;
    while uniform_points.len() < count {
        let y = gen.draw(&mut rng);
        let r = body.minkowski_functional(&y);
        if r == 0.0 {
            // Probability-zero event: redraw rather than pick an arbitrary
            // boundary point; the distribution is unchanged.
            redraws += 1;
            continue;
        }
        let x: Vec<f64> = y.iter().map(|v| v / r).collect();
        uniform_points.push(y);
        cone_points.push(x);
    }
    let uniform = SampleBatch {
        distribution: DistributionKind::UniformInBody,
        body: body.clone(),
        points: uniform_points,
        seed: stream.master_seed,
        stream_id: stream.stream_id,
        mc_approximate: gen.mc_approximate(),
        redraws,
    };
    let cone = SampleBatch {
        distribution: DistributionKind::ConeOnBoundary,
        body: body.clone(),
        points: cone_points,
        seed: stream.master_seed,
        stream_id: stream.stream_id,
        mc_approximate: uniform.mc_approximate,
        redraws,
    };
    Ok((uniform, cone))
}

/// Direct cone generator for ℓp balls: p-generalized normal coordinates
/// normalized by their ℓp norm. Distribution-equal to the push-forward.
pub fn sample_cone_direct_lp(
    body: &BodySpec,
    count: usize,
    stream: StreamRng,
) -> Result<SampleBatch, SampleError> {
    assert!(count >= 1, "count must be positive");
    let BodySpec::LpBall { p, dim } = body else {
        return Err(SampleError::Body(BodyError::Invalid(
            "direct cone generator requires an lp ball".into(),
        )));
    };
    let n = *dim;
    let mut rng = stream.rng();
    let mut points = Vec::with_capacity(count);
    let mut redraws = 0u64;
    match p {
        PNorm::Finite(pv) => {
            let gamma = Gamma::new(1.0 / pv, 1.0).expect("valid shape");
            while points.len() < count {
                let g: Vec<f64> = (0..n)
                    .map(|_| {
                        let mag = gamma.sample(&mut rng).powf(1.0 / pv);
                        if rng.random::<bool>() {
                            mag
                        } else {
                            -mag
                        }
                    })
                    .collect();
                let norm = body.minkowski_functional(&g);
                if norm == 0.0 {
                    redraws += 1;
                    continue;
                }
                points.push(g.iter().map(|v| v / norm).collect());
            }
        }
        PNorm::Infinity => {
            // Cube: cone measure picks a facet uniformly, then a uniform
            // point on it.
            while points.len() < count {
                let facet = rng.random_range(0..2 * n);
                let coord = facet / 2;
                let sign = if facet % 2 == 0 { 1.0 } else { -1.0 };
                let x: Vec<f64> = (0..n)
                    .map(|j| {
                        if j == coord {
                            sign
                        } else {
                            rng.random_range(-1.0..1.0)
                        }
                    })
                    .collect();
                points.push(x);
            }
        }
    }
    Ok(SampleBatch {
        distribution: DistributionKind::ConeOnBoundary,
        body: body.clone(),
        points,
        seed: stream.master_seed,
        stream_id: stream.stream_id,
        mc_approximate: false,
        redraws,
    })
}

enum UniformGenerator {
    /// Exact generator: p-generalized normals plus an independent exponential.
    LpDirect {
        p: f64,
        dim: usize,
        gamma: Gamma<f64>,
    },
    /// Cube coordinates are independent uniforms.
    Cube { dim: usize },
    /// Generic via an inner generator and the linear map.
    Linear {
        inner: Box<UniformGenerator>,
        matrix: nalgebra::DMatrix<f64>,
    },
    /// Scaled ℓ1 ball.
    Scaled {
        inner: Box<UniformGenerator>,
        c: f64,
    },
    /// Rejection from the bounding box.
    Rejection {
        body: BodySpec,
        box_half: Vec<f64>,
    },
    /// Hit-and-run over the slab constraints, with burn-in and thinning.
    HitAndRun {
        rows: Vec<(Vec<f64>, f64)>,
        dim: usize,
        state: Vec<f64>,
        thin: usize,
        started: bool,
    },
}

impl UniformGenerator {
    fn new(body: &BodySpec, opts: UniformOptions) -> Result<Self, SampleError> {
        Ok(match body {
            BodySpec::LpBall { p, dim } => match p {
                PNorm::Infinity => UniformGenerator::Cube { dim: *dim },
                PNorm::Finite(pv) => UniformGenerator::LpDirect {
                    p: *pv,
                    dim: *dim,
                    gamma: Gamma::new(1.0 / pv, 1.0).expect("valid shape"),
                },
            },
            BodySpec::ScaledL1 { c, dim } => UniformGenerator::Scaled {
                inner: Box::new(UniformGenerator::new(&BodySpec::l1_ball(*dim), opts)?),
                c: *c,
            },
            BodySpec::SymmetricHPolytope { rows, dim } => {
                let box_half = body.bounding_box()?;
                let box_vol: f64 = box_half.iter().map(|h| 2.0 * h).product();
                let acceptance = body.volume()? / box_vol;
                if acceptance >= MIN_REJECTION_ACCEPTANCE {
                    UniformGenerator::Rejection {
                        body: body.clone(),
                        box_half,
                    }
                } else if opts.allow_hit_and_run {
                    UniformGenerator::HitAndRun {
                        rows: rows.iter().map(|r| (r.normal.clone(), r.offset)).collect(),
                        dim: *dim,
                        state: vec![0.0; *dim],
                        thin: dim * dim,
                        started: false,
                    }
                } else {
                    return Err(SampleError::AcceptanceTooLow { acceptance });
                }
            }
            BodySpec::LinearImage { inner, matrix } => UniformGenerator::Linear {
                inner: Box::new(UniformGenerator::new(inner, opts)?),
                matrix: crate::body::rows_to_matrix(matrix),
            },
        })
    }

    fn mc_approximate(&self) -> bool {
        match self {
            UniformGenerator::HitAndRun { .. } => true,
            UniformGenerator::Linear { inner, .. } | UniformGenerator::Scaled { inner, .. } => {
                inner.mc_approximate()
            }
            _ => false,
        }
    }

    fn draw<R: Rng>(&mut self, rng: &mut R) -> Vec<f64> {
        match self {
            UniformGenerator::LpDirect { p, dim, gamma, .. } => {
                // Exact construction: g_i with density ∝ exp(-|t|^p) and an
                // independent standard exponential in the normalization.
                let g: Vec<f64> = (0..*dim)
                    .map(|_| {
                        let mag = gamma.sample(rng).powf(1.0 / *p);
                        if rng.random::<bool>() {
                            mag
                        } else {
                            -mag
                        }
                    })
                    .collect();
                let w: f64 = -(1.0 - rng.random::<f64>()).ln();
                let sum_p: f64 = g.iter().map(|v| v.abs().powf(*p)).sum();
                let scale = (sum_p + w).powf(1.0 / *p);
                g.iter().map(|v| v / scale).collect()
            }
            UniformGenerator::Cube { dim } => {
                (0..*dim).map(|_| rng.random_range(-1.0..1.0)).collect()
            }
            UniformGenerator::Scaled { inner, c } => {
                inner.draw(rng).iter().map(|v| v * *c).collect()
            }
            UniformGenerator::Linear { inner, matrix } => {
                let y = inner.draw(rng);
                let x = &*matrix * nalgebra::DVector::from_vec(y);
                x.iter().copied().collect()
            }
            UniformGenerator::Rejection { body, box_half } => loop {
                let x: Vec<f64> = box_half
                    .iter()
                    .map(|&h| rng.random_range(-h..h))
                    .collect();
                if body.minkowski_functional(&x) <= 1.0 {
                    return x;
                }
            },
            UniformGenerator::HitAndRun {
                rows,
                dim,
                state,
                thin,
                started,
            } => {
                let steps = if !*started {
                    *started = true;
                    HIT_AND_RUN_BURN_IN_FACTOR * *dim * *dim
                } else {
                    *thin
                };
                for _ in 0..steps {
                    hit_and_run_step(rows, state, rng);
                }
                state.clone()
            }
        }
    }
}

/// One hit-and-run step inside `|⟨a_i, x⟩| ≤ b_i`: a uniform unit direction,
/// the exact chord from the slab constraints, a uniform point on the chord.
fn hit_and_run_step<R: Rng>(rows: &[(Vec<f64>, f64)], state: &mut [f64], rng: &mut R) {
    use rand_distr::StandardNormal;
    let n = state.len();
    let mut dir: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let len: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len == 0.0 {
        return;
    }
    for d in dir.iter_mut() {
        *d /= len;
    }
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (a, b) in rows {
        let ax: f64 = a.iter().zip(state.iter()).map(|(p, q)| p * q).sum();
        let ad: f64 = a.iter().zip(dir.iter()).map(|(p, q)| p * q).sum();
        if ad.abs() < 1e-300 {
            continue;
        }
        let t1 = (b - ax) / ad;
        let t2 = (-b - ax) / ad;
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        t_lo = t_lo.max(lo);
        t_hi = t_hi.min(hi);
    }
    if t_lo.is_finite() && t_hi.is_finite() && t_hi > t_lo {
        let t = rng.random_range(t_lo..t_hi);
        for (s, d) in state.iter_mut().zip(dir.iter()) {
            *s += t * d;
        }
    }
}
