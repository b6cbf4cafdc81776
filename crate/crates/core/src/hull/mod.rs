//! Symmetric convex hulls with exact facet enumeration.
//!
//! `build_hull` symmetrizes the generators (adjoins the antipodal points),
//! then runs a quickhull-style incremental construction in which every
//! visibility decision is made by an exact determinant sign ([`predicates`]).
//! The origin is strictly interior to every intermediate hull, which gives a
//! uniform orientation convention: a facet's plane never passes through the
//! origin, and a point is visible from a facet exactly when it lies on the
//! opposite side of the plane from the origin.
//!
//! Every stored facet is a simplex. Points sampled from the boundary of a
//! polytopal body (ℓ1 ball, cube) routinely land on a common flat facet, so
//! the true faces of `conv{±X}` can have more than `n` vertices; such faces
//! are triangulated fan-wise and the polytope records that it happened
//! ([`SymmetricPolytope::has_coplanar_faces`]). All measure formulas are
//! decomposition-based and remain exact under triangulation. Use
//! [`build_hull_strict`] to reject coplanar configurations outright.

pub mod measures;
pub mod predicates;

use crate::scalar::Rational;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Largest dimension for which exact facet enumeration is supported.
pub const MAX_EXACT_DIM: usize = 8;

#[derive(Debug, Error)]
pub enum HullError {
    #[error("input points do not affinely span R^{dim} (rank {rank})")]
    DegenerateInput { dim: usize, rank: usize },
    #[error("degenerate (non-simplicial) facet encountered; input not in general position")]
    NonSimplicialFacet,
    #[error("dimension {dim} exceeds exact-hull limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("point has wrong dimension: expected {expected}, got {got}")]
    WrongPointDimension { expected: usize, got: usize },
}

/// One simplicial facet: `n` vertex indices into the symmetrized point list,
/// with the outward unit normal and offset of its supporting hyperplane.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A symmetric polytope `conv{±X_1, …, ±X_N}` with enumerated facets.
#[derive(Clone, Debug)]
pub struct SymmetricPolytope {
    dim: usize,
    generators: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
    neg_index: Vec<usize>,
    facets: Vec<Facet>,
    vertex_indices: Vec<usize>,
    coplanar_faces: bool,
    volume: f64,
    second_moment: DMatrix<f64>,
}

impl SymmetricPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The input generators (the `+X_i`), before symmetrization.
    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// All symmetrized candidate points; facet vertex indices refer here.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        &self.points[idx]
    }

    /// Index of the antipode of point `idx`.
    pub fn antipode(&self, idx: usize) -> usize {
        self.neg_index[idx]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Sorted indices of points that are vertices of the hull.
    pub fn vertex_indices(&self) -> &[usize] {
        &self.vertex_indices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_indices.len()
    }

    /// True when some true face had more than `n` vertices and was
    /// triangulated (coplanar boundary points).
    pub fn has_coplanar_faces(&self) -> bool {
        self.coplanar_faces
    }

    /// Lebesgue volume, from the cone-simplex decomposition (f64 path).
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Unnormalized second moment matrix `∫_P x xᵀ dx` (f64 path).
    pub fn second_moment(&self) -> &DMatrix<f64> {
        &self.second_moment
    }

    /// Normalized covariance of the uniform distribution on the polytope.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.second_moment.clone() / self.volume
    }

    /// Exact volume over the rationals.
    pub fn volume_exact(&self) -> Rational {
        measures::volume_exact(self)
    }

    /// Membership test against the facet planes, with additive slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| {
            let d: f64 = f.normal.iter().zip(x).map(|(a, b)| a * b).sum();
            d <= f.offset + tol
        })
    }

    /// Half-widths of the axis-aligned bounding box (max |x_i| over vertices).
    pub fn bounding_box(&self) -> Vec<f64> {
        let mut box_half = vec![0.0f64; self.dim];
        for &vi in &self.vertex_indices {
            for (j, slot) in box_half.iter_mut().enumerate() {
                *slot = slot.max(self.points[vi][j].abs());
            }
        }
        box_half
    }
}

/// Build the symmetric convex hull, rejecting coplanar boundary
/// configurations (non-simplicial true faces) as degenerate input.
pub fn build_hull_strict(
    dim: usize,
    generators: &[Vec<f64>],
) -> Result<SymmetricPolytope, HullError> {
    let poly = build_hull(dim, generators)?;
    if poly.has_coplanar_faces() {
        return Err(HullError::NonSimplicialFacet);
    }
    Ok(poly)
}

/// Build the symmetric convex hull of the given generator points.
pub fn build_hull(dim: usize, generators: &[Vec<f64>]) -> Result<SymmetricPolytope, HullError> {
    if dim > MAX_EXACT_DIM {
        return Err(HullError::DimensionTooLarge {
            dim,
            max: MAX_EXACT_DIM,
        });
    }
    for g in generators {
        if g.len() != dim {
            return Err(HullError::WrongPointDimension {
                expected: dim,
                got: g.len(),
            });
        }
    }

    // Symmetrize and deduplicate on exact bit patterns (-0.0 normalized).
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(2 * generators.len());
    let mut index_of: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut push_point = |p: Vec<f64>, points: &mut Vec<Vec<f64>>| -> usize {
        let key: Vec<u64> = p.iter().map(|&x| canonical_bits(x)).collect();
        *index_of.entry(key).or_insert_with(|| {
            points.push(p);
            points.len() - 1
        })
    };
    let clean = |p: &[f64]| -> Vec<f64> { p.iter().map(|&x| if x == 0.0 { 0.0 } else { x }).collect() };
    for g in generators {
        let plus = clean(g);
        let minus: Vec<f64> = plus.iter().map(|&x| if x == 0.0 { 0.0 } else { -x }).collect();
        push_point(plus, &mut points);
        push_point(minus, &mut points);
    }

    let rank = predicates::exact_rank(&points);
    if rank < dim {
        return Err(HullError::DegenerateInput { dim, rank });
    }

    let neg_index: Vec<usize> = points
        .iter()
        .map(|p| {
            let key: Vec<u64> = p
                .iter()
                .map(|&x| canonical_bits(if x == 0.0 { 0.0 } else { -x }))
                .collect();
            *index_of.get(&key).expect("symmetrized set is closed under negation")
        })
        .collect();

    let builder = Builder {
        dim,
        points: &points,
        neg_index: &neg_index,
    };
    let (facets, coplanar_faces) = builder.run()?;

    let mut vertex_indices: Vec<usize> = facets.iter().flat_map(|f| f.vertices.iter().copied()).collect();
    vertex_indices.sort_unstable();
    vertex_indices.dedup();

    let mut poly = SymmetricPolytope {
        dim,
        generators: generators.to_vec(),
        points,
        neg_index,
        facets,
        vertex_indices,
        coplanar_faces,
        volume: 0.0,
        second_moment: DMatrix::zeros(dim, dim),
    };
    let (vol, m2) = measures::volume_and_second_moment(&poly);
    poly.volume = vol;
    poly.second_moment = m2;
    Ok(poly)
}

fn canonical_bits(x: f64) -> u64 {
    if x == 0.0 {
        0.0f64.to_bits()
    } else {
        x.to_bits()
    }
}

struct BuildFacet {
    vertices: Vec<usize>,
    plane_sign: i8,
    normal: Vec<f64>,
    offset: f64,
    neighbors: Vec<usize>,
    outside: Vec<usize>,
    alive: bool,
    stamp: u64,
}

struct Builder<'a> {
    dim: usize,
    points: &'a [Vec<f64>],
    neg_index: &'a [usize],
}

/// Mutable workspace threaded through the construction.
#[derive(Default)]
struct Workspace {
    det: predicates::DetScratch,
    elim: Vec<f64>,
}

impl<'a> Builder<'a> {
    /// Exact sign of the affine side function h_F(x) = det(rows y_i - x).
    fn side_sign(&self, ws: &mut Workspace, vertices: &[usize], x: &[f64]) -> i8 {
        let points = self.points;
        predicates::det_sign_with(&mut ws.det, self.dim, |i, j| points[vertices[i]][j] - x[j])
    }

    /// Exact sign of h_F(0) = det(rows y_i).
    fn origin_sign(&self, ws: &mut Workspace, vertices: &[usize]) -> i8 {
        let points = self.points;
        predicates::det_sign_with(&mut ws.det, self.dim, |i, j| points[vertices[i]][j])
    }

    fn visible(&self, ws: &mut Workspace, facet: &BuildFacet, x: &[f64]) -> bool {
        self.side_sign(ws, &facet.vertices, x) == -facet.plane_sign
    }

    /// Outward unit normal and offset: eliminate the (n-1)×n difference
    /// matrix and back-substitute its null vector.
    fn normal_offset(&self, ws: &mut Workspace, vertices: &[usize]) -> (Vec<f64>, f64) {
        let n = self.dim;
        let rows = n - 1;
        let a = &mut ws.elim;
        a.clear();
        let y0 = &self.points[vertices[0]];
        for &vi in &vertices[1..] {
            let y = &self.points[vi];
            a.extend((0..n).map(|j| y[j] - y0[j]));
        }
        // Row echelon with partial pivoting; record the pivot column per row.
        let mut pivot_cols = vec![usize::MAX; rows];
        let mut col = 0usize;
        let mut row = 0usize;
        while row < rows && col < n {
            let mut piv = row;
            for r in (row + 1)..rows {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col] == 0.0 {
                col += 1;
                continue;
            }
            if piv != row {
                for j in 0..n {
                    a.swap(piv * n + j, row * n + j);
                }
            }
            for r in (row + 1)..rows {
                let f = a[r * n + col] / a[row * n + col];
                if f != 0.0 {
                    for j in col..n {
                        a[r * n + j] -= f * a[row * n + j];
                    }
                }
            }
            pivot_cols[row] = col;
            row += 1;
            col += 1;
        }
        let mut normal = vec![0.0f64; n];
        // Free column: the first not used as a pivot.
        let free = (0..n)
            .find(|c| !pivot_cols.contains(c))
            .expect("rank n-1 leaves one free column");
        normal[free] = 1.0;
        for r in (0..row).rev() {
            let pc = pivot_cols[r];
            let mut acc = 0.0;
            for j in (pc + 1)..n {
                acc += a[r * n + j] * normal[j];
            }
            normal[pc] = -acc / a[r * n + pc];
        }
        let dot0: f64 = normal.iter().zip(y0.iter()).map(|(a, b)| a * b).sum();
        if dot0 < 0.0 {
            for v in normal.iter_mut() {
                *v = -*v;
            }
        }
        let len: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 0.0 {
            for v in normal.iter_mut() {
                *v /= len;
            }
        }
        let offset = vertices
            .iter()
            .map(|&vi| {
                normal
                    .iter()
                    .zip(self.points[vi].iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .sum::<f64>()
            / vertices.len() as f64;
        (normal, offset)
    }

    fn distance(facet: &BuildFacet, x: &[f64]) -> f64 {
        facet
            .normal
            .iter()
            .zip(x)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            - facet.offset
    }

    fn run(&self) -> Result<(Vec<Facet>, bool), HullError> {
        let n = self.dim;
        let mut coplanar_faces = false;
        let mut ws = Workspace::default();

        // Greedily pick n linearly independent points.
        let mut basis: Vec<usize> = Vec::with_capacity(n);
        for idx in 0..self.points.len() {
            if basis.len() == n {
                break;
            }
            let mut rows: Vec<Vec<f64>> = basis.iter().map(|&i| self.points[i].clone()).collect();
            rows.push(self.points[idx].clone());
            if predicates::exact_rank(&rows) == basis.len() + 1 {
                basis.push(idx);
            }
        }
        if basis.len() < n {
            return Err(HullError::DegenerateInput {
                dim: n,
                rank: basis.len(),
            });
        }

        // Initial hull: the cross-polytope conv{±v_1, …, ±v_n}. Its facets
        // are indexed by sign masks; facet `mask` uses -v_i when bit i is set.
        let base_sign = self.origin_sign(&mut ws, &basis);
        debug_assert!(base_sign != 0);
        let mut facets: Vec<BuildFacet> = Vec::new();
        let n_masks = 1usize << n;
        for mask in 0..n_masks {
            let vertices: Vec<usize> = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        self.neg_index[basis[i]]
                    } else {
                        basis[i]
                    }
                })
                .collect();
            let plane_sign = if (mask.count_ones() % 2) == 0 {
                base_sign
            } else {
                -base_sign
            };
            let neighbors: Vec<usize> = (0..n).map(|i| mask ^ (1usize << i)).collect();
            let (normal, offset) = self.normal_offset(&mut ws, &vertices);
            facets.push(BuildFacet {
                vertices,
                plane_sign,
                normal,
                offset,
                neighbors,
                outside: Vec::new(),
                alive: true,
                stamp: 0,
            });
        }

        // Assign every remaining point to the first facet it is beyond.
        let initial_vertex_set: Vec<usize> = basis
            .iter()
            .flat_map(|&b| [b, self.neg_index[b]])
            .collect();
        for p in 0..self.points.len() {
            if initial_vertex_set.contains(&p) {
                continue;
            }
            for fi in 0..facets.len() {
                if self.visible(&mut ws, &facets[fi], &self.points[p]) {
                    facets[fi].outside.push(p);
                    break;
                }
            }
        }

        let mut work: Vec<usize> = (0..facets.len())
            .filter(|&fi| !facets[fi].outside.is_empty())
            .collect();
        let mut free: Vec<usize> = Vec::new();
        let mut stamp: u64 = 0;

        while let Some(fi) = work.pop() {
            if !facets[fi].alive || facets[fi].outside.is_empty() {
                continue;
            }
            // Furthest outside point by floating-point distance (heuristic
            // only; correctness rests on the exact predicates).
            let apex = *facets[fi]
                .outside
                .iter()
                .max_by(|&&a, &&b| {
                    let da = Self::distance(&facets[fi], &self.points[a]);
                    let db = Self::distance(&facets[fi], &self.points[b]);
                    da.partial_cmp(&db).expect("finite distances")
                })
                .expect("nonempty outside set");
            let apex_point = self.points[apex].clone();

            // Collect the visible region by BFS over facet adjacency.
            stamp += 1;
            let mut visible_set: Vec<usize> = vec![fi];
            facets[fi].stamp = stamp;
            let mut bfs = vec![fi];
            // (ridge vertices, outer facet, slot of outer facet facing in)
            let mut horizon: Vec<(Vec<usize>, usize, usize)> = Vec::new();
            while let Some(cur) = bfs.pop() {
                for slot in 0..n {
                    let nb = facets[cur].neighbors[slot];
                    if facets[nb].stamp == stamp {
                        continue;
                    }
                    let side = self.side_sign(&mut ws, &facets[nb].vertices, &apex_point);
                    if side == 0 {
                        // The apex lies exactly on the supporting plane of a
                        // non-visible facet: the true face gains more than n
                        // vertices and will be triangulated fan-wise.
                        coplanar_faces = true;
                    }
                    if side != 0 && side == -facets[nb].plane_sign {
                        facets[nb].stamp = stamp;
                        visible_set.push(nb);
                        bfs.push(nb);
                    } else {
                        let ridge: Vec<usize> = facets[cur]
                            .vertices
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != slot)
                            .map(|(_, &v)| v)
                            .collect();
                        let back = facets[nb]
                            .neighbors
                            .iter()
                            .position(|&x| x == cur)
                            .expect("adjacency is symmetric");
                        horizon.push((ridge, nb, back));
                    }
                }
            }

            // Create the new facets over the horizon ridges.
            let mut ridge_map: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
            let mut created: Vec<usize> = Vec::with_capacity(horizon.len());
            for (ridge, outer, outer_slot) in &horizon {
                let mut vertices = ridge.clone();
                vertices.push(apex);
                let plane_sign = self.origin_sign(&mut ws, &vertices);
                if plane_sign == 0 {
                    return Err(HullError::NonSimplicialFacet);
                }
                let (normal, offset) = self.normal_offset(&mut ws, &vertices);
                let new_facet = BuildFacet {
                    vertices,
                    plane_sign,
                    normal,
                    offset,
                    neighbors: vec![usize::MAX; n],
                    outside: Vec::new(),
                    alive: true,
                    stamp: 0,
                };
                let ni = match free.pop() {
                    Some(slot) => {
                        facets[slot] = new_facet;
                        slot
                    }
                    None => {
                        facets.push(new_facet);
                        facets.len() - 1
                    }
                };
                created.push(ni);
                // Across the ridge (apex slot is last) lies the old outer facet.
                facets[ni].neighbors[n - 1] = *outer;
                facets[*outer].neighbors[*outer_slot] = ni;
                // Remaining ridges pair up among the new facets.
                for drop in 0..(n - 1) {
                    let mut key: Vec<usize> = facets[ni].vertices[..n - 1]
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    key.sort_unstable();
                    match ridge_map.remove(&key) {
                        Some((other, other_slot)) => {
                            // Coplanar sibling facets mean a true face with
                            // more than n vertices (triangulated).
                            let opposite = facets[other].vertices[other_slot];
                            let side = self.side_sign(
                                &mut ws,
                                &facets[ni].vertices,
                                &self.points[opposite],
                            );
                            if side == 0 {
                                coplanar_faces = true;
                            }
                            facets[ni].neighbors[drop] = other;
                            facets[other].neighbors[other_slot] = ni;
                        }
                        None => {
                            ridge_map.insert(key, (ni, drop));
                        }
                    }
                }
            }
            if !ridge_map.is_empty() {
                // Unmatched internal ridges indicate a broken horizon, which
                // exact predicates should make impossible.
                return Err(HullError::NonSimplicialFacet);
            }

            // Redistribute the orphaned outside points.
            let mut orphans: Vec<usize> = Vec::new();
            for &vi in &visible_set {
                orphans.append(&mut facets[vi].outside);
                facets[vi].alive = false;
                free.push(vi);
            }
            for p in orphans {
                if p == apex {
                    continue;
                }
                for &ni in &created {
                    if self.visible(&mut ws, &facets[ni], &self.points[p]) {
                        facets[ni].outside.push(p);
                        break;
                    }
                }
            }
            for &ni in &created {
                if !facets[ni].outside.is_empty() {
                    work.push(ni);
                }
            }
        }

        Ok((
            facets
                .into_iter()
                .filter(|f| f.alive)
                .map(|f| Facet {
                    vertices: f.vertices,
                    normal: f.normal,
                    offset: f.offset,
                })
                .collect(),
            coplanar_faces,
        ))
    }
}

/// Serializable dump of a polytope (generators, facets, volume, covariance).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeDump {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    pub volume: f64,
    pub covariance: Vec<Vec<f64>>,
}

impl SymmetricPolytope {
    pub fn dump(&self) -> PolytopeDump {
        let n = self.dim;
        let cov = self.covariance();
        PolytopeDump {
            dim: n,
            generators: self.generators.clone(),
            facets: self.facets.clone(),
            volume: self.volume,
            covariance: (0..n)
                .map(|i| (0..n).map(|j| cov[(i, j)]).collect())
                .collect(),
        }
    }
}
