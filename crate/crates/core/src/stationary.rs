//! Second-order structure of the path phase at stationary paths.
//!
//! The tangential Hessian of the phase is block tridiagonal: node `j` only
//! couples to its neighbours. Block elimination produces 2x2 matrices `M_j`
//! whose determinants factor into the geometrical-optics spreading terms,
//! which is what ties the iterated surface integrals to the ray sums.

use nalgebra::{DMatrix, Matrix2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::SurfacePoint;
use crate::geometry::Scene;
use crate::rays::{enumerate_paths_with, insertion_candidates, with_insertions, IncidentWave, PathSearch, RayPath};
use crate::BoundaryCondition;

/// Determinant and eigenvalue magnitude below which an `M_j` is singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Tangential Hessian blocks of the phase at `nodes`.
///
/// `diag[j]` is the block of node `j` in its principal frame; `off[j]` couples
/// node `j + 1` (rows, frame of `j + 1`) to node `j` (columns, frame of `j`).
/// The formulas hold at any configuration, stationary or not.
pub fn tangential_hessian(xi: &Vector3<f64>, nodes: &[SurfacePoint], x: &Vector3<f64>) -> (Vec<Matrix2<f64>>, Vec<Matrix2<f64>>) {
    let positions: Vec<Vector3<f64>> = nodes.iter().map(|n| n.position).collect();
    let (dirs, lens) = crate::rays::segments(&positions, x);
    let spread = |node: &SurfacePoint, d: &Vector3<f64>, len: f64| {
        let t = node.tangential(d);
        (Matrix2::identity() - t * t.transpose()) / len
    };
    let mut diag = Vec::with_capacity(nodes.len());
    let mut off = Vec::with_capacity(nodes.len().saturating_sub(1));
    for (j, node) in nodes.iter().enumerate() {
        let inc = if j == 0 { *xi } else { dirs[j - 1] };
        let mut block = spread(node, &dirs[j], lens[j]);
        if j > 0 {
            block += spread(node, &dirs[j - 1], lens[j - 1]);
        }
        let bend = dirs[j].dot(&node.normal) - inc.dot(&node.normal);
        block += bend * Matrix2::new(node.k1, 0.0, 0.0, node.k2);
        diag.push(block);
        if j + 1 < nodes.len() {
            let next = &nodes[j + 1];
            let d = dirs[j];
            let here = [node.dir_u, node.dir_v];
            let there = [next.dir_u, next.dir_v];
            let l = Matrix2::from_fn(|p, q| here[q].dot(&d) * there[p].dot(&d) - here[q].dot(&there[p]));
            off.push(l / lens[j]);
        }
    }
    (diag, off)
}

/// Dense `2l x 2l` matrix from the tridiagonal blocks.
pub fn assemble_hessian(diag: &[Matrix2<f64>], off: &[Matrix2<f64>]) -> DMatrix<f64> {
    let n = 2 * diag.len();
    let mut h = DMatrix::zeros(n, n);
    for (j, d) in diag.iter().enumerate() {
        h.fixed_view_mut::<2, 2>(2 * j, 2 * j).copy_from(d);
    }
    for (j, o) in off.iter().enumerate() {
        h.fixed_view_mut::<2, 2>(2 * j + 2, 2 * j).copy_from(o);
        h.fixed_view_mut::<2, 2>(2 * j, 2 * j + 2).copy_from(&o.transpose());
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryData {
    pub path: RayPath,
    pub diag: Vec<Matrix2<f64>>,
    pub off: Vec<Matrix2<f64>>,
    /// Schur-recursed matrices, empty until [`schur_m`] runs.
    pub m: Vec<Matrix2<f64>>,
    pub dets: Vec<f64>,
    pub signatures: Vec<i32>,
}

impl StationaryData {
    pub fn full_hessian(&self) -> DMatrix<f64> {
        assemble_hessian(&self.diag, &self.off)
    }
}

pub fn hessian_blocks(path: &RayPath) -> StationaryData {
    let (diag, off) = tangential_hessian(&path.incident, &path.nodes, &path.target);
    StationaryData {
        path: path.clone(),
        diag,
        off,
        m: Vec::new(),
        dets: Vec::new(),
        signatures: Vec::new(),
    }
}

/// `M_1 = D_1`, `M_j = D_j - O_j M_{j-1}^{-1} O_j^t` with `O_j` the block coupling `j` to `j - 1`.
pub fn schur_m(data: StationaryData) -> Result<StationaryData> {
    let mut data = data;
    let mut m: Vec<Matrix2<f64>> = Vec::with_capacity(data.diag.len());
    let mut dets = Vec::with_capacity(data.diag.len());
    let mut sigs = Vec::with_capacity(data.diag.len());
    for j in 0..data.diag.len() {
        let mj = if j == 0 {
            data.diag[0]
        } else {
            let o = data.off[j - 1];
            let inv = m[j - 1].try_inverse().ok_or(Error::Singular { condition: f64::INFINITY })?;
            data.diag[j] - o * inv * o.transpose()
        };
        let mj = 0.5 * (mj + mj.transpose());
        let det = mj.determinant();
        let eig = mj.symmetric_eigen().eigenvalues;
        let scale = mj.abs().max().max(1.0);
        if det.abs() < SINGULAR_DET || eig.iter().any(|e| e.abs() < SINGULAR_DET * scale) {
            return Err(Error::Singular {
                condition: eig.abs().max() / eig.abs().min(),
            });
        }
        sigs.push(eig.iter().map(|e| e.signum() as i32).sum());
        dets.push(det);
        m.push(mj);
    }
    data.m = m;
    data.dets = dets;
    data.signatures = sigs;
    Ok(data)
}

/// Per-node residuals of the identities linking `M_j` to the wavefront curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorNode {
    /// `|| M_j - [P_j|_T + (I - xi_j xi_j^t)|_T / lambda_j] ||_F`.
    pub block_abs: f64,
    pub block_rel: f64,
    /// `|det M_j - (<xi_j, n_j> / lambda_j)^2 det(I + lambda_j P_j)|`.
    pub det_abs: f64,
    pub det_rel: f64,
    pub signature: i32,
    pub signature_deviation: i32,
    pub min_singular: f64,
    pub det_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorReport {
    pub nodes: Vec<FactorNode>,
}

impl FactorReport {
    pub fn max_block_rel(&self) -> f64 {
        self.nodes.iter().map(|n| n.block_rel).fold(0.0, f64::max)
    }

    pub fn max_det_rel(&self) -> f64 {
        self.nodes.iter().map(|n| n.det_rel).fold(0.0, f64::max)
    }

    /// Every `M_j` positive definite with `det M_j > 1e-10`.
    pub fn all_positive(&self) -> bool {
        self.nodes.iter().all(|n| n.signature == 2 && n.det_m > 1e-10)
    }
}

pub fn factorization_residuals(path: &RayPath) -> Result<FactorReport> {
    let data = schur_m(hessian_blocks(path))?;
    let nodes = (0..path.len())
        .map(|j| {
            let node = &path.nodes[j];
            let d = node.tangential(&path.seg_dirs[j]);
            let len = path.seg_lens[j];
            let predicted = node.restrict(&path.curvature[j]) + (Matrix2::identity() - d * d.transpose()) / len;
            let mj = data.m[j];
            let block_abs = (mj - predicted).norm();
            let c = path.seg_dirs[j].dot(&node.normal) / len;
            let det_p = (nalgebra::Matrix3::identity() + len * path.curvature[j]).determinant();
            let det_abs = (data.dets[j] - c * c * det_p).abs();
            let sv = mj.singular_values();
            FactorNode {
                block_abs,
                block_rel: block_abs / mj.norm(),
                det_abs,
                det_rel: det_abs / data.dets[j].abs(),
                signature: data.signatures[j],
                signature_deviation: (data.signatures[j] - 2).abs(),
                min_singular: sv.min(),
                det_m: data.dets[j],
            }
        })
        .collect();
    Ok(FactorReport { nodes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionReport {
    pub phase_diff: f64,
    pub det_product_diff: f64,
    pub det_product_rel: f64,
}

/// Phase and spreading-product differences between a path and a transmission insertion of it.
pub fn insertion_residuals(nu: &RayPath, mu: &RayPath) -> InsertionReport {
    let a = nu.det_product();
    let b = mu.det_product();
    let diff = (a - b).abs();
    InsertionReport {
        phase_diff: (nu.phase - mu.phase).abs(),
        det_product_diff: diff,
        det_product_rel: diff / a.abs().max(b.abs()),
    }
}

/// A member of the stationary set at one level, with its signed leading-order term.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMember {
    pub path: RayPath,
    /// Number of reflection nodes (the underlying ray).
    pub reflections: usize,
    pub term: Complex64,
}

/// Stationary paths with exactly `level` nodes whose illumination signs are strict:
/// every reflection path with at most `level` nodes (occluded ones included), completed
/// by transmission nodes at obstacles crossed by its incoming ray or its segments.
pub fn stationary_set(
    scene: &Scene,
    wave: &IncidentWave,
    x: &Vector3<f64>,
    bc: BoundaryCondition,
    level: usize,
    search: &PathSearch,
) -> Result<Vec<StationaryMember>> {
    if level == 0 {
        return Err(Error::InvalidInput("level must be at least 1".into()));
    }
    let empty = RayPath::assemble(scene, wave, Vec::new(), Vec::new(), *x)?;
    let search = PathSearch {
        max_bounces: level,
        ..*search
    };
    let mut bases = vec![empty];
    bases.extend(enumerate_paths_with(scene, wave, x, &search)?);
    let mut members = Vec::new();
    for base in bases {
        let extra = level - base.len();
        let candidates = insertion_candidates(scene, &base);
        for subset in combinations(candidates.len(), extra) {
            let chosen: Vec<_> = subset.iter().map(|i| candidates[*i].clone()).collect();
            let path = if chosen.is_empty() {
                base.clone()
            } else {
                with_insertions(scene, wave, &base, &chosen)?
            };
            let sign = member_sign(bc, path.len(), path.transmission_count());
            let term = sign * path.amplitude_term(wave.k);
            members.push(StationaryMember {
                reflections: base.len(),
                path,
                term,
            });
        }
    }
    Ok(members)
}

/// Sign of a level-`l` stationary term: every node flips it for Dirichlet, only
/// transmission nodes flip it for Neumann.
pub fn member_sign(bc: BoundaryCondition, len: usize, transmissions: usize) -> f64 {
    let flips = match bc {
        BoundaryCondition::Dirichlet => len,
        BoundaryCondition::Neumann => transmissions,
    };
    if flips % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Index subsets of size `r` of `0..n`, lexicographic.
fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else { break };
        idx[i] += 1;
        for j in (i + 1)..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticField {
    pub value: Complex64,
    pub terms: Vec<StationaryMember>,
}

/// Leading stationary-phase value of the level-`level` field increment.
pub fn asymptotic_field(
    scene: &Scene,
    wave: &IncidentWave,
    x: &Vector3<f64>,
    bc: BoundaryCondition,
    level: usize,
) -> Result<AsymptoticField> {
    asymptotic_field_with(scene, wave, x, bc, level, &PathSearch::default())
}

pub fn asymptotic_field_with(
    scene: &Scene,
    wave: &IncidentWave,
    x: &Vector3<f64>,
    bc: BoundaryCondition,
    level: usize,
    search: &PathSearch,
) -> Result<AsymptoticField> {
    let terms = stationary_set(scene, wave, x, bc, level, search)?;
    if let Some(bad) = terms.iter().find(|t| t.path.near_caustic) {
        return Err(Error::Caustic {
            target: [x.x, x.y, x.z],
            reason: format!("stationary path on obstacles {:?} is degenerate", bad.path.obstacles),
        });
    }
    let mut value = Complex64::new(0.0, 0.0);
    for t in &terms {
        value += t.term;
    }
    Ok(AsymptoticField { value, terms })
}
