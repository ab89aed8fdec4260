//! Ray paths between obstacles: phases, stationarity, wavefront curvature and
//! the geometrical-optics field.
//!
//! A path visits surface points `sigma_1, ..., sigma_l` on an alternating
//! sequence of obstacles and ends at a target `x`. Its phase is
//! `<xi, sigma_1> + sum |sigma_{j+1} - sigma_j| + |x - sigma_l|`.

mod enumerate;
mod solve;

pub use enumerate::{
    enumerate_paths, enumerate_paths_with, goa_field, goa_field_with, insert_transmission, insertion_candidates,
    with_insertions, GoaField, Insertion, PathSearch,
};
pub use solve::{solve_path, solve_path_with, NewtonOptions};

use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ray_crossings, Scene, SurfacePoint};
use crate::matrix::{reflect_direction, reflect_map, shift_map, SymMatrix3};

/// `|det(I + lambda P)|` or a grazing cosine below this marks a target near the caustic set.
pub const CAUSTIC_THRESHOLD: f64 = 1e-6;

/// Tolerance on the reflection/transmission laws when classifying a stationary node.
pub const CLASSIFY_TOLERANCE: f64 = 1e-8;

/// Incident plane wave `exp(-i k <xi, x>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub direction: Vector3<f64>,
    pub k: f64,
}

impl IncidentWave {
    /// Normalizes `direction`; fails on a zero direction or non-positive wavenumber.
    pub fn new(direction: Vector3<f64>, k: f64) -> Result<Self> {
        let Some(direction) = direction.try_normalize(1e-300) else {
            return Err(Error::InvalidInput("incident direction must be nonzero".into()));
        };
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("wavenumber must be positive, got {k}")));
        }
        Ok(Self { direction, k })
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.direction, k)
    }

    pub fn value(&self, x: &Vector3<f64>) -> Complex64 {
        Complex64::from_polar(1.0, -self.k * self.direction.dot(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Reflection,
    Transmission,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Reflection => "reflection",
            NodeKind::Transmission => "transmission",
        }
    }
}

/// A stationary (or candidate) path with its segment data and curvature matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    pub incident: Vector3<f64>,
    pub obstacles: Vec<usize>,
    pub nodes: Vec<SurfacePoint>,
    pub kinds: Vec<NodeKind>,
    pub target: Vector3<f64>,
    /// `seg_dirs[j]` points from node `j` to node `j + 1` (or to the target).
    pub seg_dirs: Vec<Vector3<f64>>,
    pub seg_lens: Vec<f64>,
    pub phase: f64,
    /// Wavefront curvature just after each node.
    pub curvature: Vec<SymMatrix3>,
    /// Largest tangential gradient norm of the phase.
    pub residual: f64,
    /// Some segment, or the incoming ray, passes through another obstacle.
    pub occluded: bool,
    pub near_caustic: bool,
}

impl RayPath {
    /// Assembles segment data, phase and curvature for given nodes.
    pub fn assemble(
        scene: &Scene,
        wave: &IncidentWave,
        nodes: Vec<SurfacePoint>,
        kinds: Vec<NodeKind>,
        target: Vector3<f64>,
    ) -> Result<Self> {
        if nodes.len() != kinds.len() {
            return Err(Error::InvalidInput("one node kind per node is required".into()));
        }
        let positions: Vec<Vector3<f64>> = nodes.iter().map(|n| n.position).collect();
        let (seg_dirs, seg_lens) = segments(&positions, &target);
        let phase = path_phase(wave, &positions, &target);
        let residual = path_gradient(wave, &nodes, &target)
            .iter()
            .map(|g| g.norm())
            .fold(0.0, f64::max);
        let mut path = RayPath {
            incident: wave.direction,
            obstacles: nodes.iter().map(|n| n.obstacle_id).collect(),
            nodes,
            kinds,
            target,
            seg_dirs,
            seg_lens,
            phase,
            curvature: Vec::new(),
            residual,
            occluded: false,
            near_caustic: false,
        };
        path.curvature = propagate_curvature(&path)?;
        path.occluded = is_occluded(scene, &path);
        path.near_caustic = path.det_factors().iter().any(|d| d.abs() < CAUSTIC_THRESHOLD)
            || (0..path.len()).any(|j| {
                let n = &path.nodes[j].normal;
                path.incoming(j).dot(n).abs() < CAUSTIC_THRESHOLD || path.seg_dirs[j].dot(n).abs() < CAUSTIC_THRESHOLD
            });
        Ok(path)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Direction arriving at node `j`.
    pub fn incoming(&self, j: usize) -> Vector3<f64> {
        if j == 0 {
            self.incident
        } else {
            self.seg_dirs[j - 1]
        }
    }

    pub fn transmission_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == NodeKind::Transmission).count()
    }

    pub fn is_reflection_only(&self) -> bool {
        self.transmission_count() == 0
    }

    /// `det(I + lambda_j P_j)` per node.
    pub fn det_factors(&self) -> Vec<f64> {
        self.curvature
            .iter()
            .zip(&self.seg_lens)
            .map(|(p, l)| (SymMatrix3::identity() + *l * p).determinant())
            .collect()
    }

    /// Product of [`RayPath::det_factors`]: the square of the amplitude denominator.
    pub fn det_product(&self) -> f64 {
        self.det_factors().iter().product()
    }

    /// `exp(-i k psi) / sqrt(prod det(I + lambda_j P_j))`, without sign.
    pub fn amplitude_term(&self, k: f64) -> Complex64 {
        Complex64::from_polar(1.0 / self.det_product().sqrt(), -k * self.phase)
    }

    /// Largest deviation from the reflection or transmission law over the nodes.
    pub fn law_residual(&self) -> f64 {
        (0..self.len())
            .map(|j| {
                let inc = self.incoming(j);
                let expected = match self.kinds[j] {
                    NodeKind::Reflection => reflect_direction(&inc, &self.nodes[j].normal),
                    NodeKind::Transmission => inc,
                };
                (self.seg_dirs[j] - expected).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Unit directions and lengths of the segments `sigma_j -> sigma_{j+1}` and `sigma_l -> x`.
pub fn segments(nodes: &[Vector3<f64>], x: &Vector3<f64>) -> (Vec<Vector3<f64>>, Vec<f64>) {
    let mut dirs = Vec::with_capacity(nodes.len());
    let mut lens = Vec::with_capacity(nodes.len());
    for j in 0..nodes.len() {
        let next = if j + 1 < nodes.len() { nodes[j + 1] } else { *x };
        let d = next - nodes[j];
        let l = d.norm();
        dirs.push(d / l);
        lens.push(l);
    }
    (dirs, lens)
}

/// `<xi, sigma_1> + sum |sigma_{j+1} - sigma_j| + |x - sigma_l|`; `<xi, x>` for an empty path.
pub fn path_phase(wave: &IncidentWave, nodes: &[Vector3<f64>], x: &Vector3<f64>) -> f64 {
    let Some(first) = nodes.first() else {
        return wave.direction.dot(x);
    };
    let mut psi = wave.direction.dot(first);
    for j in 0..nodes.len() {
        let next = if j + 1 < nodes.len() { &nodes[j + 1] } else { x };
        psi += (next - nodes[j]).norm();
    }
    psi
}

/// Tangential gradient of the phase at each node: projection of `xi_{j-1} - xi_j`.
pub fn path_gradient(wave: &IncidentWave, nodes: &[SurfacePoint], x: &Vector3<f64>) -> Vec<Vector2<f64>> {
    let positions: Vec<Vector3<f64>> = nodes.iter().map(|n| n.position).collect();
    let (dirs, _) = segments(&positions, x);
    nodes
        .iter()
        .enumerate()
        .map(|(j, node)| {
            let inc = if j == 0 { wave.direction } else { dirs[j - 1] };
            node.tangential(&(inc - dirs[j]))
        })
        .collect()
}

/// Curvature matrices after each node: reflection applies the reflection map to the
/// propagated curvature, transmission only propagates it.
pub fn propagate_curvature(path: &RayPath) -> Result<Vec<SymMatrix3>> {
    let mut out = Vec::with_capacity(path.len());
    let mut arriving = SymMatrix3::zeros();
    for j in 0..path.len() {
        if j > 0 {
            arriving = shift_map(&out[j - 1], path.seg_lens[j - 1])?;
        }
        let node = &path.nodes[j];
        let p = match path.kinds[j] {
            NodeKind::Reflection => reflect_map(&arriving, &node.curvature_matrix(), &node.normal, &path.incoming(j))?,
            NodeKind::Transmission => arriving,
        };
        out.push(p);
    }
    Ok(out)
}

/// Whether the incoming ray or any segment of a reflection path passes through an obstacle.
fn is_occluded(scene: &Scene, path: &RayPath) -> bool {
    let tol = 1e-9 * scene.scale();
    if path.is_empty() {
        return !ray_crossings(scene, &path.target, &-path.incident, tol, f64::INFINITY).is_empty();
    }
    let first = &path.nodes[0].position;
    let skip_own = |c: &crate::geometry::Crossing, own: &[usize]| !own.contains(&c.obstacle);
    let incoming = ray_crossings(scene, first, &-path.incident, tol, f64::INFINITY);
    if incoming.iter().any(|c| skip_own(c, &[path.obstacles[0]])) {
        return true;
    }
    (0..path.len()).any(|j| {
        let own: Vec<usize> = if j + 1 < path.len() {
            vec![path.obstacles[j], path.obstacles[j + 1]]
        } else {
            vec![path.obstacles[j]]
        };
        ray_crossings(scene, &path.nodes[j].position, &path.seg_dirs[j], tol, path.seg_lens[j] - tol)
            .iter()
            .any(|c| skip_own(c, &own))
    })
}
