use nalgebra::Vector3;
use num_complex::Complex64;

use super::solve::{check_sequence, finish, newton, perturb_seed, sweep_seed, NewtonOptions};
use super::{IncidentWave, NodeKind, RayPath, CAUSTIC_THRESHOLD};
use crate::error::{Error, Result};
use crate::geometry::{ray_crossings, surface_point_unchecked, Obstacle, Scene, SurfacePoint};
use crate::BoundaryCondition;

/// Settings for the reflection-path search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSearch {
    pub max_bounces: usize,
    /// Newton starts per obstacle sequence (the first is the unperturbed sweep seed).
    pub starts: usize,
    pub sequence_cap: usize,
}

impl Default for PathSearch {
    fn default() -> Self {
        Self {
            max_bounces: 3,
            starts: 4,
            sequence_cap: 100_000,
        }
    }
}

impl PathSearch {
    pub fn with_bounces(max_bounces: usize) -> Self {
        Self {
            max_bounces,
            ..Self::default()
        }
    }
}

/// All-reflection stationary paths with up to `max_bounces` nodes.
pub fn enumerate_paths(scene: &Scene, wave: &IncidentWave, x: &Vector3<f64>, max_bounces: usize) -> Result<Vec<RayPath>> {
    enumerate_paths_with(scene, wave, x, &PathSearch::with_bounces(max_bounces))
}

pub fn enumerate_paths_with(
    scene: &Scene,
    wave: &IncidentWave,
    x: &Vector3<f64>,
    search: &PathSearch,
) -> Result<Vec<RayPath>> {
    if let Some(id) = scene.containing(x) {
        return Err(Error::InsideObstacle {
            target: [x.x, x.y, x.z],
            id,
        });
    }
    let sequences = alternating_sequences(scene.len(), search.max_bounces, search.sequence_cap)?;
    let tol = 1e-6 * scene.scale();
    let options = NewtonOptions::default();
    let mut found: Vec<RayPath> = Vec::new();
    for seq in &sequences {
        let kinds = vec![NodeKind::Reflection; seq.len()];
        check_sequence(scene, seq, &kinds, x)?;
        let seed = sweep_seed(scene, wave, seq, &kinds, x, 4);
        let mut local: Vec<RayPath> = Vec::new();
        for start in 0..search.starts.max(1) {
            let init = if start == 0 {
                seed.clone()
            } else {
                perturb_seed(scene, seq, &seed, start, 0.35)
            };
            let Ok(nodes) = newton(scene, wave, seq, x, init, &options) else { continue };
            let path = match finish(scene, wave, nodes, &kinds, x) {
                Ok(p) => p,
                Err(Error::Tangency { .. }) | Err(Error::Singular { .. }) => {
                    return Err(Error::Caustic {
                        target: [x.x, x.y, x.z],
                        reason: format!("degenerate wavefront on obstacle sequence {seq:?}"),
                    })
                }
                Err(_) => continue,
            };
            if !local.iter().any(|p| same_nodes(p, &path, tol)) {
                local.push(path);
            }
        }
        local.sort_by(|a, b| a.phase.total_cmp(&b.phase));
        found.extend(local);
    }
    Ok(found)
}

fn same_nodes(a: &RayPath, b: &RayPath, tol: f64) -> bool {
    a.obstacles == b.obstacles
        && a
            .nodes
            .iter()
            .zip(&b.nodes)
            .all(|(p, q)| (p.position - q.position).norm() < tol)
}

/// Obstacle sequences of length `1..=max_len` with no repeated neighbours, in lexicographic order.
fn alternating_sequences(obstacles: usize, max_len: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut total = 0usize;
    for l in 1..=max_len {
        let count = (obstacles as f64) * (obstacles.saturating_sub(1) as f64).powi(l as i32 - 1);
        total = total.saturating_add(count.min(usize::MAX as f64) as usize);
        if total > cap {
            return Err(Error::Resource {
                what: "obstacle sequences",
                requested: total,
                cap,
            });
        }
    }
    let mut out = Vec::with_capacity(total);
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            for o in 0..obstacles {
                if seq.last() != Some(&o) {
                    let mut s = seq.clone();
                    s.push(o);
                    next.push(s);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    Ok(out)
}

/// An entry point where a path segment (or the incoming ray) crosses another obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    /// `0` is the incoming ray before the first node; `j >= 1` the segment leaving node `j - 1`.
    pub segment: usize,
    pub obstacle: usize,
    pub point: SurfacePoint,
    /// Distance from the segment start (or, for the incoming ray, from the first node backwards).
    pub distance: f64,
}

/// Entry points of every obstacle crossed by the incoming ray or a segment of `path`,
/// in path order.
pub fn insertion_candidates(scene: &Scene, path: &RayPath) -> Vec<Insertion> {
    let tol = 1e-9 * scene.scale();
    let mut out = Vec::new();
    let origin = path.nodes.first().map(|n| n.position).unwrap_or(path.target);
    let first_obstacle = path.obstacles.first().copied();
    let back = -path.incident;
    let mut incoming: Vec<Insertion> = ray_crossings(scene, &origin, &back, tol, f64::INFINITY)
        .into_iter()
        .filter(|c| Some(c.obstacle) != first_obstacle && c.t_enter > tol)
        .map(|c| {
            let o = scene.obstacle(c.obstacle);
            Insertion {
                segment: 0,
                obstacle: c.obstacle,
                point: surface_point_unchecked(o, &o.project(&(origin + c.t_exit * back))),
                distance: c.t_exit,
            }
        })
        .collect();
    // forward order along the incoming ray is decreasing backward distance
    incoming.sort_by(|a, b| b.distance.total_cmp(&a.distance));
    out.extend(incoming);
    for j in 0..path.len() {
        let start = path.nodes[j].position;
        let dir = path.seg_dirs[j];
        let len = path.seg_lens[j];
        let own = [Some(path.obstacles[j]), path.obstacles.get(j + 1).copied()];
        for c in ray_crossings(scene, &start, &dir, tol, len - tol) {
            if own.contains(&Some(c.obstacle)) || c.t_enter <= tol || c.t_enter >= len - tol {
                continue;
            }
            let o = scene.obstacle(c.obstacle);
            out.push(Insertion {
                segment: j + 1,
                obstacle: c.obstacle,
                point: surface_point_unchecked(o, &o.project(&(start + c.t_enter * dir))),
                distance: c.t_enter,
            });
        }
    }
    out
}

/// The path with transmission nodes added at the given entry points.
pub fn with_insertions(scene: &Scene, wave: &IncidentWave, path: &RayPath, chosen: &[Insertion]) -> Result<RayPath> {
    let mut nodes = Vec::with_capacity(path.len() + chosen.len());
    let mut kinds = Vec::with_capacity(path.len() + chosen.len());
    let mut ordered: Vec<&Insertion> = chosen.iter().collect();
    ordered.sort_by(|a, b| {
        a.segment.cmp(&b.segment).then(if a.segment == 0 {
            b.distance.total_cmp(&a.distance)
        } else {
            a.distance.total_cmp(&b.distance)
        })
    });
    let mut it = ordered.into_iter().peekable();
    for j in 0..=path.len() {
        while let Some(ins) = it.next_if(|i| i.segment == j) {
            nodes.push(ins.point.clone());
            kinds.push(NodeKind::Transmission);
        }
        if j < path.len() {
            nodes.push(path.nodes[j].clone());
            kinds.push(path.kinds[j]);
        }
    }
    if nodes.windows(2).any(|w| w[0].obstacle_id == w[1].obstacle_id) {
        return Err(Error::InvalidInput("insertion breaks obstacle alternation".into()));
    }
    RayPath::assemble(scene, wave, nodes, kinds, path.target)
}

/// Every path obtained from `path` by one transmission insertion.
pub fn insert_transmission(scene: &Scene, wave: &IncidentWave, path: &RayPath) -> Result<Vec<RayPath>> {
    insertion_candidates(scene, path)
        .into_iter()
        .map(|ins| with_insertions(scene, wave, path, std::slice::from_ref(&ins)))
        .collect()
}

/// Geometrical-optics field at a target.
#[derive(Debug, Clone, PartialEq)]
pub struct GoaField {
    pub value: Complex64,
    /// Incident term, zero when the backward ray from the target is blocked.
    pub incident: Complex64,
    pub contributions: Vec<(RayPath, Complex64)>,
    /// Stationary reflection paths excluded because an obstacle blocks them.
    pub occluded: Vec<RayPath>,
    pub shadowed: bool,
    pub caustic: bool,
}

pub fn goa_field(
    scene: &Scene,
    wave: &IncidentWave,
    x: &Vector3<f64>,
    bc: BoundaryCondition,
    max_bounces: usize,
) -> Result<GoaField> {
    goa_field_with(scene, wave, x, bc, &PathSearch::with_bounces(max_bounces))
}

/// Incident wave (if visible) plus one term per unobstructed reflection path:
/// `s * exp(-i k psi) / sqrt(prod det(I + lambda_j P_j))` with `s = (-1)^l` for
/// Dirichlet and `s = 1` for Neumann.
pub fn goa_field_with(
    scene: &Scene,
    wave: &IncidentWave,
    x: &Vector3<f64>,
    bc: BoundaryCondition,
    search: &PathSearch,
) -> Result<GoaField> {
    let target = [x.x, x.y, x.z];
    if let Some(id) = scene.containing(x) {
        return Err(Error::InsideObstacle { target, id });
    }
    if let Some(id) = scene.obstacles.iter().position(|o| line_grazes(o, x, &-wave.direction)) {
        return Err(Error::Caustic {
            target,
            reason: format!("incident ray through the target grazes obstacle {id}"),
        });
    }
    let tol = 1e-9 * scene.scale();
    let shadowed = !ray_crossings(scene, x, &-wave.direction, tol, f64::INFINITY).is_empty();
    let incident = if shadowed { Complex64::new(0.0, 0.0) } else { wave.value(x) };

    let paths = enumerate_paths_with(scene, wave, x, search)?;
    let mut contributions = Vec::new();
    let mut occluded = Vec::new();
    for path in paths {
        if path.near_caustic {
            return Err(Error::Caustic {
                target,
                reason: format!(
                    "path on obstacles {:?} has det factors {:?} (threshold {CAUSTIC_THRESHOLD:e})",
                    path.obstacles,
                    path.det_factors()
                ),
            });
        }
        if path.occluded {
            occluded.push(path);
            continue;
        }
        let term = goa_sign(bc, path.len()) * path.amplitude_term(wave.k);
        contributions.push((path, term));
    }
    let mut value = incident;
    for (_, t) in &contributions {
        value += t;
    }
    Ok(GoaField {
        value,
        incident,
        contributions,
        occluded,
        shadowed,
        caustic: false,
    })
}

pub(crate) fn goa_sign(bc: BoundaryCondition, reflections: usize) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet if reflections % 2 == 1 => -1.0,
        _ => 1.0,
    }
}

/// Whether the ray `origin + t dir`, `t > 0`, passes within grazing distance of the surface.
fn line_grazes(o: &Obstacle, origin: &Vector3<f64>, dir: &Vector3<f64>) -> bool {
    let q = (origin - o.center).component_div(&o.semi_axes);
    let d = dir.component_div(&o.semi_axes);
    let t = -q.dot(&d) / d.norm_squared();
    if t <= 0.0 {
        return false;
    }
    let closest = (q + t * d).norm_squared() - 1.0;
    closest.abs() < CAUSTIC_THRESHOLD * CAUSTIC_THRESHOLD
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_scene;
    use approx::assert_relative_eq;

    fn one_sphere() -> Scene {
        validate_scene(vec![Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap()]).unwrap()
    }

    fn two_spheres() -> Scene {
        validate_scene(vec![
            Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap(),
            Obstacle::sphere(1, Vector3::new(4.0, 0.0, 0.0), 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn sequences_alternate() {
        let s = alternating_sequences(3, 3, 1000).unwrap();
        assert_eq!(s.len(), 3 + 6 + 12);
        assert!(s.iter().all(|q| q.windows(2).all(|w| w[0] != w[1])));
        assert_eq!(alternating_sequences(1, 4, 10).unwrap(), vec![vec![0]]);
        assert!(matches!(alternating_sequences(5, 6, 100), Err(Error::Resource { .. })));
    }

    #[test]
    fn single_sphere_backscatter_has_one_path() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let paths = enumerate_paths(&one_sphere(), &w, &Vector3::new(0.0, 0.0, -3.0), 4).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].len(), 1);
        assert!(enumerate_paths(&one_sphere(), &w, &Vector3::new(0.0, 0.0, -3.0), 0).unwrap().is_empty());
    }

    #[test]
    fn goa_backscatter_closed_form() {
        for k in [1.0, 10.0, 100.0] {
            let w = IncidentWave::new(Vector3::z(), k).unwrap();
            let x = Vector3::new(0.0, 0.0, -3.0);
            let d = goa_field(&one_sphere(), &w, &x, BoundaryCondition::Dirichlet, 2).unwrap();
            let n = goa_field(&one_sphere(), &w, &x, BoundaryCondition::Neumann, 2).unwrap();
            let inc = Complex64::from_polar(1.0, 3.0 * k);
            let refl = Complex64::from_polar(0.2, -k);
            assert!((d.value - (inc - refl)).norm() < 1e-12);
            assert!((n.value - (inc + refl)).norm() < 1e-12);
            assert!(!d.shadowed);
        }
    }

    #[test]
    fn deep_shadow_is_zero() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let g = goa_field(&one_sphere(), &w, &Vector3::new(0.0, 0.0, 3.0), BoundaryCondition::Dirichlet, 2).unwrap();
        assert_eq!(g.value, Complex64::new(0.0, 0.0));
        assert!(g.shadowed);
    }

    #[test]
    fn shadow_boundary_is_caustic() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let r = goa_field(&one_sphere(), &w, &Vector3::new(1.0, 0.0, 3.0), BoundaryCondition::Dirichlet, 1);
        assert!(matches!(r, Err(Error::Caustic { .. })), "{r:?}");
    }

    #[test]
    fn two_sphere_scene_has_double_bounce() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let x = Vector3::new(2.0, 0.0, -3.0);
        let paths = enumerate_paths(&two_spheres(), &w, &x, 2).unwrap();
        let doubles: Vec<_> = paths.iter().filter(|p| p.len() == 2).collect();
        assert!(doubles.iter().any(|p| p.obstacles == vec![0, 1]));
        assert!(doubles.iter().any(|p| p.obstacles == vec![1, 0]));
        for p in &paths {
            assert!(p.law_residual() < 1e-9);
            assert!(p.det_factors().iter().all(|d| *d > 0.0));
        }
    }

    #[test]
    fn start_density_does_not_change_paths() {
        let w = IncidentWave::new(Vector3::new(0.2, 0.1, 1.0), 10.0).unwrap();
        let x = Vector3::new(2.0, 0.5, -3.0);
        let coarse = enumerate_paths_with(&two_spheres(), &w, &x, &PathSearch { starts: 4, ..PathSearch::with_bounces(3) }).unwrap();
        let fine = enumerate_paths_with(&two_spheres(), &w, &x, &PathSearch { starts: 8, ..PathSearch::with_bounces(3) }).unwrap();
        assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.iter().zip(&fine) {
            assert!(same_nodes(a, b, 1e-8));
        }
    }

    #[test]
    fn forward_insertion_through_second_sphere() {
        // the transmission path enters A on the axis; the straight segment to x also crosses B
        let scene = validate_scene(vec![
            Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap(),
            Obstacle::sphere(1, Vector3::new(0.0, 0.0, 4.0), 1.0).unwrap(),
        ])
        .unwrap();
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let x = Vector3::new(0.0, 0.0, 7.0);
        let a = scene.obstacle(0);
        let entry = surface_point_unchecked(a, &Vector3::new(0.0, 0.0, -1.0));
        let base = RayPath::assemble(&scene, &w, vec![entry], vec![NodeKind::Transmission], x).unwrap();
        let inserted = insert_transmission(&scene, &w, &base).unwrap();
        assert_eq!(inserted.len(), 1);
        let mu = &inserted[0];
        assert_eq!(mu.obstacles, vec![0, 1]);
        assert_relative_eq!(mu.nodes[1].position, Vector3::new(0.0, 0.0, 3.0), epsilon = 1e-12);
        assert!((mu.phase - base.phase).abs() < 1e-12);
    }

    #[test]
    fn unobstructed_reflection_has_no_insertion() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let paths = enumerate_paths(&one_sphere(), &w, &Vector3::new(0.0, 0.0, -3.0), 1).unwrap();
        assert!(insert_transmission(&one_sphere(), &w, &paths[0]).unwrap().is_empty());
    }
}
