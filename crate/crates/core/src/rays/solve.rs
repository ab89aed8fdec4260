use nalgebra::{DMatrix, DVector, Vector2, Vector3};

use super::{path_gradient, path_phase, IncidentWave, NodeKind, RayPath, CLASSIFY_TOLERANCE};
use crate::error::{Error, Result};
use crate::geometry::{chart_point, surface_point_unchecked, Obstacle, Scene, SurfacePoint};
use crate::matrix::reflect_direction;
use crate::stationary::{assemble_hessian, tangential_hessian};

/// Damped Newton settings for [`solve_path_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Converged when every tangential gradient is below this.
    pub tolerance: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-10,
        }
    }
}

/// Solves for a stationary path along `sequence` with prescribed node kinds.
///
/// Without `init`, the start is obtained by sweeping specular bisectors
/// (reflection nodes) and chord entry points (transmission nodes).
pub fn solve_path(
    scene: &Scene,
    wave: &IncidentWave,
    sequence: &[usize],
    kinds: &[NodeKind],
    x: &Vector3<f64>,
    init: Option<&[Vector3<f64>]>,
) -> Result<RayPath> {
    solve_path_with(scene, wave, sequence, kinds, x, init, &NewtonOptions::default())
}

pub fn solve_path_with(
    scene: &Scene,
    wave: &IncidentWave,
    sequence: &[usize],
    kinds: &[NodeKind],
    x: &Vector3<f64>,
    init: Option<&[Vector3<f64>]>,
    options: &NewtonOptions,
) -> Result<RayPath> {
    check_sequence(scene, sequence, kinds, x)?;
    let start = match init {
        Some(points) => {
            if points.len() != sequence.len() {
                return Err(Error::InvalidInput("one initial point per node is required".into()));
            }
            points
                .iter()
                .zip(sequence)
                .map(|(p, i)| scene.obstacle(*i).project(p))
                .collect()
        }
        None => sweep_seed(scene, wave, sequence, kinds, x, 4),
    };
    let nodes = newton(scene, wave, sequence, x, start, options)?;
    finish(scene, wave, nodes, kinds, x)
}

pub(crate) fn check_sequence(scene: &Scene, sequence: &[usize], kinds: &[NodeKind], x: &Vector3<f64>) -> Result<()> {
    if sequence.len() != kinds.len() {
        return Err(Error::InvalidInput("one node kind per obstacle is required".into()));
    }
    if let Some(bad) = sequence.iter().find(|i| **i >= scene.len()) {
        return Err(Error::InvalidInput(format!("obstacle index {bad} out of range")));
    }
    if sequence.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("consecutive nodes must lie on different obstacles".into()));
    }
    if let Some(id) = scene.containing(x) {
        return Err(Error::InsideObstacle {
            target: [x.x, x.y, x.z],
            id,
        });
    }
    Ok(())
}

/// Classifies the converged nodes and checks illumination signs and kinds.
pub(crate) fn finish(
    scene: &Scene,
    wave: &IncidentWave,
    nodes: Vec<SurfacePoint>,
    kinds: &[NodeKind],
    x: &Vector3<f64>,
) -> Result<RayPath> {
    let positions: Vec<Vector3<f64>> = nodes.iter().map(|n| n.position).collect();
    let (dirs, _) = super::segments(&positions, x);
    for (j, node) in nodes.iter().enumerate() {
        let inc = if j == 0 { wave.direction } else { dirs[j - 1] };
        if inc.dot(&node.normal) >= 0.0 {
            return Err(Error::SignViolation { node: j });
        }
        let found = if (dirs[j] - reflect_direction(&inc, &node.normal)).norm() < CLASSIFY_TOLERANCE {
            NodeKind::Reflection
        } else if (dirs[j] - inc).norm() < CLASSIFY_TOLERANCE {
            NodeKind::Transmission
        } else {
            return Err(Error::NoConvergence {
                residual: (dirs[j] - inc).norm().min((dirs[j] - reflect_direction(&inc, &node.normal)).norm()),
            });
        };
        if found != kinds[j] {
            return Err(Error::PathTypeMismatch {
                node: j,
                found: found.name(),
                expected: kinds[j].name(),
            });
        }
    }
    RayPath::assemble(scene, wave, nodes, kinds.to_vec(), *x)
}

/// Initial nodes from a few Gauss-Seidel sweeps of the local laws, starting at the centers.
pub(crate) fn sweep_seed(
    scene: &Scene,
    wave: &IncidentWave,
    sequence: &[usize],
    kinds: &[NodeKind],
    x: &Vector3<f64>,
    sweeps: usize,
) -> Vec<Vector3<f64>> {
    let l = sequence.len();
    let mut pts: Vec<Vector3<f64>> = sequence.iter().map(|i| scene.obstacle(*i).center).collect();
    for _ in 0..sweeps {
        for j in 0..l {
            let o = scene.obstacle(sequence[j]);
            let next = if j + 1 < l { pts[j + 1] } else { *x };
            pts[j] = match kinds[j] {
                NodeKind::Reflection => {
                    let inc = if j == 0 {
                        wave.direction
                    } else {
                        (pts[j] - pts[j - 1]).try_normalize(1e-300).unwrap_or(wave.direction)
                    };
                    let out = (next - pts[j]).try_normalize(1e-300).unwrap_or(-inc);
                    let n = (out - inc).try_normalize(1e-12).unwrap_or(-inc);
                    o.point_with_normal(&n)
                }
                NodeKind::Transmission => {
                    let (origin, dir) = if j == 0 {
                        (next, wave.direction)
                    } else {
                        let d = (next - pts[j - 1]).try_normalize(1e-300).unwrap_or(wave.direction);
                        (pts[j - 1], d)
                    };
                    match o.line_intersection(&origin, &dir) {
                        Some((t0, _)) => o.project(&(origin + t0 * dir)),
                        None => o.point_with_normal(&-dir),
                    }
                }
            };
        }
    }
    pts
}

/// Tilts every seed normal by a deterministic low-discrepancy offset.
pub(crate) fn perturb_seed(
    scene: &Scene,
    sequence: &[usize],
    seed: &[Vector3<f64>],
    start: usize,
    amount: f64,
) -> Vec<Vector3<f64>> {
    seed.iter()
        .zip(sequence)
        .enumerate()
        .map(|(j, (p, i))| {
            let o = scene.obstacle(*i);
            let n = crate::geometry::surface_eval(o, p)
                .map(|s| s.normal)
                .unwrap_or_else(|_| (p - o.center).normalize());
            let offset = spiral_direction(start * 7 + j * 3 + 1);
            o.point_with_normal(&(n + amount * offset).normalize())
        })
        .collect()
}

/// Golden-angle spiral on the unit sphere.
fn spiral_direction(i: usize) -> Vector3<f64> {
    let golden = 0.618_033_988_749_894_9_f64;
    let z = 1.0 - 2.0 * ((i as f64 * golden).fract());
    let phi = i as f64 * 2.399_963_229_728_653;
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Damped Newton minimization of the phase in the product of surface charts.
pub(crate) fn newton(
    scene: &Scene,
    wave: &IncidentWave,
    sequence: &[usize],
    x: &Vector3<f64>,
    start: Vec<Vector3<f64>>,
    options: &NewtonOptions,
) -> Result<Vec<SurfacePoint>> {
    let obstacles: Vec<&Obstacle> = sequence.iter().map(|i| scene.obstacle(*i)).collect();
    let mut nodes: Vec<SurfacePoint> = start
        .iter()
        .zip(&obstacles)
        .map(|(p, o)| surface_point_unchecked(o, &o.project(p)))
        .collect();
    let phase = |nodes: &[SurfacePoint]| {
        let pos: Vec<Vector3<f64>> = nodes.iter().map(|n| n.position).collect();
        path_phase(wave, &pos, x)
    };
    let max_step: Vec<f64> = obstacles.iter().map(|o| 0.3 * o.semi_axes.min()).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let grad = path_gradient(wave, &nodes, x);
        residual = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
        if residual < 1e-3 * options.tolerance {
            break;
        }
        let g = DVector::from_iterator(2 * nodes.len(), grad.iter().flat_map(|v| [v.x, v.y]));
        let (diag, off) = tangential_hessian(&wave.direction, &nodes, x);
        let h = assemble_hessian(&diag, &off);
        let mut step = levenberg_step(&h, &g);
        // cap the per-node step to stay inside the chart
        let scale = (0..nodes.len())
            .map(|j| {
                let s = Vector2::new(step[2 * j], step[2 * j + 1]).norm();
                if s > max_step[j] {
                    max_step[j] / s
                } else {
                    1.0
                }
            })
            .fold(1.0, f64::min);
        step *= scale;

        let current = phase(&nodes);
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = retract(&obstacles, &nodes, &step, t);
            // near the solution the phase decrease is below roundoff; take full steps
            if residual < 1e-6 || phase(&trial) <= current + 1e-4 * t * slope {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(trial) => nodes = trial,
            None => break,
        }
    }
    let grad = path_gradient(wave, &nodes, x);
    residual = residual.min(grad.iter().map(|g| g.norm()).fold(0.0, f64::max));
    let final_residual = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if final_residual < options.tolerance {
        Ok(nodes)
    } else {
        Err(Error::NoConvergence {
            residual: final_residual.max(residual),
        })
    }
}

fn levenberg_step(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let n = h.nrows();
    let scale = h.abs().max().max(1e-300);
    let mut mu = 0.0;
    loop {
        let m = h + DMatrix::identity(n, n) * mu;
        if let Some(ch) = m.cholesky() {
            return -ch.solve(g);
        }
        mu = if mu == 0.0 { 1e-8 * scale } else { mu * 10.0 };
        if mu > 1e12 * scale {
            return -g * (1.0 / scale);
        }
    }
}

fn retract(obstacles: &[&Obstacle], nodes: &[SurfacePoint], step: &DVector<f64>, t: f64) -> Vec<SurfacePoint> {
    nodes
        .iter()
        .zip(obstacles)
        .enumerate()
        .map(|(j, (node, o))| {
            let (s, r) = (t * step[2 * j], t * step[2 * j + 1]);
            let p = chart_point(o, node, s, r)
                .unwrap_or_else(|| o.project(&(node.position + s * node.dir_u + r * node.dir_v)));
            surface_point_unchecked(o, &p)
        })
        .collect()
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
    fn backscatter_node_is_south_pole() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let p = solve_path(&one_sphere(), &w, &[0], &[NodeKind::Reflection], &Vector3::new(0.0, 0.0, -3.0), None).unwrap();
        assert_relative_eq!(p.nodes[0].position, Vector3::new(0.0, 0.0, -1.0), epsilon = 1e-12);
        assert!(p.residual < 1e-10);
    }

    #[test]
    fn oblique_reflection_obeys_law() {
        let w = IncidentWave::new(Vector3::new(0.4, -0.2, 1.0), 10.0).unwrap();
        let x = Vector3::new(2.5, 1.0, -2.0);
        let p = solve_path(&one_sphere(), &w, &[0], &[NodeKind::Reflection], &x, None).unwrap();
        assert!(p.law_residual() < 1e-9);
        assert!(p.residual < 1e-10);
    }

    #[test]
    fn perturbed_start_converges_to_same_point() {
        let scene = one_sphere();
        let w = IncidentWave::new(Vector3::new(0.4, -0.2, 1.0), 10.0).unwrap();
        let x = Vector3::new(2.5, 1.0, -2.0);
        let base = solve_path(&scene, &w, &[0], &[NodeKind::Reflection], &x, None).unwrap();
        let seed = perturb_seed(&scene, &[0], &[base.nodes[0].position], 3, 0.3);
        let again = solve_path(&scene, &w, &[0], &[NodeKind::Reflection], &x, Some(&seed)).unwrap();
        assert_relative_eq!(base.nodes[0].position, again.nodes[0].position, epsilon = 1e-10);
    }

    #[test]
    fn two_bounce_axis_path() {
        // the incoming ray to A's right pole passes through B, so the path is flagged occluded
        let w = IncidentWave::new(-Vector3::x(), 5.0).unwrap();
        let x = Vector3::new(2.0, 0.0, 0.0);
        let p = solve_path(&two_spheres(), &w, &[0, 1], &[NodeKind::Reflection; 2], &x, None).unwrap();
        assert_relative_eq!(p.nodes[0].position, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(p.nodes[1].position, Vector3::new(3.0, 0.0, 0.0), epsilon = 1e-12);
        assert!(p.occluded);
        assert_relative_eq!(p.phase, -1.0 + 2.0 + 1.0, epsilon = 1e-13);
    }

    #[test]
    fn deep_shadow_has_no_lit_specular_point() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let r = solve_path(&one_sphere(), &w, &[0], &[NodeKind::Reflection], &Vector3::new(0.0, 0.0, 3.0), None);
        // the only lit stationary point is the transmission entry (0, 0, -1)
        assert!(
            matches!(
                r,
                Err(Error::SignViolation { .. }) | Err(Error::NoConvergence { .. }) | Err(Error::PathTypeMismatch { .. })
            ),
            "{r:?}"
        );
    }

    #[test]
    fn transmission_entry_point() {
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let x = Vector3::new(0.0, 0.0, 2.0);
        let p = solve_path(&one_sphere(), &w, &[0], &[NodeKind::Transmission], &x, None).unwrap();
        assert_relative_eq!(p.nodes[0].position, Vector3::new(0.0, 0.0, -1.0), epsilon = 1e-12);
        assert_relative_eq!(p.phase, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn kind_mismatch_and_bad_sequences() {
        let scene = two_spheres();
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let x = Vector3::new(0.0, 0.0, -3.0);
        let r = solve_path(&scene, &w, &[0, 0], &[NodeKind::Reflection; 2], &x, None);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
        let r = solve_path(&scene, &w, &[0], &[NodeKind::Reflection], &Vector3::zeros(), None);
        assert!(matches!(r, Err(Error::InsideObstacle { .. })));
    }
}
