use nalgebra::Vector3;

use super::{surface_point_unchecked, Scene, SurfacePoint};

/// `|<dir, n>|` below this flags a grazing hit.
pub const GRAZING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RayHit {
    pub point: SurfacePoint,
    pub t: f64,
    pub grazing: bool,
    pub obstacle: usize,
}

/// Nearest forward intersection with `t > 1e-9 * scale`.
pub fn ray_intersect(scene: &Scene, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<RayHit> {
    let t_min = 1e-9 * scene.scale();
    let mut best: Option<(usize, f64)> = None;
    for (i, o) in scene.obstacles.iter().enumerate() {
        let Some((t0, t1)) = o.line_intersection(origin, dir) else { continue };
        let t = if t0 > t_min {
            t0
        } else if t1 > t_min {
            t1
        } else {
            continue;
        };
        if best.is_none_or(|(_, bt)| t < bt) {
            best = Some((i, t));
        }
    }
    let (i, t) = best?;
    let o = &scene.obstacles[i];
    let point = surface_point_unchecked(o, &o.project(&(origin + t * dir)));
    let grazing = dir.dot(&point.normal).abs() < GRAZING_TOLERANCE;
    Some(RayHit {
        point,
        t,
        grazing,
        obstacle: i,
    })
}

/// Chord of an obstacle cut by a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub obstacle: usize,
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Obstacles whose interior meets the open segment `origin + t dir`, `t in (t_min, t_max)`,
/// sorted by entry parameter. Chords shorter than `1e-9 * scale` are ignored.
pub fn ray_crossings(
    scene: &Scene,
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    t_min: f64,
    t_max: f64,
) -> Vec<Crossing> {
    let tol = 1e-9 * scene.scale();
    let mut out: Vec<Crossing> = scene
        .obstacles
        .iter()
        .enumerate()
        .filter_map(|(i, o)| {
            let (t0, t1) = o.line_intersection(origin, dir)?;
            let lo = t0.max(t_min);
            let hi = t1.min(t_max);
            (hi - lo > tol && t1 - t0 > tol).then_some(Crossing {
                obstacle: i,
                t_enter: t0,
                t_exit: t1,
            })
        })
        .collect();
    out.sort_by(|a, b| a.t_enter.total_cmp(&b.t_enter));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{validate_scene, Obstacle};
    use approx::assert_relative_eq;

    fn scene() -> Scene {
        validate_scene(vec![Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn axis_hit() {
        let hit = ray_intersect(&scene(), &Vector3::new(0.0, 0.0, -3.0), &Vector3::z()).unwrap();
        assert_relative_eq!(hit.point.position, Vector3::new(0.0, 0.0, -1.0), epsilon = 1e-15);
        assert_relative_eq!(hit.t, 2.0, epsilon = 1e-15);
        assert!(!hit.grazing);
    }

    #[test]
    fn parallel_miss() {
        assert!(ray_intersect(&scene(), &Vector3::new(0.0, 0.0, -3.0), &Vector3::x()).is_none());
    }

    #[test]
    fn tangent_line_grazes() {
        let hit = ray_intersect(&scene(), &Vector3::new(-3.0, 1.0, 0.0), &Vector3::x()).unwrap();
        assert_relative_eq!(hit.point.position, Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(hit.t, 3.0, epsilon = 1e-12);
        assert!(hit.grazing);
    }

    #[test]
    fn origin_on_surface_finds_far_side() {
        let hit = ray_intersect(&scene(), &Vector3::new(0.0, 0.0, -1.0), &Vector3::z()).unwrap();
        assert_relative_eq!(hit.t, 2.0, epsilon = 1e-12);
        assert!(ray_intersect(&scene(), &Vector3::new(0.0, 0.0, -1.0), &-Vector3::z()).is_none());
    }

    #[test]
    fn crossings_sorted_and_clipped() {
        let s = validate_scene(vec![
            Obstacle::sphere(0, Vector3::new(0.0, 0.0, 4.0), 1.0).unwrap(),
            Obstacle::sphere(1, Vector3::zeros(), 1.0).unwrap(),
        ])
        .unwrap();
        let c = ray_crossings(&s, &Vector3::new(0.0, 0.0, -3.0), &Vector3::z(), 0.0, f64::INFINITY);
        assert_eq!(c.iter().map(|c| c.obstacle).collect::<Vec<_>>(), vec![1, 0]);
        assert!(ray_crossings(&s, &Vector3::new(0.0, 0.0, -3.0), &Vector3::z(), 0.0, 1.5).is_empty());
        assert!(ray_crossings(&s, &Vector3::new(-3.0, 1.0, 0.0), &Vector3::x(), 0.0, 10.0).is_empty());
    }
}
