//! Analytic strictly convex obstacles (spheres and axis-aligned ellipsoids).
//!
//! Every obstacle is the set `sum_i ((p_i - c_i) / a_i)^2 <= 1`. Surface points
//! carry the outer normal, the principal frame `{u, v, n}` with `u` along the
//! direction of maximum curvature, and the principal curvatures `k1 >= k2 > 0`.
//! Near a point the surface is the graph `z = g(u, v) = -(k1 u^2 + k2 v^2) / 2 + ...`
//! over its tangent plane, with `z` measured along the outer normal.

mod chart;
mod grid;
mod ray;

pub use chart::{chart_derivative_oracle, chart_point, ChartDerivative, DerivativeOrder};
pub use grid::{build_grid, build_grid_with_cap, SurfaceGrid, DEFAULT_MAX_GRID_NODES};
pub use ray::{ray_crossings, ray_intersect, Crossing, RayHit, GRAZING_TOLERANCE};

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

/// Relative tolerance on the implicit-equation residual accepted by [`surface_eval`].
pub const ON_SURFACE_TOLERANCE: f64 = 1e-9;

/// Relative curvature gap below which a point is treated as umbilic.
pub const UMBILIC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleKind {
    Sphere,
    Ellipsoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: usize,
    pub kind: ObstacleKind,
    pub center: Vector3<f64>,
    pub semi_axes: Vector3<f64>,
}

impl Obstacle {
    pub fn sphere(id: usize, center: Vector3<f64>, radius: f64) -> Result<Self> {
        Self::checked(id, ObstacleKind::Sphere, center, Vector3::repeat(radius))
    }

    pub fn ellipsoid(id: usize, center: Vector3<f64>, semi_axes: Vector3<f64>) -> Result<Self> {
        Self::checked(id, ObstacleKind::Ellipsoid, center, semi_axes)
    }

    fn checked(
        id: usize,
        kind: ObstacleKind,
        center: Vector3<f64>,
        semi_axes: Vector3<f64>,
    ) -> Result<Self> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidObstacle {
                id,
                reason: "center must be finite".into(),
            });
        }
        if !semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(Error::InvalidObstacle {
                id,
                reason: format!("semi-axes must be positive, got {:?}", semi_axes.as_slice()),
            });
        }
        Ok(Self {
            id,
            kind,
            center,
            semi_axes,
        })
    }

    /// Largest semi-axis; every length tolerance is relative to it.
    pub fn scale(&self) -> f64 {
        self.semi_axes.max()
    }

    /// Normalized coordinates `(p - c) / a`.
    fn normalized(&self, p: &Vector3<f64>) -> Vector3<f64> {
        (p - self.center).component_div(&self.semi_axes)
    }

    /// Implicit function `F(p) = |(p - c) / a|^2 - 1`: negative inside, positive outside.
    pub fn implicit(&self, p: &Vector3<f64>) -> f64 {
        self.normalized(p).norm_squared() - 1.0
    }

    pub fn implicit_gradient(&self, p: &Vector3<f64>) -> Vector3<f64> {
        2.0 * (p - self.center).component_div(&self.semi_axes.component_mul(&self.semi_axes))
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        self.implicit(p) <= 0.0
    }

    /// Radial projection of `p` onto the surface along the ray from the center.
    pub fn project(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let q = self.normalized(p);
        let rho = q.norm();
        if rho == 0.0 {
            return self.center + Vector3::new(self.semi_axes.x, 0.0, 0.0);
        }
        self.center + (q / rho).component_mul(&self.semi_axes)
    }

    /// The unique surface point whose outer normal is `n`.
    pub fn point_with_normal(&self, n: &Vector3<f64>) -> Vector3<f64> {
        let an = n.component_mul(&self.semi_axes);
        self.center + an.component_mul(&self.semi_axes) / an.norm()
    }

    /// Support function `max_{p in K} <p, n>`.
    pub fn support(&self, n: &Vector3<f64>) -> f64 {
        self.center.dot(n) + n.component_mul(&self.semi_axes).norm()
    }

    /// Point at parameters `(t, phi)`: `t = cos(theta)` along the z semi-axis.
    pub fn parametric_point(&self, t: f64, phi: f64) -> Vector3<f64> {
        let s = (1.0 - t * t).max(0.0).sqrt();
        self.center
            + Vector3::new(
                self.semi_axes.x * s * phi.cos(),
                self.semi_axes.y * s * phi.sin(),
                self.semi_axes.z * t,
            )
    }

    /// Area element `|dr/dt x dr/dphi|` of [`Obstacle::parametric_point`].
    pub fn parametric_jacobian(&self, t: f64, phi: f64) -> f64 {
        let (a, b, c) = (self.semi_axes.x, self.semi_axes.y, self.semi_axes.z);
        let (sp, cp) = phi.sin_cos();
        let s2 = (1.0 - t * t).max(0.0);
        (c * c * s2 * (b * b * cp * cp + a * a * sp * sp) + a * a * b * b * t * t).sqrt()
    }

    /// Exact area for spheres and spheroids; triaxial ellipsoids use a dense
    /// Gauss-Legendre product rule (relative accuracy far below 1e-10).
    pub fn surface_area(&self) -> f64 {
        use std::f64::consts::PI;
        let mut ax = [self.semi_axes.x, self.semi_axes.y, self.semi_axes.z];
        ax.sort_by(f64::total_cmp);
        let tol = 1e-14 * ax[2];
        if (ax[0] - ax[2]).abs() <= tol {
            return 4.0 * PI * ax[0] * ax[0];
        }
        if (ax[1] - ax[2]).abs() <= tol {
            // oblate: two large equal axes
            let (a, c) = (ax[2], ax[0]);
            let e = (1.0 - c * c / (a * a)).sqrt();
            return 2.0 * PI * a * a * (1.0 + (1.0 - e * e) / e * e.atanh());
        }
        if (ax[0] - ax[1]).abs() <= tol {
            let (a, c) = (ax[0], ax[2]);
            let e = (1.0 - a * a / (c * c)).sqrt();
            return 2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin());
        }
        let (nodes, weights) = crate::quadrature::gauss_legendre(200);
        let nphi = 800;
        let mut area = 0.0;
        for (t, w) in nodes.iter().zip(weights.iter()) {
            let mut ring = 0.0;
            for m in 0..nphi {
                let phi = 2.0 * PI * (m as f64 + 0.5) / nphi as f64;
                ring += self.parametric_jacobian(*t, phi);
            }
            area += w * ring * 2.0 * PI / nphi as f64;
        }
        area
    }

    /// Euclidean distance from `p` to the surface; zero for points inside.
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let y = p - self.center;
        if self.kind == ObstacleKind::Sphere {
            return y.norm() - self.semi_axes.x;
        }
        // nearest point q_i = a_i^2 y_i / (t + a_i^2), with t > 0 the root of
        // sum (a_i y_i / (t + a_i^2))^2 = 1 (decreasing in t)
        let a2 = self.semi_axes.component_mul(&self.semi_axes);
        let excess = |t: f64| {
            (0..3)
                .map(|i| (self.semi_axes[i] * y[i] / (t + a2[i])).powi(2))
                .sum::<f64>()
                - 1.0
        };
        let (mut lo, mut hi) = (0.0, self.scale() * y.norm());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let q = Vector3::from_fn(|i, _| a2[i] * y[i] / (t + a2[i]));
        (y - q).norm()
    }

    /// Nearest and farthest parameters where the line `origin + t dir` meets the surface.
    pub fn line_intersection(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<(f64, f64)> {
        let o = self.normalized(origin);
        let d = dir.component_div(&self.semi_axes);
        let a = d.norm_squared();
        let b = o.dot(&d);
        let c = o.norm_squared() - 1.0;
        let disc = b * b - a * c;
        if disc < 0.0 || a == 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // stable root pair
        let q = if b > 0.0 { -(b + sq) } else { -b + sq };
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / a, c / q)
        };
        Some((r1.min(r2), r1.max(r2)))
    }
}

/// A validated collection of pairwise disjoint obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub obstacles: Vec<Obstacle>,
    /// Smallest pairwise surface distance, `+inf` for a single obstacle.
    pub min_gap: f64,
}

impl Scene {
    /// Largest semi-axis over all obstacles.
    pub fn scale(&self) -> f64 {
        self.obstacles.iter().map(Obstacle::scale).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn obstacle(&self, index: usize) -> &Obstacle {
        &self.obstacles[index]
    }

    /// Index of the obstacle containing `p` (boundary included), if any.
    pub fn containing(&self, p: &Vector3<f64>) -> Option<usize> {
        self.obstacles.iter().position(|o| o.contains(p))
    }
}

/// Checks that obstacles are pairwise disjoint. Ids are reassigned to input order.
pub fn validate_scene(obstacles: Vec<Obstacle>) -> Result<Scene> {
    if obstacles.is_empty() {
        return Err(Error::EmptyScene);
    }
    let mut obstacles = obstacles;
    for (i, o) in obstacles.iter_mut().enumerate() {
        o.id = i;
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..obstacles.len() {
        for j in (i + 1)..obstacles.len() {
            let gap = surface_gap(&obstacles[i], &obstacles[j]);
            let scale = obstacles[i].scale().max(obstacles[j].scale());
            if gap <= 1e-12 * scale {
                return Err(Error::Overlap {
                    first: i,
                    second: j,
                    gap,
                });
            }
            min_gap = min_gap.min(gap);
        }
    }
    Ok(Scene { obstacles, min_gap })
}

/// Signed separation between two convex obstacles (non-positive when they intersect).
///
/// Maximizes `-h_b(-n) - h_a(n)` over unit `n` (h the support function), i.e. the
/// width of the widest slab separating the two bodies.
fn surface_gap(a: &Obstacle, b: &Obstacle) -> f64 {
    let d = b.center - a.center;
    if a.kind == ObstacleKind::Sphere && b.kind == ObstacleKind::Sphere {
        return d.norm() - a.semi_axes.x - b.semi_axes.x;
    }
    let slab = |n: &Vector3<f64>| -b.support(&-n) - a.support(n);
    let mut n = if d.norm() > 0.0 { d.normalize() } else { Vector3::x() };
    let mut value = slab(&n);
    let mut beta = 0.5;
    for _ in 0..5000 {
        let toward = b.point_with_normal(&-n) - a.point_with_normal(&n);
        let Some(dir) = toward.try_normalize(0.0) else { break };
        let candidate = (n + beta * (dir - n)).normalize();
        let cv = slab(&candidate);
        if cv > value {
            let step = (candidate - n).norm();
            n = candidate;
            value = cv;
            if step < 1e-15 {
                break;
            }
            beta = (beta * 1.5).min(1.0);
        } else {
            beta *= 0.5;
            if beta < 1e-12 {
                break;
            }
        }
    }
    if value <= 0.0 {
        // no separating slab; report a penetration-like negative value
        return value.min(-f64::EPSILON);
    }
    value
}

/// Point on an obstacle with its outer normal, principal frame and curvatures.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub obstacle_id: usize,
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Principal direction of maximum curvature.
    pub dir_u: Vector3<f64>,
    pub dir_v: Vector3<f64>,
    pub k1: f64,
    pub k2: f64,
}

impl SurfacePoint {
    /// Rows are `u`, `v`, `n`: maps world coordinates to frame coordinates.
    pub fn frame(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[
            self.dir_u.transpose(),
            self.dir_v.transpose(),
            self.normal.transpose(),
        ])
    }

    /// Curvature matrix `B = k1 u u^t + k2 v v^t` in world coordinates.
    pub fn curvature_matrix(&self) -> Matrix3<f64> {
        self.k1 * self.dir_u * self.dir_u.transpose() + self.k2 * self.dir_v * self.dir_v.transpose()
    }

    /// Tangential components `(<w, u>, <w, v>)`.
    pub fn tangential(&self, w: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(w.dot(&self.dir_u), w.dot(&self.dir_v))
    }

    /// Compression `[<e_a, M e_b>]_{a,b in {u,v}}` of a 3x3 matrix to the tangent plane.
    pub fn restrict(&self, m: &Matrix3<f64>) -> Matrix2<f64> {
        let (u, v) = (&self.dir_u, &self.dir_v);
        Matrix2::new(
            u.dot(&(m * u)),
            u.dot(&(m * v)),
            v.dot(&(m * u)),
            v.dot(&(m * v)),
        )
    }

    /// Tangent vector `a u + b v`.
    pub fn lift(&self, t: &Vector2<f64>) -> Vector3<f64> {
        t.x * self.dir_u + t.y * self.dir_v
    }
}

/// Evaluates the outer normal and principal data at a surface point.
pub fn surface_eval(obstacle: &Obstacle, p: &Vector3<f64>) -> Result<SurfacePoint> {
    let rho = obstacle.normalized(p).norm();
    let residual = (rho - 1.0).abs();
    if !(residual <= ON_SURFACE_TOLERANCE) {
        return Err(Error::OffSurface {
            id: obstacle.id,
            residual,
        });
    }
    Ok(surface_point_unchecked(obstacle, &obstacle.project(p)))
}

/// Principal data at a point already known to lie on the surface.
pub(crate) fn surface_point_unchecked(obstacle: &Obstacle, p: &Vector3<f64>) -> SurfacePoint {
    let grad = obstacle.implicit_gradient(p);
    let gnorm = grad.norm();
    let normal = grad / gnorm;
    let a2 = obstacle.semi_axes.component_mul(&obstacle.semi_axes);
    // shape operator of the level set: Hess F / |grad F| restricted to the tangent plane
    let shape = Matrix3::from_diagonal(&a2.map(|x| 2.0 / x)) / gnorm;

    let t1 = reference_tangent(&normal);
    let t2 = normal.cross(&t1);
    let s11 = t1.dot(&(shape * t1));
    let s12 = t1.dot(&(shape * t2));
    let s22 = t2.dot(&(shape * t2));

    let mean = 0.5 * (s11 + s22);
    let half_gap = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
    let k1 = mean + half_gap;
    let k2 = mean - half_gap;

    let dir_u = if 2.0 * half_gap < UMBILIC_TOLERANCE * k1 {
        t1
    } else {
        // eigenvector of [[s11, s12], [s12, s22]] for k1
        let (a, b) = if (s11 - k2).abs() >= (s22 - k2).abs() {
            (s11 - k2, s12)
        } else {
            (s12, s22 - k2)
        };
        let u = (a * t1 + b * t2).normalize();
        canonical_sign(u)
    };
    let dir_v = normal.cross(&dir_u);
    SurfacePoint {
        obstacle_id: obstacle.id,
        position: *p,
        normal,
        dir_u,
        dir_v,
        k1,
        k2,
    }
}

/// Projection of the global +x axis on the tangent plane, falling back to +y.
fn reference_tangent(n: &Vector3<f64>) -> Vector3<f64> {
    let px = Vector3::x() - n.x * n;
    if px.norm() > 1e-6 {
        return px.normalize();
    }
    (Vector3::y() - n.y * n).normalize()
}

/// Deterministic sign for an eigenvector: largest-magnitude component positive.
fn canonical_sign(u: Vector3<f64>) -> Vector3<f64> {
    let imax = u.iamax();
    if u[imax] < 0.0 {
        -u
    } else {
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_sphere(id: usize, c: [f64; 3]) -> Obstacle {
        Obstacle::sphere(id, Vector3::from(c), 1.0).unwrap()
    }

    #[test]
    fn two_spheres_gap_is_center_distance_minus_radii() {
        let scene = validate_scene(vec![unit_sphere(0, [0.0; 3]), unit_sphere(1, [4.0, 0.0, 0.0])]).unwrap();
        assert_eq!(scene.min_gap, 2.0);
    }

    #[test]
    fn overlapping_spheres_rejected() {
        let err = validate_scene(vec![unit_sphere(0, [0.0; 3]), unit_sphere(1, [1.5, 0.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::Overlap { first: 0, second: 1, .. }));
        let touching = validate_scene(vec![unit_sphere(0, [0.0; 3]), unit_sphere(1, [2.0, 0.0, 0.0])]);
        assert!(matches!(touching, Err(Error::Overlap { .. })));
    }

    #[test]
    fn single_obstacle_has_infinite_gap() {
        let scene = validate_scene(vec![unit_sphere(7, [1.0, 2.0, 3.0])]).unwrap();
        assert!(scene.min_gap.is_infinite());
        assert_eq!(scene.obstacles[0].id, 0);
        assert_eq!(validate_scene(vec![]), Err(Error::EmptyScene));
    }

    #[test]
    fn ellipsoid_gap_matches_axis_geometry() {
        let a = Obstacle::ellipsoid(0, Vector3::zeros(), Vector3::new(2.0, 1.0, 1.0)).unwrap();
        let b = Obstacle::ellipsoid(1, Vector3::new(5.0, 0.0, 0.0), Vector3::new(1.0, 1.0, 0.5)).unwrap();
        let scene = validate_scene(vec![a.clone(), b]).unwrap();
        assert_relative_eq!(scene.min_gap, 2.0, epsilon = 1e-9);

        let c = Obstacle::ellipsoid(1, Vector3::new(2.5, 0.0, 0.0), Vector3::new(1.0, 1.0, 0.5)).unwrap();
        assert!(matches!(validate_scene(vec![a, c]), Err(Error::Overlap { .. })));
    }

    #[test]
    fn invalid_semi_axes_rejected() {
        assert!(Obstacle::ellipsoid(0, Vector3::zeros(), Vector3::new(1.0, 0.0, 1.0)).is_err());
        assert!(Obstacle::sphere(0, Vector3::zeros(), -1.0).is_err());
    }

    #[test]
    fn sphere_south_pole() {
        let s = unit_sphere(0, [0.0; 3]);
        let p = surface_eval(&s, &Vector3::new(0.0, 0.0, -1.0)).unwrap();
        assert_relative_eq!(p.normal, Vector3::new(0.0, 0.0, -1.0), epsilon = 1e-15);
        assert_relative_eq!(p.k1, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.k2, 1.0, epsilon = 1e-14);
        // umbilic: u is the projection of +x
        assert_relative_eq!(p.dir_u, Vector3::x(), epsilon = 1e-15);
    }

    #[test]
    fn sphere_radius_two_curvature_half() {
        let s = Obstacle::sphere(0, Vector3::new(1.0, 1.0, 1.0), 2.0).unwrap();
        let p = surface_eval(&s, &(s.center + Vector3::new(0.0, 1.2, 1.6))).unwrap();
        assert_relative_eq!(p.k1, 0.5, epsilon = 1e-14);
        assert_relative_eq!(p.k2, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn ellipsoid_tip_curvature() {
        let e = Obstacle::ellipsoid(0, Vector3::zeros(), Vector3::new(2.0, 1.0, 1.0)).unwrap();
        let p = surface_eval(&e, &Vector3::new(2.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(p.normal, Vector3::x(), epsilon = 1e-15);
        assert_relative_eq!(p.k1, 2.0, epsilon = 1e-13);
        assert_relative_eq!(p.k2, 2.0, epsilon = 1e-13);
        // umbilic fallback to +y when +x is normal
        assert_relative_eq!(p.dir_u, Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn off_surface_rejected() {
        let s = unit_sphere(3, [0.0; 3]);
        let err = surface_eval(&s, &Vector3::new(0.0, 0.0, 1.01)).unwrap_err();
        assert!(matches!(err, Error::OffSurface { id: 3, .. }));
    }

    #[test]
    fn frame_is_right_handed_orthonormal() {
        let e = Obstacle::ellipsoid(0, Vector3::new(0.3, -0.2, 0.1), Vector3::new(1.5, 1.0, 0.7)).unwrap();
        let p = e.point_with_normal(&Vector3::new(0.3, -0.5, 0.8).normalize());
        let sp = surface_eval(&e, &p).unwrap();
        let r = sp.frame();
        assert!((r * r.transpose() - Matrix3::identity()).norm() < 1e-12);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        assert!(sp.k1 >= sp.k2 && sp.k2 > 0.0);
        assert_relative_eq!(sp.normal, Vector3::new(0.3, -0.5, 0.8).normalize(), epsilon = 1e-12);
    }

    #[test]
    fn spheroid_area_closed_forms() {
        let s = unit_sphere(0, [0.0; 3]);
        assert_relative_eq!(s.surface_area(), 4.0 * std::f64::consts::PI, epsilon = 1e-14);
        // prolate (2,1,1) vs numerical product rule on a permuted triaxial-looking case
        let prolate = Obstacle::ellipsoid(0, Vector3::zeros(), Vector3::new(2.0, 1.0, 1.0)).unwrap();
        let nearly = Obstacle::ellipsoid(0, Vector3::zeros(), Vector3::new(2.0, 1.0, 1.0 + 1e-9)).unwrap();
        assert_relative_eq!(prolate.surface_area(), nearly.surface_area(), max_relative = 1e-8);
        let oblate = Obstacle::ellipsoid(0, Vector3::zeros(), Vector3::new(1.0, 1.0, 0.5)).unwrap();
        let nearly = Obstacle::ellipsoid(0, Vector3::zeros(), Vector3::new(1.0, 1.0 + 1e-9, 0.5)).unwrap();
        assert_relative_eq!(oblate.surface_area(), nearly.surface_area(), max_relative = 1e-8);
    }

    #[test]
    fn distance_to_ellipsoid() {
        let o = Obstacle::ellipsoid(0, Vector3::new(1.0, 0.0, 0.0), Vector3::new(2.0, 1.0, 0.5)).unwrap();
        assert!((o.distance(&Vector3::new(5.0, 0.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!((o.distance(&Vector3::new(1.0, 0.0, -3.0)) - 2.5).abs() < 1e-12);
        assert_eq!(o.distance(&Vector3::new(1.2, 0.1, 0.0)), 0.0);
        // the nearest point found by brute force over a fine parametrisation
        let p = Vector3::new(2.5, 1.7, -0.9);
        let mut best = f64::INFINITY;
        for i in 0..=2000 {
            let t = -1.0 + 2.0 * i as f64 / 2000.0;
            for m in 0..2000 {
                let phi = 2.0 * std::f64::consts::PI * m as f64 / 2000.0;
                best = best.min((p - o.parametric_point(t, phi)).norm());
            }
        }
        let d = o.distance(&p);
        assert!(d <= best + 1e-12 && best - d < 1e-5, "{d} {best}");
        let s = Obstacle::sphere(0, Vector3::zeros(), 2.0).unwrap();
        assert_eq!(s.distance(&Vector3::new(0.0, 3.0, 0.0)), 1.0);
    }
}
