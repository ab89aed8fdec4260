use std::f64::consts::PI;

use super::{surface_point_unchecked, Obstacle, SurfacePoint};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_GRID_NODES: usize = 4_000_000;

/// Weighted surface quadrature on one obstacle.
///
/// Latitude rings sit at uniformly spaced polar angles, weighted by Fejer's
/// rule in `t = cos(theta)`; each ring is a midpoint rule in `phi` with enough
/// nodes to respect the target spacing.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub obstacle_id: usize,
    pub points: Vec<SurfacePoint>,
    pub weights: Vec<f64>,
    pub ppw: f64,
    pub wavenumber: f64,
    /// Target node spacing `(2 pi / k) / ppw`.
    pub spacing: f64,
}

impl SurfaceGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn build_grid(obstacle: &Obstacle, k: f64, ppw: f64) -> Result<SurfaceGrid> {
    build_grid_with_cap(obstacle, k, ppw, DEFAULT_MAX_GRID_NODES)
}

pub fn build_grid_with_cap(obstacle: &Obstacle, k: f64, ppw: f64, cap: usize) -> Result<SurfaceGrid> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("wavenumber must be positive, got {k}")));
    }
    if !(ppw >= 4.0 && ppw.is_finite()) {
        return Err(Error::InvalidInput(format!("points per wavelength must be >= 4, got {ppw}")));
    }
    let spacing = 2.0 * PI / k / ppw;
    let a = obstacle.semi_axes;
    let meridian_scale = a.max();
    let ring_scale = a.x.max(a.y);

    let rings = ((PI * meridian_scale / spacing).ceil() as usize).max(2);
    if rings > cap {
        return Err(Error::Resource {
            what: "grid nodes",
            requested: rings,
            cap,
        });
    }
    let (ts, tw) = fejer_rule(rings);

    let ring_counts: Vec<usize> = ts
        .iter()
        .map(|t| {
            let rho = ring_scale * (1.0 - t * t).max(0.0).sqrt();
            ((2.0 * PI * rho / spacing).ceil() as usize).max(3)
        })
        .collect();
    let total: usize = ring_counts.iter().sum();
    if total > cap {
        return Err(Error::Resource {
            what: "grid nodes",
            requested: total,
            cap,
        });
    }

    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for ((t, wt), n_phi) in ts.iter().zip(&tw).zip(&ring_counts) {
        let dphi = 2.0 * PI / *n_phi as f64;
        for m in 0..*n_phi {
            let phi = dphi * (m as f64 + 0.5);
            let p = obstacle.parametric_point(*t, phi);
            points.push(surface_point_unchecked(obstacle, &p));
            weights.push(wt * dphi * obstacle.parametric_jacobian(*t, phi));
        }
    }
    Ok(SurfaceGrid {
        obstacle_id: obstacle.id,
        points,
        weights,
        ppw,
        wavenumber: k,
        spacing,
    })
}

/// Fejer's first rule on `[-1, 1]`: nodes `cos(theta_k)` at uniform polar angles.
fn fejer_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let theta = PI * (k as f64 + 0.5) / nf;
            let tail: f64 = (1..=n / 2)
                .map(|j| {
                    let j = j as f64;
                    (2.0 * j * theta).cos() / (4.0 * j * j - 1.0)
                })
                .sum();
            (theta.cos(), 2.0 / nf * (1.0 - 2.0 * tail))
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn unit_sphere() -> Obstacle {
        Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap()
    }

    #[test]
    fn sphere_weights_sum_to_area() {
        let g = build_grid(&unit_sphere(), 10.0, 10.0).unwrap();
        assert_relative_eq!(g.total_weight(), 4.0 * PI, epsilon = 1e-3);
        assert!(g.weights.iter().all(|w| *w > 0.0));
        assert!((2500..=4500).contains(&g.len()), "node count {}", g.len());
    }

    #[test]
    fn doubling_ppw_quadruples_nodes() {
        let coarse = build_grid(&unit_sphere(), 10.0, 10.0).unwrap().len() as f64;
        let fine = build_grid(&unit_sphere(), 10.0, 20.0).unwrap().len() as f64;
        let ratio = fine / coarse;
        assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn ellipsoid_weights_match_area() {
        let e = Obstacle::ellipsoid(0, Vector3::new(1.0, 0.0, 0.0), Vector3::new(1.3, 0.9, 0.6)).unwrap();
        let g = build_grid(&e, 8.0, 6.0).unwrap();
        assert_relative_eq!(g.total_weight(), e.surface_area(), max_relative = 1e-4);
        for p in &g.points {
            assert!(e.implicit(&p.position).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let a = build_grid(&unit_sphere(), 7.0, 8.0).unwrap();
        let b = build_grid(&unit_sphere(), 7.0, 8.0).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn cap_raises_resource_error() {
        let err = build_grid_with_cap(&unit_sphere(), 10.0, 10.0, 1000).unwrap_err();
        assert_eq!(err.kind(), "ResourceError");
        assert!(build_grid(&unit_sphere(), 0.0, 10.0).is_err());
        assert!(build_grid(&unit_sphere(), 1.0, 3.0).is_err());
    }

    #[test]
    fn spacing_respected_along_rings_and_meridians() {
        let g = build_grid(&unit_sphere(), 10.0, 10.0).unwrap();
        // nearest-neighbour distance never exceeds the spacing by more than the diagonal factor
        let pts: Vec<_> = g.points.iter().map(|p| p.position).collect();
        for (i, p) in pts.iter().enumerate().step_by(37) {
            let nearest = pts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| (p - q).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= g.spacing * 1.0001, "{nearest} > {}", g.spacing);
        }
    }

    #[test]
    fn smooth_integrand_converges_fast() {
        // integral of z^2 over the unit sphere is 4 pi / 3
        let exact = 4.0 * PI / 3.0;
        let mut errs = Vec::new();
        for ppw in [4.0, 8.0] {
            let g = build_grid(&unit_sphere(), 2.0, ppw).unwrap();
            let q: f64 = g.points.iter().zip(&g.weights).map(|(p, w)| w * p.position.z.powi(2)).sum();
            errs.push((q - exact).abs());
        }
        assert!(errs[1] <= errs[0].max(1e-14));
        assert!(errs[1] < 1e-12);
    }
}
