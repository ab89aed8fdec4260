//! Iterated Kirchhoff (physical optics) approximation.
//!
//! Level 1 places the physical-optics density of the incident plane wave on the
//! lit part of every obstacle. Each further level re-radiates the previous
//! density from every other obstacle and applies the same rule to the
//! resulting local plane waves. Field increments are single-layer (Dirichlet)
//! or double-layer (Neumann) surface integrals of the densities.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{build_grid_with_cap, Scene, SurfaceGrid, DEFAULT_MAX_GRID_NODES};
use crate::quadrature::CompensatedSum;
use crate::rays::IncidentWave;
use crate::BoundaryCondition;

/// Densities of one level sampled on the surface grids.
#[derive(Debug, Clone)]
pub struct KernelLayer {
    pub bc: BoundaryCondition,
    pub level: usize,
    pub wave: IncidentWave,
    pub grids: Arc<Vec<SurfaceGrid>>,
    /// `values[i][m]` is the density at node `m` of obstacle `i`.
    pub values: Vec<Vec<Complex64>>,
}

impl KernelLayer {
    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Same grids and level with new values (used for linear combinations).
    pub fn with_values(&self, values: Vec<Vec<Complex64>>) -> Self {
        Self {
            values,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub x: Vector3<f64>,
    /// `u_l - u_{l-1}` for `l = 1..n`.
    pub increments: Vec<Complex64>,
    /// Incident wave plus all increments.
    pub total: Complex64,
}

/// One grid per obstacle, in scene order.
pub fn build_grids(scene: &Scene, k: f64, ppw: f64) -> Result<Arc<Vec<SurfaceGrid>>> {
    build_grids_with_cap(scene, k, ppw, DEFAULT_MAX_GRID_NODES)
}

pub fn build_grids_with_cap(scene: &Scene, k: f64, ppw: f64, cap: usize) -> Result<Arc<Vec<SurfaceGrid>>> {
    let grids = scene
        .obstacles
        .iter()
        .map(|o| build_grid_with_cap(o, k, ppw, cap))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = grids.iter().map(SurfaceGrid::len).sum();
    if total > cap {
        return Err(Error::Resource {
            what: "grid nodes",
            requested: total,
            cap,
        });
    }
    Ok(Arc::new(grids))
}

/// Physical-optics weight for a local plane wave with cosine `c = <d, n>`:
/// `c - |c|` (Dirichlet) or `1 - c/|c|` (Neumann), zero on the dark side.
fn lit_factor(bc: BoundaryCondition, c: f64) -> f64 {
    if c >= 0.0 {
        return 0.0;
    }
    match bc {
        BoundaryCondition::Dirichlet => 2.0 * c,
        BoundaryCondition::Neumann => 2.0,
    }
}

/// Level-1 densities: `ik (c - |c|) e^{-ik<xi, sigma>}` (Dirichlet) or
/// `ik (1 - c/|c|) e^{-ik<xi, sigma>}` (Neumann) with `c = <xi, n(sigma)>`.
pub fn first_layer(wave: &IncidentWave, grids: Arc<Vec<SurfaceGrid>>, bc: BoundaryCondition) -> KernelLayer {
    let ik = Complex64::new(0.0, wave.k);
    let values = grids
        .iter()
        .map(|g| {
            g.points
                .iter()
                .map(|p| {
                    let f = lit_factor(bc, wave.direction.dot(&p.normal));
                    if f == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        ik * f * wave.value(&p.position)
                    }
                })
                .collect()
        })
        .collect();
    KernelLayer {
        bc,
        level: 1,
        wave: *wave,
        grids,
        values,
    }
}

/// Densities of the next level: each node collects the previous level's radiation from
/// every other obstacle, weighted by the lit factor of the arriving direction.
pub fn next_layer(prev: &KernelLayer) -> KernelLayer {
    let grids = &prev.grids;
    let k = prev.wave.k;
    let pref = Complex64::new(0.0, k / (4.0 * PI));
    let values = grids
        .iter()
        .enumerate()
        .map(|(j, target)| {
            target
                .points
                .par_iter()
                .map(|sigma| {
                    let mut acc = CompensatedSum::default();
                    for (i, source) in grids.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        for ((sp, w), v) in source.points.iter().zip(&source.weights).zip(&prev.values[i]) {
                            if *v == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let diff = sigma.position - sp.position;
                            let r = diff.norm();
                            let d = diff / r;
                            let mut f = lit_factor(prev.bc, d.dot(&sigma.normal));
                            if f == 0.0 {
                                continue;
                            }
                            if prev.bc == BoundaryCondition::Neumann {
                                f *= d.dot(&sp.normal);
                            }
                            acc.add(v * Complex64::from_polar(w * f / r, -k * r));
                        }
                    }
                    pref * acc.value()
                })
                .collect()
        })
        .collect();
    KernelLayer {
        bc: prev.bc,
        level: prev.level + 1,
        wave: prev.wave,
        grids: Arc::clone(grids),
        values,
    }
}

/// Rejects targets inside an obstacle or closer than one wavelength to a surface.
pub fn check_target(scene: &Scene, k: f64, x: &Vector3<f64>) -> Result<()> {
    let target = [x.x, x.y, x.z];
    if let Some(id) = scene.containing(x) {
        return Err(Error::InsideObstacle { target, id });
    }
    let minimum = 2.0 * PI / k;
    let distance = scene.obstacles.iter().map(|o| o.distance(x)).fold(f64::INFINITY, f64::min);
    if distance < minimum {
        return Err(Error::NearBoundary {
            target,
            distance,
            minimum,
        });
    }
    Ok(())
}

/// Field increment of one layer at each target:
/// `(1/4pi) sum w p(sigma) e^{-ikr}/r`, times `<(x - sigma)/r, n(sigma)>` for Neumann.
pub fn field_update(scene: &Scene, layer: &KernelLayer, targets: &[Vector3<f64>]) -> Result<Vec<Complex64>> {
    for x in targets {
        check_target(scene, layer.wave.k, x)?;
    }
    Ok(targets.par_iter().map(|x| layer_field(layer, x)).collect())
}

fn layer_field(layer: &KernelLayer, x: &Vector3<f64>) -> Complex64 {
    let k = layer.wave.k;
    let mut acc = CompensatedSum::default();
    for (grid, values) in layer.grids.iter().zip(&layer.values) {
        for ((p, w), v) in grid.points.iter().zip(&grid.weights).zip(values) {
            if *v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let diff = x - p.position;
            let r = diff.norm();
            let mut f = w / r;
            if layer.bc == BoundaryCondition::Neumann {
                f *= diff.dot(&p.normal) / r;
            }
            acc.add(v * Complex64::from_polar(f, -k * r));
        }
    }
    acc.value() / (4.0 * PI)
}

/// Builds grids, iterates `iterations` levels and accumulates increments at each target.
pub fn total_field(
    scene: &Scene,
    wave: &IncidentWave,
    targets: &[Vector3<f64>],
    bc: BoundaryCondition,
    iterations: usize,
    ppw: f64,
) -> Result<Vec<FieldSample>> {
    let grids = build_grids(scene, wave.k, ppw)?;
    total_field_on(scene, wave, grids, targets, bc, iterations)
}

/// [`total_field`] on prebuilt grids.
pub fn total_field_on(
    scene: &Scene,
    wave: &IncidentWave,
    grids: Arc<Vec<SurfaceGrid>>,
    targets: &[Vector3<f64>],
    bc: BoundaryCondition,
    iterations: usize,
) -> Result<Vec<FieldSample>> {
    if iterations == 0 {
        return Err(Error::InvalidInput("at least one iteration is required".into()));
    }
    for x in targets {
        check_target(scene, wave.k, x)?;
    }
    let mut increments: Vec<Vec<Complex64>> = vec![Vec::with_capacity(iterations); targets.len()];
    let mut layer = first_layer(wave, grids, bc);
    for level in 1..=iterations {
        if level > 1 {
            layer = next_layer(&layer);
        }
        let values: Vec<Complex64> = if layer.is_zero() {
            vec![Complex64::new(0.0, 0.0); targets.len()]
        } else {
            targets.par_iter().map(|x| layer_field(&layer, x)).collect()
        };
        for (inc, v) in increments.iter_mut().zip(values) {
            inc.push(v);
        }
    }
    Ok(targets
        .iter()
        .zip(increments)
        .map(|(x, inc)| {
            let mut total = wave.value(x);
            for v in &inc {
                total += v;
            }
            FieldSample {
                x: *x,
                increments: inc,
                total,
            }
        })
        .collect())
}

/// Level-1 or level-2 increment as one quadrature over the product of surfaces,
/// without forming intermediate densities.
pub fn product_surface_increment(
    scene: &Scene,
    wave: &IncidentWave,
    grids: &[SurfaceGrid],
    bc: BoundaryCondition,
    level: usize,
    x: &Vector3<f64>,
) -> Result<Complex64> {
    check_target(scene, wave.k, x)?;
    let k = wave.k;
    let ik = Complex64::new(0.0, k);
    let neumann = bc == BoundaryCondition::Neumann;
    let radiate = |p: &crate::geometry::SurfacePoint| {
        let diff = x - p.position;
        let r = diff.norm();
        let f = if neumann { diff.dot(&p.normal) / r } else { 1.0 };
        Complex64::from_polar(f / r, -k * r)
    };
    let mut acc = CompensatedSum::default();
    match level {
        1 => {
            for g in grids {
                for (p, w) in g.points.iter().zip(&g.weights) {
                    let f = lit_factor(bc, wave.direction.dot(&p.normal));
                    if f != 0.0 {
                        acc.add(ik * f * w * wave.value(&p.position) * radiate(p));
                    }
                }
            }
            Ok(acc.value() / (4.0 * PI))
        }
        2 => {
            for (j, g2) in grids.iter().enumerate() {
                for (s2, w2) in g2.points.iter().zip(&g2.weights) {
                    let out = radiate(s2);
                    for (i, g1) in grids.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        for (s1, w1) in g1.points.iter().zip(&g1.weights) {
                            let f1 = lit_factor(bc, wave.direction.dot(&s1.normal));
                            if f1 == 0.0 {
                                continue;
                            }
                            let diff = s2.position - s1.position;
                            let r = diff.norm();
                            let d = diff / r;
                            let mut f2 = lit_factor(bc, d.dot(&s2.normal));
                            if f2 == 0.0 {
                                continue;
                            }
                            if neumann {
                                f2 *= d.dot(&s1.normal);
                            }
                            let hop = Complex64::from_polar(f2 / r, -k * r);
                            acc.add(ik * ik * (f1 * w1 * w2) * wave.value(&s1.position) * hop * out);
                        }
                    }
                }
            }
            Ok(acc.value() / (16.0 * PI * PI))
        }
        _ => Err(Error::InvalidInput(format!("product-surface form implemented for levels 1 and 2, got {level}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{validate_scene, Obstacle};

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
    fn first_layer_pointwise() {
        let scene = one_sphere();
        let w = IncidentWave::new(Vector3::z(), 5.0).unwrap();
        let grids = build_grids(&scene, 5.0, 6.0).unwrap();
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let layer = first_layer(&w, Arc::clone(&grids), bc);
            for (p, v) in grids[0].points.iter().zip(&layer.values[0]) {
                let c = w.direction.dot(&p.normal);
                let e = w.value(&p.position);
                let expected = if c >= 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    match bc {
                        BoundaryCondition::Dirichlet => Complex64::new(0.0, 5.0) * (c - c.abs()) * e,
                        BoundaryCondition::Neumann => Complex64::new(0.0, 5.0) * (1.0 - c / c.abs()) * e,
                    }
                };
                assert!((v - expected).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn normal_incidence_values() {
        // a node with <xi, n> = -1 carries -2ik (Dirichlet) and 2ik (Neumann) times the incident phase
        assert_eq!(lit_factor(BoundaryCondition::Dirichlet, -1.0), -2.0);
        assert_eq!(lit_factor(BoundaryCondition::Neumann, -1.0), 2.0);
        assert_eq!(lit_factor(BoundaryCondition::Dirichlet, 0.0), 0.0);
        assert_eq!(lit_factor(BoundaryCondition::Neumann, 0.0), 0.0);
        assert_eq!(lit_factor(BoundaryCondition::Neumann, 0.3), 0.0);
    }

    #[test]
    fn single_obstacle_next_layer_is_zero() {
        let scene = one_sphere();
        let w = IncidentWave::new(Vector3::z(), 5.0).unwrap();
        let grids = build_grids(&scene, 5.0, 6.0).unwrap();
        let l2 = next_layer(&first_layer(&w, grids, BoundaryCondition::Dirichlet));
        assert!(l2.is_zero());
        assert_eq!(l2.level, 2);
    }

    #[test]
    fn zero_layer_maps_to_zero() {
        let scene = two_spheres();
        let w = IncidentWave::new(Vector3::z(), 4.0).unwrap();
        let grids = build_grids(&scene, 4.0, 5.0).unwrap();
        let l1 = first_layer(&w, grids, BoundaryCondition::Dirichlet);
        let zero = l1.with_values(l1.values.iter().map(|v| vec![Complex64::new(0.0, 0.0); v.len()]).collect());
        assert!(next_layer(&zero).is_zero());
        let f = field_update(&scene, &zero, &[Vector3::new(2.0, 0.0, -5.0)]).unwrap();
        assert_eq!(f[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn linearity() {
        let scene = two_spheres();
        let w = IncidentWave::new(Vector3::new(0.2, 0.0, 1.0), 4.0).unwrap();
        let grids = build_grids(&scene, 4.0, 5.0).unwrap();
        let d = first_layer(&w, Arc::clone(&grids), BoundaryCondition::Neumann);
        let other = first_layer(&IncidentWave::new(Vector3::x(), 4.0).unwrap(), grids, BoundaryCondition::Neumann);
        let (a, b) = (Complex64::new(0.7, -0.2), Complex64::new(-1.3, 0.4));
        let mix = d.with_values(
            d.values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u.iter().zip(v).map(|(p, q)| a * p + b * q).collect())
                .collect(),
        );
        let (nd, no, nm) = (next_layer(&d), next_layer(&other), next_layer(&mix));
        let scale = nm.values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..2 {
            for m in 0..nm.values[i].len() {
                let expected = a * nd.values[i][m] + b * no.values[i][m];
                assert!((nm.values[i][m] - expected).norm() <= 1e-12 * scale);
            }
        }
        let x = [Vector3::new(2.0, 0.0, -4.0)];
        let f = field_update(&scene, &nm, &x).unwrap()[0];
        let g = a * field_update(&scene, &nd, &x).unwrap()[0] + b * field_update(&scene, &no, &x).unwrap()[0];
        assert!((f - g).norm() <= 1e-12 * f.norm());
    }

    #[test]
    fn recursive_matches_product_surface_at_level_two() {
        let scene = two_spheres();
        let k = 3.0;
        let w = IncidentWave::new(Vector3::z(), k).unwrap();
        let grids = build_grids(&scene, k, 4.0).unwrap();
        let x = Vector3::new(2.0, 0.0, -4.0);
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let samples = total_field_on(&scene, &w, Arc::clone(&grids), &[x], bc, 2).unwrap();
            let direct = product_surface_increment(&scene, &w, &grids, bc, 2, &x).unwrap();
            let rec = samples[0].increments[1];
            assert!((rec - direct).norm() <= 1e-10 * direct.norm(), "{rec} vs {direct}");
            let first = product_surface_increment(&scene, &w, &grids, bc, 1, &x).unwrap();
            assert!((samples[0].increments[0] - first).norm() <= 1e-12 * first.norm());
        }
    }

    #[test]
    fn single_obstacle_truncation_is_exact() {
        let scene = one_sphere();
        let w = IncidentWave::new(Vector3::z(), 5.0).unwrap();
        let x = [Vector3::new(0.0, 0.0, -3.0), Vector3::new(1.0, 2.0, 2.0)];
        let one = total_field(&scene, &w, &x, BoundaryCondition::Dirichlet, 1, 6.0).unwrap();
        let three = total_field(&scene, &w, &x, BoundaryCondition::Dirichlet, 3, 6.0).unwrap();
        for (a, b) in one.iter().zip(&three) {
            assert_eq!(a.total, b.total);
            assert_eq!(b.increments[1], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn target_checks() {
        let scene = one_sphere();
        let w = IncidentWave::new(Vector3::z(), 10.0).unwrap();
        let r = total_field(&scene, &w, &[Vector3::new(0.0, 0.0, -1.2)], BoundaryCondition::Dirichlet, 1, 4.0);
        assert!(matches!(r, Err(Error::NearBoundary { .. })));
        let r = total_field(&scene, &w, &[Vector3::zeros()], BoundaryCondition::Dirichlet, 1, 4.0);
        assert!(matches!(r, Err(Error::InsideObstacle { .. })));
        let r = total_field(&scene, &w, &[Vector3::new(0.0, 0.0, -3.0)], BoundaryCondition::Dirichlet, 0, 4.0);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn backscatter_close_to_goa_at_moderate_k() {
        let scene = one_sphere();
        let k = 20.0;
        let w = IncidentWave::new(Vector3::z(), k).unwrap();
        let x = Vector3::new(0.0, 0.0, -3.0);
        let s = total_field(&scene, &w, &[x], BoundaryCondition::Dirichlet, 1, 10.0).unwrap();
        let expected = -Complex64::from_polar(0.2, -k);
        assert!((s[0].increments[0] - expected).norm() / 0.2 < 0.15);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let scene = two_spheres();
        let w = IncidentWave::new(Vector3::z(), 4.0).unwrap();
        let x = [Vector3::new(2.0, 0.0, -4.0)];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| total_field(&scene, &w, &x, BoundaryCondition::Dirichlet, 2, 5.0).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn refinement_changes_little_at_k20() {
        let scene = one_sphere();
        let w = IncidentWave::new(Vector3::z(), 20.0).unwrap();
        let x = [Vector3::new(0.0, 0.0, -3.0)];
        let coarse = total_field(&scene, &w, &x, BoundaryCondition::Dirichlet, 1, 10.0).unwrap()[0].increments[0];
        let fine = total_field(&scene, &w, &x, BoundaryCondition::Dirichlet, 1, 15.0).unwrap()[0].increments[0];
        let rel = (coarse - fine).norm() / fine.norm();
        assert!(rel < 1e-3, "{rel}");
    }
}
