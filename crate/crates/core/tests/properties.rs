use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

use hfscatter::geometry::{build_grid, surface_eval, validate_scene, Obstacle};
use hfscatter::matrix::{asymmetry, reflect_map};
use hfscatter::rays::{goa_field, insert_transmission, solve_path, IncidentWave, NodeKind};
use hfscatter::stationary::{member_sign, stationary_set};
use hfscatter::BoundaryCondition;

fn direction() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, 0.0..2.0 * PI).prop_map(|(t, phi)| {
        let s = (1.0 - t * t).sqrt();
        Vector3::new(s * phi.cos(), s * phi.sin(), t)
    })
}

fn semi_axes() -> impl Strategy<Value = Vector3<f64>> {
    (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64).prop_map(|(a, b, c)| Vector3::new(a, b, c))
}

fn symmetric() -> impl Strategy<Value = Matrix3<f64>> {
    proptest::array::uniform9(-2.0..2.0f64).prop_map(|v| {
        let m = Matrix3::from_row_slice(&v);
        (m + m.transpose()) * 0.5
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn frames_orthonormal_and_outward(axes in semi_axes(), n in direction()) {
        let o = Obstacle::ellipsoid(0, Vector3::new(0.3, -1.0, 2.0), axes).unwrap();
        let p = surface_eval(&o, &o.point_with_normal(&n)).unwrap();
        let f = p.frame();
        prop_assert!((f * f.transpose() - Matrix3::identity()).norm() < 1e-12);
        prop_assert!((p.normal - n).norm() < 1e-10);
        prop_assert!(o.implicit(&(p.position + 1e-6 * p.normal)) > o.implicit(&p.position));
        prop_assert!(p.k1 > 0.0 && p.k2 > 0.0);
    }

    #[test]
    fn reflect_map_symmetric(a in symmetric(), b in symmetric(), eta in direction(), zeta in direction()) {
        prop_assume!(zeta.dot(&eta).abs() > 1e-3);
        let t = reflect_map(&a, &b, &eta, &zeta).unwrap();
        prop_assert!(asymmetry(&t) < 1e-12 * (1.0 + t.norm()));
    }

    #[test]
    fn single_bounce_reflection_law(xi in direction(), r in 2.0..6.0f64, dir in direction()) {
        let scene = validate_scene(vec![Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap()]).unwrap();
        let wave = IncidentWave::new(xi, 10.0).unwrap();
        let x = dir * r;
        // lit-side targets only: the reflected ray must leave the lit hemisphere
        prop_assume!(xi.dot(&dir) < -0.2);
        let path = solve_path(&scene, &wave, &[0], &[NodeKind::Reflection], &x, None).unwrap();
        prop_assert!(path.law_residual() < 1e-9);
        prop_assert!(path.det_factors().iter().all(|d| *d > 0.0));
        for mu in insert_transmission(&scene, &wave, &path).unwrap() {
            prop_assert!((mu.phase - path.phase).abs() < 1e-12 * path.phase.abs().max(1.0));
        }
    }

    #[test]
    fn goa_is_reflection_plus_incident_on_lit_side(k in 1.0..200.0f64, r in 2.0..6.0f64) {
        // backscatter distance r: |reflection| = 1 / (2r - 1)
        let scene = validate_scene(vec![Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap()]).unwrap();
        let wave = IncidentWave::new(Vector3::z(), k).unwrap();
        let x = Vector3::new(0.0, 0.0, -r);
        let g = goa_field(&scene, &wave, &x, BoundaryCondition::Dirichlet, 2).unwrap();
        prop_assert_eq!(g.contributions.len(), 1);
        let amp = g.contributions[0].1.norm();
        prop_assert!((amp - 1.0 / (2.0 * r - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn insertion_pairs_cancel_in_stationary_sums() {
    let scene = validate_scene(vec![
        Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap(),
        Obstacle::sphere(1, Vector3::new(4.0, 0.0, 0.0), 1.0).unwrap(),
    ])
    .unwrap();
    let wave = IncidentWave::new(Vector3::new(0.3, 0.0, 1.0), 12.0).unwrap();
    let x = Vector3::new(2.0, 0.3, -3.0);
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let members = stationary_set(&scene, &wave, &x, bc, 2, &Default::default()).unwrap();
        for m in members.iter().filter(|m| m.path.transmission_count() > 0) {
            let flipped = member_sign(bc, m.path.len() - 1, m.path.transmission_count() - 1);
            let own = member_sign(bc, m.path.len(), m.path.transmission_count());
            assert_eq!(flipped, -own);
        }
    }
}

#[test]
fn sphere_grid_integrates_smooth_functions_spectrally() {
    // integral of e^z over the unit sphere is 2 pi (e - 1/e)
    let o = Obstacle::sphere(0, Vector3::zeros(), 1.0).unwrap();
    let exact = 2.0 * PI * (1.0f64.exp() - (-1.0f64).exp());
    let err = |ppw: f64| {
        let g = build_grid(&o, 2.0, ppw).unwrap();
        let sum: f64 = g.points.iter().zip(&g.weights).map(|(p, w)| w * p.position.z.exp()).sum();
        (sum - exact).abs() / exact
    };
    let (e1, e2) = (err(4.0), err(8.0));
    assert!(e2 < 1e-12 || e2 < e1 * 1e-3, "{e1} {e2}");
}
