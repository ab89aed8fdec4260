//! Python module `hfscatter`: scenes, incident waves, geometrical optics,
//! iterated Kirchhoff fields and the single-sphere Mie series.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use hfscatter::geometry::{validate_scene, Obstacle as CoreObstacle, ObstacleKind, Scene as CoreScene};
use hfscatter::rays::{IncidentWave as CoreWave, RayPath as CorePath};
use hfscatter::BoundaryCondition;

create_exception!(hfscatter, ScatterError, PyException, "Error raised by the scattering library.");

fn to_py(err: hfscatter::Error) -> PyErr {
    ScatterError::new_err(format!("{}: {}", err.kind(), err))
}

fn vec3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn arr3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn parse_bc(bc: &str) -> PyResult<BoundaryCondition> {
    match bc.to_ascii_lowercase().as_str() {
        "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "neumann" => Ok(BoundaryCondition::Neumann),
        other => Err(PyValueError::new_err(format!("unknown boundary condition {other:?}"))),
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Obstacle {
    inner: CoreObstacle,
}

#[pymethods]
impl Obstacle {
    #[staticmethod]
    fn sphere(center: [f64; 3], radius: f64) -> PyResult<Self> {
        let inner = CoreObstacle::sphere(0, vec3(center), radius).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn ellipsoid(center: [f64; 3], semi_axes: [f64; 3]) -> PyResult<Self> {
        let inner = CoreObstacle::ellipsoid(0, vec3(center), vec3(semi_axes)).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn center(&self) -> [f64; 3] {
        arr3(&self.inner.center)
    }

    #[getter]
    fn semi_axes(&self) -> [f64; 3] {
        arr3(&self.inner.semi_axes)
    }

    fn contains(&self, p: [f64; 3]) -> bool {
        self.inner.contains(&vec3(p))
    }

    fn distance(&self, p: [f64; 3]) -> f64 {
        self.inner.distance(&vec3(p))
    }

    fn surface_area(&self) -> f64 {
        self.inner.surface_area()
    }

    fn __repr__(&self) -> String {
        let c = self.inner.center;
        match self.inner.kind {
            ObstacleKind::Sphere => format!("Obstacle.sphere([{}, {}, {}], {})", c.x, c.y, c.z, self.inner.semi_axes.x),
            ObstacleKind::Ellipsoid => {
                let a = self.inner.semi_axes;
                format!("Obstacle.ellipsoid([{}, {}, {}], [{}, {}, {}])", c.x, c.y, c.z, a.x, a.y, a.z)
            }
        }
    }
}

/// Validated set of pairwise disjoint obstacles.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Scene {
    inner: CoreScene,
}

#[pymethods]
impl Scene {
    #[new]
    fn new(obstacles: Vec<Obstacle>) -> PyResult<Self> {
        let inner = validate_scene(obstacles.into_iter().map(|o| o.inner).collect()).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn obstacles(&self) -> Vec<Obstacle> {
        self.inner.obstacles.iter().map(|o| Obstacle { inner: o.clone() }).collect()
    }

    #[getter]
    fn min_gap(&self) -> f64 {
        self.inner.min_gap
    }
}

/// Plane wave `exp(-i k <direction, x>)`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct IncidentWave {
    inner: CoreWave,
}

#[pymethods]
impl IncidentWave {
    #[new]
    fn new(direction: [f64; 3], k: f64) -> PyResult<Self> {
        let inner = CoreWave::new(vec3(direction), k).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn direction(&self) -> [f64; 3] {
        arr3(&self.inner.direction)
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }

    fn value(&self, x: [f64; 3]) -> Complex64 {
        self.inner.value(&vec3(x))
    }
}

/// A stationary reflection path.
#[pyclass(frozen, skip_from_py_object)]
struct RayPath {
    inner: CorePath,
}

#[pymethods]
impl RayPath {
    #[getter]
    fn obstacles(&self) -> Vec<usize> {
        self.inner.obstacles.clone()
    }

    #[getter]
    fn nodes(&self) -> Vec<[f64; 3]> {
        self.inner.nodes.iter().map(|n| arr3(&n.position)).collect()
    }

    #[getter]
    fn kinds(&self) -> Vec<&'static str> {
        self.inner.kinds.iter().map(|k| k.name()).collect()
    }

    #[getter]
    fn phase(&self) -> f64 {
        self.inner.phase
    }

    #[getter]
    fn occluded(&self) -> bool {
        self.inner.occluded
    }

    fn det_factors(&self) -> Vec<f64> {
        self.inner.det_factors()
    }

    fn law_residual(&self) -> f64 {
        self.inner.law_residual()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(frozen, skip_from_py_object)]
struct GoaField {
    #[pyo3(get)]
    value: Complex64,
    #[pyo3(get)]
    incident: Complex64,
    #[pyo3(get)]
    shadowed: bool,
    #[pyo3(get)]
    terms: Vec<Complex64>,
    paths: Vec<CorePath>,
}

#[pymethods]
impl GoaField {
    #[getter]
    fn paths(&self) -> Vec<RayPath> {
        self.paths.iter().map(|p| RayPath { inner: p.clone() }).collect()
    }
}

#[pyclass(frozen, skip_from_py_object)]
struct FieldSample {
    #[pyo3(get)]
    x: [f64; 3],
    #[pyo3(get)]
    increments: Vec<Complex64>,
    #[pyo3(get)]
    total: Complex64,
}

/// Reflection paths with up to `max_bounces` nodes reaching `x`.
#[pyfunction]
#[pyo3(signature = (scene, wave, x, max_bounces = 3))]
fn enumerate_paths(py: Python<'_>, scene: &Scene, wave: &IncidentWave, x: [f64; 3], max_bounces: usize) -> PyResult<Vec<RayPath>> {
    let paths = py
        .detach(|| hfscatter::rays::enumerate_paths(&scene.inner, &wave.inner, &vec3(x), max_bounces))
        .map_err(to_py)?;
    Ok(paths.into_iter().map(|p| RayPath { inner: p }).collect())
}

/// Geometrical-optics field at `x`.
#[pyfunction]
#[pyo3(signature = (scene, wave, x, bc = "dirichlet", max_bounces = 3))]
fn goa_field(py: Python<'_>, scene: &Scene, wave: &IncidentWave, x: [f64; 3], bc: &str, max_bounces: usize) -> PyResult<GoaField> {
    let bc = parse_bc(bc)?;
    let g = py
        .detach(|| hfscatter::rays::goa_field(&scene.inner, &wave.inner, &vec3(x), bc, max_bounces))
        .map_err(to_py)?;
    Ok(GoaField {
        value: g.value,
        incident: g.incident,
        shadowed: g.shadowed,
        terms: g.contributions.iter().map(|(_, t)| *t).collect(),
        paths: g.contributions.into_iter().map(|(p, _)| p).collect(),
    })
}

/// Iterated Kirchhoff field at each target: `iterations` increments and the total.
#[pyfunction]
#[pyo3(signature = (scene, wave, targets, bc = "dirichlet", iterations = 1, ppw = 10.0))]
fn kirchhoff_field(
    py: Python<'_>,
    scene: &Scene,
    wave: &IncidentWave,
    targets: Vec<[f64; 3]>,
    bc: &str,
    iterations: usize,
    ppw: f64,
) -> PyResult<Vec<FieldSample>> {
    let bc = parse_bc(bc)?;
    let points: Vec<Vector3<f64>> = targets.into_iter().map(vec3).collect();
    let samples = py
        .detach(|| hfscatter::kirchhoff::total_field(&scene.inner, &wave.inner, &points, bc, iterations, ppw))
        .map_err(to_py)?;
    Ok(samples
        .into_iter()
        .map(|s| FieldSample {
            x: arr3(&s.x),
            increments: s.increments,
            total: s.total,
        })
        .collect())
}

/// Leading stationary-phase value of the level-`level` increment.
#[pyfunction]
#[pyo3(signature = (scene, wave, x, bc = "dirichlet", level = 1))]
fn asymptotic_field(scene: &Scene, wave: &IncidentWave, x: [f64; 3], bc: &str, level: usize) -> PyResult<Complex64> {
    let bc = parse_bc(bc)?;
    let a = hfscatter::stationary::asymptotic_field(&scene.inner, &wave.inner, &vec3(x), bc, level).map_err(to_py)?;
    Ok(a.value)
}

/// Total field of a plane wave scattered by a sphere of `radius` centred at the origin.
#[pyfunction]
#[pyo3(signature = (radius, k, direction, x, bc = "dirichlet", truncation = None))]
fn mie_field(radius: f64, k: f64, direction: [f64; 3], x: [f64; 3], bc: &str, truncation: Option<usize>) -> PyResult<Complex64> {
    let bc = parse_bc(bc)?;
    let mut cfg = hfscatter::mie::MieConfig::new(radius, k).map_err(to_py)?;
    if let Some(l) = truncation {
        cfg = cfg.with_truncation(l).map_err(to_py)?;
    }
    hfscatter::mie::mie_field(&cfg, &vec3(direction), &vec3(x), bc).map_err(to_py)
}

/// `A (I + s A)^{-1}` for a symmetric 3x3 matrix.
#[pyfunction]
fn shift_map(a: [[f64; 3]; 3], s: f64) -> PyResult<[[f64; 3]; 3]> {
    let m = Matrix3::from_fn(|i, j| a[i][j]);
    let out = hfscatter::matrix::shift_map(&m, s).map_err(to_py)?;
    Ok([0, 1, 2].map(|i| [0, 1, 2].map(|j| out[(i, j)])))
}

#[pymodule(name = "hfscatter")]
fn hfscatter_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", hfscatter::VERSION)?;
    m.add("ScatterError", m.py().get_type::<ScatterError>())?;
    m.add_class::<Obstacle>()?;
    m.add_class::<Scene>()?;
    m.add_class::<IncidentWave>()?;
    m.add_class::<RayPath>()?;
    m.add_class::<GoaField>()?;
    m.add_class::<FieldSample>()?;
    m.add_function(wrap_pyfunction!(enumerate_paths, m)?)?;
    m.add_function(wrap_pyfunction!(goa_field, m)?)?;
    m.add_function(wrap_pyfunction!(kirchhoff_field, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_field, m)?)?;
    m.add_function(wrap_pyfunction!(mie_field, m)?)?;
    m.add_function(wrap_pyfunction!(shift_map, m)?)?;
    Ok(())
}
