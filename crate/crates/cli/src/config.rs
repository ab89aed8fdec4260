//! JSON run configuration and its validation.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hfscatter::geometry::{validate_scene, Obstacle, Scene};
use hfscatter::BoundaryCondition;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Goa,
    Kirchhoff,
    Validate,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Goa => "goa",
            Mode::Kirchhoff => "kirchhoff",
            Mode::Validate => "validate",
            Mode::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcChoice {
    Dirichlet,
    Neumann,
    Both,
}

impl BcChoice {
    pub fn conditions(self) -> Vec<BoundaryCondition> {
        match self {
            BcChoice::Dirichlet => vec![BoundaryCondition::Dirichlet],
            BcChoice::Neumann => vec![BoundaryCondition::Neumann],
            BcChoice::Both => vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleSpec {
    Sphere { center: [f64; 3], radius: f64 },
    Ellipsoid { center: [f64; 3], semi_axes: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub obstacles: Vec<ObstacleSpec>,
}

/// Inline scene or path to a scene file (relative to the config file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneSource {
    Inline(SceneSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub direction: [f64; 3],
    pub wavenumbers: Vec<f64>,
}

/// `count` evenly spaced points from `start` to `end` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub count: usize,
}

/// `origin + i/(nu-1) u + j/(nv-1) v` for `i < nu`, `j < nv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    pub origin: [f64; 3],
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub nu: usize,
    pub nv: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default)]
    pub points: Vec<[f64; 3]>,
    #[serde(default)]
    pub lines: Vec<LineSpec>,
    #[serde(default)]
    pub planes: Vec<PlaneSpec>,
}

fn default_bc() -> BcChoice {
    BcChoice::Both
}

fn default_iterations() -> usize {
    1
}

fn default_ppw() -> f64 {
    10.0
}

fn default_bounces() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSource,
    pub wave: WaveSpec,
    pub targets: TargetSpec,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default = "default_bc")]
    pub bc: BcChoice,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_ppw")]
    pub ppw: f64,
    #[serde(default = "default_bounces")]
    pub max_bounces: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// A validated run: scene, expanded targets and provenance hashes.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub mode: Mode,
    pub scene: Scene,
    pub direction: Vector3<f64>,
    pub wavenumbers: Vec<f64>,
    pub targets: Vec<Vector3<f64>>,
    pub conditions: Vec<BoundaryCondition>,
    pub output: PathBuf,
    pub scene_hash: String,
    pub config_hash: String,
}

fn short_hash(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

fn vector(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure::config("ConfigError", message)
}

pub fn expand_targets(spec: &TargetSpec) -> Result<Vec<Vector3<f64>>, Failure> {
    let mut out: Vec<Vector3<f64>> = spec.points.iter().map(|p| vector(*p)).collect();
    for line in &spec.lines {
        if line.count == 0 {
            return Err(config_error("line target needs count >= 1"));
        }
        let (a, b) = (vector(line.start), vector(line.end));
        for i in 0..line.count {
            let s = if line.count == 1 { 0.0 } else { i as f64 / (line.count - 1) as f64 };
            out.push(a + s * (b - a));
        }
    }
    for plane in &spec.planes {
        if plane.nu == 0 || plane.nv == 0 {
            return Err(config_error("plane target needs nu, nv >= 1"));
        }
        let (o, u, v) = (vector(plane.origin), vector(plane.u), vector(plane.v));
        let frac = |i: usize, n: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        for j in 0..plane.nv {
            for i in 0..plane.nu {
                out.push(o + frac(i, plane.nu) * u + frac(j, plane.nv) * v);
            }
        }
    }
    if out.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(config_error("target coordinates must be finite"));
    }
    Ok(out)
}

pub fn build_scene(spec: &SceneSpec) -> Result<Scene, Failure> {
    let obstacles = spec
        .obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| match o {
            ObstacleSpec::Sphere { center, radius } => Obstacle::sphere(i, vector(*center), *radius),
            ObstacleSpec::Ellipsoid { center, semi_axes } => Obstacle::ellipsoid(i, vector(*center), vector(*semi_axes)),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::config_from)?;
    validate_scene(obstacles).map_err(Failure::config_from)
}

/// Reads, parses and validates a config. `mode` and `output` come from the command line.
pub fn load(path: &Path, mode: Mode, output: Option<&Path>) -> Result<Prepared, Failure> {
    let raw = fs::read(path).map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig =
        serde_json::from_slice(&raw).map_err(|e| config_error(format!("invalid config {}: {e}", path.display())))?;
    if let Some(m) = config.mode {
        if m != mode {
            return Err(config_error(format!("config is for mode {}, invoked as {}", m.name(), mode.name())));
        }
    }
    let scene_spec = match &config.scene {
        SceneSource::Inline(s) => s.clone(),
        SceneSource::File(rel) => {
            let base = path.parent().unwrap_or(Path::new("."));
            let file = base.join(rel);
            let text = fs::read(&file).map_err(|e| config_error(format!("cannot read scene {}: {e}", file.display())))?;
            serde_json::from_slice(&text).map_err(|e| config_error(format!("invalid scene {}: {e}", file.display())))?
        }
    };
    let scene = build_scene(&scene_spec)?;
    let scene_hash = short_hash(&serde_json::to_vec(&scene_spec).expect("scene serializes"));

    if config.iterations == 0 {
        return Err(config_error("iterations must be at least 1"));
    }
    if config.wave.wavenumbers.is_empty() || !config.wave.wavenumbers.iter().all(|k| k.is_finite() && *k > 0.0) {
        return Err(config_error("wavenumbers must be a non-empty list of positive numbers"));
    }
    if !(config.ppw >= 4.0 && config.ppw.is_finite()) {
        return Err(config_error("ppw must be at least 4"));
    }
    if config.max_bounces == 0 {
        return Err(config_error("max_bounces must be at least 1"));
    }
    let direction = vector(config.wave.direction);
    if !(direction.norm() > 0.0 && direction.iter().all(|c| c.is_finite())) {
        return Err(config_error("wave direction must be a non-zero vector"));
    }
    let targets = expand_targets(&config.targets)?;
    if targets.is_empty() {
        return Err(config_error("no targets"));
    }
    let k_min = config.wave.wavenumbers.iter().cloned().fold(f64::INFINITY, f64::min);
    for x in &targets {
        hfscatter::kirchhoff::check_target(&scene, k_min, x).map_err(Failure::config_from)?;
    }
    let output = output
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .ok_or_else(|| config_error("no output directory (use --output or the config's output field)"))?;
    Ok(Prepared {
        mode,
        scene,
        direction: direction.normalize(),
        wavenumbers: config.wave.wavenumbers.clone(),
        targets,
        conditions: config.bc.conditions(),
        output,
        scene_hash,
        config_hash: short_hash(&raw),
        config,
    })
}
