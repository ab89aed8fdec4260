//! Mode implementations. Computation may run in parallel; files are written
//! afterwards in a fixed order.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Serialize;

use hfscatter::kirchhoff::{build_grids, total_field_on};
use hfscatter::rays::{enumerate_paths, goa_field, insert_transmission, IncidentWave, RayPath};
use hfscatter::stationary::{factorization_residuals, insertion_residuals, stationary_set};
use hfscatter::BoundaryCondition;

use crate::config::{Mode, Prepared};
use crate::failure::Failure;
use crate::report::{convergence_report, ErrorSeries};

pub const LAW_TOLERANCE: f64 = 1e-9;
pub const FACTOR_TOLERANCE: f64 = 1e-8;
pub const INSERTION_PHASE_TOLERANCE: f64 = 1e-12;
pub const INSERTION_AMPLITUDE_TOLERANCE: f64 = 1e-10;

pub fn versions() -> String {
    format!("core-{}/cli-{}", hfscatter::VERSION, env!("CARGO_PKG_VERSION"))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn point(x: &Vector3<f64>) -> [f64; 3] {
    [x.x, x.y, x.z]
}

const FIELD_HEADER: [&str; 12] = [
    "k", "x", "y", "z", "re", "im", "method", "level", "bc", "scene_hash", "config_hash", "version",
];

struct FieldTable {
    rows: Vec<Vec<String>>,
}

impl FieldTable {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, prep: &Prepared, k: f64, x: &Vector3<f64>, value: Complex64, method: &str, level: usize, bc: BoundaryCondition) {
        self.rows.push(vec![
            num(k),
            num(x.x),
            num(x.y),
            num(x.z),
            num(value.re),
            num(value.im),
            method.into(),
            level.to_string(),
            bc.name().into(),
            prep.scene_hash.clone(),
            prep.config_hash.clone(),
            versions(),
        ]);
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Outcome of a run: files written, plus an optional validation failure.
pub struct RunOutcome {
    pub files: Vec<String>,
    pub failure: Option<Failure>,
}

pub fn run(prep: &Prepared) -> Result<RunOutcome, Failure> {
    match prep.mode {
        Mode::Goa => goa(prep),
        Mode::Kirchhoff => kirchhoff(prep),
        Mode::Validate => validate(prep),
        Mode::Compare => compare(prep),
    }
}

#[derive(Serialize)]
struct PathRecord {
    obstacles: Vec<usize>,
    kinds: Vec<&'static str>,
    nodes: Vec<[f64; 3]>,
    phase: f64,
    det_factors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    term: Option<[f64; 2]>,
}

impl PathRecord {
    fn new(path: &RayPath, term: Option<Complex64>) -> Self {
        Self {
            obstacles: path.obstacles.clone(),
            kinds: path.kinds.iter().map(|k| k.name()).collect(),
            nodes: path.nodes.iter().map(|n| point(&n.position)).collect(),
            phase: path.phase,
            det_factors: path.det_factors(),
            term: term.map(pair),
        }
    }
}

#[derive(Serialize)]
struct GoaRecord {
    k: f64,
    bc: &'static str,
    target: [f64; 3],
    value: [f64; 2],
    incident: [f64; 2],
    shadowed: bool,
    paths: Vec<PathRecord>,
    occluded: Vec<PathRecord>,
}

#[derive(Serialize)]
struct Provenance {
    scene_hash: String,
    config_hash: String,
    version: String,
}

fn provenance(prep: &Prepared) -> Provenance {
    Provenance {
        scene_hash: prep.scene_hash.clone(),
        config_hash: prep.config_hash.clone(),
        version: versions(),
    }
}

fn goa(prep: &Prepared) -> Result<RunOutcome, Failure> {
    let mut table = FieldTable::new();
    let mut records = Vec::new();
    for &k in &prep.wavenumbers {
        let wave = IncidentWave::new(prep.direction, k)?;
        for &bc in &prep.conditions {
            for x in &prep.targets {
                let g = goa_field(&prep.scene, &wave, x, bc, prep.config.max_bounces)?;
                table.push(prep, k, x, g.incident, "incident", 0, bc);
                for (path, term) in &g.contributions {
                    table.push(prep, k, x, *term, "goa-path", path.len(), bc);
                }
                table.push(prep, k, x, g.value, "goa", prep.config.max_bounces, bc);
                records.push(GoaRecord {
                    k,
                    bc: bc.name(),
                    target: point(x),
                    value: pair(g.value),
                    incident: pair(g.incident),
                    shadowed: g.shadowed,
                    paths: g.contributions.iter().map(|(p, t)| PathRecord::new(p, Some(*t))).collect(),
                    occluded: g.occluded.iter().map(|p| PathRecord::new(p, None)).collect(),
                });
            }
        }
    }
    #[derive(Serialize)]
    struct Doc {
        #[serde(flatten)]
        provenance: Provenance,
        fields: Vec<GoaRecord>,
    }
    fs::create_dir_all(&prep.output)?;
    write_csv(&prep.output.join("goa.csv"), &FIELD_HEADER, &table.rows)?;
    write_json(
        &prep.output.join("goa_paths.json"),
        &Doc {
            provenance: provenance(prep),
            fields: records,
        },
    )?;
    Ok(RunOutcome {
        files: vec!["goa.csv".into(), "goa_paths.json".into()],
        failure: None,
    })
}

/// Kirchhoff totals indexed `[k][bc][target]`.
fn kirchhoff_samples(prep: &Prepared) -> Result<Vec<Vec<Vec<hfscatter::kirchhoff::FieldSample>>>, Failure> {
    let mut out = Vec::new();
    for &k in &prep.wavenumbers {
        let wave = IncidentWave::new(prep.direction, k)?;
        let grids = build_grids(&prep.scene, k, prep.config.ppw)?;
        let mut per_bc = Vec::new();
        for &bc in &prep.conditions {
            per_bc.push(total_field_on(&prep.scene, &wave, grids.clone(), &prep.targets, bc, prep.config.iterations)?);
        }
        out.push(per_bc);
    }
    Ok(out)
}

fn kirchhoff(prep: &Prepared) -> Result<RunOutcome, Failure> {
    let samples = kirchhoff_samples(prep)?;
    let mut table = FieldTable::new();
    for (ki, &k) in prep.wavenumbers.iter().enumerate() {
        for (bi, &bc) in prep.conditions.iter().enumerate() {
            for s in &samples[ki][bi] {
                for (l, inc) in s.increments.iter().enumerate() {
                    table.push(prep, k, &s.x, *inc, "kirchhoff-increment", l + 1, bc);
                }
                table.push(prep, k, &s.x, s.total, "kirchhoff", prep.config.iterations, bc);
            }
        }
    }
    fs::create_dir_all(&prep.output)?;
    write_csv(&prep.output.join("kirchhoff.csv"), &FIELD_HEADER, &table.rows)?;
    Ok(RunOutcome {
        files: vec!["kirchhoff.csv".into()],
        failure: None,
    })
}

fn compare(prep: &Prepared) -> Result<RunOutcome, Failure> {
    let samples = kirchhoff_samples(prep)?;
    let n = prep.config.iterations;
    // GOA truncated at as many reflections as there are Kirchhoff levels
    let mut goa_values = Vec::new();
    for &k in &prep.wavenumbers {
        let wave = IncidentWave::new(prep.direction, k)?;
        let mut per_bc = Vec::new();
        for &bc in &prep.conditions {
            let values = prep
                .targets
                .iter()
                .map(|x| goa_field(&prep.scene, &wave, x, bc, n).map(|g| g.value))
                .collect::<Result<Vec<_>, _>>()?;
            per_bc.push(values);
        }
        goa_values.push(per_bc);
    }
    let error = |ki: usize, bi: usize, ti: usize| (samples[ki][bi][ti].total - goa_values[ki][bi][ti]).norm();

    let header = [
        "k", "x", "y", "z", "bc", "kirchhoff_re", "kirchhoff_im", "goa_re", "goa_im", "error", "ratio", "scene_hash", "config_hash",
        "version",
    ];
    let mut rows = Vec::new();
    for (ki, &k) in prep.wavenumbers.iter().enumerate() {
        for (bi, &bc) in prep.conditions.iter().enumerate() {
            for (ti, x) in prep.targets.iter().enumerate() {
                let (kv, gv) = (samples[ki][bi][ti].total, goa_values[ki][bi][ti]);
                let err = error(ki, bi, ti);
                let ratio = if ki == 0 { String::new() } else { num(err / error(ki - 1, bi, ti)) };
                rows.push(vec![
                    num(k),
                    num(x.x),
                    num(x.y),
                    num(x.z),
                    bc.name().into(),
                    num(kv.re),
                    num(kv.im),
                    num(gv.re),
                    num(gv.im),
                    num(err),
                    ratio,
                    prep.scene_hash.clone(),
                    prep.config_hash.clone(),
                    versions(),
                ]);
            }
        }
    }
    let mut series = Vec::new();
    for (bi, &bc) in prep.conditions.iter().enumerate() {
        for (ti, x) in prep.targets.iter().enumerate() {
            series.push(ErrorSeries {
                target: point(x),
                bc: bc.name().into(),
                wavenumbers: prep.wavenumbers.clone(),
                errors: (0..prep.wavenumbers.len()).map(|ki| error(ki, bi, ti)).collect(),
            });
        }
    }
    let report = convergence_report(&series);
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        provenance: Provenance,
        iterations: usize,
        #[serde(flatten)]
        report: &'a crate::report::ConvergenceReport,
    }
    fs::create_dir_all(&prep.output)?;
    write_csv(&prep.output.join("compare.csv"), &header, &rows)?;
    write_json(
        &prep.output.join("convergence_report.json"),
        &Doc {
            provenance: provenance(prep),
            iterations: n,
            report: &report,
        },
    )?;
    let failure = (report.pass == Some(false)).then(|| Failure::Validation {
        message: "error ratios outside the accepted band; see convergence_report.json".into(),
    });
    Ok(RunOutcome {
        files: vec!["compare.csv".into(), "convergence_report.json".into()],
        failure,
    })
}

#[derive(Serialize, Default)]
struct TargetValidation {
    target: [f64; 3],
    paths: usize,
    max_law_residual: f64,
    max_block_rel: f64,
    max_det_rel: f64,
    all_positive: bool,
    min_det_m: f64,
    insertion_pairs: usize,
    max_phase_diff: f64,
    max_det_product_rel: f64,
}

#[derive(Serialize)]
struct Check {
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn check(value: f64, tolerance: f64) -> Check {
    Check {
        value,
        tolerance,
        pass: value < tolerance,
    }
}

fn validate_target(prep: &Prepared, wave: &IncidentWave, x: &Vector3<f64>) -> Result<TargetValidation, Failure> {
    let mut v = TargetValidation {
        target: point(x),
        all_positive: true,
        min_det_m: f64::INFINITY,
        ..Default::default()
    };
    let search = hfscatter::rays::PathSearch::with_bounces(prep.config.max_bounces);
    for level in 1..=prep.config.max_bounces {
        for m in stationary_set(&prep.scene, wave, x, BoundaryCondition::Dirichlet, level, &search)? {
            if m.path.near_caustic {
                continue;
            }
            let report = factorization_residuals(&m.path)?;
            v.paths += 1;
            v.max_law_residual = v.max_law_residual.max(m.path.law_residual());
            v.max_block_rel = v.max_block_rel.max(report.max_block_rel());
            v.max_det_rel = v.max_det_rel.max(report.max_det_rel());
            v.all_positive &= report.all_positive();
            v.min_det_m = report.nodes.iter().map(|n| n.det_m).fold(v.min_det_m, f64::min);
        }
    }
    let mut bases = enumerate_paths(&prep.scene, wave, x, prep.config.max_bounces)?;
    bases.push(RayPath::assemble(&prep.scene, wave, Vec::new(), Vec::new(), *x)?);
    for base in &bases {
        for mu in insert_transmission(&prep.scene, wave, base)? {
            let r = insertion_residuals(base, &mu);
            v.insertion_pairs += 1;
            v.max_phase_diff = v.max_phase_diff.max(r.phase_diff);
            v.max_det_product_rel = v.max_det_product_rel.max(r.det_product_rel);
        }
    }
    Ok(v)
}

fn validate(prep: &Prepared) -> Result<RunOutcome, Failure> {
    let wave = IncidentWave::new(prep.direction, prep.wavenumbers[0])?;
    let targets = prep
        .targets
        .iter()
        .map(|x| validate_target(prep, &wave, x))
        .collect::<Result<Vec<_>, _>>()?;
    let fold = |f: fn(&TargetValidation) -> f64| targets.iter().map(f).fold(0.0, f64::max);
    let positive = targets.iter().all(|t| t.all_positive);
    let law = check(fold(|t| t.max_law_residual), LAW_TOLERANCE);
    let block = check(fold(|t| t.max_block_rel), FACTOR_TOLERANCE);
    let det = check(fold(|t| t.max_det_rel), FACTOR_TOLERANCE);
    let phase = check(fold(|t| t.max_phase_diff), INSERTION_PHASE_TOLERANCE);
    let amplitude = check(fold(|t| t.max_det_product_rel), INSERTION_AMPLITUDE_TOLERANCE);
    let pass = law.pass && block.pass && det.pass && positive && phase.pass && amplitude.pass;

    #[derive(Serialize)]
    struct Doc {
        #[serde(flatten)]
        provenance: Provenance,
        paths: usize,
        insertion_pairs: usize,
        law_residual: Check,
        block_factor_rel: Check,
        det_factor_rel: Check,
        all_positive: bool,
        insertion_phase_diff: Check,
        insertion_det_product_rel: Check,
        pass: bool,
        targets: Vec<TargetValidation>,
    }
    let doc = Doc {
        provenance: provenance(prep),
        paths: targets.iter().map(|t| t.paths).sum(),
        insertion_pairs: targets.iter().map(|t| t.insertion_pairs).sum(),
        law_residual: law,
        block_factor_rel: block,
        det_factor_rel: det,
        all_positive: positive,
        insertion_phase_diff: phase,
        insertion_det_product_rel: amplitude,
        pass,
        targets,
    };
    fs::create_dir_all(&prep.output)?;
    write_json(&prep.output.join("validation.json"), &doc)?;
    let failure = (!pass).then(|| Failure::Validation {
        message: "identity residuals above tolerance; see validation.json".into(),
    });
    Ok(RunOutcome {
        files: vec!["validation.json".into()],
        failure,
    })
}
