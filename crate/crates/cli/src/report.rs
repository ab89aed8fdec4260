//! Convergence summary for error series over wavenumbers.

use serde::Serialize;

/// Accepted band for `err(k_{i+1}) / err(k_i)`.
pub const RATIO_BAND: (f64, f64) = (0.3, 0.7);

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub target: [f64; 3],
    pub bc: String,
    pub wavenumbers: Vec<f64>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetReport {
    pub target: [f64; 3],
    pub bc: String,
    pub wavenumbers: Vec<f64>,
    pub errors: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub ratio_band: [f64; 2],
    pub targets: Vec<TargetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

/// Consecutive error ratios per target and a PASS flag when every ratio is in [`RATIO_BAND`].
/// Series with a single wavenumber get neither ratios nor a flag.
pub fn convergence_report(series: &[ErrorSeries]) -> ConvergenceReport {
    let targets: Vec<TargetReport> = series
        .iter()
        .map(|s| {
            let (ratios, pass) = if s.errors.len() < 2 {
                (None, None)
            } else {
                let r: Vec<f64> = s.errors.windows(2).map(|w| w[1] / w[0]).collect();
                let ok = r.iter().all(|q| *q >= RATIO_BAND.0 && *q <= RATIO_BAND.1);
                (Some(r), Some(ok))
            };
            TargetReport {
                target: s.target,
                bc: s.bc.clone(),
                wavenumbers: s.wavenumbers.clone(),
                errors: s.errors.clone(),
                ratios,
                pass,
            }
        })
        .collect();
    let flags: Vec<bool> = targets.iter().filter_map(|t| t.pass).collect();
    let pass = if flags.is_empty() { None } else { Some(flags.iter().all(|p| *p)) };
    ConvergenceReport {
        ratio_band: [RATIO_BAND.0, RATIO_BAND.1],
        targets,
        pass,
    }
}
