//! Partial-wave series for plane-wave scattering by a single sphere centred at the origin.
//!
//! Outgoing waves are `h_l(kr) = j_l(kr) - i y_l(kr)`, matching the
//! `e^{-ik<xi, x>}` incident wave and `e^{-ikr}/r` radiation used elsewhere.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rays::IncidentWave;
use crate::BoundaryCondition;

/// Last retained term relative to the partial sum above which the series is rejected.
pub const SERIES_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MieConfig {
    pub radius: f64,
    pub k: f64,
    pub truncation: usize,
}

impl MieConfig {
    /// Smallest admissible truncation: `kR + 10 (kR)^{1/3} + 10`.
    pub fn min_truncation(radius: f64, k: f64) -> usize {
        let kr = k * radius;
        (kr + 10.0 * kr.cbrt() + 10.0).ceil() as usize
    }

    /// Configuration with the smallest admissible truncation.
    pub fn new(radius: f64, k: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!("radius {radius} and wavenumber {k} must be positive")));
        }
        Ok(Self {
            radius,
            k,
            truncation: Self::min_truncation(radius, k),
        })
    }

    pub fn with_truncation(self, truncation: usize) -> Result<Self> {
        let min = Self::min_truncation(self.radius, self.k);
        if truncation < min {
            return Err(Error::InvalidInput(format!("truncation {truncation} below minimum {min}")));
        }
        Ok(Self { truncation, ..self })
    }

    /// Scattering coefficients `a_0..=a_L`.
    pub fn coefficients(&self, bc: BoundaryCondition) -> Vec<Complex64> {
        let z = self.k * self.radius;
        let n = self.truncation;
        let (j, y) = (spherical_j(n + 1, z), spherical_y(n + 1, z));
        (0..=n)
            .map(|l| {
                let (jl, yl) = match bc {
                    BoundaryCondition::Dirichlet => (j[l], y[l]),
                    BoundaryCondition::Neumann => (derivative(&j, l, z), derivative(&y, l, z)),
                };
                -Complex64::new(jl, 0.0) / Complex64::new(jl, -yl)
            })
            .collect()
    }
}

/// `j_0(z)..=j_n(z)` by downward recurrence, normalised against the closed form of
/// `j_0` or `j_1`.
pub fn spherical_j(n: usize, z: f64) -> Vec<f64> {
    if z == 0.0 {
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0;
        return out;
    }
    let n_out = n;
    let n = n.max(1);
    let top = (n as f64).max(z);
    let start = (top + 20.0 + (50.0 * top).sqrt()).ceil() as usize;
    let mut out = vec![0.0; n + 1];
    let (mut above, mut current) = (0.0_f64, 1e-300_f64);
    for l in (0..start).rev() {
        // current holds the value at l + 1
        let below = (2 * l + 3) as f64 / z * current - above;
        above = current;
        current = below;
        if current.abs() > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
        if l <= n {
            out[l] = current;
        }
        if l + 1 <= n {
            out[l + 1] = above;
        }
    }
    let j0 = z.sin() / z;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    let scale = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1] };
    out.truncate(n_out + 1);
    out.iter().map(|v| v * scale).collect()
}

/// `y_0(z)..=y_n(z)` by upward recurrence.
pub fn spherical_y(n: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(-z.cos() / z);
    if n >= 1 {
        out.push(-z.cos() / (z * z) - z.sin() / z);
    }
    for l in 1..n {
        let next = (2 * l + 1) as f64 / z * out[l] - out[l - 1];
        out.push(next);
    }
    out
}

/// `f_l'(z)` from a table of `f_0..f_{l+1}`.
fn derivative(f: &[f64], l: usize, z: f64) -> f64 {
    if l == 0 {
        -f[1]
    } else {
        f[l - 1] - (l + 1) as f64 / z * f[l]
    }
}

/// `P_0(t)..=P_n(t)`.
pub fn legendre(n: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(t);
    }
    for l in 1..n {
        let next = ((2 * l + 1) as f64 * t * out[l] - l as f64 * out[l - 1]) / (l + 1) as f64;
        out.push(next);
    }
    out
}

fn neg_i_pow(l: usize) -> Complex64 {
    match l % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Scattered field at `x`.
pub fn mie_scattered(cfg: &MieConfig, xi: &Vector3<f64>, x: &Vector3<f64>, bc: BoundaryCondition) -> Result<Complex64> {
    let r = x.norm();
    if !(r > cfg.radius) {
        return Err(Error::InsideObstacle {
            target: [x.x, x.y, x.z],
            id: 0,
        });
    }
    let dir = xi.normalize();
    let cos = (dir.dot(x) / r).clamp(-1.0, 1.0);
    let n = cfg.truncation;
    let kr = cfg.k * r;
    let (j, y) = (spherical_j(n, kr), spherical_y(n, kr));
    let p = legendre(n, cos);
    let a = cfg.coefficients(bc);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = Complex64::new(0.0, 0.0);
    for l in 0..=n {
        last = (2 * l + 1) as f64 * neg_i_pow(l) * a[l] * Complex64::new(j[l], -y[l]) * p[l];
        sum += last;
    }
    if last.norm() > SERIES_TOLERANCE * sum.norm() {
        return Err(Error::Convergence {
            last: last.norm(),
            sum: sum.norm(),
        });
    }
    Ok(sum)
}

/// Total field: closed-form incident wave plus the scattered series.
pub fn mie_field(cfg: &MieConfig, xi: &Vector3<f64>, x: &Vector3<f64>, bc: BoundaryCondition) -> Result<Complex64> {
    let wave = IncidentWave::new(*xi, cfg.k)?;
    Ok(wave.value(x) + mie_scattered(cfg, xi, x, bc)?)
}

/// Far-field amplitude `f` with `u_s ~ f e^{-ikr}/r`, as a function of `cos` of the scattering angle.
pub fn far_field(cfg: &MieConfig, cos: f64, bc: BoundaryCondition) -> Complex64 {
    let p = legendre(cfg.truncation, cos);
    let sum: Complex64 = cfg
        .coefficients(bc)
        .iter()
        .enumerate()
        .map(|(l, a)| (2 * l + 1) as f64 * a * p[l])
        .sum();
    Complex64::new(0.0, 1.0 / cfg.k) * sum
}

/// Total cross section from the forward amplitude.
pub fn extinction_cross_section(cfg: &MieConfig, bc: BoundaryCondition) -> f64 {
    -4.0 * std::f64::consts::PI / cfg.k * far_field(cfg, 1.0, bc).im
}

/// Scattering cross section summed from the coefficients.
pub fn scattering_cross_section(cfg: &MieConfig, bc: BoundaryCondition) -> f64 {
    let sum: f64 = cfg
        .coefficients(bc)
        .iter()
        .enumerate()
        .map(|(l, a)| (2 * l + 1) as f64 * a.norm_sqr())
        .sum();
    4.0 * std::f64::consts::PI / (cfg.k * cfg.k) * sum
}
