//! Wavefront-curvature algebra: free propagation, specular reflection and frame changes.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::SurfacePoint;

/// Symmetric 3x3 matrix (curvature of a wavefront or a surface).
pub type SymMatrix3 = Matrix3<f64>;

/// Condition number of `I + sA` above which propagation is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// `|<zeta, eta>|` at or below this is a grazing reflection.
pub const TANGENCY_TOLERANCE: f64 = 1e-9;

/// Orthogonal change of coordinates between two surface frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRotation(pub Matrix3<f64>);

impl FrameRotation {
    /// Expresses frame coordinates of `from` in frame coordinates of `to`.
    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Conjugates a matrix written in the `from` frame into the `to` frame.
    pub fn conjugate(&self, m: &Matrix3<f64>) -> Matrix3<f64> {
        self.0 * m * self.0.transpose()
    }

    pub fn orthogonality_defect(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).norm()
    }
}

/// `A (I + sA)^{-1}`: curvature of a wavefront after travelling a distance `s`.
pub fn shift_map(a: &SymMatrix3, s: f64) -> Result<SymMatrix3> {
    let m = Matrix3::identity() + s * a;
    let eig = m.symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.abs()), hi.max(e.abs())));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let inv = m.try_inverse().ok_or(Error::Singular { condition })?;
    Ok(symmetrize(&(a * inv)))
}

/// Curvature after specular reflection of a wave with direction `zeta` and
/// curvature `a` on a surface with normal `eta` and curvature matrix `b`.
///
/// Matrix of `x -> (A - 2cB)x - 2<eta, x>w - 2<w, x>eta + 2[2<A eta, eta> - <B zeta, zeta>/c]<eta, x>eta`
/// with `c = <zeta, eta>` and `w = A eta + B zeta`.
pub fn reflect_map(a: &SymMatrix3, b: &SymMatrix3, eta: &Vector3<f64>, zeta: &Vector3<f64>) -> Result<SymMatrix3> {
    let c = zeta.dot(eta);
    if c.abs() <= TANGENCY_TOLERANCE {
        return Err(Error::Tangency { cosine: c.abs() });
    }
    let a_eta = a * eta;
    let b_zeta = b * zeta;
    let w = a_eta + b_zeta;
    let coef = 2.0 * (2.0 * a_eta.dot(eta) - b_zeta.dot(zeta) / c);
    let t = a - 2.0 * c * b - 2.0 * w * eta.transpose() - 2.0 * eta * w.transpose() + coef * eta * eta.transpose();
    Ok(symmetrize(&t))
}

/// `R_ab = <e_a(to), e_b(from)>` over the frames `{u, v, n}`.
pub fn frame_rotation(from: &SurfacePoint, to: &SurfacePoint) -> FrameRotation {
    FrameRotation(to.frame() * from.frame().transpose())
}

/// Direction after specular reflection on a surface with normal `n`.
pub fn reflect_direction(d: &Vector3<f64>, n: &Vector3<f64>) -> Vector3<f64> {
    d - 2.0 * d.dot(n) * n
}

pub fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    0.5 * (m + m.transpose())
}

pub fn asymmetry(m: &Matrix3<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}
