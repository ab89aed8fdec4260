use nalgebra::{Matrix2, Vector2, Vector3};

use super::{Obstacle, SurfacePoint};

/// Chart step for first derivatives, relative to the largest semi-axis.
pub const GRADIENT_STEP: f64 = 1e-5;
/// Chart step for second derivatives, relative to the largest semi-axis.
pub const HESSIAN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartDerivative {
    Gradient(Vector2<f64>),
    Hessian(Matrix2<f64>),
}

impl ChartDerivative {
    pub fn gradient(self) -> Option<Vector2<f64>> {
        match self {
            ChartDerivative::Gradient(g) => Some(g),
            ChartDerivative::Hessian(_) => None,
        }
    }

    pub fn hessian(self) -> Option<Matrix2<f64>> {
        match self {
            ChartDerivative::Hessian(h) => Some(h),
            ChartDerivative::Gradient(_) => None,
        }
    }
}

/// Surface point above `sigma + s u + t v` along the normal, i.e. the chart
/// `(s, t) -> sigma + s u + t v + g(s, t) n`. `None` if the normal line misses.
pub fn chart_point(obstacle: &Obstacle, sigma: &SurfacePoint, s: f64, t: f64) -> Option<Vector3<f64>> {
    let base = sigma.position + s * sigma.dir_u + t * sigma.dir_v;
    let (_, far) = obstacle.line_intersection(&base, &sigma.normal)?;
    Some(base + far * sigma.normal)
}

/// Central finite differences of `f` in the graph chart at `sigma`.
///
/// Gradients use step `1e-5 * scale`, Hessians `1e-4 * scale` (the smaller step
/// loses about six digits to cancellation in the second difference).
pub fn chart_derivative_oracle<F>(
    obstacle: &Obstacle,
    sigma: &SurfacePoint,
    f: F,
    order: DerivativeOrder,
) -> ChartDerivative
where
    F: Fn(&Vector3<f64>) -> f64,
{
    let scale = obstacle.scale();
    let eval = |s: f64, t: f64| {
        let p = chart_point(obstacle, sigma, s, t).expect("chart step leaves the surface");
        f(&p)
    };
    match order {
        DerivativeOrder::Gradient => {
            let h = GRADIENT_STEP * scale;
            ChartDerivative::Gradient(Vector2::new(
                (eval(h, 0.0) - eval(-h, 0.0)) / (2.0 * h),
                (eval(0.0, h) - eval(0.0, -h)) / (2.0 * h),
            ))
        }
        DerivativeOrder::Hessian => {
            let h = HESSIAN_STEP * scale;
            let f0 = eval(0.0, 0.0);
            let fss = (eval(h, 0.0) - 2.0 * f0 + eval(-h, 0.0)) / (h * h);
            let ftt = (eval(0.0, h) - 2.0 * f0 + eval(0.0, -h)) / (h * h);
            let fst = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
            ChartDerivative::Hessian(Matrix2::new(fss, fst, fst, ftt))
        }
    }
}
