//! Evaluable scalar fields on the plane, with optional gradients.

use std::sync::Arc;

use super::point::{Point, Rect};
use crate::error::{Error, Result};

type Evaluator = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type GradEvaluator = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// An evaluable real function on the plane: closed form, grid-sampled with
/// interpolation, or extension-operator output.
#[derive(Clone)]
pub struct ScalarField {
    evaluator: Evaluator,
    gradient: Option<GradEvaluator>,
    support: Rect,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("support", &self.support)
            .field("has_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(support: Rect, evaluator: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            evaluator: Arc::new(evaluator),
            gradient: None,
            support,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(Point) -> Point + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn constant(support: Rect, c: f64) -> Self {
        ScalarField::new(support, move |_| c).with_gradient(|_| Point::ZERO)
    }

    /// The coordinate function `x_i`, `i` in `{0, 1}`.
    pub fn coordinate(support: Rect, i: usize) -> Self {
        assert!(i < 2);
        ScalarField::new(support, move |p| if i == 0 { p.x } else { p.y }).with_gradient(
            move |_| {
                if i == 0 {
                    Point::new(1.0, 0.0)
                } else {
                    Point::new(0.0, 1.0)
                }
            },
        )
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.evaluator)(p)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient(&self, p: Point) -> Result<Point> {
        match &self.gradient {
            Some(g) => Ok(g(p)),
            None => Err(Error::Capability("field has no gradient".into())),
        }
    }

    pub fn support(&self) -> Rect {
        self.support
    }

    /// Bilinear-interpolation field over a uniform grid of `values` sampled
    /// at cell corners of `rect` (`nx * ny` values, row-major in y).
    /// Non-finite values mark holes; queries touching them return NaN.
    pub fn bilinear(rect: Rect, nx: usize, ny: usize, values: Vec<f64>) -> Self {
        assert!(nx >= 2 && ny >= 2 && values.len() == nx * ny);
        let values = Arc::new(values);
        let v = values.clone();
        ScalarField::new(rect, move |p| {
            let fx = ((p.x - rect.x0) / rect.width() * (nx - 1) as f64)
                .clamp(0.0, (nx - 1) as f64 - 1e-9);
            let fy = ((p.y - rect.y0) / rect.height() * (ny - 1) as f64)
                .clamp(0.0, (ny - 1) as f64 - 1e-9);
            let (ix, iy) = (fx as usize, fy as usize);
            let (tx, ty) = (fx - ix as f64, fy - iy as f64);
            let g = |i: usize, j: usize| v[j * nx + i];
            g(ix, iy) * (1.0 - tx) * (1.0 - ty)
                + g(ix + 1, iy) * tx * (1.0 - ty)
                + g(ix, iy + 1) * (1.0 - tx) * ty
                + g(ix + 1, iy + 1) * tx * ty
        })
    }

    /// Central finite difference of the evaluator (oracle support).
    pub fn fd_gradient(&self, p: Point, h: f64) -> Point {
        let e = &self.evaluator;
        Point::new(
            (e(Point::new(p.x + h, p.y)) - e(Point::new(p.x - h, p.y))) / (2.0 * h),
            (e(Point::new(p.x, p.y + h)) - e(Point::new(p.x, p.y - h))) / (2.0 * h),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_linear() {
        let rect = Rect::new(0.0, 0.0, 1.0, 1.0);
        let n = 5;
        let mut vals = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
                vals.push(2.0 * x - y + 0.25);
            }
        }
        let f = ScalarField::bilinear(rect, n, n, vals);
        for &(x, y) in &[(0.1, 0.9), (0.5, 0.5), (0.73, 0.21)] {
            let got = f.eval(Point::new(x, y));
            assert!((got - (2.0 * x - y + 0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_capability() {
        let f = ScalarField::new(Rect::new(0.0, 0.0, 1.0, 1.0), |p| p.x);
        assert!(f.gradient(Point::ZERO).is_err());
        let g = f.with_gradient(|_| Point::new(1.0, 0.0));
        assert_eq!(g.gradient(Point::ZERO).unwrap(), Point::new(1.0, 0.0));
    }
}
