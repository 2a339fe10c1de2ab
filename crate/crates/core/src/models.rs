//! Divided differences and the one-sided quadratic models.

use thiserror::Error;

use crate::brackets::ExtendedBracket7;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("divided difference over coincident points")]
    CoincidentPoints,
}

/// First divided difference `f[a, b]`.
pub fn divided_diff1(a: (f64, f64), b: (f64, f64)) -> Result<f64, ModelError> {
    if a.0 == b.0 {
        return Err(ModelError::CoincidentPoints);
    }
    Ok((a.1 - b.1) / (a.0 - b.0))
}

/// Second divided difference `f[a, b, c] = (f[a, b] - f[a, c]) / (b - c)`.
pub fn divided_diff2(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Result<f64, ModelError> {
    if b.0 == c.0 {
        return Err(ModelError::CoincidentPoints);
    }
    Ok((divided_diff1(a, b)? - divided_diff1(a, c)?) / (b.0 - c.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Indices into a 7-point bracket, innermost first.
    pub fn indices(self) -> [usize; 3] {
        match self {
            Side::Left => [2, 1, 0],
            Side::Right => [4, 5, 6],
        }
    }
}

/// `q(x) = c0 + c1 (x - x1) + c2 (x - x1)(x - x2)`, kept in Newton form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadModel {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub x1: f64,
    pub x2: f64,
}

impl QuadModel {
    /// Interpolates three points, then lowers the leading coefficient by
    /// `shift`. Points are given innermost first.
    pub fn interpolate(pts: [(f64, f64); 3], shift: f64) -> Result<Self, ModelError> {
        let [p1, p2, p3] = pts;
        Ok(Self { c0: p1.1, c1: divided_diff1(p1, p2)?, c2: divided_diff2(p1, p2, p3)? - shift, x1: p1.0, x2: p2.0 })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c0 + (x - self.x1) * (self.c1 + self.c2 * (x - self.x2))
    }

    /// Stationary point, if the model is strictly convex.
    pub fn vertex(&self) -> Option<f64> {
        (self.c2 > 0.0).then(|| 0.5 * (self.x1 + self.x2) - self.c1 / (2.0 * self.c2))
    }

    /// Coefficients `(a, b, c)` of `a u^2 + b u + c` with `u = x - origin`.
    pub fn local_coefficients(&self, origin: f64) -> (f64, f64, f64) {
        let a1 = self.x1 - origin;
        let a2 = self.x2 - origin;
        let a = self.c2;
        let b = self.c1 - self.c2 * (a1 + a2);
        let c = self.c0 - self.c1 * a1 + self.c2 * a1 * a2;
        (a, b, c)
    }
}

/// Model of one side of `X` with curvature lowered by `alpha * h(X)`.
pub fn build_model(side: Side, bracket: &ExtendedBracket7, alpha: f64) -> Result<QuadModel, ModelError> {
    let [i, j, k] = side.indices();
    QuadModel::interpolate([bracket.point(i), bracket.point(j), bracket.point(k)], alpha * bracket.scaling_h())
}

/// Second divided difference of one side's three points.
pub fn side_curvature(side: Side, bracket: &ExtendedBracket7) -> Result<f64, ModelError> {
    let [i, j, k] = side.indices();
    divided_diff2(bracket.point(i), bracket.point(j), bracket.point(k))
}
