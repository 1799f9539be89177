//! Minimal planar linear algebra: 2-vectors, 2x2 matrices, and the few
//! scalar routines the rest of the crate needs. Everything is `Copy` and
//! allocation-free; estimation state stays on the stack.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Relative determinant threshold below which a 2x2 matrix is treated as
/// singular: `|det| > INVERT_TOL * ||M||_F^2` must hold for inversion.
pub const INVERT_TOL: f64 = 1e-12;

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn distance_squared(self, other: Vec2) -> f64 {
        (self - other).norm_squared()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// A 2x2 matrix, row-major. Serializes as `[[m00, m01], [m10, m11]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub m00: f64,
    pub m01: f64,
    pub m10: f64,
    pub m11: f64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { m00: 0.0, m01: 0.0, m10: 0.0, m11: 0.0 };
    pub const IDENTITY: Mat2 = Mat2 { m00: 1.0, m01: 0.0, m10: 0.0, m11: 1.0 };

    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2 { m00, m01, m10, m11 }
    }

    /// Build a symmetric matrix from its upper triangle.
    pub fn symmetric(xx: f64, xy: f64, yy: f64) -> Self {
        Mat2::new(xx, xy, xy, yy)
    }

    /// Scaled identity `s * I`.
    pub fn scaled_identity(s: f64) -> Self {
        Mat2::new(s, 0.0, 0.0, s)
    }

    pub fn transpose(self) -> Mat2 {
        Mat2::new(self.m00, self.m10, self.m01, self.m11)
    }

    pub fn det(self) -> f64 {
        self.m00 * self.m11 - self.m01 * self.m10
    }

    pub fn trace(self) -> f64 {
        self.m00 + self.m11
    }

    /// Squared Frobenius norm (sum of squared entries).
    pub fn frobenius_squared(self) -> f64 {
        self.m00 * self.m00 + self.m01 * self.m01 + self.m10 * self.m10 + self.m11 * self.m11
    }

    pub fn is_finite(self) -> bool {
        self.m00.is_finite() && self.m01.is_finite() && self.m10.is_finite() && self.m11.is_finite()
    }

    /// Exact symmetry check on the stored entries.
    pub fn is_symmetric(self) -> bool {
        self.m01 == self.m10
    }

    /// Symmetric positive-definite test via Sylvester's criterion
    /// (both leading principal minors strictly positive).
    pub fn is_spd(self) -> bool {
        self.is_finite() && self.is_symmetric() && self.m00 > 0.0 && self.det() > 0.0
    }

    /// Average out floating-point asymmetry in the off-diagonal entries.
    pub fn symmetrized(self) -> Mat2 {
        let off = 0.5 * (self.m01 + self.m10);
        Mat2::new(self.m00, off, off, self.m11)
    }

    /// Closed-form adjugate inverse. Returns `None` when the determinant is
    /// too small relative to the matrix scale (`|det| <= INVERT_TOL * ||M||_F^2`),
    /// which also covers the all-zero matrix.
    pub fn try_inverse(self) -> Option<Mat2> {
        let det = self.det();
        if !det.is_finite() || det.abs() <= INVERT_TOL * self.frobenius_squared() {
            return None;
        }
        let inv_det = 1.0 / det;
        Some(Mat2::new(
            self.m11 * inv_det,
            -self.m01 * inv_det,
            -self.m10 * inv_det,
            self.m00 * inv_det,
        ))
    }
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from(a: [[f64; 2]; 2]) -> Self {
        Mat2::new(a[0][0], a[0][1], a[1][0], a[1][1])
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        [[m.m00, m.m01], [m.m10, m.m11]]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m00 + rhs.m00,
            self.m01 + rhs.m01,
            self.m10 + rhs.m10,
            self.m11 + rhs.m11,
        )
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        *self = *self + rhs;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m00 - rhs.m00,
            self.m01 - rhs.m01,
            self.m10 - rhs.m10,
            self.m11 - rhs.m11,
        )
    }
}

impl Mul<Mat2> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m00 * rhs.m00 + self.m01 * rhs.m10,
            self.m00 * rhs.m01 + self.m01 * rhs.m11,
            self.m10 * rhs.m00 + self.m11 * rhs.m10,
            self.m10 * rhs.m01 + self.m11 * rhs.m11,
        )
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self.m00 * v.x + self.m01 * v.y, self.m10 * v.x + self.m11 * v.y)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }
}

/// Standard normal CDF via the Abramowitz-Stegun 7.1.26 polynomial
/// approximation of erf (absolute error below 1.5e-7, ample for the
/// significance tests and expected-count sums in this crate).
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();

    const A1: f64 = 0.254829592;
    const A2: f64 = -0.284496736;
    const A3: f64 = 1.421413741;
    const A4: f64 = -1.453152027;
    const A5: f64 = 1.061405429;
    const P: f64 = 0.3275911;

    let t = 1.0 / (1.0 + P * x);
    let poly = ((((A5 * t + A4) * t + A3) * t + A2) * t + A1) * t;
    sign * (1.0 - poly * (-x * x).exp())
}
