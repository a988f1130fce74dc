//! Vector algebra of the 4D Galilean space.
//!
//! The first coordinate is the absolute (time-like) direction. A vector whose
//! first component is exactly zero is *isotropic*; between two isotropic
//! vectors the scalar product falls back to the Euclidean product of the last
//! three components.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("non-finite component {value} at index {index}")]
pub struct NonFiniteComponent {
    pub index: usize,
    pub value: f64,
}

/// A vector of the Galilean 4-space.
///
/// `c1` is the non-isotropic coordinate. The fields are public for reading and
/// pattern matching; [`GalileanVec4::new`] is the checked constructor that
/// rejects NaN and infinities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GalileanVec4 {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl GalileanVec4 {
    pub const ZERO: Self = Self { c1: 0.0, c2: 0.0, c3: 0.0, c4: 0.0 };

    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Self, NonFiniteComponent> {
        Self::from_array([c1, c2, c3, c4])
    }

    pub fn from_array(c: [f64; 4]) -> Result<Self, NonFiniteComponent> {
        if let Some(index) = c.iter().position(|x| !x.is_finite()) {
            return Err(NonFiniteComponent { index, value: c[index] });
        }
        Ok(Self::from_array_unchecked(c))
    }

    /// Builds an isotropic vector `(0, c2, c3, c4)`.
    pub fn isotropic(c2: f64, c3: f64, c4: f64) -> Result<Self, NonFiniteComponent> {
        Self::new(0.0, c2, c3, c4)
    }

    pub(crate) fn from_array_unchecked(c: [f64; 4]) -> Self {
        Self { c1: c[0], c2: c[1], c3: c[2], c4: c[3] }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }

    pub fn is_isotropic(self) -> bool {
        self.c1 == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Galilean scalar product, see [`gdot`].
    pub fn dot(self, other: Self) -> f64 {
        gdot(self, other)
    }

    /// Galilean norm, see [`gnorm`].
    pub fn norm(self) -> f64 {
        gnorm(self)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::from_array_unchecked(self.to_array().map(|x| k * x))
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl Add for GalileanVec4 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            c1: self.c1 + rhs.c1,
            c2: self.c2 + rhs.c2,
            c3: self.c3 + rhs.c3,
            c4: self.c4 + rhs.c4,
        }
    }
}

impl Sub for GalileanVec4 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            c1: self.c1 - rhs.c1,
            c2: self.c2 - rhs.c2,
            c3: self.c3 - rhs.c3,
            c4: self.c4 - rhs.c4,
        }
    }
}

impl Neg for GalileanVec4 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul<GalileanVec4> for f64 {
    type Output = GalileanVec4;
    fn mul(self, rhs: GalileanVec4) -> GalileanVec4 {
        rhs.scale(self)
    }
}

impl fmt::Display for GalileanVec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.c1, self.c2, self.c3, self.c4)
    }
}

/// Galilean scalar product.
///
/// If either vector has a non-zero first component the product is `a.c1 * b.c1`;
/// otherwise both are isotropic and the Euclidean product of the remaining
/// components is returned. The branch test is an exact comparison with zero.
pub fn gdot(a: GalileanVec4, b: GalileanVec4) -> f64 {
    if a.c1 != 0.0 || b.c1 != 0.0 {
        a.c1 * b.c1
    } else {
        a.c2 * b.c2 + a.c3 * b.c3 + a.c4 * b.c4
    }
}

pub fn gnorm(a: GalileanVec4) -> f64 {
    if a.c1 != 0.0 {
        a.c1.abs()
    } else {
        (a.c2 * a.c2 + a.c3 * a.c3 + a.c4 * a.c4).sqrt()
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Minor of the 3x4 matrix with rows `rows`, deleting column `skip`.
fn minor(rows: [[f64; 4]; 3], skip: usize) -> f64 {
    let mut m = [[0.0; 3]; 3];
    for (r, row) in rows.iter().enumerate() {
        let mut k = 0;
        for (c, &x) in row.iter().enumerate() {
            if c != skip {
                m[r][k] = x;
                k += 1;
            }
        }
    }
    det3(m)
}

/// Ternary Galilean cross product `a ∧ b ∧ c`.
///
/// Expands the formal determinant whose first row is `(0, e2, e3, e4)` and
/// whose remaining rows are `a`, `b`, `c`. The cofactor signs are those of the
/// first row, so `(1,0,0,0) ∧ (0,1,0,0) ∧ (0,0,1,0) = (0,0,0,-1)`. The result
/// is always isotropic.
pub fn gcross(a: GalileanVec4, b: GalileanVec4, c: GalileanVec4) -> GalileanVec4 {
    let rows = [a.to_array(), b.to_array(), c.to_array()];
    GalileanVec4 {
        c1: 0.0,
        c2: -minor(rows, 1),
        c3: minor(rows, 2),
        c4: -minor(rows, 3),
    }
}

/// Determinant of the 4x4 matrix with rows `a, b, c, d`.
pub fn det4(a: GalileanVec4, b: GalileanVec4, c: GalileanVec4, d: GalileanVec4) -> f64 {
    let top = a.to_array();
    let rest = [b.to_array(), c.to_array(), d.to_array()];
    (0..4)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * top[j] * minor(rest, j)
        })
        .sum()
}
