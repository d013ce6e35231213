use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::C64;

/// Real quaternion `q0 + q1·i + q2·j + q3·k` with `i² = j² = k² = ijk = −1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        Quaternion { q0, q1, q2, q3 }
    }

    /// Embeds a complex number in the `1, i` plane.
    pub fn from_complex(z: C64) -> Self {
        Quaternion::new(z.re, z.im, 0.0, 0.0)
    }

    /// `λ_q = x + iy + jz + kw`.
    pub fn lambda(x: f64, y: f64, z: f64, w: f64) -> Self {
        Quaternion::new(x, y, z, w)
    }

    /// `λ̂_q = x − iy + jz − kw`: conjugates the `i` and `k` parts only.
    /// This is not the quaternion conjugate, which also flips `j`.
    pub fn hat(self) -> Self {
        Quaternion::new(self.q0, -self.q1, self.q2, -self.q3)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.q0, -self.q1, -self.q2, -self.q3)
    }

    pub fn norm(self) -> f64 {
        (self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3).sqrt()
    }

    pub fn components(self) -> [f64; 4] {
        [self.q0, self.q1, self.q2, self.q3]
    }

    /// 2×2 complex representation `[[α, β], [−β*, α*]]` with `α = q0 + i·q1`, `β = q2 + i·q3`.
    pub fn to_complex_2x2(self) -> [[C64; 2]; 2] {
        let alpha = C64::new(self.q0, self.q1);
        let beta = C64::new(self.q2, self.q3);
        [[alpha, beta], [-beta.conj(), alpha.conj()]]
    }

    /// Inverse of [`Quaternion::to_complex_2x2`]; reads the first row.
    pub fn from_complex_2x2(m: &[[C64; 2]; 2]) -> Self {
        Quaternion::new(m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im)
    }
}

/// Hamilton product.
pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.q0 * b.q0 - a.q1 * b.q1 - a.q2 * b.q2 - a.q3 * b.q3,
        a.q0 * b.q1 + a.q1 * b.q0 + a.q2 * b.q3 - a.q3 * b.q2,
        a.q0 * b.q2 - a.q1 * b.q3 + a.q2 * b.q0 + a.q3 * b.q1,
        a.q0 * b.q3 + a.q1 * b.q2 - a.q2 * b.q1 + a.q3 * b.q0,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 + r.q0, self.q1 + r.q1, self.q2 + r.q2, self.q3 + r.q3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.q0 - r.q0, self.q1 - r.q1, self.q2 - r.q2, self.q3 - r.q3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.q0, -self.q1, -self.q2, -self.q3)
    }
}
