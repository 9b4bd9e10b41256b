//! Complex numbers and 2x2 matrices with a separately carried exponent, so
//! that Jost data stays finite for large `|z|` and deep non-physical sheets.

use std::ops::Mul;

use num_complex::Complex64;

/// `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: Complex64::new(0.0, 0.0),
        log_scale: 0.0,
    };

    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        Self {
            mantissa,
            log_scale,
        }
        .normalized()
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self::new(c, 0.0)
    }

    /// `exp(w)` without overflow.
    pub fn exp(w: Complex64) -> Self {
        Self {
            mantissa: Complex64::from_polar(1.0, w.im),
            log_scale: w.re,
        }
    }

    fn normalized(self) -> Self {
        let m = self.mantissa.norm();
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        let e = m.ln();
        Self {
            mantissa: self.mantissa / m,
            log_scale: self.log_scale + e,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    /// `ln |x|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Principal complex logarithm.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.ln_abs(), self.arg())
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self::new(self.mantissa * c, self.log_scale)
    }

    pub fn div(self, other: Scaled) -> Self {
        Self::new(self.mantissa / other.mantissa, self.log_scale - other.log_scale)
    }

    pub fn recip(self) -> Self {
        Self::new(1.0 / self.mantissa, -self.log_scale)
    }

    pub fn add(self, other: Scaled) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let s = self.log_scale.max(other.log_scale);
        let m = self.mantissa * (self.log_scale - s).exp() + other.mantissa * (other.log_scale - s).exp();
        Self::new(m, s)
    }

    pub fn sub(self, other: Scaled) -> Self {
        self.add(other.scale(Complex64::new(-1.0, 0.0)))
    }
}

impl Mul for Scaled {
    type Output = Scaled;

    fn mul(self, rhs: Scaled) -> Scaled {
        Scaled::new(self.mantissa * rhs.mantissa, self.log_scale + rhs.log_scale)
    }
}

/// A pair `(u, u')` sharing one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledVec2 {
    pub v: [Complex64; 2],
    pub log_scale: f64,
}

impl ScaledVec2 {
    pub fn new(v: [Complex64; 2], log_scale: f64) -> Self {
        Self { v, log_scale }.normalized()
    }

    fn normalized(self) -> Self {
        let m = self.v[0].norm().max(self.v[1].norm());
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        Self {
            v: [self.v[0] / m, self.v[1] / m],
            log_scale: self.log_scale + m.ln(),
        }
    }

    pub fn value(&self) -> Scaled {
        Scaled::new(self.v[0], self.log_scale)
    }

    pub fn derivative(&self) -> Scaled {
        Scaled::new(self.v[1], self.log_scale)
    }

    /// Wronskian `u1 u2' - u1' u2`.
    pub fn wronskian(&self, other: &ScaledVec2) -> Scaled {
        Scaled::new(
            self.v[0] * other.v[1] - self.v[1] * other.v[0],
            self.log_scale + other.log_scale,
        )
    }

    /// Relative size of the Wronskian against its two products; small values
    /// flag cancellation, i.e. near-linear dependence.
    pub fn wronskian_cancellation(&self, other: &ScaledVec2) -> f64 {
        let w = (self.v[0] * other.v[1] - self.v[1] * other.v[0]).norm();
        let m = (self.v[0] * other.v[1]).norm() + (self.v[1] * other.v[0]).norm();
        if m == 0.0 {
            0.0
        } else {
            w / m
        }
    }
}

/// Row-major 2x2 matrix sharing one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMat2 {
    pub m: [[Complex64; 2]; 2],
    pub log_scale: f64,
}

impl ScaledMat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
            log_scale: 0.0,
        }
    }

    pub fn new(m: [[Complex64; 2]; 2], log_scale: f64) -> Self {
        Self { m, log_scale }.normalized()
    }

    fn normalized(self) -> Self {
        let mx = self
            .m
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if mx == 0.0 || !mx.is_finite() {
            return self;
        }
        let mut m = self.m;
        for row in m.iter_mut() {
            for c in row.iter_mut() {
                *c /= mx;
            }
        }
        Self {
            m,
            log_scale: self.log_scale + mx.ln(),
        }
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &ScaledMat2) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        Self::new(
            [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            self.log_scale + rhs.log_scale,
        )
    }

    pub fn apply(&self, x: &ScaledVec2) -> ScaledVec2 {
        let a = &self.m;
        ScaledVec2::new(
            [
                a[0][0] * x.v[0] + a[0][1] * x.v[1],
                a[1][0] * x.v[0] + a[1][1] * x.v[1],
            ],
            self.log_scale + x.log_scale,
        )
    }

    /// Inverse of a unimodular matrix: the adjugate. The determinant is not
    /// recomputed; for strongly growing propagators it is a cancellation of
    /// huge terms and carries no information.
    pub fn inverse_unimodular(&self) -> Self {
        let a = &self.m;
        Self::new([[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]], self.log_scale)
    }

    pub fn det(&self) -> Scaled {
        let a = &self.m;
        Scaled::new(a[0][0] * a[1][1] - a[0][1] * a[1][0], 2.0 * self.log_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_does_not_overflow() {
        let big = Scaled::exp(Complex64::new(2000.0, 1.0));
        let small = Scaled::exp(Complex64::new(-1990.0, -1.0));
        let p = big * small;
        assert!((p.to_complex() - Complex64::new(10f64.exp(), 0.0)).norm() < 1e-9 * 10f64.exp());
        assert!((big.ln_abs() - 2000.0).abs() < 1e-12);
    }

    #[test]
    fn add_aligns_scales() {
        let a = Scaled::new(Complex64::new(1.0, 0.0), 3.0);
        let b = Scaled::new(Complex64::new(2.0, 0.0), 1.0);
        let c = a.add(b).to_complex();
        assert!((c.re - (3f64.exp() + 2.0 * 1f64.exp())).abs() < 1e-12);
        assert_eq!(a.sub(a).to_complex(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn inverse_of_rotation() {
        let (s, c) = 0.3f64.sin_cos();
        let m = ScaledMat2::new(
            [
                [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
            ],
            0.0,
        );
        let p = m.compose(&m.inverse_unimodular());
        let id = p.m;
        let f = p.log_scale.exp();
        assert!((id[0][0] * f - 1.0).norm() < 1e-14);
        assert!((id[0][1] * f).norm() < 1e-14);
    }
}
