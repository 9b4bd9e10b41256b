//! The four-sheeted surface on which `(z - V+)^{1/2}` and `(z - V-)^{1/2}` are
//! single valued.
//!
//! A point is stored as its projection `z` together with the signs of
//! `Im r+` and `Im r-`. Each sign multiplies the root of `z - V` that lies in the
//! upper half-plane, so every sheet is directly addressable and the deck
//! transformations are sign flips. Points on the cut `[V+, inf)` carry an
//! explicit side tag selecting the boundary value from above or below.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("step levels must satisfy v_plus < v_minus (got v_plus = {v_plus}, v_minus = {v_minus})")]
    InvalidLevels { v_plus: f64, v_minus: f64 },
    #[error("point z = {z} lies on a branch cut and needs a boundary side")]
    MissingBoundarySide { z: Complex64 },
    #[error("point z = {z} is off the cuts; a boundary side is only meaningful on a cut")]
    SpuriousBoundarySide { z: Complex64 },
    #[error("k = {k} has negative imaginary part")]
    LowerHalfK { k: Complex64 },
    #[error("unknown sheet name {0:?} (expected pp, pm, mp or mm)")]
    UnknownSheet(String),
}

/// The two asymptotic levels of a steplike potential, `V-` on the left and
/// `V+` on the right. Only `v_plus < v_minus` is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLevels {
    v_plus: f64,
    v_minus: f64,
}

impl StepLevels {
    pub fn new(v_plus: f64, v_minus: f64) -> Result<Self, SurfaceError> {
        if !(v_plus.is_finite() && v_minus.is_finite()) || v_plus >= v_minus {
            return Err(SurfaceError::InvalidLevels { v_plus, v_minus });
        }
        Ok(Self { v_plus, v_minus })
    }

    pub fn v_plus(&self) -> f64 {
        self.v_plus
    }

    pub fn v_minus(&self) -> f64 {
        self.v_minus
    }

    /// `V- - V+ > 0`.
    pub fn gap(&self) -> f64 {
        self.v_minus - self.v_plus
    }

    /// True when `z` lies on the cut `[V+, inf)` (which contains `[V-, inf)`).
    pub fn on_cut(&self, z: Complex64) -> bool {
        z.im == 0.0 && z.re >= self.v_plus
    }

    pub fn is_branch_point(&self, z: Complex64) -> bool {
        z.im == 0.0 && (z.re == self.v_plus || z.re == self.v_minus)
    }
}

/// A sign, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Signs of `(Im r+, Im r-)` selecting one of the four sheets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SheetSignature {
    pub s_plus: Sign,
    pub s_minus: Sign,
}

impl SheetSignature {
    pub const PHYSICAL: SheetSignature = SheetSignature::new(Sign::Plus, Sign::Plus);
    pub const PLUS_MINUS: SheetSignature = SheetSignature::new(Sign::Plus, Sign::Minus);
    pub const MINUS_PLUS: SheetSignature = SheetSignature::new(Sign::Minus, Sign::Plus);
    pub const MINUS_MINUS: SheetSignature = SheetSignature::new(Sign::Minus, Sign::Minus);
    pub const ALL: [SheetSignature; 4] = [
        Self::PHYSICAL,
        Self::PLUS_MINUS,
        Self::MINUS_PLUS,
        Self::MINUS_MINUS,
    ];

    pub const fn new(s_plus: Sign, s_minus: Sign) -> Self {
        Self { s_plus, s_minus }
    }

    pub fn is_physical(&self) -> bool {
        *self == Self::PHYSICAL
    }

    /// Two-letter name: first letter is the sign of `Im r+`, second of `Im r-`.
    pub fn name(&self) -> &'static str {
        match (self.s_plus, self.s_minus) {
            (Sign::Plus, Sign::Plus) => "pp",
            (Sign::Plus, Sign::Minus) => "pm",
            (Sign::Minus, Sign::Plus) => "mp",
            (Sign::Minus, Sign::Minus) => "mm",
        }
    }

    pub fn parse(name: &str) -> Result<Self, SurfaceError> {
        match name {
            "pp" => Ok(Self::PHYSICAL),
            "pm" => Ok(Self::PLUS_MINUS),
            "mp" => Ok(Self::MINUS_PLUS),
            "mm" => Ok(Self::MINUS_MINUS),
            other => Err(SurfaceError::UnknownSheet(other.to_string())),
        }
    }
}

impl fmt::Display for SheetSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The square root with non-negative imaginary part. On `[0, inf)` it returns
/// the limit from the upper half-plane, i.e. the non-negative real root.
pub fn sqrt_upper(w: Complex64) -> Complex64 {
    let s = w.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

/// A point of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub z: Complex64,
    pub sheet: SheetSignature,
    /// Which half-plane limit defines the value on a cut. Set iff `z` lies on
    /// `[V+, inf)`.
    pub boundary_side: Option<Sign>,
}

impl SurfacePoint {
    /// Validating constructor.
    pub fn new(
        z: Complex64,
        sheet: SheetSignature,
        boundary_side: Option<Sign>,
        levels: &StepLevels,
    ) -> Result<Self, SurfaceError> {
        match (levels.on_cut(z), boundary_side) {
            (true, None) => Err(SurfaceError::MissingBoundarySide { z }),
            (false, Some(_)) => Err(SurfaceError::SpuriousBoundarySide { z }),
            _ => Ok(Self {
                z,
                sheet,
                boundary_side,
            }),
        }
    }

    /// Off-cut point, or the boundary value from the half-plane `side` when `z`
    /// is on the cut. Never fails.
    pub fn with_side(z: Complex64, sheet: SheetSignature, side: Sign, levels: &StepLevels) -> Self {
        let boundary_side = if levels.on_cut(z) { Some(side) } else { None };
        Self {
            z,
            sheet,
            boundary_side,
        }
    }

    pub fn is_branch_point(&self, levels: &StepLevels) -> bool {
        levels.is_branch_point(self.z)
    }

    fn root(&self, v: f64, sign: Sign) -> Result<Complex64, SurfaceError> {
        let w = self.z - v;
        let base = if w.im == 0.0 && w.re > 0.0 {
            let side = self
                .boundary_side
                .ok_or(SurfaceError::MissingBoundarySide { z: self.z })?;
            Complex64::new(side.value() * w.re.sqrt(), 0.0)
        } else {
            sqrt_upper(w)
        };
        Ok(base * sign.value())
    }

    pub fn r_plus(&self, levels: &StepLevels) -> Result<Complex64, SurfaceError> {
        self.root(levels.v_plus, self.sheet.s_plus)
    }

    pub fn r_minus(&self, levels: &StepLevels) -> Result<Complex64, SurfaceError> {
        self.root(levels.v_minus, self.sheet.s_minus)
    }

    /// Both roots at once.
    pub fn roots(&self, levels: &StepLevels) -> Result<(Complex64, Complex64), SurfaceError> {
        Ok((self.r_plus(levels)?, self.r_minus(levels)?))
    }

    /// Flips `r+`.
    pub fn omega_plus(&self) -> Self {
        Self {
            sheet: SheetSignature::new(self.sheet.s_plus.flip(), self.sheet.s_minus),
            ..*self
        }
    }

    /// Flips `r-`.
    pub fn omega_minus(&self) -> Self {
        Self {
            sheet: SheetSignature::new(self.sheet.s_plus, self.sheet.s_minus.flip()),
            ..*self
        }
    }

    /// Flips both roots.
    pub fn omega_pm(&self) -> Self {
        self.omega_plus().omega_minus()
    }

    /// The mirror point `(conj z, same signature, opposite side)`. For a real
    /// potential the Jost solutions there are the complex conjugates.
    pub fn mirror(&self) -> Self {
        Self {
            z: self.z.conj(),
            sheet: self.sheet,
            boundary_side: self.boundary_side.map(Sign::flip),
        }
    }

    /// The physical-sheet point with `r+ = k`. The projection is `k^2 + V+`;
    /// real `k` gives the boundary value approached from `Im k > 0`.
    pub fn from_k(k: Complex64, levels: &StepLevels) -> Result<Self, SurfaceError> {
        if k.im < 0.0 {
            return Err(SurfaceError::LowerHalfK { k });
        }
        let z = k * k + levels.v_plus;
        if k.im > 0.0 {
            // z can still land on the real axis below V+ (k on the imaginary axis).
            let z = if k.re == 0.0 {
                Complex64::new(z.re, 0.0)
            } else {
                z
            };
            return Ok(Self::with_side(z, SheetSignature::PHYSICAL, Sign::Plus, levels));
        }
        // Real k: boundary value. k > 0 is the limit from above (r+ = +sqrt),
        // k < 0 the limit from below.
        let z = Complex64::new(z.re, 0.0);
        let side = if k.re >= 0.0 { Sign::Plus } else { Sign::Minus };
        Ok(Self::with_side(z, SheetSignature::PHYSICAL, side, levels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn levels() -> StepLevels {
        StepLevels::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn levels_reject_wrong_order() {
        assert!(StepLevels::new(1.0, 0.0).is_err());
        assert!(StepLevels::new(1.0, 1.0).is_err());
        assert!(StepLevels::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn roots_above_both_thresholds() {
        let l = levels();
        let p = SurfacePoint::new(
            Complex64::new(2.0, 0.0),
            SheetSignature::PHYSICAL,
            Some(Sign::Plus),
            &l,
        )
        .unwrap();
        let (rp, rm) = p.roots(&l).unwrap();
        assert_relative_eq!(rp.re, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(rp.im, 0.0);
        assert_relative_eq!(rm.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn roots_between_thresholds() {
        let l = levels();
        let p = SurfacePoint::new(
            Complex64::new(0.5, 0.0),
            SheetSignature::PHYSICAL,
            Some(Sign::Plus),
            &l,
        )
        .unwrap();
        let (rp, rm) = p.roots(&l).unwrap();
        assert_relative_eq!(rp.re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(rm.re, 0.0);
        assert_relative_eq!(rm.im, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn cut_points_need_a_side() {
        let l = levels();
        let z = Complex64::new(3.0, 0.0);
        assert_eq!(
            SurfacePoint::new(z, SheetSignature::PHYSICAL, None, &l),
            Err(SurfaceError::MissingBoundarySide { z })
        );
        let off = Complex64::new(-3.0, 0.0);
        assert!(SurfacePoint::new(off, SheetSignature::PHYSICAL, Some(Sign::Plus), &l).is_err());
        let p = SurfacePoint {
            z,
            sheet: SheetSignature::PHYSICAL,
            boundary_side: None,
        };
        assert!(p.r_plus(&l).is_err());
    }

    #[test]
    fn lower_side_negates_the_boundary_value() {
        let l = levels();
        let z = Complex64::new(4.0, 0.0);
        let up = SurfacePoint::with_side(z, SheetSignature::PHYSICAL, Sign::Plus, &l);
        let down = SurfacePoint::with_side(z, SheetSignature::PHYSICAL, Sign::Minus, &l);
        assert_eq!(up.r_plus(&l).unwrap(), -down.r_plus(&l).unwrap());
        assert_eq!(up.r_minus(&l).unwrap(), -down.r_minus(&l).unwrap());
        // Limits agree with nearby off-cut points.
        let near = SurfacePoint::with_side(z + Complex64::new(0.0, 1e-12), SheetSignature::PHYSICAL, Sign::Plus, &l);
        assert!((near.r_plus(&l).unwrap() - up.r_plus(&l).unwrap()).norm() < 1e-10);
        let near = SurfacePoint::with_side(z - Complex64::new(0.0, 1e-12), SheetSignature::PHYSICAL, Sign::Plus, &l);
        assert!((near.r_plus(&l).unwrap() - down.r_plus(&l).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn omega_maps() {
        let l = levels();
        let p = SurfacePoint::with_side(Complex64::new(0.3, -2.0), SheetSignature::PLUS_MINUS, Sign::Plus, &l);
        let (rp, rm) = p.roots(&l).unwrap();
        assert_eq!(p.omega_plus().r_plus(&l).unwrap(), -rp);
        assert_eq!(p.omega_plus().r_minus(&l).unwrap(), rm);
        assert_eq!(p.omega_minus().r_minus(&l).unwrap(), -rm);
        assert_eq!(p.omega_pm().omega_pm(), p);
        assert_eq!(p.omega_plus().omega_minus(), p.omega_pm());
        assert_eq!(p.omega_minus().omega_plus(), p.omega_pm());
        assert_eq!(p.omega_plus().z, p.z);
    }

    #[test]
    fn from_k_examples() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let p = SurfacePoint::from_k(Complex64::i(), &l).unwrap();
        assert_eq!(p.z, Complex64::new(-1.0, 0.0));
        assert!(p.sheet.is_physical());
        assert_eq!(p.boundary_side, None);

        let p = SurfacePoint::from_k(Complex64::new(3.0, 0.0), &l).unwrap();
        assert_eq!(p.z, Complex64::new(9.0, 0.0));
        let rm = p.r_minus(&l).unwrap();
        assert_relative_eq!(rm.re, 8f64.sqrt(), epsilon = 1e-14);
        assert_eq!(p.r_plus(&l).unwrap(), Complex64::new(3.0, 0.0));

        let k = Complex64::new(-2.0, 0.0);
        let p = SurfacePoint::from_k(k, &l).unwrap();
        assert_eq!(p.r_plus(&l).unwrap(), k);

        assert!(SurfacePoint::from_k(Complex64::new(1.0, -0.1), &l).is_err());
    }

    #[test]
    fn sheet_names_round_trip() {
        for s in SheetSignature::ALL {
            assert_eq!(SheetSignature::parse(s.name()).unwrap(), s);
        }
        assert!(SheetSignature::parse("xx").is_err());
    }
}
