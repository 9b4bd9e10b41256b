//! Jost solutions, the Jost Wronskian `D` and the scattering coefficients
//! `T-`, `T+`, `R-`, `R+` at any point of the surface.
//!
//! The Jost solutions are `f-(x) = exp(-i r- x)` left of the potential's
//! support and `f+(x) = exp(i r+ x)` right of it, with `r+-` taken on the
//! sheet of the evaluation point. With `D = W[f-, f+]` the generalized
//! eigenfunctions are `phi+ = T- f-` and `phi- = T+ f+`, which gives
//!
//! ```text
//! T- = 2i r+ / D,   T+ = 2i r- / D,
//! R- = W[exp(-i r+ x), f-] / D   (at the right edge),
//! R+ = W[f+, exp(i r- x)] / D    (at the left edge).
//! ```
//!
//! All four share the denominator `D`, so the poles on every sheet are the
//! zeros of `D` evaluated with that sheet's root signs.

mod identities;
pub mod ode;
pub mod transfer;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use identities::{check_identities, IdentityReport, IdentityResidual, IDENTITY_LABELS};

use crate::potential::{PiecewiseConstantPotential, Potential, SmoothPerturbationPotential};
use crate::riemann::{StepLevels, SurfaceError, SurfacePoint};
use crate::scaled::{Scaled, ScaledMat2, ScaledVec2};
use ode::{OdeEngine, OdeSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("D vanishes at z = {z}: the coefficients have a pole here")]
    PoleAtPoint { z: Complex64 },
    #[error("z = {z} projects to a branch point; the exponential basis degenerates")]
    BranchPoint { z: Complex64 },
    #[error("ODE step size underflow at x = {x} (step {step:e})")]
    StepUnderflow { x: f64, step: f64 },
}

/// Something that can propagate `(u, u')` across the non-constant part of a
/// steplike potential.
pub trait JostEngine: Send + Sync {
    fn levels(&self) -> StepLevels;
    /// Left edge `x_0`: the potential is `V-` to the left of it.
    fn left_edge(&self) -> f64;
    /// Right edge `x_n`: the potential is `V+` to the right of it.
    fn right_edge(&self) -> f64;
    /// Bounds on the values taken by the potential (tails included).
    fn value_range(&self) -> (f64, f64);
    /// Propagator of `(u, u')` from `from` to `to`, both inside `[x_0, x_n]`.
    fn transfer_between(&self, z: Complex64, from: f64, to: f64) -> Result<ScaledMat2, ScatteringError>;

    fn transfer(&self, z: Complex64) -> Result<ScaledMat2, ScatteringError> {
        self.transfer_between(z, self.left_edge(), self.right_edge())
    }
}

/// Either engine, selected by potential kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Engine {
    Exact(PiecewiseConstantPotential),
    Ode(OdeEngine),
}

impl Engine {
    pub fn new(potential: &Potential, ode: OdeSettings) -> Self {
        match potential {
            Potential::Piecewise(p) => Engine::Exact(p.clone()),
            Potential::Smooth(p) => Engine::Ode(OdeEngine::new(p.clone(), ode)),
        }
    }

    pub fn exact(potential: PiecewiseConstantPotential) -> Self {
        Engine::Exact(potential)
    }

    pub fn ode(potential: SmoothPerturbationPotential, settings: OdeSettings) -> Self {
        Engine::Ode(OdeEngine::new(potential, settings))
    }
}

impl JostEngine for Engine {
    fn levels(&self) -> StepLevels {
        match self {
            Engine::Exact(p) => JostEngine::levels(p),
            Engine::Ode(e) => e.levels(),
        }
    }

    fn left_edge(&self) -> f64 {
        match self {
            Engine::Exact(p) => JostEngine::left_edge(p),
            Engine::Ode(e) => e.left_edge(),
        }
    }

    fn right_edge(&self) -> f64 {
        match self {
            Engine::Exact(p) => JostEngine::right_edge(p),
            Engine::Ode(e) => e.right_edge(),
        }
    }

    fn value_range(&self) -> (f64, f64) {
        match self {
            Engine::Exact(p) => p.value_range(),
            Engine::Ode(e) => e.value_range(),
        }
    }

    fn transfer_between(&self, z: Complex64, from: f64, to: f64) -> Result<ScaledMat2, ScatteringError> {
        match self {
            Engine::Exact(p) => p.transfer_between(z, from, to),
            Engine::Ode(e) => e.transfer_between(z, from, to),
        }
    }
}

/// `(exp(c x), c exp(c x))`.
pub(crate) fn exp_pair(c: Complex64, x: f64) -> ScaledVec2 {
    let e = c * x;
    let phase = Complex64::from_polar(1.0, e.im);
    ScaledVec2::new([phase, c * phase], e.re)
}

/// Values and derivatives of both Jost solutions at the two tail edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostPair {
    pub point: SurfacePoint,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    pub x_left: f64,
    pub x_right: f64,
    /// `f-` at `x_left` (its exact tail seed).
    pub f_minus_left: ScaledVec2,
    /// `f-` propagated to `x_right`.
    pub f_minus_right: ScaledVec2,
    /// `f+` propagated back to `x_left`.
    pub f_plus_left: ScaledVec2,
    /// `f+` at `x_right` (its exact tail seed).
    pub f_plus_right: ScaledVec2,
}

impl JostPair {
    /// `D = W[f-, f+]`, evaluated at the left edge.
    pub fn wronskian(&self) -> Scaled {
        self.f_minus_left.wronskian(&self.f_plus_left)
    }

    /// The same Wronskian evaluated at the right edge.
    pub fn wronskian_right(&self) -> Scaled {
        self.f_minus_right.wronskian(&self.f_plus_right)
    }
}

/// Jost solutions at `p` for any engine.
pub fn jost_pair<E: JostEngine + ?Sized>(engine: &E, p: &SurfacePoint) -> Result<JostPair, ScatteringError> {
    let levels = engine.levels();
    let (r_plus, r_minus) = p.roots(&levels)?;
    let (x_left, x_right) = (engine.left_edge(), engine.right_edge());
    let m = engine.transfer(p.z)?;
    let i = Complex64::i();
    let f_minus_left = exp_pair(-i * r_minus, x_left);
    let f_plus_right = exp_pair(i * r_plus, x_right);
    Ok(JostPair {
        point: *p,
        r_plus,
        r_minus,
        x_left,
        x_right,
        f_minus_left,
        f_minus_right: m.apply(&f_minus_left),
        f_plus_left: m.inverse_unimodular().apply(&f_plus_right),
        f_plus_right,
    })
}

/// Exact layer propagation for a staircase.
pub fn transfer_matrix_jost(v: &PiecewiseConstantPotential, p: &SurfacePoint) -> Result<JostPair, ScatteringError> {
    jost_pair(v, p)
}

/// Adaptive integration for a continuous perturbation.
pub fn ode_jost(v: &SmoothPerturbationPotential, p: &SurfacePoint, tol: f64) -> Result<JostPair, ScatteringError> {
    jost_pair(&OdeEngine::new(v.clone(), OdeSettings::with_tol(tol)), p)
}

/// The Jost Wronskian `D` at `p`, in scaled form. Never fails on a pole.
pub fn jost_wronskian<E: JostEngine + ?Sized>(engine: &E, p: &SurfacePoint) -> Result<Scaled, ScatteringError> {
    Ok(jost_pair(engine, p)?.wronskian())
}

/// Coefficients in scaled form, usable far out where plain `f64` overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledCoefficients {
    pub point: SurfacePoint,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    pub t_minus: Scaled,
    pub t_plus: Scaled,
    pub r_minus_coeff: Scaled,
    pub r_plus_coeff: Scaled,
    pub wronskian_d: Scaled,
}

/// Scattering data at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringCoefficients {
    pub point: SurfacePoint,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    pub t_minus: Complex64,
    pub t_plus: Complex64,
    pub r_minus_coeff: Complex64,
    pub r_plus_coeff: Complex64,
    /// `D = W[f-, f+]`.
    pub wronskian_d: Complex64,
    /// `W[phi-, phi+] = 4 r+ r- / D`, the normalization used for the pure-step
    /// reference (it equals `-4i r+ r- exp(i beta (r- - r+)) / (r+ + r-)` there).
    pub phi_wronskian: Complex64,
}

impl ScaledCoefficients {
    pub fn to_plain(&self) -> ScatteringCoefficients {
        let d = self.wronskian_d;
        let phi_w = Scaled::from_complex(4.0 * self.r_plus * self.r_minus).div(d);
        ScatteringCoefficients {
            point: self.point,
            r_plus: self.r_plus,
            r_minus: self.r_minus,
            t_minus: self.t_minus.to_complex(),
            t_plus: self.t_plus.to_complex(),
            r_minus_coeff: self.r_minus_coeff.to_complex(),
            r_plus_coeff: self.r_plus_coeff.to_complex(),
            wronskian_d: d.to_complex(),
            phi_wronskian: phi_w.to_complex(),
        }
    }
}

/// Relative size of `D` below which it is treated as zero.
pub const POLE_THRESHOLD: f64 = 1e-13;

/// Coefficients from a Jost pair.
pub fn coefficients_from_jost(pair: &JostPair, levels: &StepLevels) -> Result<ScaledCoefficients, ScatteringError> {
    let p = pair.point;
    if p.is_branch_point(levels) || pair.r_plus == Complex64::new(0.0, 0.0) || pair.r_minus == Complex64::new(0.0, 0.0) {
        return Err(ScatteringError::BranchPoint { z: p.z });
    }
    let d = pair.wronskian();
    if d.is_zero() || pair.f_minus_left.wronskian_cancellation(&pair.f_plus_left) < POLE_THRESHOLD {
        return Err(ScatteringError::PoleAtPoint { z: p.z });
    }
    let i = Complex64::i();
    let (rp, rm) = (pair.r_plus, pair.r_minus);
    let incoming_right = exp_pair(-i * rp, pair.x_right);
    let outgoing_left = exp_pair(i * rm, pair.x_left);
    Ok(ScaledCoefficients {
        point: p,
        r_plus: rp,
        r_minus: rm,
        t_minus: Scaled::from_complex(2.0 * i * rp).div(d),
        t_plus: Scaled::from_complex(2.0 * i * rm).div(d),
        r_minus_coeff: incoming_right.wronskian(&pair.f_minus_right).div(d),
        r_plus_coeff: pair.f_plus_left.wronskian(&outgoing_left).div(d),
        wronskian_d: d,
    })
}

pub fn scattering_coefficients_scaled<E: JostEngine + ?Sized>(
    engine: &E,
    p: &SurfacePoint,
) -> Result<ScaledCoefficients, ScatteringError> {
    let pair = jost_pair(engine, p)?;
    coefficients_from_jost(&pair, &engine.levels())
}

/// `T-`, `T+`, `R-`, `R+` and `D` at `p`.
pub fn scattering_coefficients<E: JostEngine + ?Sized>(
    engine: &E,
    p: &SurfacePoint,
) -> Result<ScatteringCoefficients, ScatteringError> {
    Ok(scattering_coefficients_scaled(engine, p)?.to_plain())
}

/// Closed-form coefficients of the pure step `V-` for `x < beta`, `V+` for
/// `x > beta`.
pub fn step_reference(beta: f64, p: &SurfacePoint, levels: &StepLevels) -> Result<ScatteringCoefficients, ScatteringError> {
    let (rp, rm) = p.roots(levels)?;
    if rp == Complex64::new(0.0, 0.0) || rm == Complex64::new(0.0, 0.0) {
        return Err(ScatteringError::BranchPoint { z: p.z });
    }
    let sum = rp + rm;
    // r+^2 - r-^2 = V- - V+ != 0 rules out r+ = -r-.
    assert!(sum != Complex64::new(0.0, 0.0), "r+ + r- vanished with V+ != V-");
    let i = Complex64::i();
    let shift = (i * beta * (rm - rp)).exp();
    let d = i * sum * (i * beta * (rp - rm)).exp();
    Ok(ScatteringCoefficients {
        point: *p,
        r_plus: rp,
        r_minus: rm,
        t_minus: 2.0 * rp / sum * shift,
        t_plus: 2.0 * rm / sum * shift,
        r_minus_coeff: (rp - rm) / sum * (-2.0 * i * rp * beta).exp(),
        r_plus_coeff: (rm - rp) / sum * (2.0 * i * rm * beta).exp(),
        wronskian_d: d,
        phi_wronskian: -4.0 * i * rp * rm / sum * shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::{SheetSignature, Sign};

    fn levels() -> StepLevels {
        StepLevels::new(0.0, 1.0).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn step_reference_above_both_thresholds() {
        let l = levels();
        let p = SurfacePoint::with_side(Complex64::new(2.0, 0.0), SheetSignature::PHYSICAL, Sign::Plus, &l);
        let c = step_reference(0.0, &p, &l).unwrap();
        let s2 = 2f64.sqrt();
        assert!(close(c.t_minus, Complex64::new(2.0 * s2 / (s2 + 1.0), 0.0), 1e-15));
        assert!((c.t_minus.re - 1.171573).abs() < 1e-6);
        assert!((c.t_plus.re - 0.828427).abs() < 1e-6);
        assert!((c.r_minus_coeff.re - 0.171573).abs() < 1e-6);
        assert!((c.r_plus_coeff.re + 0.171573).abs() < 1e-6);
        assert!(close(c.r_minus * c.t_minus, c.r_plus * c.t_plus, 1e-15));
        assert!(((c.r_minus * c.t_minus).re - 1.171573).abs() < 1e-6);
    }

    #[test]
    fn total_reflection_below_the_high_side() {
        let l = levels();
        let p = SurfacePoint::with_side(Complex64::new(0.5, 0.0), SheetSignature::PHYSICAL, Sign::Plus, &l);
        let c = step_reference(0.0, &p, &l).unwrap();
        assert!(close(c.r_minus_coeff, -Complex64::i(), 1e-15));
        assert!((c.r_minus_coeff.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_wronskian_matches_reference_normalization() {
        let l = levels();
        let v = PiecewiseConstantPotential::step(l, 0.4);
        for z in [Complex64::new(3.0, 1.0), Complex64::new(-2.0, -0.5)] {
            for sheet in SheetSignature::ALL {
                let p = SurfacePoint::with_side(z, sheet, Sign::Plus, &l);
                let a = scattering_coefficients(&v, &p).unwrap();
                let b = step_reference(0.4, &p, &l).unwrap();
                assert!(close(a.phi_wronskian, b.phi_wronskian, 1e-13));
                assert!(close(a.wronskian_d, b.wronskian_d, 1e-13));
            }
        }
    }

    #[test]
    fn branch_points_are_flagged() {
        let l = levels();
        let v = PiecewiseConstantPotential::step(l, 0.0);
        for z in [0.0, 1.0] {
            let p = SurfacePoint::with_side(Complex64::new(z, 0.0), SheetSignature::PHYSICAL, Sign::Plus, &l);
            assert!(matches!(
                scattering_coefficients(&v, &p),
                Err(ScatteringError::BranchPoint { .. })
            ));
            // D itself is still available.
            assert!(jost_wronskian(&v, &p).is_ok());
        }
    }

    #[test]
    fn wronskian_is_the_same_at_both_edges() {
        let l = StepLevels::new(0.0, 4.0).unwrap();
        let v = PiecewiseConstantPotential::new(l, vec![0.0, 0.3, 1.0], vec![8.0, -2.0]).unwrap();
        let p = SurfacePoint::with_side(Complex64::new(7.0, -3.0), SheetSignature::MINUS_PLUS, Sign::Plus, &l);
        let pair = transfer_matrix_jost(&v, &p).unwrap();
        let a = pair.wronskian().to_complex();
        let b = pair.wronskian_right().to_complex();
        assert!(close(a, b, 1e-12), "{a} vs {b}");
    }
}
