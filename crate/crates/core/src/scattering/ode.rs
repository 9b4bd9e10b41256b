//! Adaptive integrator for continuous perturbations of a step.
//!
//! Each step freezes the potential at the step midpoint and applies the exact
//! constant-coefficient propagator (the second-order exponential midpoint
//! rule). A full step is compared with two half steps; the difference is the
//! local error estimate and drives both step acceptance and a Richardson
//! correction, which lifts the accepted update to fourth order. The frozen
//! propagator is exact for any constant potential, so the step size is set by
//! the smoothness of `p` rather than by the oscillation frequency `sqrt(z)`.

use num_complex::Complex64;

use crate::potential::SmoothPerturbationPotential;
use crate::riemann::StepLevels;
use crate::scaled::ScaledMat2;

use super::transfer::layer_matrix;
use super::{JostEngine, ScatteringError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSettings {
    /// Local error tolerance, relative to the size of the propagator.
    pub tol: f64,
    /// Smallest admissible step.
    pub min_step: f64,
    pub max_steps: usize,
    /// Use a uniform mesh of at most this step instead of adaptive steps.
    /// The mesh then does not depend on `z`, so `D` stays analytic in `z`.
    pub fixed_step: Option<f64>,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            min_step: 1e-12,
            max_steps: 1_000_000,
            fixed_step: None,
        }
    }
}

impl OdeSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn fixed(step: f64) -> Self {
        Self {
            fixed_step: Some(step),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeEngine {
    potential: SmoothPerturbationPotential,
    settings: OdeSettings,
}

impl OdeEngine {
    pub fn new(potential: SmoothPerturbationPotential, settings: OdeSettings) -> Self {
        Self { potential, settings }
    }

    pub fn potential(&self) -> &SmoothPerturbationPotential {
        &self.potential
    }

    pub fn settings(&self) -> OdeSettings {
        self.settings
    }

    /// Propagator across `[a, b]` on which the profile is smooth.
    fn integrate_smooth(&self, z: Complex64, a: f64, b: f64, m: ScaledMat2) -> Result<ScaledMat2, ScatteringError> {
        let tol = self.settings.tol;
        let v = |x: f64| self.potential.value_at(x);
        let mut m = m;
        let mut x = a;
        let span = b - a;
        if span <= 0.0 {
            return Ok(m);
        }
        // Constant pieces need a single exact step.
        if self.constant_on(a, b) {
            return Ok(layer_matrix(z, v(0.5 * (a + b)), span).compose(&m));
        }
        if let Some(hf) = self.settings.fixed_step {
            let n = (span / hf).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for i in 0..n {
                let x = a + h * i as f64;
                let full = layer_matrix(z, v(x + 0.5 * h), h);
                let first = layer_matrix(z, v(x + 0.25 * h), 0.5 * h);
                let second = layer_matrix(z, v(x + 0.75 * h), 0.5 * h);
                m = richardson(&second.compose(&first), &full).0.compose(&m);
            }
            return Ok(m);
        }
        let mut h = (span / 8.0).min(0.05);
        let mut steps = 0usize;
        while x < b {
            steps += 1;
            if steps > self.settings.max_steps {
                return Err(ScatteringError::StepUnderflow { x, step: h });
            }
            let last = x + h >= b;
            let h_eff = if last { b - x } else { h };
            let half = 0.5 * h_eff;
            let full = layer_matrix(z, v(x + half), h_eff);
            let first = layer_matrix(z, v(x + 0.5 * half), half);
            let second = layer_matrix(z, v(x + 1.5 * half), half);
            let halves = second.compose(&first);
            let (corrected, err) = richardson(&halves, &full);
            if err <= tol {
                m = corrected.compose(&m);
                x = if last { b } else { x + h_eff };
                let grow = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(1.0 / 3.0)).min(4.0) };
                h = h_eff * grow.max(0.2);
            } else {
                h = h_eff * (0.9 * (tol / err).powf(1.0 / 3.0)).max(0.1);
                if h < self.settings.min_step {
                    return Err(ScatteringError::StepUnderflow { x, step: h });
                }
            }
        }
        Ok(m)
    }

    fn constant_on(&self, a: f64, b: f64) -> bool {
        let b1 = self.potential.half_width();
        self.potential.perturbation().is_zero() || b <= -b1 || a >= b1
    }
}

/// Richardson-corrected product `fine + (fine - coarse)/3` and the relative
/// size of the correction.
fn richardson(fine: &ScaledMat2, coarse: &ScaledMat2) -> (ScaledMat2, f64) {
    let s = fine.log_scale;
    let rel = (coarse.log_scale - s).exp();
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut err: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let d = fine.m[i][j] - coarse.m[i][j] * rel;
            out[i][j] = fine.m[i][j] + d / 3.0;
            err = err.max(d.norm() / 3.0);
        }
    }
    // fine is normalized to max-entry 1, so err is already relative.
    (ScaledMat2::new(out, s), err)
}

impl JostEngine for OdeEngine {
    fn levels(&self) -> StepLevels {
        self.potential.levels()
    }

    fn left_edge(&self) -> f64 {
        self.potential.left_edge()
    }

    fn right_edge(&self) -> f64 {
        self.potential.right_edge()
    }

    fn value_range(&self) -> (f64, f64) {
        let l = self.potential.levels();
        let (a, b) = (self.left_edge(), self.right_edge());
        let samples = (0..=400).map(|i| a + (b - a) * i as f64 / 400.0).chain(self.potential.nodes());
        samples.fold((l.v_plus(), l.v_minus()), |(lo, hi), x| {
            let v = self.potential.value_at(x);
            (lo.min(v), hi.max(v))
        })
    }

    fn transfer_between(&self, z: Complex64, from: f64, to: f64) -> Result<ScaledMat2, ScatteringError> {
        let mut cuts: Vec<f64> = self
            .potential
            .nodes()
            .into_iter()
            .filter(|x| *x > from && *x < to)
            .collect();
        cuts.insert(0, from);
        cuts.push(to);
        let mut m = ScaledMat2::identity();
        for w in cuts.windows(2) {
            m = self.integrate_smooth(z, w[0], w[1], m)?;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{BumpProfile, Perturbation};

    fn bump_engine(tol: f64) -> OdeEngine {
        let v = SmoothPerturbationPotential::new(
            StepLevels::new(0.0, 1.0).unwrap(),
            0.2,
            Perturbation::Bump {
                amplitude: 3.0,
                half_width: 1.0,
                profile: BumpProfile::Parabolic,
            },
        )
        .unwrap();
        OdeEngine::new(v, OdeSettings::with_tol(tol))
    }

    #[test]
    fn propagator_stays_unimodular() {
        let e = bump_engine(1e-10);
        for z in [Complex64::new(5.0, 1.0), Complex64::new(400.0, -30.0)] {
            let m = e.transfer(z).unwrap();
            assert!((m.det().to_complex() - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn tightening_tol_converges() {
        let z = Complex64::new(30.0, 2.0);
        let coarse = bump_engine(1e-6).transfer(z).unwrap();
        let fine = bump_engine(1e-11).transfer(z).unwrap();
        let f = (coarse.log_scale - fine.log_scale).exp();
        let diff = (coarse.m[0][1] * f - fine.m[0][1]).norm();
        assert!(diff < 1e-5, "{diff}");
    }

    #[test]
    fn tiny_min_step_is_reported() {
        let mut e = bump_engine(1e-14);
        e.settings.max_steps = 3;
        let err = e.transfer(Complex64::new(50.0, 0.0)).unwrap_err();
        assert!(matches!(err, ScatteringError::StepUnderflow { .. }));
    }
}
