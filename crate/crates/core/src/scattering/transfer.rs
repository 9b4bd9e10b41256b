//! Exact layer propagation for piecewise-constant potentials.

use num_complex::Complex64;

use crate::potential::PiecewiseConstantPotential;
use crate::riemann::StepLevels;
use crate::scaled::ScaledMat2;

use super::{JostEngine, ScatteringError};

/// Propagator of `-u'' + (v - z) u = 0` across a layer of width `d`, acting on
/// `(u, u')`. Only `kappa^2 = z - v` enters, so the result does not depend on
/// a choice of square root.
pub fn layer_matrix(z: Complex64, v: f64, d: f64) -> ScaledMat2 {
    let kappa2 = z - v;
    let w2 = kappa2 * d * d;
    if w2.norm() < 1e-6 {
        // cos w and sin(w)/w by Taylor series; |w|^8/8! < 1e-26 here.
        let c = 1.0 - w2 / 2.0 + w2 * w2 / 24.0 - w2 * w2 * w2 / 720.0;
        let sinc = 1.0 - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0;
        let s = sinc * d;
        return ScaledMat2::new([[c, s], [-kappa2 * s, c]], 0.0);
    }
    let kappa = crate::riemann::sqrt_upper(kappa2);
    let w = kappa * d;
    if w.im < 30.0 {
        let c = w.cos();
        let s = w.sin() / w * d;
        ScaledMat2::new([[c, s], [-kappa2 * s, c]], 0.0)
    } else {
        // Factor out exp(Im w): with Im w >= 0, exp(-iw) carries all the growth.
        let decay = Complex64::from_polar((-2.0 * w.im).exp(), w.re);
        let grow = Complex64::from_polar(1.0, -w.re);
        let c = (grow + decay) * 0.5;
        let s = (decay - grow) / (Complex64::i() * 2.0 * kappa);
        ScaledMat2::new([[c, s], [-kappa2 * s, c]], w.im)
    }
}

impl JostEngine for PiecewiseConstantPotential {
    fn levels(&self) -> StepLevels {
        PiecewiseConstantPotential::levels(self)
    }

    fn left_edge(&self) -> f64 {
        PiecewiseConstantPotential::left_edge(self)
    }

    fn right_edge(&self) -> f64 {
        PiecewiseConstantPotential::right_edge(self)
    }

    fn value_range(&self) -> (f64, f64) {
        let l = PiecewiseConstantPotential::levels(self);
        self.values()
            .iter()
            .fold((l.v_plus(), l.v_minus()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    fn transfer_between(&self, z: Complex64, from: f64, to: f64) -> Result<ScaledMat2, ScatteringError> {
        let xs = self.breakpoints();
        let mut m = ScaledMat2::identity();
        let mut x = from;
        while x < to {
            // Region containing (x, x + dx): next breakpoint strictly right of x.
            let idx = xs.partition_point(|&b| b <= x);
            let next = if idx < xs.len() { xs[idx].min(to) } else { to };
            let v = self.value_at(0.5 * (x + next));
            if next > x {
                m = layer_matrix(z, v, next - x).compose(&m);
            }
            x = next;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(m: &ScaledMat2) -> [[Complex64; 2]; 2] {
        let f = m.log_scale.exp();
        [[m.m[0][0] * f, m.m[0][1] * f], [m.m[1][0] * f, m.m[1][1] * f]]
    }

    #[test]
    fn layer_matrix_is_unimodular() {
        for z in [
            Complex64::new(3.0, 0.5),
            Complex64::new(-40.0, 2.0),
            Complex64::new(1e4, -300.0),
            Complex64::new(2.0 + 1e-9, 0.0),
        ] {
            let m = layer_matrix(z, 2.0, 0.7);
            let det = m.det();
            assert!((det.to_complex() - 1.0).norm() < 1e-12, "z={z}: det={:?}", det.to_complex());
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_the_switch() {
        let d = 0.5;
        let v = 1.0;
        let eps = 1e-6 / (d * d);
        for f in [0.999, 1.001] {
            let z = Complex64::new(v + f * eps, 0.0);
            let m = plain(&layer_matrix(z, v, d));
            let kappa = (z - v).sqrt();
            let c = (kappa * d).cos();
            let s = (kappa * d).sin() / kappa;
            assert!((m[0][0] - c).norm() < 1e-15);
            assert!((m[0][1] - s).norm() < 1e-15);
            assert!((m[1][0] + kappa * kappa * s).norm() < 1e-15);
        }
    }

    #[test]
    fn large_imaginary_branch_matches_direct_evaluation() {
        // Im w just above the switch, where both formulas are still finite.
        let d = 1.0;
        let z = Complex64::new(-31.0f64.powi(2), 0.0);
        let m = plain(&layer_matrix(z, 0.0, d));
        let kappa = Complex64::new(0.0, 31.0);
        let c = (kappa * d).cos();
        let s = (kappa * d).sin() / kappa;
        assert!(((m[0][0] - c) / c).norm() < 1e-13);
        assert!(((m[0][1] - s) / s).norm() < 1e-13);
    }

    #[test]
    fn zero_width_layer_is_identity() {
        let m = layer_matrix(Complex64::new(5.0, 1.0), 3.0, 0.0);
        let p = plain(&m);
        assert_eq!(p[0][0], Complex64::new(1.0, 0.0));
        assert_eq!(p[0][1], Complex64::new(0.0, 0.0));
    }
}
