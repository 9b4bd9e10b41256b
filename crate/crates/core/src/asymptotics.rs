//! Counting functions and slope fits, indicator estimates along rays in the
//! `k = r+` plane, decay checks for `T` and `R`, and Carleman partial sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::{Potential, SmoothPerturbationPotential, SupportHull};
use crate::resonances::ResonanceRecord;
use crate::riemann::{SheetSignature, Sign, StepLevels, SurfacePoint};
use crate::scaled::Scaled;
use crate::scattering::ode::{OdeEngine, OdeSettings};
use crate::scattering::{scattering_coefficients_scaled, JostEngine, ScatteringError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error("r = {r} exceeds the certified search radius {radius}")]
    BeyondCertifiedRadius { r: f64, radius: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Which resonances a counting function counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "sheet")]
pub enum SheetPredicate {
    /// Strict signs of `Im r+` and `Im r-`.
    Sheet(SheetSignature),
    /// `{Im r+ <= 0, Im r- >= 0}` together with `{Im r+ > 0, Im r- < 0}`.
    TwoSheetSum,
}

impl SheetPredicate {
    pub fn matches(&self, r_plus: Complex64, r_minus: Complex64) -> bool {
        let (a, b) = (r_plus.im, r_minus.im);
        match self {
            SheetPredicate::Sheet(s) => a * s.s_plus.value() > 0.0 && b * s.s_minus.value() > 0.0,
            SheetPredicate::TwoSheetSum => (a <= 0.0 && b >= 0.0) || (a > 0.0 && b < 0.0),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SheetPredicate::Sheet(s) => {
                let sign = |x: f64| if x > 0.0 { ">" } else { "<" };
                format!("Im r+ {} 0, Im r- {} 0", sign(s.s_plus.value()), sign(s.s_minus.value()))
            }
            SheetPredicate::TwoSheetSum => "(Im r+ <= 0, Im r- >= 0) + (Im r+ > 0, Im r- < 0)".to_string(),
        }
    }
}

/// Predicted slope `2 (b - a) / pi` for the sheet where both roots flip.
pub fn hull_slope(hull: &SupportHull) -> f64 {
    2.0 * hull.length() / PI
}

/// Predicted slopes for `V = V_beta + p`, `supp p` in `[-b1, b1]`:
/// `(2 (b1 - beta) / pi` on `(-,+)`, `2 (b1 + beta) / pi` on `(+,-)`).
pub fn perturbation_slopes(b1: f64, beta: f64) -> (f64, f64) {
    (2.0 * (b1 - beta) / PI, 2.0 * (b1 + beta) / PI)
}

/// Slope of `N(r)` predicted for `predicate`, when one is known: the hull
/// constant for `(-,-)` and the two-sheet sum, `0` on the physical sheet, and
/// the `beta`-dependent constants for a continuous perturbation of a step.
pub fn predicted_slope(potential: &Potential, predicate: SheetPredicate) -> Option<f64> {
    let hull = potential.support_hull();
    let s = match predicate {
        SheetPredicate::TwoSheetSum => return Some(hull_slope(&hull)),
        SheetPredicate::Sheet(s) => s,
    };
    match (s.s_plus, s.s_minus) {
        (Sign::Plus, Sign::Plus) => Some(0.0),
        (Sign::Minus, Sign::Minus) => Some(hull_slope(&hull)),
        _ if hull.length() == 0.0 => Some(0.0),
        (s_plus, _) => match potential {
            Potential::Smooth(v) => {
                let (mp, pm) = perturbation_slopes(v.half_width(), v.beta());
                let slope = if s_plus == Sign::Minus { mp } else { pm };
                (slope > 0.0).then_some(slope)
            }
            Potential::Piecewise(_) => None,
        },
    }
}

/// Geometric grid `r_min, r_min q, ...` up to and including `r_max`.
pub fn geometric_grid(r_min: f64, r_max: f64, ratio: f64) -> Vec<f64> {
    assert!(r_min > 0.0 && ratio > 1.0 && r_max >= r_min);
    let mut out = Vec::new();
    let mut r = r_min;
    while r < r_max * (1.0 - 1e-12) {
        out.push(r);
        r *= ratio;
    }
    out.push(r_max);
    out
}

/// Default ratio of the counting grid.
pub const GRID_RATIO: f64 = 1.15;

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub predicate: String,
    /// `None` when no asymptotic constant is known for the sheet.
    pub predicted_slope: Option<f64>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub relative_error: Option<f64>,
    /// `(r, N(r))`.
    pub samples: Vec<(f64, u64)>,
}

impl CountingReport {
    /// Slope refitted after dropping the smallest `fraction` of the samples
    /// (then again over the upper half of what is left).
    pub fn refit_without_smallest(&self, fraction: f64) -> f64 {
        let skip = (self.samples.len() as f64 * fraction).round() as usize;
        fit_upper_half(&self.samples[skip..]).0
    }
}

fn fit_upper_half(samples: &[(f64, u64)]) -> (f64, f64) {
    let start = samples.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples[start..].iter().map(|(r, n)| (*r, *n as f64)).unzip();
    linear_fit(&xs, &ys)
}

/// `N(r)`: resonances matching `predicate` with `|z| <= r^2`, counted with
/// multiplicity. The slope is fitted over the upper half of the grid.
pub fn counting_function(
    resonances: &[ResonanceRecord],
    predicate: SheetPredicate,
    r_grid: &[f64],
    certified_radius: f64,
    predicted_slope: Option<f64>,
) -> Result<CountingReport, AsymptoticsError> {
    if r_grid.len() < 2 {
        return Err(AsymptoticsError::Invalid("need at least two radii".into()));
    }
    if let Some(&r) = r_grid.iter().find(|&&r| r > certified_radius) {
        return Err(AsymptoticsError::BeyondCertifiedRadius {
            r,
            radius: certified_radius,
        });
    }
    let mut moduli: Vec<(f64, u64)> = resonances
        .iter()
        .filter(|r| predicate.matches(r.r_plus, r.r_minus))
        .map(|r| (r.z.norm(), r.multiplicity as u64))
        .collect();
    moduli.sort_by(|a, b| a.0.total_cmp(&b.0));
    let samples: Vec<(f64, u64)> = r_grid
        .iter()
        .map(|&r| {
            let n = moduli.iter().take_while(|(m, _)| *m <= r * r).map(|(_, k)| k).sum();
            (r, n)
        })
        .collect();
    let (slope, intercept) = fit_upper_half(&samples);
    let relative_error = predicted_slope.map(|p| {
        if p != 0.0 {
            (slope - p).abs() / p.abs()
        } else {
            slope.abs()
        }
    });
    Ok(CountingReport {
        predicate: predicate.describe(),
        predicted_slope,
        fitted_slope: slope,
        intercept,
        relative_error,
        samples,
    })
}

/// Functions whose growth along rays is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorTarget {
    RMinus,
    RPlus,
    TMinus,
    TPlus,
    /// `R-(z) R-(w- z)`.
    RMinusProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorEstimate {
    pub target: IndicatorTarget,
    pub phi: f64,
    pub radii: Vec<f64>,
    /// `ln |F(r e^{i phi})| / r`.
    pub samples: Vec<f64>,
    /// Median of the samples with radius in the top decade.
    pub h: f64,
    /// Radii that were moved slightly because the ray hit a pole.
    pub nudged: usize,
}

fn target_value<E: JostEngine + ?Sized>(
    engine: &E,
    target: IndicatorTarget,
    p: &SurfacePoint,
) -> Result<Scaled, ScatteringError> {
    let c = scattering_coefficients_scaled(engine, p)?;
    Ok(match target {
        IndicatorTarget::RMinus => c.r_minus_coeff,
        IndicatorTarget::RPlus => c.r_plus_coeff,
        IndicatorTarget::TMinus => c.t_minus,
        IndicatorTarget::TPlus => c.t_plus,
        IndicatorTarget::RMinusProduct => {
            let w = scattering_coefficients_scaled(engine, &p.omega_minus())?;
            c.r_minus_coeff * w.r_minus_coeff
        }
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Samples `ln |F(k)| / |k|` along `k = r e^{i phi}` on the physical sheet.
pub fn indicator_estimate<E: JostEngine + ?Sized>(
    engine: &E,
    target: IndicatorTarget,
    phi: f64,
    radii: &[f64],
) -> Result<IndicatorEstimate, AsymptoticsError> {
    if !(phi > 0.0 && phi < PI) {
        return Err(AsymptoticsError::Invalid("phi must lie in (0, pi)".into()));
    }
    if radii.is_empty() || radii[0] < 10.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AsymptoticsError::Invalid("radii must be increasing and at least 10".into()));
    }
    let levels = engine.levels();
    let mut samples = Vec::with_capacity(radii.len());
    let mut nudged = 0;
    for &r in radii {
        let mut rr = r;
        let value = loop {
            let k = Complex64::from_polar(rr, phi);
            let p = SurfacePoint::from_k(k, &levels).map_err(ScatteringError::from)?;
            match target_value(engine, target, &p) {
                Ok(v) => break v,
                Err(ScatteringError::PoleAtPoint { .. }) if rr < r * (1.0 + 1e-5) => {
                    nudged += 1;
                    rr *= 1.0 + 1e-7;
                }
                Err(e) => return Err(e.into()),
            }
        };
        samples.push(value.ln_abs() / rr);
    }
    let top = radii[radii.len() - 1] / 10.0;
    let tail: Vec<f64> = radii
        .iter()
        .zip(&samples)
        .filter(|(r, _)| **r >= top)
        .map(|(_, s)| *s)
        .collect();
    Ok(IndicatorEstimate {
        target,
        phi,
        radii: radii.to_vec(),
        samples,
        h: median(tail),
        nudged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub k: Vec<f64>,
    pub t_minus_deviation: Vec<f64>,
    pub t_plus_deviation: Vec<f64>,
    /// Slope of `ln |T- - 1|` against `ln k`.
    pub slope_minus: f64,
    pub slope_plus: f64,
    pub pass: bool,
}

/// Largest admissible decay slope of `|T - 1|`.
pub const DECAY_SLOPE_LIMIT: f64 = -0.9;

/// Fits the decay of `|T+- - 1|` along the boundary of the physical sheet.
pub fn t_decay_check<E: JostEngine + ?Sized>(engine: &E, ks: &[f64]) -> Result<DecayReport, AsymptoticsError> {
    let levels = engine.levels();
    let mut dm = Vec::new();
    let mut dp = Vec::new();
    for &k in ks {
        let p = SurfacePoint::from_k(Complex64::new(k, 0.0), &levels).map_err(ScatteringError::from)?;
        let c = scattering_coefficients_scaled(engine, &p)?;
        dm.push((c.t_minus.to_complex() - 1.0).norm());
        dp.push((c.t_plus.to_complex() - 1.0).norm());
    }
    let lk: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let fit = |d: &[f64]| linear_fit(&lk, &d.iter().map(|v| v.ln()).collect::<Vec<_>>()).0;
    let (sm, sp) = (fit(&dm), fit(&dp));
    Ok(DecayReport {
        k: ks.to_vec(),
        t_minus_deviation: dm,
        t_plus_deviation: dp,
        slope_minus: sm,
        slope_plus: sp,
        pass: sm <= DECAY_SLOPE_LIMIT && sp <= DECAY_SLOPE_LIMIT,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionAsymptoticsReport {
    pub k: Vec<f64>,
    /// `k^2 |R-(z(k)) - ((k - r-)/(k + r-)) e^{-2ik beta}|`.
    pub g_minus: Vec<f64>,
    /// `k^2 |R+(z(k)) - ((r- - k)/(r- + k)) e^{2i r- beta}|`.
    pub g_plus: Vec<f64>,
    pub block_maxima_minus: Vec<f64>,
    pub block_maxima_plus: Vec<f64>,
    /// Block maxima strictly decrease for both.
    pub decreasing: bool,
    pub with_phase: bool,
}

/// Number of blocks in the envelope test.
pub const ENVELOPE_BLOCKS: usize = 4;

fn block_maxima(v: &[f64], blocks: usize) -> Vec<f64> {
    let n = v.len();
    (0..blocks)
        .map(|b| {
            let (s, e) = (b * n / blocks, (b + 1) * n / blocks);
            v[s..e].iter().copied().fold(0.0, f64::max)
        })
        .collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Compares the reflection coefficients of `V_beta + p` with those of the
/// bare step `V_beta` at real `k`. `with_phase = false` drops the phase
/// factors from the step formulas (an ablation that should break the decay).
pub fn step_reflection_asymptotics_check(
    v: &SmoothPerturbationPotential,
    ks: &[f64],
    tol: f64,
    with_phase: bool,
) -> Result<ReflectionAsymptoticsReport, AsymptoticsError> {
    if ks.len() < ENVELOPE_BLOCKS {
        return Err(AsymptoticsError::Invalid("too few k samples".into()));
    }
    let engine = OdeEngine::new(v.clone(), OdeSettings::with_tol(tol));
    let levels = v.levels();
    let beta = v.beta();
    let i = Complex64::i();
    let mut gm = Vec::new();
    let mut gp = Vec::new();
    for &k in ks {
        let p = SurfacePoint::from_k(Complex64::new(k, 0.0), &levels).map_err(ScatteringError::from)?;
        let c = scattering_coefficients_scaled(&engine, &p)?.to_plain();
        let kc = Complex64::new(k, 0.0);
        let rm = c.r_minus;
        let (ph_m, ph_p) = if with_phase {
            ((-2.0 * i * kc * beta).exp(), (2.0 * i * rm * beta).exp())
        } else {
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        };
        let step_m = (kc - rm) / (kc + rm) * ph_m;
        let step_p = (rm - kc) / (rm + kc) * ph_p;
        gm.push(k * k * (c.r_minus_coeff - step_m).norm());
        gp.push(k * k * (c.r_plus_coeff - step_p).norm());
    }
    let bm = block_maxima(&gm, ENVELOPE_BLOCKS);
    let bp = block_maxima(&gp, ENVELOPE_BLOCKS);
    let decreasing = strictly_decreasing(&bm) && strictly_decreasing(&bp);
    Ok(ReflectionAsymptoticsReport {
        k: ks.to_vec(),
        g_minus: gm,
        g_plus: gp,
        block_maxima_minus: bm,
        block_maxima_plus: bp,
        decreasing,
        with_phase,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanReport {
    pub radii: Vec<f64>,
    /// `S(R) = sum |Im r+(z_j)| / |r+(z_j)|^2` over `|z_j| <= R^2`.
    pub sums: Vec<f64>,
    /// `S(R_i) - S(R_{i-1})`, starting at the second radius.
    pub increments: Vec<f64>,
    /// Terms skipped because `r+(z_j) = 0`.
    pub skipped: usize,
}

/// Partial Carleman sums over the given radii.
pub fn carleman_sum(resonances: &[ResonanceRecord], radii: &[f64], levels: &StepLevels) -> CarlemanReport {
    let _ = levels;
    let mut skipped = 0;
    let terms: Vec<(f64, f64)> = resonances
        .iter()
        .filter_map(|r| {
            let n2 = r.r_plus.norm_sqr();
            if n2 < 1e-24 {
                skipped += 1;
                None
            } else {
                Some((r.z.norm(), r.multiplicity as f64 * r.r_plus.im.abs() / n2))
            }
        })
        .collect();
    let sums: Vec<f64> = radii
        .iter()
        .map(|&rad| terms.iter().filter(|(m, _)| *m <= rad * rad).map(|(_, t)| t).sum())
        .collect();
    let increments = sums.windows(2).map(|w| w[1] - w[0]).collect();
    CarlemanReport {
        radii: radii.to_vec(),
        sums,
        increments,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{BumpProfile, PiecewiseConstantPotential, Perturbation};

    #[test]
    fn grid_and_fit() {
        let g = geometric_grid(1.0, 10.0, 1.15);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let (s, c) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
    }

    #[test]
    fn predicates() {
        let a = Complex64::new(1.0, -1.0);
        let b = Complex64::new(1.0, 1.0);
        assert!(SheetPredicate::Sheet(SheetSignature::MINUS_PLUS).matches(a, b));
        assert!(!SheetPredicate::Sheet(SheetSignature::MINUS_MINUS).matches(a, b));
        assert!(SheetPredicate::TwoSheetSum.matches(a, b));
        assert!(SheetPredicate::TwoSheetSum.matches(b, a));
        assert!(SheetPredicate::TwoSheetSum.matches(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)));
        assert!(!SheetPredicate::TwoSheetSum.matches(a, a));
    }

    #[test]
    fn counting_refuses_uncertified_radius() {
        let e = counting_function(&[], SheetPredicate::TwoSheetSum, &[1.0, 5.0], 4.0, Some(0.0));
        assert!(matches!(e, Err(AsymptoticsError::BeyondCertifiedRadius { .. })));
    }

    #[test]
    fn pure_step_decay_is_quadratic() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = PiecewiseConstantPotential::step(l, 0.0);
        let ks = geometric_grid(10.0, 1000.0, 1.2);
        let rep = t_decay_check(&v, &ks).unwrap();
        assert!((rep.slope_minus + 2.0).abs() < 0.05, "{}", rep.slope_minus);
        assert!(rep.pass);
    }

    #[test]
    fn pure_step_indicator_vanishes() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = PiecewiseConstantPotential::step(l, 0.0);
        let radii = geometric_grid(10.0, 1e4, 1.3);
        for phi in [0.5, PI / 2.0, 2.5] {
            let est = indicator_estimate(&v, IndicatorTarget::RMinus, phi, &radii).unwrap();
            assert!(est.h.abs() < 0.01, "{}", est.h);
        }
    }

    #[test]
    fn zero_perturbation_matches_step_formula() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = SmoothPerturbationPotential::new(l, 0.3, Perturbation::Zero { half_width: 1.0 }).unwrap();
        let ks = geometric_grid(20.0, 200.0, 1.2);
        let rep = step_reflection_asymptotics_check(&v, &ks, 1e-10, true).unwrap();
        assert!(rep.g_minus.iter().chain(&rep.g_plus).all(|g| *g < 1e-9));
        let _ = BumpProfile::Parabolic;
    }
}
