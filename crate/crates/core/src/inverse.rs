//! Inverse-side formulas: recovery of `R-` on the boundary of the physical
//! sheet from `T`-products, truncated products over the resonance set, and the
//! three ways of fixing the real multiple left open by the factorization.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::resonances::{ResonanceRecord, CANDIDATE_CANCELLATION};
use crate::riemann::{SheetSignature, Sign, StepLevels, SurfaceError, SurfacePoint};
use crate::scaled::Scaled;
use crate::scattering::{jost_pair, scattering_coefficients, scattering_coefficients_scaled, JostEngine, ScatteringError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InverseError {
    #[error("f must be a nonnegative number, got {0}")]
    NegativeF(f64),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("evaluation point k = {k} collides with a product root")]
    Collision { k: Complex64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// The root in `(0, 1]` of `1/rho - rho = f`.
pub fn modulus_from_f(f: f64) -> Result<f64, InverseError> {
    if !(f >= 0.0) {
        return Err(InverseError::NegativeF(f));
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    // (-f + sqrt(f^2 + 4)) / 2 without the cancellation for large f.
    Ok(2.0 / (f + (f * f + 4.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub z: f64,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    pub t_minus: Complex64,
    /// `T-(w+- z)`.
    pub t_minus_pm: Complex64,
    pub r_minus_coeff: Complex64,
    /// `R-(w+- z)`.
    pub r_minus_pm: Complex64,
    /// `T-(z) T-(w- z)`; `None` at a pole (a zero of `R-(w+- z)`).
    pub t_product: Option<Complex64>,
}

/// Forward data on the upper boundary of the physical sheet, `Pi(z) > V-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub levels: StepLevels,
    pub points: Vec<TracePoint>,
}

impl BoundaryTrace {
    pub fn from_engine<E: JostEngine + ?Sized>(engine: &E, zs: &[f64]) -> Result<Self, InverseError> {
        let levels = engine.levels();
        let floor = levels.v_plus().max(levels.v_minus());
        let mut points = Vec::with_capacity(zs.len());
        for &z in zs {
            if z <= floor {
                return Err(InverseError::Invalid(format!("trace point {z} is not above max(V+, V-)")));
            }
            let p = SurfacePoint::with_side(Complex64::new(z, 0.0), SheetSignature::PHYSICAL, Sign::Plus, &levels);
            let c = scattering_coefficients(engine, &p)?;
            let w = scattering_coefficients(engine, &p.omega_pm())?;
            let t_product = match scattering_coefficients(engine, &p.omega_minus()) {
                Ok(m) => Some(c.t_minus * m.t_minus),
                Err(ScatteringError::PoleAtPoint { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            points.push(TracePoint {
                z,
                r_plus: c.r_plus,
                r_minus: c.r_minus,
                t_minus: c.t_minus,
                t_minus_pm: w.t_minus,
                r_minus_coeff: c.r_minus_coeff,
                r_minus_pm: w.r_minus_coeff,
                t_product,
            });
        }
        Ok(Self { levels, points })
    }

    /// Largest of `|T-(w+- z) - conj T-(z)|` and `|R-(w+- z) - conj R-(z)|`.
    pub fn conjugation_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| {
                let a = (p.t_minus_pm - p.t_minus.conj()).norm();
                let b = (p.r_minus_pm - p.r_minus_coeff.conj()).norm();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    /// The forward `T-(z) T-(w- z)` values.
    pub fn forward_products(&self) -> Vec<Option<Complex64>> {
        self.points.iter().map(|p| p.t_product).collect()
    }
}

/// `|r-/r+ T-(z) T-(w+- z) / R-(w+- z)|` on the trace; `None` marks a pole.
pub fn f_from_forward(trace: &BoundaryTrace) -> Vec<Option<f64>> {
    trace
        .points
        .iter()
        .map(|p| {
            let den = p.r_minus_pm.norm();
            let num = (p.r_minus / p.r_plus * p.t_minus * p.t_minus_pm).norm();
            if den <= 1e-15 * num.max(1.0) {
                None
            } else {
                Some(num / den)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub z: Vec<f64>,
    pub rho: Vec<f64>,
    pub recovered: Vec<Complex64>,
    pub truth: Vec<Complex64>,
    /// Phase of the recovered `R-`, continued from the largest `z`.
    pub unwrapped_phase: Vec<f64>,
    pub max_modulus_error: f64,
    pub max_error: f64,
    /// An adjacent phase jump exceeded `pi/2`: the grid is too coarse to
    /// continue the argument unambiguously.
    pub phase_ambiguity: bool,
}

/// Rebuilds `R-` on the trace grid from `T-(z) T-(w- z)` (forward values in
/// round-trip mode, or a product reconstruction). The modulus comes from
/// `modulus_from_f`, the argument from that of the product.
pub fn recover_r_minus_on_boundary(
    trace: &BoundaryTrace,
    products: &[Option<Complex64>],
) -> Result<RecoveryReport, InverseError> {
    if products.len() != trace.points.len() {
        return Err(InverseError::Invalid("one product value per trace point is required".into()));
    }
    let mut rho = Vec::new();
    let mut recovered = Vec::new();
    for (p, prod) in trace.points.iter().zip(products) {
        match prod {
            Some(q) if q.norm() > 0.0 => {
                let f = (p.r_minus / p.r_plus).norm() * q.norm();
                let m = modulus_from_f(f)?;
                rho.push(m);
                recovered.push(Complex64::from_polar(m, q.arg()));
            }
            _ => {
                rho.push(0.0);
                recovered.push(Complex64::new(0.0, 0.0));
            }
        }
    }
    let n = recovered.len();
    let mut unwrapped = vec![0.0; n];
    let mut ambiguity = false;
    if n > 0 {
        unwrapped[n - 1] = recovered[n - 1].arg();
        for i in (0..n - 1).rev() {
            let raw = recovered[i].arg();
            let prev = unwrapped[i + 1];
            let mut d = raw - prev;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            if d.abs() > PI / 2.0 {
                ambiguity = true;
            }
            unwrapped[i] = prev + d;
        }
    }
    let truth: Vec<Complex64> = trace.points.iter().map(|p| p.r_minus_coeff).collect();
    let max_error = recovered.iter().zip(&truth).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let max_modulus_error = rho
        .iter()
        .zip(&truth)
        .map(|(a, b)| (a - b.norm()).abs())
        .fold(0.0, f64::max);
    Ok(RecoveryReport {
        z: trace.points.iter().map(|p| p.z).collect(),
        rho,
        recovered,
        truth,
        unwrapped_phase: unwrapped,
        max_modulus_error,
        max_error,
        phase_ambiguity: ambiguity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationParams {
    pub gamma_1: Complex64,
    pub delta_1: Complex64,
    pub gamma_2: Complex64,
    pub delta_2: Complex64,
    /// 1 iff no resonance projects to `V+`.
    pub alpha_plus: u8,
}

impl Default for FactorizationParams {
    fn default() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            gamma_1: one,
            delta_1: zero,
            gamma_2: one,
            delta_2: zero,
            alpha_plus: 1,
        }
    }
}

/// `|r+|` below which a resonance counts as projecting to `V+`.
pub const BRANCH_ROOT_EPS: f64 = 1e-10;

/// `r+(z_j)` for every listed resonance with `0 < |r+| <= k_max`, repeated by
/// multiplicity and sorted so that `k` and `-conj k` are adjacent.
pub fn product_roots(records: &[ResonanceRecord], k_max: f64) -> Vec<Complex64> {
    let mut roots: Vec<Complex64> = records
        .iter()
        .filter(|r| r.r_plus.norm() > BRANCH_ROOT_EPS && r.r_plus.norm() <= k_max)
        .flat_map(|r| std::iter::repeat(r.r_plus).take(r.multiplicity as usize))
        .collect();
    sort_for_pairing(&mut roots);
    roots
}

pub fn sort_for_pairing(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        a.re.abs()
            .total_cmp(&b.re.abs())
            .then(a.im.total_cmp(&b.im))
            .then(a.re.total_cmp(&b.re))
    });
}

fn check_collision(roots: &[Complex64], k: Complex64, both_signs: bool) -> Result<(), InverseError> {
    let tol = 1e-13 * k.norm().max(1.0);
    let hit = roots
        .iter()
        .any(|&kj| (kj - k).norm() < tol || (both_signs && (kj + k).norm() < tol));
    if hit {
        Err(InverseError::Collision { k })
    } else {
        Ok(())
    }
}

/// `prod (k_j + k) / (k_j - k)`, multiplied pairwise in the stored order.
pub fn r2_factor_product(roots: &[Complex64], k: Complex64) -> Result<Complex64, InverseError> {
    check_collision(roots, k, true)?;
    Ok(roots
        .chunks(2)
        .map(|c| c.iter().map(|&kj| (kj + k) / (kj - k)).product::<Complex64>())
        .product())
}

/// `prod 1 / (1 - k / k_j)`, multiplied pairwise.
pub fn t2_factor_product(roots: &[Complex64], k: Complex64) -> Result<Complex64, InverseError> {
    check_collision(roots, k, false)?;
    Ok(roots
        .chunks(2)
        .map(|c| c.iter().map(|&kj| 1.0 / (1.0 - k / kj)).product::<Complex64>())
        .product())
}

/// `gamma_1 e^{delta_1 k} prod (k_j + k)/(k_j - k)` with `k = r+(p)`.
pub fn truncated_product_r2(
    roots: &[Complex64],
    params: &FactorizationParams,
    p: &SurfacePoint,
    levels: &StepLevels,
) -> Result<Complex64, InverseError> {
    let k = p.r_plus(levels)?;
    Ok(params.gamma_1 * (params.delta_1 * k).exp() * r2_factor_product(roots, k)?)
}

/// `gamma_2 e^{delta_2 k} k^{alpha+} prod 1/(1 - k/k_j)` with `k = r+(p)`.
pub fn truncated_product_t2(
    roots: &[Complex64],
    params: &FactorizationParams,
    p: &SurfacePoint,
    levels: &StepLevels,
) -> Result<Complex64, InverseError> {
    let k = p.r_plus(levels)?;
    let power = if params.alpha_plus == 1 { k } else { Complex64::new(1.0, 0.0) };
    Ok(params.gamma_2 * (params.delta_2 * k).exp() * power * t2_factor_product(roots, k)?)
}

/// Forward `R-(z) R-(w- z)` at the physical-sheet point with `r+ = k`.
pub fn forward_r2<E: JostEngine + ?Sized>(engine: &E, k: Complex64) -> Result<Complex64, InverseError> {
    let p = SurfacePoint::from_k(k, &engine.levels())?;
    let a = scattering_coefficients_scaled(engine, &p)?;
    let b = scattering_coefficients_scaled(engine, &p.omega_minus())?;
    Ok((a.r_minus_coeff * b.r_minus_coeff).to_complex())
}

/// Forward `T-(z) T-(w- z)` at the physical-sheet point with `r+ = k`.
pub fn forward_t2<E: JostEngine + ?Sized>(engine: &E, k: Complex64) -> Result<Complex64, InverseError> {
    let p = SurfacePoint::from_k(k, &engine.levels())?;
    let a = scattering_coefficients_scaled(engine, &p)?;
    let b = scattering_coefficients_scaled(engine, &p.omega_minus())?;
    Ok((a.t_minus * b.t_minus).to_complex())
}

/// Fits `gamma e^{delta k}` to `target(k) / product(k)` at `k_a` and `k_b`
/// (real). The logarithm is continued along the real segment between them.
pub fn fit_exponential_factor(
    target: impl Fn(f64) -> Result<Complex64, InverseError>,
    product: impl Fn(f64) -> Result<Complex64, InverseError>,
    k_a: f64,
    k_b: f64,
) -> Result<(Complex64, Complex64), InverseError> {
    if !(k_a > 0.0 && k_b > k_a) {
        return Err(InverseError::Invalid("need 0 < k_a < k_b".into()));
    }
    const STEPS: usize = 256;
    let ratio = |k: f64| -> Result<Complex64, InverseError> { Ok(target(k)? / product(k)?) };
    let start = ratio(k_a)?;
    let mut phase = start.arg();
    let mut last = start;
    for i in 1..=STEPS {
        let k = k_a + (k_b - k_a) * i as f64 / STEPS as f64;
        let cur = ratio(k)?;
        let d = (cur / last).arg();
        if d.abs() > PI / 2.0 {
            return Err(InverseError::Invalid("phase continuation step too large".into()));
        }
        phase += d;
        last = cur;
    }
    let la = Complex64::new(start.norm().ln(), start.arg());
    let lb = Complex64::new(last.norm().ln(), phase);
    let delta = (lb - la) / (k_b - k_a);
    let gamma = (la - delta * k_a).exp();
    Ok((gamma, delta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub k_max: f64,
    /// Number of product roots (with multiplicity).
    pub roots: usize,
    pub gamma_1: Complex64,
    pub delta_1: Complex64,
    pub test_k: Vec<f64>,
    /// `|product - forward| / |forward|` at each test point.
    pub relative_errors: Vec<f64>,
    pub mean_error: f64,
    pub max_error: f64,
}

/// Compares the truncated `R-(z) R-(w- z)` product over resonances with
/// `|r+| <= k_max` against forward values, after fitting `gamma_1, delta_1`
/// at the real points `fit.0 < fit.1`.
pub fn truncated_r2_check<E: JostEngine + ?Sized>(
    engine: &E,
    records: &[ResonanceRecord],
    k_max: f64,
    fit: (f64, f64),
    test_k: &[f64],
) -> Result<TruncationReport, InverseError> {
    let roots = product_roots(records, k_max);
    let real = |k: f64| Complex64::new(k, 0.0);
    let (gamma_1, delta_1) = fit_exponential_factor(
        |k| forward_r2(engine, real(k)),
        |k| r2_factor_product(&roots, real(k)),
        fit.0,
        fit.1,
    )?;
    let params = FactorizationParams {
        gamma_1,
        delta_1,
        ..FactorizationParams::default()
    };
    let levels = engine.levels();
    let mut errors = Vec::with_capacity(test_k.len());
    for &k in test_k {
        let p = SurfacePoint::from_k(real(k), &levels)?;
        let approx = truncated_product_r2(&roots, &params, &p, &levels)?;
        let truth = forward_r2(engine, real(k))?;
        errors.push((approx - truth).norm() / truth.norm());
    }
    let mean_error = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(TruncationReport {
        k_max,
        roots: roots.len(),
        gamma_1,
        delta_1,
        test_k: test_k.to_vec(),
        relative_errors: errors,
        mean_error,
        max_error,
    })
}

/// Membership of the two points over `V+` in the resonance set, decided by
/// the cancellation in `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchMembership {
    /// Sign of `r-` at the point.
    pub s_minus: Sign,
    pub cancellation: f64,
    pub resonant: bool,
}

pub fn branch_membership<E: JostEngine + ?Sized>(engine: &E) -> Result<[BranchMembership; 2], InverseError> {
    let levels = engine.levels();
    let z0 = Complex64::new(levels.v_plus(), 0.0);
    let one = |s: Sign| -> Result<BranchMembership, InverseError> {
        let p = SurfacePoint::with_side(z0, SheetSignature::new(Sign::Plus, s), Sign::Plus, &levels);
        let pair = jost_pair(engine, &p)?;
        let c = pair.f_minus_left.wronskian_cancellation(&pair.f_plus_left);
        Ok(BranchMembership {
            s_minus: s,
            cancellation: c,
            resonant: c < CANDIDATE_CANCELLATION,
        })
    };
    Ok([one(Sign::Plus)?, one(Sign::Minus)?])
}

/// `gamma_1` from the resonance set alone: the value of `R-(z) R-(w- z)` at
/// `r+ = 0`, where `R-` is `+1` at a resonant point and `-1` otherwise.
pub fn resonance_only_gamma1(membership: &[BranchMembership; 2]) -> f64 {
    membership.iter().map(|m| if m.resonant { 1.0 } else { -1.0 }).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationCase {
    /// A resonance projects to `V+`.
    BranchPoint,
    /// `V = V_beta + p` with `p` continuous: large-`k` asymptotics fix the constant.
    APriori,
    /// No resonance over `V+` and `T+(z0)/T+(w- z0) > 0`.
    SignCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPointCase {
    pub membership: [BranchMembership; 2],
    /// `lim -r- T-(z) T-(w- z) / r+` at the resonant point (or at the
    /// `r- > 0` point when neither is resonant).
    pub limit: Complex64,
    /// `2` at a resonant point.
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct APrioriCase {
    pub k: f64,
    /// `|T-(z) T-(w+ z)| |V+ - V-| / (4 k^2)`.
    pub ratio: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub branch_point: BranchPointCase,
    pub a_priori: Option<APrioriCase>,
    /// `T+(z0)/T+(w- z0) = -D(w- z0)/D(z0)` (real part) with `z0` over `V+`, `r- > 0`.
    pub sign_ratio: f64,
    pub sign_ratio_imag: f64,
    pub applicable: Vec<NormalizationCase>,
    pub summary: String,
}

/// Radius at which the a-priori normalization is checked.
pub const A_PRIORI_K: f64 = 1e3;

fn branch_limit<E: JostEngine + ?Sized>(engine: &E, s_minus: Sign) -> Result<Complex64, InverseError> {
    let levels = engine.levels();
    let sheet = SheetSignature::new(Sign::Plus, s_minus);
    let value = |delta: f64| -> Result<Complex64, InverseError> {
        // r+ = i delta, so z = V+ - delta^2 is real and off the r+ cut.
        let z = Complex64::new(levels.v_plus() - delta * delta, 0.0);
        let p = SurfacePoint::with_side(z, sheet, Sign::Plus, &levels);
        let (rp, rm) = p.roots(&levels)?;
        let d = jost_pair(engine, &p)?.wronskian();
        let dw = jost_pair(engine, &p.omega_minus())?.wronskian();
        Ok(Scaled::from_complex(4.0 * rm * rp).div(d * dw).to_complex())
    };
    let h = 1e-4;
    let (a, b) = (value(h)?, value(h / 2.0)?);
    Ok(2.0 * b - a)
}

/// Which of the three normalization criteria applies, with the constants
/// each one yields. `a_priori_c0` declares that `V - V_beta` is continuous.
pub fn normalization_case_analysis<E: JostEngine + ?Sized>(
    engine: &E,
    a_priori_c0: bool,
) -> Result<NormalizationReport, InverseError> {
    let levels = engine.levels();
    let membership = branch_membership(engine)?;
    let resonant = membership.iter().find(|m| m.resonant).copied();
    let limit_sign = resonant.map(|m| m.s_minus).unwrap_or(Sign::Plus);
    let limit = branch_limit(engine, limit_sign)?;
    let branch_point = BranchPointCase {
        membership,
        limit,
        expected: resonant.map(|_| 2.0),
    };

    let a_priori = if a_priori_c0 {
        let p = SurfacePoint::from_k(Complex64::new(A_PRIORI_K, 0.0), &levels)?;
        let a = scattering_coefficients_scaled(engine, &p)?;
        let b = scattering_coefficients_scaled(engine, &p.omega_plus())?;
        let prod = (a.t_minus * b.t_minus).to_complex().norm();
        let ratio = prod * (levels.v_plus() - levels.v_minus()).abs() / (4.0 * A_PRIORI_K * A_PRIORI_K);
        Some(APrioriCase {
            k: A_PRIORI_K,
            ratio,
            relative_error: (ratio - 1.0).abs(),
        })
    } else {
        None
    };

    let z0 = SurfacePoint::with_side(
        Complex64::new(levels.v_plus(), 0.0),
        SheetSignature::PHYSICAL,
        Sign::Plus,
        &levels,
    );
    let d0 = jost_pair(engine, &z0)?.wronskian();
    let dw = jost_pair(engine, &z0.omega_minus())?.wronskian();
    let ratio = -(dw.div(d0)).to_complex();

    let mut applicable = Vec::new();
    let mut lines = Vec::new();
    if let Some(m) = resonant {
        applicable.push(NormalizationCase::BranchPoint);
        lines.push(format!(
            "branch-point resonance (r- sign {}): limit {:.6} {:+.6}i",
            if m.s_minus == Sign::Plus { "+" } else { "-" },
            limit.re,
            limit.im
        ));
    }
    if let Some(a) = &a_priori {
        applicable.push(NormalizationCase::APriori);
        lines.push(format!("a-priori continuous perturbation: ratio {:.6} at k = {}", a.ratio, a.k));
    }
    if resonant.is_none() {
        if ratio.re > 0.0 {
            applicable.push(NormalizationCase::SignCondition);
            lines.push(format!("sign condition holds: T+(z0)/T+(w- z0) = {:.6}", ratio.re));
        } else {
            lines.push(format!("sign condition fails: T+(z0)/T+(w- z0) = {:.6}", ratio.re));
        }
    }
    if applicable.is_empty() {
        lines.push("normalization undetermined by the available criteria".into());
    }
    Ok(NormalizationReport {
        branch_point,
        a_priori,
        sign_ratio: ratio.re,
        sign_ratio_imag: ratio.im,
        applicable,
        summary: lines.join("; "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PiecewiseConstantPotential;

    #[test]
    fn rho_examples() {
        assert_eq!(modulus_from_f(0.0).unwrap(), 1.0);
        assert!((modulus_from_f(1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(modulus_from_f(-1.0).is_err());
        assert!(modulus_from_f(f64::NAN).is_err());
    }

    #[test]
    fn pure_step_round_trip() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = PiecewiseConstantPotential::step(l, 0.0);
        let trace = BoundaryTrace::from_engine(&v, &[2.0]).unwrap();
        let f = f_from_forward(&trace)[0].unwrap();
        assert!((f - 5.656854).abs() < 1e-6, "{f}");
        let rep = recover_r_minus_on_boundary(&trace, &trace.forward_products()).unwrap();
        assert!((rep.rho[0] - 0.171573).abs() < 1e-6);
        assert!(rep.max_error < 1e-12);
    }

    #[test]
    fn pure_step_normalization() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = PiecewiseConstantPotential::step(l, 0.4);
        let rep = normalization_case_analysis(&v, true).unwrap();
        assert!(rep.branch_point.expected.is_none());
        assert!(rep.branch_point.limit.norm() < 1e-6);
        assert!((rep.sign_ratio - (-0.8f64).exp()).abs() < 1e-10);
        assert!(rep.a_priori.unwrap().relative_error < 1e-8);
        assert!(rep.applicable.contains(&NormalizationCase::SignCondition));
        let m = branch_membership(&v).unwrap();
        assert_eq!(resonance_only_gamma1(&m), 1.0);
    }

    #[test]
    fn pairing_order_puts_mirror_roots_together() {
        let mut r = vec![
            Complex64::new(3.0, -1.0),
            Complex64::new(-1.0, -0.5),
            Complex64::new(-3.0, -1.0),
            Complex64::new(1.0, -0.5),
        ];
        sort_for_pairing(&mut r);
        assert_eq!(r[0], -r[1].conj());
        assert_eq!(r[2], -r[3].conj());
    }
}
