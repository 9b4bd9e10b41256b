//! Steplike potentials: exact staircases and continuous perturbations of a
//! single step, plus JSON ingestion.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::riemann::{StepLevels, SurfaceError};

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error(transparent)]
    Levels(#[from] SurfaceError),
    #[error("field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("cannot read potential file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed potential JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn invalid(field: &'static str, message: impl Into<String>) -> PotentialError {
    PotentialError::Invalid {
        field,
        message: message.into(),
    }
}

/// Convex hull `[a, b]` of the support of `V'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportHull {
    pub a: f64,
    pub b: f64,
}

impl SupportHull {
    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// `V- | v_1 | ... | v_n | V+` with jumps at `x_0 < ... < x_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantPotential {
    levels: StepLevels,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantPotential {
    pub fn new(levels: StepLevels, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, PotentialError> {
        if breakpoints.is_empty() {
            return Err(invalid("breakpoints", "at least one breakpoint is required"));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(invalid("breakpoints", "breakpoints must be finite"));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[1] <= w[0]) {
            return Err(invalid(
                "breakpoints",
                format!("must be strictly increasing ({} is followed by {})", w[0], w[1]),
            ));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(invalid(
                "values",
                format!(
                    "expected {} interior values for {} breakpoints, got {}",
                    breakpoints.len() - 1,
                    breakpoints.len(),
                    values.len()
                ),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "values must be finite"));
        }
        Ok(Self {
            levels,
            breakpoints,
            values,
        })
    }

    /// Like [`new`](Self::new) but drops zero-width layers first.
    pub fn merged(levels: StepLevels, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, PotentialError> {
        if values.len() + 1 != breakpoints.len() {
            return Self::new(levels, breakpoints, values);
        }
        let mut xs = vec![breakpoints[0]];
        let mut vs = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            let right = breakpoints[i + 1];
            if right == *xs.last().unwrap() {
                continue;
            }
            xs.push(right);
            vs.push(v);
        }
        Self::new(levels, xs, vs)
    }

    /// Pure step at `beta`.
    pub fn step(levels: StepLevels, beta: f64) -> Self {
        Self {
            levels,
            breakpoints: vec![beta],
            values: Vec::new(),
        }
    }

    pub fn levels(&self) -> StepLevels {
        self.levels
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_edge(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn right_edge(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Values of the `n + 2` regions, tails included.
    fn region_values(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.levels.v_minus())
            .chain(self.values.iter().copied())
            .chain(std::iter::once(self.levels.v_plus()))
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        if idx == 0 {
            self.levels.v_minus()
        } else if idx == self.breakpoints.len() {
            self.levels.v_plus()
        } else {
            self.values[idx - 1]
        }
    }

    pub fn min_value(&self) -> f64 {
        self.region_values().fold(f64::INFINITY, f64::min)
    }

    pub fn support_hull(&self) -> SupportHull {
        let regions: Vec<f64> = self.region_values().collect();
        let jumps: Vec<f64> = self
            .breakpoints
            .iter()
            .enumerate()
            .filter(|(i, _)| regions[*i] != regions[i + 1])
            .map(|(_, &x)| x)
            .collect();
        // V+ != V- guarantees at least one genuine jump.
        SupportHull {
            a: jumps[0],
            b: *jumps.last().unwrap(),
        }
    }

    /// Removes breakpoints across which the potential does not jump.
    pub fn simplified(&self) -> Self {
        let regions: Vec<f64> = self.region_values().collect();
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, &x) in self.breakpoints.iter().enumerate() {
            if regions[i] != regions[i + 1] {
                if !xs.is_empty() {
                    vs.push(regions[i]);
                }
                xs.push(x);
            }
        }
        Self {
            levels: self.levels,
            breakpoints: xs,
            values: vs,
        }
    }

    /// The same profile shifted right by `c`.
    pub fn translated(&self, c: f64) -> Self {
        Self {
            levels: self.levels,
            breakpoints: self.breakpoints.iter().map(|x| x + c).collect(),
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpProfile {
    /// `A (1 - (x/b)^2)`: continuous, with `p'` jumping at `+-b`.
    Parabolic,
    /// `A cos^2(pi x / 2b)`: continuously differentiable.
    Cosine,
}

/// Continuous, compactly supported perturbation `p` with `supp p` in `[-b1, b1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Perturbation {
    Zero {
        half_width: f64,
    },
    Bump {
        amplitude: f64,
        half_width: f64,
        #[serde(default = "default_profile")]
        profile: BumpProfile,
    },
    /// Piecewise-linear interpolation of samples, zero outside `[x_0, x_m]`.
    Table {
        half_width: f64,
        x: Vec<f64>,
        p: Vec<f64>,
    },
}

fn default_profile() -> BumpProfile {
    BumpProfile::Parabolic
}

impl Perturbation {
    pub fn half_width(&self) -> f64 {
        match self {
            Perturbation::Zero { half_width }
            | Perturbation::Bump { half_width, .. }
            | Perturbation::Table { half_width, .. } => *half_width,
        }
    }

    fn validate(&self) -> Result<(), PotentialError> {
        let b1 = self.half_width();
        if !(b1.is_finite() && b1 > 0.0) {
            return Err(invalid("perturbation.half_width", "must be positive and finite"));
        }
        match self {
            Perturbation::Zero { .. } => Ok(()),
            Perturbation::Bump { amplitude, .. } => {
                if amplitude.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("perturbation.amplitude", "must be finite"))
                }
            }
            Perturbation::Table { x, p, .. } => {
                if x.len() < 2 || x.len() != p.len() {
                    return Err(invalid("perturbation.p", "needs as many samples as `x`, at least two"));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("perturbation.x", "must be strictly increasing"));
                }
                if x[0] < -b1 || x[x.len() - 1] > b1 {
                    return Err(invalid("perturbation.x", "samples must lie in [-half_width, half_width]"));
                }
                if p[0] != 0.0 || p[p.len() - 1] != 0.0 {
                    return Err(invalid("perturbation.p", "first and last samples must be 0 for continuity"));
                }
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("perturbation.p", "samples must be finite"));
                }
                Ok(())
            }
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        match self {
            Perturbation::Zero { .. } => 0.0,
            Perturbation::Bump {
                amplitude,
                half_width,
                profile,
            } => {
                let t = x / half_width;
                if t.abs() >= 1.0 {
                    return 0.0;
                }
                match profile {
                    BumpProfile::Parabolic => amplitude * (1.0 - t * t),
                    BumpProfile::Cosine => {
                        let c = (std::f64::consts::FRAC_PI_2 * t).cos();
                        amplitude * c * c
                    }
                }
            }
            Perturbation::Table { x: xs, p, .. } => {
                if x <= xs[0] || x >= xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|&s| s <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                p[i] + t * (p[i + 1] - p[i])
            }
        }
    }

    /// Points where `p'` may be discontinuous. Integrators must stop there.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Perturbation::Zero { .. } => Vec::new(),
            Perturbation::Bump { half_width, .. } => vec![-half_width, *half_width],
            Perturbation::Table { x, .. } => x.clone(),
        }
    }

    /// `sup |p'|`.
    pub fn max_slope(&self) -> f64 {
        match self {
            Perturbation::Zero { .. } => 0.0,
            Perturbation::Bump {
                amplitude,
                half_width,
                profile,
            } => match profile {
                BumpProfile::Parabolic => 2.0 * amplitude.abs() / half_width,
                BumpProfile::Cosine => std::f64::consts::FRAC_PI_2 * amplitude.abs() / half_width,
            },
            Perturbation::Table { x, p, .. } => x
                .windows(2)
                .zip(p.windows(2))
                .map(|(xw, pw)| ((pw[1] - pw[0]) / (xw[1] - xw[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Perturbation::Zero { .. } => true,
            Perturbation::Bump { amplitude, .. } => *amplitude == 0.0,
            Perturbation::Table { p, .. } => p.iter().all(|v| *v == 0.0),
        }
    }
}

/// `V = V+ H(x - beta) + V- H(beta - x) + p(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothPerturbationPotential {
    levels: StepLevels,
    beta: f64,
    perturbation: Perturbation,
}

impl SmoothPerturbationPotential {
    pub fn new(levels: StepLevels, beta: f64, perturbation: Perturbation) -> Result<Self, PotentialError> {
        if !beta.is_finite() {
            return Err(invalid("beta", "must be finite"));
        }
        perturbation.validate()?;
        Ok(Self {
            levels,
            beta,
            perturbation,
        })
    }

    pub fn levels(&self) -> StepLevels {
        self.levels
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    pub fn half_width(&self) -> f64 {
        self.perturbation.half_width()
    }

    pub fn step_value(&self, x: f64) -> f64 {
        if x < self.beta {
            self.levels.v_minus()
        } else {
            self.levels.v_plus()
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.step_value(x) + self.perturbation.value_at(x)
    }

    /// Left end of the interval outside of which the potential is constant.
    pub fn left_edge(&self) -> f64 {
        if self.perturbation.is_zero() {
            self.beta
        } else {
            self.beta.min(-self.half_width())
        }
    }

    pub fn right_edge(&self) -> f64 {
        if self.perturbation.is_zero() {
            self.beta
        } else {
            self.beta.max(self.half_width())
        }
    }

    pub fn support_hull(&self) -> SupportHull {
        SupportHull {
            a: self.left_edge(),
            b: self.right_edge(),
        }
    }

    /// Sorted points in `[left_edge, right_edge]` where the profile or its
    /// derivative may jump, endpoints included.
    pub fn nodes(&self) -> Vec<f64> {
        let (a, b) = (self.left_edge(), self.right_edge());
        let mut nodes: Vec<f64> = self
            .perturbation
            .kinks()
            .into_iter()
            .chain([a, b, self.beta])
            .filter(|x| *x >= a && *x <= b)
            .collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        nodes
    }

    /// Midpoint-sampled staircase with `n_layers` equal layers on
    /// `[-b1, b1]`, split exactly at `beta`.
    pub fn discretize(&self, n_layers: usize) -> PiecewiseConstantPotential {
        let n = n_layers.max(1);
        let b1 = self.half_width();
        let w = 2.0 * b1 / n as f64;
        let mut xs: Vec<f64> = (0..=n).map(|i| -b1 + w * i as f64).collect();
        xs.push(self.beta);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let values: Vec<f64> = xs
            .windows(2)
            .map(|s| {
                let mid = 0.5 * (s[0] + s[1]);
                self.value_at(mid)
            })
            .collect();
        PiecewiseConstantPotential::new(self.levels, xs, values)
            .expect("grid is strictly increasing")
            .simplified()
    }

    /// Sup-norm bound on `|V - discretize(V, n)|` away from the step.
    pub fn discretization_error_bound(&self, n_layers: usize) -> f64 {
        let w = 2.0 * self.half_width() / n_layers.max(1) as f64;
        self.perturbation.max_slope() * w / 2.0
    }
}

/// Either kind of steplike potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Piecewise(PiecewiseConstantPotential),
    Smooth(SmoothPerturbationPotential),
}

impl Potential {
    pub fn levels(&self) -> StepLevels {
        match self {
            Potential::Piecewise(p) => p.levels(),
            Potential::Smooth(p) => p.levels(),
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        match self {
            Potential::Piecewise(p) => p.value_at(x),
            Potential::Smooth(p) => p.value_at(x),
        }
    }

    pub fn support_hull(&self) -> SupportHull {
        match self {
            Potential::Piecewise(p) => p.support_hull(),
            Potential::Smooth(p) => p.support_hull(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, PotentialError> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_json_value(value)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_value(value: Value) -> Result<Self, PotentialError> {
        let obj = value
            .as_object()
            .ok_or_else(|| invalid("<root>", "expected a JSON object"))?;
        let number = |field: &'static str| -> Result<f64, PotentialError> {
            obj.get(field)
                .ok_or_else(|| invalid(field, "missing"))?
                .as_f64()
                .ok_or_else(|| invalid(field, "expected a number"))
        };
        let levels = StepLevels::new(number("v_plus")?, number("v_minus")?)?;
        if obj.contains_key("breakpoints") {
            let file: PiecewiseFile = serde_json::from_value(value)?;
            Ok(Potential::Piecewise(PiecewiseConstantPotential::new(
                levels,
                file.breakpoints,
                file.values,
            )?))
        } else if obj.contains_key("beta") {
            let file: SmoothFile = serde_json::from_value(value)?;
            Ok(Potential::Smooth(SmoothPerturbationPotential::new(
                levels,
                file.beta,
                file.perturbation,
            )?))
        } else {
            Err(invalid("breakpoints", "expected either `breakpoints` or `beta`"))
        }
    }

    pub fn to_json_value(&self) -> Value {
        match self {
            Potential::Piecewise(p) => serde_json::json!({
                "v_minus": p.levels().v_minus(),
                "v_plus": p.levels().v_plus(),
                "breakpoints": p.breakpoints(),
                "values": p.values(),
            }),
            Potential::Smooth(p) => serde_json::json!({
                "v_minus": p.levels().v_minus(),
                "v_plus": p.levels().v_plus(),
                "beta": p.beta(),
                "perturbation": p.perturbation(),
            }),
        }
    }
}

impl From<PiecewiseConstantPotential> for Potential {
    fn from(p: PiecewiseConstantPotential) -> Self {
        Potential::Piecewise(p)
    }
}

impl From<SmoothPerturbationPotential> for Potential {
    fn from(p: SmoothPerturbationPotential) -> Self {
        Potential::Smooth(p)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct PiecewiseFile {
    v_minus: f64,
    v_plus: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct SmoothFile {
    v_minus: f64,
    v_plus: f64,
    beta: f64,
    perturbation: Perturbation,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barrier() -> PiecewiseConstantPotential {
        PiecewiseConstantPotential::new(StepLevels::new(0.0, 4.0).unwrap(), vec![0.0, 1.0], vec![8.0]).unwrap()
    }

    #[test]
    fn hull_of_pure_step() {
        let v = PiecewiseConstantPotential::step(StepLevels::new(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(v.support_hull(), SupportHull { a: 0.0, b: 0.0 });
    }

    #[test]
    fn hull_of_barrier() {
        assert_eq!(barrier().support_hull(), SupportHull { a: 0.0, b: 1.0 });
    }

    #[test]
    fn spurious_breakpoints_are_not_jumps() {
        let l = StepLevels::new(0.0, 4.0).unwrap();
        let v = PiecewiseConstantPotential::new(l, vec![-2.0, 0.0, 1.0, 3.0], vec![4.0, 8.0, 0.0]).unwrap();
        assert_eq!(v.support_hull(), SupportHull { a: 0.0, b: 1.0 });
        let s = v.simplified();
        assert_eq!(s.breakpoints(), &[0.0, 1.0]);
        assert_eq!(s.values(), &[8.0]);
    }

    #[test]
    fn hull_grows_with_genuine_jumps() {
        let l = StepLevels::new(0.0, 4.0).unwrap();
        let v = PiecewiseConstantPotential::new(l, vec![-2.0, 0.0, 1.0, 3.0], vec![5.0, 8.0, 0.0]).unwrap();
        assert_eq!(v.support_hull(), SupportHull { a: -2.0, b: 1.0 });
    }

    #[test]
    fn tails_and_interior_values() {
        let v = barrier();
        assert_eq!(v.value_at(-1e-9), 4.0);
        assert_eq!(v.value_at(-100.0), 4.0);
        assert_eq!(v.value_at(0.5), 8.0);
        assert_eq!(v.value_at(1.0 + 1e-9), 0.0);
        assert_eq!(v.min_value(), 0.0);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        assert!(PiecewiseConstantPotential::new(l, vec![], vec![]).is_err());
        assert!(PiecewiseConstantPotential::new(l, vec![1.0, 0.0], vec![2.0]).is_err());
        assert!(PiecewiseConstantPotential::new(l, vec![0.0, 1.0], vec![]).is_err());
        let merged = PiecewiseConstantPotential::merged(l, vec![0.0, 0.5, 0.5, 1.0], vec![2.0, 7.0, 3.0]).unwrap();
        assert_eq!(merged.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(merged.values(), &[2.0, 3.0]);
    }

    #[test]
    fn zero_perturbation_discretizes_to_a_step() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        for n in [1, 7, 64] {
            let v = SmoothPerturbationPotential::new(l, 0.3, Perturbation::Zero { half_width: 1.0 }).unwrap();
            let d = v.discretize(n);
            assert_eq!(d.breakpoints(), &[0.3]);
            assert!(d.values().is_empty());
        }
    }

    #[test]
    fn discretization_error_halves() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = SmoothPerturbationPotential::new(
            l,
            0.25,
            Perturbation::Bump {
                amplitude: 2.0,
                half_width: 1.0,
                profile: BumpProfile::Parabolic,
            },
        )
        .unwrap();
        for n in [8, 16, 32] {
            let bound = v.discretization_error_bound(n);
            assert!((bound / v.discretization_error_bound(2 * n) - 2.0).abs() < 1e-12);
            let d = v.discretize(n);
            let worst = (0..4000)
                .map(|i| -1.2 + 2.4 * (i as f64 + 0.5) / 4000.0)
                .filter(|x| (x - 0.25).abs() > 1e-9)
                .map(|x| (d.value_at(x) - v.value_at(x)).abs())
                .fold(0.0, f64::max);
            assert!(worst <= bound * (1.0 + 1e-9), "n={n}: {worst} > {bound}");
        }
    }

    #[test]
    fn smooth_edges_and_nodes() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let bump = Perturbation::Bump {
            amplitude: 1.0,
            half_width: 1.0,
            profile: BumpProfile::Parabolic,
        };
        let v = SmoothPerturbationPotential::new(l, 1.5, bump.clone()).unwrap();
        assert_eq!(v.support_hull(), SupportHull { a: -1.0, b: 1.5 });
        assert_eq!(v.nodes(), vec![-1.0, 1.0, 1.5]);
        let v = SmoothPerturbationPotential::new(l, 0.0, bump).unwrap();
        assert_eq!(v.nodes(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(v.value_at(-0.5), 1.0 + 0.75);
        assert_eq!(v.value_at(0.5), 0.75);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{"v_minus": 4, "v_plus": 0, "breakpoints": [0, 1], "values": [8]}"#;
        let v = Potential::from_json_str(text).unwrap();
        assert_eq!(v, Potential::Piecewise(barrier()));
        assert_eq!(Potential::from_json_value(v.to_json_value()).unwrap(), v);

        let text = r#"{"v_minus": 1, "v_plus": 0, "beta": 0.5,
            "perturbation": {"kind": "bump", "amplitude": 1.0, "half_width": 1.0}}"#;
        let v = Potential::from_json_str(text).unwrap();
        assert!(matches!(v, Potential::Smooth(_)));
        assert_eq!(Potential::from_json_value(v.to_json_value()).unwrap(), v);

        let bad = r#"{"v_minus": 4, "v_plus": 0, "breakpoints": [1, 0], "values": [8]}"#;
        let err = Potential::from_json_str(bad).unwrap_err().to_string();
        assert!(err.contains("breakpoints"), "{err}");
        let bad = r#"{"v_minus": 0, "v_plus": 4, "breakpoints": [0], "values": []}"#;
        assert!(Potential::from_json_str(bad).is_err());
        let bad = r#"{"v_minus": 1, "v_plus": 0, "beta": 0,
            "perturbation": {"kind": "table", "half_width": 1, "x": [-1, 0, 1], "p": [0, 1, 0.5]}}"#;
        let err = Potential::from_json_str(bad).unwrap_err().to_string();
        assert!(err.contains("perturbation.p"), "{err}");
        let bad = r#"{"v_minus": 1, "v_plus": 0}"#;
        assert!(Potential::from_json_str(bad).is_err());
    }

    #[test]
    fn table_interpolates_linearly() {
        let p = Perturbation::Table {
            half_width: 1.0,
            x: vec![-1.0, 0.0, 1.0],
            p: vec![0.0, 2.0, 0.0],
        };
        assert_eq!(p.value_at(-0.5), 1.0);
        assert_eq!(p.value_at(0.25), 1.5);
        assert_eq!(p.value_at(1.5), 0.0);
        assert_eq!(p.max_slope(), 2.0);
    }
}
