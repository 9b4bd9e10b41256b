//! Zeros of the Jost Wronskian `D` on a chosen sheet: argument-principle
//! counting, quadtree subdivision, Newton refinement and certification.
//!
//! `D` is holomorphic on each sheet away from the cut `[V+, inf)`. A search
//! rectangle is therefore split into cut-free pieces: the part left of
//! `V+ - eps` (which may cross the real axis) and the parts above `+eta` and
//! below `-eta`. The excluded strip along the cut is covered by a real-axis
//! scan that reports near-zeros as candidates instead of resonances.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::riemann::{SheetSignature, Sign, StepLevels, SurfaceError, SurfacePoint};
use crate::scaled::Scaled;
use crate::scattering::{jost_pair, JostEngine, ScatteringError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResonanceError {
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error("D is too small on the contour near z = {z}; move the contour")]
    ContourTooClose { z: Complex64 },
    #[error("winding number {value} is not close to an integer")]
    NonIntegerWinding { value: f64 },
    #[error("invalid search region: {0}")]
    Region(String),
    #[error("real-axis scan found {found} eigenvalues but the contour count is {counted}")]
    EigenvalueCount { found: usize, counted: i64 },
}

impl From<SurfaceError> for ResonanceError {
    fn from(e: SurfaceError) -> Self {
        ResonanceError::Scattering(e.into())
    }
}

/// Axis-aligned rectangle in the `z`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, ResonanceError> {
        let all = [re_min, re_max, im_min, im_max];
        if all.iter().any(|v| !v.is_finite()) || re_min >= re_max || im_min >= im_max {
            return Err(ResonanceError::Region(format!(
                "need re_min < re_max and im_min < im_max, got [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Square of half-side `h` centred at `c`.
    pub fn square(c: Complex64, h: f64) -> Self {
        Self {
            re_min: c.re - h,
            re_max: c.re + h,
            im_min: c.im - h,
            im_max: c.im + h,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn max_side(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    /// Membership with an absolute slack on every side.
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    /// Distance from an interior point to the boundary.
    pub fn inner_distance(&self, z: Complex64) -> f64 {
        (z.re - self.re_min)
            .min(self.re_max - z.re)
            .min(z.im - self.im_min)
            .min(self.im_max - z.im)
    }

    pub fn mirror(&self) -> Self {
        Self {
            re_min: self.re_min,
            re_max: self.re_max,
            im_min: -self.im_max,
            im_max: -self.im_min,
        }
    }

    /// Counter-clockwise corners starting at the bottom left.
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    /// Left of the branch points; may cross the real axis.
    Full,
    /// Above the cut strip.
    Upper,
    /// Below the cut strip.
    Lower,
}

/// A cut-free rectangle of a search region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub kind: PieceKind,
    pub rect: Rect,
}

/// Rectangle on one sheet, minus a strip of half-width `exclusion` along the
/// cut and a disk of that radius around each branch point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub sheet: SheetSignature,
    pub rect: Rect,
    pub exclusion: f64,
}

impl SearchRegion {
    /// Uses the default exclusion `1e-3 (V- - V+)`.
    pub fn new(sheet: SheetSignature, rect: Rect, levels: &StepLevels) -> Self {
        Self {
            sheet,
            rect,
            exclusion: 1e-3 * levels.gap(),
        }
    }

    pub fn with_exclusion(mut self, exclusion: f64) -> Self {
        self.exclusion = exclusion;
        self
    }

    pub fn pieces(&self, levels: &StepLevels) -> Vec<Piece> {
        let r = self.rect;
        let e = self.exclusion;
        let split = levels.v_plus() - e;
        let mut out = Vec::new();
        if r.re_min < split {
            out.push(Piece {
                kind: PieceKind::Full,
                rect: Rect {
                    re_max: r.re_max.min(split),
                    ..r
                },
            });
        }
        if r.re_max > split {
            let re_min = r.re_min.max(split);
            if r.im_max > e {
                out.push(Piece {
                    kind: PieceKind::Upper,
                    rect: Rect {
                        re_min,
                        im_min: r.im_min.max(e),
                        ..r
                    },
                });
            }
            if r.im_min < -e {
                out.push(Piece {
                    kind: PieceKind::Lower,
                    rect: Rect {
                        re_min,
                        im_max: r.im_max.min(-e),
                        ..r
                    },
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocateSettings {
    /// Newton stops once the update is below `tol * max(1, |z|)`.
    pub tol: f64,
    /// Boxes smaller than `min_box * max(1, |z|)` are not split further.
    pub min_box: f64,
    pub max_depth: usize,
    pub newton_max_iter: usize,
    /// Locate below the real axis and reflect (`D(conj z) = conj D(z)`).
    pub use_conjugate_symmetry: bool,
    /// Scan the excluded strip for real-axis zeros and branch points.
    pub scan_boundary: bool,
    pub threads: usize,
}

impl Default for LocateSettings {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            min_box: 1e-9,
            max_depth: 80,
            newton_max_iter: 60,
            use_conjugate_symmetry: true,
            scan_boundary: true,
            threads: 1,
        }
    }
}

/// A located zero of `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub point: SurfacePoint,
    pub multiplicity: u32,
    pub refined_z: Complex64,
    /// `|D / D'|` at `refined_z`: the remaining Newton correction.
    pub residual: f64,
    /// Certifying contour; the winding number of `D` around it equals
    /// `multiplicity`.
    #[serde(rename = "box")]
    pub certificate: Rect,
}

impl Resonance {
    pub fn mirror(&self) -> Self {
        Self {
            point: self.point.mirror(),
            refined_z: self.refined_z.conj(),
            certificate: self.certificate.mirror(),
            ..*self
        }
    }
}

/// A box with positive count that could not be resolved into zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnresolvedBox {
    pub rect: Rect,
    pub count: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// `D` nearly vanishes at `V+` or `V-`; multiplicity is not certified.
    BranchPoint,
    /// Real zero with `V+ < z <= V-`, where none should exist.
    GapZero,
    /// Real zero above `V-` (on the cut of both roots).
    BoundaryZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCandidate {
    pub point: SurfacePoint,
    pub kind: CandidateKind,
    /// `|W| / (|f- f+'| + |f-' f+|)` at the point: small means `D` nearly vanishes.
    pub cancellation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocateReport {
    pub region: SearchRegion,
    pub pieces: Vec<Piece>,
    pub outer_count: i64,
    pub resonances: Vec<Resonance>,
    pub unresolved: Vec<UnresolvedBox>,
    pub candidates: Vec<BoundaryCandidate>,
    pub evaluations: usize,
}

impl LocateReport {
    pub fn located_count(&self) -> i64 {
        self.resonances.iter().map(|r| r.multiplicity as i64).sum()
    }

    pub fn unresolved_count(&self) -> i64 {
        self.unresolved.iter().map(|u| u.count).sum()
    }

    /// Outer count equals located plus unresolved multiplicities.
    pub fn is_complete(&self) -> bool {
        self.outer_count == self.located_count() + self.unresolved_count()
    }
}

/// Evaluates `D` on one sheet, with memoization and a bound on how fast its
/// phase can turn along a contour.
pub struct Evaluator<'a, E: JostEngine + ?Sized> {
    engine: &'a E,
    sheet: SheetSignature,
    levels: StepLevels,
    length: f64,
    range: (f64, f64),
    cache: HashMap<(u64, u64), Scaled>,
    evaluations: usize,
}

/// Target phase increment between initial contour samples.
const PHASE_STEP: f64 = PI / 6.0;

impl<'a, E: JostEngine + ?Sized> Evaluator<'a, E> {
    pub fn new(engine: &'a E, sheet: SheetSignature) -> Self {
        let (x0, xn) = (engine.left_edge(), engine.right_edge());
        Self {
            engine,
            sheet,
            levels: engine.levels(),
            length: x0.abs() + xn.abs() + (xn - x0) + 1.0,
            range: engine.value_range(),
            cache: HashMap::new(),
            evaluations: 0,
        }
    }

    pub fn sheet(&self) -> SheetSignature {
        self.sheet
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// `D` at an off-cut point of this sheet.
    pub fn d(&mut self, z: Complex64) -> Result<Scaled, ResonanceError> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let p = SurfacePoint::new(z, self.sheet, None, &self.levels)?;
        let v = jost_pair(self.engine, &p)?.wronskian();
        self.evaluations += 1;
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Heuristic bound on `|d arg D / dz|` away from zeros: every factor of
    /// `D` oscillates like `exp(i sqrt(z - v) x)` with `v` in the value range.
    fn phase_rate(&self, z: Complex64) -> f64 {
        let (lo, hi) = self.range;
        let dx = if z.re < lo {
            lo - z.re
        } else if z.re > hi {
            z.re - hi
        } else {
            0.0
        };
        let dist = dx.hypot(z.im);
        // The accumulated phase L sqrt(dist) stays finite as dist -> 0, so a
        // step of (PHASE_STEP / L)^2 is always safe.
        self.length / (2.0 * dist.sqrt().max(PHASE_STEP / self.length))
    }

    fn edge_nodes(&self, a: Complex64, b: Complex64) -> Vec<Complex64> {
        let len = (b - a).norm();
        let mut nodes = vec![a];
        let mut t = 0.0;
        loop {
            let z = a + (b - a) * t;
            let mut h = PHASE_STEP / self.phase_rate(z);
            let ahead = a + (b - a) * (t + h / len).min(1.0);
            h = h.min(PHASE_STEP / self.phase_rate(ahead)).min(len / 4.0);
            t += h / len;
            if t >= 1.0 - 1e-12 {
                break;
            }
            nodes.push(a + (b - a) * t);
        }
        nodes.push(b);
        nodes
    }

    fn segment_phase(
        &mut self,
        za: Complex64,
        da: Scaled,
        zb: Complex64,
        db: Scaled,
        depth: usize,
    ) -> Result<f64, ResonanceError> {
        if da.is_zero() {
            return Err(ResonanceError::ContourTooClose { z: za });
        }
        if db.is_zero() {
            return Err(ResonanceError::ContourTooClose { z: zb });
        }
        let delta = (db.mantissa / da.mantissa).arg();
        if delta.abs() <= FRAC_PI_4 {
            return Ok(delta);
        }
        if depth > 64 || (zb - za).norm() <= 1e-13 * za.norm().max(1.0) {
            return Err(ResonanceError::ContourTooClose { z: 0.5 * (za + zb) });
        }
        let zm = 0.5 * (za + zb);
        let dm = self.d(zm)?;
        Ok(self.segment_phase(za, da, zm, dm, depth + 1)? + self.segment_phase(zm, dm, zb, db, depth + 1)?)
    }

    /// Total change of `arg D` along the segment `a -> b`.
    fn edge_phase(&mut self, a: Complex64, b: Complex64) -> Result<f64, ResonanceError> {
        let nodes = self.edge_nodes(a, b);
        let mut total = 0.0;
        let mut prev = self.d(nodes[0])?;
        for w in nodes.windows(2) {
            let next = self.d(w[1])?;
            total += self.segment_phase(w[0], prev, w[1], next, 0)?;
            prev = next;
        }
        Ok(total)
    }

    /// Winding number of `D` around the boundary of `rect` (counter-clockwise).
    pub fn winding(&mut self, rect: &Rect) -> Result<i64, ResonanceError> {
        let c = rect.corners();
        let mut total = 0.0;
        for i in 0..4 {
            total += self.edge_phase(c[i], c[(i + 1) % 4])?;
        }
        let w = total / (2.0 * PI);
        let n = w.round();
        if (w - n).abs() > 0.2 {
            return Err(ResonanceError::NonIntegerWinding { value: w });
        }
        Ok(n as i64)
    }

    /// `D'(z)` from the four-point stencil `sum_j i^-j D(z + i^j h) / 4h`
    /// (error `O(h^4)`), with one Richardson step on `h, h/2`.
    pub fn derivative(&mut self, z: Complex64, h: f64) -> Result<Scaled, ResonanceError> {
        let stencil = |ev: &mut Self, h: f64| -> Result<Scaled, ResonanceError> {
            let i = Complex64::i();
            let terms = [
                (Complex64::new(1.0, 0.0), ev.d(z + h)?),
                (-i, ev.d(z + i * h)?),
                (Complex64::new(-1.0, 0.0), ev.d(z - h)?),
                (i, ev.d(z - i * h)?),
            ];
            let mut acc = Scaled::ZERO;
            for (c, v) in terms {
                acc = acc.add(v.scale(c));
            }
            Ok(acc.scale(Complex64::new(1.0 / (4.0 * h), 0.0)))
        };
        let coarse = stencil(self, h)?;
        let fine = stencil(self, 0.5 * h)?;
        Ok(fine
            .scale(Complex64::new(16.0 / 15.0, 0.0))
            .sub(coarse.scale(Complex64::new(1.0 / 15.0, 0.0))))
    }

    fn derivative_step(&self, z: Complex64, scale: f64) -> f64 {
        (1e-3 * scale)
            .min(0.02 / self.phase_rate(z))
            .max(1e-7 * z.norm().max(1.0))
    }

    /// Newton update `m D / D'` at `z`.
    fn newton_step(&mut self, z: Complex64, mult: u32, scale: f64) -> Result<Complex64, ResonanceError> {
        let d = self.d(z)?;
        if d.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let dp = self.derivative(z, self.derivative_step(z, scale))?;
        Ok(d.div(dp).to_complex() * mult as f64)
    }

    /// Newton iteration from `start`, abandoned if it leaves `rect`.
    fn newton(
        &mut self,
        start: Complex64,
        mult: u32,
        rect: &Rect,
        settings: &LocateSettings,
    ) -> Result<Option<Complex64>, ResonanceError> {
        let scale = rect.max_side();
        let mut z = start;
        for _ in 0..settings.newton_max_iter {
            let step = self.newton_step(z, mult, scale)?;
            if !step.re.is_finite() || !step.im.is_finite() {
                return Ok(None);
            }
            let next = z - step;
            if !rect.contains(next, 0.25 * scale) {
                return Ok(None);
            }
            z = next;
            if step.norm() <= settings.tol * z.norm().max(1.0) {
                return Ok(Some(z));
            }
        }
        Ok(None)
    }
}

enum Outcome {
    Found(Resonance),
    Split(Vec<(Rect, i64)>),
    Unresolved(UnresolvedBox),
}

/// Offsets of the split line from the midpoint, tried in order when a child
/// contour passes too close to a zero or the counts do not add up.
const SPLIT_NUDGES: [f64; 6] = [0.0, 0.0371, -0.0529, 0.0913, -0.1187, 0.1571];

fn children(rect: &Rect, nudge: f64) -> Vec<Rect> {
    let xm = rect.re_min + (0.5 + nudge) * rect.width();
    let ym = rect.im_min + (0.5 + nudge) * rect.height();
    let (w, h) = (rect.width(), rect.height());
    if w > 2.0 * h {
        vec![Rect { re_max: xm, ..*rect }, Rect { re_min: xm, ..*rect }]
    } else if h > 2.0 * w {
        vec![Rect { im_max: ym, ..*rect }, Rect { im_min: ym, ..*rect }]
    } else {
        vec![
            Rect {
                re_max: xm,
                im_max: ym,
                ..*rect
            },
            Rect {
                re_min: xm,
                im_max: ym,
                ..*rect
            },
            Rect {
                re_max: xm,
                im_min: ym,
                ..*rect
            },
            Rect {
                re_min: xm,
                im_min: ym,
                ..*rect
            },
        ]
    }
}

fn split<E: JostEngine + ?Sized>(
    ev: &mut Evaluator<E>,
    rect: &Rect,
    count: i64,
) -> Result<Option<Vec<(Rect, i64)>>, ResonanceError> {
    'nudge: for nudge in SPLIT_NUDGES {
        let mut out = Vec::new();
        let mut sum = 0;
        for child in children(rect, nudge) {
            match ev.winding(&child) {
                Ok(n) => {
                    sum += n;
                    if n != 0 {
                        out.push((child, n));
                    }
                }
                Err(ResonanceError::ContourTooClose { .. }) | Err(ResonanceError::NonIntegerWinding { .. }) => {
                    continue 'nudge
                }
                Err(e) => return Err(e),
            }
        }
        if sum == count && out.iter().all(|(_, n)| *n > 0) {
            return Ok(Some(out));
        }
    }
    Ok(None)
}

fn try_resolve<E: JostEngine + ?Sized>(
    ev: &mut Evaluator<E>,
    rect: &Rect,
    piece: &Rect,
    count: i64,
    settings: &LocateSettings,
) -> Result<Option<Resonance>, ResonanceError> {
    let mult = count as u32;
    let Some(z) = ev.newton(rect.center(), mult, rect, settings)? else {
        return Ok(None);
    };
    // Ownership: the zero belongs to the box that contains it.
    let slack = 1e-12 * z.norm().max(1.0);
    if !rect.contains(z, slack) {
        return Ok(None);
    }
    let half = (0.25 * rect.width().min(rect.height())).min(0.9 * piece.inner_distance(z));
    if half <= 1e-12 * z.norm().max(1.0) {
        return Ok(None);
    }
    let certificate = Rect::square(z, half);
    match ev.winding(&certificate) {
        Ok(n) if n == count => {}
        Ok(_) | Err(ResonanceError::ContourTooClose { .. }) | Err(ResonanceError::NonIntegerWinding { .. }) => {
            return Ok(None)
        }
        Err(e) => return Err(e),
    }
    let residual = ev.newton_step(z, 1, rect.max_side())?.norm();
    Ok(Some(Resonance {
        point: SurfacePoint::new(z, ev.sheet, None, &ev.levels)?,
        multiplicity: mult,
        refined_z: z,
        residual,
        certificate,
    }))
}

fn process<E: JostEngine + ?Sized>(
    ev: &mut Evaluator<E>,
    item: &(Rect, i64, usize),
    piece: &Rect,
    settings: &LocateSettings,
) -> Result<Outcome, ResonanceError> {
    let (rect, count, depth) = *item;
    let small = rect.max_side() <= settings.min_box * rect.center().norm().max(1.0);
    if count == 1 || small {
        if let Some(r) = try_resolve(ev, &rect, piece, count, settings)? {
            return Ok(Outcome::Found(r));
        }
    }
    if small || depth >= settings.max_depth {
        return Ok(Outcome::Unresolved(UnresolvedBox { rect, count }));
    }
    Ok(match split(ev, &rect, count)? {
        Some(children) => Outcome::Split(children),
        None => Outcome::Unresolved(UnresolvedBox { rect, count }),
    })
}

/// Outer count of a piece. Sides that come from the user rectangle are moved
/// outward slightly if `D` is too small on them.
fn piece_count<E: JostEngine + ?Sized>(
    ev: &mut Evaluator<E>,
    piece: &Piece,
    user: &Rect,
) -> Result<(Rect, i64), ResonanceError> {
    let mut last = None;
    for f in [0.0, 1e-4, 3e-4, 7e-4] {
        let d = f * piece.rect.max_side();
        let r = piece.rect;
        let grown = Rect {
            re_min: if r.re_min == user.re_min { r.re_min - d } else { r.re_min },
            re_max: if r.re_max == user.re_max { r.re_max + d } else { r.re_max },
            im_min: if r.im_min == user.im_min { r.im_min - d } else { r.im_min },
            im_max: if r.im_max == user.im_max { r.im_max + d } else { r.im_max },
        };
        match ev.winding(&grown) {
            Ok(n) => return Ok((grown, n)),
            Err(e @ ResonanceError::ContourTooClose { .. }) | Err(e @ ResonanceError::NonIntegerWinding { .. }) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("loop ran"))
}

/// Quadtree over one piece, processed level by level.
fn locate_piece<'a, E: JostEngine + Sync + ?Sized>(
    engine: &'a E,
    sheet: SheetSignature,
    rect: Rect,
    count: i64,
    settings: &LocateSettings,
    evaluators: &mut Vec<Evaluator<'a, E>>,
) -> Result<(Vec<Resonance>, Vec<UnresolvedBox>), ResonanceError> {
    let mut found = Vec::new();
    let mut unresolved = Vec::new();
    let mut frontier = if count > 0 { vec![(rect, count, 0usize)] } else { Vec::new() };
    let workers = settings.threads.max(1);
    while evaluators.len() < workers {
        evaluators.push(Evaluator::new(engine, sheet));
    }
    while !frontier.is_empty() {
        let outcomes: Vec<Result<Outcome, ResonanceError>> = if workers == 1 || frontier.len() == 1 {
            let ev = &mut evaluators[0];
            frontier.iter().map(|item| process(ev, item, &rect, settings)).collect()
        } else {
            // Worker w takes items w, w + workers, ...; results are put back in
            // frontier order so the outcome does not depend on scheduling.
            let frontier_ref = &frontier;
            let mut slots: Vec<Option<Result<Outcome, ResonanceError>>> = (0..frontier.len()).map(|_| None).collect();
            std::thread::scope(|s| {
                let handles: Vec<_> = evaluators
                    .iter_mut()
                    .enumerate()
                    .map(|(w, ev)| {
                        s.spawn(move || {
                            frontier_ref
                                .iter()
                                .enumerate()
                                .skip(w)
                                .step_by(workers)
                                .map(|(i, item)| (i, process(ev, item, &rect, settings)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                for h in handles {
                    for (i, r) in h.join().expect("worker panicked") {
                        slots[i] = Some(r);
                    }
                }
            });
            slots.into_iter().map(|s| s.expect("every item processed")).collect()
        };
        let mut next = Vec::new();
        for (item, outcome) in frontier.iter().zip(outcomes) {
            match outcome? {
                Outcome::Found(r) => found.push(r),
                Outcome::Unresolved(u) => unresolved.push(u),
                Outcome::Split(children) => {
                    next.extend(children.into_iter().map(|(r, n)| (r, n, item.2 + 1)));
                }
            }
        }
        frontier = next;
    }
    Ok((found, unresolved))
}

fn sort_key(z: Complex64, sheet: SheetSignature) -> (f64, f64, SheetSignature) {
    (z.re, z.im, sheet)
}

/// Deterministic order: by `Re z`, then `Im z`, then sheet.
pub fn sort_resonances(list: &mut [Resonance]) {
    list.sort_by(|a, b| {
        let (ka, kb) = (sort_key(a.refined_z, a.point.sheet), sort_key(b.refined_z, b.point.sheet));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.cmp(&kb.2))
    });
}

/// Merges entries closer than `eps * max(1, |z|)` on the same sheet.
fn dedupe(list: &mut Vec<Resonance>, eps: f64) {
    let mut out: Vec<Resonance> = Vec::with_capacity(list.len());
    for r in list.drain(..) {
        let dup = out.iter().any(|o| {
            o.point.sheet == r.point.sheet
                && (o.refined_z - r.refined_z).norm() <= eps * r.refined_z.norm().max(1.0)
        });
        if !dup {
            out.push(r);
        }
    }
    *list = out;
}

/// Winding number of `D` on `sheet` around `rect`, which must not meet the cut.
pub fn winding_count<E: JostEngine + ?Sized>(
    engine: &E,
    sheet: SheetSignature,
    rect: &Rect,
) -> Result<i64, ResonanceError> {
    let levels = engine.levels();
    let crosses_cut = rect.re_max >= levels.v_plus() && rect.im_min <= 0.0 && rect.im_max >= 0.0;
    if crosses_cut {
        return Err(ResonanceError::Region(format!(
            "contour meets the cut [{}, inf)",
            levels.v_plus()
        )));
    }
    Evaluator::new(engine, sheet).winding(rect)
}

/// Multiplicity of the zero at `p` from a square contour of half-side `radius`.
pub fn multiplicity_at<E: JostEngine + ?Sized>(
    engine: &E,
    p: &SurfacePoint,
    radius: f64,
) -> Result<i64, ResonanceError> {
    winding_count(engine, p.sheet, &Rect::square(p.z, radius))
}

/// All zeros of `D` in the region, with completeness bookkeeping.
pub fn locate<E: JostEngine + Sync + ?Sized>(
    engine: &E,
    region: &SearchRegion,
    settings: &LocateSettings,
) -> Result<LocateReport, ResonanceError> {
    let levels = engine.levels();
    if !(region.exclusion > 0.0) {
        return Err(ResonanceError::Region("exclusion must be positive".into()));
    }
    let pieces = region.pieces(&levels);
    let symmetric = settings.use_conjugate_symmetry && region.rect.im_min == -region.rect.im_max;
    let mut evaluators: Vec<Evaluator<E>> = vec![Evaluator::new(engine, region.sheet)];
    let mut resonances = Vec::new();
    let mut unresolved = Vec::new();
    let mut outer_count = 0;
    let mut used_pieces = Vec::new();
    let mut mirrored: Option<(Vec<Resonance>, Vec<UnresolvedBox>, i64, Rect)> = None;
    for piece in &pieces {
        if symmetric && piece.kind == PieceKind::Upper {
            continue;
        }
        let (rect, count) = piece_count(&mut evaluators[0], piece, &region.rect)?;
        let (found, open) = locate_piece(engine, region.sheet, rect, count, settings, &mut evaluators)?;
        outer_count += count;
        used_pieces.push(Piece { kind: piece.kind, rect });
        if symmetric && piece.kind == PieceKind::Lower {
            mirrored = Some((
                found.iter().map(Resonance::mirror).collect(),
                open.iter()
                    .map(|u| UnresolvedBox {
                        rect: u.rect.mirror(),
                        count: u.count,
                    })
                    .collect(),
                count,
                rect.mirror(),
            ));
        }
        resonances.extend(found);
        unresolved.extend(open);
    }
    if let Some((found, open, count, rect)) = mirrored {
        if pieces.iter().any(|p| p.kind == PieceKind::Upper) {
            resonances.extend(found);
            unresolved.extend(open);
            outer_count += count;
            used_pieces.push(Piece {
                kind: PieceKind::Upper,
                rect,
            });
        }
    }
    dedupe(&mut resonances, 1e-9);
    sort_resonances(&mut resonances);
    let candidates = if settings.scan_boundary {
        let lo = region.rect.re_min.max(levels.v_plus());
        if region.rect.re_max > lo && region.rect.im_min <= region.exclusion && region.rect.im_max >= -region.exclusion {
            boundary_scan(engine, region.sheet, lo, region.rect.re_max)?
        } else {
            Vec::new()
        }
    } else {
        Vec::new()
    };
    let evaluations = evaluators.iter().map(|e| e.evaluations).sum();
    Ok(LocateReport {
        region: *region,
        pieces: used_pieces,
        outer_count,
        resonances,
        unresolved,
        candidates,
        evaluations,
    })
}

/// Threshold on the Wronskian cancellation below which a real point is
/// reported as a zero candidate.
pub const CANDIDATE_CANCELLATION: f64 = 1e-8;

/// Local minima of `ln |D|` along the cut are refined only when the sample
/// cancellation is below this.
const SCAN_PREFILTER: f64 = 0.3;

fn cancellation<E: JostEngine + ?Sized>(engine: &E, p: &SurfacePoint) -> Result<f64, ResonanceError> {
    let pair = jost_pair(engine, p)?;
    Ok(pair.f_minus_left.wronskian_cancellation(&pair.f_plus_left))
}

/// Scans both boundary values of `D` on `[re_min, re_max]` (inside the cut)
/// for real zeros, and checks the branch points.
pub fn boundary_scan<E: JostEngine + ?Sized>(
    engine: &E,
    sheet: SheetSignature,
    re_min: f64,
    re_max: f64,
) -> Result<Vec<BoundaryCandidate>, ResonanceError> {
    let levels = engine.levels();
    let ev = Evaluator::new(engine, sheet);
    let mut out = Vec::new();
    for (v, _) in [(levels.v_plus(), 0), (levels.v_minus(), 1)] {
        if v >= re_min && v <= re_max {
            let p = SurfacePoint::with_side(Complex64::new(v, 0.0), sheet, Sign::Plus, &levels);
            let c = cancellation(engine, &p)?;
            if c < CANDIDATE_CANCELLATION {
                out.push(BoundaryCandidate {
                    point: p,
                    kind: CandidateKind::BranchPoint,
                    cancellation: c,
                });
            }
        }
    }
    // Sample points strictly inside the cut.
    let mut xs = Vec::new();
    let mut x = re_min;
    while x < re_max {
        xs.push(x);
        let z = Complex64::new(x, 0.0);
        x += (PHASE_STEP / 2.0 / ev.phase_rate(z)).max(1e-9 * x.abs().max(1.0));
    }
    xs.push(re_max);
    for side in [Sign::Plus, Sign::Minus] {
        let point = |x: f64| SurfacePoint::with_side(Complex64::new(x, 0.0), sheet, side, &levels);
        let lnd = |x: f64| -> Result<f64, ResonanceError> { Ok(jost_pair(engine, &point(x))?.wronskian().ln_abs()) };
        let vals: Vec<f64> = xs.iter().map(|&x| lnd(x)).collect::<Result<_, _>>()?;
        for i in 1..xs.len().saturating_sub(1) {
            if !(vals[i] < vals[i - 1] && vals[i] <= vals[i + 1]) {
                continue;
            }
            // Samples are a fraction of a phase period apart, so a real zero
            // leaves a sample with strong cancellation next to it.
            if cancellation(engine, &point(xs[i]))? > SCAN_PREFILTER {
                continue;
            }
            // Golden-section search on ln|D|.
            let (mut a, mut b) = (xs[i - 1], xs[i + 1]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (lnd(c)?, lnd(d)?);
            for _ in 0..80 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = lnd(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = lnd(d)?;
                }
            }
            let xm = 0.5 * (a + b);
            let p = point(xm);
            if p.is_branch_point(&levels) {
                continue;
            }
            let c = cancellation(engine, &p)?;
            if c < CANDIDATE_CANCELLATION {
                let kind = if xm <= levels.v_minus() {
                    CandidateKind::GapZero
                } else {
                    CandidateKind::BoundaryZero
                };
                out.push(BoundaryCandidate {
                    point: p,
                    kind,
                    cancellation: c,
                });
            }
        }
    }
    Ok(out)
}

/// Eigenvalues: physical-sheet zeros of `D`, all real and below `V+`.
///
/// On the physical sheet `D` is real for real `z < V+`, so sign changes on a
/// sampled grid are bisected, and the number found is checked against the
/// winding number of a box around the segment.
pub fn eigenvalues<E: JostEngine + ?Sized>(engine: &E, tol: f64) -> Result<Vec<f64>, ResonanceError> {
    let levels = engine.levels();
    let sheet = SheetSignature::PHYSICAL;
    let (lo, _) = engine.value_range();
    let eps = 1e-3 * levels.gap();
    let hi = levels.v_plus() - eps;
    if lo >= hi {
        return Ok(Vec::new());
    }
    let a = lo - 1.0;
    let mut ev = Evaluator::new(engine, sheet);
    let half = 0.5 * (hi - a).max(1.0);
    let counted = ev.winding(&Rect {
        re_min: a,
        re_max: hi,
        im_min: -half,
        im_max: half,
    })?;
    let mut refine = 1.0;
    let mut found = Vec::new();
    for _ in 0..4 {
        found.clear();
        let sign = |ev: &mut Evaluator<E>, x: f64| -> Result<f64, ResonanceError> {
            Ok(ev.d(Complex64::new(x, 0.0))?.mantissa.re.signum())
        };
        let mut x = a;
        let mut s = sign(&mut ev, x)?;
        while x < hi {
            let step = PHASE_STEP / (4.0 * refine) / ev.phase_rate(Complex64::new(x, 0.0));
            let xn = (x + step).min(hi);
            let sn = sign(&mut ev, xn)?;
            if sn != s {
                let (mut l, mut r) = (x, xn);
                while r - l > tol * l.abs().max(1.0) {
                    let m = 0.5 * (l + r);
                    if sign(&mut ev, m)? == s {
                        l = m;
                    } else {
                        r = m;
                    }
                }
                found.push(0.5 * (l + r));
            }
            x = xn;
            s = sn;
        }
        if found.len() as i64 == counted {
            assert!(found.iter().all(|&e| e < levels.v_plus()));
            return Ok(found);
        }
        refine *= 4.0;
    }
    Err(ResonanceError::EigenvalueCount {
        found: found.len(),
        counted,
    })
}

/// CSV header of the resonance export.
pub const CSV_HEADER: &str = "re_z,im_z,s_plus,s_minus,multiplicity,re_rplus,im_rplus,re_rminus,im_rminus,residual";

/// CSV export with 17 significant digits.
pub fn to_csv(list: &[Resonance], levels: &StepLevels) -> Result<String, ResonanceError> {
    let records: Vec<ResonanceRecord> = list
        .iter()
        .map(|r| ResonanceRecord::from_resonance(r, levels))
        .collect::<Result<_, _>>()?;
    Ok(records_to_csv(&records))
}

pub fn records_to_csv(records: &[ResonanceRecord]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.z.re,
            r.z.im,
            r.sheet.s_plus.value() as i32,
            r.sheet.s_minus.value() as i32,
            r.multiplicity,
            r.r_plus.re,
            r.r_plus.im,
            r.r_minus.re,
            r.r_minus.im,
            r.residual
        );
    }
    s
}

/// One row of the CSV export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub z: Complex64,
    pub sheet: SheetSignature,
    pub multiplicity: u32,
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    pub residual: f64,
}

impl ResonanceRecord {
    pub fn from_resonance(r: &Resonance, levels: &StepLevels) -> Result<Self, ResonanceError> {
        let (rp, rm) = r.point.roots(levels)?;
        Ok(Self {
            z: r.refined_z,
            sheet: r.point.sheet,
            multiplicity: r.multiplicity,
            r_plus: rp,
            r_minus: rm,
            residual: r.residual,
        })
    }
}

impl ResonanceRecord {
    /// A boundary candidate as a record of multiplicity 1; `residual` holds
    /// the cancellation.
    pub fn from_candidate(c: &BoundaryCandidate, levels: &StepLevels) -> Result<Self, ResonanceError> {
        let (rp, rm) = c.point.roots(levels)?;
        Ok(Self {
            z: c.point.z,
            sheet: c.point.sheet,
            multiplicity: 1,
            r_plus: rp,
            r_minus: rm,
            residual: c.cancellation,
        })
    }
}

impl LocateReport {
    /// Located zeros as records, optionally followed by the boundary candidates.
    pub fn records(&self, levels: &StepLevels, with_candidates: bool) -> Result<Vec<ResonanceRecord>, ResonanceError> {
        let mut out: Vec<ResonanceRecord> = self
            .resonances
            .iter()
            .map(|r| ResonanceRecord::from_resonance(r, levels))
            .collect::<Result<_, _>>()?;
        if with_candidates {
            for c in &self.candidates {
                out.push(ResonanceRecord::from_candidate(c, levels)?);
            }
        }
        Ok(out)
    }
}

/// Locates zeros on each listed sheet in the square `|Re z|, |Im z| <= half_side`.
pub fn survey<E: JostEngine + Sync + ?Sized>(
    engine: &E,
    sheets: &[SheetSignature],
    half_side: f64,
    settings: &LocateSettings,
) -> Result<Vec<LocateReport>, ResonanceError> {
    let levels = engine.levels();
    let rect = Rect::new(-half_side, half_side, -half_side, half_side)?;
    sheets
        .iter()
        .map(|&sheet| locate(engine, &SearchRegion::new(sheet, rect, &levels), settings))
        .collect()
}

/// Reads the CSV export back.
pub fn from_csv(text: &str) -> Result<Vec<ResonanceRecord>, ResonanceError> {
    let bad = |line: usize, msg: &str| ResonanceError::Region(format!("csv line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, "missing or wrong header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 10 {
            return Err(bad(i + 1, "expected 10 fields"));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(i + 1, "bad number"));
        let sign = |k: usize| match f[k] {
            "1" | "+1" => Ok(Sign::Plus),
            "-1" => Ok(Sign::Minus),
            _ => Err(bad(i + 1, "sign must be 1 or -1")),
        };
        out.push(ResonanceRecord {
            z: Complex64::new(num(0)?, num(1)?),
            sheet: SheetSignature::new(sign(2)?, sign(3)?),
            multiplicity: f[4].parse().map_err(|_| bad(i + 1, "bad multiplicity"))?,
            r_plus: Complex64::new(num(5)?, num(6)?),
            r_minus: Complex64::new(num(7)?, num(8)?),
            residual: num(9)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PiecewiseConstantPotential;

    fn barrier() -> PiecewiseConstantPotential {
        let l = StepLevels::new(0.0, 4.0).unwrap();
        PiecewiseConstantPotential::new(l, vec![0.0, 1.0], vec![8.0]).unwrap()
    }

    #[test]
    fn pieces_avoid_the_cut() {
        let l = StepLevels::new(0.0, 4.0).unwrap();
        let r = SearchRegion::new(SheetSignature::MINUS_MINUS, Rect::new(-10.0, 10.0, -5.0, 5.0).unwrap(), &l);
        let p = r.pieces(&l);
        assert_eq!(p.len(), 3);
        for piece in &p {
            let q = piece.rect;
            assert!(!(q.re_max >= 0.0 && q.im_min <= 0.0 && q.im_max >= 0.0));
        }
    }

    #[test]
    fn pure_step_has_no_zeros() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = PiecewiseConstantPotential::step(l, 0.3);
        for sheet in SheetSignature::ALL {
            let region = SearchRegion::new(sheet, Rect::new(-100.0, 100.0, -100.0, 100.0).unwrap(), &l);
            let rep = locate(&v, &region, &LocateSettings::default()).unwrap();
            assert_eq!(rep.outer_count, 0);
            assert!(rep.resonances.is_empty());
        }
    }

    #[test]
    fn barrier_zeros_are_certified_and_complete() {
        let v = barrier();
        let l = v.levels();
        let region = SearchRegion::new(SheetSignature::MINUS_MINUS, Rect::new(-50.0, 300.0, -200.0, 200.0).unwrap(), &l);
        let rep = locate(&v, &region, &LocateSettings::default()).unwrap();
        assert!(rep.is_complete());
        assert!(rep.unresolved.is_empty());
        assert!(rep.outer_count > 4);
        for r in &rep.resonances {
            let p = r.point;
            let (rp, rm) = p.roots(&l).unwrap();
            assert!(rp.im < 0.0 && rm.im < 0.0);
            assert!(r.residual < 1e-8 * r.refined_z.norm().max(1.0));
        }
        // Mirror symmetry without using it.
        let plain = LocateSettings {
            use_conjugate_symmetry: false,
            ..LocateSettings::default()
        };
        let rep2 = locate(&v, &region, &plain).unwrap();
        assert_eq!(rep.resonances.len(), rep2.resonances.len());
        for a in &rep.resonances {
            let d = rep2
                .resonances
                .iter()
                .map(|b| (a.refined_z - b.refined_z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-8, "{}: {d}", a.refined_z);
        }
    }

    #[test]
    fn well_eigenvalues_match_contour_count() {
        let l = StepLevels::new(0.0, 1.0).unwrap();
        let v = PiecewiseConstantPotential::new(l, vec![0.0, 1.0], vec![-5.0]).unwrap();
        let e = eigenvalues(&v, 1e-12).unwrap();
        assert!(!e.is_empty());
        assert!(e.iter().all(|&x| x < 0.0 && x > -5.0));
        let n = winding_count(&v, SheetSignature::PHYSICAL, &Rect::new(-5.5, -1e-3, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!(n, e.len() as i64);
    }

    #[test]
    fn csv_round_trip() {
        let v = barrier();
        let l = v.levels();
        let region = SearchRegion::new(SheetSignature::MINUS_MINUS, Rect::new(0.0, 100.0, -100.0, -1.0).unwrap(), &l);
        let rep = locate(&v, &region, &LocateSettings::default()).unwrap();
        let csv = to_csv(&rep.resonances, &l).unwrap();
        let back = from_csv(&csv).unwrap();
        assert_eq!(back.len(), rep.resonances.len());
        for (a, b) in back.iter().zip(&rep.resonances) {
            assert_eq!(a.z, b.refined_z);
            assert_eq!(a.sheet, b.point.sheet);
        }
    }
}
