use std::f64::consts::PI;
use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use steplike::asymptotics::{
    counting_function, geometric_grid, indicator_estimate, predicted_slope, IndicatorEstimate, IndicatorTarget,
    SheetPredicate, GRID_RATIO,
};
use steplike::inverse::{
    f_from_forward, normalization_case_analysis, recover_r_minus_on_boundary, truncated_r2_check, BoundaryTrace,
    NormalizationReport, TruncationReport,
};
use steplike::potential::Potential;
use steplike::resonances::{
    locate, records_to_csv, survey, BoundaryCandidate, LocateSettings, Rect, ResonanceRecord, SearchRegion,
    UnresolvedBox,
};
use steplike::riemann::{SheetSignature, Sign, SurfacePoint};
use steplike::scattering::{check_identities, IdentityReport, IDENTITY_LABELS};
use steplike::scattering::ode::OdeSettings;
use steplike::scattering::{scattering_coefficients, Engine, ScatteringCoefficients};

use crate::config::{check_rect, parse_side, parse_sheet_choice, Format, RunConfig, SheetChoice, Target};
use crate::output::{emit, num, to_json};
use crate::{Cli, Command};

/// Exit status when boxes stay unresolved.
const EXIT_UNRESOLVED: u8 = 2;

const DEFAULT_ODE_STEP: f64 = 0.01;
const DEFAULT_POINT_TOL: f64 = 1e-10;

/// Config file fields overridden by whatever was given on the command line.
fn merged(cli: &Cli) -> Result<RunConfig> {
    let o = &cli.opts;
    let mut c = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    macro_rules! over {
        ($($f:ident),*) => { $( if o.$f.is_some() { c.$f = o.$f.clone(); } )* };
    }
    over!(potential, sheet, tol, rmax, rmin, ratio, out, format, seed, truncation_k, threads, ode_step, side, samples, target, zmin, zmax, grid);
    if let Some(r) = &o.rect {
        c.rect = Some([r[0], r[1], r[2], r[3]]);
    }
    if o.allow_unresolved {
        c.allow_unresolved = Some(true);
    }
    if o.a_priori_c0 {
        c.a_priori_c0 = Some(true);
    }
    if !o.points.is_empty() {
        c.points = Some(o.points.clone());
    }
    if !o.phi.is_empty() {
        c.phi = Some(o.phi.clone());
    }
    c.validate()?;
    Ok(c)
}

fn load_potential(c: &RunConfig) -> Result<Potential> {
    let path = c.potential.as_ref().context("--potential is required")?;
    Potential::from_path(path).with_context(|| format!("loading potential {}", path.display()))
}

/// Engine for pointwise evaluation (adaptive steps for smooth profiles).
fn point_engine(pot: &Potential, c: &RunConfig) -> Engine {
    let ode = match c.ode_step {
        Some(h) => OdeSettings::fixed(h),
        None => OdeSettings::with_tol(c.tol.unwrap_or(DEFAULT_POINT_TOL)),
    };
    Engine::new(pot, ode)
}

/// Engine for contour work: a z-independent mesh keeps `D` analytic.
fn contour_engine(pot: &Potential, c: &RunConfig) -> Engine {
    Engine::new(pot, OdeSettings::fixed(c.ode_step.unwrap_or(DEFAULT_ODE_STEP)))
}

fn locate_settings(c: &RunConfig) -> LocateSettings {
    let mut s = LocateSettings::default();
    if let Some(t) = c.tol {
        s.tol = t;
    }
    if let Some(n) = c.threads {
        s.threads = n;
    }
    s
}

fn format(c: &RunConfig, default: Format) -> Format {
    c.format.unwrap_or(default)
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let c = merged(cli)?;
    match cli.command {
        Command::Scatter => scatter(&c),
        Command::Resonances => resonances(&c),
        Command::Count => count(&c),
        Command::Identities => identities(&c),
        Command::Indicator => indicator(&c),
        Command::InverseCheck => inverse_check(&c),
    }
}

fn complex_cols(s: &mut String, values: &[Complex64]) {
    for v in values {
        let _ = write!(s, ",{},{}", num(v.re), num(v.im));
    }
}

fn scatter(c: &RunConfig) -> Result<ExitCode> {
    let pot = load_potential(c)?;
    let points = c.points.as_ref().filter(|p| !p.is_empty()).context("at least one --z re,im is required")?;
    let sheet = match parse_sheet_choice(c.sheet.as_deref().unwrap_or("pp"))? {
        SheetChoice::One(s) => s,
        _ => bail!("scatter needs a single sheet"),
    };
    let side = parse_side(c.side.as_deref().unwrap_or("+"))?;
    let engine = point_engine(&pot, c);
    let levels = pot.levels();
    let rows: Vec<ScatteringCoefficients> = points
        .iter()
        .map(|&[re, im]| {
            let p = SurfacePoint::with_side(Complex64::new(re, im), sheet, side, &levels);
            scattering_coefficients(&engine, &p).with_context(|| format!("at z = {re}{im:+}i"))
        })
        .collect::<Result<_>>()?;
    let text = match format(c, Format::Csv) {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from(
                "re_z,im_z,sheet,re_rplus,im_rplus,re_rminus,im_rminus,re_tminus,im_tminus,re_tplus,im_tplus,\
                 re_rminus_coeff,im_rminus_coeff,re_rplus_coeff,im_rplus_coeff,re_d,im_d\n",
            );
            for r in &rows {
                let _ = write!(s, "{},{},{}", num(r.point.z.re), num(r.point.z.im), r.point.sheet);
                complex_cols(
                    &mut s,
                    &[r.r_plus, r.r_minus, r.t_minus, r.t_plus, r.r_minus_coeff, r.r_plus_coeff, r.wronskian_d],
                );
                s.push('\n');
            }
            s
        }
    };
    emit(c.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SheetListing {
    sheet: SheetSignature,
    outer_count: i64,
    located: i64,
    resonances: Vec<ResonanceRecord>,
    unresolved: Vec<UnresolvedBox>,
    candidates: Vec<BoundaryCandidate>,
}

fn sheets_of(choice: SheetChoice) -> Vec<SheetSignature> {
    match choice {
        SheetChoice::One(s) => vec![s],
        SheetChoice::All | SheetChoice::Sum => SheetSignature::ALL.to_vec(),
    }
}

fn resonances(c: &RunConfig) -> Result<ExitCode> {
    let pot = load_potential(c)?;
    let rect = c.rect.context("--rect re0 re1 im0 im1 is required")?;
    check_rect(rect)?;
    let choice = parse_sheet_choice(c.sheet.as_deref().unwrap_or("all"))?;
    if choice == SheetChoice::Sum {
        bail!("`sum` is only meaningful for count");
    }
    let levels = pot.levels();
    let mut listings = Vec::new();
    // A degenerate rectangle encloses nothing.
    if rect[0] < rect[1] && rect[2] < rect[3] {
        let engine = contour_engine(&pot, c);
        let settings = locate_settings(c);
        let r = Rect::new(rect[0], rect[1], rect[2], rect[3])?;
        for sheet in sheets_of(choice) {
            let rep = locate(&engine, &SearchRegion::new(sheet, r, &levels), &settings)?;
            listings.push(SheetListing {
                sheet,
                outer_count: rep.outer_count,
                located: rep.located_count(),
                resonances: rep.records(&levels, false)?,
                unresolved: rep.unresolved.clone(),
                candidates: rep.candidates.clone(),
            });
        }
    }
    let text = match format(c, Format::Csv) {
        Format::Json => to_json(&listings)?,
        Format::Csv => {
            let all: Vec<ResonanceRecord> = listings.iter().flat_map(|l| l.resonances.iter().copied()).collect();
            records_to_csv(&all)
        }
    };
    emit(c.out.as_deref(), &text)?;
    let open: i64 = listings.iter().flat_map(|l| &l.unresolved).map(|u| u.count).sum();
    for l in &listings {
        for cand in &l.candidates {
            eprintln!(
                "candidate on {}: {:?} at z = {} (cancellation {:.3e})",
                l.sheet, cand.kind, cand.point.z, cand.cancellation
            );
        }
    }
    if open > 0 && !c.allow_unresolved.unwrap_or(false) {
        eprintln!("{}", serde_json::json!({ "error": "unresolved boxes remain", "count": open }));
        return Ok(ExitCode::from(EXIT_UNRESOLVED));
    }
    Ok(ExitCode::SUCCESS)
}

fn count(c: &RunConfig) -> Result<ExitCode> {
    let pot = load_potential(c)?;
    let rmax = c.rmax.context("--rmax is required")?;
    let rmin = c.rmin.unwrap_or((rmax / 10.0).max(1.0)).min(rmax);
    let ratio = c.ratio.unwrap_or(GRID_RATIO);
    let choice = parse_sheet_choice(c.sheet.as_deref().unwrap_or("mm"))?;
    let predicate = match choice {
        SheetChoice::One(s) => SheetPredicate::Sheet(s),
        SheetChoice::Sum => SheetPredicate::TwoSheetSum,
        SheetChoice::All => bail!("count needs one sheet or `sum`"),
    };
    let levels = pot.levels();
    let engine = contour_engine(&pot, c);
    let reports = survey(&engine, &sheets_of(choice), rmax * rmax, &locate_settings(c))?;
    let open: i64 = reports.iter().map(|r| r.unresolved_count()).sum();
    if open > 0 && !c.allow_unresolved.unwrap_or(false) {
        bail!("{open} zeros sit in unresolved boxes; the count is not certified");
    }
    let mut records = Vec::new();
    for r in &reports {
        records.extend(r.records(&levels, true)?);
    }
    let grid = geometric_grid(rmin, rmax, ratio);
    let report = counting_function(&records, predicate, &grid, rmax, predicted_slope(&pot, predicate))?;
    let text = match format(c, Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("r,n\n");
            for (r, n) in &report.samples {
                let _ = writeln!(s, "{},{}", num(*r), n);
            }
            s
        }
    };
    emit(c.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn identities(c: &RunConfig) -> Result<ExitCode> {
    let pot = load_potential(c)?;
    let rect = c.rect.unwrap_or([-50.0, 50.0, -50.0, 50.0]);
    check_rect(rect)?;
    let samples = c.samples.unwrap_or(50);
    let choice = parse_sheet_choice(c.sheet.as_deref().unwrap_or("all"))?;
    let engine = point_engine(&pot, c);
    let levels = pot.levels();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed.unwrap_or(0));
    let mut reports: Vec<IdentityReport> = Vec::new();
    for sheet in sheets_of(choice) {
        for _ in 0..samples {
            let re = rect[0] + (rect[1] - rect[0]) * rng.gen::<f64>();
            let im = rect[2] + (rect[3] - rect[2]) * rng.gen::<f64>();
            let p = SurfacePoint::with_side(Complex64::new(re, im), sheet, Sign::Plus, &levels);
            reports.push(check_identities(&engine, &p));
        }
    }
    let worst = reports.iter().map(IdentityReport::max_residual).fold(0.0, f64::max);
    let skipped: usize = reports.iter().map(IdentityReport::skipped).sum();
    let text = match format(c, Format::Csv) {
        Format::Json => to_json(&reports)?,
        Format::Csv => {
            let mut s = String::from("re_z,im_z,sheet");
            for i in 1..=IDENTITY_LABELS.len() {
                let _ = write!(s, ",identity_{i}");
            }
            s.push_str(",max\n");
            for r in &reports {
                let _ = write!(s, "{},{},{}", num(r.point.z.re), num(r.point.z.im), r.point.sheet);
                for e in &r.entries {
                    match e.residual {
                        Some(v) => {
                            let _ = write!(s, ",{}", num(v));
                        }
                        None => s.push_str(",skipped"),
                    }
                }
                let _ = writeln!(s, ",{}", num(r.max_residual()));
            }
            s
        }
    };
    emit(c.out.as_deref(), &text)?;
    eprintln!("max residual {worst:.3e} over {} points, {skipped} evaluations skipped", reports.len());
    Ok(ExitCode::SUCCESS)
}

fn indicator(c: &RunConfig) -> Result<ExitCode> {
    let pot = load_potential(c)?;
    let engine = point_engine(&pot, c);
    let phis = c
        .phi
        .clone()
        .filter(|p| !p.is_empty())
        .unwrap_or_else(|| vec![PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0]);
    let target = match c.target.unwrap_or(Target::RMinus) {
        Target::RMinus => IndicatorTarget::RMinus,
        Target::RPlus => IndicatorTarget::RPlus,
        Target::TMinus => IndicatorTarget::TMinus,
        Target::TPlus => IndicatorTarget::TPlus,
        Target::RMinusProduct => IndicatorTarget::RMinusProduct,
    };
    let radii = geometric_grid(c.rmin.unwrap_or(10.0), c.rmax.unwrap_or(1e4), c.ratio.unwrap_or(1.1));
    let estimates: Vec<IndicatorEstimate> = phis
        .iter()
        .map(|&phi| indicator_estimate(&engine, target, phi, &radii))
        .collect::<Result<_, _>>()?;
    let text = match format(c, Format::Json) {
        Format::Json => to_json(&estimates)?,
        Format::Csv => {
            let mut s = String::from("phi,r,log_abs_over_r,h\n");
            for e in &estimates {
                for (r, v) in e.radii.iter().zip(&e.samples) {
                    let _ = writeln!(s, "{},{},{},{}", num(e.phi), num(*r), num(*v), num(e.h));
                }
            }
            s
        }
    };
    emit(c.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RoundTrip {
    z_min: f64,
    z_max: f64,
    points: usize,
    conjugation_residual: f64,
    f_poles: usize,
    max_modulus_error: f64,
    max_error: f64,
    phase_ambiguity: bool,
}

#[derive(Serialize)]
struct InverseCheck {
    round_trip: RoundTrip,
    normalization: NormalizationReport,
    truncation: Option<TruncationReport>,
}

fn inverse_check(c: &RunConfig) -> Result<ExitCode> {
    let pot = load_potential(c)?;
    let levels = pot.levels();
    let engine = point_engine(&pot, c);
    let floor = levels.v_plus().max(levels.v_minus());
    let z_min = c.zmin.unwrap_or(floor + 1.0);
    let z_max = c.zmax.unwrap_or(floor + 100.0);
    let n = c.grid.unwrap_or(200).max(2);
    if !(z_min > floor && z_max > z_min) {
        bail!("trace must satisfy max(V+, V-) < zmin < zmax");
    }
    let zs: Vec<f64> = (0..n).map(|i| z_min + (z_max - z_min) * i as f64 / (n - 1) as f64).collect();
    let trace = BoundaryTrace::from_engine(&engine, &zs)?;
    let rec = recover_r_minus_on_boundary(&trace, &trace.forward_products())?;
    let round_trip = RoundTrip {
        z_min,
        z_max,
        points: n,
        conjugation_residual: trace.conjugation_residual(),
        f_poles: f_from_forward(&trace).iter().filter(|f| f.is_none()).count(),
        max_modulus_error: rec.max_modulus_error,
        max_error: rec.max_error,
        phase_ambiguity: rec.phase_ambiguity,
    };
    let a_priori = c.a_priori_c0.unwrap_or(matches!(pot, Potential::Smooth(_)));
    let normalization = normalization_case_analysis(&engine, a_priori)?;
    let truncation = match c.truncation_k {
        Some(k) => {
            let contour = contour_engine(&pot, c);
            let half = k * k + levels.v_plus().abs() + 1.0;
            let reports = survey(&contour, &SheetSignature::ALL, half, &locate_settings(c))?;
            let mut records = Vec::new();
            for r in &reports {
                if r.unresolved_count() > 0 && !c.allow_unresolved.unwrap_or(false) {
                    bail!("unresolved boxes on sheet {}", r.region.sheet);
                }
                records.extend(r.records(&levels, false)?);
            }
            let branch = (levels.v_minus() - levels.v_plus()).abs().sqrt();
            let fit = if branch > 0.5 && branch < 1.0 {
                (0.1 * branch, 0.2 * branch)
            } else {
                (0.5, 1.0)
            };
            let test: Vec<f64> = (0..10)
                .map(|i| {
                    let k = 1.55 + 0.25 * i as f64;
                    if (k - branch).abs() < 1e-3 {
                        k + 0.01
                    } else {
                        k
                    }
                })
                .collect();
            Some(truncated_r2_check(&engine, &records, k, fit, &test)?)
        }
        None => None,
    };
    let report = InverseCheck {
        round_trip,
        normalization,
        truncation,
    };
    emit(c.out.as_deref(), &to_json(&report)?)?;
    Ok(ExitCode::SUCCESS)
}
