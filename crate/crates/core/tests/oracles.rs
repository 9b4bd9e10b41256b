//! Independent re-implementations checked against the engines.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steplike::potential::{BumpProfile, Perturbation, PiecewiseConstantPotential, SmoothPerturbationPotential};
use steplike::riemann::{SheetSignature, Sign, StepLevels, SurfacePoint};
use steplike::scaled::ScaledMat2;
use steplike::scattering::ode::{OdeEngine, OdeSettings};
use steplike::scattering::{jost_wronskian, JostEngine};

fn plain(m: &ScaledMat2) -> [[Complex64; 2]; 2] {
    let s = m.log_scale.exp();
    [[m.m[0][0] * s, m.m[0][1] * s], [m.m[1][0] * s, m.m[1][1] * s]]
}

/// Classical RK4 on `u'' = (V - z) u` for both columns of the propagator.
fn rk4_transfer(v: &dyn Fn(f64) -> f64, z: Complex64, a: f64, b: f64, n: usize) -> [[Complex64; 2]; 2] {
    let h = (b - a) / n as f64;
    let f = |x: f64, y: [Complex64; 2]| [y[1], (v(x) - z) * y[0]];
    let mut cols = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
    for col in cols.iter_mut() {
        let mut y = *col;
        for i in 0..n {
            let x = a + h * i as f64;
            let k1 = f(x, y);
            let k2 = f(x + h / 2.0, [y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)]);
            let k3 = f(x + h / 2.0, [y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)]);
            let k4 = f(x + h, [y[0] + k3[0] * h, y[1] + k3[1] * h]);
            for j in 0..2 {
                y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
            }
        }
        *col = y;
    }
    [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
}

fn max_rel(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let scale = a.iter().flatten().map(|c| c.norm()).fold(1.0, f64::max);
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm() / scale)
        .fold(0.0, f64::max)
}

fn bump(profile: BumpProfile, beta: f64) -> SmoothPerturbationPotential {
    let l = StepLevels::new(0.0, 4.0).unwrap();
    let p = Perturbation::Bump {
        amplitude: 3.0,
        half_width: 1.0,
        profile,
    };
    SmoothPerturbationPotential::new(l, beta, p).unwrap()
}

#[test]
fn ode_engine_matches_rk4() {
    for (profile, beta) in [(BumpProfile::Cosine, 0.0), (BumpProfile::Parabolic, 0.5), (BumpProfile::Cosine, -0.3)] {
        let pot = bump(profile, beta);
        let (a, b) = (pot.left_edge(), pot.right_edge());
        let engine = OdeEngine::new(pot.clone(), OdeSettings::with_tol(1e-11));
        for z in [Complex64::new(7.0, 2.0), Complex64::new(-3.0, 0.5), Complex64::new(40.0, -6.0)] {
            let got = plain(&engine.transfer_between(z, a, b).unwrap());
            // Sub-steps aligned with beta and the kinks at +-1 keep RK4 at full order.
            let mut cuts = vec![a, b, beta, -1.0, 1.0];
            cuts.retain(|x| *x >= a && *x <= b);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut want = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                // The step level is fixed per segment so that endpoints at beta see the right side.
                let level = pot.step_value(mid);
                let seg = |x: f64| level + pot.perturbation().value_at(x);
                let m = rk4_transfer(&seg, z, w[0], w[1], 20_000);
                want = mul(&m, &want);
            }
            let err = max_rel(&want, &got);
            assert!(err < 1e-8, "{profile:?} beta={beta} z={z}: {err:e}");
        }
    }
}

fn mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[test]
fn staircase_converges_to_ode() {
    let pot = bump(BumpProfile::Cosine, 0.25);
    let engine = OdeEngine::new(pot.clone(), OdeSettings::with_tol(1e-12));
    let l = pot.levels();
    let p = SurfacePoint::with_side(Complex64::new(9.0, 1.5), SheetSignature::MINUS_MINUS, Sign::Plus, &l);
    let d = jost_wronskian(&engine, &p).unwrap().to_complex();
    let errs: Vec<f64> = [50, 100, 200, 400]
        .iter()
        .map(|&n| {
            let stair = pot.discretize(n);
            (jost_wronskian(&stair, &p).unwrap().to_complex() - d).norm() / d.norm()
        })
        .collect();
    for w in errs.windows(2) {
        // Midpoint sampling is second order.
        assert!(w[1] < 0.4 * w[0], "{errs:?}");
    }
    assert!(errs[3] < 1e-3, "{errs:?}");
}

/// `D` for a staircase built from `cos`, `sin` layer matrices, which are even
/// in the layer wavenumber and so need no branch choice.
fn closed_form_d(xs: &[f64], vs: &[f64], z: Complex64, rp: Complex64, rm: Complex64) -> Complex64 {
    let i = Complex64::i();
    let x0 = xs[0];
    let mut u = (-i * rm * x0).exp();
    let mut du = -i * rm * u;
    for (w, &v) in xs.windows(2).zip(vs) {
        let d = w[1] - w[0];
        let kappa = (z - v).sqrt();
        let (c, s) = ((kappa * d).cos(), (kappa * d).sin());
        let sk = if kappa.norm() < 1e-12 { Complex64::new(d, 0.0) } else { s / kappa };
        (u, du) = (c * u + sk * du, -kappa * s * u + c * du);
    }
    let xn = *xs.last().unwrap();
    (i * rp * xn).exp() * (i * rp * u - du)
}

#[test]
fn transfer_engine_matches_closed_form() {
    let l = StepLevels::new(0.0, 4.0).unwrap();
    let xs = vec![0.0, 0.5, 1.0];
    let vs = vec![8.0, 2.0];
    let pot = PiecewiseConstantPotential::new(l, xs.clone(), vs.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for s in SheetSignature::ALL {
        for _ in 0..200 {
            let z = Complex64::new(rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0));
            let p = SurfacePoint::with_side(z, s, Sign::Plus, &l);
            let (rp, rm) = p.roots(&l).unwrap();
            let want = closed_form_d(&xs, &vs, z, rp, rm);
            let got = jost_wronskian(&pot, &p).unwrap().to_complex();
            let scale = want.norm().max(1.0);
            assert!((want - got).norm() < 1e-10 * scale, "{s} z={z}: {want} vs {got}");
        }
    }
}
