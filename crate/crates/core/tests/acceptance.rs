//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::Rng;

use emlab::brackets::{
    closure_scale, constraint_chain_closure, divergence_scale, poisson_bracket, sample_points,
    secondary_constraint_residual, BracketOptions, CanonicalLattice, Coordinate, DerivativeMode, Momentum,
};
use emlab::fields::{radial_falloff_fit, spherical_divergence, SphericalSamples};
use emlab::{clebsch, dualmaxwell as dm, focksu2, majorana, propagator as pg, random};
use emlab::{GridSpec, Vec3};

mod common;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    /// Records a check `value <= limit`.
    fn le(&mut self, what: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        self.pass &= ok;
        self.lines.push(format!("{} {what}: {value:.3e} (limit {limit:.1e})", mark(ok)));
    }

    fn check(&mut self, what: &str, ok: bool, detail: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {what}: {detail}", mark(ok)));
    }

    fn within(&mut self, what: &str, value: f64, target: f64, tol: f64) {
        let ok = (value - target).abs() <= tol;
        self.pass &= ok;
        self.lines.push(format!("{} {what}: {value:.6} (target {target} ± {tol})", mark(ok)));
    }

    fn info(&mut self, what: &str, detail: String) {
        self.lines.push(format!("  info {what}: {detail}"));
    }

    fn runtime(&mut self, elapsed: Duration, limit_s: f64) {
        self.le("runtime [s]", elapsed.as_secs_f64(), limit_s);
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "  ok  "
    } else {
        "  FAIL"
    }
}

fn constraint_chain() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let spec = GridSpec::new(16, 0.25).unwrap();
    let opts = BracketOptions::default();
    let mut rng = random::rng(1);
    let (mut sec, mut clo) = (0.0f64, 0.0f64);
    let (mut sec_an, mut clo_an) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let state = CanonicalLattice::smooth_random(spec, &mut rng, 3, 1.0);
        let points = sample_points(&spec, 10, &mut rng);
        let (ds, cs) = (divergence_scale(&state), closure_scale(&state));
        for &p in &points {
            let r = secondary_constraint_residual(&state, p, DerivativeMode::FiniteDifference, &opts).unwrap();
            sec = sec.max(r.abs() / ds);
            let r = secondary_constraint_residual(&state, p, DerivativeMode::Analytic, &opts).unwrap();
            sec_an = sec_an.max(r.abs() / ds);
        }
        clo = clo.max(constraint_chain_closure(&state, &points, DerivativeMode::FiniteDifference, &opts).unwrap() / cs);
        clo_an = clo_an.max(constraint_chain_closure(&state, &points, DerivativeMode::Analytic, &opts).unwrap() / cs);
    }
    out.le("|[B0,H] - div B| / scale, finite-difference H", sec, 1e-6);
    out.le("|[div B,H]| / scale, finite-difference H", clo, 1e-6);
    out.info("analytic gradients", format!("secondary {sec_an:.1e}, closure {clo_an:.1e}"));
    out.runtime(start.elapsed(), 60.0);
    out
}

fn canonical_brackets() -> Outcome {
    let mut out = Outcome::new();
    let spec = GridSpec::new(8, 0.25).unwrap();
    let state = CanonicalLattice::smooth_random(spec, &mut random::rng(2), 2, 1.0);
    let opts = BracketOptions::default();
    let pairs = [(0, 0), (77, 77), (0, 1), (5, 300), (511, 64)];
    let inv_h3 = 1.0 / spec.cell_volume();
    let mut worst = 0.0f64;
    for (x, y) in pairs {
        for mu in 0..4 {
            for nu in 0..4 {
                let b = poisson_bracket(&Momentum { mu, point: x }, &Coordinate { mu: nu, point: y }, &state, &opts).unwrap();
                let want = if mu == nu && x == y { -inv_h3 } else { 0.0 };
                worst = worst.max((b - want).abs());
            }
        }
    }
    out.le("max |[B^mu(x), A_nu(y)] + delta/h^3| over 16 pairs x 5 points", worst, 1e-12);
    out
}

fn free_propagation() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let spec = GridSpec::new(32, 0.25).unwrap();
    let mut m = pg::random_transverse(spec, &mut random::rng(3), 5, 1.0);
    let dt = 0.02;
    let stepper = pg::PhaseStepper::new(spec, dt);
    let (n0, e0) = (m.norm_sqr(), pg::energy(&m));
    let (mut prev_n, mut prev_e) = (n0, e0);
    let (mut step_n, mut step_e) = (0.0f64, 0.0f64);
    let (mut maxwell, mut wave) = (0.0f64, 0.0f64);
    let cadence = 100;
    for s in 0..=10_000 {
        if s > 0 {
            stepper.step(&mut m);
            let (nn, ee) = (m.norm_sqr(), pg::energy(&m));
            step_n = step_n.max((nn - prev_n).abs() / n0);
            step_e = step_e.max((ee - prev_e).abs() / e0);
            (prev_n, prev_e) = (nn, ee);
        }
        if s % cadence == 0 {
            maxwell = maxwell.max(pg::maxwell_residuals(&m, dt).max_relative());
            wave = wave.max(pg::wave_equation_residual(&m, dt).relative());
        }
    }
    out.le("per-step relative change of sum |c|^2", step_n, 1e-12);
    out.le("per-step relative change of mode-sum energy", step_e, 1e-12);
    out.info(
        "drift over 1e4 steps",
        format!("norm {:.1e}, energy {:.1e}", (prev_n - n0).abs() / n0, (prev_e - e0).abs() / e0),
    );
    out.le(&format!("Maxwell residuals, every {cadence} steps"), maxwell, 1e-10);
    out.le(&format!("wave-equation residual, every {cadence} steps"), wave, 1e-10);
    out.runtime(start.elapsed(), 120.0);
    out
}

fn energy_equivalence() -> Outcome {
    let mut out = Outcome::new();
    let spec = GridSpec::new(16, 0.3).unwrap();
    let mut rng = random::rng(4);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let m = pg::random_transverse(spec, &mut rng, 4, 1.0);
        let modes = pg::energy(&m);
        let grid = pg::synthesize(&m).energy();
        worst = worst.max((modes - grid).abs() / modes);
    }
    out.le("|mode sum - grid energy| / energy, 10 states", worst, 1e-10);
    out
}

fn majorana_equivalence() -> Outcome {
    let mut out = Outcome::new();
    let spec = GridSpec::new(16, 0.25).unwrap();
    let mut rng = random::rng(5);
    let dt = 0.01;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let m = pg::random_transverse(spec, &mut rng, 4, 1.0);
        let f = pg::synthesize(&m);
        let mut r = majorana::to_rs(&f.e, &f.h).unwrap();
        let stepper = pg::PhaseStepper::new(spec, dt);
        let mut spectral = m.clone();
        for _ in 0..100 {
            r = majorana::evolve_rs(&r, dt).unwrap();
            stepper.step(&mut spectral);
        }
        let (e, h) = majorana::from_rs(&r);
        let want = pg::synthesize(&spectral);
        let scale = want.e.max_abs().max(want.h.max_abs());
        let d = e.max_abs_diff(&want.e).unwrap().max(h.max_abs_diff(&want.h).unwrap());
        worst = worst.max(d / scale);
    }
    out.le("RS vs spectral trajectory after 100 steps, 10 states", worst, 1e-10);

    let s = majorana::spin_matrices();
    let i = Complex64::new(0.0, 1.0);
    let mut comm = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            let mut want = Matrix3::zeros();
            for c in 0..3 {
                want += s[c] * (i * majorana::levi_civita(a, b, c));
            }
            let got = s[a] * s[b] - s[b] * s[a];
            comm = comm.max((got - want).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    out.le("[s_i, s_j] - i e_ijk s_k", comm, 1e-15);
    let c2 = majorana::spin_casimir();
    out.check(
        "sum s_i^2 == 2 I",
        c2 == Matrix3::identity() * Complex64::new(2.0, 0.0),
        format!("{:?}", c2.diagonal().map(|z| z.re)),
    );
    let p = majorana::pauli_casimir();
    out.check(
        "Pauli Casimir == 0.75 I",
        p == nalgebra::Matrix2::identity() * Complex64::new(0.75, 0.0),
        format!("{:?}", p.diagonal().map(|z| z.re)),
    );
    out
}

fn plane_wave_error(n: usize) -> f64 {
    let spec = GridSpec::new(n, 1.0 / n as f64).unwrap();
    let dt = 0.5 * dm::cfl_limit(&spec);
    let (e, h) = dm::plane_wave_fields(&spec, 1.0);
    let mut s = dm::StaggeredState::from_fn(spec, dt, e.clone(), h.clone()).unwrap();
    let period = 1.0 / 2f64.sqrt();
    let vac = dm::SourceSet::vacuum();
    for _ in 0..(period / dt).round() as usize {
        s = dm::step(&s, &vac, dt).unwrap();
    }
    dm::l2_error(&s, e, h)
}

fn both_dipoles(spec: GridSpec, sign: dm::MagneticSign) -> dm::SourceSet {
    let l = spec.length();
    let e = dm::SourceSet::oscillating_dipole(spec, dm::Species::Electric, sign, 0.7, 3.0, [l / 2.0; 3], 0.3).unwrap();
    let m = dm::SourceSet::oscillating_dipole(spec, dm::Species::Magnetic, sign, -0.4, 5.0, [l / 4.0, l / 3.0, 0.6 * l], 0.35)
        .unwrap();
    dm::SourceSet {
        rho_e: e.rho_e,
        j_e: e.j_e,
        rho_m: m.rho_m,
        j_m: m.j_m,
        sign,
    }
}

fn commutation(s: &dm::StaggeredState, src: &dm::SourceSet, theta: f64, steps: usize) -> f64 {
    let dt = s.dt();
    let mut direct = s.clone();
    for _ in 0..steps {
        direct = dm::step(&direct, src, dt).unwrap();
    }
    let (mut rot, rsrc) = dm::duality_rotate(s, src, theta);
    for _ in 0..steps {
        rot = dm::step(&rot, &rsrc, dt).unwrap();
    }
    let (back, _) = dm::duality_rotate(&rot, &rsrc, -theta);
    back.max_abs_diff(&direct) / direct.field_scale()
}

fn dual_maxwell() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let spec = GridSpec::new(32, 4.0 / 32.0).unwrap();
    let dt = 0.5 * dm::cfl_limit(&spec);
    let l = spec.length();

    // (a) reduction to the standard scheme
    let electric =
        dm::SourceSet::oscillating_dipole(spec, dm::Species::Electric, dm::MagneticSign::AsPrinted, 1.0, 2.0, [l / 2.0; 3], 0.4)
            .unwrap();
    let mut explicit_zero = electric.clone();
    explicit_zero.j_m = Some(Arc::new(|_, _| [0.0; 3]));
    explicit_zero.rho_m = Some(Arc::new(|_, _| 0.0));
    let s0 = dm::StaggeredState::random_solenoidal(spec, dt, &mut random::rng(6), 3, 1.0).unwrap();
    let (mut a, mut b) = (s0.clone(), s0.clone());
    let (mut e, mut hf) = (s0.e_edge().to_vec(), s0.h_face().to_vec());
    let je = electric.j_e.clone().unwrap();
    for _ in 0..50 {
        common::reference_step(&mut e, &mut hf, &spec, dt, je.as_ref(), a.t());
        a = dm::step(&a, &electric, dt).unwrap();
        b = dm::step(&b, &explicit_zero, dt).unwrap();
    }
    let bits = |x: &[Vec3], y: &[Vec3]| x.iter().zip(y).all(|(p, q)| (0..3).all(|c| p[c].to_bits() == q[c].to_bits()));
    out.check(
        "(a) no magnetic sources: bitwise equal to explicit zeros and to the reference stepper",
        a.bitwise_eq(&b) && bits(a.e_edge(), &e) && bits(a.h_face(), &hf),
        "50 steps, n = 32".into(),
    );

    // (b) convergence
    let errs: Vec<f64> = [8, 16, 32].into_iter().map(plane_wave_error).collect();
    for (w, hs) in errs.windows(2).zip(["1/8 -> 1/16", "1/16 -> 1/32"]) {
        out.within(&format!("(b) plane-wave L2 error ratio, h {hs}"), w[0] / w[1], 4.0, 0.8);
    }

    // (c) Gauss laws
    let vac = dm::SourceSet::vacuum();
    let mut s = s0.clone();
    let scale = s.field_scale();
    let mut worst = 0.0f64;
    let mut prev = dm::gauss_residuals(&s, &vac);
    let initial = prev;
    for _ in 0..200 {
        s = dm::step(&s, &vac, dt).unwrap();
        let g = dm::gauss_residuals(&s, &vac);
        worst = worst.max((g.re - prev.re).abs().max((g.rm - prev.rm).abs()) / scale);
        prev = g;
    }
    out.le("(c) vacuum: per-step change of Gauss residuals / field scale", worst, 1e-12);
    out.info("(c) vacuum residuals", format!("initial ({:.1e}, {:.1e}), final ({:.1e}, {:.1e})", initial.re, initial.rm, prev.re, prev.rm));
    let sourced = both_dipoles(spec, dm::MagneticSign::Conventional);
    let monopole = dm::SourceSet::static_monopole(spec, dm::Species::Electric, 1.0, [l / 2.0; 3], 0.4).unwrap();
    for (name, src, init) in [
        ("dipoles", &sourced, dm::StaggeredState::zeros(spec, dt).unwrap()),
        ("Coulomb monopole", &monopole, dm::StaggeredState::coulomb(spec, dt, &monopole).unwrap()),
    ] {
        let (fin, trace) = dm::run(&init, src, 200, &dm::RunOptions::default()).unwrap();
        let fs = fin.field_scale().max(init.field_scale());
        let drift = trace
            .windows(2)
            .map(|w| (w[1].re - w[0].re).abs().max((w[1].rm - w[0].rm).abs()))
            .fold(0.0, f64::max);
        // the dipole's sampled charge obeys continuity only to O(h², dt²), so
        // its Gauss residual is expected to move by that much each step
        if name == "dipoles" {
            out.info(&format!("(c) {name}: per-step change of Gauss residuals / field scale"), format!("{:.2e}", drift / fs));
        } else {
            out.le(&format!("(c) {name}: per-step change of Gauss residuals / field scale"), drift / fs, 1e-12);
        }
    }

    // (d) duality covariance
    let conv = both_dipoles(spec, dm::MagneticSign::Conventional);
    let printed = both_dipoles(spec, dm::MagneticSign::AsPrinted);
    let zero_init = dm::StaggeredState::random_solenoidal(spec, dt, &mut random::rng(7), 3, 1.0).unwrap();
    for (theta, label) in [(PI / 6.0, "pi/6"), (PI / 4.0, "pi/4"), (PI / 2.0, "pi/2")] {
        out.le(&format!("(d) theta = {label}, source-free"), commutation(&zero_init, &vac, theta, 20), 1e-12);
        out.le(&format!("(d) theta = {label}, sources, conventional sign"), commutation(&zero_init, &conv, theta, 20), 1e-12);
        out.info(
            &format!("(d) theta = {label}, sources, printed sign"),
            format!("{:.2e}", commutation(&zero_init, &printed, theta, 20)),
        );
    }

    // (e) magnetic world
    let mono = dm::SourceSet::static_monopole(spec, dm::Species::Magnetic, 1.0, [l / 2.0; 3], 0.4).unwrap();
    let dip = dm::SourceSet::oscillating_dipole(spec, dm::Species::Magnetic, dm::MagneticSign::AsPrinted, 1.0, 3.0, [l / 2.0; 3], 0.4)
        .unwrap();
    for (name, src, init) in [
        ("static monopole", &mono, dm::StaggeredState::coulomb(spec, dt, &mono).unwrap()),
        ("oscillating dipole", &dip, dm::StaggeredState::zeros(spec, dt).unwrap()),
    ] {
        match dm::magnetic_world_run(&init, src, 200, &dm::RunOptions::default()) {
            Ok((_, trace)) => {
                let re = trace.iter().map(|r| r.re).fold(0.0, f64::max);
                let rm = trace.iter().map(|r| r.rm).fold(0.0, f64::max);
                out.le(&format!("(e) magnetic world, {name}: max div E"), re, 1e-12);
                out.info(&format!("(e) {name}"), format!("max rm {rm:.2e}"));
            }
            Err(err) => out.check(&format!("(e) magnetic world, {name}"), false, err.to_string()),
        }
    }
    out.runtime(start.elapsed(), 120.0);
    out
}

fn fock_algebra() -> Outcome {
    let mut out = Outcome::new();
    let space = focksu2::TwoModeSpace::new(16).unwrap();
    let report = focksu2::commutator_report(space, 1.0, 1.0);
    let worst = report.iter().fold(("", 0.0f64), |w, c| if c.residual > w.1 { (&c.name, c.residual) } else { w });
    out.le(&format!("{} identities on the safe sub-block, worst {}", report.len(), worst.0), worst.1, 1e-13);
    let trace = report.iter().find(|c| c.name == "B11 + B22").map(|c| c.residual);
    out.check("B11 + B22 == 0", trace == Some(0.0), format!("{trace:?}"));
    let mut cas = 0.0f64;
    for n in 0..=10 {
        let j = n as f64 / 2.0;
        cas = cas.max((focksu2::casimir_on_subspace(space, n).unwrap() - j * (j + 1.0)).abs());
    }
    out.le("Casimir on n-photon subspaces, n <= 10", cas, 1e-12);
    out
}

fn planck() -> Outcome {
    let mut out = Outcome::new();
    let v = focksu2::planck_occupancy(1.0, 1.0, 1.0, 1.0, 60).unwrap();
    out.le("|<n>(beta = 1, n_max = 60) - 1/(e-1)|", (v - 1.0 / (E - 1.0)).abs(), 1e-12);
    for n_max in [10, 20, 40] {
        let beta = 0.5;
        let err = (focksu2::planck_occupancy(beta, 1.0, 1.0, 1.0, n_max).unwrap() - focksu2::planck_closed_form(beta)).abs();
        out.le(&format!("truncation error at beta = 0.5, n_max = {n_max}, against its bound"), err, focksu2::planck_truncation_bound(beta, n_max));
    }
    out
}

fn clebsch_identities() -> Outcome {
    let mut out = Outcome::new();
    let res: Vec<(f64, f64)> = [16, 32, 64]
        .into_iter()
        .map(|n| {
            let t = clebsch::ClebschTriple::trigonometric(GridSpec::new(n, 6.4 / n as f64).unwrap()).unwrap();
            (clebsch::curl_identity_residual(&t), clebsch::div_formula_residual(&t))
        })
        .collect();
    for (w, hs) in res.windows(2).zip(["0.4 -> 0.2", "0.2 -> 0.1"]) {
        out.within(&format!("curl identity ratio, h {hs}"), w[0].0 / w[1].0, 4.0, 0.8);
        out.within(&format!("div identity ratio, h {hs}"), w[0].1 / w[1].1, 4.0, 0.8);
    }

    let c = 1.5;
    let spec = GridSpec::with_c(16, 0.25, c).unwrap();
    let k = 2.0 * PI / spec.length();
    let phi = move |x: Vec3, t: f64| (k * x[0] - 0.7 * t).sin() * (k * x[1]).cos();
    let a = move |x: Vec3, t: f64| [(k * x[2] + t).cos(), 0.3 * (k * (x[0] + x[2])).sin() * t.cos(), (k * x[1] - 2.0 * t).sin()];
    let p = clebsch::PotentialSet::from_fn(spec, 0.0, 0.01, 3, phi, a).unwrap();
    let (rho, j) = clebsch::manufactured_sources(&p, c).unwrap();
    let (rv, rs) = clebsch::potential_source_residual(&p, &rho, &j, c).unwrap();
    out.le("manufactured solution, vector equation (relative)", rv / (4.0 * PI / c * j.max_abs()), 1e-10);
    out.le("manufactured solution, scalar equation (relative)", rs / (4.0 * PI * rho.max_abs()), 1e-10);
    out
}

fn spherical_appendix() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = random::rng(10);
    let points: Vec<Vec3> = (0..20)
        .map(|_| [rng.gen_range(0.5..5.0), rng.gen_range(0.2..PI - 0.2), rng.gen_range(0.0..2.0 * PI)])
        .collect();
    let samples = SphericalSamples::new(points).unwrap();
    let mut worst = 0.0f64;
    for c in [0.5, 1.0, 7.0] {
        let div = spherical_divergence(&samples, |r, _, _| [c / (r * r), 0.0, 0.0], 1e-4).unwrap();
        worst = worst.max(div.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    out.le("spherical divergence of C/r^2, 20 points x 3 values of C", worst, 1e-8);
    let data: Vec<(f64, f64)> = (1..=12).map(|i| {
        let r = 0.4 * i as f64;
        (r, 3.0 / (r * r))
    }).collect();
    let fit = radial_falloff_fit(&data).unwrap();
    out.le("|fitted exponent + 2| on exact r^-2 data", (fit.exponent + 2.0).abs(), 1e-12);
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("constraint chain", constraint_chain),
        ("canonical brackets", canonical_brackets),
        ("free-field propagation", free_propagation),
        ("energy equivalence", energy_equivalence),
        ("Majorana equivalence", majorana_equivalence),
        ("dual Maxwell", dual_maxwell),
        ("Fock / SU(2)", fock_algebra),
        ("Planck occupancy", planck),
        ("Clebsch identities", clebsch_identities),
        ("spherical divergence and falloff", spherical_appendix),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status} {:>2}. {name} ({:.1} s)", i + 1, start.elapsed().as_secs_f64());
        for l in &outcome.lines {
            println!("        {l}");
        }
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
