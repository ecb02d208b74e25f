//! `brackets` and `fock`: the lattice bracket checks and the truncated
//! two-mode Fock-space algebra.

use emlab::brackets::{
    closure_scale, constraint_chain_closure, divergence_scale, poisson_bracket, sample_points,
    secondary_constraint_residual, BracketOptions, CanonicalLattice, Coordinate, DerivativeMode, Hamiltonian, Momentum,
};
use emlab::focksu2::{self, TwoModeSpace};
use emlab::random;

use super::{grid, rel, Scenario};
use crate::config::{key, Config, Key};
use crate::failure::{invalid, runtime, validation, Outcome};
use crate::output::{num, Outputs, Table};

pub const BRACKET_KEYS: &[Key] = &[
    key("grid.n", "8"),
    key("grid.h", "0.25"),
    key("phys.c", "1"),
    key("phys.hbar", "1"),
    key("init.max_mode", "2"),
    key("init.amplitude", "1"),
    key("brackets.points", "5"),
    key("brackets.mode", "analytic"),
    key("brackets.relative_step", "1e-5"),
    key("brackets.tolerance", "1e-6"),
    key("brackets.canonical_tolerance", "1e-12"),
];

struct Brackets {
    state: CanonicalLattice,
    points: Vec<usize>,
    mode: DerivativeMode,
    opts: BracketOptions,
    tolerance: f64,
    canonical_tolerance: f64,
}

pub fn plan_brackets(cfg: &Config) -> Outcome<Box<dyn Scenario>> {
    let spec = grid(cfg)?;
    let mut rng = random::rng(cfg.u64("run.seed")?);
    let state = CanonicalLattice::smooth_random(spec, &mut rng, cfg.usize("init.max_mode")?, cfg.f64("init.amplitude")?);
    let count = cfg.usize("brackets.points")?;
    if count == 0 {
        return Err(invalid("brackets.points must be at least 1"));
    }
    let points = sample_points(&spec, count, &mut rng);
    let mode = match cfg.choice("brackets.mode", &["analytic", "finite-difference"])? {
        0 => DerivativeMode::Analytic,
        _ => DerivativeMode::FiniteDifference,
    };
    Ok(Box::new(Brackets {
        state,
        points,
        mode,
        opts: BracketOptions {
            hbar: cfg.positive("phys.hbar")?,
            relative_step: cfg.positive("brackets.relative_step")?,
        },
        tolerance: cfg.positive("brackets.tolerance")?,
        canonical_tolerance: cfg.positive("brackets.canonical_tolerance")?,
    }))
}

impl Scenario for Brackets {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()> {
        let s = &self.state;
        let spec = *s.spec();
        let mut t = Table::new(&["check", "point", "residual", "tolerance", "pass"]);
        let mut push = |name: &str, point: String, residual: f64, tol: f64| {
            t.row(&[name.into(), point, num(residual), num(tol), (residual <= tol).to_string()]);
        };
        let delta = self.opts.hbar / spec.cell_volume();
        for (i, &x) in self.points.iter().enumerate() {
            // the coincident point and the next sampled one
            let y = self.points[(i + 1) % self.points.len()];
            let mut worst = 0.0f64;
            for other in [x, y] {
                for mu in 0..4 {
                    for nu in 0..4 {
                        let b = poisson_bracket(&Momentum { mu, point: x }, &Coordinate { mu: nu, point: other }, s, &self.opts)
                            .map_err(runtime)?;
                        let want = if mu == nu && x == other { -delta } else { 0.0 };
                        worst = worst.max((b - want).abs());
                    }
                }
            }
            push("canonical [B^mu, A_nu]", format!("{x}:{y}"), worst, self.canonical_tolerance);
        }
        let ds = divergence_scale(s);
        for &x in &self.points {
            let r = secondary_constraint_residual(s, x, self.mode, &self.opts).map_err(runtime)?;
            push("[B0, H] - div B", x.to_string(), rel(r.abs(), ds), self.tolerance);
        }
        let cs = closure_scale(s);
        for &x in &self.points {
            let r = constraint_chain_closure(s, &[x], self.mode, &self.opts).map_err(runtime)?;
            push("[div B, H]", x.to_string(), rel(r, cs), self.tolerance);
        }
        let hh = poisson_bracket(&Hamiltonian, &Hamiltonian, s, &self.opts).map_err(runtime)?;
        push("[H, H]", "all".into(), hh.abs(), 0.0);
        out.table("brackets.csv", t);
        Ok(())
    }
}

pub const FOCK_KEYS: &[Key] = &[
    key("phys.hbar", "1"),
    key("phys.k_b", "1"),
    key("fock.n_max", "8"),
    key("fock.omega", "1"),
    key("fock.temperatures", "0.5,1,2"),
    key("fock.planck_n_max", "60"),
    key("fock.tolerance", "1e-13"),
];

struct Fock {
    space: TwoModeSpace,
    hbar: f64,
    omega: f64,
    k_b: f64,
    temperatures: Vec<f64>,
    planck_n_max: usize,
    tolerance: f64,
}

pub fn plan_fock(cfg: &Config) -> Outcome<Box<dyn Scenario>> {
    let space = TwoModeSpace::new(cfg.usize("fock.n_max")?).map_err(validation)?;
    let (hbar, omega, k_b) = (cfg.positive("phys.hbar")?, cfg.positive("fock.omega")?, cfg.positive("phys.k_b")?);
    let temperatures = cfg.f64_list("fock.temperatures")?;
    let planck_n_max = cfg.usize("fock.planck_n_max")?;
    for &temp in &temperatures {
        // surfaces non-positive temperatures and ħω/kT < 0.1 now rather than mid-run
        focksu2::planck_occupancy(hbar, omega, temp, k_b, planck_n_max).map_err(validation)?;
    }
    Ok(Box::new(Fock {
        space,
        hbar,
        omega,
        k_b,
        temperatures,
        planck_n_max,
        tolerance: cfg.positive("fock.tolerance")?,
    }))
}

impl Scenario for Fock {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()> {
        let mut t = Table::new(&["identity", "residual", "tolerance", "pass"]);
        for c in focksu2::commutator_report(self.space, self.hbar, self.omega) {
            t.row(&[c.name, num(c.residual), num(self.tolerance), (c.residual <= self.tolerance).to_string()]);
        }
        out.table("commutators.csv", t);

        let mut t = Table::new(&["n", "j", "casimir", "expected", "error"]);
        for n in 0..self.space.n_max() {
            let j = n as f64 / 2.0;
            let got = focksu2::casimir_on_subspace(self.space, n).map_err(runtime)?;
            let want = j * (j + 1.0);
            t.row(&[n.to_string(), num(j), num(got), num(want), num((got - want).abs())]);
        }
        out.table("casimir.csv", t);

        let mut t = Table::new(&["temperature", "beta", "occupancy", "closed_form", "error", "truncation_bound"]);
        for &temp in &self.temperatures {
            let beta = self.hbar * self.omega / (self.k_b * temp);
            let got = focksu2::planck_occupancy(self.hbar, self.omega, temp, self.k_b, self.planck_n_max).map_err(runtime)?;
            let want = focksu2::planck_closed_form(beta);
            t.row(&[
                num(temp),
                num(beta),
                num(got),
                num(want),
                num((got - want).abs()),
                num(focksu2::planck_truncation_bound(beta, self.planck_n_max)),
            ]);
        }
        out.table("planck.csv", t);
        Ok(())
    }
}
