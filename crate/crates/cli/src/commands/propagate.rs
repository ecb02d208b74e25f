//! `propagate` and `majorana`: free fields evolved mode by mode, and the same
//! evolution carried out on the Riemann–Silberstein vectors.

use std::path::Path;

use emlab::majorana::{self, HelicityConvention};
use emlab::propagator::{self as pg, SpectralModeSet};
use emlab::snapshot::Snapshot;
use emlab::{random, VectorFieldGrid};
use num_complex::Complex64;

use super::{centre, grid, max_diff, rel, Scenario};
use crate::config::{key, Config, Key};
use crate::failure::{invalid, runtime, validation, Outcome};
use crate::output::{num, read_snapshot, Outputs, Table};

macro_rules! free_field_keys {
    ($($extra:expr),*) => {
        &[
            key("grid.n", "16"),
            key("grid.h", "0.25"),
            key("phys.c", "1"),
            key("phys.hbar", "1"),
            key("init.preset", "plane-wave"),
            key("init.mode", "1,0,0"),
            key("init.polarization", "1,0"),
            key("init.amplitude", "1"),
            key("init.width", "1"),
            key("init.center", "auto"),
            key("init.max_mode", "3"),
            key("init.file_a", ""),
            key("init.file_e", ""),
            key("run.dt", "0.01"),
            key("run.steps", "100"),
            key("run.cadence", "1"),
            key("out.snapshots", "false"),
            $($extra),*
        ]
    };
}

pub const PROPAGATE_KEYS: &[Key] = free_field_keys!();
pub const MAJORANA_KEYS: &[Key] =
    free_field_keys!(key("majorana.compare", "false"), key("majorana.convention", "maxwell"));

const PRESETS: &[&str] = &["plane-wave", "gaussian-packet", "random", "file"];

fn vector(path: &str, what: &str) -> Outcome<VectorFieldGrid> {
    if path.is_empty() {
        return Err(invalid(format!("the file preset needs {what}")));
    }
    match read_snapshot(Path::new(path))? {
        Snapshot::Vector(v) => Ok(v),
        Snapshot::Scalar(_) => Err(invalid(format!("{path}: expected a 3-component snapshot"))),
    }
}

fn initial_modes(cfg: &Config) -> Outcome<SpectralModeSet> {
    let spec = grid(cfg)?;
    let hbar = cfg.positive("phys.hbar")?;
    let amp = cfg.f64("init.amplitude")?;
    let set = match cfg.choice("init.preset", PRESETS)? {
        0 => {
            let pol = cfg.f64_list("init.polarization")?;
            let [p1, p2] = pol[..] else {
                return Err(invalid("init.polarization: expected two numbers"));
            };
            let z = |p: f64| Complex64::new(amp * p, 0.0);
            pg::plane_wave(spec, cfg.int3("init.mode")?, [z(p1), z(p2)]).map_err(validation)?
        }
        1 => {
            let x0 = cfg.vec3_or("init.center", centre(&spec))?;
            pg::gaussian_packet(spec, cfg.int3("init.mode")?, cfg.positive("init.width")?, x0, amp).map_err(validation)?
        }
        2 => {
            let mut rng = random::rng(cfg.u64("run.seed")?);
            pg::random_transverse(spec, &mut rng, cfg.usize("init.max_mode")?, amp)
        }
        _ => {
            let a = vector(cfg.str("init.file_a"), "init.file_a")?;
            let e = vector(cfg.str("init.file_e"), "init.file_e")?;
            if a.spec() != &spec || e.spec() != &spec {
                return Err(invalid("snapshot grids differ from grid.n, grid.h, phys.c"));
            }
            let template = SpectralModeSet::zeros(spec).with_hbar(hbar).map_err(validation)?;
            return pg::expand_with(&a, &e, template).map_err(validation);
        }
    };
    set.with_hbar(hbar).map_err(validation)
}

struct RunLength {
    dt: f64,
    steps: usize,
    cadence: usize,
    snapshots: bool,
}

impl RunLength {
    fn from(cfg: &Config) -> Outcome<Self> {
        let r = Self {
            dt: cfg.positive("run.dt")?,
            steps: cfg.usize("run.steps")?,
            cadence: cfg.usize("run.cadence")?,
            snapshots: cfg.bool("out.snapshots")?,
        };
        if r.steps == 0 || r.cadence == 0 {
            return Err(invalid("run.steps and run.cadence must be at least 1"));
        }
        Ok(r)
    }

    fn records(&self, step: usize) -> bool {
        step % self.cadence == 0 || step == self.steps
    }
}

struct Propagate {
    modes: SpectralModeSet,
    run: RunLength,
}

pub fn plan_propagate(cfg: &Config) -> Outcome<Box<dyn Scenario>> {
    Ok(Box::new(Propagate {
        modes: initial_modes(cfg)?,
        run: RunLength::from(cfg)?,
    }))
}

impl Scenario for Propagate {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()> {
        let Propagate { mut modes, run } = *self;
        let stepper = pg::PhaseStepper::new(*modes.spec(), run.dt);
        let mut t = Table::new(&["step", "t", "norm", "energy", "ampere", "faraday", "div_e", "div_h", "wave"]);
        for s in 1..=run.steps {
            stepper.step(&mut modes);
            if !run.records(s) {
                continue;
            }
            let m = pg::maxwell_residuals(&modes, run.dt);
            let r = m.as_array().map(|v| num(rel(v, m.scale)));
            let wave = pg::wave_equation_residual(&modes, run.dt).relative();
            let mut row = vec![s.to_string(), num(s as f64 * run.dt), num(modes.norm_sqr()), num(pg::energy(&modes))];
            row.extend(r);
            row.push(num(wave));
            t.row(&row);
        }
        out.table("propagate.csv", t);
        if run.snapshots {
            let f = pg::synthesize(&modes);
            out.snapshot("a_final.bin", &Snapshot::Vector(f.a))?;
            out.snapshot("e_final.bin", &Snapshot::Vector(f.e))?;
            out.snapshot("h_final.bin", &Snapshot::Vector(f.h))?;
        }
        Ok(())
    }
}

struct Majorana {
    modes: SpectralModeSet,
    run: RunLength,
    compare: bool,
    convention: HelicityConvention,
}

pub fn plan_majorana(cfg: &Config) -> Outcome<Box<dyn Scenario>> {
    let convention = match cfg.choice("majorana.convention", &["maxwell", "same-generator"])? {
        0 => HelicityConvention::Maxwell,
        _ => HelicityConvention::SameGenerator,
    };
    Ok(Box::new(Majorana {
        modes: initial_modes(cfg)?,
        run: RunLength::from(cfg)?,
        compare: cfg.bool("majorana.compare")?,
        convention,
    }))
}

/// `½ Σ (E² + H²) h³`.
fn grid_energy(e: &VectorFieldGrid, h: &VectorFieldGrid) -> f64 {
    0.5 * (e.l2_norm().powi(2) + h.l2_norm().powi(2))
}

impl Scenario for Majorana {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()> {
        let Majorana { modes, run, compare, convention } = *self;
        let spec = *modes.spec();
        let f = pg::synthesize(&modes);
        let mut rs = majorana::to_rs(&f.e, &f.h).map_err(runtime)?;
        let mut spectral = modes;
        let stepper = pg::PhaseStepper::new(spec, run.dt);
        let mut cols = vec!["step", "t", "energy", "transversality", "reality"];
        if compare {
            cols.push("divergence");
        }
        let mut t = Table::new(&cols);
        for s in 1..=run.steps {
            rs = majorana::evolve_rs_with(&rs, run.dt, convention).map_err(runtime)?;
            if compare {
                stepper.step(&mut spectral);
            }
            if !run.records(s) {
                continue;
            }
            let (e, h) = majorana::from_rs(&rs);
            let mut row = vec![
                s.to_string(),
                num(s as f64 * run.dt),
                num(grid_energy(&e, &h)),
                num(majorana::transversality_residual(&rs)),
                num(rs.reality_residue()),
            ];
            if compare {
                let want = pg::synthesize(&spectral);
                let scale = want.e.max_abs().max(want.h.max_abs());
                row.push(num(rel(max_diff(&e, &want.e).max(max_diff(&h, &want.h)), scale)));
            }
            t.row(&row);
        }
        out.table("majorana.csv", t);
        if run.snapshots {
            let (e, h) = majorana::from_rs(&rs);
            out.snapshot("e_final.bin", &Snapshot::Vector(e))?;
            out.snapshot("h_final.bin", &Snapshot::Vector(h))?;
        }
        Ok(())
    }
}
