//! `dual`: the staggered duality-symmetric scheme with electric and/or
//! magnetic source presets.

use emlab::dualmaxwell::{self as dm, MagneticSign, RunOptions, SourceSet, Species, StaggeredState};
use emlab::snapshot::Snapshot;
use emlab::random;

use super::{centre, grid, Scenario};
use crate::config::{key, Config, Key};
use crate::failure::{invalid, runtime, validation, Outcome};
use crate::output::{num, Outputs, Table};

pub const KEYS: &[Key] = &[
    key("grid.n", "32"),
    key("grid.h", "0.125"),
    key("phys.c", "1"),
    key("run.dt", "auto"),
    key("run.steps", "200"),
    key("run.cadence", "1"),
    key("dual.preset", "oscillating-dipole"),
    key("dual.species", "electric"),
    key("dual.sign", "as-printed"),
    key("dual.magnetic_world", "false"),
    key("dual.strength", "1"),
    key("dual.omega", "2"),
    key("dual.width", "0.4"),
    key("dual.center", "auto"),
    key("dual.max_mode", "3"),
    key("dual.continuity_tolerance", "0.1"),
    key("out.snapshots", "false"),
];

const PRESETS: &[&str] = &["static-monopole", "oscillating-dipole", "pulse", "random"];

struct Dual {
    init: StaggeredState,
    src: SourceSet,
    steps: usize,
    opts: RunOptions,
    magnetic_world: bool,
    snapshots: bool,
}

pub fn plan(cfg: &Config) -> Outcome<Box<dyn Scenario>> {
    let spec = grid(cfg)?;
    let dt = match cfg.str("run.dt") {
        "auto" => 0.5 * dm::cfl_limit(&spec) / spec.c(),
        _ => cfg.positive("run.dt")?,
    };
    // rejects CFL violations before anything else is built
    StaggeredState::zeros(spec, dt).map_err(validation)?;
    let sign = match cfg.choice("dual.sign", &["as-printed", "conventional"])? {
        0 => MagneticSign::AsPrinted,
        _ => MagneticSign::Conventional,
    };
    let species = match cfg.choice("dual.species", &["electric", "magnetic"])? {
        0 => Species::Electric,
        _ => Species::Magnetic,
    };
    let strength = cfg.f64("dual.strength")?;
    let width = cfg.positive("dual.width")?;
    let x0 = cfg.vec3_or("dual.center", centre(&spec))?;
    let (init, src) = match cfg.choice("dual.preset", PRESETS)? {
        0 => {
            let src = SourceSet::static_monopole(spec, species, strength, x0, width).map_err(validation)?.with_sign(sign);
            (StaggeredState::coulomb(spec, dt, &src).map_err(validation)?, src)
        }
        1 => {
            let omega = cfg.f64("dual.omega")?;
            let src = SourceSet::oscillating_dipole(spec, species, sign, strength, omega, x0, width).map_err(validation)?;
            (StaggeredState::zeros(spec, dt).map_err(validation)?, src)
        }
        2 => (dm::pulse(spec, dt, x0[0], width, strength).map_err(validation)?, SourceSet::vacuum().with_sign(sign)),
        _ => {
            let mut rng = random::rng(cfg.u64("run.seed")?);
            let s = StaggeredState::random_solenoidal(spec, dt, &mut rng, cfg.usize("dual.max_mode")?, strength)
                .map_err(validation)?;
            (s, SourceSet::vacuum().with_sign(sign))
        }
    };
    let magnetic_world = cfg.bool("dual.magnetic_world")?;
    if magnetic_world && src.has_electric() {
        return Err(invalid("dual.magnetic_world needs dual.species = magnetic or a source-free preset"));
    }
    let opts = RunOptions {
        cadence: cfg.usize("run.cadence")?,
        continuity_tolerance: cfg.positive("dual.continuity_tolerance")?,
    };
    let steps = cfg.usize("run.steps")?;
    if steps == 0 || opts.cadence == 0 {
        return Err(invalid("run.steps and run.cadence must be at least 1"));
    }
    let c = dm::continuity_residual(&spec, &src, 0.0, dt).map_err(validation)?;
    let (ce, cm) = c.relative();
    if ce > opts.continuity_tolerance || cm > opts.continuity_tolerance {
        return Err(invalid(format!(
            "sources violate continuity: relative residuals {ce:e}, {cm:e} exceed {:e}",
            opts.continuity_tolerance
        )));
    }
    Ok(Box::new(Dual {
        init,
        src,
        steps,
        opts,
        magnetic_world,
        snapshots: cfg.bool("out.snapshots")?,
    }))
}

impl Scenario for Dual {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()> {
        let (fin, trace) = if self.magnetic_world {
            dm::magnetic_world_run(&self.init, &self.src, self.steps, &self.opts)
        } else {
            dm::run(&self.init, &self.src, self.steps, &self.opts)
        }
        .map_err(runtime)?;
        let dt = self.init.dt();
        let mut t = Table::new(&["step", "t", "energy", "re", "rm", "ce", "cm"]);
        for r in &trace {
            let step = (r.t / dt).round() as usize;
            t.row(&[step.to_string(), num(r.t), num(r.energy), num(r.re), num(r.rm), num(r.ce), num(r.cm)]);
        }
        out.table("dual.csv", t);
        if self.snapshots {
            out.snapshot("e_edge.bin", &Snapshot::Vector(fin.e_grid()))?;
            out.snapshot("h_face.bin", &Snapshot::Vector(fin.h_grid()))?;
        }
        Ok(())
    }
}
