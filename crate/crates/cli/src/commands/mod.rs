//! One module per subcommand. Each turns a resolved [`Config`] into a
//! validated [`Scenario`]; running it fills the output set.

mod algebra;
mod dual;
mod fields;
mod propagate;

use emlab::{GridSpec, VectorFieldGrid};

use crate::config::{Config, Key};
use crate::failure::{validation, Outcome};
use crate::output::Outputs;

pub trait Scenario {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()>;
}

pub type Plan = fn(&Config) -> Outcome<Box<dyn Scenario>>;

pub struct Command {
    pub name: &'static str,
    pub keys: &'static [Key],
    pub plan: Plan,
}

pub const COMMANDS: &[Command] = &[
    Command { name: "propagate", keys: propagate::PROPAGATE_KEYS, plan: propagate::plan_propagate },
    Command { name: "majorana", keys: propagate::MAJORANA_KEYS, plan: propagate::plan_majorana },
    Command { name: "dual", keys: dual::KEYS, plan: dual::plan },
    Command { name: "brackets", keys: algebra::BRACKET_KEYS, plan: algebra::plan_brackets },
    Command { name: "fock", keys: algebra::FOCK_KEYS, plan: algebra::plan_fock },
    Command { name: "clebsch", keys: fields::CLEBSCH_KEYS, plan: fields::plan_clebsch },
    Command { name: "diag", keys: fields::DIAG_KEYS, plan: fields::plan_diag },
];

pub fn command(name: &str) -> &'static Command {
    COMMANDS.iter().find(|c| c.name == name).expect("registered subcommand")
}

fn grid(cfg: &Config) -> Outcome<GridSpec> {
    GridSpec::with_c(cfg.usize("grid.n")?, cfg.positive("grid.h")?, cfg.positive("phys.c")?).map_err(validation)
}

fn centre(spec: &GridSpec) -> [f64; 3] {
    [0.5 * spec.length(); 3]
}

fn rel(v: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        v
    } else {
        v / scale
    }
}

fn max_diff(a: &VectorFieldGrid, b: &VectorFieldGrid) -> f64 {
    a.max_abs_diff(b).expect("fields share a grid")
}
