//! `emlab`: reproducible, config-driven electrodynamics scenarios.
//!
//! Exit status is 0 on success, 1 for an invalid scenario (nothing is
//! written), and 2 when a validated scenario fails while running.

mod commands;
mod config;
mod failure;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use failure::{invalid, Failure, Outcome};
use output::Outputs;

#[derive(Parser, Debug)]
#[command(name = "emlab", version, about = "Free-field, dual-symmetric and Fock-space electrodynamics scenarios")]
struct Cli {
    /// Flat `key = value` scenario file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// RNG seed (`run.seed`).
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output directory (`out.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved configuration and exit without running.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    /// Points per axis (`grid.n`).
    #[arg(long)]
    n: Option<String>,
    /// Lattice spacing (`grid.h`).
    #[arg(long)]
    h: Option<String>,
    /// Speed of light (`phys.c`).
    #[arg(long)]
    c: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Initial-condition preset.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Record every N steps.
    #[arg(long)]
    cadence: Option<String>,
    /// Also write final-field snapshots.
    #[arg(long)]
    snapshots: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectral free-field propagation.
    Propagate {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Riemann–Silberstein evolution, optionally against the spectral propagator.
    Majorana {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Co-run the spectral propagator and report the trajectory difference.
        #[arg(long)]
        compare: bool,
        /// `maxwell` or `same-generator`.
        #[arg(long)]
        convention: Option<String>,
    },
    /// Duality-symmetric staggered scheme with electric and magnetic sources.
    Dual {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        run: RunArgs,
        /// `electric` or `magnetic`.
        #[arg(long)]
        species: Option<String>,
        /// `as-printed` or `conventional`.
        #[arg(long)]
        sign: Option<String>,
        /// Magnetic sources only, with div E held to zero.
        #[arg(long)]
        magnetic_world: bool,
    },
    /// Canonical and constraint bracket checks on a random lattice state.
    Brackets {
        #[command(flatten)]
        grid: GridArgs,
        /// Number of sampled points.
        #[arg(long)]
        points: Option<String>,
        /// `analytic` or `finite-difference`.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Two-mode Fock-space algebra, Casimir spectra and thermal occupancy.
    Fock {
        /// Per-mode photon cutoff (`fock.n_max`).
        #[arg(long)]
        nmax: Option<String>,
        #[arg(long)]
        omega: Option<String>,
        /// Comma-separated temperatures.
        #[arg(long)]
        temperatures: Option<String>,
    },
    /// Clebsch-triple identities, optionally under grid refinement.
    Clebsch {
        #[arg(long)]
        n: Option<String>,
        /// `trigonometric` or `harmonic`.
        #[arg(long)]
        preset: Option<String>,
        /// Refine over `clebsch.sweep_n`.
        #[arg(long)]
        sweep: bool,
    },
    /// Helmholtz split and vector-calculus diagnostics.
    Diag {
        #[command(flatten)]
        grid: GridArgs,
    },
}

type Overrides = Vec<(String, String)>;

fn put(v: &mut Overrides, key: &str, value: &Option<String>) {
    if let Some(x) = value {
        v.push((key.to_string(), x.clone()));
    }
}

fn flag(v: &mut Overrides, key: &str, on: bool) {
    if on {
        v.push((key.to_string(), "true".to_string()));
    }
}

impl GridArgs {
    fn push(&self, v: &mut Overrides) {
        put(v, "grid.n", &self.n);
        put(v, "grid.h", &self.h);
        put(v, "phys.c", &self.c);
    }
}

impl RunArgs {
    fn push(&self, v: &mut Overrides, preset_key: &str) {
        put(v, preset_key, &self.preset);
        put(v, "run.dt", &self.dt);
        put(v, "run.steps", &self.steps);
        put(v, "run.cadence", &self.cadence);
        flag(v, "out.snapshots", self.snapshots);
    }
}

impl Command {
    /// Subcommand name and the config keys its own flags set.
    fn overrides(&self) -> (&'static str, Overrides) {
        let mut v = Vec::new();
        let name = match self {
            Command::Propagate { grid, run } => {
                grid.push(&mut v);
                run.push(&mut v, "init.preset");
                "propagate"
            }
            Command::Majorana { grid, run, compare, convention } => {
                grid.push(&mut v);
                run.push(&mut v, "init.preset");
                flag(&mut v, "majorana.compare", *compare);
                put(&mut v, "majorana.convention", convention);
                "majorana"
            }
            Command::Dual { grid, run, species, sign, magnetic_world } => {
                grid.push(&mut v);
                run.push(&mut v, "dual.preset");
                put(&mut v, "dual.species", species);
                put(&mut v, "dual.sign", sign);
                flag(&mut v, "dual.magnetic_world", *magnetic_world);
                "dual"
            }
            Command::Brackets { grid, points, mode } => {
                grid.push(&mut v);
                put(&mut v, "brackets.points", points);
                put(&mut v, "brackets.mode", mode);
                "brackets"
            }
            Command::Fock { nmax, omega, temperatures } => {
                put(&mut v, "fock.n_max", nmax);
                put(&mut v, "fock.omega", omega);
                put(&mut v, "fock.temperatures", temperatures);
                "fock"
            }
            Command::Clebsch { n, preset, sweep } => {
                put(&mut v, "grid.n", n);
                put(&mut v, "clebsch.preset", preset);
                flag(&mut v, "clebsch.sweep", *sweep);
                "clebsch"
            }
            Command::Diag { grid } => {
                grid.push(&mut v);
                "diag"
            }
        };
        (name, v)
    }
}

fn resolve(cli: &Cli) -> Outcome<Config> {
    let (name, specific) = cli.command.overrides();
    let mut layer = Vec::new();
    for s in &cli.set {
        let Some((k, v)) = s.split_once('=') else {
            return Err(invalid(format!("--set {s}: expected KEY=VALUE")));
        };
        layer.push((k.trim().to_string(), v.trim().to_string()));
    }
    put(&mut layer, "run.seed", &cli.seed);
    put(&mut layer, "out.dir", &cli.out);
    layer.extend(specific);
    let text = match &cli.config {
        Some(p) => Some(
            std::fs::read_to_string(p).map_err(|e| invalid(format!("cannot read config {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let cmd = commands::command(name);
    Config::resolve(name, cmd.keys, text.as_deref(), |k| std::env::var(k).ok(), &layer)
}

fn run(cli: Cli) -> Outcome<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("cannot start {n} threads: {e}")))?;
    }
    let cfg = resolve(&cli)?;
    if cli.print_config {
        println!("{}\nscenario = {}", output::provenance(&cfg), cfg.scenario());
        for (k, v) in cfg.entries() {
            println!("{k} = {v}");
        }
        return Ok(Vec::new());
    }
    let scenario = (commands::command(cfg.scenario()).plan)(&cfg)?;
    let mut out = Outputs::new(&cfg);
    scenario.run(&mut out)?;
    out.commit(Path::new(cfg.str("out.dir")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("emlab: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_subcommand_is_registered_and_plans_with_defaults() {
        for c in commands::COMMANDS {
            let cfg = Config::resolve(c.name, c.keys, None, |_| None, &[]).unwrap();
            assert!((c.plan)(&cfg).is_ok(), "{}", c.name);
        }
    }

    #[test]
    fn specific_flags_beat_set_overrides() {
        let cli = Cli::try_parse_from(["emlab", "fock", "--set", "fock.n_max=5", "--nmax", "9"]).unwrap();
        assert_eq!(resolve(&cli).unwrap().str("fock.n_max"), "9");
        let cli = Cli::try_parse_from(["emlab", "fock", "--set", "fock.n_max"]).unwrap();
        assert!(resolve(&cli).is_err());
    }
}
