//! `clebsch` and `diag`: scalar-triple identities under refinement, and
//! vector-calculus diagnostics on a random field.

use emlab::clebsch::{self, ClebschTriple};
use emlab::fields::{self, DcPolicy};
use emlab::{random, GridSpec};

use super::{grid, max_diff, Scenario};
use crate::config::{key, Config, Key};
use crate::failure::{invalid, runtime, validation, Outcome};
use crate::output::{num, Outputs, Table};

pub const CLEBSCH_KEYS: &[Key] = &[
    key("grid.n", "32"),
    key("clebsch.length", "6.4"),
    key("clebsch.preset", "trigonometric"),
    key("clebsch.sweep", "false"),
    key("clebsch.sweep_n", "16,32,64"),
    key("clebsch.margin", "2"),
];

struct Clebsch {
    specs: Vec<GridSpec>,
    harmonic: bool,
    margin: usize,
}

pub fn plan_clebsch(cfg: &Config) -> Outcome<Box<dyn Scenario>> {
    let length = cfg.positive("clebsch.length")?;
    let ns = if cfg.bool("clebsch.sweep")? {
        let list = cfg.f64_list("clebsch.sweep_n")?;
        if list.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(invalid("clebsch.sweep_n: expected non-negative integers"));
        }
        list.into_iter().map(|v| v as usize).collect()
    } else {
        vec![cfg.usize("grid.n")?]
    };
    let specs = ns
        .into_iter()
        .map(|n| GridSpec::new(n, length / n as f64).map_err(validation))
        .collect::<Outcome<Vec<_>>>()?;
    let harmonic = cfg.choice("clebsch.preset", &["trigonometric", "harmonic"])? == 1;
    let margin = cfg.usize("clebsch.margin")?;
    if harmonic {
        for s in &specs {
            clebsch::interior_window(s, margin.max(2)).map_err(validation)?;
        }
    }
    Ok(Box::new(Clebsch { specs, harmonic, margin }))
}

/// Smooth `φ` with harmonic `ψ = xy`, `χ = x² − y²`, measured from the box centre.
fn harmonic_triple(spec: GridSpec) -> emlab::Result<ClebschTriple> {
    let (k, c) = (2.0 * std::f64::consts::PI / spec.length(), 0.5 * spec.length());
    ClebschTriple::from_fn(
        spec,
        move |x| 0.5 + (k * x[0]).sin() * (k * x[2]).cos(),
        move |x| (x[0] - c) * (x[1] - c),
        move |x| (x[0] - c).powi(2) - (x[1] - c).powi(2),
    )
}

impl Scenario for Clebsch {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()> {
        let ratio = |prev: Option<f64>, v: f64| prev.map(|p| num(p / v)).unwrap_or_default();
        let mut t = if self.harmonic {
            // exact on quadratic ψ, χ: the residual is pure roundoff, so no ratio
            Table::new(&["n", "h", "harmonic_div_residual"])
        } else {
            Table::new(&["n", "h", "curl_residual", "div_residual", "curl_ratio", "div_ratio"])
        };
        let mut prev: Option<(f64, f64)> = None;
        for &spec in &self.specs {
            let start = [spec.n().to_string(), num(spec.h())];
            if self.harmonic {
                let tr = harmonic_triple(spec).map_err(runtime)?;
                let r = clebsch::harmonic_div_residual(&tr, self.margin).map_err(runtime)?;
                t.row(&[start[0].clone(), start[1].clone(), num(r)]);
            } else {
                let tr = ClebschTriple::trigonometric(spec).map_err(runtime)?;
                let (c, d) = (clebsch::curl_identity_residual(&tr), clebsch::div_formula_residual(&tr));
                t.row(&[
                    start[0].clone(),
                    start[1].clone(),
                    num(c),
                    num(d),
                    ratio(prev.map(|p| p.0), c),
                    ratio(prev.map(|p| p.1), d),
                ]);
                prev = Some((c, d));
            }
        }
        out.table("clebsch.csv", t);
        Ok(())
    }
}

pub const DIAG_KEYS: &[Key] = &[
    key("grid.n", "16"),
    key("grid.h", "0.25"),
    key("phys.c", "1"),
    key("init.max_mode", "3"),
    key("init.amplitude", "1"),
    key("diag.offset", "0.3,-0.1,0.2"),
];

struct Diag {
    field: emlab::VectorFieldGrid,
    potential: emlab::ScalarFieldGrid,
}

pub fn plan_diag(cfg: &Config) -> Outcome<Box<dyn Scenario>> {
    let spec = grid(cfg)?;
    let mut rng = random::rng(cfg.u64("run.seed")?);
    let (modes, amp) = (cfg.usize("init.max_mode")?, cfg.f64("init.amplitude")?);
    let field = random::smooth_vector(spec, &mut rng, modes, amp).offset(cfg.vec3("diag.offset")?);
    let potential = random::smooth_scalar(spec, &mut rng, modes, amp);
    Ok(Box::new(Diag { field, potential }))
}

impl Scenario for Diag {
    fn run(self: Box<Self>, out: &mut Outputs) -> Outcome<()> {
        let f = &self.field;
        let parts = fields::helmholtz_split(f);
        let projected = fields::project_transverse(f, DcPolicy::Retain);
        let twice = fields::project_transverse(&projected, DcPolicy::Retain);
        let curl_a = fields::curl(f);
        let gauged = fields::gauge_transform(f, &self.potential).map_err(runtime)?;
        let rows = [
            ("input relative spectral divergence", fields::relative_spectral_divergence(f)),
            ("transverse part relative spectral divergence", fields::relative_spectral_divergence(&parts.transverse)),
            ("max |transverse + longitudinal + dc - input|", max_diff(&parts.reassemble(), f)),
            ("max |P(P f) - P f|", max_diff(&twice, &projected)),
            ("max |P f - (transverse + dc)|", max_diff(&projected, &parts.transverse.offset(parts.dc))),
            ("max |curl grad psi|", fields::curl(&fields::gradient(&self.potential)).max_abs()),
            ("max |curl(A + grad psi) - curl A|", max_diff(&fields::curl(&gauged), &curl_a)),
            ("dc x", parts.dc[0]),
            ("dc y", parts.dc[1]),
            ("dc z", parts.dc[2]),
        ];
        let mut t = Table::new(&["quantity", "value"]);
        for (name, v) in rows {
            t.row(&[name.into(), num(v)]);
        }
        out.table("diag.csv", t);
        Ok(())
    }
}
