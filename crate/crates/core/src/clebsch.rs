//! Clebsch representation `a = φ∇ψ + ∇χ`, the potential form of Maxwell's
//! equations, and the two field invariants.
//!
//! Everything is built from the central-difference stencils in
//! [`crate::fields`], so the identities below hold to second order in `h`
//! rather than exactly. Only the forward direction is provided: there is no
//! attempt to find `(φ, ψ, χ)` for a given field.
//!
//! The one place where harmonic functions matter (`Δψ = Δχ = 0`, which
//! reduces `div a` to `∇φ·∇ψ`) cannot be exercised with non-constant periodic
//! functions; [`harmonic_div_residual`] checks it instead on a window of the
//! lattice away from the wrap seam, with polynomial data.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{curl, divergence, gradient, laplacian, vector_laplacian};
use crate::grid::{cross, dot, GridSpec, ScalarFieldGrid, Vec3, VectorFieldGrid};
use crate::reduce::ordered_sum2;

#[derive(Debug, Clone, PartialEq)]
pub struct ClebschTriple {
    phi: ScalarFieldGrid,
    psi: ScalarFieldGrid,
    chi: ScalarFieldGrid,
}

impl ClebschTriple {
    pub fn new(phi: ScalarFieldGrid, psi: ScalarFieldGrid, chi: ScalarFieldGrid) -> Result<Self> {
        phi.spec().check_same(psi.spec())?;
        phi.spec().check_same(chi.spec())?;
        let finite = |f: &ScalarFieldGrid| f.values().iter().all(|v| v.is_finite());
        if !(finite(&phi) && finite(&psi) && finite(&chi)) {
            return Err(Error::NonFinite("Clebsch triple"));
        }
        Ok(Self { phi, psi, chi })
    }

    pub fn from_fn(
        spec: GridSpec,
        phi: impl Fn(Vec3) -> f64 + Sync,
        psi: impl Fn(Vec3) -> f64 + Sync,
        chi: impl Fn(Vec3) -> f64 + Sync,
    ) -> Result<Self> {
        Self::new(
            ScalarFieldGrid::from_fn(spec, phi),
            ScalarFieldGrid::from_fn(spec, psi),
            ScalarFieldGrid::from_fn(spec, chi),
        )
    }

    /// A fixed smooth periodic triple with non-parallel `∇φ`, `∇ψ`; the
    /// same functions on every grid, for refinement studies.
    pub fn trigonometric(spec: GridSpec) -> Result<Self> {
        let k = 2.0 * PI / spec.length();
        Self::from_fn(
            spec,
            |x| 0.5 + (k * x[0]).sin() * (k * x[2]).cos(),
            |x| (k * x[1]).sin() + 0.3 * (k * (x[0] - x[2])).cos(),
            |x| 0.7 * (k * (x[0] + x[1] + x[2])).cos(),
        )
    }

    pub fn spec(&self) -> &GridSpec {
        self.phi.spec()
    }

    pub fn phi(&self) -> &ScalarFieldGrid {
        &self.phi
    }

    pub fn psi(&self) -> &ScalarFieldGrid {
        &self.psi
    }

    pub fn chi(&self) -> &ScalarFieldGrid {
        &self.chi
    }
}

/// `φ∇ψ + ∇χ`.
pub fn synthesize(t: &ClebschTriple) -> VectorFieldGrid {
    let gpsi = gradient(&t.psi);
    let gchi = gradient(&t.chi);
    let out = t
        .phi
        .values()
        .par_iter()
        .zip(gpsi.values())
        .zip(gchi.values())
        .map(|((p, gp), gc)| [0, 1, 2].map(|c| p * gp[c] + gc[c]))
        .collect();
    VectorFieldGrid::from_raw(*t.spec(), out)
}

fn max_abs_diff(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.par_iter()
        .zip(b)
        .map(|(x, y)| (0..3).map(|c| (x[c] - y[c]).abs()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// `max |curl(φ∇ψ + ∇χ) − ∇φ × ∇ψ|`.
pub fn curl_identity_residual(t: &ClebschTriple) -> f64 {
    let lhs = curl(&synthesize(t));
    let gphi = gradient(&t.phi);
    let gpsi = gradient(&t.psi);
    let rhs: Vec<Vec3> = gphi.values().iter().zip(gpsi.values()).map(|(a, b)| cross(*a, *b)).collect();
    max_abs_diff(lhs.values(), &rhs)
}

/// `div(φ∇ψ + ∇χ) − (∇φ·∇ψ + φΔψ + Δχ)` pointwise.
fn div_formula_pointwise(t: &ClebschTriple) -> Vec<f64> {
    let lhs = divergence(&synthesize(t));
    let gphi = gradient(&t.phi);
    let gpsi = gradient(&t.psi);
    let lpsi = laplacian(&t.psi);
    let lchi = laplacian(&t.chi);
    (0..t.spec().len())
        .into_par_iter()
        .map(|i| {
            lhs.values()[i]
                - (dot(gphi.values()[i], gpsi.values()[i]) + t.phi.values()[i] * lpsi.values()[i] + lchi.values()[i])
        })
        .collect()
}

/// `max |div(φ∇ψ + ∇χ) − (∇φ·∇ψ + φΔψ + Δχ)|`.
pub fn div_formula_residual(t: &ClebschTriple) -> f64 {
    div_formula_pointwise(t).into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Lattice points at least `margin` cells from the wrap seam on every axis.
pub fn interior_window(spec: &GridSpec, margin: usize) -> Result<Vec<usize>> {
    let n = spec.n();
    if 2 * margin >= n {
        return Err(crate::error::invalid("margin", "leaves no interior points"));
    }
    Ok((0..spec.len())
        .filter(|&i| spec.coords(i).iter().all(|&c| c >= margin && c < n - margin))
        .collect())
}

/// `max |div(φ∇ψ + ∇χ) − ∇φ·∇ψ|` over the interior window: the simplified
/// divergence that holds when `ψ` and `χ` are harmonic. The data need not be
/// periodic; points within `margin` of the seam are excluded.
pub fn harmonic_div_residual(t: &ClebschTriple, margin: usize) -> Result<f64> {
    let window = interior_window(t.spec(), margin.max(2))?;
    let lhs = divergence(&synthesize(t));
    let gphi = gradient(&t.phi);
    let gpsi = gradient(&t.psi);
    Ok(window
        .into_iter()
        .map(|i| (lhs.values()[i] - dot(gphi.values()[i], gpsi.values()[i])).abs())
        .fold(0.0, f64::max))
}

/// Scalar and vector potentials sampled at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSet {
    dt: f64,
    t0: f64,
    phi: Vec<ScalarFieldGrid>,
    a: Vec<VectorFieldGrid>,
}

impl PotentialSet {
    pub fn new(t0: f64, dt: f64, phi: Vec<ScalarFieldGrid>, a: Vec<VectorFieldGrid>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(crate::error::invalid("dt", "must be positive"));
        }
        if phi.len() != a.len() {
            return Err(crate::error::invalid("samples", "scalar and vector schedules differ in length"));
        }
        if phi.len() < 3 {
            return Err(Error::TooFewSamples { needed: 3, got: phi.len() });
        }
        let spec = *phi[0].spec();
        for (p, v) in phi.iter().zip(&a) {
            spec.check_same(p.spec())?;
            spec.check_same(v.spec())?;
            let finite = p.values().iter().all(|x| x.is_finite()) && v.values().iter().flatten().all(|x| x.is_finite());
            if !finite {
                return Err(Error::NonFinite("potential schedule"));
            }
        }
        Ok(Self { dt, t0, phi, a })
    }

    /// Samples `Φ(x, t)` and `A(x, t)` at `samples` times `t0 + m·dt`.
    pub fn from_fn(
        spec: GridSpec,
        t0: f64,
        dt: f64,
        samples: usize,
        phi: impl Fn(Vec3, f64) -> f64 + Sync,
        a: impl Fn(Vec3, f64) -> Vec3 + Sync,
    ) -> Result<Self> {
        let times = (0..samples).map(|m| t0 + m as f64 * dt);
        let (mut ps, mut avs) = (Vec::new(), Vec::new());
        for t in times {
            ps.push(ScalarFieldGrid::from_fn(spec, |x| phi(x, t)));
            avs.push(VectorFieldGrid::from_fn(spec, |x| a(x, t)));
        }
        Self::new(t0, dt, ps, avs)
    }

    pub fn spec(&self) -> &GridSpec {
        self.phi[0].spec()
    }

    /// The sample the residuals are evaluated at (the middle one).
    pub fn centre(&self) -> usize {
        self.phi.len() / 2
    }

    pub fn centre_time(&self) -> f64 {
        self.t0 + self.centre() as f64 * self.dt
    }
}

/// The discrete operators of both equations at the centre sample:
/// vector `(1/c²)∂²A/∂t² − ∇²A + ∇(div A + (1/c)∂Φ/∂t)` and scalar
/// `(1/c²)∂²Φ/∂t² − ∇²Φ − (1/c)∂/∂t(div A + (1/c)∂Φ/∂t)`.
fn potential_operators(p: &PotentialSet, c: f64) -> (Vec<Vec3>, Vec<f64>) {
    let m = p.centre();
    let (dt, spec) = (p.dt, *p.spec());
    // div A + (1/c)∂Φ/∂t at the centre sample
    let div_a = divergence(&p.a[m]);
    let lorenz: Vec<f64> = div_a
        .values()
        .iter()
        .zip(p.phi[m + 1].values().iter().zip(p.phi[m - 1].values()))
        .map(|(d, (u, w))| d + (u - w) / (2.0 * dt * c))
        .collect();
    let lz = ScalarFieldGrid::from_raw(spec, lorenz);
    let grad_lz = gradient(&lz);
    let lap_a = vector_laplacian(&p.a[m]);
    let vector: Vec<Vec3> = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            [0, 1, 2].map(|a| {
                let d2 = (p.a[m + 1].values()[i][a] - 2.0 * p.a[m].values()[i][a] + p.a[m - 1].values()[i][a]) / (dt * dt);
                d2 / (c * c) - lap_a.values()[i][a] + grad_lz.values()[i][a]
            })
        })
        .collect();
    // ∂/∂t(div A + (1/c)∂Φ/∂t) as (div A⁺ − div A⁻)/2dt + (1/c)(Φ⁺ − 2Φ + Φ⁻)/dt²
    let div_up = divergence(&p.a[m + 1]);
    let div_down = divergence(&p.a[m - 1]);
    let lap_phi = laplacian(&p.phi[m]);
    let scalar: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let d2phi = (p.phi[m + 1].values()[i] - 2.0 * p.phi[m].values()[i] + p.phi[m - 1].values()[i]) / (dt * dt);
            let ddiv = (div_up.values()[i] - div_down.values()[i]) / (2.0 * dt);
            d2phi / (c * c) - lap_phi.values()[i] - (ddiv / c + d2phi / (c * c))
        })
        .collect();
    (vector, scalar)
}

/// Max-norm residuals `(rv, rs)` of the potential-form equations
/// `(4π/c) j = vector operator` and `4πρ = scalar operator` at the centre
/// sample, where `j` plays the role of the convective current `ρv`.
pub fn potential_source_residual(p: &PotentialSet, rho: &ScalarFieldGrid, j: &VectorFieldGrid, c: f64) -> Result<(f64, f64)> {
    p.spec().check_same(rho.spec())?;
    p.spec().check_same(j.spec())?;
    check_c(c)?;
    let (vector, scalar) = potential_operators(p, c);
    let w = 4.0 * PI / c;
    let rv = vector
        .par_iter()
        .zip(j.values())
        .map(|(v, j)| (0..3).map(|a| (w * j[a] - v[a]).abs()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    let rs = scalar
        .par_iter()
        .zip(rho.values())
        .map(|(s, r)| (4.0 * PI * r - s).abs())
        .reduce(|| 0.0, f64::max);
    Ok((rv, rs))
}

/// Sources `(ρ, j)` for which the given potentials solve the discrete
/// equations exactly; the method-of-manufactured-solutions input.
pub fn manufactured_sources(p: &PotentialSet, c: f64) -> Result<(ScalarFieldGrid, VectorFieldGrid)> {
    check_c(c)?;
    let (vector, scalar) = potential_operators(p, c);
    let spec = *p.spec();
    let w = c / (4.0 * PI);
    Ok((
        ScalarFieldGrid::from_raw(spec, scalar.into_iter().map(|s| s / (4.0 * PI)).collect()),
        VectorFieldGrid::from_raw(spec, vector.into_iter().map(|v| v.map(|x| w * x)).collect()),
    ))
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(crate::error::invalid("c", "must be positive"))
    }
}

/// `(∫(E² − H²), ∫E·H)` over the box.
pub fn field_invariants(e: &VectorFieldGrid, h: &VectorFieldGrid) -> Result<(f64, f64)> {
    e.spec().check_same(h.spec())?;
    let (ev, hv) = (e.values(), h.values());
    let (s, p) = ordered_sum2(ev.len(), |i| (dot(ev[i], ev[i]) - dot(hv[i], hv[i]), dot(ev[i], hv[i])));
    let dv = e.spec().cell_volume();
    Ok((s * dv, p * dv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, 6.4 / n as f64).unwrap()
    }

    #[test]
    fn synthesize_examples() {
        let g = grid(16);
        let k = 2.0 * PI / g.length();
        let pure = ClebschTriple::from_fn(g, |_| 0.0, |x| x[1].sin(), |x| (k * x[0]).sin()).unwrap();
        assert_eq!(synthesize(&pure), gradient(pure.chi()));
        let t = ClebschTriple::from_fn(g, |_| 1.0, |x| (k * x[0]).sin(), |_| 0.0).unwrap();
        let a = synthesize(&t);
        let err = a
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v[0] - k * (k * g.position(i)[0]).cos()).abs().max(v[1].abs()).max(v[2].abs()))
            .fold(0.0, f64::max);
        assert!(err < 0.05 * k && err > 0.0);
        let t = ClebschTriple::trigonometric(g).unwrap();
        let shift = |t: &ClebschTriple, c: f64| ClebschTriple::new(t.phi().clone(), t.psi().clone(), t.chi().map(|v| v + c)).unwrap();
        let a = synthesize(&t);
        assert!(a.max_abs_diff(&synthesize(&shift(&t, 3.0))).unwrap() < 1e-13);
        // bitwise whenever adding the constant is itself exact
        let dyadic = ClebschTriple::new(t.phi().clone(), t.psi().clone(), t.chi().map(|v| (v * 1048576.0).round() / 1048576.0)).unwrap();
        assert_eq!(synthesize(&dyadic), synthesize(&shift(&dyadic, 3.0)));
    }

    #[test]
    fn degenerate_triples_give_zero_residuals() {
        let g = grid(16);
        let k = 2.0 * PI / g.length();
        let constant = ClebschTriple::from_fn(g, |_| 2.0, |x| (k * x[1]).sin(), |x| (k * x[2]).cos()).unwrap();
        assert!(curl_identity_residual(&constant) < 1e-12);
        let parallel = ClebschTriple::from_fn(g, |x| (k * x[0]).sin(), |x| (k * x[0]).sin(), |_| 0.0).unwrap();
        assert!(curl_identity_residual(&parallel) < 1e-12);
        let zero = ClebschTriple::from_fn(g, |_| 0.0, |_| 0.0, |_| 0.0).unwrap();
        assert_eq!(div_formula_residual(&zero), 0.0);
    }

    #[test]
    fn identities_converge_at_second_order() {
        let r: Vec<(f64, f64)> = [16, 32]
            .into_iter()
            .map(|n| {
                let t = ClebschTriple::trigonometric(grid(n)).unwrap();
                (curl_identity_residual(&t), div_formula_residual(&t))
            })
            .collect();
        let (c, d) = (r[0].0 / r[1].0, r[0].1 / r[1].1);
        assert!((c - 4.0).abs() < 0.8 && (d - 4.0).abs() < 0.8, "{c} {d}");
    }

    #[test]
    fn harmonic_simplification_on_window() {
        let g = grid(16);
        let t = ClebschTriple::from_fn(g, |x| (x[2]).sin(), |x| x[0] * x[1], |x| x[0] * x[0] - x[1] * x[1]).unwrap();
        assert!(harmonic_div_residual(&t, 3).unwrap() < 1e-10);
        // the seam is where the non-periodic data breaks the stencils
        assert!(div_formula_residual(&t) > 1.0);
        assert!(interior_window(&g, 8).is_err());
    }

    #[test]
    fn invariants_examples() {
        let g = grid(8);
        let v = g.volume();
        let e = VectorFieldGrid::uniform(g, [1.0, 0.0, 0.0]);
        let zero = VectorFieldGrid::zeros(g);
        let (s, p) = field_invariants(&e, &zero).unwrap();
        assert!((s - v).abs() < 1e-12 * v && p == 0.0);
        let (s, p) = field_invariants(&e, &e).unwrap();
        assert!(s == 0.0 && (p - v).abs() < 1e-12 * v);
    }

    #[test]
    fn zero_potentials_have_zero_residuals() {
        let g = grid(8);
        let p = PotentialSet::from_fn(g, 0.0, 0.1, 3, |_, _| 0.0, |_, _| [0.0; 3]).unwrap();
        let r = potential_source_residual(&p, &ScalarFieldGrid::zeros(g), &VectorFieldGrid::zeros(g), 1.0).unwrap();
        assert_eq!(r, (0.0, 0.0));
        let short = PotentialSet::from_fn(g, 0.0, 0.1, 2, |_, _| 0.0, |_, _| [0.0; 3]);
        assert!(matches!(short, Err(Error::TooFewSamples { needed: 3, got: 2 })));
    }
}
