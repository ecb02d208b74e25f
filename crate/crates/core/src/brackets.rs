//! Canonical lattice for the field coordinates `A_μ(x)` and momenta `B^μ(x)`,
//! numerical Poisson brackets, and Dirac's constraint chain.
//!
//! The bracket of two lattice functionals is
//!
//! `[f, g] = (ħ / h³) Σ_{x,μ} (∂f/∂A_μ(x) ∂g/∂B^μ(x) − ∂f/∂B^μ(x) ∂g/∂A_μ(x))`
//!
//! so that `[B^μ(x), A_ν(x')] = −δ^μ_ν δ_{xx'} / h³`, the lattice image of
//! `−g^μ_ν δ³(x − x')`. The factor `ħ` is 1 for classical brackets.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarFieldGrid};
use crate::random::FieldRng;

/// One lattice degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    /// Coordinate `A_μ` at a lattice point.
    A { mu: usize, point: usize },
    /// Momentum `B^μ` at a lattice point.
    B { mu: usize, point: usize },
}

impl Var {
    /// The canonically paired variable at the same point.
    pub fn conjugate(self) -> Var {
        match self {
            Var::A { mu, point } => Var::B { mu, point },
            Var::B { mu, point } => Var::A { mu, point },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalLattice {
    spec: GridSpec,
    a: Vec<[f64; 4]>,
    b: Vec<[f64; 4]>,
}

impl CanonicalLattice {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            a: vec![[0.0; 4]; spec.len()],
            b: vec![[0.0; 4]; spec.len()],
        }
    }

    pub fn new(spec: GridSpec, a: Vec<[f64; 4]>, b: Vec<[f64; 4]>) -> Result<Self> {
        if a.len() != spec.len() || b.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} points for both A and B, got {} and {}",
                spec.len(),
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("canonical lattice"));
        }
        Ok(Self { spec, a, b })
    }

    /// Samples `A_μ(x)` and `B^μ(x)` from closures over positions.
    pub fn from_fn(
        spec: GridSpec,
        a: impl Fn([f64; 3]) -> [f64; 4],
        b: impl Fn([f64; 3]) -> [f64; 4],
    ) -> Self {
        let pos: Vec<_> = (0..spec.len()).map(|i| spec.position(i)).collect();
        Self {
            spec,
            a: pos.iter().map(|&x| a(x)).collect(),
            b: pos.iter().map(|&x| b(x)).collect(),
        }
    }

    /// All eight components drawn as independent smooth random fields.
    pub fn smooth_random(spec: GridSpec, rng: &mut FieldRng, max_mode: usize, amplitude: f64) -> Self {
        let mut s = Self::zeros(spec);
        for mu in 0..4 {
            let fa = crate::random::smooth_scalar(spec, rng, max_mode, amplitude);
            let fb = crate::random::smooth_scalar(spec, rng, max_mode, amplitude);
            for i in 0..spec.len() {
                s.a[i][mu] = fa.values()[i];
                s.b[i][mu] = fb.values()[i];
            }
        }
        s
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn a(&self) -> &[[f64; 4]] {
        &self.a
    }

    pub fn b(&self) -> &[[f64; 4]] {
        &self.b
    }

    pub fn get(&self, v: Var) -> f64 {
        match v {
            Var::A { mu, point } => self.a[point][mu],
            Var::B { mu, point } => self.b[point][mu],
        }
    }

    fn slot(&mut self, v: Var) -> &mut f64 {
        match v {
            Var::A { mu, point } => &mut self.a[point][mu],
            Var::B { mu, point } => &mut self.b[point][mu],
        }
    }

    /// Largest absolute coordinate or momentum value.
    pub fn field_scale(&self) -> f64 {
        self.a.iter().chain(&self.b).flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn momentum_scale(&self) -> f64 {
        self.b
            .iter()
            .flat_map(|v| v[1..].iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn coordinate_scale(&self) -> f64 {
        self.a
            .iter()
            .flat_map(|v| v[1..].iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Central-difference `(B^r)_{,r}` at one point.
    pub fn momentum_divergence(&self, point: usize) -> f64 {
        let s = &self.spec;
        (1..4)
            .map(|r| {
                let axis = r - 1;
                (self.b[s.shifted(point, axis, 1)][r] - self.b[s.shifted(point, axis, -1)][r])
                    / (2.0 * s.h())
            })
            .sum()
    }

    /// Central-difference curl of the spatial coordinates at one point.
    fn curl_a(&self, point: usize) -> [f64; 3] {
        let s = &self.spec;
        let d = |axis: usize, comp: usize| {
            (self.a[s.shifted(point, axis, 1)][comp + 1] - self.a[s.shifted(point, axis, -1)][comp + 1])
                / (2.0 * s.h())
        };
        [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
    }
}

/// Partial derivatives of a functional with respect to lattice variables.
#[derive(Debug, Clone)]
pub enum Gradient {
    Sparse(Vec<(Var, f64)>),
    Dense { a: Vec<[f64; 4]>, b: Vec<[f64; 4]> },
}

impl Gradient {
    pub fn get(&self, v: Var) -> f64 {
        match self {
            Gradient::Sparse(entries) => entries
                .iter()
                .filter(|(w, _)| *w == v)
                .map(|(_, d)| d)
                .sum(),
            Gradient::Dense { a, b } => match v {
                Var::A { mu, point } => a[point][mu],
                Var::B { mu, point } => b[point][mu],
            },
        }
    }

    fn entries(&self) -> Box<dyn Iterator<Item = (Var, f64)> + '_> {
        match self {
            Gradient::Sparse(entries) => Box::new(entries.iter().copied()),
            Gradient::Dense { a, b } => Box::new(
                a.iter()
                    .enumerate()
                    .flat_map(|(point, v)| (0..4).map(move |mu| (Var::A { mu, point }, v[mu])))
                    .chain(b.iter().enumerate().flat_map(|(point, v)| {
                        (0..4).map(move |mu| (Var::B { mu, point }, v[mu]))
                    })),
            ),
        }
    }
}

/// An observable on the canonical lattice.
pub trait LatticeFunctional {
    fn name(&self) -> String;

    fn eval(&self, state: &CanonicalLattice) -> f64;

    /// Analytic partial derivatives, when the functional knows them.
    fn gradient(&self, _state: &CanonicalLattice) -> Option<Gradient> {
        None
    }
}

/// `A_μ` at one lattice point.
#[derive(Debug, Clone, Copy)]
pub struct Coordinate {
    pub mu: usize,
    pub point: usize,
}

impl LatticeFunctional for Coordinate {
    fn name(&self) -> String {
        format!("A_{}({})", self.mu, self.point)
    }

    fn eval(&self, state: &CanonicalLattice) -> f64 {
        state.a[self.point][self.mu]
    }

    fn gradient(&self, _: &CanonicalLattice) -> Option<Gradient> {
        Some(Gradient::Sparse(vec![(
            Var::A {
                mu: self.mu,
                point: self.point,
            },
            1.0,
        )]))
    }
}

/// `B^μ` at one lattice point.
#[derive(Debug, Clone, Copy)]
pub struct Momentum {
    pub mu: usize,
    pub point: usize,
}

impl LatticeFunctional for Momentum {
    fn name(&self) -> String {
        format!("B^{}({})", self.mu, self.point)
    }

    fn eval(&self, state: &CanonicalLattice) -> f64 {
        state.b[self.point][self.mu]
    }

    fn gradient(&self, _: &CanonicalLattice) -> Option<Gradient> {
        Some(Gradient::Sparse(vec![(
            Var::B {
                mu: self.mu,
                point: self.point,
            },
            1.0,
        )]))
    }
}

/// The secondary constraint `(B^r)_{,r}` at one lattice point.
#[derive(Debug, Clone, Copy)]
pub struct MomentumDivergence {
    pub point: usize,
}

impl LatticeFunctional for MomentumDivergence {
    fn name(&self) -> String {
        format!("div B({})", self.point)
    }

    fn eval(&self, state: &CanonicalLattice) -> f64 {
        state.momentum_divergence(self.point)
    }

    fn gradient(&self, state: &CanonicalLattice) -> Option<Gradient> {
        let s = state.spec();
        let w = 1.0 / (2.0 * s.h());
        let mut entries = Vec::with_capacity(6);
        for r in 1..4 {
            entries.push((
                Var::B {
                    mu: r,
                    point: s.shifted(self.point, r - 1, 1),
                },
                w,
            ));
            entries.push((
                Var::B {
                    mu: r,
                    point: s.shifted(self.point, r - 1, -1),
                },
                -w,
            ));
        }
        Some(Gradient::Sparse(entries))
    }
}

/// Compensated sum, so differences of large nearly equal totals keep their digits.
fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `H = Σ_x [¼ F^{rs}F_{rs} + ½ B^r B^r − (B^r)_{,r} A_0] h³`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hamiltonian;

impl LatticeFunctional for Hamiltonian {
    fn name(&self) -> String {
        "H".into()
    }

    fn eval(&self, state: &CanonicalLattice) -> f64 {
        hamiltonian(state)
    }

    fn gradient(&self, state: &CanonicalLattice) -> Option<Gradient> {
        let s = state.spec();
        let h3 = s.cell_volume();
        let curl: Vec<[f64; 3]> = (0..s.len()).map(|i| state.curl_a(i)).collect();
        let mut ga = vec![[0.0; 4]; s.len()];
        let mut gb = vec![[0.0; 4]; s.len()];
        let d = |values: &[[f64; 3]], point: usize, axis: usize, comp: usize| {
            (values[s.shifted(point, axis, 1)][comp] - values[s.shifted(point, axis, -1)][comp])
                / (2.0 * s.h())
        };
        for x in 0..s.len() {
            // ∂/∂A_0: −div B; ∂/∂A_r: (curl curl A)_r; the central curl is self-adjoint
            ga[x][0] = -state.momentum_divergence(x) * h3;
            let cc = [
                d(&curl, x, 1, 2) - d(&curl, x, 2, 1),
                d(&curl, x, 2, 0) - d(&curl, x, 0, 2),
                d(&curl, x, 0, 1) - d(&curl, x, 1, 0),
            ];
            for r in 0..3 {
                ga[x][r + 1] = cc[r] * h3;
                let da0 = (state.a[s.shifted(x, r, 1)][0] - state.a[s.shifted(x, r, -1)][0]) / (2.0 * s.h());
                gb[x][r + 1] = (state.b[x][r + 1] + da0) * h3;
            }
        }
        Some(Gradient::Dense { a: ga, b: gb })
    }
}

pub fn hamiltonian(state: &CanonicalLattice) -> f64 {
    let s = state.spec();
    let h3 = s.cell_volume();
    neumaier_sum((0..s.len()).map(|x| {
        let c = state.curl_a(x);
        let b = &state.b[x];
        let magnetic = 0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
        let kinetic = 0.5 * (b[1] * b[1] + b[2] * b[2] + b[3] * b[3]);
        (magnetic + kinetic - state.momentum_divergence(x) * state.a[x][0]) * h3
    }))
}

/// `H_T = H + Σ_x v(x) B⁰(x) h³` for a caller-chosen multiplier field `v`.
#[derive(Debug, Clone)]
pub struct TotalHamiltonian {
    pub multiplier: ScalarFieldGrid,
}

impl LatticeFunctional for TotalHamiltonian {
    fn name(&self) -> String {
        "H_T".into()
    }

    fn eval(&self, state: &CanonicalLattice) -> f64 {
        let h3 = state.spec().cell_volume();
        hamiltonian(state)
            + neumaier_sum(
                self.multiplier
                    .values()
                    .iter()
                    .zip(&state.b)
                    .map(|(v, b)| v * b[0] * h3),
            )
    }

    fn gradient(&self, state: &CanonicalLattice) -> Option<Gradient> {
        let h3 = state.spec().cell_volume();
        match Hamiltonian.gradient(state)? {
            Gradient::Dense { a, mut b } => {
                for (g, v) in b.iter_mut().zip(self.multiplier.values()) {
                    g[0] = v * h3;
                }
                Some(Gradient::Dense { a, b })
            }
            Gradient::Sparse(_) => unreachable!("the Hamiltonian gradient is dense"),
        }
    }
}

pub fn total_hamiltonian(state: &CanonicalLattice, multiplier: &ScalarFieldGrid) -> Result<f64> {
    state.spec().check_same(multiplier.spec())?;
    if multiplier.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("multiplier"));
    }
    Ok(TotalHamiltonian {
        multiplier: multiplier.clone(),
    }
    .eval(state))
}

/// Hides a functional's analytic gradient so the bracket engine differentiates it numerically.
pub struct Numerical<F>(pub F);

impl<F: LatticeFunctional> LatticeFunctional for Numerical<F> {
    fn name(&self) -> String {
        format!("fd[{}]", self.0.name())
    }

    fn eval(&self, state: &CanonicalLattice) -> f64 {
        self.0.eval(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketOptions {
    /// Multiplies every bracket; `1` for classical brackets, `ħ` for quantum ones.
    pub hbar: f64,
    /// Finite-difference step relative to `max(1, field scale)`.
    pub relative_step: f64,
}

impl Default for BracketOptions {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            relative_step: 1e-5,
        }
    }
}

/// Symmetric-difference partials on a private copy of the state.
struct Prober<'a, F: ?Sized> {
    functional: &'a F,
    probe: CanonicalLattice,
    eps: f64,
}

impl<'a, F: LatticeFunctional + ?Sized> Prober<'a, F> {
    fn new(functional: &'a F, state: &CanonicalLattice, opts: &BracketOptions) -> Self {
        Self {
            functional,
            probe: state.clone(),
            eps: opts.relative_step * state.field_scale().max(1.0),
        }
    }

    fn partial(&mut self, v: Var) -> Result<f64> {
        let original = self.probe.get(v);
        *self.probe.slot(v) = original + self.eps;
        let up = self.functional.eval(&self.probe);
        *self.probe.slot(v) = original - self.eps;
        let down = self.functional.eval(&self.probe);
        *self.probe.slot(v) = original;
        let d = (up - down) / (2.0 * self.eps);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::EvaluationFailure(format!(
                "non-finite derivative of {} with respect to {v:?}",
                self.functional.name()
            )))
        }
    }

    fn dense(&mut self) -> Result<Gradient> {
        let n = self.probe.spec().len();
        let mut a = vec![[0.0; 4]; n];
        let mut b = vec![[0.0; 4]; n];
        for point in 0..n {
            for mu in 0..4 {
                a[point][mu] = self.partial(Var::A { mu, point })?;
                b[point][mu] = self.partial(Var::B { mu, point })?;
            }
        }
        Ok(Gradient::Dense { a, b })
    }
}

fn check_finite(g: Gradient, name: &str) -> Result<Gradient> {
    if g.entries().all(|(_, d)| d.is_finite()) {
        Ok(g)
    } else {
        Err(Error::EvaluationFailure(format!("non-finite analytic derivative of {name}")))
    }
}

#[inline]
fn signed_term(v: Var, df: f64, dg_conj: f64) -> f64 {
    match v {
        Var::A { .. } => df * dg_conj,
        Var::B { .. } => -df * dg_conj,
    }
}

/// `Σ (∂f/∂A ∂g/∂B − ∂f/∂B ∂g/∂A)`; dense pairs are combined per variable
/// so that `[f, f]` cancels term by term.
fn paired_sum(gf: &Gradient, gg: &Gradient) -> f64 {
    match (gf, gg) {
        (Gradient::Dense { a: fa, b: fb }, Gradient::Dense { a: ga, b: gb }) => (0..fa.len())
            .flat_map(|x| (0..4).map(move |mu| (x, mu)))
            .map(|(x, mu)| fa[x][mu] * gb[x][mu] - fb[x][mu] * ga[x][mu])
            .sum(),
        _ => gf
            .entries()
            .filter(|(_, d)| *d != 0.0)
            .map(|(v, df)| signed_term(v, df, gg.get(v.conjugate())))
            .sum(),
    }
}

/// Numerical Poisson bracket `[f, g]` at `state`.
///
/// Analytic gradients are used when a functional provides them; otherwise
/// its partials are taken by symmetric differences, and only at the
/// variables paired with the other functional's support when that support
/// is known.
pub fn poisson_bracket(
    f: &(impl LatticeFunctional + ?Sized),
    g: &(impl LatticeFunctional + ?Sized),
    state: &CanonicalLattice,
    opts: &BracketOptions,
) -> Result<f64> {
    let gf = f.gradient(state).map(|d| check_finite(d, &f.name())).transpose()?;
    let gg = g.gradient(state).map(|d| check_finite(d, &g.name())).transpose()?;
    let raw = match (gf, gg) {
        (Some(gf), Some(gg)) => paired_sum(&gf, &gg),
        (Some(gf), None) => {
            let mut prober = Prober::new(g, state, opts);
            let mut sum = 0.0;
            for (v, df) in gf.entries().filter(|(_, d)| *d != 0.0) {
                sum += signed_term(v, df, prober.partial(v.conjugate())?);
            }
            sum
        }
        (None, Some(gg)) => {
            let mut prober = Prober::new(f, state, opts);
            let mut sum = 0.0;
            for (v, dg) in gg.entries().filter(|(_, d)| *d != 0.0) {
                sum -= signed_term(v, dg, prober.partial(v.conjugate())?);
            }
            sum
        }
        (None, None) => {
            let gf = Prober::new(f, state, opts).dense()?;
            let gg = Prober::new(g, state, opts).dense()?;
            paired_sum(&gf, &gg)
        }
    };
    let value = raw * opts.hbar / state.spec().cell_volume();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::EvaluationFailure(format!("[{}, {}] is not finite", f.name(), g.name())))
    }
}

/// How the Hamiltonian is differentiated inside constraint checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    #[default]
    Analytic,
    FiniteDifference,
}

fn bracket_with_h(
    f: &impl LatticeFunctional,
    state: &CanonicalLattice,
    mode: DerivativeMode,
    opts: &BracketOptions,
) -> Result<f64> {
    match mode {
        DerivativeMode::Analytic => poisson_bracket(f, &Hamiltonian, state, opts),
        DerivativeMode::FiniteDifference => poisson_bracket(f, &Numerical(Hamiltonian), state, opts),
    }
}

/// `[B⁰(x₀), H] − (B^r)_{,r}(x₀)`: vanishes when the bracket reproduces the
/// secondary constraint.
pub fn secondary_constraint_residual(
    state: &CanonicalLattice,
    point: usize,
    mode: DerivativeMode,
    opts: &BracketOptions,
) -> Result<f64> {
    let bracket = bracket_with_h(&Momentum { mu: 0, point }, state, mode, opts)?;
    Ok(bracket - opts.hbar * state.momentum_divergence(point))
}

/// Largest `|[(B^r)_{,r}(x), H]|` over the sampled points; zero means the
/// constraint chain closes without tertiary constraints.
pub fn constraint_chain_closure(
    state: &CanonicalLattice,
    points: &[usize],
    mode: DerivativeMode,
    opts: &BracketOptions,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &point in points {
        let v = bracket_with_h(&MomentumDivergence { point }, state, mode, opts)?;
        worst = worst.max(v.abs());
    }
    Ok(worst)
}

/// Natural magnitude of a first difference of the momenta, `‖B‖∞ / h`.
pub fn divergence_scale(state: &CanonicalLattice) -> f64 {
    state.momentum_scale() / state.spec().h()
}

/// Natural magnitude of a third difference of the coordinates, `‖A‖∞ / h³`.
pub fn closure_scale(state: &CanonicalLattice) -> f64 {
    state.coordinate_scale() / state.spec().cell_volume()
}

pub fn sample_points(spec: &GridSpec, count: usize, rng: &mut FieldRng) -> Vec<usize> {
    (0..count).map(|_| rng.gen_range(0..spec.len())).collect()
}
