//! Leapfrog solver for the symmetric Maxwell equations with electric and
//! magnetic sources, in Gaussian-style units:
//!
//! `curl H = (1/c)∂E/∂t + (4π/c) j_e`, `curl E = −(1/c)∂H/∂t + σ(4π/c) j_m`,
//! `div E = 4πρ_e`, `div H = 4πρ_m`,
//!
//! with `σ = +1` as printed and `σ = −1` in the more common convention
//! ([`MagneticSign`]).
//!
//! Two staggered lattices run side by side. On the primal one `E` lives on
//! cell edges at integer times and `H` on faces at half times; on the dual one
//! the roles swap (`H` on edges at integer times, `E` on faces at half times).
//! Any duality rotation then mixes fields that share both location and time,
//! so rotating commutes with stepping exactly. Each lattice on its own is the
//! standard staggered scheme, and the discrete identities `div∘curl = 0` hold
//! on both.
//!
//! Edge component `a` at node `x` sits at `x + ½h e_a`; face component `a` at
//! `x + ½h(1,1,1) − ½h e_a`; cell centres at `x + ½h(1,1,1)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{dot, GridSpec, ScalarFieldGrid, Vec3, VectorFieldGrid};
use crate::random::FieldRng;
use crate::reduce::ordered_sum;
use crate::spectral::{signed_index, Fft3};

pub type ScalarSource = Arc<dyn Fn(Vec3, f64) -> f64 + Send + Sync>;
pub type VectorSource = Arc<dyn Fn(Vec3, f64) -> Vec3 + Send + Sync>;

/// Sign `σ` of the magnetic current in the curl E equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagneticSign {
    /// `curl E = −(1/c)∂H/∂t + (4π/c) j_m`.
    #[default]
    AsPrinted,
    /// `curl E = −(1/c)∂H/∂t − (4π/c) j_m`, the sign under which duality
    /// rotations of sources and fields commute with the dynamics.
    Conventional,
}

impl MagneticSign {
    pub fn sigma(self) -> f64 {
        match self {
            MagneticSign::AsPrinted => 1.0,
            MagneticSign::Conventional => -1.0,
        }
    }
}

/// Space-time source closures, sampled by the solver wherever and whenever
/// the staggered scheme needs them. `None` means identically zero.
#[derive(Clone, Default)]
pub struct SourceSet {
    pub rho_e: Option<ScalarSource>,
    pub j_e: Option<VectorSource>,
    pub rho_m: Option<ScalarSource>,
    pub j_m: Option<VectorSource>,
    pub sign: MagneticSign,
}

impl fmt::Debug for SourceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceSet")
            .field("rho_e", &self.rho_e.is_some())
            .field("j_e", &self.j_e.is_some())
            .field("rho_m", &self.rho_m.is_some())
            .field("j_m", &self.j_m.is_some())
            .field("sign", &self.sign)
            .finish()
    }
}

/// Which kind of charge a preset describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Electric,
    Magnetic,
}

/// Normalised periodic-friendly Gaussian `g(x − x0)` of width `sigma`, using
/// the nearest periodic image.
fn gaussian(spec: GridSpec, x0: Vec3, sigma: f64) -> impl Fn(Vec3) -> (f64, Vec3) + Send + Sync + Clone {
    let l = spec.length();
    let norm = 1.0 / ((2.0 * PI).powf(1.5) * sigma.powi(3));
    move |x: Vec3| {
        let d = [0, 1, 2].map(|a| {
            let mut v = x[a] - x0[a];
            v -= l * (v / l).round();
            v
        });
        let g = norm * (-0.5 * dot(d, d) / (sigma * sigma)).exp();
        // gradient of g
        (g, d.map(|v| -v / (sigma * sigma) * g))
    }
}

impl SourceSet {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn with_sign(mut self, sign: MagneticSign) -> Self {
        self.sign = sign;
        self
    }

    pub fn has_electric(&self) -> bool {
        self.rho_e.is_some() || self.j_e.is_some()
    }

    pub fn has_magnetic(&self) -> bool {
        self.rho_m.is_some() || self.j_m.is_some()
    }

    /// Static Gaussian charge `q` at `x0` plus the uniform neutralising
    /// background a periodic box requires.
    pub fn static_monopole(spec: GridSpec, species: Species, q: f64, x0: Vec3, sigma: f64) -> Result<Self> {
        check_width(spec, sigma)?;
        let g = gaussian(spec, x0, sigma);
        let background = q / spec.volume();
        let rho: ScalarSource = Arc::new(move |x, _| q * g(x).0 - background);
        Ok(match species {
            Species::Electric => Self {
                rho_e: Some(rho),
                ..Self::default()
            },
            Species::Magnetic => Self {
                rho_m: Some(rho),
                ..Self::default()
            },
        })
    }

    /// Point-like dipole `p(t) = p0 sin(Ωt) ẑ` smeared by a Gaussian:
    /// `ρ = −p·∇g`, and the current chosen so the species' continuity law holds.
    pub fn oscillating_dipole(
        spec: GridSpec,
        species: Species,
        sign: MagneticSign,
        p0: f64,
        angular_frequency: f64,
        x0: Vec3,
        sigma: f64,
    ) -> Result<Self> {
        check_width(spec, sigma)?;
        let g = gaussian(spec, x0, sigma);
        let g2 = g.clone();
        let om = angular_frequency;
        let rho: ScalarSource = Arc::new(move |x, t| -p0 * (om * t).sin() * g(x).1[2]);
        // electric: ∂ρ/∂t + div j = 0; magnetic: ∂ρ/∂t − σ div j = 0
        let factor = match species {
            Species::Electric => 1.0,
            Species::Magnetic => -sign.sigma(),
        };
        let j: VectorSource = Arc::new(move |x, t| [0.0, 0.0, factor * p0 * om * (om * t).cos() * g2(x).0]);
        Ok(match species {
            Species::Electric => Self {
                rho_e: Some(rho),
                j_e: Some(j),
                sign,
                ..Self::default()
            },
            Species::Magnetic => Self {
                rho_m: Some(rho),
                j_m: Some(j),
                sign,
                ..Self::default()
            },
        })
    }
}

fn check_width(spec: GridSpec, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0 && sigma < spec.length() / 4.0) {
        return Err(crate::error::invalid("sigma", "must be positive and below a quarter of the box"));
    }
    Ok(())
}

/// Rotation of `(electric, magnetic)` pairs by `angle`:
/// `(a, b) → (a cosθ + b sinθ, −a sinθ + b cosθ)`.
fn rotate_scalar(a: &Option<ScalarSource>, b: &Option<ScalarSource>, angle: f64) -> (Option<ScalarSource>, Option<ScalarSource>) {
    let (s, c) = angle.sin_cos();
    let mix = |wa: f64, wb: f64| -> Option<ScalarSource> {
        match (a.clone(), b.clone()) {
            (None, None) => None,
            (a, b) => Some(Arc::new(move |x, t| {
                a.as_ref().map_or(0.0, |f| wa * f(x, t)) + b.as_ref().map_or(0.0, |f| wb * f(x, t))
            })),
        }
    };
    (mix(c, s), mix(-s, c))
}

fn rotate_vector(a: &Option<VectorSource>, b: &Option<VectorSource>, angle: f64) -> (Option<VectorSource>, Option<VectorSource>) {
    let (s, c) = angle.sin_cos();
    let mix = |wa: f64, wb: f64| -> Option<VectorSource> {
        match (a.clone(), b.clone()) {
            (None, None) => None,
            (a, b) => Some(Arc::new(move |x, t| {
                let va = a.as_ref().map_or([0.0; 3], |f| f(x, t));
                let vb = b.as_ref().map_or([0.0; 3], |f| f(x, t));
                [0, 1, 2].map(|i| wa * va[i] + wb * vb[i])
            })),
        }
    };
    (mix(c, s), mix(-s, c))
}

/// Neighbour table: `[+x, −x, +y, −y, +z, −z]` per lattice index.
#[derive(Debug, Clone, PartialEq)]
struct Stencil {
    nb: Vec<[usize; 6]>,
}

impl Stencil {
    fn new(spec: &GridSpec) -> Self {
        let nb = (0..spec.len())
            .map(|i| {
                [
                    spec.shifted(i, 0, 1),
                    spec.shifted(i, 0, -1),
                    spec.shifted(i, 1, 1),
                    spec.shifted(i, 1, -1),
                    spec.shifted(i, 2, 1),
                    spec.shifted(i, 2, -1),
                ]
            })
            .collect();
        Self { nb }
    }

    #[inline]
    fn plus(&self, i: usize, axis: usize) -> usize {
        self.nb[i][2 * axis]
    }

    #[inline]
    fn minus(&self, i: usize, axis: usize) -> usize {
        self.nb[i][2 * axis + 1]
    }

    /// Curl of an edge field onto faces (forward differences).
    fn curl_edge(&self, e: &[Vec3], h: f64) -> Vec<Vec3> {
        (0..e.len())
            .into_par_iter()
            .map(|i| {
                let (xp, yp, zp) = (self.plus(i, 0), self.plus(i, 1), self.plus(i, 2));
                [
                    (e[yp][2] - e[i][2] - e[zp][1] + e[i][1]) / h,
                    (e[zp][0] - e[i][0] - e[xp][2] + e[i][2]) / h,
                    (e[xp][1] - e[i][1] - e[yp][0] + e[i][0]) / h,
                ]
            })
            .collect()
    }

    /// Curl of a face field onto edges (backward differences); the adjoint of
    /// [`Stencil::curl_edge`].
    fn curl_face(&self, f: &[Vec3], h: f64) -> Vec<Vec3> {
        (0..f.len())
            .into_par_iter()
            .map(|i| {
                let (xm, ym, zm) = (self.minus(i, 0), self.minus(i, 1), self.minus(i, 2));
                [
                    (f[i][2] - f[ym][2] - f[i][1] + f[zm][1]) / h,
                    (f[i][0] - f[zm][0] - f[i][2] + f[xm][2]) / h,
                    (f[i][1] - f[xm][1] - f[i][0] + f[ym][0]) / h,
                ]
            })
            .collect()
    }

    /// Divergence of an edge field at nodes.
    fn div_edge(&self, e: &[Vec3], h: f64) -> Vec<f64> {
        (0..e.len())
            .into_par_iter()
            .map(|i| {
                (e[i][0] - e[self.minus(i, 0)][0] + e[i][1] - e[self.minus(i, 1)][1] + e[i][2]
                    - e[self.minus(i, 2)][2])
                    / h
            })
            .collect()
    }

    /// Divergence of a face field at cell centres.
    fn div_face(&self, f: &[Vec3], h: f64) -> Vec<f64> {
        (0..f.len())
            .into_par_iter()
            .map(|i| {
                (f[self.plus(i, 0)][0] - f[i][0] + f[self.plus(i, 1)][1] - f[i][1] + f[self.plus(i, 2)][2]
                    - f[i][2])
                    / h
            })
            .collect()
    }

    /// `−∇φ` of a node scalar onto edges (forward differences).
    fn neg_grad_node(&self, phi: &[f64], h: f64) -> Vec<Vec3> {
        (0..phi.len())
            .into_par_iter()
            .map(|i| [0, 1, 2].map(|a| -(phi[self.plus(i, a)] - phi[i]) / h))
            .collect()
    }

    /// `−∇φ` of a cell scalar onto faces (backward differences).
    fn neg_grad_cell(&self, phi: &[f64], h: f64) -> Vec<Vec3> {
        (0..phi.len())
            .into_par_iter()
            .map(|i| [0, 1, 2].map(|a| -(phi[i] - phi[self.minus(i, a)]) / h))
            .collect()
    }
}

/// Where a sampled quantity lives inside a lattice cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Node,
    Cell,
    Edge,
    Face,
}

/// Position of component `axis` of a quantity with the given placement.
pub fn location(spec: &GridSpec, idx: usize, placement: Placement, axis: usize) -> Vec3 {
    let x = spec.position(idx);
    let hh = 0.5 * spec.h();
    match placement {
        Placement::Node => x,
        Placement::Cell => x.map(|v| v + hh),
        Placement::Edge => {
            let mut p = x;
            p[axis] += hh;
            p
        }
        Placement::Face => {
            let mut p = x.map(|v| v + hh);
            p[axis] -= hh;
            p
        }
    }
}

fn sample_scalar(spec: &GridSpec, f: &ScalarSource, placement: Placement, t: f64) -> Vec<f64> {
    (0..spec.len())
        .into_par_iter()
        .map(|i| f(location(spec, i, placement, 0), t))
        .collect()
}

fn sample_vector(spec: &GridSpec, f: &(dyn Fn(Vec3, f64) -> Vec3 + Send + Sync), placement: Placement, t: f64) -> Vec<Vec3> {
    (0..spec.len())
        .into_par_iter()
        .map(|i| [0, 1, 2].map(|a| f(location(spec, i, placement, a), t)[a]))
        .collect()
}

/// Both staggered lattices at edge time `t`; face fields are at `t − dt/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState {
    spec: GridSpec,
    dt: f64,
    t: f64,
    /// Primal lattice.
    e_edge: Vec<Vec3>,
    h_face: Vec<Vec3>,
    /// Dual lattice.
    h_edge: Vec<Vec3>,
    e_face: Vec<Vec3>,
    stencil: Arc<Stencil>,
}

pub fn cfl_limit(spec: &GridSpec) -> f64 {
    spec.h() / 3f64.sqrt()
}

fn check_dt(spec: &GridSpec, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(crate::error::invalid("dt", "must be positive"));
    }
    let cdt = spec.c() * dt;
    let limit = cfl_limit(spec);
    if cdt > limit {
        return Err(Error::Cfl { cdt, limit });
    }
    Ok(())
}

impl StaggeredState {
    pub fn zeros(spec: GridSpec, dt: f64) -> Result<Self> {
        check_dt(&spec, dt)?;
        let z = vec![[0.0; 3]; spec.len()];
        Ok(Self {
            spec,
            dt,
            t: 0.0,
            e_edge: z.clone(),
            h_face: z.clone(),
            h_edge: z.clone(),
            e_face: z,
            stencil: Arc::new(Stencil::new(&spec)),
        })
    }

    /// Samples continuum fields `E(x, t)`, `H(x, t)` onto both lattices at
    /// their staggered locations: edges at `t = 0`, faces at `t = −dt/2`.
    pub fn from_fn(
        spec: GridSpec,
        dt: f64,
        e: impl Fn(Vec3, f64) -> Vec3 + Send + Sync,
        h: impl Fn(Vec3, f64) -> Vec3 + Send + Sync,
    ) -> Result<Self> {
        let mut s = Self::zeros(spec, dt)?;
        s.e_edge = sample_vector(&spec, &e, Placement::Edge, 0.0);
        s.e_face = sample_vector(&spec, &e, Placement::Face, -0.5 * dt);
        s.h_edge = sample_vector(&spec, &h, Placement::Edge, 0.0);
        s.h_face = sample_vector(&spec, &h, Placement::Face, -0.5 * dt);
        s.check_finite()?;
        Ok(s)
    }

    /// Random fields that satisfy both discrete Gauss laws without sources:
    /// each is the staggered curl of a smooth random field.
    pub fn random_solenoidal(spec: GridSpec, dt: f64, rng: &mut FieldRng, max_mode: usize, amplitude: f64) -> Result<Self> {
        let mut s = Self::zeros(spec, dt)?;
        let h = spec.h();
        let st = s.stencil.clone();
        let mut draw = |edge: bool| {
            let v = crate::random::smooth_vector(spec, rng, max_mode, 1.0);
            let curl = if edge {
                st.curl_face(v.values(), h)
            } else {
                st.curl_edge(v.values(), h)
            };
            let m = curl.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            curl.into_iter().map(|x| x.map(|c| c * amplitude / m)).collect::<Vec<_>>()
        };
        s.e_edge = draw(true);
        s.h_face = draw(false);
        s.h_edge = draw(true);
        s.e_face = draw(false);
        Ok(s)
    }

    /// Coulomb-type static fields for the `t = 0` charge densities of `src`:
    /// the potential solves `−Δφ = 4πρ` spectrally and the fields are its
    /// staggered negative gradients.
    pub fn coulomb(spec: GridSpec, dt: f64, src: &SourceSet) -> Result<Self> {
        let mut s = Self::zeros(spec, dt)?;
        let h = spec.h();
        if let Some(rho) = &src.rho_e {
            s.e_edge = s.stencil.neg_grad_node(&poisson(&spec, &sample_scalar(&spec, rho, Placement::Node, 0.0)), h);
            s.e_face = s.stencil.neg_grad_cell(&poisson(&spec, &sample_scalar(&spec, rho, Placement::Cell, -0.5 * dt)), h);
        }
        if let Some(rho) = &src.rho_m {
            s.h_edge = s.stencil.neg_grad_node(&poisson(&spec, &sample_scalar(&spec, rho, Placement::Node, 0.0)), h);
            s.h_face = s.stencil.neg_grad_cell(&poisson(&spec, &sample_scalar(&spec, rho, Placement::Cell, -0.5 * dt)), h);
        }
        s.check_finite()?;
        Ok(s)
    }

    fn check_finite(&self) -> Result<()> {
        let all = self.e_edge.iter().chain(&self.h_face).chain(&self.h_edge).chain(&self.e_face);
        if all.flatten().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("staggered state"))
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Primal-lattice `E` on edges at time `t`.
    pub fn e_edge(&self) -> &[Vec3] {
        &self.e_edge
    }

    /// Primal-lattice `H` on faces at time `t − dt/2`.
    pub fn h_face(&self) -> &[Vec3] {
        &self.h_face
    }

    /// Dual-lattice `H` on edges at time `t`.
    pub fn h_edge(&self) -> &[Vec3] {
        &self.h_edge
    }

    /// Dual-lattice `E` on faces at time `t − dt/2`.
    pub fn e_face(&self) -> &[Vec3] {
        &self.e_face
    }

    /// Primal `E` as a lattice field; component `a` belongs at the edge position.
    pub fn e_grid(&self) -> VectorFieldGrid {
        VectorFieldGrid::from_raw(self.spec, self.e_edge.clone())
    }

    /// Primal `H` as a lattice field; component `a` belongs at the face position.
    pub fn h_grid(&self) -> VectorFieldGrid {
        VectorFieldGrid::from_raw(self.spec, self.h_face.clone())
    }

    /// Largest component over all four stored fields.
    pub fn field_scale(&self) -> f64 {
        self.e_edge
            .par_iter()
            .chain(self.h_face.par_iter())
            .chain(self.h_edge.par_iter())
            .chain(self.e_face.par_iter())
            .map(|v| v[0].abs().max(v[1].abs()).max(v[2].abs()))
            .reduce(|| 0.0, f64::max)
    }

    /// Largest difference between corresponding stored values.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let pairs = [
            (&self.e_edge, &other.e_edge),
            (&self.h_face, &other.h_face),
            (&self.h_edge, &other.h_edge),
            (&self.e_face, &other.e_face),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()))
            .fold(0.0, f64::max)
    }

    /// True when every stored value is identical.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        let same = |a: &[Vec3], b: &[Vec3]| {
            a.iter()
                .zip(b)
                .all(|(x, y)| (0..3).all(|c| x[c].to_bits() == y[c].to_bits()))
        };
        self.t.to_bits() == other.t.to_bits()
            && same(&self.e_edge, &other.e_edge)
            && same(&self.h_face, &other.h_face)
            && same(&self.h_edge, &other.h_edge)
            && same(&self.e_face, &other.e_face)
    }
}

/// Wavevector of the vacuum plane-wave preset, `2π(1, 1, 0)/L`.
pub fn plane_wave_vector(spec: &GridSpec) -> Vec3 {
    let k = 2.0 * PI / spec.length();
    [k, k, 0.0]
}

/// Exact vacuum plane wave `E = ẑ E0 sin(k·x − ωt)`, `H = k̂ × E`.
pub fn plane_wave_fields(spec: &GridSpec, amplitude: f64) -> (impl Fn(Vec3, f64) -> Vec3 + Send + Sync + Clone, impl Fn(Vec3, f64) -> Vec3 + Send + Sync + Clone) {
    let k = plane_wave_vector(spec);
    let omega = spec.c() * dot(k, k).sqrt();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e = move |x: Vec3, t: f64| [0.0, 0.0, amplitude * (dot(k, x) - omega * t).sin()];
    let h = move |x: Vec3, t: f64| {
        let s = amplitude * (dot(k, x) - omega * t).sin();
        [r * s, -r * s, 0.0]
    };
    (e, h)
}

/// L² distance, `√(h³ Σ |ΔF|²)` over all four stored fields, between a
/// state and continuum fields sampled at the matching places and times.
pub fn l2_error(state: &StaggeredState, e: impl Fn(Vec3, f64) -> Vec3 + Send + Sync, h: impl Fn(Vec3, f64) -> Vec3 + Send + Sync) -> f64 {
    let spec = state.spec;
    let (t, tf) = (state.t, state.t - 0.5 * state.dt);
    let diff = |got: &[Vec3], want: Vec<Vec3>| -> f64 {
        got.iter()
            .zip(&want)
            .map(|(a, b)| (0..3).map(|c| (a[c] - b[c]).powi(2)).sum::<f64>())
            .sum()
    };
    let sum = diff(&state.e_edge, sample_vector(&spec, &e, Placement::Edge, t))
        + diff(&state.h_face, sample_vector(&spec, &h, Placement::Face, tf))
        + diff(&state.h_edge, sample_vector(&spec, &h, Placement::Edge, t))
        + diff(&state.e_face, sample_vector(&spec, &e, Placement::Face, tf));
    (spec.cell_volume() * sum).sqrt()
}

/// Gaussian pulse travelling along +x: `E = ẑ f(x − ct)`, `H = −ŷ f(x − ct)`.
pub fn pulse(spec: GridSpec, dt: f64, x0: f64, width: f64, amplitude: f64) -> Result<StaggeredState> {
    check_width(spec, width)?;
    let (l, c) = (spec.length(), spec.c());
    let f = move |x: Vec3, t: f64| {
        let mut d = x[0] - x0 - c * t;
        d -= l * (d / l).round();
        amplitude * (-0.5 * d * d / (width * width)).exp()
    };
    StaggeredState::from_fn(spec, dt, move |x, t| [0.0, 0.0, f(x, t)], move |x, t| [0.0, -f(x, t), 0.0])
}

/// Periodic Poisson solve `−Δφ = 4πρ` with the continuum symbol `|k|²`;
/// the mean of `ρ` is discarded.
fn poisson(spec: &GridSpec, rho: &[f64]) -> Vec<f64> {
    let n = spec.n();
    let fft = Fft3::new(n);
    let dk = 2.0 * PI / spec.length();
    let mut c: Vec<Complex64> = rho.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.to_coefficients(&mut c);
    c.par_iter_mut().enumerate().for_each(|(idx, v)| {
        let m = spec.coords(idx).map(|i| signed_index(i, n) as f64 * dk);
        let k2 = dot(m, m);
        *v = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { *v * (4.0 * PI / k2) };
    });
    fft.from_coefficients(&mut c);
    c.into_iter().map(|v| v.re).collect()
}

/// Face fields of both lattices at `t + dt/2`.
fn advance_faces(s: &StaggeredState, src: &SourceSet) -> (Vec<Vec3>, Vec<Vec3>) {
    let spec = s.spec;
    let (h, dt, a) = (spec.h(), s.dt, spec.c() * s.dt);
    let curl_e = s.stencil.curl_edge(&s.e_edge, h);
    let curl_h = s.stencil.curl_edge(&s.h_edge, h);
    let mut h_face: Vec<Vec3> = s
        .h_face
        .par_iter()
        .zip(&curl_e)
        .map(|(f, c)| [f[0] - a * c[0], f[1] - a * c[1], f[2] - a * c[2]])
        .collect();
    let mut e_face: Vec<Vec3> = s
        .e_face
        .par_iter()
        .zip(&curl_h)
        .map(|(f, c)| [f[0] + a * c[0], f[1] + a * c[1], f[2] + a * c[2]])
        .collect();
    if let Some(jm) = &src.j_m {
        let w = 4.0 * PI * src.sign.sigma() * dt;
        let j = sample_vector(&spec, jm.as_ref(), Placement::Face, s.t);
        h_face.par_iter_mut().zip(&j).for_each(|(f, j)| {
            for c in 0..3 {
                f[c] += w * j[c];
            }
        });
    }
    if let Some(je) = &src.j_e {
        let w = 4.0 * PI * dt;
        let j = sample_vector(&spec, je.as_ref(), Placement::Face, s.t);
        e_face.par_iter_mut().zip(&j).for_each(|(f, j)| {
            for c in 0..3 {
                f[c] -= w * j[c];
            }
        });
    }
    (h_face, e_face)
}

/// One leapfrog step of both lattices.
pub fn step(state: &StaggeredState, src: &SourceSet, dt: f64) -> Result<StaggeredState> {
    check_dt(&state.spec, dt)?;
    if dt != state.dt {
        return Err(crate::error::invalid(
            "dt",
            format!("state is staggered for dt = {}, got {dt}", state.dt),
        ));
    }
    let spec = state.spec;
    let (h, a) = (spec.h(), spec.c() * dt);
    let (h_face, e_face) = advance_faces(state, src);
    let curl_h = state.stencil.curl_face(&h_face, h);
    let curl_e = state.stencil.curl_face(&e_face, h);
    let mut e_edge: Vec<Vec3> = state
        .e_edge
        .par_iter()
        .zip(&curl_h)
        .map(|(f, c)| [f[0] + a * c[0], f[1] + a * c[1], f[2] + a * c[2]])
        .collect();
    let mut h_edge: Vec<Vec3> = state
        .h_edge
        .par_iter()
        .zip(&curl_e)
        .map(|(f, c)| [f[0] - a * c[0], f[1] - a * c[1], f[2] - a * c[2]])
        .collect();
    let t_half = state.t + 0.5 * dt;
    if let Some(je) = &src.j_e {
        let w = 4.0 * PI * dt;
        let j = sample_vector(&spec, je.as_ref(), Placement::Edge, t_half);
        e_edge.par_iter_mut().zip(&j).for_each(|(f, j)| {
            for c in 0..3 {
                f[c] -= w * j[c];
            }
        });
    }
    if let Some(jm) = &src.j_m {
        let w = 4.0 * PI * src.sign.sigma() * dt;
        let j = sample_vector(&spec, jm.as_ref(), Placement::Edge, t_half);
        h_edge.par_iter_mut().zip(&j).for_each(|(f, j)| {
            for c in 0..3 {
                f[c] += w * j[c];
            }
        });
    }
    let next = StaggeredState {
        spec,
        dt,
        t: state.t + dt,
        e_edge,
        h_face,
        h_edge,
        e_face,
        stencil: state.stencil.clone(),
    };
    next.check_finite()?;
    Ok(next)
}

/// The discrete energy the leapfrog scheme conserves without sources,
/// `½ Σ (|edge|² + face⁻·face⁺) h³`, averaged over the two lattices; `face⁻`
/// and `face⁺` are the face fields half a step either side of `t`.
pub fn energy(state: &StaggeredState, src: &SourceSet) -> f64 {
    let (h_next, e_next) = advance_faces(state, src);
    let h3 = state.spec.cell_volume();
    let primal = ordered_sum(state.spec.len(), |i| {
        dot(state.e_edge[i], state.e_edge[i]) + dot(state.h_face[i], h_next[i])
    });
    let dual = ordered_sum(state.spec.len(), |i| {
        dot(state.h_edge[i], state.h_edge[i]) + dot(state.e_face[i], e_next[i])
    });
    0.25 * h3 * (primal + dual)
}

/// `½ Σ (E² + H²) h³` of the stored samples, averaged over the two lattices.
pub fn field_energy(state: &StaggeredState) -> f64 {
    let h3 = state.spec.cell_volume();
    let sum = ordered_sum(state.spec.len(), |i| {
        dot(state.e_edge[i], state.e_edge[i])
            + dot(state.h_face[i], state.h_face[i])
            + dot(state.h_edge[i], state.h_edge[i])
            + dot(state.e_face[i], state.e_face[i])
    });
    0.25 * h3 * sum
}

/// Max-norms of `div E − 4πρ_e` and `div H − 4πρ_m` over both lattices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussResiduals {
    pub re: f64,
    pub rm: f64,
}

fn max_residual(div: &[f64], rho: Option<Vec<f64>>) -> f64 {
    match rho {
        None => div.par_iter().map(|v| v.abs()).reduce(|| 0.0, f64::max),
        Some(r) => div
            .par_iter()
            .zip(&r)
            .map(|(d, r)| (d - 4.0 * PI * r).abs())
            .reduce(|| 0.0, f64::max),
    }
}

pub fn gauss_residuals(state: &StaggeredState, src: &SourceSet) -> GaussResiduals {
    let spec = state.spec;
    let h = spec.h();
    let st = &state.stencil;
    let t_face = state.t - 0.5 * state.dt;
    let rho = |f: &Option<ScalarSource>, p: Placement, t: f64| f.as_ref().map(|f| sample_scalar(&spec, f, p, t));
    let re = max_residual(&st.div_edge(&state.e_edge, h), rho(&src.rho_e, Placement::Node, state.t)).max(max_residual(
        &st.div_face(&state.e_face, h),
        rho(&src.rho_e, Placement::Cell, t_face),
    ));
    let rm = max_residual(&st.div_face(&state.h_face, h), rho(&src.rho_m, Placement::Cell, t_face)).max(max_residual(
        &st.div_edge(&state.h_edge, h),
        rho(&src.rho_m, Placement::Node, state.t),
    ));
    GaussResiduals { re, rm }
}

/// Continuity residuals and the magnitudes of the terms that should cancel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContinuityResiduals {
    pub ce: f64,
    pub cm: f64,
    pub scale_e: f64,
    pub scale_m: f64,
}

impl ContinuityResiduals {
    pub fn relative(&self) -> (f64, f64) {
        let r = |v: f64, s: f64| if s == 0.0 { v } else { v / s };
        (r(self.ce, self.scale_e), r(self.cm, self.scale_m))
    }
}

/// `∂ρ_e/∂t + div j_e` and `∂ρ_m/∂t − σ div j_m` at time `t`, with a central
/// time difference over `dt` and the staggered divergences: electric charge at
/// nodes with its current on edges, magnetic charge at cell centres with its
/// current on faces.
pub fn continuity_residual(spec: &GridSpec, src: &SourceSet, t: f64, dt: f64) -> Result<ContinuityResiduals> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(crate::error::invalid("dt", "must be positive"));
    }
    let st = Stencil::new(spec);
    let h = spec.h();
    let one = |rho: &Option<ScalarSource>, j: &Option<VectorSource>, node: bool, sigma: f64| -> (f64, f64) {
        let (rp, jp) = if node {
            (Placement::Node, Placement::Edge)
        } else {
            (Placement::Cell, Placement::Face)
        };
        let drho: Vec<f64> = match rho {
            Some(f) => {
                let up = sample_scalar(spec, f, rp, t + 0.5 * dt);
                let down = sample_scalar(spec, f, rp, t - 0.5 * dt);
                up.iter().zip(&down).map(|(u, d)| (u - d) / dt).collect()
            }
            None => vec![0.0; spec.len()],
        };
        let div: Vec<f64> = match j {
            Some(f) => {
                let jv = sample_vector(spec, f.as_ref(), jp, t);
                let d = if node { st.div_edge(&jv, h) } else { st.div_face(&jv, h) };
                d.into_iter().map(|v| sigma * v).collect()
            }
            None => vec![0.0; spec.len()],
        };
        drho.iter().zip(&div).fold((0.0f64, 0.0f64), |(r, s), (a, b)| {
            (r.max((a + b).abs()), s.max(a.abs()).max(b.abs()))
        })
    };
    let (ce, scale_e) = one(&src.rho_e, &src.j_e, true, 1.0);
    let (cm, scale_m) = one(&src.rho_m, &src.j_m, false, -src.sign.sigma());
    Ok(ContinuityResiduals { ce, cm, scale_e, scale_m })
}

/// `(E, H) → (E cosθ + H sinθ, −E sinθ + H cosθ)` on both lattices, with the
/// same rotation applied to `(ρ_e, ρ_m)` and `(j_e, j_m)`.
pub fn duality_rotate(state: &StaggeredState, src: &SourceSet, angle: f64) -> (StaggeredState, SourceSet) {
    let (s, c) = angle.sin_cos();
    let mix = |a: &[Vec3], b: &[Vec3]| -> (Vec<Vec3>, Vec<Vec3>) {
        a.par_iter()
            .zip(b)
            .map(|(x, y)| ([0, 1, 2].map(|i| c * x[i] + s * y[i]), [0, 1, 2].map(|i| -s * x[i] + c * y[i])))
            .unzip()
    };
    let (e_edge, h_edge) = mix(&state.e_edge, &state.h_edge);
    let (e_face, h_face) = mix(&state.e_face, &state.h_face);
    let (rho_e, rho_m) = rotate_scalar(&src.rho_e, &src.rho_m, angle);
    let (j_e, j_m) = rotate_vector(&src.j_e, &src.j_m, angle);
    (
        StaggeredState {
            e_edge,
            h_face,
            h_edge,
            e_face,
            ..state.clone()
        },
        SourceSet {
            rho_e,
            j_e,
            rho_m,
            j_m,
            sign: src.sign,
        },
    )
}

/// One row of a run trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub energy: f64,
    pub re: f64,
    pub rm: f64,
    pub ce: f64,
    pub cm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Record every `cadence` steps (and always the first and last state).
    pub cadence: usize,
    /// Largest relative continuity residual accepted before a sourced run.
    pub continuity_tolerance: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            cadence: 1,
            continuity_tolerance: 0.1,
        }
    }
}

fn row(state: &StaggeredState, src: &SourceSet) -> Result<TraceRow> {
    let g = gauss_residuals(state, src);
    let c = continuity_residual(&state.spec, src, state.t, state.dt)?;
    Ok(TraceRow {
        t: state.t,
        energy: energy(state, src),
        re: g.re,
        rm: g.rm,
        ce: c.ce,
        cm: c.cm,
    })
}

/// Checks source continuity at the start, middle and end of the run.
fn check_continuity(state: &StaggeredState, src: &SourceSet, steps: usize, tol: f64) -> Result<()> {
    if !(src.has_electric() || src.has_magnetic()) {
        return Ok(());
    }
    let end = state.t + steps as f64 * state.dt;
    for t in [state.t, 0.5 * (state.t + end), end] {
        let c = continuity_residual(&state.spec, src, t, state.dt)?;
        let (re, rm) = c.relative();
        if re > tol || rm > tol {
            return Err(Error::ContinuityViolation {
                ce: re,
                cm: rm,
                tolerance: tol,
            });
        }
    }
    Ok(())
}

/// Steps `state` and records a trace; returns the final state too.
pub fn run(state: &StaggeredState, src: &SourceSet, steps: usize, opts: &RunOptions) -> Result<(StaggeredState, Vec<TraceRow>)> {
    if opts.cadence == 0 {
        return Err(crate::error::invalid("cadence", "must be at least 1"));
    }
    check_continuity(state, src, steps, opts.continuity_tolerance)?;
    let mut s = state.clone();
    let mut trace = vec![row(&s, src)?];
    for n in 1..=steps {
        s = step(&s, src, s.dt)?;
        if n % opts.cadence == 0 || n == steps {
            trace.push(row(&s, src)?);
        }
    }
    Ok((s, trace))
}

/// Largest allowed `div E` in a magnetic-world run.
pub const MAGNETIC_WORLD_DIV_E: f64 = 1e-12;

/// A run with magnetic sources only; fails if electric sources are present
/// or if `div E` ever exceeds [`MAGNETIC_WORLD_DIV_E`].
pub fn magnetic_world_run(
    state: &StaggeredState,
    src: &SourceSet,
    steps: usize,
    opts: &RunOptions,
) -> Result<(StaggeredState, Vec<TraceRow>)> {
    if src.has_electric() {
        return Err(Error::ElectricSourcePresent);
    }
    check_continuity(state, src, steps, opts.continuity_tolerance)?;
    let check = |s: &StaggeredState| -> Result<TraceRow> {
        let r = row(s, src)?;
        if r.re > MAGNETIC_WORLD_DIV_E {
            return Err(Error::ElectricDivergence {
                residual: r.re,
                threshold: MAGNETIC_WORLD_DIV_E,
            });
        }
        Ok(r)
    };
    let mut s = state.clone();
    let mut trace = vec![check(&s)?];
    for n in 1..=steps {
        s = step(&s, src, s.dt)?;
        let r = check(&s)?;
        if n % opts.cadence.max(1) == 0 || n == steps {
            trace.push(r);
        }
    }
    Ok((s, trace))
}

/// Gaussian-unit fields to Heaviside–Lorentz: `E_HL = E_G / √(4π)`.
pub fn field_to_heaviside_lorentz(v: f64) -> f64 {
    v / (4.0 * PI).sqrt()
}

pub fn field_to_gaussian(v: f64) -> f64 {
    v * (4.0 * PI).sqrt()
}

/// Gaussian-unit charge or current density to Heaviside–Lorentz: `ρ_HL = √(4π) ρ_G`.
pub fn source_to_heaviside_lorentz(v: f64) -> f64 {
    v * (4.0 * PI).sqrt()
}

pub fn source_to_gaussian(v: f64) -> f64 {
    v / (4.0 * PI).sqrt()
}

/// Samples a node scalar source as a lattice field at time `t`.
pub fn sample_node_scalar(spec: GridSpec, f: &ScalarSource, t: f64) -> ScalarFieldGrid {
    ScalarFieldGrid::from_raw(spec, sample_scalar(&spec, f, Placement::Node, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(8, 0.25).unwrap()
    }

    #[test]
    fn cfl_is_enforced() {
        let g = grid();
        let limit = cfl_limit(&g);
        assert!(matches!(StaggeredState::zeros(g, 1.01 * limit), Err(Error::Cfl { .. })));
        assert!(StaggeredState::zeros(g, limit).is_ok());
        let s = StaggeredState::zeros(g, 0.5 * limit).unwrap();
        assert!(step(&s, &SourceSet::vacuum(), 0.25 * limit).is_err());
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let g = grid();
        let s = StaggeredState::zeros(g, 0.05).unwrap();
        let s1 = step(&s, &SourceSet::vacuum(), 0.05).unwrap();
        assert_eq!(s1.field_scale(), 0.0);
        assert!((s1.t() - 0.05).abs() < 1e-18);
    }

    #[test]
    fn face_curl_is_adjoint_of_edge_curl() {
        let g = grid();
        let st = Stencil::new(&g);
        let mut rng = crate::random::rng(1);
        let e = crate::random::smooth_vector(g, &mut rng, 3, 1.0);
        let f = crate::random::smooth_vector(g, &mut rng, 3, 1.0);
        let ce = st.curl_edge(e.values(), g.h());
        let cf = st.curl_face(f.values(), g.h());
        let lhs: f64 = ce.iter().zip(f.values()).map(|(a, b)| dot(*a, *b)).sum();
        let rhs: f64 = e.values().iter().zip(&cf).map(|(a, b)| dot(*a, *b)).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        // div∘curl = 0 on both complexes
        let d1 = st.div_face(&ce, g.h());
        let d2 = st.div_edge(&cf, g.h());
        assert!(d1.iter().chain(&d2).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn leapfrog_energy_is_conserved() {
        let g = grid();
        let dt = 0.5 * cfl_limit(&g);
        let mut s = StaggeredState::random_solenoidal(g, dt, &mut crate::random::rng(5), 2, 1.0).unwrap();
        let vac = SourceSet::vacuum();
        let e0 = energy(&s, &vac);
        for _ in 0..200 {
            s = step(&s, &vac, dt).unwrap();
        }
        assert!((energy(&s, &vac) - e0).abs() < 1e-12 * e0);
    }

    #[test]
    fn continuity_of_presets() {
        let g = GridSpec::new(16, 0.25).unwrap();
        let centre = [2.0; 3];
        let stat = SourceSet::static_monopole(g, Species::Electric, 1.0, centre, 0.5).unwrap();
        let c = continuity_residual(&g, &stat, 0.3, 0.01).unwrap();
        assert_eq!((c.ce, c.cm), (0.0, 0.0));
        for species in [Species::Electric, Species::Magnetic] {
            for sign in [MagneticSign::AsPrinted, MagneticSign::Conventional] {
                let d = SourceSet::oscillating_dipole(g, species, sign, 1.0, 2.0, centre, 0.6).unwrap();
                let (re, rm) = continuity_residual(&g, &d, 0.3, 0.01).unwrap().relative();
                assert!(re.max(rm) < 0.05, "{species:?} {sign:?}: {re} {rm}");
            }
        }
        let mut broken = SourceSet::oscillating_dipole(g, Species::Electric, MagneticSign::AsPrinted, 1.0, 2.0, centre, 0.6).unwrap();
        broken.j_e = None;
        let (re, _) = continuity_residual(&g, &broken, 0.3, 0.01).unwrap().relative();
        assert!(re > 0.5);
        let s = StaggeredState::zeros(g, 0.05).unwrap();
        assert!(matches!(run(&s, &broken, 2, &RunOptions::default()), Err(Error::ContinuityViolation { .. })));
    }

    #[test]
    fn magnetic_world_rejects_electric_sources() {
        let g = grid();
        let s = StaggeredState::zeros(g, 0.05).unwrap();
        let src = SourceSet::static_monopole(g, Species::Electric, 1.0, [1.0; 3], 0.3).unwrap();
        assert_eq!(magnetic_world_run(&s, &src, 1, &RunOptions::default()).unwrap_err(), Error::ElectricSourcePresent);
    }

    #[test]
    fn unit_conversions_invert() {
        for v in [1.0, -2.5] {
            assert!((field_to_gaussian(field_to_heaviside_lorentz(v)) - v).abs() < 1e-15);
            assert!((source_to_gaussian(source_to_heaviside_lorentz(v)) - v).abs() < 1e-15);
        }
    }
}
