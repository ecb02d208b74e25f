//! Pseudo-spectral free-field evolution in the transverse plane-wave basis.
//!
//! The vector potential is expanded as
//!
//! `A(x) = Σ_{k,α} N_k [e⁽α⁾(k) e^{ik·x} c_{kα} + c.c.]`, `N_k² = ħc² / (2ωV)`,
//!
//! with `ω = c|k|`, `E = −(1/c)∂A/∂t` and `H = curl A`. Each amplitude then
//! evolves as a free oscillator, `c_{kα}(t) = c_{kα} e^{−iωt}`, and the field
//! energy `½∫(E² + H²)` equals `Σ ħω|c_{kα}|²`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::relative_divergence_of_coefficients;
use crate::grid::{cross, dot, norm, GridSpec, Vec3, VectorFieldGrid};
use crate::random::FieldRng;
use crate::reduce::ordered_sum;
use crate::spectral::{cdot_real, ccross_real, signed_index, CVec3, Fft3, Wavevectors, CZERO};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest relative spectral divergence `expand` accepts.
pub const TRANSVERSE_THRESHOLD: f64 = 1e-9;
/// Largest relative weight of k = 0 or Nyquist content `expand` accepts.
pub const UNRESOLVED_THRESHOLD: f64 = 1e-12;

/// Deterministic transverse frame `(e⁽¹⁾, e⁽²⁾, n)` for a nonzero wavevector.
///
/// `e⁽¹⁾` is the Gram–Schmidt image of the coordinate axis least aligned with
/// `k` (earlier axes win ties) and `e⁽²⁾ = n × e⁽¹⁾`.
pub fn polarization(k: Vec3) -> [Vec3; 3] {
    let n = {
        let l = norm(k);
        [k[0] / l, k[1] / l, k[2] / l]
    };
    let mut axis = 0;
    for a in 1..3 {
        if n[a].abs() < n[axis].abs() {
            axis = a;
        }
    }
    let mut e1 = [0.0; 3];
    e1[axis] = 1.0;
    let p = n[axis];
    for c in 0..3 {
        e1[c] -= p * n[c];
    }
    let l = norm(e1);
    let e1 = e1.map(|v| v / l);
    [e1, cross(n, e1), n]
}

/// Frames for every resolved lattice mode.
#[derive(Debug, Clone)]
pub struct PolarizationBasis {
    waves: Wavevectors,
}

impl PolarizationBasis {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            waves: Wavevectors::new(spec),
        }
    }

    /// `None` for k = 0 and Nyquist modes.
    pub fn frame(&self, idx: usize) -> Option<[Vec3; 3]> {
        self.waves
            .is_resolved(idx)
            .then(|| polarization(self.waves.k(idx)))
    }

    pub fn waves(&self) -> &Wavevectors {
        &self.waves
    }
}

/// How amplitudes relate to the field normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeConvention {
    /// `N_k² = ħc²/(2ωV)`: `|c|²` counts quanta.
    #[default]
    Quantum,
    /// The extra `√ħ` is absorbed into the amplitudes: `N_k² = c²/(2ωV)`.
    Classical,
}

/// Complex amplitudes `c_{kα}` for every lattice mode, two polarisations each.
///
/// Entries for k = 0 and Nyquist modes exist for indexing convenience and are
/// always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModeSet {
    spec: GridSpec,
    hbar: f64,
    convention: AmplitudeConvention,
    amps: Vec<[Complex64; 2]>,
}

impl SpectralModeSet {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            hbar: 1.0,
            convention: AmplitudeConvention::Quantum,
            amps: vec![[CZERO; 2]; spec.len()],
        }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(crate::error::invalid("hbar", "must be positive"));
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn with_convention(mut self, convention: AmplitudeConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn convention(&self) -> AmplitudeConvention {
        self.convention
    }

    /// The `ħ` that enters the field normalisation and the energy.
    fn action_unit(&self) -> f64 {
        match self.convention {
            AmplitudeConvention::Quantum => self.hbar,
            AmplitudeConvention::Classical => 1.0,
        }
    }

    pub fn amplitudes(&self) -> &[[Complex64; 2]] {
        &self.amps
    }

    pub fn amplitude(&self, idx: usize, pol: usize) -> Complex64 {
        self.amps[idx][pol]
    }

    /// Sets one amplitude; rejects unresolved modes.
    pub fn set(&mut self, idx: usize, pol: usize, value: Complex64) -> Result<()> {
        let waves = Wavevectors::new(self.spec);
        if idx >= self.spec.len() || pol > 1 {
            return Err(crate::error::invalid("mode", "index out of range"));
        }
        if !waves.is_resolved(idx) {
            return Err(crate::error::invalid("mode", "k = 0 and Nyquist modes carry no amplitude"));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite("mode amplitude"));
        }
        self.amps[idx][pol] = value;
        Ok(())
    }

    /// Flat index of the lattice mode with signed integer wavenumbers `m`.
    pub fn mode_index(&self, m: [i64; 3]) -> usize {
        let n = self.spec.n() as i64;
        let w = |v: i64| v.rem_euclid(n) as usize;
        self.spec.index(w(m[0]), w(m[1]), w(m[2]))
    }

    /// Number of nonzero amplitudes.
    pub fn occupied(&self) -> usize {
        self.amps.iter().flatten().filter(|c| c.norm_sqr() > 0.0).count()
    }

    /// `Σ |c_{kα}|²`.
    pub fn norm_sqr(&self) -> f64 {
        ordered_sum(self.amps.len(), |i| self.amps[i][0].norm_sqr() + self.amps[i][1].norm_sqr())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .par_iter()
            .zip(&other.amps)
            .map(|(a, b)| (a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.amps
            .par_iter()
            .map(|a| a[0].norm().max(a[1].norm()))
            .reduce(|| 0.0, f64::max)
    }
}

fn omega(spec: &GridSpec, k: Vec3) -> f64 {
    spec.c() * norm(k)
}

fn normalisation(m: &SpectralModeSet, w: f64) -> f64 {
    let c = m.spec.c();
    (m.action_unit() * c * c / (2.0 * w * m.spec.volume())).sqrt()
}

fn combine(frame: &[Vec3; 3], amps: &[Complex64; 2]) -> CVec3 {
    let [e1, e2, _] = frame;
    [0, 1, 2].map(|c| amps[0] * e1[c] + amps[1] * e2[c])
}

/// Per-mode coefficient vectors `u = Σ_α e⁽α⁾(k)c_{kα}` and `w = Σ_α e⁽α⁾(−k)c*_{−kα}`.
fn uw(m: &SpectralModeSet, waves: &Wavevectors, idx: usize) -> Option<(CVec3, CVec3, Vec3)> {
    if !waves.is_resolved(idx) {
        return None;
    }
    let k = waves.k(idx);
    let neg = waves.negated(idx);
    let u = combine(&polarization(k), &m.amps[idx]);
    let mk = waves.k(neg);
    let w = combine(&polarization(mk), &m.amps[neg].map(|z| z.conj()));
    Some((u, w, k))
}

/// Fourier coefficients of `A`, `E`, `H`, `∂E/∂t`, `∂H/∂t` and `∂²A/∂t²`.
struct Coefficients {
    a: Vec<CVec3>,
    e: Vec<CVec3>,
    h: Vec<CVec3>,
    de: Vec<CVec3>,
    dh: Vec<CVec3>,
    dda: Vec<CVec3>,
}

fn coefficients(m: &SpectralModeSet, with_derivatives: bool) -> Coefficients {
    let spec = m.spec;
    let c = spec.c();
    let waves = Wavevectors::new(spec);
    let per_mode: Vec<[CVec3; 6]> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let Some((u, w, k)) = uw(m, &waves, idx) else {
                return [[CZERO; 3]; 6];
            };
            let om = omega(&spec, k);
            let nk = normalisation(m, om);
            let sum: CVec3 = [0, 1, 2].map(|i| (u[i] + w[i]) * nk);
            let diff: CVec3 = [0, 1, 2].map(|i| (u[i] - w[i]) * nk);
            let a = sum;
            let e = diff.map(|z| z * I * (om / c));
            let h = ccross_real(k, &a).map(|z| z * I);
            if !with_derivatives {
                return [a, e, h, [CZERO; 3], [CZERO; 3], [CZERO; 3]];
            }
            // ∂u/∂t = −iωu, ∂w/∂t = +iωw
            let da = diff.map(|z| z * (-I * om));
            let de = sum.map(|z| z * (om * om / c));
            let dh = ccross_real(k, &da).map(|z| z * I);
            let dda = sum.map(|z| z * (-om * om));
            [a, e, h, de, dh, dda]
        })
        .collect();
    let pick = |slot: usize| per_mode.iter().map(|v| v[slot]).collect::<Vec<_>>();
    Coefficients {
        a: pick(0),
        e: pick(1),
        h: pick(2),
        de: pick(3),
        dh: pick(4),
        dda: pick(5),
    }
}

/// Real lattice fields synthesised from a mode set.
#[derive(Debug, Clone)]
pub struct FieldTriple {
    pub a: VectorFieldGrid,
    pub e: VectorFieldGrid,
    pub h: VectorFieldGrid,
    /// Largest imaginary part met while transforming back to the lattice.
    pub imaginary_residue: f64,
}

impl FieldTriple {
    /// `½ Σ (E² + H²) h³`.
    pub fn energy(&self) -> f64 {
        let h3 = self.e.spec().cell_volume();
        let (e, h) = (self.e.values(), self.h.values());
        0.5 * h3 * ordered_sum(e.len(), |i| dot(e[i], e[i]) + dot(h[i], h[i]))
    }
}

pub fn synthesize(m: &SpectralModeSet) -> FieldTriple {
    let spec = m.spec;
    let fft = Fft3::new(spec.n());
    let co = coefficients(m, false);
    let (a, ia) = fft.real_vector_field(spec, &co.a);
    let (e, ie) = fft.real_vector_field(spec, &co.e);
    let (h, ih) = fft.real_vector_field(spec, &co.h);
    FieldTriple {
        a,
        e,
        h,
        imaginary_residue: ia.max(ie).max(ih),
    }
}

fn unresolved_fraction(coeffs: &[CVec3], waves: &Wavevectors) -> f64 {
    let (bad, total) = crate::reduce::ordered_sum2(coeffs.len(), |idx| {
        let c = &coeffs[idx];
        let w = c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr();
        (if waves.is_resolved(idx) { 0.0 } else { w }, w)
    });
    if total == 0.0 {
        0.0
    } else {
        (bad / total).sqrt()
    }
}

/// Inverts [`synthesize`] for a transverse pair `(A, E)` at `t = 0`.
pub fn expand(a: &VectorFieldGrid, e: &VectorFieldGrid) -> Result<SpectralModeSet> {
    expand_with(a, e, SpectralModeSet::zeros(*a.spec()))
}

/// As [`expand`], writing into a template that fixes `ħ` and the amplitude convention.
pub fn expand_with(a: &VectorFieldGrid, e: &VectorFieldGrid, template: SpectralModeSet) -> Result<SpectralModeSet> {
    let spec = *a.spec();
    spec.check_same(e.spec())?;
    spec.check_same(template.spec())?;
    let fft = Fft3::new(spec.n());
    let waves = Wavevectors::new(spec);
    let ca = fft.vector_coefficients(a);
    let ce = fft.vector_coefficients(e);
    for coeffs in [&ca, &ce] {
        let residual = relative_divergence_of_coefficients(coeffs, &waves);
        if residual > TRANSVERSE_THRESHOLD {
            return Err(Error::NonTransverse {
                residual,
                threshold: TRANSVERSE_THRESHOLD,
            });
        }
        let relative = unresolved_fraction(coeffs, &waves);
        if relative > UNRESOLVED_THRESHOLD {
            return Err(Error::UnresolvedContent { relative });
        }
    }
    let mut out = template;
    let c = spec.c();
    let amps: Vec<[Complex64; 2]> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            if !waves.is_resolved(idx) {
                return [CZERO; 2];
            }
            let k = waves.k(idx);
            let om = omega(&spec, k);
            let nk = normalisation(&out, om);
            // u = ½(Â/N + cÊ/(iωN))
            let u: CVec3 = [0, 1, 2].map(|i| 0.5 * (ca[idx][i] + ce[idx][i] * (c / om) / I) / nk);
            let [e1, e2, _] = polarization(k);
            [cdot_real(e1, &u), cdot_real(e2, &u)]
        })
        .collect();
    out.amps = amps;
    Ok(out)
}

/// Exact free evolution `c_{kα} → c_{kα} e^{−iω dt}`.
pub fn evolve(m: &SpectralModeSet, dt: f64) -> SpectralModeSet {
    let waves = Wavevectors::new(m.spec);
    let spec = m.spec;
    let mut out = m.clone();
    out.amps.par_iter_mut().enumerate().for_each(|(idx, c)| {
        if waves.is_resolved(idx) {
            let p = Complex64::from_polar(1.0, -omega(&spec, waves.k(idx)) * dt);
            c[0] *= p;
            c[1] *= p;
        }
    });
    out
}

/// Repeated fixed-`dt` evolution with the per-mode phases computed once.
#[derive(Debug, Clone)]
pub struct PhaseStepper {
    dt: f64,
    phases: Vec<Complex64>,
}

impl PhaseStepper {
    pub fn new(spec: GridSpec, dt: f64) -> Self {
        let waves = Wavevectors::new(spec);
        let phases = (0..spec.len())
            .into_par_iter()
            .map(|idx| {
                if waves.is_resolved(idx) {
                    Complex64::from_polar(1.0, -omega(&spec, waves.k(idx)) * dt)
                } else {
                    CZERO
                }
            })
            .collect();
        Self { dt, phases }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, m: &mut SpectralModeSet) {
        assert_eq!(m.amps.len(), self.phases.len(), "stepper built for another grid");
        m.amps.par_iter_mut().zip(&self.phases).for_each(|(c, p)| {
            c[0] *= p;
            c[1] *= p;
        });
    }
}

/// `Σ ħω|c_{kα}|²`, the oscillator energy without the zero-point term.
pub fn energy(m: &SpectralModeSet) -> f64 {
    let waves = Wavevectors::new(m.spec);
    let hb = m.action_unit();
    ordered_sum(m.amps.len(), |idx| {
        let c = &m.amps[idx];
        if waves.is_resolved(idx) {
            hb * omega(&m.spec, waves.k(idx)) * (c[0].norm_sqr() + c[1].norm_sqr())
        } else {
            0.0
        }
    })
}

/// `Σ ħω/2` over every resolved mode and both polarisations.
pub fn zero_point_sum(spec: GridSpec, hbar: f64) -> f64 {
    let waves = Wavevectors::new(spec);
    ordered_sum(spec.len(), |idx| {
        if waves.is_resolved(idx) {
            hbar * omega(&spec, waves.k(idx))
        } else {
            0.0
        }
    })
}

/// Max-norms of the four Maxwell residuals and the scale they are judged against.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaxwellResiduals {
    /// `curl H − (1/c)∂E/∂t`
    pub ampere: f64,
    /// `curl E + (1/c)∂H/∂t`
    pub faraday: f64,
    pub div_e: f64,
    pub div_h: f64,
    /// `k_max · max(‖E‖∞, ‖H‖∞)`
    pub scale: f64,
}

impl MaxwellResiduals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ampere, self.faraday, self.div_e, self.div_h]
    }

    pub fn max_relative(&self) -> f64 {
        let m = self.as_array().into_iter().fold(0.0, f64::max);
        if self.scale == 0.0 {
            m
        } else {
            m / self.scale
        }
    }

    fn worst(self, other: Self) -> Self {
        Self {
            ampere: self.ampere.max(other.ampere),
            faraday: self.faraday.max(other.faraday),
            div_e: self.div_e.max(other.div_e),
            div_h: self.div_h.max(other.div_h),
            scale: self.scale.max(other.scale),
        }
    }
}

fn max_norm(v: &[CVec3]) -> f64 {
    v.par_iter()
        .map(|c| c.iter().fold(0.0f64, |m, z| m.max(z.norm())))
        .reduce(|| 0.0, f64::max)
}

fn max_norm_scalar(v: &[Complex64]) -> f64 {
    v.par_iter().map(|z| z.norm()).reduce(|| 0.0, f64::max)
}

fn spectral_curl(coeffs: &[CVec3], waves: &Wavevectors) -> Vec<CVec3> {
    coeffs
        .par_iter()
        .enumerate()
        .map(|(idx, c)| ccross_real(waves.k(idx), c).map(|z| z * I))
        .collect()
}

fn spectral_div(coeffs: &[CVec3], waves: &Wavevectors) -> Vec<Complex64> {
    coeffs
        .par_iter()
        .enumerate()
        .map(|(idx, c)| cdot_real(waves.k(idx), c) * I)
        .collect()
}

/// Maxwell residuals of explicit lattice fields and their time derivatives,
/// with all spatial derivatives taken spectrally.
pub fn field_residuals(
    e: &VectorFieldGrid,
    h: &VectorFieldGrid,
    de_dt: &VectorFieldGrid,
    dh_dt: &VectorFieldGrid,
) -> Result<MaxwellResiduals> {
    let spec = *e.spec();
    for f in [h, de_dt, dh_dt] {
        spec.check_same(f.spec())?;
    }
    let c = spec.c();
    let fft = Fft3::new(spec.n());
    let waves = Wavevectors::new(spec);
    let ce = fft.vector_coefficients(e);
    let ch = fft.vector_coefficients(h);
    let cde = fft.vector_coefficients(de_dt);
    let cdh = fft.vector_coefficients(dh_dt);
    let curl_h = spectral_curl(&ch, &waves);
    let curl_e = spectral_curl(&ce, &waves);
    let ampere: Vec<CVec3> = curl_h
        .iter()
        .zip(&cde)
        .map(|(a, b)| [0, 1, 2].map(|i| a[i] - b[i] / c))
        .collect();
    let faraday: Vec<CVec3> = curl_e
        .iter()
        .zip(&cdh)
        .map(|(a, b)| [0, 1, 2].map(|i| a[i] + b[i] / c))
        .collect();
    let mut de = spectral_div(&ce, &waves);
    let mut dh = spectral_div(&ch, &waves);
    fft.from_coefficients(&mut de);
    fft.from_coefficients(&mut dh);
    Ok(MaxwellResiduals {
        ampere: max_norm(&fft.complex_field(&ampere)),
        faraday: max_norm(&fft.complex_field(&faraday)),
        div_e: max_norm_scalar(&de),
        div_h: max_norm_scalar(&dh),
        scale: waves.max_resolved_norm() * e.max_abs().max(h.max_abs()),
    })
}

fn residuals_now(m: &SpectralModeSet) -> MaxwellResiduals {
    let spec = m.spec;
    let fft = Fft3::new(spec.n());
    let co = coefficients(m, true);
    let real = |c: &[CVec3]| fft.real_vector_field(spec, c).0;
    field_residuals(&real(&co.e), &real(&co.h), &real(&co.de), &real(&co.dh)).expect("fields share one grid")
}

/// Maxwell residuals of the synthesised fields at `t = 0` and `t = dt_probe`.
///
/// Time derivatives are exact: the generator of the free evolution gives
/// `∂c/∂t = −iωc`, so no finite-difference error enters.
pub fn maxwell_residuals(m: &SpectralModeSet, dt_probe: f64) -> MaxwellResiduals {
    residuals_now(m).worst(residuals_now(&evolve(m, dt_probe)))
}

/// Max-norm of `(1/c²)∂²A/∂t² − ΔA` and its scale `k_max² ‖A‖∞`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveResidual {
    pub residual: f64,
    pub scale: f64,
}

impl WaveResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

fn wave_now(m: &SpectralModeSet) -> WaveResidual {
    let spec = m.spec;
    let c = spec.c();
    let fft = Fft3::new(spec.n());
    let waves = Wavevectors::new(spec);
    let co = coefficients(m, true);
    let a = fft.real_vector_field(spec, &co.a).0;
    let dda = fft.real_vector_field(spec, &co.dda).0;
    // spectral Laplacian of the lattice field A
    let ca = fft.vector_coefficients(&a);
    let cdda = fft.vector_coefficients(&dda);
    let res: Vec<CVec3> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let k = waves.k(idx);
            let k2 = dot(k, k);
            [0, 1, 2].map(|i| cdda[idx][i] / (c * c) + ca[idx][i] * k2)
        })
        .collect();
    let kmax = waves.max_resolved_norm();
    WaveResidual {
        residual: max_norm(&fft.complex_field(&res)),
        scale: kmax * kmax * a.max_abs(),
    }
}

pub fn wave_equation_residual(m: &SpectralModeSet, dt_probe: f64) -> WaveResidual {
    let a = wave_now(m);
    let b = wave_now(&evolve(m, dt_probe));
    WaveResidual {
        residual: a.residual.max(b.residual),
        scale: a.scale.max(b.scale),
    }
}

/// One circularly or linearly polarised plane wave.
pub fn plane_wave(spec: GridSpec, m: [i64; 3], amplitudes: [Complex64; 2]) -> Result<SpectralModeSet> {
    let mut set = SpectralModeSet::zeros(spec);
    let idx = set.mode_index(m);
    set.set(idx, 0, amplitudes[0])?;
    set.set(idx, 1, amplitudes[1])?;
    Ok(set)
}

/// Gaussian packet around `k0` moving along `k0`, centred at `x0`.
///
/// Only modes with `k·k0 > 0` are populated, so the packet is one-sided.
pub fn gaussian_packet(spec: GridSpec, m0: [i64; 3], width: f64, x0: Vec3, amplitude: f64) -> Result<SpectralModeSet> {
    if !(width.is_finite() && width > 0.0) {
        return Err(crate::error::invalid("width", "must be positive"));
    }
    let waves = Wavevectors::new(spec);
    let mut set = SpectralModeSet::zeros(spec);
    let dk = 2.0 * std::f64::consts::PI / spec.length();
    let k0 = m0.map(|v| v as f64 * dk);
    if norm(k0) == 0.0 {
        return Err(crate::error::invalid("packet wavevector", "must be nonzero"));
    }
    for idx in 0..spec.len() {
        if !waves.is_resolved(idx) {
            continue;
        }
        let k = waves.k(idx);
        if dot(k, k0) <= 0.0 {
            continue;
        }
        let d = [k[0] - k0[0], k[1] - k0[1], k[2] - k0[2]];
        let env = amplitude * (-0.5 * dot(d, d) * width * width).exp();
        if env < 1e-300 {
            continue;
        }
        set.amps[idx][0] = Complex64::from_polar(env, -dot(k, x0));
    }
    Ok(set)
}

/// Independent random amplitudes on every resolved mode with `|m_i| ≤ max_mode`.
pub fn random_transverse(spec: GridSpec, rng: &mut FieldRng, max_mode: usize, amplitude: f64) -> SpectralModeSet {
    let waves = Wavevectors::new(spec);
    let n = spec.n();
    let mut set = SpectralModeSet::zeros(spec);
    for idx in 0..spec.len() {
        let band = spec
            .coords(idx)
            .iter()
            .all(|&c| signed_index(c, n).unsigned_abs() <= max_mode);
        if !band || !waves.is_resolved(idx) {
            continue;
        }
        for pol in 0..2 {
            set.amps[idx][pol] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amplitude;
        }
    }
    set
}

/// `A` of a single mode, in closed form, for oracle use.
pub fn mode_potential(set: &SpectralModeSet, idx: usize, pol: usize, x: Vec3) -> Vec3 {
    let waves = Wavevectors::new(set.spec);
    let k = waves.k(idx);
    let om = omega(&set.spec, k);
    let nk = normalisation(set, om);
    let e = polarization(k)[pol];
    let z = set.amps[idx][pol] * Complex64::from_polar(1.0, dot(k, x));
    e.map(|v| 2.0 * nk * v * z.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(8, 0.5).unwrap()
    }

    #[test]
    fn frames_are_orthonormal_and_deterministic() {
        for k in [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [-0.3, 2.0, 0.7], [1.0, 1.0, 1.0], [0.0, 0.0, -2.0]] {
            let [e1, e2, n] = polarization(k);
            for (a, b, want) in [(e1, e1, 1.0), (e2, e2, 1.0), (e1, e2, 0.0), (e1, n, 0.0), (e2, n, 0.0)] {
                assert!((dot(a, b) - want).abs() < 1e-15);
            }
            assert_eq!(polarization(k), [e1, e2, n]);
        }
        // ties go to the earliest axis
        assert_eq!(polarization([0.0, 0.0, 1.0])[0], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_modes_give_zero_fields() {
        let f = synthesize(&SpectralModeSet::zeros(grid()));
        assert_eq!(f.a.max_abs() + f.e.max_abs() + f.h.max_abs(), 0.0);
        let m = expand(&f.a, &f.e).unwrap();
        assert_eq!(m.occupied(), 0);
    }

    #[test]
    fn single_right_moving_wave_is_one_amplitude() {
        let g = grid();
        let dk = 2.0 * PI / g.length();
        let k = [dk, 2.0 * dk, 0.0];
        let om = norm(k);
        let [e1, ..] = polarization(k);
        let a0 = 0.3;
        let a = VectorFieldGrid::from_fn(g, |x| e1.map(|v| a0 * v * dot(k, x).cos()));
        // E = −∂A/∂t for cos(k·r − ωt)
        let e = VectorFieldGrid::from_fn(g, |x| e1.map(|v| -a0 * om * v * dot(k, x).sin()));
        let m = expand(&a, &e).unwrap();
        let big: Vec<_> = (0..g.len())
            .flat_map(|i| (0..2).map(move |p| (i, p)))
            .filter(|&(i, p)| m.amplitude(i, p).norm() > 1e-12)
            .collect();
        assert_eq!(big, vec![(m.mode_index([1, 2, 0]), 0)]);
    }

    #[test]
    fn synthesis_matches_closed_form_mode() {
        let g = grid();
        let set = plane_wave(g, [1, -1, 2], [Complex64::new(0.4, -0.2), CZERO]).unwrap();
        let f = synthesize(&set);
        let idx = set.mode_index([1, -1, 2]);
        let oracle = VectorFieldGrid::from_fn(g, |x| mode_potential(&set, idx, 0, x));
        assert!(f.a.max_abs_diff(&oracle).unwrap() < 1e-14);
        assert!(f.imaginary_residue < 1e-15);
    }

    #[test]
    fn spectral_h_is_curl_a_and_central_curl_agrees_to_second_order() {
        let mut errs = vec![];
        for n in [8, 16, 32] {
            let g = GridSpec::new(n, 4.0 / n as f64).unwrap();
            let set = plane_wave(g, [1, 0, 1], [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)]).unwrap();
            let f = synthesize(&set);
            let fd = crate::fields::curl(&f.a);
            errs.push(fd.max_abs_diff(&f.h).unwrap() / f.h.max_abs());
        }
        assert!((errs[1] / errs[2] - 4.0).abs() < 0.8, "{errs:?}");
    }

    #[test]
    fn single_mode_energy_is_hbar_omega() {
        let g = GridSpec::new(8, 2.0 * PI / 8.0).unwrap(); // dk = 1
        let set = plane_wave(g, [2, 0, 0], [Complex64::new(0.6, 0.8), CZERO]).unwrap();
        assert!((energy(&set) - 2.0).abs() < 1e-14);
        let hb = set.clone().with_hbar(0.25).unwrap();
        assert!((energy(&hb) - 0.5).abs() < 1e-14);
        assert!((energy(&hb.clone().with_convention(AmplitudeConvention::Classical)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn full_period_returns_the_state() {
        let g = grid();
        let set = plane_wave(g, [1, 1, 0], [Complex64::new(0.7, 0.1), Complex64::new(-0.2, 0.3)]).unwrap();
        let om = Wavevectors::new(g).k(set.mode_index([1, 1, 0]));
        let period = 2.0 * PI / norm(om);
        assert!(evolve(&set, period).max_abs_diff(&set) < 1e-12);
        assert_eq!(evolve(&set, 0.0), set);
    }

    #[test]
    fn phase_stepper_matches_evolve() {
        let g = grid();
        let set = random_transverse(g, &mut crate::random::rng(2), 3, 1.0);
        let stepper = PhaseStepper::new(g, 0.05);
        let mut s = set.clone();
        for _ in 0..20 {
            stepper.step(&mut s);
        }
        assert!(s.max_abs_diff(&evolve(&set, 1.0)) < 1e-13);
    }

    #[test]
    fn expand_rejects_gradients_and_uniform_content() {
        let g = grid();
        let l = g.length();
        let grad = VectorFieldGrid::from_fn(g, |x| [(2.0 * PI * x[0] / l).cos(), 0.0, 0.0]);
        let zero = VectorFieldGrid::zeros(g);
        assert!(matches!(expand(&grad, &zero), Err(Error::NonTransverse { .. })));
        assert!(matches!(expand(&zero, &grad), Err(Error::NonTransverse { .. })));
        let uniform = VectorFieldGrid::uniform(g, [1.0, 0.0, 0.0]);
        assert!(matches!(expand(&uniform, &zero), Err(Error::UnresolvedContent { .. })));
    }

    #[test]
    fn injected_longitudinal_e_is_detected() {
        let g = GridSpec::new(16, 0.25).unwrap();
        let set = random_transverse(g, &mut crate::random::rng(4), 2, 1.0);
        let co = coefficients(&set, true);
        let fft = Fft3::new(g.n());
        let real = |c: &[CVec3]| fft.real_vector_field(g, c).0;
        let l = g.length();
        let bump = VectorFieldGrid::from_fn(g, |x| [0.1 * (2.0 * PI * x[0] / l).sin(), 0.0, 0.0]);
        let e = real(&co.e).add(&bump).unwrap();
        let clean = field_residuals(&real(&co.e), &real(&co.h), &real(&co.de), &real(&co.dh)).unwrap();
        let dirty = field_residuals(&e, &real(&co.h), &real(&co.de), &real(&co.dh)).unwrap();
        assert!(clean.div_e < 1e-10 * clean.scale);
        assert!(dirty.div_e > 1e-3 * dirty.scale);
    }

    #[test]
    fn zero_field_residuals_are_zero() {
        let m = SpectralModeSet::zeros(grid());
        assert_eq!(maxwell_residuals(&m, 0.01).as_array(), [0.0; 4]);
        assert_eq!(wave_equation_residual(&m, 0.01).residual, 0.0);
    }

    #[test]
    fn zero_point_sum_counts_two_polarisations() {
        let g = GridSpec::new(4, 2.0 * PI / 4.0).unwrap();
        // resolved modes on n = 4: m_i ∈ {−1, 0, 1}, not all zero
        let mut expected = 0.0;
        for a in -1i32..=1 {
            for b in -1i32..=1 {
                for c in -1i32..=1 {
                    expected += ((a * a + b * b + c * c) as f64).sqrt();
                }
            }
        }
        assert!((zero_point_sum(g, 1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn packet_is_one_sided_and_localised() {
        let g = GridSpec::new(16, 0.5).unwrap();
        let p = gaussian_packet(g, [3, 0, 0], 1.0, [4.0, 4.0, 4.0], 1.0).unwrap();
        let f = synthesize(&p);
        let centre = f.a.values()[g.index(8, 8, 8)];
        let far = f.a.values()[g.index(0, 0, 0)];
        assert!(norm(centre) > 10.0 * norm(far));
        assert!(f.imaginary_residue < 1e-12);
    }
}
