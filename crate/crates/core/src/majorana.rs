//! Riemann–Silberstein form of the free Maxwell equations.
//!
//! With `F = E + iH`, `G = E − iH` and spin-1 matrices `(s_i)_{kl} = −i e_{ikl}`,
//! one has `(s·∇)V = i curl V`, and the source-free Maxwell system becomes
//!
//! `(1/c)∂F/∂t = −(s·∇)F`, `(1/c)∂G/∂t = +(s·∇)G`, `∇·F = ∇·G = 0`.
//!
//! The two helicity halves need opposite signs because `G = F*` for real
//! fields while `s·∇` is purely imaginary. [`HelicityConvention::SameGenerator`]
//! keeps one sign for both halves for comparison.
//!
//! Lorentz maps act pointwise on the field samples; the sample coordinates
//! are not transformed, so they test the algebraic transformation law only.

use nalgebra::{Matrix2, Matrix3, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{cross, norm, GridSpec, Vec3, VectorFieldGrid};
use crate::spectral::{ccross_real, cdot_real, CVec3, Fft3, Wavevectors, CZERO};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest transversality residual `evolve_rs` accepts.
pub const TRANSVERSE_THRESHOLD: f64 = 1e-9;

/// Levi-Civita symbol.
pub fn levi_civita(i: usize, k: usize, l: usize) -> f64 {
    match (i, k, l) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub type SpinMatrices = [Matrix3<Complex64>; 3];

/// `(s_i)_{kl} = −i e_{ikl}`.
pub fn spin_matrices() -> SpinMatrices {
    [0, 1, 2].map(|i| Matrix3::from_fn(|k, l| -I * levi_civita(i, k, l)))
}

pub fn pauli_matrices() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(CZERO, ONE, ONE, CZERO),
        Matrix2::new(CZERO, -I, I, CZERO),
        Matrix2::new(ONE, CZERO, CZERO, -ONE),
    ]
}

/// `Σ_i (σ_i/2)²`, which is `¾·I` for spin ½.
pub fn pauli_casimir() -> Matrix2<Complex64> {
    pauli_matrices()
        .iter()
        .map(|s| (s * s) * Complex64::new(0.25, 0.0))
        .fold(Matrix2::zeros(), |a, b| a + b)
}

pub fn spin_casimir() -> Matrix3<Complex64> {
    spin_matrices().iter().map(|s| s * s).fold(Matrix3::zeros(), |a, b| a + b)
}

/// `s·v` for a real vector.
pub fn spin_dot(v: Vec3) -> Matrix3<Complex64> {
    let s = spin_matrices();
    s[0] * Complex64::from(v[0]) + s[1] * Complex64::from(v[1]) + s[2] * Complex64::from(v[2])
}

fn pauli_dot(v: Vec3) -> Matrix2<Complex64> {
    let s = pauli_matrices();
    s[0] * Complex64::from(v[0]) + s[1] * Complex64::from(v[1]) + s[2] * Complex64::from(v[2])
}

/// Which sign each helicity half evolves with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HelicityConvention {
    /// `F` with `−(s·∇)`, `G` with `+(s·∇)`: equivalent to Maxwell's equations.
    #[default]
    Maxwell,
    /// Both halves with `+(s·∇)`.
    SameGenerator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSField {
    spec: GridSpec,
    f: Vec<CVec3>,
    g: Vec<CVec3>,
}

impl RSField {
    pub fn new(spec: GridSpec, f: Vec<CVec3>, g: Vec<CVec3>) -> Result<Self> {
        if f.len() != spec.len() || g.len() != spec.len() {
            return Err(Error::InvalidGrid("F and G need one vector per lattice point".into()));
        }
        if f.iter().chain(&g).flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("Riemann-Silberstein field"));
        }
        Ok(Self { spec, f, g })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn f(&self) -> &[CVec3] {
        &self.f
    }

    pub fn g(&self) -> &[CVec3] {
        &self.g
    }

    /// Largest pointwise component magnitude over both halves.
    pub fn max_abs(&self) -> f64 {
        self.f
            .par_iter()
            .chain(self.g.par_iter())
            .map(|v| v.iter().fold(0.0f64, |m, z| m.max(z.norm())))
            .reduce(|| 0.0, f64::max)
    }

    /// Largest imaginary part of `E = (F+G)/2` and `H = (F−G)/2i`.
    pub fn reality_residue(&self) -> f64 {
        self.f
            .par_iter()
            .zip(&self.g)
            .map(|(f, g)| {
                (0..3).fold(0.0f64, |m, c| {
                    let e = (f[c] + g[c]) * 0.5;
                    let h = (f[c] - g[c]) / (2.0 * I);
                    m.max(e.im.abs()).max(h.im.abs())
                })
            })
            .reduce(|| 0.0, f64::max)
    }
}

pub fn to_rs(e: &VectorFieldGrid, h: &VectorFieldGrid) -> Result<RSField> {
    e.spec().check_same(h.spec())?;
    let (f, g) = e
        .values()
        .par_iter()
        .zip(h.values())
        .map(|(e, h)| {
            let f = [0, 1, 2].map(|c| Complex64::new(e[c], h[c]));
            let g = [0, 1, 2].map(|c| Complex64::new(e[c], -h[c]));
            (f, g)
        })
        .unzip();
    Ok(RSField { spec: *e.spec(), f, g })
}

/// Real parts of `E = (F+G)/2` and `H = (F−G)/2i`.
pub fn from_rs(r: &RSField) -> (VectorFieldGrid, VectorFieldGrid) {
    let (e, h) = r
        .f
        .par_iter()
        .zip(&r.g)
        .map(|(f, g)| {
            let e = [0, 1, 2].map(|c| ((f[c] + g[c]) * 0.5).re);
            let h = [0, 1, 2].map(|c| ((f[c] - g[c]) / (2.0 * I)).re);
            (e, h)
        })
        .unzip();
    (
        VectorFieldGrid::from_raw(r.spec, e),
        VectorFieldGrid::from_raw(r.spec, h),
    )
}

fn transversality_of(coeffs: &[&[CVec3]], waves: &Wavevectors) -> f64 {
    let (div, scale) = coeffs
        .iter()
        .flat_map(|c| c.iter().enumerate())
        .map(|(idx, v)| {
            let k = waves.k(idx);
            let amp = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
            (cdot_real(k, v).norm(), norm(k) * amp)
        })
        .fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    if scale == 0.0 {
        0.0
    } else {
        div / scale
    }
}

/// `max_k |k·F̂|, |k·Ĝ|` relative to `max_k |k||F̂|, |k||Ĝ|`.
pub fn transversality_residual(r: &RSField) -> f64 {
    let fft = Fft3::new(r.spec.n());
    let waves = Wavevectors::new(r.spec);
    let cf = fft.complex_coefficients(&r.f);
    let cg = fft.complex_coefficients(&r.g);
    transversality_of(&[&cf, &cg], &waves)
}

/// `exp(−iθ s·n)` applied to `v`; `s·n` has eigenvalues `{+1, 0, −1}`, so
/// the exponential closes as `1 − i sinθ S + (cosθ − 1) S²`.
fn helicity_rotation(n: Vec3, theta: f64, v: &CVec3) -> CVec3 {
    // S v = i n×v, S² v = −n×(n×v)
    let nxv = ccross_real(n, v);
    let nnxv = ccross_real(n, &nxv);
    let (s, c) = theta.sin_cos();
    [0, 1, 2].map(|i| v[i] + nxv[i] * s - nnxv[i] * (c - 1.0))
}

/// The per-mode evolution matrix `exp(∓iθ s·n)` in closed form.
pub fn mode_propagator(n: Vec3, theta: f64) -> Matrix3<Complex64> {
    let s = spin_dot(n);
    let (sn, cs) = theta.sin_cos();
    Matrix3::identity() - s * (I * sn) + (s * s) * Complex64::from(cs - 1.0)
}

/// Exact per-mode evolution of both halves over `dt`.
pub fn evolve_rs(r: &RSField, dt: f64) -> Result<RSField> {
    evolve_rs_with(r, dt, HelicityConvention::Maxwell)
}

pub fn evolve_rs_with(r: &RSField, dt: f64, convention: HelicityConvention) -> Result<RSField> {
    let spec = r.spec;
    let fft = Fft3::new(spec.n());
    let waves = Wavevectors::new(spec);
    let mut cf = fft.complex_coefficients(&r.f);
    let mut cg = fft.complex_coefficients(&r.g);
    let residual = transversality_of(&[&cf, &cg], &waves);
    if residual > TRANSVERSE_THRESHOLD {
        return Err(Error::NonTransverse {
            residual,
            threshold: TRANSVERSE_THRESHOLD,
        });
    }
    let (nyq, total) = cf
        .iter()
        .chain(&cg)
        .enumerate()
        .map(|(i, v)| {
            let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            (if waves.is_nyquist(i % spec.len()) { w } else { 0.0 }, w)
        })
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if total > 0.0 && (nyq / total).sqrt() > crate::propagator::UNRESOLVED_THRESHOLD {
        return Err(Error::UnresolvedContent {
            relative: (nyq / total).sqrt(),
        });
    }
    let g_sign = match convention {
        HelicityConvention::Maxwell => -1.0,
        HelicityConvention::SameGenerator => 1.0,
    };
    let c = spec.c();
    let apply = |coeffs: &mut [CVec3], sign: f64| {
        coeffs.par_iter_mut().enumerate().for_each(|(idx, v)| {
            // k = 0 is a static uniform field
            if idx == 0 {
                return;
            }
            let k = waves.k(idx);
            let kn = norm(k);
            if kn == 0.0 {
                return;
            }
            let n = k.map(|x| x / kn);
            *v = helicity_rotation(n, sign * c * kn * dt, v);
        });
    };
    apply(&mut cf, 1.0);
    apply(&mut cg, g_sign);
    Ok(RSField {
        spec,
        f: fft.complex_field(&cf),
        g: fft.complex_field(&cg),
    })
}

/// `1 + i·pref·(s·δθ) − (1/c)(s·δv)`, the first-order bivector map.
pub fn lorentz_matrix(dtheta: Vec3, dv: Vec3, prefactor: f64, c: f64) -> Matrix3<Complex64> {
    Matrix3::identity() + spin_dot(dtheta) * (I * prefactor) - spin_dot(dv) * Complex64::from(1.0 / c)
}

/// The rotation prefactor as printed for the bivector map.
pub const PRINTED_PREFACTOR: f64 = 1.0 / (4.0 * std::f64::consts::PI);

/// Applies [`lorentz_matrix`] to every sample of both `F` and `G`.
pub fn lorentz_infinitesimal(r: &RSField, dtheta: Vec3, dv: Vec3, prefactor: f64) -> RSField {
    let m = lorentz_matrix(dtheta, dv, prefactor, r.spec.c());
    let map = |v: &CVec3| {
        let out = m * nalgebra::Vector3::new(v[0], v[1], v[2]);
        [out[0], out[1], out[2]]
    };
    RSField {
        spec: r.spec,
        f: r.f.par_iter().map(map).collect(),
        g: r.g.par_iter().map(map).collect(),
    }
}

/// `[1 + i·pref·(σ·δθ)/2 − (σ·δv)/(2c)] ξ`; the default `pref = 1/(4π)`
/// reproduces the printed `i/(8π)`.
pub fn bispinor_lorentz_infinitesimal(
    xi: [Complex64; 2],
    dtheta: Vec3,
    dv: Vec3,
    prefactor: f64,
    c: f64,
) -> [Complex64; 2] {
    let m = Matrix2::identity() + pauli_dot(dtheta) * (I * prefactor * 0.5)
        - pauli_dot(dv) * Complex64::from(0.5 / c);
    let out = m * Vector2::new(xi[0], xi[1]);
    [out[0], out[1]]
}

/// Classical first-order boost of real fields by velocity `dv`:
/// `E' = E + β×H`, `H' = H − β×E`, with `β = dv/c`.
pub fn boost_fields(e: Vec3, h: Vec3, dv: Vec3, c: f64) -> (Vec3, Vec3) {
    let beta = dv.map(|x| x / c);
    let bh = cross(beta, h);
    let be = cross(beta, e);
    (
        [e[0] + bh[0], e[1] + bh[1], e[2] + bh[2]],
        [h[0] - be[0], h[1] - be[1], h[2] - be[2]],
    )
}
