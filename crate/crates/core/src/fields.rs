//! Differential operators, Helmholtz splitting and the constraint projection
//! on periodic lattices, plus pointwise spherical-divergence diagnostics.
//!
//! Stencil operators use second-order central differences with periodic
//! wrap. The Helmholtz split and the transverse projection run in Fourier
//! space, where the projector `I − k kᵀ/|k|²` is applied mode by mode and the
//! `k = 0` vector is reported separately.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{cross, dot, GridSpec, ScalarFieldGrid, Vec3, VectorFieldGrid};
use crate::spectral::{cdot_real, cnorm_sqr, CVec3, Fft3, Wavevectors, CZERO};

#[inline]
fn central(values: &[f64], spec: &GridSpec, idx: usize, axis: usize) -> f64 {
    let up = spec.shifted(idx, axis, 1);
    let down = spec.shifted(idx, axis, -1);
    (values[up] - values[down]) / (2.0 * spec.h())
}

#[inline]
fn central_component(values: &[Vec3], spec: &GridSpec, idx: usize, axis: usize, comp: usize) -> f64 {
    let up = spec.shifted(idx, axis, 1);
    let down = spec.shifted(idx, axis, -1);
    (values[up][comp] - values[down][comp]) / (2.0 * spec.h())
}

pub fn gradient(f: &ScalarFieldGrid) -> VectorFieldGrid {
    let spec = *f.spec();
    let v = f.values();
    let out = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            [
                central(v, &spec, i, 0),
                central(v, &spec, i, 1),
                central(v, &spec, i, 2),
            ]
        })
        .collect();
    VectorFieldGrid::from_raw(spec, out)
}

pub fn divergence(f: &VectorFieldGrid) -> ScalarFieldGrid {
    let spec = *f.spec();
    let v = f.values();
    let out = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            central_component(v, &spec, i, 0, 0)
                + central_component(v, &spec, i, 1, 1)
                + central_component(v, &spec, i, 2, 2)
        })
        .collect();
    ScalarFieldGrid::from_raw(spec, out)
}

pub fn curl(f: &VectorFieldGrid) -> VectorFieldGrid {
    let spec = *f.spec();
    let v = f.values();
    let out = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let d = |axis, comp| central_component(v, &spec, i, axis, comp);
            [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
        })
        .collect();
    VectorFieldGrid::from_raw(spec, out)
}

/// Compact 7-point Laplacian.
pub fn laplacian(f: &ScalarFieldGrid) -> ScalarFieldGrid {
    let spec = *f.spec();
    let v = f.values();
    let h2 = spec.h() * spec.h();
    let out = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let mut s = -6.0 * v[i];
            for axis in 0..3 {
                s += v[spec.shifted(i, axis, 1)] + v[spec.shifted(i, axis, -1)];
            }
            s / h2
        })
        .collect();
    ScalarFieldGrid::from_raw(spec, out)
}

/// Component-wise 7-point Laplacian.
pub fn vector_laplacian(f: &VectorFieldGrid) -> VectorFieldGrid {
    let spec = *f.spec();
    let v = f.values();
    let h2 = spec.h() * spec.h();
    let out = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let mut s = v[i].map(|x| -6.0 * x);
            for axis in 0..3 {
                let up = v[spec.shifted(i, axis, 1)];
                let down = v[spec.shifted(i, axis, -1)];
                for c in 0..3 {
                    s[c] += up[c] + down[c];
                }
            }
            s.map(|x| x / h2)
        })
        .collect();
    VectorFieldGrid::from_raw(spec, out)
}

/// Transverse, longitudinal and uniform parts of a vector field.
#[derive(Debug, Clone)]
pub struct HelmholtzParts {
    pub transverse: VectorFieldGrid,
    pub longitudinal: VectorFieldGrid,
    pub dc: Vec3,
}

impl HelmholtzParts {
    pub fn reassemble(&self) -> VectorFieldGrid {
        self.transverse
            .add(&self.longitudinal)
            .expect("parts share a grid")
            .offset(self.dc)
    }
}

fn split_coefficients(coeffs: &[CVec3], waves: &Wavevectors) -> (Vec<CVec3>, Vec<CVec3>) {
    coeffs
        .par_iter()
        .enumerate()
        .map(|(idx, f)| {
            if idx == 0 {
                return ([CZERO; 3], [CZERO; 3]);
            }
            let k = waves.k(idx);
            let k2 = dot(k, k);
            if k2 == 0.0 {
                // Nyquist corners carry no resolvable direction; left in the transverse part
                return (*f, [CZERO; 3]);
            }
            let kf = cdot_real(k, f) / k2;
            let long = [kf * k[0], kf * k[1], kf * k[2]];
            ([f[0] - long[0], f[1] - long[1], f[2] - long[2]], long)
        })
        .unzip()
}

pub fn helmholtz_split(f: &VectorFieldGrid) -> HelmholtzParts {
    let spec = *f.spec();
    let fft = Fft3::new(spec.n());
    let waves = Wavevectors::new(spec);
    let coeffs = fft.vector_coefficients(f);
    let dc = [coeffs[0][0].re, coeffs[0][1].re, coeffs[0][2].re];
    let (trans, long) = split_coefficients(&coeffs, &waves);
    HelmholtzParts {
        transverse: fft.real_vector_field(spec, &trans).0,
        longitudinal: fft.real_vector_field(spec, &long).0,
        dc,
    }
}

/// Whether the uniform part survives projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DcPolicy {
    #[default]
    Retain,
    Drop,
}

/// Removes the longitudinal part of `f`.
pub fn project_transverse(f: &VectorFieldGrid, dc: DcPolicy) -> VectorFieldGrid {
    let spec = *f.spec();
    let fft = Fft3::new(spec.n());
    let waves = Wavevectors::new(spec);
    let mut coeffs = fft.vector_coefficients(f);
    let mean = coeffs[0];
    coeffs.par_iter_mut().enumerate().for_each(|(idx, c)| {
        if idx == 0 {
            return;
        }
        let k = waves.k(idx);
        let k2 = dot(k, k);
        if k2 > 0.0 {
            let kf = cdot_real(k, c) / k2;
            for a in 0..3 {
                c[a] -= kf * k[a];
            }
        }
    });
    coeffs[0] = match dc {
        DcPolicy::Retain => mean,
        DcPolicy::Drop => [CZERO; 3],
    };
    fft.real_vector_field(spec, &coeffs).0
}

/// Spectral norm of `k·f̃` relative to the spectral norm of `|k| f̃`.
///
/// Equals 1 for a pure gradient and 0 for an exactly transverse field.
pub fn relative_spectral_divergence(f: &VectorFieldGrid) -> f64 {
    let spec = *f.spec();
    let coeffs = Fft3::new(spec.n()).vector_coefficients(f);
    relative_divergence_of_coefficients(&coeffs, &Wavevectors::new(spec))
}

pub(crate) fn relative_divergence_of_coefficients(coeffs: &[CVec3], waves: &Wavevectors) -> f64 {
    let (div, scale) = crate::reduce::ordered_sum2(coeffs.len(), |idx| {
        let (k, c) = (waves.k(idx), &coeffs[idx]);
        (cdot_real(k, c).norm_sqr(), dot(k, k) * cnorm_sqr(c))
    });
    if scale == 0.0 {
        0.0
    } else {
        (div / scale).sqrt()
    }
}

/// Exact spectral derivative `i k·f̃` of a field, as a lattice scalar.
pub fn spectral_divergence(f: &VectorFieldGrid) -> ScalarFieldGrid {
    let spec = *f.spec();
    let fft = Fft3::new(spec.n());
    let waves = Wavevectors::new(spec);
    let coeffs = fft.vector_coefficients(f);
    let div: Vec<Complex64> = coeffs
        .par_iter()
        .enumerate()
        .map(|(idx, c)| Complex64::new(0.0, 1.0) * cdot_real(waves.k(idx), c))
        .collect();
    fft.real_scalar_field(spec, &div).0
}

/// `A + ∇Ψ` with the central-difference gradient.
pub fn gauge_transform(a: &VectorFieldGrid, psi: &ScalarFieldGrid) -> Result<VectorFieldGrid> {
    a.spec().check_same(psi.spec())?;
    a.add(&gradient(psi))
}

/// Sample points `(r, θ, φ)` for spherical diagnostics.
#[derive(Debug, Clone)]
pub struct SphericalSamples {
    points: Vec<Vec3>,
}

impl SphericalSamples {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        for (index, p) in points.iter().enumerate() {
            let (r, theta) = (p[0], p[1]);
            let sin_theta = theta.sin();
            let ok = r.is_finite()
                && r > 0.0
                && theta > 0.0
                && theta < std::f64::consts::PI
                && sin_theta > 1e-12
                && p[2].is_finite();
            if !ok {
                return Err(Error::SingularPoint {
                    index,
                    r,
                    sin_theta,
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }
}

/// Divergence in spherical coordinates of a field given by its analytic
/// components `(E_r, E_θ, E_φ)(r, θ, φ)`:
///
/// `(1/r²) ∂(r² E_r)/∂r + (1/(r sinθ)) ∂(sinθ E_θ)/∂θ + (1/(r sinθ)) ∂(sinθ E_φ)/∂φ`
///
/// evaluated with symmetric differences. The radial step is `rel_step · r`;
/// the angular steps are `rel_step` radians.
pub fn spherical_divergence<F>(samples: &SphericalSamples, field: F, rel_step: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, f64, f64) -> Vec3,
{
    if !(rel_step.is_finite() && rel_step > 0.0 && rel_step < 0.5) {
        return Err(crate::error::invalid("rel_step", format!("{rel_step} outside (0, 0.5)")));
    }
    samples
        .points()
        .iter()
        .enumerate()
        .map(|(index, &[r, theta, phi])| {
            let dr = rel_step * r;
            let dt = rel_step;
            if theta - dt <= 0.0 || theta + dt >= std::f64::consts::PI {
                return Err(Error::SingularPoint {
                    index,
                    r,
                    sin_theta: theta.sin(),
                });
            }
            let radial = |rr: f64| rr * rr * field(rr, theta, phi)[0];
            let polar = |tt: f64| tt.sin() * field(r, tt, phi)[1];
            let azimuthal = |pp: f64| theta.sin() * field(r, theta, pp)[2];
            let d_r = (radial(r + dr) - radial(r - dr)) / (2.0 * dr);
            let d_t = (polar(theta + dt) - polar(theta - dt)) / (2.0 * dt);
            let d_p = (azimuthal(phi + dt) - azimuthal(phi - dt)) / (2.0 * dt);
            let value = d_r / (r * r) + (d_t + d_p) / (r * theta.sin());
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::RejectedSample {
                    index,
                    reason: "non-finite field value",
                })
            }
        })
        .collect()
}

/// Power-law fit `|E_r| ≈ amplitude · r^exponent` by least squares in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalloffFit {
    pub exponent: f64,
    pub amplitude: f64,
}

pub fn radial_falloff_fit(samples: &[(f64, f64)]) -> Result<FalloffFit> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    for (index, &(r, m)) in samples.iter().enumerate() {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::RejectedSample {
                index,
                reason: "radius must be positive",
            });
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::RejectedSample {
                index,
                reason: "magnitude must be positive",
            });
        }
        if samples[..index].iter().any(|&(q, _)| q == r) {
            return Err(Error::RejectedSample {
                index,
                reason: "duplicate radius",
            });
        }
    }
    let count = samples.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(r, m)| (r.ln(), m.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = sxy / sxx;
    Ok(FalloffFit {
        exponent,
        amplitude: (my - exponent * mx).exp(),
    })
}

/// Pointwise `∇a × ∇b` of two scalars with central differences.
pub fn gradient_cross(a: &ScalarFieldGrid, b: &ScalarFieldGrid) -> Result<VectorFieldGrid> {
    gradient(a).zip_with(&gradient(b), cross)
}
