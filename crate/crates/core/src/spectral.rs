//! Discrete Fourier machinery on the periodic lattice.
//!
//! Coefficients follow the Fourier-series convention
//! `f(x) = Σ_m f̃_m exp(i k_m·x)` with `k_m = 2π m / (n h)` and signed
//! `m ∈ [−n/2, n/2)`, so Parseval reads `Σ_x |f|² h³ = V Σ_m |f̃_m|²`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::{GridSpec, ScalarFieldGrid, Vec3, VectorFieldGrid};

pub type CVec3 = [Complex64; 3];

pub(crate) const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Planned forward/inverse transforms for one lattice size.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n);
        // z lines are contiguous
        data.par_chunks_mut(n).for_each(|line| fft.process(line));
        // y lines: stride n inside each x slab
        data.par_chunks_mut(n * n).for_each(|slab| {
            let mut line = vec![CZERO; n];
            for k in 0..n {
                for j in 0..n {
                    line[j] = slab[j * n + k];
                }
                fft.process(&mut line);
                for j in 0..n {
                    slab[j * n + k] = line[j];
                }
            }
        });
        // x lines: stride n², gathered per (j, k) column
        let columns: Vec<Vec<Complex64>> = (0..n * n)
            .into_par_iter()
            .map(|jk| {
                let mut line: Vec<Complex64> = (0..n).map(|i| data[i * n * n + jk]).collect();
                fft.process(&mut line);
                line
            })
            .collect();
        for (jk, line) in columns.into_iter().enumerate() {
            for (i, v) in line.into_iter().enumerate() {
                data[i * n * n + jk] = v;
            }
        }
    }

    /// Fourier-series coefficients of `data`, in place.
    pub fn to_coefficients(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let norm = 1.0 / (self.n * self.n * self.n) as f64;
        data.par_iter_mut().for_each(|v| *v *= norm);
    }

    /// Lattice values from Fourier-series coefficients, in place.
    pub fn from_coefficients(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    pub fn scalar_coefficients(&self, f: &ScalarFieldGrid) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.to_coefficients(&mut d);
        d
    }

    pub fn vector_coefficients(&self, f: &VectorFieldGrid) -> Vec<CVec3> {
        let comps: Vec<Vec<Complex64>> = (0..3)
            .into_par_iter()
            .map(|a| {
                let mut d: Vec<Complex64> =
                    f.values().iter().map(|v| Complex64::new(v[a], 0.0)).collect();
                self.to_coefficients(&mut d);
                d
            })
            .collect();
        interleave(&comps)
    }

    /// Complex lattice field from its coefficients.
    pub fn complex_field(&self, coeffs: &[CVec3]) -> Vec<CVec3> {
        let comps: Vec<Vec<Complex64>> = (0..3)
            .into_par_iter()
            .map(|a| {
                let mut d: Vec<Complex64> = coeffs.iter().map(|v| v[a]).collect();
                self.from_coefficients(&mut d);
                d
            })
            .collect();
        interleave(&comps)
    }

    /// Complex coefficients of a complex lattice field.
    pub fn complex_coefficients(&self, field: &[CVec3]) -> Vec<CVec3> {
        let comps: Vec<Vec<Complex64>> = (0..3)
            .into_par_iter()
            .map(|a| {
                let mut d: Vec<Complex64> = field.iter().map(|v| v[a]).collect();
                self.to_coefficients(&mut d);
                d
            })
            .collect();
        interleave(&comps)
    }

    /// Real field from coefficients; returns the field and the largest
    /// imaginary residue encountered.
    pub fn real_vector_field(&self, spec: GridSpec, coeffs: &[CVec3]) -> (VectorFieldGrid, f64) {
        let values = self.complex_field(coeffs);
        let mut imag = 0.0f64;
        let real = values
            .iter()
            .map(|v| {
                for c in v {
                    imag = imag.max(c.im.abs());
                }
                [v[0].re, v[1].re, v[2].re]
            })
            .collect();
        (VectorFieldGrid::from_raw(spec, real), imag)
    }

    pub fn real_scalar_field(&self, spec: GridSpec, coeffs: &[Complex64]) -> (ScalarFieldGrid, f64) {
        let mut d = coeffs.to_vec();
        self.from_coefficients(&mut d);
        let imag = d.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        (
            ScalarFieldGrid::from_raw(spec, d.into_iter().map(|c| c.re).collect()),
            imag,
        )
    }
}

fn interleave(comps: &[Vec<Complex64>]) -> Vec<CVec3> {
    (0..comps[0].len())
        .map(|i| [comps[0][i], comps[1][i], comps[2][i]])
        .collect()
}

/// Signed integer wavenumber for FFT index `idx`.
#[inline]
pub fn signed_index(idx: usize, n: usize) -> isize {
    if idx < n.div_ceil(2) {
        idx as isize
    } else {
        idx as isize - n as isize
    }
}

/// Lattice wavevectors `k = 2π m / (n h)`.
///
/// On even lattices the Nyquist component `m = −n/2` has no sign, so it is
/// carried as zero; this keeps `k(−m) = −k(m)` for every mode and spectral
/// operators map real fields to real fields.
#[derive(Debug, Clone)]
pub struct Wavevectors {
    spec: GridSpec,
    axis: Vec<f64>,
}

impl Wavevectors {
    pub fn new(spec: GridSpec) -> Self {
        let n = spec.n();
        let dk = 2.0 * std::f64::consts::PI / spec.length();
        let axis = (0..n)
            .map(|i| {
                if n % 2 == 0 && i == n / 2 {
                    0.0
                } else {
                    signed_index(i, n) as f64 * dk
                }
            })
            .collect();
        Self { spec, axis }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn k(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.spec.coords(idx);
        [self.axis[i], self.axis[j], self.axis[k]]
    }

    /// Flat index of the mode `−k` (the Nyquist plane maps onto itself).
    #[inline]
    pub fn negated(&self, idx: usize) -> usize {
        let n = self.spec.n();
        let [i, j, k] = self.spec.coords(idx);
        self.spec.index((n - i) % n, (n - j) % n, (n - k) % n)
    }

    /// True when some component of the mode sits at `m = −n/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let n = self.spec.n();
        n % 2 == 0 && self.spec.coords(idx).iter().any(|&c| c == n / 2)
    }

    /// Modes resolved by the spectral dynamics: nonzero and off the Nyquist planes.
    #[inline]
    pub fn is_resolved(&self, idx: usize) -> bool {
        idx != 0 && !self.is_nyquist(idx)
    }

    /// Largest `|k|` among resolved modes.
    pub fn max_resolved_norm(&self) -> f64 {
        let n = self.spec.n();
        let m = (n.div_ceil(2) - 1) as f64;
        let dk = 2.0 * std::f64::consts::PI / self.spec.length();
        m * dk * 3f64.sqrt()
    }
}

#[inline]
pub(crate) fn cdot_real(k: Vec3, v: &CVec3) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

#[inline]
pub(crate) fn ccross_real(k: Vec3, v: &CVec3) -> CVec3 {
    [
        v[2] * k[1] - v[1] * k[2],
        v[0] * k[2] - v[2] * k[0],
        v[1] * k[0] - v[0] * k[1],
    ]
}

#[inline]
pub(crate) fn cnorm_sqr(v: &CVec3) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()
}
