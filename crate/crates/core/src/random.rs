//! Seeded generators for smooth random fields.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::grid::{GridSpec, ScalarFieldGrid, VectorFieldGrid};
use crate::spectral::{signed_index, CVec3, Fft3, Wavevectors, CZERO};

pub type FieldRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn band(spec: &GridSpec, idx: usize, max_mode: usize) -> bool {
    let n = spec.n();
    spec.coords(idx)
        .iter()
        .all(|&c| signed_index(c, n).unsigned_abs() <= max_mode)
}

fn random_coefficients(
    spec: GridSpec,
    rng: &mut FieldRng,
    max_mode: usize,
    components: usize,
) -> Vec<CVec3> {
    let waves = Wavevectors::new(spec);
    let mut coeffs = vec![[CZERO; 3]; spec.len()];
    for idx in 1..spec.len() {
        if !band(&spec, idx, max_mode) || waves.is_nyquist(idx) {
            continue;
        }
        let partner = waves.negated(idx);
        if partner < idx {
            continue;
        }
        let mut c = [CZERO; 3];
        for slot in c.iter_mut().take(components) {
            *slot = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        coeffs[idx] = c;
        coeffs[partner] = c.map(|z| z.conj());
    }
    coeffs
}

/// Real vector field built from all Fourier modes with `|m_i| ≤ max_mode`,
/// zero mean, scaled so the largest component magnitude is `amplitude`.
pub fn smooth_vector(spec: GridSpec, rng: &mut FieldRng, max_mode: usize, amplitude: f64) -> VectorFieldGrid {
    let coeffs = random_coefficients(spec, rng, max_mode, 3);
    let field = Fft3::new(spec.n()).real_vector_field(spec, &coeffs).0;
    let m = field.max_abs();
    if m == 0.0 {
        field
    } else {
        field.scale(amplitude / m)
    }
}

pub fn smooth_scalar(spec: GridSpec, rng: &mut FieldRng, max_mode: usize, amplitude: f64) -> ScalarFieldGrid {
    let coeffs: Vec<Complex64> = random_coefficients(spec, rng, max_mode, 1)
        .into_iter()
        .map(|c| c[0])
        .collect();
    let field = Fft3::new(spec.n()).real_scalar_field(spec, &coeffs).0;
    let m = field.max_abs();
    if m == 0.0 {
        field
    } else {
        field.map(|v| v * amplitude / m)
    }
}
