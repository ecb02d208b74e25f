//! Periodic cubic lattices and the scalar/vector fields sampled on them.
//!
//! Points are stored row-major with the x index slowest:
//! `index = (i * n + j) * n + k` for the point at `(i h, j h, k h)`.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Largest supported points per axis; keeps `n³` far from overflow.
pub const MAX_N: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    h: f64,
    c: f64,
}

impl GridSpec {
    /// Cubic `n³` lattice with spacing `h` and speed of light 1.
    pub fn new(n: usize, h: f64) -> Result<Self> {
        Self::with_c(n, h, 1.0)
    }

    pub fn with_c(n: usize, h: f64, c: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("n = {n} must be at least 4")));
        }
        if n > MAX_N {
            return Err(Error::InvalidGrid(format!("n = {n} exceeds {MAX_N}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing h = {h} must be positive")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidGrid(format!("speed of light c = {c} must be positive")));
        }
        Ok(Self { n, h, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Box edge length `n h`.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn volume(&self) -> f64 {
        self.length().powi(3)
    }

    /// Volume of one lattice cell, `h³`.
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Index of the neighbour displaced by `offset` along `axis`, wrapping periodically.
    #[inline]
    pub fn shifted(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let mut c = self.coords(idx);
        let n = self.n as isize;
        c[axis] = (c[axis] as isize + offset).rem_euclid(n) as usize;
        self.index(c[0], c[1], c[2])
    }

    pub fn position(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        [c[0] as f64 * self.h, c[1] as f64 * self.h, c[2] as f64 * self.h]
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("{self:?}"),
                right: format!("{other:?}"),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarFieldGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(Self { spec, values })
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn(spec: GridSpec, f: impl Fn(Vec3) -> f64) -> Self {
        let values = (0..spec.len()).map(|i| f(spec.position(i))).collect();
        Self { spec, values }
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn add_constant(&self, value: f64) -> Self {
        self.map(|v| v + value)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        Ok(Self::from_raw(
            self.spec,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldGrid {
    spec: GridSpec,
    values: Vec<Vec3>,
}

impl VectorFieldGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![[0.0; 3]; spec.len()],
        }
    }

    pub fn uniform(spec: GridSpec, value: Vec3) -> Self {
        Self {
            spec,
            values: vec![value; spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} vectors, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector field"));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Vec3) -> Vec3) -> Self {
        let values = (0..spec.len()).map(|i| f(spec.position(i))).collect();
        Self { spec, values }
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<Vec3>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.values
    }

    pub fn component(&self, axis: usize) -> ScalarFieldGrid {
        ScalarFieldGrid::from_raw(self.spec, self.values.iter().map(|v| v[axis]).collect())
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise Euclidean length.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(norm(v)))
    }

    /// Discrete L² norm `sqrt(Σ |v|² h³)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|&v| dot(v, v)).sum::<f64>() * self.spec.cell_volume()).sqrt()
    }

    /// Discrete L² inner product `Σ a·b h³`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.spec.check_same(&other.spec)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| dot(a, b))
            .sum::<f64>()
            * self.spec.cell_volume())
    }

    pub fn mean(&self) -> Vec3 {
        let mut m = [0.0; 3];
        for v in &self.values {
            for a in 0..3 {
                m[a] += v[a];
            }
        }
        let len = self.values.len() as f64;
        m.map(|x| x / len)
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        Self::from_raw(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Vec3, Vec3) -> Vec3) -> Result<Self> {
        self.spec.check_same(&other.spec)?;
        Ok(Self::from_raw(
            self.spec,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v.map(|x| x * s))
    }

    /// Adds a constant vector to every point.
    pub fn offset(&self, dc: Vec3) -> Self {
        self.map(|v| [v[0] + dc[0], v[1] + dc[1], v[2] + dc[2]])
    }

    /// Largest component-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.spec.check_same(&other.spec)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()))
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(GridSpec::new(3, 0.1).is_err());
        assert!(GridSpec::new(8, 0.0).is_err());
        assert!(GridSpec::with_c(8, 0.1, -1.0).is_err());
        assert!(GridSpec::new(4, 0.1).is_ok());
    }

    #[test]
    fn shifted_wraps_periodically() {
        let g = GridSpec::new(5, 1.0).unwrap();
        let idx = g.index(0, 4, 2);
        assert_eq!(g.coords(g.shifted(idx, 0, -1)), [4, 4, 2]);
        assert_eq!(g.coords(g.shifted(idx, 1, 1)), [0, 0, 2]);
        assert_eq!(g.coords(g.shifted(idx, 2, 3)), [0, 4, 0]);
    }

    #[test]
    fn from_values_checks_length_and_finiteness() {
        let g = GridSpec::new(4, 1.0).unwrap();
        assert!(ScalarFieldGrid::from_values(g, vec![0.0; 63]).is_err());
        let mut v = vec![[0.0; 3]; 64];
        v[7][1] = f64::NAN;
        assert_eq!(
            VectorFieldGrid::from_values(g, v),
            Err(Error::NonFinite("vector field"))
        );
    }
}
