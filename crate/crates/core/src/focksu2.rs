//! One wavevector's worth of photon Fock space: two oscillators (one per
//! polarisation) truncated at `n_max` quanta each, with the ladder operators,
//! the oscillator Hamiltonian and the U(2)/SU(2) generators built from them.
//!
//! A cutoff matrix cannot satisfy `[a, a†] = 1` everywhere, so every identity
//! is checked on a sub-block the operators involved cannot push past the
//! cutoff. The generators all conserve total photon number, which makes the
//! states with `n₁ + n₂ ≤ n_max − 1` a safe choice for them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub const MIN_N_MAX: usize = 4;
/// Dense matrices only: beyond this the dimension gets silly.
pub const MAX_N_MAX: usize = 64;

/// Basis `|n₁, n₂⟩`, `0 ≤ nᵢ ≤ n_max`, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoModeSpace {
    n_max: usize,
}

impl TwoModeSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if !(MIN_N_MAX..=MAX_N_MAX).contains(&n_max) {
            return Err(invalid("n_max", format!("must lie in {MIN_N_MAX}..={MAX_N_MAX}, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1).pow(2)
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 <= self.n_max && n2 <= self.n_max);
        n1 * (self.n_max + 1) + n2
    }

    pub fn occupations(&self, idx: usize) -> (usize, usize) {
        (idx / (self.n_max + 1), idx % (self.n_max + 1))
    }

    pub fn basis(&self, n1: usize, n2: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[self.index(n1, n2)] = Complex64::new(1.0, 0.0);
        v
    }

    /// States with at most `n_max − 1` photons in total.
    pub fn safe_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                let (a, b) = self.occupations(i);
                a + b < self.n_max
            })
            .collect()
    }

    /// States whose occupation of `mode` is below the cutoff.
    pub fn below_cutoff(&self, mode: Mode) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| {
                let (a, b) = self.occupations(i);
                match mode {
                    Mode::One => a < self.n_max,
                    Mode::Two => b < self.n_max,
                }
            })
            .collect()
    }

    /// The `n + 1` states with exactly `n` photons, by increasing `n₁`.
    pub fn photon_number_subspace(&self, n: usize) -> Result<Vec<usize>> {
        if n > self.n_max {
            return Err(invalid("n", format!("exceeds n_max = {}", self.n_max)));
        }
        Ok((0..=n).map(|n1| self.index(n1, n - n1)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

/// Dense operator on a [`TwoModeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: TwoModeSpace,
    matrix: DMatrix<Complex64>,
    pub hbar: f64,
    pub omega: f64,
}

impl OperatorMatrix {
    pub fn zeros(space: TwoModeSpace) -> Self {
        Self::from_matrix(space, DMatrix::zeros(space.dim(), space.dim()))
    }

    pub fn identity(space: TwoModeSpace) -> Self {
        Self::from_matrix(space, DMatrix::identity(space.dim(), space.dim()))
    }

    fn from_matrix(space: TwoModeSpace, matrix: DMatrix<Complex64>) -> Self {
        Self {
            space,
            matrix,
            hbar: 1.0,
            omega: 1.0,
        }
    }

    pub fn space(&self) -> TwoModeSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `⟨m₁, m₂| O |n₁, n₂⟩`.
    pub fn element(&self, bra: (usize, usize), ket: (usize, usize)) -> Complex64 {
        self.matrix[(self.space.index(bra.0, bra.1), self.space.index(ket.0, ket.1))]
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let out = &self.matrix * nalgebra::DVector::from_column_slice(v);
        out.iter().copied().collect()
    }

    fn with(&self, matrix: DMatrix<Complex64>) -> Self {
        Self {
            space: self.space,
            matrix,
            hbar: self.hbar,
            omega: self.omega,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.with(&self.matrix * &o.matrix)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.with(&self.matrix + &o.matrix)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.with(&self.matrix - &o.matrix)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.with(&self.matrix * Complex64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        self.with(self.matrix.adjoint())
    }

    /// `[self, o] = self·o − o·self`.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// Largest entry modulus with both row and column in `block`.
    pub fn max_abs_on(&self, block: &[usize]) -> f64 {
        block
            .iter()
            .flat_map(|&r| block.iter().map(move |&c| (r, c)))
            .map(|(r, c)| self.matrix[(r, c)].norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// The restriction to `block` (rows and columns in the given order).
    pub fn restrict(&self, block: &[usize]) -> DMatrix<Complex64> {
        DMatrix::from_fn(block.len(), block.len(), |r, c| self.matrix[(block[r], block[c])])
    }
}

/// `a_mode` or `a†_mode`, with `⟨n−1|a|n⟩ = √n`.
pub fn ladder(space: TwoModeSpace, mode: Mode, kind: Ladder) -> OperatorMatrix {
    let mut m = DMatrix::zeros(space.dim(), space.dim());
    for ket in 0..space.dim() {
        let (n1, n2) = space.occupations(ket);
        let (n, lowered) = match mode {
            Mode::One => (n1, (n1.wrapping_sub(1), n2)),
            Mode::Two => (n2, (n1, n2.wrapping_sub(1))),
        };
        if n > 0 {
            m[(space.index(lowered.0, lowered.1), ket)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
    }
    let lower = OperatorMatrix::from_matrix(space, m);
    match kind {
        Ladder::Lower => lower,
        Ladder::Raise => lower.adjoint(),
    }
}

/// Diagonal number-basis matrix with entries `f(n₁, n₂)`.
fn diagonal(space: TwoModeSpace, f: impl Fn(usize, usize) -> f64) -> OperatorMatrix {
    let mut m = DMatrix::zeros(space.dim(), space.dim());
    for i in 0..space.dim() {
        let (a, b) = space.occupations(i);
        m[(i, i)] = Complex64::new(f(a, b), 0.0);
    }
    OperatorMatrix::from_matrix(space, m)
}

/// `H = ħω(a†₁a₁ + a†₂a₂ + 1)`.
pub fn hamiltonian_k(space: TwoModeSpace, hbar: f64, omega: f64) -> OperatorMatrix {
    let mut h = diagonal(space, |a, b| hbar * omega * (a + b + 1) as f64);
    h.hbar = hbar;
    h.omega = omega;
    h
}

/// `A^i_j = a†_i a_j`, indexed `[i][j]` with `i, j ∈ {0, 1}` for modes 1, 2.
#[derive(Debug, Clone, PartialEq)]
pub struct U2Generators {
    pub a: [[OperatorMatrix; 2]; 2],
}

impl U2Generators {
    /// `A = A¹₁ + A²₂`, the total number operator.
    pub fn total(&self) -> OperatorMatrix {
        self.a[0][0].add(&self.a[1][1])
    }
}

pub fn u2_generators(space: TwoModeSpace) -> U2Generators {
    let lower = [ladder(space, Mode::One, Ladder::Lower), ladder(space, Mode::Two, Ladder::Lower)];
    let raise = [ladder(space, Mode::One, Ladder::Raise), ladder(space, Mode::Two, Ladder::Raise)];
    let g = |i: usize, j: usize| raise[i].mul(&lower[j]);
    // a†a is filled in as its exact integer diagonal: √n·√n rounds, and the
    // trace condition on the traceless part should hold without roundoff
    U2Generators {
        a: [
            [diagonal(space, |a, _| a as f64), g(0, 1)],
            [g(1, 0), diagonal(space, |_, b| b as f64)],
        ],
    }
}

/// `B^i_j = A^i_j − ½δ^i_j A`. All four are kept so the trace condition
/// `B¹₁ + B²₂ = 0` can be checked rather than assumed; three are independent.
#[derive(Debug, Clone, PartialEq)]
pub struct Su2Generators {
    pub b: [[OperatorMatrix; 2]; 2],
}

impl Su2Generators {
    /// `(J₊, J₋, J_z) = (B¹₂, B²₁, ½(B¹₁ − B²₂))`.
    pub fn angular_momentum(&self) -> [OperatorMatrix; 3] {
        [
            self.b[0][1].clone(),
            self.b[1][0].clone(),
            self.b[0][0].sub(&self.b[1][1]).scale(0.5),
        ]
    }

    /// `J² = ½(J₊J₋ + J₋J₊) + J_z²`.
    pub fn casimir(&self) -> OperatorMatrix {
        let [jp, jm, jz] = self.angular_momentum();
        jp.mul(&jm).add(&jm.mul(&jp)).scale(0.5).add(&jz.mul(&jz))
    }
}

pub fn su2_generators(space: TwoModeSpace) -> Su2Generators {
    let u = u2_generators(space);
    let half_total = u.total().scale(0.5);
    let [[a11, a12], [a21, a22]] = u.a;
    Su2Generators {
        b: [[a11.sub(&half_total), a12], [a21, a22.sub(&half_total)]],
    }
}

/// Constant eigenvalue of `J²` on the `n`-photon subspace, `j(j+1)` with
/// `j = n/2` for the representation `D(n,0)`.
pub fn casimir_on_subspace(space: TwoModeSpace, n: usize) -> Result<f64> {
    let block = space.photon_number_subspace(n)?;
    let c2 = su2_generators(space).casimir().restrict(&block);
    let eig = nalgebra::SymmetricEigen::new(c2).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo > 1e-9 * (1.0 + hi.abs()) {
        return Err(Error::AlgebraViolation(format!(
            "Casimir is not constant on the {n}-photon subspace: eigenvalues span [{lo}, {hi}]"
        )));
    }
    Ok(eig.iter().sum::<f64>() / eig.len() as f64)
}

/// One named identity and its largest entrywise violation.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorCheck {
    pub name: String,
    pub residual: f64,
}

const NAMES: [&str; 2] = ["1", "2"];

/// Every ladder, U(2) and SU(2) identity plus the commutation of all
/// generators with the Hamiltonian, each restricted to its safe sub-block.
pub fn commutator_report(space: TwoModeSpace, hbar: f64, omega: f64) -> Vec<CommutatorCheck> {
    let mut out = Vec::new();
    let safe = space.safe_indices();
    let id = OperatorMatrix::identity(space);
    let zero = OperatorMatrix::zeros(space);
    let lower = [ladder(space, Mode::One, Ladder::Lower), ladder(space, Mode::Two, Ladder::Lower)];
    let raise = [ladder(space, Mode::One, Ladder::Raise), ladder(space, Mode::Two, Ladder::Raise)];
    // [a_i, a†_j] = δ_ij, on states where neither mode sits at the cutoff
    let below: Vec<usize> = (0..space.dim())
        .filter(|&i| {
            let (a, b) = space.occupations(i);
            a < space.n_max() && b < space.n_max()
        })
        .collect();
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { &id } else { &zero };
            out.push(CommutatorCheck {
                name: format!("[a{}, a{}^+] - delta", NAMES[i], NAMES[j]),
                residual: lower[i].commutator(&raise[j]).sub(want).max_abs_on(&below),
            });
            out.push(CommutatorCheck {
                name: format!("[a{}, a{}]", NAMES[i], NAMES[j]),
                residual: lower[i].commutator(&lower[j]).max_abs(),
            });
        }
    }
    let u = u2_generators(space);
    let su = su2_generators(space);
    let h = hamiltonian_k(space, hbar, omega);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    // [A^i_j, A^k_l] = δ^k_j A^i_l − δ^i_l A^k_j
                    let mut want = zero.clone();
                    if k == j {
                        want = want.add(&u.a[i][l]);
                    }
                    if i == l {
                        want = want.sub(&u.a[k][j]);
                    }
                    out.push(CommutatorCheck {
                        name: format!("[A{}{}, A{}{}]", NAMES[i], NAMES[j], NAMES[k], NAMES[l]),
                        residual: u.a[i][j].commutator(&u.a[k][l]).sub(&want).max_abs_on(&safe),
                    });
                    // the traceless part obeys the same relation with B in place of A
                    let mut want = zero.clone();
                    if k == j {
                        want = want.add(&su.b[i][l]);
                    }
                    if i == l {
                        want = want.sub(&su.b[k][j]);
                    }
                    out.push(CommutatorCheck {
                        name: format!("[B{}{}, B{}{}]", NAMES[i], NAMES[j], NAMES[k], NAMES[l]),
                        residual: su.b[i][j].commutator(&su.b[k][l]).sub(&want).max_abs_on(&safe),
                    });
                }
            }
            out.push(CommutatorCheck {
                name: format!("[H, A{}{}]", NAMES[i], NAMES[j]),
                residual: h.commutator(&u.a[i][j]).max_abs_on(&safe),
            });
            out.push(CommutatorCheck {
                name: format!("[H, B{}{}]", NAMES[i], NAMES[j]),
                residual: h.commutator(&su.b[i][j]).max_abs_on(&safe),
            });
        }
    }
    let [jp, jm, jz] = su.angular_momentum();
    out.push(CommutatorCheck {
        name: "[Jz, J+] - J+".into(),
        residual: jz.commutator(&jp).sub(&jp).max_abs_on(&safe),
    });
    out.push(CommutatorCheck {
        name: "[Jz, J-] + J-".into(),
        residual: jz.commutator(&jm).add(&jm).max_abs_on(&safe),
    });
    out.push(CommutatorCheck {
        name: "[J+, J-] - 2Jz".into(),
        residual: jp.commutator(&jm).sub(&jz.scale(2.0)).max_abs_on(&safe),
    });
    out.push(CommutatorCheck {
        name: "B11 + B22".into(),
        residual: su.b[0][0].add(&su.b[1][1]).max_abs(),
    });
    out
}

/// Thermal mean occupation `Σ n e^{−nβ} / Σ e^{−nβ}` over `0..=n_max`, with
/// `β = ħω/(k_B T)`.
pub fn planck_occupancy(hbar: f64, omega: f64, temperature: f64, k_b: f64, n_max: usize) -> Result<f64> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(invalid("temperature", "must be positive"));
    }
    if !(k_b.is_finite() && k_b > 0.0) {
        return Err(invalid("k_b", "must be positive"));
    }
    let beta = hbar * omega / (k_b * temperature);
    if !(beta.is_finite() && beta >= 0.1) {
        return Err(invalid("hbar*omega/kT", format!("must be at least 0.1, got {beta}")));
    }
    // summed from the small tail terms upward
    let (mut num, mut den) = (0.0, 0.0);
    for n in (0..=n_max).rev() {
        let w = (-(n as f64) * beta).exp();
        num += n as f64 * w;
        den += w;
    }
    Ok(num / den)
}

/// `1/(e^β − 1)`.
pub fn planck_closed_form(beta: f64) -> f64 {
    1.0 / beta.exp_m1()
}

/// Upper bound on the truncation error, `e^{−n_max β}·n_max`.
pub fn planck_truncation_bound(beta: f64, n_max: usize) -> f64 {
    (-(n_max as f64) * beta).exp() * n_max as f64
}
