//! Small dense complex matrix helpers.
//!
//! Registers never exceed three qubits, so everything here works on
//! `DMatrix<C64>` of dimension at most 8 and favours clarity over speed.
//! Basis indices are big-endian: qubit 0 is the most significant bit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2, 2),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Pauli> {
        match ch.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

pub fn dim(n_qubits: usize) -> usize {
    1 << n_qubits
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Embeds a single-qubit operator on `target` of an `n`-qubit register.
pub fn embed(op: &CMatrix, target: usize, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for q in 0..n {
        let factor = if q == target {
            op.clone()
        } else {
            CMatrix::identity(2, 2)
        };
        out = kron(&out, &factor);
    }
    out
}

/// Embeds a `2^k`-dimensional operator acting on `targets` (in that order)
/// into an `n`-qubit register.
pub fn embed_on(op: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let k = targets.len();
    debug_assert_eq!(op.nrows(), dim(k));
    let d = dim(n);
    let target_mask = targets.iter().fold(0usize, |m, &q| m | (1 << (n - 1 - q)));
    let sub_index = |full: usize| -> usize {
        targets
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((full >> (n - 1 - q)) & 1))
    };
    let mut out = CMatrix::zeros(d, d);
    for r in 0..d {
        for col in 0..d {
            if r & !target_mask == col & !target_mask {
                out[(r, col)] = op[(sub_index(r), sub_index(col))];
            }
        }
    }
    out
}

/// Tensor product of one operator per qubit, qubit 0 leftmost.
pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    ops.into_iter()
        .fold(CMatrix::identity(1, 1), |acc, op| kron(&acc, op))
}

pub fn pauli_string(paulis: &[Pauli]) -> CMatrix {
    let mats: Vec<CMatrix> = paulis.iter().map(|p| p.matrix()).collect();
    kron_all(mats.iter())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn unitary_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(n, n))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitize(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let fv = f(v);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix; eigenvalues below `floor`
/// (including negative ones) are clamped to 0.
pub fn psd_sqrt(m: &CMatrix, floor: f64) -> CMatrix {
    hermitian_map(m, |v| if v < floor { 0.0 } else { v.sqrt() })
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// `exp(-i * t * G)` for Hermitian `G`.
pub fn expm_hermitian(generator: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = eigh(generator);
    let n = generator.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -t * v);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// Hilbert-Schmidt inner product `Tr(A^dagger B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn is_diagonal(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].norm() <= tol))
}
