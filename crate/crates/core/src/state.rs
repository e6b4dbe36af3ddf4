//! Kets, density matrices and unitaries on registers of one to three qubits.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! basis index, so `|q0 q1 q2>` has index `4*q0 + 2*q1 + q2`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64, ONE, ZERO};
use crate::tolerance::Tolerances;

pub const MAX_QUBITS: usize = 3;

fn qubits_for_len(len: usize) -> Result<usize> {
    match len {
        2 => Ok(1),
        4 => Ok(2),
        8 => Ok(3),
        _ => Err(Error::BadLength(len)),
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: CVector,
    n: usize,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = qubits_for_len(amplitudes.len())?;
        let amplitudes = CVector::from_vec(amplitudes);
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > Tolerances::DEFAULT.norm {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { amplitudes, n })
    }

    /// Normalizes the given amplitudes first.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new((v / C64::from(norm)).iter().copied().collect())
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let d = linalg::dim(n);
        if index >= d {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![ZERO; d];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub fn zero() -> Self {
        Self::basis(1, 0).expect("valid basis state")
    }

    pub fn one() -> Self {
        Self::basis(1, 1).expect("valid basis state")
    }

    /// `(|0> + |1>)/sqrt 2`
    pub fn plus() -> Self {
        ket_from_bloch(std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn minus() -> Self {
        ket_from_bloch(std::f64::consts::FRAC_PI_2, std::f64::consts::PI)
    }

    /// `(|0> + i|1>)/sqrt 2`
    pub fn plus_i() -> Self {
        ket_from_bloch(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)
    }

    pub fn minus_i() -> Self {
        ket_from_bloch(std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2)
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let d = linalg::dim(n);
        let amps: Vec<C64> = (0..d)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps).expect("gaussian vector is nonzero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Ok(Ket {
            amplitudes: amps,
            n,
        })
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Bloch-sphere parameterization `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
pub fn ket_from_bloch(theta: f64, phi: f64) -> Ket {
    let a = C64::from((theta / 2.0).cos());
    let b = C64::from_polar((theta / 2.0).sin(), phi);
    Ket::normalized(vec![a, b]).expect("bloch amplitudes are normalized")
}

/// Trace-one positive semidefinite operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    elements: CMatrix,
    n: usize,
}

impl DensityMatrix {
    /// Validates against the default tolerances.
    pub fn new(elements: CMatrix) -> Result<Self> {
        Self::with_tolerances(elements, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(elements: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !elements.is_square() {
            return Err(Error::DimensionMismatch(elements.nrows(), elements.ncols()));
        }
        let n = qubits_for_len(elements.nrows())?;
        let dev = linalg::hermitian_deviation(&elements);
        if dev > tol.hermitian {
            return Err(Error::NotHermitian(dev));
        }
        let tr = elements.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = linalg::eigvalsh(&elements)[0];
        if min < tol.min_eigenvalue {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { elements, n })
    }

    /// For outputs of physical maps: drops the anti-Hermitian rounding residue.
    pub(crate) fn from_physical(elements: CMatrix) -> Self {
        let n = qubits_for_len(elements.nrows()).expect("register size checked by caller");
        let elements = linalg::hermitize(&elements);
        debug_assert!(
            (elements.trace().re - 1.0).abs() < 1e-9,
            "trace drifted to {}",
            elements.trace().re
        );
        Self { elements, n }
    }

    /// Rescales a positive operator to unit trace.
    pub(crate) fn from_unnormalized(elements: CMatrix) -> Self {
        let tr = elements.trace().re;
        Self::from_physical(elements.unscale(tr))
    }

    pub fn from_ket(psi: &Ket) -> Self {
        let v = psi.amplitudes();
        Self {
            elements: v * v.adjoint(),
            n: psi.n_qubits(),
        }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let d = linalg::dim(n);
        Ok(Self {
            elements: CMatrix::identity(d, d).unscale(d as f64),
            n,
        })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        Ok(Self::from_ket(&Ket::basis(n, index)?))
    }

    /// Hilbert-Schmidt random mixed state (full rank with probability one).
    pub fn random_mixed<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let d = linalg::dim(n);
        let g = CMatrix::from_fn(d, d, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::from_unnormalized(&g * g.adjoint())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_matrix(self) -> CMatrix {
        self.elements
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.elements)
    }

    pub fn purity(&self) -> f64 {
        linalg::hs_inner(&self.elements, &self.elements).re
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, observable: &CMatrix) -> C64 {
        (&self.elements * observable).trace()
    }

    /// Kronecker product; `self` becomes the leading qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        tensor(self, other)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// `U rho U^dagger`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(u.nrows(), self.dim()));
        }
        Ok(Self::from_physical(u * &self.elements * u.adjoint()))
    }

    /// Checks every invariant at the given tolerances.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        Self::with_tolerances(self.elements.clone(), tol).map(|_| ())
    }
}

pub fn density_from_ket(psi: &Ket) -> DensityMatrix {
    DensityMatrix::from_ket(psi)
}

pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let n = a.n + b.n;
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(DensityMatrix {
        elements: linalg::kron(&a.elements, &b.elements),
        n,
    })
}

/// Reduced state on the qubits in `keep`, listed in register order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n;
    if keep.is_empty() {
        return Err(Error::InvalidQubitSet("keep set is empty".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidQubitSet(format!(
            "duplicate index in {keep:?}"
        )));
    }
    if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidQubit {
            index: bad,
            size: n,
        });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let dk = linalg::dim(kept.len());
    let dt = linalg::dim(traced.len());

    // Scatter the bits of a sub-index onto the listed register positions.
    let place = |sub: usize, qubits: &[usize]| -> usize {
        let m = qubits.len();
        qubits.iter().enumerate().fold(0, |acc, (k, &q)| {
            let bit = (sub >> (m - 1 - k)) & 1;
            acc | (bit << (n - 1 - q))
        })
    };

    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        let ri = place(i, &kept);
        for j in 0..dk {
            let rj = place(j, &kept);
            let mut acc = ZERO;
            for t in 0..dt {
                let off = place(t, &traced);
                acc += rho.elements[(ri | off, rj | off)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_physical(out))
}

/// `(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`, evaluated as the squared trace
/// norm of `sqrt(rho1) sqrt(rho2)`.
pub fn uhlmann_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    let floor = Tolerances::DEFAULT.sqrt_eigenvalue_floor;
    let s1 = linalg::psd_sqrt(&rho1.elements, floor);
    let s2 = linalg::psd_sqrt(&rho2.elements, floor);
    let f = linalg::trace_norm(&(s1 * s2)).powi(2);
    Ok(f.clamp(0.0, 1.0))
}

/// Half the trace norm of the difference.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch(rho1.dim(), rho2.dim()));
    }
    let diff = &rho1.elements - &rho2.elements;
    Ok(0.5 * linalg::eigvalsh(&diff).iter().map(|v| v.abs()).sum::<f64>())
}

/// Square unitary matrix on one to three qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    elements: CMatrix,
    n: usize,
}

impl Unitary {
    pub fn new(elements: CMatrix) -> Result<Self> {
        if !elements.is_square() {
            return Err(Error::DimensionMismatch(elements.nrows(), elements.ncols()));
        }
        let n = qubits_for_len(elements.nrows())?;
        let dev = linalg::unitary_deviation(&elements);
        if dev > Tolerances::DEFAULT.unitary {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { elements, n })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let d = linalg::dim(n);
        Ok(Self {
            elements: CMatrix::identity(d, d),
            n,
        })
    }

    /// Diagonal unitary with the given phases (radians).
    pub fn diagonal(phases: &[f64]) -> Result<Self> {
        let n = qubits_for_len(phases.len())?;
        let d = phases.len();
        let mut m = CMatrix::zeros(d, d);
        for (k, &ph) in phases.iter().enumerate() {
            m[(k, k)] = C64::from_polar(1.0, ph);
        }
        Ok(Self { elements: m, n })
    }

    pub fn random_diagonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let phases: Vec<f64> = (0..linalg::dim(n))
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        Self::diagonal(&phases).expect("valid length")
    }

    /// Haar-random unitary from the QR decomposition of a Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let d = linalg::dim(n);
        let g = CMatrix::from_fn(d, d, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..d {
            let rjj = r[(j, j)];
            let phase = if rjj.norm() > 0.0 {
                rjj / rjj.norm()
            } else {
                ONE
            };
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
        Self::new(q).expect("QR factor is unitary")
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.elements
    }

    pub fn dagger(&self) -> Unitary {
        Unitary {
            elements: self.elements.adjoint(),
            n: self.n,
        }
    }

    pub fn compose(&self, after: &Unitary) -> Result<Unitary> {
        if self.n != after.n {
            return Err(Error::DimensionMismatch(self.n, after.n));
        }
        Ok(Unitary {
            elements: &after.elements * &self.elements,
            n: self.n,
        })
    }

    /// Largest `||[U, Z_k]||` over register qubits.
    pub fn z_commutator_deviation(&self) -> (usize, f64) {
        (0..self.n)
            .map(|k| {
                let z = linalg::embed(&linalg::Pauli::Z.matrix(), k, self.n);
                let comm = &self.elements * &z - &z * &self.elements;
                (k, linalg::max_abs(&comm))
            })
            .fold(
                (0, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            )
    }
}

/// Wire form of a density matrix: qubit count plus row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(rho: DensityMatrix) -> Self {
        let d = rho.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(rho.elements[(i, j)].re);
                im.push(rho.elements[(i, j)].im);
            }
        }
        DensityMatrixJson { n: rho.n, re, im }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(raw: DensityMatrixJson) -> Result<Self> {
        if raw.n == 0 || raw.n > MAX_QUBITS {
            return Err(Error::TooManyQubits(raw.n));
        }
        let d = linalg::dim(raw.n);
        if raw.re.len() != d * d || raw.im.len() != d * d {
            return Err(Error::DimensionMismatch(
                raw.re.len().max(raw.im.len()),
                d * d,
            ));
        }
        let m = CMatrix::from_fn(d, d, |i, j| c(raw.re[i * d + j], raw.im[i * d + j]));
        DensityMatrix::new(m)
    }
}
