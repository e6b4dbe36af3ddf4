//! Non-unitary evolution: Kraus channels, projective measurement, the
//! photon-count detection model and the post-measurement noise model.

pub mod detection;
pub mod noise;

pub use detection::{
    detection_error, photon_histogram, poisson_cdf, poisson_pmf, sample_photon_counts,
    DetectionModel, PhotonHistogram,
};
pub use noise::{
    measured_phonon_table, noise_after_measurement, noise_after_measurement_on, NoiseParams,
    PhononEntry, MEASURED_PHONONS,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Pauli};
use crate::state::{DensityMatrix, MAX_QUBITS};
use crate::tolerance::Tolerances;

/// Result of a computational-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Outcome {
    /// Projection onto `|0>`: no fluorescence.
    Zero,
    /// Projection onto `|1>`: the bright state.
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];

    pub fn bit(self) -> u8 {
        self as u8
    }

    pub fn is_bright(self) -> bool {
        self == Outcome::One
    }

    fn projector(self) -> CMatrix {
        let mut p = CMatrix::zeros(2, 2);
        let k = self.bit() as usize;
        p[(k, k)] = linalg::ONE;
        p
    }
}

impl From<Outcome> for u8 {
    fn from(o: Outcome) -> u8 {
        o.bit()
    }
}

impl TryFrom<u8> for Outcome {
    type Error = String;

    fn try_from(b: u8) -> std::result::Result<Self, String> {
        match b {
            0 => Ok(Outcome::Zero),
            1 => Ok(Outcome::One),
            other => Err(format!("outcome must be 0 or 1, got {other}")),
        }
    }
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus_ops: Vec<CMatrix>,
    label: String,
    n: usize,
}

impl QuantumChannel {
    pub fn new(kraus_ops: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        Self::with_tolerances(kraus_ops, label, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(
        kraus_ops: Vec<CMatrix>,
        label: impl Into<String>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let first = kraus_ops.first().ok_or_else(|| {
            Error::InvalidParameter("channel needs at least one Kraus operator".into())
        })?;
        let d = first.nrows();
        let n = match d {
            2 => 1,
            4 => 2,
            8 => 3,
            _ => return Err(Error::BadLength(d)),
        };
        if let Some(bad) = kraus_ops.iter().find(|k| k.nrows() != d || k.ncols() != d) {
            return Err(Error::DimensionMismatch(bad.nrows(), d));
        }
        let sum = kraus_ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let dev = linalg::max_abs_diff(&sum, &CMatrix::identity(d, d));
        if dev > tol.trace_preserving {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self {
            kraus_ops,
            label: label.into(),
            n,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let d = linalg::dim(n);
        Ok(Self {
            kraus_ops: vec![CMatrix::identity(d, d)],
            label: "identity".into(),
            n,
        })
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.n {
            return Err(Error::DimensionMismatch(rho.n_qubits(), self.n));
        }
        let m = rho.matrix();
        let d = m.nrows();
        let out = self
            .kraus_ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * m * k.adjoint());
        Ok(DensityMatrix::from_physical(out))
    }

    /// `self` followed by `next`, as the Kraus set `{N_j K_i}`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.n != next.n {
            return Err(Error::DimensionMismatch(self.n, next.n));
        }
        let kraus_ops = next
            .kraus_ops
            .iter()
            .flat_map(|b| self.kraus_ops.iter().map(move |a| b * a))
            .filter(|k| linalg::max_abs(k) > 0.0)
            .collect();
        Ok(QuantumChannel {
            kraus_ops,
            label: format!("{} ; {}", self.label, next.label),
            n: self.n,
        })
    }

    /// Lifts a single-qubit channel onto `target` of an `n`-qubit register.
    pub fn on_qubit(&self, target: usize, n: usize) -> Result<QuantumChannel> {
        if self.n != 1 {
            return Err(Error::DimensionMismatch(self.n, 1));
        }
        check_target(target, n)?;
        Ok(QuantumChannel {
            kraus_ops: self
                .kraus_ops
                .iter()
                .map(|k| linalg::embed(k, target, n))
                .collect(),
            label: format!("{}[{target}]", self.label),
            n,
        })
    }

    /// Superoperator on row-major vectorized matrices: `vec(E(X)) = S vec(X)`.
    pub fn superoperator(&self) -> CMatrix {
        let d = linalg::dim(self.n);
        self.kraus_ops
            .iter()
            .fold(CMatrix::zeros(d * d, d * d), |acc, k| {
                acc + linalg::kron(k, &k.map(|z| z.conj()))
            })
    }
}

fn check_target(target: usize, n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    if target >= n {
        return Err(Error::InvalidQubit {
            index: target,
            size: n,
        });
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(())
}

/// Outcome of [`measure_qubit`].
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: Outcome,
    pub post_state: DensityMatrix,
    pub probability: f64,
}

/// Born probability of `outcome` on `target`.
pub fn outcome_probability(rho: &DensityMatrix, target: usize, outcome: Outcome) -> Result<f64> {
    check_target(target, rho.n_qubits())?;
    let p = linalg::embed(&outcome.projector(), target, rho.n_qubits());
    Ok(rho.expectation(&p).re.clamp(0.0, 1.0))
}

/// Post-selected branch `P rho P / p`, or `None` when `p` is below the
/// branch-probability floor.
pub fn project(
    rho: &DensityMatrix,
    target: usize,
    outcome: Outcome,
) -> Result<Option<(DensityMatrix, f64)>> {
    check_target(target, rho.n_qubits())?;
    let p = linalg::embed(&outcome.projector(), target, rho.n_qubits());
    let unnormalized = &p * rho.matrix() * &p;
    let prob = unnormalized.trace().re;
    if prob < Tolerances::DEFAULT.min_branch_probability {
        return Ok(None);
    }
    Ok(Some((DensityMatrix::from_unnormalized(unnormalized), prob)))
}

/// Samples a computational-basis measurement of `target` by the Born rule.
pub fn measure_qubit<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    target: usize,
    rng: &mut R,
) -> Result<Measurement> {
    let p0 = outcome_probability(rho, target, Outcome::Zero)?;
    let sampled = if rng.random::<f64>() < p0 {
        Outcome::Zero
    } else {
        Outcome::One
    };
    // A branch of vanishing weight can only be hit through rounding; take the other one.
    let order = match sampled {
        Outcome::Zero => [Outcome::Zero, Outcome::One],
        Outcome::One => [Outcome::One, Outcome::Zero],
    };
    for outcome in order {
        if let Some((post_state, probability)) = project(rho, target, outcome)? {
            return Ok(Measurement {
                outcome,
                post_state,
                probability,
            });
        }
    }
    Err(Error::DegenerateBranch(p0))
}

/// Measurement of `target` with the result discarded: Kraus set `{P0, P1}`.
pub fn measurement_channel_ignoring_outcome(target: usize, n: usize) -> Result<QuantumChannel> {
    QuantumChannel::new(
        vec![Outcome::Zero.projector(), Outcome::One.projector()],
        "measure",
    )?
    .on_qubit(target, n)
}

/// Kraus set `{sqrt(1-p) I, sqrt(p) Z}`: coherences shrink by `1 - 2p`.
pub fn dephasing_channel(target: usize, n: usize, p: f64) -> Result<QuantumChannel> {
    check_probability(p)?;
    let mut ops = vec![CMatrix::identity(2, 2).scale((1.0 - p).sqrt())];
    if p > 0.0 {
        ops.push(Pauli::Z.matrix().scale(p.sqrt()));
    }
    QuantumChannel::new(ops, format!("dephase({p})"))?.on_qubit(target, n)
}

/// `rho -> (1 - p) rho + p I/2` on `target`, as
/// `{sqrt(1 - 3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z}`.
pub fn depolarizing_channel(target: usize, n: usize, p: f64) -> Result<QuantumChannel> {
    check_probability(p)?;
    let mut ops = vec![CMatrix::identity(2, 2).scale((1.0 - 0.75 * p).sqrt())];
    if p > 0.0 {
        let w = (p / 4.0).sqrt();
        ops.extend([Pauli::X, Pauli::Y, Pauli::Z].map(|a| a.matrix().scale(w)));
    }
    QuantumChannel::new(ops, format!("depolarize({p})"))?.on_qubit(target, n)
}
