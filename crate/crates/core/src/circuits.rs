//! Gates, circuits, and the encode / decode-and-correct circuits of the
//! three-qubit phase-flip code.
//!
//! The code stores `a|0> + b|1>` on the system qubit (index 0) as
//! `a|+++> + b|--->`. The encoder may be followed by any unitary `D` that is
//! diagonal in the computational basis: such a `D` commutes with every phase
//! flip, and the decoder starts by undoing `D` and then the textbook encoder.
//! After decoding, qubit 0 holds the corrected logical state and qubits 1, 2
//! hold the syndrome.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, Pauli, C64, ONE, ZERO};
use crate::state::{DensityMatrix, Unitary, MAX_QUBITS};
use crate::tolerance::Tolerances;

/// One gate of a circuit. Angles are in radians.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(-i angle/2 sum_k (cos(phase) X_k + sin(phase) Y_k))` on every qubit.
    CollectiveRotation {
        angle: f64,
        phase: f64,
    },
    /// `exp(-i angle/2 Z)` on one qubit.
    Phase {
        target: usize,
        angle: f64,
    },
    /// `exp(-i angle/4 S^2)` with `S = sum_k (cos(phase) X_k + sin(phase) Y_k)`.
    MolmerSorensen {
        angle: f64,
        phase: f64,
    },
    Hadamard {
        target: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// Flips `target` when both controls are `|1>`.
    Toffoli {
        controls: [usize; 2],
        target: usize,
    },
    Pauli {
        target: usize,
        axis: Pauli,
    },
    /// Arbitrary unitary on the listed qubits, first target most significant.
    Custom {
        targets: Vec<usize>,
        matrix: CMatrix,
    },
}

impl Gate {
    /// Qubits the gate addresses explicitly; collective gates return an empty list.
    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::CollectiveRotation { .. } | Gate::MolmerSorensen { .. } => vec![],
            Gate::Phase { target, .. } | Gate::Hadamard { target } | Gate::Pauli { target, .. } => {
                vec![*target]
            }
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Toffoli { controls, target } => vec![controls[0], controls[1], *target],
            Gate::Custom { targets, .. } => targets.clone(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let targets = self.targets();
        if let Some(&bad) = targets.iter().find(|&&q| q >= n) {
            return Err(Error::InvalidQubit {
                index: bad,
                size: n,
            });
        }
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != targets.len() {
            return Err(Error::InvalidQubitSet(format!(
                "repeated qubit in {targets:?}"
            )));
        }
        if let Gate::Custom { targets, matrix } = self {
            if matrix.nrows() != linalg::dim(targets.len()) || !matrix.is_square() {
                return Err(Error::DimensionMismatch(
                    matrix.nrows(),
                    linalg::dim(targets.len()),
                ));
            }
            let dev = linalg::unitary_deviation(matrix);
            if dev > Tolerances::DEFAULT.unitary {
                return Err(Error::NotUnitary(dev));
            }
        }
        Ok(())
    }

    /// Full `2^n x 2^n` matrix on an `n`-qubit register.
    pub fn matrix(&self, n: usize) -> CMatrix {
        let h = C64::from(FRAC_1_SQRT_2);
        match self {
            Gate::CollectiveRotation { angle, phase } => {
                let axis = xy_axis(*phase);
                let single = linalg::expm_hermitian(&axis, angle / 2.0);
                let ops = vec![single; n];
                linalg::kron_all(ops.iter())
            }
            Gate::Phase { target, angle } => {
                let single = CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C64::from_polar(1.0, -angle / 2.0),
                        ZERO,
                        ZERO,
                        C64::from_polar(1.0, angle / 2.0),
                    ],
                );
                linalg::embed(&single, *target, n)
            }
            Gate::MolmerSorensen { angle, phase } => {
                let axis = xy_axis(*phase);
                let d = linalg::dim(n);
                let mut s = CMatrix::zeros(d, d);
                for k in 0..n {
                    s += linalg::embed(&axis, k, n);
                }
                linalg::expm_hermitian(&(&s * &s), angle / 4.0)
            }
            Gate::Hadamard { target } => {
                let single = CMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
                linalg::embed(&single, *target, n)
            }
            Gate::Cnot { control, target } => {
                let mut m = CMatrix::identity(4, 4);
                m[(2, 2)] = ZERO;
                m[(3, 3)] = ZERO;
                m[(2, 3)] = ONE;
                m[(3, 2)] = ONE;
                linalg::embed_on(&m, &[*control, *target], n)
            }
            Gate::Toffoli { controls, target } => {
                let mut m = CMatrix::identity(8, 8);
                m[(6, 6)] = ZERO;
                m[(7, 7)] = ZERO;
                m[(6, 7)] = ONE;
                m[(7, 6)] = ONE;
                linalg::embed_on(&m, &[controls[0], controls[1], *target], n)
            }
            Gate::Pauli { target, axis } => linalg::embed(&axis.matrix(), *target, n),
            Gate::Custom { targets, matrix } => linalg::embed_on(matrix, targets, n),
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::CollectiveRotation { angle, phase } => Gate::CollectiveRotation {
                angle: -angle,
                phase: *phase,
            },
            Gate::Phase { target, angle } => Gate::Phase {
                target: *target,
                angle: -angle,
            },
            Gate::MolmerSorensen { angle, phase } => Gate::MolmerSorensen {
                angle: -angle,
                phase: *phase,
            },
            Gate::Custom { targets, matrix } => Gate::Custom {
                targets: targets.clone(),
                matrix: matrix.adjoint(),
            },
            self_inverse => self_inverse.clone(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Gate::CollectiveRotation { .. } => "collective_rotation",
            Gate::Phase { .. } => "phase",
            Gate::MolmerSorensen { .. } => "molmer_sorensen",
            Gate::Hadamard { .. } => "hadamard",
            Gate::Cnot { .. } => "cnot",
            Gate::Toffoli { .. } => "toffoli",
            Gate::Pauli { .. } => "pauli",
            Gate::Custom { .. } => "unitary",
        }
    }
}

fn xy_axis(phase: f64) -> CMatrix {
    Pauli::X.matrix().scale(phase.cos()) + Pauli::Y.matrix().scale(phase.sin())
}

/// Wire form of a gate: `{"kind", "targets", "params"}`.
///
/// `pauli` carries its axis as `params[0]` (1 = X, 2 = Y, 3 = Z); `unitary`
/// carries its matrix row-major as interleaved real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    pub targets: Vec<usize>,
    pub params: Vec<f64>,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        let params = match g {
            Gate::CollectiveRotation { angle, phase } | Gate::MolmerSorensen { angle, phase } => {
                vec![*angle, *phase]
            }
            Gate::Phase { angle, .. } => vec![*angle],
            Gate::Pauli { axis, .. } => vec![*axis as u8 as f64],
            Gate::Custom { matrix, .. } => {
                let d = matrix.nrows();
                let mut out = Vec::with_capacity(2 * d * d);
                for i in 0..d {
                    for j in 0..d {
                        out.push(matrix[(i, j)].re);
                        out.push(matrix[(i, j)].im);
                    }
                }
                out
            }
            _ => vec![],
        };
        GateRecord {
            kind: g.kind().to_string(),
            targets: g.targets(),
            params,
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = Error;

    fn try_from(r: GateRecord) -> Result<Gate> {
        let want = |t: usize, p: usize| -> Result<()> {
            if r.targets.len() != t || r.params.len() != p {
                return Err(Error::InvalidParameter(format!(
                    "gate {:?} expects {t} targets and {p} params, got {} and {}",
                    r.kind,
                    r.targets.len(),
                    r.params.len()
                )));
            }
            Ok(())
        };
        let gate = match r.kind.as_str() {
            "collective_rotation" => {
                want(0, 2)?;
                Gate::CollectiveRotation {
                    angle: r.params[0],
                    phase: r.params[1],
                }
            }
            "molmer_sorensen" => {
                want(0, 2)?;
                Gate::MolmerSorensen {
                    angle: r.params[0],
                    phase: r.params[1],
                }
            }
            "phase" => {
                want(1, 1)?;
                Gate::Phase {
                    target: r.targets[0],
                    angle: r.params[0],
                }
            }
            "hadamard" => {
                want(1, 0)?;
                Gate::Hadamard {
                    target: r.targets[0],
                }
            }
            "cnot" => {
                want(2, 0)?;
                Gate::Cnot {
                    control: r.targets[0],
                    target: r.targets[1],
                }
            }
            "toffoli" => {
                want(3, 0)?;
                Gate::Toffoli {
                    controls: [r.targets[0], r.targets[1]],
                    target: r.targets[2],
                }
            }
            "pauli" => {
                want(1, 1)?;
                let axis = match r.params[0] {
                    x if x == 1.0 => Pauli::X,
                    x if x == 2.0 => Pauli::Y,
                    x if x == 3.0 => Pauli::Z,
                    x => return Err(Error::InvalidParameter(format!("pauli axis code {x}"))),
                };
                Gate::Pauli {
                    target: r.targets[0],
                    axis,
                }
            }
            "unitary" => {
                let d = linalg::dim(r.targets.len());
                want(r.targets.len(), 2 * d * d)?;
                let matrix = CMatrix::from_fn(d, d, |i, j| {
                    let k = 2 * (i * d + j);
                    c(r.params[k], r.params[k + 1])
                });
                Gate::Custom {
                    targets: r.targets,
                    matrix,
                }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown gate kind {other:?}"
                )))
            }
        };
        Ok(gate)
    }
}

/// Ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitJson", into = "CircuitJson")]
pub struct Circuit {
    register_size: usize,
    gates: Vec<Gate>,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    label: String,
    register_size: usize,
    gates: Vec<GateRecord>,
}

impl From<Circuit> for CircuitJson {
    fn from(c: Circuit) -> Self {
        CircuitJson {
            gates: c.gates.iter().map(GateRecord::from).collect(),
            label: c.label,
            register_size: c.register_size,
        }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(raw: CircuitJson) -> Result<Circuit> {
        let mut circuit = Circuit::new(raw.register_size, raw.label)?;
        for record in raw.gates {
            circuit.push(Gate::try_from(record)?)?;
        }
        Ok(circuit)
    }
}

impl Circuit {
    pub fn new(register_size: usize, label: impl Into<String>) -> Result<Self> {
        if register_size == 0 || register_size > MAX_QUBITS {
            return Err(Error::TooManyQubits(register_size));
        }
        Ok(Self {
            register_size,
            gates: Vec::new(),
            label: label.into(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.check(self.register_size)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn with(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    /// Appends every gate of `other`.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.register_size != self.register_size {
            return Err(Error::DimensionMismatch(
                self.register_size,
                other.register_size,
            ));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(self)
    }

    pub fn register_size(&self) -> usize {
        self.register_size
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Product of the gate matrices, first gate applied first.
    pub fn unitary(&self) -> CMatrix {
        let d = linalg::dim(self.register_size);
        self.gates.iter().fold(CMatrix::identity(d, d), |acc, g| {
            g.matrix(self.register_size) * acc
        })
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            register_size: self.register_size,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            label: format!("{}^-1", self.label),
        }
    }
}

/// `rho -> U rho U^dagger` with `U` the circuit unitary.
pub fn apply_circuit(rho: &DensityMatrix, circuit: &Circuit) -> Result<DensityMatrix> {
    if rho.n_qubits() != circuit.register_size {
        return Err(Error::DimensionMismatch(
            rho.n_qubits(),
            circuit.register_size,
        ));
    }
    rho.conjugate(&circuit.unitary())
}

/// How the code state is prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    /// Two CNOTs fanning out the system qubit, then a Hadamard on every qubit.
    #[default]
    Textbook,
    /// Hadamard on the system qubit, then one collective Molmer-Sorensen gate.
    ///
    /// On inputs with fresh ancillas this yields the code state up to the
    /// diagonal unitary `CZ(1,2) Z(1) Z(2)` (and a global phase), an
    /// admissible `D`. The MS gate itself does not commute with phase flips,
    /// so the decoder removes that `D` rather than inverting the MS gate.
    MolmerSorensen,
}

/// Builds the encoder on a 3-qubit register, optionally followed by `D`.
///
/// `D` must commute with `Z_k` for every qubit `k`.
pub fn build_encoder(kind: EncoderKind, d: Option<&Unitary>) -> Result<Circuit> {
    let mut enc = Circuit::new(3, "encode")?;
    match kind {
        EncoderKind::Textbook => {
            enc.push(Gate::Cnot {
                control: 0,
                target: 1,
            })?;
            enc.push(Gate::Cnot {
                control: 0,
                target: 2,
            })?;
            for q in 0..3 {
                enc.push(Gate::Hadamard { target: q })?;
            }
        }
        EncoderKind::MolmerSorensen => {
            enc.push(Gate::Hadamard { target: 0 })?;
            enc.push(Gate::MolmerSorensen {
                angle: std::f64::consts::FRAC_PI_2,
                phase: 0.0,
            })?;
        }
    }
    if let Some(d) = d {
        if d.n_qubits() != 3 {
            return Err(Error::DimensionMismatch(d.n_qubits(), 3));
        }
        let (qubit, deviation) = d.z_commutator_deviation();
        if deviation > Tolerances::DEFAULT.commutation {
            return Err(Error::NotZCommuting { qubit, deviation });
        }
        enc.push(Gate::Custom {
            targets: vec![0, 1, 2],
            matrix: d.matrix().clone(),
        })?;
    }
    Ok(enc)
}

/// Decoder for the default textbook encoder with `D = I` and `U = I`.
pub fn build_decoder_and_correct() -> Result<Circuit> {
    decoder_for(EncoderKind::Textbook, None, None)
}

/// `CZ(1,2) Z(1) Z(2)`: what the MS encoder adds on top of the textbook one.
pub fn molmer_sorensen_residual() -> Unitary {
    let pi = std::f64::consts::PI;
    Unitary::diagonal(&[0.0, pi, pi, pi, 0.0, pi, pi, pi]).expect("diagonal phases")
}

/// Decoder matching `build_encoder(kind, d)`: undo `D` (and the MS residual),
/// undo the textbook encoder, apply the majority-vote correction (Toffoli from
/// both ancillas onto the system qubit), then the optional single-qubit `U`.
pub fn decoder_for(kind: EncoderKind, d: Option<&Unitary>, u: Option<&Unitary>) -> Result<Circuit> {
    let mut dec = Circuit::new(3, "decode+correct")?;
    if let Some(d) = d {
        if d.n_qubits() != 3 {
            return Err(Error::DimensionMismatch(d.n_qubits(), 3));
        }
        let (qubit, deviation) = d.z_commutator_deviation();
        if deviation > Tolerances::DEFAULT.commutation {
            return Err(Error::NotZCommuting { qubit, deviation });
        }
        dec.push(Gate::Custom {
            targets: vec![0, 1, 2],
            matrix: d.dagger().matrix().clone(),
        })?;
    }
    if kind == EncoderKind::MolmerSorensen {
        dec.push(Gate::Custom {
            targets: vec![0, 1, 2],
            matrix: molmer_sorensen_residual().dagger().matrix().clone(),
        })?;
    }
    for q in 0..3 {
        dec.push(Gate::Hadamard { target: q })?;
    }
    dec.push(Gate::Cnot {
        control: 0,
        target: 2,
    })?;
    dec.push(Gate::Cnot {
        control: 0,
        target: 1,
    })?;
    dec.push(Gate::Toffoli {
        controls: [1, 2],
        target: 0,
    })?;
    if let Some(u) = u {
        if u.n_qubits() != 1 {
            return Err(Error::DimensionMismatch(u.n_qubits(), 1));
        }
        dec.push(Gate::Custom {
            targets: vec![0],
            matrix: u.matrix().clone(),
        })?;
    }
    Ok(dec)
}

/// Ancilla pattern `(qubit 1, qubit 2)` left by the decoder.
pub type Syndrome = (u8, u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyndromeEntry {
    /// Qubit whose phase flip produces this syndrome, if any.
    pub flipped_qubit: Option<usize>,
    /// Correction applied to the system qubit when the syndrome occurs.
    pub correction: Pauli,
}

/// Decoder lookup for single phase flips. Only a flip on the system qubit
/// needs a correction on it; flips on an ancilla only mark the ancillas.
pub fn syndrome_table() -> BTreeMap<Syndrome, SyndromeEntry> {
    BTreeMap::from([
        (
            (0, 0),
            SyndromeEntry {
                flipped_qubit: None,
                correction: Pauli::I,
            },
        ),
        (
            (0, 1),
            SyndromeEntry {
                flipped_qubit: Some(2),
                correction: Pauli::I,
            },
        ),
        (
            (1, 0),
            SyndromeEntry {
                flipped_qubit: Some(1),
                correction: Pauli::I,
            },
        ),
        (
            (1, 1),
            SyndromeEntry {
                flipped_qubit: Some(0),
                correction: Pauli::X,
            },
        ),
    ])
}

/// Distribution of the ancilla pattern in a decoded register.
pub fn syndrome_distribution(decoded: &DensityMatrix) -> Result<BTreeMap<Syndrome, f64>> {
    if decoded.n_qubits() != 3 {
        return Err(Error::DimensionMismatch(decoded.n_qubits(), 3));
    }
    let anc = decoded.partial_trace(&[1, 2])?;
    Ok([(0, 0), (0, 1), (1, 0), (1, 1)]
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, anc.matrix()[(i, i)].re))
        .collect())
}
