//! Single-qubit process matrices.
//!
//! A channel acts as `E(rho) = sum_mn chi_mn P_m rho P_n` with `P` running over
//! I, X, Y, Z. With this expansion a trace-preserving channel has `Tr chi = 1`,
//! the identity has a single unit entry at (I, I), and the process fidelity is
//! `Tr(chi_a chi_b)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::counts::{all_settings, simulate_counts, CountRecord};
use super::mle::{mle_reconstruct, MleOptions};
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, Pauli, C64};
use crate::state::{DensityMatrix, Ket, Unitary};

/// The four inputs fed through a channel, in this order: |0>, |1>, |+>, |+i>.
pub fn standard_inputs() -> [Ket; 4] {
    [Ket::zero(), Ket::one(), Ket::plus(), Ket::plus_i()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    elements: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct ChiJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ChiMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..4)
                .map(|i| (0..4).map(|j| f(&self.elements[(i, j)])).collect())
                .collect()
        };
        ChiJson {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChiMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ChiJson::deserialize(d)?;
        let ok = raw.re.len() == 4
            && raw.im.len() == 4
            && raw.re.iter().chain(&raw.im).all(|r| r.len() == 4);
        if !ok {
            return Err(serde::de::Error::custom("chi matrix must be 4x4"));
        }
        let m = CMatrix::from_fn(4, 4, |i, j| c(raw.re[i][j], raw.im[i][j]));
        ChiMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

const CHI_TOL: f64 = 1e-9;

impl ChiMatrix {
    /// Checks Hermiticity, unit trace and positivity at 1e-9.
    pub fn new(elements: CMatrix) -> Result<Self> {
        if elements.nrows() != 4 || elements.ncols() != 4 {
            return Err(Error::DimensionMismatch(elements.nrows(), 4));
        }
        let herm = linalg::hermitian_deviation(&elements);
        if herm > CHI_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = elements.trace();
        if (tr.re - 1.0).abs() > CHI_TOL || tr.im.abs() > CHI_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = linalg::eigvalsh(&elements)[0];
        if min < -CHI_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self {
            elements: linalg::hermitize(&elements),
        })
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn identity() -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        Self { elements: m }
    }

    /// `chi_mn = sum_i a_im conj(a_in)` for `K_i = sum_m a_im P_m`.
    pub fn from_channel(channel: &QuantumChannel) -> Result<Self> {
        if channel.n_qubits() != 1 {
            return Err(Error::DimensionMismatch(channel.n_qubits(), 1));
        }
        let mut m = CMatrix::zeros(4, 4);
        for k in channel.kraus_ops() {
            let a: Vec<C64> = Pauli::ALL
                .iter()
                .map(|p| linalg::hs_inner(&p.matrix(), k) * 0.5)
                .collect();
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] += a[i] * a[j].conj();
                }
            }
        }
        Self::new(m)
    }

    pub fn from_unitary(u: &Unitary) -> Result<Self> {
        Self::from_channel(&QuantumChannel::new(vec![u.matrix().clone()], "unitary")?)
    }

    /// Linear inversion from the outputs for [`standard_inputs`], then
    /// projection onto the physical cone.
    pub fn from_outputs(outputs: &[DensityMatrix; 4]) -> Result<Self> {
        for rho in outputs {
            if rho.n_qubits() != 1 {
                return Err(Error::DimensionMismatch(rho.n_qubits(), 1));
            }
        }
        Ok(Self::project_physical(&chi_by_inversion(outputs)))
    }

    /// Clamps negative eigenvalues to zero and rescales to unit trace.
    pub fn project_physical(raw: &CMatrix) -> Self {
        let clamped = linalg::hermitian_map(&linalg::hermitize(raw), |v| v.max(0.0));
        let tr = clamped.trace().re;
        let elements = if tr > 0.0 {
            clamped.unscale(tr)
        } else {
            // Nothing positive survives: fall back to the fully depolarizing channel.
            CMatrix::identity(4, 4).scale(0.25)
        };
        Self { elements }
    }

    /// Kraus form from the eigendecomposition, dropping null directions.
    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let (vals, vecs) = linalg::eigh(&self.elements);
        let paulis: Vec<CMatrix> = Pauli::ALL.iter().map(|p| p.matrix()).collect();
        let mut kraus = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            if v <= 1e-14 {
                continue;
            }
            let s = v.sqrt();
            let mut op = CMatrix::zeros(2, 2);
            for (m, p) in paulis.iter().enumerate() {
                op += p * (vecs[(m, k)] * s);
            }
            kraus.push(op);
        }
        QuantumChannel::with_tolerances(
            kraus,
            "chi",
            &crate::tolerance::Tolerances {
                trace_preserving: 1e-6,
                ..Default::default()
            },
        )
    }
}

/// `chi_mn = <P_m (x) conj(P_n), S> / 4` where `S` is the row-major
/// superoperator, recovered column by column from the matrix units.
fn chi_by_inversion(outputs: &[DensityMatrix; 4]) -> CMatrix {
    let [r0, r1, rp, rpi] = outputs.each_ref().map(|r| r.matrix().clone());
    let half_1i = c(0.5, 0.5);
    let e01 = &rp + &rpi * c(0.0, 1.0) - (&r0 + &r1) * half_1i;
    let e10 = e01.adjoint();
    let units = [(0, 0, &r0), (0, 1, &e01), (1, 0, &e10), (1, 1, &r1)];
    let mut s = CMatrix::zeros(4, 4);
    for (k, l, img) in units {
        for i in 0..2 {
            for j in 0..2 {
                s[(2 * i + j, 2 * k + l)] = img[(i, j)];
            }
        }
    }
    let paulis: Vec<CMatrix> = Pauli::ALL.iter().map(|p| p.matrix()).collect();
    CMatrix::from_fn(4, 4, |m, n| {
        let basis = linalg::kron(&paulis[m], &paulis[n].map(|z| z.conj()));
        linalg::hs_inner(&basis, &s) * 0.25
    })
}

/// `Tr(chi_id chi_exp)`; both must have unit trace.
pub fn process_fidelity(chi_exp: &ChiMatrix, chi_id: &ChiMatrix) -> Result<f64> {
    for chi in [chi_exp, chi_id] {
        let tr = chi.elements.trace().re;
        if (tr - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidTrace(tr));
        }
    }
    let f = (&chi_id.elements * &chi_exp.elements).trace().re;
    Ok(f.clamp(0.0, 1.0))
}

/// Simulated counts for the four standard inputs, three settings each.
pub fn simulate_process_counts<R: Rng + ?Sized>(
    runner: impl Fn(&Ket) -> Result<DensityMatrix>,
    shots: u64,
    rng: &mut R,
) -> Result<[Vec<CountRecord>; 4]> {
    let settings = all_settings(1);
    let mut out: [Vec<CountRecord>; 4] = Default::default();
    for (slot, input) in out.iter_mut().zip(standard_inputs().iter()) {
        *slot = simulate_counts(&runner(input)?, &settings, shots, rng)?;
    }
    Ok(out)
}

/// Reconstructs each output by maximum likelihood and assembles chi.
pub fn chi_from_counts(counts: &[Vec<CountRecord>; 4], opts: MleOptions) -> Result<ChiMatrix> {
    let mut outputs = Vec::with_capacity(4);
    for records in counts {
        outputs.push(mle_reconstruct(records, opts.tol, opts.max_iter)?.into_converged()?);
    }
    let outputs: [DensityMatrix; 4] = outputs.try_into().expect("four outputs");
    ChiMatrix::from_outputs(&outputs)
}

/// Finite-shot process tomography of `runner`, which maps an input qubit
/// state to the channel output.
pub fn process_tomography<R: Rng + ?Sized>(
    runner: impl Fn(&Ket) -> Result<DensityMatrix>,
    shots: u64,
    rng: &mut R,
) -> Result<ChiMatrix> {
    let counts = simulate_process_counts(runner, shots, rng)?;
    chi_from_counts(&counts, MleOptions::default())
}
