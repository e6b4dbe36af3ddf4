//! Maximum-likelihood state reconstruction by the `R rho R` iteration.
//!
//! For projectors `P_k` observed `n_k` times the multinomial log-likelihood is
//! `L = sum_k n_k ln Tr(P_k rho)`. Its stationarity condition is `R rho = rho`
//! with `R = sum_k (n_k / N p_k) P_k`, and each step maps `rho` to
//! `R rho R / Tr(...)`. When a plain step lowers `L` the step is diluted to
//! `(I + e R) rho (I + e R)` with `e` halved until `L` stops decreasing. When
//! the plain step gains, higher powers of `R` are tried as well.
//!
//! `L` is concave in the Pauli coefficients of `rho`, so a Newton step in those
//! coordinates is tried too and kept when it stays positive semidefinite and
//! gains more. Near a full-rank optimum this converges quadratically, where the
//! multiplicative update crawls along directions with tiny eigenvalues.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::counts::{check_complete, CountRecord, Setting};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Pauli, C64};
use crate::state::DensityMatrix;

/// Observed frequencies, not necessarily integer.
///
/// Every outcome of every setting contributes one projector `|v_k><v_k|`; the
/// vectors `v_k^dagger` are stacked as the rows of one matrix so Born
/// probabilities and the `R` operator each take a single product.
#[derive(Debug, Clone)]
pub struct Observations {
    n: usize,
    rows: CMatrix,
    weights: Vec<f64>,
    total: f64,
    /// Non-identity Pauli strings and `Re(v_k^dagger P_a v_k) / d` for each pair.
    paulis: Vec<CMatrix>,
    design: DMatrix<f64>,
}

impl Observations {
    pub fn from_counts(counts: &[CountRecord]) -> Result<Self> {
        let freq: Vec<(Setting, Vec<f64>)> = counts
            .iter()
            .map(|r| {
                (
                    r.setting().clone(),
                    r.counts().iter().map(|&k| k as f64).collect(),
                )
            })
            .collect();
        Self::from_weights(&freq)
    }

    /// Each setting's weights are relative counts; exact Born frequencies work too.
    pub fn from_weights(data: &[(Setting, Vec<f64>)]) -> Result<Self> {
        let n = check_complete(data.iter().map(|(s, _)| s))?;
        let d = linalg::dim(n);
        let mut total = 0.0;
        for (s, w) in data {
            if w.len() != d || w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidCountRecord(format!(
                    "bad weights for setting {}",
                    s.label()
                )));
            }
            total += w.iter().sum::<f64>();
        }
        if total <= 0.0 {
            return Err(Error::InvalidCountRecord("no counts".into()));
        }
        let mut rows = CMatrix::zeros(d * data.len(), d);
        for (i, (s, _)) in data.iter().enumerate() {
            rows.view_mut((i * d, 0), (d, d)).copy_from(&s.rotation());
        }
        let paulis: Vec<CMatrix> = (1..d * d)
            .map(|mut idx| {
                let mut axes = vec![Pauli::I; n];
                for slot in axes.iter_mut().rev() {
                    *slot = Pauli::ALL[idx % 4];
                    idx /= 4;
                }
                linalg::pauli_string(&axes)
            })
            .collect();
        // Every row is a product of Pauli eigenstates, so <P_a> factorizes into
        // +1 (identity), +-1 (the measured axis, by outcome bit) or 0.
        let mut design = DMatrix::zeros(rows.nrows(), paulis.len());
        for (i, (s, _)) in data.iter().enumerate() {
            let axes = s.axes();
            for b in 0..d {
                for a in 0..paulis.len() {
                    let mut idx = a + 1;
                    let mut value = 1.0 / d as f64;
                    for q in (0..n).rev() {
                        let bit = (b >> (n - 1 - q)) & 1;
                        match Pauli::ALL[idx % 4] {
                            Pauli::I => {}
                            p if p == axes[q] => value *= if bit == 0 { 1.0 } else { -1.0 },
                            _ => value = 0.0,
                        }
                        idx /= 4;
                    }
                    design[(i * d + b, a)] = value;
                }
            }
        }
        Ok(Self {
            n,
            rows,
            weights: data.iter().flat_map(|(_, w)| w.iter().copied()).collect(),
            total,
            paulis,
            design,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        let t = &self.rows * rho;
        (0..t.nrows())
            .map(|k| {
                t.row(k)
                    .iter()
                    .zip(self.rows.row(k).iter())
                    .map(|(a, b)| a * b.conj())
                    .sum::<C64>()
                    .re
            })
            .collect()
    }

    /// Log-likelihood per unit weight; `-inf` when an observed outcome has zero probability.
    pub fn log_likelihood(&self, rho: &CMatrix) -> f64 {
        let mut ll = 0.0;
        for (&w, p) in self.weights.iter().zip(self.probabilities(rho)) {
            if w > 0.0 {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += w * p.ln();
            }
        }
        ll / self.total
    }

    /// `L(next) - L(rho)` summed as `ln(1 + dp/p)` so tiny steps keep their
    /// sign; `p` holds the probabilities under `rho`.
    fn log_likelihood_change(&self, p: &[f64], rho: &CMatrix, next: &CMatrix) -> f64 {
        let dp = self.probabilities(&(next - rho));
        let mut delta = 0.0;
        for ((&w, &p), dp) in self.weights.iter().zip(p).zip(dp) {
            if w > 0.0 {
                let ratio = dp / p;
                if ratio <= -1.0 {
                    return f64::NEG_INFINITY;
                }
                delta += w * ratio.ln_1p();
            }
        }
        delta / self.total
    }

    fn r_operator(&self, p: &[f64]) -> CMatrix {
        let mut scaled = self.rows.clone();
        for (k, (&w, &p)) in self.weights.iter().zip(p).enumerate() {
            let f = if w > 0.0 && p > 0.0 {
                w / (self.total * p)
            } else {
                0.0
            };
            scaled.row_mut(k).scale_mut(f);
        }
        self.rows.adjoint() * scaled
    }

    /// Full Newton step on the Pauli coefficients; `None` if the Hessian is singular.
    fn newton_direction(&self, p: &[f64], rho: &CMatrix) -> Option<CMatrix> {
        let m = self.paulis.len();
        let mut grad = DVector::<f64>::zeros(m);
        let mut hess = DMatrix::<f64>::zeros(m, m);
        for (k, (&w, &p)) in self.weights.iter().zip(p).enumerate() {
            if w > 0.0 {
                if p <= 0.0 {
                    return None;
                }
                let a = self.design.row(k).transpose();
                grad.axpy(w / p, &a, 1.0);
                hess.ger(w / (p * p), &a, &a, 1.0);
            }
        }
        let delta = hess.cholesky()?.solve(&grad);
        let d = rho.nrows() as f64;
        let mut step = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (p, &x) in self.paulis.iter().zip(delta.iter()) {
            step += p.scale(x / d);
        }
        Some(step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Stop once the Frobenius norm of the iterate change drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood per unit weight, starting with the maximally mixed state
    /// and accumulated from per-step changes.
    pub log_likelihood: Vec<f64>,
}

impl MleResult {
    /// The estimate, or [`Error::NotConverged`] carrying the iteration count.
    pub fn into_converged(self) -> Result<DensityMatrix> {
        if self.converged {
            Ok(self.rho)
        } else {
            Err(Error::NotConverged(self.iterations))
        }
    }
}

/// Reconstructs the state behind `counts`.
pub fn mle_reconstruct(counts: &[CountRecord], tol: f64, max_iter: usize) -> Result<MleResult> {
    mle_from_observations(
        &Observations::from_counts(counts)?,
        MleOptions { tol, max_iter },
    )
}

pub fn mle_from_observations(obs: &Observations, opts: MleOptions) -> Result<MleResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0, got {}",
            opts.tol
        )));
    }
    let d = linalg::dim(obs.n);
    let id = CMatrix::identity(d, d);
    let mut rho = id.scale(1.0 / d as f64);
    let mut ll = obs.log_likelihood(&rho);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut newton_ready = true;

    while iterations < opts.max_iter {
        iterations += 1;
        let p = obs.probabilities(&rho);
        let r = obs.r_operator(&p);
        let mut step = None;
        let candidate = normalize(&(&r * &rho * &r));
        let gain = obs.log_likelihood_change(&p, &rho, &candidate);
        if gain >= 0.0 {
            step = Some(extrapolate(obs, &p, &rho, &r, candidate, gain));
        } else {
            let mut eps = 1.0;
            for _ in 0..60 {
                let a = &id + r.scale(eps);
                let candidate = normalize(&(&a * &rho * a.adjoint()));
                let gain = obs.log_likelihood_change(&p, &rho, &candidate);
                if gain >= 0.0 {
                    step = Some((candidate, gain));
                    break;
                }
                eps *= 0.5;
            }
        }
        if newton_ready || iterations % 16 == 0 {
            let newton = newton_step(obs, &p, &rho);
            newton_ready = newton.is_some();
            if let Some((candidate, gain)) = newton {
                if step.as_ref().is_none_or(|(_, g)| gain > *g) {
                    step = Some((candidate, gain));
                }
            }
        }
        let Some((next, gain)) = step else {
            // No step increases the likelihood: stationary to machine precision.
            converged = true;
            break;
        };
        let change = (&next - &rho).norm();
        rho = next;
        ll += gain;
        trace.push(ll);
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    let rho = DensityMatrix::from_physical(rho);
    Ok(MleResult {
        rho,
        converged,
        iterations,
        log_likelihood: trace,
    })
}

/// Tries `R^a rho R^a` for a = 2, 4, 8, ... and keeps the best gain.
/// Near the boundary of the state space the plain step shrinks small
/// eigenvalues only geometrically; powers of `R` take several such steps at once.
fn extrapolate(
    obs: &Observations,
    p: &[f64],
    rho: &CMatrix,
    r: &CMatrix,
    plain: CMatrix,
    plain_gain: f64,
) -> (CMatrix, f64) {
    let mut best = (plain, plain_gain);
    let (values, vectors) = linalg::eigh(r);
    let mut a = 2;
    while a <= 1024 {
        let mut scaled = vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v.max(0.0).powi(a));
        }
        let ra = scaled * vectors.adjoint();
        let candidate = normalize(&(&ra * rho * &ra));
        let gain = obs.log_likelihood_change(p, rho, &candidate);
        if !(gain > best.1) {
            break;
        }
        best = (candidate, gain);
        a *= 2;
    }
    best
}

/// Damped Newton step, halved until it stays a state and does not lose likelihood.
fn newton_step(obs: &Observations, p: &[f64], rho: &CMatrix) -> Option<(CMatrix, f64)> {
    let dir = obs.newton_direction(p, rho)?;
    let mut t = 1.0;
    for _ in 0..8 {
        let candidate = rho + dir.scale(t);
        if linalg::eigvalsh(&candidate)[0] >= 0.0 {
            let candidate = normalize(&candidate);
            let gain = obs.log_likelihood_change(p, rho, &candidate);
            if gain >= 0.0 {
                return Some((candidate, gain));
            }
        }
        t *= 0.5;
    }
    None
}

fn normalize(m: &CMatrix) -> CMatrix {
    let h = linalg::hermitize(m);
    let t = h.trace().re;
    h.unscale(t)
}
