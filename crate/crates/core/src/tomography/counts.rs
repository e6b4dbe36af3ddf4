//! Measurement settings, count records, and finite-shot simulation.
//!
//! A setting names one Pauli axis per qubit, e.g. `XZY`. Outcome bitstrings
//! list qubit 0 first; bit `0` is the `+1` eigenstate of that qubit's axis.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, Pauli, C64};
use crate::state::{DensityMatrix, MAX_QUBITS};

/// One Pauli axis (X, Y or Z) per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting(Vec<Pauli>);

impl Setting {
    pub fn new(axes: Vec<Pauli>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_QUBITS || axes.contains(&Pauli::I) {
            let label: String = axes.iter().map(|p| p.symbol()).collect();
            return Err(Error::InvalidSetting(label));
        }
        Ok(Self(axes))
    }

    pub fn parse(label: &str) -> Result<Self> {
        let axes = label
            .chars()
            .map(|ch| {
                Pauli::from_symbol(ch).ok_or_else(|| Error::InvalidSetting(label.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.0
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|p| p.symbol()).collect()
    }

    /// Unitary taking each axis eigenbasis to the computational basis.
    pub fn rotation(&self) -> CMatrix {
        let mats: Vec<CMatrix> = self.0.iter().map(|&p| basis_change(p)).collect();
        linalg::kron_all(mats.iter())
    }

    /// Born probabilities of the `2^n` outcomes, indexed like bitstrings.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch(rho.n_qubits(), self.n_qubits()));
        }
        let u = self.rotation();
        let rotated = &u * rho.matrix() * u.adjoint();
        Ok((0..rotated.nrows())
            .map(|k| rotated[(k, k)].re.max(0.0))
            .collect())
    }

    /// Projector onto outcome `index`.
    pub fn projector(&self, index: usize) -> CMatrix {
        let u = self.rotation();
        let d = u.nrows();
        let col = u.adjoint().column(index).into_owned();
        debug_assert!(index < d);
        &col * col.adjoint()
    }
}

fn basis_change(p: Pauli) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match p {
        Pauli::X => CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
        // H S^dagger
        Pauli::Y => CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, -h), c(h, 0.0), c(0.0, h)]),
        Pauli::Z | Pauli::I => CMatrix::identity(2, 2),
    }
}

/// All `3^n` settings in lexicographic X < Y < Z order.
pub fn all_settings(n: usize) -> Vec<Setting> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Pauli>| {
                [Pauli::X, Pauli::Y, Pauli::Z].into_iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Setting).collect()
}

pub fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .map(|q| {
            if (index >> (n - 1 - q)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

fn parse_bitstring(s: &str, n: usize) -> Result<usize> {
    if s.len() != n || !s.chars().all(|ch| ch == '0' || ch == '1') {
        return Err(Error::InvalidCountRecord(format!(
            "outcome {s:?} is not a {n}-bit string"
        )));
    }
    Ok(usize::from_str_radix(s, 2).expect("checked binary"))
}

/// Outcome histogram of one setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CountRecordJson", into = "CountRecordJson")]
pub struct CountRecord {
    setting: Setting,
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct CountRecordJson {
    setting: String,
    shots: u64,
    hist: BTreeMap<String, u64>,
}

impl From<CountRecord> for CountRecordJson {
    fn from(r: CountRecord) -> Self {
        let n = r.setting.n_qubits();
        CountRecordJson {
            setting: r.setting.label(),
            shots: r.shots(),
            hist: r
                .counts
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (bitstring(i, n), k))
                .collect(),
        }
    }
}

impl TryFrom<CountRecordJson> for CountRecord {
    type Error = Error;

    fn try_from(raw: CountRecordJson) -> Result<Self> {
        let setting = Setting::parse(&raw.setting)?;
        let n = setting.n_qubits();
        let mut counts = vec![0u64; linalg::dim(n)];
        for (key, k) in raw.hist {
            counts[parse_bitstring(&key, n)?] += k;
        }
        let record = CountRecord::new(setting, counts)?;
        if record.shots() != raw.shots {
            return Err(Error::InvalidCountRecord(format!(
                "histogram sums to {} but shots is {}",
                record.shots(),
                raw.shots
            )));
        }
        Ok(record)
    }
}

impl CountRecord {
    pub fn new(setting: Setting, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != linalg::dim(setting.n_qubits()) {
            return Err(Error::InvalidCountRecord(format!(
                "{} outcomes for a {}-qubit setting",
                counts.len(),
                setting.n_qubits()
            )));
        }
        Ok(Self { setting, counts })
    }

    pub fn setting(&self) -> &Setting {
        &self.setting
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.shots().max(1) as f64;
        self.counts.iter().map(|&k| k as f64 / total).collect()
    }

    /// Adds the counts of another record of the same setting.
    pub fn merged(&self, other: &CountRecord) -> Result<CountRecord> {
        if self.setting != other.setting {
            return Err(Error::InvalidCountRecord(format!(
                "cannot merge {} with {}",
                self.setting.label(),
                other.setting.label()
            )));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CountRecord {
            setting: self.setting.clone(),
            counts,
        })
    }
}

/// Draws `shots` outcomes from `probabilities` by chained binomials.
pub fn sample_multinomial<R: Rng + ?Sized>(
    probabilities: &[f64],
    shots: u64,
    rng: &mut R,
) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass_left = 1.0;
    let mut out = Vec::with_capacity(probabilities.len());
    for (i, &p) in probabilities.iter().enumerate() {
        if i + 1 == probabilities.len() {
            out.push(remaining);
            break;
        }
        let k = if remaining == 0 || p <= 0.0 || mass_left <= 0.0 {
            0
        } else {
            let q = (p / mass_left).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("q in [0, 1]")
                .sample(rng)
        };
        out.push(k);
        remaining -= k;
        mass_left -= p;
    }
    out
}

/// Multinomial samples of `rho` in each setting.
pub fn simulate_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    settings: &[Setting],
    shots_per_setting: u64,
    rng: &mut R,
) -> Result<Vec<CountRecord>> {
    settings
        .iter()
        .map(|s| {
            let probs = s.probabilities(rho)?;
            CountRecord::new(
                s.clone(),
                sample_multinomial(&probs, shots_per_setting, rng),
            )
        })
        .collect()
}

/// Exact Born frequencies scaled to `shots`, for noise-free reconstructions.
pub fn expected_frequencies(
    rho: &DensityMatrix,
    settings: &[Setting],
) -> Result<Vec<(Setting, Vec<f64>)>> {
    settings
        .iter()
        .map(|s| Ok((s.clone(), s.probabilities(rho)?)))
        .collect()
}

/// Checks that every `3^n` setting is present for an `n`-qubit reconstruction.
pub fn check_complete<'a>(settings: impl IntoIterator<Item = &'a Setting>) -> Result<usize> {
    let present: Vec<&Setting> = settings.into_iter().collect();
    let n = present
        .first()
        .map(|s| s.n_qubits())
        .ok_or_else(|| Error::NotInformationallyComplete("no settings".into()))?;
    if let Some(bad) = present.iter().find(|s| s.n_qubits() != n) {
        return Err(Error::InvalidCountRecord(format!(
            "mixed register sizes: {} and {}",
            n,
            bad.n_qubits()
        )));
    }
    let missing: Vec<String> = all_settings(n)
        .into_iter()
        .filter(|s| !present.contains(&s))
        .map(|s| s.label())
        .collect();
    if !missing.is_empty() {
        return Err(Error::NotInformationallyComplete(missing.join(",")));
    }
    Ok(n)
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: Write>(mut out: W, records: &[CountRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<CountRecord>> {
    input
        .lines()
        .filter(|line| !matches!(line, Ok(l) if l.trim().is_empty()))
        .map(|line| Ok(serde_json::from_str(&line?)?))
        .collect()
}

/// Expectation of the Pauli string `paulis` in a state, straight from the matrix.
pub fn pauli_expectation(rho: &DensityMatrix, paulis: &[Pauli]) -> C64 {
    rho.expectation(&linalg::pauli_string(paulis))
}
