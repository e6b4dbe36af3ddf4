//! Noise accumulated between the measurement and the decoder.
//!
//! Two effects are modelled. Every unmeasured qubit dephases while the
//! measured one is read out and the register is recooled, with strength
//! `p = (1 - exp(-t/T2))/2` over the idle time `t = meas + recool`. The
//! subsequent gates then depolarize every qubit with probability
//! `base + slope * n`, where `n` is the mean phonon number left after
//! recooling. Photon recoil only heats when the measured qubit was bright, so
//! `n` depends on the outcome.

use serde::{Deserialize, Serialize};

use super::{dephasing_channel, depolarizing_channel, Outcome, QuantumChannel};
use crate::error::{Error, Result};

/// Mean phonon numbers after one (recool, measurement) duration pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhononEntry {
    pub recool_us: f64,
    pub meas_us: f64,
    /// After projection onto `|0>` (no scattering).
    pub outcome_zero: f64,
    /// After projection onto `|1>` (recoil heating).
    pub outcome_one: f64,
}

impl PhononEntry {
    /// Splits an outcome-averaged value, giving the dark outcome `residual`
    /// and the bright outcome the remainder so the two average to `mean`.
    pub fn from_mean(recool_us: f64, meas_us: f64, mean: f64, residual: f64) -> Self {
        Self {
            recool_us,
            meas_us,
            outcome_zero: residual,
            outcome_one: 2.0 * mean - residual,
        }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.outcome_zero + self.outcome_one)
    }

    pub fn for_outcome(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Zero => self.outcome_zero,
            Outcome::One => self.outcome_one,
        }
    }
}

/// Mean phonon numbers measured after 800 us of recooling for readouts of
/// 100, 200, 300 and 400 us.
pub const MEASURED_PHONONS: [(f64, f64, f64); 4] = [
    (800.0, 100.0, 0.17),
    (800.0, 200.0, 0.24),
    (800.0, 300.0, 0.41),
    (800.0, 400.0, 0.50),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Dephasing time of idle qubits; `None` disables idle dephasing.
    pub t2_us: Option<f64>,
    pub recool_duration_us: f64,
    pub phonon_table: Vec<PhononEntry>,
    /// Depolarizing probability added per phonon.
    pub gate_error_per_phonon: f64,
    pub base_gate_error: f64,
}

impl NoiseParams {
    /// Everything off.
    pub fn noiseless(recool_duration_us: f64) -> Self {
        Self {
            t2_us: None,
            recool_duration_us,
            phonon_table: Vec::new(),
            gate_error_per_phonon: 0.0,
            base_gate_error: 0.0,
        }
    }

    /// Calibrated against the measured fidelities at 800 us recooling; see
    /// the calibration chapter of the guide for how the values were fitted.
    pub fn calibrated() -> Self {
        Self {
            t2_us: Some(CALIBRATED_T2_US),
            recool_duration_us: 800.0,
            phonon_table: measured_phonon_table(CALIBRATED_RESIDUAL_PHONONS),
            gate_error_per_phonon: CALIBRATED_GATE_ERROR_PER_PHONON,
            base_gate_error: CALIBRATED_BASE_GATE_ERROR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, x: f64| -> Result<()> {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {x}"
                )));
            }
            Ok(())
        };
        if let Some(t2) = self.t2_us {
            if !(t2.is_finite() && t2 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "t2_us must be > 0, got {t2}"
                )));
            }
        }
        nonneg("recool_duration_us", self.recool_duration_us)?;
        nonneg("gate_error_per_phonon", self.gate_error_per_phonon)?;
        nonneg("base_gate_error", self.base_gate_error)?;
        for e in &self.phonon_table {
            nonneg("phonon_table.recool_us", e.recool_us)?;
            nonneg("phonon_table.meas_us", e.meas_us)?;
            nonneg("phonon_table.outcome_zero", e.outcome_zero)?;
            nonneg("phonon_table.outcome_one", e.outcome_one)?;
        }
        Ok(())
    }

    pub fn phonon_entry(&self, meas_us: f64) -> Option<&PhononEntry> {
        self.phonon_table.iter().find(|e| {
            (e.recool_us - self.recool_duration_us).abs() < 1e-9
                && (e.meas_us - meas_us).abs() < 1e-9
        })
    }

    /// Mean phonon number after a readout of `meas_us` with the given outcome.
    pub fn mean_phonons(&self, meas_us: f64, outcome: Outcome) -> Result<f64> {
        match self.phonon_entry(meas_us) {
            Some(e) => Ok(e.for_outcome(outcome)),
            // Without a phonon slope the heating never matters.
            None if self.gate_error_per_phonon == 0.0 => Ok(0.0),
            None => Err(Error::MissingPhononEntry {
                recool_us: self.recool_duration_us,
                meas_us,
            }),
        }
    }

    /// Idle dephasing probability over `meas_us` plus the recooling time.
    pub fn dephasing_probability(&self, meas_us: f64) -> f64 {
        match self.t2_us {
            None => 0.0,
            Some(t2) => {
                let t = meas_us + self.recool_duration_us;
                0.5 * (1.0 - (-t / t2).exp())
            }
        }
    }

    /// Depolarizing probability of the gates after a readout, clamped to [0, 1].
    pub fn gate_error(&self, meas_us: f64, outcome: Outcome) -> Result<f64> {
        let n = self.mean_phonons(meas_us, outcome)?;
        Ok((self.base_gate_error + self.gate_error_per_phonon * n).clamp(0.0, 1.0))
    }
}

/// Fitted so the outcome-averaged state fidelity at 800 us recooling and
/// 200 us readout is 0.84, with the other three constants held fixed
/// (see [`crate::experiment::fit_t2`]).
pub const CALIBRATED_T2_US: f64 = 3200.0;
pub const CALIBRATED_GATE_ERROR_PER_PHONON: f64 = 0.15;
/// Gives a process fidelity of 0.932 for one cycle without readout noise.
pub const CALIBRATED_BASE_GATE_ERROR: f64 = 0.04;
/// Phonons left after recooling when the readout scattered no photons.
pub const CALIBRATED_RESIDUAL_PHONONS: f64 = 0.10;

/// Phonon table built from [`MEASURED_PHONONS`] with the given dark-outcome residual.
pub fn measured_phonon_table(residual: f64) -> Vec<PhononEntry> {
    MEASURED_PHONONS
        .iter()
        .map(|&(r, m, mean)| PhononEntry::from_mean(r, m, mean, residual.min(mean)))
        .collect()
}

/// Channel on a 3-qubit register after reading out qubit 0.
pub fn noise_after_measurement(
    params: &NoiseParams,
    meas_duration_us: f64,
    outcome: Outcome,
) -> Result<QuantumChannel> {
    noise_after_measurement_on(params, meas_duration_us, outcome, 0, 3)
}

/// Idle dephasing on every qubit except `measured`, then gate depolarizing on all.
pub fn noise_after_measurement_on(
    params: &NoiseParams,
    meas_duration_us: f64,
    outcome: Outcome,
    measured: usize,
    n: usize,
) -> Result<QuantumChannel> {
    params.validate()?;
    if !(meas_duration_us.is_finite() && meas_duration_us >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "measurement duration must be >= 0, got {meas_duration_us}"
        )));
    }
    let p_deph = params.dephasing_probability(meas_duration_us);
    let p_dep = params.gate_error(meas_duration_us, outcome)?;
    let mut channel = QuantumChannel::identity(n)?;
    if p_deph > 0.0 {
        for q in (0..n).filter(|&q| q != measured) {
            channel = channel.then(&dephasing_channel(q, n, p_deph)?)?;
        }
    }
    if p_dep > 0.0 {
        for q in 0..n {
            channel = channel.then(&depolarizing_channel(q, n, p_dep)?)?;
        }
    }
    Ok(channel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::rng::seeded;
    use crate::state::DensityMatrix;

    #[test]
    fn noiseless_is_identity() {
        let ch =
            noise_after_measurement(&NoiseParams::noiseless(800.0), 200.0, Outcome::One).unwrap();
        let mut rng = seeded(0);
        let rho = DensityMatrix::random_mixed(3, &mut rng);
        assert!(max_abs_diff(ch.apply(&rho).unwrap().matrix(), rho.matrix()) < 1e-15);
        assert_eq!(ch.kraus_ops().len(), 1);
    }

    #[test]
    fn dephasing_at_t2_ln2_is_a_quarter() {
        let mut params = NoiseParams::noiseless(0.0);
        params.t2_us = Some(100.0 / std::f64::consts::LN_2);
        assert!((params.dephasing_probability(100.0) - 0.25).abs() < 1e-15);
        // The unmeasured qubits lose half their coherence, qubit 0 keeps it.
        let ch = noise_after_measurement(&params, 100.0, Outcome::Zero).unwrap();
        let plus3 = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(max_abs_diff(ch.apply(&plus3).unwrap().matrix(), plus3.matrix()) < 1e-15);
        let all_plus = DensityMatrix::new(crate::linalg::CMatrix::from_element(
            8,
            8,
            crate::linalg::c(0.125, 0.0),
        ))
        .unwrap();
        let out = ch.apply(&all_plus).unwrap();
        // |000><100| differs only on qubit 0; |000><010| only on qubit 1.
        assert!((out.matrix()[(0, 4)].re - 0.125).abs() < 1e-15);
        assert!((out.matrix()[(0, 2)].re - 0.0625).abs() < 1e-15);
        assert!((out.matrix()[(0, 3)].re - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn bright_outcome_heats_more() {
        let params = NoiseParams::calibrated();
        for &(_, meas, mean) in &MEASURED_PHONONS {
            let e = params.phonon_entry(meas).unwrap();
            assert!((e.mean() - mean).abs() < 1e-12);
            assert!(
                params.gate_error(meas, Outcome::One).unwrap()
                    >= params.gate_error(meas, Outcome::Zero).unwrap()
            );
        }
    }

    #[test]
    fn missing_phonon_entry_is_an_error_only_with_a_slope() {
        let params = NoiseParams::calibrated();
        assert!(matches!(
            noise_after_measurement(&params, 250.0, Outcome::One),
            Err(Error::MissingPhononEntry { .. })
        ));
        let mut flat = params.clone();
        flat.gate_error_per_phonon = 0.0;
        assert!(noise_after_measurement(&flat, 250.0, Outcome::One).is_ok());
    }

    #[test]
    fn gate_error_is_clamped() {
        let mut params = NoiseParams::calibrated();
        params.gate_error_per_phonon = 100.0;
        assert_eq!(params.gate_error(200.0, Outcome::One).unwrap(), 1.0);
        assert!(noise_after_measurement(&params, 200.0, Outcome::One).is_ok());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut params = NoiseParams::noiseless(800.0);
        params.base_gate_error = -0.1;
        assert!(noise_after_measurement(&params, 200.0, Outcome::Zero).is_err());
        let mut params = NoiseParams::noiseless(800.0);
        params.t2_us = Some(0.0);
        assert!(params.validate().is_err());
        assert!(
            noise_after_measurement(&NoiseParams::noiseless(800.0), -1.0, Outcome::Zero).is_err()
        );
    }

    #[test]
    fn json_round_trip() {
        let params = NoiseParams::calibrated();
        let text = serde_json::to_string(&params).unwrap();
        assert_eq!(serde_json::from_str::<NoiseParams>(&text).unwrap(), params);
    }
}
