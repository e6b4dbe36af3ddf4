//! Photon-count readout.
//!
//! A qubit projected onto `|1>` scatters photons and the detector registers a
//! Poisson number of counts with mean `bright_rate * duration`; a qubit in `|0>`
//! only sees background at `dark_rate * duration`. Counts at or above the
//! threshold are read as `|1>`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    /// Expected counts per microsecond after projection onto `|1>`.
    pub bright_rate_per_us: f64,
    /// Expected background counts per microsecond after projection onto `|0>`.
    pub dark_rate_per_us: f64,
    /// Smallest count read as `|1>`.
    pub threshold: u32,
    pub duration_us: f64,
}

impl Default for DetectionModel {
    /// 0.06 counts/us gives a mean of 12 counts in 200 us.
    fn default() -> Self {
        Self {
            bright_rate_per_us: 0.06,
            dark_rate_per_us: 0.0,
            threshold: 3,
            duration_us: 200.0,
        }
    }
}

impl DetectionModel {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !finite_nonneg(self.bright_rate_per_us) || !finite_nonneg(self.dark_rate_per_us) {
            return Err(Error::InvalidParameter(
                "detection rates must be finite and >= 0".into(),
            ));
        }
        if self.threshold < 1 {
            return Err(Error::InvalidParameter(
                "detection threshold must be >= 1".into(),
            ));
        }
        if !(self.duration_us.is_finite() && self.duration_us > 0.0) {
            return Err(Error::InvalidParameter(
                "detection duration must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn with_duration(&self, duration_us: f64) -> Self {
        Self {
            duration_us,
            ..self.clone()
        }
    }

    pub fn bright_mean(&self) -> f64 {
        self.bright_rate_per_us * self.duration_us
    }

    pub fn dark_mean(&self) -> f64 {
        self.dark_rate_per_us * self.duration_us
    }

    pub fn classify(&self, counts: u64) -> bool {
        counts >= u64::from(self.threshold)
    }
}

/// `P(K = k)` for `K ~ Poisson(mean)`.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    (k as f64 * mean.ln() - mean - ln_fact).exp()
}

/// `P(K <= k)` by direct summation of the mass function.
pub fn poisson_cdf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return 1.0;
    }
    let ln_mean = mean.ln();
    let mut ln_term = -mean;
    let mut total = ln_term.exp();
    for j in 1..=k {
        ln_term += ln_mean - (j as f64).ln();
        total += ln_term.exp();
    }
    total.min(1.0)
}

/// Misclassification probability summed over both preparations:
/// `P(bright count < threshold) + P(dark count >= threshold)`.
pub fn detection_error(model: &DetectionModel) -> f64 {
    let below = u64::from(model.threshold) - 1;
    let missed_bright = poisson_cdf(below, model.bright_mean());
    let false_bright = 1.0 - poisson_cdf(below, model.dark_mean());
    (missed_bright + false_bright).clamp(0.0, 1.0)
}

/// Photon counts for one readout of a qubit projected bright or dark.
pub fn sample_photon_counts<R: Rng + ?Sized>(
    model: &DetectionModel,
    projected_bright: bool,
    rng: &mut R,
) -> u64 {
    let mean = if projected_bright {
        model.bright_mean()
    } else {
        model.dark_mean()
    };
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}

/// Count histogram, index = number of photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonHistogram {
    pub bins: Vec<u64>,
    pub threshold: u32,
    pub shots: u64,
}

impl PhotonHistogram {
    pub fn from_counts(counts: impl IntoIterator<Item = u64>, threshold: u32) -> Self {
        let mut bins: Vec<u64> = Vec::new();
        let mut shots = 0;
        for k in counts {
            let k = k as usize;
            if bins.len() <= k {
                bins.resize(k + 1, 0);
            }
            bins[k] += 1;
            shots += 1;
        }
        Self {
            bins,
            threshold,
            shots,
        }
    }

    /// Fraction of shots read as bright.
    pub fn bright_fraction(&self) -> f64 {
        let t = self.threshold as usize;
        let bright: u64 = self.bins.iter().skip(t).sum();
        bright as f64 / self.shots.max(1) as f64
    }

    /// Most populated bin at or above `from`.
    pub fn mode_from(&self, from: usize) -> Option<usize> {
        self.bins
            .iter()
            .enumerate()
            .skip(from)
            .max_by_key(|&(k, &n)| (n, std::cmp::Reverse(k)))
            .map(|(k, _)| k)
    }
}

/// Counts for `shots` readouts, each bright with probability `p_bright`.
pub fn photon_histogram<R: Rng + ?Sized>(
    model: &DetectionModel,
    p_bright: f64,
    shots: u64,
    rng: &mut R,
) -> PhotonHistogram {
    let counts: Vec<u64> = (0..shots)
        .map(|_| {
            let bright = rng.random::<f64>() < p_bright;
            sample_photon_counts(model, bright, rng)
        })
        .collect();
    PhotonHistogram::from_counts(counts, model.threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn model(bright_mean: f64, threshold: u32) -> DetectionModel {
        DetectionModel {
            bright_rate_per_us: bright_mean / 100.0,
            dark_rate_per_us: 0.0,
            threshold,
            duration_us: 100.0,
        }
    }

    #[test]
    fn error_at_mean_twelve() {
        // e^-12 (1 + 12 + 72)
        let expected = (-12.0f64).exp() * 85.0;
        let e = detection_error(&model(12.0, 3));
        assert!((e - expected).abs() < 1e-15);
        assert!((e - 5.22e-4).abs() < 1e-6);
        assert!(e < 0.005);
    }

    #[test]
    fn error_at_mean_six() {
        // e^-6 (1 + 6 + 18)
        let expected = (-6.0f64).exp() * 25.0;
        let e = detection_error(&model(6.0, 3));
        assert!((e - expected).abs() < 1e-15);
        assert!((e - 6.2e-2).abs() < 1e-3);
    }

    #[test]
    fn threshold_one_is_zero_count_probability() {
        for mean in [5.0, 20.0, 40.0] {
            let e = detection_error(&model(mean, 1));
            assert!((e - (-mean).exp()).abs() < 1e-15 * (-mean).exp().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn dark_counts_add_false_positives() {
        let mut m = model(12.0, 3);
        m.dark_rate_per_us = 0.01;
        let dark = 1.0 - poisson_cdf(2, 1.0);
        let bright = poisson_cdf(2, 12.0);
        assert!((detection_error(&m) - (dark + bright)).abs() < 1e-15);
    }

    #[test]
    fn cdf_matches_pmf_sum() {
        for mean in [0.3, 2.0, 12.0, 50.0] {
            for k in [0, 1, 5, 20] {
                let s: f64 = (0..=k).map(|j| poisson_pmf(j, mean)).sum();
                assert!((poisson_cdf(k, mean) - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dark_readout_without_background_is_zero() {
        let m = model(12.0, 3);
        let mut rng = seeded(0);
        assert!((0..1000).all(|_| sample_photon_counts(&m, false, &mut rng) == 0));
    }

    #[test]
    fn bright_sample_mean() {
        let m = model(12.0, 3);
        let mut rng = seeded(1);
        let n = 100_000;
        let total: u64 = (0..n)
            .map(|_| sample_photon_counts(&m, true, &mut rng))
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 12.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn mixed_histogram_is_bimodal() {
        let m = model(12.0, 3);
        let mut rng = seeded(2);
        let h = photon_histogram(&m, 0.5, 10_000, &mut rng);
        assert_eq!(h.shots, 10_000);
        assert_eq!(h.mode_from(0), Some(0));
        let bright_mode = h.mode_from(3).unwrap();
        assert!((10..=13).contains(&bright_mode), "{bright_mode}");
        // The valley between the two modes sits at the threshold region.
        let valley = (1..bright_mode).min_by_key(|&k| h.bins[k]).unwrap();
        assert!(valley <= 4, "{valley}");
        assert!(h.bins[valley] < h.bins[0] / 20);
        assert!((h.bright_fraction() - 0.5).abs() < 0.02);
    }

    #[test]
    fn validation() {
        assert!(DetectionModel::default().validate().is_ok());
        let mut m = DetectionModel::default();
        m.threshold = 0;
        assert!(m.validate().is_err());
        let mut m = DetectionModel::default();
        m.duration_us = 0.0;
        assert!(m.validate().is_err());
        let mut m = DetectionModel::default();
        m.dark_rate_per_us = -1.0;
        assert!(m.validate().is_err());
    }
}
