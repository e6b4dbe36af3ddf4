//! Non-parametric bootstrap over count histograms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::{sample_multinomial, CountRecord};
use crate::error::{Error, Result};
use crate::rng::task_rng;

pub const MIN_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mean: f64,
    /// Sample standard deviation (one sigma).
    pub stddev: f64,
    /// Resamples whose statistic failed and were left out.
    pub excluded: usize,
    pub resamples: usize,
}

/// Redraws each histogram multinomially at its own shot count.
pub fn resample<R: Rng + ?Sized>(counts: &[CountRecord], rng: &mut R) -> Vec<CountRecord> {
    counts
        .iter()
        .map(|r| {
            let freq = r.frequencies();
            CountRecord::new(
                r.setting().clone(),
                sample_multinomial(&freq, r.shots(), rng),
            )
            .expect("same setting and outcome count")
        })
        .collect()
}

/// Mean and spread of `statistic` over `resamples` redraws of `counts`.
///
/// Resample `i` uses a generator split from one root seed drawn from `rng`,
/// so the result does not depend on the thread schedule.
pub fn bootstrap<R, F>(
    counts: &[CountRecord],
    resamples: usize,
    statistic: F,
    rng: &mut R,
) -> Result<BootstrapResult>
where
    R: Rng + ?Sized,
    F: Fn(&[CountRecord]) -> Result<f64> + Sync,
{
    if resamples < MIN_RESAMPLES {
        return Err(Error::Bootstrap(format!(
            "{resamples} resamples requested, at least {MIN_RESAMPLES} required"
        )));
    }
    let root: u64 = rng.random();
    let values: Vec<Option<f64>> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut r = task_rng(root, i as u64);
            let drawn = resample(counts, &mut r);
            statistic(&drawn).ok().filter(|v| v.is_finite())
        })
        .collect();
    let kept: Vec<f64> = values.iter().flatten().copied().collect();
    let excluded = resamples - kept.len();
    if kept.len() < 2 {
        return Err(Error::Bootstrap(format!(
            "{excluded} of {resamples} resamples failed"
        )));
    }
    let n = kept.len() as f64;
    // Shifted by the first value so a constant statistic has exactly zero spread.
    let shift = kept[0];
    let mean = shift + kept.iter().map(|v| v - shift).sum::<f64>() / n;
    let var = kept.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(BootstrapResult {
        mean,
        stddev: var.sqrt(),
        excluded,
        resamples,
    })
}
