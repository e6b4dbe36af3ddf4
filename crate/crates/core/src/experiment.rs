//! Fidelity tables over (recool, readout) duration pairs.
//!
//! Each row reports, for the outcome-averaged data and for each readout label:
//!
//! * the process fidelity of the channel from the input qubit to `rho_sys`
//!   against the ideal channel (identity, or `U` if one is set);
//! * the fidelity of `rho_rec` with `rho_enc`, averaged over the four
//!   standard inputs.
//!
//! In exact mode both come straight from the branch states. In sampled mode
//! every output is measured in all Pauli settings with `shots` per setting,
//! reconstructed by maximum likelihood, and the spread comes from a bootstrap.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::channels::detection::detection_error;
use crate::channels::noise::NoiseParams;
use crate::channels::Outcome;
use crate::error::{Error, Result};
use crate::protocol::{ExactRun, Mode, OutcomeFilter, Pipeline, Scenario};
use crate::rng::{split_seed, task_rng};
use crate::state::{uhlmann_fidelity, DensityMatrix};
use crate::tomography::bootstrap::bootstrap;
use crate::tomography::counts::{all_settings, sample_multinomial, CountRecord, Setting};
use crate::tomography::mle::{mle_reconstruct, MleOptions};
use crate::tomography::process::{chi_from_counts, process_fidelity, standard_inputs, ChiMatrix};

/// Value with its one-sigma error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stddev: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stddev: 0.0 }
    }
}

/// Fidelities for the averaged data, label 1 and label 0 (the table's column order).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FidelityTriple {
    pub mean: Option<Estimate>,
    pub one: Option<Estimate>,
    pub zero: Option<Estimate>,
}

impl FidelityTriple {
    fn get_mut(&mut self, filter: OutcomeFilter) -> &mut Option<Estimate> {
        match filter {
            OutcomeFilter::Both => &mut self.mean,
            OutcomeFilter::Only1 => &mut self.one,
            OutcomeFilter::Only0 => &mut self.zero,
        }
    }

    pub fn get(&self, filter: OutcomeFilter) -> Option<Estimate> {
        match filter {
            OutcomeFilter::Both => self.mean,
            OutcomeFilter::Only1 => self.one,
            OutcomeFilter::Only0 => self.zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub recool_duration_us: f64,
    pub meas_duration_us: f64,
    pub detection_error: f64,
    /// Outcome-averaged phonon number, when the table has an entry.
    pub mean_phonons: Option<f64>,
    pub process: FidelityTriple,
    pub state: FidelityTriple,
}

/// Everything about a row except its durations.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSettings {
    /// Template; input state, readout and recool durations are overwritten.
    pub scenario: Scenario,
    pub mode: Mode,
    pub bootstrap_resamples: usize,
    pub mle: MleOptions,
}

impl RowSettings {
    pub fn scenario_for(&self, recool_us: f64, meas_us: f64) -> Scenario {
        let mut s = self.scenario.clone();
        s.meas_duration_us = meas_us;
        s.noise.recool_duration_us = recool_us;
        s
    }
}

/// Bucket used in the detection-error column.
pub fn detection_error_label(error: f64) -> String {
    if error < 0.005 {
        "<0.5%".to_string()
    } else {
        format!("{:.0}%", 100.0 * error)
    }
}

fn ideal_chi(s: &Scenario) -> Result<ChiMatrix> {
    match &s.u_unitary {
        Some(u) => ChiMatrix::from_unitary(u),
        None => Ok(ChiMatrix::identity()),
    }
}

/// One table row. `seed` drives every sampled quantity of the row.
pub fn table_row(
    settings: &RowSettings,
    recool_us: f64,
    meas_us: f64,
    seed: u64,
) -> Result<TableRow> {
    let s = settings.scenario_for(recool_us, meas_us);
    let pipeline = Pipeline::new(&s)?;
    let runs: Vec<ExactRun> = standard_inputs()
        .iter()
        .map(|k| pipeline.exact(k))
        .collect::<Result<_>>()?;
    let (process, state) = match settings.mode {
        Mode::Exact => exact_fidelities(&s, &runs)?,
        Mode::Sampled => sampled_fidelities(settings, &s, &pipeline, &runs, seed)?,
    };
    Ok(TableRow {
        recool_duration_us: recool_us,
        meas_duration_us: meas_us,
        detection_error: detection_error(&s.readout()),
        mean_phonons: s.noise.phonon_entry(meas_us).map(|e| e.mean()),
        process,
        state,
    })
}

/// Whole sweep in row order; row `i` uses the seed split from `seed` at `i`.
pub fn table(settings: &RowSettings, points: &[(f64, f64)], seed: u64) -> Result<Vec<TableRow>> {
    use rayon::prelude::*;
    points
        .par_iter()
        .enumerate()
        .map(|(i, &(r, m))| table_row(settings, r, m, split_seed(seed, i as u64)))
        .collect()
}

fn exact_fidelities(s: &Scenario, runs: &[ExactRun]) -> Result<(FidelityTriple, FidelityTriple)> {
    let ideal = ideal_chi(s)?;
    let mut process = FidelityTriple::default();
    let mut state = FidelityTriple::default();
    for filter in OutcomeFilter::ALL {
        let views: Option<Vec<_>> = runs.iter().map(|r| r.view(filter)).collect();
        let Some(views) = views else { continue };
        let outputs: [DensityMatrix; 4] = views
            .iter()
            .map(|v| v.rho_sys.clone())
            .collect::<Vec<_>>()
            .try_into()
            .expect("four inputs");
        let chi = ChiMatrix::from_outputs(&outputs)?;
        *process.get_mut(filter) = Some(Estimate::exact(process_fidelity(&chi, &ideal)?));
        let mut acc = 0.0;
        for (run, v) in runs.iter().zip(&views) {
            acc += uhlmann_fidelity(&run.rho_enc, &v.rho_rec)?;
        }
        *state.get_mut(filter) = Some(Estimate::exact(acc / runs.len() as f64));
    }
    Ok((process, state))
}

/// Counts split by readout label for one input.
struct LabelledCounts {
    sys: [Vec<CountRecord>; 2],
    rec: [Vec<CountRecord>; 2],
}

impl LabelledCounts {
    fn select(records: &[Vec<CountRecord>; 2], filter: OutcomeFilter) -> Result<Vec<CountRecord>> {
        match filter.outcome() {
            Some(l) => Ok(records[l.bit() as usize].clone()),
            None => records[0]
                .iter()
                .zip(&records[1])
                .map(|(a, b)| a.merged(b))
                .collect(),
        }
    }
}

/// Per setting, draw how many shots carry each label, then the outcomes of
/// each group from the labelled state.
fn simulate_labelled<R: rand::Rng + ?Sized>(
    run: &ExactRun,
    settings: &[Setting],
    shots: u64,
    pick: fn(&crate::protocol::BranchView) -> &DensityMatrix,
    rng: &mut R,
) -> Result<[Vec<CountRecord>; 2]> {
    let p0 = run.label_probability(Outcome::Zero).clamp(0.0, 1.0);
    let views = [
        run.view(OutcomeFilter::Only0),
        run.view(OutcomeFilter::Only1),
    ];
    let mut out: [Vec<CountRecord>; 2] = Default::default();
    for setting in settings {
        let n0 = Binomial::new(shots, p0).expect("p0 in [0, 1]").sample(rng);
        for (label, n) in [(0usize, n0), (1usize, shots - n0)] {
            let d = crate::linalg::dim(setting.n_qubits());
            let counts = match &views[label] {
                Some(v) if n > 0 => sample_multinomial(&setting.probabilities(pick(v))?, n, rng),
                _ => vec![0; d],
            };
            out[label].push(CountRecord::new(setting.clone(), counts)?);
        }
    }
    Ok(out)
}

fn sampled_fidelities(
    settings: &RowSettings,
    s: &Scenario,
    pipeline: &Pipeline,
    runs: &[ExactRun],
    seed: u64,
) -> Result<(FidelityTriple, FidelityTriple)> {
    let ideal = ideal_chi(s)?;
    let sys_settings = all_settings(1);
    let rec_settings = all_settings(pipeline.n_qubits());
    let mut data = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let mut rng = task_rng(seed, i as u64);
        data.push(LabelledCounts {
            sys: simulate_labelled(run, &sys_settings, s.shots, |v| &v.rho_sys, &mut rng)?,
            rec: simulate_labelled(run, &rec_settings, s.shots, |v| &v.rho_rec, &mut rng)?,
        });
    }
    let mle = settings.mle;
    let n_sys = sys_settings.len();
    let n_rec = rec_settings.len();
    let enc: Vec<DensityMatrix> = runs.iter().map(|r| r.rho_enc.clone()).collect();

    let proc_stat = |flat: &[CountRecord]| -> Result<f64> {
        let groups: [Vec<CountRecord>; 4] =
            std::array::from_fn(|i| flat[i * n_sys..(i + 1) * n_sys].to_vec());
        process_fidelity(&chi_from_counts(&groups, mle)?, &ideal)
    };
    let state_stat = |flat: &[CountRecord]| -> Result<f64> {
        let mut acc = 0.0;
        for (i, rho_enc) in enc.iter().enumerate() {
            let rho = mle_reconstruct(&flat[i * n_rec..(i + 1) * n_rec], mle.tol, mle.max_iter)?
                .into_converged()?;
            acc += uhlmann_fidelity(rho_enc, &rho)?;
        }
        Ok(acc / enc.len() as f64)
    };

    let mut process = FidelityTriple::default();
    let mut state = FidelityTriple::default();
    for (k, filter) in OutcomeFilter::ALL.into_iter().enumerate() {
        let mut sys = Vec::new();
        let mut rec = Vec::new();
        for d in &data {
            sys.extend(LabelledCounts::select(&d.sys, filter)?);
            rec.extend(LabelledCounts::select(&d.rec, filter)?);
        }
        // A label no shot carried for some input has nothing to reconstruct.
        let empty = |records: &[CountRecord], per: usize| {
            records
                .chunks(per)
                .any(|chunk| chunk.iter().all(|r| r.shots() == 0))
        };
        if empty(&sys, n_sys) || empty(&rec, n_rec) {
            continue;
        }
        let mut rng = task_rng(seed, 100 + k as u64);
        *process.get_mut(filter) = Some(estimate(
            &sys,
            &proc_stat,
            settings.bootstrap_resamples,
            &mut rng,
        )?);
        *state.get_mut(filter) = Some(estimate(
            &rec,
            &state_stat,
            settings.bootstrap_resamples,
            &mut rng,
        )?);
    }
    Ok((process, state))
}

fn estimate<F>(
    counts: &[CountRecord],
    stat: &F,
    resamples: usize,
    rng: &mut crate::rng::SimRng,
) -> Result<Estimate>
where
    F: Fn(&[CountRecord]) -> Result<f64> + Sync,
{
    let value = stat(counts)?;
    let spread = bootstrap(counts, resamples, stat, rng)?;
    Ok(Estimate {
        value,
        stddev: spread.stddev,
    })
}

/// Outcome-averaged state fidelity of one row in exact mode.
pub fn exact_state_fidelity(template: &Scenario, recool_us: f64, meas_us: f64) -> Result<f64> {
    let settings = RowSettings {
        scenario: template.clone(),
        mode: Mode::Exact,
        bootstrap_resamples: 0,
        mle: MleOptions::default(),
    };
    let row = table_row(&settings, recool_us, meas_us, 0)?;
    row.state
        .mean
        .map(|e| e.value)
        .ok_or_else(|| Error::InvalidParameter("no outcome-averaged state".into()))
}

/// Dephasing time that makes the outcome-averaged state fidelity of the
/// (`recool_us`, `meas_us`) row equal `target`, everything else as in
/// `template`. Bisection in `ln T2` over [10 us, 10 s].
pub fn fit_t2(template: &Scenario, recool_us: f64, meas_us: f64, target: f64) -> Result<f64> {
    let f_at = |t2: f64| -> Result<f64> {
        let mut s = template.clone();
        s.noise = NoiseParams {
            t2_us: Some(t2),
            ..s.noise.clone()
        };
        exact_state_fidelity(&s, recool_us, meas_us)
    };
    let (mut lo, mut hi) = (10f64.ln(), 1e7f64.ln());
    let (f_lo, f_hi) = (f_at(lo.exp())?, f_at(hi.exp())?);
    if !(f_lo <= target && target <= f_hi) {
        return Err(Error::InvalidParameter(format!(
            "target {target} outside the reachable range [{f_lo:.4}, {f_hi:.4}]"
        )));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f_at(mid.exp())? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
