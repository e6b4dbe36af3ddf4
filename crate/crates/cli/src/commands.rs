//! The four verbs. Each returns the paths it wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;
use unmeasure::channels::detection::photon_histogram;
use unmeasure::experiment::table;
use unmeasure::protocol::{
    information_test_inputs, outcome_information_test, Mode, OutcomeFilter, Pipeline,
};
use unmeasure::rng::{split_seed, task_rng};
use unmeasure::state::DensityMatrix;
use unmeasure::tomography::{all_settings, mle_reconstruct, simulate_counts};

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;
use crate::report::{self, Provenance, INFO_INPUT_LABELS, REFERENCE_P0};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RunTable,
    Histogram,
    DumpStates,
    InfoTest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::RunTable => "run-table",
            Command::Histogram => "histogram",
            Command::DumpStates => "dump-states",
            Command::InfoTest => "info-test",
        }
    }
}

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub exact: bool,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut config: ExperimentConfig) -> ExperimentConfig {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if self.exact {
            config.mode = Mode::Exact;
        }
        config
    }
}

/// Applies the overrides, validates, and runs `command` on a pool of
/// `threads` workers (the global pool when unset).
pub fn run(
    command: Command,
    config: ExperimentConfig,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, CliError> {
    let config = overrides.apply(config);
    config
        .validate()
        .map_err(|(field, message)| CliError::Config {
            path: PathBuf::from("<resolved>"),
            line: None,
            message: format!("{field}: {message}"),
        })?;
    std::fs::create_dir_all(&config.output_dir).map_err(|source| CliError::Io {
        path: config.output_dir.clone(),
        source,
    })?;
    let go = || match command {
        Command::RunTable => run_table(&config),
        Command::Histogram => histogram(&config),
        Command::DumpStates => dump_states(&config),
        Command::InfoTest => info_test(&config),
    };
    match overrides.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(go),
        None => go(),
    }
}

fn out(config: &ExperimentConfig, name: &str) -> PathBuf {
    config.output_dir.join(name)
}

fn write_formats(
    config: &ExperimentConfig,
    stem: &str,
    csv: impl FnOnce() -> String,
    json: impl FnOnce() -> String,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    if config.has(Format::Csv) {
        written.push(report::write(&out(config, &format!("{stem}.csv")), &csv())?);
    }
    if config.has(Format::Json) {
        written.push(report::write(
            &out(config, &format!("{stem}.json")),
            &json(),
        )?);
    }
    Ok(written)
}

pub fn run_table(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let provenance = Provenance::new(Command::RunTable.name(), config);
    let rows = table(&config.row_settings(), &config.points(), config.seed)?;
    #[derive(Serialize)]
    struct Body<'a> {
        rows: &'a [unmeasure::experiment::TableRow],
    }
    write_formats(
        config,
        "table",
        || report::table_csv(&provenance, &rows),
        || report::json(&provenance, Body { rows: &rows }),
    )
}

/// Photon counts for the configured input at the first readout duration.
///
/// Each shot is bright with the Born probability of projecting the encoded
/// readout qubit onto `|1>`, so the histogram is that two-Poisson mixture.
pub fn histogram(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let provenance = Provenance::new(Command::Histogram.name(), config);
    let (r, m) = config.points()[0];
    let s = config.scenario(r, m);
    let run = Pipeline::new(&s)?.exact(&s.input_state)?;
    let p_bright = run.branches[1].as_ref().map_or(0.0, |b| b.probability);
    let hist = photon_histogram(
        &s.readout(),
        p_bright,
        config.shots,
        &mut task_rng(config.seed, 0),
    );
    #[derive(Serialize)]
    struct Body<'a> {
        meas_duration_us: f64,
        p_bright: f64,
        histogram: &'a unmeasure::channels::detection::PhotonHistogram,
    }
    write_formats(
        config,
        "histogram",
        || report::histogram_csv(&provenance, &hist, p_bright),
        || {
            report::json(
                &provenance,
                Body {
                    meas_duration_us: m,
                    p_bright,
                    histogram: &hist,
                },
            )
        },
    )
}

#[derive(Debug, Clone, Serialize)]
struct NamedState {
    name: String,
    rho: DensityMatrix,
}

#[derive(Debug, Clone, Serialize)]
struct StatePoint {
    recool_duration_us: f64,
    meas_duration_us: f64,
    states: Vec<NamedState>,
}

/// Exact states of one sweep point: the encoded state, then the measured
/// and recovered states averaged over outcomes and per label.
fn exact_states(config: &ExperimentConfig, r: f64, m: f64) -> Result<Vec<NamedState>, CliError> {
    let s = config.scenario(r, m);
    let run = Pipeline::new(&s)?.exact(&s.input_state)?;
    let mut states = vec![NamedState {
        name: "rho_enc".into(),
        rho: run.rho_enc.clone(),
    }];
    for (filter, suffix) in [
        (OutcomeFilter::Both, "mean"),
        (OutcomeFilter::Only0, "0"),
        (OutcomeFilter::Only1, "1"),
    ] {
        if let Some(v) = run.view(filter) {
            states.push(NamedState {
                name: format!("rho_meas_{suffix}"),
                rho: v.rho_meas,
            });
            states.push(NamedState {
                name: format!("rho_rec_{suffix}"),
                rho: v.rho_rec,
            });
        }
    }
    Ok(states)
}

/// Sampled mode replaces each state by its maximum-likelihood
/// reconstruction from `shots` per Pauli setting.
fn reconstruct(
    config: &ExperimentConfig,
    states: Vec<NamedState>,
    seed: u64,
) -> Result<Vec<NamedState>, CliError> {
    use rayon::prelude::*;
    states
        .into_par_iter()
        .enumerate()
        .map(|(i, st)| {
            let mut rng = task_rng(seed, i as u64);
            let counts = simulate_counts(
                &st.rho,
                &all_settings(st.rho.n_qubits()),
                config.shots,
                &mut rng,
            )?;
            let rho =
                mle_reconstruct(&counts, config.mle_tol, config.mle_max_iter)?.into_converged()?;
            Ok(NamedState { name: st.name, rho })
        })
        .collect()
}

pub fn dump_states(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let provenance = Provenance::new(Command::DumpStates.name(), config);
    let points = config
        .points()
        .iter()
        .enumerate()
        .map(|(i, &(r, m))| {
            let states = exact_states(config, r, m)?;
            let states = match config.mode {
                Mode::Exact => states,
                Mode::Sampled => reconstruct(config, states, split_seed(config.seed, i as u64))?,
            };
            Ok(StatePoint {
                recool_duration_us: r,
                meas_duration_us: m,
                states,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut written = Vec::new();
    if config.has(Format::Json) {
        #[derive(Serialize)]
        struct Body<'a> {
            points: &'a [StatePoint],
        }
        let text = report::json(&provenance, Body { points: &points });
        written.push(report::write(&out(config, "states.json"), &text)?);
    }
    if config.has(Format::Csv) {
        for p in &points {
            for st in &p.states {
                let file = format!(
                    "{}_r{}_m{}.csv",
                    st.name, p.recool_duration_us, p.meas_duration_us
                );
                let text = report::magnitude_csv(&provenance, &st.name, &st.rho);
                written.push(report::write(&out(config, &file), &text)?);
            }
        }
    }
    Ok(written)
}

/// Outcome-0 frequencies for the four test inputs at the first sweep point.
pub fn info_test(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let provenance = Provenance::new(Command::InfoTest.name(), config);
    let (r, m) = config.points()[0];
    let estimates = outcome_information_test(
        &information_test_inputs(),
        &config.scenario(r, m),
        config.mode,
    )?;
    let all_within = estimates.iter().all(|e| e.within(0.5, 3.0));
    #[derive(Serialize)]
    struct Row<'a> {
        input: &'a str,
        #[serde(flatten)]
        estimate: unmeasure::protocol::InfoEstimate,
        within_3sigma: bool,
        reference_p0: f64,
    }
    #[derive(Serialize)]
    struct Body<'a> {
        all_within_3sigma: bool,
        rows: Vec<Row<'a>>,
    }
    let rows = estimates
        .iter()
        .zip(INFO_INPUT_LABELS)
        .zip(REFERENCE_P0)
        .map(|((e, input), reference_p0)| Row {
            input,
            estimate: *e,
            within_3sigma: e.within(0.5, 3.0),
            reference_p0,
        })
        .collect();
    write_formats(
        config,
        "info_test",
        || report::info_csv(&provenance, &estimates, all_within),
        || {
            report::json(
                &provenance,
                Body {
                    all_within_3sigma: all_within,
                    rows,
                },
            )
        },
    )
}

/// Loads `path` and runs `command`.
pub fn run_file(
    command: Command,
    path: &Path,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, CliError> {
    run(command, ExperimentConfig::load(path)?, overrides)
}
