//! The full reversal cycle on one system qubit.
//!
//! 1. encode `input (x) |00>` into the code space (`rho_enc`);
//! 2. read out qubit 0 while qubits 1 and 2 are hidden;
//! 3. idle dephasing and gate noise (`rho_meas`);
//! 4. decode and correct, keep qubit 0 (`rho_sys`);
//! 5. replace the ancillas with fresh `|00>`;
//! 6. encode again (`rho_rec`).
//!
//! Steps 2 and 3 branch on the outcome. [`ExactRun`] carries both branches
//! with their probabilities so averaged and post-selected states can be formed
//! without sampling; [`run_once`] samples a single shot.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::detection::{poisson_cdf, sample_photon_counts, DetectionModel};
use crate::channels::noise::{noise_after_measurement_on, NoiseParams};
use crate::channels::{measure_qubit, project, Outcome, QuantumChannel};
use crate::circuits::{build_encoder, decoder_for, EncoderKind};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng::task_rng;
use crate::state::{DensityMatrix, Ket, Unitary};
use crate::tomography::process::{standard_inputs, ChiMatrix};

/// How the system qubit is stored during the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    #[default]
    Textbook,
    MolmerSorensen,
    /// No code: the system qubit itself is read out.
    Bare,
}

impl Encoding {
    pub fn encoder_kind(self) -> Option<EncoderKind> {
        match self {
            Encoding::Textbook => Some(EncoderKind::Textbook),
            Encoding::MolmerSorensen => Some(EncoderKind::MolmerSorensen),
            Encoding::Bare => None,
        }
    }
}

/// Which outcome a shot is filed under.
///
/// The correction itself never looks at the outcome. The label only decides
/// how shots are grouped in post-selected statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelPolicy {
    /// The projection that actually happened.
    #[default]
    Projection,
    /// The photon-count classification, including readout errors.
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeFilter {
    Both,
    Only0,
    Only1,
}

impl OutcomeFilter {
    pub const ALL: [OutcomeFilter; 3] = [
        OutcomeFilter::Both,
        OutcomeFilter::Only0,
        OutcomeFilter::Only1,
    ];

    pub fn outcome(self) -> Option<Outcome> {
        match self {
            OutcomeFilter::Both => None,
            OutcomeFilter::Only0 => Some(Outcome::Zero),
            OutcomeFilter::Only1 => Some(Outcome::One),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub input_state: Ket,
    pub meas_duration_us: f64,
    /// Rates and threshold; the duration is taken from `meas_duration_us`.
    pub detection: DetectionModel,
    /// Holds the recooling duration.
    pub noise: NoiseParams,
    pub shots: u64,
    pub seed: u64,
    pub d_unitary: Option<Unitary>,
    pub u_unitary: Option<Unitary>,
    pub encoding: Encoding,
    pub label_policy: LabelPolicy,
    /// Turning this off re-encodes the decoded register as is.
    pub reset_ancillas: bool,
}

impl Scenario {
    /// Noise-free defaults: 200 us readout, 800 us recooling, 10^4 shots.
    pub fn new(input_state: Ket) -> Self {
        Self {
            input_state,
            meas_duration_us: 200.0,
            detection: DetectionModel::default(),
            noise: NoiseParams::noiseless(800.0),
            shots: 10_000,
            seed: 0,
            d_unitary: None,
            u_unitary: None,
            encoding: Encoding::Textbook,
            label_policy: LabelPolicy::Projection,
            reset_ancillas: true,
        }
    }

    pub fn with_input(&self, input_state: Ket) -> Self {
        Self {
            input_state,
            ..self.clone()
        }
    }

    pub fn recool_duration_us(&self) -> f64 {
        self.noise.recool_duration_us
    }

    /// Detection model for this readout duration.
    pub fn readout(&self) -> DetectionModel {
        self.detection.with_duration(self.meas_duration_us)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_state.n_qubits() != 1 {
            return Err(Error::DimensionMismatch(self.input_state.n_qubits(), 1));
        }
        if self.shots < 1 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        for (name, v) in [
            ("meas_duration_us", self.meas_duration_us),
            ("recool_duration_us", self.recool_duration_us()),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        self.readout().validate()?;
        self.noise.validate()
    }

    /// Probability that a shot projected onto `outcome` is labelled `label`.
    pub fn label_probability(&self, outcome: Outcome, label: Outcome) -> f64 {
        let p_one = match self.label_policy {
            LabelPolicy::Projection => f64::from(outcome.bit()),
            LabelPolicy::Threshold => {
                let model = self.readout();
                let mean = if outcome.is_bright() {
                    model.bright_mean()
                } else {
                    model.dark_mean()
                };
                1.0 - poisson_cdf(u64::from(model.threshold) - 1, mean)
            }
        };
        match label {
            Outcome::One => p_one,
            Outcome::Zero => 1.0 - p_one,
        }
    }

    fn label_for(&self, outcome: Outcome, photon_counts: u64) -> Outcome {
        match self.label_policy {
            LabelPolicy::Projection => outcome,
            LabelPolicy::Threshold => detected(&self.readout(), photon_counts),
        }
    }
}

fn detected(model: &DetectionModel, counts: u64) -> Outcome {
    if model.classify(counts) {
        Outcome::One
    } else {
        Outcome::Zero
    }
}

/// Register states after one branch of the readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub outcome: Outcome,
    pub probability: f64,
    pub rho_meas: DensityMatrix,
    pub rho_sys: DensityMatrix,
    pub rho_rec: DensityMatrix,
}

/// Fixed operators of a scenario.
#[derive(Debug, Clone)]
pub struct Pipeline {
    scenario: Scenario,
    n: usize,
    encoder: Option<CMatrix>,
    decoder: Option<CMatrix>,
    /// `U^dagger` on the system qubit before re-encoding.
    undo_u: Option<CMatrix>,
    noise: [QuantumChannel; 2],
}

impl Pipeline {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let (n, encoder, decoder) = match scenario.encoding.encoder_kind() {
            Some(kind) => {
                let enc = build_encoder(kind, scenario.d_unitary.as_ref())?;
                let dec = decoder_for(
                    kind,
                    scenario.d_unitary.as_ref(),
                    scenario.u_unitary.as_ref(),
                )?;
                (3, Some(enc.unitary()), Some(dec.unitary()))
            }
            None => {
                if scenario.d_unitary.is_some() || scenario.u_unitary.is_some() {
                    return Err(Error::InvalidParameter(
                        "D and U need an encoded register".into(),
                    ));
                }
                (1, None, None)
            }
        };
        let undo_u = scenario
            .u_unitary
            .as_ref()
            .map(|u| linalg::embed(u.dagger().matrix(), 0, n));
        let noise_for =
            |o| noise_after_measurement_on(&scenario.noise, scenario.meas_duration_us, o, 0, n);
        let noise = [noise_for(Outcome::Zero)?, noise_for(Outcome::One)?];
        Ok(Self {
            scenario: scenario.clone(),
            n,
            encoder,
            decoder,
            undo_u,
            noise,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Register size: 3 with a code, 1 without.
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Step 1.
    pub fn encode(&self, input: &Ket) -> Result<DensityMatrix> {
        let rho_in = DensityMatrix::from_ket(input);
        match &self.encoder {
            None => Ok(rho_in),
            Some(enc) => {
                let ancillas = DensityMatrix::basis(2, 0)?;
                rho_in.tensor(&ancillas)?.conjugate(enc)
            }
        }
    }

    /// Steps 3 to 6 for a register already projected onto `outcome`.
    pub fn branch_from(
        &self,
        projected: &DensityMatrix,
        outcome: Outcome,
        probability: f64,
    ) -> Result<Branch> {
        let rho_meas = self.noise[outcome.bit() as usize].apply(projected)?;
        let (rho_sys, rho_rec) = match (&self.encoder, &self.decoder) {
            (Some(enc), Some(dec)) => {
                let decoded = rho_meas.conjugate(dec)?;
                let rho_sys = decoded.partial_trace(&[0])?;
                let mut prepared = if self.scenario.reset_ancillas {
                    rho_sys.tensor(&DensityMatrix::basis(2, 0)?)?
                } else {
                    decoded
                };
                if let Some(v) = &self.undo_u {
                    prepared = prepared.conjugate(v)?;
                }
                (rho_sys, prepared.conjugate(enc)?)
            }
            _ => (rho_meas.clone(), rho_meas.clone()),
        };
        Ok(Branch {
            outcome,
            probability,
            rho_meas,
            rho_sys,
            rho_rec,
        })
    }

    /// Both readout branches of `input`, without sampling.
    pub fn exact(&self, input: &Ket) -> Result<ExactRun> {
        let rho_enc = self.encode(input)?;
        let mut branches = [None, None];
        for outcome in Outcome::BOTH {
            if let Some((projected, p)) = project(&rho_enc, 0, outcome)? {
                branches[outcome.bit() as usize] = Some(self.branch_from(&projected, outcome, p)?);
            }
        }
        Ok(ExactRun {
            rho_enc,
            branches,
            label_matrix: label_matrix(&self.scenario),
        })
    }
}

fn label_matrix(s: &Scenario) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for o in Outcome::BOTH {
        for l in Outcome::BOTH {
            m[o.bit() as usize][l.bit() as usize] = s.label_probability(o, l);
        }
    }
    m
}

/// States and probability of one view of an [`ExactRun`].
#[derive(Debug, Clone, PartialEq)]
pub struct BranchView {
    pub probability: f64,
    pub rho_meas: DensityMatrix,
    pub rho_sys: DensityMatrix,
    pub rho_rec: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactRun {
    pub rho_enc: DensityMatrix,
    /// Indexed by outcome bit; `None` for a branch of vanishing probability.
    pub branches: [Option<Branch>; 2],
    /// `label_matrix[outcome][label]`.
    label_matrix: [[f64; 2]; 2],
}

impl ExactRun {
    /// Probability that a shot is labelled `label`.
    pub fn label_probability(&self, label: Outcome) -> f64 {
        self.branches
            .iter()
            .flatten()
            .map(|b| {
                b.probability * self.label_matrix[b.outcome.bit() as usize][label.bit() as usize]
            })
            .sum()
    }

    /// Outcome-averaged states (`Both`) or the states of shots carrying one
    /// label, renormalized. `None` when no shot carries that label.
    pub fn view(&self, filter: OutcomeFilter) -> Option<BranchView> {
        let weights: Vec<(f64, &Branch)> = self
            .branches
            .iter()
            .flatten()
            .map(|b| {
                let w = match filter.outcome() {
                    None => b.probability,
                    Some(l) => {
                        b.probability
                            * self.label_matrix[b.outcome.bit() as usize][l.bit() as usize]
                    }
                };
                (w, b)
            })
            .filter(|(w, _)| *w > 0.0)
            .collect();
        let total: f64 = weights.iter().map(|(w, _)| w).sum();
        if total < crate::tolerance::Tolerances::DEFAULT.min_branch_probability {
            return None;
        }
        let mix = |pick: fn(&Branch) -> &DensityMatrix| {
            let d = pick(weights[0].1).dim();
            let m = weights.iter().fold(CMatrix::zeros(d, d), |acc, (w, b)| {
                acc + pick(b).matrix().scale(*w)
            });
            DensityMatrix::from_unnormalized(m)
        };
        Some(BranchView {
            probability: total,
            rho_meas: mix(|b| &b.rho_meas),
            rho_sys: mix(|b| &b.rho_sys),
            rho_rec: mix(|b| &b.rho_rec),
        })
    }
}

/// One sampled shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// The projection that happened.
    pub outcome: Outcome,
    /// Threshold classification of the photon counts.
    pub detected: Outcome,
    /// The label under the scenario's policy.
    pub label: Outcome,
    pub photon_counts: u64,
    /// Born probability of `outcome`.
    pub probability: f64,
    pub rho_enc: DensityMatrix,
    pub rho_meas: DensityMatrix,
    pub rho_sys: DensityMatrix,
    pub rho_rec: DensityMatrix,
}

/// Samples one pass of the cycle.
pub fn run_once<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<RunRecord> {
    let pipeline = Pipeline::new(s)?;
    run_with(&pipeline, rng)
}

/// [`run_once`] with prebuilt operators.
pub fn run_with<R: Rng + ?Sized>(pipeline: &Pipeline, rng: &mut R) -> Result<RunRecord> {
    let s = pipeline.scenario();
    let rho_enc = pipeline.encode(&s.input_state)?;
    let m = measure_qubit(&rho_enc, 0, rng)?;
    let readout = s.readout();
    let photon_counts = sample_photon_counts(&readout, m.outcome.is_bright(), rng);
    let branch = pipeline.branch_from(&m.post_state, m.outcome, m.probability)?;
    Ok(RunRecord {
        outcome: m.outcome,
        detected: detected(&readout, photon_counts),
        label: s.label_for(m.outcome, photon_counts),
        photon_counts,
        probability: m.probability,
        rho_enc,
        rho_meas: branch.rho_meas,
        rho_sys: branch.rho_sys,
        rho_rec: branch.rho_rec,
    })
}

/// Process matrix of input qubit to `rho_sys`, or `None` when some standard
/// input never produces the requested label.
pub fn system_chi(s: &Scenario, filter: OutcomeFilter) -> Result<Option<ChiMatrix>> {
    let pipeline = Pipeline::new(s)?;
    let mut outputs = Vec::with_capacity(4);
    for input in standard_inputs() {
        match pipeline.exact(&input)?.view(filter) {
            Some(v) => outputs.push(v.rho_sys),
            None => return Ok(None),
        }
    }
    let outputs: [DensityMatrix; 4] = outputs.try_into().expect("four outputs");
    Ok(Some(ChiMatrix::from_outputs(&outputs)?))
}

/// The effective single-qubit channel from the input to `rho_sys`.
pub fn run_channel_on_system(
    s: &Scenario,
    filter: OutcomeFilter,
) -> Result<Option<QuantumChannel>> {
    system_chi(s, filter)?
        .map(|chi| chi.to_channel())
        .transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Born probabilities, no shot noise.
    Exact,
    Sampled,
}

/// Estimated probability of the label `0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoEstimate {
    pub p0: f64,
    /// Binomial standard error; zero in exact mode.
    pub stderr: f64,
    pub shots: u64,
}

impl InfoEstimate {
    /// Within `k` standard errors of `target`; exact estimates must match to 1e-12.
    pub fn within(&self, target: f64, k: f64) -> bool {
        let slack = if self.stderr > 0.0 {
            k * self.stderr
        } else {
            1e-12
        };
        (self.p0 - target).abs() <= slack
    }
}

/// How often the readout reports `0` for each input.
///
/// In sampled mode input `i` draws `s.shots` shots from the generator split
/// from `s.seed` at index `i`.
pub fn outcome_information_test(
    inputs: &[Ket],
    s: &Scenario,
    mode: Mode,
) -> Result<Vec<InfoEstimate>> {
    let pipeline = Pipeline::new(s)?;
    let readout = s.readout();
    inputs
        .par_iter()
        .enumerate()
        .map(|(i, input)| {
            let rho_enc = pipeline.encode(input)?;
            match mode {
                Mode::Exact => {
                    let p0 = pipeline.exact(input)?.label_probability(Outcome::Zero);
                    Ok(InfoEstimate {
                        p0,
                        stderr: 0.0,
                        shots: 0,
                    })
                }
                Mode::Sampled => {
                    let mut rng = task_rng(s.seed, i as u64);
                    let mut zeros = 0u64;
                    for _ in 0..s.shots {
                        let m = measure_qubit(&rho_enc, 0, &mut rng)?;
                        let counts =
                            sample_photon_counts(&readout, m.outcome.is_bright(), &mut rng);
                        if s.label_for(m.outcome, counts) == Outcome::Zero {
                            zeros += 1;
                        }
                    }
                    let p0 = zeros as f64 / s.shots as f64;
                    Ok(InfoEstimate {
                        p0,
                        stderr: (p0 * (1.0 - p0) / s.shots as f64).sqrt(),
                        shots: s.shots,
                    })
                }
            }
        })
        .collect()
}

/// The inputs of the no-information test: |0>, |0>+|1>, |0>+i|1>, |1>.
pub fn information_test_inputs() -> [Ket; 4] {
    [Ket::zero(), Ket::plus(), Ket::plus_i(), Ket::one()]
}
