//! Report formatting.
//!
//! CSV files carry the provenance as `#` comment lines followed by one
//! header row. Numbers are formatted with a fixed number of decimals so two
//! runs with the same inputs produce the same bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use unmeasure::channels::detection::PhotonHistogram;
use unmeasure::experiment::{detection_error_label, Estimate, TableRow};
use unmeasure::protocol::{InfoEstimate, Mode};
use unmeasure::state::DensityMatrix;

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub mode: Mode,
    /// The resolved config without `output_dir`, so reports do not depend
    /// on where they were written.
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: "unmeasure",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: config.seed,
            mode: config.mode,
            config: {
                let mut v = serde_json::to_value(config).expect("config serializes");
                v.as_object_mut()
                    .expect("config is an object")
                    .remove("output_dir");
                v
            },
        }
    }

    fn csv_header(&self) -> String {
        let config = serde_json::to_string(&self.config).expect("config serializes");
        format!(
            "# {} {} {}\n# seed: {}\n# mode: {}\n# config: {config}\n",
            self.tool,
            self.version,
            self.command,
            self.seed,
            match self.mode {
                Mode::Exact => "exact",
                Mode::Sampled => "sampled",
            },
        )
    }
}

#[derive(Serialize)]
struct JsonReport<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: T,
}

pub fn json<T: Serialize>(provenance: &Provenance, body: T) -> String {
    let mut s =
        serde_json::to_string_pretty(&JsonReport { provenance, body }).expect("report serializes");
    s.push('\n');
    s
}

pub fn write(path: &Path, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

fn percent(e: Option<Estimate>) -> [String; 2] {
    match e {
        Some(e) => [
            format!("{:.2}", 100.0 * e.value),
            format!("{:.2}", 100.0 * e.stddev),
        ],
        None => [String::new(), String::new()],
    }
}

/// Fidelities in percent with their one-sigma errors: averaged, label 1, label 0.
pub fn table_csv(provenance: &Provenance, rows: &[TableRow]) -> String {
    let mut out = provenance.csv_header();
    let mut header: Vec<String> = [
        "tau_raman_us",
        "tau_meas_us",
        "detection_error",
        "detection_error_value",
        "mean_phonons",
    ]
    .map(String::from)
    .to_vec();
    for q in ["fproc", "frho"] {
        for o in ["mean", "1", "0"] {
            header.push(format!("{q}_{o}"));
            header.push(format!("{q}_{o}_err"));
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        let mut fields = vec![
            format!("{}", r.recool_duration_us),
            format!("{}", r.meas_duration_us),
            detection_error_label(r.detection_error),
            format!("{:.6e}", r.detection_error),
            r.mean_phonons
                .map(|n| format!("{n:.3}"))
                .unwrap_or_default(),
        ];
        for t in [&r.process, &r.state] {
            for e in [t.mean, t.one, t.zero] {
                fields.extend(percent(e));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn histogram_csv(provenance: &Provenance, hist: &PhotonHistogram, p_bright: f64) -> String {
    let mut out = provenance.csv_header();
    let _ = writeln!(out, "# threshold: {}", hist.threshold);
    let _ = writeln!(out, "# p_bright: {p_bright}");
    out.push_str("photons,shots,above_threshold\n");
    for (k, n) in hist.bins.iter().enumerate() {
        let _ = writeln!(out, "{k},{n},{}", k >= hist.threshold as usize);
    }
    out
}

/// Measured outcome-0 probabilities from the ion-trap experiment, in input order.
pub const REFERENCE_P0: [f64; 4] = [0.48, 0.50, 0.50, 0.50];

pub const INFO_INPUT_LABELS: [&str; 4] = ["0", "0+1", "0+i1", "1"];

pub fn info_csv(provenance: &Provenance, estimates: &[InfoEstimate], all_within: bool) -> String {
    let mut out = provenance.csv_header();
    let _ = writeln!(out, "# all_within_3sigma: {all_within}");
    out.push_str("input,p0,stderr,shots,within_3sigma,reference_p0\n");
    for ((e, label), reference) in estimates.iter().zip(INFO_INPUT_LABELS).zip(REFERENCE_P0) {
        let _ = writeln!(
            out,
            "{label},{:.6},{:.6},{},{},{reference:.2}",
            e.p0,
            e.stderr,
            e.shots,
            e.within(0.5, 3.0)
        );
    }
    out
}

/// `|rho_ij|` as a square grid, rows and columns labelled by basis state.
pub fn magnitude_csv(provenance: &Provenance, name: &str, rho: &DensityMatrix) -> String {
    let mut out = provenance.csv_header();
    let _ = writeln!(out, "# state: {name}");
    let n = rho.n_qubits();
    let labels: Vec<String> = (0..rho.dim()).map(|i| format!("{i:0n$b}")).collect();
    out.push_str("row");
    for l in &labels {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for j in 0..rho.dim() {
            let _ = write!(out, ",{:.6}", rho.matrix()[(i, j)].norm());
        }
        out.push('\n');
    }
    out
}
