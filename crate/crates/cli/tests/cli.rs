use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use unmeasure::state::DensityMatrix;
use unmeasure_cli::config::NoiseConfig;
use unmeasure_cli::ExperimentConfig;

fn unmeasure(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unmeasure"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn config_text(&self, text: &str) -> PathBuf {
        let p = self.dir.path().join("config.json");
        std::fs::write(&p, text).unwrap();
        p
    }

    fn config(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.config_text(&cfg.to_json())
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn run(&self, args: &[&str], cfg: &ExperimentConfig) -> Output {
        let out = unmeasure(args, &self.config(cfg), &self.out());
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    fn read(&self, file: &str) -> String {
        std::fs::read_to_string(self.out().join(file)).unwrap()
    }

    fn json(&self, file: &str) -> Value {
        serde_json::from_str(&self.read(file)).unwrap()
    }

    /// Data rows of a CSV report, split into fields.
    fn csv_rows(&self, file: &str) -> Vec<Vec<String>> {
        self.read(file)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(String::from).collect())
            .collect()
    }
}

fn noiseless(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        noise: NoiseConfig::noiseless(),
        mode: unmeasure::protocol::Mode::Exact,
        ..ExperimentConfig::with_seed(seed)
    }
}

#[test]
fn noise_off_table_is_perfect() {
    let f = Fixture::new();
    f.run(&["run-table"], &noiseless(1));
    let rows = f.csv_rows("table.csv");
    assert_eq!(rows.len(), 4);
    for row in rows {
        for pair in row[5..].chunks(2) {
            assert_eq!(pair, ["100.00", "0.00"]);
        }
    }
    let j = f.json("table.json");
    assert_eq!(j["rows"].as_array().unwrap().len(), 4);
    assert_eq!(j["provenance"]["seed"], 1);
}

#[test]
fn calibrated_exact_table_hits_the_target_row() {
    let f = Fixture::new();
    f.run(&["run-table", "--exact"], &ExperimentConfig::with_seed(2));
    let rows = f.csv_rows("table.csv");
    let row = rows.iter().find(|r| r[1] == "200").unwrap();
    assert_eq!(row[0], "800");
    assert_eq!(row[2], "<0.5%");
    let frho: f64 = row[11].parse().unwrap();
    assert!((frho - 84.0).abs() <= 5.0, "{frho}");
    assert_eq!(rows.iter().find(|r| r[1] == "100").unwrap()[2], "6%");
}

#[test]
fn seed_flag_overrides_the_config() {
    let f = Fixture::new();
    let cfg = ExperimentConfig {
        meas_durations_us: vec![200.0],
        ..noiseless(3)
    };
    f.run(&["info-test", "--seed", "77"], &cfg);
    assert_eq!(f.json("info_test.json")["provenance"]["seed"], 77);
    assert!(f.read("info_test.csv").contains("# seed: 77\n"));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let f = Fixture::new();
    let cfg = ExperimentConfig {
        meas_durations_us: vec![200.0],
        shots: 1_000,
        ..ExperimentConfig::with_seed(4)
    };
    f.run(&["info-test"], &cfg);
    let first = (f.read("info_test.csv"), f.read("info_test.json"));
    f.run(&["info-test", "--threads", "2"], &cfg);
    assert_eq!(first, (f.read("info_test.csv"), f.read("info_test.json")));
    f.run(&["info-test", "--seed", "5"], &cfg);
    assert_ne!(first.0, f.read("info_test.csv"));
}

#[test]
fn info_test_reports_half_with_reference_values() {
    let f = Fixture::new();
    f.run(&["info-test"], &noiseless(6));
    let rows = f.csv_rows("info_test.csv");
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r[1], "0.500000");
        assert_eq!(r[4], "true");
    }
    let refs: Vec<&str> = rows.iter().map(|r| r[5].as_str()).collect();
    assert_eq!(refs, ["0.48", "0.50", "0.50", "0.50"]);

    let sampled = ExperimentConfig {
        meas_durations_us: vec![200.0],
        ..ExperimentConfig::with_seed(7)
    };
    f.run(&["info-test"], &sampled);
    let j = f.json("info_test.json");
    assert_eq!(j["all_within_3sigma"], true);
    for r in j["rows"].as_array().unwrap() {
        assert_eq!(r["shots"], 10_000);
    }
}

fn histogram_bins(f: &Fixture) -> Vec<u64> {
    f.csv_rows("histogram.csv")
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect()
}

#[test]
fn histogram_is_a_two_poisson_mixture() {
    let f = Fixture::new();
    let cfg = ExperimentConfig {
        meas_durations_us: vec![200.0],
        ..noiseless(8)
    };
    f.run(&["histogram"], &cfg);
    let text = f.read("histogram.csv");
    assert!(text.contains("# threshold: 3\n"));
    let bins = histogram_bins(&f);
    assert_eq!(bins.iter().sum::<u64>(), 10_000);
    // Dark shots all land at zero; the bright half peaks near its mean of 12.
    assert!((4_700..5_300).contains(&bins[0]), "{}", bins[0]);
    let mode = (3..bins.len()).max_by_key(|&k| bins[k]).unwrap();
    assert!((10..=13).contains(&mode), "{mode}");
    let marked: Vec<String> = f
        .csv_rows("histogram.csv")
        .iter()
        .map(|r| r[2].clone())
        .collect();
    assert_eq!(&marked[..4], ["false", "false", "false", "true"]);
}

#[test]
fn histogram_without_bright_rate_is_a_spike_at_zero() {
    let f = Fixture::new();
    let mut cfg = noiseless(9);
    cfg.meas_durations_us = vec![200.0];
    cfg.detection.bright_rate_per_us = 0.0;
    f.run(&["histogram"], &cfg);
    assert_eq!(histogram_bins(&f), [10_000]);
}

fn states(f: &Fixture) -> Vec<(String, DensityMatrix)> {
    let j = f.json("states.json");
    j["points"][0]["states"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            (
                s["name"].as_str().unwrap().to_string(),
                serde_json::from_value(s["rho"].clone()).unwrap(),
            )
        })
        .collect()
}

fn get<'a>(states: &'a [(String, DensityMatrix)], name: &str) -> &'a DensityMatrix {
    &states.iter().find(|(n, _)| n == name).unwrap().1
}

#[test]
fn noise_off_state_dump() {
    let f = Fixture::new();
    let cfg = ExperimentConfig {
        meas_durations_us: vec![200.0],
        ..noiseless(10)
    };
    f.run(&["dump-states"], &cfg);
    let st = states(&f);
    let names: Vec<&str> = st.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "rho_enc",
            "rho_meas_mean",
            "rho_rec_mean",
            "rho_meas_0",
            "rho_rec_0",
            "rho_meas_1",
            "rho_rec_1"
        ]
    );
    let enc = get(&st, "rho_enc").matrix();
    // (|+++> + |--->)/sqrt2 = (|000> + |011> + |101> + |110>)/2.
    for i in 0..8 {
        for j in 0..8 {
            let even = |x: usize| x.count_ones() % 2 == 0;
            let expected = if even(i) && even(j) { 0.25 } else { 0.0 };
            assert!((enc[(i, j)].norm() - expected).abs() < 1e-12);
        }
    }
    for name in ["rho_rec_mean", "rho_rec_0", "rho_rec_1"] {
        let d = get(&st, name).matrix() - enc;
        assert!(d.iter().all(|z| z.norm() < 1e-9), "{name}");
    }
    // The readout dephases qubit 0: coherence between its two branches is
    // gone, and the code-space coherence <+++|rho|---> drops from 1/2 to 1/4.
    let meas = get(&st, "rho_meas_mean").matrix();
    for i in 0..8 {
        for j in 0..8 {
            if (i >> 2) != (j >> 2) {
                assert!(meas[(i, j)].norm() < 1e-12);
            }
        }
    }
    let h3 = std::f64::consts::FRAC_1_SQRT_2.powi(3);
    let coherence: unmeasure::linalg::C64 = (0..8)
        .flat_map(|i| (0..8).map(move |j| (i, j)))
        .map(|(i, j)| {
            let minus = if (j as u32).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            meas[(i, j)] * h3 * h3 * minus
        })
        .sum();
    assert!(
        (coherence.re - 0.25).abs() < 1e-12 && coherence.im.abs() < 1e-12,
        "{coherence}"
    );

    let grid = f.csv_rows("rho_enc_r800_m200.csv");
    assert_eq!(grid.len(), 8);
    assert_eq!(grid[0][0], "000");
    assert_eq!(grid[0][4], "0.250000");
}

#[test]
fn sampled_state_dump_uses_reconstructions() {
    let f = Fixture::new();
    let cfg = ExperimentConfig {
        meas_durations_us: vec![200.0],
        shots: 2_000,
        formats: vec![unmeasure_cli::Format::Json],
        ..ExperimentConfig::with_seed(11)
    };
    f.run(&["dump-states"], &cfg);
    let st = states(&f);
    assert_eq!(st.len(), 7);
    let exact_enc = {
        f.run(&["dump-states", "--exact"], &cfg);
        get(&states(&f), "rho_enc").clone()
    };
    let fid = unmeasure::state::uhlmann_fidelity(get(&st, "rho_enc"), &exact_enc).unwrap();
    assert!(fid > 0.95 && fid < 1.0 - 1e-6, "{fid}");
    assert!(!f.out().join("rho_enc_r800_m200.csv").exists());
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn config_errors_exit_with_two_and_name_the_line() {
    let f = Fixture::new();
    let p = f.config_text("{\n  \"seed\": 1,\n  \"shots\": 10,\n  \"meas_durations_us\": [\n}\n");
    let out = unmeasure(&["run-table"], &p, &f.out());
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("config.json:5"),
        "{}",
        stderr_of(&out)
    );

    let p = f.config_text("{\n  \"seed\": 1,\n  \"recool_durations_us\": []\n}\n");
    let out = unmeasure(&["run-table"], &p, &f.out());
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("config.json:3: recool_durations_us"),
        "{}",
        stderr_of(&out)
    );

    let p = f.config_text("{\"shots\": 10}");
    let out = unmeasure(&["histogram"], &p, &f.out());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("seed"));

    let missing = f.dir.path().join("nope.json");
    assert_eq!(
        unmeasure(&["histogram"], &missing, &f.out()).status.code(),
        Some(2)
    );
}

#[test]
fn non_convergence_exits_with_three() {
    let f = Fixture::new();
    let cfg = ExperimentConfig {
        meas_durations_us: vec![200.0],
        mle_max_iter: 1,
        ..ExperimentConfig::with_seed(12)
    };
    let out = unmeasure(&["dump-states"], &f.config(&cfg), &f.out());
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("did not converge"));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 2);
}
