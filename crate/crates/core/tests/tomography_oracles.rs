mod common;

use common::{C, M};
use unmeasure::channels::{dephasing_channel, depolarizing_channel, QuantumChannel};
use unmeasure::linalg::{CMatrix, Pauli};
use unmeasure::rng::seeded;
use unmeasure::state::{uhlmann_fidelity, DensityMatrix, Ket, Unitary};
use unmeasure::tomography::counts::expected_frequencies;
use unmeasure::tomography::mle::{mle_from_observations, MleOptions};
use unmeasure::tomography::{
    all_settings, bootstrap, mle_reconstruct, process_fidelity, process_tomography,
    simulate_counts, standard_inputs, ChiMatrix, CountRecord, Observations, Setting,
};

fn to_oracle(m: &CMatrix) -> M {
    M::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn digits(setting: &Setting) -> Vec<usize> {
    setting
        .axes()
        .iter()
        .map(|p| match p {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        })
        .collect()
}

/// MLE on exact frequencies against projected linear inversion.
fn check_against_inversion(rho: &DensityMatrix) -> f64 {
    let n = rho.n_qubits();
    let oracle_rho = to_oracle(rho.matrix());
    let li = common::linear_inversion(n, &|s: &[usize]| common::born_frequencies(&oracle_rho, s));
    let li = common::project_physical(&li);

    let obs =
        Observations::from_weights(&expected_frequencies(rho, &all_settings(n)).unwrap()).unwrap();
    let res = mle_from_observations(
        &obs,
        MleOptions {
            tol: 1e-13,
            max_iter: 200_000,
        },
    )
    .unwrap();
    for w in res.log_likelihood.windows(2) {
        assert!(w[1] >= w[0]);
    }
    common::trace_distance(&to_oracle(res.rho.matrix()), &li)
}

#[test]
fn library_born_frequencies_match_explicit_projectors() {
    let mut rng = seeded(30);
    let rho = DensityMatrix::random_mixed(3, &mut rng);
    let oracle_rho = to_oracle(rho.matrix());
    for s in all_settings(3) {
        let lib = s.probabilities(&rho).unwrap();
        let orc = common::born_frequencies(&oracle_rho, &digits(&s));
        for (a, b) in lib.iter().zip(&orc) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}

#[test]
fn mle_matches_inversion_on_pauli_eigenstates() {
    for k in common::pauli_eigenstates() {
        let rho = DensityMatrix::from_ket(&Ket::new(k.to_vec()).unwrap());
        let d = check_against_inversion(&rho);
        assert!(d < 1e-6, "{d}");
    }
}

#[test]
fn mle_matches_inversion_on_random_three_qubit_states() {
    let mut rng = seeded(31);
    for _ in 0..10 {
        let rho = DensityMatrix::random_mixed(3, &mut rng);
        let d = check_against_inversion(&rho);
        assert!(d < 1e-6, "{d}");
    }
}

#[test]
fn mle_reconstruction_is_a_density_matrix() {
    let mut rng = seeded(32);
    for n in 1..=3 {
        let rho = DensityMatrix::from_ket(&Ket::random(n, &mut rng));
        let counts = simulate_counts(&rho, &all_settings(n), 300, &mut rng).unwrap();
        let res = mle_reconstruct(&counts, 1e-9, 10_000).unwrap();
        assert!(DensityMatrix::new(res.rho.matrix().clone()).is_ok());
    }
}

#[test]
fn chi_fidelity_agrees_with_two_design_average() {
    let mut rng = seeded(33);
    let u = Unitary::random(1, &mut rng);
    let channels = [
        QuantumChannel::identity(1).unwrap(),
        dephasing_channel(0, 1, 0.5).unwrap(),
        depolarizing_channel(0, 1, 0.37).unwrap(),
        QuantumChannel::new(vec![u.matrix().clone()], "u")
            .unwrap()
            .then(&dephasing_channel(0, 1, 0.2).unwrap())
            .unwrap(),
    ];
    for ch in &channels {
        let chi = ChiMatrix::from_channel(ch).unwrap();
        let lib = process_fidelity(&chi, &ChiMatrix::identity()).unwrap();
        let oracle = common::process_fidelity_via_design(&|rho: &M| {
            let r = DensityMatrix::new(CMatrix::from_fn(2, 2, |i, j| rho[(i, j)])).unwrap();
            to_oracle(ch.apply(&r).unwrap().matrix())
        });
        assert!((lib - oracle).abs() < 1e-12, "{lib} vs {oracle}");
    }
}

fn assert_half_dephased(chi: &ChiMatrix, tol: f64) {
    let expected = [0.5, 0.0, 0.0, 0.5];
    for i in 0..4 {
        for j in 0..4 {
            let target = if i == j { expected[i] } else { 0.0 };
            let err = (chi.elements()[(i, j)] - C::new(target, 0.0)).norm();
            assert!(err < tol, "chi[{i}{j}] off by {err}");
        }
    }
}

#[test]
fn full_dephasing_from_exact_outputs() {
    let ch = dephasing_channel(0, 1, 0.5).unwrap();
    let outputs = standard_inputs().map(|k| ch.apply(&DensityMatrix::from_ket(&k)).unwrap());
    let chi = ChiMatrix::from_outputs(&outputs).unwrap();
    assert_half_dephased(&chi, 1e-12);
    assert!((process_fidelity(&chi, &ChiMatrix::identity()).unwrap() - 0.5).abs() < 1e-12);
}

// At 10^4 shots per setting the shot noise on single chi elements is itself
// close to 0.01, so the sampled check uses ten times more.
#[test]
fn full_dephasing_process_tomography() {
    let ch = dephasing_channel(0, 1, 0.5).unwrap();
    let chi = process_tomography(
        |k| ch.apply(&DensityMatrix::from_ket(k)),
        100_000,
        &mut seeded(34),
    )
    .unwrap();
    assert_half_dephased(&chi, 0.01);
}

#[test]
fn qubit_fidelity_closed_form() {
    let mut rng = seeded(35);
    for _ in 0..20 {
        let a = DensityMatrix::random_mixed(1, &mut rng);
        let b = DensityMatrix::random_mixed(1, &mut rng);
        let lib = uhlmann_fidelity(&a, &b).unwrap();
        let orc = common::qubit_fidelity(&to_oracle(a.matrix()), &to_oracle(b.matrix()));
        assert!((lib - orc).abs() < 1e-10);
    }
}

fn zero_fidelity(c: &[CountRecord]) -> unmeasure::Result<f64> {
    let rho = mle_reconstruct(c, 1e-9, 5000)?.rho;
    uhlmann_fidelity(&rho, &DensityMatrix::basis(1, 0)?)
}

fn plus_counts(shots: u64, seed: u64) -> Vec<CountRecord> {
    // A slightly mixed state keeps the MLE away from the boundary so the
    // spread follows the usual sqrt(shots) law.
    let mut rho = DensityMatrix::from_ket(&Ket::zero()).matrix().scale(0.9);
    rho += CMatrix::identity(2, 2).scale(0.05);
    let rho = DensityMatrix::new(rho).unwrap();
    simulate_counts(&rho, &all_settings(1), shots, &mut seeded(seed)).unwrap()
}

#[test]
fn bootstrap_spread_shrinks_like_inverse_sqrt_shots() {
    let spreads: Vec<f64> = [1_000u64, 4_000, 16_000]
        .iter()
        .map(|&n| {
            bootstrap(&plus_counts(n, 36), 300, zero_fidelity, &mut seeded(37))
                .unwrap()
                .stddev
        })
        .collect();
    for w in spreads.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.5).contains(&ratio), "{spreads:?}");
    }
}

#[test]
fn independent_bootstrap_runs_agree() {
    let counts = plus_counts(4_000, 38);
    let a = bootstrap(&counts, 1000, zero_fidelity, &mut seeded(39)).unwrap();
    let b = bootstrap(&counts, 1000, zero_fidelity, &mut seeded(40)).unwrap();
    assert!(
        (a.stddev / b.stddev - 1.0).abs() < 0.15,
        "{} vs {}",
        a.stddev,
        b.stddev
    );
}
