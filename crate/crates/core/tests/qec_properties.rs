mod common;

use common::{C, M};
use proptest::prelude::*;
use unmeasure::circuits::{apply_circuit, build_encoder, decoder_for, syndrome_table, EncoderKind};
use unmeasure::linalg::Pauli;
use unmeasure::rng::seeded;
use unmeasure::state::{ket_from_bloch, DensityMatrix, Ket, Unitary};

const TOL: f64 = 1e-9;

fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn encode(kind: EncoderKind, d: Option<&Unitary>, psi: &Ket) -> M {
    let input = DensityMatrix::from_ket(psi)
        .tensor(&DensityMatrix::basis(2, 0).unwrap())
        .unwrap();
    apply_circuit(&input, &build_encoder(kind, d).unwrap())
        .unwrap()
        .into_matrix()
}

/// Encode, apply `error`, decode and correct. Returns the decoded register.
fn cycle(kind: EncoderKind, d: Option<&Unitary>, psi: &Ket, error: &M) -> M {
    let dec = decoder_for(kind, d, None).unwrap();
    let rho = encode(kind, d, psi);
    let hit = DensityMatrix::new(error * rho * error.adjoint()).unwrap();
    apply_circuit(&hit, &dec).unwrap().into_matrix()
}

fn system(rho: &M) -> M {
    common::reduce_to_qubit(rho, 0)
}

fn projector(psi: &Ket) -> M {
    DensityMatrix::from_ket(psi).into_matrix()
}

fn variants() -> Vec<(EncoderKind, Option<Unitary>)> {
    let mut rng = seeded(90);
    vec![
        (EncoderKind::Textbook, None),
        (EncoderKind::MolmerSorensen, None),
        (
            EncoderKind::Textbook,
            Some(Unitary::random_diagonal(3, &mut rng)),
        ),
        (
            EncoderKind::MolmerSorensen,
            Some(Unitary::random_diagonal(3, &mut rng)),
        ),
    ]
}

#[test]
fn textbook_encoder_builds_the_phase_code() {
    let mut rng = seeded(91);
    for _ in 0..20 {
        let psi = Ket::random(1, &mut rng);
        let (a, b) = (psi.amplitudes()[0], psi.amplitudes()[1]);
        let v = common::phase_code_ket(a, b);
        let lib = encode(EncoderKind::Textbook, None, &psi);
        assert!(max_diff(&lib, &(&v * v.adjoint())) < TOL);
    }
}

#[test]
fn every_single_phase_flip_is_corrected() {
    let mut rng = seeded(92);
    let inputs: Vec<Ket> = (0..20).map(|_| Ket::random(1, &mut rng)).collect();
    for (kind, d) in variants() {
        for k in 0..3 {
            for psi in &inputs {
                let out = cycle(kind, d.as_ref(), psi, &common::z_on(k));
                let err = max_diff(&system(&out), &projector(psi));
                assert!(err < TOL, "{kind:?} D={} Z{k}: {err}", d.is_some());
            }
        }
    }
}

#[test]
fn single_flips_leave_distinct_certain_syndromes() {
    let psi = ket_from_bloch(0.7, 2.1);
    let table = syndrome_table();
    for (kind, d) in variants() {
        let mut seen = Vec::new();
        let no_error = cycle(kind, d.as_ref(), &psi, &M::identity(8, 8));
        assert!((common::ancilla_pattern_probability(&no_error, 0, 0) - 1.0).abs() < TOL);
        for k in 0..3 {
            let out = cycle(kind, d.as_ref(), &psi, &common::z_on(k));
            let pattern = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .find(|&(a, b)| (common::ancilla_pattern_probability(&out, a, b) - 1.0).abs() < TOL)
                .expect("a deterministic syndrome");
            assert_ne!(pattern, (0, 0));
            assert_eq!(
                table[&(pattern.0 as u8, pattern.1 as u8)].flipped_qubit,
                Some(k)
            );
            seen.push(pattern);
        }
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 3);
    }
}

#[test]
fn two_phase_flips_defeat_the_majority_vote() {
    let witness = Ket::zero();
    for (j, k) in [(0, 1), (0, 2), (1, 2)] {
        let error = common::z_on(j) * common::z_on(k);
        let out = cycle(EncoderKind::Textbook, None, &witness, &error);
        // The vote picks the third qubit and leaves a logical flip behind.
        let err = max_diff(&system(&out), &projector(&witness));
        assert!(err > 0.5, "Z{j}Z{k} was corrected");
    }
}

// For a|+++> + b|---> each qubit is left in |a|^2 |+><+| + |b|^2 |-><-|:
// no coherence in the readout basis and populations of exactly one half.
#[test]
fn encoded_marginals_hide_the_input_from_a_readout() {
    let mut rng = seeded(93);
    for _ in 0..20 {
        let psi = Ket::random(1, &mut rng);
        let (a, b) = (
            psi.amplitudes()[0].norm_sqr(),
            psi.amplitudes()[1].norm_sqr(),
        );
        let expected = M::from_row_slice(
            2,
            2,
            &[
                C::new(0.5, 0.0),
                C::new(0.5 * (a - b), 0.0),
                C::new(0.5 * (a - b), 0.0),
                C::new(0.5, 0.0),
            ],
        );
        let rho = encode(EncoderKind::Textbook, None, &psi);
        for q in 0..3 {
            assert!(max_diff(&common::reduce_to_qubit(&rho, q), &expected) < TOL);
        }
        for (kind, d) in variants() {
            let rho = encode(kind, d.as_ref(), &psi);
            for q in 0..3 {
                let m = common::reduce_to_qubit(&rho, q);
                assert!((m[(0, 0)].re - 0.5).abs() < TOL);
                assert!((m[(1, 1)].re - 0.5).abs() < TOL);
            }
        }
    }
}

#[test]
fn equator_inputs_give_maximally_mixed_marginals() {
    let half = M::identity(2, 2) * C::new(0.5, 0.0);
    for phi in [0.0, 0.4, 1.3, 2.9, 4.4] {
        let rho = encode(
            EncoderKind::Textbook,
            None,
            &ket_from_bloch(std::f64::consts::FRAC_PI_2, phi),
        );
        for q in 0..3 {
            assert!(max_diff(&common::reduce_to_qubit(&rho, q), &half) < TOL);
        }
    }
}

fn bloch_ket() -> impl Strategy<Value = Ket> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(t, p)| ket_from_bloch(t, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Flipping a set of qubits either is corrected (weight <= 1) or leaves
    // exactly the logical X = Z Z Z on the system qubit (weight >= 2).
    #[test]
    fn flip_sets_are_corrected_or_become_a_logical_x(psi in bloch_ket(), mask in 0usize..8) {
        let mut error = M::identity(8, 8);
        for k in 0..3 {
            if (mask >> (2 - k)) & 1 == 1 {
                error = common::z_on(k) * error;
            }
        }
        let out = system(&cycle(EncoderKind::Textbook, None, &psi, &error));
        let expected = if mask.count_ones() <= 1 {
            projector(&psi)
        } else {
            let x = Pauli::X.matrix();
            &x * projector(&psi) * &x
        };
        prop_assert!(max_diff(&out, &expected) < TOL);
    }

    #[test]
    fn decoding_an_unhurt_code_returns_the_input(psi in bloch_ket(), seed in 0u64..1000) {
        let d = Unitary::random_diagonal(3, &mut seeded(seed));
        let out = cycle(EncoderKind::MolmerSorensen, Some(&d), &psi, &M::identity(8, 8));
        prop_assert!(max_diff(&system(&out), &projector(&psi)) < TOL);
        prop_assert!((common::ancilla_pattern_probability(&out, 0, 0) - 1.0).abs() < TOL);
    }
}
