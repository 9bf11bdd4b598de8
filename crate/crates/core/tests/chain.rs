use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stc::chain::{build_chain, flux_syndrome_two_ways, measurement_outcome, ChainComplex};
use stc::code::{build_code, SubsystemCode};
use stc::gf2::{Basis, BitVec};
use stc::sim::{sample_gauge, sample_noise};
use stc::Error;

fn setup(l: usize) -> (SubsystemCode, ChainComplex) {
    let code = build_code(l).unwrap();
    let cc = build_chain(&code).unwrap();
    (code, cc)
}

#[test]
fn identities_hold_for_small_sizes() {
    for l in 1..=6 {
        let (_, cc) = setup(l);
        assert!(cc.b_s.to_dense().mul(&cc.d_q.to_dense()).unwrap().is_zero());
        assert!(cc.d_r.to_dense().mul(&cc.d_m.to_dense()).unwrap().is_zero());
    }
}

#[test]
fn outcome_examples() {
    let (code, cc) = setup(2);
    let eps = BitVec::zeros(Basis::Qubits, cc.n_qubits());
    let mu = BitVec::zeros(Basis::Meas, cc.n_meas());
    let gamma = BitVec::zeros(Basis::XGauge, cc.n_x_gauge());
    assert!(measurement_outcome(&cc, &eps, &mu, &gamma).unwrap().is_zero());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let gamma = sample_gauge(&cc, &mut rng);
        let zeta = measurement_outcome(&cc, &eps, &mu, &gamma).unwrap();
        assert!(cc.d_r.apply(&zeta).unwrap().is_zero());
        assert!(cc.d_s.apply(&zeta).unwrap().is_zero());
    }

    // A single flip shows up on exactly the measured Z gauges that contain it.
    for q in 0..code.n() {
        let e = BitVec::from_indices(Basis::Qubits, code.n(), [q]);
        let zeta = measurement_outcome(&cc, &e, &mu, &BitVec::zeros(Basis::XGauge, cc.n_x_gauge())).unwrap();
        let want: Vec<usize> = (0..code.z_gauge.len()).filter(|&g| code.z_gauge[g].support.contains(&q)).collect();
        assert_eq!(zeta.ones().collect::<Vec<_>>(), want);
    }
}

#[test]
fn flux_syndrome_examples() {
    let (code, cc) = setup(3);
    assert!(flux_syndrome_two_ways(&cc, &BitVec::zeros(Basis::Meas, cc.n_meas())).unwrap().is_zero());
    let zero_mu = BitVec::zeros(Basis::Meas, cc.n_meas());
    for q in 0..code.n() {
        let e = BitVec::from_indices(Basis::Qubits, code.n(), [q]);
        let phi = cc.d_m.apply(&e).unwrap();
        let syn = flux_syndrome_two_ways(&cc, &phi).unwrap();
        let interior: Vec<usize> = code.qubits[q]
            .blue
            .iter()
            .filter(|&&b| !code.vertices[b].is_boundary())
            .map(|&b| code.z_stab.iter().position(|s| s.cell == b).unwrap())
            .collect();
        let mut want = interior.clone();
        want.sort_unstable();
        assert_eq!(syn.ones().collect::<Vec<_>>(), want);
        assert!(syn.weight() <= 2);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let gamma = sample_gauge(&cc, &mut rng);
    let phi = measurement_outcome(&cc, &BitVec::zeros(Basis::Qubits, code.n()), &zero_mu, &gamma).unwrap();
    assert!(flux_syndrome_two_ways(&cc, &phi).unwrap().is_zero());
}

#[test]
fn invalid_flux_and_bases_are_rejected() {
    let (_, cc) = setup(2);
    let single = BitVec::from_indices(Basis::Meas, cc.n_meas(), [0]);
    assert!(matches!(flux_syndrome_two_ways(&cc, &single), Err(Error::InvalidFlux(_))));
    let wrong = BitVec::zeros(Basis::Qubits, cc.n_meas());
    assert!(flux_syndrome_two_ways(&cc, &wrong).is_err());
}

/// Stabilizer syndrome as overlap parity with each Z stabilizer.
fn syndrome_oracle(code: &SubsystemCode, eps: &BitVec) -> Vec<usize> {
    (0..code.z_stab.len())
        .filter(|&i| code.z_stab[i].support.iter().filter(|&&q| eps.get(q)).count() % 2 == 1)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_law_and_two_way_syndrome(l in 1usize..=4, seed in any::<u64>(), p in 0.0f64..0.3) {
        let (code, cc) = setup(l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (eps, _) = sample_noise(&cc, p, 0.0, &mut rng).unwrap();
        let gamma = sample_gauge(&cc, &mut rng);
        let zero = BitVec::zeros(Basis::Meas, cc.n_meas());
        let phi = measurement_outcome(&cc, &eps, &zero, &gamma).unwrap();
        prop_assert!(cc.d_r.apply(&phi).unwrap().is_zero());
        let syn = flux_syndrome_two_ways(&cc, &phi).unwrap();
        prop_assert_eq!(&syn, &cc.stab_syndrome(&eps).unwrap());
        prop_assert_eq!(syn.ones().collect::<Vec<_>>(), syndrome_oracle(&code, &eps));
        let rel = code.qubit_graph.relative_boundary(&eps, Basis::Stabilizers);
        prop_assert_eq!(rel, syn);
    }
}
