use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stc::chain::{build_chain, measurement_outcome, ChainComplex};
use stc::code::{build_code, SubsystemCode};
use stc::decoder::{estimate_syndrome, ideal_decode, is_logical_error, single_shot_decode};
use stc::gf2::{Basis, BitVec, Echelon};
use stc::sim::{sample_gauge, sample_noise};
use stc::Error;

fn setup(l: usize) -> (SubsystemCode, ChainComplex) {
    let code = build_code(l).unwrap();
    let cc = build_chain(&code).unwrap();
    (code, cc)
}

fn zero_meas(cc: &ChainComplex) -> BitVec {
    BitVec::zeros(Basis::Meas, cc.n_meas())
}

fn zero_gauge(cc: &ChainComplex) -> BitVec {
    BitVec::zeros(Basis::XGauge, cc.n_x_gauge())
}

fn random_weight(rng: &mut ChaCha8Rng, basis: Basis, len: usize, w: usize) -> BitVec {
    BitVec::from_indices(basis, len, sample(rng, len, w).into_iter())
}

#[test]
fn clean_outcome_needs_no_repair() {
    let (code, cc) = setup(3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let (eps, _) = sample_noise(&cc, 0.05, 0.0, &mut rng).unwrap();
        let gamma = sample_gauge(&cc, &mut rng);
        let zeta = measurement_outcome(&cc, &eps, &zero_meas(&cc), &gamma).unwrap();
        let (mu_hat, sigma_hat) = estimate_syndrome(&cc, &code, &zeta).unwrap();
        assert!(mu_hat.is_zero());
        assert_eq!(sigma_hat, cc.d_s.apply(&zeta).unwrap());
    }
}

#[test]
fn single_measurement_flip_with_unique_repair() {
    let (code, cc) = setup(4);
    let g = cc.meas.graph();
    let key = |e: usize| {
        let mut k: Vec<usize> = g.interior_endpoints(e).collect();
        k.sort_unstable();
        k
    };
    let mut checked = 0;
    for e in 0..g.n_edges() {
        let k = key(e);
        let interior_edge = k.len() == 2;
        let unique = (0..g.n_edges()).filter(|&f| key(f) == k).count() == 1;
        if !(interior_edge && unique) {
            continue;
        }
        let zeta = BitVec::from_indices(Basis::Meas, cc.n_meas(), [e]);
        let (mu_hat, sigma_hat) = estimate_syndrome(&cc, &code, &zeta).unwrap();
        assert_eq!(mu_hat, zeta);
        assert!(sigma_hat.is_zero());
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn repair_is_no_heavier_than_the_noise() {
    let (code, cc) = setup(4);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let (eps, mu) = sample_noise(&cc, 0.01, 0.01, &mut rng).unwrap();
        let zeta = measurement_outcome(&cc, &eps, &mu, &zero_gauge(&cc)).unwrap();
        let (mu_hat, _) = estimate_syndrome(&cc, &code, &zeta).unwrap();
        assert!(mu_hat.weight() <= mu.weight());
    }
}

#[test]
fn ideal_decode_examples() {
    let (code, cc) = setup(4);
    let gauge = Echelon::new(&code.x_gauge_matrix(), false);
    let zero = BitVec::zeros(Basis::Stabilizers, cc.n_stab());
    assert!(ideal_decode(&cc, &code, &zero).unwrap().is_zero());
    for q in 0..code.n() {
        let eps = BitVec::from_indices(Basis::Qubits, code.n(), [q]);
        let sigma = cc.stab_syndrome(&eps).unwrap();
        let chi = ideal_decode(&cc, &code, &sigma).unwrap();
        assert_eq!(chi.weight(), 1);
        assert!(gauge.contains(&chi.xor(&eps)).unwrap(), "qubit {q}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let eps = random_weight(&mut rng, Basis::Qubits, code.n(), 3);
        let sigma = cc.stab_syndrome(&eps).unwrap();
        let chi = ideal_decode(&cc, &code, &sigma).unwrap();
        assert_eq!(cc.stab_syndrome(&chi).unwrap(), sigma);
    }
    let wrong = BitVec::zeros(Basis::Meas, cc.n_stab());
    assert!(matches!(ideal_decode(&cc, &code, &wrong), Err(Error::Usage(_))));
}

#[test]
fn single_shot_examples() {
    let (code, cc) = setup(3);
    let gauge = Echelon::new(&code.x_gauge_matrix(), false);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let zero_q = BitVec::zeros(Basis::Qubits, code.n());
    for _ in 0..50 {
        let gamma = sample_gauge(&cc, &mut rng);
        let zeta = measurement_outcome(&cc, &zero_q, &zero_meas(&cc), &gamma).unwrap();
        let out = single_shot_decode(&cc, &code, &zeta).unwrap();
        assert!(out.mu_hat.is_zero() && out.sigma_hat.is_zero() && out.chi.is_zero());
    }
    for q in 0..code.n() {
        let eps = BitVec::from_indices(Basis::Qubits, code.n(), [q]);
        let zeta = measurement_outcome(&cc, &eps, &zero_meas(&cc), &sample_gauge(&cc, &mut rng)).unwrap();
        let out = single_shot_decode(&cc, &code, &zeta).unwrap();
        assert!(gauge.contains(&eps.xor(&out.chi)).unwrap());
    }
    // A single measurement flip: the estimate is exact whenever the repair
    // reproduces the flip's relation defects with the flip itself.
    for e in 0..cc.n_meas() {
        let mu = BitVec::from_indices(Basis::Meas, cc.n_meas(), [e]);
        let zeta = measurement_outcome(&cc, &zero_q, &mu, &zero_gauge(&cc)).unwrap();
        let out = single_shot_decode(&cc, &code, &zeta).unwrap();
        if out.mu_hat == mu {
            assert!(out.sigma_hat.is_zero());
        }
    }
}

#[test]
fn noiseless_single_shot_equals_ideal() {
    let (code, cc) = setup(4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let (eps, _) = sample_noise(&cc, 0.02, 0.0, &mut rng).unwrap();
        let zeta = measurement_outcome(&cc, &eps, &zero_meas(&cc), &sample_gauge(&cc, &mut rng)).unwrap();
        let out = single_shot_decode(&cc, &code, &zeta).unwrap();
        let ideal = ideal_decode(&cc, &code, &cc.stab_syndrome(&eps).unwrap()).unwrap();
        assert_eq!(out.chi, ideal);
    }
}

#[test]
fn decoded_weights_are_minimal() {
    for l in [2, 4] {
        let (code, cc) = setup(l);
        let mut rng = ChaCha8Rng::seed_from_u64(6 + l as u64);
        let mut done = 0;
        while done < 200 {
            let p = rng.random_range(0.002..0.03);
            let (eps, mu) = sample_noise(&cc, p, p, &mut rng).unwrap();
            let zeta = measurement_outcome(&cc, &eps, &mu, &sample_gauge(&cc, &mut rng)).unwrap();
            let out = single_shot_decode(&cc, &code, &zeta).unwrap();
            let to_vertices = |syn: &BitVec, interior: &[usize]| syn.ones().map(|i| interior[i]).collect::<Vec<_>>();
            let rel = to_vertices(&cc.d_r.apply(&zeta).unwrap(), cc.meas.graph().interior());
            let stab = to_vertices(&out.sigma_hat, cc.qubits.graph().interior());
            if rel.len() > 14 || stab.len() > 14 {
                continue;
            }
            let m = cc.meas.brute_force_mwpm(&cc.meas.build_instance(&rel, false).unwrap()).unwrap();
            let q = cc.qubits.brute_force_mwpm(&cc.qubits.build_instance(&stab, false).unwrap()).unwrap();
            assert_eq!(out.mu_hat.weight() as u64, m.total_weight);
            assert_eq!(out.chi.weight() as u64, q.total_weight);
            done += 1;
        }
    }
}

#[test]
fn logical_verdict_examples() {
    let (code, _) = setup(3);
    let n = code.n();
    assert!(!is_logical_error(&code, &BitVec::zeros(Basis::Qubits, n)).unwrap());
    for g in &code.x_gauge {
        let v = BitVec::from_indices(Basis::Qubits, n, g.support.iter().copied());
        assert!(!is_logical_error(&code, &v).unwrap());
    }
    assert!(is_logical_error(&code, &code.logical_x.bits).unwrap());
    assert!(is_logical_error(&code, &code.bare_logical_x.bits).unwrap());
    let single = BitVec::from_indices(Basis::Qubits, n, [0]);
    assert!(matches!(is_logical_error(&code, &single), Err(Error::NonzeroSyndrome(_))));
}

#[test]
fn pairing_agrees_with_membership() {
    for l in [2, 3] {
        let (code, _) = setup(l);
        let gauge = Echelon::new(&code.x_gauge_matrix(), false);
        let rows = code.x_gauge_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
        for _ in 0..5_000 {
            let mut v = BitVec::zeros(Basis::Qubits, code.n());
            for r in rows.rows() {
                if rng.random_bool(0.5) {
                    v.xor_assign(r);
                }
            }
            if rng.random_bool(0.5) {
                v.xor_assign(&code.logical_x.bits);
            }
            assert_eq!(is_logical_error(&code, &v).unwrap(), !gauge.contains(&v).unwrap());
        }
    }
}
