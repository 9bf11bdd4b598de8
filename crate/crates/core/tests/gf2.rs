use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stc::error::Gf2Error;
use stc::gf2::{in_span, nullspace, rank, solve, Basis, BinMatrix, BitVec};

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> BinMatrix {
    let mut m = BinMatrix::zeros(Basis::Generic, Basis::Qubits, rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if rng.random_bool(density) {
                m.set(r, c, true);
            }
        }
    }
    m
}

fn random_vec(rng: &mut ChaCha8Rng, basis: Basis, len: usize) -> BitVec {
    BitVec::from_indices(basis, len, (0..len).filter(|_| rng.random_bool(0.5)).collect::<Vec<_>>())
}

/// Rank by plain Gaussian elimination on `Vec<bool>` rows.
fn naive_rank(m: &BinMatrix) -> usize {
    let mut rows: Vec<Vec<bool>> = (0..m.n_rows()).map(|r| (0..m.n_cols()).map(|c| m.get(r, c)).collect()).collect();
    let mut rank = 0;
    for c in 0..m.n_cols() {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] {
                let pivot = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn rank_examples() {
    assert_eq!(rank(&BinMatrix::identity(Basis::Generic, 3)), 3);
    assert_eq!(rank(&BinMatrix::zeros(Basis::Generic, Basis::Qubits, 4, 7)), 0);
    let row = BitVec::from_indices(Basis::Qubits, 5, [0, 3]);
    let m = BinMatrix::from_sparse_rows(Basis::Generic, Basis::Qubits, 5, [[0, 3], [0, 3]]);
    assert_eq!(m.row(0), &row);
    assert_eq!(rank(&m), 1);
}

#[test]
fn rank_of_large_matrix_equals_rank_of_transpose() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (r, c, d) in [(200, 200, 0.5), (200, 150, 0.02), (120, 200, 0.1)] {
        let m = random_matrix(&mut rng, r, c, d);
        assert_eq!(rank(&m), rank(&m.transpose()));
        assert_eq!(rank(&m), naive_rank(&m));
    }
}

#[test]
fn solve_examples() {
    let id = BinMatrix::identity(Basis::Qubits, 6);
    let b = BitVec::from_indices(Basis::Qubits, 6, [1, 4, 5]);
    assert_eq!(solve(&id, &b).unwrap(), Some(b.clone()));
    let m = BinMatrix::zeros(Basis::Generic, Basis::Qubits, 3, 6);
    let zero = BitVec::zeros(Basis::Generic, 3);
    assert_eq!(solve(&m, &zero).unwrap(), Some(BitVec::zeros(Basis::Qubits, 6)));
    assert_eq!(solve(&m, &BitVec::from_indices(Basis::Generic, 3, [1])).unwrap(), None);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let m = random_matrix(&mut rng, 20, 30, 0.3);
        let x0 = random_vec(&mut rng, Basis::Qubits, 30);
        let b = m.mul_vec(&x0).unwrap();
        let x = solve(&m, &b).unwrap().expect("consistent system");
        assert_eq!(m.mul_vec(&x).unwrap(), b);
    }
}

#[test]
fn in_span_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = random_matrix(&mut rng, 10, 40, 0.2);
    assert!(in_span(&g, g.row(4)).unwrap());
    assert!(in_span(&g, &BitVec::zeros(Basis::Qubits, 40)).unwrap());
    let v = g.row(1).xor(g.row(5)).xor(g.row(8));
    assert!(in_span(&g, &v).unwrap());
    // A bit outside every generator's support is outside the span.
    let unused = (0..40).find(|&c| g.rows().iter().all(|r| !r.get(c)));
    if let Some(c) = unused {
        let mut w = v.clone();
        w.flip(c);
        assert!(!in_span(&g, &w).unwrap());
    }
}

#[test]
fn basis_labels_are_checked() {
    let m = BinMatrix::identity(Basis::Qubits, 4);
    let wrong = BitVec::zeros(Basis::Meas, 4);
    assert!(matches!(m.mul_vec(&wrong), Err(Gf2Error::BasisMismatch { .. })));
    assert!(matches!(in_span(&m, &wrong), Err(Gf2Error::BasisMismatch { .. })));
    let short = BitVec::zeros(Basis::Qubits, 3);
    assert!(matches!(m.mul_vec(&short), Err(Gf2Error::LengthMismatch { .. })));
    let mut a = BitVec::zeros(Basis::Qubits, 4);
    assert!(a.try_xor_assign(&wrong).is_err());
}

fn matrix_strategy() -> impl Strategy<Value = (usize, usize, Vec<bool>)> {
    (1usize..40, 1usize..40).prop_flat_map(|(r, c)| (Just(r), Just(c), proptest::collection::vec(any::<bool>(), r * c)))
}

fn build(r: usize, c: usize, bits: &[bool]) -> BinMatrix {
    let mut m = BinMatrix::zeros(Basis::Generic, Basis::Qubits, r, c);
    for i in 0..r {
        for j in 0..c {
            m.set(i, j, bits[i * c + j]);
        }
    }
    m
}

proptest! {
    #[test]
    fn rank_matches_transpose_and_naive((r, c, bits) in matrix_strategy()) {
        let m = build(r, c, &bits);
        let k = rank(&m);
        prop_assert_eq!(k, rank(&m.transpose()));
        prop_assert_eq!(k, naive_rank(&m));
        prop_assert!(k <= r.min(c));
    }

    #[test]
    fn solve_returns_a_witness((r, c, bits) in matrix_strategy(), seed in any::<u64>()) {
        let m = build(r, c, &bits);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_vec(&mut rng, Basis::Generic, r);
        match solve(&m, &b).unwrap() {
            Some(x) => prop_assert_eq!(m.mul_vec(&x).unwrap(), b),
            // Unsolvable only if b leaves the column space, which raises the rank.
            None => {
                let mut aug = m.transpose();
                aug.push_row(b.clone()).unwrap();
                prop_assert_eq!(rank(&aug), rank(&m) + 1);
            }
        }
    }

    #[test]
    fn span_is_closed_under_xor((r, c, bits) in matrix_strategy(), seed in any::<u64>()) {
        let g = build(r, c, &bits);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = |rng: &mut ChaCha8Rng| {
            let mut v = BitVec::zeros(Basis::Qubits, c);
            for row in g.rows() {
                if rng.random_bool(0.5) {
                    v.xor_assign(row);
                }
            }
            v
        };
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        prop_assert!(in_span(&g, &a).unwrap() && in_span(&g, &b).unwrap());
        prop_assert!(in_span(&g, &a.xor(&b)).unwrap());
    }

    #[test]
    fn nullspace_has_full_dimension((r, c, bits) in matrix_strategy()) {
        let m = build(r, c, &bits);
        let ns = nullspace(&m);
        prop_assert_eq!(ns.len(), c - rank(&m));
        for v in &ns {
            prop_assert!(m.mul_vec(v).unwrap().is_zero());
        }
        if !ns.is_empty() {
            let basis = BinMatrix::from_sparse_rows(Basis::Generic, Basis::Qubits, c, ns.iter().map(|v| v.ones().collect::<Vec<_>>()));
            prop_assert_eq!(rank(&basis), ns.len());
        }
    }

    #[test]
    fn bitvec_ops(len in 1usize..300, a in any::<u64>(), b in any::<u64>()) {
        let mut ra = ChaCha8Rng::seed_from_u64(a);
        let mut rb = ChaCha8Rng::seed_from_u64(b);
        let x = random_vec(&mut ra, Basis::Qubits, len);
        let y = random_vec(&mut rb, Basis::Qubits, len);
        prop_assert_eq!(x.xor(&y).xor(&y), x.clone());
        prop_assert_eq!(x.dot(&y), y.dot(&x));
        prop_assert_eq!(x.dot(&y), x.overlap(&y) % 2 == 1);
        prop_assert_eq!(x.weight(), x.ones().count());
        prop_assert_eq!(x.xor(&y).weight(), x.weight() + y.weight() - 2 * x.overlap(&y));
    }
}
