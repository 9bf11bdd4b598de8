//! Sustained Monte Carlo error correction under bit-flip and measurement
//! noise.
//!
//! A trial starts from a zero residual error and runs `t` noisy cycles
//! (fresh bit flips, random gauge operator, noisy outcome, single-shot
//! decoding). A final round adds fresh bit flips and decodes a noiseless
//! outcome; the trial fails when the residual is a nontrivial logical.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{measurement_outcome, ChainComplex};
use crate::code::SubsystemCode;
use crate::decoder::{is_logical_error, single_shot_decode};
use crate::error::{Error, Result};
use crate::gf2::{Basis, BitVec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub t: usize,
    pub trials: u64,
    pub failures: u64,
    pub seed_base: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub p: f64,
    pub q: f64,
    pub t: usize,
}

#[derive(Clone, Debug)]
pub struct TrialState {
    pub rho: BitVec,
}

impl TrialState {
    pub fn new(code: &SubsystemCode) -> Self {
        TrialState { rho: BitVec::zeros(Basis::Qubits, code.n()) }
    }
}

fn bernoulli(p: f64, what: &str) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|_| Error::Usage(format!("{what} = {p} is not a probability")))
}

fn sample_bits<R: Rng + ?Sized>(basis: Basis, len: usize, dist: &Bernoulli, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(basis, len);
    for i in 0..len {
        if dist.sample(rng) {
            v.set(i, true);
        }
    }
    v
}

/// Independent bit flips on qubits (rate `p`) and on measured operators
/// (rate `q`).
pub fn sample_noise<R: Rng + ?Sized>(cc: &ChainComplex, p: f64, q: f64, rng: &mut R) -> Result<(BitVec, BitVec)> {
    let bp = bernoulli(p, "p")?;
    let bq = bernoulli(q, "q")?;
    Ok((sample_bits(Basis::Qubits, cc.n_qubits(), &bp, rng), sample_bits(Basis::Meas, cc.n_meas(), &bq, rng)))
}

/// Each X-type gauge generator included with probability ½.
pub fn sample_gauge<R: Rng + ?Sized>(cc: &ChainComplex, rng: &mut R) -> BitVec {
    let n = cc.n_x_gauge();
    let mut v = BitVec::zeros(Basis::XGauge, n);
    let mut word = 0u64;
    for i in 0..n {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        if word >> (i % 64) & 1 == 1 {
            v.set(i, true);
        }
    }
    v
}

/// One noisy correction cycle.
pub fn run_cycle<R: Rng + ?Sized>(
    state: &mut TrialState,
    cc: &ChainComplex,
    code: &SubsystemCode,
    p: f64,
    q: f64,
    rng: &mut R,
) -> Result<()> {
    let (eps, mu) = sample_noise(cc, p, q, rng)?;
    state.rho.try_xor_assign(&eps)?;
    let gamma = sample_gauge(cc, rng);
    let zeta = measurement_outcome(cc, &state.rho, &mu, &gamma)?;
    let out = single_shot_decode(cc, code, &zeta)?;
    state.rho.try_xor_assign(&out.chi)?;
    Ok(())
}

/// `t` noisy cycles and a final noiseless round; returns true on failure.
pub fn run_trial<R: Rng + ?Sized>(
    cc: &ChainComplex,
    code: &SubsystemCode,
    p: f64,
    q: f64,
    t: usize,
    rng: &mut R,
) -> Result<bool> {
    let mut state = TrialState::new(code);
    for _ in 0..t {
        run_cycle(&mut state, cc, code, p, q, rng)?;
    }
    run_cycle(&mut state, cc, code, p, 0.0, rng)?;
    is_logical_error(code, &state.rho)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one grid point: a hash of the seed base and the point itself,
/// so a point's tallies do not depend on the rest of the grid.
pub fn point_key(seed_base: u64, l: usize, pt: &GridPoint) -> u64 {
    [l as u64, pt.p.to_bits(), pt.q.to_bits(), pt.t as u64]
        .into_iter()
        .fold(splitmix(seed_base), |h, x| splitmix(h ^ x))
}

/// Random stream of one trial: the point key picks the key, the trial index
/// picks the ChaCha stream.
pub fn trial_rng(point_key: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point_key);
    rng.set_stream(trial);
    rng
}

/// Tallies `trials` trials at each grid point using `workers` threads.
/// Results do not depend on the worker count.
pub fn run_batch(
    cc: &ChainComplex,
    code: &SubsystemCode,
    grid: &[GridPoint],
    trials: u64,
    seed_base: u64,
    workers: usize,
) -> Result<Vec<FailureRecord>> {
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    for pt in grid {
        bernoulli(pt.p, "p")?;
        bernoulli(pt.q, "q")?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    pool.install(|| {
        grid.iter()
            .map(|pt| {
                let key = point_key(seed_base, code.l, pt);
                let failures = (0..trials)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = trial_rng(key, i);
                        run_trial(cc, code, pt.p, pt.q, pt.t, &mut rng).map(u64::from)
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))?;
                Ok(FailureRecord {
                    l: code.l,
                    d: code.d(),
                    p: pt.p,
                    q: pt.q,
                    t: pt.t,
                    trials,
                    failures,
                    seed_base,
                })
            })
            .collect()
    })
}
