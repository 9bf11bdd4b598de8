use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use stc::sim::FailureRecord;
use stc::stats::{bound_f_tau, estimate_pfail, fit_subthreshold, fit_threshold, tau_star, ThresholdOptions};
use stc::Error;

const DS: [usize; 3] = [5, 7, 9];

fn record(d: usize, p: f64, t: usize, trials: u64, failures: u64) -> FailureRecord {
    FailureRecord { l: d - 1, d, p, q: p, t, trials, failures, seed_base: 0 }
}

fn ansatz(p: f64, d: usize, p_th: f64, nu: f64) -> f64 {
    let x = (p - p_th) * (d as f64).powf(1.0 / nu);
    0.2 + 10.0 * x + 50.0 * x * x
}

fn synthetic(p_th: f64, nu: f64, trials: u64, rng: Option<&mut ChaCha8Rng>) -> Vec<FailureRecord> {
    let ps: Vec<f64> = (0..6).map(|i| 0.008 + 0.001 * i as f64).collect();
    let mut out = Vec::new();
    let mut rng = rng;
    for d in DS {
        for &p in &ps {
            let f = ansatz(p, d, p_th, nu);
            let k = match rng.as_deref_mut() {
                Some(r) => Binomial::new(trials, f).unwrap().sample(r),
                None => (f * trials as f64).round() as u64,
            };
            out.push(record(d, p, 4, trials, k));
        }
    }
    out
}

#[test]
fn wilson_examples() {
    assert_eq!(estimate_pfail(&record(5, 0.01, 4, 1000, 10)).unwrap().p_fail, 0.01);
    let zero = estimate_pfail(&record(5, 0.01, 4, 1000, 0)).unwrap();
    assert_eq!(zero.p_fail, 0.0);
    assert!(zero.upper > 0.0);
    let half = estimate_pfail(&record(5, 0.01, 4, 1000, 500)).unwrap();
    assert!((half.stderr - (0.25f64 / 1000.0).sqrt()).abs() < 1e-4);
}

#[test]
fn exact_crossing_is_found() {
    // Curves that agree across D at p = 0.0105 exactly.
    let recs = synthetic(0.0105, 1.2, 100_000_000, None);
    let fit = fit_threshold(&recs, 4, ThresholdOptions { bootstrap: 20, seed: 1 }).unwrap();
    assert!((fit.p_th - 0.0105).abs() < 1e-5, "{}", fit.p_th);
    assert!((fit.nu_fss - 1.2).abs() < 0.01, "{}", fit.nu_fss);
    assert_eq!(fit.ds, DS.to_vec());
    assert!((fit.window[0] - 0.008).abs() < 1e-12 && (fit.window[1] - 0.013).abs() < 1e-12);
}

#[test]
fn synthetic_threshold_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut hits = 0;
    let reps = 100;
    for rep in 0..reps {
        let recs = synthetic(0.01, 1.2, 20_000, Some(&mut rng));
        let fit = fit_threshold(&recs, 4, ThresholdOptions { bootstrap: 100, seed: rep }).unwrap();
        if (fit.p_th - 0.01).abs() <= 2.0 * fit.p_th_err {
            hits += 1;
        }
    }
    assert!(hits >= 90, "{hits}/{reps}");
}

#[test]
fn threshold_fit_errors() {
    let recs = synthetic(0.01, 1.2, 1000, None);
    let two_d: Vec<_> = recs.iter().filter(|r| r.d != 9).cloned().collect();
    assert!(matches!(fit_threshold(&two_d, 4, ThresholdOptions::default()), Err(Error::Usage(_))));
    assert!(matches!(fit_threshold(&recs, 2, ThresholdOptions::default()), Err(Error::Usage(_))));
    // Curves ordered the same way at every p have no crossing.
    let no_cross: Vec<_> = recs
        .iter()
        .map(|r| {
            let f = 0.05 + 2.0 * r.p + 0.01 * r.d as f64;
            record(r.d, r.p, 4, 100_000, (f * 100_000.0) as u64)
        })
        .collect();
    assert!(matches!(fit_threshold(&no_cross, 4, ThresholdOptions { bootstrap: 10, seed: 1 }), Err(Error::Fit(_))));
}

#[test]
fn fit_serializes_to_json() {
    let recs = synthetic(0.0105, 1.2, 1_000_000, None);
    let fit = fit_threshold(&recs, 4, ThresholdOptions { bootstrap: 10, seed: 1 }).unwrap();
    let v: serde_json::Value = serde_json::to_value(&fit).unwrap();
    for key in ["p_th", "p_th_err", "nu_fss", "nu_fss_err", "quad", "chi2", "dof", "window"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

fn synthetic_sub(alpha: f64, beta: f64, p_th: f64, t: usize, rng: &mut ChaCha8Rng) -> Vec<FailureRecord> {
    let mut out = Vec::new();
    for d in DS {
        for frac in [0.3, 0.4, 0.5, 0.6, 0.7] {
            let p = frac * p_th;
            let f = (t as f64 + 1.0) * frac.powf(alpha * (d as f64).powf(beta));
            let n = 1_000_000;
            out.push(record(d, p, t, n, Binomial::new(n, f).unwrap().sample(rng)));
        }
    }
    out
}

#[test]
fn synthetic_subthreshold_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let recs = synthetic_sub(0.8, 1.0, 0.01, 0, &mut rng);
    let fit = fit_subthreshold(&recs, 0.01, 0).unwrap();
    assert!((fit.alpha - 0.8).abs() < 3.0 * fit.alpha_err.max(1e-3), "{fit:?}");
    assert!((fit.beta - 1.0).abs() < 3.0 * fit.beta_err.max(1e-3), "{fit:?}");
    assert_eq!(fit.slopes.len(), 3);
}

#[test]
fn subthreshold_refuses_degenerate_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let recs = synthetic_sub(0.8, 1.0, 0.01, 0, &mut rng);
    let single: Vec<_> = recs.iter().filter(|r| r.d == 5).cloned().collect();
    assert!(matches!(fit_subthreshold(&single, 0.01, 0), Err(Error::Usage(_))));
    assert!(matches!(fit_subthreshold(&recs, 0.005, 0), Err(Error::Usage(_))));
}

#[test]
fn bound_examples() {
    assert!((tau_star(12) - 1.0 / 484.0).abs() < 1e-15);
    let f = bound_f_tau(tau_star(12) / 4.0, 4, 90, 12).unwrap();
    // Closed form at tau = tau*/4: Sigma * sqrt(tau*) * 2 * (1/4)^(L/2).
    let direct = 90.0 * 2.0 * tau_star(12).sqrt() * 0.25f64.powi(2);
    assert!((f - direct).abs() < 1e-12 && (f - 0.511).abs() < 1e-3, "{f}");
    let tiny = bound_f_tau(1e-12, 4, 90, 12).unwrap();
    assert!(tiny < 1e-15);
    assert!(matches!(bound_f_tau(0.01, 4, 90, 12), Err(Error::Domain(_))));
}
