//! Failure-rate estimates, finite-size-scaling threshold fits, subthreshold
//! fits and the analytic failure bound.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::FailureRecord;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PFail {
    pub p_fail: f64,
    /// Half-width of the one-sigma Wilson interval.
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
}

/// One-sigma Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64) -> PFail {
    let n_f = n as f64;
    let f = k as f64 / n_f;
    let z2 = 1.0;
    let denom = 1.0 + z2 / n_f;
    let center = (f + z2 / (2.0 * n_f)) / denom;
    let half = (f * (1.0 - f) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    PFail { p_fail: f, stderr: half, lower: (center - half).max(0.0), upper: (center + half).min(1.0) }
}

pub fn estimate_pfail(rec: &FailureRecord) -> Result<PFail> {
    if rec.trials == 0 {
        return Err(Error::Usage("record has no trials".into()));
    }
    if rec.failures > rec.trials {
        return Err(Error::Usage("more failures than trials".into()));
    }
    Ok(wilson(rec.failures, rec.trials))
}

/// Tallies merged per `(D, p)` for one cycle count.
fn merge(records: &[FailureRecord], t: usize) -> BTreeMap<usize, Vec<(f64, u64, u64)>> {
    let mut acc: BTreeMap<(usize, u64), (f64, u64, u64)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.t == t) {
        let e = acc.entry((r.d, r.p.to_bits())).or_insert((r.p, 0, 0));
        e.1 += r.trials;
        e.2 += r.failures;
    }
    let mut out: BTreeMap<usize, Vec<(f64, u64, u64)>> = BTreeMap::new();
    for ((d, _), v) in acc {
        out.entry(d).or_default().push(v);
    }
    for v in out.values_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    out
}

/// Minimizes `f` from `x0` with the Nelder–Mead simplex.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect() };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if (worst - best).abs() <= tol * (best.abs() + tol) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let xw = simplex[n].0.clone();
        let xr = lerp(&centroid, &xw, -1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &xw, -2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let x = lerp(&centroid, &xr, 0.5);
                let fx = f(&x);
                (x, fx)
            } else {
                let x = lerp(&centroid, &xw, 0.5);
                let fx = f(&x);
                (x, fx)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = lerp(&x0, &s.0, 0.5);
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Weighted linear least squares; returns coefficients and covariance.
fn weighted_lstsq(rows: &[Vec<f64>], y: &[f64], w: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = rows.first()?.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for ((r, &yi), &wi) in rows.iter().zip(y).zip(w) {
        for i in 0..m {
            b[i] += wi * r[i] * yi;
            for j in 0..m {
                a[i][j] += wi * r[i] * r[j];
            }
        }
    }
    let inv = invert(a)?;
    let coef = (0..m).map(|i| (0..m).map(|j| inv[i][j] * b[j]).sum()).collect();
    Some((coef, inv))
}

/// Gauss–Jordan inverse of a small symmetric positive matrix.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let m = a.len();
    let mut inv: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for c in 0..m {
        let piv = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        inv.swap(c, piv);
        let d = a[c][c];
        for j in 0..m {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for i in 0..m {
            if i != c {
                let f = a[i][c];
                for j in 0..m {
                    a[i][j] -= f * a[c][j];
                    inv[i][j] -= f * inv[c][j];
                }
            }
        }
    }
    Some(inv)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub t: usize,
    pub p_th: f64,
    pub p_th_err: f64,
    /// Exponent in `x = (p - p_th) D^(1/nu_fss)`.
    pub nu_fss: f64,
    pub nu_fss_err: f64,
    /// Collapse polynomial `A + B x + C x²`.
    pub quad: [f64; 3],
    pub chi2: f64,
    pub dof: usize,
    pub window: [f64; 2],
    pub ds: Vec<usize>,
    pub bootstrap: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct ThresholdOptions {
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { bootstrap: 200, seed: 1 }
    }
}

#[derive(Clone, Copy, Debug)]
struct Point {
    p: f64,
    d: f64,
    f: f64,
    w: f64,
}

fn points_from(data: &BTreeMap<usize, Vec<(f64, u64, u64)>>, counts: Option<&[u64]>) -> Vec<Point> {
    let mut out = Vec::new();
    let mut idx = 0;
    for (&d, v) in data {
        for &(p, n, k) in v {
            let k = counts.map_or(k, |c| c[idx]);
            idx += 1;
            let e = wilson(k, n);
            out.push(Point { p, d: d as f64, f: e.p_fail, w: 1.0 / (e.stderr * e.stderr) });
        }
    }
    out
}

/// χ² of the best quadratic collapse for fixed `(p_th, nu)`.
fn collapse_chi2(pts: &[Point], p_th: f64, nu: f64) -> (f64, [f64; 3]) {
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|q| {
            let x = (q.p - p_th) * q.d.powf(1.0 / nu);
            vec![1.0, x, x * x]
        })
        .collect();
    let y: Vec<f64> = pts.iter().map(|q| q.f).collect();
    let w: Vec<f64> = pts.iter().map(|q| q.w).collect();
    match weighted_lstsq(&rows, &y, &w) {
        Some((c, _)) => {
            let chi2 = rows
                .iter()
                .zip(&y)
                .zip(&w)
                .map(|((r, yi), wi)| {
                    let m = c[0] + c[1] * r[1] + c[2] * r[2];
                    wi * (yi - m) * (yi - m)
                })
                .sum();
            (chi2, [c[0], c[1], c[2]])
        }
        None => (f64::INFINITY, [0.0; 3]),
    }
}

fn best_collapse(pts: &[Point], window: [f64; 2], starts: &[(f64, f64)]) -> (f64, f64, f64) {
    let span = window[1] - window[0];
    let objective = |x: &[f64]| {
        let nu = x[1].exp();
        if !nu.is_finite() || nu > 1e3 {
            return f64::INFINITY;
        }
        collapse_chi2(pts, x[0], nu).0
    };
    let mut best = (f64::INFINITY, 0.0, 1.0);
    for &(p0, nu0) in starts {
        let (x, fx) = nelder_mead(objective, &[p0, nu0.ln()], &[0.1 * span, 0.2], 1e-12, 2000);
        if fx < best.0 {
            best = (fx, x[0], x[1].exp());
        }
    }
    best
}

/// Fits `p_fail ≈ A + B x + C x²` with `x = (p - p_th) D^(1/nu)` over all
/// records at cycle count `t`. The fit window is the scanned p-range.
pub fn fit_threshold(records: &[FailureRecord], t: usize, opts: ThresholdOptions) -> Result<ThresholdFit> {
    let data = merge(records, t);
    if data.len() < 3 {
        return Err(Error::Usage(format!("need at least 3 distances at t = {t}, got {}", data.len())));
    }
    for (d, v) in &data {
        if v.len() < 5 {
            return Err(Error::Usage(format!("need at least 5 p-points for D = {d}, got {}", v.len())));
        }
    }
    let pts = points_from(&data, None);
    let lo = pts.iter().map(|q| q.p).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|q| q.p).fold(f64::NEG_INFINITY, f64::max);
    let window = [lo, hi];
    let mut starts = Vec::new();
    for i in 1..=5 {
        for nu in [0.7, 1.0, 1.5, 2.5] {
            starts.push((lo + (hi - lo) * i as f64 / 6.0, nu));
        }
    }
    let (chi2, p_th, nu) = best_collapse(&pts, window, &starts);
    if !chi2.is_finite() || p_th < lo || p_th > hi {
        return Err(Error::Fit(format!("no crossing inside the scanned range [{lo}, {hi}] (best p_th = {p_th})")));
    }
    let (_, quad) = collapse_chi2(&pts, p_th, nu);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let trials: Vec<(u64, f64)> = data.values().flatten().map(|&(_, n, k)| (n, k as f64 / n as f64)).collect();
    let mut samples = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let counts: Vec<u64> = trials
            .iter()
            .map(|&(n, f)| Binomial::new(n, f).map(|b| b.sample(&mut rng)).unwrap_or(0))
            .collect();
        let bp = points_from(&data, Some(&counts));
        let (c, pb, nb) = best_collapse(&bp, window, &[(p_th, nu)]);
        if c.is_finite() {
            samples.push((pb, nb));
        }
    }
    let sd = |xs: Vec<f64>| -> f64 {
        if xs.len() < 2 {
            return f64::NAN;
        }
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    };
    Ok(ThresholdFit {
        t,
        p_th,
        p_th_err: sd(samples.iter().map(|s| s.0).collect()),
        nu_fss: nu,
        nu_fss_err: sd(samples.iter().map(|s| s.1).collect()),
        quad,
        chi2,
        dof: pts.len().saturating_sub(5),
        window,
        ds: data.keys().copied().collect(),
        bootstrap: samples.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub d: usize,
    pub a: f64,
    pub a_err: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubthresholdFit {
    pub t: usize,
    pub p_th: f64,
    pub alpha: f64,
    pub alpha_err: f64,
    pub beta: f64,
    pub beta_err: f64,
    pub slopes: Vec<SlopeFit>,
}

/// Fits `p_fail = (t+1) (p/p_th)^(alpha D^beta)`: per-D slopes `a` of
/// `log p_fail - log(t+1)` against `log(p/p_th)` through the origin, then a
/// straight line `log a = log alpha + beta log D`. Points with no failures
/// carry no information on the log scale and are skipped.
pub fn fit_subthreshold(records: &[FailureRecord], p_th: f64, t: usize) -> Result<SubthresholdFit> {
    if !(p_th > 0.0) {
        return Err(Error::Usage(format!("p_th = {p_th} must be positive")));
    }
    let data = merge(records, t);
    if let Some(bad) = data.values().flatten().find(|v| v.0 >= p_th) {
        return Err(Error::Usage(format!("p = {} is not below p_th = {p_th}", bad.0)));
    }
    if data.len() < 3 {
        return Err(Error::Usage(format!("need at least 3 distances at t = {t}, got {}", data.len())));
    }
    let offset = ((t + 1) as f64).ln();
    let mut slopes = Vec::new();
    for (&d, v) in &data {
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut pts = Vec::new();
        for &(p, n, k) in v {
            if k == 0 {
                continue;
            }
            let e = wilson(k, n);
            let x = (p / p_th).ln();
            let y = e.p_fail.ln() - offset;
            let sy = e.stderr / e.p_fail;
            let w = 1.0 / (sy * sy);
            sxx += w * x * x;
            sxy += w * x * y;
            pts.push((x, y, w));
        }
        if pts.is_empty() {
            return Err(Error::Fit(format!("no failures observed at D = {d}")));
        }
        let a = sxy / sxx;
        let mut a_err = (1.0 / sxx).sqrt();
        if pts.len() > 1 {
            let chi2: f64 = pts.iter().map(|&(x, y, w)| w * (y - a * x).powi(2)).sum();
            a_err *= (chi2 / (pts.len() - 1) as f64).sqrt().max(1.0);
        }
        slopes.push(SlopeFit { d, a, a_err, points: pts.len() });
    }
    if let Some(s) = slopes.iter().find(|s| !(s.a > 0.0)) {
        return Err(Error::Fit(format!("non-positive slope {} at D = {}", s.a, s.d)));
    }
    let rows: Vec<Vec<f64>> = slopes.iter().map(|s| vec![1.0, (s.d as f64).ln()]).collect();
    let y: Vec<f64> = slopes.iter().map(|s| s.a.ln()).collect();
    let w: Vec<f64> = slopes.iter().map(|s| (s.a / s.a_err).powi(2)).collect();
    let (c, cov) = weighted_lstsq(&rows, &y, &w).ok_or_else(|| Error::Fit("degenerate log D values".into()))?;
    let chi2: f64 = rows.iter().zip(&y).zip(&w).map(|((r, yi), wi)| wi * (yi - c[0] - c[1] * r[1]).powi(2)).sum();
    let scale = if rows.len() > 2 { (chi2 / (rows.len() - 2) as f64).max(1.0) } else { 1.0 };
    let alpha = c[0].exp();
    Ok(SubthresholdFit {
        t,
        p_th,
        alpha,
        alpha_err: alpha * (cov[0][0] * scale).sqrt(),
        beta: c[1],
        beta_err: (cov[1][1] * scale).sqrt(),
        slopes,
    })
}

/// `τ* = (2(Δ_qub − 1))⁻²`.
pub fn tau_star(delta_qub: usize) -> f64 {
    let x = 2.0 * (delta_qub as f64 - 1.0);
    1.0 / (x * x)
}

/// `f(τ) = Σ_qub τ* / (√τ* − √τ) · (τ/τ*)^(L/2)`, valid for `0 ≤ τ < τ*`.
pub fn bound_f_tau(tau: f64, l: usize, sigma_qub: usize, delta_qub: usize) -> Result<f64> {
    if delta_qub < 2 {
        return Err(Error::Domain(format!("delta_qub = {delta_qub} must be at least 2")));
    }
    let ts = tau_star(delta_qub);
    if !(0.0..ts).contains(&tau) {
        return Err(Error::Domain(format!("tau = {tau} must lie in [0, tau* = {ts})")));
    }
    Ok(sigma_qub as f64 * ts / (ts.sqrt() - tau.sqrt()) * (tau / ts).powf(l as f64 / 2.0))
}
