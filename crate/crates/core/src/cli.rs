//! Command-line front end: verification, scans, fits, the analytic bound and
//! code export.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{build_chain, flux_syndrome_two_ways, measurement_outcome, ChainComplex};
use crate::code::{build_code, code_parameters, distance_exhaustive, graph_constants, SubsystemCode};
use crate::decoder::{ideal_decode, is_logical_error, single_shot_decode};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Echelon};
use crate::matching::MatchingGraph;
use crate::sim::{run_batch, sample_gauge, sample_noise, FailureRecord, GridPoint};
use crate::stats::{self, ThresholdOptions};

pub const RESULTS_SCHEMA: &str = "stc-results/1";
pub const FIT_SCHEMA: &str = "stc-fit/1";
pub const CSV_HEADER: &str = "schema,L,D,p,q,t,trials,failures,seed_base";
pub const WORKERS_ENV: &str = "STC_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "stc", version, about = "Subsystem toric code: construction, decoding, Monte Carlo and fits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suite at one linear size.
    Verify(VerifyArgs),
    /// Monte Carlo scan; appends one CSV row per grid point.
    Scan(ScanArgs),
    /// Finite-size-scaling threshold fit.
    FitThreshold(FitThresholdArgs),
    /// Subthreshold scaling fit.
    FitSubthreshold(FitSubthresholdArgs),
    /// Analytic failure bound f(tau).
    Bound(BoundArgs),
    /// Write the code as JSON.
    ExportCode(ExportArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "L")]
    pub l: usize,
    /// Random instances per randomized check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args, Default)]
pub struct ScanArgs {
    /// JSON file with any of the scan fields; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "L", value_delimiter = ',')]
    pub l: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Measurement error rates; every p is paired with every q. Defaults to q = p.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitThresholdArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub t: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitSubthresholdArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub pth: f64,
    #[arg(long, default_value_t = 4)]
    pub t: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub tau: f64,
    #[arg(long = "L")]
    pub l: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Scan settings as read from `--config`. Field names follow the flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "L")]
    pub l: Option<Vec<usize>>,
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub t: Option<Vec<usize>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Fully resolved scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPlan {
    pub ls: Vec<usize>,
    pub grid: Vec<GridPoint>,
    pub trials: u64,
    pub seed_base: u64,
    pub workers: usize,
    pub out: PathBuf,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl ScanArgs {
    pub fn resolve(self) -> Result<ScanPlan> {
        let file = match &self.config {
            Some(path) => serde_json::from_reader(BufReader::new(File::open(path)?))?,
            None => RunConfig::default(),
        };
        let need = |what: &str| Error::Usage(format!("scan needs --{what} (flag or config)"));
        let ls = self.l.or(file.l).ok_or_else(|| need("L"))?;
        let ps = self.p.or(file.p).ok_or_else(|| need("p"))?;
        let qs = self.q.or(file.q);
        let ts = self.t.or(file.t).ok_or_else(|| need("t"))?;
        let trials = self.trials.or(file.trials).ok_or_else(|| need("trials"))?;
        let seed_base = self.seed.or(file.seed).ok_or_else(|| need("seed"))?;
        let workers = self.workers.or(file.workers).unwrap_or_else(default_workers);
        let out = self.out.or(file.out).ok_or_else(|| need("out"))?;
        if ls.is_empty() || ps.is_empty() || ts.is_empty() || qs.as_ref().is_some_and(|q| q.is_empty()) {
            return Err(Error::Usage("scan grids must be non-empty".into()));
        }
        if ls.contains(&0) {
            return Err(Error::Usage("L must be at least 1".into()));
        }
        if let Some(x) = ps.iter().chain(qs.iter().flatten()).find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Usage(format!("rate {x} is not a probability")));
        }
        if trials == 0 || workers == 0 {
            return Err(Error::Usage("trials and workers must be positive".into()));
        }
        let mut grid = Vec::new();
        for &t in &ts {
            for &p in &ps {
                match &qs {
                    None => grid.push(GridPoint { p, q: p, t }),
                    Some(qs) => grid.extend(qs.iter().map(|&q| GridPoint { p, q, t })),
                }
            }
        }
        Ok(ScanPlan { ls, grid, trials, seed_base, workers, out })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    schema: String,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "D")]
    d: usize,
    p: f64,
    q: f64,
    t: usize,
    trials: u64,
    failures: u64,
    seed_base: u64,
}

/// Appends records, writing the header first if the file is new or empty.
/// An existing file with a different header is refused.
pub fn append_records(path: &Path, records: &[FailureRecord]) -> Result<()> {
    let fresh = match File::open(path) {
        Ok(f) => {
            let mut first = String::new();
            BufReader::new(f).read_line(&mut first)?;
            if !first.is_empty() && first.trim_end() != CSV_HEADER {
                return Err(Error::Usage(format!("{} has an unexpected header {:?}", path.display(), first.trim_end())));
            }
            first.is_empty()
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => true,
        Err(e) => return Err(e.into()),
    };
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(CsvRow {
            schema: RESULTS_SCHEMA.into(),
            l: r.l,
            d: r.d,
            p: r.p,
            q: r.q,
            t: r.t,
            trials: r.trials,
            failures: r.failures,
            seed_base: r.seed_base,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<FailureRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Usage(format!("{} is not a results file", path.display())));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: CsvRow = row?;
        if r.schema != RESULTS_SCHEMA {
            return Err(Error::Usage(format!("unsupported results schema {:?}", r.schema)));
        }
        out.push(FailureRecord {
            l: r.l,
            d: r.d,
            p: r.p,
            q: r.q,
            t: r.t,
            trials: r.trials,
            failures: r.failures,
            seed_base: r.seed_base,
        });
    }
    Ok(out)
}

pub fn run_scan(plan: &ScanPlan) -> Result<Vec<FailureRecord>> {
    let mut all = Vec::new();
    for &l in &plan.ls {
        let code = build_code(l)?;
        let cc = build_chain(&code)?;
        let recs = run_batch(&cc, &code, &plan.grid, plan.trials, plan.seed_base, plan.workers)?;
        append_records(&plan.out, &recs)?;
        all.extend(recs);
    }
    Ok(all)
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let doc = Versioned { schema: FIT_SCHEMA, body: value };
    match path {
        Some(p) => {
            let mut f = File::create(p)?;
            serde_json::to_writer_pretty(&mut f, &doc)?;
            writeln!(f)?;
        }
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(())
}

/// Outcome of one invariant check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(out: &mut Vec<Check>, name: &str, r: Result<String>) {
    let (passed, detail) = match r {
        Ok(d) => (true, d),
        Err(e) => (false, e.to_string()),
    };
    out.push(Check { name: name.into(), passed, detail });
}

fn fail(msg: String) -> Error {
    Error::Invariant(msg)
}

fn random_defects(rng: &mut ChaCha8Rng, mg: &MatchingGraph, max: usize) -> Vec<usize> {
    let interior = mg.graph().interior();
    let k = rng.random_range(0..=max.min(interior.len()));
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, interior.len(), k).into_iter().map(|i| interior[i]).collect();
    picked.sort_unstable();
    picked
}

/// Compares the pruned blossom solver against the exhaustive oracle on
/// `samples` random instances; returns the number of mismatches.
pub fn matching_mismatches(mg: &MatchingGraph, samples: usize, max_defects: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let defects = random_defects(&mut rng, mg, max_defects);
        let fast = mg.solve_mwpm(&mg.build_instance(&defects, true)?)?;
        let slow = mg.brute_force_mwpm(&mg.build_instance(&defects, false)?)?;
        let syn = mg.relative_boundary(&fast.edge_set);
        if fast.total_weight != slow.total_weight || fast.edge_set.weight() as u64 != fast.total_weight || syn != defects {
            bad += 1;
        }
    }
    Ok(bad)
}

/// A random flux `δ_M ε + δ_M ∂_Q γ` with qubit error rate `p`.
pub fn random_flux<R: Rng + ?Sized>(cc: &ChainComplex, p: f64, rng: &mut R) -> Result<BitVec> {
    let (eps, mu) = sample_noise(cc, p, 0.0, rng)?;
    let gamma = sample_gauge(cc, rng);
    measurement_outcome(cc, &eps, &mu, &gamma)
}

/// Runs every invariant at linear size `l`.
pub fn verify_suite(l: usize, samples: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let code = match build_code(l) {
        Ok(c) => c,
        Err(e) => {
            check(&mut out, "build and structural checks", Err(e));
            return out;
        }
    };
    check(&mut out, "build and structural checks", Ok(format!("N = {}", code.n())));
    check(&mut out, "K = 1 and string weight L+1", params_check(&code));
    if l <= 2 {
        check(&mut out, "exhaustive distance = L+1", distance_exhaustive(&code).and_then(|d| {
            if d == l + 1 { Ok(format!("D = {d}")) } else { Err(fail(format!("D = {d}"))) }
        }));
    }
    check(&mut out, "stabilizers commute with all gauges", commute_check(&code));
    if l >= 2 {
        let (dl, dq, sq) = graph_constants(&code);
        let want = (20, 12, 4 * l * l + 6 * l + 2);
        check(
            &mut out,
            "graph constants",
            if (dl, dq, sq) == want { Ok(format!("{:?}", (dl, dq, sq))) } else { Err(fail(format!("{:?} != {want:?}", (dl, dq, sq)))) },
        );
    }
    let cc = match build_chain(&code) {
        Ok(cc) => cc,
        Err(e) => {
            check(&mut out, "chain identities", Err(e));
            return out;
        }
    };
    check(&mut out, "chain identities", Ok("exact".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check(&mut out, "Gauss law on random fluxes", (|| {
        for _ in 0..samples {
            let phi = random_flux(&cc, 0.05, &mut rng)?;
            flux_syndrome_two_ways(&cc, &phi)?;
        }
        Ok(format!("{samples} fluxes"))
    })());
    check(&mut out, "flux confinement", (|| {
        for _ in 0..samples {
            let phi = random_flux(&cc, 0.05, &mut rng)?;
            let m = ideal_decode(&cc, &code, &flux_syndrome_two_ways(&cc, &phi)?)?;
            if 4 * m.weight() > phi.weight() {
                return Err(fail(format!("recovery {} for flux {}", m.weight(), phi.weight())));
            }
        }
        Ok(format!("{samples} fluxes"))
    })());
    for (name, mg, s) in [("matching oracle (measurement graph)", &cc.meas, 1), ("matching oracle (qubit graph)", &cc.qubits, 2)] {
        check(&mut out, name, matching_mismatches(mg, samples, 12, seed ^ s).and_then(|bad| {
            if bad == 0 { Ok(format!("{samples} instances")) } else { Err(fail(format!("{bad} mismatches"))) }
        }));
    }
    check(&mut out, "clean outcomes: exact decoding, pairing = membership", decode_check(&cc, &code, samples, &mut rng));
    out
}

fn params_check(code: &SubsystemCode) -> Result<String> {
    let (n, k, d) = code_parameters(code);
    if k != 1 || d != code.l + 1 {
        return Err(fail(format!("[[{n}, {k}, {d}]]")));
    }
    Ok(format!("[[{n}, {k}, {d}]]"))
}

fn commute_check(code: &SubsystemCode) -> Result<String> {
    let xs = code.x_stab_matrix();
    let zs = code.z_stab_matrix();
    let xg = code.x_gauge_matrix();
    let zg = code.z_gauge_matrix();
    for (a, b) in [(&xs, &zg), (&zs, &xg), (&xs, &zs)] {
        for r in a.rows() {
            if let Some(j) = b.rows().iter().position(|s| r.dot(s)) {
                return Err(fail(format!("stabilizer anticommutes with generator {j}")));
            }
        }
    }
    Ok(format!("{} + {} stabilizers", xs.n_rows(), zs.n_rows()))
}

fn decode_check(cc: &ChainComplex, code: &SubsystemCode, samples: usize, rng: &mut ChaCha8Rng) -> Result<String> {
    let gauge = Echelon::new(&code.x_gauge_matrix(), false);
    for _ in 0..samples {
        let (eps, mu) = sample_noise(cc, 0.03, 0.0, rng)?;
        let gamma = sample_gauge(cc, rng);
        let zeta = measurement_outcome(cc, &eps, &mu, &gamma)?;
        let out = single_shot_decode(cc, code, &zeta)?;
        if !out.mu_hat.is_zero() {
            return Err(fail("nonzero measurement correction for a clean outcome".into()));
        }
        let residual = eps.xor(&out.chi);
        let pairing = is_logical_error(code, &residual)?;
        let member = gauge.contains(&residual)?;
        if pairing == member {
            return Err(fail("pairing verdict disagrees with gauge-group membership".into()));
        }
    }
    Ok(format!("{samples} trials"))
}

fn print_checks(checks: &[Check]) -> bool {
    for c in checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        eprintln!("failed invariants: {}", failed.join(", "));
    }
    failed.is_empty()
}

/// Executes a parsed command. `Ok(false)` means some invariant failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify(a) => Ok(print_checks(&verify_suite(a.l, a.samples, a.seed))),
        Command::Scan(a) => {
            let plan = a.resolve()?;
            for r in run_scan(&plan)? {
                println!("L={} p={} q={} t={}: {}/{}", r.l, r.p, r.q, r.t, r.failures, r.trials);
            }
            Ok(true)
        }
        Command::FitThreshold(a) => {
            let recs = read_records(&a.input)?;
            let fit = stats::fit_threshold(&recs, a.t, ThresholdOptions { bootstrap: a.bootstrap, seed: a.seed })?;
            eprintln!("p_th({}) = {} +- {}, nu = {} +- {}", fit.t, fit.p_th, fit.p_th_err, fit.nu_fss, fit.nu_fss_err);
            write_json(a.out.as_deref(), &fit)?;
            Ok(true)
        }
        Command::FitSubthreshold(a) => {
            let recs = read_records(&a.input)?;
            let fit = stats::fit_subthreshold(&recs, a.pth, a.t)?;
            eprintln!("alpha = {} +- {}, beta = {} +- {}", fit.alpha, fit.alpha_err, fit.beta, fit.beta_err);
            write_json(a.out.as_deref(), &fit)?;
            Ok(true)
        }
        Command::Bound(a) => {
            let code = build_code(a.l)?;
            let (_, dq, sq) = graph_constants(&code);
            let f = stats::bound_f_tau(a.tau, a.l, sq, dq)?;
            println!("tau* = {}", stats::tau_star(dq));
            println!("f = {f}");
            Ok(true)
        }
        Command::ExportCode(a) => {
            let code = build_code(a.l)?;
            let mut f = File::create(&a.out)?;
            serde_json::to_writer_pretty(&mut f, &code.export())?;
            writeln!(f)?;
            Ok(true)
        }
    }
}
