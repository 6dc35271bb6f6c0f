//! Command-line interface. Every flag can also come from a `RANDQLP_*`
//! environment variable (`--mem-cap` ↔ `RANDQLP_MEM_CAP`, and so on).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use randqlp_core::bounds::VERIFY_SLACK;
use randqlp_core::{
    build, jacobi_svd, lowrank_error_curve, sv_compare, verify_bounds, BoundReport, DenseMatrix, Reading, SpectrumSpec,
    SvdFactors,
};

use crate::algs::{self, Alg, Factors};
use crate::bench;
use crate::error::{Error, Result};
use crate::io::{binary, mtx, tables};

#[derive(Debug, Parser)]
#[command(name = "randqlp", version, about = "Randomized QLP decomposition harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for seed sweeps; 0 uses every core.
    #[arg(long, global = true, env = "RANDQLP_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Largest dense matrix (in bytes) an input file may expand to.
    #[arg(long, global = true, env = "RANDQLP_MEM_CAP", default_value_t = mtx::DEFAULT_MEM_CAP)]
    pub mem_cap: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic test matrix with known singular values.
    Gen(GenArgs),
    /// Factorize a matrix with one or more algorithms.
    Decompose(DecomposeArgs),
    /// Check the rank-revealing and subspace bounds over a sweep of sketch seeds.
    Bounds(BoundsArgs),
    /// Time the algorithms.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Spectrum spec: a JSON file or an inline JSON object.
    #[arg(long, env = "RANDQLP_SPEC")]
    pub spec: String,
    /// Seed of the random orthogonal factors and noise.
    #[arg(long, env = "RANDQLP_SEED", default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Spectrum spec (JSON file or inline object) to build the input from.
    #[arg(long, env = "RANDQLP_SPEC", conflicts_with = "input")]
    pub spec: Option<String>,
    /// Matrix file: `.mtx` (Matrix Market), a binary matrix, or a `gen` output directory.
    #[arg(long, env = "RANDQLP_INPUT")]
    pub input: Option<PathBuf>,
    /// Seed used to build the matrix from `--spec`.
    #[arg(long, env = "RANDQLP_MATRIX_SEED", default_value_t = 1)]
    pub matrix_seed: u64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, env = "RANDQLP_OUT")]
    pub out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long, env = "RANDQLP_FORCE")]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated algorithms.
    #[arg(long, env = "RANDQLP_ALGS", value_delimiter = ',', default_values_t = Alg::ALL)]
    pub algs: Vec<Alg>,
    /// Sketch seed for randqlp.
    #[arg(long, env = "RANDQLP_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Ranks for rank-k error curves (written per QLP algorithm).
    #[arg(long, env = "RANDQLP_KS", value_delimiter = ',')]
    pub ks: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Split index, 1 <= k < n.
    #[arg(long, env = "RANDQLP_K")]
    pub k: usize,
    /// Sketch seeds: `a..b` (half-open), `a..=b`, or a comma list.
    #[arg(long, env = "RANDQLP_SEEDS", default_value = "0..20")]
    pub seeds: Seeds,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Square sizes of Gaussian test inputs.
    #[arg(long, env = "RANDQLP_SIZES", value_delimiter = ',', default_values_t = [200usize, 400, 800], conflicts_with = "input")]
    pub sizes: Vec<usize>,
    /// Time a matrix file instead of generated inputs.
    #[arg(long, env = "RANDQLP_INPUT")]
    pub input: Option<PathBuf>,
    #[arg(long, env = "RANDQLP_ALGS", value_delimiter = ',', default_values_t = [Alg::Randqlp, Alg::Pqlp, Alg::Cpqr])]
    pub algs: Vec<Alg>,
    /// Timed runs per algorithm and size (after one warm-up).
    #[arg(long, env = "RANDQLP_REPEATS", default_value_t = bench::DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, env = "RANDQLP_SEED", default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A list of seeds parsed from `a..b`, `a..=b` or `s1,s2,...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

impl FromStr for Seeds {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad seed `{t}`"));
        let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
            (num(a)?..=num(b)?).collect()
        } else if let Some((a, b)) = s.split_once("..") {
            (num(a)?..num(b)?).collect()
        } else {
            s.split(',').map(num).collect::<std::result::Result<_, _>>()?
        };
        if seeds.is_empty() {
            return Err(format!("seed range `{s}` is empty"));
        }
        Ok(Seeds(seeds))
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code:
/// 0 success, 1 runtime or numerical error, 2 usage error.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    match cli.command {
        Command::Gen(args) => gen(&args),
        Command::Decompose(args) => decompose(&args, cli.mem_cap),
        Command::Bounds(args) => pool.install(|| bounds(&args, cli.mem_cap)),
        Command::Bench(args) => run_bench(&args, cli.mem_cap),
    }
}

pub fn load_spec(text: &str) -> Result<SpectrumSpec> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| Error::Usage(format!("invalid inline spec: {e}")));
    }
    let path = Path::new(text);
    let body = fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&body).map_err(Error::json(path))
}

/// Reads a matrix file, choosing the format from the extension.
pub fn read_matrix(path: &Path, mem_cap: u64) -> Result<DenseMatrix> {
    let path = if path.is_dir() { path.join("matrix.bin") } else { path.to_path_buf() };
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("mtx") => mtx::read_matrix_market(&path, mem_cap),
        _ => binary::read_matrix(&path, mem_cap),
    }
}

/// The input matrix plus its exact SVD when the construction provides one.
fn load_input(input: &InputArgs, mem_cap: u64) -> Result<(DenseMatrix, Option<SvdFactors>)> {
    match (&input.spec, &input.input) {
        (Some(spec), None) => {
            let t = build(&load_spec(spec)?, input.matrix_seed)?;
            let exact = t.exact_svd();
            Ok((t.a, exact))
        }
        (None, Some(path)) => Ok((read_matrix(path, mem_cap)?, None)),
        _ => Err(Error::Usage("give exactly one of --spec or --input".into())),
    }
}

/// Creates `dir` and refuses to clobber any of `files` without `force`.
fn prepare_output(out: &OutputArgs, files: &[String]) -> Result<()> {
    fs::create_dir_all(&out.out).map_err(Error::io(&out.out))?;
    if !out.force {
        for f in files {
            let p = out.out.join(f);
            if p.exists() {
                return Err(Error::Exists(p));
            }
        }
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value).map_err(Error::json(path))?;
    body.push('\n');
    fs::write(path, body).map_err(Error::io(path))
}

fn gen(args: &GenArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    prepare_output(&args.output, &["matrix.bin".into(), "sigma.csv".into(), "spec.json".into()])?;
    let t = build(&spec, args.seed)?;
    let dir = &args.output.out;
    binary::write_matrix(&dir.join("matrix.bin"), &t.a)?;
    tables::write_sigma(&dir.join("sigma.csv"), &t.sigma_true)?;
    write_json(&dir.join("spec.json"), &t.spec)?;
    println!("wrote {}x{} matrix to {}", t.a.rows(), t.a.cols(), dir.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct RunSummary {
    alg: Alg,
    seconds: f64,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    perm: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
struct DecomposeReport {
    rows: usize,
    cols: usize,
    seed: u64,
    runs: Vec<RunSummary>,
}

impl serde::Serialize for Alg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn dedup(algs: &[Alg]) -> Vec<Alg> {
    let mut out: Vec<Alg> = Vec::new();
    for a in algs {
        if !out.contains(a) {
            out.push(*a);
        }
    }
    out
}

fn decompose(args: &DecomposeArgs, mem_cap: u64) -> Result<()> {
    let algs = dedup(&args.algs);
    let (a, exact) = load_input(&args.input, mem_cap)?;
    let (m, n) = a.shape();
    if let Some(k) = args.ks.iter().find(|k| **k == 0 || **k > n) {
        return Err(Error::Usage(format!("--ks entries must lie in 1..={n}, got {k}")));
    }
    if args.ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("--ks must be strictly increasing".into()));
    }

    let qlp_algs: Vec<Alg> = algs.iter().copied().filter(|a| matches!(a, Alg::Randqlp | Alg::Pqlp)).collect();
    let mut files = vec!["diag.csv".to_string(), "report.json".to_string()];
    for alg in &algs {
        let names: &[&str] = match alg {
            Alg::Randqlp | Alg::Pqlp => &["q", "l", "p"],
            Alg::Cpqr => &["q", "r"],
            Alg::Svd => &["u", "v"],
        };
        files.extend(names.iter().map(|f| format!("{alg}-{f}.bin")));
    }
    let compare = algs.contains(&Alg::Svd) && algs.len() > 1;
    if compare {
        files.push("sv_compare.csv".into());
    }
    if !args.ks.is_empty() {
        files.extend(qlp_algs.iter().map(|a| format!("curve-{a}.csv")));
    }
    prepare_output(&args.output, &files)?;
    let dir = &args.output.out;

    let mut results: Vec<(Alg, Factors)> = Vec::new();
    let mut runs = Vec::new();
    for &alg in &algs {
        let (f, seconds) = algs::timed(alg, &a, args.seed)?;
        let residual = f.residual(&a)?;
        for (name, mat) in f.matrices() {
            binary::write_matrix(&dir.join(format!("{alg}-{name}.bin")), mat)?;
        }
        let perm = match &f {
            Factors::Cpqr(c) => Some(c.perm.clone()),
            _ => None,
        };
        println!("{alg:>8}  {seconds:10.4} s  residual {residual:.3e}");
        runs.push(RunSummary { alg, seconds, residual, perm });
        results.push((alg, f));
    }

    let names: Vec<&str> = results.iter().map(|(a, _)| a.name()).collect();
    let diags: Vec<Vec<f64>> = results.iter().map(|(_, f)| f.diagonal()).collect();
    tables::write_columns(&dir.join("diag.csv"), &names, &diags)?;

    let oracle = || -> Result<SvdFactors> {
        if let Some((_, Factors::Svd(s))) = results.iter().find(|(a, _)| *a == Alg::Svd) {
            return Ok(s.clone());
        }
        match &exact {
            Some(s) => Ok(s.clone()),
            None => Ok(jacobi_svd(&a)?),
        }
    };
    if compare || !args.ks.is_empty() {
        let reference = oracle()?;
        if compare {
            let others: Vec<(&str, Vec<f64>)> =
                results.iter().filter(|(a, _)| *a != Alg::Svd).map(|(a, f)| (a.name(), f.sorted_estimates())).collect();
            let cols: Vec<&[f64]> = others.iter().map(|(_, v)| v.as_slice()).collect();
            let labels: Vec<&str> = others.iter().map(|(n, _)| *n).collect();
            let rows = sv_compare(&reference, &cols)?;
            tables::write_sv_compare(&dir.join("sv_compare.csv"), &labels, &rows)?;
        }
        for (alg, f) in &results {
            if let (Factors::Qlp(q), false) = (f, args.ks.is_empty()) {
                let curve = lowrank_error_curve(&a, q, &args.ks, &reference)?;
                tables::write_error_curve(&dir.join(format!("curve-{alg}.csv")), &curve)?;
            }
        }
    }
    write_json(&dir.join("report.json"), &DecomposeReport { rows: m, cols: n, seed: args.seed, runs })
}

#[derive(Debug, Serialize)]
struct SeedOutcome {
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    violations_stated: Vec<randqlp_core::Violation>,
    violations_proved: Vec<randqlp_core::Violation>,
}

#[derive(Debug, Serialize)]
struct BoundsSummary {
    k: usize,
    rows: usize,
    cols: usize,
    slack: f64,
    seeds: usize,
    /// Violations with the estimates read as stated (sorted diagonal, φ_Q on (U_⊥, Q₂)).
    violations_stated: usize,
    /// Violations with the estimates the derivations control (σ(L₁₁), range of Q[L₁₁; L₂₁]).
    violations_proved: usize,
    failed_seeds: Vec<u64>,
}

fn bounds(args: &BoundsArgs, mem_cap: u64) -> Result<()> {
    let (a, exact) = load_input(&args.input, mem_cap)?;
    let (m, n) = a.shape();
    if args.k == 0 || args.k >= n {
        return Err(Error::Usage(format!("--k must satisfy 1 <= k < n = {n}, got {}", args.k)));
    }
    let mut files: Vec<String> = args.seeds.0.iter().map(|s| format!("bounds-seed-{s}.json")).collect();
    files.push("summary.json".into());
    prepare_output(&args.output, &files)?;
    let svd = match exact {
        Some(s) => s,
        None => jacobi_svd(&a)?,
    };

    let outcomes: Vec<SeedOutcome> = args
        .seeds
        .0
        .par_iter()
        .map(|&seed| {
            let result = randqlp_core::rand_qlp(&a, seed).and_then(|f| verify_bounds(&a, &f, &svd, args.k));
            match result {
                Ok(report) => SeedOutcome {
                    seed,
                    violations_stated: report.violations(Reading::Stated, VERIFY_SLACK),
                    violations_proved: report.violations(Reading::Proved, VERIFY_SLACK),
                    report: Some(report),
                    error: None,
                },
                Err(e) => SeedOutcome {
                    seed,
                    report: None,
                    error: Some(e.to_string()),
                    violations_stated: Vec::new(),
                    violations_proved: Vec::new(),
                },
            }
        })
        .collect();

    let dir = &args.output.out;
    for o in &outcomes {
        write_json(&dir.join(format!("bounds-seed-{}.json", o.seed)), o)?;
        if let Some(e) = &o.error {
            eprintln!("seed {}: {e}", o.seed);
        }
    }
    let summary = BoundsSummary {
        k: args.k,
        rows: m,
        cols: n,
        slack: VERIFY_SLACK,
        seeds: outcomes.len(),
        violations_stated: outcomes.iter().map(|o| o.violations_stated.len()).sum(),
        violations_proved: outcomes.iter().map(|o| o.violations_proved.len()).sum(),
        failed_seeds: outcomes.iter().filter(|o| o.error.is_some()).map(|o| o.seed).collect(),
    };
    println!(
        "k={} seeds={} violations: stated={} proved={} failed seeds={}",
        summary.k,
        summary.seeds,
        summary.violations_stated,
        summary.violations_proved,
        summary.failed_seeds.len()
    );
    write_json(&dir.join("summary.json"), &summary)
}

fn run_bench(args: &BenchArgs, mem_cap: u64) -> Result<()> {
    let algs = dedup(&args.algs);
    prepare_output(&args.output, &["bench.csv".into()])?;
    let rows = match &args.input {
        Some(path) => bench::bench_matrix(&read_matrix(path, mem_cap)?, &algs, args.repeats, args.seed)?,
        None => bench::bench_sizes(&args.sizes, &algs, args.repeats, args.seed)?,
    };
    for r in &rows {
        println!("{:>6} {:>8} {:10.4} s", r.n, r.alg, r.seconds);
    }
    tables::write_bench(&args.output.out.join("bench.csv"), &rows)
}
