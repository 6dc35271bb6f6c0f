//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use randqlp::algs::Alg;
use randqlp::bench::bench_sizes;
use randqlp_core::bounds::VERIFY_SLACK;
use randqlp_core::decomp::flops_cpqr;
use randqlp_core::metrics::optimal_errors;
use randqlp_core::rng::gaussian_matrix;
use randqlp_core::{
    build, cpqr, flops_rand_qlp, jacobi_svd, matmul, pivoted_qlp, qr, rand_qlp, random_orthogonal, rank_k_approx,
    verify_bounds, BoundReport, DenseMatrix, GaussianStream, QlpFactors, Reading, SpectrumSpec, SvdFactors, TestMatrix,
};

struct Outcome {
    pass: bool,
    summary: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self { pass, summary: summary.into(), info: Vec::new() }
    }

    fn note(mut self, line: impl Into<String>) -> Self {
        self.info.push(line.into());
        self
    }
}

fn residual(a: &DenseMatrix, f: &QlpFactors) -> f64 {
    f.reconstruct().unwrap().sub(a).unwrap().frobenius_norm() / a.frobenius_norm()
}

fn oracle(t: &TestMatrix) -> SvdFactors {
    t.exact_svd().unwrap_or_else(|| jacobi_svd(&t.a).unwrap())
}

/// `m × n` matrix `U diag(σ) Vᵀ` with Haar `U`, `V`.
fn with_spectrum(m: usize, sigma: &[f64], seed: u64) -> DenseMatrix {
    let n = sigma.len();
    let mut s = GaussianStream::with_domain(seed, 0xacce);
    let mut u = qr(&gaussian_matrix(&mut s, m, n)).unwrap().q;
    let v = random_orthogonal(&mut s, n);
    u.scale_columns(sigma);
    matmul(&u, &v, false, true).unwrap()
}

fn mixed_spectrum(kind: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut s = GaussianStream::with_domain(seed, 0x5bec);
    (0..n)
        .map(|i| {
            let x = (i + 1) as f64;
            match kind {
                0 => 1.0 / (x * x),
                1 => 1.0 / (1.0 + ((x - n as f64 / 2.0) * 10.0 / n as f64).exp()),
                2 => 1e-12f64.powf(i as f64 / n.max(2) as f64),
                3 => {
                    if i < n / 3 {
                        1.0 - i as f64 / n as f64
                    } else {
                        0.0
                    }
                }
                4 => s.next_normal().abs() + 1.0,
                _ => 10f64.powi(-((i % 7) as i32)),
            }
        })
        .collect()
}

fn c1_exact_decomposition() -> Outcome {
    let cases: Vec<(usize, usize, usize)> = (0..50)
        .map(|i| {
            let n = 1 + (i * 37 + 11) % 300;
            let m = n + (i * 53) % (401 - n);
            (i, m, n)
        })
        .collect();
    let worst = cases
        .par_iter()
        .map(|&(i, m, n)| {
            let a = with_spectrum(m, &mixed_spectrum(i % 6, n, i as u64), i as u64);
            let r = residual(&a, &rand_qlp(&a, i as u64).unwrap());
            let p = residual(&a, &pivoted_qlp(&a).unwrap());
            (r, p, m, n)
        })
        .collect::<Vec<_>>();
    let max_r = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let max_p = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let largest = worst.iter().map(|w| (w.2, w.3)).max_by_key(|(m, n)| m * n).unwrap();
    Outcome::new(
        max_r <= 1e-11 && max_p <= 1e-11,
        format!(
            "50 matrices up to {}x{}: max residual rand_qlp {max_r:.2e}, p-QLP {max_p:.2e} (tol 1e-11)",
            largest.0, largest.1
        ),
    )
}

struct Family {
    name: &'static str,
    spec: SpectrumSpec,
    k: usize,
}

fn families() -> Vec<Family> {
    vec![
        Family { name: "noisy-low-rank", spec: SpectrumSpec::noisy_low_rank(300, 60), k: 60 },
        Family { name: "fast-decay", spec: SpectrumSpec::fast_decay(300), k: 50 },
        Family { name: "s-shaped", spec: SpectrumSpec::s_shaped(300), k: 50 },
    ]
}

const SWEEP_SEEDS: u64 = 20;

/// Bound reports for every family and sketch seed (matrix seed 1).
fn bound_sweep() -> Vec<(&'static str, Vec<BoundReport>)> {
    families()
        .into_iter()
        .map(|fam| {
            let t = build(&fam.spec, 1).unwrap();
            let svd = oracle(&t);
            let reports = (0..SWEEP_SEEDS)
                .into_par_iter()
                .map(|seed| verify_bounds(&t.a, &rand_qlp(&t.a, seed).unwrap(), &svd, fam.k).unwrap())
                .collect();
            (fam.name, reports)
        })
        .collect()
}

fn c2_sandwich(sweep: &[(&str, Vec<BoundReport>)]) -> Outcome {
    let mut total = 0;
    let mut out = Outcome::new(true, "");
    for (name, reports) in sweep {
        let stated: usize = reports.iter().map(|r| r.sv_violations(Reading::Stated, VERIFY_SLACK).len()).sum();
        let proved: usize = reports.iter().map(|r| r.sv_violations(Reading::Proved, VERIFY_SLACK).len()).sum();
        let seeds_hit = reports.iter().filter(|r| !r.sv_violations(Reading::Stated, VERIFY_SLACK).is_empty()).count();
        total += stated;
        out = out.note(format!(
            "{name}: sorted |diag(L)| {stated} violations on {seeds_hit}/{} seeds; sigma(L11) {proved} violations",
            reports.len()
        ));
    }
    out.pass = total == 0;
    out.summary =
        format!("sandwich on sorted |diag(L)|, 3 families x {SWEEP_SEEDS} seeds, slack 1e-10: {total} violations");
    out
}

fn c3_l22_and_angles(sweep: &[(&str, Vec<BoundReport>)]) -> Outcome {
    let mut total = 0;
    let mut out = Outcome::new(true, "");
    for (name, reports) in sweep {
        let count = |reading| -> (usize, Vec<String>) {
            let mut n = 0;
            let mut kinds: Vec<String> = Vec::new();
            for r in reports {
                let v: Vec<_> = r
                    .l22_violation(VERIFY_SLACK)
                    .into_iter()
                    .chain(r.angle_violations(reading, VERIFY_SLACK))
                    .collect();
                n += v.len();
                for x in v {
                    if !kinds.contains(&x.what) {
                        kinds.push(x.what);
                    }
                }
            }
            (n, kinds)
        };
        let (stated, kinds) = count(Reading::Stated);
        let (proved, _) = count(Reading::Proved);
        let gated = reports.iter().filter(|r| r.applicable_phi == Some(true)).count();
        let worst_phi = reports.iter().filter_map(|r| r.angle_measured.map(|m| m.phi_q)).fold(0.0, f64::max);
        let worst_range = reports.iter().filter_map(|r| r.phi_q_range).fold(0.0, f64::max);
        total += stated;
        out = out.note(format!(
            "{name}: {stated} violations {kinds:?}; phi hypothesis held on {gated}/{} seeds; \
             max sin phi_Q(U_perp, Q2) {worst_phi:.2e}, max range(Q[L11;L21]) reading {worst_range:.2e}; {proved} violations under that reading",
            reports.len()
        ));
    }
    out.pass = total == 0;
    out.summary = format!("L22 and the four angle bounds (phi gated), same sweep: {total} violations");
    out
}

fn gap(values: &[f64], k: usize) -> f64 {
    values[k - 1] / values[k]
}

fn median(mut v: Vec<f64>) -> f64 {
    randqlp::bench::median(&mut v)
}

fn c4_gap() -> Outcome {
    let (n, k) = (300, 60);
    let rows: Vec<(f64, f64, f64)> = (1..=SWEEP_SEEDS)
        .into_par_iter()
        .map(|seed| {
            let t = build(&SpectrumSpec::noisy_low_rank(n, k), seed).unwrap();
            let rq = gap(&rand_qlp(&t.a, seed).unwrap().sorted_estimates(), k);
            let mut c: Vec<f64> = cpqr(&t.a).unwrap().r.diag().iter().map(|d| d.abs()).collect();
            c.sort_by(|a, b| b.total_cmp(a));
            let sv = gap(&jacobi_svd(&t.a).unwrap().sigma, k);
            (rq, gap(&c, k), sv)
        })
        .collect();
    let revealed = rows.iter().filter(|r| r.0 >= 5.0).count();
    let med_rq = median(rows.iter().map(|r| r.0).collect());
    let med_cp = median(rows.iter().map(|r| r.1).collect());
    let med_sv = median(rows.iter().map(|r| r.2).collect());
    let min_rq = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    Outcome::new(
        revealed >= 18 && med_cp < med_rq,
        format!("gap sigma60/sigma61 >= 5 on {revealed}/20 seeds (min {min_rq:.1}); median Rand-QLP {med_rq:.1} vs CPQR {med_cp:.1}"),
    )
    .note(format!("oracle median gap {med_sv:.1}"))
}

fn frobenius_ratio(a: &DenseMatrix, f: &QlpFactors, sigma: &[f64], k: usize) -> f64 {
    let err = rank_k_approx(f, k).unwrap().sub(a).unwrap().frobenius_norm();
    err / optimal_errors(sigma, k).0
}

fn c5_rank_k() -> Outcome {
    let ks = [10, 50, 100];
    let t = build(&SpectrumSpec::fast_decay(300), 1).unwrap();
    let rq = rand_qlp(&t.a, 1).unwrap();
    let pq = pivoted_qlp(&t.a).unwrap();
    let ratios = |f: &QlpFactors| ks.map(|k| frobenius_ratio(&t.a, f, &t.sigma_true, k));
    let (r, p) = (ratios(&rq), ratios(&pq));
    let ok = r.iter().chain(&p).all(|x| *x <= 1.1);
    let mut out = Outcome::new(
        ok,
        format!(
            "fast-decay n=300, k=10/50/100, error / optimum: Rand-QLP {} | p-QLP {} (limit 1.1)",
            fmt3(&r),
            fmt3(&p)
        ),
    );
    let spread: Vec<([f64; 3], [f64; 3])> = (2..=5u64)
        .into_par_iter()
        .map(|seed| {
            let t = build(&SpectrumSpec::fast_decay(300), seed).unwrap();
            let rq = rand_qlp(&t.a, seed).unwrap();
            let pq = pivoted_qlp(&t.a).unwrap();
            (
                ks.map(|k| frobenius_ratio(&t.a, &rq, &t.sigma_true, k)),
                ks.map(|k| frobenius_ratio(&t.a, &pq, &t.sigma_true, k)),
            )
        })
        .collect();
    for (i, (r, p)) in spread.iter().enumerate() {
        out = out.note(format!("matrix/sketch seed {}: Rand-QLP {} | p-QLP {}", i + 2, fmt3(r), fmt3(p)));
    }
    out
}

fn fmt3(v: &[f64; 3]) -> String {
    format!("{:.3}/{:.3}/{:.3}", v[0], v[1], v[2])
}

fn c6_oracle() -> Outcome {
    let specs = [
        SpectrumSpec::fast_decay(500),
        SpectrumSpec::s_shaped(400),
        SpectrumSpec::linear(300, 1.0, 0.01),
        SpectrumSpec::custom((0..120).map(|i| 10f64.powf(-(i as f64) / 30.0)).collect()),
    ];
    let errs: Vec<(String, f64)> = specs
        .par_iter()
        .map(|spec| {
            let t = build(spec, 1).unwrap();
            let got = jacobi_svd(&t.a).unwrap().sigma;
            let worst = got.iter().zip(&t.sigma_true).map(|(g, s)| (g - s).abs() / s).fold(0.0, f64::max);
            (format!("{:?} n={}", spec.kind, spec.n), worst)
        })
        .collect();
    let a = DenseMatrix::from_row_major(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
    let s = jacobi_svd(&a).unwrap().sigma;
    let r5 = 5f64.sqrt();
    let golden = ((s[0] - (r5 + 1.0) / 2.0).abs()).max((s[1] - (r5 - 1.0) / 2.0).abs());
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let mut out = Outcome::new(
        worst <= 1e-10 && golden <= 1e-14,
        format!("construction spectra max relative error {worst:.2e} (tol 1e-10); golden-ratio 2x2 error {golden:.1e} (tol 1e-14)"),
    );
    for (name, e) in errs {
        out = out.note(format!("{name}: {e:.2e}"));
    }
    out
}

fn c7_flops() -> Outcome {
    let (r, c) = (flops_rand_qlp(1000, 1000), flops_cpqr(1000, 1000));
    Outcome::new(
        r == 10_998_000_000 && c == 3_000_000_000,
        format!("flops_rand_qlp(1000,1000) = {r}, flops_cpqr(1000,1000) = {c}"),
    )
}

fn c8_scaling() -> Outcome {
    let rows = bench_sizes(&[200, 400, 800], &[Alg::Randqlp, Alg::Cpqr], 5, 1).unwrap();
    let time = |alg: &str, n: usize| rows.iter().find(|r| r.alg == alg && r.n == n).unwrap().seconds;
    let r1 = time("randqlp", 400) / time("randqlp", 200);
    let r2 = time("randqlp", 800) / time("randqlp", 400);
    let within = |r: f64| (5.0..=12.0).contains(&r);
    let vs_cpqr = time("randqlp", 800) / time("cpqr", 800);
    Outcome::new(
        within(r1) && within(r2),
        format!("Rand-QLP time ratio per doubling {r1:.2}, {r2:.2} (window [5, 12])"),
    )
    .note(format!(
        "n=800: Rand-QLP {:.4} s, CPQR {:.4} s, ratio {vs_cpqr:.2} (informational, target <= 3: {})",
        time("randqlp", 800),
        time("cpqr", 800),
        if vs_cpqr <= 3.0 { "met" } else { "not met" }
    ))
}

fn bits(m: &DenseMatrix) -> Vec<u64> {
    m.as_slice().iter().map(|v| v.to_bits()).collect()
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_randqlp"))
        .args(args)
        .env_remove("RANDQLP_SPEC")
        .env_remove("RANDQLP_INPUT")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

/// Files in `a` and `b` that differ, skipping `skip`.
fn differing_files(a: &Path, b: &Path, skip: &[&str]) -> (usize, Vec<String>) {
    let mut names: Vec<String> =
        fs::read_dir(a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    let mut compared = 0;
    let mut diff = Vec::new();
    for name in names.into_iter().filter(|n| !skip.contains(&n.as_str())) {
        compared += 1;
        if fs::read(a.join(&name)).ok() != fs::read(b.join(&name)).ok() {
            diff.push(name);
        }
    }
    (compared, diff)
}

fn c9_determinism() -> Outcome {
    let t = build(&SpectrumSpec::noisy_low_rank(200, 40), 3).unwrap();
    let same_qlp = |x: &QlpFactors, y: &QlpFactors| {
        bits(&x.q) == bits(&y.q) && bits(&x.l) == bits(&y.l) && bits(&x.p) == bits(&y.p)
    };
    let rq = same_qlp(&rand_qlp(&t.a, 7).unwrap(), &rand_qlp(&t.a, 7).unwrap());
    let pq = same_qlp(&pivoted_qlp(&t.a).unwrap(), &pivoted_qlp(&t.a).unwrap());
    let (c1, c2) = (cpqr(&t.a).unwrap(), cpqr(&t.a).unwrap());
    let cp = bits(&c1.q) == bits(&c2.q) && bits(&c1.r) == bits(&c2.r) && c1.perm == c2.perm;
    let (s1, s2) = (jacobi_svd(&t.a).unwrap(), jacobi_svd(&t.a).unwrap());
    let sv = bits(&s1.u) == bits(&s2.u) && bits(&s1.v) == bits(&s2.v) && s1.sigma == s2.sigma;

    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"kind":"noisy-low-rank","n":150,"k":30}"#;
    let mut cli_ok = true;
    for run in ["a", "b"] {
        let root = dir.path().join(run);
        let p = |sub: &str| root.join(sub).to_str().unwrap().to_string();
        cli_ok &= run_cli(&["gen", "--spec", spec, "--seed", "5", "--out", &p("gen")]);
        cli_ok &= run_cli(&["decompose", "--input", &p("gen"), "--seed", "11", "--ks", "10,30,60", "--out", &p("dec")]);
        cli_ok &= run_cli(&["bounds", "--input", &p("gen"), "--k", "30", "--seeds", "0..4", "--out", &p("bnd")]);
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut compared = 0;
    let mut diff = Vec::new();
    for sub in ["gen", "dec", "bnd"] {
        // report.json carries wall-clock times.
        let (n, d) = differing_files(&a.join(sub), &b.join(sub), &["report.json"]);
        compared += n;
        diff.extend(d.into_iter().map(|f| format!("{sub}/{f}")));
    }
    Outcome::new(
        rq && pq && cp && sv && cli_ok && diff.is_empty() && compared > 0,
        format!(
            "in-process factors identical: rand_qlp {rq}, p-QLP {pq}, cpqr {cp}, jacobi {sv}; CLI runs ok {cli_ok}, {compared} files compared, {} differ",
            diff.len()
        ),
    )
    .note(if diff.is_empty() { "no differing files".to_string() } else { format!("differing: {diff:?}") })
}

fn report(number: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    let timing = if in_time {
        format!("{:.1}s", elapsed.as_secs_f64())
    } else {
        format!("{:.1}s, over the {}s limit", elapsed.as_secs_f64(), limit.as_secs())
    };
    println!("criterion {number} {} {name}: {} [{timing}]", if pass { "PASS" } else { "FAIL" }, out.summary);
    for line in out.info {
        println!("    {line}");
    }
    pass
}

fn main() -> ExitCode {
    let min = |m: u64| Duration::from_secs(60 * m);
    let mut results = Vec::new();
    results.push(report(1, "exact decomposition", min(1), c1_exact_decomposition));

    let start = Instant::now();
    let sweep = bound_sweep();
    let sweep_time = start.elapsed();
    println!("    (bound sweep computed in {:.1}s, shared by criteria 2 and 3)", sweep_time.as_secs_f64());
    results.push(report(2, "singular value sandwich", min(2).saturating_sub(sweep_time), || c2_sandwich(&sweep)));
    results.push(report(3, "L22 and subspace bounds", min(2).saturating_sub(sweep_time), || c3_l22_and_angles(&sweep)));
    results.push(report(4, "rank-revealing gap", min(1), c4_gap));
    results.push(report(5, "near-optimal rank-k error", min(1), c5_rank_k));
    results.push(report(6, "oracle integrity", min(1), c6_oracle));
    results.push(report(7, "flop formulas", min(1), c7_flops));
    results.push(report(8, "cubic scaling", min(3), c8_scaling));
    results.push(report(9, "determinism", min(1), c9_determinism));

    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
