//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when
//! any criterion fails. Runtime targets are reported next to each line but
//! not judged; they depend on the machine.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use wave_lab::{ExperimentConfig, ExperimentKind};
use wave_lab_core::corpus::{smooth_corpus, SmoothCase};
use wave_lab_core::energy::{corollary_bounds, eta_of_t, verify_energy_estimate, GronwallTolerance};
use wave_lab_core::fd_oracle::{compare, compare_lifted, fd_solve, FdGrid};
use wave_lab_core::functions::{Forcing, Profile, TimeFn};
use wave_lab_core::galerkin::{solve_ivp, GalerkinSystem, Trajectory};
use wave_lab_core::lifting::{solve_nonhomogeneous, BoundaryData};
use wave_lab_core::singular::{
    default_eps_grid, loglog_fit, regularize, DistributionSpec, Mollifier, MollifierShape,
};
use wave_lab_core::spectral::{EigenBasis, Interval, SpectralCoeffs};
use wave_lab_core::vws::{
    consistency_experiment, existence_sweep, uniqueness_experiment, AltMollifiers, Datum, VwsProblem,
};

const CORPUS_SEED: u64 = 20_240_601;

// Frozen baselines. Results are deterministic, so a baseline drifting by
// more than BASELINE_RTOL means the numerics changed.
const BASELINE_RTOL: f64 = 1e-6;
/// Corpus max of LHS/RHS in the energy estimate (measured 2.2789).
const ENERGY_RATIO_FROZEN: f64 = 2.3;
/// Worst spectral/FD discrepancy over the 10 oracle cases (measured 1.177e-5).
const ORACLE_WORST_FROZEN: f64 = 1.2e-5;
const DELTA_POTENTIAL_N: f64 = 0.094_137_095_511_034_1;
const DELTA_DATUM_N: f64 = 0.366_690_161_699_417_15;
const DELTA_DATUM_R2: f64 = 0.594_993_049_300_650_2;
const UNIQUENESS_SLOPE: f64 = 1.773_516_439_535_772;
const CONSISTENCY_SLOPE: f64 = 1.999_932_710_606_735;
const CONSISTENCY_TERMINAL: f64 = 1.516_479_435_676_701e-7;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

fn near(value: f64, baseline: f64) -> bool {
    (value - baseline).abs() <= BASELINE_RTOL * baseline.abs()
}

fn basis(length: f64, m: usize) -> Arc<EigenBasis> {
    Arc::new(EigenBasis::build(Interval::with_default_quadrature(length).unwrap(), m).unwrap())
}

fn solve_case(case: &SmoothCase, m: usize, dt: f64) -> (GalerkinSystem, Trajectory, SpectralCoeffs, SpectralCoeffs) {
    let b = basis(case.length, m);
    let iv = b.interval().clone();
    let u0 = case.u0().sample(&iv);
    let u1 = case.u1().sample(&iv);
    let d0 = b.project(&u0).unwrap();
    let d1 = b.project(&u1).unwrap();
    let (sys, traj) = solve_ivp(&case.potential().sample(&iv), case.source(), &u0, &u1, b, 1.0, dt).unwrap();
    (sys, traj, d0, d1)
}

fn exact_mode() -> Outcome {
    let b = basis(PI, 8);
    let iv = b.interval().clone();
    let w1 = Profile::new(|x: f64| (2.0 / PI).sqrt() * x.sin());
    let (sys, traj) = solve_ivp(
        &Profile::zero().sample(&iv),
        Forcing::zero(),
        &w1.sample(&iv),
        &Profile::zero().sample(&iv),
        b,
        2.0 * PI,
        1e-3,
    )
    .unwrap();
    // the sines are L2-orthonormal, so the L2 error is the coefficient error
    let err = traj
        .times()
        .iter()
        .zip(traj.d())
        .map(|(&t, d)| {
            d.as_slice()
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let exact = if k == 0 { t.cos() } else { 0.0 };
                    (c - exact).powi(2)
                })
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let eta_dev = eta_of_t(&traj, &sys).iter().map(|e| (e - 1.0).abs()).fold(0.0, f64::max);
    Outcome::new(
        err <= 1e-5 && eta_dev <= 1e-5,
        format!("max L2 error {err:.3e} (<= 1e-5), max |eta - 1| {eta_dev:.3e} (<= 1e-5)"),
    )
}

struct CorpusRun {
    violations: usize,
    ratio: f64,
    corollary_finite: bool,
    corollary_count: usize,
    v_vs_ut: f64,
}

/// Gronwall check written out independently: trapezoid integral of xi and
/// the flat drift allowance, no relative slack.
fn strict_violations(times: &[f64], eta: &[f64], xi: &[f64], dt: f64) -> usize {
    let eta0 = eta[0];
    let mut int_xi = 0.0;
    let mut count = 0;
    for n in 0..times.len() {
        if n > 0 {
            int_xi += 0.5 * (xi[n] + xi[n - 1]) * (times[n] - times[n - 1]);
        }
        let bound = times[n].exp() * (eta0 + int_xi) + 10.0 * dt * dt * (1.0 + eta0 + int_xi);
        if eta[n] > bound {
            count += 1;
        }
    }
    count
}

fn corpus_runs() -> Vec<CorpusRun> {
    smooth_corpus(CORPUS_SEED, 50)
        .par_iter()
        .map(|case| {
            let (sys, traj, d0, d1) = solve_case(case, 32, 1e-3);
            let r = verify_energy_estimate(&traj, &sys, &d0, &d1, GronwallTolerance::default()).unwrap();
            let violations = strict_violations(&r.times, &r.eta_values, &r.xi_values, traj.dt()).max(r.violations);
            let c = corollary_bounds(&traj, &sys, &d0, &d1).unwrap();
            let ratios = c.ratios();
            CorpusRun {
                violations,
                ratio: r.ratio,
                corollary_finite: ratios.iter().all(|x| x.ratio.is_finite()),
                corollary_count: ratios.len(),
                v_vs_ut: c.differentiated.as_ref().map_or(f64::INFINITY, |d| d.v_vs_numerical_ut),
            }
        })
        .collect()
}

fn gronwall(runs: &[CorpusRun]) -> Outcome {
    let total: usize = runs.iter().map(|r| r.violations).sum();
    Outcome::new(total == 0, format!("{} cases, {total} violations", runs.len()))
}

fn energy_ratio(runs: &[CorpusRun]) -> Outcome {
    let finite = runs.iter().all(|r| r.ratio.is_finite());
    let max = runs.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let regression = max <= ENERGY_RATIO_FROZEN;
    Outcome::new(
        finite && max <= 50.0 && regression,
        format!("all finite: {finite}, max ratio {max:.4} (<= 50, frozen <= {ENERGY_RATIO_FROZEN})"),
    )
}

fn corollary(runs: &[CorpusRun]) -> Outcome {
    let finite = runs.iter().all(|r| r.corollary_finite && r.corollary_count == 7);
    let worst = runs.iter().map(|r| r.v_vs_ut).fold(0.0, f64::max);
    Outcome::new(
        finite && worst <= 5e-3,
        format!("7 ratios finite on every case: {finite}, max ||v - D_t u|| {worst:.3e} (<= 5e-3)"),
    )
}

fn oracle_equivalence() -> Outcome {
    let worst = smooth_corpus(CORPUS_SEED, 10)
        .par_iter()
        .map(|case| {
            let (_, traj, _, _) = solve_case(case, 32, 2.5e-4);
            let grid = FdGrid::new(case.length, 400, 2.5e-4, &case.potential(), &case.u0(), &case.u1()).unwrap();
            let fd = fd_solve(&grid, &case.source(), None, 1.0, &[0.25, 0.5, 0.75, 1.0]).unwrap();
            compare(&traj, case.length, &fd).max_l2
        })
        .reduce(|| 0.0, f64::max);
    let regression = worst <= ORACLE_WORST_FROZEN;
    Outcome::new(
        worst <= 1e-3 && regression,
        format!("worst L2 discrepancy {worst:.3e} (<= 1e-3, frozen <= {ORACLE_WORST_FROZEN:e})"),
    )
}

fn mollifier_exponents() -> Outcome {
    let grid = default_eps_grid();
    let base = Interval::with_default_quadrature(PI).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for shape in [MollifierShape::StandardBump, MollifierShape::Triangle, MollifierShape::QuadraticSpline] {
        let psi = Mollifier::new(shape);
        let (mut linf, mut l2) = (Vec::new(), Vec::new());
        for &eps in &grid {
            let iv = base.refined(&[(PI / 2.0, eps)]).unwrap();
            let v = regularize(&DistributionSpec::dirac(PI / 2.0, 1.0), &psi, eps, &iv).unwrap();
            linf.push(v.sup_norm());
            let sq: Vec<f64> = v.values().iter().map(|x| x * x).collect();
            l2.push(iv.integrate(&sq).sqrt());
        }
        let fi = loglog_fit(&grid, &linf).unwrap();
        let f2 = loglog_fit(&grid, &l2).unwrap();
        passed &= (fi.fitted_n - 1.0).abs() <= 0.02
            && (f2.fitted_n - 0.5).abs() <= 0.05
            && fi.r_squared >= 0.999
            && f2.r_squared >= 0.999;
        parts.push(format!(
            "{shape:?}: Linf N {:.4} R2 {:.6}, L2 N {:.4} R2 {:.6}",
            fi.fitted_n, fi.r_squared, f2.fitted_n, f2.r_squared
        ));
    }
    Outcome::new(passed, parts.join("; "))
}

fn delta_problem() -> VwsProblem {
    let m = 64;
    VwsProblem::new(PI, 1.0, 0.4 / (m as f64 + 32.0), m, default_eps_grid())
}

fn bump() -> Mollifier {
    Mollifier::new(MollifierShape::StandardBump)
}

fn delta_potential_problem() -> VwsProblem {
    let mut p = delta_problem();
    p.potential = Datum::mollified(DistributionSpec::dirac(PI / 2.0, 1.0), bump());
    p.u0 = Datum::smooth(Profile::new(|x: f64| (2.0 / PI).sqrt() * x.sin()));
    p
}

fn vws_existence() -> Outcome {
    let pv = delta_potential_problem();
    let mut pu = delta_problem();
    pu.u0 = Datum::mollified(DistributionSpec::dirac(PI / 2.0, 1.0), bump());
    let (rv, ru) = rayon::join(|| existence_sweep(&pv).unwrap(), || existence_sweep(&pu).unwrap());
    let (nv, nu, r2u) = (rv.m_fit.fitted_n, ru.m_fit.fitted_n, ru.m_fit.r_squared);
    let bounded = nv <= 0.1;
    let moderate = nu > 0.0 && nu <= 3.0 && r2u >= 0.99;
    let frozen = near(nv, DELTA_POTENTIAL_N) && near(nu, DELTA_DATUM_N) && near(r2u, DELTA_DATUM_R2);
    Outcome::new(
        bounded && moderate && frozen,
        format!(
            "delta potential N {nv:.4} (<= 0.1): {}; delta datum N {nu:.4} in (0, 3], R2 {r2u:.4} (>= 0.99): {}; \
             baselines unchanged: {frozen}",
            pass_word(bounded),
            pass_word(moderate)
        ),
    )
}

fn vws_uniqueness() -> Outcome {
    let p = delta_potential_problem();
    let alt = AltMollifiers {
        potential: Some(Mollifier::new(MollifierShape::QuadraticSpline)),
        ..Default::default()
    };
    let same = AltMollifiers {
        potential: Some(bump()),
        ..Default::default()
    };
    let (r, s) = rayon::join(|| uniqueness_experiment(&p, &alt).unwrap(), || uniqueness_experiment(&p, &same).unwrap());
    let zero = s.difference_norms.iter().all(|&d| d == 0.0);
    Outcome::new(
        r.slope > 0.0 && zero && near(r.slope, UNIQUENESS_SLOPE),
        format!(
            "bump vs quadratic spline slope {:.4} (> 0, baseline {UNIQUENESS_SLOPE:.4}); identical mollifiers exactly 0: {zero}",
            r.slope
        ),
    )
}

fn vws_consistency() -> Outcome {
    let mut p = VwsProblem::new(PI, 1.0, 0.004, 32, default_eps_grid());
    p.potential = Datum::mollified(DistributionSpec::Smooth(Profile::new(|x: f64| 1.0 + x.sin())), bump());
    p.u0 = Datum::smooth(Profile::new(|x| x * (PI - x)));
    let r = consistency_experiment(&p).unwrap();
    let frozen = near(r.slope, CONSISTENCY_SLOPE) && near(r.terminal, CONSISTENCY_TERMINAL);
    Outcome::new(
        r.slope >= 1.5 && r.terminal <= 1e-3 && frozen,
        format!(
            "slope {:.4} (>= 1.5), terminal {:.3e} at eps = 2^-10 (<= 1e-3), baselines unchanged: {frozen}",
            r.slope, r.terminal
        ),
    )
}

fn nonhomogeneous_boundary() -> Outcome {
    let c = 0.75;
    let stat = solve_nonhomogeneous(
        &Profile::zero(),
        &Forcing::zero(),
        &Profile::constant(c),
        &Profile::zero(),
        &BoundaryData::new(TimeFn::Const(c), TimeFn::Const(c)),
        basis(PI, 32),
        1.0,
        1e-3,
    )
    .unwrap();
    let xs: Vec<f64> = (0..=64).map(|i| PI * i as f64 / 64.0).collect();
    let static_err = (0..stat.trajectory.len())
        .flat_map(|n| xs.iter().map(move |&x| (n, x)))
        .map(|(n, x)| (stat.value(n, x) - c).abs())
        .fold(0.0, f64::max);

    let bdata = BoundaryData::new(TimeFn::sin(1.0), TimeFn::Zero);
    let u1 = Profile::new(|x| 1.0 - x / PI);
    let sol = solve_nonhomogeneous(&Profile::zero(), &Forcing::zero(), &Profile::zero(), &u1, &bdata, basis(PI, 64), 2.0, 0.002)
        .unwrap();
    let grid = FdGrid::new(PI, 400, PI / 401.0 / 2.0, &Profile::zero(), &Profile::zero(), &u1).unwrap();
    let fd = fd_solve(&grid, &Forcing::zero(), Some(&bdata), 2.0, &[0.5, 1.0, 1.5, 2.0]).unwrap();
    let disc = compare_lifted(&sol, &fd).max_l2;
    let trace = sol.trace_error();
    Outcome::new(
        static_err <= 1e-9 && disc <= 1e-3 && trace <= 1e-6,
        format!(
            "static lift max |u - c| {static_err:.3e} (<= 1e-9); sin t lift FD discrepancy {disc:.3e} (<= 1e-3), \
             trace error {trace:.3e} (<= 1e-6)"
        ),
    )
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_all(configs: &[(PathBuf, ExperimentKind)], out: &Path, threads: usize) -> Vec<(String, Vec<u8>)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let mut files = Vec::new();
    for (path, kind) in configs {
        let outcome = pool.install(|| wave_lab::run(*kind, path, out)).unwrap();
        for f in [outcome.written.csv, outcome.written.summary] {
            files.push((f.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&f).unwrap()));
        }
    }
    files
}

fn determinism() -> Outcome {
    let mut configs: Vec<(PathBuf, ExperimentKind)> = fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .map(|p| {
            let kind = ExperimentConfig::load(&p).unwrap().experiment.expect("shipped configs name their experiment");
            (p, kind)
        })
        .collect();
    configs.sort_by(|a, b| a.0.cmp(&b.0));
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_all(&configs, a.path(), 1);
    let second = run_all(&configs, b.path(), 3);
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    Outcome::new(
        differing.is_empty() && first.len() == second.len(),
        format!(
            "{} configs, {} output files compared across 1 and 3 threads, differing: {differing:?}",
            configs.len(),
            first.len()
        ),
    )
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn report(id: usize, title: &str, budget_s: Option<f64>, start: Instant, outcome: &Outcome) {
    let elapsed = start.elapsed().as_secs_f64();
    let timing = match budget_s {
        Some(b) => format!("{elapsed:.1} s, target < {b} s"),
        None => format!("{elapsed:.1} s"),
    };
    println!("{} {id:>2} {title}: {} [{timing}]", pass_word(outcome.passed), outcome.detail);
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut check = |id: usize, title: &str, budget: Option<f64>, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        report(id, title, budget, start, &o);
        if !o.passed {
            failed += 1;
        }
    };

    check(1, "exact-mode reproduction", Some(1.0), &exact_mode);

    let start = Instant::now();
    let runs = corpus_runs();
    let corpus_time = start.elapsed().as_secs_f64();
    println!("     corpus of 50 smooth problems solved in {corpus_time:.1} s");
    check(2, "Gronwall inequality", Some(30.0), &|| gronwall(&runs));
    check(3, "energy-estimate ratio", None, &|| energy_ratio(&runs));
    check(4, "corollary ratios and differentiated system", Some(60.0), &|| corollary(&runs));
    check(5, "spectral vs finite-difference oracle", Some(60.0), &oracle_equivalence);
    check(6, "mollifier exponents", Some(1.0), &mollifier_exponents);
    check(7, "very weak solution existence sweep", Some(300.0), &vws_existence);
    check(8, "very weak solution uniqueness", Some(300.0), &vws_uniqueness);
    check(9, "very weak solution consistency", Some(120.0), &vws_consistency);
    check(10, "nonhomogeneous boundary", Some(30.0), &nonhomogeneous_boundary);
    check(11, "CLI determinism", None, &determinism);

    if failed == 0 {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 11 criteria failed");
        ExitCode::FAILURE
    }
}
