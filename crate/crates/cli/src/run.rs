//! Experiment runners: one function per subcommand, each producing a
//! [`Report`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};
use wave_lab_core::corpus::{smooth_corpus_on, SmoothCase};
use wave_lab_core::energy::{corollary_bounds, eta_of_t, verify_energy_estimate, CorollaryReport, EnergyReport};
use wave_lab_core::fd_oracle::{compare, compare_lifted, fd_solve, Comparison, FdGrid};
use wave_lab_core::functions::{Forcing, Profile};
use wave_lab_core::galerkin::{solve_ivp, GalerkinSystem, Trajectory};
use wave_lab_core::lifting::solve_nonhomogeneous;
use wave_lab_core::singular::NetClass;
use wave_lab_core::spectral::{EigenBasis, Interval, SpectralCoeffs};
use wave_lab_core::vws::{consistency_experiment, existence_sweep, uniqueness_experiment, Regularized};
use wave_lab_core::WaveError;

use crate::config::{ConfigError, ExistenceExpectation, ExperimentConfig, ExperimentKind, SchemaError};
use crate::report::{emit, to_value, Report, SummaryHeader, Verdict, Written};

/// Failure modes of a run, each with its own exit code.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Solver(WaveError),
    /// A harness-level numerical guard outside the solver.
    Guard { name: &'static str, message: String },
    Output { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// 2 for schema and argument problems, 3 for numerical guards, 4 for
    /// unwritable outputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(e) if e.guard_name().is_some() => 3,
            RunError::Solver(_) => 2,
            RunError::Guard { .. } => 3,
            RunError::Output { .. } => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Solver(e) => match e.guard_name() {
                Some(g) => write!(f, "numerical guard `{g}` violated: {e}"),
                None => write!(f, "invalid problem: {e}"),
            },
            RunError::Guard { name, message } => write!(f, "numerical guard `{name}` violated: {message}"),
            RunError::Output { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl From<WaveError> for RunError {
    fn from(e: WaveError) -> Self {
        RunError::Solver(e)
    }
}

impl From<SchemaError> for RunError {
    fn from(e: SchemaError) -> Self {
        RunError::Config(ConfigError::Schema(e))
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

type Run<T> = std::result::Result<T, RunError>;

/// Runs `kind` on an already validated config.
pub fn execute(kind: ExperimentKind, cfg: &ExperimentConfig) -> Run<Report> {
    cfg.check_kind(kind)?;
    match kind {
        ExperimentKind::Solve => solve(cfg),
        ExperimentKind::VerifyEnergy => match &cfg.corpus {
            Some(_) => verify_energy_corpus(cfg),
            None => verify_energy(cfg),
        },
        ExperimentKind::LiftSolve => lift_solve(cfg),
        ExperimentKind::SweepExistence => sweep_existence(cfg),
        ExperimentKind::SweepUniqueness => sweep_uniqueness(cfg),
        ExperimentKind::SweepConsistency => sweep_consistency(cfg),
        ExperimentKind::OracleCompare => match &cfg.corpus {
            Some(_) => oracle_compare_corpus(cfg),
            None => oracle_compare(cfg),
        },
    }
}

pub struct Outcome {
    pub report: Report,
    pub written: Written,
}

/// Loads `config`, runs `kind` and writes `<out>/<name>.csv` and
/// `<out>/<name>.summary.json`.
pub fn run(kind: ExperimentKind, config: &Path, out: &Path) -> Run<Outcome> {
    let cfg = ExperimentConfig::load(config)?;
    let name = match &cfg.name {
        Some(n) => n.clone(),
        None => config
            .file_stem()
            .and_then(|s| s.to_str())
            .filter(|s| !s.is_empty())
            .unwrap_or("experiment")
            .to_string(),
    };
    // fail before a long run when the output location is unusable
    std::fs::create_dir_all(out).map_err(|source| RunError::Output {
        path: out.to_path_buf(),
        source,
    })?;
    let report = execute(kind, &cfg)?;
    let header = SummaryHeader {
        name: &name,
        experiment: kind.name(),
        config: to_value(&cfg),
    };
    let written = emit(out, &header, &report).map_err(|source| RunError::Output {
        path: out.to_path_buf(),
        source,
    })?;
    Ok(Outcome { report, written })
}

fn require_homogeneous(cfg: &ExperimentConfig, kind: &str) -> Run<()> {
    if cfg.boundary_data()?.is_homogeneous() {
        Ok(())
    } else {
        Err(SchemaError::new("boundary", format!("{kind} needs zero boundary values; use lift-solve")).into())
    }
}

fn resolved(cfg: &ExperimentConfig) -> Run<Regularized> {
    let p = cfg.problem()?;
    p.validate()?;
    if p.is_singular() && cfg.single_eps().is_none() {
        return Err(SchemaError::new("regularization", "point masses need [regularization] eps").into());
    }
    Ok(p.resolve(cfg.single_eps())?)
}

struct Solved {
    system: GalerkinSystem,
    trajectory: Trajectory,
    d0: SpectralCoeffs,
    d1: SpectralCoeffs,
}

fn solve_data(
    basis: Arc<EigenBasis>,
    potential: &Profile,
    source: Forcing,
    u0: &Profile,
    u1: &Profile,
    final_time: f64,
    dt: f64,
) -> Run<Solved> {
    let iv = basis.interval().clone();
    let (u0, u1) = (u0.sample(&iv), u1.sample(&iv));
    let d0 = basis.project(&u0)?;
    let d1 = basis.project(&u1)?;
    let (system, trajectory) = solve_ivp(&potential.sample(&iv), source, &u0, &u1, basis, final_time, dt)?;
    Ok(Solved {
        system,
        trajectory,
        d0,
        d1,
    })
}

fn solve_resolved(cfg: &ExperimentConfig, data: &Regularized) -> Run<Solved> {
    solve_data(
        data.basis.clone(),
        &data.potential,
        data.source.clone(),
        &data.u0,
        &data.u1,
        cfg.domain.final_time,
        cfg.domain.dt,
    )
}

const GRONWALL_INVARIANT: &str =
    "eta(t_n) <= exp(t_n)(eta(0) + int xi)(1 + relative) + absolute + drift dt^2 (1 + eta(0) + int xi)";

fn gronwall_verdict(r: &EnergyReport) -> Verdict {
    Verdict::new(
        "gronwall_inequality",
        GRONWALL_INVARIANT,
        to_value(&r.tolerance),
        json!({"violations": r.violations, "worst_margin": r.worst_margin}),
        r.violations == 0,
    )
}

fn solve(cfg: &ExperimentConfig) -> Run<Report> {
    require_homogeneous(cfg, "solve")?;
    let data = resolved(cfg)?;
    let s = solve_resolved(cfg, &data)?;
    let r = verify_energy_estimate(&s.trajectory, &s.system, &s.d0, &s.d1, cfg.energy.tolerance())?;
    let mut report = Report::new(&["t", "eta", "gronwall_bound"]);
    report.rows = r
        .times
        .iter()
        .zip(&r.eta_values)
        .zip(&r.gronwall_bound_values)
        .map(|((&t, &e), &g)| vec![t, e, g])
        .collect();
    let (lo, hi) = r.eta_values.iter().fold((f64::MAX, f64::MIN), |(a, b), &e| (a.min(e), b.max(e)));
    report.results = json!({
        "samples": r.times.len(),
        "modes": s.system.modes(),
        "dt": s.trajectory.dt(),
        "eta_initial": r.eta_values[0],
        "eta_min": lo,
        "eta_max": hi,
        "final_coefficients": s.trajectory.d().last().map(|d| d.as_slice().to_vec()),
        "regularization_eps": cfg.single_eps(),
    });
    report.verdicts.push(gronwall_verdict(&r));
    report.verdicts.push(Verdict::new(
        "solution_finite",
        "every coefficient and velocity is finite",
        Value::Null,
        json!(s.trajectory.is_finite()),
        s.trajectory.is_finite(),
    ));
    Ok(report)
}

fn corollary_value(c: &CorollaryReport) -> Value {
    let ratios: Vec<Value> = c.ratios().iter().map(|r| to_value(*r)).collect();
    let differentiated = match &c.differentiated {
        Ok(d) => to_value(d),
        Err(e) => json!({"unsupported": e.to_string()}),
    };
    json!({"data": to_value(&c.data), "ratios": ratios, "differentiated": differentiated})
}

fn corollary_max_ratio(c: &CorollaryReport) -> f64 {
    c.ratios().iter().map(|r| r.ratio).fold(0.0, f64::max)
}

fn corollary_finite(c: &CorollaryReport) -> bool {
    c.ratios().iter().all(|r| r.ratio.is_finite())
}

fn verify_energy(cfg: &ExperimentConfig) -> Run<Report> {
    require_homogeneous(cfg, "verify-energy")?;
    let data = resolved(cfg)?;
    let s = solve_resolved(cfg, &data)?;
    let r = verify_energy_estimate(&s.trajectory, &s.system, &s.d0, &s.d1, cfg.energy.tolerance())?;
    let c = corollary_bounds(&s.trajectory, &s.system, &s.d0, &s.d1)?;
    let mut report = Report::new(&["t", "eta", "xi", "gronwall_bound"]);
    report.rows = (0..r.times.len())
        .map(|n| vec![r.times[n], r.eta_values[n], r.xi_values[n], r.gronwall_bound_values[n]])
        .collect();
    report.results = json!({
        "energy": {
            "lhs": r.lhs,
            "rhs": r.rhs,
            "ratio": r.ratio,
            "worst_margin": r.worst_margin,
            "violations": r.violations,
        },
        "corollary": corollary_value(&c),
        "regularization_eps": cfg.single_eps(),
    });
    report.verdicts.push(gronwall_verdict(&r));
    report.verdicts.extend(energy_verdicts(cfg, r.ratio, corollary_finite(&c), c.differentiated.as_ref().ok().map(|d| d.v_vs_numerical_ut)));
    if let Err(e) = &c.differentiated {
        report.notes.push(format!("second-order estimates skipped: {e}"));
    }
    Ok(report)
}

fn energy_verdicts(cfg: &ExperimentConfig, ratio: f64, corollary_ok: bool, v_gap: Option<f64>) -> Vec<Verdict> {
    let mut out = vec![
        Verdict::new(
            "energy_ratio_finite",
            "estimate LHS / RHS is finite",
            Value::Null,
            json!(ratio),
            ratio.is_finite(),
        ),
        Verdict::new(
            "corollary_ratios_finite",
            "every corollary LHS / RHS is finite",
            Value::Null,
            json!(corollary_ok),
            corollary_ok,
        ),
    ];
    if let Some(env) = cfg.energy.ratio_envelope {
        out.push(Verdict::at_most("energy_ratio_envelope", "estimate LHS / RHS <= envelope", ratio, env));
    }
    if let Some(gap) = v_gap {
        out.push(Verdict::at_most(
            "differentiated_matches_u_t",
            "L2(0,T;L2) distance between v and central differences of u",
            gap,
            cfg.energy.v_tolerance,
        ));
    }
    out
}

fn corpus_cases(cfg: &ExperimentConfig) -> Vec<SmoothCase> {
    let c = cfg.corpus.as_ref().expect("corpus config");
    smooth_corpus_on(cfg.domain.length, c.seed, c.count)
        .into_iter()
        .map(|case| match c.constant_potential {
            Some(v) => case.with_constant_potential(v),
            None => case,
        })
        .collect()
}

fn corpus_basis(cfg: &ExperimentConfig) -> Run<Arc<EigenBasis>> {
    let d = &cfg.domain;
    Ok(Arc::new(EigenBasis::build(
        Interval::new(d.length, d.quad_panels, d.quad_order)?,
        d.modes,
    )?))
}

fn solve_case(cfg: &ExperimentConfig, basis: &Arc<EigenBasis>, case: &SmoothCase) -> Run<Solved> {
    solve_data(
        basis.clone(),
        &case.potential(),
        case.source(),
        &case.u0(),
        &case.u1(),
        cfg.domain.final_time,
        cfg.domain.dt,
    )
}

fn verify_energy_corpus(cfg: &ExperimentConfig) -> Run<Report> {
    let basis = corpus_basis(cfg)?;
    let cases = corpus_cases(cfg);
    let per_case: Vec<(EnergyReport, CorollaryReport)> = cases
        .par_iter()
        .map(|case| {
            let s = solve_case(cfg, &basis, case)?;
            let r = verify_energy_estimate(&s.trajectory, &s.system, &s.d0, &s.d1, cfg.energy.tolerance())?;
            let c = corollary_bounds(&s.trajectory, &s.system, &s.d0, &s.d1)?;
            Ok((r, c))
        })
        .collect::<Run<Vec<_>>>()?;
    let mut report = Report::new(&[
        "case",
        "energy_ratio",
        "worst_margin",
        "violations",
        "corollary_max_ratio",
        "v_vs_numerical_ut",
    ]);
    let gap = |c: &CorollaryReport| c.differentiated.as_ref().map(|d| d.v_vs_numerical_ut).unwrap_or(f64::NAN);
    report.rows = per_case
        .iter()
        .enumerate()
        .map(|(i, (r, c))| vec![i as f64, r.ratio, r.worst_margin, r.violations as f64, corollary_max_ratio(c), gap(c)])
        .collect();
    let violations: usize = per_case.iter().map(|(r, _)| r.violations).sum();
    let max_ratio = per_case.iter().map(|(r, _)| r.ratio).fold(0.0, f64::max);
    let all_ratios_finite = per_case.iter().all(|(r, _)| r.ratio.is_finite());
    let corollary_ok = per_case.iter().all(|(_, c)| corollary_finite(c));
    let gaps: Vec<f64> = per_case.iter().filter_map(|(_, c)| c.differentiated.as_ref().ok().map(|d| d.v_vs_numerical_ut)).collect();
    let skipped = per_case.len() - gaps.len();
    let worst_margin = per_case.iter().map(|(r, _)| r.worst_margin).fold(f64::NEG_INFINITY, f64::max);
    report.results = json!({
        "cases": per_case.len(),
        "max_energy_ratio": max_ratio,
        "total_violations": violations,
        "worst_margin": worst_margin,
        "max_corollary_ratio": per_case.iter().map(|(_, c)| corollary_max_ratio(c)).fold(0.0, f64::max),
        "max_v_vs_numerical_ut": gaps.iter().copied().fold(0.0, f64::max),
        "second_order_skipped": skipped,
    });
    report.verdicts.push(Verdict::new(
        "gronwall_inequality",
        GRONWALL_INVARIANT,
        to_value(&cfg.energy.tolerance()),
        json!({"violations": violations, "worst_margin": worst_margin}),
        violations == 0,
    ));
    let ratio_for_verdict = if all_ratios_finite { max_ratio } else { f64::NAN };
    let max_gap = (!gaps.is_empty()).then(|| gaps.iter().copied().fold(0.0, f64::max));
    report.verdicts.extend(energy_verdicts(cfg, ratio_for_verdict, corollary_ok, max_gap));
    Ok(report)
}

fn lift_solve(cfg: &ExperimentConfig) -> Run<Report> {
    let data = resolved(cfg)?;
    let bdata = cfg.boundary_data()?;
    let d = &cfg.domain;
    let sol = solve_nonhomogeneous(
        &data.potential,
        &data.source,
        &data.u0,
        &data.u1,
        &bdata,
        data.basis.clone(),
        d.final_time,
        d.dt,
    )?;
    let eta = eta_of_t(&sol.trajectory, &sol.system);
    let mut report = Report::new(&["t", "u_left", "u_right", "g0", "g1", "eta_star"]);
    report.rows = sol
        .trajectory
        .times()
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            vec![
                t,
                sol.value(n, 0.0),
                sol.value(n, d.length),
                bdata.g0.value(t),
                bdata.g1.value(t),
                eta[n],
            ]
        })
        .collect();
    let trace = sol.trace_error();
    let est = sol.estimate();
    let mut results = json!({
        "consistency": to_value(&sol.consistency),
        "trace_error": trace,
        "estimate": to_value(&est),
        "regularization_eps": cfg.single_eps(),
    });
    report.verdicts.push(Verdict::at_most(
        "boundary_consistency",
        "max |u0 - g(0)|, |u1 - g'(0)| at the endpoints",
        sol.consistency.max_residual(),
        wave_lab_core::lifting::CONSISTENCY_TOL,
    ));
    report.verdicts.push(Verdict::at_most(
        "endpoint_trace",
        "max_n |u(t_n, 0) - g0(t_n)|, |u(t_n, L) - g1(t_n)|",
        trace,
        cfg.lift.trace_tolerance,
    ));
    match est.ratio {
        Some(r) => report.verdicts.push(Verdict::new(
            "lifted_estimate_finite",
            "||u*||_M / estimate bracket is finite",
            Value::Null,
            json!(r),
            r.is_finite(),
        )),
        None => report.notes.push("modified source has no time derivative; estimate ratio not evaluated".into()),
    }
    if let Some(o) = &cfg.oracle {
        let grid = FdGrid::new(d.length, o.nx, o.dt.unwrap_or(d.dt), &data.potential, &data.u0, &data.u1)?;
        check_fd_resolution(cfg, &grid)?;
        let fd = fd_solve(&grid, &data.source, Some(&bdata), d.final_time, &checkpoints(cfg))?;
        let cmp = compare_lifted(&sol, &fd);
        results["oracle"] = to_value(&cmp);
        report.verdicts.push(oracle_verdict(&cmp, o.tolerance));
    }
    report.results = results;
    Ok(report)
}

fn checkpoints(cfg: &ExperimentConfig) -> Vec<f64> {
    match cfg.oracle.as_ref().map(|o| &o.checkpoints) {
        Some(c) if !c.is_empty() => c.clone(),
        _ => vec![cfg.domain.final_time],
    }
}

/// Point masses are sampled at the finite-difference nodes, which resolves
/// the mollifier only when `dx <= eps / 4`.
fn check_fd_resolution(cfg: &ExperimentConfig, grid: &FdGrid) -> Run<()> {
    let singular = cfg.problem()?.is_singular();
    match cfg.single_eps() {
        Some(eps) if singular && grid.dx() > eps / 4.0 => Err(RunError::Guard {
            name: "fd-resolution",
            message: format!("dx = {} exceeds eps / 4 = {}; raise oracle.nx", grid.dx(), eps / 4.0),
        }),
        _ => Ok(()),
    }
}

fn oracle_verdict(cmp: &Comparison, tolerance: f64) -> Verdict {
    Verdict::at_most(
        "oracle_agreement",
        "max over checkpoints of the L2 distance between spectral and finite-difference solutions",
        cmp.max_l2,
        tolerance,
    )
}

fn oracle_compare(cfg: &ExperimentConfig) -> Run<Report> {
    let o = cfg.oracle.as_ref().expect("checked by check_kind");
    let d = &cfg.domain;
    let data = resolved(cfg)?;
    let bdata = cfg.boundary_data()?;
    let grid = FdGrid::new(d.length, o.nx, o.dt.unwrap_or(d.dt), &data.potential, &data.u0, &data.u1)?;
    check_fd_resolution(cfg, &grid)?;
    let cps = checkpoints(cfg);
    let cmp = if bdata.is_homogeneous() {
        let s = solve_resolved(cfg, &data)?;
        let fd = fd_solve(&grid, &data.source, None, d.final_time, &cps)?;
        compare(&s.trajectory, d.length, &fd)
    } else {
        let sol = solve_nonhomogeneous(
            &data.potential,
            &data.source,
            &data.u0,
            &data.u1,
            &bdata,
            data.basis.clone(),
            d.final_time,
            d.dt,
        )?;
        let fd = fd_solve(&grid, &data.source, Some(&bdata), d.final_time, &cps)?;
        compare_lifted(&sol, &fd)
    };
    let mut report = Report::new(&["t", "l2_discrepancy"]);
    report.rows = cmp.times.iter().zip(&cmp.l2).map(|(&t, &e)| vec![t, e]).collect();
    report.results = json!({
        "max_discrepancy": cmp.max_l2,
        "fd_dx": grid.dx(),
        "fd_dt": grid.dt(),
        "fd_cfl_limit": grid.cfl_limit(),
        "regularization_eps": cfg.single_eps(),
    });
    report.verdicts.push(oracle_verdict(&cmp, o.tolerance));
    Ok(report)
}

fn oracle_compare_corpus(cfg: &ExperimentConfig) -> Run<Report> {
    let o = cfg.oracle.as_ref().expect("checked by check_kind");
    let d = &cfg.domain;
    let basis = corpus_basis(cfg)?;
    let cps = checkpoints(cfg);
    let per_case: Vec<Comparison> = corpus_cases(cfg)
        .par_iter()
        .map(|case| {
            let s = solve_case(cfg, &basis, case)?;
            let grid = FdGrid::new(d.length, o.nx, o.dt.unwrap_or(d.dt), &case.potential(), &case.u0(), &case.u1())?;
            let fd = fd_solve(&grid, &case.source(), None, d.final_time, &cps)?;
            Ok(compare(&s.trajectory, d.length, &fd))
        })
        .collect::<Run<Vec<_>>>()?;
    let mut report = Report::new(&["case", "max_l2_discrepancy"]);
    report.rows = per_case.iter().enumerate().map(|(i, c)| vec![i as f64, c.max_l2]).collect();
    let worst = per_case.iter().map(|c| c.max_l2).fold(0.0, f64::max);
    report.results = json!({"cases": per_case.len(), "max_discrepancy": worst});
    report.verdicts.push(Verdict::at_most(
        "oracle_agreement",
        "max over cases and checkpoints of the L2 distance between spectral and finite-difference solutions",
        worst,
        o.tolerance,
    ));
    Ok(report)
}

fn sweep_problem(cfg: &ExperimentConfig) -> Run<wave_lab_core::vws::VwsProblem> {
    let p = cfg.problem()?;
    p.validate()?;
    Ok(p)
}

const M_COLUMNS: [&str; 3] = ["laplacian_sq", "accel_sq", "weighted_sq"];

fn sweep_existence(cfg: &ExperimentConfig) -> Run<Report> {
    let p = sweep_problem(cfg)?;
    let r = existence_sweep(&p)?;
    let mut columns = vec!["eps", "m_norm"];
    columns.extend(M_COLUMNS);
    columns.extend([
        "potential_linf",
        "potential_l2",
        "u0_linf",
        "u0_l2",
        "u1_linf",
        "u1_l2",
        "source_linf",
        "source_l2",
        "estimate_ratio",
        "trace_error",
    ]);
    let mut report = Report::new(&columns);
    report.rows = r
        .samples
        .iter()
        .map(|s| {
            vec![
                s.eps,
                s.m_norm,
                s.m_parts.laplacian_sq,
                s.m_parts.accel_sq,
                s.m_parts.weighted_sq,
                s.potential.linf,
                s.potential.l2,
                s.u0.linf,
                s.u0.l2,
                s.u1.linf,
                s.u1.l2,
                s.source.linf,
                s.source.l2,
                s.estimate_ratio.unwrap_or(f64::NAN),
                s.trace_error,
            ]
        })
        .collect();
    let fit = &r.m_fit;
    report.results = json!({
        "fit": fit_value(fit, &p.thresholds),
        "data_fits": r.data_fits.iter().map(|d| json!({
            "datum": d.datum,
            "norm": d.norm,
            "fit": fit_value(&d.fit, &p.thresholds),
        })).collect::<Vec<_>>(),
        "successive_differences": r.successive_differences,
        "verdict": to_value(&r.verdict),
        "boundary_regularized": r.boundary_regularized,
    });
    if !p.boundary.is_homogeneous() {
        report.notes.push("boundary values are held fixed across eps and never regularized".into());
    }
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let th = p.thresholds;
    report.verdicts.push(match sweep.expect {
        ExistenceExpectation::Moderate => Verdict::new(
            "moderate_net",
            "||u_eps||_M fits C eps^-N with R^2 >= min_r_squared, or N <= bounded_exponent",
            to_value(&th),
            json!({"fitted_n": fit.fitted_n, "r_squared": fit.r_squared}),
            r.verdict.passed(),
        ),
        ExistenceExpectation::Bounded => Verdict::at_most(
            "bounded_net",
            "fitted exponent N of ||u_eps||_M <= bounded_exponent",
            fit.fitted_n,
            th.bounded_exponent,
        ),
        ExistenceExpectation::Growth => Verdict::new(
            "moderate_growth",
            "fitted exponent N of ||u_eps||_M in (0, max_exponent] with R^2 >= min_r_squared",
            json!({"max_exponent": sweep.max_exponent, "min_r_squared": th.min_r_squared}),
            json!({"fitted_n": fit.fitted_n, "r_squared": fit.r_squared}),
            fit.fitted_n > 0.0 && fit.fitted_n <= sweep.max_exponent && fit.r_squared >= th.min_r_squared,
        ),
    });
    Ok(report)
}

fn fit_value(fit: &wave_lab_core::singular::FitReport, th: &wave_lab_core::singular::FitThresholds) -> Value {
    let class: NetClass = fit.classify(th);
    json!({
        "eps_grid": fit.eps_grid,
        "norm_values": fit.norm_values,
        "fitted_n": fit.fitted_n,
        "fitted_log_c": fit.fitted_log_c,
        "r_squared": fit.r_squared,
        "identically_zero": fit.identically_zero,
        "class": to_value(&class),
    })
}

fn slope_verdict(name: &str, invariant: &str, slope: f64, zero: bool, min_slope: Option<f64>) -> Verdict {
    match min_slope {
        Some(m) => Verdict::new(
            name,
            invariant,
            json!({"min_slope": m}),
            json!({"slope": slope, "identically_zero": zero}),
            zero || slope >= m,
        ),
        None => Verdict::new(
            name,
            invariant,
            json!({"min_slope_exclusive": 0.0}),
            json!({"slope": slope, "identically_zero": zero}),
            zero || slope > 0.0,
        ),
    }
}

fn sweep_uniqueness(cfg: &ExperimentConfig) -> Run<Report> {
    let p = sweep_problem(cfg)?;
    let r = uniqueness_experiment(&p, &cfg.alternative_mollifiers())?;
    let mut columns = vec!["eps", "difference"];
    columns.extend(M_COLUMNS);
    let mut report = Report::new(&columns);
    report.rows = r
        .eps_grid
        .iter()
        .zip(&r.difference_norms)
        .zip(&r.difference)
        .map(|((&e, &n), parts)| vec![e, n, parts.laplacian_sq, parts.accel_sq, parts.weighted_sq])
        .collect();
    report.results = json!({
        "fit": fit_value(&r.fit, &p.thresholds),
        "slope": r.slope,
        "negligible_consistent": r.negligible_consistent,
    });
    let min_slope = cfg.sweep.as_ref().and_then(|s| s.min_slope);
    report.verdicts.push(slope_verdict(
        "negligible_difference",
        "||U_eps||_M between two regularizations decays in eps (log-log slope) or vanishes",
        r.slope,
        r.fit.identically_zero,
        min_slope,
    ));
    Ok(report)
}

fn sweep_consistency(cfg: &ExperimentConfig) -> Run<Report> {
    let p = sweep_problem(cfg)?;
    let r = consistency_experiment(&p)?;
    let mut report = Report::new(&["eps", "difference"]);
    report.rows = r.eps_grid.iter().zip(&r.difference_norms).map(|(&e, &n)| vec![e, n]).collect();
    report.results = json!({
        "reference_m_norm": r.reference_m_norm,
        "fit": fit_value(&r.fit, &p.thresholds),
        "slope": r.slope,
        "terminal": r.terminal,
        "convergent": r.convergent,
    });
    let sweep = cfg.sweep.clone().unwrap_or_default();
    report.verdicts.push(slope_verdict(
        "convergence_rate",
        "log-log slope of ||u - u_eps||_M against eps",
        r.slope,
        r.fit.identically_zero,
        sweep.min_slope,
    ));
    if let Some(t) = sweep.max_terminal {
        report.verdicts.push(Verdict::at_most(
            "terminal_difference",
            "||u - u_eps||_M at the smallest eps",
            r.terminal,
            t,
        ));
    }
    Ok(report)
}
