//! Sweeps over the regularization parameter: existence (moderate growth of
//! the solution net), uniqueness (negligible difference between two
//! regularizations) and consistency (convergence to the classical solution
//! when the data are smooth).

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{m_norm_difference, MNormParts};
use crate::error::{Result, WaveError};
use crate::functions::{Forcing, ForcingTerm, Profile, TimeFn};
use crate::lifting::{solve_nonhomogeneous, BoundaryData, LiftedSolution};
use crate::singular::{loglog_fit, validate_eps_grid, DistributionSpec, Extension, FitReport, FitThresholds, Mollifier};
use crate::spectral::{EigenBasis, Interval, DEFAULT_ORDER, DEFAULT_PANELS};

/// One datum and the mollifier used to regularize it. Smooth data without a
/// mollifier are used as they are at every eps.
#[derive(Debug, Clone)]
pub struct Datum {
    pub spec: DistributionSpec,
    pub mollifier: Option<Mollifier>,
}

impl Datum {
    pub fn smooth(p: Profile) -> Self {
        Self {
            spec: DistributionSpec::Smooth(p),
            mollifier: None,
        }
    }

    pub fn zero() -> Self {
        Self::smooth(Profile::zero())
    }

    pub fn mollified(spec: DistributionSpec, mollifier: Mollifier) -> Self {
        Self {
            spec,
            mollifier: Some(mollifier),
        }
    }

    fn regularize(&self, name: &str, eps: f64, length: f64) -> Result<Profile> {
        match (&self.mollifier, self.spec.as_profile()) {
            (Some(psi), _) => self.spec.regularized_profile(psi, eps, length, Extension::Natural),
            (None, Some(p)) => Ok(p),
            (None, None) => Err(WaveError::invalid(format!("{name} has point masses but no mollifier"))),
        }
    }

    fn with_mollifier(&self, alt: Option<Mollifier>) -> Self {
        Self {
            spec: self.spec.clone(),
            mollifier: alt.or(self.mollifier),
        }
    }
}

/// Source `sum_i a_i(t) s_i(x)` whose spatial factors may be singular.
#[derive(Debug, Clone, Default)]
pub struct SourceSpec {
    pub terms: Vec<(TimeFn, DistributionSpec)>,
    pub mollifier: Option<Mollifier>,
}

impl SourceSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    fn is_singular(&self) -> bool {
        self.terms.iter().any(|(_, s)| s.is_singular())
    }

    fn diracs(&self) -> Vec<(f64, f64)> {
        self.terms.iter().flat_map(|(_, s)| s.diracs()).collect()
    }

    fn regularize(&self, eps: f64, length: f64) -> Result<Forcing> {
        let terms = self
            .terms
            .iter()
            .map(|(time, spec)| {
                let datum = Datum {
                    spec: spec.clone(),
                    mollifier: self.mollifier,
                };
                Ok(ForcingTerm {
                    time: time.clone(),
                    space: datum.regularize("source", eps, length)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Forcing::from_terms(terms))
    }

    /// Regularized spatial factors, one per term.
    fn spatial(&self, eps: f64, length: f64) -> Result<Vec<Profile>> {
        self.regularize(eps, length)
            .map(|f| f.terms().iter().map(|t| t.space.clone()).collect())
    }
}

/// A wave problem with possibly singular data and an eps grid.
#[derive(Debug, Clone)]
pub struct VwsProblem {
    pub length: f64,
    pub final_time: f64,
    pub dt: f64,
    pub modes: usize,
    pub quad_panels: usize,
    pub quad_order: usize,
    pub potential: Datum,
    pub u0: Datum,
    pub u1: Datum,
    pub source: SourceSpec,
    /// Held fixed across eps; boundary values are never regularized.
    pub boundary: BoundaryData,
    pub eps_grid: Vec<f64>,
    pub thresholds: FitThresholds,
}

impl VwsProblem {
    pub fn new(length: f64, final_time: f64, dt: f64, modes: usize, eps_grid: Vec<f64>) -> Self {
        Self {
            length,
            final_time,
            dt,
            modes,
            quad_panels: DEFAULT_PANELS,
            quad_order: DEFAULT_ORDER,
            potential: Datum::zero(),
            u0: Datum::zero(),
            u1: Datum::zero(),
            source: SourceSpec::zero(),
            boundary: BoundaryData::homogeneous(),
            eps_grid,
            thresholds: FitThresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_eps_grid(&self.eps_grid)?;
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(WaveError::invalid(format!("final time must be positive, got {}", self.final_time)));
        }
        if self.modes == 0 {
            return Err(WaveError::invalid("need at least one mode"));
        }
        if let Some((x, w)) = self.potential.spec.diracs().into_iter().find(|&(_, w)| w < 0.0) {
            return Err(WaveError::invalid(format!("potential point mass at {x} has negative weight {w}")));
        }
        for spec in [&self.potential.spec, &self.u0.spec, &self.u1.spec] {
            spec.validate(self.length, None)?;
        }
        Ok(())
    }

    pub fn is_singular(&self) -> bool {
        self.potential.spec.is_singular()
            || self.u0.spec.is_singular()
            || self.u1.spec.is_singular()
            || self.source.is_singular()
    }

    fn windows(&self, eps: f64) -> Vec<(f64, f64)> {
        let mut locs: Vec<f64> = [&self.potential.spec, &self.u0.spec, &self.u1.spec]
            .iter()
            .flat_map(|s| s.diracs())
            .chain(self.source.diracs())
            .map(|(x, _)| x)
            .collect();
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        locs.into_iter().map(|x| (x, eps)).collect()
    }

    fn interval(&self, eps: Option<f64>) -> Result<Interval> {
        let base = Interval::new(self.length, self.quad_panels, self.quad_order)?;
        match eps {
            Some(eps) => {
                for spec in [&self.potential.spec, &self.u0.spec, &self.u1.spec] {
                    spec.validate(self.length, Some(eps))?;
                }
                for (_, s) in &self.source.terms {
                    s.validate(self.length, Some(eps))?;
                }
                base.refined(&self.windows(eps))
            }
            None => Ok(base),
        }
    }

    fn with_mollifiers(&self, alt: &AltMollifiers) -> VwsProblem {
        let mut p = self.clone();
        p.potential = self.potential.with_mollifier(alt.potential);
        p.u0 = self.u0.with_mollifier(alt.u0);
        p.u1 = self.u1.with_mollifier(alt.u1);
        p.source.mollifier = alt.source.or(self.source.mollifier);
        p
    }
}

/// Data of a problem resolved at one eps, with a basis whose quadrature is
/// refined around every point mass.
#[derive(Debug, Clone)]
pub struct Regularized {
    pub basis: Arc<EigenBasis>,
    pub potential: Profile,
    pub u0: Profile,
    pub u1: Profile,
    pub source: Forcing,
    pub source_spaces: Vec<Profile>,
}

impl VwsProblem {
    /// Regularized data at `eps`; with `None` every datum must be smooth and
    /// is used as given.
    pub fn resolve(&self, eps: Option<f64>) -> Result<Regularized> {
        match eps {
            Some(eps) => regularize_all(self, eps),
            None => {
                if self.is_singular() {
                    return Err(WaveError::invalid("point masses need a regularization parameter"));
                }
                let plain = |d: &Datum| d.spec.as_profile().expect("smooth datum");
                let source = Forcing::from_terms(
                    self.source
                        .terms
                        .iter()
                        .map(|(t, s)| ForcingTerm {
                            time: t.clone(),
                            space: s.as_profile().expect("smooth datum"),
                        })
                        .collect(),
                );
                Ok(Regularized {
                    basis: Arc::new(EigenBasis::build(self.interval(None)?, self.modes)?),
                    potential: plain(&self.potential),
                    u0: plain(&self.u0),
                    u1: plain(&self.u1),
                    source_spaces: source.terms().iter().map(|t| t.space.clone()).collect(),
                    source,
                })
            }
        }
    }
}

fn regularize_all(p: &VwsProblem, eps: f64) -> Result<Regularized> {
    let interval = p.interval(Some(eps))?;
    let basis = Arc::new(EigenBasis::build(interval, p.modes)?);
    Ok(Regularized {
        basis,
        potential: p.potential.regularize("potential", eps, p.length)?,
        u0: p.u0.regularize("u0", eps, p.length)?,
        u1: p.u1.regularize("u1", eps, p.length)?,
        source: p.source.regularize(eps, p.length)?,
        source_spaces: p.source.spatial(eps, p.length)?,
    })
}

fn solve_regularized(p: &VwsProblem, r: &Regularized) -> Result<LiftedSolution> {
    solve_nonhomogeneous(
        &r.potential,
        &r.source,
        &r.u0,
        &r.u1,
        &p.boundary,
        r.basis.clone(),
        p.final_time,
        p.dt,
    )
}

fn at_eps<T>(eps: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| WaveError::Sweep {
        eps,
        source: Box::new(e),
    })
}

/// `L^inf` (at the quadrature nodes) and `L^2` norms of one regularized datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatumNorms {
    pub linf: f64,
    pub l2: f64,
}

fn datum_norms(p: &Profile, interval: &Interval) -> DatumNorms {
    let v = p.sample(interval);
    let sq: Vec<f64> = v.values().iter().map(|x| x * x).collect();
    DatumNorms {
        linf: v.sup_norm(),
        l2: interval.integrate(&sq).max(0.0).sqrt(),
    }
}

/// Everything recorded at one eps of an existence sweep.
#[derive(Debug, Clone, Serialize)]
pub struct EpsSample {
    pub eps: f64,
    pub m_norm: f64,
    pub m_parts: MNormParts,
    pub potential: DatumNorms,
    pub u0: DatumNorms,
    pub u1: DatumNorms,
    /// Sum over source terms of the spatial-factor norms.
    pub source: DatumNorms,
    pub estimate_ratio: Option<f64>,
    pub trace_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataFit {
    pub datum: &'static str,
    pub norm: &'static str,
    pub fit: FitReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ExistenceVerdict {
    Moderate { n: f64, bounded: bool },
    NotModerate { n: f64, r_squared: f64 },
}

impl ExistenceVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, ExistenceVerdict::Moderate { .. })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub samples: Vec<EpsSample>,
    pub m_fit: FitReport,
    pub data_fits: Vec<DataFit>,
    /// `||u_{eps_j} - u_{eps_{j+1}}||_M` for neighbouring grid points.
    pub successive_differences: Vec<f64>,
    pub verdict: ExistenceVerdict,
    /// Boundary data are held fixed across eps.
    pub boundary_regularized: bool,
}

/// Solves the regularized problem at every eps and fits the growth of the
/// solution `M`-norms and of the data norms.
pub fn existence_sweep(p: &VwsProblem) -> Result<SweepResult> {
    p.validate()?;
    let solved: Vec<Result<(EpsSample, LiftedSolution)>> = p
        .eps_grid
        .par_iter()
        .map(|&eps| {
            at_eps(eps, (|| {
                let r = regularize_all(p, eps)?;
                let sol = solve_regularized(p, &r)?;
                let iv = r.basis.interval();
                let mut source = DatumNorms { linf: 0.0, l2: 0.0 };
                for s in &r.source_spaces {
                    let n = datum_norms(s, iv);
                    source.linf += n.linf;
                    source.l2 += n.l2;
                }
                let estimate = sol.estimate();
                let parts = crate::energy::m_norm_parts(&sol.trajectory, &sol.system);
                Ok((
                    EpsSample {
                        eps,
                        m_norm: parts.total(),
                        m_parts: parts,
                        potential: datum_norms(&r.potential, iv),
                        u0: datum_norms(&r.u0, iv),
                        u1: datum_norms(&r.u1, iv),
                        source,
                        estimate_ratio: estimate.ratio,
                        trace_error: sol.trace_error(),
                    },
                    sol,
                ))
            })())
        })
        .collect();
    let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;

    let successive_differences = solved
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0].1, &w[1].1);
            m_norm_difference((&a.trajectory, &a.system), (&b.trajectory, &b.system), &b.system).map(|d| d.total())
        })
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<EpsSample> = solved.into_iter().map(|(s, _)| s).collect();

    let m_values: Vec<f64> = samples.iter().map(|s| s.m_norm).collect();
    let m_fit = loglog_fit(&p.eps_grid, &m_values)?;
    let mut data_fits = Vec::new();
    type Pick = fn(&EpsSample) -> DatumNorms;
    let data: [(&'static str, Pick); 4] = [
        ("potential", |s| s.potential),
        ("u0", |s| s.u0),
        ("u1", |s| s.u1),
        ("source", |s| s.source),
    ];
    for (name, pick) in data {
        for (norm, f) in [("linf", (|n: DatumNorms| n.linf) as fn(DatumNorms) -> f64), ("l2", |n| n.l2)] {
            let values: Vec<f64> = samples.iter().map(|s| f(pick(s))).collect();
            data_fits.push(DataFit {
                datum: name,
                norm,
                fit: loglog_fit(&p.eps_grid, &values)?,
            });
        }
    }
    let bounded = m_fit.identically_zero || m_fit.fitted_n <= p.thresholds.bounded_exponent;
    let verdict = if bounded || m_fit.r_squared >= p.thresholds.min_r_squared {
        ExistenceVerdict::Moderate {
            n: m_fit.fitted_n,
            bounded,
        }
    } else {
        ExistenceVerdict::NotModerate {
            n: m_fit.fitted_n,
            r_squared: m_fit.r_squared,
        }
    };
    Ok(SweepResult {
        samples,
        m_fit,
        data_fits,
        successive_differences,
        verdict,
        boundary_regularized: false,
    })
}

/// Replacement mollifiers for the second regularization; `None` keeps the
/// primary choice for that datum.
#[derive(Debug, Clone, Copy, Default)]
pub struct AltMollifiers {
    pub potential: Option<Mollifier>,
    pub u0: Option<Mollifier>,
    pub u1: Option<Mollifier>,
    pub source: Option<Mollifier>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessResult {
    pub eps_grid: Vec<f64>,
    pub difference: Vec<MNormParts>,
    pub difference_norms: Vec<f64>,
    pub fit: FitReport,
    /// `-N`: positive when the difference decays with eps.
    pub slope: f64,
    pub negligible_consistent: bool,
}

/// Solves with the primary and the alternative mollifiers at each eps and
/// fits `||u_eps - u~_eps||_M`.
pub fn uniqueness_experiment(p: &VwsProblem, alt: &AltMollifiers) -> Result<UniquenessResult> {
    p.validate()?;
    let q = p.with_mollifiers(alt);
    let diffs: Vec<Result<MNormParts>> = p
        .eps_grid
        .par_iter()
        .map(|&eps| {
            at_eps(eps, (|| {
                let a = solve_regularized(p, &regularize_all(p, eps)?)?;
                let b = solve_regularized(&q, &regularize_all(&q, eps)?)?;
                m_norm_difference((&a.trajectory, &a.system), (&b.trajectory, &b.system), &a.system)
            })())
        })
        .collect();
    let difference = diffs.into_iter().collect::<Result<Vec<_>>>()?;
    let difference_norms: Vec<f64> = difference.iter().map(|d| d.total()).collect();
    let fit = loglog_fit(&p.eps_grid, &difference_norms)?;
    let slope = -fit.fitted_n;
    Ok(UniquenessResult {
        eps_grid: p.eps_grid.clone(),
        difference,
        negligible_consistent: fit.identically_zero || slope > 0.0,
        difference_norms,
        fit,
        slope,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyResult {
    pub eps_grid: Vec<f64>,
    pub reference_m_norm: f64,
    pub difference_norms: Vec<f64>,
    pub fit: FitReport,
    /// `-N`: the convergence order in eps.
    pub slope: f64,
    pub terminal: f64,
    /// Norms strictly decrease over the second half of the grid.
    pub convergent: bool,
}

/// Compares the solution of the unregularized smooth problem with the
/// solutions of its mollified versions.
pub fn consistency_experiment(p: &VwsProblem) -> Result<ConsistencyResult> {
    p.validate()?;
    if p.is_singular() {
        return Err(WaveError::Precondition(
            "consistency needs smooth data; point masses have no classical solution".into(),
        ));
    }
    let reference_data = p.resolve(None)?;
    let basis = reference_data.basis.clone();
    let reference = solve_nonhomogeneous(
        &reference_data.potential,
        &reference_data.source,
        &reference_data.u0,
        &reference_data.u1,
        &p.boundary,
        basis.clone(),
        p.final_time,
        p.dt,
    )?;
    let diffs: Vec<Result<f64>> = p
        .eps_grid
        .par_iter()
        .map(|&eps| {
            at_eps(eps, (|| {
                let sol = solve_nonhomogeneous(
                    &p.potential.regularize("potential", eps, p.length)?,
                    &p.source.regularize(eps, p.length)?,
                    &p.u0.regularize("u0", eps, p.length)?,
                    &p.u1.regularize("u1", eps, p.length)?,
                    &p.boundary,
                    basis.clone(),
                    p.final_time,
                    p.dt,
                )?;
                m_norm_difference(
                    (&reference.trajectory, &reference.system),
                    (&sol.trajectory, &sol.system),
                    &reference.system,
                )
                .map(|d| d.total())
            })())
        })
        .collect();
    let difference_norms = diffs.into_iter().collect::<Result<Vec<_>>>()?;
    let fit = loglog_fit(&p.eps_grid, &difference_norms)?;
    let tail = &difference_norms[difference_norms.len() / 2..];
    let convergent = fit.identically_zero || tail.windows(2).all(|w| w[1] < w[0]);
    Ok(ConsistencyResult {
        eps_grid: p.eps_grid.clone(),
        reference_m_norm: reference.m_norm(),
        terminal: *difference_norms.last().expect("grid has at least 3 points"),
        slope: -fit.fitted_n,
        difference_norms,
        fit,
        convergent,
    })
}
