//! Dirichlet boundary data through an explicit lifting: the solution is
//! `u = u* + G` with `G(t, x) = g0(t) (1 - x/L) + g1(t) x/L` and `u*` solving
//! the homogeneous problem with source `f - G_tt - V G` (the ramp is harmonic)
//! and data `u0 - G(0)`, `u1 - G_t(0)`.

use std::sync::Arc;

use serde::Serialize;

use crate::energy::{m_norm, DataNorms};
use crate::error::{Result, WaveError};
use crate::functions::{Forcing, ForcingTerm, Profile, TimeFn};
use crate::galerkin::{GalerkinSystem, LoadMode, Trajectory};
use crate::quadrature::trapezoid_uniform;
use crate::spectral::{EigenBasis, SpectralCoeffs};

pub const CONSISTENCY_TOL: f64 = 1e-10;

/// Boundary values `u(t, 0) = g0(t)`, `u(t, L) = g1(t)`.
#[derive(Debug, Clone, Default)]
pub struct BoundaryData {
    pub g0: TimeFn,
    pub g1: TimeFn,
}

impl BoundaryData {
    pub fn new(g0: TimeFn, g1: TimeFn) -> Self {
        Self { g0, g1 }
    }

    pub fn homogeneous() -> Self {
        Self::default()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.g0.is_zero() && self.g1.is_zero()
    }
}

/// Endpoint mismatches between the initial data and the boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub u0_left: f64,
    pub u0_right: f64,
    pub u1_left: f64,
    pub u1_right: f64,
    pub passed: bool,
}

impl ConsistencyReport {
    pub fn max_residual(&self) -> f64 {
        self.u0_left.max(self.u0_right).max(self.u1_left).max(self.u1_right)
    }
}

/// Compares `g(0)` with the endpoint values of `u0` and `g'(0)` with those
/// of `u1`.
pub fn check_consistency(u0: &Profile, u1: &Profile, bdata: &BoundaryData, length: f64) -> Result<ConsistencyReport> {
    let dg0 = time_derivative(&bdata.g0, "g0")?;
    let dg1 = time_derivative(&bdata.g1, "g1")?;
    let u0_left = (bdata.g0.value(0.0) - u0.eval(0.0)).abs();
    let u0_right = (bdata.g1.value(0.0) - u0.eval(length)).abs();
    let u1_left = (dg0.value(0.0) - u1.eval(0.0)).abs();
    let u1_right = (dg1.value(0.0) - u1.eval(length)).abs();
    let passed = [u0_left, u0_right, u1_left, u1_right]
        .iter()
        .all(|&r| r <= CONSISTENCY_TOL);
    Ok(ConsistencyReport {
        u0_left,
        u0_right,
        u1_left,
        u1_right,
        passed,
    })
}

fn time_derivative(g: &TimeFn, name: &str) -> Result<TimeFn> {
    g.derivative()
        .ok_or_else(|| WaveError::invalid(format!("boundary value {name} needs known time derivatives")))
}

/// `G`, `G_t` and `G_tt` for given boundary data on `(0, L)`.
#[derive(Debug, Clone)]
pub struct Lifting {
    length: f64,
    /// `g0, g0', g0''`
    left: [TimeFn; 3],
    right: [TimeFn; 3],
}

impl Lifting {
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `(1 - x/L, x/L)`
    pub fn ramps(&self) -> (Profile, Profile) {
        let l = self.length;
        (Profile::new(move |x| 1.0 - x / l), Profile::new(move |x| x / l))
    }

    fn combine(&self, order: usize, t: f64, x: f64) -> f64 {
        let s = x / self.length;
        self.left[order].value(t) * (1.0 - s) + self.right[order].value(t) * s
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.combine(0, t, x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.combine(1, t, x)
    }

    pub fn dtt(&self, t: f64, x: f64) -> f64 {
        self.combine(2, t, x)
    }

    /// `f - G_tt - V G` as a separable source.
    pub fn modified_source(&self, f: &Forcing, potential: &Profile) -> Forcing {
        let (lr, rr) = self.ramps();
        let mut terms: Vec<ForcingTerm> = f.terms().to_vec();
        let pieces = [
            (&self.left[2], lr.clone()),
            (&self.right[2], rr.clone()),
            (&self.left[0], potential.times(&lr)),
            (&self.right[0], potential.times(&rr)),
        ];
        for (g, space) in pieces {
            if g.is_zero() {
                continue;
            }
            terms.push(ForcingTerm {
                time: negate(g),
                space,
            });
        }
        Forcing::from_terms(terms)
    }

    /// `||g||` in `H^2(0, T)` summed over both endpoints, trapezoid in time.
    pub fn boundary_norm(&self, times: &[f64]) -> f64 {
        if times.len() < 2 {
            return 0.0;
        }
        let h = times[1] - times[0];
        let sq: Vec<f64> = times
            .iter()
            .map(|&t| {
                self.left
                    .iter()
                    .chain(&self.right)
                    .map(|g| g.value(t).powi(2))
                    .sum()
            })
            .collect();
        trapezoid_uniform(&sq, h).sqrt()
    }
}

fn negate(g: &TimeFn) -> TimeFn {
    match g {
        TimeFn::Zero => TimeFn::Zero,
        TimeFn::Const(c) => TimeFn::Const(-c),
        TimeFn::Sin {
            amplitude,
            omega,
            phase,
        } => TimeFn::Sin {
            amplitude: -amplitude,
            omega: *omega,
            phase: *phase,
        },
        TimeFn::Poly(c) => TimeFn::Poly(c.iter().map(|a| -a).collect()),
        TimeFn::Custom(c) => {
            let mut c = c.clone();
            let v = c.value.clone();
            c.value = Arc::new(move |t| -v(t));
            c.first = c.first.map(|f| -> Arc<dyn Fn(f64) -> f64 + Send + Sync> { Arc::new(move |t| -f(t)) });
            c.second = c.second.map(|f| -> Arc<dyn Fn(f64) -> f64 + Send + Sync> { Arc::new(move |t| -f(t)) });
            TimeFn::Custom(c)
        }
    }
}

pub fn build_lifting(bdata: &BoundaryData, length: f64) -> Result<Lifting> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(WaveError::invalid(format!("interval length must be positive, got {length}")));
    }
    let d = |g: &TimeFn, name: &str| -> Result<[TimeFn; 3]> {
        let g1 = time_derivative(g, name)?;
        let g2 = time_derivative(&g1, name)?;
        Ok([g.clone(), g1, g2])
    };
    Ok(Lifting {
        length,
        left: d(&bdata.g0, "g0")?,
        right: d(&bdata.g1, "g1")?,
    })
}

/// Solution of the boundary-value problem: the homogeneous part `u*` and
/// the lifting that restores the boundary values.
#[derive(Debug, Clone)]
pub struct LiftedSolution {
    pub lifting: Lifting,
    pub system: GalerkinSystem,
    pub trajectory: Trajectory,
    /// Coefficients of `u0 - G(0)` and `u1 - G_t(0)`.
    pub d0: SpectralCoeffs,
    pub d1: SpectralCoeffs,
    pub consistency: ConsistencyReport,
}

/// Right side of the a-priori bound on `||u*||_M` and the resulting ratio.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LiftedEstimate {
    pub m_norm: f64,
    pub boundary_norm: f64,
    /// `None` when the modified source has no time derivative.
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
}

impl LiftedSolution {
    /// `u(t_n, x) = u*(t_n, x) + G(t_n, x)`.
    pub fn value(&self, sample: usize, x: f64) -> f64 {
        let t = self.trajectory.times()[sample];
        self.system.basis().eval(&self.trajectory.d()[sample], x) + self.lifting.value(t, x)
    }

    /// Largest endpoint mismatch `|u(t_n, 0) - g0|`, `|u(t_n, L) - g1|`.
    pub fn trace_error(&self) -> f64 {
        let l = self.lifting.length();
        (0..self.trajectory.len())
            .map(|n| {
                let t = self.trajectory.times()[n];
                let left = (self.value(n, 0.0) - self.lifting.left[0].value(t)).abs();
                let right = (self.value(n, l) - self.lifting.right[0].value(t)).abs();
                left.max(right)
            })
            .fold(0.0, f64::max)
    }

    pub fn m_norm(&self) -> f64 {
        m_norm(&self.trajectory, &self.system)
    }

    /// `||u*||_M` against
    /// `(1 + ||V||^1/2)(||f*||_{H1 L2} + ||u0*||_{H10} + ||u1*||_{H10})
    ///  + (1 + ||V||) ||u0*||_{H20} + ||g||_{H2}`.
    pub fn estimate(&self) -> LiftedEstimate {
        let data = DataNorms::compute(&self.trajectory, &self.system, &self.d0, &self.d1);
        let g = self.lifting.boundary_norm(self.trajectory.times());
        let m = self.m_norm();
        let rhs = data.f_h1l2.map(|fh| {
            (1.0 + data.v_sup.sqrt()) * (fh + data.u0_h10 + data.u1_h10) + (1.0 + data.v_sup) * data.u0_h20 + g
        });
        LiftedEstimate {
            m_norm: m,
            boundary_norm: g,
            rhs,
            ratio: rhs.map(|r| crate::energy::ratio(m, r)),
        }
    }
}

/// Solves `u_tt - u_xx + V u = f` with `u = g` on the boundary. The initial
/// data are projected after subtracting the ramp in closed form.
#[allow(clippy::too_many_arguments)]
pub fn solve_nonhomogeneous(
    potential: &Profile,
    load: &Forcing,
    u0: &Profile,
    u1: &Profile,
    bdata: &BoundaryData,
    basis: Arc<EigenBasis>,
    final_time: f64,
    dt: f64,
) -> Result<LiftedSolution> {
    let length = basis.interval().length();
    let consistency = check_consistency(u0, u1, bdata, length)?;
    if !consistency.passed {
        return Err(WaveError::Consistency {
            max_residual: consistency.max_residual(),
        });
    }
    let lifting = build_lifting(bdata, length)?;
    let interval = basis.interval();
    let (left, right) = basis.ramp_coefficients();
    let ramp = |a: f64, b: f64| left.combine(a, &right, b);
    let d0 = basis
        .project(&u0.sample(interval))?
        .combine(1.0, &ramp(lifting.left[0].value(0.0), lifting.right[0].value(0.0)), -1.0);
    let d1 = basis
        .project(&u1.sample(interval))?
        .combine(1.0, &ramp(lifting.left[1].value(0.0), lifting.right[1].value(0.0)), -1.0);

    let source = lifting.modified_source(load, potential);
    let system = GalerkinSystem::assemble(&potential.sample(interval), source, basis)?.with_load_mode(LoadMode::Cached);
    let trajectory = system.integrate(&d0, &d1, final_time, dt)?;
    Ok(LiftedSolution {
        lifting,
        system,
        trajectory,
        d0,
        d1,
        consistency,
    })
}
