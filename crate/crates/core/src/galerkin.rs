//! Galerkin ODE system `d'' + (E + G) d = f` and its Stormer-Verlet integration.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, WaveError};
use crate::functions::{Forcing, Profile};
use crate::spectral::{check_nonnegative, EigenBasis, GridFunction, SpectralCoeffs};

/// How the load vector `f^k(t) = (f(t, .), w_k)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Sample `f(t, .)` and run the quadrature on every call.
    #[default]
    PerStep,
    /// Project each separable spatial profile once and combine the cached
    /// coefficient vectors with the time factors.
    Cached,
}

#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    basis: Arc<EigenBasis>,
    potential: GridFunction,
    potential_sup: f64,
    potential_matrix: DMatrix<f64>,
    load: Forcing,
    load_mode: LoadMode,
    cached_terms: Vec<DVector<f64>>,
}

impl GalerkinSystem {
    /// Builds the stiffness (diagonal `lambda_k`), potential matrix
    /// `g^{lk} = (V w_l, w_k)` and the load provider.
    pub fn assemble(potential: &GridFunction, load: Forcing, basis: Arc<EigenBasis>) -> Result<Self> {
        potential.check_len(basis.interval())?;
        check_nonnegative(potential, basis.interval(), |node, x, value| WaveError::PotentialSign {
            node,
            x,
            value,
        })?;
        let potential_matrix = basis.weighted_gram_matrix(potential)?;
        Ok(Self {
            potential_sup: potential.sup_norm(),
            potential: potential.clone(),
            potential_matrix,
            load,
            load_mode: LoadMode::PerStep,
            cached_terms: Vec::new(),
            basis,
        })
    }

    /// Convenience: sample a potential profile on the basis quadrature first.
    pub fn assemble_profile(potential: &Profile, load: Forcing, basis: Arc<EigenBasis>) -> Result<Self> {
        let v = potential.sample(basis.interval());
        Self::assemble(&v, load, basis)
    }

    pub fn with_load_mode(mut self, mode: LoadMode) -> Self {
        self.load_mode = mode;
        self.cached_terms = match mode {
            LoadMode::PerStep => Vec::new(),
            LoadMode::Cached => self
                .load
                .terms()
                .iter()
                .map(|term| {
                    let g = term.space.sample(self.basis.interval());
                    self.basis
                        .project(&g)
                        .expect("sampled on the basis quadrature")
                        .into_vector()
                })
                .collect(),
        };
        self
    }

    pub fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    pub fn potential(&self) -> &GridFunction {
        &self.potential
    }

    /// `max |V|` over the quadrature nodes.
    pub fn potential_sup(&self) -> f64 {
        self.potential_sup
    }

    pub fn potential_matrix(&self) -> &DMatrix<f64> {
        &self.potential_matrix
    }

    pub fn stiffness(&self) -> &DVector<f64> {
        self.basis.lambdas()
    }

    pub fn load(&self) -> &Forcing {
        &self.load
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    /// Load coefficients `f^k(t)`.
    pub fn load_at(&self, t: f64) -> DVector<f64> {
        let m = self.modes();
        if self.load.is_zero() {
            return DVector::zeros(m);
        }
        match self.load_mode {
            LoadMode::PerStep => {
                let g = self.load.sample(t, self.basis.interval());
                self.basis
                    .project(&g)
                    .expect("sampled on the basis quadrature")
                    .into_vector()
            }
            LoadMode::Cached => {
                let mut out = DVector::zeros(m);
                for (term, coeffs) in self.load.terms().iter().zip(&self.cached_terms) {
                    out.axpy(term.time.value(t), coeffs, 1.0);
                }
                out
            }
        }
    }

    /// `d''_k = f^k(t) - lambda_k d_k - sum_l g^{lk} d_l`
    pub fn accel(&self, d: &SpectralCoeffs, t: f64) -> SpectralCoeffs {
        SpectralCoeffs::new(self.accel_vec(d.as_vector(), t))
    }

    fn accel_vec(&self, d: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut a = self.load_at(t);
        a -= self.basis.lambdas().component_mul(d);
        a.gemv(-1.0, &self.potential_matrix, d, 1.0);
        a
    }

    /// Largest step the integrator accepts: `0.5 / sqrt(lambda_max + ||V||_inf)`.
    pub fn stability_limit(&self) -> f64 {
        0.5 / (self.basis.lambda_max() + self.potential_sup).sqrt()
    }

    /// Discrete energy `1/2 (|d'|^2 + sum lambda_k d_k^2 + d^T G d)`.
    pub fn energy(&self, d: &SpectralCoeffs, dprime: &SpectralCoeffs) -> f64 {
        0.5 * (dprime.as_vector().norm_squared() + self.stiffness_form(d.as_vector()) + self.potential_form(d.as_vector()))
    }

    pub(crate) fn stiffness_form(&self, d: &DVector<f64>) -> f64 {
        d.iter().zip(self.basis.lambdas().iter()).map(|(c, l)| l * c * c).sum()
    }

    /// `d^T G d = ||sqrt(V) u_m||^2`, clamped at zero against rounding.
    pub(crate) fn potential_form(&self, d: &DVector<f64>) -> f64 {
        d.dot(&(&self.potential_matrix * d)).max(0.0)
    }

    /// Velocity-Verlet integration of the Galerkin system on `[0, T]`.
    ///
    /// The step is shrunk to `T / ceil(T / dt)` so that the grid ends exactly
    /// at `T`.
    pub fn integrate(&self, d0: &SpectralCoeffs, d1: &SpectralCoeffs, final_time: f64, dt: f64) -> Result<Trajectory> {
        self.basis.check_modes(d0)?;
        self.basis.check_modes(d1)?;
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(WaveError::invalid(format!("final time must be positive, got {final_time}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(WaveError::invalid(format!("time step must be positive, got {dt}")));
        }
        let limit = self.stability_limit();
        if dt > limit {
            return Err(WaveError::StepSize {
                guard: "verlet-stability",
                dt,
                suggested: limit,
            });
        }
        let steps = ((final_time / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = final_time / steps as f64;

        let mut times = Vec::with_capacity(steps + 1);
        let mut ds = Vec::with_capacity(steps + 1);
        let mut vs = Vec::with_capacity(steps + 1);

        let mut d = d0.as_vector().clone();
        let mut v = d1.as_vector().clone();
        let mut a = self.accel_vec(&d, 0.0);
        times.push(0.0);
        ds.push(SpectralCoeffs::new(d.clone()));
        vs.push(SpectralCoeffs::new(v.clone()));
        for n in 1..=steps {
            let t = n as f64 * h;
            v.axpy(0.5 * h, &a, 1.0);
            d.axpy(h, &v, 1.0);
            a = self.accel_vec(&d, t);
            v.axpy(0.5 * h, &a, 1.0);
            if !(d.iter().all(|x| x.is_finite()) && v.iter().all(|x| x.is_finite())) {
                return Err(WaveError::StepSize {
                    guard: "finite-state",
                    dt: h,
                    suggested: 0.5 * h,
                });
            }
            times.push(t);
            ds.push(SpectralCoeffs::new(d.clone()));
            vs.push(SpectralCoeffs::new(v.clone()));
        }
        Ok(Trajectory {
            times,
            dt: h,
            d_samples: ds,
            dprime_samples: vs,
        })
    }
}

/// Time samples of the Galerkin coefficients and their velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    dt: f64,
    d_samples: Vec<SpectralCoeffs>,
    dprime_samples: Vec<SpectralCoeffs>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn d(&self) -> &[SpectralCoeffs] {
        &self.d_samples
    }

    pub fn dprime(&self) -> &[SpectralCoeffs] {
        &self.dprime_samples
    }

    /// Index of the sample closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        let i = (t / self.dt).round();
        (i.max(0.0) as usize).min(self.len() - 1)
    }

    /// `a * self + b * other`, sample by sample. Both must share the time grid.
    pub fn combine(&self, a: f64, other: &Trajectory, b: f64) -> Result<Trajectory> {
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-15 * self.dt.max(1.0) {
            return Err(WaveError::invalid("trajectories are on different time grids"));
        }
        Ok(Trajectory {
            times: self.times.clone(),
            dt: self.dt,
            d_samples: self
                .d_samples
                .iter()
                .zip(&other.d_samples)
                .map(|(x, y)| x.combine(a, y, b))
                .collect(),
            dprime_samples: self
                .dprime_samples
                .iter()
                .zip(&other.dprime_samples)
                .map(|(x, y)| x.combine(a, y, b))
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.d_samples.iter().chain(&self.dprime_samples).all(|d| d.is_finite())
    }
}

/// Project the initial data, assemble and integrate.
#[allow(clippy::too_many_arguments)]
pub fn solve_ivp(
    potential: &GridFunction,
    load: Forcing,
    u0: &GridFunction,
    u1: &GridFunction,
    basis: Arc<EigenBasis>,
    final_time: f64,
    dt: f64,
) -> Result<(GalerkinSystem, Trajectory)> {
    let d0 = basis.project(u0)?;
    let d1 = basis.project(u1)?;
    let system = GalerkinSystem::assemble(potential, load, basis)?;
    let traj = system.integrate(&d0, &d1, final_time, dt)?;
    Ok((system, traj))
}
