//! Second-order finite-difference solver (3-point Laplacian, leapfrog in
//! time) used as an independent reference. It shares no basis, quadrature
//! or integrator code with the spectral path.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::functions::{Forcing, Profile};
use crate::galerkin::Trajectory;
use crate::lifting::{BoundaryData, LiftedSolution};

/// Uniform grid `x_i = i dx`, `i = 0..=nx+1`, with node samples of the data.
#[derive(Debug, Clone)]
pub struct FdGrid {
    length: f64,
    nx: usize,
    dx: f64,
    dt: f64,
    potential: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    potential_sup: f64,
}

impl FdGrid {
    /// Samples `V`, `u0`, `u1` at all nodes (endpoints included).
    pub fn new(length: f64, nx: usize, dt: f64, potential: &Profile, u0: &Profile, u1: &Profile) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(WaveError::invalid(format!("interval length must be positive, got {length}")));
        }
        if nx < 8 {
            return Err(WaveError::invalid(format!("need at least 8 interior points, got {nx}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(WaveError::invalid(format!("time step must be positive, got {dt}")));
        }
        let dx = length / (nx + 1) as f64;
        let xs: Vec<f64> = (0..nx + 2).map(|i| i as f64 * dx).collect();
        let potential: Vec<f64> = xs.iter().map(|&x| potential.eval(x)).collect();
        let potential_sup = potential.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let limit = 0.9 * dx / (1.0 + dx * dx * potential_sup).sqrt();
        if dt > limit {
            return Err(WaveError::StepSize {
                guard: "fd-cfl",
                dt,
                suggested: limit,
            });
        }
        Ok(Self {
            length,
            nx,
            dx,
            dt,
            u0: xs.iter().map(|&x| u0.eval(x)).collect(),
            u1: xs.iter().map(|&x| u1.eval(x)).collect(),
            potential,
            potential_sup,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn potential_sup(&self) -> f64 {
        self.potential_sup
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Largest admissible step for this grid and potential.
    pub fn cfl_limit(&self) -> f64 {
        0.9 * self.dx / (1.0 + self.dx * self.dx * self.potential_sup).sqrt()
    }
}

/// Grid values (endpoints included) at the recorded times.
#[derive(Debug, Clone)]
pub struct FdSolution {
    pub dx: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

impl FdSolution {
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.snapshots.first().map_or(0, Vec::len);
        (0..n).map(|i| i as f64 * self.dx).collect()
    }
}

/// Leapfrog integration up to `final_time`, recording the step nearest to
/// each checkpoint. The step is shortened so it divides `final_time`.
pub fn fd_solve(
    grid: &FdGrid,
    load: &Forcing,
    boundary: Option<&BoundaryData>,
    final_time: f64,
    checkpoints: &[f64],
) -> Result<FdSolution> {
    if !(final_time > 0.0 && final_time.is_finite()) {
        return Err(WaveError::invalid(format!("final time must be positive, got {final_time}")));
    }
    if let Some(t) = checkpoints.iter().find(|&&t| !(0.0..=final_time).contains(&t)) {
        return Err(WaveError::invalid(format!("checkpoint {t} outside [0, {final_time}]")));
    }
    let steps = (final_time / grid.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = final_time / steps as f64;
    let mut record: Vec<usize> = checkpoints.iter().map(|&t| (t / dt).round() as usize).collect();
    record.sort_unstable();
    record.dedup();

    let n = grid.nx + 2;
    let (g0, g1) = match boundary {
        Some(b) => (b.g0.clone(), b.g1.clone()),
        None => Default::default(),
    };
    let xs: Vec<f64> = (0..n).map(|i| grid.x(i)).collect();
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let rhs = |u: &[f64], t: f64, out: &mut [f64]| {
        for i in 1..n - 1 {
            let lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_dx2;
            out[i] = lap - grid.potential[i] * u[i] + load.value(t, xs[i]);
        }
    };
    let set_boundary = |u: &mut [f64], t: f64| {
        u[0] = g0.value(t);
        u[n - 1] = g1.value(t);
    };

    let mut times = Vec::with_capacity(record.len());
    let mut snapshots = Vec::with_capacity(record.len());
    let mut next = record.iter().peekable();
    let mut store = |step: usize, u: &[f64]| {
        if next.peek() == Some(&&step) {
            next.next();
            times.push(step as f64 * dt);
            snapshots.push(u.to_vec());
        }
    };

    let mut prev = grid.u0.clone();
    set_boundary(&mut prev, 0.0);
    store(0, &prev);
    let mut acc = vec![0.0; n];
    rhs(&prev, 0.0, &mut acc);
    let mut cur = vec![0.0; n];
    for i in 1..n - 1 {
        cur[i] = prev[i] + dt * grid.u1[i] + 0.5 * dt * dt * acc[i];
    }
    set_boundary(&mut cur, dt);
    store(1, &cur);
    let mut nxt = vec![0.0; n];
    for step in 1..steps {
        let t = step as f64 * dt;
        rhs(&cur, t, &mut acc);
        for i in 1..n - 1 {
            nxt[i] = 2.0 * cur[i] - prev[i] + dt * dt * acc[i];
        }
        set_boundary(&mut nxt, t + dt);
        if !nxt.iter().all(|v| v.is_finite()) {
            return Err(WaveError::Precondition(format!("finite-difference solution blew up at t = {t}")));
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut nxt);
        store(step + 1, &cur);
    }
    Ok(FdSolution {
        dx: grid.dx,
        dt,
        times,
        snapshots,
    })
}

/// Discrepancy between a reference field and the finite-difference
/// snapshots: trapezoid `L^2` on the grid at each recorded time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub max_l2: f64,
}

/// Compares the snapshots with `exact(t, x)`.
pub fn compare_fn<F: Fn(f64, f64) -> f64>(fd: &FdSolution, exact: F) -> Comparison {
    let l2: Vec<f64> = fd
        .times
        .iter()
        .zip(&fd.snapshots)
        .map(|(&t, u)| {
            let n = u.len();
            let sq: f64 = u
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let e = (v - exact(t, i as f64 * fd.dx)).powi(2);
                    if i == 0 || i == n - 1 {
                        0.5 * e
                    } else {
                        e
                    }
                })
                .sum();
            (sq * fd.dx).sqrt()
        })
        .collect();
    Comparison {
        times: fd.times.clone(),
        max_l2: l2.iter().fold(0.0, |m: f64, &v| m.max(v)),
        l2,
    }
}

/// Spectral coefficients at time `t` by cubic Hermite interpolation of the
/// stored displacement and velocity samples.
fn coefficients_at(traj: &Trajectory, t: f64) -> Vec<f64> {
    let times = traj.times();
    let h = traj.dt();
    let last = times.len() - 1;
    let i = ((t / h).floor() as usize).min(last.saturating_sub(1));
    if last == 0 {
        return traj.d()[0].as_slice().to_vec();
    }
    let s = ((t - times[i]) / h).clamp(0.0, 1.0);
    let (h00, h10, h01, h11) = (
        (1.0 + 2.0 * s) * (1.0 - s).powi(2),
        s * (1.0 - s).powi(2),
        s * s * (3.0 - 2.0 * s),
        s * s * (s - 1.0),
    );
    let (d0, v0, d1, v1) = (
        traj.d()[i].as_slice(),
        traj.dprime()[i].as_slice(),
        traj.d()[i + 1].as_slice(),
        traj.dprime()[i + 1].as_slice(),
    );
    (0..d0.len())
        .map(|k| h00 * d0[k] + h10 * h * v0[k] + h01 * d1[k] + h11 * h * v1[k])
        .collect()
}

/// `sum_k d_k sqrt(2/L) sin(k pi x / L)`, evaluated directly.
fn sine_series(d: &[f64], length: f64, x: f64) -> f64 {
    let amp = (2.0 / length).sqrt();
    d.iter()
        .enumerate()
        .map(|(k, &c)| c * amp * ((k + 1) as f64 * PI * x / length).sin())
        .sum()
}

/// Compares a homogeneous Galerkin trajectory on `(0, length)` with the
/// finite-difference snapshots.
pub fn compare(traj: &Trajectory, length: f64, fd: &FdSolution) -> Comparison {
    let coeffs: Vec<Vec<f64>> = fd.times.iter().map(|&t| coefficients_at(traj, t)).collect();
    let lookup = |t: f64| fd.times.iter().position(|&s| s == t).expect("recorded time");
    compare_fn(fd, |t, x| sine_series(&coeffs[lookup(t)], length, x))
}

/// Like [`compare`] but adds the lifting back before comparing.
pub fn compare_lifted(sol: &LiftedSolution, fd: &FdSolution) -> Comparison {
    let length = sol.lifting.length();
    let coeffs: Vec<Vec<f64>> = fd
        .times
        .iter()
        .map(|&t| coefficients_at(&sol.trajectory, t))
        .collect();
    let lookup = |t: f64| fd.times.iter().position(|&s| s == t).expect("recorded time");
    compare_fn(fd, |t, x| sine_series(&coeffs[lookup(t)], length, x) + sol.lifting.value(t, x))
}
