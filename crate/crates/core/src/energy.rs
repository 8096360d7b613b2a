//! Energy functionals of a Galerkin trajectory and numerical checks of the
//! a-priori estimates: the Gronwall bound on
//! `eta(t) = ||u_t||^2 + ||u||_{H10}^2 + ||sqrt(V) u||^2`, the sup/`L^2(H^-1)`
//! energy estimate, its corollaries, the estimates obtained from the
//! time-differentiated problem, and the `M`-norm
//! `||u||_M^2 = ||Lap u||^2 + ||u_tt||^2 + ||sqrt(V) u||^2` in `L^2(0,T; L^2)`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Result, WaveError};
use crate::galerkin::{GalerkinSystem, Trajectory};
use crate::quadrature::{cumulative_trapezoid, trapezoid_uniform};
use crate::spectral::{spectral_norm_sq, Norm, SpectralCoeffs};

/// `eta(t_n) = |d'|^2 + sum lambda_k d_k^2 + d^T G d` at every sample.
pub fn eta_of_t(traj: &Trajectory, system: &GalerkinSystem) -> Vec<f64> {
    traj.d()
        .iter()
        .zip(traj.dprime())
        .map(|(d, v)| 2.0 * system.energy(d, v))
        .collect()
}

/// `xi(t_n) = ||f(t_n, .)||^2_{L^2}` by quadrature of the full source.
pub fn xi_of_t(traj: &Trajectory, system: &GalerkinSystem) -> Vec<f64> {
    let interval = system.basis().interval();
    traj.times()
        .iter()
        .map(|&t| {
            if system.load().is_zero() {
                return 0.0;
            }
            let f = system.load().sample(t, interval);
            let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
            interval.integrate(&sq).max(0.0)
        })
        .collect()
}

/// `e^{t_n} (eta0 + int_0^{t_n} xi)` with a trapezoidal running integral.
pub fn gronwall_bound(eta0: f64, xi: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    if xi.len() != times.len() {
        return Err(WaveError::LengthMismatch {
            expected: times.len(),
            found: xi.len(),
        });
    }
    if let Some((i, v)) = xi.iter().enumerate().find(|(_, &v)| v.is_nan() || v < 0.0) {
        return Err(WaveError::invalid(format!("xi must be nonnegative; xi[{i}] = {v}")));
    }
    if eta0.is_nan() || eta0 < 0.0 {
        return Err(WaveError::invalid(format!("eta(0) must be nonnegative, got {eta0}")));
    }
    let integral = cumulative_trapezoid(xi, times);
    Ok(times
        .iter()
        .zip(&integral)
        .map(|(&t, &i)| t.exp() * (eta0 + i))
        .collect())
}

/// Tolerances for the discrete Gronwall comparison
/// `eta_n <= bound_n (1 + relative) + absolute + drift * dt^2 (1 + eta0 + int xi)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GronwallTolerance {
    pub relative: f64,
    pub absolute: f64,
    pub drift: f64,
}

impl Default for GronwallTolerance {
    fn default() -> Self {
        Self {
            relative: 1e-6,
            absolute: 1e-12,
            drift: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub eta_values: Vec<f64>,
    pub xi_values: Vec<f64>,
    pub gronwall_bound_values: Vec<f64>,
    /// `sup ||u_t|| + sup ||u||_{H10} + sup ||sqrt(V) u|| + ||u_tt||_{L^2 H^-1}`
    pub lhs: f64,
    /// `||f||_{L^2 L^2} + (||V||^{1/2} + ||V||) ||u0|| + ||u0||_{H10} + ||u1||`
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: GronwallTolerance,
    /// Largest `eta_n - allowed_n` (negative when every sample is inside).
    pub worst_margin: f64,
    pub violations: usize,
    pub passed: bool,
}

/// Norms of the initial data and source that enter the right-hand sides.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DataNorms {
    pub v_sup: f64,
    pub u0_l2: f64,
    pub u0_h10: f64,
    pub u0_h20: f64,
    pub u1_l2: f64,
    pub u1_h10: f64,
    pub f_l2l2: f64,
    /// `None` when the source has no time derivative.
    pub f_h1l2: Option<f64>,
}

impl DataNorms {
    pub fn compute(traj: &Trajectory, system: &GalerkinSystem, u0: &SpectralCoeffs, u1: &SpectralCoeffs) -> Self {
        let lambdas = system.basis().lambdas();
        let xi = xi_of_t(traj, system);
        let f_sq = trapezoid_uniform(&xi, traj.dt());
        let f_h1l2 = system.load().time_derivative().map(|df| {
            let interval = system.basis().interval();
            let dxi: Vec<f64> = traj
                .times()
                .iter()
                .map(|&t| {
                    let g = df.sample(t, interval);
                    let sq: Vec<f64> = g.values().iter().map(|v| v * v).collect();
                    interval.integrate(&sq).max(0.0)
                })
                .collect();
            (f_sq + trapezoid_uniform(&dxi, traj.dt())).sqrt()
        });
        Self {
            v_sup: system.potential_sup(),
            u0_l2: spectral_norm_sq(Norm::L2, u0.as_vector(), lambdas).sqrt(),
            u0_h10: spectral_norm_sq(Norm::H10, u0.as_vector(), lambdas).sqrt(),
            u0_h20: spectral_norm_sq(Norm::H20, u0.as_vector(), lambdas).sqrt(),
            u1_l2: spectral_norm_sq(Norm::L2, u1.as_vector(), lambdas).sqrt(),
            u1_h10: spectral_norm_sq(Norm::H10, u1.as_vector(), lambdas).sqrt(),
            f_l2l2: f_sq.sqrt(),
            f_h1l2,
        }
    }
}

/// `lhs / rhs`, with `0/0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Per-sample squared norms that several estimates reuse.
struct SampleNorms {
    velocity_l2: Vec<f64>,
    h10: Vec<f64>,
    sqrt_v: Vec<f64>,
    /// `||u_tt||^2_{H^-1}` from the Galerkin acceleration.
    accel_hm1: Vec<f64>,
    accel_l2: Vec<f64>,
    /// `||Lap u||^2_{L^2} = sum lambda^2 d^2`
    laplacian_l2: Vec<f64>,
}

impl SampleNorms {
    fn compute(traj: &Trajectory, system: &GalerkinSystem) -> Self {
        let lambdas = system.basis().lambdas();
        let n = traj.len();
        let mut s = SampleNorms {
            velocity_l2: Vec::with_capacity(n),
            h10: Vec::with_capacity(n),
            sqrt_v: Vec::with_capacity(n),
            accel_hm1: Vec::with_capacity(n),
            accel_l2: Vec::with_capacity(n),
            laplacian_l2: Vec::with_capacity(n),
        };
        for ((d, v), &t) in traj.d().iter().zip(traj.dprime()).zip(traj.times()) {
            let a = system.accel(d, t);
            s.velocity_l2.push(v.as_vector().norm_squared());
            s.h10.push(system.stiffness_form(d.as_vector()));
            s.sqrt_v.push(system.potential_form(d.as_vector()));
            s.accel_hm1.push(spectral_norm_sq(Norm::HMinus1, a.as_vector(), lambdas));
            s.accel_l2.push(a.as_vector().norm_squared());
            s.laplacian_l2.push(spectral_norm_sq(Norm::H20, d.as_vector(), lambdas));
        }
        s
    }
}

fn sup_sqrt(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x)).sqrt()
}

/// Checks the Gronwall bound sample by sample and evaluates both sides of
/// the energy estimate.
pub fn verify_energy_estimate(
    traj: &Trajectory,
    system: &GalerkinSystem,
    u0: &SpectralCoeffs,
    u1: &SpectralCoeffs,
    tolerance: GronwallTolerance,
) -> Result<EnergyReport> {
    let eta = eta_of_t(traj, system);
    let xi = xi_of_t(traj, system);
    let bound = gronwall_bound(eta[0], &xi, traj.times())?;
    let xi_total = trapezoid_uniform(&xi, traj.dt());
    let drift = tolerance.drift * traj.dt().powi(2) * (1.0 + eta[0] + xi_total);
    let mut violations = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    for (e, b) in eta.iter().zip(&bound) {
        let allowed = b * (1.0 + tolerance.relative) + tolerance.absolute + drift;
        let margin = e - allowed;
        worst_margin = worst_margin.max(margin);
        if margin.is_nan() || margin > 0.0 {
            violations += 1;
        }
    }

    let s = SampleNorms::compute(traj, system);
    let lhs = sup_sqrt(&s.velocity_l2)
        + sup_sqrt(&s.h10)
        + sup_sqrt(&s.sqrt_v)
        + trapezoid_uniform(&s.accel_hm1, traj.dt()).sqrt();
    let data = DataNorms::compute(traj, system, u0, u1);
    let rhs = data.f_l2l2 + (data.v_sup.sqrt() + data.v_sup) * data.u0_l2 + data.u0_h10 + data.u1_l2;
    let r = ratio(lhs, rhs);
    Ok(EnergyReport {
        times: traj.times().to_vec(),
        eta_values: eta,
        xi_values: xi,
        gronwall_bound_values: bound,
        lhs,
        rhs,
        ratio: r,
        tolerance,
        worst_margin,
        violations,
        passed: violations == 0 && r.is_finite(),
    })
}

/// Components of the `M`-norm (squared, time-integrated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MNormParts {
    pub laplacian_sq: f64,
    pub accel_sq: f64,
    pub weighted_sq: f64,
}

impl MNormParts {
    pub fn total(&self) -> f64 {
        (self.laplacian_sq + self.accel_sq + self.weighted_sq).sqrt()
    }
}

/// `M`-norm of a Galerkin trajectory. `Lap u_m = -sum lambda_k d_k w_k`, the
/// acceleration comes from the system, time integrals are trapezoidal.
pub fn m_norm(traj: &Trajectory, system: &GalerkinSystem) -> f64 {
    m_norm_parts(traj, system).total()
}

pub fn m_norm_parts(traj: &Trajectory, system: &GalerkinSystem) -> MNormParts {
    let s = SampleNorms::compute(traj, system);
    MNormParts {
        laplacian_sq: trapezoid_uniform(&s.laplacian_l2, traj.dt()),
        accel_sq: trapezoid_uniform(&s.accel_l2, traj.dt()),
        weighted_sq: trapezoid_uniform(&s.sqrt_v, traj.dt()),
    }
}

/// `M`-norm of `u_a - u_b` where each trajectory carries its own system (the
/// accelerations differ when the potentials or sources differ). The weighted
/// term uses the potential of `weight`.
pub fn m_norm_difference(
    a: (&Trajectory, &GalerkinSystem),
    b: (&Trajectory, &GalerkinSystem),
    weight: &GalerkinSystem,
) -> Result<MNormParts> {
    let (ta, sa) = a;
    let (tb, sb) = b;
    if ta.len() != tb.len() || sa.modes() != sb.modes() || sa.modes() != weight.modes() {
        return Err(WaveError::invalid("trajectories are not comparable"));
    }
    let lambdas = weight.basis().lambdas();
    let mut lap = Vec::with_capacity(ta.len());
    let mut acc = Vec::with_capacity(ta.len());
    let mut wt = Vec::with_capacity(ta.len());
    for i in 0..ta.len() {
        let t = ta.times()[i];
        let dd: DVector<f64> = ta.d()[i].as_vector() - tb.d()[i].as_vector();
        let da: DVector<f64> = sa.accel(&ta.d()[i], t).into_vector() - sb.accel(&tb.d()[i], t).into_vector();
        lap.push(spectral_norm_sq(Norm::H20, &dd, lambdas));
        acc.push(da.norm_squared());
        wt.push(weight.potential_form(&dd));
    }
    Ok(MNormParts {
        laplacian_sq: trapezoid_uniform(&lap, ta.dt()),
        accel_sq: trapezoid_uniform(&acc, ta.dt()),
        weighted_sq: trapezoid_uniform(&wt, ta.dt()),
    })
}

/// One estimate: its left side, the bracket on the right and their ratio.
#[derive(Debug, Clone, Serialize)]
pub struct RatioCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl RatioCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
        }
    }
}

/// Estimates that need the time-differentiated problem `v = u_t`.
#[derive(Debug, Clone, Serialize)]
pub struct DifferentiatedChecks {
    /// `||u_tt||_{L^2 L^2}` via `||v_t||` against the data bracket.
    pub accel_l2: RatioCheck,
    /// `||Lap u||_{L^2 L^2}` against the data bracket.
    pub laplacian_l2: RatioCheck,
    /// `L^2(0,T; L^2)` distance between `v` and central differences of `u`.
    pub v_vs_numerical_ut: f64,
    /// `||u_tt||_{L^2 L^2}` straight from the Galerkin acceleration.
    pub accel_l2_direct: f64,
}

#[derive(Debug, Clone)]
pub struct CorollaryReport {
    pub data: DataNorms,
    pub velocity_sup: RatioCheck,
    pub h10_sup: RatioCheck,
    pub weighted_sup: RatioCheck,
    pub accel_hm1: RatioCheck,
    pub laplacian_hm1: RatioCheck,
    pub differentiated: std::result::Result<DifferentiatedChecks, WaveError>,
}

impl CorollaryReport {
    /// Every ratio that was computed, in a fixed order.
    pub fn ratios(&self) -> Vec<&RatioCheck> {
        let mut out = vec![
            &self.velocity_sup,
            &self.h10_sup,
            &self.weighted_sup,
            &self.accel_hm1,
            &self.laplacian_hm1,
        ];
        if let Ok(d) = &self.differentiated {
            out.push(&d.accel_l2);
            out.push(&d.laplacian_l2);
        }
        out
    }
}

/// Evaluates the corollary estimates on a solved trajectory; the two
/// second-order estimates solve the differentiated system
/// `v_tt - v_xx + V v = f_t`, `v(0) = u1`, `v_t(0) = Lap u0 - V u0 + f(0)`.
pub fn corollary_bounds(
    traj: &Trajectory,
    system: &GalerkinSystem,
    u0: &SpectralCoeffs,
    u1: &SpectralCoeffs,
) -> Result<CorollaryReport> {
    let dt = traj.dt();
    let data = DataNorms::compute(traj, system, u0, u1);
    let s = SampleNorms::compute(traj, system);
    let v_half = data.v_sup.sqrt();

    let first_bracket = data.f_l2l2 + v_half * data.u0_l2 + data.u0_h10 + data.u1_l2;
    let accel_bracket = data.f_l2l2 + data.v_sup * data.u0_l2 + data.u0_h10 + data.u1_l2;
    let laplacian_bracket = (1.0 + v_half) * (data.f_l2l2 + data.u0_h10 + data.u1_l2) + data.v_sup * data.u0_l2;

    // ||Lap u||_{H^-1}^2 = sum lambda_k d_k^2 = ||u||_{H10}^2
    let laplacian_hm1 = trapezoid_uniform(&s.h10, dt).sqrt();

    let differentiated = differentiated_checks(traj, system, u0, u1, &data, &s);

    Ok(CorollaryReport {
        velocity_sup: RatioCheck::new("velocity_linf_l2", sup_sqrt(&s.velocity_l2), first_bracket),
        h10_sup: RatioCheck::new("displacement_linf_h10", sup_sqrt(&s.h10), first_bracket),
        weighted_sup: RatioCheck::new("weighted_linf_l2", sup_sqrt(&s.sqrt_v), first_bracket),
        accel_hm1: RatioCheck::new("accel_l2_hm1", trapezoid_uniform(&s.accel_hm1, dt).sqrt(), accel_bracket),
        laplacian_hm1: RatioCheck::new("laplacian_l2_hm1", laplacian_hm1, laplacian_bracket),
        differentiated,
        data,
    })
}

fn differentiated_checks(
    traj: &Trajectory,
    system: &GalerkinSystem,
    u0: &SpectralCoeffs,
    u1: &SpectralCoeffs,
    data: &DataNorms,
    s: &SampleNorms,
) -> std::result::Result<DifferentiatedChecks, WaveError> {
    let df = system.load().time_derivative().ok_or(WaveError::UnsupportedCheck {
        check: "differentiated-problem estimates",
        reason: "source has no time derivative",
    })?;
    let f_h1l2 = data.f_h1l2.expect("derivative exists");
    let dt = traj.dt();

    let v_system = GalerkinSystem::assemble(system.potential(), df, system.basis().clone())?;
    let v0 = u1.clone();
    let v1 = system.accel(u0, 0.0);
    let v_traj = v_system.integrate(&v0, &v1, traj.final_time(), dt)?;
    let vt_sq: Vec<f64> = v_traj.dprime().iter().map(|v| v.as_vector().norm_squared()).collect();
    let accel_l2 = trapezoid_uniform(&vt_sq, dt).sqrt();

    let v_half = data.v_sup.sqrt();
    let second_bracket = f_h1l2 + (1.0 + v_half) * data.u1_h10 + (1.0 + data.v_sup) * data.u0_h20;
    let laplacian_bracket =
        (1.0 + v_half) * (f_h1l2 + data.u0_h10 + data.u1_h10) + (1.0 + data.v_sup) * data.u0_h20;
    let laplacian_l2 = trapezoid_uniform(&s.laplacian_l2, dt).sqrt();

    let numerical_ut = central_differences(traj);
    let diff_sq: Vec<f64> = numerical_ut
        .iter()
        .zip(v_traj.d())
        .map(|(a, b)| (a - b.as_vector()).norm_squared())
        .collect();

    Ok(DifferentiatedChecks {
        accel_l2: RatioCheck::new("accel_l2_l2", accel_l2, second_bracket),
        laplacian_l2: RatioCheck::new("laplacian_l2_l2", laplacian_l2, laplacian_bracket),
        v_vs_numerical_ut: trapezoid_uniform(&diff_sq, dt).sqrt(),
        accel_l2_direct: trapezoid_uniform(&s.accel_l2, dt).sqrt(),
    })
}

/// Second-order finite differences of the coefficient samples in time
/// (one-sided three-point stencils at the ends).
pub fn central_differences(traj: &Trajectory) -> Vec<DVector<f64>> {
    let d = traj.d();
    let h = traj.dt();
    let n = d.len();
    (0..n)
        .map(|i| {
            let x = |j: usize| d[j].as_vector();
            if n < 3 {
                if n == 1 {
                    return DVector::zeros(x(0).len());
                }
                return (x(1) - x(0)) / h;
            }
            if i == 0 {
                (x(0) * -3.0 + x(1) * 4.0 - x(2)) / (2.0 * h)
            } else if i == n - 1 {
                (x(n - 1) * 3.0 - x(n - 2) * 4.0 + x(n - 3)) / (2.0 * h)
            } else {
                (x(i + 1) - x(i - 1)) / (2.0 * h)
            }
        })
        .collect()
}
