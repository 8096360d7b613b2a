//! Interval domain, Dirichlet sine eigenbasis, projections and the norms used
//! by the energy estimates.
//!
//! On `(0, L)` the Dirichlet Laplacian has eigenpairs
//! `lambda_k = (k pi / L)^2`, `w_k(x) = sqrt(2/L) sin(k pi x / L)`, orthonormal in
//! `L^2`. Every spectral norm below is a weighted sum over coefficients in this
//! basis.

use std::f64::consts::PI;
use std::ops::Index;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, WaveError};
use crate::quadrature::CompositeRule;

pub const DEFAULT_PANELS: usize = 64;
pub const DEFAULT_ORDER: usize = 8;

/// Sub-panels per window; edges sit at multiples of `1/24` of the half-width,
/// which contains the kinks (thirds) of every mollifier shape in the crate.
/// The bump's flat tails need the extra splitting: six sub-panels of 8 points
/// leave a mass error near 2e-6, forty-eight leave about 2e-13.
const WINDOW_PANELS: usize = 48;

/// The domain `(0, L)` together with its composite Gauss-Legendre quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    length: f64,
    quad_panels: usize,
    quad_order: usize,
    rule: CompositeRule,
}

impl Interval {
    pub fn new(length: f64, quad_panels: usize, quad_order: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(WaveError::invalid(format!("interval length must be positive, got {length}")));
        }
        if quad_panels == 0 || quad_order == 0 {
            return Err(WaveError::invalid("quadrature needs at least one panel and one point"));
        }
        let breakpoints = uniform_breakpoints(length, quad_panels);
        Ok(Self {
            length,
            quad_panels,
            quad_order,
            rule: CompositeRule::new(breakpoints, quad_order),
        })
    }

    /// `(0, L)` with the default 64 panels x 8 points.
    pub fn with_default_quadrature(length: f64) -> Result<Self> {
        Self::new(length, DEFAULT_PANELS, DEFAULT_ORDER)
    }

    /// Copy of this interval whose quadrature has extra panels over each
    /// `(center, half_width)` window: uniform sub-panels aligned with the
    /// window edges, its center and its thirds.
    pub fn refined(&self, windows: &[(f64, f64)]) -> Result<Self> {
        if windows.is_empty() {
            return Ok(self.clone());
        }
        let base = uniform_breakpoints(self.length, self.quad_panels);
        let inside = |x: f64| windows.iter().any(|&(c, h)| (x - c).abs() < h);
        let mut points: Vec<f64> = base.into_iter().filter(|&x| !inside(x)).collect();
        for &(c, h) in windows {
            if !(h > 0.0 && c - h >= 0.0 && c + h <= self.length) {
                return Err(WaveError::invalid(format!(
                    "refinement window {c} +/- {h} does not fit in (0, {})",
                    self.length
                )));
            }
            points.extend((0..=WINDOW_PANELS).map(|k| c + h * (2.0 * k as f64 / WINDOW_PANELS as f64 - 1.0)));
        }
        points.sort_by(f64::total_cmp);
        let tol = 1e-13 * self.length;
        points.dedup_by(|a, b| (*a - *b).abs() <= tol);
        // keep the exact endpoints
        points[0] = 0.0;
        let last = points.len() - 1;
        points[last] = self.length;
        Ok(Self {
            length: self.length,
            quad_panels: self.quad_panels,
            quad_order: self.quad_order,
            rule: CompositeRule::new(points, self.quad_order),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn quad_panels(&self) -> usize {
        self.quad_panels
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn panel_count(&self) -> usize {
        self.rule.panel_count()
    }

    pub fn breakpoints(&self) -> &[f64] {
        self.rule.breakpoints()
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }

    pub fn node_count(&self) -> usize {
        self.rule.nodes().len()
    }

    /// Quadrature of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.node_count());
        values.iter().zip(self.weights()).map(|(v, w)| v * w).sum()
    }

    pub fn integrate_fn<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes()
            .iter()
            .zip(self.weights())
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn uniform_breakpoints(length: f64, panels: usize) -> Vec<f64> {
    (0..=panels)
        .map(|i| length * i as f64 / panels as f64)
        .collect()
}

/// Values of a field at the quadrature nodes of an [`Interval`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction(Vec<f64>);

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(interval: &Interval) -> Self {
        Self(vec![0.0; interval.node_count()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_len(&self, interval: &Interval) -> Result<()> {
        if self.len() != interval.node_count() {
            return Err(WaveError::LengthMismatch {
                expected: interval.node_count(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for GridFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Coefficients `d_k` of a field in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs(DVector<f64>);

impl SpectralCoeffs {
    pub fn new(d: DVector<f64>) -> Self {
        Self(d)
    }

    pub fn from_slice(d: &[f64]) -> Self {
        Self(DVector::from_column_slice(d))
    }

    pub fn zeros(m: usize) -> Self {
        Self(DVector::zeros(m))
    }

    /// The `k`-th unit vector, 1-based like the mode index.
    pub fn unit(m: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= m, "mode {k} out of range 1..={m}");
        let mut d = DVector::zeros(m);
        d[k - 1] = 1.0;
        Self(d)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `a * self + b * other`
    pub fn combine(&self, a: f64, other: &SpectralCoeffs, b: f64) -> SpectralCoeffs {
        SpectralCoeffs(&self.0 * a + &other.0 * b)
    }
}

impl Index<usize> for SpectralCoeffs {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<DVector<f64>> for SpectralCoeffs {
    fn from(d: DVector<f64>) -> Self {
        Self(d)
    }
}

/// Dirichlet eigenpairs of `-d^2/dx^2` on an interval, tabulated at the
/// quadrature nodes.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    interval: Interval,
    lambdas: DVector<f64>,
    /// `values[(k, q)] = w_{k+1}(x_q)`
    values: DMatrix<f64>,
    /// `values` with each column scaled by its quadrature weight.
    weighted: DMatrix<f64>,
}

impl EigenBasis {
    pub fn build(interval: Interval, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(WaveError::invalid("mode count must be at least 1"));
        }
        let l = interval.length();
        let amp = (2.0 / l).sqrt();
        let nodes = interval.nodes();
        let nq = nodes.len();
        let lambdas = DVector::from_fn(m, |k, _| {
            let kk = (k + 1) as f64 * PI / l;
            kk * kk
        });
        let values = DMatrix::from_fn(m, nq, |k, q| {
            amp * ((k + 1) as f64 * PI * nodes[q] / l).sin()
        });
        let weights = interval.weights();
        let weighted = DMatrix::from_fn(m, nq, |k, q| values[(k, q)] * weights[q]);
        Ok(Self {
            interval,
            lambdas,
            values,
            weighted,
        })
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &DVector<f64> {
        &self.lambdas
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambdas[self.modes() - 1]
    }

    /// Tabulated `w_k(x_q)`, one row per mode.
    pub fn node_values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// `w_k(x)` at an arbitrary point, `k` 1-based.
    pub fn eval_mode(&self, k: usize, x: f64) -> f64 {
        let l = self.interval.length();
        (2.0 / l).sqrt() * (k as f64 * PI * x / l).sin()
    }

    /// `w_k'(x)`, `k` 1-based.
    pub fn eval_mode_derivative(&self, k: usize, x: f64) -> f64 {
        let l = self.interval.length();
        let kk = k as f64 * PI / l;
        (2.0 / l).sqrt() * kk * (kk * x).cos()
    }

    /// Pointwise evaluation of `sum_k d_k w_k(x)` by direct sine summation.
    pub fn eval(&self, d: &SpectralCoeffs, x: f64) -> f64 {
        d.as_slice()
            .iter()
            .enumerate()
            .map(|(k, &c)| c * self.eval_mode(k + 1, x))
            .sum()
    }

    /// Quadrature approximation of `(u, w_k)` for every mode.
    pub fn project(&self, u: &GridFunction) -> Result<SpectralCoeffs> {
        u.check_len(&self.interval)?;
        let u = DVector::from_column_slice(u.values());
        Ok(SpectralCoeffs(&self.weighted * u))
    }

    /// Samples `sum_k d_k w_k` at the quadrature nodes.
    pub fn reconstruct(&self, d: &SpectralCoeffs) -> Result<GridFunction> {
        self.check_modes(d)?;
        let v = self.values.tr_mul(d.as_vector());
        Ok(GridFunction(v.as_slice().to_vec()))
    }

    /// Quadrature Gram matrix `(w_j, w_k)`.
    pub fn gram_matrix(&self) -> DMatrix<f64> {
        &self.weighted * self.values.transpose()
    }

    /// Quadrature matrix `(w_j', w_k')` from tabulated derivatives.
    pub fn stiffness_gram_matrix(&self) -> DMatrix<f64> {
        let nodes = self.interval.nodes();
        let m = self.modes();
        let der = DMatrix::from_fn(m, nodes.len(), |k, q| self.eval_mode_derivative(k + 1, nodes[q]));
        let weighted = DMatrix::from_fn(m, nodes.len(), |k, q| der[(k, q)] * self.interval.weights()[q]);
        weighted * der.transpose()
    }

    /// Quadrature matrix `(V w_l, w_k)`.
    pub fn weighted_gram_matrix(&self, v: &GridFunction) -> Result<DMatrix<f64>> {
        v.check_len(&self.interval)?;
        let scaled = DMatrix::from_fn(self.modes(), v.len(), |k, q| self.values[(k, q)] * v[q]);
        let g = &self.weighted * scaled.transpose();
        // symmetrize away rounding
        Ok((&g + g.transpose()) * 0.5)
    }

    pub(crate) fn check_modes(&self, d: &SpectralCoeffs) -> Result<()> {
        if d.len() != self.modes() {
            return Err(WaveError::LengthMismatch {
                expected: self.modes(),
                found: d.len(),
            });
        }
        Ok(())
    }

    /// Closed-form Fourier-sine coefficients of the linear ramp profiles
    /// `1 - x/L` (left) and `x/L` (right).
    pub fn ramp_coefficients(&self) -> (SpectralCoeffs, SpectralCoeffs) {
        let l = self.interval.length();
        let amp = (2.0 / l).sqrt();
        let m = self.modes();
        let left = DVector::from_fn(m, |k, _| {
            let k = (k + 1) as f64;
            amp * l / (k * PI)
        });
        let right = DVector::from_fn(m, |k, _| {
            let k1 = k + 1;
            let sign = if k1 % 2 == 1 { 1.0 } else { -1.0 };
            amp * l * sign / (k1 as f64 * PI)
        });
        (SpectralCoeffs(left), SpectralCoeffs(right))
    }
}

/// Norms available on spectral and sampled fields.
#[derive(Debug, Clone, Copy)]
pub enum Norm<'a> {
    L2,
    /// `(sum lambda_k d_k^2)^{1/2}`, equal to `||grad u||`.
    H10,
    /// `(sum lambda_k^2 d_k^2)^{1/2}`, equal to `||Laplacian u||`.
    H20,
    /// Dual of `H10` over the truncated basis: `(sum d_k^2 / lambda_k)^{1/2}`.
    HMinus1,
    /// `(int V u^2)^{1/2}` by quadrature.
    WeightedL2 { weight: &'a GridFunction },
}

/// A field in either representation.
#[derive(Debug, Clone, Copy)]
pub enum Field<'a> {
    Spectral(&'a SpectralCoeffs),
    Grid(&'a GridFunction),
}

/// Evaluates `kind` on `field`, converting representations through the basis
/// when the norm lives in the other one.
pub fn norm(kind: Norm<'_>, field: Field<'_>, basis: &EigenBasis) -> Result<f64> {
    match (kind, field) {
        (Norm::L2, Field::Grid(u)) => {
            u.check_len(basis.interval())?;
            let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
            Ok(basis.interval().integrate(&sq).max(0.0).sqrt())
        }
        (Norm::WeightedL2 { weight }, Field::Grid(u)) => weighted_l2(weight, u, basis.interval()),
        (Norm::WeightedL2 { weight }, Field::Spectral(d)) => {
            let u = basis.reconstruct(d)?;
            weighted_l2(weight, &u, basis.interval())
        }
        (kind, Field::Spectral(d)) => {
            basis.check_modes(d)?;
            Ok(spectral_norm_sq(kind, d.as_vector(), basis.lambdas()).sqrt())
        }
        (kind, Field::Grid(u)) => {
            let d = basis.project(u)?;
            Ok(spectral_norm_sq(kind, d.as_vector(), basis.lambdas()).sqrt())
        }
    }
}

/// Squared spectral norm of a raw coefficient vector. The weighted norm is
/// not spectral and is rejected by the caller above.
pub(crate) fn spectral_norm_sq(kind: Norm<'_>, d: &DVector<f64>, lambdas: &DVector<f64>) -> f64 {
    match kind {
        Norm::L2 => d.norm_squared(),
        Norm::H10 => d.iter().zip(lambdas.iter()).map(|(c, l)| l * c * c).sum(),
        Norm::H20 => d.iter().zip(lambdas.iter()).map(|(c, l)| l * l * c * c).sum(),
        Norm::HMinus1 => d.iter().zip(lambdas.iter()).map(|(c, l)| c * c / l).sum(),
        Norm::WeightedL2 { .. } => unreachable!("weighted norm has no spectral form"),
    }
}

fn weighted_l2(weight: &GridFunction, u: &GridFunction, interval: &Interval) -> Result<f64> {
    weight.check_len(interval)?;
    u.check_len(interval)?;
    check_nonnegative(weight, interval, |node, x, value| WaveError::Nonnegativity { node, x, value })?;
    let integrand: Vec<f64> = weight
        .values()
        .iter()
        .zip(u.values())
        .map(|(v, u)| v.max(0.0) * u * u)
        .collect();
    Ok(interval.integrate(&integrand).max(0.0).sqrt())
}

/// Tolerance below zero accepted for quantities that must be nonnegative.
pub const NONNEGATIVE_TOL: f64 = 1e-12;

pub(crate) fn check_nonnegative(
    v: &GridFunction,
    interval: &Interval,
    err: impl Fn(usize, f64, f64) -> WaveError,
) -> Result<()> {
    match v
        .values()
        .iter()
        .enumerate()
        .find(|(_, &val)| val < -NONNEGATIVE_TOL || val.is_nan())
    {
        Some((node, &value)) => Err(err(node, interval.nodes()[node], value)),
        None => Ok(()),
    }
}
