//! Mollifier families, regularization of singular data and log-log
//! classification of nets as moderate or negligible.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WaveError};
use crate::functions::Profile;
use crate::quadrature::{CompositeRule, GaussLegendre};
use crate::spectral::{GridFunction, Interval};

/// Kink locations of every shape on `[-1, 1]`; panels of the kernel rule
/// break here so the Gauss rule sees only smooth pieces.
const KERNEL_BREAKS: [f64; 7] = [-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
const KERNEL_SPLIT: usize = 4;
const KERNEL_ORDER: usize = 12;

fn kernel_breaks() -> Vec<f64> {
    let mut out = vec![KERNEL_BREAKS[0]];
    for w in KERNEL_BREAKS.windows(2) {
        out.extend((1..=KERNEL_SPLIT).map(|j| w[0] + (w[1] - w[0]) * j as f64 / KERNEL_SPLIT as f64));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierShape {
    /// `exp(-1 / (1 - s^2))`, smooth with compact support.
    StandardBump,
    /// `1 - |s|`
    Triangle,
    /// Quadratic B-spline with uniform knots at `-1, -1/3, 1/3, 1`.
    QuadraticSpline,
}

/// Unit-mass, even, nonnegative kernel supported in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    shape: MollifierShape,
    normalization: f64,
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let rule = GaussLegendre::new(20);
        let panels = 256;
        (0..panels)
            .map(|i| {
                let a = -1.0 + 2.0 * i as f64 / panels as f64;
                let b = -1.0 + 2.0 * (i + 1) as f64 / panels as f64;
                rule.integrate(a, b, raw_bump)
            })
            .sum()
    })
}

fn raw_bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

impl Mollifier {
    pub fn new(shape: MollifierShape) -> Self {
        let normalization = match shape {
            MollifierShape::StandardBump => 1.0 / bump_mass(),
            MollifierShape::Triangle => 1.0,
            // B-spline of unit knot spacing has unit mass; rescaled by 3/2
            MollifierShape::QuadraticSpline => 1.5,
        };
        Self { shape, normalization }
    }

    pub fn shape(&self) -> MollifierShape {
        self.shape
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Reference kernel `psi(s)`.
    pub fn reference(&self, s: f64) -> f64 {
        let a = s.abs();
        if a >= 1.0 {
            return 0.0;
        }
        match self.shape {
            MollifierShape::StandardBump => self.normalization * raw_bump(s),
            MollifierShape::Triangle => self.normalization * (1.0 - a),
            MollifierShape::QuadraticSpline => {
                let y = 1.5 * a;
                let b = if y <= 0.5 { 0.75 - y * y } else { 0.5 * (1.5 - y).powi(2) };
                self.normalization * b
            }
        }
    }

    /// `psi((x - x0) / eps) / eps`
    pub fn eval(&self, eps: f64, x0: f64, x: f64) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.scaled(eps, x0, x))
    }

    #[inline]
    fn scaled(&self, eps: f64, x0: f64, x: f64) -> f64 {
        self.reference((x - x0) / eps) / eps
    }
}

/// Free-function form of [`Mollifier::eval`].
pub fn mollifier_eval(psi: &Mollifier, eps: f64, x0: f64, x: f64) -> Result<f64> {
    psi.eval(eps, x0, x)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(WaveError::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// How a smooth datum is continued outside `(0, L)` before convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    /// Use the closed-form profile's own values outside the domain.
    #[default]
    Natural,
    /// Extend by zero; introduces an `O(eps)` boundary layer for data that do
    /// not vanish at the endpoints.
    Zero,
}

/// A datum that may be a smooth function, a weighted point mass, or a sum.
#[derive(Debug, Clone)]
pub enum DistributionSpec {
    Smooth(Profile),
    Dirac { location: f64, weight: f64 },
    Sum(Vec<DistributionSpec>),
}

impl DistributionSpec {
    pub fn zero() -> Self {
        DistributionSpec::Smooth(Profile::zero())
    }

    pub fn dirac(location: f64, weight: f64) -> Self {
        DistributionSpec::Dirac { location, weight }
    }

    pub fn is_singular(&self) -> bool {
        match self {
            DistributionSpec::Smooth(_) => false,
            DistributionSpec::Dirac { .. } => true,
            DistributionSpec::Sum(parts) => parts.iter().any(|p| p.is_singular()),
        }
    }

    /// Locations and weights of every point mass.
    pub fn diracs(&self) -> Vec<(f64, f64)> {
        match self {
            DistributionSpec::Smooth(_) => Vec::new(),
            DistributionSpec::Dirac { location, weight } => vec![(*location, *weight)],
            DistributionSpec::Sum(parts) => parts.iter().flat_map(|p| p.diracs()).collect(),
        }
    }

    /// The datum as a plain function; `None` when a point mass is present.
    pub fn as_profile(&self) -> Option<Profile> {
        match self {
            DistributionSpec::Smooth(p) => Some(p.clone()),
            DistributionSpec::Dirac { .. } => None,
            DistributionSpec::Sum(parts) => {
                let ps = parts.iter().map(|p| p.as_profile()).collect::<Option<Vec<_>>>()?;
                Some(Profile::sum(ps))
            }
        }
    }

    /// Checks locations (strictly inside, support clear of the endpoints).
    pub fn validate(&self, length: f64, eps: Option<f64>) -> Result<()> {
        for (x0, w) in self.diracs() {
            if !(x0 > 0.0 && x0 < length) || !w.is_finite() {
                return Err(WaveError::invalid(format!(
                    "point mass at {x0} (weight {w}) must lie strictly inside (0, {length})"
                )));
            }
            if let Some(eps) = eps {
                let (lo, hi) = (x0 - eps, x0 + eps);
                if lo <= 0.0 || hi >= length {
                    return Err(WaveError::BoundaryClipping {
                        location: x0,
                        lo,
                        hi,
                        length,
                    });
                }
            }
        }
        Ok(())
    }

    /// Pointwise representation of `spec * psi_eps`.
    pub fn regularized_profile(&self, psi: &Mollifier, eps: f64, length: f64, extension: Extension) -> Result<Profile> {
        check_eps(eps)?;
        self.validate(length, Some(eps))?;
        Ok(self.regularized_unchecked(psi, eps, length, extension))
    }

    fn regularized_unchecked(&self, psi: &Mollifier, eps: f64, length: f64, extension: Extension) -> Profile {
        match self {
            DistributionSpec::Dirac { location, weight } => {
                let (x0, w, psi) = (*location, *weight, *psi);
                if w == 0.0 {
                    return Profile::zero();
                }
                Profile::new(move |x| w * psi.scaled(eps, x0, x))
            }
            DistributionSpec::Smooth(f) => {
                let kernel = ConvolutionKernel::new(psi);
                let f = f.clone();
                match extension {
                    Extension::Natural => Profile::new(move |x| kernel.convolve(&f, x, eps)),
                    Extension::Zero => Profile::new(move |x| kernel.convolve_clipped(&f, x, eps, length)),
                }
            }
            DistributionSpec::Sum(parts) => Profile::sum(
                parts
                    .iter()
                    .map(|p| p.regularized_unchecked(psi, eps, length, extension))
                    .collect(),
            ),
        }
    }
}

/// Samples `spec * psi_eps` on the quadrature of `interval`. The interval
/// should already be refined around the point masses (see
/// [`Interval::refined`]).
pub fn regularize(spec: &DistributionSpec, psi: &Mollifier, eps: f64, interval: &Interval) -> Result<GridFunction> {
    let p = spec.regularized_profile(psi, eps, interval.length(), Extension::Natural)?;
    Ok(p.sample(interval))
}

/// Gauss rule for `int psi(s) g(s) ds` on `[-1, 1]`, split at the kernel kinks.
#[derive(Debug, Clone)]
struct ConvolutionKernel {
    psi: Mollifier,
    nodes: Vec<f64>,
    /// `w_i psi(s_i)` normalized so the discrete mass is exactly 1.
    weights: Vec<f64>,
}

impl ConvolutionKernel {
    fn new(psi: &Mollifier) -> Self {
        let rule = CompositeRule::new(kernel_breaks(), KERNEL_ORDER);
        let raw: Vec<f64> = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&s, &w)| w * psi.reference(s))
            .collect();
        let mass: f64 = raw.iter().sum();
        Self {
            psi: *psi,
            nodes: rule.nodes().to_vec(),
            weights: raw.into_iter().map(|w| w / mass).collect(),
        }
    }

    fn convolve(&self, f: &Profile, x: f64, eps: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f.eval(x - eps * s))
            .sum()
    }

    /// Convolution with the zero extension: integrate only over the part of
    /// the kernel support that maps inside `(0, L)`.
    fn convolve_clipped(&self, f: &Profile, x: f64, eps: f64, length: f64) -> f64 {
        let lo = ((x - length) / eps).max(-1.0);
        let hi = (x / eps).min(1.0);
        if lo >= hi {
            return 0.0;
        }
        if lo <= -1.0 && hi >= 1.0 {
            return self.convolve(f, x, eps);
        }
        let rule = GaussLegendre::new(KERNEL_ORDER);
        let mut cuts: Vec<f64> = KERNEL_BREAKS.iter().copied().filter(|&s| s > lo && s < hi).collect();
        cuts.insert(0, lo);
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| rule.integrate(w[0], w[1], |s| self.psi.reference(s) * f.eval(x - eps * s)))
            .sum()
    }
}

/// The default sweep grid `eps_j = 2^{-j}`, `j = 3..=10`.
pub fn default_eps_grid() -> Vec<f64> {
    geometric_eps_grid(3, 10)
}

pub fn geometric_eps_grid(first_exponent: i32, last_exponent: i32) -> Vec<f64> {
    (first_exponent..=last_exponent).map(|j| 2f64.powi(-j)).collect()
}

pub fn validate_eps_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.len() < 3 {
        return Err(WaveError::invalid("eps grid needs at least 3 points"));
    }
    if let Some(e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(WaveError::invalid(format!("eps grid values must lie in (0, 1], got {e}")));
    }
    if !eps_grid.windows(2).all(|w| w[1] < w[0]) {
        return Err(WaveError::invalid("eps grid must be strictly decreasing"));
    }
    Ok(())
}

/// Least-squares fit `log(norm) = logC - N log(eps)` over an eps grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub eps_grid: Vec<f64>,
    pub norm_values: Vec<f64>,
    /// Growth exponent: positive grows like `eps^-N`, negative decays.
    pub fitted_n: f64,
    pub fitted_log_c: f64,
    pub r_squared: f64,
    /// Every norm was exactly zero; the fit fields are zeroed.
    pub identically_zero: bool,
}

pub fn loglog_fit(eps_grid: &[f64], norm_values: &[f64]) -> Result<FitReport> {
    if eps_grid.len() != norm_values.len() {
        return Err(WaveError::LengthMismatch {
            expected: eps_grid.len(),
            found: norm_values.len(),
        });
    }
    if let Some(e) = eps_grid.iter().find(|&&e| e.is_nan() || e <= 0.0) {
        return Err(WaveError::invalid(format!("eps must be positive, got {e}")));
    }
    if eps_grid.len() < 3 {
        return Err(WaveError::invalid("log-log fit needs at least 3 points"));
    }
    if norm_values.iter().all(|&v| v == 0.0) {
        return Ok(FitReport {
            eps_grid: eps_grid.to_vec(),
            norm_values: norm_values.to_vec(),
            fitted_n: 0.0,
            fitted_log_c: 0.0,
            r_squared: 1.0,
            identically_zero: true,
        });
    }
    if let Some(v) = norm_values.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(WaveError::invalid(format!("norms must be positive and finite, got {v}")));
    }
    let xs: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = norm_values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(WaveError::invalid("eps grid has no spread"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * ys.iter().map(|y| y * y).sum::<f64>() {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitReport {
        eps_grid: eps_grid.to_vec(),
        norm_values: norm_values.to_vec(),
        fitted_n: -slope,
        fitted_log_c: intercept,
        r_squared,
        identically_zero: false,
    })
}

/// Thresholds that turn a [`FitReport`] into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitThresholds {
    /// Minimum R^2 for a power law to count as established.
    pub min_r_squared: f64,
    /// Exponents at or below this count as bounded.
    pub bounded_exponent: f64,
}

impl Default for FitThresholds {
    fn default() -> Self {
        Self {
            min_r_squared: 0.99,
            bounded_exponent: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum NetClass {
    /// Every member is exactly zero.
    IdenticallyZero,
    /// Decays like `eps^order` with `order > bounded_exponent`.
    Negligible { order: f64 },
    /// Norms stay bounded as eps shrinks.
    Bounded { exponent: f64 },
    /// Grows like `eps^-n` with a clean power-law fit.
    Moderate { n: f64 },
    /// Growth without a convincing power law.
    Unclassified { exponent: f64, r_squared: f64 },
}

impl FitReport {
    pub fn classify(&self, th: &FitThresholds) -> NetClass {
        if self.identically_zero {
            NetClass::IdenticallyZero
        } else if self.fitted_n < -th.bounded_exponent && self.r_squared >= th.min_r_squared {
            NetClass::Negligible { order: -self.fitted_n }
        } else if self.fitted_n <= th.bounded_exponent {
            NetClass::Bounded { exponent: self.fitted_n }
        } else if self.r_squared >= th.min_r_squared {
            NetClass::Moderate { n: self.fitted_n }
        } else {
            NetClass::Unclassified {
                exponent: self.fitted_n,
                r_squared: self.r_squared,
            }
        }
    }
}
