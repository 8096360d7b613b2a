//! Closed-form data: spatial profiles, time functions and separable sources.

use std::fmt;
use std::sync::Arc;

use crate::spectral::{GridFunction, Interval};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of position, evaluable anywhere on the real line.
#[derive(Clone)]
pub struct Profile(ScalarFn);

impl Profile {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }

    pub fn sample(&self, interval: &Interval) -> GridFunction {
        GridFunction::new(interval.nodes().iter().map(|&x| self.eval(x)).collect())
    }

    /// Pointwise product with another profile.
    pub fn times(&self, other: &Profile) -> Profile {
        let (a, b) = (self.clone(), other.clone());
        Profile::new(move |x| a.eval(x) * b.eval(x))
    }

    pub fn scaled(&self, c: f64) -> Profile {
        let a = self.clone();
        Profile::new(move |x| c * a.eval(x))
    }

    pub fn sum(parts: Vec<Profile>) -> Profile {
        Profile::new(move |x| parts.iter().map(|p| p.eval(x)).sum())
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Profile(..)")
    }
}

/// User-supplied time function with optional first and second derivatives.
#[derive(Clone)]
pub struct CustomTimeFn {
    pub value: ScalarFn,
    pub first: Option<ScalarFn>,
    pub second: Option<ScalarFn>,
}

impl fmt::Debug for CustomTimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomTimeFn")
            .field("first", &self.first.is_some())
            .field("second", &self.second.is_some())
            .finish()
    }
}

/// Scalar function of time from a small closed-form catalog.
#[derive(Clone, Debug, Default)]
pub enum TimeFn {
    #[default]
    Zero,
    Const(f64),
    /// `amplitude * sin(omega * t + phase)`
    Sin {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// Coefficients in increasing degree.
    Poly(Vec<f64>),
    Custom(CustomTimeFn),
}

impl TimeFn {
    pub fn sin(omega: f64) -> Self {
        TimeFn::Sin {
            amplitude: 1.0,
            omega,
            phase: 0.0,
        }
    }

    pub fn cos(omega: f64) -> Self {
        TimeFn::Sin {
            amplitude: 1.0,
            omega,
            phase: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TimeFn::Custom(CustomTimeFn {
            value: Arc::new(f),
            first: None,
            second: None,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeFn::Zero => 0.0,
            TimeFn::Const(c) => *c,
            TimeFn::Sin {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
            TimeFn::Poly(c) => c.iter().rev().fold(0.0, |acc, &a| acc * t + a),
            TimeFn::Custom(c) => (c.value)(t),
        }
    }

    /// The derivative as another catalog function, when it is known.
    pub fn derivative(&self) -> Option<TimeFn> {
        Some(match self {
            TimeFn::Zero | TimeFn::Const(_) => TimeFn::Zero,
            TimeFn::Sin {
                amplitude,
                omega,
                phase,
            } => TimeFn::Sin {
                amplitude: amplitude * omega,
                omega: *omega,
                phase: phase + std::f64::consts::FRAC_PI_2,
            },
            TimeFn::Poly(c) => {
                if c.len() <= 1 {
                    TimeFn::Zero
                } else {
                    TimeFn::Poly(
                        c.iter()
                            .enumerate()
                            .skip(1)
                            .map(|(k, &a)| k as f64 * a)
                            .collect(),
                    )
                }
            }
            TimeFn::Custom(c) => TimeFn::Custom(CustomTimeFn {
                value: c.first.clone()?,
                first: c.second.clone(),
                second: None,
            }),
        })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TimeFn::Zero => true,
            TimeFn::Const(c) => *c == 0.0,
            TimeFn::Sin { amplitude, .. } => *amplitude == 0.0,
            TimeFn::Poly(c) => c.iter().all(|&a| a == 0.0),
            TimeFn::Custom(_) => false,
        }
    }
}

/// One separable piece `time(t) * space(x)` of a source term.
#[derive(Clone, Debug)]
pub struct ForcingTerm {
    pub time: TimeFn,
    pub space: Profile,
}

/// Space-time source `f(t, x) = sum_i a_i(t) p_i(x)`.
#[derive(Clone, Debug, Default)]
pub struct Forcing {
    terms: Vec<ForcingTerm>,
}

impl Forcing {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn separable(time: TimeFn, space: Profile) -> Self {
        Self {
            terms: vec![ForcingTerm { time, space }],
        }
    }

    pub fn from_terms(terms: Vec<ForcingTerm>) -> Self {
        Self { terms }
    }

    pub fn with_term(mut self, time: TimeFn, space: Profile) -> Self {
        self.terms.push(ForcingTerm { time, space });
        self
    }

    pub fn terms(&self) -> &[ForcingTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.time.is_zero())
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.time.value(t) * term.space.eval(x))
            .sum()
    }

    /// Samples `f(t, .)` at the quadrature nodes.
    pub fn sample(&self, t: f64, interval: &Interval) -> GridFunction {
        let mut out = vec![0.0; interval.node_count()];
        for term in &self.terms {
            let a = term.time.value(t);
            if a == 0.0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(interval.nodes()) {
                *o += a * term.space.eval(x);
            }
        }
        GridFunction::new(out)
    }

    /// `d/dt f`, available when every time factor has a known derivative.
    pub fn time_derivative(&self) -> Option<Forcing> {
        let terms = self
            .terms
            .iter()
            .map(|term| {
                term.time.derivative().map(|time| ForcingTerm {
                    time,
                    space: term.space.clone(),
                })
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Forcing { terms })
    }

    pub fn plus(mut self, other: Forcing) -> Forcing {
        self.terms.extend(other.terms);
        self
    }
}
