//! Seeded random smooth problems for estimate checks and oracle agreement.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::functions::{Forcing, Profile, TimeFn};

/// Coefficients of one random problem on `(0, L)`:
///
/// * `V = a0 + sum_j a_j cos(j pi x / L)` with `sum |a_j| <= a0 <= 2.5`,
///   so `0 <= V <= 5`;
/// * `u0`, `u1` are low sine modes plus a multiple of `x (L - x) / L^2`;
/// * `f` is a sum of `A sin(omega t + phase)` times a sine mode or the bubble.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothCase {
    pub seed: u64,
    pub index: usize,
    pub length: f64,
    pub potential: Vec<f64>,
    pub u0_modes: Vec<f64>,
    pub u0_bubble: f64,
    pub u1_modes: Vec<f64>,
    pub u1_bubble: f64,
    /// `(amplitude, omega, phase, spatial mode)`; mode 0 is the bubble.
    pub source: Vec<(f64, f64, f64, usize)>,
}

fn sine_sum(coeffs: Vec<f64>, bubble: f64, length: f64) -> Profile {
    Profile::new(move |x| {
        let modes: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * ((k + 1) as f64 * PI * x / length).sin())
            .sum();
        modes + bubble * x * (length - x) / (length * length)
    })
}

impl SmoothCase {
    pub fn potential(&self) -> Profile {
        let a = self.potential.clone();
        let l = self.length;
        Profile::new(move |x| {
            a[0] + a[1..]
                .iter()
                .enumerate()
                .map(|(j, &c)| c * ((j + 1) as f64 * PI * x / l).cos())
                .sum::<f64>()
        })
    }

    pub fn u0(&self) -> Profile {
        sine_sum(self.u0_modes.clone(), self.u0_bubble, self.length)
    }

    pub fn u1(&self) -> Profile {
        sine_sum(self.u1_modes.clone(), self.u1_bubble, self.length)
    }

    pub fn source(&self) -> Forcing {
        let l = self.length;
        let terms = self.source.iter().map(|&(amplitude, omega, phase, mode)| {
            let space = if mode == 0 {
                Profile::new(move |x| x * (l - x) / (l * l))
            } else {
                Profile::new(move |x| (mode as f64 * PI * x / l).sin())
            };
            (
                TimeFn::Sin {
                    amplitude,
                    omega,
                    phase,
                },
                space,
            )
        });
        terms.fold(Forcing::zero(), |f, (t, s)| f.with_term(t, s))
    }

    /// The same case with the potential replaced by a constant.
    pub fn with_constant_potential(mut self, c: f64) -> Self {
        self.potential = vec![c];
        self
    }
}

/// `count` cases on `(0, pi)` drawn from a ChaCha stream seeded with `seed`.
pub fn smooth_corpus(seed: u64, count: usize) -> Vec<SmoothCase> {
    smooth_corpus_on(PI, seed, count)
}

/// Like [`smooth_corpus`] on `(0, length)`.
pub fn smooth_corpus_on(length: f64, seed: u64, count: usize) -> Vec<SmoothCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|index| {
            let a0: f64 = rng.random_range(0.0..2.5);
            let raw: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let total: f64 = raw.iter().map(|v: &f64| v.abs()).sum::<f64>().max(1e-12);
            let share: f64 = rng.random_range(0.0..1.0);
            let mut potential = vec![a0];
            potential.extend(raw.iter().map(|v| v / total * share * a0));
            let mut modes = |n: usize| -> Vec<f64> {
                (0..n)
                    .map(|k| rng.random_range(-1.0..1.0) / ((k + 1) as f64).powi(2))
                    .collect()
            };
            let u0_modes = modes(4);
            let u1_modes = modes(4);
            let u0_bubble = rng.random_range(-1.0..1.0);
            let u1_bubble = rng.random_range(-1.0..1.0);
            let source = (0..2)
                .map(|_| {
                    (
                        rng.random_range(-1.0..1.0),
                        rng.random_range(0.5..3.0),
                        rng.random_range(0.0..2.0 * PI),
                        rng.random_range(0..4usize),
                    )
                })
                .collect();
            SmoothCase {
                seed,
                index,
                length,
                potential,
                u0_modes,
                u0_bubble,
                u1_modes,
                u1_bubble,
                source,
            }
        })
        .collect()
}
