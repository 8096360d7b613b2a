//! Gauss-Legendre rules and composite quadrature on panel partitions.

use std::f64::consts::PI;

/// An `n`-point Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes come out in ascending order. Roots are found by Newton iteration on
    /// the three-term Legendre recurrence, starting from the Chebyshev-like guess.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(mid + half * s))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Composite Gauss-Legendre rule over an arbitrary sorted list of breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    breakpoints: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(breakpoints: Vec<f64>, order: usize) -> Self {
        debug_assert!(breakpoints.windows(2).all(|w| w[0] < w[1]));
        let rule = GaussLegendre::new(order);
        let panels = breakpoints.len().saturating_sub(1);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for w in breakpoints.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let half = 0.5 * (w[1] - w[0]);
            for (&s, &ws) in rule.nodes().iter().zip(rule.weights()) {
                nodes.push(mid + half * s);
                weights.push(ws * half);
            }
        }
        Self {
            breakpoints,
            nodes,
            weights,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn panel_count(&self) -> usize {
        self.breakpoints.len() - 1
    }
}

/// Trapezoid rule on a uniformly spaced sample series.
pub fn trapezoid_uniform(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// Running trapezoid integral; `out[n]` is the integral over the first `n` steps.
pub fn cumulative_trapezoid(values: &[f64], times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for i in 0..values.len() {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn low_order_rules_match_closed_form() {
        let r = GaussLegendre::new(2);
        let x = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.nodes()[0], -x, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes()[1], x, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);

        let r = GaussLegendre::new(3);
        assert_abs_diff_eq!(r.nodes()[1], 0.0);
        assert_abs_diff_eq!(r.nodes()[2], 0.6f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[0], 5.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=20 {
            let r = GaussLegendre::new(n);
            let sum: f64 = r.weights().iter().sum();
            assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-14);
            let deg = 2 * n - 1;
            for p in 0..=deg {
                let got = r.integrate(0.0, 1.0, |x| x.powi(p as i32));
                assert_abs_diff_eq!(got, 1.0 / (p as f64 + 1.0), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn composite_weights_sum_to_length() {
        let bp: Vec<f64> = (0..=64).map(|i| i as f64 * PI / 64.0).collect();
        let c = CompositeRule::new(bp, 8);
        let s: f64 = c.weights().iter().sum();
        assert!(((s - PI) / PI).abs() <= 1e-14);
        assert_eq!(c.nodes().len(), 512);
        assert!(c.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trapezoid_helpers() {
        assert_eq!(trapezoid_uniform(&[], 0.1), 0.0);
        assert_eq!(trapezoid_uniform(&[3.0], 0.1), 0.0);
        assert_abs_diff_eq!(trapezoid_uniform(&[0.0, 1.0, 2.0], 0.5), 1.0);
        let c = cumulative_trapezoid(&[1.0, 1.0, 1.0], &[0.0, 0.5, 1.0]);
        assert_eq!(c, vec![0.0, 0.5, 1.0]);
    }
}
