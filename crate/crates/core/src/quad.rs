//! Composite Gauss–Legendre quadrature with uniform panel doubling.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const DEFAULT_ORDER: usize = 20;

/// Integrand evaluations allowed before giving up.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// `|I_r − I_{r−1}|` between the last two refinement levels.
    pub abs_error_estimate: f64,
    /// Integrand evaluations over all refinement levels.
    pub evaluations: usize,
    pub converged: bool,
}

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, started from the Tricomi
    /// approximation.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
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
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// `(∫_a^b f, ∫_a^b |f|)`.
    fn integrate_with_l1<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> (f64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (mut acc, mut l1) = (0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = w * f(mid + half * x);
            acc += v;
            l1 += v.abs();
        }
        (acc * half, l1 * half.abs())
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
}

/// Breakpoints `0, s, 2s, 4s, …` up to `end`, with `end` itself last.
///
/// Suited to integrands whose nearest complex singularity sits a distance
/// of order `s` from the origin: each panel stays within a few of its own
/// widths from the singularity.
pub fn geometric_breaks(scale: f64, end: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut x = scale.min(end);
    while x < end {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(end);
    breaks
}

/// Composite rule over the panels given by `breaks`, splitting every panel
/// into `2^r` equal pieces for `r = 0, 1, …` until two successive levels
/// differ by at most `tol`.
///
/// Fails with [`Error::NonConvergence`] once `budget` evaluations are spent,
/// or earlier if the change stalls at the rounding floor `ε·∫|f|` while
/// still above `tol`.
pub fn integrate_refining<F>(f: F, breaks: &[f64], tol: f64, budget: usize) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    assert!(breaks.len() >= 2, "need at least one panel");
    let rule = default_rule();
    let mut evaluations = 0;
    let mut previous: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    let mut pieces = 1usize;
    loop {
        let cost = (breaks.len() - 1) * pieces * rule.order();
        if evaluations + cost > budget {
            return Err(Error::NonConvergence {
                evaluations,
                last_change,
            });
        }
        let (mut value, mut l1) = (0.0, 0.0);
        for w in breaks.windows(2) {
            let h = (w[1] - w[0]) / pieces as f64;
            for j in 0..pieces {
                let a = w[0] + j as f64 * h;
                let b = if j + 1 == pieces { w[1] } else { a + h };
                let (v, m) = rule.integrate_with_l1(a, b, &f);
                value += v;
                l1 += m;
            }
        }
        evaluations += cost;
        if let Some(prev) = previous {
            last_change = (value - prev).abs();
            if last_change <= tol {
                return Ok(QuadratureResult {
                    value,
                    abs_error_estimate: last_change,
                    evaluations,
                    converged: true,
                });
            }
            if last_change <= 16.0 * f64::EPSILON * l1 {
                return Err(Error::NonConvergence {
                    evaluations,
                    last_change,
                });
            }
        }
        previous = Some(value);
        pieces *= 2;
    }
}
