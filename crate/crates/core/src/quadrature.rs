use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Trapezoid,
    GaussLegendre,
}

/// Composite quadrature with doubling refinement.
///
/// For `Trapezoid`, `nodes` is the initial number of subintervals. For
/// `GaussLegendre`, the interval is split into `nodes / GL_ORDER` panels, each
/// carrying a `GL_ORDER`-point rule, so both rules start from the same number
/// of integrand evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub rule: Rule,
    pub refinement_tol: f64,
}

pub const GL_ORDER: usize = 8;

/// Refinement stops with an error after this many doublings.
pub const MAX_DOUBLINGS: u32 = 14;

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 64,
            rule: Rule::GaussLegendre,
            refinement_tol: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs at least 8 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.refinement_tol > 0.0 && self.refinement_tol <= 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "refinement_tol must lie in (0, 1e-3], got {}",
                self.refinement_tol
            )));
        }
        Ok(())
    }

    /// One composite evaluation at a given resolution level (0 = initial).
    pub fn composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, level: u32) -> f64 {
        let n = self.nodes << level;
        match self.rule {
            Rule::Trapezoid => trapezoid(f, a, b, n),
            Rule::GaussLegendre => {
                let gl = GaussLegendre::new(GL_ORDER);
                gl.composite(f, a, b, (n / GL_ORDER).max(1))
            }
        }
    }

    /// Doubles the resolution until two successive estimates agree to
    /// `refinement_tol` relatively. Returns the finer estimate.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.validate()?;
        let mut prev = self.composite(&f, a, b, 0);
        for level in 1..=MAX_DOUBLINGS {
            let cur = self.composite(&f, a, b, level);
            let scale = cur.abs().max(prev.abs());
            if (cur - prev).abs() <= self.refinement_tol * scale || scale == 0.0 {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::NonConvergence(format!(
            "{:?} rule on [{a}, {b}] still changing after {} doublings of {} nodes",
            self.rule, MAX_DOUBLINGS, self.nodes
        )))
    }
}

pub fn trapezoid<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..intervals {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_m` from the Chebyshev-like initial guesses.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    pub fn composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.integrate(f, lo, lo + h)
            })
            .sum()
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
