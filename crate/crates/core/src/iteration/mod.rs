//! The slicing iteration: lower bounds
//!
//! ```text
//! F₁(t) ≥ D_j (R+t)^{-α_j} (t - L_j)^{β_j},
//! F₂(t) ≥ Q_j (R+t)^{-a_j} (t - L_j)^{b_j},   t ≥ L_j,
//! ```
//!
//! generated from first bounds by a coupled recursion, together with their
//! closed forms, the constants ledger and the envelope blow-up time.
//!
//! `D_j` and `Q_j` grow (or decay) doubly exponentially in `j` and are only
//! ever held as [`LogValue`]s.

mod closed_form;
mod envelope;
mod ledger;

pub use closed_form::{
    closed_form, closed_form_exponents, weighted_geometric_sum, weighted_geometric_sum_closed,
};
pub use envelope::{envelope, log_d_lower_bound, log_q_lower_bound, predicted_blowup_time};
pub use ledger::{constants_ledger, InitialDataIntegrals, IterationConstants};

use crate::error::{Error, Result};
use crate::exponents::{blowup_condition, ProblemParams};
use crate::logvalue::LogValue;
use serde::Serialize;

/// `3 + √5`, the sum of the two decay rates of the `F₁` ODE.
pub fn three_plus_sqrt5() -> f64 {
    3.0 + 5f64.sqrt()
}

/// `ℓ_k = 1 + (4/(3+√5)) (pq)^{-(k-1)/2}`.
pub fn ell(k: u32, p: f64, q: f64) -> f64 {
    debug_assert!(k >= 1);
    1.0 + 4.0 / three_plus_sqrt5() * (p * q).powf(-0.5 * (k as f64 - 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SlicingProduct {
    /// `L_1, …, L_{j_max}`.
    pub partials: Vec<f64>,
    /// `L = ∏ ℓ_k`.
    pub limit: f64,
    /// Index at which the relative increment of the partial product fell below 1e-14.
    pub converged_at: u32,
}

pub const SLICING_TAIL_TOL: f64 = 1e-14;

pub fn slicing_product(j_max: u32, p: f64, q: f64) -> Result<SlicingProduct> {
    if !(p > 1.0 && q > 1.0) {
        return Err(Error::InvalidParameter("p and q must exceed 1".into()));
    }
    let mut partials = Vec::with_capacity(j_max as usize);
    let mut prod = 1.0;
    let mut k = 1u32;
    let mut converged_at = 0;
    loop {
        let l = ell(k, p, q);
        prod *= l;
        if k <= j_max {
            partials.push(prod);
        }
        if converged_at == 0 && l - 1.0 < SLICING_TAIL_TOL {
            converged_at = k;
        }
        if converged_at != 0 && k >= j_max {
            break;
        }
        k += 1;
    }
    Ok(SlicingProduct {
        partials,
        limit: prod,
        converged_at,
    })
}

/// The four exponent sequences at one index. Pure algebra: defined for any
/// `p, q > 1` and `n`, inside the blow-up region or not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub alpha: f64,
    pub a: f64,
    pub beta: f64,
    pub b: f64,
}

impl Exponents {
    pub fn first(params: &ProblemParams) -> Self {
        let (p, q, n) = (params.p, params.q, params.n as f64);
        Exponents {
            alpha: (n - 1.0) * (p - 1.0) / 2.0,
            a: (n + 1.0) * (q - 1.0) / 2.0,
            beta: 1.0,
            b: 0.0,
        }
    }

    pub fn step(&self, params: &ProblemParams) -> Self {
        let (p, q, n) = (params.p, params.q, params.n as f64);
        Exponents {
            alpha: (n - 1.0) * (p - 1.0) / 2.0 + self.a * p,
            a: (n + 1.0) * (q - 1.0) / 2.0 + self.alpha * q,
            beta: 1.0 + self.b * p,
            b: self.beta * q,
        }
    }

    /// Exponents `1..=j_max` by recursion.
    pub fn sequence(params: &ProblemParams, j_max: u32) -> Vec<Exponents> {
        let mut out = Vec::with_capacity(j_max as usize);
        let mut e = Exponents::first(params);
        for _ in 0..j_max {
            out.push(e);
            e = e.step(params);
        }
        out
    }
}

/// One row of the iteration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationState {
    pub j: u32,
    pub alpha: f64,
    pub a: f64,
    pub beta: f64,
    pub b: f64,
    pub log_d: LogValue,
    pub log_q: LogValue,
    pub l_j: f64,
}

fn ensure_in_region(params: &ProblemParams) -> Result<()> {
    params.validate()?;
    if !blowup_condition(params)? {
        return Err(Error::RegionViolation(format!(
            "pq = {} is not below the Glassey exponent for n = {}",
            params.pq(),
            params.n
        )));
    }
    Ok(())
}

impl IterationState {
    pub fn exponents(&self) -> Exponents {
        Exponents {
            alpha: self.alpha,
            a: self.a,
            beta: self.beta,
            b: self.b,
        }
    }
}

pub fn first_terms(params: &ProblemParams, c: &IterationConstants) -> Result<IterationState> {
    ensure_in_region(params)?;
    let e = Exponents::first(params);
    Ok(IterationState {
        j: 1,
        alpha: e.alpha,
        a: e.a,
        beta: e.beta,
        b: e.b,
        log_d: c.log_d1,
        log_q: c.log_q1,
        l_j: ell(1, params.p, params.q),
    })
}

/// Multiplicative prefactor of `Q_j^p` in `D_{j+1}`, in log form.
pub(crate) fn ln_d_prefactor(j: u32, b_j: f64, params: &ProblemParams, c1: f64) -> f64 {
    let (p, q) = (params.p, params.q);
    let pq = p * q;
    let k = b_j * p + 1.0;
    4f64.ln() + (1.0 - p) * c1.ln() + (pq.sqrt() - 1.0).ln()
        - j as f64 * pq.ln()
        - three_plus_sqrt5().ln()
        - k.ln()
        - k * ell(j + 1, p, q).ln()
}

pub fn recursion_step(
    state: &IterationState,
    params: &ProblemParams,
    c: &IterationConstants,
) -> IterationState {
    let (p, q) = (params.p, params.q);
    let j = state.j;
    let log_d = LogValue::from_ln(ln_d_prefactor(j, state.b, params, c.c1)) * state.log_q.powf(p);
    let log_q = LogValue::from_f64(c.c4) * state.log_d.powf(q);
    let e = state.exponents().step(params);
    IterationState {
        j: j + 1,
        alpha: e.alpha,
        a: e.a,
        beta: e.beta,
        b: e.b,
        log_d,
        log_q,
        l_j: state.l_j * ell(j + 1, p, q),
    }
}

/// Rows `1..=j_max` generated by the recursion.
pub fn iterate(
    params: &ProblemParams,
    c: &IterationConstants,
    j_max: u32,
) -> Result<Vec<IterationState>> {
    let mut rows = Vec::with_capacity(j_max as usize);
    let mut state = first_terms(params, c)?;
    rows.push(state);
    for _ in 1..j_max {
        state = recursion_step(&state, params, c);
        rows.push(state);
    }
    Ok(rows)
}
