use super::{iterate, Exponents, IterationConstants, IterationState};
use crate::error::{Error, Result};
use crate::exponents::ProblemParams;

/// Shift constants `(K_α, K_a)` of the odd-index closed forms for `α_j` and `a_j`.
pub(crate) fn shift_constants(params: &ProblemParams) -> (f64, f64) {
    let (p, q, n) = (params.p, params.q, params.n as f64);
    let pq = p * q;
    let k_alpha = ((n + 1.0) * pq - 2.0 * p - (n - 1.0)) / (2.0 * (pq - 1.0));
    let k_a = ((n - 1.0) * pq + 2.0 * q - (n + 1.0)) / (2.0 * (pq - 1.0));
    (k_alpha, k_a)
}

/// Exponents at index `j` without recursion. Both parities are supported.
///
/// Written as `x₁ X + K (X - 1)` with `X - 1` from `expm1`, which is the
/// same quantity as `(x₁ + K) X - K` but keeps full relative accuracy when
/// `pq` is close to 1.
pub fn closed_form_exponents(j: u32, params: &ProblemParams) -> Result<Exponents> {
    if j == 0 {
        return Err(Error::InvalidParameter("index j starts at 1".into()));
    }
    params.validate()?;
    let (p, q, n) = (params.p, params.q, params.n as f64);
    let pq = p * q;
    let lpq = pq.ln();
    let first = Exponents::first(params);
    let (k_alpha, k_a) = shift_constants(params);
    let odd = |m: u32| {
        let mf = m as f64;
        let x = (mf * lpq).exp();
        let xm1 = (mf * lpq).exp_m1();
        Exponents {
            alpha: first.alpha * x + k_alpha * xm1,
            a: first.a * x + k_a * xm1,
            beta: first.beta * x + xm1 / (pq - 1.0),
            b: first.b * x + q * xm1 / (pq - 1.0),
        }
    };
    if j % 2 == 1 {
        return Ok(odd((j - 1) / 2));
    }
    let prev = odd((j - 2) / 2);
    let half = j as f64 / 2.0;
    Ok(Exponents {
        alpha: (n - 1.0) * (p - 1.0) / 2.0 + p * prev.a,
        a: (n + 1.0) * (q - 1.0) / 2.0 + q * prev.alpha,
        beta: first.b / q * (half * lpq).exp() + (half * lpq).exp_m1() / (pq - 1.0),
        b: first.beta / p * (half * lpq).exp() + q * ((half - 1.0) * lpq).exp_m1() / (pq - 1.0),
    })
}

/// Row `j` (odd) with closed-form exponents. `D_j`, `Q_j` and `L_j` have no
/// closed form and come from the recursion.
pub fn closed_form(
    j: u32,
    params: &ProblemParams,
    c: &IterationConstants,
) -> Result<IterationState> {
    if j.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "closed form rows are defined for odd j, got {j}"
        )));
    }
    let e = closed_form_exponents(j, params)?;
    let row = *iterate(params, c, j)?.last().expect("j >= 1");
    Ok(IterationState {
        alpha: e.alpha,
        a: e.a,
        beta: e.beta,
        b: e.b,
        ..row
    })
}

/// `∑_{k=1}^{(j-1)/2} (j+2-2k)(pq)^{k-1}` by direct summation, `j` odd.
pub fn weighted_geometric_sum(j: u32, pq: f64) -> f64 {
    (1..=(j - 1) / 2)
        .map(|k| (j as f64 + 2.0 - 2.0 * k as f64) * pq.powi(k as i32 - 1))
        .sum()
}

/// Closed form of [`weighted_geometric_sum`].
pub fn weighted_geometric_sum_closed(j: u32, pq: f64) -> f64 {
    let jf = j as f64;
    let m = (jf - 1.0) / 2.0;
    let r = 2.0 * pq / (pq - 1.0) * (1.5 * pq.powf(m) - 0.5 * pq.powf(m - 1.0) - 1.0);
    (r - jf) / (pq - 1.0)
}
