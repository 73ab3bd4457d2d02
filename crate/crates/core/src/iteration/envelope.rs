use super::{closed_form, IterationConstants};
use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::logvalue::LogValue;

/// Lower bounds `(D_j (R+t)^{-α_j} (t-L_j)^{β_j}, Q_j (R+t)^{-a_j} (t-L_j)^{b_j})`
/// for odd `j`.
pub fn envelope(
    t: f64,
    j: u32,
    params: &ProblemParams,
    c: &IterationConstants,
) -> Result<(LogValue, LogValue)> {
    let row = closed_form(j, params, c)?;
    if !(t > row.l_j) {
        return Err(Error::InvalidParameter(format!(
            "envelope needs t > L_{j} = {}, got t = {t}",
            row.l_j
        )));
    }
    let ln_rt = (params.r + t).ln();
    let ln_gap = (t - row.l_j).ln();
    let f1 = row.log_d.scale_exp(-row.alpha * ln_rt + row.beta * ln_gap);
    let f2 = row.log_q.scale_exp(-row.a * ln_rt + row.b * ln_gap);
    Ok((f1, f2))
}

/// `(pq)^{(j-1)/2} ln(E₂ ε^p)`, valid as a lower bound of `ln D_j` for odd `j ≥ j₀`.
pub fn log_d_lower_bound(j: u32, params: &ProblemParams, c: &IterationConstants) -> f64 {
    let m = (j as f64 - 1.0) / 2.0;
    params.pq().powf(m) * (c.log_e2.ln() + params.p * params.eps.ln())
}

/// `(pq)^{(j-1)/2} ln(E₃ ε^q)`, valid as a lower bound of `ln Q_j` for odd `j ≥ j₁`.
pub fn log_q_lower_bound(j: u32, params: &ProblemParams, c: &IterationConstants) -> f64 {
    let m = (j as f64 - 1.0) / 2.0;
    params.pq().powf(m) * (c.log_e3.ln() + params.q * params.eps.ln())
}

/// `max{R, 2L, E₄ ε^{-1/T₁}}`, past which the `j → ∞` envelope for `F₁` diverges.
pub fn predicted_blowup_time(params: &ProblemParams, c: &IterationConstants) -> Result<f64> {
    let eps0 = c.log_eps0.exp();
    if params.eps > eps0 {
        return Err(Error::EpsilonTooLarge {
            eps: params.eps,
            eps0,
        });
    }
    let scaled = (c.log_e4.ln() - params.eps.ln() / c.t1).exp();
    Ok(params.r.max(2.0 * c.l).max(scaled))
}
