use super::closed_form::shift_constants;
use super::{ell, ensure_in_region, slicing_product, three_plus_sqrt5, Exponents};
use crate::error::{Error, Result};
use crate::exponents::{t1_t2, ProblemParams};
use crate::logvalue::LogValue;
use serde::{Deserialize, Serialize};

/// `∫ f Φ dx` for the four initial-data components (unscaled by ε).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataIntegrals {
    pub u0_phi: f64,
    pub u1_phi: f64,
    pub v0_phi: f64,
    pub v1_phi: f64,
}

/// Below this a data integral counts as zero.
pub const DEGENERATE_DATA_TOL: f64 = 1e-12;

/// Index range scanned for the direct minimum of `1/ℓ_j^{β_j}`.
pub const M_DIRECT_J_MAX: u32 = 200;

#[derive(Debug, Clone, Serialize)]
pub struct IterationConstants {
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub log_d1: LogValue,
    pub log_q1: LogValue,
    pub b0: f64,
    pub b1: f64,
    /// `min(m_limit, m_direct)`.
    pub m: f64,
    pub m_limit: f64,
    pub m_direct: f64,
    pub log_e0: LogValue,
    pub log_e1: LogValue,
    pub log_e2: LogValue,
    pub log_e3: LogValue,
    pub log_e4: LogValue,
    /// Only present when `T₂ > 0`.
    pub log_e5: Option<LogValue>,
    pub j0: i64,
    pub j1: i64,
    pub l: f64,
    pub t1: f64,
    pub t2: f64,
    pub log_eps0: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonpositiveConstant { name, value })
    }
}

/// Exact suprema over both parities of `β_j (pq)^{-j/2}` and `b_j (pq)^{-j/2}`.
pub fn leading_coefficients(params: &ProblemParams) -> (f64, f64) {
    let (p, q) = (params.p, params.q);
    let pq = p * q;
    let first = Exponents::first(params);
    let s = pq.sqrt();
    let beta_odd = (first.beta + 1.0 / (pq - 1.0)) / s;
    let beta_even = (first.b + q / (pq - 1.0)) / q;
    let b_odd = (first.b + q / (pq - 1.0)) / s;
    let b_even = (first.beta + 1.0 / (pq - 1.0)) / p;
    (beta_odd.max(beta_even), b_odd.max(b_even))
}

/// `min_j exp(-(b_{j-1}p + 1) ln ℓ_j)` over `j ≤ M_DIRECT_J_MAX`, using `b_{j-1}p + 1 = β_j`.
fn m_direct(params: &ProblemParams) -> f64 {
    let (p, q) = (params.p, params.q);
    Exponents::sequence(params, M_DIRECT_J_MAX)
        .iter()
        .enumerate()
        .map(|(i, e)| (-(e.beta * ell(i as u32 + 1, p, q).ln())).exp())
        .filter(|m| m.is_finite())
        .fold(1.0, f64::min)
}

pub fn constants_ledger(
    params: &ProblemParams,
    c1: f64,
    data: &InitialDataIntegrals,
) -> Result<IterationConstants> {
    ensure_in_region(params)?;
    let c1 = positive("C1", c1)?;
    if !(data.u1_phi >= DEGENERATE_DATA_TOL) {
        return Err(Error::DegenerateData(format!(
            "integral of u1 against the test function is {}",
            data.u1_phi
        )));
    }
    if !(data.v1_phi >= DEGENERATE_DATA_TOL) {
        return Err(Error::DegenerateData(format!(
            "integral of v1 against the test function is {}",
            data.v1_phi
        )));
    }
    let (p, q, n, eps) = (params.p, params.q, params.n as f64, params.eps);
    let pq = p * q;
    let lpq = pq.ln();
    let s5 = three_plus_sqrt5();

    let c2 = positive(
        "C2",
        2.0 / s5 * (-(-s5 / 2.0).exp()).ln_1p().exp() * data.u1_phi,
    )?;
    let c3 = positive("C3", 0.5 * data.v1_phi)?;
    let c4 = positive(
        "C4",
        c1.powf(1.0 - q) / 2.0 * ((n + 1.0) / 2.0).powf(q - 1.0),
    )?;

    let ln_d1 =
        (1.0 - p) * c1.ln() + p * c3.ln() + (-(-1.0 - s5 / 4.0).exp()).ln_1p() + p * eps.ln()
            - s5.ln();
    let ln_q1 = q * c2.ln() + c4.ln() + q * eps.ln();

    let (b0, b1) = leading_coefficients(params);
    let m_limit = (-4.0 * b0 * pq.sqrt() / s5).exp();
    let m_direct = m_direct(params);
    let m = positive("M", m_limit.min(m_direct))?;

    let ln_root = (pq.sqrt() - 1.0).ln();
    let ln_e0 =
        4f64.ln() + (1.0 - p) * c1.ln() + p * c4.ln() + ln_root + m.ln() - s5.ln() - b0.ln();
    let ln_e1 = q * 4f64.ln() + (1.0 - p) * q * c1.ln() + c4.ln() + q * ln_root + q * m.ln()
        - q * s5.ln()
        - q * b0.ln();

    let shift = 2.0 * pq / (pq - 1.0);
    let j0 = (2.0 / 3.0 + 2.0 * ln_e0 / (3.0 * lpq) - shift).ceil() as i64;
    let j1 = (2.0 / 3.0 + 2.0 * ln_e1 / (3.0 * q * lpq) - shift).ceil() as i64;

    let tail = (1.0 - 7.0 * pq) / (2.0 * (pq - 1.0).powi(2)) * lpq;
    let ln_e2 = ln_d1 - p * eps.ln() + tail + ln_e0 / (pq - 1.0);
    let ln_e3 = ln_q1 - q * eps.ln() + q * tail + ln_e1 / (pq - 1.0);

    let (t1, t2) = t1_t2(params)?;
    let (k_alpha, k_a) = shift_constants(params);
    let a4 = (n - 1.0) * (p - 1.0) / 2.0 + k_alpha + pq / (pq - 1.0);
    let ln_e4 = (-ln_e2 + a4 * 2f64.ln()) / (p * t1);
    let mut log_eps0 = t1 * ln_e4;
    let ln_e5 = if t2 > 0.0 {
        let a5 = (n + 1.0) * (q - 1.0) / 2.0 + k_a + q / (pq - 1.0);
        let ln_e5 = (-ln_e3 + a5 * 2f64.ln()) / (q * t2);
        log_eps0 = log_eps0.min(t2 * ln_e5);
        Some(ln_e5)
    } else {
        None
    };

    let l = slicing_product(1, p, q)?.limit;

    Ok(IterationConstants {
        eps,
        c1,
        c2,
        c3,
        c4,
        log_d1: LogValue::from_ln(ln_d1),
        log_q1: LogValue::from_ln(ln_q1),
        b0,
        b1,
        m,
        m_limit,
        m_direct,
        log_e0: LogValue::from_ln(ln_e0),
        log_e1: LogValue::from_ln(ln_e1),
        log_e2: LogValue::from_ln(ln_e2),
        log_e3: LogValue::from_ln(ln_e3),
        log_e4: LogValue::from_ln(ln_e4),
        log_e5: ln_e5.map(LogValue::from_ln),
        j0,
        j1,
        l,
        t1,
        t2,
        log_eps0,
    })
}
