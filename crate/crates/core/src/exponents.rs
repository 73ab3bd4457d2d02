//! Algebra of the (p, q) plane: critical curves, region membership and
//! lifespan exponents for the damped-wave/wave system with nonlinearities
//! `|v_t|^p` and `|u_t|^q`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// The exponent pair, dimension, data support radius and data size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams {
    pub p: f64,
    pub q: f64,
    pub n: u32,
    #[serde(rename = "R")]
    pub r: f64,
    pub eps: f64,
}

impl ProblemParams {
    pub fn new(p: f64, q: f64, n: u32, r: f64, eps: f64) -> Result<Self> {
        let params = ProblemParams { p, q, n, r, eps };
        params.validate()?;
        Ok(params)
    }

    /// Exponents and dimension only; `R = eps = 1`.
    pub fn exponents_only(p: f64, q: f64, n: u32) -> Result<Self> {
        Self::new(p, q, n, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        check_exponents(self.p, self.q)?;
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter("R must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter("eps must be positive".into()));
        }
        Ok(())
    }

    pub fn pq(&self) -> f64 {
        self.p * self.q
    }
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter("p must exceed 1".into()));
    }
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter("q must exceed 1".into()));
    }
    Ok(())
}

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::Infinity)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(*x),
            ExtendedReal::Infinity => None,
        }
    }

    /// `x < self` in extended-real order.
    pub fn exceeds(&self, x: f64) -> bool {
        match self {
            ExtendedReal::Finite(y) => x < *y,
            ExtendedReal::Infinity => x.is_finite(),
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), Infinity) => Some(Ordering::Less),
            (Infinity, Finite(_)) => Some(Ordering::Greater),
            (Infinity, Infinity) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::Infinity => write!(f, "infinity"),
        }
    }
}

// JSON has no infinity literal, so the infinite value is written as the string "infinity".
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            ExtendedReal::Infinity => s.serialize_str("infinity"),
        }
    }
}

/// Critical exponent of `u_tt - Δu = |u_t|^p`: `∞` for `n = 1`, `(n+1)/(n-1)` otherwise.
pub fn glassey_exponent(n: u32) -> Result<ExtendedReal> {
    match n {
        0 => Err(Error::InvalidParameter("n must be at least 1".into())),
        1 => Ok(ExtendedReal::Infinity),
        _ => Ok(ExtendedReal::Finite((n as f64 + 1.0) / (n as f64 - 1.0))),
    }
}

/// `pq < p_Gla(n)`, strict: the boundary itself is outside the region.
pub fn blowup_condition(params: &ProblemParams) -> Result<bool> {
    blowup_condition_with_margin(params, 0.0)
}

/// Like [`blowup_condition`] but requires `pq < p_Gla(n) - margin`.
pub fn blowup_condition_with_margin(params: &ProblemParams, margin: f64) -> Result<bool> {
    check_exponents(params.p, params.q)?;
    Ok(match glassey_exponent(params.n)? {
        ExtendedReal::Infinity => true,
        ExtendedReal::Finite(g) => params.pq() < g - margin,
    })
}

/// True when `pq` coincides with `p_Gla(n)` to within `tol` (relative).
pub fn on_critical_boundary(params: &ProblemParams, tol: f64) -> Result<bool> {
    Ok(match glassey_exponent(params.n)? {
        ExtendedReal::Infinity => false,
        ExtendedReal::Finite(g) => (params.pq() - g).abs() <= tol * g,
    })
}

/// Lifespan exponent `θ` in `T(ε) ≤ C ε^{-θ}`.
pub fn lifespan_exponent(params: &ProblemParams) -> Result<f64> {
    check_exponents(params.p, params.q)?;
    let n = params.n as f64;
    let pq = params.pq();
    if params.n == 1 {
        return Ok(pq - 1.0);
    }
    let denom = (n + 1.0) - (n - 1.0) * pq;
    if denom <= 0.0 {
        return Err(Error::RegionViolation(format!(
            "(n+1) - (n-1)pq = {denom} is not positive"
        )));
    }
    Ok(2.0 * (pq - 1.0) / denom)
}

/// `(T₁, T₂)`, the growth rates of the two lower-bound envelopes in `t`.
pub fn t1_t2(params: &ProblemParams) -> Result<(f64, f64)> {
    check_exponents(params.p, params.q)?;
    let (p, n, pq) = (params.p, params.n as f64, params.pq());
    let t1 = ((n + 1.0) - (n - 1.0) * pq) / (2.0 * (pq - 1.0));
    let t2 = ((n + 1.0) + 2.0 * p - (n + 1.0) * pq) / (2.0 * (pq - 1.0));
    Ok((t1, t2))
}

/// Max-expression of the blow-up condition for the power-nonlinearity problem.
pub fn wakasugi_max(p: f64, q: f64) -> f64 {
    let d = p * q - 1.0;
    ((q / 2.0 + 1.0) / d + 0.5)
        .max((q + 1.0) / d)
        .max((p + 1.0) / d)
}

pub fn alpha_nakao(p: f64, q: f64) -> f64 {
    let d = p * q - 1.0;
    ((q / 2.0 + 1.0) / d)
        .max((2.0 + 1.0 / p) / d)
        .max((0.5 + p) / d - 0.5)
}

pub fn alpha_wave(p: f64, q: f64) -> f64 {
    (p.max(q) + 1.0) / (p * q - 1.0)
}

pub fn alpha_shrift(p: f64, q: f64) -> f64 {
    q / (p * q - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub glassey: ExtendedReal,
    pub wakasugi_holds: bool,
    pub nakao_alpha: f64,
    pub wave_alpha: f64,
    pub shrift_alpha: f64,
    pub blowup_condition_holds: bool,
    pub lifespan_exponent: Option<f64>,
    pub t1: f64,
    pub t2: f64,
    /// `pq` sits on `p_Gla(n)` (to 1e-12 relative); reported outside the region.
    pub on_critical_boundary: bool,
}

pub fn curve_values(params: &ProblemParams) -> Result<RegionReport> {
    check_exponents(params.p, params.q)?;
    let (p, q) = (params.p, params.q);
    let holds = blowup_condition(params)?;
    let (t1, t2) = t1_t2(params)?;
    Ok(RegionReport {
        glassey: glassey_exponent(params.n)?,
        wakasugi_holds: wakasugi_max(p, q) >= params.n as f64 / 2.0,
        nakao_alpha: alpha_nakao(p, q),
        wave_alpha: alpha_wave(p, q),
        shrift_alpha: alpha_shrift(p, q),
        blowup_condition_holds: holds,
        lifespan_exponent: if holds {
            Some(lifespan_exponent(params)?)
        } else {
            None
        },
        t1,
        t2,
        on_critical_boundary: on_critical_boundary(params, 1e-12)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pp(p: f64, q: f64, n: u32) -> ProblemParams {
        ProblemParams::exponents_only(p, q, n).unwrap()
    }

    #[test]
    fn glassey_values() {
        assert_eq!(glassey_exponent(1).unwrap(), ExtendedReal::Infinity);
        assert_eq!(glassey_exponent(2).unwrap(), ExtendedReal::Finite(3.0));
        assert_eq!(glassey_exponent(3).unwrap(), ExtendedReal::Finite(2.0));
        assert!(glassey_exponent(0).is_err());
        assert!(ExtendedReal::Infinity > ExtendedReal::Finite(1e300));
    }

    #[test]
    fn region_membership() {
        assert!(blowup_condition(&pp(2.0, 2.0, 1)).unwrap());
        assert!(blowup_condition(&pp(1.5, 1.5, 2)).unwrap());
        assert!(!blowup_condition(&pp(2.0, 2.0, 2)).unwrap());
        // pq = 3 exactly: boundary is outside
        let edge = pp(1.5, 2.0, 2);
        assert!(!blowup_condition(&edge).unwrap());
        assert!(on_critical_boundary(&edge, 1e-12).unwrap());
        assert!(!blowup_condition_with_margin(&pp(1.5, 1.95, 2), 0.1).unwrap());
        assert!(blowup_condition_with_margin(&pp(1.5, 1.9, 2), 0.1).unwrap());
    }

    #[test]
    fn rejects_subcritical_exponents() {
        let err = ProblemParams::exponents_only(0.5, 2.0, 2).unwrap_err();
        assert_eq!(err.to_string(), "p must exceed 1");
        assert!(ProblemParams::exponents_only(2.0, 1.0, 2).is_err());
    }

    #[test]
    fn lifespan_exponent_values() {
        assert_eq!(lifespan_exponent(&pp(2.0, 2.0, 1)).unwrap(), 3.0);
        assert_relative_eq!(
            lifespan_exponent(&pp(1.2, 1.2, 2)).unwrap(),
            0.88 / 1.56,
            epsilon = 1e-12
        );
        assert!((lifespan_exponent(&pp(1.2, 1.2, 2)).unwrap() - 0.564103).abs() < 1e-6);
        assert!(matches!(
            lifespan_exponent(&pp(2.0, 2.0, 2)),
            Err(Error::RegionViolation(_))
        ));
    }

    #[test]
    fn t1_t2_values() {
        let (t1, t2) = t1_t2(&pp(2.0, 2.0, 1)).unwrap();
        assert_relative_eq!(t1, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(t2, -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(t1 - t2, 2.0 / 3.0, epsilon = 1e-15);
        let (t1, _) = t1_t2(&pp(1.5, 1.5, 2)).unwrap();
        assert_relative_eq!(t1, 0.3, epsilon = 1e-14);
    }

    #[test]
    fn curve_values_at_2_2() {
        let r = curve_values(&pp(2.0, 2.0, 1)).unwrap();
        assert_relative_eq!(r.nakao_alpha, 5.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(r.wave_alpha, 1.0, epsilon = 1e-15);
        assert_relative_eq!(wakasugi_max(2.0, 2.0), 7.0 / 6.0, epsilon = 1e-15);
        assert!(r.wakasugi_holds);
        assert!(r.blowup_condition_holds);
        assert_eq!(r.lifespan_exponent, Some(3.0));
        let outside = curve_values(&pp(2.0, 2.0, 2)).unwrap();
        assert!(!outside.blowup_condition_holds);
        assert_eq!(outside.lifespan_exponent, None);
    }

    #[test]
    fn lifespan_exponent_is_reciprocal_t1() {
        let params = pp(1.3, 1.4, 3);
        let theta = lifespan_exponent(&params).unwrap();
        let (t1, _) = t1_t2(&params).unwrap();
        assert_relative_eq!(theta * t1, 1.0, epsilon = 1e-14);
    }
}
