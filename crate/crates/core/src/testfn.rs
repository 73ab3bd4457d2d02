//! The radial eigenfunction `Φ` of the Laplacian (`ΔΦ = Φ`), the wave test
//! function `Ψ(t, x) = e^{-t} Φ(x)`, and numerical checks of their estimates.
//!
//! For `n ≥ 2`, `Φ(x) = ∫_{S^{n-1}} e^{x·ω} dσ_ω` depends only on `r = |x|` and
//! reduces to `|S^{n-2}| ∫_0^π e^{r cos θ} sin^{n-2} θ dθ`. The factor `e^r` is
//! pulled out analytically so every value is produced in log form.

use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::quadrature::{GaussLegendre, QuadratureSpec};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

const PHI_GL_ORDER: usize = 16;
/// Angular integrand is dropped once `r (1 - cos θ)` exceeds this.
const PHI_TAIL_CUTOFF: f64 = 60.0;

fn phi_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PHI_GL_ORDER))
}

/// Surface area of the unit sphere `S^k ⊂ R^{k+1}`.
pub fn sphere_area(k: u32) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

fn check_dim(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(())
}

/// `ln Φ(r)` for the radial eigenfunction in dimension `n`.
pub fn ln_phi(n: u32, r: f64) -> Result<f64> {
    check_dim(n)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    if n == 1 {
        // e^r + e^{-r}
        return Ok(r + (-2.0 * r).exp().ln_1p());
    }
    let power = (n - 2) as i32;
    let integrand = |theta: f64| (-r * (1.0 - theta.cos())).exp() * theta.sin().powi(power);
    let cutoff = if r * 2.0 <= PHI_TAIL_CUTOFF {
        PI
    } else {
        (1.0 - PHI_TAIL_CUTOFF / r).acos()
    };
    let width = if r > 0.0 {
        (PI / 4.0).min(2.0 / r.sqrt())
    } else {
        PI / 4.0
    };
    let panels = (cutoff / width).ceil().max(1.0) as usize;
    let angular = phi_rule().composite(&integrand, 0.0, cutoff, panels);
    Ok(sphere_area(n - 2).ln() + r + angular.ln())
}

pub fn phi(n: u32, r: f64) -> Result<LogValue> {
    ln_phi(n, r).map(LogValue::from_ln)
}

/// `Ψ(t, r) = e^{-t} Φ(r)`.
pub fn psi(n: u32, t: f64, r: f64) -> Result<LogValue> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    Ok(phi(n, r)?.scale_exp(-t))
}

/// `∫_{B_radius} Φ(x) dx = |S^{n-1}| ∫_0^radius Φ(r) r^{n-1} dr`.
pub fn phi_ball_integral(n: u32, radius: f64, spec: &QuadratureSpec) -> Result<LogValue> {
    check_dim(n)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ball radius must be positive, got {radius}"
        )));
    }
    let power = (n - 1) as i32;
    // e^{-radius} keeps the integrand O(1)
    let integrand = |r: f64| match ln_phi(n, r) {
        Ok(l) => (l - radius).exp() * r.powi(power),
        Err(_) => f64::NAN,
    };
    let scaled = spec.integrate(integrand, 0.0, radius)?;
    if !scaled.is_finite() {
        return Err(Error::NonConvergence(format!(
            "non-finite ball integral at radius {radius}"
        )));
    }
    Ok(LogValue::from_f64(sphere_area(n - 1) * scaled).scale_exp(radius))
}

/// Grid supremum of `e^{-t} ∫_{B_{R+t}} Φ / (R+t)^{(n-1)/2}`, the constant
/// bounding `∫_{B_{R+t}} Ψ(t, x) dx` by `C₁ (R+t)^{(n-1)/2}`.
#[derive(Debug, Clone, Serialize)]
pub struct C1Estimate {
    pub c1: f64,
    pub t_at_sup: f64,
    pub r: f64,
    pub t_max: f64,
    pub grid_step: f64,
    /// `(max - min) / max` of the ratio over the last tenth of the grid.
    pub tail_variation: f64,
    pub samples: Vec<(f64, f64)>,
}

pub const C1_GRID_STEP: f64 = 0.25;

pub fn c1_ratio(n: u32, r: f64, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let rho = r + t;
    let ball = phi_ball_integral(n, rho, spec)?;
    Ok((ball.ln() - t - 0.5 * (n as f64 - 1.0) * rho.ln()).exp())
}

pub fn c1_estimate(n: u32, r: f64, t_max: f64) -> Result<C1Estimate> {
    c1_estimate_with(
        n,
        r,
        t_max,
        C1_GRID_STEP,
        &QuadratureSpec {
            refinement_tol: 1e-9,
            ..Default::default()
        },
    )
}

pub fn c1_estimate_with(
    n: u32,
    r: f64,
    t_max: f64,
    grid_step: f64,
    spec: &QuadratureSpec,
) -> Result<C1Estimate> {
    if !(t_max >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "t_max must be at least 1, got {t_max}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("R must be positive".into()));
    }
    let steps = (t_max / grid_step).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = (i as f64 * grid_step).min(t_max);
        samples.push((t, c1_ratio(n, r, t, spec)?));
    }
    let (t_at_sup, c1) =
        samples.iter().copied().fold(
            (0.0, f64::NEG_INFINITY),
            |acc, s| if s.1 > acc.1 { s } else { acc },
        );
    let tail_start = 0.9 * t_max;
    let tail: Vec<f64> = samples
        .iter()
        .filter(|s| s.0 >= tail_start)
        .map(|s| s.1)
        .collect();
    let tmax = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tmin = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(C1Estimate {
        c1,
        t_at_sup,
        r,
        t_max,
        grid_step,
        tail_variation: (tmax - tmin) / tmax,
        samples,
    })
}

/// Max over `radii` of `|ΔΦ - Φ| / Φ`, with the radial Laplacian
/// `Φ'' + (n-1)/r Φ'` taken by central differences of step `h`.
pub fn verify_laplacian_eigen(n: u32, radii: &[f64], h: f64) -> Result<f64> {
    check_dim(n)?;
    if !(1e-4..=1e-2).contains(&h) {
        return Err(Error::InvalidParameter(format!(
            "step h must lie in [1e-4, 1e-2], got {h}"
        )));
    }
    let mut worst = 0.0f64;
    for &r in radii {
        if !(r > 0.0 && r <= 20.0) {
            return Err(Error::InvalidParameter(format!(
                "sample radius must lie in (0, 20], got {r}"
            )));
        }
        // ratios to Φ(r) keep everything O(1)
        let center = ln_phi(n, r)?;
        let plus = (ln_phi(n, r + h)? - center).exp();
        let minus = (ln_phi(n, r - h)? - center).exp();
        let second = (plus - 2.0 + minus) / (h * h);
        let first = (plus - minus) / (2.0 * h);
        let lap = second + (n as f64 - 1.0) / r * first;
        worst = worst.max((lap - 1.0).abs());
    }
    Ok(worst)
}

/// Spread of `ln Φ(r) - (r - (n-1)/2 ln r)` on radius windows; the difference
/// converges as `r → ∞`, so the far window should be flatter than the near one.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticFlatness {
    pub spread: f64,
    pub spread_near: f64,
    pub spread_far: f64,
}

pub fn asymptotic_flatness(n: u32) -> Result<AsymptoticFlatness> {
    let offset =
        |r: f64| -> Result<f64> { Ok(ln_phi(n, r)? - (r - 0.5 * (n as f64 - 1.0) * r.ln())) };
    let window = |lo: f64, hi: f64| -> Result<f64> {
        let mut mx = f64::NEG_INFINITY;
        let mut mn = f64::INFINITY;
        let mut r = lo;
        while r <= hi + 1e-9 {
            let d = offset(r)?;
            mx = mx.max(d);
            mn = mn.min(d);
            r += 0.5;
        }
        Ok(mx - mn)
    };
    Ok(AsymptoticFlatness {
        spread: window(20.0, 60.0)?,
        spread_near: window(20.0, 40.0)?,
        spread_far: window(40.0, 60.0)?,
    })
}
