use super::{Blowup, FunctionalTrace, Sample, Trigger};
use crate::error::{Error, Result};
use serde::Serialize;

/// First sample whose velocity sup-norm exceeds `threshold` or is non-finite.
pub fn detect_blowup(samples: &[Sample], threshold: f64) -> Option<Blowup> {
    samples.iter().find_map(|s| {
        let trigger = if !(s.sup_ut.is_finite() && s.sup_vt.is_finite() && s.f1.is_finite()) {
            Trigger::NonFinite
        } else if s.sup_ut > threshold {
            Trigger::SupUt
        } else if s.sup_vt > threshold {
            Trigger::SupVt
        } else {
            return None;
        };
        Some(Blowup {
            t_num: s.t,
            trigger,
        })
    })
}

/// Identities are checked only before this fraction of `T_num`.
pub const PRE_BLOWUP_FRACTION: f64 = 0.9;
pub const MIN_IDENTITY_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// Max relative residual of `F₁'' + (2+γ)F₁' + γF₁ = ε∫(u₀+u₁)Φ + ∫_0^t S₁ + S₁`.
    pub f1_max: f64,
    pub f1_worst_t: f64,
    /// Max relative residual of `F₂' + 2F₂ = ε∫(v₀+v₁)Φ + ∫_0^t S₂ + S₂`.
    pub f2_max: f64,
    pub f2_worst_t: f64,
    pub samples_used: usize,
    pub window_end: f64,
}

/// Three-point first and second derivatives on a nonuniform stencil.
fn derivatives(t: [f64; 3], f: [f64; 3]) -> (f64, f64) {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    let d1 =
        -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2];
    let d2 = 2.0 * (f[0] / (h1 * (h1 + h2)) - f[1] / (h1 * h2) + f[2] / (h2 * (h1 + h2)));
    (d1, d2)
}

fn relative(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Residuals of the two functional identities over the pre-blow-up window,
/// with `F₁', F₁'', F₂'` reconstructed by finite differences of the samples.
pub fn verify_identities(trace: &FunctionalTrace) -> Result<IdentityResiduals> {
    let window_end = trace
        .blowup
        .or(trace.blowup_robust)
        .map(|b| PRE_BLOWUP_FRACTION * b.t_num)
        .unwrap_or(f64::INFINITY);
    let window: Vec<&Sample> = trace
        .samples
        .iter()
        .filter(|s| s.t < window_end && s.f1.is_finite())
        .collect();
    if window.len() < MIN_IDENTITY_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_IDENTITY_SAMPLES,
            got: window.len(),
        });
    }
    let g = trace.damping;
    let mut out = IdentityResiduals {
        f1_max: 0.0,
        f1_worst_t: 0.0,
        f2_max: 0.0,
        f2_worst_t: 0.0,
        samples_used: window.len() - 2,
        window_end: window.last().map(|s| s.t).unwrap_or(0.0),
    };
    for w in window.windows(3) {
        let t = [w[0].t, w[1].t, w[2].t];
        let s = w[1];
        let (d1, d2) = derivatives(t, [w[0].f1, s.f1, w[2].f1]);
        let lhs1 = d2 + (2.0 + g) * d1 + g * s.f1;
        let rhs1 = trace.data_u + s.cum_s1 + s.s1;
        let r1 = relative(lhs1, rhs1);
        if r1 > out.f1_max {
            out.f1_max = r1;
            out.f1_worst_t = s.t;
        }
        let (e1, _) = derivatives(t, [w[0].f2, s.f2, w[2].f2]);
        let lhs2 = e1 + 2.0 * s.f2;
        let rhs2 = trace.data_v + s.cum_s2 + s.s2;
        let r2 = relative(lhs2, rhs2);
        if r2 > out.f2_max {
            out.f2_max = r2;
            out.f2_worst_t = s.t;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{run, Mode, SimConfig, StopReason};
    use super::*;
    use crate::exponents::ProblemParams;

    fn sample(t: f64, sup: f64) -> Sample {
        Sample {
            t,
            f1: 0.0,
            f2: 0.0,
            a1: 0.0,
            s1: 0.0,
            s2: 0.0,
            cum_s1: 0.0,
            cum_s2: 0.0,
            sup_ut: sup,
            sup_vt: 0.5 * sup,
            support_radius: 0.0,
            energy_u: 0.0,
            energy_v: 0.0,
        }
    }

    #[test]
    fn detection_rules() {
        let zeros: Vec<Sample> = (0..5).map(|i| sample(i as f64, 0.0)).collect();
        assert!(detect_blowup(&zeros, 1e8).is_none());
        let mut s: Vec<Sample> = (0..5)
            .map(|i| sample(i as f64, 10f64.powi(3 * i)))
            .collect();
        let b = detect_blowup(&s, 1e8).unwrap();
        assert_eq!((b.t_num, b.trigger), (3.0, Trigger::SupUt));
        s[2].sup_vt = f64::INFINITY;
        let b = detect_blowup(&s, 1e8).unwrap();
        assert_eq!((b.t_num, b.trigger), (2.0, Trigger::NonFinite));
    }

    #[test]
    fn derivative_stencil_exact_for_quadratics() {
        let f = |t: f64| 3.0 * t * t - t + 2.0;
        let t = [0.3, 0.5, 1.1];
        let (d1, d2) = derivatives(t, [f(t[0]), f(t[1]), f(t[2])]);
        assert!((d1 - (6.0 * 0.5 - 1.0)).abs() < 1e-12);
        assert!((d2 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn linear_modes_reduce_to_data_terms() {
        for (mode, n) in [
            (Mode::LinearDamped, 1),
            (Mode::LinearFree, 1),
            (Mode::LinearDamped, 3),
        ] {
            let params = ProblemParams::new(2.0, 2.0, n, 1.0, 0.5).unwrap();
            let mut cfg = SimConfig::new(params, 2048, 6.0);
            cfg.mode = mode;
            let trace = run(&cfg).unwrap();
            assert_eq!(trace.stop, StopReason::Horizon);
            let r = verify_identities(&trace).unwrap();
            assert!(r.f1_max < 1e-3 && r.f2_max < 1e-3, "{mode:?} n={n}: {r:?}");
        }
    }

    #[test]
    fn too_few_samples() {
        let mut cfg = SimConfig::new(
            ProblemParams::new(2.0, 2.0, 1, 1.0, 0.5).unwrap(),
            256,
            1e-3,
        );
        cfg.mode = Mode::LinearFree;
        let trace = run(&cfg).unwrap();
        assert!(matches!(
            verify_identities(&trace),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
