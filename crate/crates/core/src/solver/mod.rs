//! Method-of-lines simulation of
//!
//! ```text
//! u_tt - Δu + u_t = |v_t|^p,   v_tt - Δv = |u_t|^q
//! ```
//!
//! with bump data, tracking `F₁(t) = ∫_0^t ∫ u_t Ψ` and `F₂(t) = ∫ v_t Ψ`.
//! Time stepping is classical RK4 on `(u, u_t, v, v_t)`.

mod grid;
mod identities;

pub use grid::Grid;
pub use identities::{detect_blowup, verify_identities, IdentityResiduals};

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::iteration::InitialDataIntegrals;
use crate::quadrature::QuadratureSpec;
use crate::testfn::{ln_phi, sphere_area};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The coupled nonlinear system.
    #[default]
    Full,
    /// Sources off and no damping: two free wave equations.
    LinearFree,
    /// Sources off, damping kept on `u`.
    LinearDamped,
}

impl Mode {
    pub fn sources(self) -> bool {
        self == Mode::Full
    }

    /// Coefficient of `u_t` in the `u` equation.
    pub fn damping(self) -> f64 {
        match self {
            Mode::LinearFree => 0.0,
            _ => 1.0,
        }
    }
}

fn default_cfl() -> f64 {
    0.4
}
fn default_threshold() -> f64 {
    1e8
}
fn default_robust_threshold() -> f64 {
    1e10
}
fn default_track_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: ProblemParams,
    pub nx: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_max: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    /// Second threshold for the robustness check. The run continues until
    /// this one is crossed, so both verdicts come from the same trajectory.
    #[serde(default = "default_robust_threshold")]
    pub robust_threshold: f64,
    #[serde(default = "default_track_every")]
    pub track_every: usize,
    #[serde(default)]
    pub mode: Mode,
}

pub const MIN_NX: usize = 256;
/// Source-stiffness cap: `dt ≤ STIFFNESS_CAP / max(|u_t|^{q-1}, |v_t|^{p-1})`.
pub const STIFFNESS_CAP: f64 = 0.1;
/// A new sample is forced once a sup-norm moves by this factor.
pub const ADAPTIVE_SAMPLE_RATIO: f64 = 1.1;
pub const SUPPORT_TOL: f64 = 1e-12;
/// `Ψ` is evaluated out to `R + t + PSI_MARGIN_CELLS·dx`. The semi-discrete
/// scheme has a dispersive precursor a few dozen cells ahead of the light
/// cone, and it must stay inside the quadrature for the identities to close.
pub const PSI_MARGIN_CELLS: f64 = 64.0;
/// Relative `T_num` disagreement tolerated between the two thresholds.
pub const ROBUSTNESS_TOL: f64 = 0.05;

impl SimConfig {
    pub fn new(params: ProblemParams, nx: usize, t_max: f64) -> Self {
        SimConfig {
            params,
            nx,
            cfl: default_cfl(),
            t_max,
            blowup_threshold: default_threshold(),
            robust_threshold: default_robust_threshold(),
            track_every: default_track_every(),
            mode: Mode::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::CflViolation(self.cfl));
        }
        if self.nx < MIN_NX {
            return Err(Error::InvalidParameter(format!(
                "nx must be at least {MIN_NX}, got {}",
                self.nx
            )));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.blowup_threshold > 0.0 && self.robust_threshold >= self.blowup_threshold) {
            return Err(Error::InvalidParameter(format!(
                "thresholds must satisfy 0 < blowup_threshold <= robust_threshold, got {} and {}",
                self.blowup_threshold, self.robust_threshold
            )));
        }
        if self.track_every == 0 {
            return Err(Error::InvalidParameter(
                "track_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Half-width (or outer radius) of the domain: `R + t_max + 2`.
    pub fn domain_extent(&self) -> f64 {
        self.params.r + self.t_max + 2.0
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.params.n, self.nx, self.domain_extent())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub v: Vec<f64>,
    pub vt: Vec<f64>,
}

impl FieldState {
    pub fn zeros(len: usize) -> Self {
        FieldState {
            t: 0.0,
            u: vec![0.0; len],
            ut: vec![0.0; len],
            v: vec![0.0; len],
            vt: vec![0.0; len],
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.u, &self.ut, &self.v, &self.vt]
            .iter()
            .all(|a| a.iter().all(|x| x.is_finite()))
    }
}

/// `(1 - |x/R|²)⁴` inside `B_R`, zero outside.
pub fn bump(r: f64, radius: f64) -> f64 {
    let s = r / radius;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(4)
    }
}

/// All four data components equal to `ε B`.
pub fn init_bump(params: &ProblemParams, grid: &Grid) -> FieldState {
    let data: Vec<f64> = grid
        .x
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if grid.is_fixed(i) {
                0.0
            } else {
                params.eps * bump(x.abs(), params.r)
            }
        })
        .collect();
    FieldState {
        t: 0.0,
        u: data.clone(),
        ut: data.clone(),
        v: data.clone(),
        vt: data,
    }
}

/// `∫ B Φ dx` by adaptive quadrature, independent of any simulation grid.
/// All four components of the bump data share this value.
pub fn bump_phi_integrals(params: &ProblemParams) -> Result<InitialDataIntegrals> {
    params.validate()?;
    let n = params.n;
    let spec = QuadratureSpec {
        refinement_tol: 1e-11,
        ..Default::default()
    };
    let radius = params.r;
    let power = (n - 1) as i32;
    let integrand = |r: f64| match ln_phi(n, r) {
        Ok(l) => bump(r, radius) * l.exp() * r.powi(power),
        Err(_) => f64::NAN,
    };
    let value = sphere_area(n - 1) * spec.integrate(integrand, 0.0, radius)?;
    Ok(InitialDataIntegrals {
        u0_phi: value,
        u1_phi: value,
        v0_phi: value,
        v1_phi: value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    SupUt,
    SupVt,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Blowup {
    pub t_num: f64,
    pub trigger: Trigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub f1: f64,
    pub f2: f64,
    /// `∫ u_t Ψ`, the exact `F₁'`.
    pub a1: f64,
    /// `∫ |v_t|^p Ψ`.
    pub s1: f64,
    /// `∫ |u_t|^q Ψ`.
    pub s2: f64,
    pub cum_s1: f64,
    pub cum_s2: f64,
    pub sup_ut: f64,
    pub sup_vt: f64,
    pub support_radius: f64,
    pub energy_u: f64,
    pub energy_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    Threshold,
    NonFinite,
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalTrace {
    pub samples: Vec<Sample>,
    /// Verdict at `blowup_threshold`.
    pub blowup: Option<Blowup>,
    /// Verdict at `robust_threshold`.
    pub blowup_robust: Option<Blowup>,
    pub stop: StopReason,
    pub steps: usize,
    pub dx: f64,
    pub dt: f64,
    /// `ε ∫ (u₀ + u₁) Φ` on the simulation grid.
    pub data_u: f64,
    /// `ε ∫ (v₀ + v₁) Φ` on the simulation grid.
    pub data_v: f64,
    pub damping: f64,
}

impl FunctionalTrace {
    /// Relative disagreement of `T_num` between the two thresholds, when both fired.
    pub fn threshold_spread(&self) -> Option<f64> {
        match (self.blowup, self.blowup_robust) {
            (Some(a), Some(b)) => Some((b.t_num - a.t_num).abs() / a.t_num.max(f64::MIN_POSITIVE)),
            _ => None,
        }
    }

    pub fn threshold_robust(&self) -> Option<bool> {
        self.threshold_spread().map(|s| s <= ROBUSTNESS_TOL)
    }

    /// Largest `|E(t)/E(0) - 1|` over the samples, for `u` and `v`.
    pub fn energy_drift(&self) -> (f64, f64) {
        let first = match self.samples.first() {
            Some(s) => *s,
            None => return (0.0, 0.0),
        };
        let drift = |e0: f64, pick: fn(&Sample) -> f64| {
            if e0 == 0.0 {
                return 0.0;
            }
            self.samples
                .iter()
                .map(|s| (pick(s) / e0 - 1.0).abs())
                .fold(0.0, f64::max)
        };
        (
            drift(first.energy_u, |s| s.energy_u),
            drift(first.energy_v, |s| s.energy_v),
        )
    }
}

fn sup_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, x| {
        if x.is_nan() {
            f64::INFINITY
        } else {
            m.max(x.abs())
        }
    })
}

struct Stepper<'a> {
    grid: &'a Grid,
    p: f64,
    q: f64,
    damping: f64,
    sources: bool,
}

impl Stepper<'_> {
    fn rhs(&self, s: &FieldState) -> FieldState {
        let nx = self.grid.len();
        let mut d = FieldState::zeros(nx);
        self.grid.add_laplacian(&s.u, &mut d.ut);
        self.grid.add_laplacian(&s.v, &mut d.vt);
        for i in 0..nx {
            if self.grid.is_fixed(i) {
                continue;
            }
            d.u[i] = s.ut[i];
            d.v[i] = s.vt[i];
            d.ut[i] -= self.damping * s.ut[i];
            if self.sources {
                d.ut[i] += s.vt[i].abs().powf(self.p);
                d.vt[i] += s.ut[i].abs().powf(self.q);
            }
        }
        d
    }

    fn rk4(&self, s: &FieldState, dt: f64) -> FieldState {
        let axpy = |base: &FieldState, k: &FieldState, h: f64| FieldState {
            t: base.t + h,
            u: base.u.iter().zip(&k.u).map(|(a, b)| a + h * b).collect(),
            ut: base.ut.iter().zip(&k.ut).map(|(a, b)| a + h * b).collect(),
            v: base.v.iter().zip(&k.v).map(|(a, b)| a + h * b).collect(),
            vt: base.vt.iter().zip(&k.vt).map(|(a, b)| a + h * b).collect(),
        };
        let k1 = self.rhs(s);
        let k2 = self.rhs(&axpy(s, &k1, 0.5 * dt));
        let k3 = self.rhs(&axpy(s, &k2, 0.5 * dt));
        let k4 = self.rhs(&axpy(s, &k3, dt));
        let combine = |x: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
            (0..x.len())
                .map(|i| x[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect()
        };
        FieldState {
            t: s.t + dt,
            u: combine(&s.u, &k1.u, &k2.u, &k3.u, &k4.u),
            ut: combine(&s.ut, &k1.ut, &k2.ut, &k3.ut, &k4.ut),
            v: combine(&s.v, &k1.v, &k2.v, &k3.v, &k4.v),
            vt: combine(&s.vt, &k1.vt, &k2.vt, &k3.vt, &k4.vt),
        }
    }
}

/// Instantaneous quantities at one time level.
struct Snapshot {
    a1: f64,
    f2: f64,
    s1: f64,
    s2: f64,
    sup_ut: f64,
    sup_vt: f64,
}

fn snapshot(grid: &Grid, s: &FieldState, params: &ProblemParams, sources: bool) -> Snapshot {
    let cone = params.r + s.t + PSI_MARGIN_CELLS * grid.dx;
    let psi = |i: usize| {
        if grid.x[i].abs() <= cone {
            (grid.ln_phi[i] - s.t).exp()
        } else {
            0.0
        }
    };
    let (mut a1, mut f2, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..grid.len() {
        let w = grid.mass[i] * psi(i);
        if w == 0.0 {
            continue;
        }
        a1 += w * s.ut[i];
        f2 += w * s.vt[i];
        if sources {
            s1 += w * s.vt[i].abs().powf(params.p);
            s2 += w * s.ut[i].abs().powf(params.q);
        }
    }
    Snapshot {
        a1,
        f2,
        s1,
        s2,
        sup_ut: sup_abs(&s.ut),
        sup_vt: sup_abs(&s.vt),
    }
}

fn support_radius(grid: &Grid, s: &FieldState) -> f64 {
    (0..grid.len())
        .filter(|&i| {
            s.u[i].abs().max(s.v[i].abs()) > SUPPORT_TOL
                || !s.u[i].is_finite()
                || !s.v[i].is_finite()
        })
        .map(|i| grid.x[i].abs())
        .fold(0.0, f64::max)
}

/// Runs from bump data.
pub fn run(config: &SimConfig) -> Result<FunctionalTrace> {
    config.validate()?;
    let grid = config.grid()?;
    let state = init_bump(&config.params, &grid);
    run_from(config, &grid, state)
}

/// Runs from an arbitrary initial state on `grid`.
pub fn run_from(config: &SimConfig, grid: &Grid, mut state: FieldState) -> Result<FunctionalTrace> {
    config.validate()?;
    let params = &config.params;
    let mode = config.mode;
    let stepper = Stepper {
        grid,
        p: params.p,
        q: params.q,
        damping: mode.damping(),
        sources: mode.sources(),
    };
    let dt_base = config.cfl * grid.dx;
    let data_u = grid.integrate(|i| (state.u[i] + state.ut[i]) * grid.ln_phi[i].exp());
    let data_v = grid.integrate(|i| (state.v[i] + state.vt[i]) * grid.ln_phi[i].exp());

    let mut snap = snapshot(grid, &state, params, stepper.sources);
    let (mut f1, mut cum_s1, mut cum_s2) = (0.0, 0.0, 0.0);
    let make_sample =
        |state: &FieldState, snap: &Snapshot, f1: f64, cum_s1: f64, cum_s2: f64| Sample {
            t: state.t,
            f1,
            f2: snap.f2,
            a1: snap.a1,
            s1: snap.s1,
            s2: snap.s2,
            cum_s1,
            cum_s2,
            sup_ut: snap.sup_ut,
            sup_vt: snap.sup_vt,
            support_radius: support_radius(grid, state),
            energy_u: grid.energy(&state.u, &state.ut),
            energy_v: grid.energy(&state.v, &state.vt),
        };
    let mut samples = vec![make_sample(&state, &snap, f1, cum_s1, cum_s2)];
    let mut last_sup = (snap.sup_ut, snap.sup_vt);
    let mut steps = 0usize;
    let stop;
    loop {
        if state.t >= config.t_max * (1.0 - 1e-14) {
            stop = StopReason::Horizon;
            break;
        }
        let mut dt = dt_base.min(config.t_max - state.t);
        if stepper.sources {
            let stiff = snap
                .sup_ut
                .powf(params.q - 1.0)
                .max(snap.sup_vt.powf(params.p - 1.0));
            if stiff > 0.0 {
                dt = dt.min(STIFFNESS_CAP / stiff);
            }
        }
        let next = stepper.rk4(&state, dt);
        steps += 1;
        let finite = next.is_finite();
        let next_snap = if finite {
            snapshot(grid, &next, params, stepper.sources)
        } else {
            Snapshot {
                a1: f64::NAN,
                f2: f64::NAN,
                s1: f64::NAN,
                s2: f64::NAN,
                sup_ut: f64::INFINITY,
                sup_vt: f64::INFINITY,
            }
        };
        f1 += 0.5 * dt * (snap.a1 + next_snap.a1);
        cum_s1 += 0.5 * dt * (snap.s1 + next_snap.s1);
        cum_s2 += 0.5 * dt * (snap.s2 + next_snap.s2);
        state = next;
        snap = next_snap;

        let crossed =
            snap.sup_ut > config.robust_threshold || snap.sup_vt > config.robust_threshold;
        let moved = |now: f64, before: f64| {
            now > before * ADAPTIVE_SAMPLE_RATIO || now * ADAPTIVE_SAMPLE_RATIO < before
        };
        let at_end = state.t >= config.t_max * (1.0 - 1e-14);
        if !finite
            || crossed
            || at_end
            || steps.is_multiple_of(config.track_every)
            || moved(snap.sup_ut, last_sup.0)
            || moved(snap.sup_vt, last_sup.1)
        {
            samples.push(make_sample(&state, &snap, f1, cum_s1, cum_s2));
            last_sup = (snap.sup_ut, snap.sup_vt);
        }
        if !finite {
            stop = StopReason::NonFinite;
            break;
        }
        if crossed {
            stop = StopReason::Threshold;
            break;
        }
    }
    Ok(FunctionalTrace {
        blowup: detect_blowup(&samples, config.blowup_threshold),
        blowup_robust: detect_blowup(&samples, config.robust_threshold),
        samples,
        stop,
        steps,
        dx: grid.dx,
        dt: dt_base,
        data_u,
        data_v,
        damping: mode.damping(),
    })
}
