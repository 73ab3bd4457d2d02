use crate::error::{Error, Result};
use crate::testfn::{ln_phi, sphere_area};

/// Spatial grid with a finite-volume Laplacian.
///
/// For `n = 1` the grid covers `[-X, X]` uniformly. For `n ≥ 2` it covers
/// radii `[0, X]` and the operator is `r^{1-n} ∂_r (r^{n-1} ∂_r)` written in
/// flux form. Cell masses double as quadrature weights, which makes the
/// discrete operator self-adjoint for the weighted sum and conserves the
/// discrete energy of the free wave equation exactly in semi-discrete form.
#[derive(Debug, Clone)]
pub struct Grid {
    pub n: u32,
    pub dx: f64,
    /// Coordinates (`n = 1`) or radii (`n ≥ 2`).
    pub x: Vec<f64>,
    /// Quadrature weights, including the sphere area for `n ≥ 2`.
    pub mass: Vec<f64>,
    /// Interface coefficient between `i` and `i + 1`.
    flux: Vec<f64>,
    /// Points held at zero (outer Dirichlet ends).
    fixed: Vec<bool>,
    /// `ln Φ(|x_i|)`.
    pub ln_phi: Vec<f64>,
}

impl Grid {
    pub fn new(n: u32, nx: usize, half_width: f64) -> Result<Self> {
        if nx < 3 || !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid needs nx >= 3 and a positive extent, got nx = {nx}, extent = {half_width}"
            )));
        }
        let mut fixed = vec![false; nx];
        fixed[nx - 1] = true;
        let (dx, x, mass, flux) = if n == 1 {
            let dx = 2.0 * half_width / (nx - 1) as f64;
            let x: Vec<f64> = (0..nx).map(|i| -half_width + i as f64 * dx).collect();
            let mut mass = vec![dx; nx];
            mass[0] = 0.5 * dx;
            mass[nx - 1] = 0.5 * dx;
            fixed[0] = true;
            (dx, x, mass, vec![1.0; nx - 1])
        } else {
            let dx = half_width / (nx - 1) as f64;
            let nf = n as f64;
            let area = sphere_area(n - 1);
            let x: Vec<f64> = (0..nx).map(|i| i as f64 * dx).collect();
            let edge = |i: usize| (i as f64 + 0.5) * dx;
            let mass = (0..nx)
                .map(|i| {
                    let hi = if i + 1 == nx { x[i] } else { edge(i) };
                    let lo = if i == 0 { 0.0 } else { edge(i - 1) };
                    area * (hi.powf(nf) - lo.powf(nf)) / nf
                })
                .collect();
            let flux = (0..nx - 1)
                .map(|i| area * edge(i).powi(n as i32 - 1))
                .collect();
            (dx, x, mass, flux)
        };
        let ln_phi = x
            .iter()
            .map(|xi| ln_phi(n, xi.abs()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid {
            n,
            dx,
            x,
            mass,
            flux,
            fixed,
            ln_phi,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed[i]
    }

    /// Adds `Δ_h u` into `out`.
    pub fn add_laplacian(&self, u: &[f64], out: &mut [f64]) {
        let nx = self.len();
        let dx = self.dx;
        for i in 0..nx {
            if self.fixed[i] {
                continue;
            }
            let mut s = 0.0;
            if i + 1 < nx {
                s += self.flux[i] * (u[i + 1] - u[i]);
            }
            if i > 0 {
                s -= self.flux[i - 1] * (u[i] - u[i - 1]);
            }
            out[i] += s / (self.mass[i] * dx);
        }
    }

    /// `½ Σ m_i w_i² + ½ Σ c_{i+½} (u_{i+1} - u_i)² / dx`.
    pub fn energy(&self, u: &[f64], w: &[f64]) -> f64 {
        let kinetic: f64 = self.mass.iter().zip(w).map(|(m, w)| m * w * w).sum();
        let potential: f64 = self
            .flux
            .iter()
            .enumerate()
            .map(|(i, c)| c * (u[i + 1] - u[i]).powi(2))
            .sum::<f64>()
            / self.dx;
        0.5 * (kinetic + potential)
    }

    /// `Σ m_i f_i`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.mass.iter().enumerate().map(|(i, m)| m * f(i)).sum()
    }
}
