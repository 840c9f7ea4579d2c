//! Gaussian system–bath coupling profile and thermal occupation.
//!
//! The master equation consumes γ and N directly; these helpers relate them
//! to the microscopic coupling `g_j = √(γ/2π) exp[−K(ω₀ − ω_j)²]` and to a
//! bath temperature (atomic units, k_B = 1).

use crate::error::{domain, Result};
use crate::scalar::Real;

pub const DEFAULT_K_SHAPE: f64 = 500.0;
pub const DEFAULT_GRID_POINTS: usize = 81;

#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec<R: Real> {
    pub gamma: R,
    pub k_shape: R,
    pub omega0: R,
    pub mode_grid: Vec<R>,
}

impl<R: Real> BathSpec<R> {
    pub fn new(gamma: R, k_shape: R, omega0: R, mode_grid: Vec<R>) -> Result<Self> {
        if !(gamma >= R::zero()) {
            return domain(format!("damping rate must be non-negative, got {gamma}"));
        }
        if !(k_shape > R::zero()) {
            return domain(format!("shape parameter must be positive, got {k_shape}"));
        }
        if mode_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("mode grid must be strictly increasing");
        }
        Ok(Self { gamma, k_shape, omega0, mode_grid })
    }

    /// 81 uniform modes on `[−2ω₀, 2ω₀]` with `K = 500`.
    pub fn with_default_grid(gamma: R, omega0: R) -> Result<Self> {
        let n = DEFAULT_GRID_POINTS;
        let lo = -omega0 * R::lit(2.0);
        let step = omega0 * R::lit(4.0) / R::from_usize_lossy(n - 1);
        let grid = (0..n).map(|j| lo + step * R::from_usize_lossy(j)).collect();
        Self::new(gamma, R::lit(DEFAULT_K_SHAPE), omega0, grid)
    }

    /// Coupling at a single bath frequency.
    pub fn coupling(&self, omega: R) -> R {
        let detune = self.omega0 - omega;
        (self.gamma / R::TAU()).sqrt() * (-self.k_shape * detune * detune).exp()
    }
}

/// `(ω_j, g_j)` at every grid frequency.
pub fn coupling_profile<R: Real>(spec: &BathSpec<R>) -> Vec<(R, R)> {
    spec.mode_grid.iter().map(|&w| (w, spec.coupling(w))).collect()
}

/// Bose–Einstein occupation `1 / (e^{ω₀/T} − 1)`; zero at `T = 0`.
pub fn thermal_occupation<R: Real>(omega0: R, temperature: R) -> R {
    if temperature <= R::zero() {
        return R::zero();
    }
    let x = omega0 / temperature;
    R::one() / x.exp_m1()
}
