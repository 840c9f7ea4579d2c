//! Diagonal anharmonic Hamiltonian `H = ω₀ a†a + b (a†a)^k` and the
//! timescales that follow from its spectrum.

use ndarray::{Array1, Array2};
use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::fock::{FockSpace, Operator, OperatorKind};
use crate::scalar::Real;

/// Default oscillator frequency in atomic units.
pub const DEFAULT_OMEGA0: f64 = 0.15 * std::f64::consts::PI / 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian<R: Real> {
    space: FockSpace,
    omega0: R,
    b: R,
    order: u32,
    energies: Vec<R>,
}

/// Builds `ω₀ n + b n^k` for `k ∈ {1, 2, 3}`.
pub fn build_hamiltonian<R: Real>(space: FockSpace, omega0: R, b: R, order: u32) -> Result<DiagonalHamiltonian<R>> {
    if !(omega0 > R::zero()) || !omega0.is_finite() {
        return domain(format!("ω₀ must be positive, got {omega0}"));
    }
    if !b.is_finite() {
        return domain("nonlinearity must be finite");
    }
    if !(1..=3).contains(&order) {
        return domain(format!("nonlinearity order must be 1, 2 or 3, got {order}"));
    }
    let energies = (0..space.dim())
        .map(|n| {
            let x = R::from_usize_lossy(n);
            omega0 * x + b * x.powi(order as i32)
        })
        .collect();
    Ok(DiagonalHamiltonian { space, omega0, b, order, energies })
}

impl<R: Real> DiagonalHamiltonian<R> {
    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn omega0(&self) -> R {
        self.omega0
    }

    pub fn b(&self) -> R {
        self.b
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn energies(&self) -> &[R] {
        &self.energies
    }

    pub fn energy(&self, n: usize) -> Result<R> {
        self.energies.get(n).copied().ok_or(Error::Index { index: n, len: self.energies.len() })
    }

    /// Largest minus smallest eigenvalue.
    pub fn spectral_spread(&self) -> R {
        let (lo, hi) =
            self.energies.iter().fold((R::infinity(), R::neg_infinity()), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        hi - lo
    }

    pub fn operator(&self) -> Operator<R> {
        let diag: Array1<Complex<R>> = self.energies.iter().map(|&e| Complex::from(e)).collect();
        Operator::new(self.space, Array2::from_diag(&diag), OperatorKind::Hamiltonian).expect("diagonal matches space")
    }

    /// `2π / E'(n₀)` from the closed-form derivative.
    pub fn classical_period(&self, n0: usize) -> R {
        let n = R::from_usize_lossy(n0);
        let k = self.order as i32;
        let de = self.omega0 + self.b * R::from_i32(k).unwrap() * n.powi(k - 1);
        R::TAU() / de
    }
}

/// Classical, revival and (cubic case only) super-revival periods.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timescales<R: Real> {
    pub n0: usize,
    pub t_cl: R,
    pub t_rev: R,
    pub t_sr: Option<R>,
}

/// Mean excitation of |α, n⟩ rounded to the nearest level.
pub fn default_n0<R: Real>(alpha: Complex<R>, n: usize) -> usize {
    let mean = alpha.norm_sqr() + R::from_usize_lossy(n);
    mean.round().to_usize().unwrap_or(0)
}

/// Timescales from analytic derivatives of `E_n` at `n₀`:
/// `T_cl = 2π/E'`, `t_rev = 2π/(E''/2)`, `t_sr = 2π/(E'''/6)`.
pub fn timescales_closed_form<R: Real>(h: &DiagonalHamiltonian<R>, n0: usize) -> Result<Timescales<R>> {
    let (b, w) = (h.b, h.omega0);
    if b == R::zero() {
        return domain("revival timescales are undefined for a harmonic spectrum (b = 0)");
    }
    let n = R::from_usize_lossy(n0);
    let tau = R::TAU();
    let two = R::lit(2.0);
    match h.order {
        1 => domain("order 1 gives a linear spectrum with no revivals"),
        2 => Ok(Timescales { n0, t_cl: tau / (w + two * b * n), t_rev: tau / b.abs(), t_sr: None }),
        _ => {
            if n0 == 0 {
                return domain("cubic revival time needs n₀ ≥ 1");
            }
            Ok(Timescales {
                n0,
                t_cl: tau / (w + R::lit(3.0) * b * n * n),
                t_rev: tau / (R::lit(3.0) * b * n).abs(),
                t_sr: Some(tau / b.abs()),
            })
        }
    }
}

/// Timescales from central finite differences of the computed spectrum.
/// Requires `2 ≤ n₀ ≤ D−3` so every stencil point exists.
pub fn timescales_finite_difference<R: Real>(h: &DiagonalHamiltonian<R>, n0: usize) -> Result<Timescales<R>> {
    let d = h.space.dim();
    if n0 < 2 || n0 + 3 > d {
        return Err(Error::Index { index: n0, len: d.saturating_sub(2) });
    }
    let e = |i: usize| h.energies[i];
    let half = R::lit(0.5);
    let d1 = (e(n0 + 1) - e(n0 - 1)) * half;
    let d2 = e(n0 + 1) - R::lit(2.0) * e(n0) + e(n0 - 1);
    let d3 = (e(n0 + 2) - R::lit(2.0) * e(n0 + 1) + R::lit(2.0) * e(n0 - 1) - e(n0 - 2)) * half;
    let scale = h.energies.iter().fold(R::zero(), |m, x| m.max(x.abs()));
    let negligible = R::epsilon() * R::lit(256.0) * scale;
    if d2.abs() <= negligible {
        return domain("second difference of the spectrum vanishes; no revival time");
    }
    let tau = R::TAU();
    let t_sr = if d3.abs() <= negligible { None } else { Some(tau / (d3 / R::lit(6.0)).abs()) };
    Ok(Timescales { n0, t_cl: tau / d1, t_rev: tau / (d2 * half).abs(), t_sr })
}
