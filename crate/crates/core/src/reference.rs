//! Closed-form results used to check the numerical propagators.
//!
//! Nothing here calls into the operator or propagator code: matrix elements,
//! spectra and sums are evaluated from their analytic expressions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::PureState;
use crate::hamiltonian::DiagonalHamiltonian;

/// Largest Fock index accepted by [`displacement_matrix_element`].
pub const MAX_FACTORIAL_INDEX: usize = 170;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub t: f64,
    pub a_expect: Complex64,
}

/// ⟨a(t)⟩ for a coherent state of a damped harmonic oscillator:
/// `α e^{−iω₀t} e^{−γ(N+1)t/2}`.
pub fn damped_linear_expect_a(alpha: Complex64, omega0: f64, gamma: f64, n_thermal: f64, t: f64) -> Complex64 {
    alpha * Complex64::from_polar(1.0, -omega0 * t) * (-gamma * (n_thermal + 1.0) * t / 2.0).exp()
}

/// ⟨a(t)⟩ for a coherent state under `H = ω₀n + b n²`:
/// `α e^{−i(ω₀+b)t} exp(|α|²(e^{−2ibt} − 1))`.
pub fn kerr_expect_a_closed_form(alpha: Complex64, omega0: f64, b1: f64, t: f64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -(omega0 + b1) * t);
    let inner = Complex64::from_polar(1.0, -2.0 * b1 * t) - 1.0;
    alpha * phase * (inner * alpha.norm_sqr()).exp()
}

/// `Σ_n c̄_n c_{n+1} √(n+1) e^{−i(E_{n+1} − E_n)t}` with `E_n = ω₀n + b nᵏ`.
pub fn diagonal_h_fock_sum_expect_a(state: &PureState<f64>, h: &DiagonalHamiltonian<f64>, t: f64) -> Result<Complex64> {
    let d = h.space().dim();
    let c = state.amplitudes();
    if c.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: c.len() });
    }
    let (w, b, k) = (h.omega0(), h.b(), h.order() as i32);
    let energy = |n: usize| w * n as f64 + b * (n as f64).powi(k);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..d - 1 {
        let gap = energy(n + 1) - energy(n);
        acc += c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt() * Complex64::from_polar(1.0, -gap * t);
    }
    Ok(acc)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence in `n`.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨m|D(α)|n⟩` of the untruncated displacement operator.
pub fn displacement_matrix_element(m: usize, n: usize, alpha: Complex64) -> Result<Complex64> {
    if m > MAX_FACTORIAL_INDEX || n > MAX_FACTORIAL_INDEX {
        return Err(Error::Overflow(format!(
            "matrix element ⟨{m}|D|{n}⟩ needs factorials beyond {MAX_FACTORIAL_INDEX}!"
        )));
    }
    if m < n {
        return Ok(displacement_matrix_element(n, m, -alpha)?.conj());
    }
    let x = alpha.norm_sqr();
    let ratio = (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
    Ok(alpha.powu((m - n) as u32) * ratio * (-x / 2.0).exp() * laguerre(n, m - n, x))
}
