//! Expectation values and state diagnostics.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, Operator};
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

/// Everything recorded at one time point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableRecord<R: Real> {
    pub t: R,
    /// ⟨a⟩
    pub a: Complex<R>,
    /// ⟨a†a⟩
    pub n_expect: R,
    pub trace: R,
    /// Tr ρ²
    pub purity: R,
    /// max |ρ − ρ†|
    pub herm_defect: R,
}

/// `Tr(ρ O)`.
pub fn expect_operator<R: Real>(rho: &DensityMatrix<R>, op: &Operator<R>) -> Result<Complex<R>> {
    let d = rho.space().dim();
    if op.space().dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: op.space().dim() });
    }
    let (r, o) = (rho.matrix(), op.matrix());
    let mut acc = Complex::zero();
    for i in 0..d {
        for j in 0..d {
            acc += r[[i, j]] * o[[j, i]];
        }
    }
    Ok(acc)
}

/// ⟨a⟩ = Σ √(m+1) ρ_{m+1,m}.
pub fn expect_a<R: Real>(rho: &CMatrix<R>) -> Complex<R> {
    (0..rho.nrows().saturating_sub(1))
        .fold(Complex::zero(), |acc, m| acc + rho[[m + 1, m]] * R::from_usize_lossy(m + 1).sqrt())
}

/// ⟨a†a⟩ = Σ m ρ_mm.
pub fn expect_n<R: Real>(rho: &CMatrix<R>) -> R {
    (0..rho.nrows()).fold(R::zero(), |acc, m| acc + rho[[m, m]].re * R::from_usize_lossy(m))
}

/// Tr ρ².
pub fn purity<R: Real>(rho: &CMatrix<R>) -> R {
    let d = rho.nrows();
    let mut acc = R::zero();
    for i in 0..d {
        for j in 0..d {
            acc += (rho[[i, j]] * rho[[j, i]]).re;
        }
    }
    acc
}

pub fn observe_matrix<R: Real>(t: R, rho: &CMatrix<R>) -> ObservableRecord<R> {
    ObservableRecord {
        t,
        a: expect_a(rho),
        n_expect: expect_n(rho),
        trace: linalg::trace(rho).re,
        purity: purity(rho),
        herm_defect: linalg::hermiticity_defect(rho),
    }
}

pub fn observe<R: Real>(t: R, rho: &DensityMatrix<R>) -> ObservableRecord<R> {
    observe_matrix(t, rho.matrix())
}
