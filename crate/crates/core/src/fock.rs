//! Truncated Fock space, ladder operators and the states used as initial
//! conditions: coherent states and displaced number states.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

/// Tail population above which a constructed state is rejected.
pub const TRUNCATION_TOLERANCE: f64 = 1e-10;

/// Deviation from unit norm / unit trace / Hermiticity tolerated on construction.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// Span{|0⟩, …, |D−1⟩}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return domain(format!("Fock dimension must be at least 2, got {dim}"));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn check(&self, other: &FockSpace) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Annihilation,
    Creation,
    Number,
    Displacement,
    Hamiltonian,
    General,
}

/// A D×D operator tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<R: Real> {
    space: FockSpace,
    matrix: CMatrix<R>,
    kind: OperatorKind,
}

impl<R: Real> Operator<R> {
    pub fn new(space: FockSpace, matrix: CMatrix<R>, kind: OperatorKind) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: r });
        }
        if c != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: c });
        }
        Ok(Self { space, matrix, kind })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<R> {
        self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn adjoint(&self) -> Self {
        let kind = match self.kind {
            OperatorKind::Annihilation => OperatorKind::Creation,
            OperatorKind::Creation => OperatorKind::Annihilation,
            OperatorKind::Displacement => OperatorKind::General,
            k => k,
        };
        Self { space: self.space, matrix: linalg::adjoint(&self.matrix), kind }
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &Operator<R>) -> Result<Self> {
        self.space.check(&rhs.space)?;
        Ok(Self { space: self.space, matrix: self.matrix.dot(&rhs.matrix), kind: OperatorKind::General })
    }

    /// `[self, rhs]`.
    pub fn commutator(&self, rhs: &Operator<R>) -> Result<Self> {
        self.space.check(&rhs.space)?;
        let m = self.matrix.dot(&rhs.matrix) - rhs.matrix.dot(&self.matrix);
        Ok(Self { space: self.space, matrix: m, kind: OperatorKind::General })
    }

    pub fn apply(&self, psi: &PureState<R>) -> Result<Array1<Complex<R>>> {
        self.space.check(&psi.space)?;
        Ok(self.matrix.dot(&psi.amplitudes))
    }
}

/// `a`, with `a|n⟩ = √n |n−1⟩`.
pub fn annihilation_op<R: Real>(space: FockSpace) -> Operator<R> {
    let d = space.dim();
    let mut m = Array2::zeros((d, d));
    for n in 1..d {
        m[[n - 1, n]] = Complex::from(R::from_usize_lossy(n).sqrt());
    }
    Operator { space, matrix: m, kind: OperatorKind::Annihilation }
}

/// `a†`, the exact adjoint of [`annihilation_op`].
pub fn creation_op<R: Real>(space: FockSpace) -> Operator<R> {
    annihilation_op(space).adjoint()
}

/// `a†a = diag(0, 1, …, D−1)`.
pub fn number_op<R: Real>(space: FockSpace) -> Operator<R> {
    let d = space.dim();
    let diag: Array1<Complex<R>> = (0..d).map(|n| Complex::from(R::from_usize_lossy(n))).collect();
    Operator { space, matrix: Array2::from_diag(&diag), kind: OperatorKind::Number }
}

/// `D(α) = exp(α a† − α* a)` on the truncated space.
///
/// The generator is anti-Hermitian, so it is exponentiated through the
/// eigen-decomposition of the Hermitian matrix `i(α a† − α* a)`; the result is
/// unitary to working precision even when |α| is large.
pub fn displacement_op<R: Real>(space: FockSpace, alpha: Complex<R>) -> Result<Operator<R>> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return domain("displacement amplitude must be finite");
    }
    let a = annihilation_op::<R>(space);
    let a_dag = linalg::adjoint(a.matrix());
    let gen = a_dag.mapv(|z| z * alpha) - a.matrix().mapv(|z| z * alpha.conj());
    let herm = gen.mapv(|z| z * Complex::i());
    let (vals, vecs) = linalg::eigh(&herm)?;
    // exp(G) = exp(−i H) with H = iG.
    let phases: Array1<Complex<R>> = vals.iter().map(|&l| Complex::from_polar(R::one(), -l)).collect();
    let scaled = &vecs * &phases.view().insert_axis(ndarray::Axis(0));
    let m = scaled.dot(&linalg::adjoint(&vecs));
    Ok(Operator { space, matrix: m, kind: OperatorKind::Displacement })
}

/// Normalized state vector in a Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<R: Real> {
    space: FockSpace,
    amplitudes: Array1<Complex<R>>,
}

impl<R: Real> PureState<R> {
    /// Wraps amplitudes, requiring unit norm to within [`STATE_TOLERANCE`].
    pub fn new(space: FockSpace, amplitudes: Array1<Complex<R>>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: amplitudes.len() });
        }
        let norm: R = amplitudes.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr());
        if (norm - R::one()).abs() > R::tolerance(STATE_TOLERANCE) {
            return domain(format!("state norm² is {norm}, expected 1"));
        }
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &Array1<Complex<R>> {
        &self.amplitudes
    }

    /// |c_{D−1}|².
    pub fn tail_population(&self) -> R {
        self.amplitudes[self.space.dim() - 1].norm_sqr()
    }

    /// True when the top level carries more than [`TRUNCATION_TOLERANCE`].
    pub fn truncation_warning(&self) -> bool {
        self.tail_population() > R::lit(TRUNCATION_TOLERANCE)
    }

    pub fn inner(&self, other: &PureState<R>) -> Result<Complex<R>> {
        self.space.check(&other.space)?;
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y))
    }
}

/// |n⟩.
pub fn fock_state<R: Real>(space: FockSpace, n: usize) -> Result<PureState<R>> {
    if n >= space.dim() {
        return Err(Error::Index { index: n, len: space.dim() });
    }
    let mut amps = Array1::zeros(space.dim());
    amps[n] = Complex::one();
    PureState::new(space, amps)
}

/// |α⟩ = D(α)|0⟩.
pub fn coherent_state<R: Real>(space: FockSpace, alpha: Complex<R>) -> Result<PureState<R>> {
    displaced_number_state(space, alpha, 0)
}

/// |α, n⟩ = D(α)|n⟩.
///
/// Fails with [`Error::Truncation`] when the last Fock level carries more than
/// [`TRUNCATION_TOLERANCE`] of the population; enlarge the space in that case.
pub fn displaced_number_state<R: Real>(space: FockSpace, alpha: Complex<R>, n: usize) -> Result<PureState<R>> {
    if n >= space.dim() {
        return Err(Error::Index { index: n, len: space.dim() });
    }
    let d = displacement_op(space, alpha)?;
    let amps = d.matrix().column(n).to_owned();
    let norm = amps.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    let amps = amps.mapv(|z| z / norm);
    let psi = PureState { space, amplitudes: amps };
    let tail = psi.tail_population();
    if tail > R::lit(TRUNCATION_TOLERANCE) {
        return Err(Error::Truncation(format!(
            "|α={alpha}, n={n}⟩ leaves population {tail:e} in level {} of a {}-level space",
            space.dim() - 1,
            space.dim()
        )));
    }
    Ok(psi)
}

/// Hermitian, unit-trace D×D matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<R: Real> {
    space: FockSpace,
    matrix: CMatrix<R>,
}

impl<R: Real> DensityMatrix<R> {
    /// Validates Hermiticity and trace to [`STATE_TOLERANCE`].
    pub fn new(space: FockSpace, matrix: CMatrix<R>) -> Result<Self> {
        Self::with_tolerance(space, matrix, STATE_TOLERANCE)
    }

    /// As [`DensityMatrix::new`] with an explicit tolerance, for states that
    /// come out of a numerical integration.
    pub fn with_tolerance(space: FockSpace, matrix: CMatrix<R>, tol: f64) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != space.dim() || c != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: if r != space.dim() { r } else { c },
            });
        }
        let tol = R::tolerance(tol);
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > tol {
            return domain(format!("density matrix not Hermitian (defect {herm:e})"));
        }
        let tr = linalg::trace(&matrix);
        if (tr - Complex::one()).norm() > tol {
            return domain(format!("density matrix trace is {tr}, expected 1"));
        }
        Ok(Self { space, matrix })
    }

    pub(crate) fn from_parts_unchecked(space: FockSpace, matrix: CMatrix<R>) -> Self {
        Self { space, matrix }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<R> {
        self.matrix
    }

    pub fn trace(&self) -> Complex<R> {
        linalg::trace(&self.matrix)
    }

    pub fn hermiticity_defect(&self) -> R {
        linalg::hermiticity_defect(&self.matrix)
    }

    /// Population of the last Fock level.
    pub fn tail_population(&self) -> R {
        let d = self.space.dim();
        self.matrix[[d - 1, d - 1]].re
    }

    pub fn eigenvalues(&self) -> Result<Vec<R>> {
        Ok(linalg::eigh(&self.matrix)?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<R> {
        Ok(self.eigenvalues()?[0])
    }
}

/// |ψ⟩⟨ψ|.
pub fn density_from_pure<R: Real>(psi: &PureState<R>) -> DensityMatrix<R> {
    let v = psi.amplitudes();
    let d = v.len();
    let mut m = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = v[i] * v[j].conj();
        }
    }
    DensityMatrix { space: psi.space(), matrix: m }
}
