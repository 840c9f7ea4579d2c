//! Dense complex linear algebra on small matrices: Kronecker products,
//! LU solves, a Hermitian eigensolver and the matrix exponential.

use ndarray::{s, Array2, Axis};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type CMatrix<R> = Array2<Complex<R>>;

pub fn identity<R: Real>(dim: usize) -> CMatrix<R> {
    Array2::eye(dim)
}

/// Conjugate transpose.
pub fn adjoint<R: Real>(m: &CMatrix<R>) -> CMatrix<R> {
    m.t().mapv(|z| z.conj())
}

pub fn trace<R: Real>(m: &CMatrix<R>) -> Complex<R> {
    m.diag().iter().fold(Complex::zero(), |acc, &z| acc + z)
}

/// `A ⊗ B`, with `B` varying fastest.
pub fn kron<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> CMatrix<R> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij.is_zero() {
                continue;
            }
            let mut block = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.zip_mut_with(b, |o, &bv| *o = aij * bv);
        }
    }
    out
}

pub fn max_abs<R: Real>(m: &CMatrix<R>) -> R {
    m.iter().fold(R::zero(), |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> R {
    a.iter().zip(b.iter()).fold(R::zero(), |acc, (x, y)| acc.max((*x - *y).norm()))
}

/// Max |m_ij − conj(m_ji)|.
pub fn hermiticity_defect<R: Real>(m: &CMatrix<R>) -> R {
    let n = m.nrows();
    let mut worst = R::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Induced 1-norm (max column sum).
pub fn one_norm<R: Real>(m: &CMatrix<R>) -> R {
    m.axis_iter(Axis(1)).map(|col| col.iter().fold(R::zero(), |acc, z| acc + z.norm())).fold(R::zero(), R::max)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> Result<CMatrix<R>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if b.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let (p, pivot) =
            (k..n)
                .map(|i| (i, lu[[i, k]].norm()))
                .fold((k, R::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot == R::zero() || !pivot.is_finite() {
            return Err(Error::Stability("singular matrix in LU solve".into()));
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [p, j]);
            }
        }
        let inv = Complex::<R>::one() / lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] * inv;
            if f.is_zero() {
                continue;
            }
            lu[[i, k]] = f;
            for j in k + 1..n {
                let v = lu[[k, j]];
                lu[[i, j]] -= f * v;
            }
            for j in 0..x.ncols() {
                let v = x[[k, j]];
                x[[i, j]] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = Complex::<R>::one() / lu[[k, k]];
        for j in 0..x.ncols() {
            let mut acc = x[[k, j]];
            for i in k + 1..n {
                acc -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = acc * inv;
        }
    }
    Ok(x)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Σ c_i M_i
fn combine<R: Real>(terms: &[(&CMatrix<R>, Complex<R>)]) -> CMatrix<R> {
    let mut out = Array2::zeros(terms[0].0.dim());
    for (m, c) in terms {
        out.zip_mut_with(*m, |o, &x| *o += x * *c);
    }
    out
}

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by degree-13 Padé approximation with scaling and squaring.
pub fn expm<R: Real>(a: &CMatrix<R>) -> Result<CMatrix<R>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let norm = one_norm(a).to_f64_lossy();
    if !norm.is_finite() {
        return Err(Error::Overflow("non-finite matrix in expm".into()));
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = Complex::from(R::lit(0.5f64.powi(squarings)));
    let a = a.mapv(|z| z * scale);

    let b: Vec<Complex<R>> = PADE13.iter().map(|&x| Complex::from(R::lit(x))).collect();
    let id = identity::<R>(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let u_inner = combine(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])]);
    let u_tail = combine(&[(&a6, b[7]), (&a4, b[5]), (&a2, b[3]), (&id, b[1])]);
    let u = a.dot(&(a6.dot(&u_inner) + u_tail));
    let v_inner = combine(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])]);
    let v = a6.dot(&v_inner) + combine(&[(&a6, b[6]), (&a4, b[4]), (&a2, b[2]), (&id, b[0])]);

    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow("matrix exponential overflowed".into()));
    }
    Ok(r)
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are the
/// matching eigenvectors. Only the Hermitian part of `m` is used.
pub fn eigh<R: Real>(m: &CMatrix<R>) -> Result<(Vec<R>, CMatrix<R>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    let half = R::lit(0.5);
    let mut a = (m + &adjoint(m)).mapv(|z| z * half);
    let mut v = identity::<R>(n);
    let scale = max_abs(&a).max(R::min_positive_value());

    for _sweep in 0..100 {
        let mut off = R::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() <= R::epsilon() * scale * R::lit(0.1) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                let r = apq.norm();
                if r <= R::min_positive_value() {
                    continue;
                }
                let phase = apq / r;
                let (app, aqq) = (a[[p, p]].re, a[[q, q]].re);
                let theta = (aqq - app) / (r + r);
                let t = theta.signum() / (theta.abs() + (theta * theta + R::one()).sqrt());
                let cs = R::one() / (t * t + R::one()).sqrt();
                let sn = t * cs;
                let cz = Complex::from(cs);
                let sz = Complex::from(sn);
                // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane.
                let ph_c = phase.conj();
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = cz * akp - sz * ph_c * akq;
                    a[[k, q]] = sz * akp + cz * ph_c * akq;
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = cz * vkp - sz * ph_c * vkq;
                    v[[k, q]] = sz * vkp + cz * ph_c * vkq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = cz * apk - sz * phase * aqk;
                    a[[q, k]] = sz * apk + cz * phase * aqk;
                }
                a[[p, q]] = Complex::zero();
                a[[q, p]] = Complex::zero();
                a[[p, p]] = Complex::from(a[[p, p]].re);
                a[[q, q]] = Complex::from(a[[q, q]].re);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].re.partial_cmp(&a[[j, j]].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[[i, i]].re).collect();
    let mut vecs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vecs.column_mut(dst).assign(&v.column(src));
    }
    Ok((values, vecs))
}
