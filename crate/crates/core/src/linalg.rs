//! Dense complex linear algebra used by the density-matrix and Schmidt code.
//!
//! Hermitian spectra come from a cyclic Jacobi solver implemented here. The
//! singular value decomposition of the coefficient matrix is delegated to
//! `nalgebra`, so the two routes to the occupation spectrum stay independent.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_error(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMat::identity(n, n)))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: CMat,
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot and then applies the
/// real symmetric Jacobi rotation, so the accumulated transform stays unitary.
pub fn eigh(m: &CMat) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    let n = m.nrows();
    let mut a = (m + m.adjoint()).scale(0.5);
    let mut v = CMat::identity(n, n);
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let g_pp = c(cs, 0.0);
                let g_pq = c(sn, 0.0);
                let g_qp = phase.conj() * (-sn);
                let g_qq = phase.conj() * cs;
                // a <- a * G (columns p, q)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * g_pp + aiq * g_qp;
                    a[(i, q)] = aip * g_pq + aiq * g_qq;
                }
                // a <- G^dagger * a (rows p, q)
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = g_pp.conj() * apj + g_qp.conj() * aqj;
                    a[(q, j)] = g_pq.conj() * apj + g_qq.conj() * aqj;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = c(a[(p, p)].re, 0.0);
                a[(q, q)] = c(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * g_pp + viq * g_qp;
                    v[(i, q)] = vip * g_pq + viq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMat::from_fn(n, n, |r, col| v[(r, order[col])]);
    Ok(HermitianEigen { values, vectors })
}

/// Full singular value decomposition `m = u * diag(s) * v^dagger` with square
/// unitary `u` and `v` and singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v: CMat,
}

pub fn svd_full(m: &CMat) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    let dec = nalgebra::linalg::SVD::try_new(m.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Decomposition("SVD failed to converge".into()))?;
    let u_thin = dec
        .u
        .ok_or_else(|| Error::Decomposition("SVD returned no U".into()))?;
    let v_thin = dec
        .v_t
        .ok_or_else(|| Error::Decomposition("SVD returned no V".into()))?
        .adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let singular_values = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u_sorted = CMat::from_fn(rows, k, |r, col| u_thin[(r, order[col])]);
    let v_sorted = CMat::from_fn(cols, k, |r, col| v_thin[(r, order[col])]);
    Ok(Svd {
        u: complete_orthonormal_columns(&u_sorted),
        singular_values,
        v: complete_orthonormal_columns(&v_sorted),
    })
}

/// Extends a matrix with orthonormal columns to a square unitary by
/// Gram-Schmidt over the standard basis.
pub fn complete_orthonormal_columns(m: &CMat) -> CMat {
    let (rows, cols) = m.shape();
    let mut basis: Vec<nalgebra::DVector<Complex64>> =
        (0..cols).map(|j| m.column(j).into_owned()).collect();
    for e in 0..rows {
        if basis.len() == rows {
            break;
        }
        let mut cand = nalgebra::DVector::<Complex64>::zeros(rows);
        cand[e] = ONE;
        // two passes of Gram-Schmidt for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&cand);
                cand -= b * proj;
            }
        }
        let norm = cand.norm();
        if norm > 1e-6 {
            basis.push(cand / c(norm, 0.0));
        }
    }
    CMat::from_columns(&basis)
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Restriction `B^dagger m B` of an operator to the span of the orthonormal
/// columns of `basis`.
pub fn restrict(m: &CMat, basis: &CMat) -> CMat {
    basis.adjoint() * m * basis
}


/// Row-major `[re, im]` pair layout used for matrices in JSON.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &MatrixRows) -> Result<CMat> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// Serde adapter for `CMat` fields in the row-major pair layout.
pub mod serde_matrix {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = MatrixRows::deserialize(d)?;
        matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
