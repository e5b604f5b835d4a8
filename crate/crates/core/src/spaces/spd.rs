//! The space Pos_N of symmetric positive definite matrices with the
//! affine-invariant metric, basepoint I, and GL_N acting by P -> g P g^T.
//!
//! Points are held in eigenform (orthogonal basis, log-eigenvalues), so
//! orbit points of long cocycles stay representable after their dense
//! entries have left the f64 range. Whitened-matrix spectra are computed
//! through the log-domain SVD; a dense Cholesky route exists as an
//! independent cross-check for bounded points.

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, jacobi_eigen, log_svd, scaled_orthogonal_log_sigmas, LogMat, Mat, JACOBI_TOL,
};

/// Relative eigenvalue floor: lambda_min must exceed this times lambda_max,
/// guarding the matrix logarithm.
pub const SPD_EIG_FLOOR: f64 = 1e-12;

/// Relative symmetry tolerance for dense input.
pub const SPD_SYMMETRY_TOL: f64 = 1e-12;

/// SPD matrix in eigenform: P = basis * diag(exp(log_eigs)) * basis^T.
#[derive(Clone, Debug)]
pub struct SpdPoint {
    pub dim: usize,
    pub basis: Mat,
    pub log_eigs: Vec<f64>,
}

impl SpdPoint {
    pub fn identity(dim: usize) -> Self {
        SpdPoint { dim, basis: Mat::identity(dim), log_eigs: vec![0.0; dim] }
    }

    /// Validate a dense symmetric positive definite matrix and convert it.
    pub fn from_dense(m: &Mat) -> Result<Self> {
        if m.n_rows != m.n_cols {
            return Err(Error::validation("SPD point must be square"));
        }
        if !m.is_finite() {
            return Err(Error::validation("SPD point has non-finite entries"));
        }
        if m.asymmetry() > SPD_SYMMETRY_TOL {
            return Err(Error::validation(format!(
                "matrix asymmetry {:.3e} exceeds {:.0e}",
                m.asymmetry(),
                SPD_SYMMETRY_TOL
            )));
        }
        let (vals, vecs) = jacobi_eigen(m, JACOBI_TOL)?;
        let max = vals[0];
        let min = *vals.last().unwrap();
        if !(max > 0.0) || min <= SPD_EIG_FLOOR * max {
            return Err(Error::validation(format!(
                "eigenvalues not positive definite enough: min {:.3e}, max {:.3e}",
                min, max
            )));
        }
        Ok(SpdPoint {
            dim: m.n_rows,
            basis: vecs,
            log_eigs: vals.iter().map(|v| v.ln()).collect(),
        })
    }

    /// Dense form; errors when entries exceed the f64 range.
    pub fn to_dense(&self) -> Result<Mat> {
        let n = self.dim;
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            let e = self.log_eigs[k].exp();
            if !e.is_finite() {
                return Err(Error::numerical(format!(
                    "eigenvalue exp({:.3}) exceeds f64 range in dense conversion",
                    self.log_eigs[k]
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    let v = out.get(i, j) + e * self.basis.get(i, k) * self.basis.get(j, k);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out.symmetrize())
    }

    /// Point exp(t * X) for symmetric X given in eigenform pieces.
    pub fn from_eigenform(basis: Mat, log_eigs: Vec<f64>) -> Self {
        SpdPoint { dim: log_eigs.len(), basis, log_eigs }
    }
}

/// Log-eigenvalues of the whitened matrix P^{-1/2} Q P^{-1/2}, sorted
/// descending. Works at any eigenvalue scale: the whitening is the
/// doubly-scaled orthogonal form e^{-Lp/2} (Up^T Uq) e^{Lq/2}, handled by the
/// compound-matrix route.
pub fn whitened_log_spectrum(p: &SpdPoint, q: &SpdPoint) -> Result<Vec<f64>> {
    let k = p.basis.transpose().mul(&q.basis);
    let row_log: Vec<f64> = p.log_eigs.iter().map(|l| -0.5 * l).collect();
    let col_log: Vec<f64> = q.log_eigs.iter().map(|l| 0.5 * l).collect();
    let logs = scaled_orthogonal_log_sigmas(&row_log, &k, &col_log)?;
    Ok(logs.iter().map(|s| 2.0 * s).collect())
}

/// Affine-invariant distance d(P, Q) = || log(P^{-1/2} Q P^{-1/2}) ||_F.
pub fn distance(p: &SpdPoint, q: &SpdPoint) -> Result<f64> {
    let logs = whitened_log_spectrum(p, q)?;
    Ok(logs.iter().map(|l| l * l).sum::<f64>().sqrt())
}

/// Dense route for the same distance: Cholesky-whiten, then the symmetric
/// Jacobi eigensolve. Only valid for points whose dense form is in range;
/// kept as the independent oracle for the log-domain route.
pub fn distance_dense(p: &Mat, q: &Mat) -> Result<f64> {
    let l = cholesky(p)?;
    let linv = l.inverse()?;
    let w = linv.mul(q).mul(&linv.transpose()).symmetrize();
    let (vals, _) = jacobi_eigen(&w, JACOBI_TOL)?;
    for v in &vals {
        if *v <= 0.0 {
            return Err(Error::numerical(format!(
                "whitened matrix has nonpositive eigenvalue {:.3e} (condition of inputs too poor)",
                v
            )));
        }
    }
    Ok(vals.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt())
}

/// Action P -> g P g^T in eigenform, via the SVD of g U exp(L/2).
pub fn act(g: &Mat, p: &SpdPoint) -> Result<SpdPoint> {
    let gu = g.mul(&p.basis);
    let col_log: Vec<f64> = p.log_eigs.iter().map(|l| 0.5 * l).collect();
    let zero = vec![0.0; p.dim];
    let b = LogMat::from_scaled(&gu, &zero, &col_log);
    let svd = log_svd(&b)?;
    Ok(SpdPoint {
        dim: p.dim,
        basis: svd.u,
        log_eigs: svd.log_sigma.iter().map(|s| 2.0 * s).collect(),
    })
}

/// Geodesic midpoint P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{1/2} in eigenform.
/// Intended for points at ordinary scales (the CAT(0) checks); the whitened
/// eigenbasis step uses the one-sided Jacobi, which loses the small singular
/// directions once both scale spreads are extreme.
pub fn midpoint(p: &SpdPoint, q: &SpdPoint) -> Result<SpdPoint> {
    // Up^T W Up = B B^T for B = e^{-Lp/2} K e^{Lq/2}, K = Up^T Uq,
    // where W = P^{-1/2} Q P^{-1/2}.
    let k = p.basis.transpose().mul(&q.basis);
    let row_log: Vec<f64> = p.log_eigs.iter().map(|l| -0.5 * l).collect();
    let col_log: Vec<f64> = q.log_eigs.iter().map(|l| 0.5 * l).collect();
    let svd = log_svd(&LogMat::from_scaled(&k, &row_log, &col_log))?;
    // midpoint = Up B' B'^T Up^T for B' = e^{Lp/2} u e^{log sigma / 2}.
    let row2: Vec<f64> = p.log_eigs.iter().map(|l| 0.5 * l).collect();
    let col2: Vec<f64> = svd.log_sigma.iter().map(|s| 0.5 * s).collect();
    let svd2 = log_svd(&LogMat::from_scaled(&svd.u, &row2, &col2))?;
    Ok(SpdPoint {
        dim: p.dim,
        basis: p.basis.mul(&svd2.u),
        log_eigs: svd2.log_sigma.iter().map(|s| 2.0 * s).collect(),
    })
}

/// Condition estimate of an invertible dense matrix through its Gram
/// spectrum; used for increment sanity warnings.
pub fn condition_estimate(g: &Mat) -> Result<f64> {
    let gram = g.transpose().mul(g).symmetrize();
    let (vals, _) = jacobi_eigen(&gram, JACOBI_TOL)?;
    let max = vals[0];
    let min = *vals.last().unwrap();
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((max / min).sqrt())
}
