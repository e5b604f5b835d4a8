//! Small dense linear algebra for the N x N matrices used across the crate
//! (N is tiny, typically 2..4), plus a log-magnitude matrix representation
//! for quantities whose entries leave the f64 range.
//!
//! Everything here is deterministic and allocation-simple; no external
//! linear-algebra crate is used so that the graded/log-domain variants can
//! share one code path with the dense ones.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Mat { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Mat { n_rows, n_cols, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Mat::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.n_cols, other.n_rows, "dimension mismatch");
        let mut out = Mat::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.n_cols {
                    out.data[i * out.n_cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        Mat {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        Mat {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// (M + M^T) / 2.
    pub fn symmetrize(&self) -> Mat {
        assert_eq!(self.n_rows, self.n_cols);
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out.set(i, j, 0.5 * (self.get(i, j) + self.get(j, i)));
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Symmetry defect relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for i in 0..self.n_rows {
            for j in (i + 1)..self.n_cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if a.get(i, k).abs() > a.get(piv, k).abs() {
                    piv = i;
                }
            }
            if a.get(piv, k) == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    let t = a.get(k, j);
                    a.set(k, j, a.get(piv, j));
                    a.set(piv, j, t);
                }
                det = -det;
            }
            det *= a.get(k, k);
            for i in (k + 1)..n {
                let f = a.get(i, k) / a.get(k, k);
                for j in k..n {
                    let v = a.get(i, j) - f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan with partial pivoting.
    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if a.get(i, k).abs() > a.get(piv, k).abs() {
                    piv = i;
                }
            }
            if a.get(piv, k).abs() < 1e-300 * scale {
                return Err(Error::numerical(format!(
                    "singular matrix in inverse (pivot {:.3e}, scale {:.3e})",
                    a.get(piv, k),
                    scale
                )));
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                    inv.data.swap(k * n + j, piv * n + j);
                }
            }
            let d = a.get(k, k);
            for j in 0..n {
                a.set(k, j, a.get(k, j) / d);
                inv.set(k, j, inv.get(k, j) / d);
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a.get(i, k);
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let va = a.get(i, j) - f * a.get(k, j);
                    let vi = inv.get(i, j) - f * inv.get(k, j);
                    a.set(i, j, va);
                    inv.set(i, j, vi);
                }
            }
        }
        Ok(inv)
    }
}

/// Off-diagonal tolerance for the cyclic Jacobi eigensolver.
pub const JACOBI_TOL: f64 = 1e-13;

/// Cyclic Jacobi eigensolver for a symmetric matrix. Returns eigenvalues in
/// descending order and the corresponding eigenvectors as matrix columns.
/// A pair is rotated while |a_pq| > tol * sqrt(|a_pp * a_qq|), which keeps
/// small eigenvalues of graded matrices relatively accurate.
pub fn jacobi_eigen(m: &Mat, tol: f64) -> Result<(Vec<f64>, Mat)> {
    assert_eq!(m.n_rows, m.n_cols);
    let n = m.n_rows;
    if !m.is_finite() {
        return Err(Error::numerical("non-finite entry in symmetric eigensolve"));
    }
    let mut a = m.symmetrize();
    let mut v = Mat::identity(n);
    let max_sweeps = 64;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let bound = tol * (app.abs() * aqq.abs()).sqrt();
                if apq.abs() <= bound.max(tol * f64::MIN_POSITIVE) {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- J^T A J on rows/columns p, q
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical("jacobi eigensolve did not converge in 64 sweeps"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vecs = Mat::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vecs.set(i, new_j, v.get(i, old_j));
        }
    }
    Ok((vals, vecs))
}

/// Cholesky factor L (lower triangular) with A = L L^T.
pub fn cholesky(m: &Mat) -> Result<Mat> {
    assert_eq!(m.n_rows, m.n_cols);
    let n = m.n_rows;
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::numerical(format!(
                        "cholesky pivot {} is {:.3e}; matrix not positive definite",
                        i, sum
                    )));
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Modified Gram-Schmidt QR. R has a nonnegative diagonal by construction
/// (diagonal entries are column norms); a zero pivot is an error.
pub fn mgs_qr(a: &Mat) -> Result<(Mat, Mat)> {
    assert_eq!(a.n_rows, a.n_cols);
    let n = a.n_rows;
    let mut q = a.clone();
    let mut r = Mat::zeros(n, n);
    for j in 0..n {
        let mut norm2 = 0.0;
        for i in 0..n {
            norm2 += q.get(i, j) * q.get(i, j);
        }
        let norm = norm2.sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::numerical(format!("rank-deficient column {} in QR", j)));
        }
        r.set(j, j, norm);
        for i in 0..n {
            q.set(i, j, q.get(i, j) / norm);
        }
        for k in (j + 1)..n {
            let mut dot = 0.0;
            for i in 0..n {
                dot += q.get(i, j) * q.get(i, k);
            }
            r.set(j, k, dot);
            for i in 0..n {
                let v = q.get(i, k) - dot * q.get(i, j);
                q.set(i, k, v);
            }
        }
    }
    Ok((q, r))
}

/// Re-orthonormalize the columns of a nearly orthogonal matrix in place.
pub fn reorthonormalize(q: &mut Mat) {
    let n = q.n_rows;
    for j in 0..n {
        for k in 0..j {
            let mut dot = 0.0;
            for i in 0..n {
                dot += q.get(i, k) * q.get(i, j);
            }
            for i in 0..n {
                let v = q.get(i, j) - dot * q.get(i, k);
                q.set(i, j, v);
            }
        }
        let mut norm2 = 0.0;
        for i in 0..n {
            norm2 += q.get(i, j) * q.get(i, j);
        }
        let norm = norm2.sqrt();
        for i in 0..n {
            q.set(i, j, q.get(i, j) / norm);
        }
    }
}

/// Apply f to the eigenvalues of a symmetric matrix: V f(D) V^T.
pub fn symmetric_map(m: &Mat, f: impl Fn(f64) -> f64) -> Result<Mat> {
    let (vals, vecs) = jacobi_eigen(m, JACOBI_TOL)?;
    let n = m.n_rows;
    let mut out = Mat::zeros(n, n);
    for k in 0..n {
        let fv = f(vals[k]);
        for i in 0..n {
            for j in 0..n {
                let v = out.get(i, j) + fv * vecs.get(i, k) * vecs.get(j, k);
                out.set(i, j, v);
            }
        }
    }
    Ok(out.symmetrize())
}

// ---------------------------------------------------------------------------
// Signed log-magnitude scalars and matrices
// ---------------------------------------------------------------------------

/// A real number stored as sign and natural log of magnitude.
/// `sign == 0.0` encodes zero (log is then -inf).
#[derive(Clone, Copy, Debug)]
pub struct SignedLog {
    pub sign: f64,
    pub log: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0.0, log: f64::NEG_INFINITY };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog { sign: x.signum(), log: x.abs().ln() }
        }
    }

    pub fn from_parts(sign: f64, log: f64) -> Self {
        if sign == 0.0 || log == f64::NEG_INFINITY {
            SignedLog::ZERO
        } else {
            SignedLog { sign: sign.signum(), log }
        }
    }

    pub fn to_f64(self) -> f64 {
        self.sign * self.log.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    pub fn mul(self, other: SignedLog) -> SignedLog {
        if self.is_zero() || other.is_zero() {
            return SignedLog::ZERO;
        }
        SignedLog { sign: self.sign * other.sign, log: self.log + other.log }
    }

    pub fn add(self, other: SignedLog) -> SignedLog {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.log >= other.log { (self, other) } else { (other, self) };
        let d = small.log - big.log; // <= 0
        if self.sign == other.sign {
            SignedLog { sign: big.sign, log: big.log + d.exp().ln_1p() }
        } else {
            let r = -d.exp_m1(); // in [0, 1)
            if r == 0.0 {
                SignedLog::ZERO
            } else {
                SignedLog { sign: big.sign, log: big.log + r.ln() }
            }
        }
    }

    pub fn neg(self) -> SignedLog {
        SignedLog { sign: -self.sign, log: self.log }
    }
}

/// Square matrix with entries stored in signed log-magnitude form.
#[derive(Clone, Debug)]
pub struct LogMat {
    pub n: usize,
    entries: Vec<SignedLog>,
}

impl LogMat {
    pub fn from_dense(m: &Mat) -> Self {
        assert_eq!(m.n_rows, m.n_cols);
        LogMat {
            n: m.n_rows,
            entries: m.data.iter().map(|&x| SignedLog::from_f64(x)).collect(),
        }
    }

    pub fn from_entries(n: usize, entries: Vec<SignedLog>) -> Self {
        assert_eq!(entries.len(), n * n);
        LogMat { n, entries }
    }

    /// diag(exp(row_log)) * k * diag(exp(col_log)), without forming the scales.
    pub fn from_scaled(k: &Mat, row_log: &[f64], col_log: &[f64]) -> Self {
        assert_eq!(k.n_rows, k.n_cols);
        let n = k.n_rows;
        assert_eq!(row_log.len(), n);
        assert_eq!(col_log.len(), n);
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let base = SignedLog::from_f64(k.get(i, j));
                entries.push(SignedLog::from_parts(base.sign, base.log + row_log[i] + col_log[j]));
            }
        }
        LogMat { n, entries }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> SignedLog {
        self.entries[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: SignedLog) {
        self.entries[i * self.n + j] = v;
    }

    fn column_gram(&self, p: usize, q: usize) -> SignedLog {
        let mut acc = SignedLog::ZERO;
        for i in 0..self.n {
            acc = acc.add(self.get(i, p).mul(self.get(i, q)));
        }
        acc
    }
}

/// Singular value decomposition with log-domain singular values.
/// `u` and `v` are ordinary orthogonal matrices; A = u * diag(exp(log_sigma)) * v^T.
#[derive(Clone, Debug)]
pub struct LogSvd {
    pub log_sigma: Vec<f64>,
    pub u: Mat,
    pub v: Mat,
}

/// One-sided Jacobi SVD on a LogMat. Column rotations are applied in the
/// signed-log domain, so the input may mix entry scales far beyond f64 range.
/// Requires a numerically nonsingular input (every singular value finite in
/// log terms).
///
/// Accuracy caveat: extreme grading must sit on the COLUMN side (input of the
/// form M * diag with M well-conditioned). Row-graded inputs should be
/// transposed first; for inputs graded on both sides only the leading
/// singular value is reliable (see `scaled_orthogonal_log_sigmas` for the
/// doubly-scaled case with an orthogonal core).
pub fn log_svd(a: &LogMat) -> Result<LogSvd> {
    let n = a.n;
    let mut w = a.clone();
    for e in &w.entries {
        if e.log.is_nan() {
            return Err(Error::numerical("NaN entry in log-domain SVD"));
        }
    }
    let mut v = Mat::identity(n);
    // Entries with log-magnitude L carry ~eps*L relative representation
    // noise, which caps how orthogonal two columns can be made; the stopping
    // tolerance has to sit above that floor.
    let max_abs_log = w
        .entries
        .iter()
        .filter(|e| e.log.is_finite())
        .fold(0.0_f64, |m, e| m.max(e.log.abs()));
    let ln_tol = (1e-14 + 256.0 * f64::EPSILON * max_abs_log).ln();
    let max_sweeps = 64;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let gpq = w.column_gram(p, q);
                if gpq.is_zero() {
                    continue;
                }
                let gpp = w.column_gram(p, p);
                let gqq = w.column_gram(q, q);
                if gpp.is_zero() || gqq.is_zero() {
                    return Err(Error::numerical("zero column in log-domain SVD"));
                }
                if gpq.log <= ln_tol + 0.5 * (gpp.log + gqq.log) {
                    continue;
                }
                rotated = true;
                // tau = (gqq - gpp) / (2 gpq), then the usual stable rotation.
                let num = gqq.add(gpp.neg());
                let (c, s) = if num.is_zero() {
                    let r = std::f64::consts::FRAC_1_SQRT_2;
                    (SignedLog::from_f64(r), SignedLog::from_f64(r * gpq.sign))
                } else {
                    let log_tau = num.log - (gpq.log + std::f64::consts::LN_2);
                    let sign_tau = num.sign * gpq.sign;
                    if log_tau > 300.0 {
                        // t ~ 1/(2 tau), correct to e^{-600} relative here;
                        // past this point tau^2 would overflow densely.
                        let t = SignedLog::from_parts(sign_tau, -(log_tau + std::f64::consts::LN_2));
                        (SignedLog::from_f64(1.0), t)
                    } else {
                        let tau = sign_tau * log_tau.exp();
                        let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                        let c = 1.0 / (1.0 + t * t).sqrt();
                        (SignedLog::from_f64(c), SignedLog::from_f64(c * t))
                    }
                };
                for i in 0..n {
                    let aip = w.get(i, p);
                    let aiq = w.get(i, q);
                    w.set(i, p, c.mul(aip).add(s.mul(aiq).neg()));
                    w.set(i, q, s.mul(aip).add(c.mul(aiq)));
                }
                let (cd, sd) = (c.to_f64(), s.to_f64());
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, cd * vip - sd * viq);
                    v.set(i, q, sd * vip + cd * viq);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical("log-domain SVD did not converge in 64 sweeps"));
    }
    let mut log_sigma: Vec<f64> = Vec::with_capacity(n);
    for j in 0..n {
        let g = w.column_gram(j, j);
        if g.is_zero() {
            return Err(Error::numerical("zero singular value in log-domain SVD"));
        }
        log_sigma.push(0.5 * g.log);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| log_sigma[j].partial_cmp(&log_sigma[i]).unwrap());
    let mut u = Mat::zeros(n, n);
    let mut vs = Mat::zeros(n, n);
    let mut sigma_sorted = Vec::with_capacity(n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let ls = log_sigma[old_j];
        sigma_sorted.push(ls);
        for i in 0..n {
            let e = w.get(i, old_j);
            u.set(i, new_j, e.sign * (e.log - ls).exp());
            vs.set(i, new_j, v.get(i, old_j));
        }
    }
    Ok(LogSvd { log_sigma: sigma_sorted, u, v: vs })
}

/// All k-element subsets of 0..n in lexicographic order.
fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

fn submatrix(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    let mut out = Mat::zeros(rows.len(), cols.len());
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            out.set(i, j, m.get(r, c));
        }
    }
    out
}

/// Log-singular values (descending) of diag(exp(row_log)) * k * diag(exp(col_log))
/// where k is orthogonal, valid for scale spreads on BOTH sides far beyond the
/// f64 range.
///
/// Route: the product sigma_1...sigma_m is the leading singular value of the
/// m-th compound matrix, and compounds of a doubly-scaled orthogonal matrix
/// are again doubly-scaled orthogonal, whose leading singular value the
/// one-sided Jacobi delivers reliably. Successive differences of the
/// cumulative logs recover each log sigma.
pub fn scaled_orthogonal_log_sigmas(
    row_log: &[f64],
    k: &Mat,
    col_log: &[f64],
) -> Result<Vec<f64>> {
    let n = k.n_rows;
    assert_eq!(k.n_cols, n);
    assert_eq!(row_log.len(), n);
    assert_eq!(col_log.len(), n);
    let mut cumulative = Vec::with_capacity(n);
    for m in 1..=n {
        let row_sets = k_subsets(n, m);
        let dim = row_sets.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for rows in &row_sets {
            let rscale: f64 = rows.iter().map(|&i| row_log[i]).sum();
            for cols in &row_sets {
                let cscale: f64 = cols.iter().map(|&j| col_log[j]).sum();
                let minor = submatrix(k, rows, cols).det();
                let base = SignedLog::from_f64(minor);
                entries.push(SignedLog::from_parts(base.sign, base.log + rscale + cscale));
            }
        }
        let compound = LogMat::from_entries(dim, entries);
        let svd = log_svd(&compound)?;
        cumulative.push(svd.log_sigma[0]);
    }
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for c in cumulative {
        out.push(c - prev);
        prev = c;
    }
    Ok(out)
}
