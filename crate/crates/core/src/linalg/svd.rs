//! Complex singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of a working copy of `A` are rotated pairwise until mutually
//! orthogonal; the accumulated rotations form `V`, the column norms are the
//! singular values, and the normalized columns are `U`. Wide matrices are
//! handled through their adjoint.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(S) Vᴴ` with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `rows × k`, orthonormal columns.
    pub u: ComplexMatrix,
    /// Singular values, descending.
    pub s: Vec<f64>,
    /// `cols × k`, orthonormal columns.
    pub v: ComplexMatrix,
}

impl SvdFactors {
    pub fn max_singular_value(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// `U diag(S) Vᴴ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        ComplexMatrix::from_fn(m, n, |i, j| {
            self.s
                .iter()
                .enumerate()
                .map(|(k, &s)| self.u[(i, k)] * s * self.v[(j, k)].conj())
                .sum()
        })
    }
}

/// Default relative rank tolerance: `max(rows, cols) · ε`.
///
/// Singular values at or below `rank_tol · S_max` are treated as zero, so the
/// absolute cutoff is `max(rows, cols) · ε · S_max`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdFactors, LinalgError> {
    if a.rows() < a.cols() {
        let t = jacobi_tall(&a.adjoint())?;
        return Ok(SvdFactors {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    jacobi_tall(a)
}

/// One-sided Jacobi for `rows >= cols`.
fn jacobi_tall(a: &ComplexMatrix) -> Result<SvdFactors, LinalgError> {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| norm_sqr(c)).collect();

    let tol = f64::EPSILON * m.max(1) as f64;
    let mut converged = n < 2;
    let mut last_off = 0.0_f64;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        last_off = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                let ratio = g / (alpha * beta).sqrt();
                last_off = last_off.max(ratio);
                if ratio <= tol {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
                norms[p] = norm_sqr(&cols[p]);
                norms[q] = norm_sqr(&cols[q]);
            }
        }
        converged = !rotated;
    }
    if !converged {
        let sv: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
        return Err(LinalgError::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_ratio: last_off,
            max_norm: sv.iter().cloned().fold(0.0, f64::max),
            min_norm: sv.iter().cloned().fold(f64::INFINITY, f64::min),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sing: Vec<f64> = cols.iter().map(|c| norm_sqr(c).sqrt()).collect();
    order.sort_by(|&i, &j| sing[j].total_cmp(&sing[i]));

    let s: Vec<f64> = order.iter().map(|&j| sing[j]).collect();
    let mut u_cols: Vec<Option<Vec<Complex64>>> = order
        .iter()
        .map(|&j| {
            let sj = sing[j];
            (sj > 0.0 && sj.is_normal()).then(|| cols[j].iter().map(|z| z / sj).collect())
        })
        .collect();
    complete_orthonormal(&mut u_cols, m);

    let u = ComplexMatrix::from_fn(m, n, |i, k| u_cols[k].as_ref().expect("completed")[i]);
    let v = ComplexMatrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Ok(SvdFactors { u, s, v })
}

/// Replaces missing columns (zero singular values) with unit vectors
/// orthogonal to every other column, via Gram-Schmidt on the standard basis.
fn complete_orthonormal(cols: &mut [Option<Vec<Complex64>>], m: usize) {
    let mut candidate = 0;
    for k in 0..cols.len() {
        if cols[k].is_some() {
            continue;
        }
        while candidate < m {
            let mut e = vec![Complex64::new(0.0, 0.0); m];
            e[candidate] = Complex64::new(1.0, 0.0);
            candidate += 1;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for other in cols.iter().flatten() {
                    let proj = inner(other, &e);
                    for (x, o) in e.iter_mut().zip(other) {
                        *x -= proj * o;
                    }
                }
            }
            let nrm = norm_sqr(&e).sqrt();
            if nrm > 0.5 {
                cols[k] = Some(e.iter().map(|z| z / nrm).collect());
                break;
            }
        }
    }
}

/// `xᴴ y`.
fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Applies the complex plane rotation that zeroes `x_pᴴ x_q`:
/// `x_p ← c·x_p − s·e^{-iφ}·x_q`, `x_q ← s·e^{iφ}·x_p + c·x_q`.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (left, right) = cols.split_at_mut(q);
    let xp = &mut left[p];
    let xq = &mut right[0];
    let sp = phase * s;
    let sp_conj = phase.conj() * s;
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (ap, bq) = (*a, *b);
        *a = ap * c - sp_conj * bq;
        *b = sp * ap + bq * c;
    }
}

fn cutoff(factors: &SvdFactors, rows: usize, cols: usize, rank_tol: Option<f64>) -> f64 {
    rank_tol.unwrap_or_else(|| default_rank_tol(rows, cols)) * factors.max_singular_value()
}

/// Moore-Penrose pseudoinverse from precomputed factors.
pub fn pinv_from_svd(factors: &SvdFactors, rank_tol: Option<f64>) -> ComplexMatrix {
    let (m, n) = (factors.u.rows(), factors.v.rows());
    let cut = cutoff(factors, m, n, rank_tol);
    let inv: Vec<f64> = factors
        .s
        .iter()
        .map(|&s| if s > cut { 1.0 / s } else { 0.0 })
        .collect();
    ComplexMatrix::from_fn(n, m, |i, j| {
        inv.iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(k, &w)| factors.v[(i, k)] * w * factors.u[(j, k)].conj())
            .sum()
    })
}

/// Moore-Penrose pseudoinverse. Singular values `<= rank_tol · S_max` are
/// dropped; `None` selects [`default_rank_tol`].
pub fn pinv(a: &ComplexMatrix, rank_tol: Option<f64>) -> Result<ComplexMatrix, LinalgError> {
    Ok(pinv_from_svd(&svd(a)?, rank_tol))
}

pub fn rank_from_svd(factors: &SvdFactors, rank_tol: Option<f64>) -> usize {
    let cut = cutoff(factors, factors.u.rows(), factors.v.rows(), rank_tol);
    factors.s.iter().filter(|&&s| s > cut).count()
}

/// Number of singular values above `rank_tol · S_max`.
pub fn rank(a: &ComplexMatrix, rank_tol: Option<f64>) -> Result<usize, LinalgError> {
    Ok(rank_from_svd(&svd(a)?, rank_tol))
}
