use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Pivots smaller than this fraction of `max |A|` mark the matrix singular.
const PIVOT_RATIO: f64 = 1e-13;

/// Solves `A X = B` by LU factorization with partial pivoting.
///
/// Returns [`LinalgError::SingularMatrix`] when a pivot falls below
/// `1e-13 * max |A|`; callers fall back to the pseudoinverse in that case.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() != b.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "lu_solve",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let n = a.rows();
    let nrhs = b.cols();
    let threshold = PIVOT_RATIO * a.max_abs();

    let mut lu = a.clone();
    let mut x = b.clone();

    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pivot_abs == 0.0 || pivot_abs < threshold {
            return Err(LinalgError::SingularMatrix {
                column: k,
                pivot: pivot_abs,
                threshold,
            });
        }
        if p != k {
            swap_rows(&mut lu, p, k);
            swap_rows(&mut x, p, k);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= factor * u;
            }
            for j in 0..nrhs {
                let xk = x[(k, j)];
                x[(i, j)] -= factor * xk;
            }
        }
    }

    // back substitution
    for j in 0..nrhs {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in i + 1..n {
                acc -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    Ok(x)
}

fn swap_rows(m: &mut ComplexMatrix, a: usize, b: usize) {
    for j in 0..m.cols() {
        let tmp = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = tmp;
    }
}
