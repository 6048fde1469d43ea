//! Hybrid representation of the partitioned network.
//!
//! Eliminating `V_L` from the partitioned system gives
//!
//! ```text
//! [ V_L ]   [ Z_LL  F_LG  ] [ I_L ]
//! [ I_G ] = [ K_GL  Y_GGM ] [ V_G ]
//! ```
//!
//! with `Z_LL = Y_LL⁻¹` (or `Y_LL†` when `Y_LL` is rank deficient),
//! `F_LG = −Z_LL·Y_LG`, `K_GL = Y_GL·Z_LL` and `Y_GGM = Y_GG − Y_GL·Z_LL·Y_LG`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::case_io::report::{serialize_complex_vec, serialize_matrix};
use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::partition::PartitionedYbus;
use crate::ybus::AdmittanceMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HybridError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{what} has length {actual}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("bus {0} of the partition is not in the admittance matrix")]
    UnknownBus(crate::case_io::BusId),
}

#[derive(Debug, Clone)]
pub struct ZllResult {
    pub z_ll: ComplexMatrix,
    pub used_pseudoinverse: bool,
    pub yll_rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HybridSystem {
    #[serde(serialize_with = "serialize_matrix")]
    pub z_ll: ComplexMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub f_lg: ComplexMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub k_gl: ComplexMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub y_ggm: ComplexMatrix,
    pub used_pseudoinverse: bool,
    pub yll_rank: usize,
}

impl HybridSystem {
    pub fn m(&self) -> usize {
        self.y_ggm.rows()
    }

    pub fn n(&self) -> usize {
        self.z_ll.rows()
    }

    /// `max |K_GL + F_LGᵀ|`; zero up to rounding for a symmetric `Y_bus`.
    pub fn transpose_identity_residual(&self) -> f64 {
        self.k_gl
            .add(&self.f_lg.transpose())
            .expect("K_GL and F_LGᵀ share a shape")
            .max_abs()
    }

    /// The full `(n + m) × (n + m)` hybrid matrix.
    pub fn hybrid_matrix(&self) -> ComplexMatrix {
        let (n, m) = (self.n(), self.m());
        ComplexMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
            (true, true) => self.z_ll[(i, j)],
            (true, false) => self.f_lg[(i, j - n)],
            (false, true) => self.k_gl[(i - n, j)],
            (false, false) => self.y_ggm[(i - n, j - n)],
        })
    }
}

/// Currents and voltages of the partitioned system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectionState {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub i_g: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub i_l: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub v_g: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub v_l: Vec<Complex64>,
}

/// Inverts `Y_LL`, or pseudo-inverts it when its numerical rank is below `n`.
///
/// Rank is decided from the singular values with the relative tolerance
/// `rank_tol` (default `n·ε`). A full-rank block is inverted by LU; if LU
/// still meets a negligible pivot the pseudoinverse is used instead.
pub fn compute_zll(p: &PartitionedYbus, rank_tol: Option<f64>) -> Result<ZllResult, HybridError> {
    let n = p.n();
    let factors = linalg::svd(&p.y_ll)?;
    let yll_rank = linalg::rank_from_svd(&factors, rank_tol);
    if yll_rank == n {
        match linalg::lu_solve(&p.y_ll, &ComplexMatrix::identity(n)) {
            Ok(z_ll) => {
                return Ok(ZllResult {
                    z_ll,
                    used_pseudoinverse: false,
                    yll_rank,
                })
            }
            Err(LinalgError::SingularMatrix { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ZllResult {
        z_ll: linalg::pinv_from_svd(&factors, rank_tol),
        used_pseudoinverse: true,
        yll_rank,
    })
}

pub fn compute_hybrid(
    p: &PartitionedYbus,
    rank_tol: Option<f64>,
) -> Result<HybridSystem, HybridError> {
    let ZllResult {
        z_ll,
        used_pseudoinverse,
        yll_rank,
    } = compute_zll(p, rank_tol)?;
    let f_lg = z_ll.matmul(&p.y_lg)?.neg();
    // computed directly rather than as −F_LGᵀ, so the transpose identity is a real check
    let k_gl = p.y_gl.matmul(&z_ll)?;
    let y_ggm = p.y_gg.sub(&k_gl.matmul(&p.y_lg)?)?;
    Ok(HybridSystem {
        z_ll,
        f_lg,
        k_gl,
        y_ggm,
        used_pseudoinverse,
        yll_rank,
    })
}

fn check_len(what: &'static str, v: &[Complex64], expected: usize) -> Result<(), HybridError> {
    if v.len() != expected {
        return Err(HybridError::DimensionMismatch {
            what,
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Applies the hybrid matrix: `V_L = Z_LL·I_L + F_LG·V_G`,
/// `I_G = K_GL·I_L + Y_GGM·V_G`.
pub fn hybrid_solve(
    h: &HybridSystem,
    i_l: &[Complex64],
    v_g: &[Complex64],
) -> Result<InjectionState, HybridError> {
    check_len("I_L", i_l, h.n())?;
    check_len("V_G", v_g, h.m())?;
    let v_l = add_vecs(&h.z_ll.mul_vec(i_l)?, &h.f_lg.mul_vec(v_g)?);
    let i_g = add_vecs(&h.k_gl.mul_vec(i_l)?, &h.y_ggm.mul_vec(v_g)?);
    Ok(InjectionState {
        i_g,
        i_l: i_l.to_vec(),
        v_g: v_g.to_vec(),
        v_l,
    })
}

/// Reference answer from the unpartitioned matrix: solves
/// `Y_LL·V_L = I_L − Y_LG·V_G` by LU, then `I_G = Y_GG·V_G + Y_GL·V_L`.
///
/// Blocks are re-extracted from `y` using the partition's bus orderings, so
/// this path shares no arithmetic with [`compute_hybrid`].
pub fn direct_solve_oracle(
    y: &AdmittanceMatrix,
    p: &PartitionedYbus,
    i_l: &[Complex64],
    v_g: &[Complex64],
) -> Result<InjectionState, HybridError> {
    check_len("I_L", i_l, p.n())?;
    check_len("V_G", v_g, p.m())?;
    let index = |ids: &[crate::case_io::BusId]| -> Result<Vec<usize>, HybridError> {
        ids.iter()
            .map(|&id| y.index_of(id).ok_or(HybridError::UnknownBus(id)))
            .collect()
    };
    let g = index(&p.gen_order)?;
    let l = index(&p.load_order)?;
    let m = y.matrix();
    let (y_gg, y_gl, y_lg, y_ll) = (
        m.select(&g, &g),
        m.select(&g, &l),
        m.select(&l, &g),
        m.select(&l, &l),
    );

    let rhs: Vec<Complex64> = i_l
        .iter()
        .zip(y_lg.mul_vec(v_g)?)
        .map(|(a, b)| a - b)
        .collect();
    let v_l = linalg::lu_solve(&y_ll, &ComplexMatrix::column_vector(&rhs))?.column(0);
    let i_g = add_vecs(&y_gg.mul_vec(v_g)?, &y_gl.mul_vec(&v_l)?);
    Ok(InjectionState {
        i_g,
        i_l: i_l.to_vec(),
        v_g: v_g.to_vec(),
        v_l,
    })
}

fn add_vecs(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
