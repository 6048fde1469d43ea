//! Checks on `F_LG`: unity row sums, realness and non-negativity.
//!
//! Row sums: if every row of `Y_bus` sums to zero and `Y_LL` is invertible,
//! each row of `F_LG` sums to one. The residual of row `i` is
//! `q_i = Σ_j F_LG[i, j] − 1`, and `Y_LL·q = 0`.
//!
//! Realness: if, for every load row `k`, all entries of that row share one
//! ratio `u_k = Im/Re`, then `Y_LL = D·Re(Y_LL)` and `Y_LG = D·Re(Y_LG)` with
//! `D = diag(1 + i·u_k)`, so `Re(Y_LL)·F_LG = −Re(Y_LG)` and `F_LG` is real.
//! Under the Laplacian sign pattern `Re(Y_LL)` is an M-matrix and `F_LG` is
//! also non-negative.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::case_io::report::serialize_complex_vec;
use crate::case_io::GridCase;
use crate::hybrid::{compute_hybrid, HybridError, HybridSystem};
use crate::partition::{partition, transpose_check, PartitionError, PartitionedYbus};
use crate::ybus::{build_ybus, row_sum_residuals, symmetry_residual, AdmittanceMatrix, ZERO_ENTRY};

/// Bound on `max |q_i|` in the exact branch (zero row sums, invertible `Y_LL`).
pub const ROW_SUM_TOL: f64 = 1e-8;
/// `Y_bus` rows count as summing to zero below this fraction of `max |Y|`.
pub const LAPLACIAN_ROW_TOL: f64 = 1e-12;
/// Ratio profiles with a spread below this satisfy the equal-ratio hypothesis.
pub const RATIO_SPREAD_TOL: f64 = 1e-10;
/// Entries of `F_LG` with real part below `−NEGATIVITY_TOL` are violations.
pub const NEGATIVITY_TOL: f64 = 1e-10;
/// Relative bound on `‖Re(Y_LL)·F_LG + Re(Y_LG)‖_max / max |Re(Y_LL)|`.
pub const REAL_SYSTEM_TOL: f64 = 1e-8;
/// Bound on `max |K_GL + F_LGᵀ|`.
pub const TRANSPOSE_IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropertyError {
    #[error("rows do not share a single real:imaginary ratio (spread {max_spread:e} >= {RATIO_SPREAD_TOL:e})")]
    PreconditionViolated { max_spread: f64 },
    #[error("admittance matrix is not symmetric (residual {residual:e}); phase-shifting branches are not supported by the property checks")]
    AsymmetricYbus { residual: f64 },
    #[error("ratio profile has {actual} entries for a {expected}-bus matrix")]
    RatioLength { expected: usize, actual: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Hybrid(#[from] HybridError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioProfile {
    /// Magnitude-weighted mean of `Im/Re` per row.
    pub u: Vec<f64>,
    /// Largest `|Im/Re − u_k|` over all entries used.
    pub max_spread: f64,
    /// Nonzero entries with `|Re| <= 1e-12`, left out of the profile.
    pub undefined_entries: usize,
}

impl RatioProfile {
    pub fn is_homogeneous(&self) -> bool {
        self.max_spread < RATIO_SPREAD_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSumReport {
    /// `q_i = Σ_j F_LG[i, j] − 1`.
    #[serde(serialize_with = "serialize_complex_vec")]
    pub q: Vec<Complex64>,
    pub max_abs_q: f64,
    /// `|Σ_j Y_ij|` of the source matrix.
    pub ybus_row_residuals: Vec<f64>,
    /// Rows of `Y_bus` sum to zero and `Y_LL` was inverted, so `q = 0` is
    /// expected rather than merely reported.
    pub exact_branch: bool,
}

impl RowSumReport {
    /// `Some(pass)` in the exact branch, `None` when the residual is only
    /// reported.
    pub fn exact_branch_holds(&self, tol: f64) -> Option<bool> {
        self.exact_branch.then_some(self.max_abs_q < tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRule {
    DiagonalRealNegative,
    DiagonalImagPositive,
    OffDiagonalRealPositive,
    OffDiagonalImagNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignViolation {
    pub row: usize,
    pub col: usize,
    pub rule: SignRule,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealnessReport {
    pub max_abs_imag: f64,
    pub max_abs_real: f64,
    pub min_real: f64,
    pub negativity_violations: Vec<NegativeEntry>,
    pub sign_pattern_ok: bool,
    pub sign_violations: Vec<SignViolation>,
}

/// Computes `q` and decides whether the exact branch applies.
pub fn check_row_sums(h: &HybridSystem, y: &AdmittanceMatrix) -> RowSumReport {
    let q: Vec<Complex64> = (0..h.f_lg.rows())
        .map(|i| h.f_lg.row(i).iter().sum::<Complex64>() - 1.0)
        .collect();
    let max_abs_q = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ybus_row_residuals = row_sum_residuals(y);
    let bound = LAPLACIAN_ROW_TOL * y.max_abs();
    let laplacian = ybus_row_residuals.iter().all(|&r| r < bound);
    RowSumReport {
        q,
        max_abs_q,
        ybus_row_residuals,
        exact_branch: laplacian && !h.used_pseudoinverse,
    }
}

/// Diagonal entries must have `Re >= −tol` and `Im <= tol`; off-diagonal
/// entries `Re <= tol` and `Im >= −tol`.
pub fn sign_pattern_check(y: &AdmittanceMatrix, tol: f64) -> (bool, Vec<SignViolation>) {
    let mut out = Vec::new();
    for (i, j, z) in y.matrix().iter_indexed() {
        let mut flag = |rule, value| {
            out.push(SignViolation {
                row: i,
                col: j,
                rule,
                value,
            })
        };
        if i == j {
            if z.re < -tol {
                flag(SignRule::DiagonalRealNegative, z.re);
            }
            if z.im > tol {
                flag(SignRule::DiagonalImagPositive, z.im);
            }
        } else {
            if z.re > tol {
                flag(SignRule::OffDiagonalRealPositive, z.re);
            }
            if z.im < -tol {
                flag(SignRule::OffDiagonalImagNegative, z.im);
            }
        }
    }
    (out.is_empty(), out)
}

pub fn check_realness(h: &HybridSystem, y: &AdmittanceMatrix, tol: f64) -> RealnessReport {
    let f = &h.f_lg;
    let negativity_violations = f
        .iter_indexed()
        .filter(|(_, _, z)| z.re < -tol)
        .map(|(row, col, z)| NegativeEntry {
            row,
            col,
            value: z.re,
        })
        .collect();
    let (sign_pattern_ok, sign_violations) = sign_pattern_check(y, tol);
    RealnessReport {
        max_abs_imag: f.max_abs_im(),
        max_abs_real: f.max_abs_re(),
        min_real: f
            .as_slice()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min),
        negativity_violations,
        sign_pattern_ok,
        sign_violations,
    }
}

fn profile_rows<'a>(rows: impl Iterator<Item = Vec<&'a Complex64>>) -> RatioProfile {
    let mut u = Vec::new();
    let mut max_spread = 0.0_f64;
    let mut undefined_entries = 0;
    for row in rows {
        let mut weighted = 0.0;
        let mut weight = 0.0;
        let mut ratios = Vec::new();
        for z in row {
            if z.norm() <= ZERO_ENTRY {
                continue;
            }
            if z.re.abs() <= ZERO_ENTRY {
                undefined_entries += 1;
                continue;
            }
            let r = z.im / z.re;
            weighted += z.norm() * r;
            weight += z.norm();
            ratios.push(r);
        }
        let uk = if weight > 0.0 { weighted / weight } else { 0.0 };
        for r in ratios {
            max_spread = max_spread.max((r - uk).abs());
        }
        u.push(uk);
    }
    RatioProfile {
        u,
        max_spread,
        undefined_entries,
    }
}

/// Per-load-row ratio profile over the concatenated rows of `Y_LL` and `Y_LG`.
pub fn row_ratio_profile(p: &PartitionedYbus) -> RatioProfile {
    profile_rows((0..p.n()).map(|k| p.y_ll.row(k).iter().chain(p.y_lg.row(k)).collect()))
}

/// Ratio profile of every row of `Y_bus`, in matrix order.
pub fn ybus_ratio_profile(y: &AdmittanceMatrix) -> RatioProfile {
    let m = y.matrix();
    profile_rows((0..m.rows()).map(|k| m.row(k).iter().collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatioSource {
    /// One ratio per row of `Y_bus`, in matrix order.
    PerRow(Vec<f64>),
    Global(f64),
}

/// Rewrites every entry of row `k` as `Re(entry)·(1 + i·u_k)`.
pub fn homogenize(
    y: &AdmittanceMatrix,
    source: &RatioSource,
) -> Result<AdmittanceMatrix, PropertyError> {
    let n = y.dim();
    let ratio = |k: usize| match source {
        RatioSource::PerRow(u) => u[k],
        RatioSource::Global(u) => *u,
    };
    if let RatioSource::PerRow(u) = source {
        if u.len() != n {
            return Err(PropertyError::RatioLength {
                expected: n,
                actual: u.len(),
            });
        }
    }
    let m = y.matrix();
    let out = crate::linalg::ComplexMatrix::from_fn(n, n, |i, j| {
        let re = m[(i, j)].re;
        Complex64::new(re, re * ratio(i))
    });
    Ok(y.with_matrix(out))
}

/// `‖Re(Y_LL)·Re(F_LG) + Re(Y_LG)‖_max` for a partition whose load rows
/// satisfy the equal-ratio hypothesis.
pub fn check_real_system(
    p: &PartitionedYbus,
    f_lg: &crate::linalg::ComplexMatrix,
) -> Result<f64, PropertyError> {
    let profile = row_ratio_profile(p);
    if !profile.is_homogeneous() {
        return Err(PropertyError::PreconditionViolated {
            max_spread: profile.max_spread,
        });
    }
    let lhs = p
        .y_ll
        .real_part()
        .matmul(&f_lg.real_part())
        .map_err(HybridError::from)?;
    let residual = lhs
        .add(&p.y_lg.real_part())
        .map_err(HybridError::from)?
        .max_abs();
    Ok(residual)
}

/// Refuses matrices with asymmetric stamping (phase-shifting branches).
pub fn require_symmetric(y: &AdmittanceMatrix) -> Result<(), PropertyError> {
    let residual = symmetry_residual(y);
    if residual > 1e-15 * y.max_abs().max(1.0) {
        return Err(PropertyError::AsymmetricYbus { residual });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub include_shunts: bool,
    pub homogenize: bool,
    /// Tolerance for row-sum and realness assertions.
    pub tol: f64,
    pub rank_tol: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            include_shunts: true,
            homogenize: false,
            tol: ROW_SUM_TOL,
            rank_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Assertion {
    fn below(name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            value,
            bound,
            passed: value < bound,
        }
    }

    fn above(name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            value,
            bound,
            passed: value > bound,
        }
    }
}

/// Everything `check` reports for one case.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub case: String,
    pub buses: usize,
    pub m: usize,
    pub n: usize,
    pub shunts_included: bool,
    pub homogenized: bool,
    pub symmetry_residual: f64,
    pub homogenized_symmetry_residual: Option<f64>,
    pub partition_transpose_residual: f64,
    pub used_pseudoinverse: bool,
    pub yll_rank: usize,
    pub transpose_identity_residual: f64,
    pub ratio_profile: RatioProfile,
    pub row_sums: RowSumReport,
    pub realness: RealnessReport,
    pub real_system_residual: Option<f64>,
    /// Only the properties whose hypotheses hold for this case.
    pub assertions: Vec<Assertion>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Builds, partitions and reduces `case`, then evaluates every property
/// whose hypotheses hold.
pub fn analyze_case(
    case: &GridCase,
    opts: &AnalysisOptions,
) -> Result<PropertyReport, PropertyError> {
    let source = build_ybus(case, opts.include_shunts);
    require_symmetric(&source)?;
    let symmetry = symmetry_residual(&source);

    let (y, homogenized_symmetry_residual) = if opts.homogenize {
        let u = ybus_ratio_profile(&source).u;
        let y = homogenize(&source, &RatioSource::PerRow(u))?;
        let r = symmetry_residual(&y);
        (y, Some(r))
    } else {
        (source, None)
    };

    let p = partition(&y, case)?;
    let h = compute_hybrid(&p, opts.rank_tol)?;
    let row_sums = check_row_sums(&h, &y);
    let realness = check_realness(&h, &y, NEGATIVITY_TOL);
    let ratio_profile = row_ratio_profile(&p);
    let transpose_identity_residual = h.transpose_identity_residual();

    let mut assertions = Vec::new();
    if row_sums.exact_branch {
        assertions.push(Assertion::below(
            "row_sums_unity",
            row_sums.max_abs_q,
            opts.tol,
        ));
    }
    let mut real_system_residual = None;
    if ratio_profile.is_homogeneous() && !h.used_pseudoinverse {
        assertions.push(Assertion::below(
            "f_lg_real",
            realness.max_abs_imag,
            opts.tol * realness.max_abs_real,
        ));
        if realness.sign_pattern_ok {
            assertions.push(Assertion::above(
                "f_lg_nonnegative",
                realness.min_real,
                -NEGATIVITY_TOL,
            ));
        }
        let residual = check_real_system(&p, &h.f_lg)?;
        real_system_residual = Some(residual);
        assertions.push(Assertion::below(
            "real_system_identity",
            residual,
            REAL_SYSTEM_TOL * p.y_ll.max_abs_re(),
        ));
    }
    if homogenized_symmetry_residual.is_none_or(|r| r == 0.0) {
        assertions.push(Assertion::below(
            "transpose_identity",
            transpose_identity_residual,
            TRANSPOSE_IDENTITY_TOL,
        ));
    }

    Ok(PropertyReport {
        case: case.name.clone(),
        buses: y.dim(),
        m: p.m(),
        n: p.n(),
        shunts_included: opts.include_shunts,
        homogenized: opts.homogenize,
        symmetry_residual: symmetry,
        homogenized_symmetry_residual,
        partition_transpose_residual: transpose_check(&p),
        used_pseudoinverse: h.used_pseudoinverse,
        yll_rank: h.yll_rank,
        transpose_identity_residual,
        ratio_profile,
        row_sums,
        realness,
        real_system_residual,
        assertions,
    })
}
