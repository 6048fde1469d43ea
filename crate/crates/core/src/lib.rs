//! Admittance-matrix analysis for electrical networks.
//!
//! The pipeline is `case_io` → `ybus` → `partition` → `hybrid` → `properties`:
//! a grid case is parsed, its complex weighted-Laplacian admittance matrix is
//! stamped, the matrix is split into generator/load blocks, the hybrid matrix
//! (`Z_LL`, `F_LG`, `K_GL`, `Y_GGM`) is computed, and the unity-row-sum and
//! realness properties of `F_LG` are checked.

pub mod case_io;
pub mod hybrid;
pub mod linalg;
pub mod partition;
pub mod properties;
pub mod ybus;

pub use case_io::{
    parse_case, write_case, Branch, Bus, BusId, BusKind, CaseError, GridCase, IEEE_118,
};
pub use hybrid::{
    compute_hybrid, compute_zll, direct_solve_oracle, hybrid_solve, HybridError, HybridSystem,
    InjectionState, ZllResult,
};
pub use linalg::{ComplexMatrix, LinalgError, SvdFactors};
pub use partition::{partition, transpose_check, PartitionError, PartitionedYbus};
pub use properties::{
    analyze_case, check_real_system, check_realness, check_row_sums, homogenize, require_symmetric,
    row_ratio_profile, sign_pattern_check, ybus_ratio_profile, AnalysisOptions, Assertion,
    PropertyError, PropertyReport, RatioProfile, RatioSource, RealnessReport, RowSumReport,
    SignViolation,
};
pub use ybus::{build_ybus, ratio_scatter, row_sum_residuals, symmetry_residual, AdmittanceMatrix};

pub use num_complex::Complex64;
