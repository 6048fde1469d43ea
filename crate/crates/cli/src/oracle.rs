//! Batch property suite over a seeded population of random networks.
//!
//! Each member is generated twice from the same seed, shunt-free and with
//! shunts. Cases are evaluated in parallel and merged in seed order, so the
//! summary is identical for identical arguments.

use flg_core::linalg::lu_solve;
use flg_core::properties::{
    ybus_ratio_profile, NEGATIVITY_TOL, REAL_SYSTEM_TOL, TRANSPOSE_IDENTITY_TOL,
};
use flg_core::{
    build_ybus, check_real_system, check_realness, check_row_sums, compute_hybrid,
    direct_solve_oracle, homogenize, hybrid_solve, partition, AdmittanceMatrix, Complex64,
    GridCase, RatioSource,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::generate::{gen_random, population_member};

pub const COLLAPSE_TOL: f64 = 1e-10;
pub const EQUIVALENCE_TOL: f64 = 1e-9;
pub const SCALING_TOL: f64 = 1e-10;
pub const SCHUR_TOL: f64 = 1e-10;
/// Scale factor applied to every admittance in the scaling check.
pub const SCALE: Complex64 = Complex64::new(3.0, 4.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub base_seed: u64,
    pub cases: usize,
    pub min_buses: usize,
    pub max_buses: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseOutcome {
    pub seed: u64,
    pub buses: usize,
    pub gens: usize,
    pub checks: Vec<Check>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub evaluated: usize,
    pub failed: usize,
    /// Largest value relative to its bound, as `value / bound`.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    pub base_seed: u64,
    pub cases: usize,
    pub failed_cases: usize,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<CaseOutcome>,
}

fn below(name: &'static str, value: f64, bound: f64) -> Check {
    Check {
        name,
        value,
        bound,
        passed: value < bound,
    }
}

fn failure(name: &'static str) -> Check {
    Check {
        name,
        value: f64::INFINITY,
        bound: 0.0,
        passed: false,
    }
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Random `(I_L, V_G)` drawn from the case seed.
pub fn random_injection(seed: u64, n: usize, m: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17) ^ 0xa5a5);
    let i_l = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let v_g = (0..m)
        .map(|_| Complex64::from_polar(rng.gen_range(0.9..1.1), rng.gen_range(-0.5..0.5)))
        .collect();
    (i_l, v_g)
}

/// `max |Y·V − I|` relative to `max |I|`, with `V`, `I` mapped back to the
/// matrix's own bus order.
pub fn network_equation_residual(
    y: &AdmittanceMatrix,
    gen_order: &[flg_core::BusId],
    load_order: &[flg_core::BusId],
    state: &flg_core::InjectionState,
) -> f64 {
    let n = y.dim();
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut i = vec![Complex64::new(0.0, 0.0); n];
    for (k, id) in gen_order.iter().enumerate() {
        let at = y.index_of(*id).expect("bus in matrix");
        v[at] = state.v_g[k];
        i[at] = state.i_g[k];
    }
    for (k, id) in load_order.iter().enumerate() {
        let at = y.index_of(*id).expect("bus in matrix");
        v[at] = state.v_l[k];
        i[at] = state.i_l[k];
    }
    let yv = y.matrix().mul_vec(&v).expect("square");
    rel_diff(&yv, &i)
}

fn shunt_free_checks(case: &GridCase, tol: f64, out: &mut Vec<Check>) -> anyhow::Result<()> {
    let y = build_ybus(case, false);
    let p = partition(&y, case)?;
    let h = compute_hybrid(&p, None)?;

    let rows = check_row_sums(&h, &y);
    if rows.exact_branch {
        out.push(below("row_sums_unity", rows.max_abs_q, tol));
    } else {
        out.push(failure("row_sums_unity"));
    }
    if p.m() == 1 {
        let err = h
            .f_lg
            .as_slice()
            .iter()
            .map(|z| (z - 1.0).norm())
            .fold(0.0, f64::max);
        out.push(below("single_generator_collapse", err, COLLAPSE_TOL));
    }
    out.push(below(
        "transpose_identity",
        h.transpose_identity_residual(),
        TRANSPOSE_IDENTITY_TOL,
    ));

    // Schur complement of Y_LL recomputed by LU on the reordered matrix
    let full = p.reordered();
    let (m, n) = (p.m(), p.n());
    let gi: Vec<usize> = (0..m).collect();
    let li: Vec<usize> = (m..m + n).collect();
    let x = lu_solve(&full.select(&li, &li), &full.select(&li, &gi))?;
    let schur = full
        .select(&gi, &gi)
        .sub(&full.select(&gi, &li).matmul(&x)?)?;
    let err = schur.max_abs_diff(&h.y_ggm)? / y.max_abs().max(1.0);
    out.push(below("schur_consistency", err, SCHUR_TOL));

    let scaled = compute_hybrid(&partition(&y.scaled(SCALE), case)?, None)?;
    out.push(below(
        "scaling_invariance",
        scaled.f_lg.max_abs_diff(&h.f_lg)?,
        SCALING_TOL,
    ));

    let u = ybus_ratio_profile(&y).u;
    let yh = homogenize(&y, &RatioSource::PerRow(u))?;
    let ph = partition(&yh, case)?;
    let hh = compute_hybrid(&ph, None)?;
    let real = check_realness(&hh, &yh, NEGATIVITY_TOL);
    out.push(below(
        "homogenized_realness",
        real.max_abs_imag,
        tol * real.max_abs_real,
    ));
    if real.sign_pattern_ok {
        out.push(Check {
            name: "homogenized_nonnegativity",
            value: real.min_real,
            bound: -NEGATIVITY_TOL,
            passed: real.min_real > -NEGATIVITY_TOL,
        });
    }
    let residual = check_real_system(&ph, &hh.f_lg)?;
    out.push(below(
        "real_system_identity",
        residual,
        REAL_SYSTEM_TOL * ph.y_ll.max_abs_re(),
    ));
    Ok(())
}

fn shunted_checks(seed: u64, case: &GridCase, out: &mut Vec<Check>) -> anyhow::Result<()> {
    let y = build_ybus(case, true);
    let p = partition(&y, case)?;
    let h = compute_hybrid(&p, None)?;
    let (i_l, v_g) = random_injection(seed, p.n(), p.m());
    let hybrid = hybrid_solve(&h, &i_l, &v_g)?;
    let direct = direct_solve_oracle(&y, &p, &i_l, &v_g)?;
    let a: Vec<Complex64> = hybrid.v_l.iter().chain(&hybrid.i_g).copied().collect();
    let b: Vec<Complex64> = direct.v_l.iter().chain(&direct.i_g).copied().collect();
    out.push(below(
        "hybrid_direct_equivalence",
        rel_diff(&a, &b),
        EQUIVALENCE_TOL,
    ));
    out.push(below(
        "network_equation",
        network_equation_residual(&y, &p.gen_order, &p.load_order, &hybrid),
        EQUIVALENCE_TOL,
    ));
    out.push(below(
        "transpose_identity_shunted",
        h.transpose_identity_residual(),
        TRANSPOSE_IDENTITY_TOL,
    ));
    Ok(())
}

pub fn evaluate_member(cfg: &OracleConfig, index: usize) -> CaseOutcome {
    let (seed, buses, gens) = population_member(cfg.base_seed, index, cfg.min_buses, cfg.max_buses);
    let mut checks = Vec::new();
    match gen_random(seed, buses, gens, false) {
        Ok(case) => {
            if shunt_free_checks(&case, cfg.tol, &mut checks).is_err() {
                checks.push(failure("shunt_free_pipeline"));
            }
        }
        Err(_) => checks.push(failure("generate")),
    }
    match gen_random(seed, buses, gens, true) {
        Ok(case) => {
            if shunted_checks(seed, &case, &mut checks).is_err() {
                checks.push(failure("shunted_pipeline"));
            }
        }
        Err(_) => checks.push(failure("generate")),
    }
    CaseOutcome {
        seed,
        buses,
        gens,
        checks,
    }
}

pub fn run_oracle_suite(cfg: &OracleConfig) -> OracleSummary {
    let outcomes: Vec<CaseOutcome> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| evaluate_member(cfg, i))
        .collect();

    let mut checks: Vec<CheckSummary> = Vec::new();
    for c in outcomes.iter().flat_map(|o| &o.checks) {
        let ratio = if c.bound > 0.0 {
            c.value / c.bound
        } else {
            0.0
        };
        match checks.iter_mut().find(|s| s.name == c.name) {
            Some(s) => {
                s.evaluated += 1;
                s.failed += usize::from(!c.passed);
                s.worst_ratio = s.worst_ratio.max(ratio);
            }
            None => checks.push(CheckSummary {
                name: c.name,
                evaluated: 1,
                failed: usize::from(!c.passed),
                worst_ratio: ratio,
            }),
        }
    }
    let failures: Vec<CaseOutcome> = outcomes.into_iter().filter(|o| !o.passed()).collect();
    OracleSummary {
        base_seed: cfg.base_seed,
        cases: cfg.cases,
        failed_cases: failures.len(),
        checks,
        failures,
    }
}
