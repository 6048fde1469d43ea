//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flg_core::case_io::report::pairs_to_csv;
use flg_core::properties::{ybus_ratio_profile, NEGATIVITY_TOL};
use flg_core::{
    build_ybus, check_real_system, check_row_sums, compute_hybrid, direct_solve_oracle, homogenize,
    hybrid_solve, parse_case, partition, ratio_scatter, sign_pattern_check, symmetry_residual,
    Branch, Bus, BusId, BusKind, Complex64, ComplexMatrix, GridCase, HybridSystem, RatioSource,
    IEEE_118,
};
use flg_lab::generate::{gen_random, population_member};
use flg_lab::oracle::{network_equation_residual, random_injection};

const BASE_SEED: u64 = 20_250_101;
const POPULATION: usize = 200;
const SHUNTED_POPULATION: usize = 120;
const SCALING_CASES: usize = 20;
const MIN_BUSES: usize = 3;
const MAX_BUSES: usize = 12;

const DIM_RUNTIME: Duration = Duration::from_secs(1);
const ROW_SUM_TOL: f64 = 1e-8;
const ROW_SUM_RUNTIME: Duration = Duration::from_secs(10);
const COLLAPSE_TOL: f64 = 1e-10;
const REALNESS_TOL: f64 = 1e-8;
const NONNEGATIVE_FLOOR: f64 = -1e-10;
const REAL_SYSTEM_TOL: f64 = 1e-8;
const EQUIVALENCE_TOL: f64 = 1e-9;
const TRANSPOSE_TOL: f64 = 1e-12;
const PENROSE_TOL: f64 = 1e-9;
/// Row sum of `F_LG` for the isolated bus: its `Y_LL` row and column are zero.
const ISOLATED_ROW_SUM: f64 = 0.0;
const ISOLATED_PIN_TOL: f64 = 1e-12;
const SUSCEPTANCE_SHARE: f64 = 0.95;
const SCALE: Complex64 = Complex64::new(3.0, 4.0);
const SCALING_TOL: f64 = 1e-10;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn population(shunts: bool, count: usize) -> Vec<GridCase> {
    (0..count)
        .map(|i| {
            let (seed, n, m) = population_member(BASE_SEED, i, MIN_BUSES, MAX_BUSES);
            gen_random(seed, n, m, shunts).expect("population parameters in range")
        })
        .collect()
}

fn hybrid(case: &GridCase, shunts: bool) -> HybridSystem {
    let y = build_ybus(case, shunts);
    let p = partition(&y, case).expect("every bus has a kind");
    compute_hybrid(&p, None).expect("hybrid matrix")
}

fn row_sums(f: &ComplexMatrix) -> Vec<Complex64> {
    (0..f.rows()).map(|i| f.row(i).iter().sum()).collect()
}

fn dimensions() -> Outcome {
    let start = Instant::now();
    let case = parse_case(IEEE_118).expect("bundled case parses");
    let y = build_ybus(&case, true);
    let p = partition(&y, &case).expect("partition");
    let h = compute_hybrid(&p, None).expect("hybrid");
    let elapsed = start.elapsed();
    let shapes = [
        p.y_gg.shape(),
        p.y_gl.shape(),
        p.y_lg.shape(),
        p.y_ll.shape(),
        h.f_lg.shape(),
    ];
    let expected = [(19, 19), (19, 99), (99, 19), (99, 99), (99, 19)];
    outcome(
        shapes == expected && elapsed < DIM_RUNTIME,
        format!("blocks {shapes:?}, {elapsed:.2?}"),
    )
}

fn row_sums_unity(cases: &[GridCase]) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    let mut evaluated = 0;
    for case in cases {
        let h = hybrid(case, false);
        if h.used_pseudoinverse {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        for s in row_sums(&h.f_lg) {
            worst = worst.max((s - 1.0).norm());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        evaluated >= 200 && worst < ROW_SUM_TOL && elapsed < ROW_SUM_RUNTIME,
        format!("{evaluated} cases ({skipped} rank-deficient), max |sum - 1| = {worst:.3e}, {elapsed:.2?}"),
    )
}

fn single_generator(cases: &[GridCase]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for case in cases.iter().filter(|c| c.generator_count() == 1) {
        count += 1;
        let h = hybrid(case, false);
        for z in h.f_lg.as_slice() {
            worst = worst.max((z - 1.0).norm());
        }
    }
    outcome(
        count > 0 && worst < COLLAPSE_TOL,
        format!("{count} single-generator cases, max |F - 1| = {worst:.3e}"),
    )
}

struct Homogenized {
    realness_ratio: f64,
    realness_ok: bool,
    sign_cases: usize,
    min_real: f64,
    real_system_ratio: f64,
    real_system_cases: usize,
}

fn homogenized(cases: &[GridCase]) -> Homogenized {
    let mut out = Homogenized {
        realness_ratio: 0.0,
        realness_ok: true,
        sign_cases: 0,
        min_real: f64::INFINITY,
        real_system_ratio: 0.0,
        real_system_cases: 0,
    };
    for case in cases {
        let y = build_ybus(case, false);
        let yh =
            homogenize(&y, &RatioSource::PerRow(ybus_ratio_profile(&y).u)).expect("homogenize");
        let p = partition(&yh, case).expect("partition");
        let h = compute_hybrid(&p, None).expect("hybrid");
        let max_re = h.f_lg.max_abs_re();
        let max_im = h.f_lg.max_abs_im();
        out.realness_ok &= max_im < REALNESS_TOL * max_re;
        out.realness_ratio = out.realness_ratio.max(max_im / max_re);
        if sign_pattern_check(&yh, NEGATIVITY_TOL).0 {
            out.sign_cases += 1;
            let min = h
                .f_lg
                .as_slice()
                .iter()
                .map(|z| z.re)
                .fold(f64::INFINITY, f64::min);
            out.min_real = out.min_real.min(min);
        }
        if !h.used_pseudoinverse {
            out.real_system_cases += 1;
            let r = check_real_system(&p, &h.f_lg).expect("shapes agree");
            out.real_system_ratio = out.real_system_ratio.max(r / p.y_ll.max_abs_re());
        }
    }
    out
}

fn penrose(a: &ComplexMatrix, x: &ComplexMatrix) -> [f64; 4] {
    let ax = a.matmul(x).unwrap();
    let xa = x.matmul(a).unwrap();
    [
        ax.matmul(a).unwrap().max_abs_diff(a).unwrap(),
        xa.matmul(x).unwrap().max_abs_diff(x).unwrap(),
        ax.adjoint().max_abs_diff(&ax).unwrap(),
        xa.adjoint().max_abs_diff(&xa).unwrap(),
    ]
}

fn isolated_load_bus() -> Outcome {
    let kinds = [
        BusKind::Generator,
        BusKind::Generator,
        BusKind::Load,
        BusKind::Load,
        BusKind::Load,
    ];
    let case = GridCase {
        name: "isolated-load".into(),
        base_mva: 100.0,
        buses: kinds
            .iter()
            .enumerate()
            .map(|(k, &kind)| Bus {
                id: BusId(k as u32 + 1),
                kind,
                gs: 0.0,
                bs: 0.0,
            })
            .collect(),
        branches: vec![
            Branch::new(1, 3, 0.02, 0.1, 0.0),
            Branch::new(3, 4, 0.05, 0.2, 0.0),
            Branch::new(4, 2, 0.03, 0.15, 0.0),
            Branch::new(1, 4, 0.08, 0.4, 0.0),
        ],
    };
    let y = build_ybus(&case, false);
    let p = partition(&y, &case).unwrap();
    let h = compute_hybrid(&p, None).unwrap();
    let identities = penrose(&p.y_ll, &h.z_ll);
    let sums = row_sums(&h.f_lg);
    let isolated = p.load_order.iter().position(|&b| b == BusId(5)).unwrap();
    let connected = sums
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != isolated)
        .map(|(_, s)| (s - 1.0).norm())
        .fold(0.0, f64::max);
    let isolated_sum = sums[isolated];
    let penrose_max = identities.iter().copied().fold(0.0, f64::max);
    outcome(
        h.used_pseudoinverse
            && penrose_max < PENROSE_TOL
            && connected < ROW_SUM_TOL
            && (isolated_sum - ISOLATED_ROW_SUM).norm() < ISOLATED_PIN_TOL,
        format!(
            "pseudoinverse {}, rank {}, Penrose max {penrose_max:.3e}, connected max |sum - 1| = {connected:.3e}, isolated row sum {isolated_sum:.3e}",
            h.used_pseudoinverse, h.yll_rank
        ),
    )
}

fn hybrid_direct(cases: &[GridCase]) -> Outcome {
    let mut worst_equiv: f64 = 0.0;
    let mut worst_network: f64 = 0.0;
    for (i, case) in cases.iter().enumerate() {
        let (seed, _, _) = population_member(BASE_SEED, i, MIN_BUSES, MAX_BUSES);
        let y = build_ybus(case, true);
        let p = partition(&y, case).unwrap();
        let h = compute_hybrid(&p, None).unwrap();
        let (i_l, v_g) = random_injection(seed, p.n(), p.m());
        let a = hybrid_solve(&h, &i_l, &v_g).unwrap();
        let b = direct_solve_oracle(&y, &p, &i_l, &v_g).unwrap();
        let diff = a
            .v_l
            .iter()
            .zip(&b.v_l)
            .chain(a.i_g.iter().zip(&b.i_g))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let scale = b
            .v_l
            .iter()
            .chain(&b.i_g)
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst_equiv = worst_equiv.max(diff / scale);
        worst_network = worst_network.max(network_equation_residual(
            &y,
            &p.gen_order,
            &p.load_order,
            &a,
        ));
    }
    outcome(
        cases.len() >= 100 && worst_equiv < EQUIVALENCE_TOL && worst_network < EQUIVALENCE_TOL,
        format!(
            "{} cases, hybrid vs direct {worst_equiv:.3e}, network equation residual {worst_network:.3e}",
            cases.len()
        ),
    )
}

fn transpose_identity(plain: &[GridCase], shunted: &[GridCase]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (cases, shunts) in [(plain, false), (shunted, true)] {
        for case in cases {
            let y = build_ybus(case, shunts);
            if symmetry_residual(&y) != 0.0 {
                continue;
            }
            count += 1;
            let p = partition(&y, case).unwrap();
            let h = compute_hybrid(&p, None).unwrap();
            worst = worst.max(h.k_gl.add(&h.f_lg.transpose()).unwrap().max_abs());
        }
    }
    outcome(
        count == plain.len() + shunted.len() && worst < TRANSPOSE_TOL,
        format!("{count} symmetric cases, max |K + F^T| = {worst:.3e}"),
    )
}

fn susceptance_scatter() -> Outcome {
    let case = parse_case(IEEE_118).unwrap();
    let y = build_ybus(&case, true);
    let pts = ratio_scatter(&y);
    let csv_rows = pairs_to_csv(&pts).unwrap().lines().count() - 1;

    // diagonal of every bus touched by a branch plus both entries of each
    // distinct bus pair
    let mut pairs = HashSet::new();
    let mut touched = HashSet::new();
    for b in &case.branches {
        pairs.insert((b.from_bus.min(b.to_bus), b.from_bus.max(b.to_bus)));
        touched.insert(b.from_bus);
        touched.insert(b.to_bus);
    }
    let independent = touched.len() + 2 * pairs.len();
    let dominant = pts.iter().filter(|(re, im)| im.abs() > re.abs()).count();
    let share = dominant as f64 / pts.len() as f64;
    outcome(
        share >= SUSCEPTANCE_SHARE && csv_rows == independent,
        format!("{dominant}/{} entries with |Im| > |Re| ({:.1}%), CSV rows {csv_rows}, counted {independent}", pts.len(), 100.0 * share),
    )
}

fn scaled_case(case: &GridCase, s: Complex64) -> GridCase {
    let branches = case
        .branches
        .iter()
        .map(|b| {
            let z = Complex64::new(b.r, b.x) / s;
            Branch {
                r: z.re,
                x: z.im,
                ..b.clone()
            }
        })
        .collect();
    GridCase {
        branches,
        ..case.clone()
    }
}

fn scaling(cases: &[GridCase]) -> Outcome {
    let mut worst: f64 = 0.0;
    for case in &cases[..SCALING_CASES] {
        let a = hybrid(case, false);
        let b = hybrid(&scaled_case(case, SCALE), false);
        worst = worst.max(a.f_lg.max_abs_diff(&b.f_lg).unwrap());
    }
    outcome(
        worst < SCALING_TOL,
        format!("{SCALING_CASES} cases scaled by {SCALE}, max |dF| = {worst:.3e}"),
    )
}

fn main() -> ExitCode {
    let plain = population(false, POPULATION);
    let shunted = population(true, SHUNTED_POPULATION);
    let h = homogenized(&plain);

    // sanity: the shunt-free population has exact Laplacian rows
    assert!(plain
        .iter()
        .all(|c| check_row_sums(&hybrid(c, false), &build_ybus(c, false)).exact_branch));

    let results = vec![
        ("1 118-bus block dimensions", dimensions()),
        (
            "2 unity row sums, shunt-free population",
            row_sums_unity(&plain),
        ),
        ("3 single-generator collapse", single_generator(&plain)),
        (
            "4 realness after homogenization",
            outcome(
                h.realness_ok,
                format!(
                    "{} cases, max |Im F| / max |Re F| = {:.3e}",
                    plain.len(),
                    h.realness_ratio
                ),
            ),
        ),
        (
            "5 non-negativity under sign pattern",
            outcome(
                h.sign_cases > 0 && h.min_real > NONNEGATIVE_FLOOR,
                format!("{} cases, min Re F = {:.3e}", h.sign_cases, h.min_real),
            ),
        ),
        (
            "6 real-system identity",
            outcome(
                h.real_system_cases > 0 && h.real_system_ratio < REAL_SYSTEM_TOL,
                format!(
                    "{} cases, max residual / max |Re Y_LL| = {:.3e}",
                    h.real_system_cases, h.real_system_ratio
                ),
            ),
        ),
        (
            "7 hybrid/direct equivalence with shunts",
            hybrid_direct(&shunted),
        ),
        ("8 K_GL = -F_LG^T", transpose_identity(&plain, &shunted)),
        ("9 pseudoinverse path", isolated_load_bus()),
        ("10 susceptance-dominated scatter", susceptance_scatter()),
        ("11 complex scaling invariance", scaling(&plain)),
    ];

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} [{name}] {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
