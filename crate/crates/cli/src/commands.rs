//! Command execution. Reports go to `out`, diagnostics to `err`.

use std::io::Write;

use anyhow::Context;
use flg_core::case_io::report::{matrices_to_csv, pairs_to_csv, serialize_matrix};
use flg_core::{
    analyze_case, build_ybus, compute_hybrid, parse_case, partition, ratio_scatter,
    row_sum_residuals, symmetry_residual, transpose_check, write_case, AnalysisOptions, BusId,
    ComplexMatrix, GridCase,
};
use serde::Serialize;

use crate::config::{CommandKind, OutFormat, RunConfig};
use crate::generate::gen_random;
use crate::oracle::{run_oracle_suite, OracleConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

enum Outcome {
    Passed,
    Violated,
}

#[derive(Serialize)]
struct YbusReport<'a> {
    case: &'a str,
    bus_ids: &'a [BusId],
    shunts_included: bool,
    #[serde(serialize_with = "serialize_matrix")]
    matrix: &'a ComplexMatrix,
    row_sum_residuals: Vec<f64>,
    symmetry_residual: f64,
}

#[derive(Serialize)]
struct PartitionReport<'a> {
    case: &'a str,
    m: usize,
    n: usize,
    gen_order: &'a [BusId],
    load_order: &'a [BusId],
    y_gg: (usize, usize),
    y_gl: (usize, usize),
    y_lg: (usize, usize),
    y_ll: (usize, usize),
    transpose_residual: f64,
}

#[derive(Serialize)]
struct FlgReport<'a> {
    case: &'a str,
    gen_order: &'a [BusId],
    load_order: &'a [BusId],
    f_lg_shape: (usize, usize),
    #[serde(flatten)]
    hybrid: &'a flg_core::HybridSystem,
    transpose_identity_residual: f64,
}

fn load_case(cfg: &RunConfig) -> anyhow::Result<GridCase> {
    let path = cfg.case_path.as_ref().context("no case file given")?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_case(&text).with_context(|| format!("parsing {}", path.display()))
}

fn json(out: &mut dyn Write, value: &impl Serialize) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn ybus(cfg: &RunConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let case = load_case(cfg)?;
    let y = build_ybus(&case, cfg.include_shunts);
    let residuals = row_sum_residuals(&y);
    let symmetry = symmetry_residual(&y);
    match cfg.out_format {
        OutFormat::Json => json(
            out,
            &YbusReport {
                case: &case.name,
                bus_ids: y.bus_ids(),
                shunts_included: y.shunts_included(),
                matrix: y.matrix(),
                row_sum_residuals: residuals,
                symmetry_residual: symmetry,
            },
        )?,
        OutFormat::Csv => {
            let rows = ComplexMatrix::from_real_rows(
                &residuals.iter().map(|r| vec![*r]).collect::<Vec<_>>(),
            );
            let sym = ComplexMatrix::from_real_rows(&[vec![symmetry]]);
            out.write_all(
                matrices_to_csv(&[
                    ("Y", y.matrix()),
                    ("row_sum_residual", &rows),
                    ("symmetry_residual", &sym),
                ])?
                .as_bytes(),
            )?;
        }
    }
    Ok(Outcome::Passed)
}

fn partition_cmd(cfg: &RunConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let case = load_case(cfg)?;
    let y = build_ybus(&case, cfg.include_shunts);
    let p = partition(&y, &case)?;
    json(
        out,
        &PartitionReport {
            case: &case.name,
            m: p.m(),
            n: p.n(),
            gen_order: &p.gen_order,
            load_order: &p.load_order,
            y_gg: p.y_gg.shape(),
            y_gl: p.y_gl.shape(),
            y_lg: p.y_lg.shape(),
            y_ll: p.y_ll.shape(),
            transpose_residual: transpose_check(&p),
        },
    )?;
    Ok(Outcome::Passed)
}

fn flg(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<Outcome> {
    let case = load_case(cfg)?;
    let y = build_ybus(&case, cfg.include_shunts);
    let p = partition(&y, &case)?;
    let h = compute_hybrid(&p, cfg.rank_tol.value())?;
    if h.used_pseudoinverse {
        writeln!(
            err,
            "Y_LL rank {} < {}: using the pseudoinverse",
            h.yll_rank,
            p.n()
        )?;
    }
    match cfg.out_format {
        OutFormat::Json => json(
            out,
            &FlgReport {
                case: &case.name,
                gen_order: &p.gen_order,
                load_order: &p.load_order,
                f_lg_shape: h.f_lg.shape(),
                hybrid: &h,
                transpose_identity_residual: h.transpose_identity_residual(),
            },
        )?,
        OutFormat::Csv => out.write_all(
            matrices_to_csv(&[
                ("Z_LL", &h.z_ll),
                ("F_LG", &h.f_lg),
                ("K_GL", &h.k_gl),
                ("Y_GGM", &h.y_ggm),
            ])?
            .as_bytes(),
        )?,
    }
    Ok(Outcome::Passed)
}

fn check(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<Outcome> {
    let case = load_case(cfg)?;
    let opts = AnalysisOptions {
        include_shunts: cfg.include_shunts,
        homogenize: cfg.homogenize,
        tol: cfg.tol,
        rank_tol: cfg.rank_tol.value(),
    };
    let report = analyze_case(&case, &opts)?;
    json(out, &report)?;
    if report.all_passed() {
        return Ok(Outcome::Passed);
    }
    for a in report.assertions.iter().filter(|a| !a.passed) {
        writeln!(
            err,
            "violated: {} = {:e} (bound {:e})",
            a.name, a.value, a.bound
        )?;
    }
    Ok(Outcome::Violated)
}

fn scatter(cfg: &RunConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let case = load_case(cfg)?;
    let pts = ratio_scatter(&build_ybus(&case, cfg.include_shunts));
    match cfg.out_format {
        OutFormat::Csv => out.write_all(pairs_to_csv(&pts)?.as_bytes())?,
        OutFormat::Json => json(
            out,
            &pts.iter().map(|&(re, im)| [re, im]).collect::<Vec<_>>(),
        )?,
    }
    Ok(Outcome::Passed)
}

fn oracle_test(
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    anyhow::ensure!(
        cfg.min_buses >= 2 && cfg.min_buses <= cfg.buses,
        "bus range {}..={} is empty or below 2",
        cfg.min_buses,
        cfg.buses
    );
    anyhow::ensure!(
        cfg.buses <= crate::generate::MAX_BUSES,
        "max buses above {}",
        crate::generate::MAX_BUSES
    );
    let summary = run_oracle_suite(&OracleConfig {
        base_seed: cfg.seed,
        cases: cfg.cases,
        min_buses: cfg.min_buses,
        max_buses: cfg.buses,
        tol: cfg.tol,
    });
    json(out, &summary)?;
    if summary.failed_cases == 0 {
        Ok(Outcome::Passed)
    } else {
        writeln!(
            err,
            "{} of {} cases failed",
            summary.failed_cases, summary.cases
        )?;
        Ok(Outcome::Violated)
    }
}

fn gen(cfg: &RunConfig, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    let case = gen_random(cfg.seed, cfg.buses, cfg.gens, cfg.include_shunts)?;
    out.write_all(write_case(&case).as_bytes())?;
    Ok(Outcome::Passed)
}

/// Runs one command and returns its exit code.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cfg.command {
        CommandKind::Ybus => ybus(cfg, out),
        CommandKind::Partition => partition_cmd(cfg, out),
        CommandKind::Flg => flg(cfg, out, err),
        CommandKind::Check => check(cfg, out, err),
        CommandKind::Scatter => scatter(cfg, out),
        CommandKind::OracleTest => oracle_test(cfg, out, err),
        CommandKind::GenRandom => gen(cfg, out),
    };
    match result {
        Ok(Outcome::Passed) => EXIT_OK,
        Ok(Outcome::Violated) => EXIT_VIOLATION,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INPUT
        }
    }
}
