use std::path::Path;
use std::time::Instant;

use anyhow::anyhow;
use nonlocal_core::analysis::{
    check_avg_control, check_decay, check_derivative_bound, check_lemma_envelopes, check_memory_envelope,
    gronwall_check, loglog_slope, measure_lipschitz, reference_on_grid, reference_solution, sandwich_envelopes,
    sup_error, validate_h_list, BoundReport, StudyRow, StudyTable,
};
use nonlocal_core::integrators::{solve_limit, solve_memory, Scale, SolverConfig};
use nonlocal_core::{ConstantSet, Error as CoreError, LimitField, Solution};
use serde_json::{json, Value};

use crate::config::Config;
use crate::output::{
    bound_table, bounds_summary, constants_table, run_table, study_table, unix_now, Format, OutputDir, RowRuntime,
    RunManifest, MANIFEST_NAME,
};
use crate::CliError;

/// Sample count of the memory-versus-frozen envelope check.
pub const MEMORY_ENVELOPE_SAMPLES: usize = 10;
/// Relative widening of the ring on which the Lipschitz constant is measured.
pub const LIPSCHITZ_MARGIN: f64 = 0.1;

/// Errors in the inputs map to exit code 2, everything else to 3.
fn classify(e: CoreError) -> CliError {
    match e {
        CoreError::DimensionMismatch { .. } | CoreError::UnsupportedDimension { .. } | CoreError::InvalidInput(_) => {
            CliError::Config(e.into())
        }
        _ => CliError::Solver(e.into()),
    }
}

struct Session {
    command: String,
    config: Config,
    out: OutputDir,
    started_unix: f64,
    clock: Instant,
    row_runtimes: Vec<RowRuntime>,
    h_list: Option<Vec<f64>>,
}

impl Session {
    fn open(command: &str, config: &Config, out: &Path, format: Format) -> Result<Self, CliError> {
        Ok(Session {
            command: command.into(),
            config: config.clone(),
            out: OutputDir::create(out, format).map_err(CliError::Io)?,
            started_unix: unix_now(),
            clock: Instant::now(),
            row_runtimes: Vec::new(),
            h_list: None,
        })
    }

    fn finish(self, summary: Value) -> Result<(), CliError> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            format: self.out.format(),
            config: self.config,
            h_list: self.h_list,
            started_unix: self.started_unix,
            finished_unix: unix_now(),
            wall_clock_seconds: self.clock.elapsed().as_secs_f64(),
            row_runtimes: self.row_runtimes,
            outputs: self.out.written().to_vec(),
            summary,
        };
        let body = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.into()))? + "\n";
        let path = self.out.root().join(MANIFEST_NAME);
        std::fs::write(&path, body).map_err(|e| CliError::Io(e.into()))
    }
}

pub fn cmd_constants(config: &Config, out: &Path, format: Format) -> Result<ConstantSet, CliError> {
    let profile = config.profile().map_err(CliError::Config)?;
    let constants = ConstantSet::compute(&profile, config.delta).map_err(classify)?;
    let mut session = Session::open("constants", config, out, format)?;
    let table = constants_table(&constants);
    print!("{}", table.to_csv());
    session.out.write_table("constants", &table).map_err(CliError::Io)?;
    session.finish(json!({}))?;
    Ok(constants)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Memory,
    Limit,
}

pub fn cmd_run(config: &Config, which: Which, out: &Path, format: Format) -> Result<Solution, CliError> {
    let solver = config.solver_config().map_err(CliError::Config)?;
    let (name, solution) = match which {
        Which::Memory => {
            if solver.scale == Scale::Limit {
                return Err(CliError::Config(anyhow!("run-memory needs a numeric h in the config")));
            }
            ("run_memory", solve_memory(&solver).map_err(classify)?)
        }
        Which::Limit => ("run_limit", solve_limit(&solver.with_scale(Scale::Limit)).map_err(classify)?),
    };
    let mut session = Session::open(&name.replace('_', "-"), config, out, format)?;
    session.out.write_table(name, &run_table(&solution)).map_err(CliError::Io)?;
    for w in &solution.warnings {
        eprintln!("warning: {w:?}");
    }
    let summary = json!({
        "complete": solution.is_complete(),
        "final_norm": solution.trajectory.last().norm(),
        "field_evaluations": solution.evaluations,
        "warnings": solution.warnings.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>(),
    });
    session.finish(summary)?;
    match solution.failure() {
        Some(e) => Err(CliError::Solver(anyhow!("{name} stopped early: {e}"))),
        None => Ok(solution),
    }
}

/// Outcome of a study, returned for tests and the `check` exit code.
#[derive(Debug)]
pub struct StudyOutcome {
    pub table: StudyTable,
    pub reports: Vec<BoundReport>,
    pub frozen_slope: Option<f64>,
}

impl StudyOutcome {
    pub fn violations(&self) -> Vec<&str> {
        self.reports
            .iter()
            .filter(|r| r.applicable && r.violated)
            .map(|r| r.name.as_str())
            .collect()
    }

    pub fn failed_rows(&self) -> usize {
        self.table.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Per-`h` memory solves on scoped threads, in the order of `h_list`.
fn solve_rows(solver: &SolverConfig, h_list: &[f64]) -> Vec<(f64, nonlocal_core::Result<Solution>, f64)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = h_list
            .iter()
            .map(|&h| {
                let cfg = solver.clone().with_scale(Scale::Memory(h));
                scope.spawn(move || {
                    let start = Instant::now();
                    let result = solve_memory(&cfg);
                    (h, result, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study worker panicked"))
            .collect()
    })
}

/// Convergence study plus every bound report, written under `out`.
pub fn cmd_study(
    config: &Config,
    h_list: &[f64],
    out: &Path,
    format: Format,
    command: &str,
) -> Result<StudyOutcome, CliError> {
    let solver = config.solver_config().map_err(CliError::Config)?;
    validate_h_list(h_list).map_err(classify)?;
    let field = LimitField::new(solver.profile, &solver.squad).map_err(classify)?;
    let constants = ConstantSet::compute(&solver.profile, config.delta).map_err(classify)?;
    let mut session = Session::open(command, config, out, format)?;
    session.h_list = Some(h_list.to_vec());

    let reference = reference_solution(&solver).map_err(classify)?;
    let grid = reference_on_grid(&reference, solver.steps().map_err(classify)? + 1).map_err(classify)?;
    let limit_run = solve_limit(&solver.clone().with_scale(Scale::Limit)).map_err(classify)?;

    let solved = solve_rows(&solver, h_list);
    let mut rows = Vec::with_capacity(solved.len());
    let mut smallest: Option<(f64, Solution)> = None;
    for (h, result, seconds) in solved {
        session.row_runtimes.push(RowRuntime { h, seconds });
        let sup = result.as_ref().map_err(Clone::clone).and_then(|s| sup_error(s, &grid));
        if let Ok(solution) = result {
            if smallest.as_ref().is_none_or(|(best, _)| h < *best) {
                smallest = Some((h, solution));
            }
        }
        rows.push(StudyRow {
            h,
            sup_error: sup,
            runtime: Some(seconds),
        });
    }
    let table = StudyTable::from_rows(rows);

    let mut reports = vec![
        check_decay(&limit_run.trajectory),
        sandwich_envelopes(&limit_run.trajectory, &solver.profile, &constants),
    ];
    let frozen = check_lemma_envelopes(
        &solver.xi0,
        &[solver.horizon],
        h_list,
        &solver.profile,
        &constants,
        &solver.quad,
        &solver.squad,
    )
    .map_err(classify)?;
    let frozen_slope = loglog_slope(&frozen.samples.iter().map(|s| (s.x, s.observed)).collect::<Vec<_>>());
    reports.push(frozen);
    let mut smallest_h = None;
    if let Some((h, solution)) = &smallest {
        if solution.is_complete() {
            smallest_h = Some(*h);
            let traj = &solution.trajectory;
            reports.push(check_derivative_bound(traj, &constants));
            reports.push(check_avg_control(traj, *h, &constants).map_err(classify)?);
            reports.push(
                check_memory_envelope(traj, *h, MEMORY_ENVELOPE_SAMPLES, &solver.profile, &constants, &solver.quad)
                    .map_err(classify)?,
            );
        }
    }
    let lipschitz = measure_lipschitz(&reference.trajectory, &field, LIPSCHITZ_MARGIN).map_err(classify)?;
    reports.push(gronwall_check(&table, lipschitz, solver.horizon, &constants));

    let io = CliError::Io;
    session.out.write_table("study", &study_table(&table)).map_err(io)?;
    session.out.write_table("run_limit", &run_table(&limit_run)).map_err(io)?;
    if let (Some(_), Some((_, solution))) = (smallest_h, &smallest) {
        session.out.write_table("run_memory", &run_table(solution)).map_err(io)?;
    }
    for r in &reports {
        session.out.write_table(&format!("bound_{}", r.name), &bound_table(r)).map_err(io)?;
    }
    session.out.write_table("bounds", &bounds_summary(&reports)).map_err(io)?;

    let errors: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.sup_error.as_ref().ok().map(|e| (r.h, *e)))
        .collect();
    let outcome = StudyOutcome {
        table,
        reports,
        frozen_slope,
    };
    let summary = json!({
        "monotone": outcome.table.monotone,
        "failed_rows": outcome.failed_rows(),
        "study_loglog_slope": loglog_slope(&errors),
        "frozen_vs_limit_loglog_slope": outcome.frozen_slope,
        "lipschitz": lipschitz,
        "reports_for_h": smallest_h,
        "violations": outcome.violations(),
    });
    session.finish(summary)?;

    for row in &outcome.table.rows {
        match &row.sup_error {
            Ok(e) => println!("h = {:<8} sup error = {e:.6e}", row.h),
            Err(err) => println!("h = {:<8} FAILED: {err}", row.h),
        }
    }
    for r in &outcome.reports {
        let state = match (r.applicable, r.violated) {
            (false, _) => "n/a",
            (true, false) => "ok",
            (true, true) => "VIOLATED",
        };
        println!("{:<18} {state:<9} max ratio {:.3e}", r.name, r.max_ratio);
    }
    Ok(outcome)
}

/// [`cmd_study`] whose exit status reflects failed rows (3), then bound
/// violations or a non-monotone error column (4).
pub fn cmd_check(config: &Config, h_list: &[f64], out: &Path, format: Format) -> Result<StudyOutcome, CliError> {
    let outcome = cmd_study(config, h_list, out, format, "check")?;
    if outcome.failed_rows() > 0 {
        return Err(CliError::Solver(anyhow!("{} study row(s) failed", outcome.failed_rows())));
    }
    let violations = outcome.violations();
    if !violations.is_empty() {
        return Err(CliError::Violation(anyhow!("violated: {}", violations.join(", "))));
    }
    if !outcome.table.monotone {
        return Err(CliError::Violation(anyhow!("sup errors do not decrease strictly with h")));
    }
    Ok(outcome)
}
