//! The subcommands and the files they write.
//!
//! `errors.csv` has the fixed header
//! `t_or_n,l2_error,linf_error,hamiltonian_drift,fp_iters_max,wall_ms`.
//! A run writes one row per snapshot time; a sweep writes one row per `n`
//! holding the maxima over `[0, T]`. Errors are `NaN` when the experiment has
//! no closed-form solution. `wall_ms` is 0 when timing is disabled.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mtc_benjamin::harness::{self, ErrorRow, RunReport, RunSpec, SweepReport};
use mtc_benjamin::travelwave::WaveProblem;
use mtc_benjamin::{BasisGrid, ModelParams};
use serde::Serialize;

use crate::config::{Experiment, Format, OutputConfig, RunConfig, WaveSpec};
use crate::snapshot::Snapshot;
use crate::{atomic_write, io_err, CliError};

pub const CSV_HEADER: [&str; 6] = [
    "t_or_n",
    "l2_error",
    "linf_error",
    "hamiltonian_drift",
    "fp_iters_max",
    "wall_ms",
];

#[derive(Serialize)]
struct CsvRow {
    t_or_n: f64,
    l2_error: f64,
    linf_error: f64,
    hamiltonian_drift: f64,
    fp_iters_max: usize,
    wall_ms: f64,
}

impl From<&ErrorRow> for CsvRow {
    fn from(r: &ErrorRow) -> Self {
        Self {
            t_or_n: r.t_or_n,
            l2_error: r.l2_error,
            linf_error: r.linf_error,
            hamiltonian_drift: r.hamiltonian_drift,
            fp_iters_max: r.fp_iters_max,
            wall_ms: r.wall_ms,
        }
    }
}

/// The rows as CSV text, header included.
pub fn errors_csv(rows: &[ErrorRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_HEADER).expect("writing to memory");
    }
    for r in rows {
        w.serialize(CsvRow::from(r)).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

#[derive(Serialize)]
struct Params {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
}

impl From<ModelParams> for Params {
    fn from(p: ModelParams) -> Self {
        Self {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            delta: p.delta,
        }
    }
}

#[derive(Serialize)]
struct SnapshotEntry {
    t: f64,
    file: String,
}

#[derive(Serialize)]
struct WavePairSummary {
    sigmas: [f64; 2],
    residuals: [f64; 2],
    crests: [f64; 2],
    tail_behind: f64,
    tail_ahead: f64,
}

#[derive(Serialize)]
struct RunSummary {
    mode: &'static str,
    example: u8,
    custom_initial_data: bool,
    p: usize,
    n: usize,
    ell: f64,
    params: Params,
    tau: f64,
    t_final: f64,
    fp_tol: f64,
    fp_max_iters: usize,
    refine: usize,
    snapshot_stride: usize,
    steps: usize,
    max_l2_error: f64,
    max_linf_error: f64,
    max_hamiltonian_drift: f64,
    fp_iters_max: usize,
    wall_ms: f64,
    snapshots: Vec<SnapshotEntry>,
    waves: Option<WavePairSummary>,
}

#[derive(Serialize)]
struct WaveSummary {
    mode: &'static str,
    p: usize,
    n: usize,
    ell: f64,
    params: Params,
    c: f64,
    sigma: f64,
    residual: f64,
    epsilon: f64,
    converged: bool,
    sigmas: Vec<f64>,
    newton_iterations: Vec<usize>,
    refinements: usize,
    wall_ms: f64,
    snapshot: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    mode: &'static str,
    example: u8,
    n_list: Vec<usize>,
    rows: usize,
    failures: Vec<SweepFailure>,
}

#[derive(Serialize)]
struct SweepFailure {
    n: usize,
    message: String,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    atomic_write(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    atomic_write(path, |w| w.write_all(bytes))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Executes the configured experiment and writes its outputs under `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    match &cfg.experiment {
        Experiment::Run(spec) => run_spec(spec, &cfg.output, out),
        Experiment::Wave(w) => run_wave(w, &cfg.output, out),
    }
}

fn run_spec(spec: &RunSpec, output: &OutputConfig, out: &Path) -> Result<(), CliError> {
    prepare_dir(out)?;
    let report = harness::run_example(spec)?;
    write_run(&report, output, out)
}

fn write_run(report: &RunReport, output: &OutputConfig, out: &Path) -> Result<(), CliError> {
    let spec = &report.spec;
    let mut entries = Vec::new();
    if output.wants(Format::Snapshot) {
        let dir = out.join("snapshots");
        prepare_dir(&dir)?;
        for (k, (t, field)) in report.snapshots.iter().enumerate() {
            let name = format!("snapshots/snap_{k:05}.txt");
            Snapshot::new(field, *t, spec.params).save(&out.join(&name))?;
            entries.push(SnapshotEntry { t: *t, file: name });
        }
    }
    if output.wants(Format::Csv) {
        write_bytes(&out.join("errors.csv"), &errors_csv(&report.rows))?;
    }
    if output.wants(Format::Json) {
        let waves = report.waves.as_ref().map(|w| WavePairSummary {
            sigmas: w.sigmas,
            residuals: [w.profiles[0].residual, w.profiles[1].residual],
            crests: w.tails.crests,
            tail_behind: w.tails.behind,
            tail_ahead: w.tails.ahead,
        });
        let summary = RunSummary {
            mode: "run",
            example: spec.example,
            custom_initial_data: spec.initial.is_some(),
            p: spec.p,
            n: spec.n(),
            ell: spec.ell,
            params: spec.params.into(),
            tau: spec.tau,
            t_final: spec.t_final,
            fp_tol: spec.fp_tol,
            fp_max_iters: spec.fp_max_iters,
            refine: spec.refine,
            snapshot_stride: spec.snapshot_stride,
            steps: report.steps,
            max_l2_error: report.max_l2_error,
            max_linf_error: report.max_linf_error,
            max_hamiltonian_drift: report.max_hamiltonian_drift,
            fp_iters_max: report.fp_iters_max,
            wall_ms: report.wall_ms,
            snapshots: entries,
            waves,
        };
        write_json(&out.join("summary.json"), &summary)?;
    }
    Ok(())
}

/// Solves for one traveling wave; writes `wave.txt` and `summary.json`.
pub fn run_wave(w: &WaveSpec, output: &OutputConfig, out: &Path) -> Result<(), CliError> {
    prepare_dir(out)?;
    let start = Instant::now();
    let grid = BasisGrid::new(w.p, w.ell)?;
    let mut prob = WaveProblem::new(w.alpha, w.gamma, w.delta, w.c, w.sigma, &grid)?;
    prob.stages = w.stages;
    prob.newton_max_iters = w.newton_max_iters;
    prob.max_refinements = w.max_refinements;
    prob.exec = w.exec;
    let sol = prob.solve()?;
    let wall_ms = if output.record_timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let epsilon = prob.epsilon(w.sigma);
    let snapshot = if output.wants(Format::Snapshot) {
        let name = "wave.txt".to_string();
        Snapshot::new(&sol.profile, 0.0, prob.model_params()).save(&out.join(&name))?;
        Some(name)
    } else {
        None
    };
    if output.wants(Format::Json) {
        let summary = WaveSummary {
            mode: "travelwave",
            p: w.p,
            n: grid.n(),
            ell: w.ell,
            params: prob.model_params().into(),
            c: w.c,
            sigma: w.sigma,
            residual: sol.residual,
            epsilon,
            converged: sol.residual <= epsilon,
            sigmas: sol.sigmas.clone(),
            newton_iterations: sol.iterations.clone(),
            refinements: sol.refinements,
            wall_ms,
            snapshot,
        };
        write_json(&out.join("summary.json"), &summary)?;
    }
    if sol.residual > epsilon {
        return Err(CliError::Failed(format!(
            "wave residual {:e} exceeds the threshold {epsilon:e}",
            sol.residual
        )));
    }
    Ok(())
}

/// Runs a convergence sweep; the CSV always goes to `stdout`.
pub fn sweep(
    base: &RunSpec,
    n_list: &[usize],
    out: Option<&PathBuf>,
    stdout: &mut impl Write,
) -> Result<SweepReport, CliError> {
    if let Some(dir) = out {
        prepare_dir(dir)?;
    }
    let report = harness::convergence_sweep(base, n_list)?;
    let csv = errors_csv(&report.rows);
    stdout.write_all(&csv).map_err(io_err(Path::new("<stdout>")))?;
    if let Some(dir) = out {
        write_bytes(&dir.join("errors.csv"), &csv)?;
        let summary = SweepSummary {
            mode: "sweep",
            example: base.example,
            n_list: n_list.to_vec(),
            rows: report.rows.len(),
            failures: report
                .failures
                .iter()
                .map(|(n, m)| SweepFailure { n: *n, message: m.clone() })
                .collect(),
        };
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(report)
}
