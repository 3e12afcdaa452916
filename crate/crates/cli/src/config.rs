//! TOML run configuration.
//!
//! ```toml
//! example = 1                 # or an [initial] table, or a [wave] table
//!
//! [equation]                  # alpha, beta, gamma, delta
//! [grid]                      # p, ell (default 8)
//! [stepper]                   # tau (0.02), t_final, fp_tol (1e-13), fp_max_iters, snapshot_stride
//! [error]                     # refine (4)
//! [initial]                   # kind = "lorentzian" | "solitons"
//! [wave]                      # c, sigma, stages, newton_max_iters, max_refinements
//! [output]                    # dir, formats, record_timing, exec
//! ```
//!
//! Unset keys take the defaults of the selected example (example 1 when only
//! `[initial]` is given). Unknown keys are rejected.

use std::path::PathBuf;

use mtc_benjamin::harness::{InitialData, RunSpec};
use mtc_benjamin::oracles::{Bump, Parity};
use mtc_benjamin::{BasisGrid, Exec, ModelParams};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    example: Option<u8>,
    #[serde(default)]
    equation: RawEquation,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    stepper: RawStepper,
    #[serde(default)]
    error: RawError,
    initial: Option<RawInitial>,
    wave: Option<RawWave>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEquation {
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    p: Option<usize>,
    ell: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStepper {
    tau: Option<f64>,
    t_final: Option<f64>,
    fp_tol: Option<f64>,
    fp_max_iters: Option<usize>,
    snapshot_stride: Option<usize>,
}

impl RawStepper {
    fn is_empty(&self) -> bool {
        self.tau.is_none()
            && self.t_final.is_none()
            && self.fp_tol.is_none()
            && self.fp_max_iters.is_none()
            && self.snapshot_stride.is_none()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawError {
    refine: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawInitial {
    Lorentzian {
        parity: ParityName,
        r: Vec<f64>,
        a: Vec<f64>,
        x0: Vec<f64>,
        c: Vec<f64>,
    },
    Solitons {
        velocities: Vec<f64>,
        phases: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ParityName {
    Even,
    Odd,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWave {
    c: f64,
    sigma: f64,
    stages: Option<usize>,
    newton_max_iters: Option<usize>,
    max_refinements: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    formats: Option<Vec<Format>>,
    record_timing: Option<bool>,
    exec: Option<ExecName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Snapshot,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ExecName {
    Sequential,
    Parallel,
}

/// A single traveling-wave computation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c: f64,
    pub sigma: f64,
    pub p: usize,
    pub ell: f64,
    pub stages: usize,
    pub newton_max_iters: usize,
    pub max_refinements: usize,
    pub exec: Exec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Run(Box<RunSpec>),
    Wave(WaveSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub record_timing: bool,
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output: OutputConfig,
}

fn config_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| config_err("<document>", e.to_string().trim_end()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<document>".to_string() } else { path };
        config_err(&path, e.inner().to_string().trim_end())
    })?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<RunConfig, CliError> {
    let exec = match raw.output.exec {
        Some(ExecName::Sequential) => Exec::Sequential,
        Some(ExecName::Parallel) => Exec::Parallel,
        None => Exec::default(),
    };
    let output = OutputConfig {
        dir: raw.output.dir,
        formats: raw
            .output
            .formats
            .unwrap_or_else(|| vec![Format::Snapshot, Format::Csv, Format::Json]),
        record_timing: raw.output.record_timing.unwrap_or(true),
    };

    if let Some(wave) = raw.wave {
        if raw.example.is_some() || raw.initial.is_some() {
            return Err(config_err("wave", "cannot be combined with `example` or `[initial]`"));
        }
        if raw.equation.beta.is_some() {
            return Err(config_err("equation.beta", "is fixed by wave.sigma for a traveling wave"));
        }
        if !raw.stepper.is_empty() || raw.error.refine.is_some() {
            return Err(config_err("stepper", "a traveling-wave spec does not time-step"));
        }
        let spec = WaveSpec {
            alpha: raw.equation.alpha.unwrap_or(1.0),
            gamma: raw.equation.gamma.unwrap_or(1.0),
            delta: raw.equation.delta.unwrap_or(1.0),
            c: wave.c,
            sigma: wave.sigma,
            p: raw.grid.p.unwrap_or(2048),
            ell: raw.grid.ell.unwrap_or(8.0),
            stages: wave.stages.unwrap_or(20),
            newton_max_iters: wave.newton_max_iters.unwrap_or(50),
            max_refinements: wave.max_refinements.unwrap_or(6),
            exec,
        };
        BasisGrid::new(spec.p, spec.ell)?;
        if spec.stages == 0 {
            return Err(config_err("wave.stages", "must be at least 1"));
        }
        if spec.newton_max_iters == 0 {
            return Err(config_err("wave.newton_max_iters", "must be at least 1"));
        }
        return Ok(RunConfig {
            experiment: Experiment::Wave(spec),
            output,
        });
    }

    let initial = raw.initial.map(convert_initial).transpose()?;
    let example = match (raw.example, &initial) {
        (Some(id), _) => id,
        (None, Some(_)) => 1,
        (None, None) => {
            return Err(config_err("example", "one of `example`, `[initial]` or `[wave]` is required"));
        }
    };
    let mut spec = RunSpec::example(example).map_err(|_| config_err("example", format!("must be 1..=6, got {example}")))?;
    let eq = &raw.equation;
    spec.params = ModelParams::new(
        eq.alpha.unwrap_or(spec.params.alpha),
        eq.beta.unwrap_or(spec.params.beta),
        eq.gamma.unwrap_or(spec.params.gamma),
        eq.delta.unwrap_or(spec.params.delta),
    );
    if spec.waves.is_some() && initial.is_none() && eq.beta.is_some() {
        return Err(config_err("equation.beta", "is fixed by the wave pair of this example"));
    }
    if let Some(pair) = spec.waves.filter(|_| initial.is_none()) {
        spec.params.beta = pair.beta(&spec.params);
    }
    if initial.is_some() {
        spec.waves = None;
    }
    spec.initial = initial;
    spec.p = raw.grid.p.unwrap_or(spec.p);
    spec.ell = raw.grid.ell.unwrap_or(spec.ell);
    let st = raw.stepper;
    spec.tau = st.tau.unwrap_or(spec.tau);
    spec.t_final = st.t_final.unwrap_or(spec.t_final);
    spec.fp_tol = st.fp_tol.unwrap_or(spec.fp_tol);
    spec.fp_max_iters = st.fp_max_iters.unwrap_or(spec.fp_max_iters);
    spec.snapshot_stride = st.snapshot_stride.unwrap_or(spec.snapshot_stride);
    spec.refine = raw.error.refine.unwrap_or(spec.refine);
    spec.record_timing = output.record_timing;
    spec.exec = exec;
    spec.validate()?;
    Ok(RunConfig {
        experiment: Experiment::Run(Box::new(spec)),
        output,
    })
}

fn convert_initial(raw: RawInitial) -> Result<InitialData, CliError> {
    Ok(match raw {
        RawInitial::Lorentzian { parity, r, a, x0, c } => {
            let n = r.len();
            if n == 0 || a.len() != n || x0.len() != n || c.len() != n {
                return Err(config_err("initial", "r, a, x0 and c must be non-empty and of equal length"));
            }
            let bumps = (0..n)
                .map(|i| Bump {
                    r: r[i],
                    a: a[i],
                    x0: x0[i],
                    c: c[i],
                })
                .collect();
            let parity = match parity {
                ParityName::Even => Parity::Even,
                ParityName::Odd => Parity::Odd,
            };
            InitialData::Lorentzian { bumps, parity }
        }
        RawInitial::Solitons { velocities, phases } => {
            if velocities.is_empty() || velocities.len() != phases.len() {
                return Err(config_err("initial", "velocities and phases must be non-empty and of equal length"));
            }
            InitialData::Solitons { velocities, phases }
        }
    })
}
