//! Error metrics and the drivers for the six reference experiments.
//!
//! | id | initial data | equation |
//! |----|--------------|----------|
//! | 1, 2 | three Lorentzian bumps, even / odd | `alpha=beta=gamma=delta=1` plus manufactured source |
//! | 3, 4 | KdV 2- and 3-solitons | `alpha=beta=0, gamma=-1, delta=-3` |
//! | 5, 6 | two computed traveling waves | `alpha=gamma=delta=1`, `beta` from the first wave |

use std::sync::Arc;
use std::time::Instant;

use crate::basis::{eval_series, BasisGrid};
use crate::exec::Exec;
use crate::integrator::StepperConfig;
use crate::model::{make_source, BenjaminSystem};
use crate::operators::ModelParams;
use crate::oracles::{Bump, ExactSolution, LorentzianFamily, Parity, SolitonFamily};
use crate::transform::{SpectralField, Transform};
use crate::travelwave::{WaveProblem, WaveSolution};
use crate::{Error, Result};

/// Evaluates `|u_n - u|` on a fixed set of points for one grid.
///
/// L2: weighted quadrature on the MTC grid with `refine * p` nodes; the
/// expansion is evaluated there exactly by zero padding. The tail of the
/// error outside the grid is not seen, but the weights cover the whole line.
///
/// Linf: the refined nodes plus `n_samples` uniform points on
/// `[-4 ell, 4 ell]`.
#[derive(Debug, Clone)]
pub struct ErrorMeter {
    p: usize,
    refined: Transform,
    uniform: Vec<f64>,
    exec: Exec,
}

impl ErrorMeter {
    pub fn new(grid: &BasisGrid, refine: usize, n_samples: usize, exec: Exec) -> Result<Self> {
        if refine < 2 {
            return Err(Error::Config(format!("error.refine must be at least 2, got {refine}")));
        }
        if n_samples < 10 * grid.p() {
            return Err(Error::Config(format!(
                "n_samples = {n_samples} is below 10 p = {}",
                10 * grid.p()
            )));
        }
        let refined = Transform::new(&BasisGrid::new(refine * grid.p(), grid.ell())?);
        let half = 4.0 * grid.ell();
        let uniform = (0..n_samples)
            .map(|i| -half + 2.0 * half * i as f64 / (n_samples - 1).max(1) as f64)
            .collect();
        Ok(Self {
            p: grid.p(),
            refined,
            uniform,
            exec,
        })
    }

    /// `(l2, linf)`.
    pub fn measure(&self, y: &SpectralField, exact: &(dyn Fn(f64) -> f64 + Sync)) -> Result<(f64, f64)> {
        if y.len() != 2 * self.p {
            return Err(Error::Dimension {
                expected: 2 * self.p,
                found: y.len(),
            });
        }
        let rg = self.refined.grid();
        if y.ell != rg.ell() {
            return Err(Error::Scale {
                field: y.ell,
                grid: rg.ell(),
            });
        }
        let mut padded = vec![0.0; rg.len()];
        padded[..y.len()].copy_from_slice(&y.coeffs);
        let values = self.refined.inverse_vec(&padded);
        let exact_nodes = self.exec.map_slice(rg.nodes(), |&x| exact(x));
        let mut l2 = 0.0;
        let mut linf: f64 = 0.0;
        for ((v, e), w) in values.iter().zip(&exact_nodes).zip(rg.weights()) {
            let d = v - e;
            l2 += w * d * d;
            linf = linf.max(d.abs());
        }
        let diffs = self
            .exec
            .map_slice(&self.uniform, |&x| (eval_series(&y.coeffs, y.ell, x) - exact(x)).abs());
        for d in diffs {
            linf = linf.max(d);
        }
        Ok((l2.sqrt(), linf))
    }
}

/// `||u_n - u||_{L2}` by refined-grid quadrature.
pub fn l2_error(y: &SpectralField, exact: impl Fn(f64) -> f64 + Sync, grid: &BasisGrid, refine: usize) -> Result<f64> {
    ErrorMeter::new(grid, refine, 10 * grid.p(), Exec::Sequential)?
        .measure(y, &exact)
        .map(|r| r.0)
}

/// `max |u_n - u|` over the refined nodes (`refine = 4`) and a uniform grid.
pub fn linf_error(
    y: &SpectralField,
    exact: impl Fn(f64) -> f64 + Sync,
    grid: &BasisGrid,
    n_samples: usize,
) -> Result<f64> {
    ErrorMeter::new(grid, 4, n_samples, Exec::Sequential)?
        .measure(y, &exact)
        .map(|r| r.1)
}

/// Two traveling waves `v_1(x + shift_1) + v_2(x + shift_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePair {
    pub c1: f64,
    pub c2: f64,
    pub sigma1: f64,
    pub shift1: f64,
    pub shift2: f64,
}

impl WavePair {
    /// `beta = sigma_1 sqrt(4 gamma (alpha - c_1))`.
    pub fn beta(&self, params: &ModelParams) -> f64 {
        self.sigma1 * (4.0 * params.gamma * (params.alpha - self.c1)).sqrt()
    }

    pub fn sigma2(&self, params: &ModelParams) -> f64 {
        self.beta(params) / (4.0 * params.gamma * (params.alpha - self.c2)).sqrt()
    }
}

/// Initial data given by a closed-form family instead of an example id.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Lorentzian { bumps: Vec<Bump>, parity: Parity },
    Solitons { velocities: Vec<f64>, phases: Vec<f64> },
}

impl InitialData {
    pub fn exact(&self) -> Result<Arc<dyn ExactSolution>> {
        Ok(match self {
            Self::Lorentzian { bumps, parity } => Arc::new(LorentzianFamily::new(bumps.clone(), *parity)?),
            Self::Solitons { velocities, phases } => Arc::new(SolitonFamily::new(velocities, phases)?),
        })
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub example: u8,
    pub p: usize,
    pub ell: f64,
    /// For examples 5 and 6, `beta` is recomputed from the wave pair.
    pub params: ModelParams,
    pub tau: f64,
    pub t_final: f64,
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub refine: usize,
    pub snapshot_stride: usize,
    pub waves: Option<WavePair>,
    /// Replaces the example's initial data when set.
    pub initial: Option<InitialData>,
    pub wave_stages: usize,
    pub record_timing: bool,
    pub exec: Exec,
}

impl RunSpec {
    /// The published configuration of example `id`.
    pub fn example(id: u8) -> Result<Self> {
        let base = Self {
            example: id,
            p: 64,
            ell: 8.0,
            params: ModelParams::new(1.0, 1.0, 1.0, 1.0),
            tau: 0.02,
            t_final: 2.0,
            fp_tol: 1e-13,
            fp_max_iters: 50,
            refine: 4,
            snapshot_stride: 5,
            waves: None,
            initial: None,
            wave_stages: 20,
            record_timing: true,
            exec: Exec::default(),
        };
        let kdv = ModelParams::new(0.0, 0.0, -1.0, -3.0);
        let waves = ModelParams::new(1.0, 0.0, 1.0, 1.0);
        Ok(match id {
            1 | 2 => base,
            3 | 4 => Self {
                params: kdv,
                tau: 0.01,
                t_final: 5.0,
                snapshot_stride: 10,
                ..base
            },
            5 | 6 => {
                let pair = if id == 5 {
                    WavePair {
                        c1: 0.5,
                        c2: -0.5,
                        sigma1: 0.95,
                        shift1: 20.0,
                        shift2: -20.0,
                    }
                } else {
                    WavePair {
                        c1: 0.75,
                        c2: 0.1,
                        sigma1: 0.95,
                        shift1: 30.0,
                        shift2: 4.0,
                    }
                };
                Self {
                    p: 2048,
                    params: ModelParams {
                        beta: pair.beta(&waves),
                        ..waves
                    },
                    t_final: 80.0,
                    snapshot_stride: 250,
                    waves: Some(pair),
                    ..base
                }
            }
            _ => return Err(Error::Config(format!("example must be 1..=6, got {id}"))),
        })
    }

    /// `n = 2p - 1`.
    pub fn n(&self) -> usize {
        2 * self.p - 1
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            tau: self.tau,
            t_final: self.t_final,
            fp_tol: self.fp_tol,
            fp_max_iters: self.fp_max_iters,
            snapshot_stride: 1,
            exec: self.exec,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial.is_none() && !(1..=6).contains(&self.example) {
            return Err(Error::Config(format!("example must be 1..=6, got {}", self.example)));
        }
        if self.p == 0 {
            return Err(Error::Config("grid.p must be positive".into()));
        }
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return Err(Error::Config(format!("grid.ell must be positive, got {}", self.ell)));
        }
        if self.refine < 2 {
            return Err(Error::Config(format!("error.refine must be at least 2, got {}", self.refine)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("stepper.snapshot_stride must be at least 1".into()));
        }
        if self.initial.is_none() && (5..=6).contains(&self.example) && self.waves.is_none() {
            return Err(Error::Config("examples 5 and 6 need a wave pair".into()));
        }
        self.params.validate()?;
        self.stepper().validate()
    }

    fn exact(&self) -> Result<Option<Arc<dyn ExactSolution>>> {
        if let Some(init) = &self.initial {
            return init.exact().map(Some);
        }
        Ok(match self.example {
            1 => Some(Arc::new(LorentzianFamily::example1())),
            2 => Some(Arc::new(LorentzianFamily::example2())),
            3 => Some(Arc::new(SolitonFamily::example3())),
            4 => Some(Arc::new(SolitonFamily::example4())),
            _ => None,
        })
    }

    /// Soliton data evolved by the KdV equation they solve needs no source.
    fn is_unforced(&self) -> bool {
        let solitons = match &self.initial {
            Some(init) => matches!(init, InitialData::Solitons { .. }),
            None => matches!(self.example, 3 | 4),
        };
        solitons && self.params == ModelParams::new(0.0, 0.0, -1.0, -3.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub t_or_n: f64,
    pub l2_error: f64,
    pub linf_error: f64,
    pub hamiltonian_drift: f64,
    pub fp_iters_max: usize,
    pub wall_ms: f64,
}

/// Largest `|u|` away from the waves, to the left and to the right.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub crests: [f64; 2],
    pub behind: f64,
    pub ahead: f64,
}

#[derive(Debug, Clone)]
pub struct WaveReport {
    pub profiles: [WaveSolution; 2],
    pub sigmas: [f64; 2],
    pub tails: TailReport,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub spec: RunSpec,
    /// One row per snapshot time.
    pub rows: Vec<ErrorRow>,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub final_field: SpectralField,
    pub max_l2_error: f64,
    pub max_linf_error: f64,
    pub max_hamiltonian_drift: f64,
    pub fp_iters_max: usize,
    pub steps: usize,
    pub wall_ms: f64,
    pub waves: Option<WaveReport>,
}

fn elapsed_ms(start: Instant, record: bool) -> f64 {
    if record {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

/// Solves the two profiles of a wave pair on `grid`.
pub fn solve_pair(
    pair: &WavePair,
    params: &ModelParams,
    grid: &BasisGrid,
    stages: usize,
    exec: Exec,
) -> Result<[WaveSolution; 2]> {
    let sigma2 = pair.sigma2(params);
    let solve = |c: f64, sigma: f64| {
        let mut prob = WaveProblem::new(params.alpha, params.gamma, params.delta, c, sigma, grid)?;
        prob.stages = stages;
        prob.exec = exec;
        prob.solve()
    };
    let (a, b) = exec.join(|| solve(pair.c1, pair.sigma1), || solve(pair.c2, sigma2));
    Ok([a?, b?])
}

/// Locates the two deepest local minima of `u` on `[-half, half]`.
fn find_crests(y: &SpectralField, half: f64, exec: Exec) -> [f64; 2] {
    let h = 0.01;
    let m = (2.0 * half / h) as usize + 1;
    let xs: Vec<f64> = (0..m).map(|i| -half + i as f64 * h).collect();
    let us = exec.map_slice(&xs, |&x| eval_series(&y.coeffs, y.ell, x));
    let mut minima: Vec<(f64, f64)> = (1..m - 1)
        .filter(|&i| us[i] < us[i - 1] && us[i] <= us[i + 1])
        .map(|i| {
            // Parabolic refinement.
            let (a, b, c) = (us[i - 1], us[i], us[i + 1]);
            let denom = a - 2.0 * b + c;
            let dx = if denom > 0.0 { 0.5 * h * (a - c) / denom } else { 0.0 };
            (xs[i] + dx, b)
        })
        .collect();
    minima.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut crests = [
        minima.first().map_or(0.0, |v| v.0),
        minima.get(1).map_or(0.0, |v| v.0),
    ];
    crests.sort_by(|a, b| a.partial_cmp(b).unwrap());
    crests
}

/// Post-interaction radiation: `u - v_a(x - x_a) - v_b(x - x_b)` with the
/// profiles placed at the detected crests, measured outside windows of
/// half-width `window` around the crests.
pub fn tail_amplitudes(
    y: &SpectralField,
    profiles: [&SpectralField; 2],
    expected: [f64; 2],
    window: f64,
    exec: Exec,
) -> TailReport {
    let half = 10.0 * y.ell;
    let crests = find_crests(y, half, exec);
    // Match profiles to crests by expected position.
    let (first, second) = if (expected[0] - crests[0]).abs() + (expected[1] - crests[1]).abs()
        <= (expected[0] - crests[1]).abs() + (expected[1] - crests[0]).abs()
    {
        ((profiles[0], crests[0]), (profiles[1], crests[1]))
    } else {
        ((profiles[0], crests[1]), (profiles[1], crests[0]))
    };
    let h = 0.05;
    let m = (2.0 * half / h) as usize + 1;
    let xs: Vec<f64> = (0..m).map(|i| -half + i as f64 * h).collect();
    let resid = exec.map_slice(&xs, |&x| {
        eval_series(&y.coeffs, y.ell, x)
            - first.0.eval(x - first.1)
            - second.0.eval(x - second.1)
    });
    let (lo, hi) = (crests[0] - window, crests[1] + window);
    let mut behind: f64 = 0.0;
    let mut ahead: f64 = 0.0;
    for (x, r) in xs.iter().zip(&resid) {
        if *x < lo {
            behind = behind.max(r.abs());
        } else if *x > hi {
            ahead = ahead.max(r.abs());
        }
    }
    TailReport {
        crests,
        behind,
        ahead,
    }
}

/// Runs one experiment.
pub fn run_example(spec: &RunSpec) -> Result<RunReport> {
    spec.validate()?;
    let start = Instant::now();
    let grid = BasisGrid::new(spec.p, spec.ell)?;
    let mut system = BenjaminSystem::new(spec.params, &grid)?.with_exec(spec.exec);
    let exact = spec.exact()?;

    let mut wave_profiles = None;
    let y0 = match (&exact, &spec.waves) {
        (Some(u), _) => {
            if !spec.is_unforced() {
                system = system.with_source(make_source(u.clone(), spec.params)?);
            }
            system.transform().interpolate(|x| u.value(x, 0.0))
        }
        (None, Some(pair)) if spec.initial.is_none() => {
            let profiles = solve_pair(pair, &spec.params, &grid, spec.wave_stages, spec.exec)?;
            let (v1, v2) = (&profiles[0].profile, &profiles[1].profile);
            let values = spec.exec.map_slice(grid.nodes(), |&x| {
                v1.eval(x + pair.shift1) + v2.eval(x + pair.shift2)
            });
            let y0 = SpectralField::new(system.transform().forward_vec(&values), grid.ell());
            wave_profiles = Some(profiles);
            y0
        }
        _ => unreachable!("validated"),
    };

    let meter = match exact {
        Some(_) => Some(ErrorMeter::new(&grid, spec.refine, 10 * spec.p, spec.exec)?),
        None => None,
    };
    let g0 = system.hamiltonian(&y0)?;
    let mut report = RunReport {
        spec: spec.clone(),
        rows: Vec::new(),
        snapshots: Vec::new(),
        final_field: y0.clone(),
        max_l2_error: if meter.is_some() { 0.0 } else { f64::NAN },
        max_linf_error: if meter.is_some() { 0.0 } else { f64::NAN },
        max_hamiltonian_drift: 0.0,
        fp_iters_max: 0,
        steps: 0,
        wall_ms: 0.0,
        waves: None,
    };
    let mut failure = None;
    let mut row_iters = 0;
    let outcome = system.integrate(&y0, &spec.stepper(), |obs| {
        if failure.is_some() {
            return;
        }
        let field = SpectralField::new(obs.y.to_vec(), spec.ell);
        let (l2, linf) = match (&meter, &exact) {
            (Some(m), Some(u)) => match m.measure(&field, &|x| u.value(x, obs.t)) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            },
            _ => (f64::NAN, f64::NAN),
        };
        let drift = match system.hamiltonian(&field) {
            Ok(g) => (g - g0).abs(),
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        report.max_l2_error = report.max_l2_error.max(l2);
        report.max_linf_error = report.max_linf_error.max(linf);
        report.max_hamiltonian_drift = report.max_hamiltonian_drift.max(drift);
        row_iters = row_iters.max(obs.fp_iters);
        let last = (obs.t - spec.t_final).abs() <= 1e-12 * spec.t_final.max(1.0);
        if obs.step % spec.snapshot_stride == 0 || last {
            report.rows.push(ErrorRow {
                t_or_n: obs.t,
                l2_error: l2,
                linf_error: linf,
                hamiltonian_drift: drift,
                fp_iters_max: row_iters,
                wall_ms: elapsed_ms(start, spec.record_timing),
            });
            report.snapshots.push((obs.t, field));
            row_iters = 0;
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let outcome = outcome?;
    report.final_field = SpectralField::new(outcome.y, spec.ell);
    report.fp_iters_max = outcome.max_fp_iters;
    report.steps = outcome.steps;

    if let (Some(pair), Some(profiles)) = (spec.waves, wave_profiles) {
        let expected = [
            -pair.shift1 + pair.c1 * spec.t_final,
            -pair.shift2 + pair.c2 * spec.t_final,
        ];
        let tails = tail_amplitudes(
            &report.final_field,
            [&profiles[0].profile, &profiles[1].profile],
            expected,
            10.0,
            spec.exec,
        );
        report.waves = Some(WaveReport {
            sigmas: [pair.sigma1, pair.sigma2(&spec.params)],
            profiles,
            tails,
        });
    }
    report.wall_ms = elapsed_ms(start, spec.record_timing);
    Ok(report)
}

/// Rows keyed by `n`, holding the maxima over `[0, T]`.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub example: u8,
    pub rows: Vec<ErrorRow>,
    /// `(n, message)` for configurations that failed; their rows are absent.
    pub failures: Vec<(usize, String)>,
}

impl SweepReport {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Checks that every `n` has the form `2^k - 1` with `k >= 1`.
pub fn parse_n_list(n_list: &[usize]) -> Result<Vec<usize>> {
    if n_list.is_empty() {
        return Err(Error::Config("n-list must not be empty".into()));
    }
    for &n in n_list {
        if n == 0 || !(n + 1).is_power_of_two() {
            return Err(Error::Config(format!("n = {n} is not of the form 2^k - 1")));
        }
    }
    Ok(n_list.to_vec())
}

/// One run per `n`, in parallel across `n` under [`Exec::Parallel`].
pub fn convergence_sweep(base: &RunSpec, n_list: &[usize]) -> Result<SweepReport> {
    let ns = parse_n_list(n_list)?;
    let results = base.exec.map_slice(&ns, |&n| {
        let spec = RunSpec {
            p: n.div_ceil(2),
            ..base.clone()
        };
        run_example(&spec)
    });
    let mut report = SweepReport {
        example: base.example,
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for (n, res) in ns.iter().zip(results) {
        match res {
            Ok(r) => report.rows.push(ErrorRow {
                t_or_n: *n as f64,
                l2_error: r.max_l2_error,
                linf_error: r.max_linf_error,
                hamiltonian_drift: r.max_hamiltonian_drift,
                fp_iters_max: r.fp_iters_max,
                wall_ms: r.wall_ms,
            }),
            Err(e) => report.failures.push((*n, e.to_string())),
        }
    }
    Ok(report)
}

/// One quick structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Fast structural checks of the discretization (a few seconds).
pub fn selftest() -> Vec<Check> {
    use crate::operators::{h_matrix, j_matrix};
    use crate::transform::{forward_naive, NodalField};

    let mut checks = Vec::new();
    let mut push = |name, value: f64, tol: f64| {
        checks.push(Check {
            name,
            passed: value <= tol,
            detail: format!("{value:.3e} (tolerance {tol:.0e})"),
        })
    };

    let grid = BasisGrid::new(32, 8.0).expect("valid grid");
    let tr = Transform::new(&grid);
    let n = grid.len();

    let mut ortho: f64 = 0.0;
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            tr.inverse_vec(&e)
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            let g: f64 = (0..n).map(|m| grid.weights()[m] * cols[i][m] * cols[j][m]).sum();
            ortho = ortho.max((g - f64::from(u8::from(i == j))).abs());
        }
    }
    push("discrete orthonormality", ortho, 1e-12);

    let values: Vec<f64> = grid.nodes().iter().map(|&x| (0.3 * x).sin() / (1.0 + x * x)).collect();
    let coeffs = tr.forward_vec(&values);
    let back = tr.inverse_vec(&coeffs);
    let round = values.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    push("transform roundtrip", round, 1e-12);

    let naive = forward_naive(&NodalField::new(values, grid.ell()), &grid).expect("matching grid");
    let scale = coeffs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let fast = coeffs.iter().zip(&naive.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    push("fast vs naive transform", fast / scale, 1e-12);

    push("J antisymmetry", j_matrix(32, 8.0).antisymmetry_defect(), 0.0);
    let h = h_matrix(32);
    let h2 = h.matmul(&h);
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(2)..(i + 3).min(n) {
            defect = defect.max((h2.get(i, j) + f64::from(u8::from(i == j))).abs());
        }
    }
    push("H^2 = -I", defect, 0.0);

    let (_, slopes) = crate::integrator::order_study();
    let worst = slopes.iter().map(|s| (s - 8.0).abs()).fold(0.0, f64::max);
    push("IRK8 order slope |s - 8|", worst, 0.5);

    let wave = WaveProblem::new(1.0, 1.0, 1.0, 0.5, 0.0, &BasisGrid::new(256, 8.0).expect("valid grid"))
        .expect("valid wave");
    let r = wave.seed().and_then(|s| wave.residual(&s, 0.0)).map_or(f64::INFINITY, |r| r.norm());
    push("sech2 seed residual", r, 1e-6);

    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::phi;

    #[test]
    fn metrics_vanish_on_exact_representations() {
        let grid = BasisGrid::new(16, 8.0).unwrap();
        let y = SpectralField::new((0..32).map(|k| 1.0 / (1.0 + k as f64)).collect(), 8.0);
        let exact = |x: f64| y.eval(x);
        assert!(l2_error(&y, exact, &grid, 4).unwrap() < 1e-13);
        assert!(linf_error(&y, exact, &grid, 160).unwrap() < 1e-13);
        let z = SpectralField::zeros(&grid);
        assert_eq!(linf_error(&z, |_| 0.0, &grid, 160).unwrap(), 0.0);

        let grid2 = BasisGrid::new(8, 2.0).unwrap();
        let f = |x: f64| (std::f64::consts::PI / 2.0).sqrt() / (1.0 + x * x);
        let yl = Transform::new(&grid2).interpolate(f);
        assert!((f(0.7) - std::f64::consts::PI / 2.0 * phi(0, 0.7, 2.0)).abs() < 1e-15);
        assert!(l2_error(&yl, f, &grid2, 4).unwrap() < 1e-13);
    }

    #[test]
    fn meter_preconditions() {
        let grid = BasisGrid::new(16, 8.0).unwrap();
        assert!(ErrorMeter::new(&grid, 1, 160, Exec::Sequential).is_err());
        assert!(ErrorMeter::new(&grid, 4, 159, Exec::Sequential).is_err());
    }

    #[test]
    fn error_decreases_with_resolution() {
        let u = LorentzianFamily::example1();
        let mut last = f64::INFINITY;
        for p in [32, 64] {
            let grid = BasisGrid::new(p, 8.0).unwrap();
            let y = Transform::new(&grid).interpolate(|x| u.value(x, 0.0));
            let e = l2_error(&y, |x| u.value(x, 0.0), &grid, 4).unwrap();
            assert!(e < last);
            last = e;
        }
    }

    #[test]
    fn refine_doubling_is_stable() {
        let u = LorentzianFamily::example1();
        let grid = BasisGrid::new(32, 8.0).unwrap();
        let y = Transform::new(&grid).interpolate(|x| u.value(x, 0.0));
        let e4 = l2_error(&y, |x| u.value(x, 0.0), &grid, 4).unwrap();
        let e8 = l2_error(&y, |x| u.value(x, 0.0), &grid, 8).unwrap();
        assert!((e4 - e8).abs() <= 0.05 * e8, "{e4} vs {e8}");
    }

    #[test]
    fn example_specs() {
        for id in 1..=6 {
            RunSpec::example(id).unwrap().validate().unwrap();
        }
        assert!(RunSpec::example(0).is_err());
        let s5 = RunSpec::example(5).unwrap();
        let pair = s5.waves.unwrap();
        assert!((s5.params.beta - 0.95 * 2f64.sqrt()).abs() < 1e-15);
        assert!((pair.sigma2(&s5.params) - 0.95 * (2.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert_eq!(s5.n(), 4095);
        assert_eq!(RunSpec::example(1).unwrap().n(), 127);
    }

    #[test]
    fn custom_initial_data() {
        let spec = RunSpec {
            p: 32,
            t_final: 0.1,
            initial: Some(InitialData::Solitons {
                velocities: vec![1.0],
                phases: vec![0.0],
            }),
            ..RunSpec::example(3).unwrap()
        };
        let r = run_example(&spec).unwrap();
        assert!(r.max_l2_error < 1e-6);
        let bad = RunSpec {
            initial: Some(InitialData::Solitons {
                velocities: vec![-1.0],
                phases: vec![0.0],
            }),
            ..spec
        };
        assert!(run_example(&bad).is_err());
    }

    #[test]
    fn n_list_validation() {
        assert!(parse_n_list(&[15, 31]).is_ok());
        assert!(parse_n_list(&[16]).is_err());
        assert!(parse_n_list(&[]).is_err());
    }

    #[test]
    fn short_runs_are_deterministic_across_policies() {
        let spec = RunSpec {
            p: 16,
            t_final: 0.2,
            record_timing: false,
            ..RunSpec::example(1).unwrap()
        };
        let a = run_example(&RunSpec {
            exec: Exec::Sequential,
            ..spec.clone()
        })
        .unwrap();
        let b = run_example(&RunSpec {
            exec: Exec::Parallel,
            ..spec
        })
        .unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.final_field, b.final_field);
        assert_eq!(a.rows.len(), 3);
        assert!(a.rows.iter().all(|r| r.wall_ms == 0.0));
    }

    #[test]
    fn sweep_rows_and_singletons() {
        let spec = RunSpec {
            t_final: 0.1,
            ..RunSpec::example(3).unwrap()
        };
        let one = convergence_sweep(&spec, &[31]).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.rows[0].t_or_n, 31.0);
        assert!(!one.is_partial());
        let two = convergence_sweep(&spec, &[15, 63]).unwrap();
        assert!(two.rows[1].l2_error < two.rows[0].l2_error);
    }

    #[test]
    fn selftest_passes() {
        for c in selftest() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
