//! Order-8 Gauss implicit Runge-Kutta stepping for `y' = D y + E(t, y)`.
//!
//! `D` is a real band matrix (stiff, skew in the PDE case) and `E` the
//! explicit remainder (`J F(y) + S(t)` for the Benjamin system). The stage
//! equations
//!
//! ```text
//! Z = (I - tau [A (x) D])^{-1} (1 (x) y + tau [A (x) I] E(Z))
//! ```
//!
//! are solved by fixed-point iteration. The linear solve diagonalizes `A`
//! over the complex numbers; its eigenvalues come in two conjugate pairs, so
//! each application costs two complex band solves.

use nalgebra::{Complex, Matrix4, Vector4};
use num_complex::Complex64;

use crate::banded::{BandLu, BandMatrix};
use crate::exec::Exec;
use crate::transform::norm;
use crate::{Error, Result};

pub const STAGES: usize = 4;

/// Butcher tableau of the 4-stage Gauss method.
#[derive(Debug, Clone, PartialEq)]
pub struct IrkTableau {
    pub a: [[f64; STAGES]; STAGES],
    pub b: [f64; STAGES],
    pub c: [f64; STAGES],
}

/// Legendre polynomial `P_s(x)` and its derivative.
fn legendre(s: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=s {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = s as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, nodes increasing.
pub fn gauss_legendre_unit(s: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(s);
    let mut weights = Vec::with_capacity(s);
    for i in 0..s {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (s as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(s, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(s, x);
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

impl IrkTableau {
    /// Collocation construction: `c` the Gauss nodes on (0,1), `b` their
    /// weights, `A_ij` the integral over `[0, c_i]` of the `j`th Lagrange
    /// polynomial on `c`.
    pub fn gauss4() -> Self {
        let (cv, bv) = gauss_legendre_unit(STAGES);
        let mut c = [0.0; STAGES];
        let mut b = [0.0; STAGES];
        c.copy_from_slice(&cv);
        b.copy_from_slice(&bv);
        let lagrange = |j: usize, t: f64| {
            (0..STAGES)
                .filter(|&m| m != j)
                .map(|m| (t - c[m]) / (c[j] - c[m]))
                .product::<f64>()
        };
        let mut a = [[0.0; STAGES]; STAGES];
        for i in 0..STAGES {
            for (j, aij) in a[i].iter_mut().enumerate() {
                // 4-point Gauss on [0, c_i] is exact for the cubic.
                *aij = cv
                    .iter()
                    .zip(&bv)
                    .map(|(&t, &w)| c[i] * w * lagrange(j, c[i] * t))
                    .sum();
            }
        }
        Self { a, b, c }
    }

    fn a_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.a[i][j])
    }
}

/// Precomputed solver for `(I - tau [A (x) D]) z = r`.
///
/// With `A = S diag(lambda) S^{-1}` the system splits into
/// `(I - tau lambda_q D) w_q = (S^{-1} r)_q`; for real `r` the conjugate
/// eigenvalue gives the conjugate solution, so only one representative
/// `lambda_q` of each pair is factored.
#[derive(Debug, Clone)]
pub struct StageSolver {
    tau: f64,
    dim: usize,
    /// Columns of `S` for the two representatives.
    vectors: [[Complex64; STAGES]; 2],
    /// Rows of `S^{-1}` for the two representatives.
    inverse_rows: [[Complex64; STAGES]; 2],
    factors: [BandLu<Complex64>; 2],
    exec: Exec,
}

fn eigen_pairs(a: &Matrix4<f64>) -> Result<[(Complex64, Vector4<Complex64>); 2]> {
    let ac: Matrix4<Complex<f64>> = a.map(|v| Complex::new(v, 0.0));
    let mut eig: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();
    eig.retain(|z| z.im > 0.0);
    eig.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
    if eig.len() != 2 {
        return Err(Error::Singular(
            "Gauss matrix is expected to have two complex-conjugate eigenvalue pairs".into(),
        ));
    }
    let mut out = [(Complex64::new(0.0, 0.0), Vector4::zeros()); 2];
    for (slot, &lambda) in out.iter_mut().zip(&eig) {
        let shifted = ac - Matrix4::identity() * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap();
        let v = v_t.row(imin).transpose().map(|z| z.conj());
        // Refine the eigenvalue by the Rayleigh quotient.
        let lambda = (v.adjoint() * ac * v)[0] / (v.adjoint() * v)[0];
        *slot = (lambda, v);
    }
    Ok(out)
}

impl StageSolver {
    pub fn new(tau: f64, tableau: &IrkTableau, d: &BandMatrix, exec: Exec) -> Result<Self> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(Error::Config(format!("stepper.tau must be nonzero and finite, got {tau}")));
        }
        let a = tableau.a_matrix();
        let pairs = eigen_pairs(&a)?;

        // Full S with conjugate columns, then its inverse.
        let mut s = Matrix4::<Complex<f64>>::zeros();
        for (q, (_, v)) in pairs.iter().enumerate() {
            s.set_column(2 * q, v);
            s.set_column(2 * q + 1, &v.map(|z| z.conj()));
        }
        let s_inv = s
            .try_inverse()
            .ok_or_else(|| Error::Singular("eigenvector matrix of A".into()))?;

        let mut vectors = [[Complex64::new(0.0, 0.0); STAGES]; 2];
        let mut inverse_rows = [[Complex64::new(0.0, 0.0); STAGES]; 2];
        for q in 0..2 {
            for i in 0..STAGES {
                vectors[q][i] = s[(i, 2 * q)];
                inverse_rows[q][i] = s_inv[(2 * q, i)];
            }
        }
        let f0 = d.shifted_identity(pairs[0].0 * tau).factor()?;
        let f1 = d.shifted_identity(pairs[1].0 * tau).factor()?;
        Ok(Self {
            tau,
            dim: d.dim(),
            vectors,
            inverse_rows,
            factors: [f0, f1],
            exec,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn solve_pair(&self, q: usize, rhs: &[f64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for (j, coef) in self.inverse_rows[q].iter().enumerate() {
            for (wi, r) in w.iter_mut().zip(&rhs[j * n..(j + 1) * n]) {
                *wi += coef * r;
            }
        }
        self.factors[q].solve_in_place(&mut w);
        w
    }

    /// Solves for all four stages; `rhs` and `out` are stage-major, length `4 dim`.
    pub fn solve(&self, rhs: &[f64], out: &mut [f64]) {
        let n = self.dim;
        assert_eq!(rhs.len(), STAGES * n);
        assert_eq!(out.len(), STAGES * n);
        let (w0, w1) = if n >= 256 {
            self.exec
                .join(|| self.solve_pair(0, rhs), || self.solve_pair(1, rhs))
        } else {
            (self.solve_pair(0, rhs), self.solve_pair(1, rhs))
        };
        for i in 0..STAGES {
            let (s0, s1) = (self.vectors[0][i], self.vectors[1][i]);
            for (k, o) in out[i * n..(i + 1) * n].iter_mut().enumerate() {
                *o = 2.0 * ((s0 * w0[k]).re + (s1 * w1[k]).re);
            }
        }
    }
}

/// `y' = D y + E(t, y)`.
pub trait SemiDiscreteSystem: Sync {
    fn dim(&self) -> usize;

    /// The stiff linear part `D`.
    fn linear(&self) -> &BandMatrix;

    /// The explicit part `E(t, y)`, written into `out`.
    fn explicit(&self, t: f64, y: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub tau: f64,
    pub t_final: f64,
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub snapshot_stride: usize,
    pub exec: Exec,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            tau: 0.02,
            t_final: 1.0,
            fp_tol: 1e-13,
            fp_max_iters: 50,
            snapshot_stride: 1,
            exec: Exec::default(),
        }
    }
}

impl StepperConfig {
    pub fn new(tau: f64, t_final: f64) -> Self {
        Self {
            tau,
            t_final,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("stepper.tau must be positive, got {}", self.tau)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!(
                "stepper.t_final must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.t_final > 0.0 && self.tau > self.t_final {
            return Err(Error::Config(format!(
                "stepper.tau ({}) exceeds stepper.t_final ({})",
                self.tau, self.t_final
            )));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::Config("stepper.fp_tol must be positive".into()));
        }
        if self.fp_max_iters == 0 {
            return Err(Error::Config("stepper.fp_max_iters must be at least 1".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("stepper.snapshot_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct Step {
    pub y: Vec<f64>,
    pub iterations: usize,
}

/// Stage values `Z` and stage derivatives `K` of a converged step.
fn solve_stages<S: SemiDiscreteSystem + ?Sized>(
    system: &S,
    tableau: &IrkTableau,
    solver: &StageSolver,
    y: &[f64],
    t: f64,
    cfg: &StepperConfig,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let n = system.dim();
    let tau = solver.tau();
    let mut z: Vec<f64> = (0..STAGES).flat_map(|_| y.iter().copied()).collect();
    let mut z_next = vec![0.0; STAGES * n];
    let mut rhs = vec![0.0; STAGES * n];
    let mut explicit = vec![0.0; STAGES * n];
    let mut last_increment = f64::INFINITY;

    for it in 1..=cfg.fp_max_iters {
        {
            let z_ref = &z;
            cfg.exec.for_each_chunk_mut(&mut explicit, n, |i, out| {
                system.explicit(t + tableau.c[i] * tau, &z_ref[i * n..(i + 1) * n], out);
            });
        }
        for i in 0..STAGES {
            let row = &mut rhs[i * n..(i + 1) * n];
            row.copy_from_slice(y);
            for j in 0..STAGES {
                let aij = tau * tableau.a[i][j];
                if aij != 0.0 {
                    for (r, e) in row.iter_mut().zip(&explicit[j * n..(j + 1) * n]) {
                        *r += aij * e;
                    }
                }
            }
        }
        solver.solve(&rhs, &mut z_next);
        let increment = z_next
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut z, &mut z_next);
        last_increment = increment;
        if increment <= cfg.fp_tol * (1.0 + norm(&z)) {
            // K_i = D Z_i + E(Z_i); the explicit part is taken from the last
            // sweep, which differs from E(Z) by at most the tolerance.
            let d = system.linear();
            let mut k = explicit;
            for i in 0..STAGES {
                let dz = d.matvec(&z[i * n..(i + 1) * n]);
                for (kv, dv) in k[i * n..(i + 1) * n].iter_mut().zip(dz) {
                    *kv += dv;
                }
            }
            return Ok((z, k, it));
        }
    }
    Err(Error::StepFailure {
        t,
        tau,
        iterations: cfg.fp_max_iters,
        last_increment,
    })
}

/// One Gauss step of size `solver.tau()` from `(t, y)`.
pub fn irk8_step<S: SemiDiscreteSystem + ?Sized>(
    system: &S,
    tableau: &IrkTableau,
    solver: &StageSolver,
    y: &[f64],
    t: f64,
    cfg: &StepperConfig,
) -> Result<Step> {
    let n = system.dim();
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: y.len(),
        });
    }
    let (_, k, iterations) = solve_stages(system, tableau, solver, y, t, cfg)?;
    let tau = solver.tau();
    let mut y1 = y.to_vec();
    for i in 0..STAGES {
        let w = tau * tableau.b[i];
        for (yv, kv) in y1.iter_mut().zip(&k[i * n..(i + 1) * n]) {
            *yv += w * kv;
        }
    }
    Ok(Step { y: y1, iterations })
}

/// What the observer of [`integrate`] sees.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub t: f64,
    pub step: usize,
    pub y: &'a [f64],
    /// Largest fixed-point iteration count since the previous observation.
    pub fp_iters: usize,
}

/// Summary of a time integration.
#[derive(Debug, Clone)]
pub struct Integration {
    pub y: Vec<f64>,
    pub t: f64,
    pub steps: usize,
    pub max_fp_iters: usize,
    pub total_fp_iters: usize,
}

/// Advances `y0` from `t = 0` to `cfg.t_final`.
///
/// The observer runs at `t = 0`, after every `snapshot_stride` steps, and at
/// the final time. A final partial step is taken if
/// `t_final` is not a multiple of `tau`.
pub fn integrate<S, F>(system: &S, y0: &[f64], cfg: &StepperConfig, mut observer: F) -> Result<Integration>
where
    S: SemiDiscreteSystem + ?Sized,
    F: FnMut(Observation<'_>),
{
    cfg.validate()?;
    if y0.len() != system.dim() {
        return Err(Error::Dimension {
            expected: system.dim(),
            found: y0.len(),
        });
    }
    let mut y = y0.to_vec();
    observer(Observation {
        t: 0.0,
        step: 0,
        y: &y,
        fp_iters: 0,
    });
    let mut summary = Integration {
        y: Vec::new(),
        t: 0.0,
        steps: 0,
        max_fp_iters: 0,
        total_fp_iters: 0,
    };
    if cfg.t_final == 0.0 {
        summary.y = y;
        return Ok(summary);
    }

    let tableau = IrkTableau::gauss4();
    let full_steps = (cfg.t_final / cfg.tau * (1.0 + 1e-12)).floor() as usize;
    let remainder = cfg.t_final - full_steps as f64 * cfg.tau;
    let solver = StageSolver::new(cfg.tau, &tableau, system.linear(), cfg.exec)?;
    let tail_solver = if remainder > 1e-12 * cfg.tau {
        Some(StageSolver::new(remainder, &tableau, system.linear(), cfg.exec)?)
    } else {
        None
    };
    let total = full_steps + usize::from(tail_solver.is_some());
    let mut window_iters = 0;

    for step in 1..=total {
        let t = if step <= full_steps {
            (step - 1) as f64 * cfg.tau
        } else {
            full_steps as f64 * cfg.tau
        };
        let sv = if step <= full_steps {
            &solver
        } else {
            tail_solver.as_ref().unwrap()
        };
        let out = irk8_step(system, &tableau, sv, &y, t, cfg)?;
        y = out.y;
        summary.max_fp_iters = summary.max_fp_iters.max(out.iterations);
        summary.total_fp_iters += out.iterations;
        window_iters = window_iters.max(out.iterations);
        let t_new = if step == total { cfg.t_final } else { step as f64 * cfg.tau };
        if step % cfg.snapshot_stride == 0 || step == total {
            observer(Observation {
                t: t_new,
                step,
                y: &y,
                fp_iters: window_iters,
            });
            window_iters = 0;
        }
    }
    summary.y = y;
    summary.t = cfg.t_final;
    summary.steps = total;
    Ok(summary)
}

/// `y' = -y^3 + 2 cos 4t`, `y(0) = 1`, integrated to `t = 2` with
/// `tau in {0.2, 0.1, 0.05}`; errors against a `tau = 1/640` reference.
/// Returns the errors and the successive log2 ratios.
pub fn order_study() -> (Vec<f64>, Vec<f64>) {
    struct Forced(BandMatrix);
    impl SemiDiscreteSystem for Forced {
        fn dim(&self) -> usize {
            1
        }
        fn linear(&self) -> &BandMatrix {
            &self.0
        }
        fn explicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
            out[0] = -y[0] * y[0] * y[0] + 2.0 * (4.0 * t).cos();
        }
    }
    let sys = Forced(BandMatrix::zeros(1, 0, 0));
    let run = |tau: f64| {
        let cfg = StepperConfig {
            fp_tol: 1e-14,
            exec: Exec::Sequential,
            ..StepperConfig::new(tau, 2.0)
        };
        integrate(&sys, &[1.0], &cfg, |_| {})
            .expect("forced cubic integrates")
            .y[0]
    };
    let reference = run(2.0 / 1280.0);
    let errs: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&tau| (run(tau) - reference).abs()).collect();
    let slopes = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    (errs, slopes)
}
