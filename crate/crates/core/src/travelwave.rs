//! Even traveling waves `u(x,t) = v(x - c t)` of the Benjamin equation.
//!
//! With `kappa = sqrt(gamma/(alpha-c))` and `mu = gamma/(alpha-c)` the
//! profile satisfies
//!
//! ```text
//! R(v) = v + 2 sigma kappa H J v - mu J^2 v + delta/(alpha-c) I_n[v^2] = 0
//! ```
//!
//! on the even coefficients. `sigma` is raised from 0 (where the KdV `sech^2`
//! wave is exact) to the target by continuation, with a simplified Newton
//! iteration at each stage.

use nalgebra::{DMatrix, DVector};

use crate::banded::BandMatrix;
use crate::basis::BasisGrid;
use crate::exec::Exec;
use crate::operators::{h_matrix, j_matrix, ModelParams};
use crate::oracles::sech2_seed;
use crate::transform::{norm, SpectralField, Transform};
use crate::{Error, Result};

/// Zeroes the odd-index coefficients.
pub fn even_project(a: &SpectralField) -> SpectralField {
    a.even_part()
}

#[derive(Debug, Clone)]
pub struct WaveProblem {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub c: f64,
    pub sigma: f64,
    /// Number of uniform continuation stages.
    pub stages: usize,
    pub newton_max_iters: usize,
    /// Bisections allowed per failing stage.
    pub max_refinements: usize,
    pub exec: Exec,
    transform: Transform,
    hj: BandMatrix,
    j2: BandMatrix,
}

/// A converged profile with its continuation record.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    pub profile: SpectralField,
    pub residual: f64,
    pub sigmas: Vec<f64>,
    pub iterations: Vec<usize>,
    pub refinements: usize,
}

impl WaveProblem {
    pub fn new(alpha: f64, gamma: f64, delta: f64, c: f64, sigma: f64, grid: &BasisGrid) -> Result<Self> {
        if !(gamma > 0.0 && delta > 0.0) {
            return Err(Error::Config("traveling waves need equation.gamma > 0 and equation.delta > 0".into()));
        }
        if !(c < alpha) {
            return Err(Error::Config(format!("wave.c = {c} must be below equation.alpha = {alpha}")));
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::Config(format!("wave.sigma = {sigma} must lie in [0, 1)")));
        }
        let j = j_matrix(grid.p(), grid.ell());
        Ok(Self {
            alpha,
            gamma,
            delta,
            c,
            sigma,
            stages: 20,
            newton_max_iters: 50,
            max_refinements: 6,
            exec: Exec::default(),
            transform: Transform::new(grid),
            hj: h_matrix(grid.p()).matmul(&j),
            j2: j.matmul(&j),
        })
    }

    pub fn grid(&self) -> &BasisGrid {
        self.transform.grid()
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// `beta = 2 sigma sqrt(gamma (alpha - c))`.
    pub fn beta(&self) -> f64 {
        2.0 * self.sigma * (self.gamma * (self.alpha - self.c)).sqrt()
    }

    /// Parameters of the evolution equation this wave travels in.
    pub fn model_params(&self) -> ModelParams {
        ModelParams::new(self.alpha, self.beta(), self.gamma, self.delta)
    }

    /// Newton stopping threshold `1e-12 sqrt(2 (1 - sigma) / n)`.
    pub fn epsilon(&self, sigma: f64) -> f64 {
        1e-12 * (2.0 * (1.0 - sigma) / self.grid().n() as f64).sqrt()
    }

    /// `I_n` of the `sech^2` wave at `sigma = 0`.
    pub fn seed(&self) -> Result<SpectralField> {
        let (a, c, g, d) = (self.alpha, self.c, self.gamma, self.delta);
        Ok(even_project(&self.transform.try_interpolate(|x| sech2_seed(a, c, g, d, x))?))
    }

    fn ratios(&self) -> (f64, f64, f64) {
        let gap = self.alpha - self.c;
        ((self.gamma / gap).sqrt(), self.gamma / gap, self.delta / gap)
    }

    pub fn residual(&self, v: &SpectralField, sigma: f64) -> Result<SpectralField> {
        v.check(self.grid())?;
        let (kappa, mu, nu) = self.ratios();
        let a = &v.coeffs;
        let mut r = vec![0.0; a.len()];
        self.transform.square_into(a, nu, &mut r);
        let hj = self.hj.matvec(a);
        let j2 = self.j2.matvec(a);
        for k in 0..a.len() {
            r[k] += a[k] + 2.0 * sigma * kappa * hj[k] - mu * j2[k];
        }
        Ok(SpectralField::new(r, v.ell))
    }

    /// Jacobian of the residual at `v` restricted to even coefficients
    /// (`p x p`).
    pub fn jacobian(&self, v: &SpectralField, sigma: f64) -> Result<DMatrix<f64>> {
        v.check(self.grid())?;
        let p = self.grid().p();
        let (kappa, mu, nu) = self.ratios();
        let tr = &self.transform;
        let two_v: Vec<f64> = tr.inverse_vec(&v.coeffs).iter().map(|u| 2.0 * nu * u).collect();
        // Column k: coefficients of nu I_n[2 v phi_{2k}].
        let cols: Vec<Vec<f64>> = self.exec.map_range(p, |k| {
            let mut e = vec![0.0; 2 * p];
            e[2 * k] = 1.0;
            let mut vals = tr.inverse_vec(&e);
            vals.iter_mut().zip(&two_v).for_each(|(x, w)| *x *= w);
            let full = tr.forward_vec(&vals);
            full.into_iter().step_by(2).collect()
        });
        let mut m = DMatrix::from_fn(p, p, |i, k| cols[k][i]);
        for k in 0..p {
            m[(k, k)] += 1.0;
            let col = 2 * k;
            for row in (col.saturating_sub(6)..=(col + 6).min(2 * p - 1)).step_by(2) {
                let v = 2.0 * sigma * kappa * self.hj.get(row, col) - mu * self.j2.get(row, col);
                m[(row / 2, k)] += v;
            }
        }
        Ok(m)
    }

    /// Simplified Newton at fixed `sigma` from `v`. On failure returns the
    /// residual history.
    fn newton(&self, v: &SpectralField, sigma: f64) -> std::result::Result<(SpectralField, Vec<f64>), Vec<f64>> {
        let eps = self.epsilon(sigma);
        let mut v = v.clone();
        let mut r = match self.residual(&v, sigma) {
            Ok(r) => r,
            Err(_) => return Err(vec![]),
        };
        let mut history = vec![r.norm()];
        if history[0] <= eps {
            return Ok((v, history));
        }
        let lu = match self.jacobian(&v, sigma) {
            Ok(jac) => jac.lu(),
            Err(_) => return Err(history),
        };
        let mut best = history[0];
        let mut stalled = 0;
        for _ in 0..self.newton_max_iters {
            let rhs = DVector::from_iterator(self.grid().p(), r.coeffs.iter().step_by(2).copied());
            let Some(dv) = lu.solve(&rhs) else {
                return Err(history);
            };
            for (k, d) in dv.iter().enumerate() {
                v.coeffs[2 * k] -= d;
            }
            r = self.residual(&v, sigma).map_err(|_| history.clone())?;
            let rn = r.norm();
            history.push(rn);
            if !rn.is_finite() {
                return Err(history);
            }
            if rn <= eps {
                return Ok((v, history));
            }
            if rn < best {
                best = rn;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= 5 {
                    return Err(history);
                }
            }
        }
        Err(history)
    }

    /// Continuation from the seed to `self.sigma`.
    pub fn solve(&self) -> Result<WaveSolution> {
        if self.stages == 0 {
            return Err(Error::Config("wave.stages must be at least 1".into()));
        }
        let targets: Vec<f64> = if self.sigma == 0.0 {
            vec![0.0]
        } else {
            (1..=self.stages)
                .map(|j| self.sigma * j as f64 / self.stages as f64)
                .collect()
        };
        let mut v = self.seed()?;
        let mut sol = WaveSolution {
            profile: v.clone(),
            residual: f64::INFINITY,
            sigmas: Vec::new(),
            iterations: Vec::new(),
            refinements: 0,
        };
        let mut prev = 0.0;
        let mut stage = 0;
        for &target in &targets {
            let mut next = target;
            let mut depth = 0;
            // Advance prev -> target, bisecting on failure.
            loop {
                stage += 1;
                match self.newton(&v, next) {
                    Ok((w, history)) => {
                        v = w;
                        sol.residual = *history.last().unwrap();
                        sol.sigmas.push(next);
                        sol.iterations.push(history.len() - 1);
                        prev = next;
                        if next == target {
                            break;
                        }
                        next = target;
                        depth = 0;
                    }
                    Err(history) => {
                        if depth >= self.max_refinements {
                            return Err(Error::Continuation {
                                stage,
                                sigma: next,
                                reason: format!(
                                    "simplified Newton failed to reach {:.3e} after {depth} bisections",
                                    self.epsilon(next)
                                ),
                                history,
                            });
                        }
                        depth += 1;
                        sol.refinements += 1;
                        next = 0.5 * (prev + next);
                    }
                }
            }
        }
        sol.profile = v;
        Ok(sol)
    }
}

/// Free-function form of [`WaveProblem::residual`].
pub fn wave_residual(v: &SpectralField, sigma: f64, prob: &WaveProblem) -> Result<SpectralField> {
    prob.residual(v, sigma)
}

/// Coefficients of `v(x - shift)` by re-interpolation.
pub fn translate(v: &SpectralField, shift: f64, transform: &Transform) -> SpectralField {
    transform.interpolate(|x| v.eval(x - shift))
}

/// Relative defect used when reporting residuals.
pub fn relative_residual(r: &SpectralField, v: &SpectralField) -> f64 {
    norm(&r.coeffs) / norm(&v.coeffs).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn problem(p: usize, sigma: f64) -> WaveProblem {
        let grid = BasisGrid::new(p, 8.0).unwrap();
        WaveProblem::new(1.0, 1.0, 1.0, 0.5, sigma, &grid).unwrap()
    }

    #[test]
    fn even_projection() {
        let a = SpectralField::new(vec![1.0, 2.0, 3.0, 4.0], 1.0);
        let e = even_project(&a);
        assert_eq!(e.coeffs, vec![1.0, 0.0, 3.0, 0.0]);
        assert_eq!(even_project(&e), e);

        let grid = BasisGrid::new(64, 8.0).unwrap();
        let tr = Transform::new(&grid);
        let f = tr.interpolate(|x| (-x * x / 10.0).exp() / (1.0 + x * x));
        for k in (1..f.len()).step_by(2) {
            assert!(f.coeffs[k].abs() <= 1e-12);
        }
    }

    #[test]
    fn residual_basics() {
        let prob = problem(64, 0.3);
        let z = SpectralField::zeros(prob.grid());
        assert!(prob.residual(&z, 0.3).unwrap().coeffs.iter().all(|&v| v == 0.0));

        let seed = prob.seed().unwrap();
        let r1 = prob.residual(&seed, 0.3).unwrap();
        let two = SpectralField::new(seed.coeffs.iter().map(|v| 2.0 * v).collect(), seed.ell);
        let r2 = prob.residual(&two, 0.3).unwrap();
        let gap = r2.coeffs.iter().zip(&r1.coeffs).map(|(a, b)| (a - 2.0 * b).abs()).fold(0.0, f64::max);
        assert!(gap > 1e-3);
    }

    #[test]
    fn seed_solves_sigma_zero() {
        let prob = problem(256, 0.0);
        let seed = prob.seed().unwrap();
        assert!(prob.residual(&seed, 0.0).unwrap().norm() <= 1e-6);
    }

    #[test]
    fn jacobian_matches_differences() {
        let prob = problem(32, 0.6);
        let v = prob.seed().unwrap();
        let jac = prob.jacobian(&v, 0.6).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..5 {
            let w: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = 1e-6;
            let shifted = |s: f64| {
                let mut c = v.coeffs.clone();
                for (k, wk) in w.iter().enumerate() {
                    c[2 * k] += s * wk;
                }
                prob.residual(&SpectralField::new(c, v.ell), 0.6).unwrap()
            };
            let (rp, rm) = (shifted(h), shifted(-h));
            let lw = &jac * DVector::from_vec(w.clone());
            let num: f64 = (0..32)
                .map(|k| ((rp.coeffs[2 * k] - rm.coeffs[2 * k]) / (2.0 * h) - lw[k]).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(num <= 1e-6 * lw.norm(), "{num} vs {}", lw.norm());
            // Odd components of the residual stay zero.
            assert!((0..32).all(|k| rp.coeffs[2 * k + 1].abs() < 1e-14));
        }
    }

    #[test]
    fn sigma_zero_polishes_the_seed() {
        let prob = problem(256, 0.0);
        let sol = prob.solve().unwrap();
        assert!(sol.residual <= prob.epsilon(0.0));
        let seed = prob.seed().unwrap();
        let diff: Vec<f64> = sol.profile.coeffs.iter().zip(&seed.coeffs).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) <= 1e-6);
    }

    #[test]
    fn continuation_converges_and_stays_even() {
        let mut prob = problem(128, 0.8);
        prob.stages = 8;
        let sol = prob.solve().unwrap();
        assert!(sol.residual <= prob.epsilon(0.8), "{}", sol.residual);
        assert_eq!(*sol.sigmas.last().unwrap(), 0.8);
        assert!(sol.profile.coeffs.iter().skip(1).step_by(2).all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_problems() {
        let grid = BasisGrid::new(8, 8.0).unwrap();
        assert!(WaveProblem::new(1.0, 1.0, 1.0, 1.5, 0.5, &grid).is_err());
        assert!(WaveProblem::new(1.0, 1.0, 1.0, 0.5, 1.0, &grid).is_err());
        assert!(WaveProblem::new(1.0, -1.0, 1.0, 0.5, 0.5, &grid).is_err());
    }

    #[test]
    fn stagnation_is_reported() {
        let mut prob = problem(64, 0.5);
        prob.stages = 1;
        prob.newton_max_iters = 1;
        prob.max_refinements = 0;
        let err = prob.solve().unwrap_err();
        assert!(matches!(err, Error::Continuation { stage: 1, .. }));
    }
}
