//! The semi-discrete Benjamin system `Y' = D Y + J F(Y) + S(t)`.

use std::sync::Arc;

use crate::basis::BasisGrid;
use crate::exec::Exec;
use crate::integrator::{self, Integration, Observation, SemiDiscreteSystem, StepperConfig};
use crate::operators::{ModelParams, OperatorBundle};
use crate::oracles::ExactSolution;
use crate::transform::{dot, SpectralField, Transform};
use crate::banded::BandMatrix;
use crate::{Error, Result};

/// A forcing term `f(x, t)`.
#[derive(Clone)]
pub struct Source(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl Source {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.0)(x, t)
    }
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Source(..)")
    }
}

/// `f = u_t + alpha u_x - beta H[u_xx] - gamma u_xxx + delta (u^2)_x`, so
/// that `exact` solves the forced equation.
pub fn make_source(exact: Arc<dyn ExactSolution>, params: ModelParams) -> Result<Source> {
    params.validate()?;
    if params.beta != 0.0 && exact.hilbert(0.0, 0.0, 2).is_none() {
        return Err(Error::Capability(
            "exact solution has no closed-form Hilbert transform; beta must be 0".into(),
        ));
    }
    let ModelParams {
        alpha,
        beta,
        gamma,
        delta,
    } = params;
    Ok(Source::new(move |x, t| {
        let u = exact.eval(x, t, 0);
        let ux = exact.eval(x, t, 1);
        let mut f = exact.time_derivative(x, t) + alpha * ux - gamma * exact.eval(x, t, 3)
            + 2.0 * delta * u * ux;
        if beta != 0.0 {
            f -= beta * exact.hilbert(x, t, 2).unwrap_or(0.0);
        }
        f
    }))
}

#[derive(Debug, Clone)]
pub struct BenjaminSystem {
    params: ModelParams,
    transform: Transform,
    bundle: OperatorBundle,
    source: Option<Source>,
    exec: Exec,
}

impl BenjaminSystem {
    pub fn new(params: ModelParams, grid: &BasisGrid) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            transform: Transform::new(grid),
            bundle: OperatorBundle::build(params, grid),
            source: None,
            exec: Exec::default(),
        })
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn grid(&self) -> &BasisGrid {
        self.transform.grid()
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn bundle(&self) -> &OperatorBundle {
        &self.bundle
    }

    pub fn source(&self) -> Option<&Source> {
        self.source.as_ref()
    }

    /// Coefficients of the source at time `t` (zero if absent).
    pub fn source_coeffs(&self, t: f64, out: &mut [f64]) {
        match &self.source {
            Some(s) => {
                let values: Vec<f64> = self.grid().nodes().iter().map(|&x| s.eval(x, t)).collect();
                self.transform.forward_into(&values, out);
            }
            None => out.fill(0.0),
        }
    }

    /// `F(Y) = delta I_n[u^2]`.
    fn nonlinear_into(&self, y: &[f64], out: &mut [f64]) {
        if self.params.delta == 0.0 {
            out.fill(0.0);
        } else {
            self.transform.square_into(y, self.params.delta, out);
        }
    }

    /// `D Y + J F(Y) + S(t)`.
    pub fn rhs(&self, y: &SpectralField, t: f64) -> Result<SpectralField> {
        y.check(self.grid())?;
        let mut out = vec![0.0; y.len()];
        self.explicit(t, &y.coeffs, &mut out);
        let dy = self.bundle.apply_d(&y.coeffs);
        out.iter_mut().zip(dy).for_each(|(o, v)| *o += v);
        Ok(SpectralField::new(out, y.ell))
    }

    /// `G(Y) = 1/2 (alpha <Y,Y> + beta <Y, HJ Y> + gamma <JY, JY> + 2 delta/3 <Y, I_n[u^2]>)`.
    pub fn hamiltonian(&self, y: &SpectralField) -> Result<f64> {
        y.check(self.grid())?;
        let ModelParams {
            alpha,
            beta,
            gamma,
            delta,
        } = self.params;
        let a = &y.coeffs;
        let mut g = alpha * dot(a, a);
        if beta != 0.0 {
            g += beta * dot(a, &self.bundle.hj().matvec(a));
        }
        if gamma != 0.0 {
            let ja = self.bundle.j().matvec(a);
            g += gamma * dot(&ja, &ja);
        }
        if delta != 0.0 {
            let mut c = vec![0.0; a.len()];
            self.transform.square_into(a, 1.0, &mut c);
            g += 2.0 * delta / 3.0 * dot(a, &c);
        }
        Ok(0.5 * g)
    }

    /// `grad G(Y) = alpha Y + beta HJ Y - gamma J^2 Y + F(Y)`.
    pub fn hamiltonian_gradient(&self, y: &SpectralField) -> Result<SpectralField> {
        y.check(self.grid())?;
        let ModelParams {
            alpha, beta, gamma, ..
        } = self.params;
        let a = &y.coeffs;
        let mut g = vec![0.0; a.len()];
        self.nonlinear_into(a, &mut g);
        let hj = self.bundle.hj().matvec(a);
        let j2 = self.bundle.j2().matvec(a);
        for k in 0..a.len() {
            g[k] += alpha * a[k] + beta * hj[k] - gamma * j2[k];
        }
        Ok(SpectralField::new(g, y.ell))
    }

    /// Integrates from `y0` at `t = 0`; see [`integrator::integrate`].
    pub fn integrate<F>(&self, y0: &SpectralField, cfg: &StepperConfig, observer: F) -> Result<Integration>
    where
        F: FnMut(Observation<'_>),
    {
        y0.check(self.grid())?;
        integrator::integrate(self, &y0.coeffs, cfg, observer)
    }
}

impl SemiDiscreteSystem for BenjaminSystem {
    fn dim(&self) -> usize {
        self.grid().len()
    }

    fn linear(&self) -> &BandMatrix {
        self.bundle.d()
    }

    fn explicit(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let mut f = vec![0.0; y.len()];
        self.nonlinear_into(y, &mut f);
        self.bundle.j().matvec_into(&f, out);
        if self.source.is_some() {
            let mut s = vec![0.0; y.len()];
            self.source_coeffs(t, &mut s);
            out.iter_mut().zip(&s).for_each(|(o, v)| *o += v);
        }
    }
}
