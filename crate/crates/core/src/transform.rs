//! Nodal values <-> MTC coefficients.
//!
//! Forward: `a_k = sum_m w_m phi_k(x_m) f(x_m)`, exact for `f` in the span of
//! `phi_0 .. phi_{2p-1}`. Inverse: `f(x_m) = sum_k a_k phi_k(x_m)`. Both are
//! odd-harmonic trigonometric sums on the midpoint grid `theta_m` and reduce
//! to one complex FFT of length `2p` with pre- and post-twiddles, for any `p`.
//!
//! The fast paths divide nodal values by `sin(theta_m/2)`, which never comes
//! closer to zero than `sin(pi/(4p))`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::basis::{self, BasisGrid};
use crate::exec::Exec;
use crate::{Error, Result};

/// Coefficients `a_0 .. a_{2p-1}` in natural (interleaved even/odd) order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub coeffs: Vec<f64>,
    pub ell: f64,
}

/// Values at the collocation nodes, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub values: Vec<f64>,
    pub ell: f64,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>, ell: f64) -> Self {
        Self { coeffs, ell }
    }

    pub fn zeros(grid: &BasisGrid) -> Self {
        Self::new(vec![0.0; grid.len()], grid.ell())
    }

    /// Unit coefficient vector `e_k`.
    pub fn unit(grid: &BasisGrid, k: usize) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[k] = 1.0;
        f
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `L^2(R)` norm, which is the Euclidean coefficient norm.
    pub fn norm(&self) -> f64 {
        norm(&self.coeffs)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.coeffs, &other.coeffs)
    }

    /// Value of the expansion at an arbitrary point.
    pub fn eval(&self, x: f64) -> f64 {
        basis::eval_series(&self.coeffs, self.ell, x)
    }

    pub fn eval_many(&self, xs: &[f64], exec: Exec) -> Vec<f64> {
        exec.map_slice(xs, |&x| self.eval(x))
    }

    /// Even part of the expansion (odd-index coefficients zeroed).
    pub fn even_part(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().skip(1).step_by(2).for_each(|c| *c = 0.0);
        out
    }

    pub fn check(&self, grid: &BasisGrid) -> Result<()> {
        if self.coeffs.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: self.coeffs.len(),
            });
        }
        if self.ell != grid.ell() {
            return Err(Error::Scale {
                field: self.ell,
                grid: grid.ell(),
            });
        }
        Ok(())
    }
}

impl NodalField {
    pub fn new(values: Vec<f64>, ell: f64) -> Self {
        Self { values, ell }
    }

    pub fn sample(grid: &BasisGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid.nodes().iter().map(|&x| f(x)).collect(), grid.ell())
    }

    /// Weighted nodal norm `sqrt(sum_m w_m v_m^2)`.
    pub fn weighted_norm(&self, grid: &BasisGrid) -> f64 {
        self.values
            .iter()
            .zip(grid.weights())
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn check(&self, grid: &BasisGrid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: self.values.len(),
            });
        }
        if self.ell != grid.ell() {
            return Err(Error::Scale {
                field: self.ell,
                grid: grid.ell(),
            });
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// FFT-backed transform pair bound to one grid.
#[derive(Clone)]
pub struct Transform {
    grid: BasisGrid,
    fft: Arc<dyn Fft<f64>>,
    /// `e^{i pi j / (2p)}`
    pre: Vec<Complex64>,
    /// `e^{i pi (2j+1) / (4p)}`
    post: Vec<Complex64>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform")
            .field("p", &self.grid.p())
            .field("ell", &self.grid.ell())
            .finish()
    }
}

impl Transform {
    pub fn new(grid: &BasisGrid) -> Self {
        let size = grid.len();
        let p = grid.p() as f64;
        let fft = FftPlanner::new().plan_fft_inverse(size);
        let pre = (0..size)
            .map(|j| Complex64::from_polar(1.0, PI * j as f64 / (2.0 * p)))
            .collect();
        let post = (0..size)
            .map(|j| Complex64::from_polar(1.0, PI * (2 * j + 1) as f64 / (4.0 * p)))
            .collect();
        Self {
            grid: grid.clone(),
            fft,
            pre,
            post,
        }
    }

    pub fn grid(&self) -> &BasisGrid {
        &self.grid
    }

    fn run_fft(&self, buf: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(buf, &mut scratch);
    }

    /// Fast forward transform on raw slices.
    pub fn forward_into(&self, values: &[f64], coeffs: &mut [f64]) {
        let size = self.grid.len();
        assert_eq!(values.len(), size);
        assert_eq!(coeffs.len(), size);
        let mut buf: Vec<Complex64> = values
            .iter()
            .zip(self.grid.half_sin())
            .zip(&self.pre)
            .map(|((v, s), t)| t * (v / s))
            .collect();
        self.run_fft(&mut buf);
        let scale = (PI * self.grid.ell()).sqrt() / size as f64;
        for k in 0..self.grid.p() {
            let s = buf[k] * self.post[k];
            coeffs[2 * k] = scale * s.im;
            coeffs[2 * k + 1] = scale * s.re;
        }
    }

    /// Fast inverse transform on raw slices.
    pub fn inverse_into(&self, coeffs: &[f64], values: &mut [f64]) {
        let size = self.grid.len();
        assert_eq!(values.len(), size);
        assert_eq!(coeffs.len(), size);
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for k in 0..self.grid.p() {
            buf[k] = Complex64::new(coeffs[2 * k + 1], -coeffs[2 * k]) * self.pre[k];
        }
        self.run_fft(&mut buf);
        let scale = 2.0 / (PI * self.grid.ell()).sqrt();
        for (m, v) in values.iter_mut().enumerate() {
            *v = scale * self.grid.half_sin()[m] * (buf[m] * self.post[m]).re;
        }
    }

    pub fn forward_vec(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        self.forward_into(values, &mut out);
        out
    }

    pub fn inverse_vec(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; coeffs.len()];
        self.inverse_into(coeffs, &mut out);
        out
    }

    pub fn forward(&self, v: &NodalField) -> Result<SpectralField> {
        v.check(&self.grid)?;
        Ok(SpectralField::new(self.forward_vec(&v.values), v.ell))
    }

    pub fn inverse(&self, a: &SpectralField) -> Result<NodalField> {
        a.check(&self.grid)?;
        Ok(NodalField::new(self.inverse_vec(&a.coeffs), a.ell))
    }

    /// Interpolant `I_n[f]`: sample at the nodes, transform.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> SpectralField {
        let values: Vec<f64> = self.grid.nodes().iter().map(|&x| f(x)).collect();
        SpectralField::new(self.forward_vec(&values), self.grid.ell())
    }

    pub fn try_interpolate(&self, f: impl Fn(f64) -> Result<f64>) -> Result<SpectralField> {
        let values = self
            .grid
            .nodes()
            .iter()
            .map(|&x| f(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralField::new(self.forward_vec(&values), self.grid.ell()))
    }

    /// Coefficients of `scale * I_n[u^2]` where `u` has coefficients `coeffs`.
    pub fn square_into(&self, coeffs: &[f64], scale: f64, out: &mut [f64]) {
        let mut values = self.inverse_vec(coeffs);
        values.iter_mut().for_each(|v| *v = scale * *v * *v);
        self.forward_into(&values, out);
    }
}

/// Reference forward transform by direct summation, `O(p^2)`.
pub fn forward_naive(v: &NodalField, grid: &BasisGrid) -> Result<SpectralField> {
    v.check(grid)?;
    let n = grid.len();
    let coeffs = (0..n)
        .map(|k| {
            (0..n)
                .map(|m| grid.weights()[m] * basis::phi(k, grid.nodes()[m], grid.ell()) * v.values[m])
                .sum()
        })
        .collect();
    Ok(SpectralField::new(coeffs, grid.ell()))
}

/// Reference inverse transform by direct summation, `O(p^2)`.
pub fn inverse_naive(a: &SpectralField, grid: &BasisGrid) -> Result<NodalField> {
    a.check(grid)?;
    let values = grid
        .nodes()
        .iter()
        .map(|&x| {
            a.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * basis::phi(k, x, grid.ell()))
                .sum()
        })
        .collect();
    Ok(NodalField::new(values, grid.ell()))
}
