//! Coefficient-space operators of the semi-discretization.
//!
//! In the interleaved ordering `(a_0, a_1, ..., a_{2p-1})`:
//! - `J = -P_n d/dx P_n` is antisymmetric with nonzeros on diagonals `+-1, +-3`;
//! - `H` (Hilbert transform) maps `phi_{2k} -> phi_{2k+1}`, `phi_{2k+1} -> -phi_{2k}`;
//! - `D = alpha J + beta H J^2 - gamma J^3` is antisymmetric with bandwidth 7.

use crate::banded::BandMatrix;
use crate::basis::BasisGrid;
use crate::transform::{SpectralField, Transform};
use crate::{Error, Result};

/// Coefficients of `u_t = -alpha u_x + beta H[u_xx] + gamma u_xxx - delta (u^2)_x`.
///
/// Any signs are accepted; the KdV runs use `gamma = -1`, `delta = -3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ModelParams {
    pub const fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("equation.{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Banded `J` for scale `ell` and `2p` coefficients.
pub fn j_matrix(p: usize, ell: f64) -> BandMatrix {
    let n = 2 * p;
    let mut j = BandMatrix::zeros(n, 3, 3);
    for k in 0..p {
        let kf = k as f64;
        let (e, o) = (2 * k, 2 * k + 1);
        // -d/dx phi_{2k}
        if e + 3 < n {
            j.set(e + 3, e, -(kf + 1.0) / ell);
        }
        j.set(e + 1, e, (2.0 * kf + 1.0) / ell);
        if k > 0 {
            j.set(e - 1, e, -kf / ell);
        }
        // -d/dx phi_{2k+1}
        if o + 1 < n {
            j.set(o + 1, o, (kf + 1.0) / ell);
        }
        j.set(o - 1, o, -(2.0 * kf + 1.0) / ell);
        if k > 0 {
            j.set(o - 3, o, kf / ell);
        }
    }
    j
}

/// `H` as a band matrix (for assembling products).
pub fn h_matrix(p: usize) -> BandMatrix {
    let n = 2 * p;
    let mut h = BandMatrix::zeros(n, 1, 1);
    for k in 0..p {
        h.set(2 * k + 1, 2 * k, 1.0);
        h.set(2 * k, 2 * k + 1, -1.0);
    }
    h
}

/// Hilbert transform in coefficient space, in place.
pub fn hilbert_in_place(coeffs: &mut [f64]) {
    for pair in coeffs.chunks_exact_mut(2) {
        let (even, odd) = (pair[0], pair[1]);
        pair[0] = -odd;
        pair[1] = even;
    }
}

pub fn apply_h(a: &SpectralField) -> SpectralField {
    let mut out = a.clone();
    hilbert_in_place(&mut out.coeffs);
    out
}

/// `J a` for a field on `grid`.
pub fn apply_j(a: &SpectralField, grid: &BasisGrid) -> Result<SpectralField> {
    a.check(grid)?;
    Ok(SpectralField::new(
        j_matrix(grid.p(), grid.ell()).matvec(&a.coeffs),
        a.ell,
    ))
}

/// `delta * I_n[u^2]` in coefficient space.
pub fn nonlinearity(a: &SpectralField, delta: f64, transform: &Transform) -> Result<SpectralField> {
    a.check(transform.grid())?;
    let mut out = vec![0.0; a.len()];
    if delta != 0.0 {
        transform.square_into(&a.coeffs, delta, &mut out);
    }
    Ok(SpectralField::new(out, a.ell))
}

/// The linear operators of one discretization.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    p: usize,
    ell: f64,
    params: ModelParams,
    j: BandMatrix,
    j2: BandMatrix,
    hj: BandMatrix,
    d: BandMatrix,
}

impl OperatorBundle {
    /// Assembles `D = alpha J + beta H J^2 - gamma J^3` by band products.
    pub fn build(params: ModelParams, grid: &BasisGrid) -> Self {
        let p = grid.p();
        let j = j_matrix(p, grid.ell());
        let h = h_matrix(p);
        let j2 = j.matmul(&j);
        let j3 = j2.matmul(&j);
        let hj = h.matmul(&j);
        let hj2 = h.matmul(&j2);
        let d = j
            .scaled(params.alpha)
            .add_scaled(params.beta, &hj2)
            .add_scaled(-params.gamma, &j3)
            .trimmed();
        Self {
            p,
            ell: grid.ell(),
            params,
            j,
            j2,
            hj,
            d,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn j(&self) -> &BandMatrix {
        &self.j
    }

    pub fn j2(&self) -> &BandMatrix {
        &self.j2
    }

    /// `H J`, which is symmetric.
    pub fn hj(&self) -> &BandMatrix {
        &self.hj
    }

    pub fn d(&self) -> &BandMatrix {
        &self.d
    }

    pub fn apply_d(&self, a: &[f64]) -> Vec<f64> {
        self.d.matvec(a)
    }

    pub fn apply_j(&self, a: &[f64]) -> Vec<f64> {
        self.j.matvec(a)
    }
}
