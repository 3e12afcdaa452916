//! Collocation geometry and pointwise evaluation of the MTC functions
//!
//! ```text
//! phi_{2k}(x)   = 2/sqrt(pi l) * sin((2k+1) theta/2) * sin(theta/2)
//! phi_{2k+1}(x) = 2/sqrt(pi l) * cos((2k+1) theta/2) * sin(theta/2)
//! x = (l/2) cot(theta/2),  theta in (0, 2 pi)
//! ```
//!
//! The functions form an orthonormal basis of `L^2(R)`; `phi_{2k}` is even and
//! `phi_{2k+1}` is odd.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Nodes and quadrature weights of the `2p`-point MTC collocation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGrid {
    p: usize,
    ell: f64,
    theta: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    half_sin: Vec<f64>,
}

impl BasisGrid {
    pub fn new(p: usize, ell: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("grid.p must be at least 1".into()));
        }
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::Config(format!(
                "grid.ell must be positive and finite, got {ell}"
            )));
        }
        let size = 2 * p;
        let theta: Vec<f64> = (0..size)
            .map(|m| (2 * m + 1) as f64 * PI / size as f64)
            .collect();

        // Right half from the formulas, left half mirrored so that the grid is
        // exactly antisymmetric.
        let mut nodes = vec![0.0; size];
        let mut half_sin = vec![0.0; size];
        for m in 0..p {
            let half = theta[m] / 2.0;
            let x = 0.5 * ell / half.tan();
            nodes[m] = x;
            nodes[size - 1 - m] = -x;
            let s = half.sin();
            half_sin[m] = s;
            half_sin[size - 1 - m] = s;
        }
        // pi/(4 l p) (l^2 + 4 x_m^2), written through sin(theta_m/2)
        let weights = half_sin
            .iter()
            .map(|&s| PI * ell / (4.0 * p as f64) / (s * s))
            .collect();

        Ok(Self {
            p,
            ell,
            theta,
            nodes,
            weights,
            half_sin,
        })
    }

    /// Number of even/odd coefficient pairs.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of nodes and coefficients, `2p`.
    pub fn len(&self) -> usize {
        2 * self.p
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Truncation index `n = 2p - 1`.
    pub fn n(&self) -> usize {
        2 * self.p - 1
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Physical abscissae, strictly decreasing.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights, exact on products of two basis functions.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sin(theta_m / 2)` at every node.
    pub fn half_sin(&self) -> &[f64] {
        &self.half_sin
    }
}

/// `e^{i theta/2}` for the point `x`: `(2x + i l) / |2x + i l|`.
#[inline]
pub fn half_angle(x: f64, ell: f64) -> Complex64 {
    let re = 2.0 * x;
    let r = re.hypot(ell);
    Complex64::new(re / r, ell / r)
}

/// `theta(x) = 2 atan2(l, 2x)`, in `(0, 2 pi)`.
pub fn theta_of(x: f64, ell: f64) -> f64 {
    2.0 * ell.atan2(2.0 * x)
}

fn norm_const(ell: f64) -> f64 {
    2.0 / (PI * ell).sqrt()
}

/// `phi_k(x)` for a nonnegative index.
pub fn phi(k: usize, x: f64, ell: f64) -> f64 {
    phi_signed(k as i64, x, ell)
}

/// `phi_k(x)` for any integer index.
///
/// Negative indices continue the trigonometric closed form, giving
/// `phi_{-2k-2} = -phi_{2k}` and `phi_{-2k-1} = phi_{2k+1}`; these appear in
/// the product expansions of basis functions.
pub fn phi_signed(k: i64, x: f64, ell: f64) -> f64 {
    let h = half_angle(x, ell);
    let half_theta = h.im.atan2(h.re);
    let j = k.div_euclid(2);
    let arg = (2 * j + 1) as f64 * half_theta;
    let trig = if k.rem_euclid(2) == 0 {
        arg.sin()
    } else {
        arg.cos()
    };
    norm_const(ell) * trig * h.im
}

/// `sum_k coeffs[k] phi_k(x)` by the phasor recurrence in `theta`, `O(len)`.
pub fn eval_series(coeffs: &[f64], ell: f64, x: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let h = half_angle(x, ell);
    let step = h * h;
    let mut z = h;
    let mut acc = 0.0;
    for pair in coeffs.chunks(2) {
        // a_{2k} sin + a_{2k+1} cos of (2k+1) theta/2
        acc += pair[0] * z.im;
        if let Some(&odd) = pair.get(1) {
            acc += odd * z.re;
        }
        z *= step;
    }
    norm_const(ell) * h.im * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_grids() {
        let g = BasisGrid::new(1, 1.0).unwrap();
        assert_relative_eq!(g.nodes()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.nodes()[1], -0.5, epsilon = 1e-15);
        for &w in g.weights() {
            assert_relative_eq!(w, PI / 2.0, epsilon = 1e-15);
        }

        let g = BasisGrid::new(2, 1.0).unwrap();
        let a = 0.5 * (1.0 + 2f64.sqrt());
        let b = 0.5 * (2f64.sqrt() - 1.0);
        for (x, e) in g.nodes().iter().zip([a, b, -b, -a]) {
            assert_relative_eq!(*x, e, epsilon = 1e-14);
        }
        let g2 = BasisGrid::new(2, 2.0).unwrap();
        for (x, y) in g.nodes().iter().zip(g2.nodes()) {
            assert_relative_eq!(2.0 * x, *y, epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_invariants() {
        for &(p, ell) in &[(1, 1.0), (3, 0.7), (16, 8.0), (255, 8.0)] {
            let g = BasisGrid::new(p, ell).unwrap();
            let n = g.len();
            for m in 0..n {
                assert_eq!(g.nodes()[m], -g.nodes()[n - 1 - m]);
                assert_eq!(g.weights()[m], g.weights()[n - 1 - m]);
                assert!(g.weights()[m] > 0.0);
                let x = g.nodes()[m];
                let alt = PI / (4.0 * ell * p as f64) * (ell * ell + 4.0 * x * x);
                assert_relative_eq!(g.weights()[m], alt, max_relative = 1e-14);
                assert!(g.theta()[m] > 0.0 && g.theta()[m] < 2.0 * PI);
            }
            for m in 1..n {
                assert!(g.theta()[m] > g.theta()[m - 1]);
                assert!(g.nodes()[m] < g.nodes()[m - 1]);
            }
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(BasisGrid::new(0, 1.0), Err(Error::Config(_))));
        assert!(matches!(BasisGrid::new(2, 0.0), Err(Error::Config(_))));
        assert!(matches!(BasisGrid::new(2, -1.0), Err(Error::Config(_))));
    }

    #[test]
    fn point_values() {
        assert_relative_eq!(phi(0, 0.0, 1.0), 2.0 / PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(phi(1, 0.5, 1.0), 1.0 / PI.sqrt(), epsilon = 1e-15);
        assert!(phi(0, 1e8, 1.0).abs() < 1e-7);
        assert!(phi(5, -1e8, 1.0).abs() < 1e-7);
    }

    /// Rational forms `2 sqrt(l/pi) Im/Re[(2x + il)^k / (2x - il)^{k+1}]`.
    fn phi_rational(k: usize, x: f64, ell: f64) -> f64 {
        let num = Complex64::new(2.0 * x, ell).powu((k / 2) as u32);
        let den = Complex64::new(2.0 * x, -ell).powu((k / 2 + 1) as u32);
        let r = num / den * 2.0 * (ell / PI).sqrt();
        if k.is_multiple_of(2) {
            r.im
        } else {
            r.re
        }
    }

    #[test]
    fn trigonometric_and_rational_forms_agree() {
        for &ell in &[0.5, 1.0, 8.0] {
            for k in 0..12 {
                for &x in &[-30.0, -2.5, -0.1, 0.0, 0.3, 1.0, 7.0, 1e4] {
                    let a = phi(k, x, ell);
                    let b = phi_rational(k, x, ell);
                    assert!((a - b).abs() < 1e-13, "k={k} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn parity() {
        for k in 0..10 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            for &x in &[0.1, 0.9, 3.0, 40.0] {
                assert!((phi(k, -x, 2.0) - s * phi(k, x, 2.0)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn negative_indices() {
        for k in 0..5i64 {
            for &x in &[-3.0, 0.2, 1.7] {
                assert_relative_eq!(
                    phi_signed(-2 * k - 2, x, 1.5),
                    -phi_signed(2 * k, x, 1.5),
                    epsilon = 1e-14
                );
                assert_relative_eq!(
                    phi_signed(-2 * k - 1, x, 1.5),
                    phi_signed(2 * k + 1, x, 1.5),
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn continuous_orthonormality() {
        // With x = (l/2) cot(theta/2), phi_j phi_k dx becomes a trigonometric
        // polynomial in theta; the midpoint rule on a fine grid is exact for it.
        let ell = 3.0;
        let m = 4096;
        let dtheta = 2.0 * PI / m as f64;
        for j in 0..32 {
            for k in 0..32 {
                let mut s = 0.0;
                for i in 0..m {
                    let th = (i as f64 + 0.5) * dtheta;
                    let x = 0.5 * ell / (th / 2.0).tan();
                    let jac = 0.25 * ell / (th / 2.0).sin().powi(2);
                    s += phi(j, x, ell) * phi(k, x, ell) * jac * dtheta;
                }
                let e = if j == k { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-10, "({j},{k}): {s}");
            }
        }
    }

    #[test]
    fn discrete_orthonormality() {
        for &p in &[1, 2, 5, 16] {
            let g = BasisGrid::new(p, 2.5).unwrap();
            let n = g.len();
            for j in 0..n {
                for k in 0..n {
                    let s: f64 = (0..n)
                        .map(|m| {
                            g.weights()[m]
                                * phi(j, g.nodes()[m], g.ell())
                                * phi(k, g.nodes()[m], g.ell())
                        })
                        .sum();
                    let e = if j == k { 1.0 } else { 0.0 };
                    assert!((s - e).abs() < 1e-12, "p={p} ({j},{k}): {s}");
                }
            }
        }
    }

    #[test]
    fn series_evaluation() {
        assert_relative_eq!(eval_series(&[1.0], 1.0, 0.0), 2.0 / PI.sqrt(), epsilon = 1e-15);
        assert_eq!(eval_series(&[0.0; 8], 1.0, 0.37), 0.0);
        // With l = 2, 1/(1+x^2) = sqrt(pi/2) phi_0.
        let c = [(PI / 2.0).sqrt(), 0.0, 0.0, 0.0];
        for &x in &[-5.0, 0.0, 0.4, 12.0] {
            assert_relative_eq!(eval_series(&c, 2.0, x), 1.0 / (1.0 + x * x), epsilon = 1e-12);
        }
        let coeffs: Vec<f64> = (0..17).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        for &x in &[-4.0, 0.1, 2.2] {
            let direct: f64 = coeffs.iter().enumerate().map(|(k, a)| a * phi(k, x, 1.3)).sum();
            assert_relative_eq!(eval_series(&coeffs, 1.3, x), direct, epsilon = 1e-13);
        }
    }

    /// Unitary Fourier transform `(2 pi)^{-1/2} int f(x) e^{-i x xi} dx` of a
    /// sampled function, by the trapezoid rule on `[-L, L]`.
    fn dense_fourier(f: impl Fn(f64) -> f64, xi: f64, half_width: f64, n: usize) -> Complex64 {
        let dx = 2.0 * half_width / n as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x = -half_width + (i as f64 + 0.5) * dx;
            s += Complex64::from_polar(f(x), -x * xi);
        }
        s * dx / (2.0 * PI).sqrt()
    }

    fn laguerre(k: usize, t: f64) -> f64 {
        let (mut a, mut b) = (1.0, 1.0 - t);
        if k == 0 {
            return a;
        }
        for j in 1..k {
            let c = ((2 * j + 1) as f64 - t) * b / (j + 1) as f64 - j as f64 * a / (j + 1) as f64;
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn fourier_images_are_laguerre_functions() {
        let ell: f64 = 2.0;
        let half_width = 3000.0;
        let n = 1 << 20;
        for &xi in &[0.5, 1.0, 2.0] {
            let image = |k: usize| (ell / 2.0).sqrt() * (-ell * xi / 2.0).exp() * laguerre(k, ell * xi);
            for k in 0..4 {
                let even = dense_fourier(|x| phi(2 * k, x, ell), xi, half_width, n);
                assert!((even - Complex64::new(image(k), 0.0)).norm() < 1e-6, "k={k} xi={xi}: {even}");

                // phi_{2k+1} decays only like 1/x; split off phi_1, whose
                // transform -i sgn(xi) sqrt(l/2) e^{-l|xi|/2} is classical.
                let rest = dense_fourier(|x| phi(2 * k + 1, x, ell) - phi(1, x, ell), xi, half_width, n);
                let odd = rest + Complex64::new(0.0, -image(0));
                let expect = Complex64::new(0.0, -image(k));
                assert!((odd - expect).norm() < 1e-6, "k={k} xi={xi}: {odd} vs {expect}");
            }
        }
    }
}
