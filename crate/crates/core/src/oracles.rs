//! Closed-form reference solutions.
//!
//! - Lorentzian bumps moving at constant speed, even (`r/(a^2+s^2)`) or odd
//!   (`r s/(a^2+s^2)`), with `s = x - x0 - c t`. These solve nothing by
//!   themselves and are used with a manufactured source.
//! - KdV `N`-solitons `u = -2 d_xx ln det(I + A(x,t))`.
//! - The `sech^2` seed for traveling-wave continuation.
//!
//! The Hilbert transform is the one with Fourier multiplier `-i sgn(xi)`,
//! i.e. the one acting on MTC coefficients as the even/odd swap, so that
//! `H[a/(a^2+x^2)] = x/(a^2+x^2)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// A space-time function with analytic derivatives.
pub trait ExactSolution: Send + Sync {
    /// `d^order u / dx^order` at `(x, t)`.
    fn eval(&self, x: f64, t: f64, order: usize) -> f64;

    /// `du/dt` at `(x, t)`.
    fn time_derivative(&self, x: f64, t: f64) -> f64;

    /// `H[d^order u / dx^order]` at `(x, t)`, if available in closed form.
    fn hilbert(&self, _x: f64, _t: f64, _order: usize) -> Option<f64> {
        None
    }

    fn value(&self, x: f64, t: f64) -> f64 {
        self.eval(x, t, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub r: f64,
    pub a: f64,
    pub x0: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// `u = sum_k Re(w_k z_k)` with `z_k = 1/(s_k - i a_k)`.
///
/// `Re z = s/(a^2+s^2)` and `Im z = a/(a^2+s^2)`; an even bump has
/// `w = -i r/a`, an odd one `w = r`. Since `z` extends analytically to the
/// lower half plane, `H` acts as multiplication of `w` by `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianFamily {
    bumps: Vec<Bump>,
    weights: Vec<Complex64>,
}

impl LorentzianFamily {
    pub fn new(bumps: Vec<Bump>, parity: Parity) -> Result<Self> {
        for (k, b) in bumps.iter().enumerate() {
            if !(b.a > 0.0) || ![b.r, b.a, b.x0, b.c].iter().all(|v| v.is_finite()) {
                return Err(Error::Domain(format!(
                    "bump {k}: width must be positive and parameters finite"
                )));
            }
        }
        let weights = bumps
            .iter()
            .map(|b| match parity {
                Parity::Even => Complex64::new(0.0, -b.r / b.a),
                Parity::Odd => Complex64::new(b.r, 0.0),
            })
            .collect();
        Ok(Self { bumps, weights })
    }

    /// Three bumps with `r = (2,1,3)`, `a = (1,1,2)`, `c = (1,-2,0)`,
    /// `x0 = (-1,1,0)`.
    pub fn standard_bumps() -> Vec<Bump> {
        let r = [2.0, 1.0, 3.0];
        let a = [1.0, 1.0, 2.0];
        let c = [1.0, -2.0, 0.0];
        let x0 = [-1.0, 1.0, 0.0];
        (0..3)
            .map(|k| Bump {
                r: r[k],
                a: a[k],
                x0: x0[k],
                c: c[k],
            })
            .collect()
    }

    pub fn example1() -> Self {
        Self::new(Self::standard_bumps(), Parity::Even).expect("valid bumps")
    }

    pub fn example2() -> Self {
        Self::new(Self::standard_bumps(), Parity::Odd).expect("valid bumps")
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// The family representing `H[u]`.
    pub fn hilbert_family(&self) -> Self {
        Self {
            bumps: self.bumps.clone(),
            weights: self.weights.iter().map(|w| w * Complex64::i()).collect(),
        }
    }

    /// `sum_k w_k d^order z_k` with `d^m z = (-1)^m m! z^{m+1}`.
    fn series(&self, x: f64, t: f64, order: usize) -> Complex64 {
        let fact: f64 = (1..=order).map(|m| m as f64).product();
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        self.bumps
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| {
                let z = Complex64::new(x - b.x0 - b.c * t, -b.a).inv();
                w * z.powu(order as u32 + 1) * (sign * fact)
            })
            .sum()
    }
}

impl ExactSolution for LorentzianFamily {
    fn eval(&self, x: f64, t: f64, order: usize) -> f64 {
        self.series(x, t, order).re
    }

    fn time_derivative(&self, x: f64, t: f64) -> f64 {
        // d/dt = -c d/ds, per bump
        self.bumps
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| {
                let z = Complex64::new(x - b.x0 - b.c * t, -b.a).inv();
                (w * z * z).re * b.c
            })
            .sum()
    }

    fn hilbert(&self, x: f64, t: f64, order: usize) -> Option<f64> {
        Some((self.series(x, t, order) * Complex64::i()).re)
    }
}

/// KdV `N`-soliton `u = -2 d_xx ln det(I + A)` with
/// `A_ij = b_i e^{8 l_i^3 t} e^{-(l_i + l_j) x} / (l_i + l_j)`,
/// `l_i = sqrt(v_i)/2`, `b_i = 2 l_i e^{2 phi_i l_i}`.
///
/// Solves `u_t - 6 u u_x + u_xxx = 0`; soliton `i` travels at speed `v_i`
/// and sits near `x = phi_i + v_i t` when isolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonFamily {
    lambda: Vec<f64>,
    b: Vec<f64>,
    /// Per nonempty subset `S` (bitmask): `ln K_S`, `sum -2 l_i`, `sum 8 l_i^3`.
    terms: Vec<(f64, f64, f64)>,
}

/// Cumulant-type statistics of `ln f` where `f = sum_S K_S e^{s_S x + q_S t}`.
struct Moments {
    m2: f64,
    m3: f64,
    m4: f64,
    m5: f64,
    ssq: f64,
}

impl SolitonFamily {
    pub fn new(velocities: &[f64], phases: &[f64]) -> Result<Self> {
        if velocities.is_empty() || velocities.len() != phases.len() {
            return Err(Error::Domain(
                "soliton velocities and phases must be nonempty and of equal length".into(),
            ));
        }
        if velocities.len() > 20 {
            return Err(Error::Domain("at most 20 solitons are supported".into()));
        }
        if velocities.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Domain("soliton velocities must be positive".into()));
        }
        let lambda: Vec<f64> = velocities.iter().map(|v| 0.5 * v.sqrt()).collect();
        let b: Vec<f64> = lambda
            .iter()
            .zip(phases)
            .map(|(l, ph)| 2.0 * l * (2.0 * ph * l).exp())
            .collect();
        let n = lambda.len();
        let mut terms = Vec::with_capacity((1 << n) - 1);
        for mask in 1usize..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            // Cauchy determinant det[1/(l_i + l_j)].
            let mut ln_k = 0.0;
            for (p, &i) in idx.iter().enumerate() {
                ln_k += b[i].ln() - (2.0 * lambda[i]).ln();
                for &j in &idx[p + 1..] {
                    ln_k += 2.0 * (lambda[i] - lambda[j]).abs().ln() - 2.0 * (lambda[i] + lambda[j]).ln();
                }
            }
            let s = idx.iter().map(|&i| -2.0 * lambda[i]).sum();
            let q = idx.iter().map(|&i| 8.0 * lambda[i].powi(3)).sum();
            terms.push((ln_k, s, q));
        }
        Ok(Self { lambda, b, terms })
    }

    /// `v = (3/2, 1/2)`, `phi = (-3, 0)`.
    pub fn example3() -> Self {
        Self::new(&[1.5, 0.5], &[-3.0, 0.0]).expect("valid solitons")
    }

    /// `v = (1, 1, 1/2)`, `phi = (-4, -2, 0)`.
    pub fn example4() -> Self {
        Self::new(&[1.0, 1.0, 0.5], &[-4.0, -2.0, 0.0]).expect("valid solitons")
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    fn moments(&self, x: f64, t: f64) -> Moments {
        let exps: Vec<f64> = std::iter::once(0.0)
            .chain(self.terms.iter().map(|&(k, s, q)| k + s * x + q * t))
            .collect();
        let emax = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = exps.iter().map(|e| (e - emax).exp()).collect();
        let total: f64 = w.iter().sum();
        let sq = std::iter::once((0.0, 0.0)).chain(self.terms.iter().map(|&(_, s, q)| (s, q)));
        let pts: Vec<(f64, f64, f64)> = sq.zip(&w).map(|((s, q), wi)| (wi / total, s, q)).collect();
        let mu_s: f64 = pts.iter().map(|(p, s, _)| p * s).sum();
        let mu_q: f64 = pts.iter().map(|(p, _, q)| p * q).sum();
        let mut m = Moments {
            m2: 0.0,
            m3: 0.0,
            m4: 0.0,
            m5: 0.0,
            ssq: 0.0,
        };
        for &(p, s, q) in &pts {
            let d = s - mu_s;
            let d2 = d * d;
            m.m2 += p * d2;
            m.m3 += p * d2 * d;
            m.m4 += p * d2 * d2;
            m.m5 += p * d2 * d2 * d;
            m.ssq += p * d2 * (q - mu_q);
        }
        m
    }

    /// `u` by the trace identity
    /// `d_xx ln det M = tr(M^-1 M_xx) - tr((M^-1 M_x)^2)`, as a cross-check.
    pub fn eval_trace(&self, x: f64, t: f64) -> Result<f64> {
        let n = self.lambda.len();
        let l = &self.lambda;
        let entry = |i: usize, j: usize| {
            self.b[i] * (8.0 * l[i].powi(3) * t - (l[i] + l[j]) * x).exp() / (l[i] + l[j])
        };
        let m = DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) + entry(i, j));
        let mx = DMatrix::from_fn(n, n, |i, j| -(l[i] + l[j]) * entry(i, j));
        let mxx = DMatrix::from_fn(n, n, |i, j| (l[i] + l[j]).powi(2) * entry(i, j));
        let lu = m.lu();
        if !(lu.determinant() > 0.0) {
            return Err(Error::Domain(format!("det(I + A) is not positive at x = {x}, t = {t}")));
        }
        let a = lu.solve(&mx).expect("nonsingular");
        let b = lu.solve(&mxx).expect("nonsingular");
        Ok(-2.0 * (b.trace() - (&a * &a).trace()))
    }
}

impl ExactSolution for SolitonFamily {
    /// Supports `order <= 3`.
    fn eval(&self, x: f64, t: f64, order: usize) -> f64 {
        let m = self.moments(x, t);
        -2.0 * match order {
            0 => m.m2,
            1 => m.m3,
            2 => m.m4 - 3.0 * m.m2 * m.m2,
            3 => m.m5 - 10.0 * m.m3 * m.m2,
            _ => panic!("soliton derivatives are available up to order 3"),
        }
    }

    fn time_derivative(&self, x: f64, t: f64) -> f64 {
        -2.0 * self.moments(x, t).ssq
    }
}

/// The identically zero solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl ExactSolution for Zero {
    fn eval(&self, _x: f64, _t: f64, _order: usize) -> f64 {
        0.0
    }

    fn time_derivative(&self, _x: f64, _t: f64) -> f64 {
        0.0
    }

    fn hilbert(&self, _x: f64, _t: f64, _order: usize) -> Option<f64> {
        Some(0.0)
    }
}

/// `-3(alpha-c)/(2 delta) sech^2(sqrt((alpha-c)/(4 gamma)) x)`, the KdV
/// traveling wave of speed `c`.
pub fn sech2_seed(alpha: f64, c: f64, gamma: f64, delta: f64, x: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("sech2 seed needs gamma > 0, got {gamma}")));
    }
    if !(alpha - c > 0.0) {
        return Err(Error::Domain(format!(
            "sech2 seed needs alpha - c > 0, got {}",
            alpha - c
        )));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Domain("sech2 seed needs a finite nonzero delta".into()));
    }
    let k = ((alpha - c) / (4.0 * gamma)).sqrt();
    let sech = 1.0 / (k * x).cosh();
    Ok(-3.0 * (alpha - c) / (2.0 * delta) * sech * sech)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisGrid;
    use crate::operators::apply_h;
    use crate::transform::Transform;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use rustfft::FftPlanner;

    fn unit_even() -> LorentzianFamily {
        LorentzianFamily::new(
            vec![Bump {
                r: 1.0,
                a: 1.0,
                x0: 0.0,
                c: 0.0,
            }],
            Parity::Even,
        )
        .unwrap()
    }

    #[test]
    fn lorentzian_point_values() {
        let u = unit_even();
        assert_eq!(u.eval(0.0, 0.0, 0), 1.0);
        assert_eq!(u.eval(0.0, 0.0, 1), 0.0);
        assert!((LorentzianFamily::example1().value(0.0, 0.0) - 2.25).abs() < 1e-15);
        assert!(LorentzianFamily::new(vec![Bump { r: 1.0, a: 0.0, x0: 0.0, c: 0.0 }], Parity::Even).is_err());
    }

    #[test]
    fn lorentzian_derivatives_match_rational_forms() {
        let u = unit_even();
        for &x in &[-2.0, -0.3, 0.7, 5.0] {
            let d = 1.0 + x * x;
            assert!((u.eval(x, 0.0, 1) + 2.0 * x / (d * d)).abs() < 1e-15);
            assert!((u.eval(x, 0.0, 2) - (6.0 * x * x - 2.0) / d.powi(3)).abs() < 1e-14);
            assert!((u.eval(x, 0.0, 3) - 24.0 * x * (1.0 - x * x) / d.powi(4)).abs() < 1e-14);
        }
    }

    #[test]
    fn lorentzian_derivatives_match_differences() {
        let mut rng = StdRng::seed_from_u64(3);
        for fam in [LorentzianFamily::example1(), LorentzianFamily::example2()] {
            for _ in 0..20 {
                let x = rng.random_range(-6.0..6.0);
                let t = rng.random_range(0.0..2.0);
                let h = 1e-5;
                for order in 0..3 {
                    let fd = (fam.eval(x + h, t, order) - fam.eval(x - h, t, order)) / (2.0 * h);
                    assert!((fd - fam.eval(x, t, order + 1)).abs() < 1e-7);
                }
                let ft = (fam.value(x, t + h) - fam.value(x, t - h)) / (2.0 * h);
                assert!((ft - fam.time_derivative(x, t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn parity_at_t0() {
        let centered: Vec<Bump> = LorentzianFamily::standard_bumps()
            .into_iter()
            .map(|b| Bump { x0: 0.0, ..b })
            .collect();
        let even = LorentzianFamily::new(centered.clone(), Parity::Even).unwrap();
        let odd = LorentzianFamily::new(centered, Parity::Odd).unwrap();
        for &x in &[0.1, 1.0, 3.7, 20.0] {
            assert!((even.value(x, 0.0) - even.value(-x, 0.0)).abs() < 1e-14);
            assert!((odd.value(x, 0.0) + odd.value(-x, 0.0)).abs() < 1e-14);
        }
    }

    /// `H` by FFT on a wide uniform grid, multiplier `-i sgn(xi)`.
    fn fft_hilbert(f: impl Fn(f64) -> f64, half_width: f64, n: usize, at: f64) -> f64 {
        let h = 2.0 * half_width / n as f64;
        let mut buf: Vec<Complex64> = (0..n)
            .map(|m| Complex64::new(f(-half_width + m as f64 * h), 0.0))
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            let sgn = if k == 0 || k == n / 2 {
                0.0
            } else if k < n / 2 {
                1.0
            } else {
                -1.0
            };
            *v *= Complex64::new(0.0, -sgn);
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        let m = ((at + half_width) / h).round() as usize;
        buf[m].re / n as f64
    }

    #[test]
    fn hilbert_sign_against_fft_oracle() {
        let u = unit_even();
        let oracle = fft_hilbert(|x| u.value(x, 0.0), 4096.0, 1 << 20, 1.0);
        let closed = u.hilbert(1.0, 0.0, 0).unwrap();
        // s/(a^2+s^2) at s = a = 1.
        assert!((closed - 0.5).abs() < 1e-15);
        assert!((oracle - closed).abs() < 1e-3, "{oracle} vs {closed}");
    }

    #[test]
    fn hilbert_is_an_involution_up_to_sign() {
        for fam in [LorentzianFamily::example1(), LorentzianFamily::example2()] {
            let hh = fam.hilbert_family();
            for &x in &[-3.0, 0.0, 0.4, 2.5] {
                for order in 0..3 {
                    let v = hh.hilbert(x, 0.7, order).unwrap();
                    assert!((v + fam.eval(x, 0.7, order)).abs() < 1e-14);
                    assert!((hh.eval(x, 0.7, order) - fam.hilbert(x, 0.7, order).unwrap()).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn spectral_hilbert_matches_closed_form() {
        let grid = BasisGrid::new(256, 8.0).unwrap();
        let tr = Transform::new(&grid);
        for fam in [LorentzianFamily::example1(), LorentzianFamily::example2()] {
            let a = tr.interpolate(|x| fam.value(x, 0.3));
            let ha = apply_h(&a);
            for &x in &[-7.0, -1.0, 0.0, 0.5, 3.0, 12.0] {
                let v = ha.eval(x);
                assert!((v - fam.hilbert(x, 0.3, 0).unwrap()).abs() < 1e-8, "x={x}");
            }
        }
    }

    #[test]
    fn single_soliton_reduces_to_sech2() {
        let s = SolitonFamily::new(&[1.0], &[0.0]).unwrap();
        assert!((s.value(0.0, 0.0) + 0.5).abs() < 1e-15);
        for &x in &[-40.0, 40.0] {
            assert!(s.value(x, 0.0).abs() < 1e-15);
        }
        for &(x, t) in &[(0.3f64, 0.0f64), (2.0, 1.5), (-4.0, 0.2)] {
            let c = (0.5 * (x - t)).cosh();
            assert!((s.value(x, t) + 0.5 / (c * c)).abs() < 1e-15);
        }
    }

    #[test]
    fn soliton_routes_agree() {
        let mut rng = StdRng::seed_from_u64(5);
        for fam in [SolitonFamily::example3(), SolitonFamily::example4()] {
            for _ in 0..50 {
                let x = rng.random_range(-15.0..15.0);
                let t = rng.random_range(0.0..5.0);
                let a = fam.value(x, t);
                let b = fam.eval_trace(x, t).unwrap();
                assert!((a - b).abs() < 1e-12, "x={x} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn soliton_derivatives_match_differences() {
        let mut rng = StdRng::seed_from_u64(6);
        let fam = SolitonFamily::example3();
        for _ in 0..30 {
            let x = rng.random_range(-10.0..10.0);
            let t = rng.random_range(0.0..5.0);
            let h = 1e-4;
            for order in 0..3 {
                let fd = (fam.eval(x + h, t, order) - fam.eval(x - h, t, order)) / (2.0 * h);
                assert!((fd - fam.eval(x, t, order + 1)).abs() < 1e-6);
            }
            let ft = (fam.value(x, t + h) - fam.value(x, t - h)) / (2.0 * h);
            assert!((ft - fam.time_derivative(x, t)).abs() < 1e-6);
        }
    }

    #[test]
    fn solitons_solve_kdv() {
        let mut rng = StdRng::seed_from_u64(7);
        for fam in [SolitonFamily::example3(), SolitonFamily::example4()] {
            for _ in 0..100 {
                let x = rng.random_range(-20.0..20.0);
                let t = rng.random_range(0.0..5.0);
                let r = fam.time_derivative(x, t) - 6.0 * fam.value(x, t) * fam.eval(x, t, 1)
                    + fam.eval(x, t, 3);
                assert!(r.abs() < 1e-8, "residual {r} at ({x}, {t})");
            }
        }
    }

    #[test]
    fn soliton_rejects_bad_input() {
        assert!(SolitonFamily::new(&[], &[]).is_err());
        assert!(SolitonFamily::new(&[1.0, -1.0], &[0.0, 0.0]).is_err());
        assert!(SolitonFamily::new(&[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn seed_values() {
        assert!((sech2_seed(1.0, 0.5, 1.0, 1.0, 0.0).unwrap() + 0.75).abs() < 1e-15);
        assert!(sech2_seed(1.0, 0.5, 1.0, 1.0, 800.0).unwrap().abs() < 1e-200);
        assert!(sech2_seed(1.0, 1.5, 1.0, 1.0, 0.0).is_err());
        assert!(sech2_seed(1.0, 0.5, -1.0, 1.0, 0.0).is_err());
        assert!(sech2_seed(1.0, 0.5, 1.0, 0.0, 0.0).is_err());
    }
}
