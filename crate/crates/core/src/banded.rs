//! Band matrices in row-compressed storage and a band LU with partial pivoting.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Scalars the band routines work over.
pub trait BandScalar:
    Copy
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + std::fmt::Debug
{
    fn zero() -> Self;
    fn one() -> Self;
    fn magnitude(self) -> f64;
}

impl BandScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl BandScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Square `n x n` matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + ku` contiguously; slots that fall
/// outside the matrix are kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix<T = f64> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<T>,
}

impl<T: BandScalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        Self {
            n,
            kl,
            ku,
            data: vec![T::zero(); n * (kl + ku + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    /// Largest `|i - j|` over stored diagonals.
    pub fn bandwidth(&self) -> usize {
        self.kl.max(self.ku)
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i >= self.n || j >= self.n || !self.in_band(i, j) {
            return T::zero();
        }
        self.data[i * self.width() + j + self.kl - i]
    }

    /// Panics if `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(
            i < self.n && j < self.n && self.in_band(i, j),
            "({i}, {j}) outside band"
        );
        let w = self.width();
        self.data[i * w + j + self.kl - i] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// Column range of row `i` that is inside both the band and the matrix.
    fn row_cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = T::zero();
            for j in self.row_cols(i) {
                acc = acc + row[j + self.kl - i] * x[j];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Band product `self * rhs`, trimmed to its exact nonzero band.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = Self::zeros(n, self.kl + rhs.kl, self.ku + rhs.ku);
        for i in 0..n {
            for k in self.row_cols(i) {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in rhs.row_cols(k) {
                    out.add_to(i, j, a * rhs.get(k, j));
                }
            }
        }
        out.trimmed()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.row_cols(i) {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            n: self.n,
            kl: self.kl,
            ku: self.ku,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    /// Entrywise `self + s * rhs` over the union of both bands.
    pub fn add_scaled(&self, s: T, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let mut out = Self::zeros(self.n, self.kl.max(rhs.kl), self.ku.max(rhs.ku));
        for i in 0..self.n {
            for j in self.row_cols(i) {
                out.add_to(i, j, self.get(i, j));
            }
            for j in rhs.row_cols(i) {
                out.add_to(i, j, s * rhs.get(i, j));
            }
        }
        out
    }

    /// Drops outer diagonals that are identically zero.
    pub fn trimmed(&self) -> Self {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for j in self.row_cols(i) {
                if self.get(i, j) != T::zero() {
                    if j < i {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        let mut out = Self::zeros(self.n, kl, ku);
        for i in 0..self.n {
            for j in out.row_cols(i) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Largest entry magnitude of `self + self^T`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in self.row_cols(i) {
                worst = worst.max((self.get(i, j) + self.get(j, i)).magnitude());
            }
        }
        worst
    }

    pub fn factor(&self) -> Result<BandLu<T>> {
        BandLu::new(self)
    }
}

impl BandMatrix<f64> {
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `I - s * self` as a complex band matrix.
    pub fn shifted_identity(&self, s: Complex64) -> BandMatrix<Complex64> {
        let mut out = BandMatrix::<Complex64>::zeros(self.n, self.kl, self.ku);
        for i in 0..self.n {
            for j in self.row_cols(i) {
                out.set(i, j, -s * self.get(i, j));
            }
            out.add_to(i, i, Complex64::new(1.0, 0.0));
        }
        out
    }
}

/// LU factors of a band matrix with row interchanges.
///
/// Pivoting widens the upper band of `U` to `kl + ku`; the multipliers are kept
/// separately. Factorization and each solve are `O(n (kl + ku) kl)`.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    m1: usize,
    m2: usize,
    upper: Vec<T>,
    lower: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: BandScalar> BandLu<T> {
    pub fn new(a: &BandMatrix<T>) -> Result<Self> {
        let n = a.n;
        let m1 = a.kl;
        let m2 = a.ku;
        let mm = m1 + m2 + 1;
        let mut au = a.data.clone();
        let mut al = vec![T::zero(); n * m1.max(1)];
        let mut pivots = vec![0; n];

        // Shift the first m1 rows left so that column 0 holds the diagonal's
        // leftmost entry.
        let mut l = m1;
        for i in 0..m1.min(n) {
            for j in (m1 - i)..mm {
                au[i * mm + j - l] = au[i * mm + j];
            }
            l -= 1;
            for j in (mm - l - 1)..mm {
                au[i * mm + j] = T::zero();
            }
        }

        let scale = a
            .data
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.magnitude()))
            .max(f64::MIN_POSITIVE);
        let mut l = m1;
        for k in 0..n {
            let mut pivot = au[k * mm];
            let mut ip = k;
            if l < n {
                l += 1;
            }
            for j in (k + 1)..l {
                if au[j * mm].magnitude() > pivot.magnitude() {
                    pivot = au[j * mm];
                    ip = j;
                }
            }
            pivots[k] = ip;
            if pivot.magnitude() <= scale * f64::EPSILON * 1e-3 {
                return Err(Error::Singular(format!(
                    "zero pivot in column {k} of a {n}x{n} band matrix"
                )));
            }
            if ip != k {
                for j in 0..mm {
                    au.swap(k * mm + j, ip * mm + j);
                }
            }
            for i in (k + 1)..l {
                let f = au[i * mm] / au[k * mm];
                al[k * m1 + i - k - 1] = f;
                for j in 1..mm {
                    au[i * mm + j - 1] = au[i * mm + j] - f * au[k * mm + j];
                }
                au[i * mm + mm - 1] = T::zero();
            }
        }

        Ok(Self {
            n,
            m1,
            m2,
            upper: au,
            lower: al,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrites `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        let m1 = self.m1;
        let mm = m1 + self.m2 + 1;
        let mut l = m1;
        for k in 0..n {
            let j = self.pivots[k];
            if j != k {
                x.swap(k, j);
            }
            if l < n {
                l += 1;
            }
            for j in (k + 1)..l {
                let xk = x[k];
                x[j] = x[j] - self.lower[k * m1 + j - k - 1] * xk;
            }
        }
        let mut l = 1;
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in 1..l {
                acc = acc - self.upper[i * mm + k] * x[k + i];
            }
            x[i] = acc / self.upper[i * mm];
            if l < mm {
                l += 1;
            }
        }
    }
}
