//! Small dense complex linear algebra.
//!
//! Everything here is sized for desk-scale models (a few hundred rows at
//! most), so plain row-major storage and cyclic Jacobi are adequate.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn scalar(v: C64) -> Self {
        Self::diagonal(&[v])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.distance(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&self.adjoint() * self).distance(&Self::identity(self.rows)) <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (self * self).distance(self) <= tol
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `self * diag(d)`.
    pub fn mul_diag(&self, d: &[C64]) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * d[c])
    }

    /// `diag(d) * self`.
    pub fn diag_mul(&self, d: &[C64]) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| d[r] * self[(r, c)])
    }

    /// Copy of the rectangular sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)];
            }
        }
    }

    /// Hilbert–Schmidt inner product `Tr(self* other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Operator norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        if self.rows == 1 && self.cols == 1 {
            return self.data[0].norm();
        }
        let gram = if self.rows < self.cols {
            self * &self.adjoint()
        } else {
            &self.adjoint() * self
        };
        let (vals, _) = hermitian_eigen(&gram);
        vals.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt()
    }

    pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(gaussian(rng), gaussian(rng)))
    }

    pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let g = Self::random_gaussian(rng, n, n);
        (&g + &g.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Haar-ish random unitary via Gram–Schmidt of a Gaussian matrix.
    pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        loop {
            let g = Self::random_gaussian(rng, n, n);
            let mut span = Span::new(n, 1e-8);
            let mut ok = true;
            for c in 0..n {
                let col: Vec<C64> = (0..n).map(|r| g[(r, c)]).collect();
                ok &= span.insert(&col);
            }
            if ok {
                return Self::from_fn(n, n, |r, c| span.basis()[c][r]);
            }
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Standard normal sample (Box–Muller).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi.
///
/// Returns eigenvalues (unsorted) and the unitary whose columns are the
/// corresponding eigenvectors, so that `a = v diag(vals) v*`.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Rotate the phase of column/row q so that a_pq becomes real.
                let phase = apq / r;
                for k in 0..n {
                    m[(k, q)] *= phase.conj();
                    v[(k, q)] *= phase.conj();
                }
                for k in 0..n {
                    m[(q, k)] *= phase;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // Real Givens rotation G = [[c, s], [-s, c]] applied as G^T M G.
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * s;
                    m[(k, q)] = mkp * s + mkq * c;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s;
                    v[(k, q)] = vkp * s + vkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * s;
                    m[(q, k)] = mpk * s + mqk * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
            }
        }
    }
    let vals = (0..n).map(|i| m[(i, i)].re).collect();
    (vals, v)
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_norm(a: &CMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(a);
    vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Incrementally grown orthonormal basis (modified Gram–Schmidt with one
/// re-orthogonalisation pass).
#[derive(Clone, Debug)]
pub struct Span {
    len: usize,
    tol: f64,
    basis: Vec<Vec<C64>>,
}

impl Span {
    pub fn new(len: usize, tol: f64) -> Self {
        Self {
            len,
            tol,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    /// Residual of `v` after projecting out the current span.
    pub fn residual(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.len);
        let mut w = v.to_vec();
        for _ in 0..2 {
            for b in &self.basis {
                let c = vec_inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[C64]) -> bool {
        let scale = vec_norm(v).max(1.0);
        vec_norm(&self.residual(v)) <= self.tol * scale
    }

    /// Adds `v` if it is independent of the span; returns whether it was added.
    pub fn insert(&mut self, v: &[C64]) -> bool {
        let scale = vec_norm(v);
        if scale == 0.0 {
            return false;
        }
        let w = self.residual(v);
        let r = vec_norm(&w);
        if r <= self.tol * scale.max(1.0) {
            return false;
        }
        self.basis.push(w.into_iter().map(|z| z / r).collect());
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jacobi_reconstructs_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 12] {
            let a = CMatrix::random_hermitian(&mut rng, n);
            let (vals, v) = hermitian_eigen(&a);
            assert!(v.is_unitary(1e-10));
            let d = CMatrix::diagonal(&vals.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
            let back = &(&v * &d) * &v.adjoint();
            assert!(back.distance(&a) < 1e-10 * a.frobenius().max(1.0));
        }
    }

    #[test]
    fn operator_norm_of_known_matrices() {
        let m = CMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]);
        assert!((m.operator_norm() - 1.0).abs() < 1e-12);
        let d = CMatrix::diagonal(&[C64::new(3.0, 0.0), C64::new(0.0, -4.0)]);
        assert!((d.operator_norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(CMatrix::random_unitary(&mut rng, 9).is_unitary(1e-10));
    }

    #[test]
    fn span_rejects_dependent_vectors() {
        let mut s = Span::new(3, 1e-10);
        assert!(s.insert(&[ONE, ZERO, ZERO]));
        assert!(s.insert(&[ONE, ONE, ZERO]));
        assert!(!s.insert(&[C64::new(2.0, 0.0), I, ZERO]));
        assert!(s.contains(&[ZERO, ONE, ZERO]));
        assert_eq!(s.dim(), 2);
    }
}
