//! Dense complex matrices and vectors.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SketchError};

pub type CScalar = Complex64;

/// Dense real matrix (column-major, nalgebra).
pub type RMat = DMatrix<f64>;

pub(crate) const fn c(re: f64, im: f64) -> CScalar {
    Complex64::new(re, im)
}

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<CScalar>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![CScalar::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<CScalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(SketchError::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(m: &RMat) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| c(m[(i, j)], 0.0))
    }

    pub fn from_diag(diag: &[CScalar]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[CScalar] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[CScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [CScalar] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose `M*`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Real (non-conjugating) transpose `Mᵀ`.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn matmul(&self, other: &CMat) -> Result<CMat> {
        if self.cols != other.rows {
            return Err(SketchError::invalid(format!(
                "shape mismatch: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (k, &aik) in a.iter().enumerate() {
                if aik == c(0.0, 0.0) {
                    continue;
                }
                for (oj, &bkj) in o.iter_mut().zip(other.row(k)) {
                    *oj += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &CVec) -> Result<CVec> {
        if self.cols != x.len() {
            return Err(SketchError::invalid(format!(
                "shape mismatch: {}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(CVec::new(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.as_slice()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    pub fn scale(&self, s: CScalar) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CMat) -> Result<CMat> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMat) -> Result<CMat> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMat, f: impl Fn(CScalar, CScalar) -> CScalar) -> Result<CMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SketchError::invalid("shape mismatch in elementwise operation"));
        }
        Ok(CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn row_norm_sqr(&self, i: usize) -> f64 {
        self.row(i).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Rows selected by `idx`, in order.
    pub fn select_rows(&self, idx: &[usize]) -> CMat {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        CMat { rows: idx.len(), cols: self.cols, data }
    }

    /// Real part, or `None` when any imaginary part exceeds `tol` in magnitude.
    pub fn to_real(&self, tol: f64) -> Option<RMat> {
        if self.data.iter().any(|z| z.im.abs() > tol) {
            return None;
        }
        Some(RMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].re))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<CScalar> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<CScalar>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = CScalar;

    fn index(&self, (i, j): (usize, usize)) -> &CScalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CScalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec(Vec<CScalar>);

impl CVec {
    pub fn new(entries: Vec<CScalar>) -> Self {
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![c(0.0, 0.0); len])
    }

    pub fn from_real(v: &[f64]) -> Self {
        Self(v.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[CScalar] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<CScalar> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Complex ℓp norm built from entry moduli; `p = ∞` gives the max modulus.
    pub fn norm_p(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
        } else {
            self.0.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        CVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: CScalar) -> CVec {
        CVec(self.0.iter().map(|z| z * s).collect())
    }
}

impl Index<usize> for CVec {
    type Output = CScalar;

    fn index(&self, i: usize) -> &CScalar {
        &self.0[i]
    }
}

impl From<Vec<CScalar>> for CVec {
    fn from(v: Vec<CScalar>) -> Self {
        Self(v)
    }
}
