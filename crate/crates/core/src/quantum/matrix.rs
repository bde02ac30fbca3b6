//! Dense complex matrices and unitary operators.
//!
//! Storage is delegated to `nalgebra`; the text dump format is row-major with
//! one entry per line: `row col re im`.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Builds a square matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    /// Wraps an arbitrary nalgebra matrix; fails on non-square input.
    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn one_norm(&self) -> f64 {
        (0..self.dim())
            .map(|c| self.0.column(c).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |(A - A^dagger)_ij|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |(A^dagger A - I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.0.adjoint() * &self.0;
        let n = self.dim();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                let expected = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p[(r, c)] - Complex64::new(expected, 0.0)).norm());
            }
        }
        worst
    }

    /// Serializes the matrix as `row col re im` lines in row-major order.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        let n = self.dim();
        for r in 0..n {
            for c in 0..n {
                let z = self.0[(r, c)];
                let _ = writeln!(out, "{r} {c} {:.16e} {:.16e}", z.re, z.im);
            }
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected `row col re im`",
                    line_no + 1
                )));
            }
            let parse_idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| Error::InvalidInput(format!("line {}: {e}", line_no + 1)))
            };
            let parse_f = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("line {}: {e}", line_no + 1)))
            };
            entries.push((
                parse_idx(fields[0])?,
                parse_idx(fields[1])?,
                Complex64::new(parse_f(fields[2])?, parse_f(fields[3])?),
            ));
        }
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::Dimension(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        let mut m = Self::zeros(dim);
        for (k, (r, c, z)) in entries.into_iter().enumerate() {
            if r != k / dim || c != k % dim {
                return Err(Error::InvalidInput(format!(
                    "entry {k} is ({r}, {c}); expected row-major order"
                )));
            }
            m.set(r, c, z);
        }
        Ok(m)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// A matrix known to satisfy `max |U^dagger U - I| < 1e-10`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let err = matrix.unitarity_error();
        if !(err < UNITARITY_TOL) {
            return Err(Error::NumericalFailure(format!(
                "matrix is not unitary (max |U^dagger U - I| = {err:.3e})"
            )));
        }
        Ok(Self(matrix))
    }

    /// Skips the unitarity check. Callers guarantee the invariant, e.g. for
    /// products of operators that are already unitary.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Applies `step` after `self`, i.e. returns `step * self`.
    pub fn then(&self, step: &UnitaryOperator) -> Self {
        Self(&step.0 * &self.0)
    }

    /// Multiplies by a global phase `e^{i phi}`.
    pub fn with_phase(&self, phi: f64) -> Self {
        Self(self.0.scale(Complex64::from_polar(1.0, phi)))
    }

    pub fn unitarity_error(&self) -> f64 {
        self.0.unitarity_error()
    }
}

/// Time-ordered product of `steps` (first element applied first).
pub fn time_ordered_product<'a, I>(dim: usize, steps: I) -> UnitaryOperator
where
    I: IntoIterator<Item = &'a UnitaryOperator>,
{
    steps
        .into_iter()
        .fold(UnitaryOperator::identity(dim), |acc, u| acc.then(u))
}
