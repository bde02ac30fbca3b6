//! Matrix exponentials.
//!
//! Anti-Hermitian arguments go through the eigendecomposition of the
//! Hermitian generator, which keeps the result unitary to machine precision.
//! Everything else uses degree-13 Pade approximation with scaling and
//! squaring.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Eigendecomposition `H = V diag(values) V^dagger` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let eig = h.as_nalgebra().clone().symmetric_eigen();
        let vectors = ComplexMatrix::from_nalgebra(eig.eigenvectors)?;
        Ok(Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors,
        })
    }

    /// `exp(-i H dt)`.
    pub fn propagator(&self, dt: f64) -> ComplexMatrix {
        let v = self.vectors.as_nalgebra();
        let n = self.values.len();
        let mut scaled = v.clone();
        for (c, &lambda) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -lambda * dt);
            for r in 0..n {
                scaled[(r, c)] *= phase;
            }
        }
        ComplexMatrix::from_nalgebra(scaled * v.adjoint()).expect("square")
    }

    /// Derivative of `exp(-i (H + s K) dt)` with respect to `s` at `s = 0`.
    ///
    /// Uses the divided-difference form in the eigenbasis of `H`, written with
    /// a `sinc` so that nearly degenerate eigenvalues stay well conditioned.
    pub fn propagator_derivative(&self, k: &ComplexMatrix, dt: f64) -> ComplexMatrix {
        let v = self.vectors.as_nalgebra();
        let n = self.values.len();
        let k_eig = v.adjoint() * k.as_nalgebra() * v;
        let mut weighted = DMatrix::<Complex64>::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let la = self.values[a];
                let lb = self.values[b];
                let half = 0.5 * (la - lb) * dt;
                let sinc = if half.abs() < 1e-8 {
                    1.0 - half * half / 6.0
                } else {
                    half.sin() / half
                };
                let phi = -I * dt * Complex64::from_polar(1.0, -0.5 * (la + lb) * dt) * sinc;
                weighted[(a, b)] = k_eig[(a, b)] * phi;
            }
        }
        ComplexMatrix::from_nalgebra(v * weighted * v.adjoint()).expect("square")
    }
}

/// `exp(-i H dt)` for Hermitian `H`.
pub fn propagator(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    Ok(HermitianEigen::new(h)?.propagator(dt))
}

/// `exp(A)` for a square complex matrix.
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix exponential of non-finite matrix".into()));
    }
    let scale = a.max_abs().max(1.0);
    let skew_error = (a + &a.adjoint()).max_abs();
    if skew_error <= 1e-14 * scale {
        // A = -i H with H = i A Hermitian.
        let h = a.scale(I);
        let h = (&h + &h.adjoint()).scale_real(0.5);
        return propagator(&h, 1.0);
    }
    pade13(a)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim();
    let norm = a.one_norm();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.as_nalgebra() / Complex64::new(2f64.powi(squarings), 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("singular Pade denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    ComplexMatrix::from_nalgebra(r)
}
