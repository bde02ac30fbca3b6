use super::matrix::UnitaryOperator;
use crate::error::{Error, Result};

/// State-averaged overlap `|Tr(U^dagger V) / dim|^2`.
pub fn fidelity(u: &UnitaryOperator, target: &UnitaryOperator) -> Result<f64> {
    if u.dim() != target.dim() {
        return Err(Error::Dimension(format!(
            "fidelity between {}x{} and {}x{} operators",
            u.dim(),
            u.dim(),
            target.dim(),
            target.dim()
        )));
    }
    Ok(fidelity_unchecked(u, target))
}

pub(crate) fn fidelity_unchecked(u: &UnitaryOperator, target: &UnitaryOperator) -> f64 {
    let a = u.matrix().as_nalgebra();
    let b = target.matrix().as_nalgebra();
    // Tr(A^dagger B) = sum_ij conj(A_ij) B_ij
    let overlap = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<num_complex::Complex64>();
    let d = u.dim() as f64;
    (overlap / d).norm_sqr()
}
