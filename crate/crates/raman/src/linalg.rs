//! Dense complex linear-algebra helpers: norms, hermiticity checks, and the
//! eigendecomposition-backed unitary exponential used by every propagator.

use nalgebra::{DMatrix, DVector, Normed};

use crate::error::{RamanError, Result};
use crate::hilbert::OperatorMatrix;
use crate::{rc, Complex, Real};

/// Largest entry magnitude (max norm).
pub fn max_abs<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter()
        .map(|z| z.norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Frobenius norm.
pub fn fro_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.norm()
}

/// Spectral norm (largest singular value), via the hermitian
/// eigendecomposition of `M^dag M`.
pub fn spectral_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let gram = m.adjoint() * m;
    let eig = gram.symmetric_eigen();
    let top = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    top.max(T::zero()).sqrt()
}

/// Spectral-norm distance between two operators.
pub fn op_distance<T: Real>(a: &OperatorMatrix<T>, b: &OperatorMatrix<T>) -> T {
    spectral_norm(&(&a.mat - &b.mat))
}

/// `||U^dag U - Id||` in the max norm.
pub fn unitarity_defect<T: Real>(u: &OperatorMatrix<T>) -> T {
    let d = u.dim();
    let gram = u.mat.adjoint() * &u.mat;
    max_abs(&(gram - DMatrix::<Complex<T>>::identity(d, d)))
}

pub(crate) fn phase<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Cached hermitian eigendecomposition, reused across a whole time grid.
#[derive(Clone, Debug)]
pub struct HermitianExp<T: Real> {
    op: OperatorMatrix<T>,
    eigenvectors: DMatrix<Complex<T>>,
    eigenvalues: DVector<T>,
}

impl<T: Real> HermitianExp<T> {
    /// Default relative hermiticity tolerance for generators.
    pub fn default_tol() -> T {
        rc(1e-9)
    }

    pub fn new(op: &OperatorMatrix<T>) -> Result<Self> {
        Self::with_tol(op, Self::default_tol())
    }

    pub fn with_tol(op: &OperatorMatrix<T>, rtol: T) -> Result<Self> {
        let defect = op.hermiticity_defect();
        let scale = op.max_abs().max(T::one());
        if defect > rtol * scale {
            return Err(RamanError::NotHermitian {
                defect: defect.to_f64().unwrap_or(f64::NAN),
                tol: (rtol * scale).to_f64().unwrap_or(f64::NAN),
            });
        }
        // work on the hermitian part so the eigenvalues are exactly real
        let herm = (&op.mat + op.mat.adjoint()).scale(rc(0.5));
        let eig = herm.symmetric_eigen();
        Ok(HermitianExp {
            op: op.clone(),
            eigenvectors: eig.eigenvectors,
            eigenvalues: eig.eigenvalues,
        })
    }

    pub fn generator(&self) -> &OperatorMatrix<T> {
        &self.op
    }

    /// `exp(-i H tau)`.
    pub fn at(&self, tau: T) -> OperatorMatrix<T> {
        let mut scaled = self.eigenvectors.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let ph = phase(-e * tau);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= ph);
        }
        OperatorMatrix {
            layout: self.op.layout.clone(),
            mat: scaled * self.eigenvectors.adjoint(),
        }
    }

    /// Conjugate `x` by `exp(-i H tau)`:  `U x U^dag`.
    pub fn conjugate(&self, x: &OperatorMatrix<T>, tau: T) -> OperatorMatrix<T> {
        let u = self.at(tau);
        &(&u * x) * &u.adjoint()
    }
}

/// One-shot `exp(-i H tau)` of a hermitian operator.
pub fn expm_unitary<T: Real>(h: &OperatorMatrix<T>, tau: T) -> Result<OperatorMatrix<T>> {
    Ok(HermitianExp::new(h)?.at(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{atomic_transfer_op, SpaceLayout};

    type Op = OperatorMatrix<f64>;

    #[test]
    fn expm_of_zero_is_identity() {
        let l = SpaceLayout::new(&[3]).unwrap();
        let u = expm_unitary(&Op::zeros(&l), 1.7).unwrap();
        assert!((&u - &Op::identity(&l)).max_abs() <= 1e-14);
    }

    #[test]
    fn expm_projector_at_pi() {
        let l = SpaceLayout::new(&[2]).unwrap();
        let s33: Op = atomic_transfer_op(&l, 3, 3).unwrap();
        let u = expm_unitary(&s33, std::f64::consts::PI).unwrap();
        for idx in 0..l.dim() {
            let (_, level) = l.decode(idx).unwrap();
            let expect = if level == 3 {
                Complex::new(-1.0, 0.0)
            } else {
                Complex::new(1.0, 0.0)
            };
            assert!((u.mat[(idx, idx)] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn expm_group_law() {
        let l = SpaceLayout::new(&[4]).unwrap();
        let a = crate::hilbert::annihilation_op::<f64>(&l, 0).unwrap();
        let h = &a + &a.adjoint();
        let exp = HermitianExp::new(&h).unwrap();
        let lhs = &exp.at(0.3) * &exp.at(1.1);
        let rhs = exp.at(1.4);
        assert!(op_distance(&lhs, &rhs) <= 1e-11);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let l = SpaceLayout::new(&[2]).unwrap();
        let s13: Op = atomic_transfer_op(&l, 1, 3).unwrap();
        assert!(matches!(
            expm_unitary(&s13, 1.0),
            Err(RamanError::NotHermitian { .. })
        ));
    }

    #[test]
    fn spectral_norm_of_projector() {
        let l = SpaceLayout::new(&[3]).unwrap();
        let s11: Op = atomic_transfer_op(&l, 1, 1).unwrap();
        assert!((spectral_norm(&s11.mat) - 1.0).abs() < 1e-12);
    }
}
