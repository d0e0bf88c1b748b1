//! Truncated composite Hilbert space (3 atomic levels tensor per-axis Fock
//! spaces) and the elementary operators every Hamiltonian is assembled from.
//!
//! Basis ordering: the atomic index varies fastest, then axis occupations
//! with the *first axis fastest*. For occupations (n_0, n_1, ...) on axes
//! with cutoffs (c_0, c_1, ...) and atomic level l in 1..=3,
//!
//! ```text
//! index = (l - 1) + 3 * (n_0 + c_0 * (n_1 + c_1 * n_2))
//! ```
//!
//! All operators are built from truncated ladder matrices; in particular
//! [`plane_wave_op`] is the exponential of the truncated anti-hermitian
//! generator, so it is exactly unitary in the truncated space.

use nalgebra::DMatrix;

use crate::error::{RamanError, Result};
use crate::linalg;
use crate::{Complex, Real};

/// Number of atomic levels of the lambda scheme.
pub const ATOMIC_LEVELS: usize = 3;

/// Default cap on the total composite dimension.
pub const DEFAULT_DIM_CAP: usize = 20_000;

/// Truncated composite Hilbert space layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceLayout {
    cutoffs: Vec<usize>,
}

impl SpaceLayout {
    /// Build a layout with the default dimension cap.
    pub fn new(cutoffs: &[usize]) -> Result<Self> {
        Self::with_cap(cutoffs, DEFAULT_DIM_CAP)
    }

    /// Build a layout with an explicit dimension cap.
    pub fn with_cap(cutoffs: &[usize], cap: usize) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(RamanError::NoAxes);
        }
        if cutoffs.len() > 3 {
            return Err(RamanError::TooManyAxes(cutoffs.len()));
        }
        if let Some(&c) = cutoffs.iter().find(|&&c| c < 2) {
            return Err(RamanError::CutoffTooSmall(c));
        }
        let dim = ATOMIC_LEVELS * cutoffs.iter().product::<usize>();
        if dim > cap {
            return Err(RamanError::DimensionCap { dim, cap });
        }
        Ok(SpaceLayout {
            cutoffs: cutoffs.to_vec(),
        })
    }

    pub fn axes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn cutoff(&self, axis: usize) -> Result<usize> {
        self.cutoffs
            .get(axis)
            .copied()
            .ok_or(RamanError::AxisOutOfRange(axis))
    }

    /// Product of the Fock cutoffs.
    pub fn motional_dim(&self) -> usize {
        self.cutoffs.iter().product()
    }

    /// Total composite dimension, `3 * prod(cutoffs)`.
    pub fn dim(&self) -> usize {
        ATOMIC_LEVELS * self.motional_dim()
    }

    /// Basis index of `|level; n_0, n_1, ...>`.
    pub fn basis_index(&self, occupations: &[usize], level: usize) -> Result<usize> {
        if !(1..=ATOMIC_LEVELS).contains(&level) {
            return Err(RamanError::LevelOutOfRange(level));
        }
        if occupations.len() != self.axes() {
            return Err(RamanError::AxisCountMismatch {
                expected: self.axes(),
                got: occupations.len(),
            });
        }
        let mut flat = 0usize;
        for (axis, (&n, &c)) in occupations.iter().zip(&self.cutoffs).enumerate().rev() {
            if n >= c {
                return Err(RamanError::OccupationOutOfRange {
                    occ: n,
                    axis,
                    cutoff: c,
                });
            }
            flat = flat * c + n;
        }
        Ok((level - 1) + ATOMIC_LEVELS * flat)
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn decode(&self, index: usize) -> Result<(Vec<usize>, usize)> {
        if index >= self.dim() {
            return Err(RamanError::IndexOutOfRange(index, self.dim()));
        }
        let level = index % ATOMIC_LEVELS + 1;
        let mut flat = index / ATOMIC_LEVELS;
        let mut occs = Vec::with_capacity(self.axes());
        for &c in &self.cutoffs {
            occs.push(flat % c);
            flat /= c;
        }
        Ok((occs, level))
    }
}

/// Dense complex square matrix acting on a [`SpaceLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    pub layout: SpaceLayout,
    pub mat: DMatrix<Complex<T>>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(layout: &SpaceLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix {
            layout: layout.clone(),
            mat: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix {
            layout: layout.clone(),
            mat: DMatrix::identity(d, d),
        }
    }

    pub fn from_mat(layout: &SpaceLayout, mat: DMatrix<Complex<T>>) -> Result<Self> {
        if mat.nrows() != layout.dim() || mat.ncols() != layout.dim() {
            return Err(RamanError::LayoutMismatch);
        }
        Ok(OperatorMatrix {
            layout: layout.clone(),
            mat,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            layout: self.layout.clone(),
            mat: self.mat.adjoint(),
        }
    }

    /// Multiply by a complex scalar.
    pub fn scaled(&self, z: Complex<T>) -> Self {
        OperatorMatrix {
            layout: self.layout.clone(),
            mat: &self.mat * z,
        }
    }

    /// Multiply by a real scalar.
    pub fn scaled_re(&self, x: T) -> Self {
        self.scaled(Complex::new(x, T::zero()))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        linalg::max_abs(&self.mat)
    }

    /// `max |M - M^dag|` entrywise.
    pub fn hermiticity_defect(&self) -> T {
        linalg::max_abs(&(&self.mat - self.mat.adjoint()))
    }

    /// Hermitian relative to the entry scale: defect <= rtol * max|M|
    /// (absolute rtol for near-zero matrices).
    pub fn is_hermitian(&self, rtol: T) -> bool {
        let scale = if self.max_abs() > T::one() {
            self.max_abs()
        } else {
            T::one()
        };
        self.hermiticity_defect() <= rtol * scale
    }

    pub(crate) fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout == other.layout {
            Ok(())
        } else {
            Err(RamanError::LayoutMismatch)
        }
    }
}

macro_rules! op_binop {
    ($trait:ident, $fn:ident, $op:tt) => {
        impl<'a, T: Real> std::ops::$trait<&'a OperatorMatrix<T>> for &'a OperatorMatrix<T> {
            type Output = OperatorMatrix<T>;
            fn $fn(self, rhs: &'a OperatorMatrix<T>) -> OperatorMatrix<T> {
                assert_eq!(self.layout, rhs.layout, "operator layout mismatch");
                OperatorMatrix {
                    layout: self.layout.clone(),
                    mat: &self.mat $op &rhs.mat,
                }
            }
        }
    };
}
op_binop!(Add, add, +);
op_binop!(Sub, sub, -);
op_binop!(Mul, mul, *);

impl<T: Real> std::ops::Neg for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn neg(self) -> OperatorMatrix<T> {
        OperatorMatrix {
            layout: self.layout.clone(),
            mat: -&self.mat,
        }
    }
}

/// Annihilation operator of one motional axis, embedded in the composite
/// space: sqrt(n) on (n-1 <- n) within the axis, identity elsewhere.
pub fn annihilation_op<T: Real>(layout: &SpaceLayout, axis: usize) -> Result<OperatorMatrix<T>> {
    let cutoff = layout.cutoff(axis)?;
    let mut op = OperatorMatrix::zeros(layout);
    for idx in 0..layout.dim() {
        let (occs, level) = layout.decode(idx)?;
        let n = occs[axis];
        if n >= 1 && n < cutoff {
            let mut lower = occs.clone();
            lower[axis] = n - 1;
            let row = layout.basis_index(&lower, level)?;
            op.mat[(row, idx)] = Complex::new(crate::rc::<T>(n as f64).sqrt(), T::zero());
        }
    }
    Ok(op)
}

/// Number operator of one motional axis.
pub fn number_op<T: Real>(layout: &SpaceLayout, axis: usize) -> Result<OperatorMatrix<T>> {
    layout.cutoff(axis)?;
    let mut op = OperatorMatrix::zeros(layout);
    for idx in 0..layout.dim() {
        let (occs, _) = layout.decode(idx)?;
        op.mat[(idx, idx)] = Complex::new(crate::rc::<T>(occs[axis] as f64), T::zero());
    }
    Ok(op)
}

/// Sum of the number operators over all axes.
pub fn total_number_op<T: Real>(layout: &SpaceLayout) -> Result<OperatorMatrix<T>> {
    let mut op = number_op(layout, 0)?;
    for axis in 1..layout.axes() {
        op = &op + &number_op(layout, axis)?;
    }
    Ok(op)
}

/// Atomic transfer operator |k><l| tensor the motional identity.
pub fn atomic_transfer_op<T: Real>(
    layout: &SpaceLayout,
    k: usize,
    l: usize,
) -> Result<OperatorMatrix<T>> {
    if !(1..=ATOMIC_LEVELS).contains(&k) {
        return Err(RamanError::LevelOutOfRange(k));
    }
    if !(1..=ATOMIC_LEVELS).contains(&l) {
        return Err(RamanError::LevelOutOfRange(l));
    }
    let mut op = OperatorMatrix::zeros(layout);
    let one = Complex::new(T::one(), T::zero());
    for flat in 0..layout.motional_dim() {
        op.mat[((k - 1) + ATOMIC_LEVELS * flat, (l - 1) + ATOMIC_LEVELS * flat)] = one;
    }
    Ok(op)
}

/// Plane-wave operator `exp(-i * sign * sum_a eta_a (a_a + a_a^dag))`,
/// computed as the exponential of the truncated generator (exactly unitary).
pub fn plane_wave_op<T: Real>(
    layout: &SpaceLayout,
    lamb_dicke: &[T],
    sign: i32,
) -> Result<OperatorMatrix<T>> {
    if lamb_dicke.len() != layout.axes() {
        return Err(RamanError::AxisCountMismatch {
            expected: layout.axes(),
            got: lamb_dicke.len(),
        });
    }
    if lamb_dicke.iter().any(|e| !e.is_finite()) {
        return Err(RamanError::NonFinite("lamb_dicke"));
    }
    let mut gen = OperatorMatrix::zeros(layout);
    for (axis, &eta) in lamb_dicke.iter().enumerate() {
        let a = annihilation_op::<T>(layout, axis)?;
        gen = &gen + &(&a + &a.adjoint()).scaled_re(eta);
    }
    let tau = if sign >= 0 { T::one() } else { -T::one() };
    linalg::expm_unitary(&gen, tau)
}

/// Commutator `AB - BA`.
pub fn op_commutator<T: Real>(
    a: &OperatorMatrix<T>,
    b: &OperatorMatrix<T>,
) -> Result<OperatorMatrix<T>> {
    a.check_same_layout(b)?;
    Ok(&(a * b) - &(b * a))
}
