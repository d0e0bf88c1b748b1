//! Canonical transformation data {C_n, Z_n}: the order-by-order algebraic
//! recursion with the minimal-solution condition, and the closed first- and
//! second-order forms used to cross-validate it.
//!
//! Everything is stored in scaled form (lambda^n C_n, lambda^n Z_n): the
//! perturbation `Hp = HB + Hud` already carries the lambda scaling, so the
//! lambda = 0 case stays well defined.
//!
//! Sign conventions: the transformation is `e^{iZ} H e^{-iZ} = H0 + C`. At
//! order n this gives `C_n - i[Z_n, H0] - F_n = 0` with `F_n` the known
//! remainder; the minimal solution has vanishing diagonal blocks,
//! `Z_ge = +i F_ge`, `Z_eg = -i F_eg` (eigenvalues E_g = 0, E_e = 1), so the
//! returned Z satisfies `i [H0, Z] = offdiag(F)`.

use crate::error::{RamanError, Result};
use crate::hilbert::{
    atomic_transfer_op, op_commutator, total_number_op, OperatorMatrix, SpaceLayout,
};
use crate::{rc, Complex, Real};

/// Highest supported perturbative order for the recursion.
pub const MAX_ORDER: usize = 6;

/// The two eigenprojectors of `H0 = s33` (eigenvalues 0 and 1).
#[derive(Clone, Debug)]
pub struct BlockStructure<T: Real> {
    pub projector_g: OperatorMatrix<T>,
    pub projector_e: OperatorMatrix<T>,
}

impl<T: Real> BlockStructure<T> {
    /// `Pg F Pg + Pe F Pe`.
    pub fn block_diagonal(&self, f: &OperatorMatrix<T>) -> OperatorMatrix<T> {
        let pg = &self.projector_g;
        let pe = &self.projector_e;
        &(&(pg * f) * pg) + &(&(pe * f) * pe)
    }

    /// `F - block_diagonal(F)`.
    pub fn off_diagonal(&self, f: &OperatorMatrix<T>) -> OperatorMatrix<T> {
        f - &self.block_diagonal(f)
    }
}

/// Eigenprojectors of the unperturbed Hamiltonian:
/// `P_g = (s11 + s22) x Id`, `P_e = s33 x Id`.
pub fn build_block_structure<T: Real>(layout: &SpaceLayout) -> Result<BlockStructure<T>> {
    let s11 = atomic_transfer_op(layout, 1, 1)?;
    let s22 = atomic_transfer_op(layout, 2, 2)?;
    let s33 = atomic_transfer_op(layout, 3, 3)?;
    Ok(BlockStructure {
        projector_g: &s11 + &s22,
        projector_e: s33,
    })
}

/// Minimal solution of the block equation: given hermitian F, return the
/// hermitian Z with vanishing diagonal blocks and
/// `Z_ge = i F_ge / (E_e - E_g)`, `Z_eg = i F_eg / (E_g - E_e)`.
///
/// For the two-projector structure here (E_g = 0, E_e = 1) that is
/// `Z = i Pg F Pe - i Pe F Pg`; the general divided-difference form divides
/// each block by the corresponding eigenvalue gap.
pub fn block_offdiag_solve<T: Real>(
    f: &OperatorMatrix<T>,
    block: &BlockStructure<T>,
) -> OperatorMatrix<T> {
    let mut f = f.clone();
    if !f.is_hermitian(rc(1e-12)) {
        log::warn!(
            "block_offdiag_solve: non-hermitian input (defect {:.3e}); using the hermitian part",
            f.hermiticity_defect().to_f64().unwrap_or(f64::NAN)
        );
        f = (&f + &f.adjoint()).scaled_re(rc(0.5));
    }
    let pg = &block.projector_g;
    let pe = &block.projector_e;
    let i = Complex::new(T::zero(), T::one());
    &(&(pg * &f) * pe).scaled(i) - &(&(pe * &f) * pg).scaled(i)
}

/// The scaled transformation data up to a requested order.
#[derive(Clone, Debug)]
pub struct PerturbativeDecomposition<T: Real> {
    pub order: usize,
    pub h0: OperatorMatrix<T>,
    /// `[lambda C1, lambda^2 C2, ...]`.
    pub scaled_c: Vec<OperatorMatrix<T>>,
    /// `[lambda Z1, lambda^2 Z2, ...]`.
    pub scaled_z: Vec<OperatorMatrix<T>>,
    pub block: BlockStructure<T>,
}

impl<T: Real> PerturbativeDecomposition<T> {
    /// `H0 + lambda C1 + lambda^2 C2` (requires order >= 2).
    pub fn effective_generator(&self) -> Result<OperatorMatrix<T>> {
        if self.order < 2 {
            return Err(RamanError::OrderTooLow(self.order));
        }
        Ok(&(&self.h0 + &self.scaled_c[0]) + &self.scaled_c[1])
    }

    /// `H0 + lambda C1` (the generator the fine corrections rotate with).
    pub fn coarse_generator(&self) -> OperatorMatrix<T> {
        &self.h0 + &self.scaled_c[0]
    }

    /// `lambda Z1 + lambda^2 Z2` (requires order >= 2).
    pub fn z_total(&self) -> Result<OperatorMatrix<T>> {
        if self.order < 2 {
            return Err(RamanError::OrderTooLow(self.order));
        }
        Ok(&self.scaled_z[0] + &self.scaled_z[1])
    }
}

/// Compositions of `n` into exactly `k` parts, each >= 1.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for rest in compositions(n - first, k - 1) {
            let mut c = vec![first];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

/// Solve the recursion order by order.
///
/// `h0` must be a projector (spectrum {0, 1}); `hp` is the full first-order
/// perturbation, already carrying the lambda scaling, so the outputs are the
/// scaled `lambda^n C_n`, `lambda^n Z_n`.
pub fn solve_decomposition<T: Real>(
    h0: &OperatorMatrix<T>,
    hp: &OperatorMatrix<T>,
    block: &BlockStructure<T>,
    order: usize,
) -> Result<PerturbativeDecomposition<T>> {
    if order < 1 || order > MAX_ORDER {
        return Err(RamanError::OrderOutOfRange(order));
    }
    h0.check_same_layout(hp)?;
    // projector check: H0^2 = H0 and hermitian
    let idem = &(h0 * h0) - h0;
    if idem.max_abs() > rc(1e-12) || !h0.is_hermitian(rc(1e-12)) {
        return Err(RamanError::BadUnperturbedSpectrum);
    }
    if !hp.is_hermitian(rc(1e-10)) {
        return Err(RamanError::NotHermitian {
            defect: hp.hermiticity_defect().to_f64().unwrap_or(f64::NAN),
            tol: 1e-10,
        });
    }

    let mut scaled_c: Vec<OperatorMatrix<T>> = Vec::with_capacity(order);
    let mut scaled_z: Vec<OperatorMatrix<T>> = Vec::with_capacity(order);

    // i^k / k! as a complex coefficient
    let coeff = |k: usize| -> Complex<T> {
        let mut c = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        for j in 1..=k {
            c = c * i / Complex::new(rc(j as f64), T::zero());
        }
        c
    };

    for n in 1..=order {
        // F_n collects every order-n term of e^{iZ} H e^{-iZ} that involves
        // only Z_1 .. Z_{n-1}; the single unknown term i[Z_n, H0] is excluded.
        let mut f_n = if n == 1 {
            hp.clone()
        } else {
            OperatorMatrix::zeros(&h0.layout)
        };
        for k in 1..=n {
            let ck = coeff(k);
            // ad chains acting on H0: total order n, skip the unknown (n) at k=1
            for comp in compositions(n, k) {
                if k == 1 && comp[0] == n {
                    continue;
                }
                let mut x = h0.clone();
                for &m in comp.iter().rev() {
                    x = op_commutator(&scaled_z[m - 1], &x)?;
                }
                f_n = &f_n + &x.scaled(ck);
            }
            // ad chains acting on Hp: total order n - 1
            if n >= k + 1 {
                for comp in compositions(n - 1, k) {
                    let mut x = hp.clone();
                    for &m in comp.iter().rev() {
                        x = op_commutator(&scaled_z[m - 1], &x)?;
                    }
                    f_n = &f_n + &x.scaled(ck);
                }
            }
        }
        scaled_c.push(block.block_diagonal(&f_n));
        scaled_z.push(block_offdiag_solve(&f_n, block));
    }

    Ok(PerturbativeDecomposition {
        order,
        h0: h0.clone(),
        scaled_c,
        scaled_z,
        block: block.clone(),
    })
}

/// Convenience: build the rotating-frame parts of `config` and run the
/// recursion with `Hp = HB + Hud`.
pub fn decompose<T: Real>(
    config: &crate::hamiltonian::RamanConfig<T>,
    order: usize,
) -> Result<PerturbativeDecomposition<T>> {
    let parts = crate::hamiltonian::build_rotating_parts(config)?;
    let block = build_block_structure(&config.layout)?;
    let hp = &parts.hb + &parts.hud;
    solve_decomposition(&parts.h0, &hp, &block, order)
}

/// Closed first order: `lambda C1 = HB` and
/// `lambda Z1 = i((g13/delta) W13 s13 - h.c.) + i((g23/delta) W23 s23 - h.c.)`.
pub fn closed_form_first_order<T: Real>(
    config: &crate::hamiltonian::RamanConfig<T>,
) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
    let parts = crate::hamiltonian::build_rotating_parts(config)?;
    let layout = &config.layout;
    let i = Complex::new(T::zero(), T::one());
    let dc = Complex::new(config.delta, T::zero());
    let anti = |half: &OperatorMatrix<T>| half - &half.adjoint();
    let z1 = &anti(&(&config.w13()? * &atomic_transfer_op(layout, 1, 3)?).scaled(config.g13 / dc))
        .scaled(i)
        + &anti(&(&config.w23()? * &atomic_transfer_op(layout, 2, 3)?).scaled(config.g23 / dc))
            .scaled(i);
    Ok((parts.hb, z1))
}

/// Closed second order.
///
/// `lambda^2 C2` carries the Stark shifts and the effective 1-2 coupling;
/// `lambda^2 Z2 = -(nu/delta) sum_j ((g_j3/delta) X_j3 s_j3 + h.c.)` with
/// `X_j3 = i [W_j3, sum_a a^dag a]`.
///
/// The leading sign of Z2 is fixed by the defining second-order equation
/// (the recursion reproduces it); written with `X_j3 = i [N, W_j3]` it takes
/// the sign-free form.
pub fn closed_form_second_order<T: Real>(
    config: &crate::hamiltonian::RamanConfig<T>,
) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
    let layout = &config.layout;
    let d = config.delta;
    if d == T::zero() {
        return Err(RamanError::ZeroDetuning);
    }
    let d2 = d * d;
    let s11 = atomic_transfer_op(layout, 1, 1)?;
    let s22 = atomic_transfer_op(layout, 2, 2)?;
    let s33 = atomic_transfer_op(layout, 3, 3)?;
    let g13n = config.g13.norm_sqr();
    let g23n = config.g23.norm_sqr();

    let w13 = config.w13()?;
    let w23 = config.w23()?;
    // cross term: -(g13 g32 / delta^2) W13 W23^dag s12 + h.c.
    let cross_half = (&(&w13 * &w23.adjoint()) * &atomic_transfer_op(layout, 1, 2)?)
        .scaled(config.g13 * config.g23.conj() / Complex::new(d2, T::zero()));
    let c2 = &(&(&s11.scaled_re(-g13n / d2) + &s22.scaled_re(-g23n / d2))
        + &s33.scaled_re((g13n + g23n) / d2))
        - &(&cross_half + &cross_half.adjoint());

    let ntot = total_number_op(layout)?;
    let i = Complex::new(T::zero(), T::one());
    let x13 = op_commutator(&w13, &ntot)?.scaled(i);
    let x23 = op_commutator(&w23, &ntot)?.scaled(i);
    let pref = config.nu / d;
    let half13 = (&x13 * &atomic_transfer_op(layout, 1, 3)?)
        .scaled(config.g13 / Complex::new(d, T::zero()));
    let half23 = (&x23 * &atomic_transfer_op(layout, 2, 3)?)
        .scaled(config.g23 / Complex::new(d, T::zero()));
    let z2 = (&(&half13 + &half13.adjoint()) + &(&half23 + &half23.adjoint()))
        .scaled_re(-pref);
    Ok((c2, z2))
}
