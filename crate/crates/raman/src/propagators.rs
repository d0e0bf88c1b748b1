//! Evolution operators: the exact rotating-frame propagator, the lab-frame
//! propagator, the coarse-grained effective propagator, the fine corrections,
//! and a time-ordered RK4 reference integrator used as an independent oracle.
//!
//! Time is the dimensionless tau = delta * t wherever a generator is one of
//! the dimensionless rotating-frame operators; lab-frame interfaces accept
//! physical t.

use crate::error::{RamanError, Result};
use crate::hamiltonian::{build_rotation_generator, build_rotating_parts, RamanConfig};
use crate::hilbert::OperatorMatrix;
use crate::linalg::{self, HermitianExp};
use crate::perturbation::PerturbativeDecomposition;
use crate::{rc, Complex, Real};

pub use crate::linalg::expm_unitary;

/// `R(t) = exp(-i A t)`, diagonal, computed entrywise.
pub fn rotation_frame_op<T: Real>(config: &RamanConfig<T>, t: T) -> Result<OperatorMatrix<T>> {
    let a = build_rotation_generator(config)?;
    let mut r = OperatorMatrix::zeros(&config.layout);
    for i in 0..r.dim() {
        r.mat[(i, i)] = linalg::phase(-a.mat[(i, i)].re * t);
    }
    Ok(r)
}

/// `T(tau) = exp(-i (H0 + HB + Hud) tau)`.
pub fn exact_rotating_propagator<T: Real>(
    config: &RamanConfig<T>,
    tau: T,
) -> Result<OperatorMatrix<T>> {
    let parts = build_rotating_parts(config)?;
    expm_unitary(&parts.total(), tau)
}

/// `T_Lambda(t) = R(t) T(delta t)`.
pub fn lab_propagator<T: Real>(config: &RamanConfig<T>, t: T) -> Result<OperatorMatrix<T>> {
    let r = rotation_frame_op(config, t)?;
    let trot = exact_rotating_propagator(config, config.delta * t)?;
    Ok(&r * &trot)
}

/// `T_e(tau) = exp(-i (H0 + lC1 + l^2 C2) tau)`.
pub fn effective_propagator<T: Real>(
    decomp: &PerturbativeDecomposition<T>,
    tau: T,
) -> Result<OperatorMatrix<T>> {
    expm_unitary(&decomp.effective_generator()?, tau)
}

/// `Z_k(tau) = e^{+i (H0 + lC1) tau} Z_k e^{-i (H0 + lC1) tau}` for k = 1, 2.
pub fn rotated_generators<T: Real>(
    decomp: &PerturbativeDecomposition<T>,
    tau: T,
) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
    if decomp.order < 2 {
        return Err(RamanError::OrderTooLow(decomp.order));
    }
    let coarse = HermitianExp::new(&decomp.coarse_generator())?;
    Ok((
        coarse.conjugate(&decomp.scaled_z[0], -tau),
        coarse.conjugate(&decomp.scaled_z[1], -tau),
    ))
}

/// `T_f(tau) = exp(-i (Z1(tau) + Z2(tau))) exp(+i (Z1 + Z2))` (scaled Z's).
pub fn fine_propagator<T: Real>(
    decomp: &PerturbativeDecomposition<T>,
    tau: T,
) -> Result<OperatorMatrix<T>> {
    let (z1t, z2t) = rotated_generators(decomp, tau)?;
    let left = expm_unitary(&(&z1t + &z2t), T::one())?;
    let right = expm_unitary(&decomp.z_total()?, -T::one())?;
    Ok(&left * &right)
}

/// `T_f'(tau) = T_f(-tau)^dag`.
pub fn fine_propagator_prime<T: Real>(
    decomp: &PerturbativeDecomposition<T>,
    tau: T,
) -> Result<OperatorMatrix<T>> {
    Ok(fine_propagator(decomp, -tau)?.adjoint())
}

/// Linearized fine propagator
/// `1 - i D1 - i D2 - D1^2 / 2` with `D_k = Z_k(tau) - Z_k` (scaled).
/// Not exactly unitary; approximates `T_f` to third order.
pub fn linearized_fine_propagator<T: Real>(
    decomp: &PerturbativeDecomposition<T>,
    tau: T,
) -> Result<OperatorMatrix<T>> {
    let (z1t, z2t) = rotated_generators(decomp, tau)?;
    let d1 = &z1t - &decomp.scaled_z[0];
    let d2 = &z2t - &decomp.scaled_z[1];
    let minus_i = Complex::new(T::zero(), -T::one());
    let half = Complex::new(rc(0.5), T::zero());
    let lin = &(&OperatorMatrix::identity(&decomp.h0.layout)
        + &(&d1 + &d2).scaled(minus_i))
        - &(&d1 * &d1).scaled(half);
    Ok(lin)
}

/// The exactly unitary one-parameter sandwich
/// `e^{-i(Z1+Z2)} T_e(tau) e^{+i(Z1+Z2)}`.
pub fn second_order_group_propagator<T: Real>(
    decomp: &PerturbativeDecomposition<T>,
    tau: T,
) -> Result<OperatorMatrix<T>> {
    let dress = expm_unitary(&decomp.z_total()?, T::one())?;
    let te = effective_propagator(decomp, tau)?;
    Ok(&(&dress * &te) * &dress.adjoint())
}

/// RK4 solution of the matrix Schroedinger equation
/// `dU/dt = -i H(t) U`, `U(0) = Id`.
#[derive(Clone, Debug)]
pub struct ReferenceResult<T: Real> {
    pub u: OperatorMatrix<T>,
    /// `||U^dag U - Id||` max-norm after integration.
    pub unitarity_defect: T,
    /// Step count too small for the requested accuracy.
    pub flagged: bool,
}

/// Classic fixed-step RK4 time-ordered integrator; the independent oracle
/// for every propagator in this module.
pub fn reference_time_ordered_propagator<T: Real>(
    hamiltonian_at: impl Fn(T) -> OperatorMatrix<T>,
    t_final: T,
    steps: usize,
) -> Result<ReferenceResult<T>> {
    if steps < 1 {
        return Err(RamanError::NoSteps);
    }
    let h0 = hamiltonian_at(T::zero());
    let layout = h0.layout.clone();
    let dt = t_final / rc(steps as f64);
    let half = rc::<T>(0.5);
    let sixth = rc::<T>(1.0 / 6.0);
    let minus_i = Complex::new(T::zero(), -T::one());

    let mut u = OperatorMatrix::<T>::identity(&layout);
    for s in 0..steps {
        let t = dt * rc(s as f64);
        let h_a = if s == 0 { h0.clone() } else { hamiltonian_at(t) };
        let h_b = hamiltonian_at(t + dt * half);
        let h_c = hamiltonian_at(t + dt);
        let dtc = Complex::new(dt, T::zero());

        let k1 = (&h_a * &u).scaled(minus_i);
        let k2 = (&h_b * &(&u + &k1.scaled(dtc * Complex::new(half, T::zero())))).scaled(minus_i);
        let k3 = (&h_b * &(&u + &k2.scaled(dtc * Complex::new(half, T::zero())))).scaled(minus_i);
        let k4 = (&h_c * &(&u + &k3.scaled(dtc))).scaled(minus_i);
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scaled(Complex::new(rc(2.0), T::zero()));
        u = &u + &incr.scaled(dtc * Complex::new(sixth, T::zero()));
    }
    let defect = linalg::unitarity_defect(&u);
    Ok(ReferenceResult {
        u,
        unitarity_defect: defect,
        flagged: defect > rc(1e-4),
    })
}

/// All propagator families of one scenario, with the eigendecompositions
/// computed once and reused across the whole time grid.
pub struct PropagatorEngine<T: Real> {
    config: RamanConfig<T>,
    exact: HermitianExp<T>,
    effective: HermitianExp<T>,
    coarse: HermitianExp<T>,
    z1: OperatorMatrix<T>,
    z2: OperatorMatrix<T>,
    /// `e^{-i (Z1 + Z2)}`.
    dress: OperatorMatrix<T>,
}

impl<T: Real> PropagatorEngine<T> {
    pub fn new(config: &RamanConfig<T>, decomp: &PerturbativeDecomposition<T>) -> Result<Self> {
        if decomp.order < 2 {
            return Err(RamanError::OrderTooLow(decomp.order));
        }
        let parts = build_rotating_parts(config)?;
        let exact = HermitianExp::new(&parts.total())?;
        let effective = HermitianExp::new(&decomp.effective_generator()?)?;
        let coarse = HermitianExp::new(&decomp.coarse_generator())?;
        let dress = expm_unitary(&decomp.z_total()?, T::one())?;
        Ok(PropagatorEngine {
            config: config.clone(),
            exact,
            effective,
            coarse,
            z1: decomp.scaled_z[0].clone(),
            z2: decomp.scaled_z[1].clone(),
            dress,
        })
    }

    pub fn config(&self) -> &RamanConfig<T> {
        &self.config
    }

    pub fn exact_at(&self, tau: T) -> OperatorMatrix<T> {
        self.exact.at(tau)
    }

    pub fn effective_at(&self, tau: T) -> OperatorMatrix<T> {
        self.effective.at(tau)
    }

    pub fn rotated_z_at(&self, tau: T) -> (OperatorMatrix<T>, OperatorMatrix<T>) {
        (
            self.coarse.conjugate(&self.z1, -tau),
            self.coarse.conjugate(&self.z2, -tau),
        )
    }

    pub fn fine_at(&self, tau: T) -> Result<OperatorMatrix<T>> {
        let (z1t, z2t) = self.rotated_z_at(tau);
        let left = expm_unitary(&(&z1t + &z2t), T::one())?;
        Ok(&left * &self.dress.adjoint())
    }

    pub fn fine_prime_at(&self, tau: T) -> Result<OperatorMatrix<T>> {
        Ok(self.fine_at(-tau)?.adjoint())
    }

    pub fn linearized_fine_at(&self, tau: T) -> OperatorMatrix<T> {
        let (z1t, z2t) = self.rotated_z_at(tau);
        let d1 = &z1t - &self.z1;
        let d2 = &z2t - &self.z2;
        let minus_i = Complex::new(T::zero(), -T::one());
        let half = Complex::new(rc(0.5), T::zero());
        &(&OperatorMatrix::identity(&self.config.layout) + &(&d1 + &d2).scaled(minus_i))
            - &(&d1 * &d1).scaled(half)
    }

    pub fn group_at(&self, tau: T) -> OperatorMatrix<T> {
        &(&self.dress * &self.effective.at(tau)) * &self.dress.adjoint()
    }

    /// `T_e(tau) T_f(tau)` — the factored approximation to `T(tau)`.
    pub fn factored_at(&self, tau: T) -> Result<OperatorMatrix<T>> {
        Ok(&self.effective_at(tau) * &self.fine_at(tau)?)
    }

    pub fn rotation_at(&self, t: T) -> Result<OperatorMatrix<T>> {
        rotation_frame_op(&self.config, t)
    }

    pub fn lab_at(&self, t: T) -> Result<OperatorMatrix<T>> {
        Ok(&self.rotation_at(t)? * &self.exact_at(self.config.delta * t))
    }
}

/// Propagator families evaluated on a time grid.
pub struct PropagatorSet<T: Real> {
    pub tau_grid: Vec<T>,
    pub exact: Vec<OperatorMatrix<T>>,
    pub effective: Vec<OperatorMatrix<T>>,
    pub fine: Vec<OperatorMatrix<T>>,
    pub fine_prime: Vec<OperatorMatrix<T>>,
    pub rotation: Vec<OperatorMatrix<T>>,
    pub lab: Vec<OperatorMatrix<T>>,
}

impl<T: Real> PropagatorSet<T> {
    pub fn compute(
        config: &RamanConfig<T>,
        decomp: &PerturbativeDecomposition<T>,
        tau_grid: &[T],
    ) -> Result<Self> {
        if tau_grid.is_empty() {
            return Err(RamanError::EmptyGrid);
        }
        let engine = PropagatorEngine::new(config, decomp)?;
        let mut set = PropagatorSet {
            tau_grid: tau_grid.to_vec(),
            exact: Vec::with_capacity(tau_grid.len()),
            effective: Vec::with_capacity(tau_grid.len()),
            fine: Vec::with_capacity(tau_grid.len()),
            fine_prime: Vec::with_capacity(tau_grid.len()),
            rotation: Vec::with_capacity(tau_grid.len()),
            lab: Vec::with_capacity(tau_grid.len()),
        };
        for &tau in tau_grid {
            let t = tau / config.delta;
            set.exact.push(engine.exact_at(tau));
            set.effective.push(engine.effective_at(tau));
            set.fine.push(engine.fine_at(tau)?);
            set.fine_prime.push(engine.fine_prime_at(tau)?);
            set.rotation.push(engine.rotation_at(t)?);
            set.lab.push(engine.lab_at(t)?);
        }
        Ok(set)
    }
}
