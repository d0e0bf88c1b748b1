//! Lab-frame and rotating-frame Hamiltonians of the Raman lambda scheme,
//! the dressed decoupled blocks, and the effective two-level parameters.
//!
//! Working units: everything is divided by hbar (angular-frequency units).
//! The dimensionless default has delta = 1 and uses tau = delta * t as the
//! time variable.

use crate::error::{RamanError, Result};
use crate::hilbert::{
    atomic_transfer_op, plane_wave_op, total_number_op, OperatorMatrix, SpaceLayout,
};
use nalgebra::Normed;

use crate::{rc, Complex, Real};

/// Lambda threshold above which the perturbative regime is flagged.
pub const LAMBDA_WARN: f64 = 0.2;

/// All physical parameters of the scheme.
///
/// Laser frequencies are not free inputs: they are derived from the
/// equal-detuning condition, `omega13 = omega3 - omega1 - delta` and
/// `omega23 = omega3 - omega2 - delta`.
#[derive(Clone, Debug)]
pub struct RamanConfig<T: Real> {
    pub layout: SpaceLayout,
    /// Atomic angular frequencies (omega_1, omega_2, omega_3).
    pub omega: [T; 3],
    /// Trap frequency.
    pub nu: T,
    /// Detuning.
    pub delta: T,
    /// Complex coupling strength of the 1-3 laser (phase included).
    pub g13: Complex<T>,
    /// Complex coupling strength of the 2-3 laser.
    pub g23: Complex<T>,
    /// Per-axis Lamb-Dicke projections of k_13.
    pub eta13: Vec<T>,
    /// Per-axis Lamb-Dicke projections of k_23.
    pub eta23: Vec<T>,
}

/// Validation summary: dimensionless ratios and regime warnings.
#[derive(Clone, Debug)]
pub struct ValidationReport<T: Real> {
    pub lambda: T,
    pub kappa: T,
    pub kappa13: Complex<T>,
    pub kappa23: Complex<T>,
    pub warnings: Vec<String>,
    /// All couplings and the trap frequency vanish.
    pub trivial: bool,
}

/// Effective two-level parameters after eliminating level 3.
#[derive(Clone, Debug)]
pub struct EffectiveParams<T: Real> {
    /// omega_2 - omega_1.
    pub omega12: T,
    /// Per-axis projections of k_13 - k_23.
    pub k12_eta: Vec<T>,
    /// g13 * conj(g23) / delta.
    pub g12: Complex<T>,
    /// Second-order level shifts.
    pub stark1: T,
    pub stark2: T,
    pub stark3: T,
}

/// The three pieces of the dimensionless rotating-frame Hamiltonian,
/// `H = H0 + HB + Hud`, together with the dimensionless ratios.
#[derive(Clone, Debug)]
pub struct RotatingParts<T: Real> {
    pub h0: OperatorMatrix<T>,
    pub hb: OperatorMatrix<T>,
    pub hud: OperatorMatrix<T>,
    pub lambda: T,
    pub kappa: T,
    pub kappa13: Complex<T>,
    pub kappa23: Complex<T>,
}

impl<T: Real> RotatingParts<T> {
    /// `H0 + HB + Hud`.
    pub fn total(&self) -> OperatorMatrix<T> {
        &(&self.h0 + &self.hb) + &self.hud
    }
}

impl<T: Real> RamanConfig<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        layout: SpaceLayout,
        omega: [T; 3],
        nu: T,
        delta: T,
        g13: Complex<T>,
        g23: Complex<T>,
        eta13: Vec<T>,
        eta23: Vec<T>,
    ) -> Result<Self> {
        let axes = layout.axes();
        for etas in [&eta13, &eta23] {
            if etas.len() != axes {
                return Err(RamanError::AxisCountMismatch {
                    expected: axes,
                    got: etas.len(),
                });
            }
            if etas.iter().any(|e| !e.is_finite()) {
                return Err(RamanError::NonFinite("lamb_dicke"));
            }
        }
        let finite = omega.iter().all(|w| w.is_finite())
            && nu.is_finite()
            && delta.is_finite()
            && g13.re.is_finite()
            && g13.im.is_finite()
            && g23.re.is_finite()
            && g23.im.is_finite();
        if !finite {
            return Err(RamanError::NonFinite("config"));
        }
        Ok(RamanConfig {
            layout,
            omega,
            nu,
            delta,
            g13,
            g23,
            eta13,
            eta23,
        })
    }

    /// The default desk-scale scenario: one axis, cutoff 8, delta = 1,
    /// nu = 0.05, g13 = g23 = 0.05, eta13 = 0.1, eta23 = -0.1.
    pub fn default_scenario() -> Self {
        let layout = SpaceLayout::new(&[8]).expect("default layout");
        RamanConfig {
            layout,
            omega: [T::zero(), rc(0.3), rc(2.0)],
            nu: rc(0.05),
            delta: T::one(),
            g13: Complex::new(rc(0.05), T::zero()),
            g23: Complex::new(rc(0.05), T::zero()),
            eta13: vec![rc(0.1)],
            eta23: vec![rc(-0.1)],
        }
    }

    /// Derived laser frequency of the 1-3 transition.
    pub fn omega13(&self) -> T {
        self.omega[2] - self.omega[0] - self.delta
    }

    /// Derived laser frequency of the 2-3 transition.
    pub fn omega23(&self) -> T {
        self.omega[2] - self.omega[1] - self.delta
    }

    /// `g = max(nu, |g13|, |g23|)`.
    pub fn coupling_scale(&self) -> T {
        self.nu.abs().max(self.g13.norm()).max(self.g23.norm())
    }

    /// Perturbative parameter `lambda = g / |delta|`.
    pub fn lambda(&self) -> T {
        self.coupling_scale() / self.delta.abs()
    }

    /// Scale (nu, g13, g23) jointly so that `lambda()` becomes `target`,
    /// holding delta and the Lamb-Dicke projections fixed.
    pub fn with_lambda(&self, target: T) -> Result<Self> {
        let current = self.lambda();
        if current == T::zero() {
            return Err(RamanError::Scenario(
                "cannot rescale a config with zero couplings".into(),
            ));
        }
        let f = target / current;
        let fc = Complex::new(f, T::zero());
        let mut out = self.clone();
        out.nu *= f;
        out.g13 *= fc;
        out.g23 *= fc;
        Ok(out)
    }

    /// Deterministic parameter digest for report metadata.
    pub fn fingerprint(&self) -> String {
        let d = |x: T| x.to_f64().unwrap_or(f64::NAN);
        format!(
            "cutoffs={:?};omega=[{:e},{:e},{:e}];nu={:e};delta={:e};g13=({:e},{:e});g23=({:e},{:e});eta13={:?};eta23={:?}",
            self.layout.cutoffs(),
            d(self.omega[0]),
            d(self.omega[1]),
            d(self.omega[2]),
            d(self.nu),
            d(self.delta),
            d(self.g13.re),
            d(self.g13.im),
            d(self.g23.re),
            d(self.g23.im),
            self.eta13.iter().map(|&e| d(e)).collect::<Vec<_>>(),
            self.eta23.iter().map(|&e| d(e)).collect::<Vec<_>>(),
        )
    }

    fn require_detuning(&self) -> Result<()> {
        if self.delta == T::zero() {
            Err(RamanError::ZeroDetuning)
        } else {
            Ok(())
        }
    }

    /// Report lambda, kappa, kappa_j3; delta = 0 is fatal, lambda >= 0.2 a
    /// warning.
    pub fn validate(&self) -> Result<ValidationReport<T>> {
        self.require_detuning()?;
        let g = self.coupling_scale();
        let trivial = g == T::zero();
        let (kappa, kappa13, kappa23) = if trivial {
            (T::zero(), Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
        } else {
            let gc = Complex::new(g, T::zero());
            (self.nu / g, self.g13 / gc, self.g23 / gc)
        };
        let lambda = self.lambda();
        let mut warnings = Vec::new();
        if trivial {
            warnings.push("trivial decomposition: all couplings and the trap frequency are zero".into());
        }
        if lambda >= rc(LAMBDA_WARN) {
            warnings.push(format!(
                "lambda = {:.3} >= {}: perturbative regime questionable",
                lambda.to_f64().unwrap_or(f64::NAN),
                LAMBDA_WARN
            ));
        }
        Ok(ValidationReport {
            lambda,
            kappa,
            kappa13,
            kappa23,
            warnings,
            trivial,
        })
    }

    pub(crate) fn w13(&self) -> Result<OperatorMatrix<T>> {
        plane_wave_op(&self.layout, &self.eta13, 1)
    }

    pub(crate) fn w23(&self) -> Result<OperatorMatrix<T>> {
        plane_wave_op(&self.layout, &self.eta23, 1)
    }

    /// Plane-wave factor of the effective laser, `exp(-i k12 . r)` with
    /// `k12 = k13 - k23`.
    pub(crate) fn w12(&self) -> Result<OperatorMatrix<T>> {
        let eta12: Vec<T> = self
            .eta13
            .iter()
            .zip(&self.eta23)
            .map(|(&a, &b)| a - b)
            .collect();
        plane_wave_op(&self.layout, &eta12, 1)
    }
}

fn herm_pair<T: Real>(half: &OperatorMatrix<T>) -> OperatorMatrix<T> {
    half + &half.adjoint()
}

/// Lab-frame Hamiltonian with the time-independent pieces precomputed, for
/// repeated evaluation on a time grid.
pub struct LabHamiltonian<T: Real> {
    static_part: OperatorMatrix<T>,
    coupling13: OperatorMatrix<T>,
    coupling23: OperatorMatrix<T>,
    omega13: T,
    omega23: T,
}

impl<T: Real> LabHamiltonian<T> {
    pub fn new(config: &RamanConfig<T>) -> Result<Self> {
        let layout = &config.layout;
        let mut static_part = total_number_op(layout)?.scaled_re(config.nu);
        for (l, &w) in config.omega.iter().enumerate() {
            static_part = &static_part + &atomic_transfer_op(layout, l + 1, l + 1)?.scaled_re(w);
        }
        let coupling13 =
            (&config.w13()? * &atomic_transfer_op(layout, 1, 3)?).scaled(config.g13);
        let coupling23 =
            (&config.w23()? * &atomic_transfer_op(layout, 2, 3)?).scaled(config.g23);
        Ok(LabHamiltonian {
            static_part,
            coupling13,
            coupling23,
            omega13: config.omega13(),
            omega23: config.omega23(),
        })
    }

    /// `H_Lambda(t) / hbar`.
    pub fn at(&self, t: T) -> OperatorMatrix<T> {
        let p13 = crate::linalg::phase(self.omega13 * t);
        let p23 = crate::linalg::phase(self.omega23 * t);
        let drive = &herm_pair(&self.coupling13.scaled(p13))
            + &herm_pair(&self.coupling23.scaled(p23));
        &self.static_part + &drive
    }
}

/// `H_Lambda(t) / hbar`: atomic energies + trap + the two driven couplings.
pub fn build_lab_hamiltonian<T: Real>(config: &RamanConfig<T>, t: T) -> Result<OperatorMatrix<T>> {
    Ok(LabHamiltonian::new(config)?.at(t))
}

/// Rotation generator `A = omega1 s11 + omega2 s22 + (omega3 - delta) s33`.
pub fn build_rotation_generator<T: Real>(config: &RamanConfig<T>) -> Result<OperatorMatrix<T>> {
    let layout = &config.layout;
    let coeffs = [
        config.omega[0],
        config.omega[1],
        config.omega[2] - config.delta,
    ];
    let mut a = OperatorMatrix::zeros(layout);
    for (l, &w) in coeffs.iter().enumerate() {
        a = &a + &atomic_transfer_op(layout, l + 1, l + 1)?.scaled_re(w);
    }
    Ok(a)
}

/// The dimensionless rotating-frame pieces `H0 = s33`,
/// `HB = (nu/delta) sum a^dag a`, and the block-off-diagonal coupling `Hud`.
pub fn build_rotating_parts<T: Real>(config: &RamanConfig<T>) -> Result<RotatingParts<T>> {
    config.require_detuning()?;
    let layout = &config.layout;
    let report = config.validate()?;
    let dc = Complex::new(config.delta, T::zero());
    let h0 = atomic_transfer_op(layout, 3, 3)?;
    let hb = total_number_op(layout)?.scaled_re(config.nu / config.delta);
    let hud = &herm_pair(
        &(&config.w13()? * &atomic_transfer_op(layout, 1, 3)?).scaled(config.g13 / dc),
    ) + &herm_pair(
        &(&config.w23()? * &atomic_transfer_op(layout, 2, 3)?).scaled(config.g23 / dc),
    );
    Ok(RotatingParts {
        h0,
        hb,
        hud,
        lambda: report.lambda,
        kappa: report.kappa,
        kappa13: report.kappa13,
        kappa23: report.kappa23,
    })
}

/// Effective two-level parameters of the dressed dynamics.
pub fn derive_effective_params<T: Real>(config: &RamanConfig<T>) -> Result<EffectiveParams<T>> {
    config.require_detuning()?;
    let d = config.delta;
    let dc = Complex::new(d, T::zero());
    let stark1 = -config.g13.norm_sqr() / d;
    let stark2 = -config.g23.norm_sqr() / d;
    let stark3 = (config.g13.norm_sqr() + config.g23.norm_sqr()) / d;
    Ok(EffectiveParams {
        omega12: config.omega[1] - config.omega[0],
        k12_eta: config
            .eta13
            .iter()
            .zip(&config.eta23)
            .map(|(&a, &b)| a - b)
            .collect(),
        g12: config.g13 * config.g23.conj() / dc,
        stark1,
        stark2,
        stark3,
    })
}

/// The two decoupled dressed blocks (frequency units): the two-level block
/// supported on the range of P_g and the level-3 block on the range of P_e.
/// Their sum equals `delta * (H0 + lC1 + l^2 C2)`.
///
/// The sign of the effective coupling term is fixed by that identity:
/// the coupling enters as `-(g12 W12 s12 + h.c.)`.
pub fn build_dressed_blocks<T: Real>(
    config: &RamanConfig<T>,
) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
    let layout = &config.layout;
    let eff = derive_effective_params(config)?;
    let ntot = total_number_op(layout)?;
    let s11 = atomic_transfer_op(layout, 1, 1)?;
    let s22 = atomic_transfer_op(layout, 2, 2)?;
    let s33 = atomic_transfer_op(layout, 3, 3)?;

    let pg_atomic = &s11 + &s22;
    let coupling = herm_pair(&(&config.w12()? * &atomic_transfer_op(layout, 1, 2)?).scaled(-eff.g12));
    let h12 = &(&(&(&ntot * &pg_atomic).scaled_re(config.nu) + &s11.scaled_re(eff.stark1))
        + &s22.scaled_re(eff.stark2))
        + &coupling;
    let h3 = &(&ntot * &s33).scaled_re(config.nu) + &s33.scaled_re(config.delta + eff.stark3);
    Ok((h12, h3))
}

/// Effective lab-frame Hamiltonians `(H_e^(12)(t), H_e^(3))` in frequency
/// units. `R(t) T_e(delta t)` solves the Schroedinger equation generated by
/// their sum.
pub fn build_effective_lab_hamiltonians<T: Real>(
    config: &RamanConfig<T>,
    t: T,
) -> Result<(OperatorMatrix<T>, OperatorMatrix<T>)> {
    let layout = &config.layout;
    let eff = derive_effective_params(config)?;
    let ntot = total_number_op(layout)?;
    let s11 = atomic_transfer_op(layout, 1, 1)?;
    let s22 = atomic_transfer_op(layout, 2, 2)?;
    let s33 = atomic_transfer_op(layout, 3, 3)?;

    let ph = crate::linalg::phase(eff.omega12 * t);
    let coupling = herm_pair(
        &(&config.w12()? * &atomic_transfer_op(layout, 1, 2)?).scaled(-eff.g12 * ph),
    );
    let he12 = &(&(&(&ntot * &(&s11 + &s22)).scaled_re(config.nu)
        + &s11.scaled_re(config.omega[0] + eff.stark1))
        + &s22.scaled_re(config.omega[1] + eff.stark2))
        + &coupling;
    let he3 = &(&ntot * &s33).scaled_re(config.nu)
        + &s33.scaled_re(config.omega[2] + eff.stark3);
    Ok((he12, he3))
}
