//! Observable-level diagnostics: factorization errors, coupling-strength
//! scaling fits, population time series, fidelities, spectral peaks, and
//! truncation leakage. Reports are plain `f64` so they serialize verbatim.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{RamanError, Result};
use crate::hamiltonian::RamanConfig;
use crate::hilbert::SpaceLayout;
use crate::linalg;
use crate::perturbation::{decompose, PerturbativeDecomposition};
use crate::propagators::PropagatorEngine;
use crate::{rc, Complex, Real};

/// Which evolution family drives a time series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorKind {
    Exact,
    Effective,
    Factored,
}

/// Initial condition: either a basis ket or an explicit amplitude vector.
#[derive(Clone, Debug)]
pub enum InitialState<T: Real> {
    Basis { level: usize, occupations: Vec<usize> },
    Vector(DVector<Complex<T>>),
}

impl<T: Real> InitialState<T> {
    pub fn ground() -> Self {
        InitialState::Basis {
            level: 1,
            occupations: Vec::new(),
        }
    }
}

/// Builds the normalized state vector; auto-normalizes with a warning if the
/// input vector is off unit norm. Empty occupation lists mean all zeros.
pub fn state_vector<T: Real>(
    layout: &SpaceLayout,
    initial: &InitialState<T>,
) -> Result<DVector<Complex<T>>> {
    match initial {
        InitialState::Basis { level, occupations } => {
            let occ = if occupations.is_empty() {
                vec![0; layout.axes()]
            } else {
                occupations.clone()
            };
            let idx = layout.basis_index(&occ, *level)?;
            let mut v = DVector::from_element(layout.dim(), Complex::new(T::zero(), T::zero()));
            v[idx] = Complex::new(T::one(), T::zero());
            Ok(v)
        }
        InitialState::Vector(v) => {
            if v.len() != layout.dim() {
                return Err(RamanError::LayoutMismatch);
            }
            let n = v.norm();
            if n <= T::default_epsilon().sqrt() {
                return Err(RamanError::NonFinite("initial state norm"));
            }
            if (n - T::one()).abs() > rc(1e-12) {
                log::warn!(
                    "initial state norm {} != 1, normalizing",
                    n.to_f64().unwrap_or(f64::NAN)
                );
            }
            Ok(v.unscale(n))
        }
    }
}

/// Per-level populations of a state: `P_l = sum_{n} |psi_{l,n}|^2`.
pub fn level_populations<T: Real>(layout: &SpaceLayout, psi: &DVector<Complex<T>>) -> [T; 3] {
    let mut p = [T::zero(); 3];
    for idx in 0..layout.dim() {
        let (_, level) = layout.decode(idx).expect("index in range");
        p[level - 1] += psi[idx].norm_sqr();
    }
    p
}

/// Run metadata attached to every report.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesMetadata {
    pub fingerprint: String,
    pub cutoffs: Vec<usize>,
    pub order: usize,
}

impl SeriesMetadata {
    pub fn new<T: Real>(config: &RamanConfig<T>, order: usize) -> Self {
        SeriesMetadata {
            fingerprint: config.fingerprint(),
            cutoffs: config.layout.cutoffs().to_vec(),
            order,
        }
    }
}

/// Named real channels over a shared tau grid.
#[derive(Clone, Debug, Serialize)]
pub struct TimeSeries {
    pub tau_grid: Vec<f64>,
    pub channels: Vec<(String, Vec<f64>)>,
    pub metadata: SeriesMetadata,
}

impl TimeSeries {
    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Least-squares power-law fit `error = a * lambda^p` done in log-log space.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Two-sigma half-width on the exponent.
    pub exponent_ci: f64,
    pub residuals: Vec<f64>,
}

fn fit_power_law(lambdas: &[f64], errors: &[f64]) -> Result<ScalingFit> {
    if lambdas.len() < 3 {
        return Err(RamanError::NotEnoughPoints {
            need: 3,
            got: lambdas.len(),
            what: "lambda values",
        });
    }
    let floor = 1e-300;
    if errors.iter().any(|&e| e <= floor) {
        return Err(RamanError::DegenerateFit);
    }
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-30 {
        return Err(RamanError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let dof = (xs.len().max(3) - 2) as f64;
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let stderr = (sse / dof / sxx).sqrt();
    Ok(ScalingFit {
        exponent: slope,
        intercept,
        exponent_ci: 2.0 * stderr,
        residuals,
    })
}

/// Spectral-norm discrepancies between the exact rotating-frame propagator
/// and each of its approximations.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub tau_grid: Vec<f64>,
    /// `||T - T_e T_f||` per tau.
    pub err_factored: Vec<f64>,
    /// `||T - T_f' T_e||` per tau.
    pub err_prime_factored: Vec<f64>,
    /// `||T - T_e||` per tau.
    pub err_effective: Vec<f64>,
    /// `||T - e^{-iZ} T_e e^{+iZ}||` per tau.
    pub err_group: Vec<f64>,
    /// `||T_f - linearized||` per tau.
    pub err_linearized: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub factored_by_lambda: Vec<f64>,
    pub prime_by_lambda: Vec<f64>,
    pub effective_by_lambda: Vec<f64>,
    pub fit_factored: Option<ScalingFit>,
    pub fit_prime: Option<ScalingFit>,
    pub fit_effective: Option<ScalingFit>,
    pub truncation_leakage: Option<f64>,
    pub metadata: SeriesMetadata,
}

impl ErrorReport {
    fn empty(meta: SeriesMetadata) -> Self {
        ErrorReport {
            tau_grid: Vec::new(),
            err_factored: Vec::new(),
            err_prime_factored: Vec::new(),
            err_effective: Vec::new(),
            err_group: Vec::new(),
            err_linearized: Vec::new(),
            lambda_values: Vec::new(),
            factored_by_lambda: Vec::new(),
            prime_by_lambda: Vec::new(),
            effective_by_lambda: Vec::new(),
            fit_factored: None,
            fit_prime: None,
            fit_effective: None,
            truncation_leakage: None,
            metadata: meta,
        }
    }
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}

/// Per-tau spectral-norm errors of every propagator family against the exact
/// rotating-frame evolution.
pub fn factorization_error<T: Real>(
    config: &RamanConfig<T>,
    decomp: &PerturbativeDecomposition<T>,
    tau_grid: &[T],
) -> Result<ErrorReport> {
    if tau_grid.is_empty() {
        return Err(RamanError::EmptyGrid);
    }
    let engine = PropagatorEngine::new(config, decomp)?;
    let mut report = ErrorReport::empty(SeriesMetadata::new(config, decomp.order));
    for &tau in tau_grid {
        let exact = engine.exact_at(tau);
        let te = engine.effective_at(tau);
        let tf = engine.fine_at(tau)?;
        let tfp = engine.fine_prime_at(tau)?;
        let lin = engine.linearized_fine_at(tau);
        report.tau_grid.push(f(tau));
        report
            .err_factored
            .push(f(linalg::op_distance(&exact, &(&te * &tf))));
        report
            .err_prime_factored
            .push(f(linalg::op_distance(&exact, &(&tfp * &te))));
        report.err_effective.push(f(linalg::op_distance(&exact, &te)));
        report
            .err_group
            .push(f(linalg::op_distance(&exact, &engine.group_at(tau))));
        report.err_linearized.push(f(linalg::op_distance(&tf, &lin)));
    }
    Ok(report)
}

/// Errors at a single probe time as a function of the perturbative strength,
/// with log-log power-law fits. The strength is swept by scaling nu, g13,
/// g23 jointly while eta and delta stay fixed.
pub fn lambda_scaling_study<T: Real>(
    base_config: &RamanConfig<T>,
    lambda_values: &[T],
    tau_probe: T,
) -> Result<ErrorReport> {
    if lambda_values.len() < 3 {
        return Err(RamanError::NotEnoughPoints {
            need: 3,
            got: lambda_values.len(),
            what: "lambda values",
        });
    }
    let mut report = ErrorReport::empty(SeriesMetadata::new(base_config, 2));
    report.tau_grid = vec![f(tau_probe)];
    for &lam in lambda_values {
        if f(lam) > 0.15 {
            log::warn!(
                "coupling ratio {} outside perturbative regime, fit may be unreliable",
                f(lam)
            );
        }
        let cfg = base_config.with_lambda(lam)?;
        let decomp = decompose(&cfg, 2)?;
        let engine = PropagatorEngine::new(&cfg, &decomp)?;
        let exact = engine.exact_at(tau_probe);
        let te = engine.effective_at(tau_probe);
        let tf = engine.fine_at(tau_probe)?;
        let tfp = engine.fine_prime_at(tau_probe)?;
        report.lambda_values.push(f(lam));
        report
            .factored_by_lambda
            .push(f(linalg::op_distance(&exact, &(&te * &tf))));
        report
            .prime_by_lambda
            .push(f(linalg::op_distance(&exact, &(&tfp * &te))));
        report
            .effective_by_lambda
            .push(f(linalg::op_distance(&exact, &te)));
    }
    report.fit_factored = Some(fit_power_law(
        &report.lambda_values,
        &report.factored_by_lambda,
    )?);
    report.fit_prime = Some(fit_power_law(&report.lambda_values, &report.prime_by_lambda)?);
    report.fit_effective = Some(fit_power_law(
        &report.lambda_values,
        &report.effective_by_lambda,
    )?);
    Ok(report)
}

/// Level populations along the evolution of `initial` under the chosen
/// propagator family.
pub fn population_timeseries<T: Real>(
    config: &RamanConfig<T>,
    decomp: &PerturbativeDecomposition<T>,
    initial: &InitialState<T>,
    tau_grid: &[T],
    which: PropagatorKind,
) -> Result<TimeSeries> {
    if tau_grid.is_empty() {
        return Err(RamanError::EmptyGrid);
    }
    let engine = PropagatorEngine::new(config, decomp)?;
    let psi0 = state_vector(&config.layout, initial)?;
    let mut p1 = Vec::with_capacity(tau_grid.len());
    let mut p2 = Vec::with_capacity(tau_grid.len());
    let mut p3 = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let u = match which {
            PropagatorKind::Exact => engine.exact_at(tau),
            PropagatorKind::Effective => engine.effective_at(tau),
            PropagatorKind::Factored => engine.factored_at(tau)?,
        };
        let psi = &u.mat * &psi0;
        let p = level_populations(&config.layout, &psi);
        p1.push(f(p[0]));
        p2.push(f(p[1]));
        p3.push(f(p[2]));
    }
    Ok(TimeSeries {
        tau_grid: tau_grid.iter().map(|&t| f(t)).collect(),
        channels: vec![
            ("P1".to_string(), p1),
            ("P2".to_string(), p2),
            ("P3".to_string(), p3),
        ],
        metadata: SeriesMetadata::new(config, decomp.order),
    })
}

/// Fidelities of the coarse-grained and factored evolutions against the
/// exact one, plus the exact level-3 population and its dominant oscillation
/// frequency. The grid must resolve oscillations at unit frequency
/// (spacing < pi/2).
pub fn coarse_vs_fine_report<T: Real>(
    config: &RamanConfig<T>,
    decomp: &PerturbativeDecomposition<T>,
    initial: &InitialState<T>,
    tau_grid: &[T],
) -> Result<TimeSeries> {
    if tau_grid.len() < 2 {
        return Err(RamanError::NotEnoughPoints {
            need: 2,
            got: tau_grid.len(),
            what: "grid points",
        });
    }
    let spacing = f(tau_grid[1]) - f(tau_grid[0]);
    if !(spacing > 0.0) || spacing >= std::f64::consts::FRAC_PI_2 {
        return Err(RamanError::GridTooCoarse(spacing));
    }
    let engine = PropagatorEngine::new(config, decomp)?;
    let psi0 = state_vector(&config.layout, initial)?;
    let mut fid_eff = Vec::with_capacity(tau_grid.len());
    let mut fid_fact = Vec::with_capacity(tau_grid.len());
    let mut p3 = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let psi_exact = &engine.exact_at(tau).mat * &psi0;
        let psi_eff = &engine.effective_at(tau).mat * &psi0;
        let psi_fact = &engine.factored_at(tau)?.mat * &psi0;
        fid_eff.push(f(psi_exact.dotc(&psi_eff).norm_sqr()));
        fid_fact.push(f(psi_exact.dotc(&psi_fact).norm_sqr()));
        p3.push(f(level_populations(&config.layout, &psi_exact)[2]));
    }
    let tau_f64: Vec<f64> = tau_grid.iter().map(|&t| f(t)).collect();
    let freq = dominant_frequency(&tau_f64, &p3)?;
    let mut series = TimeSeries {
        tau_grid: tau_f64,
        channels: vec![
            ("fid_eff".to_string(), fid_eff),
            ("fid_factored".to_string(), fid_fact),
            ("P3_exact".to_string(), p3),
            ("dominant_frequency".to_string(), Vec::new()),
        ],
        metadata: SeriesMetadata::new(config, decomp.order),
    };
    if let Some((_, v)) = series
        .channels
        .iter_mut()
        .find(|(n, _)| n == "dominant_frequency")
    {
        *v = vec![freq; series.tau_grid.len()];
    }
    Ok(series)
}

/// Dominant angular frequency of a real series on a uniform grid, from the
/// peak of a zero-padded discrete Fourier transform with parabolic
/// interpolation of the magnitude around the peak bin.
pub fn dominant_frequency(tau_grid: &[f64], series: &[f64]) -> Result<f64> {
    if tau_grid.len() < 4 || series.len() != tau_grid.len() {
        return Err(RamanError::NotEnoughPoints {
            need: 4,
            got: tau_grid.len(),
            what: "samples",
        });
    }
    let dt = tau_grid[1] - tau_grid[0];
    if !(dt > 0.0) {
        return Err(RamanError::GridTooCoarse(dt));
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mags: Vec<f64> = (0..padded / 2)
        .map(|k| {
            let w = -2.0 * std::f64::consts::PI * k as f64 / padded as f64;
            let (mut re, mut im) = (0.0_f64, 0.0_f64);
            for (j, &y) in series.iter().enumerate() {
                let (s, c) = (w * j as f64).sin_cos();
                re += (y - mean) * c;
                im += (y - mean) * s;
            }
            (re * re + im * im).sqrt()
        })
        .collect();
    let mut peak = 1;
    for k in 1..mags.len() {
        if mags[k] > mags[peak] {
            peak = k;
        }
    }
    let refine = if peak > 0 && peak + 1 < mags.len() {
        let (a, b, c) = (mags[peak - 1], mags[peak], mags[peak + 1]);
        let denom = a - 2.0 * b + c;
        if denom.abs() > 1e-300 {
            0.5 * (a - c) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(2.0 * std::f64::consts::PI * (peak as f64 + refine) / (padded as f64 * dt))
}

/// Max over the grid of the population found in the top `margin` occupation
/// numbers of any axis, under exact evolution from `initial`.
pub fn truncation_leakage<T: Real>(
    config: &RamanConfig<T>,
    initial: &InitialState<T>,
    tau_grid: &[T],
    margin: usize,
) -> Result<f64> {
    if tau_grid.is_empty() {
        return Err(RamanError::EmptyGrid);
    }
    let min_cutoff = config.layout.cutoffs().iter().copied().min().unwrap_or(0);
    if margin >= min_cutoff {
        return Err(RamanError::MarginTooLarge {
            margin,
            cutoff: min_cutoff,
        });
    }
    let decomp = decompose(config, 2)?;
    let engine = PropagatorEngine::new(config, &decomp)?;
    let psi0 = state_vector(&config.layout, initial)?;
    let mut worst = 0.0_f64;
    for &tau in tau_grid {
        let psi = &engine.exact_at(tau).mat * &psi0;
        let mut leaked = T::zero();
        for idx in 0..config.layout.dim() {
            let (occ, _) = config.layout.decode(idx).expect("index in range");
            let near_top = occ
                .iter()
                .zip(config.layout.cutoffs())
                .any(|(&n, &c)| n + margin >= c);
            if near_top {
                leaked += psi[idx].norm_sqr();
            }
        }
        worst = worst.max(f(leaked));
    }
    if worst > 1e-6 {
        log::warn!("truncation leakage {worst:.3e} exceeds 1e-6, cutoff likely insufficient");
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RamanConfig<f64> {
        RamanConfig::default_scenario()
    }

    fn grid(n: usize, max: f64) -> Vec<f64> {
        (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn state_vector_basis_and_normalization() {
        let c = cfg();
        let v: DVector<Complex<f64>> = state_vector(&c.layout, &InitialState::ground()).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        let idx = c.layout.basis_index(&[0], 1).unwrap();
        assert!((v[idx] - Complex::new(1.0, 0.0)).norm() < 1e-15);

        let raw = DVector::from_element(c.layout.dim(), Complex::new(2.0_f64, 0.0));
        let v = state_vector(&c.layout, &InitialState::Vector(raw)).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);

        let short = DVector::from_element(3, Complex::new(1.0, 0.0));
        assert!(matches!(
            state_vector(&c.layout, &InitialState::Vector(short)),
            Err(RamanError::LayoutMismatch)
        ));
    }

    #[test]
    fn populations_sum_to_one() {
        let c = cfg();
        let d = decompose(&c, 2).unwrap();
        for which in [
            PropagatorKind::Exact,
            PropagatorKind::Effective,
            PropagatorKind::Factored,
        ] {
            let ts = population_timeseries(
                &c,
                &d,
                &InitialState::ground(),
                &grid(40, 60.0),
                which,
            )
            .unwrap();
            let p1 = ts.channel("P1").unwrap();
            let p2 = ts.channel("P2").unwrap();
            let p3 = ts.channel("P3").unwrap();
            for i in 0..p1.len() {
                let s = p1[i] + p2[i] + p3[i];
                assert!((s - 1.0).abs() <= 1e-9, "sum {s}");
                for p in [p1[i], p2[i], p3[i]] {
                    assert!(p >= -1e-10 && p <= 1.0 + 1e-10);
                }
            }
        }
    }

    #[test]
    fn effective_evolution_keeps_level3_empty() {
        let c = cfg();
        let d = decompose(&c, 2).unwrap();
        let ts = population_timeseries(
            &c,
            &d,
            &InitialState::ground(),
            &grid(30, 120.0),
            PropagatorKind::Effective,
        )
        .unwrap();
        for &p in ts.channel("P3").unwrap() {
            assert!(p.abs() <= 1e-12, "P3 {p}");
        }
    }

    #[test]
    fn exact_level3_population_is_second_order_small() {
        let c = cfg();
        let lam = c.lambda();
        let d = decompose(&c, 2).unwrap();
        let ts = population_timeseries(
            &c,
            &d,
            &InitialState::ground(),
            &grid(400, 200.0),
            PropagatorKind::Exact,
        )
        .unwrap();
        let max_p3 = ts
            .channel("P3")
            .unwrap()
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        assert!(max_p3 > 0.0);
        assert!(max_p3 <= 5.0 * lam * lam, "max P3 {max_p3}, lambda {lam}");
    }

    #[test]
    fn free_case_populations_frozen() {
        let mut c = cfg();
        c.g13 = Complex::new(0.0, 0.0);
        c.g23 = Complex::new(0.0, 0.0);
        let d = decompose(&c, 2).unwrap();
        let ts = population_timeseries(
            &c,
            &d,
            &InitialState::Basis {
                level: 3,
                occupations: vec![0],
            },
            &grid(10, 40.0),
            PropagatorKind::Exact,
        )
        .unwrap();
        for &p in ts.channel("P3").unwrap() {
            assert!((p - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn factorization_error_free_case_vanishes() {
        let mut c = cfg();
        c.nu = 0.0;
        c.g13 = Complex::new(0.0, 0.0);
        c.g23 = Complex::new(0.0, 0.0);
        let d = decompose(&c, 2).unwrap();
        let r = factorization_error(&c, &d, &grid(6, 50.0)).unwrap();
        for v in [
            &r.err_factored,
            &r.err_prime_factored,
            &r.err_effective,
            &r.err_group,
            &r.err_linearized,
        ] {
            for &e in v.iter() {
                assert!(e <= 1e-11, "error {e}");
            }
        }
    }

    #[test]
    fn fine_factor_improves_on_bare_elimination() {
        let c = cfg();
        let d = decompose(&c, 2).unwrap();
        // tau = 15 sits mid-cycle between revivals of the detuning
        // oscillation; tau = 50 is within 0.3 rad of the 8th revival
        // (8 * 2pi = 50.27) where the bare-elimination error dips, so only
        // strict improvement is asserted there.
        let r = factorization_error(&c, &d, &[15.0, 50.0]).unwrap();
        assert!(r.err_effective[0] > 5.0 * r.err_factored[0]);
        assert!(r.err_effective[1] > r.err_factored[1]);
        // the two factorization orders agree within a modest factor
        for i in 0..2 {
            let ratio = r.err_factored[i] / r.err_prime_factored[i];
            assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "ratio {ratio}");
        }
        assert!(matches!(
            factorization_error(&c, &d, &[]),
            Err(RamanError::EmptyGrid)
        ));
    }

    #[test]
    fn scaling_study_cubic_and_linear_exponents() {
        let c = cfg();
        let r = lambda_scaling_study(&c, &[0.02, 0.04, 0.08], 50.0).unwrap();
        let cubic = r.fit_factored.as_ref().unwrap().exponent;
        assert!(cubic > 2.6 && cubic < 3.4, "cubic {cubic}");
        let cubic_p = r.fit_prime.as_ref().unwrap().exponent;
        assert!(cubic_p > 2.6 && cubic_p < 3.4, "cubic' {cubic_p}");
        // the linear fit for the bare effective propagator needs a probe
        // time away from the detuning revivals (multiples of 2pi), where
        // its leading first-order term is phase-suppressed
        let r = lambda_scaling_study(&c, &[0.02, 0.04, 0.08], 53.0).unwrap();
        let lin = r.fit_effective.as_ref().unwrap().exponent;
        assert!(lin > 0.7 && lin < 1.3, "linear {lin}");
    }

    #[test]
    fn scaling_study_needs_three_points() {
        let c = cfg();
        assert!(matches!(
            lambda_scaling_study(&c, &[0.02], 50.0),
            Err(RamanError::NotEnoughPoints { got: 1, .. })
        ));
        assert!(matches!(
            lambda_scaling_study(&c, &[0.02, 0.04], 50.0),
            Err(RamanError::NotEnoughPoints { got: 2, .. })
        ));
    }

    #[test]
    fn power_law_fit_recovers_exact_slope() {
        let lambdas = [0.02_f64, 0.04, 0.08, 0.16];
        let errors: Vec<f64> = lambdas.iter().map(|l| 7.0 * l.powi(3)).collect();
        let fit = fit_power_law(&lambdas, &errors).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 7.0_f64.ln()).abs() < 1e-12);
        assert!(fit.exponent_ci < 1e-10);
        assert!(matches!(
            fit_power_law(&lambdas, &[0.0; 4]),
            Err(RamanError::DegenerateFit)
        ));
    }

    #[test]
    fn dominant_frequency_of_pure_tone() {
        let n = 512;
        let dt = 0.3;
        let taus: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let omega = 1.0;
        let ys: Vec<f64> = taus.iter().map(|t| 0.2 + 0.05 * (omega * t).cos()).collect();
        let est = dominant_frequency(&taus, &ys).unwrap();
        assert!((est - omega).abs() / omega < 0.02, "est {est}");
    }

    #[test]
    fn coarse_vs_fine_channels() {
        let c = cfg();
        let d = decompose(&c, 2).unwrap();
        let taus = grid(300, 200.0);
        let ts = coarse_vs_fine_report(&c, &d, &InitialState::ground(), &taus).unwrap();
        let fe = ts.channel("fid_eff").unwrap();
        let ff = ts.channel("fid_factored").unwrap();
        // the factored family wins on average and never loses by more than
        // a third-order margin; exact pointwise dominance fails in small
        // neighborhoods of the detuning revivals where both errors dip
        let mean_fe: f64 = fe.iter().sum::<f64>() / fe.len() as f64;
        let mean_ff: f64 = ff.iter().sum::<f64>() / ff.len() as f64;
        assert!(mean_ff > mean_fe, "mean fe {mean_fe} ff {mean_ff}");
        for i in 0..fe.len() {
            assert!(ff[i] >= fe[i] - 1e-2, "tau {} fe {} ff {}", taus[i], fe[i], ff[i]);
            assert!(fe[i] <= 1.0 + 1e-10 && ff[i] <= 1.0 + 1e-10);
        }
        let freq = ts.channel("dominant_frequency").unwrap()[0];
        assert!((freq - 1.0).abs() < 0.1, "freq {freq}");

        let coarse = vec![0.0, 2.0, 4.0, 6.0];
        assert!(matches!(
            coarse_vs_fine_report(&c, &d, &InitialState::ground(), &coarse),
            Err(RamanError::GridTooCoarse(_))
        ));
    }

    #[test]
    fn coarse_vs_fine_trivial_when_free() {
        let mut c = cfg();
        c.nu = 0.0;
        c.g13 = Complex::new(0.0, 0.0);
        c.g23 = Complex::new(0.0, 0.0);
        let d = decompose(&c, 2).unwrap();
        let ts =
            coarse_vs_fine_report(&c, &d, &InitialState::ground(), &grid(64, 40.0)).unwrap();
        for name in ["fid_eff", "fid_factored"] {
            for &v in ts.channel(name).unwrap() {
                assert!((v - 1.0).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn leakage_cases() {
        let c = cfg();
        let taus = grid(20, 100.0);
        let leak = truncation_leakage(&c, &InitialState::ground(), &taus, 2).unwrap();
        assert!(leak < 1e-6, "leak {leak}");

        let mut free = c.clone();
        free.g13 = Complex::new(0.0, 0.0);
        free.g23 = Complex::new(0.0, 0.0);
        let leak0 = truncation_leakage(&free, &InitialState::ground(), &taus, 2).unwrap();
        assert!(leak0 <= 1e-15);

        // deliberately under-truncated: strong sidebands in a tiny space
        let hot = RamanConfig::new(
            crate::hilbert::SpaceLayout::new(&[4]).unwrap(),
            [0.0, 0.3, 2.0],
            0.05,
            1.0,
            Complex::new(0.05, 0.0),
            Complex::new(0.05, 0.0),
            vec![1.5],
            vec![-1.5],
        )
        .unwrap();
        let leak_hot = truncation_leakage(&hot, &InitialState::ground(), &taus, 2).unwrap();
        assert!(leak_hot > 1e-3, "hot leak {leak_hot}");

        assert!(matches!(
            truncation_leakage(&c, &InitialState::ground(), &taus, 8),
            Err(RamanError::MarginTooLarge { .. })
        ));
    }
}
