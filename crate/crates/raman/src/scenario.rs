//! JSON scenario files: the on-disk description of a run, and its
//! conversion into a validated configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{RamanError, Result};
use crate::hamiltonian::RamanConfig;
use crate::hilbert::SpaceLayout;
use crate::Complex;

/// Env var overriding the Hilbert-space dimension safety cap.
pub const DIM_CAP_ENV: &str = "RAMAN_DIM_CAP";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub nu: f64,
    /// Per-axis Fock cutoffs.
    pub axes: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub mag: f64,
    #[serde(default)]
    pub phase: f64,
}

impl CouplingSpec {
    pub fn as_complex(&self) -> Complex<f64> {
        Complex::from_polar(self.mag, self.phase)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub delta: f64,
    pub g13: CouplingSpec,
    pub g23: CouplingSpec,
    pub eta13: Vec<f64>,
    pub eta23: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub level: usize,
    /// Per-axis Fock occupations; empty means all zeros.
    #[serde(default)]
    pub occupations: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub tau_max: f64,
    pub tau_points: usize,
    pub order: usize,
    pub initial: InitialSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// "csv" is the only series format.
    pub format: String,
    /// Default output directory, overridable by --out.
    pub path: String,
}

/// Top-level scenario document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub trap: TrapSection,
    pub atom: AtomSection,
    pub lasers: LaserSection,
    pub run: RunSection,
    pub output: OutputSection,
}

fn finite(name: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(RamanError::NonFinite(name))
    }
}

impl ScenarioFile {
    pub fn from_str(text: &str) -> Result<Self> {
        let s: ScenarioFile =
            serde_json::from_str(text).map_err(|e| RamanError::Scenario(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RamanError::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    fn check(&self) -> Result<()> {
        finite(
            "trap/atom",
            &[self.trap.nu, self.atom.omega1, self.atom.omega2, self.atom.omega3],
        )?;
        finite(
            "lasers",
            &[
                self.lasers.delta,
                self.lasers.g13.mag,
                self.lasers.g13.phase,
                self.lasers.g23.mag,
                self.lasers.g23.phase,
            ],
        )?;
        finite("eta13", &self.lasers.eta13)?;
        finite("eta23", &self.lasers.eta23)?;
        finite("run", &[self.run.tau_max])?;
        let axes = self.trap.axes.len();
        for etas in [&self.lasers.eta13, &self.lasers.eta23] {
            if etas.len() != axes {
                return Err(RamanError::AxisCountMismatch {
                    expected: axes,
                    got: etas.len(),
                });
            }
        }
        if !self.run.initial.occupations.is_empty() && self.run.initial.occupations.len() != axes {
            return Err(RamanError::AxisCountMismatch {
                expected: axes,
                got: self.run.initial.occupations.len(),
            });
        }
        if self.run.tau_points < 2 {
            return Err(RamanError::Scenario("run.tau_points must be >= 2".into()));
        }
        if !(self.run.tau_max > 0.0) {
            return Err(RamanError::Scenario("run.tau_max must be positive".into()));
        }
        if self.output.format != "csv" {
            return Err(RamanError::Scenario(format!(
                "unsupported output.format {:?} (expected \"csv\")",
                self.output.format
            )));
        }
        Ok(())
    }

    /// Dimension cap from the environment, if set and parseable.
    pub fn dim_cap_override() -> Option<usize> {
        std::env::var(DIM_CAP_ENV).ok().and_then(|v| v.parse().ok())
    }

    /// Builds the layout (honoring the env cap override) and the config.
    pub fn to_config(&self) -> Result<RamanConfig<f64>> {
        let layout = match Self::dim_cap_override() {
            Some(cap) => SpaceLayout::with_cap(&self.trap.axes, cap)?,
            None => SpaceLayout::new(&self.trap.axes)?,
        };
        RamanConfig::new(
            layout,
            [self.atom.omega1, self.atom.omega2, self.atom.omega3],
            self.trap.nu,
            self.lasers.delta,
            self.lasers.g13.as_complex(),
            self.lasers.g23.as_complex(),
            self.lasers.eta13.clone(),
            self.lasers.eta23.clone(),
        )
    }

    /// Uniform tau grid `[0, tau_max]` with `tau_points` samples.
    pub fn tau_grid(&self) -> Vec<f64> {
        let n = self.run.tau_points;
        (0..n)
            .map(|i| self.run.tau_max * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn initial_state(&self) -> crate::analysis::InitialState<f64> {
        crate::analysis::InitialState::Basis {
            level: self.run.initial.level,
            occupations: self.run.initial.occupations.clone(),
        }
    }

    /// The bundled default scenario document.
    pub fn default_document() -> Self {
        ScenarioFile {
            trap: TrapSection {
                nu: 0.05,
                axes: vec![8],
            },
            atom: AtomSection {
                omega1: 0.0,
                omega2: 0.3,
                omega3: 2.0,
            },
            lasers: LaserSection {
                delta: 1.0,
                g13: CouplingSpec {
                    mag: 0.05,
                    phase: 0.0,
                },
                g23: CouplingSpec {
                    mag: 0.05,
                    phase: 0.0,
                },
                eta13: vec![0.1],
                eta23: vec![-0.1],
            },
            run: RunSection {
                tau_max: 200.0,
                tau_points: 401,
                order: 2,
                initial: InitialSpec {
                    level: 1,
                    occupations: vec![0],
                },
            },
            output: OutputSection {
                format: "csv".into(),
                path: "out".into(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_document_roundtrip() {
        let doc = ScenarioFile::default_document();
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let back = ScenarioFile::from_str(&text).unwrap();
        let cfg = back.to_config().unwrap();
        assert_eq!(cfg.layout.cutoffs(), &[8]);
        assert!((cfg.lambda() - 0.05).abs() < 1e-15);
        let grid = back.tau_grid();
        assert_eq!(grid.len(), 401);
        assert!((grid[0]).abs() < 1e-15);
        assert!((grid[400] - 200.0).abs() < 1e-12);
    }

    #[test]
    fn default_matches_library_default() {
        let cfg = ScenarioFile::default_document().to_config().unwrap();
        let lib = RamanConfig::<f64>::default_scenario();
        assert_eq!(cfg.fingerprint(), lib.fingerprint());
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(matches!(
            ScenarioFile::from_str("{not json"),
            Err(RamanError::Scenario(_))
        ));

        let mut doc = ScenarioFile::default_document();
        doc.lasers.eta13 = vec![0.1, 0.2];
        let text = serde_json::to_string(&doc).unwrap();
        assert!(matches!(
            ScenarioFile::from_str(&text),
            Err(RamanError::AxisCountMismatch { .. })
        ));

        let mut doc = ScenarioFile::default_document();
        doc.output.format = "parquet".into();
        let text = serde_json::to_string(&doc).unwrap();
        assert!(ScenarioFile::from_str(&text).is_err());

        let mut doc = ScenarioFile::default_document();
        doc.trap.nu = f64::NAN;
        let text = serde_json::to_string(&doc).unwrap();
        assert!(matches!(
            ScenarioFile::from_str(&text),
            Err(RamanError::Scenario(_)) | Err(RamanError::NonFinite(_))
        ));
    }

    #[test]
    fn phase_is_applied() {
        let mut doc = ScenarioFile::default_document();
        doc.lasers.g13.phase = std::f64::consts::FRAC_PI_2;
        let cfg = doc.to_config().unwrap();
        assert!(cfg.g13.re.abs() < 1e-15);
        assert!((cfg.g13.im - 0.05).abs() < 1e-15);
    }
}
