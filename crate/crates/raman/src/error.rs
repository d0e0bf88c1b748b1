use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error)]
pub enum RamanError {
    #[error("layout must have at least one axis")]
    NoAxes,
    #[error("too many motional axes: {0} (at most 3 supported)")]
    TooManyAxes(usize),
    #[error("fock cutoff must be at least 2, got {0}")]
    CutoffTooSmall(usize),
    #[error("total dimension {dim} exceeds safety cap {cap} (set RAMAN_DIM_CAP to override)")]
    DimensionCap { dim: usize, cap: usize },
    #[error("occupation {occ} out of range for axis {axis} (cutoff {cutoff})")]
    OccupationOutOfRange {
        occ: usize,
        axis: usize,
        cutoff: usize,
    },
    #[error("atomic level {0} out of range (levels are 1..=3)")]
    LevelOutOfRange(usize),
    #[error("axis index {0} out of range")]
    AxisOutOfRange(usize),
    #[error("operator layout mismatch")]
    LayoutMismatch,
    #[error("basis index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("detuning must be nonzero")]
    ZeroDetuning,
    #[error("expected {expected} per-axis entries, got {got}")]
    AxisCountMismatch { expected: usize, got: usize },
    #[error("non-finite parameter: {0}")]
    NonFinite(&'static str),
    #[error("operator is not hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("perturbative order {0} outside the supported range 1..=6")]
    OrderOutOfRange(usize),
    #[error("decomposition of order >= 2 required, got {0}")]
    OrderTooLow(usize),
    #[error("unperturbed hamiltonian must be a projector (spectrum {{0,1}})")]
    BadUnperturbedSpectrum,
    #[error("need at least {need} {what}, got {got}")]
    NotEnoughPoints {
        need: usize,
        got: usize,
        what: &'static str,
    },
    #[error("empty time grid")]
    EmptyGrid,
    #[error("integration step count must be >= 1")]
    NoSteps,
    #[error("time grid spacing {0} too coarse to resolve the detuning frequency (need < pi/2)")]
    GridTooCoarse(f64),
    #[error("margin {margin} must be smaller than every cutoff (min cutoff {cutoff})")]
    MarginTooLarge { margin: usize, cutoff: usize },
    #[error("degenerate scaling fit: errors do not vary across lambda values")]
    DegenerateFit,
    #[error("scenario error: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, RamanError>;
