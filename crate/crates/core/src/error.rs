use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid under-resolved: {n_points} points requested, at least {min} required")]
    UnderResolved { n_points: usize, min: usize },

    #[error(
        "integrator instability at t = {t:.6}: norm grew by {growth:.3e} beyond the injected total"
    )]
    Instability { t: f64, growth: f64 },

    #[error("overlap undefined for a zero-norm wavefunction")]
    ZeroNorm,

    #[error("grids differ in length ({0} vs {1})")]
    GridMismatch(usize, usize),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("degenerate medium: optical depth is zero, the memory does not act as a splitter")]
    DegenerateMedium,

    #[error("phase undefined: amplitude `{0}` vanishes")]
    UndefinedPhase(&'static str),

    #[error("non-physical gain: singular value {0:.12} exceeds 1")]
    NonPhysicalGain(f64),

    #[error("unsupported scale: {0} particles (at most 3 supported)")]
    UnsupportedScale(usize),

    #[error("correlation undefined: reference coincidence probability vanishes")]
    UndefinedCorrelation,

    #[error("formula outside its validity domain: {0}")]
    OutOfValidity(String),

    #[error("envelope unobservable: |cos(phi_rt)| = {0:.3} is too small to invert")]
    Unobservable(f64),

    #[error("splitter is a total absorber: surviving norm {0:.3e} in run `{1}`")]
    TotalAbsorber(f64, &'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("probability {value:.3e} outside [0, 1] for {what}")]
    ProbabilityRange { what: String, value: f64 },
}
