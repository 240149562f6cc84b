use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),

    #[error("invalid model parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid flux {p}/{q}: {reason}")]
    InvalidFlux { p: i64, q: i64, reason: String },

    #[error("size {size} is incompatible with a periodic boundary (must be a multiple of {period})")]
    IncompatibleSize { size: usize, period: usize },

    #[error("operator is not Hermitian: max |A - A^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operation requires a {expected}D geometry, got {found}D")]
    WrongDimension { expected: usize, found: usize },

    #[error("box half-width {half_width} does not fit strictly inside the sample (half-width {sample_half_width})")]
    BoxExceedsSample { half_width: f64, sample_half_width: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("box half-widths must be positive and strictly increasing")]
    UnorderedBoxes,

    #[error("island indices {start}..{end} are out of range for a spectrum of size {len}")]
    IslandMismatch { start: usize, end: usize, len: usize },

    #[error("no spectral gap at the Fermi energy {fermi_energy}: {reason}")]
    NoGapAtFermiLevel { fermi_energy: f64, reason: String },

    #[error("band crossing at k = ({k1:.6}, {k2:.6}): gap {gap:e}")]
    BandCrossing { k1: f64, k2: f64, gap: f64 },

    #[error("Bloch Hamiltonian unavailable: {0}")]
    NotPeriodic(String),

    #[error("projector has rank 0")]
    EmptyProjector,

    #[error("invalid tolerance `{name}` = {value}")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("Wannier set is incomplete: completeness defect {defect:e}")]
    IncompleteBasis { defect: f64 },

    #[error("Kato-Nagy transport undefined: |P1 - P0| = {norm} >= 1")]
    TransportUndefined { norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("spectral gap closed at {context}")]
    GapClosed { context: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
