use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit counts differ: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("systems of more than {max} qubits are not supported (got {n})")]
    TooManyQubits { n: usize, max: usize },

    #[error("product phase is imaginary; operands are not members of a common stabilizer group")]
    NonRealPhase,

    #[error("probability {0} lies outside [0, 1]")]
    OutOfRange(f64),

    #[error("state vector is not normalized: |amplitudes|^2 sums to {norm}")]
    NotNormalized { norm: f64 },

    #[error("matrix is not a valid density operator: {reason}")]
    NotDensityMatrix { reason: String },

    #[error("operator is not a projector: max |M^2 - M| = {deviation:e}")]
    NotAProjector { deviation: f64 },

    #[error("operator is not Hermitian: max |M - M^H| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),

    #[error("strings {i} and {j} do not commute")]
    NonCommutingGenerators { i: usize, j: usize },

    #[error("generators are dependent: distinct subset products collide")]
    DependentGenerators,

    #[error("stabilizer list is not a group: {0}")]
    NotAGroup(String),

    #[error("drift schedule exhausted: round {round} requested but only {len} states listed")]
    ScheduleExhausted { round: usize, len: usize },

    #[error("all shifted witness terms are numerically zero; nothing to decompose")]
    EmptyDecomposition,

    #[error("qubit {qubit} would have to be measured in both {have} and {want} bases")]
    IncompatibleSupports { qubit: usize, have: char, want: char },

    #[error("observable has no factor list; local settings exist only for stabilizer products")]
    NoFactorList,

    #[error("invalid measurement set: {0}")]
    InvalidMeasurementSet(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("record does not match measurement set: {0}")]
    MismatchedSet(String),

    #[error("fidelity estimation needs a uniform stabilizer set, record came from {found}")]
    WrongProvenance { found: String },

    #[error("record holds no rounds; deviation from the separable bound is undefined")]
    EmptyRecord,

    #[error("setting id {setting} is not a member of the set (L = {len})")]
    UnknownSettingId { setting: usize, len: usize },

    #[error("outcome {0:?} is not binary (expected 0 or 1)")]
    NonBinaryOutcome(String),

    #[error("invalid Pauli letter {letter:?} at position {pos}")]
    BadPauliLetter { letter: char, pos: usize },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
