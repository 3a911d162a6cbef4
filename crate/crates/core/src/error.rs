use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty sample sequence")]
    EmptySamples,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis matrix is singular")]
    SingularBasis,

    #[error("physical projection is not injective on the enumerated lattice points")]
    NonInjectiveProjection,

    #[error("enumeration needs {needed} candidates, cap is {cap}")]
    EnumerationCap { needed: u128, cap: u128 },

    #[error("zero-volume region")]
    ZeroVolume,

    #[error("point {0:?} lies outside the declared region")]
    PointOutsideRegion(Vec<f64>),

    #[error("test function support is not covered by the point-set region")]
    UnderCovered,

    #[error("complex-valued test function passed to a real transform")]
    ComplexTestFunction,

    #[error("eigenfunction undefined at {0}")]
    EigenfunctionUndefined(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("covering precondition (A ∩ H)·C ⊇ required set fails for {missing} elements")]
    CoveringUnverified { missing: usize },

    #[error("transversal must have trivial H for this operation")]
    NontrivialH,

    #[error("rejection sampling exceeded {0} attempts")]
    RejectionCap(usize),

    #[error("truncation |k| <= {k_trunc} does not cover the support of the function")]
    TailBound { k_trunc: i64 },

    #[error("central frequency must be non-zero")]
    ZeroCentralFrequency,

    #[error("product condition <Λ_U, Λ_V> ⊂ Λ_Z fails: u = {u}, v = {v}, |(uv)*| = {conj_abs} > {c_z}")]
    ProductCondition { u: f64, v: f64, conj_abs: f64, c_z: f64 },

    #[error("point set has no return time in H near the sample (sample not in Y)")]
    NotInTransversal,

    #[error("{fraction} of Følner nodes left the cross section (limit 1%)")]
    FolnerExcluded { fraction: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
