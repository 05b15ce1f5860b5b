use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix of dimension {dim} is not 2^n for any qubit count")]
    NotQubitDimension { dim: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("site {site} assigned more than once")]
    DuplicateSite { site: usize },

    #[error("charged operators overlap on site {site}; they must act on disjoint sites")]
    OverlappingSupport { site: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is rank deficient (min eigenvalue {min_eigenvalue:e} <= {threshold:e})")]
    RankDeficient { min_eigenvalue: f64, threshold: f64 },

    #[error("operator is not unitary (max |U U^dag - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("trace is {trace}, expected 1")]
    NotNormalized { trace: f64 },

    #[error("invalid parameter {name} = {value}: requires {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("Kraus operators are not complete (max |sum K^dag K - I| = {defect:e})")]
    IncompleteKraus { defect: f64 },

    #[error("sector projector does not commute with the Hamiltonian (defect {defect:e})")]
    NonCommutingProjector { defect: f64 },

    #[error("charge sector is empty")]
    EmptySector,

    #[error("partition function underflow at beta = {beta}")]
    PartitionUnderflow { beta: f64 },

    #[error("charged operator couples different ensemble states (max off-diagonal {defect:e})")]
    NotBlockDiagonal { defect: f64 },

    #[error("ensemble states are not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },

    #[error("imaginary residue {residue:e} in a correlator that must be real")]
    ImaginaryResidue { residue: f64 },

    #[error("instance too large: {what} = {value} exceeds {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),
}
