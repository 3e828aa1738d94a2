use thiserror::Error;

/// Errors raised by the lattice toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("gram matrix is not symmetric")]
    NotSymmetric,

    #[error("gram matrix is degenerate (determinant 0)")]
    Degenerate,

    #[error("lattice is not definite (signature {plus},{minus})")]
    Indefinite { plus: usize, minus: usize },

    #[error("lattices have different signs of definiteness")]
    SignMismatch,

    #[error("lattice is odd; an even lattice is required")]
    OddLattice,

    #[error("enumeration cap exceeded: {what} ({size} > {cap})")]
    CapExceeded { what: &'static str, size: String, cap: u64 },

    #[error("matrix is not an isometry of the lattice")]
    NotIsometry,

    #[error("map is not an anti-isometry of discriminant forms")]
    NotAntiIsometry,

    #[error("glue produces a non-integral overlattice")]
    NonIntegral,

    #[error("sublattice is not primitive")]
    NotPrimitive,

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),

    #[error("sublattice is not contained in the target lattice")]
    NotContained,

    #[error("group is not dihedral")]
    NotDihedral,

    #[error("kernel of 1-g has rank {0}, expected 1")]
    KernelRank(usize),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
