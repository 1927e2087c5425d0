use thiserror::Error;

use crate::models::{Model, SectorLabel};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown model identifier {0:?}")]
    UnknownModel(String),

    #[error("operator {op} is not defined for model {model}")]
    InvalidOperator { op: String, model: Model },

    #[error("sector {label} is not a sector of {model} with N = {n}")]
    NotInSectorList { model: Model, n: u32, label: SectorLabel },

    #[error("dense dimension {dim} exceeds the oracle guard of {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("non-finite matrix entry at position {0}")]
    NonFinite(usize),

    #[error("bisection for eigenvalue {index} did not converge; last bracket [{lo}, {hi}]")]
    NonConvergence { index: usize, lo: String, hi: String },

    #[error("inverse iteration lost orthogonality ({overlap:e}) in a cluster at eigenvalue {index}")]
    OrthogonalityLoss { index: usize, overlap: f64 },

    #[error("conserved-quantity expectation {value} is {distance:e} away from any quantized value")]
    LabelResolution { value: f64, distance: f64 },

    #[error("least-squares fit is rank deficient: {0}")]
    RankDeficient(String),

    #[error("missing eigenvectors for sector {0}")]
    MissingEigenvectors(SectorLabel),

    #[error("{0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
