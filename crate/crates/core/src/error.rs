use thiserror::Error;

use crate::preserver::IdentityWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("extension of degree {needed} exceeds the tower limit {limit}")]
    TowerLimitExceeded { needed: u32, limit: u32 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("characteristic mismatch: {left} vs {right}")]
    CharacteristicMismatch { left: u32, right: u32 },

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not diagonalizable")]
    NotDiagonalizable,

    #[error("matrix is not {m}-potent")]
    NotPotent { m: u32 },

    #[error("parts {first} and {second} are not orthogonal")]
    NotOrthogonal { first: usize, second: usize },

    #[error("enumeration needs {needed} candidates, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("seed matrix is zero")]
    ZeroSeed,

    #[error("auxiliary matrix has an unexpected Jordan structure: {0}")]
    NotDiagonalizableAuxiliary(String),

    #[error("map violates the mixed Jordan-power identity")]
    NotPreserver { witness: Box<IdentityWitness> },

    #[error("no Frobenius exponent reproduces the scalar action on the degree-{degree} probe")]
    UnrepresentableOmega { degree: u32 },

    #[error("degenerate oracle: {condition}")]
    DegenerateOracle { condition: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
