pub mod error;
pub mod field;
pub mod generate;
pub mod matrix;
pub mod potent;
pub mod preserver;
pub mod suite;

pub use error::{Error, Result};
pub use field::{Closure, ClosureElement, FieldConfig};
pub use generate::{certify, replay, simplicity_witness, Certificate, SimplicityWitness};
pub use matrix::{ExactMatrix, JordanBlock, JordanDecomposition, MatrixJson, TowerEntry};
pub use potent::{enumerate_potents, orthogonal, PotentContext};
pub use preserver::{
    canonicalize, equivalent, verify_identity, IdentityWitness, MapOracle, OracleSpec, StructuredMap, VerificationReport,
};
pub use suite::{run_lemma_suite, LemmaReport, SuiteConfig};
