//! Constructive generation: certificates for membership in the closure of
//! k-th powers, and derivations of I from any nonzero seed.

mod certificate;
mod witness;

pub use certificate::{aux_a, aux_b, aux_c, aux_d, certify, jordan_block, Certificate, CertificateJson};
pub use witness::{
    replay, simplicity_witness, Prior, ReplayOutcome, SimplicityWitness, WitnessJson, WitnessStep, WitnessStepJson,
};
