//! Maps satisfying phi(A^k o B) = phi(A)^k o phi(B): their two normal forms,
//! black-box oracles, identity checking and recovery of the normal form.

mod canonical;
pub(crate) mod lemmas;
mod oracle;
mod verify;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Closure, ClosureElement, ElementJson};
use crate::matrix::{ExactMatrix, MatrixJson};

pub use canonical::{canonicalize, canonicalize_with, CanonicalizeOptions};
pub use lemmas::{check_preserver_properties, S3_LEMMA_IDS};
pub use oracle::{EntryOp, MapOracle, MapSpec, OracleSpec};
pub use verify::{
    structured_probes, verify_identity, IdentityWitness, IdentityWitnessJson, ProbeSampler, VerificationReport,
    VerificationReportJson,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapForm {
    /// X -> value, with value^{k+1} = value.
    Constant { value: ExactMatrix },
    /// X -> eps T F_e(X) T^{-1}, or with F_e(X) transposed; F_e is the
    /// entrywise Frobenius x -> x^{p^e}.
    Canonical {
        epsilon: ClosureElement,
        t: ExactMatrix,
        t_inv: ExactMatrix,
        e: u64,
        transpose: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredMap {
    pub n: usize,
    pub k: u64,
    pub p: u32,
    pub form: MapForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum StructuredMapJson {
    Constant {
        n: usize,
        k: u64,
        p: u32,
        value: MatrixJson,
    },
    Canonical {
        n: usize,
        k: u64,
        p: u32,
        epsilon: ElementJson,
        #[serde(rename = "T")]
        t: MatrixJson,
        e: u64,
        transpose: bool,
    },
}

impl StructuredMap {
    pub fn constant(value: ExactMatrix, k: u64) -> Result<Self> {
        if value.pow(k + 1)? != value {
            return Err(Error::NotPotent { m: (k + 1) as u32 });
        }
        Ok(StructuredMap {
            n: value.n(),
            k,
            p: value.p(),
            form: MapForm::Constant { value },
        })
    }

    pub fn canonical(epsilon: ClosureElement, t: ExactMatrix, e: u64, transpose: bool, k: u64) -> Result<Self> {
        let f = t.field();
        if !f.pow(&epsilon, k).is_one() {
            return Err(Error::InvalidConfig(format!("epsilon {epsilon} is not a {k}-th root of unity")));
        }
        let t_inv = t.inverse()?;
        Ok(StructuredMap {
            n: t.n(),
            k,
            p: t.p(),
            form: MapForm::Canonical {
                epsilon,
                t,
                t_inv,
                e,
                transpose,
            },
        })
    }

    pub fn identity(field: &Closure, n: usize, k: u64) -> Self {
        Self::canonical(field.one(), ExactMatrix::identity(field, n), 0, false, k).expect("identity is canonical")
    }

    /// A canonical map with T over entries of degree <= `t_degree`,
    /// e in 0..=2, eps a random k-th root of unity and a random transpose flag.
    pub fn random_canonical<R: Rng + ?Sized>(
        field: &Closure,
        n: usize,
        k: u64,
        t_degree: u32,
        rng: &mut R,
    ) -> Result<Self> {
        let t = ExactMatrix::random_invertible(field, n, t_degree, rng)?;
        let roots = field.roots_of_unity(k)?;
        let epsilon = roots[rng.gen_range(0..roots.len())].clone();
        Self::canonical(epsilon, t, rng.gen_range(0..=2), rng.gen_bool(0.5), k)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.form, MapForm::Constant { .. })
    }

    pub fn apply(&self, x: &ExactMatrix) -> Result<ExactMatrix> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: x.n(),
            });
        }
        if x.p() != self.p {
            return Err(Error::CharacteristicMismatch {
                left: self.p,
                right: x.p(),
            });
        }
        match &self.form {
            MapForm::Constant { value } => Ok(value.clone()),
            MapForm::Canonical {
                epsilon,
                t,
                t_inv,
                e,
                transpose,
            } => {
                let mut y = x.frobenius(*e);
                if *transpose {
                    y = y.transpose();
                }
                y.conjugate(t, t_inv)?.scale(epsilon)
            }
        }
    }

    pub fn to_json(&self) -> StructuredMapJson {
        let (n, k, p) = (self.n, self.k, self.p);
        match &self.form {
            MapForm::Constant { value } => StructuredMapJson::Constant {
                n,
                k,
                p,
                value: value.to_json(),
            },
            MapForm::Canonical {
                epsilon,
                t,
                e,
                transpose,
                ..
            } => StructuredMapJson::Canonical {
                n,
                k,
                p,
                epsilon: t.field().element_to_json(epsilon),
                t: t.to_json(),
                e: *e,
                transpose: *transpose,
            },
        }
    }

    pub fn from_json(field: &Closure, j: &StructuredMapJson) -> Result<Self> {
        let map = match j {
            StructuredMapJson::Constant { k, value, .. } => Self::constant(ExactMatrix::from_json(field, value)?, *k)?,
            StructuredMapJson::Canonical {
                k,
                epsilon,
                t,
                e,
                transpose,
                ..
            } => Self::canonical(
                field.element_from_json(epsilon)?,
                ExactMatrix::from_json(field, t)?,
                *e,
                *transpose,
                *k,
            )?,
        };
        let (n, p) = match j {
            StructuredMapJson::Constant { n, p, .. } | StructuredMapJson::Canonical { n, p, .. } => (*n, *p),
        };
        if map.n != n || map.p != p {
            return Err(Error::Parse("header n/p disagree with the map's matrices".into()));
        }
        Ok(map)
    }
}

/// Extensional comparison on {E_ij}, {E_ii + g E_ij} for subfield generators
/// g of degree 1..=4, and `trials` seeded random matrices.
pub fn equivalent(m1: &StructuredMap, m2: &StructuredMap, field: &Closure, trials: usize) -> bool {
    if (m1.n, m1.k, m1.p) != (m2.n, m2.k, m2.p) || field.p() != m1.p {
        return false;
    }
    let probes = match structured_probes(field, m1.n, &canonical::probe_degrees(field), trials, 0xe0_1e5e) {
        Ok(p) => p,
        Err(_) => return false,
    };
    probes
        .iter()
        .all(|x| matches!((m1.apply(x), m2.apply(x)), (Ok(a), Ok(b)) if a == b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_examples() {
        let f = Closure::prime(3).unwrap();
        let id = StructuredMap::identity(&f, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = ExactMatrix::random(&f, 2, 2, &mut rng).unwrap();
        assert_eq!(id.apply(&x).unwrap(), x);

        let a = f.generator(2).unwrap();
        let frob = StructuredMap::canonical(f.one(), ExactMatrix::identity(&f, 2), 1, false, 2).unwrap();
        let y = frob.apply(&ExactMatrix::scalar(&f, 2, &a)).unwrap();
        assert_eq!(y.get(0, 0), &f.pow(&a, 3));
        assert_ne!(y.get(0, 0), &a);

        let tr = StructuredMap::canonical(f.one(), ExactMatrix::identity(&f, 2), 0, true, 2).unwrap();
        assert_eq!(tr.apply(&ExactMatrix::unit(&f, 2, 0, 1)).unwrap(), ExactMatrix::unit(&f, 2, 1, 0));
        assert!(matches!(
            tr.apply(&ExactMatrix::identity(&f, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructors_validate() {
        let f = Closure::prime(5).unwrap();
        assert!(StructuredMap::constant(ExactMatrix::identity(&f, 2).scale(&f.int(2)).unwrap(), 2).is_err());
        assert!(StructuredMap::constant(ExactMatrix::identity(&f, 2).scale(&f.int(4)).unwrap(), 2).is_ok());
        assert!(StructuredMap::canonical(f.int(2), ExactMatrix::identity(&f, 2), 0, false, 2).is_err());
        assert!(StructuredMap::canonical(f.one(), ExactMatrix::zeros(&f, 2), 0, false, 2).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let f = Closure::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = StructuredMap::random_canonical(&f, 2, 2, 2, &mut rng).unwrap();
        assert!(equivalent(&m, &m, &f, 10));
        if let MapForm::Canonical {
            epsilon, t, e, transpose, ..
        } = &m.form
        {
            let scaled = StructuredMap::canonical(epsilon.clone(), t.scale(&f.int(3)).unwrap(), *e, *transpose, 2).unwrap();
            assert!(equivalent(&m, &scaled, &f, 10));
        }
        let id = StructuredMap::identity(&f, 2, 2);
        let tr = StructuredMap::canonical(f.one(), ExactMatrix::identity(&f, 2), 0, true, 2).unwrap();
        assert!(!equivalent(&id, &tr, &f, 10));
    }

    #[test]
    fn json_round_trip() {
        let f = Closure::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = StructuredMap::random_canonical(&f, 3, 2, 2, &mut rng).unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        assert!(text.contains("\"variant\":\"canonical\"") && text.contains("\"T\""));
        let back = StructuredMap::from_json(&f, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
