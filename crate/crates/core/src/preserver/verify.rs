//! Sampling check of phi(A^k o B) = phi(A)^k o phi(B).

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MapOracle;
use crate::error::Result;
use crate::field::Closure;
use crate::matrix::{ExactMatrix, MatrixJson};
use crate::suite::Verdict;

/// Which pairs `verify_identity` looks at: every ordered pair of structured
/// probes, then `random_pairs` pairs of fresh random matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeSampler {
    pub random_pairs: usize,
    /// Random matrices mixed into the structured probe list.
    pub random_probes: usize,
    /// Subfield degrees whose generators appear in E_ii + g E_ij probes.
    pub degrees: Vec<u32>,
    pub seed: u64,
}

impl Default for ProbeSampler {
    fn default() -> Self {
        ProbeSampler {
            random_pairs: 200,
            random_probes: 4,
            degrees: vec![1, 2],
            seed: 0xC0FFEE,
        }
    }
}

impl ProbeSampler {
    pub fn with_random_pairs(mut self, n: usize) -> Self {
        self.random_pairs = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// 0, I, every E_ij, E_ii + g E_ij (i != j) for g = 1 and the generator of
/// each listed degree, g I for each generator, then `random_count` random
/// matrices with entries of degree up to the largest listed degree (capped at 2).
pub fn structured_probes(
    field: &Closure,
    n: usize,
    degrees: &[u32],
    random_count: usize,
    seed: u64,
) -> Result<Vec<ExactMatrix>> {
    let mut gens = vec![field.one()];
    for &d in degrees {
        let g = field.generator(d)?;
        if !gens.contains(&g) {
            gens.push(g);
        }
    }
    let mut out = vec![ExactMatrix::zeros(field, n), ExactMatrix::identity(field, n)];
    for i in 0..n {
        for j in 0..n {
            out.push(ExactMatrix::unit(field, n, i, j));
        }
    }
    for g in &gens {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out.push(ExactMatrix::unit(field, n, i, i).with_entry(i, j, g.clone()));
                }
            }
        }
    }
    for g in gens.iter().skip(1) {
        out.push(ExactMatrix::scalar(field, n, g));
    }
    let degree = degrees.iter().copied().max().unwrap_or(1).clamp(1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_count {
        out.push(ExactMatrix::random(field, n, rng.gen_range(1..=degree), &mut rng)?);
    }
    Ok(out)
}

/// A pair with phi(a^k o b) = lhs != rhs = phi(a)^k o phi(b).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityWitness {
    pub a: ExactMatrix,
    pub b: ExactMatrix,
    pub lhs: ExactMatrix,
    pub rhs: ExactMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityWitnessJson {
    pub a: MatrixJson,
    pub b: MatrixJson,
    pub lhs: MatrixJson,
    pub rhs: MatrixJson,
}

impl IdentityWitness {
    /// Re-queries the oracle. True when both stored sides reproduce and differ.
    pub fn recheck(&self, oracle: &MapOracle, k: u64) -> Result<bool> {
        let lhs = oracle.query(&self.a.mixed_product(&self.b, k)?)?;
        let rhs = oracle.query(&self.a)?.mixed_product(&oracle.query(&self.b)?, k)?;
        Ok(lhs == self.lhs && rhs == self.rhs && lhs != rhs)
    }

    pub fn to_json(&self) -> IdentityWitnessJson {
        IdentityWitnessJson {
            a: self.a.to_json(),
            b: self.b.to_json(),
            lhs: self.lhs.to_json(),
            rhs: self.rhs.to_json(),
        }
    }

    pub fn from_json(field: &Closure, j: &IdentityWitnessJson) -> Result<Self> {
        Ok(IdentityWitness {
            a: ExactMatrix::from_json(field, &j.a)?,
            b: ExactMatrix::from_json(field, &j.b)?,
            lhs: ExactMatrix::from_json(field, &j.lhs)?,
            rhs: ExactMatrix::from_json(field, &j.rhs)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub samples_checked: u64,
    pub witness: Option<IdentityWitness>,
    pub query_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReportJson {
    pub verdict: Verdict,
    pub samples_checked: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<IdentityWitnessJson>,
    pub query_count: u64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> VerificationReportJson {
        VerificationReportJson {
            verdict: self.verdict,
            samples_checked: self.samples_checked,
            witness: self.witness.as_ref().map(IdentityWitness::to_json),
            query_count: self.query_count,
        }
    }
}

struct Checker<'a> {
    oracle: &'a MapOracle,
    k: u64,
    cache: HashMap<ExactMatrix, ExactMatrix>,
    checked: u64,
}

impl Checker<'_> {
    fn image(&mut self, x: &ExactMatrix) -> Result<ExactMatrix> {
        if let Some(y) = self.cache.get(x) {
            return Ok(y.clone());
        }
        let y = self.oracle.query(x)?;
        self.cache.insert(x.clone(), y.clone());
        Ok(y)
    }

    fn pair(&mut self, a: &ExactMatrix, b: &ExactMatrix) -> Result<Option<IdentityWitness>> {
        self.checked += 1;
        let lhs = self.image(&a.mixed_product(b, self.k)?)?;
        let rhs = self.image(a)?.mixed_product(&self.image(b)?, self.k)?;
        Ok((lhs != rhs).then(|| IdentityWitness {
            a: a.clone(),
            b: b.clone(),
            lhs,
            rhs,
        }))
    }
}

/// Checks the identity on every ordered pair of structured probes, then on
/// random pairs, stopping at the first violation. Errors only come from the
/// oracle itself (for instance a dimension mismatch).
pub fn verify_identity(oracle: &MapOracle, k: u64, sampler: &ProbeSampler) -> Result<VerificationReport> {
    let field = oracle.field().clone();
    let n = oracle.n();
    let start = oracle.queries();
    let probes = structured_probes(&field, n, &sampler.degrees, sampler.random_probes, sampler.seed)?;
    let mut c = Checker {
        oracle,
        k,
        cache: HashMap::new(),
        checked: 0,
    };
    let mut witness = None;
    'outer: for a in &probes {
        for b in &probes {
            if let Some(w) = c.pair(a, b)? {
                witness = Some(w);
                break 'outer;
            }
        }
    }
    if witness.is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed ^ 0x5a5a_5a5a);
        let degree = sampler.degrees.iter().copied().max().unwrap_or(1).clamp(1, 2);
        for _ in 0..sampler.random_pairs {
            let a = ExactMatrix::random(&field, n, rng.gen_range(1..=degree), &mut rng)?;
            let b = ExactMatrix::random(&field, n, rng.gen_range(1..=degree), &mut rng)?;
            if let Some(w) = c.pair(&a, &b)? {
                witness = Some(w);
                break;
            }
        }
    }
    Ok(VerificationReport {
        verdict: if witness.is_some() { Verdict::Fail } else { Verdict::Pass },
        samples_checked: c.checked,
        witness,
        query_count: oracle.queries() - start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preserver::{MapSpec, StructuredMap};

    #[test]
    fn identity_and_transpose_pass() {
        let f = Closure::prime(3).unwrap();
        for map in [MapSpec::Identity, MapSpec::Transpose] {
            let o = MapOracle::from_map_spec(&f, 2, map).unwrap();
            let r = verify_identity(&o, 2, &ProbeSampler::default().with_random_pairs(20)).unwrap();
            assert!(r.passed());
            assert!(r.witness.is_none());
            assert!(r.query_count > 0 && r.samples_checked > 0);
        }
    }

    #[test]
    fn potent_constant_passes() {
        let f = Closure::prime(3).unwrap();
        let p = ExactMatrix::from_ints(&f, &[vec![1, 1], vec![0, 0]]).unwrap();
        let m = StructuredMap::constant(p, 2).unwrap();
        let o = MapOracle::from_structured(&f, &m).unwrap();
        assert!(verify_identity(&o, 2, &ProbeSampler::default()).unwrap().passed());
    }

    #[test]
    fn shift_fails_with_rechecking_witness() {
        let f = Closure::prime(3).unwrap();
        let e11 = ExactMatrix::unit(&f, 2, 0, 0);
        let o = MapOracle::from_fn(&f, 2, move |x| x.add(&e11));
        let r = verify_identity(&o, 2, &ProbeSampler::default()).unwrap();
        assert!(!r.passed());
        let w = r.witness.clone().unwrap();
        assert!(w.recheck(&o, 2).unwrap());
        assert_ne!(w.lhs, w.rhs);
        let text = serde_json::to_string(&r.to_json()).unwrap();
        let back: VerificationReportJson = serde_json::from_str(&text).unwrap();
        assert_eq!(IdentityWitness::from_json(&f, back.witness.as_ref().unwrap()).unwrap(), w);
    }

    #[test]
    fn probe_list_shape() {
        let f = Closure::prime(5).unwrap();
        let probes = structured_probes(&f, 2, &[1, 2], 3, 1).unwrap();
        // 0, I, 4 units, 3 generators x 2 off-diagonal, 2 scalars, 3 random
        assert_eq!(probes.len(), 2 + 4 + 6 + 2 + 3);
        assert!(probes.iter().any(|x| x.max_degree() == 2));
    }
}
