//! Derivations of the identity from a nonzero seed.
//!
//! A set closed under A^k o B whenever A or B belongs to it, and containing a
//! nonzero matrix, contains I. A witness records every step of that
//! derivation with its auxiliary matrix written out, so replay only
//! recomputes mixed products.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Closure;
use crate::matrix::{ExactMatrix, MatrixJson};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prior {
    Left,
    Right,
}

/// result = p^k o q; the side named by `which_is_prior` must be the seed or
/// an earlier result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStep {
    pub p: ExactMatrix,
    pub q: ExactMatrix,
    pub which_is_prior: Prior,
    pub result: ExactMatrix,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimplicityWitness {
    pub steps: Vec<WitnessStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessStepJson {
    pub p: MatrixJson,
    pub q: MatrixJson,
    pub which_is_prior: Prior,
    pub result: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub steps: Vec<WitnessStepJson>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub ok: bool,
    /// Index of the first bad step; equal to the step count when every step
    /// recomputes but the chain does not end at I.
    pub failed_step: Option<usize>,
}

impl SimplicityWitness {
    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            steps: self
                .steps
                .iter()
                .map(|s| WitnessStepJson {
                    p: s.p.to_json(),
                    q: s.q.to_json(),
                    which_is_prior: s.which_is_prior,
                    result: s.result.to_json(),
                })
                .collect(),
        }
    }

    pub fn from_json(field: &Closure, j: &WitnessJson) -> Result<Self> {
        let steps = j
            .steps
            .iter()
            .map(|s| {
                Ok(WitnessStep {
                    p: ExactMatrix::from_json(field, &s.p)?,
                    q: ExactMatrix::from_json(field, &s.q)?,
                    which_is_prior: s.which_is_prior,
                    result: ExactMatrix::from_json(field, &s.result)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SimplicityWitness { steps })
    }
}

/// Recomputes each step from the seed. Never errors: malformed steps count
/// as failures.
pub fn replay(w: &SimplicityWitness, seed: &ExactMatrix, k: u64) -> ReplayOutcome {
    let mut known = vec![seed.clone()];
    for (idx, s) in w.steps.iter().enumerate() {
        let prior = match s.which_is_prior {
            Prior::Left => &s.p,
            Prior::Right => &s.q,
        };
        let ok = known.contains(prior) && s.p.mixed_product(&s.q, k).is_ok_and(|r| r == s.result);
        if !ok {
            return ReplayOutcome {
                ok: false,
                failed_step: Some(idx),
            };
        }
        known.push(s.result.clone());
    }
    if known.last().is_some_and(|m| m.is_identity()) {
        ReplayOutcome {
            ok: true,
            failed_step: None,
        }
    } else {
        ReplayOutcome {
            ok: false,
            failed_step: Some(w.steps.len()),
        }
    }
}

struct Builder {
    field: Closure,
    n: usize,
    k: u64,
    current: ExactMatrix,
    steps: Vec<WitnessStep>,
}

impl Builder {
    /// current <- aux^k o current
    fn from_left(&mut self, aux: ExactMatrix) -> Result<()> {
        let result = aux.mixed_product(&self.current, self.k)?;
        self.push(aux, self.current.clone(), Prior::Right, result);
        Ok(())
    }

    /// current <- current^k o aux
    fn from_right(&mut self, aux: ExactMatrix) -> Result<()> {
        let result = self.current.mixed_product(&aux, self.k)?;
        self.push(self.current.clone(), aux, Prior::Left, result);
        Ok(())
    }

    fn push(&mut self, p: ExactMatrix, q: ExactMatrix, which_is_prior: Prior, result: ExactMatrix) {
        self.current = result.clone();
        self.steps.push(WitnessStep {
            p,
            q,
            which_is_prior,
            result,
        });
    }

    fn unit(&self, i: usize, j: usize) -> ExactMatrix {
        ExactMatrix::unit(&self.field, self.n, i, j)
    }

    /// Multiply current by c using (mu I)^k o current with mu^k = c.
    fn rescale(&mut self, c: &crate::field::ClosureElement) -> Result<()> {
        if c.is_one() {
            return Ok(());
        }
        let mu = self.field.min_kth_root(c, self.k)?;
        self.from_left(ExactMatrix::scalar(&self.field, self.n, &mu))
    }

    /// From a current with x_ij != 0 (i != j) to E_ii.
    fn off_diagonal(&mut self, i: usize, j: usize) -> Result<()> {
        let f = self.field.clone();
        let x = self.current.get(i, j).clone();
        self.from_left(self.unit(i, i))?;
        self.from_left(self.unit(j, j))?;
        // now (x_ij E_ij + x_ji E_ji) / 4
        self.rescale(&f.int(4))?;
        let target = ExactMatrix::zeros(&f, self.n)
            .with_entry(i, i, f.int(2))
            .with_entry(j, i, f.div(&f.int(2), &x)?)
            .with_entry(j, j, f.int(-2));
        let y = target.diag_kth_root(self.k)?;
        self.from_left(y)?;
        // E_ii + E_jj
        self.from_left(self.unit(i, i))
    }

    /// From E_11 to diag(I_q, 0).
    fn reach(&mut self, q: usize) -> Result<()> {
        if q <= 1 {
            return Ok(());
        }
        let f = self.field.clone();
        let half = q / 2;
        let mut aux = ExactMatrix::zeros(&f, self.n);
        let mut target = ExactMatrix::zeros(&f, self.n);
        if q % 2 == 0 {
            self.reach(half)?;
            for t in 0..half {
                aux.set(t, half + t, f.int(2));
                target.set(t, t, f.int(2));
                target.set(half + t, t, f.int(2));
                target.set(half + t, half + t, f.int(-2));
            }
        } else {
            self.reach(half + 1)?;
            aux.set(half, half, f.one());
            target.set(half, half, f.one());
            for t in 0..half {
                aux.set(t, half + 1 + t, f.int(2));
                target.set(t, t, f.int(2));
                target.set(half + 1 + t, t, f.int(2));
                target.set(half + 1 + t, half + 1 + t, f.int(-2));
            }
        }
        self.from_right(aux)?;
        let y = target.diag_kth_root(self.k)?;
        self.from_left(y)
    }
}

/// A replayable derivation of I_n from the nonzero seed `x`.
pub fn simplicity_witness(x: &ExactMatrix, k: u64) -> Result<SimplicityWitness> {
    if x.is_zero() {
        return Err(Error::ZeroSeed);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    if x.is_identity() {
        return Ok(SimplicityWitness::default());
    }
    let n = x.n();
    let mut b = Builder {
        field: x.field().clone(),
        n,
        k,
        current: x.clone(),
        steps: Vec::new(),
    };
    let off = (0..n * n).map(|t| (t / n, t % n)).find(|&(i, j)| i != j && !x.get(i, j).is_zero());
    let i = match off {
        Some((i, j)) => {
            b.off_diagonal(i, j)?;
            i
        }
        None => {
            let i = (0..n).find(|&i| !x.get(i, i).is_zero()).expect("nonzero diagonal seed");
            let xii = x.get(i, i).clone();
            b.from_left(b.unit(i, i))?;
            b.rescale(&b.field.inv(&xii)?)?;
            i
        }
    };
    if i != 0 {
        // E_1i = E_ii^k o 2E_1i, then the off-diagonal chain gives E_11
        let two = b.field.int(2);
        b.from_right(b.unit(0, i).scale(&two)?)?;
        b.off_diagonal(0, i)?;
    }
    b.reach(n)?;
    debug_assert!(b.current.is_identity());
    Ok(SimplicityWitness { steps: b.steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_seed_needs_no_steps() {
        let f = Closure::prime(5).unwrap();
        let i = ExactMatrix::identity(&f, 3);
        let w = simplicity_witness(&i, 2).unwrap();
        assert!(w.steps.is_empty());
        assert!(replay(&w, &i, 2).ok);
        assert!(matches!(simplicity_witness(&ExactMatrix::zeros(&f, 2), 2), Err(Error::ZeroSeed)));
    }

    #[test]
    fn off_diagonal_seed() {
        let f = Closure::prime(5).unwrap();
        let e12 = ExactMatrix::unit(&f, 2, 0, 1);
        let w = simplicity_witness(&e12, 2).unwrap();
        assert!(replay(&w, &e12, 2).ok);
        let sym = ExactMatrix::unit(&f, 2, 0, 1);
        assert!(w.steps.iter().any(|s| s.result == sym));
        let corner = ExactMatrix::diag(&f, &[f.one(), f.one()]);
        assert!(w.steps.iter().any(|s| s.result == corner));
        assert!(!replay(&w, &ExactMatrix::unit(&f, 2, 1, 0), 2).ok);
    }

    #[test]
    fn diagonal_seed_starts_by_isolating_entry() {
        let f = Closure::prime(5).unwrap();
        let x = ExactMatrix::diag(&f, &[f.zero(), f.int(3)]);
        let w = simplicity_witness(&x, 2).unwrap();
        let first = &w.steps[0];
        assert_eq!(first.p, ExactMatrix::unit(&f, 2, 1, 1));
        assert_eq!(first.result, x);
        assert!(replay(&w, &x, 2).ok);
    }

    #[test]
    fn random_seeds_replay() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [3, 5] {
            let f = Closure::prime(p).unwrap();
            for n in 1..=5 {
                for k in 1..=4 {
                    let mut x = ExactMatrix::random(&f, n, 1, &mut rng).unwrap();
                    if x.is_zero() {
                        x = ExactMatrix::unit(&f, n, n - 1, n - 1);
                    }
                    let w = simplicity_witness(&x, k).unwrap();
                    let out = replay(&w, &x, k);
                    assert!(out.ok, "p={p} n={n} k={k} failed at {:?}", out.failed_step);
                }
            }
        }
    }

    #[test]
    fn tampering_is_reported_with_step() {
        let f = Closure::prime(3).unwrap();
        let x = ExactMatrix::from_ints(&f, &[vec![0, 1, 0], vec![2, 0, 0], vec![0, 0, 1]]).unwrap();
        let mut w = simplicity_witness(&x, 2).unwrap();
        let last = w.steps.len() - 1;
        let r = w.steps[last].result.clone();
        w.steps[last].result = r.with_entry(0, 0, f.zero());
        assert_eq!(replay(&w, &x, 2).failed_step, Some(last));
        let text = serde_json::to_string(&w.to_json()).unwrap();
        let back = SimplicityWitness::from_json(&f, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
