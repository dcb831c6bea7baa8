//! Recovering the normal form of a map from oracle queries.
//!
//! The order of queries follows the classification argument: phi(0) decides
//! the constant branch; the images of E_jj are mutually orthogonal rank-one
//! (k+1)-potents whose rank-one factors give T up to a diagonal; phi(E_j1)
//! fixes the transpose flag and the diagonal; phi(lambda E_11) gives the
//! field map on generators. The candidate is then compared with the oracle
//! on a confirmation sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{verify_identity, MapOracle, ProbeSampler, StructuredMap};
use crate::error::{Error, Result};
use crate::field::{Closure, ClosureElement};
use crate::matrix::ExactMatrix;

/// Degrees whose generators pin down the Frobenius exponent.
pub(crate) fn probe_degrees(field: &Closure) -> Vec<u32> {
    (1..=4).filter(|&d| d <= field.tower_limit()).collect()
}

#[derive(Clone, Debug)]
pub struct CanonicalizeOptions {
    /// Random matrices in the confirmation sample.
    pub confirmations: usize,
    pub seed: u64,
    /// Used to look for a violating pair whenever a structural step fails.
    pub sampler: ProbeSampler,
}

impl Default for CanonicalizeOptions {
    fn default() -> Self {
        CanonicalizeOptions {
            confirmations: 100,
            seed: 0xC0FFEE,
            sampler: ProbeSampler::default(),
        }
    }
}

pub fn canonicalize(f: &MapOracle, n: usize, k: u64) -> Result<StructuredMap> {
    canonicalize_with(f, n, k, &CanonicalizeOptions::default())
}

pub fn canonicalize_with(f: &MapOracle, n: usize, k: u64, opts: &CanonicalizeOptions) -> Result<StructuredMap> {
    if f.n() != n {
        return Err(Error::DimensionMismatch { left: n, right: f.n() });
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    let c = Canon { f, n, k, opts };
    let m = c.recover()?;
    c.confirm(&m)?;
    Ok(m)
}

struct Canon<'a> {
    f: &'a MapOracle,
    n: usize,
    k: u64,
    opts: &'a CanonicalizeOptions,
}

impl Canon<'_> {
    fn field(&self) -> &Closure {
        self.f.field()
    }

    /// A violating pair if one turns up, otherwise the structural error.
    fn reject(&self, fallback: Error) -> Error {
        match verify_identity(self.f, self.k, &self.opts.sampler) {
            Ok(r) => match r.witness {
                Some(w) => Error::NotPreserver { witness: Box::new(w) },
                None => fallback,
            },
            Err(e) => e,
        }
    }

    fn degenerate(&self, condition: impl Into<String>) -> Error {
        self.reject(Error::DegenerateOracle {
            condition: condition.into(),
        })
    }

    fn recover(&self) -> Result<StructuredMap> {
        let fld = self.field().clone();
        let (n, k) = (self.n, self.k);
        let zero = ExactMatrix::zeros(&fld, n);
        let z = self.f.query(&zero)?;
        if !z.is_zero() {
            if z.pow(k + 1)? != z {
                return Err(self.degenerate("phi(0) is not a (k+1)-potent"));
            }
            return StructuredMap::constant(z, k);
        }

        let mut cols = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        let mut eps: Option<ClosureElement> = None;
        for j in 0..n {
            let pj = self.f.query(&ExactMatrix::unit(&fld, n, j, j))?;
            if pj.is_zero() {
                return StructuredMap::constant(zero, k);
            }
            let (u, v) = match rank_one(&pj)? {
                Some(uv) => uv,
                None => return Err(self.degenerate(format!("phi(E_{0}{0}) is not rank one", j + 1))),
            };
            let ej = (0..n).try_fold(fld.zero(), |acc, i| fld.add(&acc, pj.get(i, i)))?;
            if ej.is_zero() || !fld.pow(&ej, k).is_one() {
                return Err(self.degenerate(format!("phi(E_{0}{0}) is not a (k+1)-potent", j + 1)));
            }
            match &eps {
                None => eps = Some(ej.clone()),
                Some(e) if *e != ej => {
                    return Err(self.degenerate("the traces of phi(E_jj) differ"));
                }
                _ => {}
            }
            let inv = fld.inv(&ej)?;
            rows.push(v.iter().map(|x| fld.mul(x, &inv)).collect::<Result<Vec<_>>>()?);
            cols.push(u);
        }
        let eps = eps.expect("n >= 1");
        let t0 = ExactMatrix::from_fn(&fld, n, |i, j| cols[j][i].clone());
        let t0_inv = ExactMatrix::from_fn(&fld, n, |i, j| rows[i][j].clone());
        if !t0.mul(&t0_inv)?.is_identity() {
            return Err(self.degenerate("phi(E_jj) are not mutually orthogonal"));
        }
        let psi = |x: &ExactMatrix| -> Result<ExactMatrix> { t0_inv.mul(&self.f.query(x)?)?.mul(&t0) };

        let transpose = if n >= 2 {
            let s = psi(&ExactMatrix::unit(&fld, n, 0, 1))?.support();
            if s == [(0, 1)].into() {
                false
            } else if s == [(1, 0)].into() {
                true
            } else {
                return Err(self.degenerate("phi(E_12) is not proportional to E_12 or E_21 after normalization"));
            }
        } else {
            false
        };

        let mut d = vec![fld.one()];
        for j in 1..n {
            let y = psi(&ExactMatrix::unit(&fld, n, j, 0))?;
            let (r, c) = if transpose { (0, j) } else { (j, 0) };
            if y.support() != [(r, c)].into() {
                return Err(self.degenerate(format!("phi(E_{}1) has unexpected support", j + 1)));
            }
            let x = y.get(r, c);
            d.push(if transpose { fld.div(&eps, x)? } else { fld.div(x, &eps)? });
        }
        let dm = ExactMatrix::diag(&fld, &d);
        let t = t0.mul(&dm)?;
        let t_inv = dm.inverse()?.mul(&t0_inv)?;

        let e = self.frobenius_exponent(&t, &t_inv, &eps)?;
        StructuredMap::canonical(eps, t, e, transpose, k)
    }

    fn frobenius_exponent(&self, t: &ExactMatrix, t_inv: &ExactMatrix, eps: &ClosureElement) -> Result<u64> {
        let fld = self.field().clone();
        let degrees = probe_degrees(&fld);
        let mut residues = Vec::new();
        for &d in &degrees {
            let lambda = fld.generator(d)?;
            let y = t_inv
                .mul(&self.f.query(&ExactMatrix::unit(&fld, self.n, 0, 0).scale(&lambda)?)?)?
                .mul(t)?;
            let w = fld.div(y.get(0, 0), eps)?;
            match (0..d as u64).find(|&e| fld.frobenius(&lambda, e) == w) {
                Some(e) => residues.push((d as u64, e)),
                None => return Err(self.reject(Error::UnrepresentableOmega { degree: d })),
            }
        }
        let period = residues.iter().fold(1u64, |l, &(d, _)| l / gcd(l, d) * d);
        match (0..period).find(|e| residues.iter().all(|&(d, r)| e % d == r)) {
            Some(e) => Ok(e),
            None => Err(self.reject(Error::UnrepresentableOmega {
                degree: *degrees.last().unwrap_or(&1),
            })),
        }
    }

    fn confirm(&self, m: &StructuredMap) -> Result<()> {
        let fld = self.field().clone();
        let n = self.n;
        let mut probes = Vec::new();
        for i in 0..n {
            for j in 0..n {
                probes.push(ExactMatrix::unit(&fld, n, i, j));
            }
        }
        for d in probe_degrees(&fld) {
            let g = fld.generator(d)?;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        probes.push(ExactMatrix::unit(&fld, n, i, i).with_entry(i, j, g.clone()));
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        for _ in 0..self.opts.confirmations {
            probes.push(ExactMatrix::random(&fld, n, rng.gen_range(1..=2), &mut rng)?);
        }
        for x in &probes {
            if m.apply(x)? != self.f.query(x)? {
                return Err(self.degenerate(format!(
                    "candidate normal form disagrees with the oracle on a confirmation probe of max degree {}",
                    x.max_degree()
                )));
            }
        }
        Ok(())
    }
}

/// P = u v^t with u the first nonzero column, or None if rank(P) != 1.
fn rank_one(p: &ExactMatrix) -> Result<Option<(Vec<ClosureElement>, Vec<ClosureElement>)>> {
    let fld = p.field().clone();
    let n = p.n();
    let Some(c) = (0..n).find(|&j| (0..n).any(|i| !p.get(i, j).is_zero())) else {
        return Ok(None);
    };
    let u: Vec<_> = (0..n).map(|i| p.get(i, c).clone()).collect();
    let r = (0..n).find(|&i| !u[i].is_zero()).expect("nonzero column");
    let v = (0..n)
        .map(|j| fld.div(p.get(r, j), &u[r]))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..n {
        for j in 0..n {
            if fld.mul(&u[i], &v[j])? != *p.get(i, j) {
                return Ok(None);
            }
        }
    }
    Ok(Some((u, v)))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preserver::{equivalent, MapForm, MapSpec};

    #[test]
    fn recovers_random_canonical_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for p in [3, 5] {
            let f = Closure::prime(p).unwrap();
            for n in 1..=3 {
                for k in 1..=3 {
                    let m = StructuredMap::random_canonical(&f, n, k, 2, &mut rng).unwrap();
                    let o = MapOracle::from_structured(&f, &m).unwrap();
                    let got = canonicalize(&o, n, k).unwrap();
                    assert!(equivalent(&got, &m, &f, 20), "p={p} n={n} k={k}");
                    if let (MapForm::Canonical { epsilon: a, .. }, MapForm::Canonical { epsilon: b, .. }) = (&got.form, &m.form) {
                        assert_eq!(a, b);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_and_zero_maps() {
        let f = Closure::prime(3).unwrap();
        let p = ExactMatrix::from_ints(&f, &[vec![2, 0], vec![0, 1]]).unwrap();
        let o = MapOracle::from_fn(&f, 2, move |_| Ok(p.clone()));
        let m = canonicalize(&o, 2, 2).unwrap();
        assert!(m.is_constant());
        let zero = MapOracle::from_fn(&f, 2, |x| Ok(ExactMatrix::zeros(x.field(), 2)));
        let m = canonicalize(&zero, 2, 2).unwrap();
        assert_eq!(m.apply(&ExactMatrix::identity(&f, 2)).unwrap(), ExactMatrix::zeros(&f, 2));
    }

    #[test]
    fn non_preservers_are_rejected_with_witness() {
        let f = Closure::prime(3).unwrap();
        let e11 = ExactMatrix::unit(&f, 2, 0, 0);
        let shift = MapOracle::from_fn(&f, 2, move |x| x.add(&e11));
        match canonicalize(&shift, 2, 2) {
            Err(Error::NotPreserver { witness }) => assert!(witness.recheck(&shift, 2).unwrap()),
            other => panic!("expected NotPreserver, got {other:?}"),
        }
        let square = MapOracle::from_map_spec(
            &f,
            2,
            MapSpec::Power {
                of: Box::default(),
                exponent: 2,
            },
        )
        .unwrap();
        assert!(matches!(canonicalize(&square, 2, 2), Err(Error::NotPreserver { .. })));
    }

    #[test]
    fn rank_one_factorization() {
        let f = Closure::prime(5).unwrap();
        let p = ExactMatrix::from_ints(&f, &[vec![0, 0], vec![2, 4]]).unwrap();
        let (u, v) = rank_one(&p).unwrap().unwrap();
        assert_eq!(u, vec![f.zero(), f.int(2)]);
        assert_eq!(v, vec![f.one(), f.int(2)]);
        assert!(rank_one(&ExactMatrix::identity(&f, 2)).unwrap().is_none());
    }
}
