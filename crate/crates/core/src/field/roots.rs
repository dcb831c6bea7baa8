//! Root finding in the closure: distinct-degree factorization decides how far
//! the tower must be extended, equal-degree splitting finds the roots there.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gf::{distinct_roots, pdivrem, pgcd, pmonic, ppowmod, prem, psub, ptrim, Poly};
use super::tower::lcm;
use super::{Closure, ClosureElement};
use crate::error::{Error, Result};

impl Closure {
    fn poly_at(&self, f: &[ClosureElement], lvl: &super::Level) -> Poly {
        let mut out: Poly = f.iter().map(|c| self.lift(c, lvl)).collect();
        ptrim(&mut out, &lvl.field);
        out
    }

    /// Degree of the smallest level over which `f` splits into linear factors.
    fn splitting_degree(&self, f: &[ClosureElement]) -> Result<u64> {
        let base = self.common_level(f.iter().map(|c| c.degree()))?;
        let k = &base.field;
        let q = k.order();
        let mut rest = pmonic(k, &self.poly_at(f, &base));
        let x: Poly = vec![k.zero(), k.one()];
        let mut h = x.clone();
        let mut split: u64 = 1;
        let mut i: u32 = 0;
        while rest.len() > 1 {
            i += 1;
            let deg = rest.len() - 1;
            if 2 * i as usize > deg {
                // whatever remains is a single irreducible factor
                split = lcm(split as u32, deg as u32);
                break;
            }
            h = ppowmod(k, &h, q, &rest);
            let g = pgcd(k, &rest, &psub(k, &h, &x));
            if g.len() > 1 {
                split = lcm(split as u32, i);
                loop {
                    let g2 = pgcd(k, &rest, &g);
                    if g2.len() <= 1 {
                        break;
                    }
                    rest = pdivrem(k, &rest, &g2).0;
                }
                h = prem(k, &h, &rest);
            }
        }
        Ok(split * base.degree as u64)
    }

    /// All roots of `f` (low-to-high coefficients) with multiplicity, sorted.
    pub fn poly_roots(&self, f: &[ClosureElement]) -> Result<Vec<ClosureElement>> {
        let mut f: Vec<ClosureElement> = f.to_vec();
        while f.last().is_some_and(|c| c.is_zero()) {
            f.pop();
        }
        if f.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        if f.len() == 1 {
            return Ok(Vec::new());
        }
        let d = self.splitting_degree(&f)?;
        if d > self.tower_limit() as u64 {
            return Err(Error::TowerLimitExceeded {
                needed: d.min(u32::MAX as u64) as u32,
                limit: self.tower_limit(),
            });
        }
        let lvl = self.level(d as u32)?;
        let k = &lvl.field;
        let poly = pmonic(k, &self.poly_at(&f, &lvl));
        let mut rng = ChaCha8Rng::seed_from_u64(0x600d_5eed);
        let mut out = Vec::new();
        for r in distinct_roots(k, &poly, &mut rng) {
            let lin: Poly = vec![k.neg(&r), k.one()];
            let mut g = poly.clone();
            let elt = self.lower(&lvl, &r);
            loop {
                let (q, rem) = pdivrem(k, &g, &lin);
                if !rem.is_empty() {
                    break;
                }
                out.push(elt.clone());
                g = q;
            }
        }
        out.sort();
        Ok(out)
    }

    /// Every solution of z^k = a, sorted.
    pub fn kth_roots(&self, a: &ClosureElement, k: u64) -> Result<Vec<ClosureElement>> {
        if k == 0 {
            return Err(Error::InvalidConfig("root index must be positive".into()));
        }
        if a.is_zero() {
            return Ok(vec![self.zero()]);
        }
        let p = self.p() as u64;
        let mut kp = k;
        let mut s = 0u64;
        while kp % p == 0 {
            kp /= p;
            s += 1;
        }
        // z^{k' p^s} = a  <=>  z^{k'} = a^{p^{-s}}
        let m = a.degree() as u64;
        let b = self.frobenius(a, (m - s % m) % m);
        if kp == 1 {
            return Ok(vec![b]);
        }
        let mut f = vec![self.neg(&b)];
        f.extend((1..kp).map(|_| self.zero()));
        f.push(self.one());
        let mut roots = self.poly_roots(&f)?;
        roots.dedup();
        Ok(roots)
    }

    /// The k-th roots of unity.
    pub fn roots_of_unity(&self, k: u64) -> Result<Vec<ClosureElement>> {
        self.kth_roots(&self.one(), k)
    }

    /// The least k-th root of `a` in the element order.
    pub fn min_kth_root(&self, a: &ClosureElement, k: u64) -> Result<ClosureElement> {
        Ok(self.kth_roots(a, k)?.into_iter().next().expect("closure is algebraically closed"))
    }
}
