//! m-potent matrices (P^m = P): orthogonality, the order PQ = QP = P^2,
//! maximality and exhaustive enumeration over the prime field.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Closure;
use crate::matrix::ExactMatrix;

/// Default cap on the number of candidates `enumerate_potents` may scan.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PotentContext {
    pub m: u32,
    pub n: usize,
    pub p: u32,
}

impl PotentContext {
    pub fn new(m: u32, n: usize, p: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig(format!("potency exponent must be at least 2, got {m}")));
        }
        Ok(PotentContext { m, n, p })
    }

    pub fn is_potent(&self, x: &ExactMatrix) -> Result<bool> {
        Ok(x.pow(self.m as u64)? == *x)
    }

    fn require(&self, x: &ExactMatrix) -> Result<()> {
        if self.is_potent(x)? {
            Ok(())
        } else {
            Err(Error::NotPotent { m: self.m })
        }
    }

    /// P ⪯ Q: PQ = QP = P^2.
    pub fn preceq(&self, p: &ExactMatrix, q: &ExactMatrix) -> Result<bool> {
        self.require(p)?;
        self.require(q)?;
        let pq = p.mul(q)?;
        Ok(pq == q.mul(p)? && pq == p.mul(p)?)
    }

    /// P^{m-1} Q = Q P^{m-1} = P.
    pub fn preceq_alt(&self, p: &ExactMatrix, q: &ExactMatrix) -> Result<bool> {
        self.require(p)?;
        self.require(q)?;
        let pm = p.pow(self.m as u64 - 1)?;
        let left = pm.mul(q)?;
        Ok(left == *p && q.mul(&pm)? == *p)
    }

    /// P^{m-1} o Q = P.
    pub fn preceq_jordan(&self, p: &ExactMatrix, q: &ExactMatrix) -> Result<bool> {
        self.require(p)?;
        self.require(q)?;
        Ok(p.mixed_product(q, self.m as u64 - 1)? == *p)
    }

    /// Maximal in the order exactly when invertible.
    pub fn is_maximal(&self, p: &ExactMatrix) -> Result<bool> {
        self.require(p)?;
        p.is_invertible()
    }

    /// Sum of pairwise orthogonal m-potents.
    pub fn orthosum(&self, parts: &[ExactMatrix]) -> Result<ExactMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidConfig("orthosum needs at least one part".into()))?;
        for (i, a) in parts.iter().enumerate() {
            self.require(a)?;
            for (j, b) in parts.iter().enumerate().skip(i + 1) {
                if !orthogonal(a, b)? {
                    return Err(Error::NotOrthogonal { first: i, second: j });
                }
            }
        }
        parts[1..].iter().try_fold(first.clone(), |acc, x| acc.add(x))
    }
}

/// PQ = QP = 0.
pub fn orthogonal(p: &ExactMatrix, q: &ExactMatrix) -> Result<bool> {
    Ok(p.mul(q)?.is_zero() && q.mul(p)?.is_zero())
}

fn mat_pow_fp(p: u64, n: usize, a: &[u64], mut e: u32) -> Vec<u64> {
    let mul = |x: &[u64], y: &[u64]| -> Vec<u64> {
        let mut out = vec![0u64; n * n];
        for i in 0..n {
            for l in 0..n {
                let xv = x[i * n + l];
                if xv == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = (out[i * n + j] + xv * y[l * n + j]) % p;
                }
            }
        }
        out
    };
    let mut r: Vec<u64> = (0..n * n).map(|i| u64::from(i / n == i % n)).collect();
    let mut b = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            r = mul(&r, &b);
        }
        e >>= 1;
        if e > 0 {
            b = mul(&b, &b);
        }
    }
    r
}

/// S (B_1 + ... + B_t) S^{-1} where the B_i are mutually orthogonal nonzero
/// m-potent blocks on disjoint diagonal ranges: 1x1 blocks holding an
/// (m-1)-th root of unity, or J_2(zeta) when p divides m - 1. Any sum over
/// a subset of blocks is m-potent; a sub-subset is below it in the order and
/// a disjoint subset is orthogonal to it.
#[derive(Clone, Debug)]
pub struct PotentBlocks {
    s: ExactMatrix,
    s_inv: ExactMatrix,
    blocks: Vec<ExactMatrix>,
}

impl PotentBlocks {
    /// S and the roots have entries in F_{p^d} with d dividing `degree`.
    pub fn random<R: Rng + ?Sized>(field: &Closure, n: usize, m: u32, degree: u32, rng: &mut R) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig(format!("m must be at least 2, got {m}")));
        }
        let roots: Vec<_> = field
            .roots_of_unity(u64::from(m - 1))?
            .into_iter()
            .filter(|r| degree % r.degree() == 0)
            .collect();
        let jordan_ok = (m - 1) % field.p() == 0;
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            let z = roots[rng.gen_range(0..roots.len())].clone();
            let mut b = ExactMatrix::zeros(field, n);
            b.set(i, i, z.clone());
            if jordan_ok && i + 1 < n && rng.gen_bool(0.3) {
                b.set(i + 1, i + 1, z);
                b.set(i, i + 1, field.one());
                i += 1;
            }
            blocks.push(b);
            i += 1;
        }
        let s = ExactMatrix::random_invertible(field, n, degree, rng)?;
        let s_inv = s.inverse()?;
        Ok(PotentBlocks { s, s_inv, blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The conjugated sum of the blocks whose index passes `pick`.
    pub fn sum(&self, pick: impl Fn(usize) -> bool) -> Result<ExactMatrix> {
        let mut acc = ExactMatrix::zeros(self.s.field(), self.s.n());
        for (i, b) in self.blocks.iter().enumerate() {
            if pick(i) {
                acc = acc.add(b)?;
            }
        }
        acc.conjugate(&self.s, &self.s_inv)
    }

    pub fn block(&self, i: usize) -> Result<ExactMatrix> {
        self.sum(|j| j == i)
    }
}

/// A random m-potent: a random subset of [`PotentBlocks`], so zero
/// eigenvalues show up as well.
pub fn random_potent<R: Rng + ?Sized>(
    field: &Closure,
    n: usize,
    m: u32,
    degree: u32,
    rng: &mut R,
) -> Result<ExactMatrix> {
    let [q, _, _] = random_nested_potents(field, n, m, degree, rng)?;
    Ok(q)
}

/// [Q, P, R] over one similarity with P ⪯ Q and R ⊥ Q.
pub fn random_nested_potents<R: Rng + ?Sized>(
    field: &Closure,
    n: usize,
    m: u32,
    degree: u32,
    rng: &mut R,
) -> Result<[ExactMatrix; 3]> {
    let pb = PotentBlocks::random(field, n, m, degree, rng)?;
    // 0: in R, 1: in Q only, 2: in P and Q
    let role: Vec<u8> = (0..pb.len()).map(|_| rng.gen_range(0..4).min(2)).collect();
    let role = |v: u8| {
        let r = role.clone();
        move |i: usize| r[i] == v || (v == 1 && r[i] == 2)
    };
    Ok([pb.sum(role(1))?, pb.sum(role(2))?, pb.sum(role(0))?])
}

/// Every m-potent in M_n(F_p), in base-p counting order of the row-major
/// entries.
pub fn enumerate_potents(ctx: &PotentContext) -> Result<Vec<ExactMatrix>> {
    enumerate_potents_within(ctx, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_potents_within(ctx: &PotentContext, budget: u128) -> Result<Vec<ExactMatrix>> {
    let field = Closure::prime(ctx.p)?;
    let cells = (ctx.n * ctx.n) as u32;
    let needed = (ctx.p as u128).checked_pow(cells).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let p = ctx.p as u64;
    let mut out = Vec::new();
    let mut digits = vec![0u64; ctx.n * ctx.n];
    for _ in 0..needed {
        if mat_pow_fp(p, ctx.n, &digits, ctx.m) == digits {
            let data = digits.iter().map(|&d| field.int(d as i64)).collect();
            out.push(ExactMatrix::new(&field, ctx.n, data)?);
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < p {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}
