//! Arithmetic in F_p[x]/(f) for a monic irreducible f, plus dense
//! polynomials with coefficients in such a field.

use rand::Rng;
use smallvec::{smallvec, SmallVec};

/// Coordinates of a field element in the power basis 1, x, ..., x^{d-1}.
pub type Coeffs = SmallVec<[u32; 4]>;

#[inline]
pub(crate) fn mulmod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
pub(crate) fn addmod(a: u32, b: u32, p: u32) -> u32 {
    let s = a as u64 + b as u64;
    if s >= p as u64 {
        (s - p as u64) as u32
    } else {
        s as u32
    }
}

#[inline]
pub(crate) fn submod(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + (p - b)
    }
}

pub(crate) fn pow_mod(mut b: u32, mut e: u128, p: u32) -> u32 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

pub(crate) fn inv_mod(a: u32, p: u32) -> Option<u32> {
    if a % p == 0 {
        None
    } else {
        Some(pow_mod(a, (p - 2) as u128, p))
    }
}

/// The finite field F_p[x]/(f) with f monic and irreducible of degree d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteField {
    p: u32,
    d: usize,
    modulus: Vec<u32>,
}

impl FiniteField {
    /// `modulus` is low-to-high and must be monic of degree at least one.
    pub fn new(p: u32, modulus: Vec<u32>) -> Self {
        assert!(modulus.len() >= 2 && *modulus.last().unwrap() == 1);
        let d = modulus.len() - 1;
        FiniteField { p, d, modulus }
    }

    /// F_p presented as F_p[x]/(x).
    pub fn prime(p: u32) -> Self {
        FiniteField::new(p, vec![0, 1])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Number of elements. Callers guarantee p^d fits in a u128.
    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.d as u32)
    }

    pub fn zero(&self) -> Coeffs {
        smallvec![0; self.d]
    }

    pub fn one(&self) -> Coeffs {
        self.constant(1)
    }

    pub fn constant(&self, c: u32) -> Coeffs {
        let mut v = self.zero();
        v[0] = c % self.p;
        v
    }

    /// The class of x.
    pub fn gen(&self) -> Coeffs {
        if self.d == 1 {
            self.constant(submod(0, self.modulus[0], self.p))
        } else {
            let mut v = self.zero();
            v[1] = 1;
            v
        }
    }

    pub fn is_zero(&self, a: &[u32]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, a: &[u32]) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Coeffs {
        a.iter().zip(b).map(|(&x, &y)| addmod(x, y, self.p)).collect()
    }

    pub fn sub(&self, a: &[u32], b: &[u32]) -> Coeffs {
        a.iter().zip(b).map(|(&x, &y)| submod(x, y, self.p)).collect()
    }

    pub fn neg(&self, a: &[u32]) -> Coeffs {
        a.iter().map(|&x| submod(0, x, self.p)).collect()
    }

    pub fn scale(&self, a: &[u32], c: u32) -> Coeffs {
        a.iter().map(|&x| mulmod(x, c, self.p)).collect()
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Coeffs {
        let p = self.p;
        let d = self.d;
        if d == 1 {
            return smallvec![mulmod(a[0], b[0], p)];
        }
        let p64 = p as u64;
        let mut prod: SmallVec<[u64; 16]> = smallvec![0; 2 * d - 1];
        if p < (1 << 16) {
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    prod[i + j] += x as u64 * y as u64;
                }
            }
            for c in prod.iter_mut() {
                *c %= p64;
            }
        } else {
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p64;
                }
            }
        }
        for i in (d..2 * d - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..d {
                let m = self.modulus[j] as u64;
                if m != 0 {
                    prod[i - d + j] = (prod[i - d + j] + c * (p64 - m)) % p64;
                }
            }
        }
        prod[..d].iter().map(|&c| c as u32).collect()
    }

    pub fn pow(&self, a: &[u32], mut e: u128) -> Coeffs {
        let mut r = self.one();
        let mut b: Coeffs = a.into();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        r
    }

    pub fn inv(&self, a: &[u32]) -> Option<Coeffs> {
        if self.is_zero(a) {
            return None;
        }
        if self.d == 1 {
            return inv_mod(a[0], self.p).map(|x| smallvec![x]);
        }
        Some(self.pow(a, self.order() - 2))
    }

    /// a^p.
    pub fn frob(&self, a: &[u32]) -> Coeffs {
        if self.d == 1 {
            return a.into();
        }
        self.pow(a, self.p as u128)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Coeffs {
        (0..self.d).map(|_| rng.gen_range(0..self.p)).collect()
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Coeffs {
        loop {
            let a = self.random(rng);
            if !self.is_zero(&a) {
                return a;
            }
        }
    }
}

/// Dense polynomial, low-to-high, no trailing zero coefficients.
pub(crate) type Poly = Vec<Coeffs>;

pub(crate) fn ptrim(f: &mut Poly, k: &FiniteField) {
    while f.last().is_some_and(|c| k.is_zero(c)) {
        f.pop();
    }
}


pub(crate) fn psub(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let z = k.zero();
    let mut r: Poly = (0..n)
        .map(|i| k.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
        .collect();
    ptrim(&mut r, k);
    r
}

pub(crate) fn pmul(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r: Poly = vec![k.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if k.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] = k.add(&r[i + j], &k.mul(x, y));
        }
    }
    ptrim(&mut r, k);
    r
}

pub(crate) fn pscale(k: &FiniteField, a: &Poly, c: &[u32]) -> Poly {
    let mut r: Poly = a.iter().map(|x| k.mul(x, c)).collect();
    ptrim(&mut r, k);
    r
}

/// Quotient and remainder; `b` must be nonzero.
pub(crate) fn pdivrem(k: &FiniteField, a: &Poly, b: &Poly) -> (Poly, Poly) {
    let db = b.len() - 1;
    let lead_inv = k.inv(&b[db]).expect("divisor is trimmed");
    let mut r = a.clone();
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut q: Poly = vec![k.zero(); r.len() - db];
    for i in (db..r.len()).rev() {
        if k.is_zero(&r[i]) {
            continue;
        }
        let c = k.mul(&r[i], &lead_inv);
        for (j, bj) in b.iter().enumerate() {
            let t = k.mul(&c, bj);
            r[i - db + j] = k.sub(&r[i - db + j], &t);
        }
        q[i - db] = c;
    }
    r.truncate(db);
    ptrim(&mut r, k);
    ptrim(&mut q, k);
    (q, r)
}

pub(crate) fn prem(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
    pdivrem(k, a, b).1
}

pub(crate) fn pmonic(k: &FiniteField, a: &Poly) -> Poly {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let li = k.inv(l).expect("trimmed");
            pscale(k, a, &li)
        }
    }
}

/// Monic gcd (empty when both inputs are zero).
pub(crate) fn pgcd(k: &FiniteField, a: &Poly, b: &Poly) -> Poly {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_empty() {
        let r = prem(k, &x, &y);
        x = y;
        y = r;
    }
    pmonic(k, &x)
}

pub(crate) fn pmulmod(k: &FiniteField, a: &Poly, b: &Poly, m: &Poly) -> Poly {
    prem(k, &pmul(k, a, b), m)
}

pub(crate) fn ppowmod(k: &FiniteField, base: &Poly, mut e: u128, m: &Poly) -> Poly {
    let mut r = prem(k, &vec![k.one()], m);
    let mut b = prem(k, base, m);
    while e > 0 {
        if e & 1 == 1 {
            r = pmulmod(k, &r, &b, m);
        }
        e >>= 1;
        if e > 0 {
            b = pmulmod(k, &b, &b, m);
        }
    }
    r
}

pub(crate) fn peval(k: &FiniteField, f: &Poly, x: &[u32]) -> Coeffs {
    let mut acc = k.zero();
    for c in f.iter().rev() {
        acc = k.add(&k.mul(&acc, x), c);
    }
    acc
}

/// The monic linear polynomial z - a.
pub(crate) fn plinear(k: &FiniteField, a: &[u32]) -> Poly {
    vec![k.neg(a), k.one()]
}

/// Distinct roots of `f` lying in `k`, sorted by coordinates.
pub(crate) fn distinct_roots<R: Rng + ?Sized>(k: &FiniteField, f: &Poly, rng: &mut R) -> Vec<Coeffs> {
    let f = pmonic(k, f);
    if f.len() <= 1 {
        return Vec::new();
    }
    let x: Poly = vec![k.zero(), k.one()];
    let h = ppowmod(k, &x, k.order(), &f);
    let g = pgcd(k, &f, &psub(k, &h, &x));
    let mut out = Vec::new();
    split_linear(k, &g, rng, &mut out);
    out.sort();
    out
}

/// Splits a monic product of distinct linear factors.
fn split_linear<R: Rng + ?Sized>(k: &FiniteField, g: &Poly, rng: &mut R, out: &mut Vec<Coeffs>) {
    match g.len() {
        0 | 1 => {}
        2 => out.push(k.neg(&g[0])),
        _ => {
            let half = (k.order() - 1) / 2;
            loop {
                let shift: Poly = vec![k.random(rng), k.one()];
                let t = psub(k, &ppowmod(k, &shift, half, g), &vec![k.one()]);
                let g1 = pgcd(k, g, &t);
                if g1.len() > 1 && g1.len() < g.len() {
                    let g2 = pdivrem(k, g, &g1).0;
                    split_linear(k, &g1, rng, out);
                    split_linear(k, &pmonic(k, &g2), rng, out);
                    return;
                }
            }
        }
    }
}

/// Ben-Or irreducibility test for a polynomial over the prime field.
pub(crate) fn is_irreducible_fp(p: u32, f: &[u32]) -> bool {
    let k = FiniteField::prime(p);
    let f: Poly = f.iter().map(|&c| k.constant(c)).collect();
    let d = f.len() - 1;
    if d == 0 {
        return false;
    }
    let x: Poly = vec![k.zero(), k.one()];
    let mut h = x.clone();
    for _ in 0..d / 2 {
        h = ppowmod(&k, &h, p as u128, &f);
        let g = pgcd(&k, &f, &psub(&k, &h, &x));
        if g.len() > 1 {
            return false;
        }
    }
    true
}
