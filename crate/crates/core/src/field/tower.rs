//! A lazily built compatible tower of finite fields F_{p^m}.
//!
//! Writing x_m for the class of x in F_p[x]/(f_m), the defining polynomials
//! are chosen so that x_m^{(p^m-1)/(p^d-1)} is a root of f_d for every
//! divisor d of m. The embedding F_{p^d} -> F_{p^m} sends x_d to that power,
//! and because these exponents multiply along chains d | d' | m the
//! embeddings compose without further bookkeeping. The polynomials alone
//! therefore pin down every embedding.
//!
//! f_m is found inside an auxiliary presentation F_p[t]/(h) (h the least
//! irreducible of degree m): pick a root r_i of f_{d_i} for every maximal
//! proper divisor d_i, then solve y^{N(m,d_i)} = r_i. A seeded generator
//! makes the choice reproducible.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gf::{
    distinct_roots, inv_mod, is_irreducible_fp, mulmod, peval, plinear, pmul, pow_mod, submod,
    Coeffs, FiniteField, Poly,
};

pub(crate) fn divisors(m: u32) -> Vec<u32> {
    (1..=m).filter(|d| m % d == 0).collect()
}

pub(crate) fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            out.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

pub(crate) fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    gcd_u128(a as u128, b as u128) as u32
}

pub(crate) fn lcm(a: u32, b: u32) -> u64 {
    a as u64 / gcd(a, b) as u64 * b as u64
}

fn least_primitive_root(p: u32) -> u32 {
    let qs = prime_factors((p - 1) as u64);
    (1..p)
        .find(|&g| qs.iter().all(|&q| pow_mod(g, ((p - 1) as u64 / q) as u128, p) != 1))
        .expect("prime modulus has a primitive root")
}

fn least_irreducible(p: u32, m: u32) -> Vec<u32> {
    let total = (p as u128).pow(m);
    for code in 1..total {
        if code % p as u128 == 0 {
            continue;
        }
        let mut f = Vec::with_capacity(m as usize + 1);
        let mut c = code;
        for _ in 0..m {
            f.push((c % p as u128) as u32);
            c /= p as u128;
        }
        f.push(1);
        if is_irreducible_fp(p, &f) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// The embedding of a subfield F_{p^e} into a level F_{p^m}.
#[derive(Debug)]
pub(crate) struct Embedding {
    /// Images of the subfield basis 1, x_e, ..., x_e^{e-1}.
    image: Vec<Coeffs>,
    /// Left inverse of the image matrix (e rows of length m).
    proj: Vec<Vec<u32>>,
}

impl Embedding {
    fn new(p: u32, image: Vec<Coeffs>) -> Self {
        let e = image.len();
        let m = image[0].len();
        // Row-reduce [M | I_m] where M is m x e with the images as columns.
        let mut rows: Vec<Vec<u32>> = (0..m)
            .map(|r| {
                let mut row: Vec<u32> = image.iter().map(|col| col[r]).collect();
                row.extend((0..m).map(|c| u32::from(c == r)));
                row
            })
            .collect();
        let mut pivot_row = 0;
        for col in 0..e {
            let pr = (pivot_row..m)
                .find(|&r| rows[r][col] != 0)
                .expect("embedding images are linearly independent");
            rows.swap(pivot_row, pr);
            let inv = inv_mod(rows[pivot_row][col], p).unwrap();
            for v in rows[pivot_row].iter_mut() {
                *v = mulmod(*v, inv, p);
            }
            for r in 0..m {
                if r != pivot_row && rows[r][col] != 0 {
                    let f = rows[r][col];
                    for c in 0..e + m {
                        let t = mulmod(f, rows[pivot_row][c], p);
                        rows[r][c] = submod(rows[r][c], t, p);
                    }
                }
            }
            pivot_row += 1;
        }
        let proj = rows[..e].iter().map(|row| row[e..].to_vec()).collect();
        Embedding { image, proj }
    }

    pub(crate) fn apply(&self, p: u32, v: &[u32]) -> Coeffs {
        let m = self.image[0].len();
        let mut out: Coeffs = smallvec::smallvec![0; m];
        for (c, img) in v.iter().zip(&self.image) {
            if *c == 0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(img.iter()) {
                *o = ((*o as u64 + *c as u64 * *x as u64) % p as u64) as u32;
            }
        }
        out
    }

    /// Preimage of `w`, if `w` lies in the subfield.
    pub(crate) fn project(&self, p: u32, w: &[u32]) -> Option<Coeffs> {
        let c: Coeffs = self
            .proj
            .iter()
            .map(|row| {
                row.iter()
                    .zip(w)
                    .fold(0u64, |acc, (a, b)| (acc + *a as u64 * *b as u64) % p as u64)
                    as u32
            })
            .collect();
        if self.apply(p, &c).as_slice() == w {
            Some(c)
        } else {
            None
        }
    }
}

#[derive(Debug)]
pub(crate) struct Level {
    pub(crate) degree: u32,
    pub(crate) field: FiniteField,
    /// Maximal proper divisors, largest first.
    pub(crate) maximal: Vec<u32>,
    /// Embeddings of every proper subfield.
    pub(crate) embeds: BTreeMap<u32, Embedding>,
}

#[derive(Debug)]
pub(crate) struct Tower {
    p: u32,
    levels: RwLock<Vec<Option<Arc<Level>>>>,
}

impl Tower {
    /// The process-wide tower for characteristic p.
    pub(crate) fn shared(p: u32) -> Arc<Tower> {
        static TOWERS: OnceLock<Mutex<HashMap<u32, Arc<Tower>>>> = OnceLock::new();
        let mut map = TOWERS.get_or_init(Default::default).lock().unwrap();
        map.entry(p)
            .or_insert_with(|| {
                Arc::new(Tower {
                    p,
                    levels: RwLock::new(Vec::new()),
                })
            })
            .clone()
    }

    pub(crate) fn p(&self) -> u32 {
        self.p
    }

    pub(crate) fn level(&self, m: u32) -> Arc<Level> {
        if let Some(Some(l)) = self.levels.read().unwrap().get(m as usize) {
            return l.clone();
        }
        let mut guard = self.levels.write().unwrap();
        self.install(&mut guard, m)
    }

    fn install(&self, levels: &mut Vec<Option<Arc<Level>>>, m: u32) -> Arc<Level> {
        if let Some(Some(l)) = levels.get(m as usize) {
            return l.clone();
        }
        let mut lower = BTreeMap::new();
        for e in divisors(m) {
            if e < m {
                lower.insert(e, self.install(levels, e));
            }
        }
        let level = Arc::new(build_level(self.p, m, &lower));
        if levels.len() <= m as usize {
            levels.resize(m as usize + 1, None);
        }
        levels[m as usize] = Some(level.clone());
        level
    }
}

/// (p^m - 1) / (p^d - 1).
fn norm_exponent(p: u32, m: u32, d: u32) -> u128 {
    ((p as u128).pow(m) - 1) / ((p as u128).pow(d) - 1)
}

fn lift_poly(r: &FiniteField, f: &[u32]) -> Poly {
    f.iter().map(|&c| r.constant(c)).collect()
}

fn build_level(p: u32, m: u32, lower: &BTreeMap<u32, Arc<Level>>) -> Level {
    if m == 1 {
        let g = least_primitive_root(p);
        return Level {
            degree: 1,
            field: FiniteField::new(p, vec![submod(0, g, p), 1]),
            maximal: Vec::new(),
            embeds: BTreeMap::new(),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_7043 ^ ((p as u64) << 24) ^ m as u64);
    let aux = FiniteField::new(p, least_irreducible(p, m));
    let maximal: Vec<u32> = prime_factors(m as u64).iter().map(|&q| m / q as u32).collect();

    // Roots r_i of f_{d_i}, chosen so their norms agree on common subfields.
    let mut targets: Vec<Coeffs> = Vec::new();
    for (i, &d) in maximal.iter().enumerate() {
        let f = lift_poly(&aux, lower[&d].field.modulus());
        let roots = distinct_roots(&aux, &f, &mut rng);
        let r = roots
            .into_iter()
            .find(|r| {
                (0..i).all(|j| {
                    let g = gcd(d, maximal[j]);
                    aux.pow(r, norm_exponent(p, d, g))
                        == aux.pow(&targets[j], norm_exponent(p, maximal[j], g))
                })
            })
            .expect("compatible root exists");
        targets.push(r);
    }

    let order = (p as u128).pow(m) - 1;
    let norms: Vec<u128> = maximal.iter().map(|&d| norm_exponent(p, m, d)).collect();
    let mut y = norm_preimage(&aux, m, maximal[0], &targets[0], &mut rng);
    for i in 1..maximal.len() {
        let g = norms[..i].iter().fold(0, |a, &b| gcd_u128(a, b));
        let kernel_exp = order / g;
        let t = aux.mul(&targets[i], &aux.inv(&aux.pow(&y, norms[i])).unwrap());
        loop {
            let w = aux.pow(&aux.random_nonzero(&mut rng), kernel_exp);
            if aux.pow(&w, norms[i]) == t {
                y = aux.mul(&y, &w);
                break;
            }
        }
    }
    let all_kernel = order / norms.iter().fold(0, |a, &b| gcd_u128(a, b));
    while maximal
        .iter()
        .any(|&d| aux.pow(&y, (p as u128).pow(d)) == y)
    {
        let w = aux.pow(&aux.random_nonzero(&mut rng), all_kernel);
        y = aux.mul(&y, &w);
    }

    // Minimal polynomial of y: product over its Frobenius orbit.
    let mut minpoly: Poly = vec![aux.one()];
    let mut conj = y.clone();
    for _ in 0..m {
        minpoly = pmul(&aux, &minpoly, &plinear(&aux, &conj));
        conj = aux.frob(&conj);
    }
    let modulus: Vec<u32> = minpoly
        .iter()
        .map(|c| {
            assert!(c[1..].iter().all(|&x| x == 0), "minimal polynomial has prime-field coefficients");
            c[0]
        })
        .collect();
    let field = FiniteField::new(p, modulus);

    let mut embeds = BTreeMap::new();
    for (&e, sub) in lower {
        let gamma = field.pow(&field.gen(), norm_exponent(p, m, e));
        let fe = lift_poly(&field, sub.field.modulus());
        assert!(field.is_zero(&peval(&field, &fe, &gamma)), "tower compatibility");
        let mut image = Vec::with_capacity(e as usize);
        let mut pw = field.one();
        for _ in 0..e {
            image.push(pw.clone());
            pw = field.mul(&pw, &gamma);
        }
        embeds.insert(e, Embedding::new(p, image));
    }
    Level {
        degree: m,
        field,
        maximal,
        embeds,
    }
}

/// Some y with y^{N(m,d)} = r, for d = m/q with q prime.
fn norm_preimage(aux: &FiniteField, m: u32, d: u32, r: &[u32], rng: &mut ChaCha8Rng) -> Coeffs {
    let p = aux.p();
    let q = m / d;
    let n = norm_exponent(p, m, d);
    let sub_order = (p as u128).pow(d);
    loop {
        let z = aux.random_nonzero(rng);
        let s = aux.pow(&z, n);
        let a = aux.mul(r, &aux.inv(&s).unwrap());
        let mut f: Poly = vec![aux.neg(&a)];
        f.extend((1..q).map(|_| aux.zero()));
        f.push(aux.one());
        for c in distinct_roots(aux, &f, rng) {
            if aux.pow(&c, sub_order) == c {
                return aux.mul(&z, &c);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_one_uses_least_primitive_root() {
        assert_eq!(least_primitive_root(3), 2);
        assert_eq!(least_primitive_root(5), 2);
        assert_eq!(least_primitive_root(7), 3);
        let t = Tower::shared(7);
        assert_eq!(t.level(1).field.modulus(), &[4, 1]);
    }

    #[test]
    fn defining_polynomials_are_irreducible_and_norm_compatible() {
        for p in [3u32, 5] {
            let t = Tower::shared(p);
            for m in [2u32, 3, 4, 6, 8, 12] {
                let lvl = t.level(m);
                assert!(is_irreducible_fp(p, lvl.field.modulus()));
                // the norm of x_m to F_p is the prime-field generator
                let g = t.level(1).field.gen();
                let nm = lvl.field.pow(&lvl.field.gen(), norm_exponent(p, m, 1));
                assert_eq!(nm[0], g[0]);
                assert!(nm[1..].iter().all(|&c| c == 0));
            }
        }
    }

    #[test]
    fn embeddings_compose() {
        use rand::SeedableRng;
        let p = 3;
        let t = Tower::shared(p);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (e, d, m) in [(1u32, 2u32, 4u32), (2, 4, 8), (1, 3, 6), (2, 6, 12), (3, 6, 12)] {
            let lm = t.level(m);
            let ld = t.level(d);
            let le = t.level(e);
            for _ in 0..20 {
                let a = le.field.random(&mut rng);
                let via = lm.embeds[&d].apply(p, &ld.embeds[&e].apply(p, &a));
                let direct = lm.embeds[&e].apply(p, &a);
                assert_eq!(via, direct);
            }
        }
    }
}
