//! Dense n x n matrices over the closure of F_p.
//!
//! Operations pick the smallest level containing every entry involved, do the
//! arithmetic there, and normalize the entries of the result.

mod dense;
mod jordan;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub(crate) use dense::Dense;
pub use jordan::{JordanBlock, JordanDecomposition};

use crate::error::{Error, Result};
use crate::field::{Closure, ClosureElement, ElementJson, Level};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

#[derive(Clone)]
pub struct ExactMatrix {
    field: Closure,
    n: usize,
    data: Vec<ClosureElement>,
}

impl PartialEq for ExactMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.field.p() == other.field.p() && self.data == other.data
    }
}

impl Eq for ExactMatrix {}

impl Hash for ExactMatrix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// Matrix wire form: `{"p", "n", "entries", "tower"?}`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub p: u32,
    pub n: usize,
    pub entries: Vec<Vec<ElementJson>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tower: Vec<TowerEntry>,
}

/// Defining polynomial of F_{p^m} as used by the entries, low-to-high.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerEntry {
    pub m: u32,
    pub poly: Vec<u32>,
}

impl ExactMatrix {
    pub fn new(field: &Closure, n: usize, data: Vec<ClosureElement>) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidConfig(format!("dimension must be in 1..={MAX_DIM}, got {n}")));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        Ok(ExactMatrix {
            field: field.clone(),
            n,
            data,
        })
    }

    pub fn from_fn(field: &Closure, n: usize, f: impl FnMut(usize, usize) -> ClosureElement) -> Self {
        let mut f = f;
        let data = (0..n * n).map(|idx| f(idx / n, idx % n)).collect();
        ExactMatrix {
            field: field.clone(),
            n,
            data,
        }
    }

    pub fn zeros(field: &Closure, n: usize) -> Self {
        Self::from_fn(field, n, |_, _| field.zero())
    }

    pub fn identity(field: &Closure, n: usize) -> Self {
        Self::scalar(field, n, &field.one())
    }

    pub fn scalar(field: &Closure, n: usize, c: &ClosureElement) -> Self {
        Self::from_fn(field, n, |i, j| if i == j { c.clone() } else { field.zero() })
    }

    /// The matrix unit E_ij (0-based indices).
    pub fn unit(field: &Closure, n: usize, i: usize, j: usize) -> Self {
        Self::from_fn(field, n, |r, c| if (r, c) == (i, j) { field.one() } else { field.zero() })
    }

    pub fn diag(field: &Closure, d: &[ClosureElement]) -> Self {
        Self::from_fn(field, d.len(), |i, j| if i == j { d[i].clone() } else { field.zero() })
    }

    /// Rows of integers reduced mod p.
    pub fn from_ints(field: &Closure, rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("matrix rows must form a square".into()));
        }
        let data = rows.iter().flatten().map(|&v| field.int(v)).collect();
        Self::new(field, n, data)
    }

    pub fn random<R: Rng + ?Sized>(field: &Closure, n: usize, degree: u32, rng: &mut R) -> Result<Self> {
        let data = (0..n * n)
            .map(|_| field.random(rng, degree))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, n, data)
    }

    pub fn random_invertible<R: Rng + ?Sized>(field: &Closure, n: usize, degree: u32, rng: &mut R) -> Result<Self> {
        loop {
            let s = Self::random(field, n, degree, rng)?;
            if s.is_invertible()? {
                return Ok(s);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn field(&self) -> &Closure {
        &self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &ClosureElement {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ClosureElement) {
        self.data[i * self.n + j] = v;
    }

    pub fn with_entry(&self, i: usize, j: usize, v: ClosureElement) -> Self {
        let mut m = self.clone();
        m.set(i, j, v);
        m
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[ClosureElement] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(&self.field, self.n)
    }

    /// Largest entry degree dividing into the working level.
    pub fn max_degree(&self) -> u32 {
        self.data.iter().map(|c| c.degree()).max().unwrap_or(1)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field.p() != other.field.p() {
            return Err(Error::CharacteristicMismatch {
                left: self.field.p(),
                right: other.field.p(),
            });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.data.iter().map(|c| c.degree())
    }

    pub(crate) fn level(&self) -> Result<Arc<Level>> {
        self.field.common_level(self.degrees())
    }

    pub(crate) fn level_with(&self, other: &Self) -> Result<Arc<Level>> {
        self.field.common_level(self.degrees().chain(other.degrees()))
    }

    pub(crate) fn to_dense(&self, lvl: &Level) -> Dense {
        Dense {
            rows: self.n,
            cols: self.n,
            a: self.data.iter().map(|c| self.field.lift(c, lvl)).collect(),
        }
    }

    pub(crate) fn from_dense(field: &Closure, lvl: &Level, d: &Dense) -> Self {
        ExactMatrix {
            field: field.clone(),
            n: d.rows,
            data: d.a.iter().map(|c| field.lower(lvl, c)).collect(),
        }
    }

    pub fn map_entries(&self, f: impl Fn(&ClosureElement) -> Result<ClosureElement>) -> Result<Self> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(ExactMatrix {
            field: self.field.clone(),
            n: self.n,
            data,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.add(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactMatrix {
            field: self.field.clone(),
            n: self.n,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.sub(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactMatrix {
            field: self.field.clone(),
            n: self.n,
            data,
        })
    }

    pub fn neg(&self) -> Self {
        ExactMatrix {
            field: self.field.clone(),
            n: self.n,
            data: self.data.iter().map(|a| self.field.neg(a)).collect(),
        }
    }

    pub fn scale(&self, c: &ClosureElement) -> Result<Self> {
        self.map_entries(|a| self.field.mul(a, c))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let lvl = self.level_with(other)?;
        let k = &lvl.field;
        let prod = self.to_dense(&lvl).mul(k, &other.to_dense(&lvl));
        Ok(Self::from_dense(&self.field, &lvl, &prod))
    }

    pub fn pow(&self, e: u64) -> Result<Self> {
        let lvl = self.level()?;
        let r = self.to_dense(&lvl).pow(&lvl.field, e);
        Ok(Self::from_dense(&self.field, &lvl, &r))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| self.get(j, i).clone())
    }

    /// Entrywise a -> a^{p^e}.
    pub fn frobenius(&self, e: u64) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| self.field.frobenius(self.get(i, j), e))
    }

    /// A o B = (AB + BA)/2.
    pub fn jordan_product(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let lvl = self.level_with(other)?;
        let k = &lvl.field;
        let (a, b) = (self.to_dense(&lvl), other.to_dense(&lvl));
        Ok(Self::from_dense(&self.field, &lvl, &half_sum(k, &a.mul(k, &b), &b.mul(k, &a))))
    }

    /// A^k o B = (A^k B + B A^k)/2.
    pub fn mixed_product(&self, other: &Self, k: u64) -> Result<Self> {
        self.check(other)?;
        let lvl = self.level_with(other)?;
        let f = &lvl.field;
        let ak = self.to_dense(&lvl).pow(f, k);
        let b = other.to_dense(&lvl);
        Ok(Self::from_dense(&self.field, &lvl, &half_sum(f, &ak.mul(f, &b), &b.mul(f, &ak))))
    }

    pub fn rank(&self) -> Result<usize> {
        let lvl = self.level()?;
        Ok(self.to_dense(&lvl).rank(&lvl.field))
    }

    pub fn is_invertible(&self) -> Result<bool> {
        Ok(self.rank()? == self.n)
    }

    pub fn inverse(&self) -> Result<Self> {
        let lvl = self.level()?;
        let inv = self.to_dense(&lvl).inverse(&lvl.field).ok_or(Error::Singular)?;
        Ok(Self::from_dense(&self.field, &lvl, &inv))
    }

    /// S X S^{-1}.
    pub fn conjugate(&self, s: &Self, s_inv: &Self) -> Result<Self> {
        s.mul(self)?.mul(s_inv)
    }

    /// Nonzero positions (0-based).
    pub fn support(&self) -> BTreeSet<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|&idx| !self.data[idx].is_zero())
            .map(|idx| (idx / self.n, idx % self.n))
            .collect()
    }

    /// diag(self, other).
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.p() != other.p() {
            return Err(Error::CharacteristicMismatch {
                left: self.p(),
                right: other.p(),
            });
        }
        let (a, n) = (self.n, self.n + other.n);
        Ok(Self::from_fn(&self.field, n, |i, j| {
            if i < a && j < a {
                self.get(i, j).clone()
            } else if i >= a && j >= a {
                other.get(i - a, j - a).clone()
            } else {
                self.field.zero()
            }
        }))
    }

    /// diag(self, 0) of size n.
    pub fn pad_to(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::DimensionMismatch { left: n, right: self.n });
        }
        Ok(Self::from_fn(&self.field, n, |i, j| {
            if i < self.n && j < self.n {
                self.get(i, j).clone()
            } else {
                self.field.zero()
            }
        }))
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            p: self.p(),
            n: self.n,
            entries: (0..self.n)
                .map(|i| (0..self.n).map(|j| self.field.element_to_json(self.get(i, j))).collect())
                .collect(),
            tower: self
                .field
                .tower_header(self.degrees())
                .expect("entries already live in the tower")
                .into_iter()
                .map(|(m, poly)| TowerEntry { m, poly })
                .collect(),
        }
    }

    pub fn from_json(field: &Closure, j: &MatrixJson) -> Result<Self> {
        if j.p != field.p() {
            return Err(Error::CharacteristicMismatch {
                left: field.p(),
                right: j.p,
            });
        }
        if j.entries.len() != j.n || j.entries.iter().any(|r| r.len() != j.n) {
            return Err(Error::Parse(format!("entries do not form a {0}x{0} grid", j.n)));
        }
        let header: BTreeMap<u32, Vec<u32>> = j.tower.iter().map(|t| (t.m, t.poly.clone())).collect();
        field.check_tower_header(&header)?;
        let data = j
            .entries
            .iter()
            .flatten()
            .map(|e| field.element_from_json(e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, j.n, data)
    }
}

fn half_sum(k: &crate::field::FiniteField, x: &Dense, y: &Dense) -> Dense {
    let half = k.constant(k.p().div_ceil(2));
    Dense {
        rows: x.rows,
        cols: x.cols,
        a: x.a.iter().zip(&y.a).map(|(a, b)| k.mul(&k.add(a, b), &half)).collect(),
    }
}

/// Whether S (off-diagonal, 0-based) satisfies the three closure hypotheses:
/// for each (i,j) in S, the rest of row i, the rest of column j, and (j,i)
/// all lie in S.
pub fn support_closure_check(s: &BTreeSet<(usize, usize)>, n: usize) -> bool {
    s.iter().all(|&(i, j)| {
        (0..n).filter(|&k| k != i).all(|k| s.contains(&(i, k)))
            && (0..n).filter(|&l| l != j).all(|l| s.contains(&(l, j)))
            && s.contains(&(j, i))
    })
}

/// All off-diagonal positions of an n x n matrix.
pub fn off_diagonal(n: usize) -> BTreeSet<(usize, usize)> {
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(p: u32, rows: &[Vec<i64>]) -> ExactMatrix {
        ExactMatrix::from_ints(&Closure::prime(p).unwrap(), rows).unwrap()
    }

    #[test]
    fn jordan_product_examples() {
        let k = Closure::prime(3).unwrap();
        let e11 = ExactMatrix::unit(&k, 2, 0, 0);
        let e12 = ExactMatrix::unit(&k, 2, 0, 1);
        assert_eq!(e11.jordan_product(&e12).unwrap(), e12.scale(&k.int(2)).unwrap());
        let i = ExactMatrix::identity(&k, 2);
        let b = m(3, &[vec![1, 2], vec![0, 1]]);
        assert_eq!(i.jordan_product(&b).unwrap(), b);
        assert_eq!(b.jordan_product(&b).unwrap(), b.pow(2).unwrap());
        assert_eq!(i.mixed_product(&b, 5).unwrap(), b);
        assert!(ExactMatrix::zeros(&k, 2).mixed_product(&b, 3).unwrap().is_zero());
        let bad = ExactMatrix::identity(&k, 3);
        assert!(matches!(i.jordan_product(&bad), Err(Error::DimensionMismatch { .. })));
        let other = ExactMatrix::identity(&Closure::prime(5).unwrap(), 2);
        assert!(matches!(i.mul(&other), Err(Error::CharacteristicMismatch { .. })));
    }

    #[test]
    fn off_diagonal_extraction() {
        // (X o E_ii^k) o E_jj^k = (x_ij E_ij + x_ji E_ji)/4 for random X in M_3(F_5)
        let k = Closure::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = ExactMatrix::random(&k, 3, 1, &mut rng).unwrap();
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                let ei = ExactMatrix::unit(&k, 3, i, i);
                let ej = ExactMatrix::unit(&k, 3, j, j);
                let lhs = ej.mixed_product(&ei.mixed_product(&x, 2).unwrap(), 2).unwrap();
                let quarter = k.inv(&k.int(4)).unwrap();
                let rhs = ExactMatrix::zeros(&k, 3)
                    .with_entry(i, j, k.mul(x.get(i, j), &quarter).unwrap())
                    .with_entry(j, i, k.mul(x.get(j, i), &quarter).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn rank_and_support_examples() {
        let k = Closure::prime(3).unwrap();
        assert_eq!(ExactMatrix::zeros(&k, 3).rank().unwrap(), 0);
        assert_eq!(ExactMatrix::identity(&k, 4).rank().unwrap(), 4);
        assert_eq!(m(3, &[vec![1, 1], vec![0, 1]]).rank().unwrap(), 2);
        assert!(ExactMatrix::zeros(&k, 2).support().is_empty());
        assert_eq!(ExactMatrix::unit(&k, 2, 0, 1).support(), BTreeSet::from([(0, 1)]));
        assert_eq!(m(3, &[vec![1, 0], vec![2, 0]]).support(), BTreeSet::from([(0, 0), (1, 0)]));
    }

    #[test]
    fn support_closure_examples() {
        assert!(support_closure_check(&BTreeSet::new(), 3));
        assert!(!support_closure_check(&BTreeSet::from([(0, 1)]), 2));
        assert!(support_closure_check(&off_diagonal(3), 3));
    }

    #[test]
    fn inverse_and_extension_entries() {
        let k = Closure::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = ExactMatrix::random_invertible(&k, 3, 2, &mut rng).unwrap();
        let si = s.inverse().unwrap();
        assert!(s.mul(&si).unwrap().is_identity());
        assert!(matches!(ExactMatrix::zeros(&k, 2).inverse(), Err(Error::Singular)));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let k = Closure::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = ExactMatrix::random(&k, 3, 4, &mut rng).unwrap();
        let text = serde_json::to_string(&x.to_json()).unwrap();
        let back = ExactMatrix::from_json(&k, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, x);
        assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), text);
        let wrong = Closure::prime(5).unwrap();
        assert!(ExactMatrix::from_json(&wrong, &x.to_json()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mixed_with_k1_is_jordan(p in prop::sample::select(vec![3u32, 5]), n in 1usize..4, seed in any::<u64>()) {
            let k = Closure::prime(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ExactMatrix::random(&k, n, 2, &mut rng).unwrap();
            let b = ExactMatrix::random(&k, n, 1, &mut rng).unwrap();
            prop_assert_eq!(a.mixed_product(&b, 1).unwrap(), a.jordan_product(&b).unwrap());
            prop_assert_eq!(a.jordan_product(&b).unwrap(), b.jordan_product(&a).unwrap());
        }

        #[test]
        fn similarity_covariance_and_rank(p in prop::sample::select(vec![3u32, 5]), n in 1usize..4, kk in 1u64..4, seed in any::<u64>()) {
            let k = Closure::prime(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ExactMatrix::random(&k, n, 1, &mut rng).unwrap();
            let b = ExactMatrix::random(&k, n, 2, &mut rng).unwrap();
            let s = ExactMatrix::random_invertible(&k, n, 2, &mut rng).unwrap();
            let si = s.inverse().unwrap();
            let lhs = a.mixed_product(&b, kk).unwrap().conjugate(&s, &si).unwrap();
            let rhs = a.conjugate(&s, &si).unwrap().mixed_product(&b.conjugate(&s, &si).unwrap(), kk).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.rank().unwrap(), a.conjugate(&s, &si).unwrap().rank().unwrap());
        }
    }
}
