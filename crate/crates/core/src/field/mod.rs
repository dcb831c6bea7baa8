//! Exact arithmetic in the algebraic closure of F_p.
//!
//! Every [`ClosureElement`] is stored in the smallest subfield F_{p^m} that
//! contains it; binary operations lift both operands into the field of degree
//! lcm(m, m'), compute there, and normalize the result back down.

mod gf;
mod roots;
mod tower;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use gf::{Coeffs, FiniteField};
pub(crate) use gf::{addmod, mulmod, submod};
pub(crate) use tower::{lcm, Level};
use tower::Tower;

use crate::error::{Error, Result};

pub const DEFAULT_TOWER_LIMIT: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub p: u32,
    pub tower_limit: u32,
}

impl FieldConfig {
    pub fn new(p: u32) -> Self {
        FieldConfig {
            p,
            tower_limit: DEFAULT_TOWER_LIMIT,
        }
    }

    pub fn with_tower_limit(mut self, limit: u32) -> Self {
        self.tower_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        if p < 3 {
            return Err(Error::InvalidConfig(format!(
                "characteristic must be an odd prime, got {p}"
            )));
        }
        if p >= 1 << 31 || !(2..).take_while(|q: &u32| q * q <= p).all(|q| p % q != 0) {
            return Err(Error::InvalidConfig(format!(
                "characteristic must be a prime below 2^31, got {p}"
            )));
        }
        if self.tower_limit == 0 {
            return Err(Error::InvalidConfig("tower_limit must be at least 1".into()));
        }
        if (p as u128).checked_pow(self.tower_limit).is_none() {
            return Err(Error::InvalidConfig(format!(
                "p^tower_limit must fit in 128 bits ({p}^{})",
                self.tower_limit
            )));
        }
        Ok(())
    }
}

/// An element of the closure, held in its minimal subfield.
///
/// The derived order compares degree first, then coordinates
/// lexicographically; it is the fixed total order used for every
/// deterministic choice among roots.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosureElement {
    degree: u32,
    coeffs: Coeffs,
}

impl ClosureElement {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.degree == 1 && self.coeffs[0] == 0
    }

    pub fn is_one(&self) -> bool {
        self.degree == 1 && self.coeffs[0] == 1
    }

    /// The residue, if this element lies in the prime field.
    pub fn as_prime(&self) -> Option<u32> {
        (self.degree == 1).then(|| self.coeffs[0])
    }

    /// The element's own coordinates viewed as a level vector.
    pub fn to_level(&self) -> LevelElement {
        LevelElement {
            degree: self.degree,
            coeffs: self.coeffs.clone(),
        }
    }

    fn prime(c: u32) -> Self {
        ClosureElement {
            degree: 1,
            coeffs: smallvec::smallvec![c],
        }
    }
}

impl fmt::Debug for ClosureElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ClosureElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 1 {
            write!(f, "{}", self.coeffs[0])
        } else {
            write!(f, "{:?}@{}", self.coeffs.as_slice(), self.degree)
        }
    }
}

/// Coordinates of an element in a chosen level F_{p^degree}, not necessarily
/// its minimal one. Produced by [`Closure::embed`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelElement {
    pub degree: u32,
    pub coeffs: Coeffs,
}

/// Wire form of an element: `{"m": degree, "c": [residues]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub m: u32,
    pub c: Vec<u32>,
}

/// Handle on the closure of F_p with a cap on extension degree.
#[derive(Clone)]
pub struct Closure {
    tower: Arc<Tower>,
    limit: u32,
}

impl fmt::Debug for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Closure(p={}, limit={})", self.p(), self.limit)
    }
}

impl PartialEq for Closure {
    fn eq(&self, other: &Self) -> bool {
        self.p() == other.p()
    }
}

impl Closure {
    pub fn new(cfg: FieldConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Closure {
            tower: Tower::shared(cfg.p),
            limit: cfg.tower_limit,
        })
    }

    /// Closure of F_p with the default tower limit.
    pub fn prime(p: u32) -> Result<Self> {
        Closure::new(FieldConfig::new(p))
    }

    pub fn p(&self) -> u32 {
        self.tower.p()
    }

    pub fn tower_limit(&self) -> u32 {
        self.limit
    }

    pub fn config(&self) -> FieldConfig {
        FieldConfig {
            p: self.p(),
            tower_limit: self.limit,
        }
    }

    pub fn zero(&self) -> ClosureElement {
        ClosureElement::prime(0)
    }

    pub fn one(&self) -> ClosureElement {
        ClosureElement::prime(1)
    }

    /// The image of an integer in the prime field.
    pub fn int(&self, v: i64) -> ClosureElement {
        ClosureElement::prime(v.rem_euclid(self.p() as i64) as u32)
    }

    /// 1/2, defined since p is odd.
    pub fn half(&self) -> ClosureElement {
        ClosureElement::prime(self.p().div_ceil(2))
    }

    pub(crate) fn level(&self, m: u32) -> Result<Arc<Level>> {
        if m > self.limit {
            return Err(Error::TowerLimitExceeded {
                needed: m,
                limit: self.limit,
            });
        }
        Ok(self.tower.level(m))
    }

    /// The level containing every element of the given degrees.
    pub(crate) fn common_level<I: IntoIterator<Item = u32>>(&self, degrees: I) -> Result<Arc<Level>> {
        let mut l: u64 = 1;
        for d in degrees {
            l = lcm(l.min(u32::MAX as u64) as u32, d);
            if l > self.limit as u64 {
                return Err(Error::TowerLimitExceeded {
                    needed: l.min(u32::MAX as u64) as u32,
                    limit: self.limit,
                });
            }
        }
        self.level(l as u32)
    }

    /// Coordinates of `a` in `lvl`; `a.degree` must divide the level degree.
    pub(crate) fn lift(&self, a: &ClosureElement, lvl: &Level) -> Coeffs {
        if a.degree == lvl.degree {
            a.coeffs.clone()
        } else if a.degree == 1 {
            lvl.field.constant(a.coeffs[0])
        } else {
            lvl.embeds[&a.degree].apply(self.p(), &a.coeffs)
        }
    }

    /// Normalizes level coordinates to the minimal subfield.
    pub(crate) fn lower(&self, lvl: &Level, v: &[u32]) -> ClosureElement {
        if v[1..].iter().all(|&c| c == 0) {
            return ClosureElement::prime(v[0]);
        }
        for &d in &lvl.maximal {
            if let Some(c) = lvl.embeds[&d].project(self.p(), v) {
                let sub = self.tower.level(d);
                return self.lower(&sub, &c);
            }
        }
        ClosureElement {
            degree: lvl.degree,
            coeffs: v.into(),
        }
    }

    pub fn from_coeffs(&self, degree: u32, coeffs: &[u32]) -> Result<ClosureElement> {
        if degree == 0 || coeffs.len() != degree as usize {
            return Err(Error::Parse(format!(
                "element of degree {degree} needs {degree} coordinates, got {}",
                coeffs.len()
            )));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= self.p()) {
            return Err(Error::Parse(format!("residue {c} out of range for p={}", self.p())));
        }
        let lvl = self.level(degree)?;
        Ok(self.lower(&lvl, coeffs))
    }

    pub fn normalize(&self, a: &LevelElement) -> Result<ClosureElement> {
        self.from_coeffs(a.degree, &a.coeffs)
    }

    /// The image of `a` in F_{p^m}; `degree(a)` must divide m.
    pub fn embed(&self, a: &ClosureElement, m: u32) -> Result<LevelElement> {
        if m == 0 || m % a.degree != 0 {
            return Err(Error::InvalidConfig(format!(
                "degree {} does not divide {m}",
                a.degree
            )));
        }
        let lvl = self.level(m)?;
        Ok(LevelElement {
            degree: m,
            coeffs: self.lift(a, &lvl),
        })
    }

    /// The field F_{p^m} as presented in the tower.
    pub fn subfield(&self, m: u32) -> Result<FiniteField> {
        Ok(self.level(m)?.field.clone())
    }

    /// Defining polynomial of F_{p^m}, low-to-high, monic.
    pub fn defining_polynomial(&self, m: u32) -> Result<Vec<u32>> {
        Ok(self.level(m)?.field.modulus().to_vec())
    }

    /// The class of x in F_{p^m}; it generates F_{p^m} over F_p.
    pub fn generator(&self, m: u32) -> Result<ClosureElement> {
        let lvl = self.level(m)?;
        Ok(self.lower(&lvl, &lvl.field.gen()))
    }

    fn binary(
        &self,
        a: &ClosureElement,
        b: &ClosureElement,
        op: impl Fn(&FiniteField, &[u32], &[u32]) -> Coeffs,
    ) -> Result<ClosureElement> {
        let lvl = self.common_level([a.degree, b.degree])?;
        let r = op(&lvl.field, &self.lift(a, &lvl), &self.lift(b, &lvl));
        Ok(self.lower(&lvl, &r))
    }

    pub fn add(&self, a: &ClosureElement, b: &ClosureElement) -> Result<ClosureElement> {
        if a.degree == 1 && b.degree == 1 {
            return Ok(ClosureElement::prime(addmod(a.coeffs[0], b.coeffs[0], self.p())));
        }
        if a.is_zero() {
            return Ok(b.clone());
        }
        if b.is_zero() {
            return Ok(a.clone());
        }
        self.binary(a, b, |k, x, y| k.add(x, y))
    }

    pub fn sub(&self, a: &ClosureElement, b: &ClosureElement) -> Result<ClosureElement> {
        if a.degree == 1 && b.degree == 1 {
            return Ok(ClosureElement::prime(submod(a.coeffs[0], b.coeffs[0], self.p())));
        }
        self.binary(a, b, |k, x, y| k.sub(x, y))
    }

    pub fn mul(&self, a: &ClosureElement, b: &ClosureElement) -> Result<ClosureElement> {
        if a.degree == 1 && b.degree == 1 {
            return Ok(ClosureElement::prime(mulmod(a.coeffs[0], b.coeffs[0], self.p())));
        }
        if a.is_zero() || b.is_zero() {
            return Ok(self.zero());
        }
        if a.is_one() {
            return Ok(b.clone());
        }
        if b.is_one() {
            return Ok(a.clone());
        }
        self.binary(a, b, |k, x, y| k.mul(x, y))
    }

    pub fn neg(&self, a: &ClosureElement) -> ClosureElement {
        ClosureElement {
            degree: a.degree,
            coeffs: a.coeffs.iter().map(|&c| submod(0, c, self.p())).collect(),
        }
    }

    pub fn inv(&self, a: &ClosureElement) -> Result<ClosureElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let lvl = self.level(a.degree)?;
        let r = lvl.field.inv(&a.coeffs).ok_or(Error::DivisionByZero)?;
        Ok(ClosureElement {
            degree: a.degree,
            coeffs: r,
        })
    }

    pub fn div(&self, a: &ClosureElement, b: &ClosureElement) -> Result<ClosureElement> {
        self.mul(a, &self.inv(b)?)
    }

    pub fn pow(&self, a: &ClosureElement, e: u64) -> ClosureElement {
        let lvl = self.tower.level(a.degree);
        let r = lvl.field.pow(&a.coeffs, e as u128);
        self.lower(&lvl, &r)
    }

    /// a^{p^e}.
    pub fn frobenius(&self, a: &ClosureElement, e: u64) -> ClosureElement {
        let e = e % a.degree as u64;
        if e == 0 {
            return a.clone();
        }
        let lvl = self.tower.level(a.degree);
        let mut v = a.coeffs.clone();
        for _ in 0..e {
            v = lvl.field.frob(&v);
        }
        ClosureElement {
            degree: a.degree,
            coeffs: v,
        }
    }

    /// Uniform element of F_{p^m}, normalized (it may land in a subfield).
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R, m: u32) -> Result<ClosureElement> {
        let lvl = self.level(m)?;
        let v = lvl.field.random(rng);
        Ok(self.lower(&lvl, &v))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R, m: u32) -> Result<ClosureElement> {
        let lvl = self.level(m)?;
        let v = lvl.field.random_nonzero(rng);
        Ok(self.lower(&lvl, &v))
    }

    pub fn element_to_json(&self, a: &ClosureElement) -> ElementJson {
        ElementJson {
            m: a.degree,
            c: a.coeffs.to_vec(),
        }
    }

    pub fn element_from_json(&self, j: &ElementJson) -> Result<ClosureElement> {
        self.from_coeffs(j.m, &j.c)
    }

    /// Defining polynomials for the non-prime degrees in `degrees`.
    pub fn tower_header<I: IntoIterator<Item = u32>>(&self, degrees: I) -> Result<BTreeMap<u32, Vec<u32>>> {
        let mut out = BTreeMap::new();
        for d in degrees {
            if d > 1 && !out.contains_key(&d) {
                out.insert(d, self.defining_polynomial(d)?);
            }
        }
        Ok(out)
    }

    /// Rejects a header whose polynomials differ from this tower's.
    pub fn check_tower_header(&self, header: &BTreeMap<u32, Vec<u32>>) -> Result<()> {
        for (&d, poly) in header {
            if d == 0 {
                return Err(Error::Parse("tower header has degree 0".into()));
            }
            if self.defining_polynomial(d)? != *poly {
                return Err(Error::Parse(format!(
                    "defining polynomial for degree {d} does not match this tower"
                )));
            }
        }
        Ok(())
    }
}
