//! Certificates that a matrix lies in the closure of k-th powers under the
//! mixed product.
//!
//! A certificate is a binary tree: a leaf `base` stands for base^k, a node
//! stands for eval(left)^k o eval(right). Construction goes through the
//! Jordan form; block sums and the final similarity are folded into the tree
//! so that checking a certificate needs only [`Certificate::eval`].

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Closure, ClosureElement};
use crate::matrix::{ExactMatrix, JordanBlock, MatrixJson};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Leaf { base: ExactMatrix },
    Node { left: Box<Certificate>, right: Box<Certificate> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CertificateJson {
    Leaf { base: MatrixJson },
    Node { left: Box<CertificateJson>, right: Box<CertificateJson> },
}

impl Certificate {
    fn node(left: Certificate, right: Certificate) -> Self {
        Certificate::Node {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn eval(&self, k: u64) -> Result<ExactMatrix> {
        match self {
            Certificate::Leaf { base } => base.pow(k),
            Certificate::Node { left, right } => left.eval(k)?.mixed_product(&right.eval(k)?, k),
        }
    }

    /// Number of mixed-product levels: 0 for a leaf.
    pub fn depth(&self) -> usize {
        match self {
            Certificate::Leaf { .. } => 0,
            Certificate::Node { left, right } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Certificate::Leaf { .. } => 1,
            Certificate::Node { left, right } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Certificate::Leaf { base } => base.n(),
            Certificate::Node { left, .. } => left.dim(),
        }
    }

    /// Certificate for S eval(self) S^{-1}.
    pub fn conjugate(&self, s: &ExactMatrix, s_inv: &ExactMatrix) -> Result<Certificate> {
        Ok(match self {
            Certificate::Leaf { base } => Certificate::Leaf {
                base: base.conjugate(s, s_inv)?,
            },
            Certificate::Node { left, right } => {
                Certificate::node(left.conjugate(s, s_inv)?, right.conjugate(s, s_inv)?)
            }
        })
    }

    /// Certificate for diag(eval(self), eval(other)).
    pub fn direct_sum(&self, other: &Certificate) -> Result<Certificate> {
        use Certificate::{Leaf, Node};
        Ok(match (self, other) {
            (Leaf { base: a }, Leaf { base: b }) => Leaf { base: a.direct_sum(b)? },
            (Node { left: l1, right: r1 }, Node { left: l2, right: r2 }) => {
                Certificate::node(l1.direct_sum(l2)?, r1.direct_sum(r2)?)
            }
            (Leaf { base }, Node { .. }) => padded(base).direct_sum(other)?,
            (Node { .. }, Leaf { base }) => self.direct_sum(&padded(base))?,
        })
    }

    pub fn to_json(&self) -> CertificateJson {
        match self {
            Certificate::Leaf { base } => CertificateJson::Leaf { base: base.to_json() },
            Certificate::Node { left, right } => CertificateJson::Node {
                left: Box::new(left.to_json()),
                right: Box::new(right.to_json()),
            },
        }
    }

    pub fn from_json(field: &Closure, j: &CertificateJson) -> Result<Certificate> {
        let cert = match j {
            CertificateJson::Leaf { base } => Certificate::Leaf {
                base: ExactMatrix::from_json(field, base)?,
            },
            CertificateJson::Node { left, right } => {
                let (l, r) = (Self::from_json(field, left)?, Self::from_json(field, right)?);
                if l.dim() != r.dim() {
                    return Err(Error::DimensionMismatch {
                        left: l.dim(),
                        right: r.dim(),
                    });
                }
                Certificate::node(l, r)
            }
        };
        Ok(cert)
    }
}

/// Leaf{A} as Node{Leaf{I}, Leaf{A}}: same value, one level deeper.
fn padded(base: &ExactMatrix) -> Certificate {
    Certificate::node(
        Certificate::Leaf {
            base: ExactMatrix::identity(base.field(), base.n()),
        },
        Certificate::Leaf { base: base.clone() },
    )
}

/// 2E_11 - E_13 + sum_{2<=j<=r-1} E_{j,j+1} (1-based, indices past r dropped).
pub fn aux_a(field: &Closure, r: usize) -> ExactMatrix {
    let mut a = ExactMatrix::zeros(field, r);
    a.set(0, 0, field.int(2));
    if r >= 3 {
        a.set(0, 2, field.int(-1));
    }
    for j in 1..r.saturating_sub(1) {
        a.set(j, j + 1, field.one());
    }
    a
}

/// I - E_11 + E_12.
pub fn aux_b(field: &Closure, r: usize) -> ExactMatrix {
    let mut b = ExactMatrix::identity(field, r);
    b.set(0, 0, field.zero());
    b.set(0, 1, field.one());
    b
}

/// J_r(1) + E_12 + E_23 - E_11 - E_22.
pub fn aux_c(field: &Closure, r: usize) -> ExactMatrix {
    let mut c = jordan_block(field, &field.one(), r);
    c.set(0, 0, field.zero());
    c.set(1, 1, field.zero());
    c.set(0, 1, field.int(2));
    if r >= 3 {
        c.set(1, 2, field.int(2));
    }
    c
}

/// I - E_22 + E_21.
pub fn aux_d(field: &Closure, r: usize) -> ExactMatrix {
    let mut d = ExactMatrix::identity(field, r);
    d.set(1, 1, field.zero());
    d.set(1, 0, field.one());
    d
}

pub fn jordan_block(field: &Closure, lambda: &ClosureElement, r: usize) -> ExactMatrix {
    let mut j = ExactMatrix::scalar(field, r, lambda);
    for i in 0..r.saturating_sub(1) {
        j.set(i, i + 1, field.one());
    }
    j
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum AuxKind {
    A,
    C,
}

type CacheKey = (u32, u32, AuxKind, usize, u64);

fn aux_cache() -> &'static Mutex<HashMap<CacheKey, Certificate>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Certificate>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

struct Certifier<'a> {
    field: &'a Closure,
    k: u64,
}

impl Certifier<'_> {
    fn matrix(&self, x: &ExactMatrix, expected: Option<&[JordanBlock]>) -> Result<Certificate> {
        let jd = x.jordan_form()?;
        if let Some(want) = expected {
            if jd.blocks != want {
                return Err(Error::NotDiagonalizableAuxiliary(format!(
                    "expected blocks {want:?}, found {:?}",
                    jd.blocks
                )));
            }
        }
        let mut acc: Option<Certificate> = None;
        for b in &jd.blocks {
            let c = self.block(&b.eigenvalue, b.size)?;
            acc = Some(match acc {
                None => c,
                Some(prev) => prev.direct_sum(&c)?,
            });
        }
        acc.expect("n >= 1").conjugate(&jd.s, &jd.s_inv)
    }

    fn aux(&self, kind: AuxKind, r: usize) -> Result<Certificate> {
        let key = (self.field.p(), self.field.tower_limit(), kind, r, self.k);
        if let Some(c) = aux_cache().lock().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let f = self.field;
        let block = |v: i64, size: usize| JordanBlock {
            eigenvalue: f.int(v),
            size,
        };
        let cert = match kind {
            AuxKind::A => self.matrix(&aux_a(f, r), Some(&[block(0, r - 1), block(2, 1)]))?,
            AuxKind::C if r == 2 => self.matrix(&aux_c(f, r), Some(&[block(0, 2)]))?,
            AuxKind::C => self.matrix(&aux_c(f, r), Some(&[block(0, 2), block(1, r - 2)]))?,
        };
        aux_cache().lock().unwrap().insert(key, cert.clone());
        Ok(cert)
    }

    fn block(&self, lambda: &ClosureElement, r: usize) -> Result<Certificate> {
        let f = self.field;
        if r == 1 {
            return Ok(Certificate::Leaf {
                base: ExactMatrix::scalar(f, 1, &f.min_kth_root(lambda, self.k)?),
            });
        }
        if lambda.is_zero() {
            let b = Certificate::Leaf { base: aux_b(f, r) };
            return Ok(Certificate::node(b, self.aux(AuxKind::A, r)?));
        }
        if lambda.is_one() {
            let d = Certificate::Leaf { base: aux_d(f, r) };
            return Ok(Certificate::node(d, self.aux(AuxKind::C, r)?));
        }
        // lambda J_r(1) = (mu I)^k o J_r(1) with mu^k = lambda; the left child
        // must evaluate to mu I, so its base is nu I with nu^k = mu.
        let mu = f.min_kth_root(lambda, self.k)?;
        let nu = f.min_kth_root(&mu, self.k)?;
        let scaled = Certificate::node(
            Certificate::Leaf {
                base: ExactMatrix::scalar(f, r, &nu),
            },
            self.block(&f.one(), r)?,
        );
        // diag(1, lambda, ..., lambda^{r-1}) takes lambda J_r(1) to J_r(lambda)
        let powers: Vec<ClosureElement> = (0..r as u64).map(|i| f.pow(lambda, i)).collect();
        let inv = powers.iter().map(|x| f.inv(x)).collect::<Result<Vec<_>>>()?;
        scaled.conjugate(&ExactMatrix::diag(f, &powers), &ExactMatrix::diag(f, &inv))
    }
}

/// A certificate whose evaluation is exactly `x`.
pub fn certify(x: &ExactMatrix, k: u64) -> Result<Certificate> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be positive".into()));
    }
    if x.is_identity() {
        return Ok(Certificate::Leaf { base: x.clone() });
    }
    Certifier { field: x.field(), k }.matrix(x, None)
}
