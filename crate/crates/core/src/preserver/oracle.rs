//! Black-box maps and their JSON descriptions.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{MapForm, StructuredMap};
use crate::error::{Error, Result};
use crate::field::{Closure, ElementJson};
use crate::matrix::{ExactMatrix, MatrixJson};

/// A map described compositionally. `of` defaults to the identity, so
/// `{"type":"shift","add":M}` is X -> X + M.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapSpec {
    #[default]
    Identity,
    Transpose,
    Canonical {
        epsilon: ElementJson,
        #[serde(rename = "T")]
        t: MatrixJson,
        e: u64,
        transpose: bool,
    },
    Constant {
        value: MatrixJson,
    },
    /// phi(X)^exponent
    Power {
        #[serde(default)]
        of: Box<MapSpec>,
        exponent: u64,
    },
    /// phi(X) + add
    Shift {
        #[serde(default)]
        of: Box<MapSpec>,
        add: MatrixJson,
    },
    /// c phi(X)
    Scale {
        #[serde(default)]
        of: Box<MapSpec>,
        by: ElementJson,
    },
    /// op applied to every entry of phi(X)
    Entrywise {
        #[serde(default)]
        of: Box<MapSpec>,
        op: EntryOp,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EntryOp {
    Square,
    /// x -> a x + b
    Affine { a: ElementJson, b: ElementJson },
    /// x -> x^{p^e}
    Frobenius { e: u64 },
}

/// An oracle file: the map plus the algebra it acts on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub map: MapSpec,
}

impl From<&StructuredMap> for MapSpec {
    fn from(m: &StructuredMap) -> Self {
        match &m.form {
            MapForm::Constant { value } => MapSpec::Constant { value: value.to_json() },
            MapForm::Canonical {
                epsilon,
                t,
                e,
                transpose,
                ..
            } => MapSpec::Canonical {
                epsilon: t.field().element_to_json(epsilon),
                t: t.to_json(),
                e: *e,
                transpose: *transpose,
            },
        }
    }
}

type MapFn = dyn Fn(&ExactMatrix) -> Result<ExactMatrix> + Send + Sync;

fn compile(field: &Closure, n: usize, spec: &MapSpec) -> Result<Arc<MapFn>> {
    let f = field.clone();
    let matrix = |m: &MatrixJson| -> Result<ExactMatrix> {
        let x = ExactMatrix::from_json(field, m)?;
        if x.n() != n {
            return Err(Error::DimensionMismatch { left: n, right: x.n() });
        }
        Ok(x)
    };
    Ok(match spec {
        MapSpec::Identity => Arc::new(|x: &ExactMatrix| Ok(x.clone())),
        MapSpec::Transpose => Arc::new(|x: &ExactMatrix| Ok(x.transpose())),
        MapSpec::Canonical {
            epsilon,
            t,
            e,
            transpose,
        } => {
            // k only matters for validation of epsilon; any k with eps^k = 1 will do
            let eps = field.element_from_json(epsilon)?;
            let t = matrix(t)?;
            let t_inv = t.inverse()?;
            let (e, transpose) = (*e, *transpose);
            Arc::new(move |x: &ExactMatrix| {
                let mut y = x.frobenius(e);
                if transpose {
                    y = y.transpose();
                }
                y.conjugate(&t, &t_inv)?.scale(&eps)
            })
        }
        MapSpec::Constant { value } => {
            let v = matrix(value)?;
            Arc::new(move |_: &ExactMatrix| Ok(v.clone()))
        }
        MapSpec::Power { of, exponent } => {
            let inner = compile(field, n, of)?;
            let e = *exponent;
            Arc::new(move |x: &ExactMatrix| inner(x)?.pow(e))
        }
        MapSpec::Shift { of, add } => {
            let inner = compile(field, n, of)?;
            let m = matrix(add)?;
            Arc::new(move |x: &ExactMatrix| inner(x)?.add(&m))
        }
        MapSpec::Scale { of, by } => {
            let inner = compile(field, n, of)?;
            let c = field.element_from_json(by)?;
            Arc::new(move |x: &ExactMatrix| inner(x)?.scale(&c))
        }
        MapSpec::Entrywise { of, op } => {
            let inner = compile(field, n, of)?;
            match op {
                EntryOp::Square => Arc::new(move |x: &ExactMatrix| inner(x)?.map_entries(|a| f.mul(a, a))),
                EntryOp::Affine { a, b } => {
                    let (a, b) = (field.element_from_json(a)?, field.element_from_json(b)?);
                    Arc::new(move |x: &ExactMatrix| inner(x)?.map_entries(|c| f.add(&f.mul(&a, c)?, &b)))
                }
                EntryOp::Frobenius { e } => {
                    let e = *e;
                    Arc::new(move |x: &ExactMatrix| Ok(inner(x)?.frobenius(e)))
                }
            }
        }
    })
}

/// A deterministic map M_n -> M_n with a query counter.
pub struct MapOracle {
    field: Closure,
    n: usize,
    f: Arc<MapFn>,
    queries: AtomicU64,
    spec: Option<OracleSpec>,
}

impl fmt::Debug for MapOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapOracle")
            .field("p", &self.field.p())
            .field("n", &self.n)
            .field("queries", &self.queries())
            .field("spec", &self.spec)
            .finish()
    }
}

impl MapOracle {
    pub fn from_fn(
        field: &Closure,
        n: usize,
        f: impl Fn(&ExactMatrix) -> Result<ExactMatrix> + Send + Sync + 'static,
    ) -> Self {
        MapOracle {
            field: field.clone(),
            n,
            f: Arc::new(f),
            queries: AtomicU64::new(0),
            spec: None,
        }
    }

    pub fn from_spec(field: &Closure, n: usize, spec: &OracleSpec) -> Result<Self> {
        if spec.p.is_some_and(|p| p != field.p()) {
            return Err(Error::CharacteristicMismatch {
                left: field.p(),
                right: spec.p.unwrap(),
            });
        }
        if spec.n.is_some_and(|m| m != n) {
            return Err(Error::DimensionMismatch {
                left: n,
                right: spec.n.unwrap(),
            });
        }
        let mut full = spec.clone();
        full.p = Some(field.p());
        full.n = Some(n);
        Ok(MapOracle {
            field: field.clone(),
            n,
            f: compile(field, n, &spec.map)?,
            queries: AtomicU64::new(0),
            spec: Some(full),
        })
    }

    pub fn from_map_spec(field: &Closure, n: usize, map: MapSpec) -> Result<Self> {
        Self::from_spec(field, n, &OracleSpec { p: None, n: None, map })
    }

    pub fn from_structured(field: &Closure, m: &StructuredMap) -> Result<Self> {
        Self::from_map_spec(field, m.n, MapSpec::from(m))
    }

    pub fn query(&self, x: &ExactMatrix) -> Result<ExactMatrix> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: x.n(),
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        (self.f)(x)
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
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

    pub fn spec(&self) -> Option<&OracleSpec> {
        self.spec.as_ref()
    }
}
