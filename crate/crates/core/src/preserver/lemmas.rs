//! Consequences of the mixed identity, checked directly on an oracle.
//!
//! Each property is only asserted once its hypotheses hold for the oracle
//! (phi(0) = 0, phi nonzero, phi(I) = I as needed); otherwise the report
//! passes vacuously with a note saying which hypothesis is missing.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MapOracle;
use crate::error::{Error, Result};
use crate::field::Closure;
use crate::matrix::ExactMatrix;
use crate::potent::{enumerate_potents_within, orthogonal, random_nested_potents, random_potent, PotentContext};
use crate::suite::{named, Instance, LemmaReport, Mode, Runner, SuiteConfig};

pub const S3_LEMMA_IDS: &[&str] = &[
    "s3.a.power_preservation",
    "s3.b.order_preservation",
    "s3.c.orthogonality_preservation",
    "s3.d.rank_lower_bound",
    "s3.e.rank_equality",
    "s3.f.orthoadditivity",
    "s3.g.orthogonal_combination",
    "s3.homogeneity",
    "s3.triple.idempotents",
    "s3.triple.kth_power",
    "s3.triple.product",
];

/// Oracle answers cached by input.
pub(crate) struct Memo<'a> {
    oracle: &'a MapOracle,
    cache: HashMap<ExactMatrix, ExactMatrix>,
}

impl<'a> Memo<'a> {
    pub fn new(oracle: &'a MapOracle) -> Self {
        Memo {
            oracle,
            cache: HashMap::new(),
        }
    }

    pub fn get(&mut self, x: &ExactMatrix) -> Result<ExactMatrix> {
        if let Some(y) = self.cache.get(x) {
            return Ok(y.clone());
        }
        let y = self.oracle.query(x)?;
        self.cache.insert(x.clone(), y.clone());
        Ok(y)
    }
}

fn arity(id: &str, got: usize) -> Result<()> {
    let want = match id {
        "s3.b.order_preservation"
        | "s3.c.orthogonality_preservation"
        | "s3.f.orthoadditivity"
        | "s3.homogeneity"
        | "s3.triple.product" => Some(2),
        "s3.g.orthogonal_combination" => None,
        _ => Some(1),
    };
    match want {
        Some(w) if w != got => Err(Error::InvalidConfig(format!("{id} expects {w} matrices, got {got}"))),
        None if got == 0 => Err(Error::InvalidConfig(format!("{id} expects at least one matrix"))),
        _ => Ok(()),
    }
}

/// The conclusion of one property on one instance. Hypotheses on the
/// instance itself (P ⪯ Q, P ⊥ Q, ...) are the caller's business.
pub(crate) fn s3_predicate(id: &str, phi: &mut Memo, k: u64, mats: &[ExactMatrix]) -> Result<bool> {
    arity(id, mats.len())?;
    let m = (k + 1) as u32;
    let n = mats[0].n();
    let p = mats[0].p();
    Ok(match id {
        "s3.a.power_preservation" => phi.get(&mats[0].pow(k + 1)?)? == phi.get(&mats[0])?.pow(k + 1)?,
        "s3.b.order_preservation" => {
            let ctx = PotentContext::new(m, n, p)?;
            ctx.preceq(&phi.get(&mats[0])?, &phi.get(&mats[1])?)?
        }
        "s3.c.orthogonality_preservation" => orthogonal(&phi.get(&mats[0])?, &phi.get(&mats[1])?)?,
        "s3.d.rank_lower_bound" => phi.get(&mats[0])?.rank()? >= mats[0].rank()?,
        "s3.e.rank_equality" => phi.get(&mats[0])?.rank()? == mats[0].rank()?,
        "s3.f.orthoadditivity" => {
            phi.get(&mats[0].add(&mats[1])?)? == phi.get(&mats[0])?.add(&phi.get(&mats[1])?)?
        }
        "s3.g.orthogonal_combination" => {
            let mut sum = ExactMatrix::zeros(mats[0].field(), n);
            let mut images = ExactMatrix::zeros(mats[0].field(), n);
            for x in mats {
                sum = sum.add(x)?;
                images = images.add(&phi.get(x)?)?;
            }
            phi.get(&sum)? == images
        }
        "s3.homogeneity" => {
            let c = mats[1].get(0, 0);
            phi.get(&mats[0].scale(c)?)? == phi.get(&mats[0])?.scale(c)?
        }
        "s3.triple.kth_power" => phi.get(&mats[0].pow(k)?)? == phi.get(&mats[0])?.pow(k)?,
        "s3.triple.idempotents" => {
            let y = phi.get(&mats[0])?;
            y.mul(&y)? == y
        }
        "s3.triple.product" => {
            let (pp, x) = (&mats[0], &mats[1]);
            let lhs = phi.get(&pp.mul(&x.pow(k)?)?.mul(pp)?)?;
            let fp = phi.get(pp)?;
            lhs == fp.mul(&phi.get(x)?.pow(k)?)?.mul(&fp)?
        }
        other => return Err(Error::InvalidConfig(format!("unknown lemma id {other:?}"))),
    })
}

struct Hypotheses {
    zero_fixed: bool,
    nonzero: bool,
    unit_fixed: bool,
}

impl Hypotheses {
    fn of(phi: &mut Memo, field: &Closure, n: usize) -> Result<Self> {
        let zero_fixed = phi.get(&ExactMatrix::zeros(field, n))?.is_zero();
        let id = phi.get(&ExactMatrix::identity(field, n))?;
        let mut nonzero = !id.is_zero();
        for i in 0..n {
            nonzero |= !phi.get(&ExactMatrix::unit(field, n, i, i))?.is_zero();
        }
        Ok(Hypotheses {
            zero_fixed,
            nonzero,
            unit_fixed: id.is_identity(),
        })
    }

    /// None when the property may be asserted, else the missing hypothesis.
    fn missing(&self, id: &str, n: usize) -> Option<&'static str> {
        let needs_zero = matches!(
            id,
            "s3.c.orthogonality_preservation"
                | "s3.d.rank_lower_bound"
                | "s3.e.rank_equality"
                | "s3.f.orthoadditivity"
                | "s3.g.orthogonal_combination"
                | "s3.homogeneity"
        );
        let triple = id.starts_with("s3.triple.");
        if (needs_zero || triple) && !self.zero_fixed {
            return Some("phi(0) != 0");
        }
        if needs_zero && !self.nonzero {
            return Some("phi vanishes on every probe");
        }
        if triple && !self.unit_fixed {
            return Some("phi(I) != I");
        }
        if triple && n < 2 {
            return Some("n < 2");
        }
        None
    }
}

/// Prime-field (k+1)-potents (or idempotents) when the space fits the
/// budget in exhaustive mode.
fn enumerated(cfg: &SuiteConfig, m: u32) -> Option<Vec<ExactMatrix>> {
    if cfg.mode != Mode::Exhaustive {
        return None;
    }
    let ctx = PotentContext::new(m, cfg.n, cfg.p).ok()?;
    enumerate_potents_within(&ctx, cfg.budget as u128).ok()
}

struct Gen<'c> {
    cfg: &'c SuiteConfig,
    field: Closure,
    k: u64,
    rng: ChaCha8Rng,
}

impl Gen<'_> {
    fn matrix(&mut self) -> Result<ExactMatrix> {
        let d = self.rng.gen_range(1..=2);
        ExactMatrix::random(&self.field, self.cfg.n, d, &mut self.rng)
    }

    fn nested(&mut self, m: u32) -> Result<[ExactMatrix; 3]> {
        let d = self.rng.gen_range(1..=2);
        random_nested_potents(&self.field, self.cfg.n, m, d, &mut self.rng)
    }

    fn potent(&mut self, m: u32) -> Result<ExactMatrix> {
        let d = self.rng.gen_range(1..=2);
        random_potent(&self.field, self.cfg.n, m, d, &mut self.rng)
    }

    /// Mutually orthogonal scaled rank-one (k+1)-potents lambda_j P_j.
    fn orthogonal_family(&mut self) -> Result<Vec<ExactMatrix>> {
        let n = self.cfg.n;
        let s = ExactMatrix::random_invertible(&self.field, n, self.rng.gen_range(1..=2), &mut self.rng)?;
        let s_inv = s.inverse()?;
        let roots = self.field.roots_of_unity(self.k)?;
        let parts = self.rng.gen_range(1..=n);
        let mut out = Vec::new();
        for j in 0..parts {
            let z = roots[self.rng.gen_range(0..roots.len())].clone();
            let d = self.rng.gen_range(1..=2);
            let lambda = self.field.random(&mut self.rng, d)?;
            let b = ExactMatrix::unit(&self.field, n, j, j).scale(&self.field.mul(&z, &lambda)?)?;
            out.push(b.conjugate(&s, &s_inv)?);
        }
        Ok(out)
    }

    fn instances(&mut self, id: &str) -> Result<(Vec<Instance>, Option<String>)> {
        let m = (self.k + 1) as u32;
        let samples = self.cfg.samples;
        let mut out = Vec::new();
        let mut note = None;
        let pool = match id {
            "s3.triple.idempotents" | "s3.triple.product" => enumerated(self.cfg, 2),
            "s3.b.order_preservation"
            | "s3.c.orthogonality_preservation"
            | "s3.d.rank_lower_bound"
            | "s3.e.rank_equality"
            | "s3.f.orthoadditivity" => enumerated(self.cfg, m),
            _ => None,
        };
        if let Some(pool) = pool {
            let ctx = PotentContext::new(m, self.cfg.n, self.cfg.p)?;
            let cap = self.cfg.budget as usize;
            let mut scanned = 0usize;
            match id {
                "s3.b.order_preservation" | "s3.c.orthogonality_preservation" | "s3.f.orthoadditivity" => {
                    'scan: for a in &pool {
                        for b in &pool {
                            scanned += 1;
                            if scanned > cap {
                                note = Some(format!("pair scan truncated at {cap}"));
                                break 'scan;
                            }
                            let keep = if id == "s3.b.order_preservation" {
                                ctx.preceq(a, b)?
                            } else {
                                orthogonal(a, b)?
                            };
                            if keep {
                                out.push(named(&[("P", a), ("Q", b)]));
                            }
                        }
                    }
                }
                "s3.triple.product" => {
                    for pp in &pool {
                        let x = self.matrix()?;
                        out.push(named(&[("P", pp), ("X", &x)]));
                    }
                }
                "s3.d.rank_lower_bound" => {
                    out.extend(pool.iter().filter(|x| !x.is_zero()).map(|x| named(&[("P", x)])));
                }
                _ => out.extend(pool.iter().map(|x| named(&[("P", x)]))),
            }
            return Ok((out, note));
        }
        for _ in 0..samples {
            let inst = match id {
                "s3.a.power_preservation" | "s3.triple.kth_power" => {
                    let x = if self.rng.gen_bool(0.5) { self.matrix()? } else { self.potent(m)? };
                    named(&[("X", &x)])
                }
                "s3.b.order_preservation" => {
                    let [q, p, _] = self.nested(m)?;
                    named(&[("P", &p), ("Q", &q)])
                }
                "s3.c.orthogonality_preservation" | "s3.f.orthoadditivity" => {
                    let [q, _, r] = self.nested(m)?;
                    named(&[("P", &q), ("Q", &r)])
                }
                "s3.d.rank_lower_bound" => {
                    let mut x = self.potent(m)?;
                    while x.is_zero() {
                        x = self.potent(m)?;
                    }
                    named(&[("P", &x)])
                }
                "s3.e.rank_equality" => named(&[("P", &self.potent(m)?)]),
                "s3.g.orthogonal_combination" => self
                    .orthogonal_family()?
                    .into_iter()
                    .enumerate()
                    .map(|(j, x)| (format!("lambda{}P{}", j + 1, j + 1), x))
                    .collect(),
                "s3.homogeneity" => {
                    let c = self.field.int(self.rng.gen_range(0..self.cfg.p as i64));
                    let x = self.matrix()?;
                    named(&[("X", &x), ("cI", &ExactMatrix::scalar(&self.field, self.cfg.n, &c))])
                }
                "s3.triple.idempotents" => named(&[("P", &self.potent(2)?)]),
                "s3.triple.product" => {
                    let (p, x) = (self.potent(2)?, self.matrix()?);
                    named(&[("P", &p), ("X", &x)])
                }
                other => return Err(Error::InvalidConfig(format!("unknown lemma id {other:?}"))),
            };
            out.push(inst);
        }
        Ok((out, note))
    }
}

pub(crate) fn run_s3(id: &'static str, f: &MapOracle, k: u64, cfg: &SuiteConfig) -> LemmaReport {
    let mut r = Runner::new(id, cfg);
    let field = f.field().clone();
    let n = f.n();
    let mut phi = Memo::new(f);
    let hyp = match Hypotheses::of(&mut phi, &field, n) {
        Ok(h) => h,
        Err(e) => {
            r.fail(Some(f), Vec::new(), None, format!("error: {e}"));
            return r.finish();
        }
    };
    if let Some(why) = hyp.missing(id, n) {
        r.note(format!("vacuous: hypothesis fails ({why})"));
        return r.finish();
    }
    let mut gen = Gen {
        cfg,
        field,
        k,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed_for(id)),
    };
    let (instances, note) = match gen.instances(id) {
        Ok(x) => x,
        Err(e) => {
            r.fail(Some(f), Vec::new(), None, format!("instance generation failed: {e}"));
            return r.finish();
        }
    };
    if let Some(note) = note {
        r.note(note);
    }
    for inst in instances {
        r.check(Some(f), inst, |mats| s3_predicate(id, &mut phi, k, mats));
        if r.failed() {
            break;
        }
    }
    r.finish()
}

/// One report per property, sorted by id.
pub fn check_preserver_properties(f: &MapOracle, k: u64, cfg: &SuiteConfig) -> Vec<LemmaReport> {
    S3_LEMMA_IDS.iter().map(|id| run_s3(id, f, k, cfg)).collect()
}
