//! Every suite item: an instance generator and a predicate. The predicate
//! alone (`check_instance`) is what counterexample rechecks run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{named, Instance, LemmaReport, Mode, Runner, SuiteConfig};
use crate::error::{Error, Result};
use crate::field::Closure;
use crate::generate::{aux_a, aux_b, aux_c, aux_d, certify, jordan_block, replay, simplicity_witness};
use crate::matrix::{off_diagonal, support_closure_check, ExactMatrix};
use crate::potent::{enumerate_potents_within, orthogonal, PotentBlocks, PotentContext};
use crate::preserver::lemmas::{run_s3, s3_predicate, Memo};
use crate::preserver::{
    canonicalize, structured_probes, verify_identity, EntryOp, MapForm, MapOracle, MapSpec, ProbeSampler, StructuredMap,
    S3_LEMMA_IDS,
};

/// Stable ids, sorted; reports come out in this order.
pub const LEMMA_IDS: &[&str] = &[
    "generate.aux_jordan_forms",
    "generate.certificate_soundness",
    "generate.witness_replay",
    "matrix.jordan_reassembly",
    "matrix.kth_root",
    "matrix.similarity_covariance",
    "matrix.support_lemma",
    "order.alt_equivalence",
    "order.antisymmetry",
    "order.idempotent_shadow",
    "order.jordan_characterization",
    "order.maximality",
    "order.orthogonality_power",
    "order.reflexivity",
    "order.transitivity",
    "potent.diagonalizability_census",
    "potent.jordan_block_minimality",
    "potent.nondiagonalizable_witness",
    "potent.orthosum_order",
    "preserver.canonical_soundness",
    "preserver.constant_branch",
    "preserver.negative_controls",
    "preserver.round_trip",
    "rank.order_monotone",
    "rank.orthoadditive",
    "rank.power_invariance",
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

fn need(id: &str, mats: &[ExactMatrix], n: usize) -> Result<()> {
    if mats.len() != n {
        return Err(Error::InvalidConfig(format!("{id} expects {n} matrices, got {}", mats.len())));
    }
    Ok(())
}

fn need_oracle<'a>(id: &str, oracle: Option<&'a MapOracle>) -> Result<&'a MapOracle> {
    oracle.ok_or_else(|| Error::InvalidConfig(format!("{id} needs an oracle")))
}

fn sampler(cfg: &SuiteConfig) -> ProbeSampler {
    ProbeSampler::default().with_random_pairs(20).with_seed(cfg.seed)
}

/// Whether the property holds on one instance. Instance-level hypotheses
/// (P ⪯ Q and the like) are part of the predicate, so any instance can be
/// fed in.
pub fn check_instance(id: &str, cfg: &SuiteConfig, oracle: Option<&MapOracle>, mats: &[ExactMatrix]) -> Result<bool> {
    if id.starts_with("s3.") {
        let o = need_oracle(id, oracle)?;
        return s3_predicate(id, &mut Memo::new(o), cfg.k, mats);
    }
    let (p, n, k, m) = (cfg.p, mats.first().map_or(cfg.n, |x| x.n()), cfg.k, cfg.m);
    let ctx = || PotentContext::new(m, n, p);
    Ok(match id {
        "order.reflexivity" => {
            need(id, mats, 1)?;
            ctx()?.preceq(&mats[0], &mats[0])?
        }
        "order.antisymmetry" => {
            need(id, mats, 2)?;
            let c = ctx()?;
            !(c.preceq(&mats[0], &mats[1])? && c.preceq(&mats[1], &mats[0])?) || mats[0] == mats[1]
        }
        "order.transitivity" => {
            need(id, mats, 3)?;
            let c = ctx()?;
            !(c.preceq(&mats[0], &mats[1])? && c.preceq(&mats[1], &mats[2])?) || c.preceq(&mats[0], &mats[2])?
        }
        "order.alt_equivalence" => {
            need(id, mats, 2)?;
            let c = ctx()?;
            c.preceq(&mats[0], &mats[1])? == c.preceq_alt(&mats[0], &mats[1])?
        }
        "order.jordan_characterization" => {
            need(id, mats, 2)?;
            let c = ctx()?;
            c.preceq(&mats[0], &mats[1])? == c.preceq_jordan(&mats[0], &mats[1])?
        }
        "order.maximality" => {
            // [P] means no dominator exists; [P, Q] names one
            let c = ctx()?;
            match mats.len() {
                1 => c.is_maximal(&mats[0])?,
                2 => !c.is_maximal(&mats[0])? && c.preceq(&mats[0], &mats[1])? && mats[0] != mats[1],
                _ => return need(id, mats, 2).map(|_| false),
            }
        }
        "order.orthogonality_power" => {
            need(id, mats, 2)?;
            let orth = orthogonal(&mats[0], &mats[1])?;
            let mut ok = true;
            for l in 1..m as u64 {
                ok &= orthogonal(&mats[0].pow(l)?, &mats[1])? == orth;
            }
            ok
        }
        "order.idempotent_shadow" => {
            need(id, mats, 2)?;
            if ctx()?.preceq(&mats[0], &mats[1])? {
                let a = mats[0].pow(m as u64 - 1)?;
                let b = mats[1].pow(m as u64 - 1)?;
                a.mul(&b)? == a && b.mul(&a)? == a
            } else {
                true
            }
        }
        "rank.order_monotone" => {
            need(id, mats, 2)?;
            if ctx()?.preceq(&mats[0], &mats[1])? {
                let (rp, rq) = (mats[0].rank()?, mats[1].rank()?);
                rp <= rq && (rp != rq || mats[0] == mats[1])
            } else {
                true
            }
        }
        "rank.orthoadditive" => {
            need(id, mats, 2)?;
            let c = ctx()?;
            if c.is_potent(&mats[0])? && c.is_potent(&mats[1])? && orthogonal(&mats[0], &mats[1])? {
                mats[0].add(&mats[1])?.rank()? == mats[0].rank()? + mats[1].rank()?
            } else {
                true
            }
        }
        "rank.power_invariance" => {
            need(id, mats, 1)?;
            if !ctx()?.is_potent(&mats[0])? {
                return Err(Error::NotPotent { m });
            }
            let r = mats[0].rank()?;
            let mut ok = true;
            for j in 1..=m as u64 {
                ok &= mats[0].pow(j)?.rank()? == r;
            }
            ok
        }
        "potent.orthosum_order" => {
            // [Q, P_1, ..., P_r]
            if mats.len() < 2 {
                return need(id, mats, 2).map(|_| false);
            }
            let c = ctx()?;
            let (q, parts) = (&mats[0], &mats[1..]);
            let mut hyp = true;
            for (i, a) in parts.iter().enumerate() {
                hyp &= c.preceq(a, q)?;
                for b in &parts[i + 1..] {
                    hyp &= orthogonal(a, b)?;
                }
            }
            if hyp {
                let sum = c.orthosum(parts)?;
                c.is_potent(&sum)? && c.preceq(&sum, q)?
            } else {
                true
            }
        }
        "potent.diagonalizability_census" => {
            need(id, mats, 1)?;
            if !ctx()?.is_potent(&mats[0])? {
                return Err(Error::NotPotent { m });
            }
            (m - 1) % p == 0 || mats[0].is_diagonalizable()?
        }
        "potent.nondiagonalizable_witness" => {
            need(id, mats, 1)?;
            ctx()?.is_potent(&mats[0])? && !mats[0].is_diagonalizable()?
        }
        "potent.jordan_block_minimality" => {
            need(id, mats, 2)?;
            let (a, b) = (&mats[0], &mats[1]);
            let ab = a.mul(b)?;
            let rel = ab == b.mul(a)? && ab == b.mul(b)?;
            rel == (b.is_zero() || b == a)
        }
        "matrix.jordan_reassembly" => {
            need(id, mats, 1)?;
            let jd = mats[0].jordan_form()?;
            jd.reassemble()? == mats[0] && jd.s.mul(&jd.s_inv)?.is_identity()
        }
        "matrix.similarity_covariance" => {
            need(id, mats, 2)?;
            let (x, s) = (&mats[0], &mats[1]);
            let y = x.conjugate(s, &s.inverse()?)?;
            y.jordan_form()?.blocks == x.jordan_form()?.blocks
        }
        "matrix.support_lemma" => {
            need(id, mats, 1)?;
            let s = mats[0].support();
            if s.iter().any(|&(i, j)| i == j) {
                return Err(Error::InvalidConfig("support lemma instances are off-diagonal".into()));
            }
            s.is_empty() || !support_closure_check(&s, n) || s == off_diagonal(n)
        }
        "matrix.kth_root" => {
            need(id, mats, 1)?;
            mats[0].diag_kth_root(k)?.pow(k)? == mats[0]
        }
        "generate.certificate_soundness" => {
            need(id, mats, 1)?;
            certify(&mats[0], k)?.eval(k)? == mats[0]
        }
        "generate.aux_jordan_forms" => {
            need(id, mats, 4)?;
            let f = mats[0].field();
            let r = mats[0].n();
            let blocks = |x: &ExactMatrix| -> Result<Vec<(ExactMatrix, usize)>> {
                Ok(x.jordan_form()?
                    .blocks
                    .into_iter()
                    .map(|b| (ExactMatrix::scalar(f, 1, &b.eigenvalue), b.size))
                    .collect())
            };
            let e = |v: i64| ExactMatrix::scalar(f, 1, &f.int(v));
            let want_a = vec![(e(0), r - 1), (e(2), 1)];
            let want_c = if r == 2 { vec![(e(0), 2)] } else { vec![(e(0), 2), (e(1), r - 2)] };
            blocks(&mats[0])? == want_a
                && blocks(&mats[2])? == want_c
                && mats[1].mixed_product(&mats[0], 1)? == jordan_block(f, &f.zero(), r)
                && mats[3].mixed_product(&mats[2], 1)? == jordan_block(f, &f.one(), r)
        }
        "generate.witness_replay" => {
            need(id, mats, 1)?;
            replay(&simplicity_witness(&mats[0], k)?, &mats[0], k).ok
        }
        "preserver.canonical_soundness" => verify_identity(need_oracle(id, oracle)?, k, &sampler(cfg))?.passed(),
        "preserver.round_trip" | "preserver.constant_branch" => {
            let o = need_oracle(id, oracle)?;
            let got = canonicalize(o, o.n(), k)?;
            if id == "preserver.constant_branch" && !got.is_constant() {
                return Ok(false);
            }
            let probes = structured_probes(o.field(), o.n(), &[1, 2], 10, cfg.seed ^ 0xf7e5)?;
            let mut ok = verify_identity(o, k, &sampler(cfg))?.passed();
            for x in &probes {
                ok &= got.apply(x)? == o.query(x)?;
            }
            ok
        }
        "preserver.negative_controls" => {
            let o = need_oracle(id, oracle)?;
            match verify_identity(o, k, &sampler(cfg))?.witness {
                Some(w) => w.recheck(o, k)?,
                None => false,
            }
        }
        other => return Err(Error::InvalidConfig(format!("unknown lemma id {other:?}"))),
    })
}

/// Reruns the predicate on a report's counterexample from its JSON alone.
/// Ok(true) when the failure reproduces.
pub fn recheck_counterexample(report: &LemmaReport) -> Result<bool> {
    let Some(cx) = &report.counterexample else {
        return Ok(false);
    };
    let cfg = &report.config;
    let field = cfg.field()?;
    let oracle = match &cx.oracle {
        Some(spec) => Some(MapOracle::from_spec(&field, spec.n.unwrap_or(cfg.n), spec)?),
        None => None,
    };
    let mats = cx
        .matrices
        .iter()
        .map(|m| ExactMatrix::from_json(&field, &m.matrix))
        .collect::<Result<Vec<_>>>()?;
    match check_instance(&report.lemma_id, cfg, oracle.as_ref(), &mats) {
        Ok(ok) => Ok(!ok),
        Err(_) if cx.detail.starts_with("error:") => Ok(true),
        Err(e) => Err(e),
    }
}

struct Case {
    oracle: Option<MapOracle>,
    inst: Instance,
}

impl From<Instance> for Case {
    fn from(inst: Instance) -> Self {
        Case { oracle: None, inst }
    }
}

struct Gen<'c> {
    cfg: &'c SuiteConfig,
    field: Closure,
    rng: ChaCha8Rng,
    pool: Option<Vec<ExactMatrix>>,
    note: Option<String>,
}

impl Gen<'_> {
    fn n(&self) -> usize {
        self.cfg.n
    }

    /// Entry degree for random matrices whose eigenvalues must stay inside
    /// the tower.
    fn degree(&mut self) -> u32 {
        if self.n() > 7 {
            1
        } else {
            self.rng.gen_range(1..=2)
        }
    }

    fn matrix(&mut self, degree: u32) -> Result<ExactMatrix> {
        ExactMatrix::random(&self.field, self.n(), degree, &mut self.rng)
    }

    fn blocks(&mut self) -> Result<PotentBlocks> {
        let d = self.degree();
        PotentBlocks::random(&self.field, self.n(), self.cfg.m, d, &mut self.rng)
    }

    /// Random subsets of one block family at the given nesting levels:
    /// level l keeps blocks whose label is >= l.
    fn chain(&mut self, levels: usize) -> Result<Vec<ExactMatrix>> {
        let pb = self.blocks()?;
        let label: Vec<usize> = (0..pb.len()).map(|_| self.rng.gen_range(0..=levels)).collect();
        (1..=levels).map(|l| pb.sum(|i| label[i] >= l)).collect()
    }

    fn potent(&mut self) -> Result<ExactMatrix> {
        Ok(self.chain(1)?.remove(0))
    }

    fn pairs(&mut self, related: impl Fn(&mut Self) -> Result<[ExactMatrix; 2]>) -> Result<Vec<Case>> {
        let mut out = Vec::new();
        if let Some(pool) = &self.pool {
            let cap = self.cfg.budget as usize;
            'scan: for a in pool {
                for b in pool {
                    if out.len() >= cap {
                        self.note = Some(format!("pair scan truncated at {cap}"));
                        break 'scan;
                    }
                    out.push(named(&[("P", a), ("Q", b)]).into());
                }
            }
            return Ok(out);
        }
        for i in 0..self.cfg.samples {
            let [a, b] = if i % 2 == 0 {
                related(self)?
            } else {
                [self.potent()?, self.potent()?]
            };
            out.push(named(&[("P", &a), ("Q", &b)]).into());
        }
        Ok(out)
    }

    fn singles(&mut self) -> Result<Vec<Case>> {
        if let Some(pool) = &self.pool {
            return Ok(pool.iter().map(|x| named(&[("P", x)]).into()).collect());
        }
        (0..self.cfg.samples)
            .map(|_| Ok(named(&[("P", &self.potent()?)]).into()))
            .collect()
    }

    fn below(&mut self) -> Result<[ExactMatrix; 2]> {
        let c = self.chain(2)?;
        Ok([c[1].clone(), c[0].clone()])
    }

    fn orthogonal_pair(&mut self) -> Result<[ExactMatrix; 2]> {
        let pb = self.blocks()?;
        let side: Vec<u8> = (0..pb.len()).map(|_| self.rng.gen_range(0..3)).collect();
        Ok([pb.sum(|i| side[i] == 1)?, pb.sum(|i| side[i] == 2)?])
    }

    fn cases(&mut self, id: &str) -> Result<Vec<Case>> {
        let (n, k, m, p) = (self.n(), self.cfg.k, self.cfg.m, self.cfg.p);
        let samples = self.cfg.samples;
        let f = self.field.clone();
        Ok(match id {
            "order.reflexivity" | "rank.power_invariance" | "potent.diagonalizability_census" => self.singles()?,
            "order.antisymmetry" | "order.alt_equivalence" | "order.jordan_characterization" => {
                self.pairs(|g| g.below())?
            }
            "order.idempotent_shadow" | "rank.order_monotone" => self.pairs(|g| g.below())?,
            "order.orthogonality_power" | "rank.orthoadditive" => self.pairs(|g| g.orthogonal_pair())?,
            "order.transitivity" => {
                let mut out = Vec::new();
                if let Some(pool) = self.pool.clone() {
                    let ctx = PotentContext::new(m, n, p)?;
                    let mut ups = Vec::with_capacity(pool.len());
                    for a in &pool {
                        let mut up = Vec::new();
                        for (j, b) in pool.iter().enumerate() {
                            if ctx.preceq(a, b)? {
                                up.push(j);
                            }
                        }
                        ups.push(up);
                    }
                    let cap = self.cfg.budget as usize;
                    'scan: for (i, up) in ups.iter().enumerate() {
                        for &j in up {
                            for &l in &ups[j] {
                                if out.len() >= cap {
                                    self.note = Some(format!("chain scan truncated at {cap}"));
                                    break 'scan;
                                }
                                out.push(named(&[("P", &pool[i]), ("Q", &pool[j]), ("R", &pool[l])]).into());
                            }
                        }
                    }
                } else {
                    for _ in 0..samples {
                        let c = self.chain(3)?;
                        out.push(named(&[("P", &c[2]), ("Q", &c[1]), ("R", &c[0])]).into());
                    }
                }
                out
            }
            "order.maximality" => {
                let ctx = PotentContext::new(m, n, p)?;
                let candidates: Vec<ExactMatrix> = match &self.pool {
                    Some(pool) => pool.clone(),
                    None => (0..samples).map(|_| self.potent()).collect::<Result<_>>()?,
                };
                let mut out = Vec::new();
                for x in &candidates {
                    let dominator = match &self.pool {
                        Some(pool) => {
                            let mut found = None;
                            for q in pool {
                                if q != x && ctx.preceq(x, q)? {
                                    found = Some(q.clone());
                                    break;
                                }
                            }
                            found
                        }
                        None => {
                            let i = ExactMatrix::identity(&f, n);
                            let q = x.add(&i.sub(&x.pow(m as u64 - 1)?)?)?;
                            (q != *x).then_some(q)
                        }
                    };
                    out.push(match dominator {
                        Some(q) => named(&[("P", x), ("Q", &q)]).into(),
                        None => named(&[("P", x)]).into(),
                    });
                }
                out
            }
            "potent.orthosum_order" => {
                if self.pool.is_some() {
                    self.note = Some("random block families in every mode".into());
                }
                let mut out = Vec::new();
                for _ in 0..samples {
                    let pb = self.blocks()?;
                    let inq: Vec<bool> = (0..pb.len()).map(|_| self.rng.gen_bool(0.7)).collect();
                    let q = pb.sum(|i| inq[i])?;
                    let mut inst = vec![("Q".to_string(), q)];
                    for i in 0..pb.len() {
                        if inq[i] && self.rng.gen_bool(0.6) {
                            inst.push((format!("P{}", inst.len()), pb.block(i)?));
                        }
                    }
                    if inst.len() == 1 {
                        inst.push(("P1".into(), ExactMatrix::zeros(&f, n)));
                    }
                    out.push(inst.into());
                }
                out
            }
            "potent.nondiagonalizable_witness" => {
                if (m - 1) % p != 0 || n < 2 {
                    self.note = Some(format!("vacuous: p = {p} does not divide m - 1 = {} or n < 2", m - 1));
                    return Ok(Vec::new());
                }
                let a = ExactMatrix::identity(&f, n).with_entry(0, 1, f.one());
                vec![named(&[("A", &a)]).into()]
            }
            "potent.jordan_block_minimality" => {
                if (m - 1) % p != 0 {
                    self.note = Some(format!("vacuous: p = {p} does not divide m - 1 = {}", m - 1));
                    return Ok(Vec::new());
                }
                // B runs over M_2(F_p), then random M_2(F_{p^2}) candidates
                let a = ExactMatrix::identity(&f, 2).with_entry(0, 1, f.one());
                let mut out = Vec::new();
                let total = (p as u64).pow(4);
                for idx in 0..total {
                    let mut t = idx;
                    let b = ExactMatrix::from_fn(&f, 2, |_, _| {
                        let v = f.int((t % p as u64) as i64);
                        t /= p as u64;
                        v
                    });
                    out.push(named(&[("A", &a), ("B", &b)]).into());
                }
                for _ in 0..samples {
                    let b = ExactMatrix::random(&f, 2, 2, &mut self.rng)?;
                    out.push(named(&[("A", &a), ("B", &b)]).into());
                }
                out
            }
            "matrix.jordan_reassembly" => (0..samples)
                .map(|_| {
                    let d = self.degree();
                    Ok(named(&[("X", &self.matrix(d)?)]).into())
                })
                .collect::<Result<_>>()?,
            "matrix.similarity_covariance" => (0..samples)
                .map(|_| {
                    let d = self.degree();
                    let x = self.matrix(d)?;
                    let s = ExactMatrix::random_invertible(&f, n, d, &mut self.rng)?;
                    Ok(named(&[("X", &x), ("S", &s)]).into())
                })
                .collect::<Result<_>>()?,
            "matrix.support_lemma" => {
                let cells: Vec<_> = off_diagonal(n).into_iter().collect();
                let total = 1u128.checked_shl(cells.len() as u32).unwrap_or(u128::MAX);
                let mut out = Vec::new();
                if total <= self.cfg.budget as u128 {
                    for mask in 0..total {
                        let mut x = ExactMatrix::zeros(&f, n);
                        for (b, &(i, j)) in cells.iter().enumerate() {
                            if mask >> b & 1 == 1 {
                                x.set(i, j, f.one());
                            }
                        }
                        out.push(named(&[("S", &x)]).into());
                    }
                } else {
                    self.note = Some(format!("2^{} subsets exceed the budget; sampled", cells.len()));
                    for _ in 0..samples {
                        let mut x = ExactMatrix::zeros(&f, n);
                        for &(i, j) in &cells {
                            if self.rng.gen_bool(0.5) {
                                x.set(i, j, f.one());
                            }
                        }
                        out.push(named(&[("S", &x)]).into());
                    }
                }
                out
            }
            "matrix.kth_root" => (0..samples)
                .map(|_| {
                    let mut d = Vec::with_capacity(n);
                    for _ in 0..n {
                        let deg = self.rng.gen_range(1..=2);
                        d.push(f.random(&mut self.rng, deg)?);
                    }
                    Ok(named(&[("D", &ExactMatrix::diag(&f, &d))]).into())
                })
                .collect::<Result<_>>()?,
            "generate.certificate_soundness" => (0..samples)
                .map(|_| Ok(named(&[("X", &self.matrix(1)?)]).into()))
                .collect::<Result<_>>()?,
            "generate.witness_replay" => {
                let mut out = Vec::new();
                while out.len() < samples {
                    let x = self.matrix(1)?;
                    if !x.is_zero() {
                        out.push(named(&[("X", &x)]).into());
                    }
                }
                out
            }
            "generate.aux_jordan_forms" => (2..=n.max(2))
                .map(|r| {
                    named(&[
                        ("A", &aux_a(&f, r)),
                        ("B", &aux_b(&f, r)),
                        ("C", &aux_c(&f, r)),
                        ("D", &aux_d(&f, r)),
                    ])
                    .into()
                })
                .collect(),
            "preserver.canonical_soundness" | "preserver.round_trip" => {
                let maps = samples.min(10);
                let mut out = Vec::new();
                for _ in 0..maps {
                    let m = StructuredMap::random_canonical(&f, n, k, 2, &mut self.rng)?;
                    out.push(Case {
                        oracle: Some(MapOracle::from_structured(&f, &m)?),
                        inst: Vec::new(),
                    });
                }
                out
            }
            "preserver.constant_branch" => {
                let maps = samples.min(10);
                let mut out = Vec::new();
                let mut tries = 0;
                while out.len() < maps && tries < 100 * maps {
                    tries += 1;
                    let d = self.degree();
                    let pb = PotentBlocks::random(&f, n, (k + 1) as u32, d, &mut self.rng)?;
                    let pick: Vec<bool> = (0..pb.len()).map(|_| self.rng.gen_bool(0.6)).collect();
                    let value = pb.sum(|i| pick[i])?;
                    if value.is_zero() {
                        continue;
                    }
                    let m = StructuredMap::constant(value, k)?;
                    out.push(Case {
                        oracle: Some(MapOracle::from_structured(&f, &m)?),
                        inst: Vec::new(),
                    });
                }
                out
            }
            "preserver.negative_controls" => {
                let e11 = ExactMatrix::unit(&f, n, 0, 0).to_json();
                let mut specs = vec![
                    MapSpec::Shift {
                        of: Box::default(),
                        add: e11,
                    },
                    MapSpec::Entrywise {
                        of: Box::default(),
                        op: EntryOp::Affine {
                            a: f.element_to_json(&f.one()),
                            b: f.element_to_json(&f.one()),
                        },
                    },
                ];
                if n >= 2 {
                    // on M_1 these two are multiplicative, so not negative controls
                    specs.push(MapSpec::Power {
                        of: Box::default(),
                        exponent: 2,
                    });
                    specs.push(MapSpec::Entrywise {
                        of: Box::default(),
                        op: EntryOp::Square,
                    });
                }
                specs
                    .into_iter()
                    .map(|s| {
                        Ok(Case {
                            oracle: Some(MapOracle::from_map_spec(&f, n, s)?),
                            inst: Vec::new(),
                        })
                    })
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::InvalidConfig(format!("unknown lemma id {other:?}"))),
        })
    }
}

fn uses_pool(id: &str) -> bool {
    id.starts_with("order.") || id.starts_with("rank.") || id == "potent.diagonalizability_census"
}

fn run_one(id: &'static str, cfg: &SuiteConfig, field: &Closure, s3: &[MapOracle; 2]) -> LemmaReport {
    if id.starts_with("s3.triple.") {
        return run_s3(id, &s3[1], cfg.k, cfg);
    }
    if id.starts_with("s3.") {
        return run_s3(id, &s3[0], cfg.k, cfg);
    }
    let mut r = Runner::new(id, cfg);
    let pool = if cfg.mode == Mode::Exhaustive && uses_pool(id) {
        match PotentContext::new(cfg.m, cfg.n, cfg.p).and_then(|c| enumerate_potents_within(&c, cfg.budget as u128)) {
            Ok(pool) => Some(pool),
            Err(e) => {
                r.fail(None, Vec::new(), None, format!("error: {e}"));
                return r.finish();
            }
        }
    } else {
        None
    };
    let mut gen = Gen {
        cfg,
        field: field.clone(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed_for(id)),
        pool,
        note: None,
    };
    let cases = match gen.cases(id) {
        Ok(c) => c,
        Err(e) => {
            r.fail(None, Vec::new(), None, format!("instance generation failed: {e}"));
            return r.finish();
        }
    };
    if let Some(note) = gen.note.take() {
        r.note(note);
    }
    let census = id == "potent.diagonalizability_census";
    let mut nondiag: Option<ExactMatrix> = None;
    for case in cases {
        if census && nondiag.is_none() {
            if let Some((_, x)) = case.inst.first() {
                if x.is_diagonalizable().is_ok_and(|d| !d) {
                    nondiag = Some(x.clone());
                }
            }
        }
        let oracle = case.oracle.as_ref();
        r.check(oracle, case.inst, |mats| check_instance(id, cfg, oracle, mats));
        if r.failed() {
            break;
        }
    }
    if census && !r.failed() {
        let divides = (cfg.m - 1) % cfg.p == 0;
        match (&nondiag, divides && cfg.n >= 2) {
            (Some(x), true) => r.evidence("non-diagonalizable", x),
            (None, true) => r.fail(
                None,
                Vec::new(),
                None,
                "p divides m - 1 but no non-diagonalizable potent turned up".into(),
            ),
            _ => {}
        }
    }
    if id == "potent.nondiagonalizable_witness" && !r.failed() {
        if let Some(a) = (cfg.n >= 2 && (cfg.m - 1) % cfg.p == 0)
            .then(|| ExactMatrix::identity(field, cfg.n).with_entry(0, 1, field.one()))
        {
            r.evidence("A", &a);
        }
    }
    r.finish()
}

/// Every lemma in [`LEMMA_IDS`], in parallel, reports sorted by id. The s3
/// properties run against a random canonical map drawn from the seed; the
/// triple ones need phi(I) = I and get the same map with epsilon = 1.
pub fn run_lemma_suite(cfg: &SuiteConfig) -> Result<Vec<LemmaReport>> {
    run_lemmas(cfg, LEMMA_IDS)
}

/// The subset of lemmas named in `ids`.
pub fn run_lemmas(cfg: &SuiteConfig, ids: &[&'static str]) -> Result<Vec<LemmaReport>> {
    cfg.validate()?;
    for id in ids {
        if !LEMMA_IDS.contains(id) {
            return Err(Error::InvalidConfig(format!("unknown lemma id {id:?}")));
        }
    }
    let field = cfg.field()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed_for("s3"));
    let map = StructuredMap::random_canonical(&field, cfg.n, cfg.k, 2, &mut rng)?;
    let unital = match &map.form {
        MapForm::Canonical { t, e, transpose, .. } => StructuredMap::canonical(field.one(), t.clone(), *e, *transpose, cfg.k)?,
        MapForm::Constant { .. } => unreachable!("random_canonical is never constant"),
    };
    let oracles = [
        MapOracle::from_structured(&field, &map)?,
        MapOracle::from_structured(&field, &unital)?,
    ];
    debug_assert!(S3_LEMMA_IDS.iter().all(|id| LEMMA_IDS.contains(id)));
    let mut reports: Vec<LemmaReport> = ids.par_iter().map(|id| run_one(id, cfg, &field, &oracles)).collect();
    reports.sort_by(|a, b| a.lemma_id.cmp(&b.lemma_id));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_sorted_and_unique() {
        let mut v = LEMMA_IDS.to_vec();
        v.sort();
        v.dedup();
        assert_eq!(v, LEMMA_IDS);
    }

    #[test]
    fn small_default_like_run_passes() {
        let cfg = SuiteConfig {
            p: 3,
            n: 2,
            k: 2,
            m: 4,
            samples: 20,
            ..SuiteConfig::default()
        };
        let reports = run_lemma_suite(&cfg).unwrap();
        assert_eq!(reports.len(), LEMMA_IDS.len());
        for r in &reports {
            assert!(r.passed(), "{}: {:?}", r.lemma_id, r.counterexample);
        }
        let census = reports.iter().find(|r| r.lemma_id == "potent.diagonalizability_census").unwrap();
        assert_eq!(census.evidence.len(), 1);
    }

    #[test]
    fn exhaustive_order_suite() {
        let cfg = SuiteConfig {
            p: 3,
            n: 2,
            k: 1,
            m: 3,
            samples: 5,
            mode: Mode::Exhaustive,
            ..SuiteConfig::default()
        };
        let ids: Vec<&'static str> = LEMMA_IDS.iter().copied().filter(|id| uses_pool(id)).collect();
        for r in run_lemmas(&cfg, &ids).unwrap() {
            assert!(r.passed(), "{}: {:?}", r.lemma_id, r.counterexample);
            assert!(r.checked > 5, "{}", r.lemma_id);
        }
    }

    #[test]
    fn counterexamples_recheck_from_json() {
        let cfg = SuiteConfig {
            p: 5,
            n: 2,
            k: 2,
            samples: 10,
            ..SuiteConfig::default()
        };
        let f = cfg.field().unwrap();
        let o = MapOracle::from_map_spec(
            &f,
            2,
            MapSpec::Power {
                of: Box::default(),
                exponent: 2,
            },
        )
        .unwrap();
        let r = run_s3("s3.homogeneity", &o, 2, &cfg);
        assert!(!r.passed());
        let line = r.to_json_line();
        let back: LemmaReport = serde_json::from_str(&line).unwrap();
        assert!(recheck_counterexample(&back).unwrap());
    }
}
