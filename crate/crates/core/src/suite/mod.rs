//! Property suites: configuration, report records and the runner that turns
//! a stream of instances plus a predicate into a [`LemmaReport`].

mod lemmas;

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Closure, FieldConfig, DEFAULT_TOWER_LIMIT};
use crate::matrix::{ExactMatrix, MatrixJson, MAX_DIM};
use crate::preserver::{MapOracle, OracleSpec};

pub use lemmas::{check_instance, recheck_counterexample, run_lemma_suite, run_lemmas, LEMMA_IDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Random,
    Exhaustive,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Mode::Random),
            "exhaustive" => Ok(Mode::Exhaustive),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub p: u32,
    pub n: usize,
    pub k: u64,
    /// Potency exponent for the order and rank suites.
    pub m: u32,
    pub seed: u64,
    pub samples: usize,
    pub mode: Mode,
    pub tower_limit: u32,
    /// Cap on enumerated candidates and exhaustive instance counts.
    pub budget: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            p: 5,
            n: 3,
            k: 2,
            m: 3,
            seed: 0xC0FFEE,
            samples: 200,
            mode: Mode::Random,
            tower_limit: DEFAULT_TOWER_LIMIT,
            budget: crate::potent::DEFAULT_ENUMERATION_BUDGET as u64,
            out: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        FieldConfig::new(self.p).with_tower_limit(self.tower_limit).validate()?;
        if self.n == 0 || self.n > MAX_DIM {
            return Err(Error::InvalidConfig(format!("n must be in 1..={MAX_DIM}, got {}", self.n)));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        if self.m < 2 {
            return Err(Error::InvalidConfig(format!("m must be at least 2, got {}", self.m)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        if self.mode == Mode::Exhaustive {
            let space = (self.p as u128).checked_pow((self.n * self.n) as u32).unwrap_or(u128::MAX);
            if space > self.budget as u128 {
                return Err(Error::InvalidConfig(format!(
                    "exhaustive mode needs {space} candidates, budget is {}",
                    self.budget
                )));
            }
        }
        Ok(())
    }

    pub fn field(&self) -> Result<Closure> {
        Closure::new(FieldConfig::new(self.p).with_tower_limit(self.tower_limit))
    }

    /// Seed for one lemma, so suites do not share random streams.
    pub(crate) fn seed_for(&self, lemma_id: &str) -> u64 {
        lemma_id
            .bytes()
            .fold(self.seed ^ 0x9e37_79b9_7f4a_7c15, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    pub matrices: Vec<NamedMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub config: SuiteConfig,
    pub verdict: Verdict,
    /// Instances on which the property was actually exercised.
    pub checked: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<NamedMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub wall_ms: u64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One JSON line; `wall_ms` is the only nondeterministic field.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Named matrices of one instance.
pub type Instance = Vec<(String, ExactMatrix)>;

pub(crate) fn named(items: &[(&str, &ExactMatrix)]) -> Instance {
    items.iter().map(|(n, m)| (n.to_string(), (*m).clone())).collect()
}

/// Accumulates one report.
pub(crate) struct Runner<'a> {
    id: &'static str,
    cfg: &'a SuiteConfig,
    start: Instant,
    checked: u64,
    note: Option<String>,
    evidence: Vec<NamedMatrix>,
    failure: Option<Counterexample>,
}

impl<'a> Runner<'a> {
    pub fn new(id: &'static str, cfg: &'a SuiteConfig) -> Self {
        Runner {
            id,
            cfg,
            start: Instant::now(),
            checked: 0,
            note: None,
            evidence: Vec::new(),
            failure: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.note = Some(s.into());
    }

    pub fn evidence(&mut self, name: &str, m: &ExactMatrix) {
        self.evidence.push(NamedMatrix {
            name: name.into(),
            matrix: m.to_json(),
        });
    }

    /// Checks one instance with `pred`; the first failure is kept.
    pub fn check(&mut self, oracle: Option<&MapOracle>, inst: Instance, pred: impl FnOnce(&[ExactMatrix]) -> Result<bool>) {
        if self.failed() {
            return;
        }
        let mats: Vec<ExactMatrix> = inst.iter().map(|(_, m)| m.clone()).collect();
        self.checked += 1;
        let detail = match pred(&mats) {
            Ok(true) => return,
            Ok(false) => "property violated".to_string(),
            Err(e) => format!("error: {e}"),
        };
        self.fail(oracle, inst, None, detail);
    }

    pub fn fail(&mut self, oracle: Option<&MapOracle>, inst: Instance, step: Option<usize>, detail: String) {
        if self.failed() {
            return;
        }
        self.failure = Some(Counterexample {
            oracle: oracle.and_then(|o| o.spec().cloned()),
            matrices: inst
                .into_iter()
                .map(|(name, m)| NamedMatrix {
                    name,
                    matrix: m.to_json(),
                })
                .collect(),
            step,
            detail,
        });
    }

    pub fn finish(self) -> LemmaReport {
        LemmaReport {
            lemma_id: self.id.to_string(),
            config: self.cfg.clone(),
            verdict: if self.failure.is_some() { Verdict::Fail } else { Verdict::Pass },
            checked: self.checked,
            note: self.note,
            evidence: self.evidence,
            counterexample: self.failure,
            wall_ms: self.start.elapsed().as_millis() as u64,
        }
    }
}
