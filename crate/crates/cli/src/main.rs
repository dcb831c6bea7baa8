use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kpotent_core::generate::{replay, simplicity_witness, SimplicityWitness, WitnessJson};
use kpotent_core::preserver::{canonicalize, verify_identity, MapOracle, OracleSpec, ProbeSampler};
use kpotent_core::suite::{run_lemma_suite, run_lemmas, Mode, SuiteConfig, LEMMA_IDS};
use kpotent_core::{certify, Closure, Error, ExactMatrix, FieldConfig, MatrixJson};

/// Exact checks for maps preserving A^k o B on matrices over the algebraic
/// closure of F_p.
#[derive(Parser, Debug)]
#[command(name = "kpotent", version, about)]
struct Cli {
    /// Field characteristic (odd prime). Input files carry their own p; a
    /// conflicting value here is an input error.
    #[arg(long, global = true, env = "KPOTENT_P")]
    p: Option<u32>,
    /// Matrix size
    #[arg(long, global = true, env = "KPOTENT_N")]
    n: Option<usize>,
    /// Power in the mixed product A^k o B
    #[arg(long, global = true, env = "KPOTENT_K")]
    k: Option<u64>,
    /// Potency exponent for the order and rank suites
    #[arg(long, global = true, env = "KPOTENT_M")]
    m: Option<u32>,
    #[arg(long, global = true, env = "KPOTENT_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true, env = "KPOTENT_SAMPLES")]
    samples: Option<usize>,
    /// random | exhaustive
    #[arg(long, global = true, env = "KPOTENT_MODE")]
    mode: Option<String>,
    /// Largest extension degree the field tower may build
    #[arg(long, global = true, env = "KPOTENT_TOWER_LIMIT")]
    tower_limit: Option<u32>,
    /// Output file; stdout when absent
    #[arg(long, global = true, env = "KPOTENT_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the property suites and emit one JSON report per line
    LemmaSuite {
        /// Restrict to these lemma ids (repeatable)
        #[arg(long = "only")]
        only: Vec<String>,
        /// Print the known lemma ids and exit
        #[arg(long)]
        list: bool,
    },
    /// Write a certificate for a matrix and check that it evaluates back
    Certify { matrix: PathBuf },
    /// Write a derivation of the identity from a nonzero seed matrix
    Witness { matrix: PathBuf },
    /// Replay a witness against its seed matrix
    Replay { witness: PathBuf, seed_matrix: PathBuf },
    /// Recover the normal form of the map described by an oracle spec
    Canonicalize { oracle: PathBuf },
    /// Check the mixed identity on sampled pairs for an oracle spec
    VerifyMap { oracle: PathBuf },
}

enum Failure {
    /// A check ran and did not pass.
    Check(String),
    Input(String),
    Oracle(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPreserver { .. } | Error::UnrepresentableOmega { .. } | Error::DegenerateOracle { .. } => {
                Failure::Oracle(e.to_string())
            }
            Error::InvalidConfig(_)
            | Error::Parse(_)
            | Error::ZeroSeed
            | Error::DimensionMismatch { .. }
            | Error::CharacteristicMismatch { .. }
            | Error::TowerLimitExceeded { .. } => Failure::Input(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(what: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", what.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(input(path))?;
    serde_json::from_str(&text).map_err(input(path))
}

impl Cli {
    fn config(&self) -> Result<SuiteConfig, Failure> {
        let d = SuiteConfig::default();
        let mode = match &self.mode {
            Some(s) => s.parse::<Mode>()?,
            None => d.mode,
        };
        let cfg = SuiteConfig {
            p: self.p.unwrap_or(d.p),
            n: self.n.unwrap_or(d.n),
            k: self.k.unwrap_or(d.k),
            m: self.m.unwrap_or(d.m),
            seed: self.seed.unwrap_or(d.seed),
            samples: self.samples.unwrap_or(d.samples),
            mode,
            tower_limit: self.tower_limit.unwrap_or(d.tower_limit),
            out: self.out.clone(),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn k(&self) -> Result<u64, Failure> {
        match self.k.unwrap_or(SuiteConfig::default().k) {
            0 => Err(Failure::Input("k must be positive".into())),
            k => Ok(k),
        }
    }

    /// The field for data of characteristic `file_p`.
    fn field_for(&self, file_p: Option<u32>) -> Result<Closure, Failure> {
        let p = match (self.p, file_p) {
            (Some(a), Some(b)) if a != b => {
                return Err(Failure::Input(format!("--p {a} conflicts with p = {b} in the input")));
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => SuiteConfig::default().p,
        };
        let limit = self.tower_limit.unwrap_or(SuiteConfig::default().tower_limit);
        Ok(Closure::new(FieldConfig::new(p).with_tower_limit(limit))?)
    }

    fn read_matrix(&self, path: &Path) -> Result<ExactMatrix, Failure> {
        let j: MatrixJson = read_json(path)?;
        let field = self.field_for(Some(j.p))?;
        ExactMatrix::from_json(&field, &j).map_err(input(path))
    }

    fn read_oracle(&self, path: &Path) -> Result<MapOracle, Failure> {
        let spec: OracleSpec = read_json(path)?;
        let field = self.field_for(spec.p)?;
        let n = match (self.n, spec.n) {
            (Some(a), Some(b)) if a != b => {
                return Err(Failure::Input(format!("--n {a} conflicts with n = {b} in the oracle spec")));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => SuiteConfig::default().n,
        };
        MapOracle::from_spec(&field, n, &spec).map_err(input(path))
    }

    /// The payload goes to --out when given, else stdout.
    fn emit(&self, payload: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => fs::write(path, format!("{payload}\n")).map_err(input(path)),
            None => {
                println!("{payload}");
                Ok(())
            }
        }
    }

    /// Status lines go to stdout when the payload went to a file.
    fn status(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::LemmaSuite { only, list } => {
            if *list {
                for id in LEMMA_IDS {
                    println!("{id}");
                }
                return Ok(());
            }
            let cfg = cli.config()?;
            let reports = if only.is_empty() {
                run_lemma_suite(&cfg)?
            } else {
                let mut ids = Vec::new();
                for want in only {
                    let id = LEMMA_IDS
                        .iter()
                        .find(|id| *id == want)
                        .ok_or_else(|| Failure::Input(format!("unknown lemma id {want:?}")))?;
                    ids.push(*id);
                }
                run_lemmas(&cfg, &ids)?
            };
            let lines: Vec<String> = reports.iter().map(|r| r.to_json_line()).collect();
            cli.emit(&lines.join("\n"))?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.lemma_id.as_str()).collect();
            if failed.is_empty() {
                cli.status(&format!("OK {} lemmas", reports.len()));
                Ok(())
            } else {
                Err(Failure::Check(format!("failed: {}", failed.join(", "))))
            }
        }
        Command::Certify { matrix } => {
            let x = cli.read_matrix(matrix)?;
            let k = cli.k()?;
            let cert = certify(&x, k)?;
            cli.emit(&serde_json::to_string(&cert.to_json()).expect("certificates serialize"))?;
            if cert.eval(k)? == x {
                cli.status(&format!("OK depth={}", cert.depth()));
                Ok(())
            } else {
                Err(Failure::Check("certificate does not evaluate to the input".into()))
            }
        }
        Command::Witness { matrix } => {
            let x = cli.read_matrix(matrix)?;
            let k = cli.k()?;
            let w = simplicity_witness(&x, k)?;
            cli.emit(&serde_json::to_string(&w.to_json()).expect("witnesses serialize"))?;
            report_replay(cli, &w, &x, k)
        }
        Command::Replay { witness, seed_matrix } => {
            let x = cli.read_matrix(seed_matrix)?;
            let j: WitnessJson = read_json(witness)?;
            let w = SimplicityWitness::from_json(x.field(), &j).map_err(input(witness))?;
            report_replay(cli, &w, &x, cli.k()?)
        }
        Command::Canonicalize { oracle } => {
            let o = cli.read_oracle(oracle)?;
            let k = cli.k()?;
            match canonicalize(&o, o.n(), k) {
                Ok(m) => cli.emit(&serde_json::to_string(&m.to_json()).expect("maps serialize")),
                Err(Error::NotPreserver { witness }) => {
                    eprintln!("{}", serde_json::to_string(&witness.to_json()).expect("witnesses serialize"));
                    Err(Failure::Oracle("map violates the mixed identity".into()))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::VerifyMap { oracle } => {
            let o = cli.read_oracle(oracle)?;
            let k = cli.k()?;
            let mut sampler = ProbeSampler::default();
            if let Some(s) = cli.samples {
                sampler.random_pairs = s;
            }
            if let Some(seed) = cli.seed {
                sampler.seed = seed;
            }
            let report = verify_identity(&o, k, &sampler)?;
            cli.emit(&serde_json::to_string(&report.to_json()).expect("reports serialize"))?;
            if report.passed() {
                cli.status(&format!("OK pairs={}", report.samples_checked));
                Ok(())
            } else {
                Err(Failure::Oracle("map violates the mixed identity".into()))
            }
        }
    }
}

fn report_replay(cli: &Cli, w: &SimplicityWitness, seed: &ExactMatrix, k: u64) -> Result<(), Failure> {
    let out = replay(w, seed, k);
    match out.failed_step {
        None => {
            cli.status(&format!("OK steps={}", w.steps.len()));
            Ok(())
        }
        Some(i) => {
            println!("FAIL at step {i}");
            Err(Failure::Check(format!("replay failed at step {i}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("kpotent: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("kpotent: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Oracle(msg)) => {
            eprintln!("kpotent: {msg}");
            ExitCode::from(3)
        }
    }
}
