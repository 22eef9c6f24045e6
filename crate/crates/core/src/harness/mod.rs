//! Experiment plumbing behind the command-line tool: generators, runs,
//! verification, benchmarks, adversary experiments and CSV output.

pub mod bench;
pub mod csv_out;
pub mod gen;
pub mod run;
pub mod verify;

pub use bench::{bench, bench_one, load_network, params_with, thread_cap, BenchRecord, Suite, THREADS_ENV};
pub use csv_out::{adversary_csv, bench_csv, progress_csv, sig9};
pub use gen::{default_id_bound, NetSpec};
pub use run::{diam_bound, run_algorithm, trace_digest, Algorithm, RunOptions, RunSummary};
pub use verify::{replay, verify_trace, CheckResult, CheckStatus, VerifyReport};

use std::path::Path;
use std::str::FromStr;

use crate::adversary::{chain_adversary, fan_adversary, AdversaryRow, ChainFamily, FanFamily};
use crate::engine::{Outcome, Round};
use crate::error::{Error, Result};
use crate::geometry::ModelParams;
use crate::with_factory;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const BUDGET: i32 = 2;
    pub const INVARIANT: i32 = 3;
    pub const BAD_INPUT: i32 = 4;
}

/// Exit code for a library error.
pub fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::ContractViolation { .. } => exit::INVARIANT,
        _ => exit::BAD_INPUT,
    }
}

/// Exit code for a finished run.
pub fn exit_code_of_run(summary: &RunSummary) -> i32 {
    match summary.outcome {
        _ if !summary.flags.is_empty() => exit::INVARIANT,
        Outcome::Completed if summary.informed == summary.n => exit::OK,
        Outcome::BudgetExhausted => exit::BUDGET,
        _ => exit::INVARIANT,
    }
}

/// Lower-bound family selector: `fan:DELTA:D` or `chain:D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Fan { delta: usize, depth: usize },
    Chain { depth: usize },
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize> {
            p.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| Error::invalid(format!("bad family spec '{s}'")))
        };
        match (p[0], p.len()) {
            ("fan", 3) => Ok(FamilySpec::Fan { delta: num(1)?, depth: num(2)? }),
            ("chain", 2) => Ok(FamilySpec::Chain { depth: num(1)? }),
            _ => Err(Error::invalid(format!("family spec '{s}' is neither fan:DELTA:D nor chain:D"))),
        }
    }
}

impl FamilySpec {
    pub fn label(&self) -> &'static str {
        match self {
            FamilySpec::Fan { .. } => "fan",
            FamilySpec::Chain { .. } => "chain",
        }
    }

    fn fan(&self, params: ModelParams) -> Result<FanFamily> {
        match *self {
            FamilySpec::Fan { delta, depth } => {
                let n = 1 + (depth.saturating_sub(1) / 2) * (delta + 1);
                FanFamily::new(delta, depth, params, default_id_bound(n))
            }
            FamilySpec::Chain { .. } => Err(Error::invalid("not a fan family")),
        }
    }
}

/// Settings of an adversary experiment.
#[derive(Clone, Debug)]
pub struct AdversaryOptions {
    pub params: ModelParams,
    pub max_rounds: Round,
    pub seed: u64,
    /// Id permutations tried on chain families.
    pub samples: usize,
}

impl Default for AdversaryOptions {
    fn default() -> Self {
        AdversaryOptions { params: ModelParams::default(), max_rounds: 50_000_000, seed: 0, samples: 4 }
    }
}

/// Forced rounds of one algorithm on one family.
pub fn adversary_row(family: FamilySpec, alg: Algorithm, opts: &AdversaryOptions) -> Result<AdversaryRow> {
    let (delta, depth, forced, bound) = match family {
        FamilySpec::Fan { delta, depth } => {
            let fam = family.fan(opts.params)?;
            fam.check_blocking()?;
            let out = with_factory!(alg, make => fan_adversary(&fam, !alg.local_knowledge(), opts.max_rounds, make))?;
            (delta, depth, out.forced_rounds, out.bound)
        }
        FamilySpec::Chain { depth } => {
            let n = 1 + 3 * depth;
            let out = with_factory!(alg, make => chain_adversary(
                depth, default_id_bound(n), opts.params, opts.samples, opts.seed, opts.max_rounds, make
            ))?;
            (2, depth, out.forced_rounds, out.bound)
        }
    };
    Ok(AdversaryRow {
        family: family.label().into(),
        delta,
        D: depth,
        algorithm: alg.name().into(),
        forced_rounds: forced,
        bound,
    })
}

/// Writes every member network of a family plus a manifest into `dir`.
pub fn export_family(family: FamilySpec, params: ModelParams, seed: u64, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    match family {
        FamilySpec::Fan { .. } => {
            let fam = family.fan(params)?;
            for j in 0..fam.delta {
                let name = format!("member_{j:03}.json");
                fam.member(&vec![j; fam.layers])?.save(dir.join(&name))?;
                files.push(name);
            }
        }
        FamilySpec::Chain { depth } => {
            let fam = ChainFamily::shuffled(depth, default_id_bound(1 + 3 * depth), params, seed)?;
            fam.check_blocking()?;
            let name = "chain.json".to_string();
            fam.net.save(dir.join(&name))?;
            files.push(name);
        }
    }
    let manifest = serde_json::json!({ "family": format!("{family:?}"), "seed": seed, "members": files });
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(files)
}
