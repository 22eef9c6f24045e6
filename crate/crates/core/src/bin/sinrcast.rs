use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sinrcast::adhoc::progress;
use sinrcast::engine::SnapshotMode;
use sinrcast::harness::{self, exit, Algorithm, FamilySpec, NetSpec, RunOptions, RunSummary, Suite};
use sinrcast::schedules::{build_ssf, verify_ssf};
use sinrcast::{Error, Network, Result};

#[derive(Parser)]
#[command(name = "sinrcast", version, about = "Deterministic SINR broadcast simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Path-loss exponent override.
    #[arg(long)]
    alpha: Option<f64>,
    /// Sensitivity slack override.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Seed for random generators and id sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Round budget.
    #[arg(long, default_value_t = 50_000_000)]
    max_rounds: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a network (or `ssf:N:K` for a selective family) as JSON.
    Gen {
        spec: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm and print a JSON summary.
    Run {
        #[arg(long)]
        net: String,
        #[arg(long)]
        alg: Algorithm,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "off")]
        snapshots: Snapshots,
        /// Trace file (JSONL); size-ubr with snapshots also writes `<out>.progress.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and run the invariant checks of its algorithm.
    Verify {
        trace: PathBuf,
        #[arg(long)]
        net: String,
        #[arg(long)]
        alg: Option<Algorithm>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a suite file and write the benchmark CSV.
    Bench {
        suite: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the lower-bound adversary (`fan:DELTA:D` or `chain:D`).
    Adversary {
        family: String,
        /// Algorithm to test; all broadcast algorithms and probes when omitted.
        #[arg(long)]
        alg: Option<Algorithm>,
        #[command(flatten)]
        common: Common,
        /// Directory for member networks, manifest and results.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Snapshots {
    Off,
    Boundaries,
    Full,
}

impl From<Snapshots> for SnapshotMode {
    fn from(s: Snapshots) -> Self {
        match s {
            Snapshots::Off => SnapshotMode::Off,
            Snapshots::Boundaries => SnapshotMode::Boundaries,
            Snapshots::Full => SnapshotMode::Full,
        }
    }
}

fn load(net: &str, c: &Common) -> Result<Network> {
    if let (Some(seed), Ok(NetSpec::RandomConnected { n, boxes, .. })) = (c.seed, net.parse::<NetSpec>()) {
        let p = harness::params_with(Default::default(), c.alpha, c.epsilon)?;
        return NetSpec::RandomConnected { n, boxes, seed }.build(p);
    }
    harness::load_network(net, c.alpha, c.epsilon)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(spec: &str, c: &Common, out: Option<&Path>) -> Result<i32> {
    if let Some(rest) = spec.strip_prefix("ssf:") {
        let p: Vec<&str> = rest.split(':').collect();
        let (n, k) = match p.as_slice() {
            [n, k] => (n.parse().ok(), k.parse().ok()),
            _ => (None, None),
        };
        let (Some(n), Some(k)) = (n, k) else {
            return Err(Error::invalid(format!("bad selector spec '{spec}', want ssf:N:K")));
        };
        let fam = build_ssf(n, k);
        if !verify_ssf(&fam) {
            return Err(Error::Construction("selector failed verification".into()));
        }
        emit(out, &(fam.to_json() + "\n"))?;
        return Ok(exit::OK);
    }
    emit(out, &(load(spec, c)?.to_json() + "\n"))?;
    Ok(exit::OK)
}

fn run(net: &str, alg: Algorithm, c: &Common, snapshots: SnapshotMode, out: Option<&Path>) -> Result<i32> {
    let network = load(net, c)?;
    let opts = RunOptions { max_rounds: c.max_rounds, snapshots, ..RunOptions::new(alg) };
    let trace = harness::run_algorithm(&network, &opts)?;
    if let Some(path) = out {
        std::fs::write(path, trace.to_jsonl())?;
        if alg == Algorithm::SizeUbr && snapshots != SnapshotMode::Off {
            let rows = progress(&network, &trace.snapshots)?;
            let mut p = path.as_os_str().to_owned();
            p.push(".progress.csv");
            std::fs::write(PathBuf::from(p), harness::progress_csv(&rows)?)?;
        }
    }
    let summary = RunSummary::of(alg, &network, &trace);
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(harness::exit_code_of_run(&summary))
}

fn verify(trace: &Path, net: &str, alg: Option<Algorithm>, c: &Common, out: Option<&Path>) -> Result<i32> {
    let network = load(net, c)?;
    let text = std::fs::read_to_string(trace)?;
    let report = harness::verify_trace(&network, &text, alg)?;
    emit(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    if let Some(f) = report.first_failure() {
        eprintln!("check {} failed: {:?}", f.name, f.status);
        return Ok(exit::INVARIANT);
    }
    Ok(exit::OK)
}

fn bench(suite: &Path, out: Option<&Path>) -> Result<i32> {
    let suite = Suite::from_json(&std::fs::read_to_string(suite)?)?;
    let mut rows = Vec::new();
    let mut code = exit::OK;
    for r in harness::bench(&suite)? {
        match r {
            Ok(row) => {
                if row.informed < row.n {
                    code = code.max(exit::BUDGET);
                }
                rows.push(row);
            }
            Err(e) => {
                eprintln!("bench row failed: {e}");
                code = code.max(harness::exit_code_of(&e));
            }
        }
    }
    emit(out, &harness::bench_csv(&rows)?)?;
    Ok(code)
}

fn adversary(family: &str, alg: Option<Algorithm>, c: &Common, out: Option<&Path>) -> Result<i32> {
    let family: FamilySpec = family.parse()?;
    let params = harness::params_with(Default::default(), c.alpha, c.epsilon)?;
    let opts = harness::AdversaryOptions { params, max_rounds: c.max_rounds, seed: c.seed.unwrap_or(0), ..Default::default() };
    let algs: Vec<Algorithm> = match alg {
        Some(a) => vec![a],
        None => Algorithm::BROADCAST.into_iter().chain([Algorithm::ProbeFlood, Algorithm::ProbeSequential]).collect(),
    };
    let rows = algs.iter().map(|&a| harness::adversary_row(family, a, &opts)).collect::<Result<Vec<_>>>()?;
    let csv = harness::adversary_csv(&rows)?;
    if let Some(dir) = out {
        harness::export_family(family, params, opts.seed, dir)?;
        std::fs::write(dir.join("results.csv"), &csv)?;
    }
    print!("{csv}");
    let below = rows.iter().any(|r| r.forced_rounds < r.bound);
    Ok(if below { exit::INVARIANT } else { exit::OK })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::BAD_INPUT as u8 } else { 0 });
        }
    };
    let result = match &cli.cmd {
        Cmd::Gen { spec, common, out } => gen(spec, common, out.as_deref()),
        Cmd::Run { net, alg, common, snapshots, out } => run(net, *alg, common, (*snapshots).into(), out.as_deref()),
        Cmd::Verify { trace, net, alg, common, out } => verify(trace, net, *alg, common, out.as_deref()),
        Cmd::Bench { suite, out } => bench(suite, out.as_deref()),
        Cmd::Adversary { family, alg, common, out } => adversary(family, *alg, common, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code_of(&e) as u8)
        }
    }
}
