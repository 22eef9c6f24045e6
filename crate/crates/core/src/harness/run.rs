//! Algorithm selection and single runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{Outcome, Round, RunConfig, SnapshotMode, StopRule, Trace};
use crate::error::{Error, Result};
use crate::geometry::Network;

/// Algorithms the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Local knowledge plus the network's granularity.
    GranUbr,
    /// Local knowledge plus a station-count bound.
    DiamUbr,
    /// No local knowledge; knows `n`.
    SizeUbr,
    /// No local knowledge; elections sized for `N`.
    General,
    /// No local knowledge; elections sized for `n`.
    GeneralN,
    /// One election with every station awake.
    LeaderElection,
    ProbeFlood,
    ProbeSequential,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::GranUbr,
        Algorithm::DiamUbr,
        Algorithm::SizeUbr,
        Algorithm::General,
        Algorithm::GeneralN,
        Algorithm::LeaderElection,
        Algorithm::ProbeFlood,
        Algorithm::ProbeSequential,
    ];

    /// Broadcast algorithms shipped by the library.
    pub const BROADCAST: [Algorithm; 5] =
        [Algorithm::GranUbr, Algorithm::DiamUbr, Algorithm::SizeUbr, Algorithm::General, Algorithm::GeneralN];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GranUbr => "gran-ubr",
            Algorithm::DiamUbr => "diam-ubr",
            Algorithm::SizeUbr => "size-ubr",
            Algorithm::General => "general",
            Algorithm::GeneralN => "general-n",
            Algorithm::LeaderElection => "leader-election",
            Algorithm::ProbeFlood => "probe-flood",
            Algorithm::ProbeSequential => "probe-sequential",
        }
    }

    /// Stations know their neighbours' ids and positions.
    pub fn local_knowledge(self) -> bool {
        matches!(self, Algorithm::GranUbr | Algorithm::DiamUbr)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

/// Station-count bound handed to the partition-based algorithm: shared
/// across networks up to 64 stations so their timetables coincide.
pub fn diam_bound(net: &Network) -> u64 {
    (net.len() as u64).max(64)
}

/// Binds `$f` to a protocol factory `Fn(&Network) -> Result<P>` for `$alg`
/// and evaluates `$body` with it.
#[macro_export]
macro_rules! with_factory {
    ($alg:expr, $f:ident => $body:expr) => {{
        use $crate::harness::Algorithm as A;
        match $alg {
            A::GranUbr => {
                let $f = |n: &$crate::Network| $crate::local::gran_ubr(n, n.granularity().max(1.0));
                $body
            }
            A::DiamUbr => {
                let $f = |n: &$crate::Network| $crate::local::diam_ubr(n, $crate::harness::diam_bound(n));
                $body
            }
            A::SizeUbr => {
                let $f = |n: &$crate::Network| $crate::adhoc::SizeUbr::new(n);
                $body
            }
            A::General => {
                let $f = |n: &$crate::Network| $crate::adhoc::GeneralBroadcast::new(n);
                $body
            }
            A::GeneralN => {
                let $f = |n: &$crate::Network| $crate::adhoc::GeneralBroadcast::with_bound(n, n.len() as u64);
                $body
            }
            A::LeaderElection => {
                let $f = |n: &$crate::Network| $crate::adhoc::LeaderElection::new(n, n.len() as u64);
                $body
            }
            A::ProbeFlood => {
                let $f = |_: &$crate::Network| -> $crate::Result<$crate::adversary::FloodProbe> {
                    Ok($crate::adversary::FloodProbe)
                };
                $body
            }
            A::ProbeSequential => {
                let $f = |n: &$crate::Network| -> $crate::Result<$crate::adversary::SequentialProbe> {
                    Ok($crate::adversary::SequentialProbe::new(n))
                };
                $body
            }
        }
    }};
}

/// Settings of one run.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    pub max_rounds: Round,
    pub snapshots: SnapshotMode,
}

impl RunOptions {
    pub fn new(algorithm: Algorithm) -> Self {
        RunOptions { algorithm, max_rounds: RunConfig::default().max_rounds, snapshots: SnapshotMode::Off }
    }

    pub fn config(&self, net: &Network) -> RunConfig {
        let initially_informed = if self.algorithm == Algorithm::LeaderElection {
            net.stations.iter().map(|s| s.id).collect()
        } else {
            Vec::new()
        };
        RunConfig {
            max_rounds: self.max_rounds,
            snapshots: self.snapshots,
            stop: StopRule::Settled,
            initially_informed,
            ..RunConfig::default()
        }
    }
}

/// Runs one algorithm on one network.
pub fn run_algorithm(net: &Network, opts: &RunOptions) -> Result<Trace> {
    let cfg = opts.config(net);
    with_factory!(opts.algorithm, make => crate::engine::run(net, make(net)?, cfg))
}

/// Machine-readable summary of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub outcome: Outcome,
    pub rounds: Round,
    /// Round in which the last station was informed.
    pub completion_round: Option<Round>,
    pub informed: usize,
    pub n: usize,
    pub flags: Vec<(u32, String)>,
    pub digest: String,
}

impl RunSummary {
    pub fn of(algorithm: Algorithm, net: &Network, trace: &Trace) -> Self {
        RunSummary {
            algorithm: algorithm.name().into(),
            outcome: trace.outcome,
            rounds: trace.rounds,
            completion_round: trace.completion_round(),
            informed: trace.informed_count(),
            n: net.len(),
            flags: trace.flags.clone(),
            digest: trace_digest(trace),
        }
    }
}

/// SHA-256 over the JSONL trace, the outcome and the informed rounds.
pub fn trace_digest(trace: &Trace) -> String {
    let mut h = Sha256::new();
    h.update(trace.protocol.as_bytes());
    h.update(trace.to_jsonl().as_bytes());
    h.update(serde_json::to_string(&(trace.outcome, trace.rounds, &trace.informed_round)).expect("serializes").as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
