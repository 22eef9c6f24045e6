//! Offline verification of recorded traces: an independent replay of every
//! round's receptions plus the invariant checks of the algorithm that
//! produced the trace.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{diam_bound, Algorithm};
use crate::adhoc::{check_election, check_progress, check_size_invariants};
use crate::engine::{parse_jsonl, RoundRecord, Snapshot, SnapshotKind};
use crate::error::Result;
use crate::geometry::Network;
use crate::local::{check_box_invariants, check_partitions, diam_ubr, NoGranParams};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail(String),
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(flatten)]
    pub status: CheckStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    fn push(&mut self, name: &str, status: CheckStatus) {
        self.checks.push(CheckResult { name: name.into(), status });
    }

    fn push_result(&mut self, name: &str, r: std::result::Result<(), String>) {
        self.push(name, r.map_or_else(CheckStatus::Fail, |_| CheckStatus::Pass));
    }

    /// No check failed.
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(|c| matches!(c.status, CheckStatus::Fail(_)))
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| matches!(c.status, CheckStatus::Fail(_)))
    }
}

/// Receptions of one round straight from the SINR inequality.
fn receptions(net: &Network, senders: &[usize]) -> BTreeSet<(u32, u32)> {
    let p = &net.params;
    let floor = (1.0 + p.epsilon) * p.beta * p.noise;
    let power = |a: usize, b: usize| {
        let (u, v) = (&net.stations[a], &net.stations[b]);
        p.power * ((u.x - v.x).powi(2) + (u.y - v.y).powi(2)).sqrt().powf(-p.alpha)
    };
    let mut out = BTreeSet::new();
    for u in 0..net.len() {
        if senders.contains(&u) {
            continue;
        }
        let total: f64 = senders.iter().map(|&v| power(v, u)).sum();
        for &v in senders {
            let signal = power(v, u);
            if signal >= floor && signal >= p.beta * (p.noise + total - signal) {
                out.insert((net.stations[u].id, net.stations[v].id));
            }
        }
    }
    out
}

/// Replays `records`: every sender was informed before its round and every
/// recorded delivery set equals the recomputed one. Returns the informed round per station.
pub fn replay(net: &Network, records: &[RoundRecord], initially: &[u32]) -> std::result::Result<Vec<Option<u64>>, String> {
    let index = net.id_index();
    let mut informed: Vec<Option<u64>> = vec![None; net.len()];
    let mut awake = vec![false; net.len()];
    awake[net.source_index()] = true;
    for id in initially {
        let &i = index.get(id).ok_or_else(|| format!("unknown initially informed station {id}"))?;
        awake[i] = true;
    }
    for (i, a) in awake.iter().enumerate() {
        if *a {
            informed[i] = Some(0);
        }
    }
    let mut prev: Option<u64> = None;
    for rec in records {
        if prev.is_some_and(|p| rec.round <= p) {
            return Err(format!("round {} recorded out of order", rec.round));
        }
        prev = Some(rec.round);
        let mut senders = Vec::with_capacity(rec.senders.len());
        for id in &rec.senders {
            let &i = index.get(id).ok_or_else(|| format!("round {}: unknown sender {id}", rec.round))?;
            match informed[i] {
                Some(t) if t < rec.round || awake[i] => senders.push(i),
                _ => return Err(format!("round {}: sender {id} was not informed", rec.round)),
            }
        }
        let expected = receptions(net, &senders);
        let recorded: BTreeSet<(u32, u32)> = rec.deliveries.iter().map(|l| (l.to, l.from)).collect();
        if expected != recorded {
            let missing: Vec<_> = expected.difference(&recorded).collect();
            let extra: Vec<_> = recorded.difference(&expected).collect();
            return Err(format!("round {}: deliveries differ, missing {missing:?}, extra {extra:?}", rec.round));
        }
        for (to, from) in expected {
            if !rec.silent.contains(&from) {
                informed[index[&to]].get_or_insert(rec.round);
            }
        }
    }
    Ok(informed)
}

fn final_snapshot(snaps: &[Snapshot]) -> Option<&Snapshot> {
    snaps.iter().rev().find(|s| s.kind == SnapshotKind::Final)
}

/// Verifies a JSONL trace produced by `alg` on `net`.
pub fn verify_trace(net: &Network, text: &str, alg: Option<Algorithm>) -> Result<VerifyReport> {
    let (records, snaps) = parse_jsonl(text)?;
    let mut report = VerifyReport::default();
    let initially: Vec<u32> =
        if alg == Some(Algorithm::LeaderElection) { net.stations.iter().map(|s| s.id).collect() } else { Vec::new() };
    let replayed = replay(net, &records, &initially);
    match &replayed {
        Ok(_) => report.push("replay", CheckStatus::Pass),
        Err(e) => report.push("replay", CheckStatus::Fail(e.clone())),
    }
    let phase = snaps.iter().any(|s| s.kind == SnapshotKind::Phase);
    let need = |what: &str| CheckStatus::Unsupported(format!("{what} needs snapshots at boundaries or full verbosity"));
    match (final_snapshot(&snaps), &replayed) {
        (Some(f), Ok(inf)) => {
            let index = net.id_index();
            let bad = f.stations.iter().find(|v| index.get(&v.id).is_none_or(|&i| inf[i].is_some() != v.informed));
            report.push_result("final-informed", bad.map_or(Ok(()), |v| Err(format!("station {} disagrees with replay", v.id))));
        }
        (None, _) => report.push("final-informed", need("final-informed")),
        (Some(_), Err(_)) => report.push("final-informed", CheckStatus::Unsupported("replay failed".into())),
    }
    match alg {
        Some(Algorithm::GranUbr | Algorithm::DiamUbr) => {
            if phase {
                report.push_result("box-invariants", check_box_invariants(net, &snaps));
            } else {
                report.push("box-invariants", need("box-invariants"));
            }
            if alg == Some(Algorithm::DiamUbr) {
                let np = NoGranParams::new(&net.params, diam_bound(net))?;
                let parts = diam_ubr(net, diam_bound(net))?.partitions();
                report.push_result("colour-partitions", check_partitions(&parts, &np));
            }
        }
        Some(Algorithm::SizeUbr) => {
            if phase {
                report.push_result("forest-integrity-matching", check_size_invariants(net, &snaps));
                report.push_result("progress", check_progress(net, &snaps));
            } else {
                report.push("forest-integrity-matching", need("forest-integrity-matching"));
                report.push("progress", need("progress"));
            }
        }
        Some(Algorithm::LeaderElection) => match final_snapshot(&snaps) {
            Some(f) => {
                let r = check_election(net, &f.stations, &initially)?;
                report.push_result(
                    "election",
                    if r.ok() { Ok(()) } else { Err(format!("one per box {}, halving {}", r.one_per_box, r.halving)) },
                );
            }
            None => report.push("election", need("election")),
        },
        _ => {}
    }
    Ok(report)
}
