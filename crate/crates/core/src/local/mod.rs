//! Broadcasting with local knowledge: each station knows the ids and
//! positions of its communication-graph neighbours.

pub mod broadcast;
pub mod echo;
pub mod gle;
pub mod nogran;
pub mod timetable;

pub use broadcast::{LocalBroadcast, LocalKnowledge, LocalMsg, LocalProgram};
pub use nogran::{check_partitions, nogran_partition, NoGranParams, Partition, Square};

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{Snapshot, StationState, StationView};
use crate::error::Result;
use crate::geometry::{pivotal_key, Network};

/// Granularity-based broadcast with known granularity bound `g`.
pub fn gran_ubr(net: &Network, g: f64) -> Result<LocalBroadcast> {
    LocalBroadcast::granularity(net, g)
}

/// Partition-based broadcast with known station-count bound `n_known`.
pub fn diam_ubr(net: &Network, n_known: u64) -> Result<LocalBroadcast> {
    LocalBroadcast::partitioned(net, n_known)
}

fn state_of(v: &StationView) -> StationState {
    if v.informed {
        v.state.unwrap_or(StationState::Asleep)
    } else {
        StationState::Asleep
    }
}

/// Checks per-box state equality at every phase snapshot and that every
/// box active at one phase snapshot has fully informed neighbour boxes at
/// the next one.
pub fn check_box_invariants(net: &Network, snapshots: &[Snapshot]) -> std::result::Result<(), String> {
    let boxes: Vec<(i64, i64)> = (0..net.len()).map(|i| pivotal_key(net.pos(i), &net.params)).collect();
    let graph = net.comm_graph();
    let mut neighbours: BTreeMap<(i64, i64), BTreeSet<(i64, i64)>> = BTreeMap::new();
    for a in 0..net.len() {
        for b in 0..net.len() {
            if boxes[a] != boxes[b] && graph.has_edge(a, b) {
                neighbours.entry(boxes[a]).or_default().insert(boxes[b]);
            }
        }
    }
    let phases: Vec<&Snapshot> =
        snapshots.iter().filter(|s| s.kind == crate::engine::SnapshotKind::Phase).collect();
    let mut prev_active: Option<(u64, BTreeSet<(i64, i64)>)> = None;
    for snap in phases {
        if snap.stations.len() != net.len() {
            return Err(format!("snapshot at round {} has {} stations", snap.round, snap.stations.len()));
        }
        let mut per_box: BTreeMap<(i64, i64), StationState> = BTreeMap::new();
        for (i, v) in snap.stations.iter().enumerate() {
            let s = state_of(v);
            if let Some(&other) = per_box.get(&boxes[i]) {
                if other != s {
                    return Err(format!(
                        "box {:?} mixes {other:?} and {s:?} at round {} (station {})",
                        boxes[i], snap.round, v.id
                    ));
                }
            }
            per_box.insert(boxes[i], s);
        }
        if let Some((round, active)) = &prev_active {
            for b in active {
                for nb in neighbours.get(b).into_iter().flatten() {
                    if let Some(i) = (0..net.len()).find(|&i| boxes[i] == *nb && !snap.stations[i].informed) {
                        return Err(format!(
                            "box {b:?} was active at round {round} but station {} of neighbour box {nb:?} is uninformed at round {}",
                            net.id(i),
                            snap.round
                        ));
                    }
                }
            }
        }
        let active = per_box.iter().filter(|(_, &s)| s == StationState::Active).map(|(&b, _)| b).collect();
        prev_active = Some((snap.round, active));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Outcome, RunConfig, SnapshotMode};
    use crate::geometry::{ModelParams, Station};

    fn net(pts: &[(f64, f64)]) -> Network {
        let stations = pts.iter().enumerate().map(|(i, &(x, y))| Station { id: i as u32 + 1, x, y }).collect();
        Network::new(ModelParams::default(), stations, 1, 64).unwrap()
    }

    fn chain(k: usize, spacing: f64) -> Network {
        let r = ModelParams::default().range();
        net(&(0..k).map(|i| (0.01 * r + spacing * r * i as f64, 0.01 * r)).collect::<Vec<_>>())
    }

    fn cfg() -> RunConfig {
        RunConfig { snapshots: SnapshotMode::Boundaries, ..RunConfig::default() }
    }

    #[test]
    fn granularity_variant_covers_a_chain() {
        let n = chain(6, 0.8);
        let p = gran_ubr(&n, n.granularity().max(1.0)).unwrap();
        let t = run(&n, p, cfg()).unwrap();
        assert_eq!(t.outcome, Outcome::Completed);
        assert!(t.all_informed());
        assert!(t.flags.is_empty(), "{:?}", t.flags);
        check_box_invariants(&n, &t.snapshots).unwrap();
    }

    #[test]
    fn partition_variant_covers_a_chain() {
        let n = chain(5, 0.8);
        let p = diam_ubr(&n, 64).unwrap();
        let parts = p.partitions();
        assert_eq!(parts.len(), 5);
        let t = run(&n, p, cfg()).unwrap();
        assert_eq!(t.outcome, Outcome::Completed);
        assert!(t.all_informed());
        check_box_invariants(&n, &t.snapshots).unwrap();
    }

    #[test]
    fn partition_variant_handles_tiny_separations() {
        let r = ModelParams::default().range();
        let sep = r / (1u64 << 20) as f64;
        let n = net(&[(0.01 * r, 0.01 * r), (0.01 * r + sep, 0.01 * r), (0.8 * r, 0.01 * r), (0.8 * r + sep, 0.01 * r)]);
        let t = run(&n, diam_ubr(&n, 64).unwrap(), cfg()).unwrap();
        assert_eq!(t.outcome, Outcome::Completed);
        assert!(t.all_informed());
        check_box_invariants(&n, &t.snapshots).unwrap();
    }
}
