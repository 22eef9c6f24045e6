//! Omniscient checks on size-dependent broadcast snapshots: the master
//! forest, group integrity, matching symmetry and the progress measure.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::{Snapshot, SnapshotKind, StationView};
use crate::error::{Error, Result};
use crate::geometry::{dir_set, pivotal_key, Network};

/// Components of the progress measure at the end of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressSnapshot {
    pub block: u64,
    pub informed: u64,
    /// `n` minus the number of groups; uninformed stations count as singleton groups.
    pub groups: u64,
    /// Pairs of an informed station and a direction with an informed station in that box.
    pub tuples: u64,
    /// Partially stable blocks so far.
    pub stable_blocks: u64,
    pub pi: u64,
}

/// Snapshots taken at block starts, in order.
pub fn block_snapshots(snapshots: &[Snapshot]) -> Vec<&Snapshot> {
    snapshots.iter().filter(|s| s.kind == SnapshotKind::Phase).collect()
}

fn master_of(views: &[StationView], index: &BTreeMap<u32, usize>, v: usize) -> Option<u32> {
    let mut cur = v;
    for _ in 0..=views.len() {
        let m = views[cur].master?;
        if m == views[cur].id {
            return Some(m);
        }
        cur = *index.get(&m)?;
        if !views[cur].informed {
            return None;
        }
    }
    None
}

fn id_index(snap: &Snapshot) -> BTreeMap<u32, usize> {
    snap.stations.iter().enumerate().map(|(i, v)| (v.id, i)).collect()
}

/// `true` if `v` points at its root and knows the root's group.
fn consistent(views: &[StationView], index: &BTreeMap<u32, usize>, v: usize) -> bool {
    let Some(root) = master_of(views, index, v) else { return false };
    views[v].master == Some(root) && views[v].group == views[index[&root]].group
}

/// Master pointers are acyclic with leaders exactly at the roots.
pub fn check_forest(snap: &Snapshot) -> std::result::Result<(), String> {
    let index = id_index(snap);
    for (i, v) in snap.stations.iter().enumerate() {
        if !v.informed {
            continue;
        }
        let Some(root) = master_of(&snap.stations, &index, i) else {
            return Err(format!("station {} has no root at round {}", v.id, snap.round));
        };
        let is_root = v.master == Some(v.id);
        if is_root != (v.leader == Some(true)) {
            return Err(format!("station {} is root {is_root} but leader {:?} at round {}", v.id, v.leader, snap.round));
        }
        if snap.stations[index[&root]].leader != Some(true) {
            return Err(format!("root {root} of station {} is not a leader", v.id));
        }
    }
    Ok(())
}

/// Integrity: leaders' groups partition the informed stations, every group
/// is contained in its master's group and groups stay inside one box.
pub fn check_integrity(net: &Network, snap: &Snapshot) -> std::result::Result<(), String> {
    let index = id_index(snap);
    let boxes: Vec<(i64, i64)> = (0..net.len()).map(|i| pivotal_key(net.pos(i), &net.params)).collect();
    let mut covered = BTreeSet::new();
    for v in snap.stations.iter().filter(|v| v.informed && v.leader == Some(true)) {
        for &u in v.group.as_deref().unwrap_or_default() {
            if !covered.insert(u) {
                return Err(format!("station {u} lies in two leaders' groups at round {}", snap.round));
            }
        }
    }
    let informed: BTreeSet<u32> = snap.stations.iter().filter(|v| v.informed).map(|v| v.id).collect();
    if covered != informed {
        let missing: Vec<_> = informed.symmetric_difference(&covered).collect();
        return Err(format!("leader groups differ from informed set on {missing:?} at round {}", snap.round));
    }
    for v in &snap.stations {
        if !v.informed {
            continue;
        }
        let g = v.group.as_deref().unwrap_or_default();
        let m = v.master.ok_or_else(|| format!("station {} has no master", v.id))?;
        let mi = *index.get(&m).ok_or_else(|| format!("master {m} is not a station"))?;
        let mg = snap.stations[mi].group.as_deref().unwrap_or_default();
        if !g.iter().all(|u| mg.binary_search(u).is_ok()) {
            return Err(format!("group of {} is not inside its master's group at round {}", v.id, snap.round));
        }
        let bi = net.index_of(v.id).ok_or_else(|| format!("unknown station {}", v.id))?;
        if boxes[net.index_of(m).unwrap_or(bi)] != boxes[bi] {
            return Err(format!("master {m} of {} lies in another box", v.id));
        }
        for u in g {
            match net.index_of(*u) {
                Some(ui) if boxes[ui] == boxes[bi] => {}
                _ => return Err(format!("group of {} holds {u} from another box", v.id)),
            }
        }
    }
    Ok(())
}

/// Matching symmetry: partners point at each other and exactly one of them stays leader.
pub fn check_matching(snap: &Snapshot) -> std::result::Result<(), String> {
    let index = id_index(snap);
    for v in snap.stations.iter().filter(|v| v.informed) {
        if let Some(u) = v.matched {
            let w = &snap.stations[*index.get(&u).ok_or_else(|| format!("partner {u} missing"))?];
            if w.matched != Some(v.id) {
                return Err(format!("{} matched {u} but {u} matched {:?} at round {}", v.id, w.matched, snap.round));
            }
            if (v.leader == Some(true)) == (w.leader == Some(true)) {
                return Err(format!("matched pair {} / {u} did not yield exactly one leader", v.id));
            }
        }
    }
    Ok(())
}

fn one_leader_per_box(net: &Network, snap: &Snapshot) -> bool {
    let mut seen = BTreeSet::new();
    snap.stations.iter().enumerate().filter(|(_, v)| v.informed && v.leader == Some(true)).all(|(i, _)| {
        let idx = net.index_of(snap.stations[i].id).expect("station exists");
        seen.insert(pivotal_key(net.pos(idx), &net.params))
    })
}

fn partially_stable(net: &Network, snap: &Snapshot) -> bool {
    let index = id_index(snap);
    one_leader_per_box(net, snap)
        && (0..snap.stations.len()).any(|i| snap.stations[i].informed && !consistent(&snap.stations, &index, i))
}

/// `(informed, n − groups, tuples)` of one snapshot.
fn measure(net: &Network, snap: &Snapshot) -> (u64, u64, u64) {
    let n = net.len() as u64;
    let boxes: Vec<(i64, i64)> = (0..net.len()).map(|i| pivotal_key(net.pos(i), &net.params)).collect();
    let informed_idx: Vec<usize> =
        snap.stations.iter().filter(|v| v.informed).map(|v| net.index_of(v.id).expect("station exists")).collect();
    let informed = informed_idx.len() as u64;
    let leaders = snap.stations.iter().filter(|v| v.informed && v.leader == Some(true)).count() as u64;
    let groups = leaders + (n - informed);
    let occupied: BTreeSet<(i64, i64)> = informed_idx.iter().map(|&i| boxes[i]).collect();
    let tuples = informed_idx
        .iter()
        .map(|&i| dir_set().iter().filter(|&&(a, b)| occupied.contains(&(boxes[i].0 + a, boxes[i].1 + b))).count() as u64)
        .sum();
    (informed, n - groups, tuples)
}

/// Progress after each block, from block-start snapshots (the snapshot at
/// the start of block `j + 1` closes block `j`).
pub fn progress(net: &Network, snapshots: &[Snapshot]) -> Result<Vec<ProgressSnapshot>> {
    let snaps = block_snapshots(snapshots);
    if snaps.is_empty() {
        return Err(Error::invalid("progress needs block snapshots; run with snapshots enabled"));
    }
    let mut out = Vec::new();
    let mut stable = 0u64;
    for (j, pair) in snaps.windows(2).enumerate() {
        if partially_stable(net, pair[0]) {
            stable += 1;
        }
        let (informed, groups, tuples) = measure(net, pair[1]);
        out.push(ProgressSnapshot {
            block: j as u64,
            informed,
            groups,
            tuples,
            stable_blocks: stable,
            pi: informed + groups + tuples + stable,
        });
    }
    Ok(out)
}

/// Monotonicity of the measure and the window condition: from every block
/// that starts with uninformed stations, some later block `k` closes a
/// window whose total increase is at least its length.
pub fn check_progress(net: &Network, snapshots: &[Snapshot]) -> std::result::Result<(), String> {
    let prog = progress(net, snapshots).map_err(|e| e.to_string())?;
    let snaps = block_snapshots(snapshots);
    let n = net.len() as u64;
    let (a, b, c) = measure(net, snaps[0]);
    let initial = a + b + c;
    let mut prev = initial;
    for p in &prog {
        if p.pi < prev {
            return Err(format!("progress dropped from {prev} to {} in block {}", p.pi, p.block));
        }
        prev = p.pi;
    }
    for j in 0..prog.len() {
        if measure(net, snaps[j]).0 == n {
            continue;
        }
        let before = if j == 0 { initial } else { prog[j - 1].pi };
        if !(j..prog.len()).any(|k| prog[k].pi - before >= (k - j + 1) as u64) {
            return Err(format!("no window starting at block {j} gains its length in progress"));
        }
    }
    Ok(())
}

/// All block-boundary checks of the size-dependent broadcast.
pub fn check_size_invariants(net: &Network, snapshots: &[Snapshot]) -> std::result::Result<(), String> {
    for snap in block_snapshots(snapshots) {
        check_forest(snap)?;
        check_integrity(net, snap)?;
        check_matching(snap)?;
    }
    Ok(())
}
