//! Per-box leader election without local knowledge.

use std::collections::BTreeMap;

use sinrcast::adhoc::check_election;
use sinrcast::engine::StationState;
use sinrcast::geometry::pivotal_key;
use sinrcast::harness::{run_algorithm, Algorithm, NetSpec, RunOptions};
use sinrcast::{ModelParams, SnapshotMode};

fn main() -> sinrcast::Result<()> {
    let net = "random-connected:40:6:11".parse::<NetSpec>()?.build(ModelParams::default())?;
    let opts = RunOptions { snapshots: SnapshotMode::Boundaries, ..RunOptions::new(Algorithm::LeaderElection) };
    let trace = run_algorithm(&net, &opts)?;
    let last = &trace.snapshots.last().expect("final snapshot").stations;

    let mut boxes: BTreeMap<(i64, i64), (usize, Vec<u32>)> = BTreeMap::new();
    for v in last {
        let idx = net.index_of(v.id).expect("station");
        let e = boxes.entry(pivotal_key(net.pos(idx), &net.params)).or_default();
        e.0 += 1;
        if v.state == Some(StationState::Leader) {
            e.1.push(v.id);
        }
    }
    for (key, (members, leaders)) in &boxes {
        println!("box {key:?}: {members} stations, leaders {leaders:?}");
    }

    let ids: Vec<u32> = net.stations.iter().map(|s| s.id).collect();
    let report = check_election(&net, last, &ids)?;
    println!("{} rounds; one leader per box {}, halving {}", trace.rounds, report.one_per_box, report.halving);
    Ok(())
}
