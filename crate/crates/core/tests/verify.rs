//! Trace verification rejects tampered traces.

use sinrcast::engine::{parse_jsonl, RoundRecord};
use sinrcast::harness::{replay, run_algorithm, verify_trace, Algorithm, NetSpec, RunOptions};
use sinrcast::sinr::Link;
use sinrcast::{ModelParams, Network, SnapshotMode};

fn setup(alg: Algorithm) -> (Network, Vec<RoundRecord>) {
    let net = "grid:3:3:0.6".parse::<NetSpec>().unwrap().build(ModelParams::default()).unwrap();
    let trace = run_algorithm(&net, &RunOptions::new(alg)).unwrap();
    (net, trace.records)
}

#[test]
fn untouched_traces_replay() {
    for alg in Algorithm::BROADCAST {
        let (net, records) = setup(alg);
        assert!(replay(&net, &records, &[]).is_ok(), "{alg}");
    }
}

#[test]
fn dropped_delivery_is_caught() {
    let (net, mut records) = setup(Algorithm::GranUbr);
    let r = records.iter_mut().find(|r| !r.deliveries.is_empty()).unwrap();
    r.deliveries.pop();
    assert!(replay(&net, &records, &[]).is_err());
}

#[test]
fn invented_delivery_is_caught() {
    let (net, mut records) = setup(Algorithm::SizeUbr);
    let r = &mut records[0];
    let from = r.senders[0];
    let to = net.stations.iter().map(|s| s.id).find(|&id| id != from && !r.deliveries.iter().any(|l| l.to == id));
    r.deliveries.push(Link { to: to.unwrap(), from });
    assert!(replay(&net, &records, &[]).is_err());
}

#[test]
fn uninformed_sender_is_caught() {
    let (net, mut records) = setup(Algorithm::GranUbr);
    let last = net.stations.iter().map(|s| s.id).max().unwrap();
    records[0].senders.push(last);
    records[0].senders.sort_unstable();
    assert!(replay(&net, &records, &[]).is_err());
}

#[test]
fn reordered_rounds_are_caught() {
    let (net, mut records) = setup(Algorithm::SizeUbr);
    assert!(records.len() > 2);
    records.swap(1, 2);
    assert!(replay(&net, &records, &[]).is_err());
}

#[test]
fn tampered_snapshot_fails_invariants() {
    let net = "chain:6:0.9".parse::<NetSpec>().unwrap().build(ModelParams::default()).unwrap();
    let mut opts = RunOptions::new(Algorithm::SizeUbr);
    opts.snapshots = SnapshotMode::Boundaries;
    let trace = run_algorithm(&net, &opts).unwrap();
    let text = trace.to_jsonl();
    assert!(verify_trace(&net, &text, Some(Algorithm::SizeUbr)).unwrap().passed());

    let (_, snaps) = parse_jsonl(&text).unwrap();
    assert!(snaps.len() > 2);
    let mut lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // Strip leadership from every informed station in the last block snapshot.
    let target = snaps.iter().filter(|s| s.kind == sinrcast::engine::SnapshotKind::Phase).last().unwrap().round;
    for v in &mut lines {
        let Some(snap) = v.get_mut("snapshot") else { continue };
        if snap["round"] == target {
            for st in snap["stations"].as_array_mut().unwrap() {
                if st["informed"] == true {
                    st["leader"] = serde_json::Value::Bool(false);
                }
            }
        }
    }
    let tampered: String = lines.iter().map(|v| v.to_string() + "\n").collect();
    let report = verify_trace(&net, &tampered, Some(Algorithm::SizeUbr)).unwrap();
    assert!(!report.passed());
}
