//! Granularity-aware broadcast on a random network, with the box
//! invariants checked at every phase boundary.

use sinrcast::harness::{run_algorithm, Algorithm, NetSpec, RunOptions};
use sinrcast::local::{check_box_invariants, gran_ubr};
use sinrcast::{ModelParams, SnapshotMode};

fn main() -> sinrcast::Result<()> {
    let net: sinrcast::Network = "random-connected:60:20:3".parse::<NetSpec>()?.build(ModelParams::default())?;
    let stats = net.stats()?;
    println!("n = {}, D = {}, max degree = {}, g = {:.1}", stats.n, stats.D, stats.Delta, stats.g);

    let tt = gran_ubr(&net, stats.g)?.timetable().clone();
    println!("phase length {} rounds: 20 directions x {} rounds", tt.phase_len(), tt.dir_len());

    let opts = RunOptions { snapshots: SnapshotMode::Boundaries, ..RunOptions::new(Algorithm::GranUbr) };
    let trace = run_algorithm(&net, &opts)?;
    println!(
        "outcome {:?} after {} rounds; last station informed in round {:?}",
        trace.outcome,
        trace.rounds,
        trace.completion_round()
    );
    match check_box_invariants(&net, &trace.snapshots) {
        Ok(()) => println!("box invariants hold at {} phase boundaries", trace.phase_snapshots().count()),
        Err(e) => println!("box invariant violated: {e}"),
    }
    Ok(())
}
