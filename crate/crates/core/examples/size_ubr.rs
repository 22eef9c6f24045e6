//! Ad-hoc broadcast with a known station count, and its progress measure
//! block by block.

use sinrcast::adhoc::{check_progress, check_size_invariants, progress, SizeUbr};
use sinrcast::harness::{progress_csv, run_algorithm, Algorithm, NetSpec, RunOptions};
use sinrcast::{ModelParams, SnapshotMode};

fn main() -> sinrcast::Result<()> {
    let net = "grid:4:4:0.6".parse::<NetSpec>()?.build(ModelParams::default())?;
    let layout = SizeUbr::new(&net)?.layout().clone();
    println!("{layout:?}");

    let opts = RunOptions { snapshots: SnapshotMode::Boundaries, ..RunOptions::new(Algorithm::SizeUbr) };
    let trace = run_algorithm(&net, &opts)?;
    println!("informed {}/{} in {} rounds", trace.informed_count(), net.len(), trace.rounds);

    let rows = progress(&net, &trace.snapshots)?;
    print!("{}", progress_csv(&rows)?);
    println!("forest/integrity/matching: {:?}", check_size_invariants(&net, &trace.snapshots));
    println!("monotone progress and windows: {:?}", check_progress(&net, &trace.snapshots));
    Ok(())
}
