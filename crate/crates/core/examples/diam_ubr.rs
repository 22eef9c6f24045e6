//! Granularity-free broadcast on clusters whose stations sit range/2^20
//! apart, far beyond any polynomial granularity bound.

use sinrcast::harness::{diam_bound, run_algorithm, verify_trace, Algorithm, NetSpec, RunOptions};
use sinrcast::{ModelParams, SnapshotMode};

fn main() -> sinrcast::Result<()> {
    let spec = format!("cluster-chain:5:4:{}", 2f64.powi(-20));
    let net = spec.parse::<NetSpec>()?.build(ModelParams::default())?;
    let stats = net.stats()?;
    println!("{spec}: n = {}, D = {}, g = {:.3e}", stats.n, stats.D, stats.g);
    println!("known station bound {}", diam_bound(&net));

    let opts = RunOptions { snapshots: SnapshotMode::Boundaries, ..RunOptions::new(Algorithm::DiamUbr) };
    let trace = run_algorithm(&net, &opts)?;
    println!("informed {}/{} in {} rounds", trace.informed_count(), net.len(), trace.rounds);

    let report = verify_trace(&net, &trace.to_jsonl(), Some(Algorithm::DiamUbr))?;
    for check in &report.checks {
        println!("  {:<22} {:?}", check.name, check.status);
    }
    Ok(())
}
