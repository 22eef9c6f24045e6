//! Recording a trace, replaying it, and catching a tampered copy.

use sinrcast::engine::parse_jsonl;
use sinrcast::harness::{replay, run_algorithm, verify_trace, Algorithm, NetSpec, RunOptions};
use sinrcast::{ModelParams, SnapshotMode};

fn main() -> sinrcast::Result<()> {
    let net = "chain:6:0.9".parse::<NetSpec>()?.build(ModelParams::default())?;
    let opts = RunOptions { snapshots: SnapshotMode::Boundaries, ..RunOptions::new(Algorithm::SizeUbr) };
    let text = run_algorithm(&net, &opts)?.to_jsonl();
    println!("trace: {} lines", text.lines().count());

    let report = verify_trace(&net, &text, Some(Algorithm::SizeUbr))?;
    for c in &report.checks {
        println!("  {:<26} {:?}", c.name, c.status);
    }

    let (mut records, _) = parse_jsonl(&text)?;
    let victim = records.iter_mut().find(|r| !r.deliveries.is_empty()).expect("a delivery");
    let dropped = victim.deliveries.remove(0);
    println!("dropping delivery {} -> {} in round {}", dropped.from, dropped.to, victim.round);
    match replay(&net, &records, &[]) {
        Ok(_) => println!("replay accepted the tampered trace"),
        Err(e) => println!("replay rejects it: {e}"),
    }
    Ok(())
}
