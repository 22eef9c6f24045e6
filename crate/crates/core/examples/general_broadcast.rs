//! Degree-dependent broadcast on chains of tight clusters joined by gates.

use sinrcast::harness::{bench_one, Algorithm, NetSpec};
use sinrcast::ModelParams;

fn main() -> sinrcast::Result<()> {
    println!("{:<12} {:>3} {:>6} {:>10} {:>10}", "fixture", "D", "Delta", "rounds", "rounds/DΔ");
    for (delta, k) in [(4, 3), (8, 3), (16, 3), (4, 5), (4, 9)] {
        let spec = format!("gated:{delta}:{k}");
        let net = spec.parse::<NetSpec>()?.build(ModelParams::default())?;
        let rec = bench_one(&net, Algorithm::General, 2_000_000_000)?;
        let per = rec.rounds as f64 / (rec.D * rec.Delta) as f64;
        println!("{spec:<12} {:>3} {:>6} {:>10} {per:>10.0}", rec.D, rec.Delta, rec.rounds);
    }
    Ok(())
}
