//! Selective families, dilution and the model constants.

use sinrcast::schedules::ssf::verify_ssf_exhaustive;
use sinrcast::schedules::{build_ssf, dilute, flat_constant, selector_k, BroadcastSchedule, SsfFamily};
use sinrcast::ModelParams;

fn main() -> sinrcast::Result<()> {
    for (n, k) in [(16, 2), (20, 3), (20, 4), (256, 4)] {
        let f = build_ssf(n, k);
        let exhaustive = if n <= 20 { format!("{}", verify_ssf_exhaustive(&f)) } else { "skipped".into() };
        println!(
            "({n},{k})-ssf: {} sets, bound {:.1}, exhaustive check {exhaustive}",
            f.len(),
            SsfFamily::size_bound(n, k)
        );
    }

    let f = build_ssf(12, 3);
    println!("slots of id 5 in the (12,3) family: {:?}", f.slots_of(5));

    let sched = dilute(&BroadcastSchedule::from_ssf(&f), 3, 1.0)?;
    println!("3-diluted schedule length {} (base {} x 9)", sched.length, f.len());
    let fires: Vec<u64> = (0..sched.length).filter(|&t| sched.bit(5, 1, 2, t)).collect();
    println!("id 5 in box class (1,2) fires at {fires:?}");

    let p = ModelParams::default();
    for n in [16, 1024, 1 << 20] {
        println!("flat constant at n = {n}: {}", flat_constant(p.alpha, p.epsilon, n)?);
    }
    println!("flat constant at alpha = 2, n = 1024: {}", flat_constant(2.0, p.epsilon, 1024)?);
    println!("selector selectivity k = {}", selector_k(p.alpha, p.epsilon, p.beta, p.noise)?);
    Ok(())
}
