//! Chain gadget blocking and the fan-family adversary.

use sinrcast::adversary::{fan_adversary, ChainFamily, FanFamily};
use sinrcast::harness::Algorithm;
use sinrcast::sinr::simulate_round;
use sinrcast::ModelParams;

fn main() -> sinrcast::Result<()> {
    let params = ModelParams::default();

    let chain = ChainFamily::sequential(3, 64, params)?;
    let [_, v1, v2, w] = chain.ids[0];
    for senders in [vec![v1], vec![v2], vec![v1, v2]] {
        let heard = simulate_round(&chain.net, &senders)?.iter().any(|l| l.to == w);
        println!("gadget 0, senders {senders:?}: target hears {heard}");
    }
    chain.check_blocking()?;
    println!("all {} gadgets block joint transmissions; hop bound {}", chain.gadgets.len(), chain.bound());

    let fan = FanFamily::new(8, 5, params, 64)?;
    fan.check_blocking()?;
    println!(
        "fan: {} relays per layer, {} layers, any {} relays silence a target, bound {} per layer",
        fan.delta,
        fan.layers,
        fan.blockers(),
        fan.layer_bound()
    );
    for alg in [Algorithm::SizeUbr, Algorithm::ProbeSequential, Algorithm::ProbeFlood] {
        let out = sinrcast::with_factory!(alg, make => fan_adversary(&fan, !alg.local_knowledge(), 1_000_000, make))?;
        println!(
            "{alg:<17} choices {:?} per layer {:?} blocked {}",
            out.choices, out.per_layer, out.blocked
        );
    }
    Ok(())
}
