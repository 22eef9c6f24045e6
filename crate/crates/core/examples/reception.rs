//! The reception rule on a handful of hand-placed stations.

use sinrcast::sinr::{receives, simulate_round, sinr_value};
use sinrcast::{ModelParams, Network, Station};

fn main() -> sinrcast::Result<()> {
    let params = ModelParams::default();
    let r = params.range();
    println!("range r = {r:.6}, pivotal cell = {:.6}", params.pivotal());

    // Two senders on either side of a receiver, plus a far listener.
    let stations = vec![
        Station { id: 1, x: 0.0, y: 0.0 },
        Station { id: 2, x: 0.5 * r, y: 0.0 },
        Station { id: 3, x: 0.9 * r, y: 0.0 },
        Station { id: 4, x: 1.6 * r, y: 0.0 },
    ];
    let net = Network::new(params, stations, 1, 8)?;

    for senders in [vec![1], vec![3], vec![1, 3], vec![1, 4]] {
        let links = simulate_round(&net, &senders)?;
        println!("senders {senders:?} -> deliveries {:?}", links.iter().map(|l| (l.from, l.to)).collect::<Vec<_>>());
    }

    let s = sinr_value(1, 2, &[1, 3], &net)?;
    println!("SINR of 1 at 2 while 3 also sends: {s:.4} (decoded: {})", receives(1, 2, &[1, 3], &net)?);
    Ok(())
}
