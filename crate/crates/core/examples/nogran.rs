//! Square partition and colouring of one dense pivotal box.

use sinrcast::geometry::pivotal_key;
use sinrcast::local::{check_partitions, nogran_partition, NoGranParams};
use sinrcast::{ModelParams, Point};

fn main() -> sinrcast::Result<()> {
    let params = ModelParams::default();
    let np = NoGranParams::new(&params, 16)?;
    println!("separation factor {}, phases 0..={}, 2^{} cells per box side", np.c_alpha, np.last_phase, np.log2_scale);

    // Two tight pairs and a loner inside one box.
    let g = params.pivotal();
    let raw = [(0.10, 0.10), (0.10 + 1e-7, 0.10), (0.60, 0.55), (0.60, 0.55 + 3e-4), (0.30, 0.85)];
    let stations: Vec<(u32, Point)> =
        raw.iter().enumerate().map(|(i, &(x, y))| (i as u32 + 1, Point::new(x * g, y * g))).collect();
    let key = pivotal_key(stations[0].1, &params);
    let part = nogran_partition(&stations, key, &params, &np)?;

    for sq in &part.squares {
        println!("square at ({}, {}) side {} colour {:?} members {:?}", sq.x0, sq.y0, sq.side, sq.color, sq.members);
    }
    for ph in &part.phases {
        println!("phase {}: {} live squares", ph.phase, ph.squares.len());
    }
    match check_partitions(std::slice::from_ref(&part), &np) {
        Ok(()) => println!("partition and colouring checks pass"),
        Err(e) => println!("check failed: {e}"),
    }
    Ok(())
}
