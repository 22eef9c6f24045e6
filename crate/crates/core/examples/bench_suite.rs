//! A small benchmark grid, written as CSV to stdout.

use sinrcast::harness::{bench, bench_csv, Algorithm, Suite};

fn main() -> sinrcast::Result<()> {
    let suite = Suite {
        networks: vec!["chain:8:0.9".into(), "grid:4:4:0.6".into(), "random-connected:40:12:5".into()],
        algorithms: vec![Algorithm::GranUbr, Algorithm::SizeUbr, Algorithm::General],
        max_rounds: Some(2_000_000_000),
        alpha: None,
        epsilon: None,
    };
    let rows: Vec<_> = bench(&suite)?.into_iter().collect::<sinrcast::Result<_>>()?;
    print!("{}", bench_csv(&rows)?);
    Ok(())
}
