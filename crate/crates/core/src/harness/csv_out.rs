//! CSV writers. Floats carry 9 significant digits.

use crate::adhoc::ProgressSnapshot;
use crate::adversary::AdversaryRow;
use crate::error::Result;

use super::BenchRecord;

/// `x` with 9 significant digits, positional when the exponent is moderate.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (8 - exp).max(0) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

fn to_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| crate::Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn bench_csv(rows: &[BenchRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["algorithm", "n", "N", "D", "Delta", "g", "rounds", "informed", "wall_time"])?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.n.to_string(),
            r.N.to_string(),
            r.D.to_string(),
            r.Delta.to_string(),
            sig9(r.g),
            r.rounds.to_string(),
            r.informed.to_string(),
            sig9(r.wall_time),
        ])?;
    }
    to_string(w)
}

fn headed(header: &[&str]) -> Result<csv::Writer<Vec<u8>>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    Ok(w)
}

pub fn progress_csv(rows: &[ProgressSnapshot]) -> Result<String> {
    let mut w = headed(&["block", "informed", "groups", "tuples", "stable_blocks", "pi"])?;
    for r in rows {
        w.serialize(r)?;
    }
    to_string(w)
}

pub fn adversary_csv(rows: &[AdversaryRow]) -> Result<String> {
    let mut w = headed(&["family", "delta", "D", "algorithm", "forced_rounds", "bound"])?;
    for r in rows {
        w.serialize(r)?;
    }
    to_string(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.0), "1.00000000");
        assert_eq!(sig9(123.456), "123.456000");
        assert_eq!(sig9(0.001234), "0.00123400000");
        assert_eq!(sig9(1048576.0), "1048576.00");
        assert_eq!(sig9(1e20), "1.00000000e20");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn progress_header_matches_fields() {
        let row = ProgressSnapshot { block: 0, informed: 2, groups: 1, tuples: 3, stable_blocks: 0, pi: 6 };
        let text = progress_csv(&[row]).unwrap();
        assert_eq!(text, "block,informed,groups,tuples,stable_blocks,pi\n0,2,1,3,0,6\n");
    }
}
