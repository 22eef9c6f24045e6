//! Network generators addressed by colon-separated spec strings.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{ChainFamily, FanFamily};
use crate::error::{Error, Result};
use crate::geometry::{ModelParams, Network, Station};

/// Relative distance to the range that generated placements must keep.
pub const GEN_MARGIN: f64 = 1e-6;
/// Placement attempts before a random generator gives up.
const RETRIES: usize = 1000;

/// A generator spec. Distances are in units of the range.
#[derive(Clone, Debug, PartialEq)]
pub enum NetSpec {
    /// `chain:K:SPACING`
    Chain { k: usize, spacing: f64 },
    /// `grid:W:H:SPACING`
    Grid { w: usize, h: usize, spacing: f64 },
    /// `random-connected:N:BOXES:SEED`, uniform in a square of about `BOXES` pivotal boxes.
    RandomConnected { n: usize, boxes: usize, seed: u64 },
    /// `cluster:N:SEP`, a square lattice with spacing `SEP`.
    Cluster { n: usize, sep: f64 },
    /// `cluster-chain:K:M:SEP`, `K` lattices of `M` stations, consecutive ones `0.8` apart.
    ClusterChain { k: usize, m: usize, sep: f64 },
    /// `gated:DELTA:K`, `K` tight clusters of `DELTA` stations, each with one gate station
    /// carrying the largest id of its box that alone reaches the next cluster.
    Gated { delta: usize, k: usize },
    /// `twin-chain:D`, `D` two-relay gadgets.
    TwinChain { depth: usize },
    /// `fan:DELTA:D[:J]`, the fan family member with target `J` in every layer.
    Fan { delta: usize, depth: usize, target: usize },
}

fn field<T: FromStr>(parts: &[&str], i: usize, spec: &str) -> Result<T> {
    parts
        .get(i)
        .ok_or_else(|| Error::invalid(format!("spec '{spec}' is missing field {i}")))?
        .parse()
        .map_err(|_| Error::invalid(format!("spec '{spec}': cannot parse field {i} '{}'", parts[i])))
}

impl FromStr for NetSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let p: Vec<&str> = spec.split(':').collect();
        let want = |k: usize| -> Result<()> {
            if p.len() == k {
                Ok(())
            } else {
                Err(Error::invalid(format!("spec '{spec}' needs {} fields", k - 1)))
            }
        };
        let s = match p[0] {
            "chain" => {
                want(3)?;
                NetSpec::Chain { k: field(&p, 1, spec)?, spacing: field(&p, 2, spec)? }
            }
            "grid" => {
                want(4)?;
                NetSpec::Grid { w: field(&p, 1, spec)?, h: field(&p, 2, spec)?, spacing: field(&p, 3, spec)? }
            }
            "random-connected" => {
                want(4)?;
                NetSpec::RandomConnected { n: field(&p, 1, spec)?, boxes: field(&p, 2, spec)?, seed: field(&p, 3, spec)? }
            }
            "cluster" => {
                want(3)?;
                NetSpec::Cluster { n: field(&p, 1, spec)?, sep: field(&p, 2, spec)? }
            }
            "cluster-chain" => {
                want(4)?;
                NetSpec::ClusterChain { k: field(&p, 1, spec)?, m: field(&p, 2, spec)?, sep: field(&p, 3, spec)? }
            }
            "gated" => {
                want(3)?;
                NetSpec::Gated { delta: field(&p, 1, spec)?, k: field(&p, 2, spec)? }
            }
            "twin-chain" => {
                want(2)?;
                NetSpec::TwinChain { depth: field(&p, 1, spec)? }
            }
            "fan" => {
                if p.len() != 3 && p.len() != 4 {
                    return Err(Error::invalid(format!("spec '{spec}' needs 2 or 3 fields")));
                }
                let target = if p.len() == 4 { field(&p, 3, spec)? } else { 0 };
                NetSpec::Fan { delta: field(&p, 1, spec)?, depth: field(&p, 2, spec)?, target }
            }
            other => return Err(Error::invalid(format!("unknown generator '{other}'"))),
        };
        Ok(s)
    }
}

/// Default id bound: at least 256 and a power of two above `n`.
pub fn default_id_bound(n: usize) -> u32 {
    (n.max(2).next_power_of_two() as u32).max(256)
}

fn finish(params: ModelParams, pts: Vec<(f64, f64)>) -> Result<Network> {
    let r = params.range();
    let stations = pts.iter().enumerate().map(|(i, &(x, y))| Station { id: i as u32 + 1, x: x * r, y: y * r }).collect();
    let net = Network::new(params, stations, 1, default_id_bound(pts.len()))?;
    net.check_margins(GEN_MARGIN)?;
    Ok(net)
}

fn lattice(n: usize, sep: f64, origin: (f64, f64)) -> Vec<(f64, f64)> {
    let side = (n as f64).sqrt().ceil().max(1.0) as usize;
    (0..n).map(|i| (origin.0 + sep * (i % side) as f64, origin.1 + sep * (i / side) as f64)).collect()
}

impl NetSpec {
    pub fn build(&self, params: ModelParams) -> Result<Network> {
        let gamma = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            NetSpec::Chain { k, spacing } => {
                finish(params, (0..k).map(|i| (0.01 + spacing * i as f64, 0.01)).collect())
            }
            NetSpec::Grid { w, h, spacing } => finish(
                params,
                (0..w * h).map(|i| (0.01 + spacing * (i % w) as f64, 0.01 + spacing * (i / w) as f64)).collect(),
            ),
            NetSpec::RandomConnected { n, boxes, seed } => random_connected(params, n, boxes, seed),
            NetSpec::Cluster { n, sep } => finish(params, lattice(n, sep, (0.01, 0.01))),
            NetSpec::ClusterChain { k, m, sep } => {
                let pts = (0..k).flat_map(|c| lattice(m, sep, (0.01 + 0.8 * c as f64, 0.01))).collect();
                finish(params, pts)
            }
            NetSpec::Gated { delta, k } => {
                if delta == 0 || k == 0 {
                    return Err(Error::invalid("gated fixture needs delta >= 1 and at least one cluster"));
                }
                let mut pts = Vec::new();
                for c in 0..k {
                    let x0 = 2.0 * gamma * c as f64;
                    let side = (delta as f64).sqrt().ceil();
                    pts.extend(lattice(delta, 0.02 / side, (x0 + 0.05, 0.05)));
                    if c + 1 < k {
                        pts.push((x0 + 0.55, 0.05));
                    }
                }
                finish(params, pts)
            }
            NetSpec::TwinChain { depth } => {
                Ok(ChainFamily::sequential(depth, default_id_bound(1 + 3 * depth), params)?.net)
            }
            NetSpec::Fan { delta, depth, target } => {
                let probe = FanFamily::new(delta, depth, params, u32::MAX)?;
                let fam = FanFamily::new(delta, depth, params, default_id_bound(probe.n()))?;
                fam.member(&vec![target; fam.layers])
            }
        }
    }
}

fn random_connected(params: ModelParams, n: usize, boxes: usize, seed: u64) -> Result<Network> {
    if n == 0 || boxes == 0 {
        return Err(Error::invalid("random-connected needs n >= 1 and boxes >= 1"));
    }
    let side = (boxes as f64).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..RETRIES {
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(n);
        while pts.len() < n {
            let p = (rng.gen_range(0.0..side), rng.gen_range(0.0..side));
            let ok = pts.iter().all(|q| {
                let d = ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
                d > 1e-3 && (d - 1.0).abs() > 2.0 * GEN_MARGIN
            });
            if ok {
                pts.push(p);
            }
        }
        match finish(params, pts) {
            Ok(net) => return Ok(net),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::Construction(format!(
        "no connected placement of {n} stations in {boxes} boxes after {RETRIES} attempts: {}",
        last.map_or_else(String::new, |e| e.to_string())
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(spec: &str) -> Network {
        spec.parse::<NetSpec>().unwrap().build(ModelParams::default()).unwrap()
    }

    #[test]
    fn chain_stats() {
        let s = build("chain:5:0.9").stats().unwrap();
        assert_eq!((s.n, s.D, s.Delta), (5, 4, 2));
    }

    #[test]
    fn grid_connects_diagonals() {
        assert_eq!(build("grid:3:3:0.7").stats().unwrap().Delta, 8);
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(build("random-connected:50:25:7").to_json(), build("random-connected:50:25:7").to_json());
        assert_ne!(build("random-connected:50:25:7").to_json(), build("random-connected:50:25:8").to_json());
    }

    #[test]
    fn gated_fixture_shape() {
        let net = build("gated:6:4");
        let s = net.stats().unwrap();
        assert_eq!(s.n, 4 * 6 + 3);
        assert_eq!(s.D, 6);
        assert_eq!(s.Delta, 2 * 6);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!("chain:5".parse::<NetSpec>().is_err());
        assert!("blob:1:2".parse::<NetSpec>().is_err());
        assert!("grid:a:2:0.5".parse::<NetSpec>().is_err());
        assert!("chain:3:1.5".parse::<NetSpec>().unwrap().build(ModelParams::default()).is_err());
    }
}
