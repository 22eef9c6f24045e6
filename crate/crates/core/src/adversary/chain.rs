//! Chain of two-relay gadgets: the source reaches `w` through `v1` and `v2`
//! only, and `w` hears nothing when both relays transmit together.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Protocol, RunConfig, Simulation};
use crate::error::{Error, Result};
use crate::geometry::{ModelParams, Network, Point, Station};
use crate::sinr::simulate_round;

/// Gadget spacing along the axis, in units of the range.
const SPACING: f64 = 1.2;
/// Distance from `v1` to `w`, in units of the range.
const NEAR: f64 = 0.9;
/// Angle of `v2` off the axis, seen from `w`.
const ANGLE: f64 = std::f64::consts::PI / 6.0;
/// Required slack of every in-range and out-of-range relation, relative to the range.
const MARGIN: f64 = 1e-6;

/// Positions of one gadget; `w` is the next gadget's source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainGadget {
    pub source: Point,
    pub v1: Point,
    pub v2: Point,
    pub w: Point,
}

impl ChainGadget {
    /// Gadget whose source sits at `source`.
    pub fn at(source: Point, params: &ModelParams) -> Result<Self> {
        let r = params.range();
        let w = Point::new(source.x + SPACING * r, source.y);
        let d1 = NEAR * r;
        let v1 = Point::new(w.x - d1, w.y);
        let rho = balance_distance(d1, params)?;
        let v2 = Point::new(w.x - rho * ANGLE.cos(), w.y + rho * ANGLE.sin());
        let g = ChainGadget { source, v1, v2, w };
        g.check_ranges(r)?;
        Ok(g)
    }

    fn check_ranges(&self, r: f64) -> Result<()> {
        let inside = [(self.source, self.v1), (self.source, self.v2), (self.v1, self.w), (self.v2, self.w)];
        for (a, b) in inside {
            if a.dist(&b) > r * (1.0 - MARGIN) {
                return Err(Error::Construction(format!("relay at {:.6}r misses the range", a.dist(&b) / r)));
            }
        }
        if self.source.dist(&self.w) < r * (1.0 + MARGIN) {
            return Err(Error::Construction("source reaches w directly".into()));
        }
        Ok(())
    }

    /// `P·d(v1,w)^-α − (P·d(v2,w)^-α − noise/2)`, relative to the first term.
    pub fn balance_error(&self, params: &ModelParams) -> f64 {
        let s1 = params.received_power(self.v1.dist(&self.w));
        let s2 = params.received_power(self.v2.dist(&self.w));
        ((s1 - (s2 - params.noise / 2.0)) / s1).abs()
    }
}

/// Distance `ρ` with `P·ρ^-α = P·d1^-α + noise/2`.
fn balance_distance(d1: f64, params: &ModelParams) -> Result<f64> {
    let target = params.received_power(d1) + params.noise / 2.0;
    let rho = (target / params.power).powf(-1.0 / params.alpha);
    if !(rho.is_finite() && rho > 0.0 && rho < d1) {
        return Err(Error::Construction(format!("no relay distance balances d1 = {d1}")));
    }
    Ok(rho)
}

/// `D` gadgets in sequence with the station ids of each.
#[derive(Clone, Debug)]
pub struct ChainFamily {
    pub net: Network,
    pub gadgets: Vec<ChainGadget>,
    /// `(source, v1, v2, w)` ids per gadget.
    pub ids: Vec<[u32; 4]>,
}

impl ChainFamily {
    /// Stations are created in the order `s, (v1, v2, w)*` and labelled by `ids`.
    pub fn build(depth: usize, id_bound: u32, params: ModelParams, ids: &[u32]) -> Result<Self> {
        if depth == 0 {
            return Err(Error::invalid("chain depth must be at least 1"));
        }
        let n = 1 + 3 * depth;
        if ids.len() != n {
            return Err(Error::invalid(format!("chain of depth {depth} needs {n} ids, got {}", ids.len())));
        }
        let mut gadgets = Vec::with_capacity(depth);
        let mut pts = vec![Point::new(0.0, 0.0)];
        let mut src = pts[0];
        for _ in 0..depth {
            let g = ChainGadget::at(src, &params)?;
            pts.extend([g.v1, g.v2, g.w]);
            src = g.w;
            gadgets.push(g);
        }
        let stations = pts.iter().zip(ids).map(|(p, &id)| Station { id, x: p.x, y: p.y }).collect();
        let net = Network::new(params, stations, ids[0], id_bound)?;
        let gid = (0..depth).map(|k| [ids[3 * k], ids[3 * k + 1], ids[3 * k + 2], ids[3 * k + 3]]).collect();
        Ok(ChainFamily { net, gadgets, ids: gid })
    }

    /// Sequential ids `1..=n`.
    pub fn sequential(depth: usize, id_bound: u32, params: ModelParams) -> Result<Self> {
        let ids: Vec<u32> = (1..=(1 + 3 * depth) as u32).collect();
        Self::build(depth, id_bound, params, &ids)
    }

    /// Ids drawn without repetition from `1..=id_bound`.
    pub fn shuffled(depth: usize, id_bound: u32, params: ModelParams, seed: u64) -> Result<Self> {
        let n = 1 + 3 * depth;
        if (id_bound as usize) < n {
            return Err(Error::invalid(format!("id bound {id_bound} is below n = {n}")));
        }
        let mut pool: Vec<u32> = (1..=id_bound).collect();
        pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::build(depth, id_bound, params, &pool[..n])
    }

    /// Exact reception checks of every gadget inside the composed network.
    pub fn check_blocking(&self) -> Result<()> {
        for (k, &[_, v1, v2, w]) in self.ids.iter().enumerate() {
            let hears = |senders: &[u32]| -> Result<bool> {
                Ok(simulate_round(&self.net, senders)?.iter().any(|l| l.to == w))
            };
            if hears(&[v1, v2])? {
                return Err(Error::Construction(format!("gadget {k}: w hears a joint transmission")));
            }
            if !hears(&[v1])? || !hears(&[v2])? {
                return Err(Error::Construction(format!("gadget {k}: a lone relay does not reach w")));
            }
        }
        Ok(())
    }

    /// Hop lower bound on broadcast time.
    pub fn bound(&self) -> u64 {
        2 * self.gadgets.len() as u64
    }
}

/// Worst completion over sampled id assignments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOutcome {
    pub depth: usize,
    pub forced_rounds: u64,
    pub bound: u64,
    pub worst_seed: u64,
    pub completed: bool,
}

/// Runs `factory`'s protocol on `samples` shuffled chains and keeps the slowest.
pub fn chain_adversary<P, F>(
    depth: usize,
    id_bound: u32,
    params: ModelParams,
    samples: usize,
    seed: u64,
    max_rounds: u64,
    factory: F,
) -> Result<ChainOutcome>
where
    P: Protocol,
    F: Fn(&Network) -> Result<P>,
{
    let mut best: Option<ChainOutcome> = None;
    for k in 0..samples.max(1) as u64 {
        let s = seed.wrapping_add(k);
        let fam = ChainFamily::shuffled(depth, id_bound, params, s)?;
        fam.check_blocking()?;
        let cfg = RunConfig { max_rounds, record_rounds: false, ..RunConfig::default() };
        let trace = Simulation::new(&fam.net, factory(&fam.net)?, cfg)?.run()?;
        let forced = trace.completion_round().map_or(max_rounds, |c| c + 1);
        let out = ChainOutcome { depth, forced_rounds: forced, bound: fam.bound(), worst_seed: s, completed: trace.all_informed() };
        if best.as_ref().is_none_or(|b| forced > b.forced_rounds) {
            best = Some(out);
        }
    }
    Ok(best.expect("at least one sample"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sinr::sinr_value;

    #[test]
    fn gadget_balances_powers() {
        let p = ModelParams::default();
        let g = ChainGadget::at(Point::new(0.0, 0.0), &p).unwrap();
        assert!(g.balance_error(&p) < 1e-12);
    }

    #[test]
    fn joint_sinr_matches_closed_form() {
        let p = ModelParams::default();
        let fam = ChainFamily::sequential(1, 8, p).unwrap();
        let s2 = p.received_power(fam.gadgets[0].v2.dist(&fam.gadgets[0].w));
        let v2 = sinr_value(3, 4, &[2, 3], &fam.net).unwrap();
        let v1 = sinr_value(2, 4, &[2, 3], &fam.net).unwrap();
        assert!((v2 - s2 / (s2 + p.noise / 2.0)).abs() < 1e-12);
        assert!((v1 - (s2 - p.noise / 2.0) / (p.noise + s2)).abs() < 1e-12);
        assert!(v1 < 1.0 && v2 < 1.0);
    }

    #[test]
    fn composed_chain_blocks_and_has_two_hops_per_gadget() {
        for d in [1, 4, 9] {
            let fam = ChainFamily::sequential(d, 64, ModelParams::default()).unwrap();
            fam.check_blocking().unwrap();
            assert_eq!(fam.net.stats().unwrap().D, 2 * d);
        }
    }

    #[test]
    fn shuffled_ids_are_distinct_and_bounded() {
        let fam = ChainFamily::shuffled(5, 32, ModelParams::default(), 3).unwrap();
        let mut ids: Vec<u32> = fam.net.stations.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 16);
        assert!(ids.iter().all(|&i| (1..=32).contains(&i)));
    }
}
