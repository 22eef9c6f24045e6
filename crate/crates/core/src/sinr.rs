//! SINR reception rule.
//!
//! A non-transmitting station `u` receives from `v ∈ T` when
//! `P·d(v,u)^-α / (noise + Σ_{w∈T∖{v}} P·d(w,u)^-α) ≥ β` and the received
//! power alone reaches `(1+ε)·β·noise`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ModelParams, Network, Point};

/// Relative distance from a threshold under which float noise could flip an outcome.
pub const MARGIN: f64 = 1e-9;

/// One receiver/sender pair of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link {
    pub to: u32,
    pub from: u32,
}

fn lookup(net: &Network, id: u32) -> Result<usize> {
    net.index_of(id).ok_or_else(|| Error::invalid(format!("unknown station {id}")))
}

/// SINR of `sender` at `receiver` when every station of `transmitters` transmits.
pub fn sinr_value(sender: u32, receiver: u32, transmitters: &[u32], net: &Network) -> Result<f64> {
    if !transmitters.contains(&sender) {
        return Err(Error::invalid(format!("sender {sender} is not transmitting")));
    }
    if sender == receiver {
        return Err(Error::invalid("receiver equals sender"));
    }
    let to = net.pos(lookup(net, receiver)?);
    let p = &net.params;
    let mut signal = 0.0;
    let mut interference = p.noise;
    for &w in transmitters {
        let d = net.pos(lookup(net, w)?).dist(&to);
        if d == 0.0 {
            return Err(Error::model(format!("receiver {receiver} coincides with transmitter {w}")));
        }
        if w == sender {
            signal = p.received_power(d);
        } else {
            interference += p.received_power(d);
        }
    }
    Ok(signal / interference)
}

/// Whether `receiver` decodes `sender` in a round where `transmitters` transmit.
pub fn receives(sender: u32, receiver: u32, transmitters: &[u32], net: &Network) -> Result<bool> {
    if transmitters.contains(&receiver) {
        return Ok(false);
    }
    let s = sinr_value(sender, receiver, transmitters, net)?;
    let d = net.pos(lookup(net, sender)?).dist(&net.pos(lookup(net, receiver)?));
    let p = &net.params;
    Ok(s >= p.beta && p.received_power(d) >= p.power_floor())
}

/// All deliveries of one round, by station id.
pub fn simulate_round(net: &Network, senders: &[u32]) -> Result<Vec<Link>> {
    let mut idx = Vec::with_capacity(senders.len());
    let mut seen = HashSet::new();
    for &s in senders {
        if !seen.insert(s) {
            return Err(Error::invalid(format!("duplicate sender {s}")));
        }
        idx.push(lookup(net, s)?);
    }
    let mut field = Reception::new(net);
    let mut out = Vec::new();
    field.deliver(&idx, &mut out)?;
    Ok(out.into_iter().map(|(to, from)| Link { to: net.id(to), from: net.id(from) }).collect())
}

/// Precomputed geometry for repeated reception queries over one network.
#[derive(Clone, Debug)]
pub struct Reception {
    params: ModelParams,
    pos: Vec<Point>,
    ids: Vec<u32>,
    /// Stations within range (plus the float margin) of each station.
    near: Vec<Vec<usize>>,
    in_t: Vec<bool>,
    mark: Vec<bool>,
}

impl Reception {
    pub fn new(net: &Network) -> Self {
        let n = net.len();
        let reach = net.range() * (1.0 + 1e-8);
        let pos: Vec<Point> = (0..n).map(|i| net.pos(i)).collect();
        let mut near = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if pos[a].dist(&pos[b]) <= reach {
                    near[a].push(b);
                    near[b].push(a);
                }
            }
        }
        Reception {
            params: net.params,
            pos,
            ids: net.stations.iter().map(|s| s.id).collect(),
            near,
            in_t: vec![false; n],
            mark: vec![false; n],
        }
    }

    /// Pushes `(receiver, sender)` index pairs for one round.
    ///
    /// Fails when a decision sits within [`MARGIN`] of a threshold, or when a
    /// receiver decodes two senders although `β ≥ 1`.
    pub fn deliver(&mut self, senders: &[usize], out: &mut Vec<(usize, usize)>) -> Result<()> {
        if senders.is_empty() {
            return Ok(());
        }
        let p = &self.params;
        let floor = p.power_floor();
        let mut candidates: Vec<usize> = Vec::new();
        for &s in senders {
            self.in_t[s] = true;
        }
        for &s in senders {
            for &u in &self.near[s] {
                if !self.in_t[u] && !self.mark[u] {
                    self.mark[u] = true;
                    candidates.push(u);
                }
            }
        }
        for &s in senders {
            self.in_t[s] = false;
        }
        for &u in &candidates {
            self.mark[u] = false;
        }
        candidates.sort_unstable();
        let mut powers = vec![0.0; senders.len()];
        for u in candidates {
            let mut total = p.noise;
            for (k, &s) in senders.iter().enumerate() {
                let d = self.pos[s].dist(&self.pos[u]);
                if d == 0.0 {
                    return Err(Error::model(format!(
                        "station {} coincides with transmitter {}",
                        self.ids[u], self.ids[s]
                    )));
                }
                powers[k] = p.received_power(d);
                total += powers[k];
            }
            let mut got: Option<usize> = None;
            for (k, &s) in senders.iter().enumerate() {
                let power = powers[k];
                let sinr = power / (total - power);
                let sinr_rel = sinr / p.beta - 1.0;
                let pow_rel = power / floor - 1.0;
                let near_sinr = sinr_rel.abs() < MARGIN;
                let near_pow = pow_rel.abs() < MARGIN;
                if (near_sinr && pow_rel > -MARGIN) || (near_pow && sinr_rel > -MARGIN) {
                    return Err(Error::model(format!(
                        "reception {} -> {} within {MARGIN:e} of a threshold (sinr {sinr}, power {power})",
                        self.ids[s], self.ids[u]
                    )));
                }
                if sinr >= p.beta && power >= floor {
                    if let Some(prev) = got {
                        if p.beta >= 1.0 {
                            return Err(Error::model(format!(
                                "station {} decodes both {} and {}",
                                self.ids[u], self.ids[prev], self.ids[s]
                            )));
                        }
                    }
                    got = Some(s);
                    out.push((u, s));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Station;

    fn net(params: ModelParams, pts: &[(f64, f64)]) -> Network {
        Network {
            params,
            stations: pts.iter().enumerate().map(|(i, &(x, y))| Station { id: i as u32 + 1, x, y }).collect(),
            source: 1,
            id_bound: pts.len() as u32,
        }
    }

    #[test]
    fn lone_transmitter_at_unit_distance() {
        let n = net(ModelParams::default(), &[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(sinr_value(1, 2, &[1], &n).unwrap(), 1.0);
    }

    #[test]
    fn symmetric_pair_sinr() {
        let n = net(ModelParams::default(), &[(-0.5, 0.0), (0.5, 0.0), (0.0, 0.0)]);
        let v = sinr_value(1, 3, &[1, 2], &n).unwrap();
        let s = 0.5f64.powf(-3.0);
        assert!((v - s / (1.0 + s)).abs() < 1e-12);
    }

    #[test]
    fn sensitivity_floor() {
        let p = ModelParams { epsilon: 0.1, ..ModelParams::default() };
        let close = net(p, &[(0.0, 0.0), (0.9, 0.0)]);
        assert!(receives(1, 2, &[1], &close).unwrap());
        let far = net(p, &[(0.0, 0.0), (0.98, 0.0)]);
        assert!(!receives(1, 2, &[1], &far).unwrap());
        assert!(!receives(1, 2, &[1, 2], &close).unwrap());
    }

    #[test]
    fn simulate_round_examples() {
        let r = ModelParams::default().range();
        let n = net(ModelParams::default(), &[(0.0, 0.0), (0.5 * r, 0.0), (0.0, 0.6 * r), (-0.7 * r, 0.1)]);
        assert!(simulate_round(&n, &[]).unwrap().is_empty());
        let all = simulate_round(&n, &[1]).unwrap();
        assert_eq!(all.len(), 3);
        assert!(simulate_round(&n, &[1, 1]).is_err());
        let g = ModelParams::default().pivotal();
        let pair = net(ModelParams::default(), &[(0.2 * g, 0.5 * g), (0.8 * g, 0.5 * g), (0.5 * g, 0.3 * g)]);
        assert!(simulate_round(&pair, &[1, 2]).unwrap().is_empty());
    }
}
