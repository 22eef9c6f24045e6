//! Fan family: a source, a row of `Δ` relays and one hidden target `w_j`
//! that only relay `v_j` reaches. Once `c = ⌈2^{α/2}⌉` relays transmit
//! together the target hears nothing, so an algorithm must let relays speak
//! in small groups until it happens to hit `v_j`. Layers are stacked with
//! each target acting as the next layer's source.

use serde::{Deserialize, Serialize};

use crate::engine::{Protocol, Round, RunConfig, Simulation};
use crate::error::{Error, Result};
use crate::geometry::{ModelParams, Network, Point, Station};
use crate::sinr::receives;

/// A stack of fan layers with the target choice of each layer left open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanFamily {
    pub delta: usize,
    pub layers: usize,
    pub params: ModelParams,
    pub id_bound: u32,
    /// Target offset below the range, as a fraction of the range.
    pub margin: f64,
}

/// Station ids of one layer: source, relays, target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerIds {
    pub source: u32,
    pub relays: Vec<u32>,
    pub target: u32,
}

impl FanFamily {
    /// `layers = (D − 1) / 2` fans of width `delta`.
    pub fn new(delta: usize, depth: usize, params: ModelParams, id_bound: u32) -> Result<Self> {
        if delta < 4 || depth < 3 {
            return Err(Error::invalid(format!("fan family needs delta >= 4 and D >= 3, got {delta}, {depth}")));
        }
        let layers = (depth - 1) / 2;
        let n = 1 + layers * (delta + 1);
        if (id_bound as usize) < n {
            return Err(Error::invalid(format!("id bound {id_bound} is below n = {n}")));
        }
        let step = gamma() / delta as f64;
        Ok(FanFamily { delta, layers, params, id_bound, margin: (step * step / 4.0).min(1e-4) })
    }

    /// Relays that must transmit together to silence every target.
    pub fn blockers(&self) -> usize {
        2f64.powf(self.params.alpha / 2.0).ceil() as usize
    }

    /// Per-layer rounds the adversary can force.
    pub fn layer_bound(&self) -> u64 {
        (self.delta / self.blockers()).saturating_sub(1) as u64
    }

    pub fn bound(&self) -> u64 {
        self.layers as u64 * self.layer_bound()
    }

    pub fn n(&self) -> usize {
        1 + self.layers * (self.delta + 1)
    }

    /// Ids of layer `l`; stations are numbered in creation order.
    pub fn layer_ids(&self, l: usize) -> LayerIds {
        let base = 1 + l * (self.delta + 1);
        LayerIds {
            source: base as u32,
            relays: (0..self.delta).map(|i| (base + 1 + i) as u32).collect(),
            target: (base + 1 + self.delta) as u32,
        }
    }

    /// Network with target choice `choices[l]` in layer `l`; missing entries default to 0.
    pub fn member(&self, choices: &[usize]) -> Result<Network> {
        let r = self.params.range();
        let g = gamma();
        let mut origin = Point::new(0.0, 0.0);
        let mut stations = vec![Station { id: 1, x: 0.0, y: 0.0 }];
        for l in 0..self.layers {
            let j = choices.get(l).copied().unwrap_or(0);
            if j >= self.delta {
                return Err(Error::invalid(format!("target choice {j} outside 0..{}", self.delta)));
            }
            let ids = self.layer_ids(l);
            for (i, &id) in ids.relays.iter().enumerate() {
                let x = origin.x + g * i as f64 / self.delta as f64 * r;
                stations.push(Station { id, x, y: origin.y + g * r });
            }
            let w = Point::new(
                origin.x + g * j as f64 / self.delta as f64 * r,
                origin.y + (g + 1.0 - self.margin) * r,
            );
            stations.push(Station { id: ids.target, x: w.x, y: w.y });
            origin = w;
        }
        Network::new(self.params, stations, 1, self.id_bound)
    }

    /// Reachability of one layer of one member: relays reach the source,
    /// only `v_j` reaches `w_j`, and the source does not.
    pub fn check_reachability(&self, net: &Network, l: usize, j: usize) -> Result<()> {
        let ids = self.layer_ids(l);
        let idx = |id: u32| net.index_of(id).ok_or_else(|| Error::invalid(format!("station {id} missing")));
        let graph = net.comm_graph();
        let (s, w) = (idx(ids.source)?, idx(ids.target)?);
        for (i, &v) in ids.relays.iter().enumerate() {
            let v = idx(v)?;
            if !graph.has_edge(s, v) {
                return Err(Error::Construction(format!("relay {i} of layer {l} misses the source")));
            }
            if graph.has_edge(v, w) != (i == j) {
                return Err(Error::Construction(format!("relay {i} of layer {l} breaks target reachability")));
            }
        }
        if graph.has_edge(s, w) {
            return Err(Error::Construction(format!("source of layer {l} reaches its target")));
        }
        Ok(())
    }

    /// Every `c`-subset of relays silences the target of layer 0 for every
    /// choice of `j`; larger sets only add interference.
    pub fn check_blocking(&self) -> Result<()> {
        let c = self.blockers();
        let ids = self.layer_ids(0);
        for j in 0..self.delta {
            let net = self.member(&[j])?;
            for set in subsets(self.delta, c) {
                let senders: Vec<u32> = set.iter().map(|&i| ids.relays[i]).collect();
                for &v in &senders {
                    if receives(v, ids.target, &senders, &net)? {
                        return Err(Error::Construction(format!("target {j} hears relay {v} among {senders:?}")));
                    }
                }
            }
            for (i, &v) in ids.relays.iter().enumerate() {
                if receives(v, ids.target, &[v], &net)? != (i == j) {
                    return Err(Error::Construction(format!("lone relay {i} misbehaves at target {j}")));
                }
            }
        }
        Ok(())
    }
}

fn gamma() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Result of the adaptive adversary on a fan family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanOutcome {
    pub delta: usize,
    pub layers: usize,
    /// Target choice of every layer.
    pub choices: Vec<usize>,
    /// Rounds between a layer's source being informed and its target being informed.
    pub per_layer: Vec<u64>,
    /// Round after the last target is informed, or the budget when blocked.
    pub forced_rounds: u64,
    pub bound: u64,
    /// Some layer's target was never informed within the budget.
    pub blocked: bool,
    /// Surviving members after each elimination in the last layer run, as `(round, survivors)`.
    pub survivors: Vec<(Round, usize)>,
}

/// Runs the adversary layer by layer.
///
/// With `lockstep`, all surviving members of a layer are advanced together
/// and must transmit identically until their target is informed; a member
/// leaves the family once its target hears the message and the last one
/// left fixes the layer. Without `lockstep` (programs that know their
/// neighbourhood and so see which member they are in) each member runs on
/// its own and the slowest is kept.
pub fn fan_adversary<P, F>(family: &FanFamily, lockstep: bool, max_rounds: u64, factory: F) -> Result<FanOutcome>
where
    P: Protocol,
    F: Fn(&Network) -> Result<P>,
{
    let mut choices = Vec::new();
    let mut per_layer = Vec::new();
    let mut survivors_log = Vec::new();
    let mut informed_at: Round = 0;
    let mut blocked = false;
    for l in 0..family.layers {
        let ids = family.layer_ids(l);
        let nets: Vec<Network> = (0..family.delta)
            .map(|j| {
                let mut c = choices.clone();
                c.push(j);
                family.member(&c)
            })
            .collect::<Result<_>>()?;
        for (j, net) in nets.iter().enumerate() {
            family.check_reachability(net, l, j)?;
        }
        let w = nets[0].index_of(ids.target).expect("target exists");
        let cfg = RunConfig { max_rounds, record_rounds: false, ..RunConfig::default() };
        let mut sims: Vec<(usize, Simulation<'_, P>)> = nets
            .iter()
            .enumerate()
            .map(|(j, net)| Ok((j, Simulation::new(net, factory(net)?, cfg.clone())?)))
            .collect::<Result<_>>()?;
        let mut log = vec![(0, sims.len())];
        let mut last: Option<(usize, Round)> = None;
        let mut stuck: Option<usize> = None;
        while !sims.is_empty() && stuck.is_none() {
            let mut steps = Vec::with_capacity(sims.len());
            for (j, sim) in sims.iter_mut() {
                steps.push((*j, sim.step()?.map(|st| (st.round, st.senders))));
            }
            let first = steps.iter().find_map(|(_, st)| st.clone());
            if lockstep {
                if let Some((j, _)) = steps.iter().find(|(_, st)| st.is_some() && *st != first) {
                    return Err(Error::ContractViolation {
                        station: ids.source,
                        round: first.map_or(0, |f| f.0),
                        detail: format!("member {j} of layer {l} diverged before its target was informed"),
                    });
                }
            }
            let before = sims.len();
            let mut keep = Vec::with_capacity(before);
            for ((j, sim), (_, st)) in sims.into_iter().zip(steps) {
                if let Some(t) = sim.informed_round(w) {
                    last = Some((j, t));
                } else if st.is_none() {
                    stuck = Some(j);
                } else {
                    keep.push((j, sim));
                }
            }
            sims = keep;
            if sims.len() != before {
                log.push((first.map_or(max_rounds, |f| f.0), sims.len()));
            }
        }
        survivors_log = log;
        if let Some(j) = stuck {
            choices.push(j);
            per_layer.push(max_rounds.saturating_sub(informed_at));
            blocked = true;
            break;
        }
        let (j, t) = last.expect("some member finished");
        per_layer.push(t - informed_at);
        informed_at = t;
        choices.push(j);
    }
    let forced_rounds = if blocked { max_rounds } else { informed_at + 1 };
    Ok(FanOutcome {
        delta: family.delta,
        layers: family.layers,
        choices,
        per_layer,
        forced_rounds,
        bound: family.bound(),
        blocked,
        survivors: survivors_log,
    })
}
