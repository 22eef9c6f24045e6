//! Test-side oracles, written independently of the library internals.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use sinrcast::{ModelParams, Network, Point, Station};

/// Range `(P / ((1+ε)·β·N))^(1/α)`.
pub fn range_of(p: &ModelParams) -> f64 {
    (p.power / ((1.0 + p.epsilon) * p.beta * p.noise)).powf(1.0 / p.alpha)
}

/// Brute-force deliveries `(to, from)` by id, straight from the reception rule.
pub fn brute_deliveries(net: &Network, senders: &[u32]) -> BTreeSet<(u32, u32)> {
    let p = &net.params;
    let pos = |id: u32| net.stations.iter().find(|s| s.id == id).map(|s| (s.x, s.y)).expect("station");
    let power = |a: (f64, f64), b: (f64, f64)| p.power * ((a.0 - b.0).hypot(a.1 - b.1)).powf(-p.alpha);
    let mut out = BTreeSet::new();
    for u in &net.stations {
        if senders.contains(&u.id) {
            continue;
        }
        let at = (u.x, u.y);
        for &v in senders {
            let signal = power(pos(v), at);
            let others: f64 = senders.iter().filter(|&&w| w != v).map(|&w| power(pos(w), at)).sum();
            let sinr = signal / (p.noise + others);
            if sinr >= p.beta && signal >= (1.0 + p.epsilon) * p.beta * p.noise {
                out.insert((u.id, v));
            }
        }
    }
    out
}

/// Hop distances from `root` in the graph with edges of length at most `r`.
pub fn hops(points: &[(f64, f64)], root: usize, r: f64) -> Vec<Option<usize>> {
    let mut depth = vec![None; points.len()];
    depth[root] = Some(0);
    let mut q = VecDeque::from([root]);
    while let Some(a) = q.pop_front() {
        for b in 0..points.len() {
            let d = (points[a].0 - points[b].0).hypot(points[a].1 - points[b].1);
            if depth[b].is_none() && d <= r {
                depth[b] = Some(depth[a].unwrap() + 1);
                q.push_back(b);
            }
        }
    }
    depth
}

/// Eccentricity of the source.
pub fn eccentricity(net: &Network) -> usize {
    let pts: Vec<(f64, f64)> = net.stations.iter().map(|s| (s.x, s.y)).collect();
    let root = net.stations.iter().position(|s| s.id == net.source).unwrap();
    hops(&pts, root, range_of(&net.params)).into_iter().map(|d| d.expect("connected")).max().unwrap()
}

/// Geometric-mean fit of `rounds / scale` and the worst residual factor.
pub fn fit(points: &[(f64, f64)]) -> (f64, f64) {
    let logs: Vec<f64> = points.iter().map(|&(rounds, scale)| (rounds / scale).ln()).collect();
    let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    let worst = points.iter().map(|&(rounds, scale)| {
        let q = rounds / (c * scale);
        q.max(1.0 / q)
    });
    (c, worst.fold(1.0, f64::max))
}

/// `max/min − 1` of a set of positive ratios.
pub fn spread(ratios: &[f64]) -> f64 {
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    max / min - 1.0
}

/// Network without connectivity requirements, for raw reception checks.
pub fn loose_network(params: ModelParams, points: &[Point]) -> Network {
    let stations: Vec<Station> =
        points.iter().enumerate().map(|(i, p)| Station { id: i as u32 + 1, x: p.x, y: p.y }).collect();
    let n = stations.len() as u32;
    Network { params, stations, source: 1, id_bound: n.max(1) }
}
