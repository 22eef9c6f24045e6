//! Physical model parameters, stations, grids and network statistics.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;

/// Physical SINR parameters. `range` and `pivotal` are derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub noise: f64,
    pub epsilon: f64,
    pub power: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { alpha: 3.0, beta: 1.0, noise: 1.0, epsilon: 0.5, power: 1.0 }
    }
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, noise: f64, epsilon: f64, power: f64) -> Result<Self> {
        let p = ModelParams { alpha, beta, noise, epsilon, power };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.noise, self.epsilon, self.power];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        if self.alpha < 2.0 {
            return Err(Error::invalid(format!("alpha = {} < 2", self.alpha)));
        }
        if self.beta < 1.0 {
            return Err(Error::invalid(format!("beta = {} < 1", self.beta)));
        }
        if self.noise < 1.0 {
            return Err(Error::invalid(format!("noise = {} < 1", self.noise)));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::invalid(format!("epsilon = {} <= 0", self.epsilon)));
        }
        if self.power <= 0.0 {
            return Err(Error::invalid(format!("power = {} <= 0", self.power)));
        }
        Ok(())
    }

    /// Minimum received power for a delivery: `(1+ε)·β·noise`.
    pub fn power_floor(&self) -> f64 {
        (1.0 + self.epsilon) * self.beta * self.noise
    }

    /// Interference-free communication range.
    pub fn range(&self) -> f64 {
        (self.power / self.power_floor()).powf(1.0 / self.alpha)
    }

    /// Side of a pivotal-grid box, `range / √2`.
    pub fn pivotal(&self) -> f64 {
        self.range() / std::f64::consts::SQRT_2
    }

    pub fn received_power(&self, dist: f64) -> f64 {
        self.power * dist.powf(-self.alpha)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

impl Station {
    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Box `C(i, j)` of the grid with the given cell size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCoord {
    pub i: i64,
    pub j: i64,
    pub cell: f64,
}

impl GridCoord {
    pub fn key(&self) -> (i64, i64) {
        (self.i, self.j)
    }

    pub fn offset(&self, d1: i64, d2: i64) -> (i64, i64) {
        (self.i + d1, self.j + d2)
    }
}

/// Grid box containing `p`; boxes are half-open on the right and top.
pub fn box_of(p: Point, cell: f64) -> Result<GridCoord> {
    if !p.is_finite() {
        return Err(Error::invalid(format!("non-finite coordinates ({}, {})", p.x, p.y)));
    }
    if !(cell.is_finite() && cell > 0.0) {
        return Err(Error::invalid(format!("cell = {cell} must be positive and finite")));
    }
    let i = exact::floor_div(p.x, cell).ok_or_else(|| Error::invalid("grid index overflow"))?;
    let j = exact::floor_div(p.y, cell).ok_or_else(|| Error::invalid("grid index overflow"))?;
    Ok(GridCoord { i, j, cell })
}

/// Pivotal box key of a point, for callers that already validated geometry.
pub fn pivotal_key(p: Point, params: &ModelParams) -> (i64, i64) {
    let g = params.pivotal();
    (
        exact::floor_div(p.x, g).expect("coordinate within grid range"),
        exact::floor_div(p.y, g).expect("coordinate within grid range"),
    )
}

/// Axis-aligned rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn of_box(b: &GridCoord) -> Rect {
        Rect {
            x0: b.i as f64 * b.cell,
            y0: b.j as f64 * b.cell,
            x1: (b.i + 1) as f64 * b.cell,
            y1: (b.j + 1) as f64 * b.cell,
        }
    }
}

/// Gap in cells between half-open intervals `[a0, a1)` and `[b0, b1)`.
pub fn axis_gap(a0: i128, a1: i128, b0: i128, b1: i128) -> i128 {
    if a0 < b1 && b0 < a1 {
        0
    } else {
        (a0 - b1).abs().min((a1 - b0).abs())
    }
}

fn on_grid(v: f64, cell: f64) -> Result<i128> {
    let q = v / cell;
    let r = q.round();
    if (q - r).abs() > 1e-9 * q.abs().max(1.0) {
        return Err(Error::invalid(format!("vertex {v} is not on the grid of cell {cell}")));
    }
    Ok(r as i128)
}

/// Box-distance between grid-aligned rectangles: the larger per-axis gap.
pub fn box_distance(r1: &Rect, r2: &Rect, cell: f64) -> Result<u64> {
    if !(cell.is_finite() && cell > 0.0) {
        return Err(Error::invalid("cell must be positive"));
    }
    let grid = |r: &Rect| -> Result<[i128; 4]> {
        Ok([on_grid(r.x0, cell)?, on_grid(r.x1, cell)?, on_grid(r.y0, cell)?, on_grid(r.y1, cell)?])
    };
    let [ax0, ax1, ay0, ay1] = grid(r1)?;
    let [bx0, bx1, by0, by1] = grid(r2)?;
    let gx = axis_gap(ax0, ax1, bx0, bx1);
    let gy = axis_gap(ay0, ay1, by0, by1);
    Ok(gx.max(gy) as u64)
}

/// The 20 offsets at which a pivotal box may have neighbouring boxes.
pub fn dir_set() -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(20);
    for d1 in -2i64..=2 {
        for d2 in -2i64..=2 {
            if (d1, d2) == (0, 0) || (d1.abs() == 2 && d2.abs() == 2) {
                continue;
            }
            out.push((d1, d2));
        }
    }
    out
}

/// Communication graph as adjacency lists over station indices.
#[derive(Clone, Debug)]
pub struct CommGraph {
    pub adj: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Hop distances from `root`; `None` for unreachable stations.
    pub fn bfs(&self, root: usize) -> Vec<Option<usize>> {
        let mut depth = vec![None; self.adj.len()];
        let mut queue = VecDeque::new();
        depth[root] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let du = depth[u].unwrap();
            for &v in &self.adj[u] {
                if depth[v].is_none() {
                    depth[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        depth
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct NetworkStats {
    pub n: usize,
    pub D: usize,
    pub Delta: usize,
    pub g: f64,
}

/// A static set of stations with a designated source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub params: ModelParams,
    pub stations: Vec<Station>,
    pub source: u32,
    pub id_bound: u32,
}

impl Network {
    /// Builds and validates a network (connectivity included).
    pub fn new(params: ModelParams, stations: Vec<Station>, source: u32, id_bound: u32) -> Result<Self> {
        let net = Network { params, stations, source, id_bound };
        net.validate()?;
        Ok(net)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Network = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn range(&self) -> f64 {
        self.params.range()
    }

    pub fn pos(&self, idx: usize) -> Point {
        self.stations[idx].pos()
    }

    pub fn id(&self, idx: usize) -> u32 {
        self.stations[idx].id
    }

    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.pos(a).dist(&self.pos(b))
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.stations.iter().position(|s| s.id == id)
    }

    pub fn source_index(&self) -> usize {
        self.index_of(self.source).expect("validated source")
    }

    pub fn id_index(&self) -> HashMap<u32, usize> {
        self.stations.iter().enumerate().map(|(i, s)| (s.id, i)).collect()
    }

    /// Checks every invariant except connectivity.
    pub fn validate_shape(&self) -> Result<()> {
        self.params.validate()?;
        if self.stations.is_empty() {
            return Err(Error::invalid("network has no stations"));
        }
        if self.stations.len() > self.id_bound as usize {
            return Err(Error::invalid(format!(
                "n = {} exceeds id bound {}",
                self.stations.len(),
                self.id_bound
            )));
        }
        let mut seen = HashMap::new();
        for s in &self.stations {
            if s.id == 0 || s.id > self.id_bound {
                return Err(Error::invalid(format!("station {} outside [1, {}]", s.id, self.id_bound)));
            }
            if !s.pos().is_finite() {
                return Err(Error::invalid(format!("station {} has non-finite coordinates", s.id)));
            }
            if seen.insert(s.id, ()).is_some() {
                return Err(Error::invalid(format!("duplicate station id {}", s.id)));
            }
        }
        if self.index_of(self.source).is_none() {
            return Err(Error::invalid(format!("source {} is not a station", self.source)));
        }
        for (a, sa) in self.stations.iter().enumerate() {
            for sb in &self.stations[a + 1..] {
                if sa.pos().dist(&sb.pos()) == 0.0 {
                    return Err(Error::invalid(format!("stations {} and {} coincide", sa.id, sb.id)));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        let depth = self.comm_graph().bfs(self.source_index());
        if let Some(idx) = depth.iter().position(Option::is_none) {
            return Err(Error::model(format!(
                "station {} is unreachable from source {}",
                self.stations[idx].id, self.source
            )));
        }
        Ok(())
    }

    /// Rejects placements with a pairwise distance within `rel·range` of the range.
    pub fn check_margins(&self, rel: f64) -> Result<()> {
        let r = self.range();
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                let d = self.dist(a, b);
                if (d - r).abs() < rel * r {
                    return Err(Error::model(format!(
                        "stations {} and {} sit {:.3e} from the range boundary",
                        self.id(a),
                        self.id(b),
                        (d - r).abs() / r
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn comm_graph(&self) -> CommGraph {
        let r = self.range();
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if self.dist(a, b) <= r {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        CommGraph { adj }
    }

    pub fn min_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                let d = self.dist(a, b);
                best = Some(best.map_or(d, |x| x.min(d)));
            }
        }
        best
    }

    /// Granularity `range / min distance`; 1 for a single station.
    pub fn granularity(&self) -> f64 {
        self.min_distance().map_or(1.0, |d| self.range() / d)
    }

    pub fn stats(&self) -> Result<NetworkStats> {
        let graph = self.comm_graph();
        let depth = graph.bfs(self.source_index());
        let mut ecc = 0;
        for (idx, d) in depth.iter().enumerate() {
            match d {
                Some(d) => ecc = ecc.max(*d),
                None => {
                    return Err(Error::model(format!("station {} is unreachable", self.stations[idx].id)))
                }
            }
        }
        Ok(NetworkStats { n: self.len(), D: ecc, Delta: graph.max_degree(), g: self.granularity() })
    }

    /// Stations grouped by pivotal box, each list sorted by id.
    pub fn pivotal_boxes(&self) -> HashMap<(i64, i64), Vec<usize>> {
        let mut boxes: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for idx in 0..self.len() {
            boxes.entry(pivotal_key(self.pos(idx), &self.params)).or_default().push(idx);
        }
        for members in boxes.values_mut() {
            members.sort_by_key(|&i| self.id(i));
        }
        boxes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(d: f64) -> Network {
        let p = ModelParams::default();
        Network::new(
            p,
            vec![Station { id: 1, x: 0.1, y: 0.1 }, Station { id: 2, x: 0.1 + d, y: 0.1 }],
            1,
            2,
        )
        .unwrap()
    }

    #[test]
    fn range_and_pivotal() {
        let p = ModelParams::default();
        assert!((p.range() - (1.0f64 / 1.5).powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((p.pivotal() * std::f64::consts::SQRT_2 - p.range()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(1.5, 1.0, 1.0, 0.5, 1.0).is_err());
        assert!(ModelParams::new(3.0, 0.5, 1.0, 0.5, 1.0).is_err());
        assert!(ModelParams::new(3.0, 1.0, 0.5, 0.5, 1.0).is_err());
        assert!(ModelParams::new(3.0, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn box_of_examples() {
        let g = ModelParams::default().pivotal();
        assert_eq!(box_of(Point::new(0.0, 0.0), g).unwrap().key(), (0, 0));
        assert_eq!(box_of(Point::new(-0.01, 0.3), 1.0).unwrap().key(), (-1, 0));
        assert_eq!(box_of(Point::new(g, g), g).unwrap().key(), (1, 1));
        assert!(box_of(Point::new(f64::NAN, 0.0), 1.0).is_err());
        assert!(box_of(Point::new(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn box_distance_examples() {
        let b = |i, j| Rect::of_box(&GridCoord { i, j, cell: 1.0 });
        assert_eq!(box_distance(&b(0, 0), &b(0, 0), 1.0).unwrap(), 0);
        assert_eq!(box_distance(&b(0, 0), &b(1, 0), 1.0).unwrap(), 0);
        assert_eq!(box_distance(&b(0, 0), &b(3, 0), 1.0).unwrap(), 2);
        let off = Rect { x0: 0.5, y0: 0.0, x1: 1.0, y1: 1.0 };
        assert!(box_distance(&off, &b(0, 0), 1.0).is_err());
    }

    #[test]
    fn dir_set_shape() {
        let dirs = dir_set();
        assert_eq!(dirs.len(), 20);
        assert!(dirs.contains(&(1, 0)));
        assert!(!dirs.contains(&(2, 2)));
        assert!(!dirs.contains(&(0, 0)));
    }

    #[test]
    fn corner_offsets_are_out_of_range() {
        // Closest points of C(0,0) and C(2,2) are one cell apart on both axes.
        let g = ModelParams::default().pivotal();
        let closest = (g * g + g * g).sqrt();
        assert!(closest >= ModelParams::default().range() - 1e-12);
    }

    #[test]
    fn comm_graph_examples() {
        let r = ModelParams::default().range();
        assert_eq!(pair(r / 2.0).comm_graph().edge_count(), 1);
        let far = Network {
            params: ModelParams::default(),
            stations: vec![Station { id: 1, x: 0.0, y: 0.0 }, Station { id: 2, x: 2.0 * r, y: 0.0 }],
            source: 1,
            id_bound: 2,
        };
        assert_eq!(far.comm_graph().edge_count(), 0);
        assert!(far.validate().is_err());
    }

    #[test]
    fn stats_examples() {
        let r = ModelParams::default().range();
        let s = pair(r / 2.0).stats().unwrap();
        assert_eq!((s.n, s.D, s.Delta), (2, 1, 1));
        let s = pair(r / 10.0).stats().unwrap();
        assert!((s.g - 10.0).abs() < 1e-9);
    }

    #[test]
    fn loader_reports_first_violation() {
        let text = r#"{"params":{"alpha":3,"beta":1,"noise":1,"epsilon":0.5,"power":1},
            "stations":[{"id":1,"x":0,"y":0},{"id":1,"x":0.1,"y":0}],"source":1,"id_bound":4}"#;
        let err = Network::from_json(text).unwrap_err().to_string();
        assert!(err.contains("duplicate station id 1"), "{err}");
        let text = r#"{"params":{"alpha":3,"beta":1,"noise":1,"epsilon":0.5,"power":1},
            "stations":[{"id":1,"x":0,"y":0},{"id":2,"x":0,"y":0}],"source":1,"id_bound":4}"#;
        assert!(Network::from_json(text).unwrap_err().to_string().contains("coincide"));
    }
}
