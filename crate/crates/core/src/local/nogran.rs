//! Offline partition of a pivotal box into collision-avoiding squares.
//!
//! Works on the grid `G_a` with `a = γ/c`. Starting from the nonempty
//! `a × a` cells of the box, phase `i` takes the squares holding
//! `(2^(i−1), 2^i]` stations, colours those farther than `x_i` cells from
//! every other such square, and replaces each remaining connected group by
//! its smallest enclosing square. All lengths are integers in units of `a`
//! relative to the box corner, so the computation is exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::geometry::{axis_gap, ModelParams, Point};
use crate::schedules::zeta_partial;

/// Scale constants of the partition for a known station bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoGranParams {
    /// Separation factor for collision avoidance.
    pub c_alpha: u32,
    /// Last phase index, `⌈log₂ n⌉`.
    pub last_phase: u32,
    /// Side bounds `d_0..=d_(last+1)` in cells.
    pub side: Vec<i128>,
    /// Separation thresholds `x_0..=x_last` in cells.
    pub sep: Vec<i128>,
    /// Cells per pivotal box side, a power of two.
    pub scale: i128,
    pub log2_scale: u32,
}

/// Separation factor `⌈2·max(1, 20·2^(α/2)·ζ_n(α−1))^(1/α)⌉`.
pub fn avoid_constant(alpha: f64, n: u64) -> Result<u32> {
    if !(alpha >= 2.0) {
        return Err(Error::invalid(format!("alpha = {alpha} < 2")));
    }
    let inner = (20.0 * 2f64.powf(alpha / 2.0) * zeta_partial(alpha - 1.0, n)).max(1.0);
    Ok((2.0 * inner.powf(1.0 / alpha)).ceil() as u32)
}

impl NoGranParams {
    pub fn new(params: &ModelParams, n_known: u64) -> Result<Self> {
        let c_alpha = avoid_constant(params.alpha, n_known.max(1))?;
        let mut last_phase = 0;
        while (1u64 << last_phase) < n_known {
            last_phase += 1;
        }
        let overflow = || Error::Construction(format!("partition scale for n = {n_known} exceeds 128-bit cells"));
        let mut side = vec![1i128];
        let mut sep = Vec::new();
        for i in 0..=last_phase {
            let x = (c_alpha as i128)
                .checked_mul(side[i as usize])
                .and_then(|v| v.checked_mul(1i128 << i))
                .ok_or_else(overflow)?;
            sep.push(x);
            let next = x.checked_add(side[i as usize]).and_then(|v| v.checked_mul(4)).ok_or_else(overflow)?;
            side.push(next);
        }
        let need = sep[last_phase as usize].max(2 * side[last_phase as usize]);
        let mut log2_scale = 0;
        while log2_scale < 120 && (1i128 << log2_scale) <= need {
            log2_scale += 1;
        }
        if (1i128 << log2_scale) <= need {
            return Err(overflow());
        }
        Ok(NoGranParams { c_alpha, last_phase, side, sep, scale: 1i128 << log2_scale, log2_scale })
    }
}

/// A square of the partition, in cells relative to its pivotal box corner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Square {
    pub x0: i128,
    pub y0: i128,
    pub side: i128,
    /// Member station ids, sorted.
    pub members: Vec<u32>,
    pub color: Option<(u32, u8, u8)>,
}

impl Square {
    pub fn box_distance(&self, other: &Square) -> i128 {
        let gx = axis_gap(self.x0, self.x0 + self.side, other.x0, other.x0 + other.side);
        let gy = axis_gap(self.y0, self.y0 + self.side, other.y0, other.y0 + other.side);
        gx.max(gy)
    }
}

/// `(members, side)` of every live square at the start of a phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: u32,
    pub squares: Vec<(usize, i128)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub box_key: (i64, i64),
    pub squares: Vec<Square>,
    pub phases: Vec<PhaseRecord>,
}

impl Partition {
    pub fn square_of(&self, id: u32) -> Option<&Square> {
        self.squares.iter().find(|s| s.members.binary_search(&id).is_ok())
    }
}

/// Cell of a point on `G_a`, relative to the corner of pivotal box `box_key`.
pub fn local_cell(p: Point, box_key: (i64, i64), params: &ModelParams, np: &NoGranParams) -> Result<(i128, i128)> {
    let gamma = params.pivotal();
    let conv = |v: f64, b: i64| -> Result<i128> {
        let idx = i128::try_from(exact::floor_div_scaled(v, gamma, np.log2_scale as i32))
            .map_err(|_| Error::invalid("partition cell index overflows"))?;
        Ok(idx - b as i128 * np.scale)
    };
    let c = (conv(p.x, box_key.0)?, conv(p.y, box_key.1)?);
    if c.0 < 0 || c.1 < 0 || c.0 >= np.scale || c.1 >= np.scale {
        return Err(Error::invalid(format!("point ({}, {}) is outside box {box_key:?}", p.x, p.y)));
    }
    Ok(c)
}

fn components(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < comp.len() {
            for &v in &adj[comp[k]] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Partitions the stations of one pivotal box.
///
/// `stations` holds `(id, position)` for every station of the box. The
/// result depends only on this set, so every member computes the same one.
pub fn nogran_partition(
    stations: &[(u32, Point)],
    box_key: (i64, i64),
    params: &ModelParams,
    np: &NoGranParams,
) -> Result<Partition> {
    if stations.len() as u64 > 1u64 << np.last_phase {
        return Err(Error::Construction(format!(
            "box {box_key:?} holds {} stations, more than the known bound allows",
            stations.len()
        )));
    }
    let mut cells: BTreeMap<(i128, i128), Vec<u32>> = BTreeMap::new();
    for &(id, p) in stations {
        cells.entry(local_cell(p, box_key, params, np)?).or_default().push(id);
    }
    let mut live: Vec<Square> = cells
        .into_iter()
        .map(|((x, y), mut members)| {
            members.sort_unstable();
            Square { x0: x, y0: y, side: 1, members, color: None }
        })
        .collect();
    let parity = (box_key.0.rem_euclid(2) as u8, box_key.1.rem_euclid(2) as u8);
    let mut done = Vec::new();
    let mut phases = Vec::new();
    for i in 0..=np.last_phase {
        phases.push(PhaseRecord { phase: i, squares: live.iter().map(|s| (s.members.len(), s.side)).collect() });
        let lo = if i == 0 { 0 } else { 1usize << (i - 1) };
        let hi = 1usize << i;
        let (w, rest): (Vec<Square>, Vec<Square>) =
            live.into_iter().partition(|s| s.members.len() > lo && s.members.len() <= hi);
        live = rest;
        let x = np.sep[i as usize];
        let mut adj = vec![Vec::new(); w.len()];
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                if w[a].box_distance(&w[b]) <= x {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        for comp in components(w.len(), &adj) {
            if comp.len() == 1 {
                let mut s = w[comp[0]].clone();
                s.color = Some((i, parity.0, parity.1));
                done.push(s);
                continue;
            }
            let x0 = comp.iter().map(|&k| w[k].x0).min().unwrap();
            let y0 = comp.iter().map(|&k| w[k].y0).min().unwrap();
            let x1 = comp.iter().map(|&k| w[k].x0 + w[k].side).max().unwrap();
            let y1 = comp.iter().map(|&k| w[k].y0 + w[k].side).max().unwrap();
            let side = (x1 - x0).max(y1 - y0);
            if side > np.scale {
                return Err(Error::Construction(format!("merged square of side {side} exceeds the box")));
            }
            let mut members: Vec<u32> = comp.iter().flat_map(|&k| w[k].members.iter().copied()).collect();
            members.sort_unstable();
            live.push(Square {
                x0: x0.min(np.scale - side),
                y0: y0.min(np.scale - side),
                side,
                members,
                color: None,
            });
        }
    }
    if !live.is_empty() {
        return Err(Error::Construction(format!("{} squares of box {box_key:?} left uncoloured", live.len())));
    }
    done.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
    Ok(Partition { box_key, squares: done, phases })
}

/// Checks the size and side invariants at every phase start and the
/// separation of equally coloured squares across all given partitions.
pub fn check_partitions(parts: &[Partition], np: &NoGranParams) -> std::result::Result<(), String> {
    for part in parts {
        for rec in &part.phases {
            let i = rec.phase;
            for &(count, side) in &rec.squares {
                if i > 0 && count <= 1usize << (i - 1) {
                    return Err(format!("box {:?} phase {i}: square with {count} stations", part.box_key));
                }
                if side * (1i128 << i) > count as i128 * np.side[i as usize] {
                    return Err(format!("box {:?} phase {i}: side {side} too large for {count} stations", part.box_key));
                }
            }
        }
        let mut ids: Vec<u32> = part.squares.iter().flat_map(|s| s.members.iter().copied()).collect();
        let total = ids.len();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != total {
            return Err(format!("box {:?}: a station belongs to two squares", part.box_key));
        }
    }
    let global: Vec<(Square, (i64, i64))> = parts
        .iter()
        .flat_map(|p| {
            p.squares.iter().map(move |s| {
                let mut g = s.clone();
                g.x0 += p.box_key.0 as i128 * np.scale;
                g.y0 += p.box_key.1 as i128 * np.scale;
                (g, p.box_key)
            })
        })
        .collect();
    for a in 0..global.len() {
        for b in a + 1..global.len() {
            let (sa, ka) = &global[a];
            let (sb, kb) = &global[b];
            let (Some(ca), Some(cb)) = (sa.color, sb.color) else {
                return Err("uncoloured square".into());
            };
            if ca != cb {
                continue;
            }
            let need = np.sep[ca.0 as usize];
            if sa.box_distance(sb) < need {
                return Err(format!(
                    "squares of colour {ca:?} in boxes {ka:?} and {kb:?} are {} cells apart, below {need}",
                    sa.box_distance(sb)
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(n: u64) -> NoGranParams {
        NoGranParams::new(&ModelParams::default(), n).unwrap()
    }

    #[test]
    fn avoid_constant_default() {
        assert_eq!(avoid_constant(3.0, 64).unwrap(), 10);
        assert!(avoid_constant(4.0, 64).unwrap() <= 10);
    }

    #[test]
    fn scale_recurrence() {
        let p = np(64);
        assert_eq!(p.c_alpha, 10);
        assert_eq!(p.last_phase, 6);
        assert_eq!(p.side[..3], [1, 44, 3696]);
        assert_eq!(p.sep[..3], [10, 880, 147_840]);
        assert!(p.scale > p.sep[6] && p.scale > 2 * p.side[6] && p.scale.count_ones() == 1);
    }

    #[test]
    fn single_station_is_one_cell() {
        let params = ModelParams::default();
        let p = np(8);
        let part = nogran_partition(&[(5, Point::new(0.1, 0.2))], (0, 0), &params, &p).unwrap();
        assert_eq!(part.squares.len(), 1);
        assert_eq!(part.squares[0].side, 1);
        assert_eq!(part.squares[0].color, Some((0, 0, 0)));
    }

    #[test]
    fn adjacent_cells_merge_then_colour() {
        let params = ModelParams::default();
        let p = np(8);
        let a = params.pivotal() / p.scale as f64;
        let pts = [(1, Point::new(100.5 * a, 100.5 * a)), (2, Point::new(101.5 * a, 100.5 * a))];
        let part = nogran_partition(&pts, (0, 0), &params, &p).unwrap();
        assert_eq!(part.squares.len(), 1);
        assert_eq!(part.squares[0].members, vec![1, 2]);
        assert_eq!(part.squares[0].color.unwrap().0, 1);
        check_partitions(&[part], &p).unwrap();
    }
}
