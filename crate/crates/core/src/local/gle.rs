//! Doubling leader election on nested grids.
//!
//! Participants start as leaders of their boxes on the finest grid
//! `G_{γ/h}`. Step `ℓ` merges the four sub-boxes of each box of the next
//! coarser grid: every current leader transmits once, in the slot of its
//! sub-box label diluted by `d` over the current grid, and the leader with
//! the smallest `(label, id)` heard inside the coarser box survives. After
//! `log₂ h` steps each nonempty pivotal box has exactly one leader.

use crate::error::{Error, Result};
use crate::exact;
use crate::geometry::Point;

/// Box index on the finest grid of a `2^levels`-fold refinement of the pivotal grid.
pub fn finest_index(p: Point, gamma: f64, levels: u32) -> Result<(i128, i128)> {
    let conv = |v: f64| {
        i128::try_from(exact::floor_div_scaled(v, gamma, levels as i32))
            .map_err(|_| Error::invalid(format!("grid index of {v} at refinement 2^{levels} overflows")))
    };
    Ok((conv(p.x)?, conv(p.y)?))
}

/// Smallest `levels` with `2^levels ≥ g`.
pub fn levels_for(g: f64) -> u32 {
    let mut levels = 0;
    while 2f64.powi(levels as i32) < g {
        levels += 1;
    }
    levels
}

/// Slot of a leader inside step `level` (length `4d²`).
pub fn slot(finest: (i128, i128), level: u32, d: u32) -> u64 {
    let (i, j) = (finest.0 >> level, finest.1 >> level);
    let label = label(i, j) as u64;
    let d = d as i128;
    let d2 = (d * d) as u64;
    label * d2 + (i.rem_euclid(d) * d + j.rem_euclid(d)) as u64
}

/// Position `(i mod 2) + 2·(j mod 2)` of a box inside its parent.
pub fn label(i: i128, j: i128) -> u8 {
    (i.rem_euclid(2) + 2 * j.rem_euclid(2)) as u8
}

/// Election state of one station.
#[derive(Clone, Debug, Default)]
pub struct GleStation {
    pub finest: (i128, i128),
    pub participating: bool,
    pub leader: bool,
    /// Ids of participants represented by this leader.
    pub members: Vec<u32>,
    /// Leaders heard in the current step inside the parent box: `(label, id, members)`.
    heard: Vec<(u8, u32, Vec<u32>)>,
    pub sent_level: Option<u32>,
    pub violation: Option<String>,
}

impl GleStation {
    pub fn new(finest: (i128, i128)) -> Self {
        GleStation { finest, ..Default::default() }
    }

    pub fn start(&mut self, id: u32, participating: bool) {
        self.participating = participating;
        self.leader = participating;
        self.members = if participating { vec![id] } else { Vec::new() };
        self.heard.clear();
        self.sent_level = None;
    }

    /// Round of this station's transmission in step `level`, relative to the step start.
    pub fn planned(&self, level: u32, d: u32) -> Option<u64> {
        (self.leader && self.sent_level != Some(level)).then(|| slot(self.finest, level, d))
    }

    pub fn mark_sent(&mut self, level: u32) {
        self.sent_level = Some(level);
    }

    /// Records a leader heard during step `level`.
    pub fn hear(&mut self, id: u32, level: u32, sender_finest: (i128, i128), members: &[u32]) {
        if !self.leader {
            return;
        }
        let own = (self.finest.0 >> level, self.finest.1 >> level);
        let other = (sender_finest.0 >> level, sender_finest.1 >> level);
        if own == other {
            self.violation.get_or_insert_with(|| {
                format!("leaders {id} and self share a level-{level} box; granularity bound exceeded")
            });
            return;
        }
        if (own.0 >> 1, own.1 >> 1) == (other.0 >> 1, other.1 >> 1) {
            self.heard.push((label(other.0, other.1), id, members.to_vec()));
        }
    }

    /// Closes step `level`: keeps leadership only for the smallest `(label, id)`.
    pub fn finish(&mut self, id: u32, level: u32) {
        if !self.leader {
            self.heard.clear();
            return;
        }
        let own = (self.finest.0 >> level, self.finest.1 >> level);
        let mine = (label(own.0, own.1), id);
        let best = self.heard.iter().map(|(l, i, _)| (*l, *i)).min();
        match best {
            Some(b) if b < mine => self.leader = false,
            _ => {
                for (_, _, m) in self.heard.drain(..) {
                    self.members.extend(m);
                }
                self.members.sort_unstable();
                self.members.dedup();
            }
        }
        self.heard.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_round_up_to_powers_of_two() {
        assert_eq!(levels_for(1.0), 0);
        assert_eq!(levels_for(2.0), 1);
        assert_eq!(levels_for(2.5), 2);
        assert_eq!(levels_for(256.0), 8);
    }

    #[test]
    fn coarse_indices_are_shifts() {
        let g = 0.5;
        let p = Point::new(0.74, -0.3);
        let f = finest_index(p, g, 5).unwrap();
        for l in 0..=5 {
            let direct = finest_index(p, g, 5 - l).unwrap();
            assert_eq!((f.0 >> l, f.1 >> l), direct);
        }
    }

    #[test]
    fn slots_are_distinct_within_a_dilution_frame() {
        let d = 3;
        for i in 0..6 {
            for j in 0..6 {
                assert!(slot((i, j), 0, d) < 4 * 9);
            }
        }
        assert_eq!(slot((0, 0), 0, d), slot((6, 6), 0, d));
        assert_ne!(slot((0, 0), 0, d), slot((3, 0), 0, d));
    }

    #[test]
    fn smallest_label_wins() {
        let mut a = GleStation::new((0, 1));
        let mut b = GleStation::new((1, 0));
        a.start(7, true);
        b.start(3, true);
        a.hear(3, 0, b.finest, &[3]);
        b.hear(7, 0, a.finest, &[7]);
        a.finish(7, 0);
        b.finish(3, 0);
        // (1,0) has label 1, (0,1) has label 2.
        assert!(b.leader && !a.leader);
        assert_eq!(b.members, vec![3, 7]);
    }
}
