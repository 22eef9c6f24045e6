//! Broadcast schedules, geometric dilution and strongly-selective families.

pub mod constants;
pub mod ssf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{box_of, Point};

pub use constants::{flat_constant, selector_constant, selector_k, tail_sum, zeta_partial};
pub use ssf::{build_ssf, verify_ssf, SsfFamily};

/// Mapping from ids `1..=N` to binary sequences of a common length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastSchedule {
    pub id_bound: u32,
    pub length: u64,
    /// `bits[v-1][t]`.
    pub bits: Vec<Vec<bool>>,
}

impl BroadcastSchedule {
    pub fn new(id_bound: u32, bits: Vec<Vec<bool>>) -> Result<Self> {
        if bits.len() != id_bound as usize {
            return Err(Error::invalid("one sequence per id is required"));
        }
        let length = bits.first().map_or(0, Vec::len) as u64;
        if length == 0 || bits.iter().any(|b| b.len() as u64 != length) {
            return Err(Error::invalid("sequences must share a positive length"));
        }
        Ok(BroadcastSchedule { id_bound, length, bits })
    }

    /// Station `v` alone in round `v − 1`.
    pub fn round_robin(id_bound: u32) -> Self {
        let n = id_bound as usize;
        let bits = (0..n).map(|v| (0..n).map(|t| t == v).collect()).collect();
        BroadcastSchedule { id_bound, length: n as u64, bits }
    }

    /// Station `v` transmits in round `t` iff `v ∈ S_(t mod s)`.
    pub fn from_ssf(family: &SsfFamily) -> Self {
        let n = family.id_bound as usize;
        let mut bits = vec![vec![false; family.sets.len()]; n];
        for (t, set) in family.sets.iter().enumerate() {
            for &v in set {
                bits[v as usize - 1][t] = true;
            }
        }
        BroadcastSchedule { id_bound: family.id_bound, length: family.sets.len() as u64, bits }
    }

    pub fn bit(&self, id: u32, t: u64) -> bool {
        self.bits[id as usize - 1][(t % self.length) as usize]
    }
}

/// A schedule spread over `δ²` slots per round, indexed by box coordinates mod `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoBroadcastSchedule {
    pub id_bound: u32,
    pub delta: u32,
    pub length: u64,
    /// Cell of the grid whose boxes select the slot.
    pub cell: f64,
    base: BroadcastSchedule,
}

impl GeoBroadcastSchedule {
    /// Bit `t` of the sequence for `(id, a, b)`.
    pub fn bit(&self, id: u32, a: u32, b: u32, t: u64) -> bool {
        let d2 = (self.delta as u64).pow(2);
        let t = t % self.length;
        t % d2 == (a * self.delta + b) as u64 && self.base.bit(id, t / d2)
    }

    pub fn sequence(&self, id: u32, a: u32, b: u32) -> Vec<bool> {
        (0..self.length).map(|t| self.bit(id, a, b, t)).collect()
    }

    /// Slot class `(i mod δ, j mod δ)` of a position.
    pub fn class_of(&self, pos: Point) -> Result<(u32, u32)> {
        let c = box_of(pos, self.cell)?;
        let d = self.delta as i64;
        Ok((c.i.rem_euclid(d) as u32, c.j.rem_euclid(d) as u32))
    }

    pub fn transmits(&self, id: u32, pos: Point, t: u64) -> Result<bool> {
        let (a, b) = self.class_of(pos)?;
        Ok(self.bit(id, a, b, t))
    }
}

/// Spreads each round of `schedule` over `δ²` box-class slots.
pub fn dilute(schedule: &BroadcastSchedule, delta: u32, cell: f64) -> Result<GeoBroadcastSchedule> {
    if delta == 0 {
        return Err(Error::invalid("delta must be at least 1"));
    }
    if !(cell > 0.0) {
        return Err(Error::invalid("cell must be positive"));
    }
    Ok(GeoBroadcastSchedule {
        id_bound: schedule.id_bound,
        delta,
        length: schedule.length * (delta as u64).pow(2),
        cell,
        base: schedule.clone(),
    })
}

/// Slot of a box inside a `d × d` dilution frame.
pub fn dilution_slot(i: i64, j: i64, d: u32) -> u64 {
    let d = d as i64;
    (i.rem_euclid(d) * d + j.rem_euclid(d)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_one_is_identity() {
        let s = BroadcastSchedule::round_robin(4);
        let g = dilute(&s, 1, 1.0).unwrap();
        for v in 1..=4 {
            assert_eq!(g.sequence(v, 0, 0), s.bits[v as usize - 1]);
        }
    }

    #[test]
    fn length_one_schedule_fires_each_slot_once() {
        let s = BroadcastSchedule::new(1, vec![vec![true]]).unwrap();
        let g = dilute(&s, 2, 1.0).unwrap();
        assert_eq!(g.length, 4);
        for a in 0..2 {
            for b in 0..2 {
                let seq = g.sequence(1, a, b);
                assert_eq!(seq.iter().filter(|&&x| x).count(), 1);
                assert!(seq[(a * 2 + b) as usize]);
            }
        }
    }

    #[test]
    fn round_robin_three_by_three() {
        let s = BroadcastSchedule::round_robin(3);
        let g = dilute(&s, 3, 1.0).unwrap();
        assert_eq!(g.length, 27);
        for v in 1..=3u32 {
            for a in 0..3 {
                for b in 0..3 {
                    let fired: Vec<u64> = (0..27).filter(|&t| g.bit(v, a, b, t)).collect();
                    assert_eq!(fired, vec![(v as u64 - 1) * 9 + (a * 3 + b) as u64]);
                }
            }
        }
        assert!(g.transmits(2, Point::new(4.5, 2.5), 9 + 3 + 2).unwrap());
    }
}
