//! Global round layout shared by the local-knowledge broadcasts.
//!
//! Round 0 carries the source's first transmission. Phase `p` starts at
//! `1 + p·phase_len` and runs one inter-box step per direction of the
//! 20-offset set. A direction is laid out as: echo sections (one per
//! square colour, absent for the granularity-based variant), then the
//! doubling leader election, then `d²` two-round exchange slots.

use crate::engine::{BoundaryKind, Round};

/// One colour class of the echo stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EchoSection {
    /// `(phase index, box-row parity, box-column parity)`.
    pub color: (u32, u8, u8),
    pub start: u64,
    pub len: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Part {
    Initial,
    Echo { section: usize, offset: u64 },
    Gle { level: u32, offset: u64 },
    Exchange { slot: u64, second: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub phase: u64,
    pub dir: usize,
    pub part: Part,
}

#[derive(Clone, Debug)]
pub struct Timetable {
    /// Dilution modulus for election and exchange transmissions.
    pub d: u32,
    /// Doubling steps of the leader election.
    pub levels: u32,
    pub echo: Vec<EchoSection>,
    pub directions: usize,
    bounds: Vec<u64>,
}

impl Timetable {
    pub fn new(d: u32, levels: u32, echo: Vec<EchoSection>) -> Self {
        let mut tt = Timetable { d, levels, echo, directions: 20, bounds: Vec::new() };
        let mut b: Vec<u64> = tt.echo.iter().map(|s| s.start).collect();
        let e = tt.echo_len();
        b.extend((0..levels as u64).map(|l| e + l * tt.step_len()));
        b.push(e + tt.gle_len());
        b.dedup();
        tt.bounds = b;
        tt
    }

    /// Echo layout for square colours `0..=max_phase`: colour `i` gets `2 + 3i` rounds.
    pub fn echo_sections(max_phase: u32) -> Vec<EchoSection> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 0..=max_phase {
            for pj in 0..2u8 {
                for pk in 0..2u8 {
                    let len = 2 + 3 * i as u64;
                    out.push(EchoSection { color: (i, pj, pk), start, len });
                    start += len;
                }
            }
        }
        out
    }

    pub fn step_len(&self) -> u64 {
        4 * (self.d as u64).pow(2)
    }

    pub fn echo_len(&self) -> u64 {
        self.echo.last().map_or(0, |s| s.start + s.len)
    }

    pub fn gle_len(&self) -> u64 {
        self.levels as u64 * self.step_len()
    }

    pub fn exchange_len(&self) -> u64 {
        2 * (self.d as u64).pow(2)
    }

    pub fn dir_len(&self) -> u64 {
        self.echo_len() + self.gle_len() + self.exchange_len()
    }

    pub fn phase_len(&self) -> u64 {
        self.directions as u64 * self.dir_len()
    }

    pub fn phase_start(&self, phase: u64) -> Round {
        1 + phase * self.phase_len()
    }

    pub fn dir_start(&self, phase: u64, dir: usize) -> Round {
        self.phase_start(phase) + dir as u64 * self.dir_len()
    }

    pub fn gle_start(&self, phase: u64, dir: usize, level: u32) -> Round {
        self.dir_start(phase, dir) + self.echo_len() + level as u64 * self.step_len()
    }

    pub fn exchange_start(&self, phase: u64, dir: usize) -> Round {
        self.dir_start(phase, dir) + self.echo_len() + self.gle_len()
    }

    pub fn echo_start(&self, phase: u64, dir: usize, section: usize) -> Round {
        self.dir_start(phase, dir) + self.echo[section].start
    }

    pub fn locate(&self, t: Round) -> Slot {
        if t == 0 {
            return Slot { phase: 0, dir: 0, part: Part::Initial };
        }
        let pl = self.phase_len();
        let phase = (t - 1) / pl;
        let in_phase = (t - 1) % pl;
        let dir = (in_phase / self.dir_len()) as usize;
        let o = in_phase % self.dir_len();
        let e = self.echo_len();
        let part = if o < e {
            let section = self.echo.partition_point(|s| s.start <= o) - 1;
            Part::Echo { section, offset: o - self.echo[section].start }
        } else if o < e + self.gle_len() {
            let k = o - e;
            Part::Gle { level: (k / self.step_len()) as u32, offset: k % self.step_len() }
        } else {
            let k = o - e - self.gle_len();
            Part::Exchange { slot: k / 2, second: k % 2 == 1 }
        };
        Slot { phase, dir, part }
    }

    /// First section boundary at a round `≥ from`; phase starts are `Phase` boundaries.
    pub fn next_boundary(&self, from: Round) -> Option<(Round, BoundaryKind)> {
        let from = from.max(1);
        let pl = self.phase_len();
        let phase = (from - 1) / pl;
        let in_phase = (from - 1) % pl;
        let dl = self.dir_len();
        let dir = in_phase / dl;
        let o = in_phase % dl;
        let local = match self.bounds.iter().find(|&&b| b >= o) {
            Some(&b) => Some(dir * dl + b),
            None if dir + 1 < self.directions as u64 => Some((dir + 1) * dl + self.bounds[0]),
            None => None,
        };
        let (p, off) = match local {
            Some(off) => (phase, off),
            None => (phase + 1, 0),
        };
        let round = 1 + p * pl + off;
        let kind = if off == 0 { BoundaryKind::Phase } else { BoundaryKind::Step };
        Some((round, kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_without_echo() {
        let tt = Timetable::new(2, 3, Vec::new());
        assert_eq!(tt.step_len(), 16);
        assert_eq!(tt.dir_len(), 3 * 16 + 8);
        assert_eq!(tt.locate(0).part, Part::Initial);
        assert_eq!(tt.locate(1), Slot { phase: 0, dir: 0, part: Part::Gle { level: 0, offset: 0 } });
        assert_eq!(tt.locate(1 + 48 + 3), Slot { phase: 0, dir: 0, part: Part::Exchange { slot: 1, second: true } });
        assert_eq!(tt.locate(tt.phase_start(2) + tt.dir_len()).dir, 1);
    }

    #[test]
    fn boundaries_enumerate_sections() {
        let tt = Timetable::new(1, 2, Timetable::echo_sections(1));
        let mut t = 0;
        let mut seen = Vec::new();
        while let Some((b, kind)) = tt.next_boundary(t) {
            if b > tt.phase_start(1) {
                break;
            }
            seen.push((b, kind));
            t = b + 1;
        }
        // 8 echo sections, 2 levels and one exchange per direction, plus the next phase.
        assert_eq!(seen.len(), 20 * 11 + 1);
        assert_eq!(seen[0], (1, BoundaryKind::Phase));
        assert!(seen[1..seen.len() - 1].iter().all(|&(_, k)| k == BoundaryKind::Step));
        for &(b, _) in &seen {
            let slot = tt.locate(b);
            let at_start = match slot.part {
                Part::Echo { offset, .. } | Part::Gle { offset, .. } => offset == 0,
                Part::Exchange { slot, second } => slot == 0 && !second,
                Part::Initial => false,
            };
            assert!(at_start, "{b} -> {slot:?}");
        }
    }
}
