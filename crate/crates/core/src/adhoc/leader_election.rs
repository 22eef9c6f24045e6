//! One leader per nonempty pivotal box without local knowledge.
//!
//! Elimination repeats, for `⌈log₂ n⌉ + 1` iterations and each of the nine
//! box classes `(i mod 3, j mod 3)`, two selector passes: candidates first
//! announce themselves, then the ids they heard in their box. A candidate
//! survives only if it is the smallest id its own smallest neighbour heard,
//! so at most half of each box survives an iteration; `ph(v)` records the
//! iteration that eliminated `v`. Selection then runs the doubling election
//! on each class `ph = K, K−1, …, 1` in turn; the winners announce
//! themselves in a diluted slot and silence the rest of their box.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{Payload, StationState};
use crate::error::{Error, Result};
use crate::geometry::{pivotal_key, ModelParams, Network, Point};
use crate::local::gle::{finest_index, levels_for, GleStation};
use crate::schedules::{build_ssf, dilution_slot, flat_constant, selector_k, SsfFamily};

use super::next_in_cycle;

#[derive(Clone, Debug, PartialEq)]
pub enum ElectionMsg {
    /// Initial transmission of the source.
    Source,
    /// Elimination, first pass.
    Probe,
    /// Elimination, second pass: same-box candidates heard.
    Heard(Vec<u32>),
    /// Selection: doubling-election step.
    Gle(u32),
    /// Selection: a new leader.
    Announce,
}

impl Payload for ElectionMsg {
    fn size_bits(&self) -> usize {
        match self {
            ElectionMsg::Heard(v) => 64 + 32 * v.len(),
            _ => 64,
        }
    }

    /// Only the source and new leaders carry the broadcast payload.
    fn informs(&self) -> bool {
        matches!(self, ElectionMsg::Source | ElectionMsg::Announce)
    }
}

/// Where an offset of one execution falls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElectionPart {
    Elim { iter: u32, class: u8, pass: u8, offset: u64 },
    /// `ph` is the class being elected.
    Gle { ph: u32, level: u32, offset: u64 },
    Announce { ph: u32, offset: u64 },
}

/// Round layout of one execution.
#[derive(Clone, Debug)]
pub struct ElectionLayout {
    /// Selector length `s`.
    pub selector_len: u64,
    /// Elimination iterations `K = ⌈log₂ n⌉ + 1`.
    pub iterations: u32,
    /// Doubling steps for granularity bound `n`.
    pub levels: u32,
    /// Dilution modulus.
    pub d: u32,
    starts: Vec<u64>,
}

impl ElectionLayout {
    pub fn new(selector_len: u64, n_bound: u64, d: u32) -> Self {
        let levels = levels_for(n_bound.max(1) as f64);
        let iterations = levels + 1;
        let mut l = ElectionLayout { selector_len, iterations, levels, d, starts: Vec::new() };
        let mut starts: Vec<u64> = (0..iterations as u64 * 18).map(|k| k * selector_len).collect();
        for q in 0..iterations as u64 {
            let base = l.elim_len() + q * l.class_len();
            starts.extend((0..levels as u64).map(|lv| base + lv * l.step_len()));
            starts.push(base + levels as u64 * l.step_len());
        }
        starts.dedup();
        l.starts = starts;
        l
    }

    pub fn step_len(&self) -> u64 {
        4 * (self.d as u64).pow(2)
    }

    pub fn elim_len(&self) -> u64 {
        self.iterations as u64 * 18 * self.selector_len
    }

    pub fn class_len(&self) -> u64 {
        self.levels as u64 * self.step_len() + (self.d as u64).pow(2)
    }

    /// Rounds of one execution.
    pub fn len(&self) -> u64 {
        self.elim_len() + self.iterations as u64 * self.class_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn locate(&self, o: u64) -> ElectionPart {
        if o < self.elim_len() {
            let k = o / self.selector_len;
            return ElectionPart::Elim {
                iter: (k / 18) as u32,
                class: ((k % 18) / 2) as u8,
                pass: (k % 2) as u8,
                offset: o % self.selector_len,
            };
        }
        let r = o - self.elim_len();
        let q = (r / self.class_len()) as u32;
        let ph = self.iterations - q;
        let within = r % self.class_len();
        let g = self.levels as u64 * self.step_len();
        if within < g {
            ElectionPart::Gle { ph, level: (within / self.step_len()) as u32, offset: within % self.step_len() }
        } else {
            ElectionPart::Announce { ph, offset: within - g }
        }
    }

    /// Section starts, as offsets into the execution.
    pub fn section_starts(&self) -> &[u64] {
        &self.starts
    }

    /// First section start `≥ o`, if inside the execution.
    pub fn next_start(&self, o: u64) -> Option<u64> {
        self.starts.get(self.starts.partition_point(|&s| s < o)).copied()
    }
}

/// Shared constants of the election for one network.
#[derive(Clone, Debug)]
pub struct ElectionSetup {
    pub params: ModelParams,
    pub layout: ElectionLayout,
    pub ssf: SsfFamily,
}

impl ElectionSetup {
    pub fn new(net: &Network, n_bound: u64) -> Result<Self> {
        let p = &net.params;
        if !(p.alpha > 2.0) {
            return Err(Error::Unsupported(format!("leader election needs alpha > 2, got {}", p.alpha)));
        }
        let k = selector_k(p.alpha, p.epsilon, p.beta, p.noise)?;
        let ssf = build_ssf(net.id_bound, k.min(net.id_bound as u64) as u32);
        let d = flat_constant(p.alpha, p.epsilon, n_bound)?;
        Ok(ElectionSetup { params: net.params, layout: ElectionLayout::new(ssf.len() as u64, n_bound, d), ssf })
    }
}

/// Per-station election state, driven by execution offsets.
#[derive(Clone, Debug)]
pub struct ElectionStation {
    id: u32,
    box_key: (i64, i64),
    class9: u8,
    dslot: u64,
    slots: Vec<u64>,
    pub participating: bool,
    pub cand: bool,
    pub ph: Option<u32>,
    pub state: StationState,
    deciding: Option<u32>,
    heard: BTreeSet<u32>,
    heard_sets: BTreeMap<u32, Vec<u32>>,
    gle: GleStation,
    gle_level: Option<u32>,
    announce: bool,
    section: Option<(ElectionPart, u64)>,
    pub flag: Option<String>,
}

impl ElectionStation {
    pub fn new(setup: &ElectionSetup, id: u32, pos: Point) -> Self {
        let box_key = pivotal_key(pos, &setup.params);
        let finest = finest_index(pos, setup.params.pivotal(), setup.layout.levels).unwrap_or((0, 0));
        ElectionStation {
            id,
            box_key,
            class9: (box_key.0.rem_euclid(3) * 3 + box_key.1.rem_euclid(3)) as u8,
            dslot: dilution_slot(box_key.0, box_key.1, setup.layout.d),
            slots: setup.ssf.slots_of(id),
            participating: false,
            cand: false,
            ph: None,
            state: StationState::Asleep,
            deciding: None,
            heard: BTreeSet::new(),
            heard_sets: BTreeMap::new(),
            gle: GleStation::new(finest),
            gle_level: None,
            announce: false,
            section: None,
            flag: None,
        }
    }

    /// Resets for a new execution.
    pub fn start(&mut self, participating: bool) {
        self.participating = participating;
        self.cand = participating;
        self.ph = None;
        if self.state != StationState::Leader {
            self.state = if participating { StationState::Active } else { StationState::Asleep };
        }
        self.deciding = None;
        self.heard.clear();
        self.heard_sets.clear();
        self.gle.start(self.id, false);
        self.gle_level = None;
        self.announce = false;
        self.section = None;
    }

    pub fn is_leader(&self) -> bool {
        self.state == StationState::Leader
    }

    fn decide(&mut self, iter: u32) {
        self.deciding = None;
        let keep = match self.heard.iter().next() {
            None => false,
            Some(&u) => {
                let m = self.heard_sets.get(&u).into_iter().flatten().copied().chain([u]).min().unwrap_or(u);
                self.id <= m
            }
        };
        if !keep {
            self.cand = false;
            self.ph = Some(iter + 1);
        }
    }

    /// Closes the execution at its last round.
    pub fn finish(&mut self) {
        self.finish_level();
        self.announce = false;
        self.section = None;
    }

    fn finish_level(&mut self) {
        if let Some(level) = self.gle_level.take() {
            self.gle.finish(self.id, level);
            if let Some(v) = self.gle.violation.take() {
                self.flag.get_or_insert(v);
            }
        }
    }

    /// Section start at execution offset `o`.
    pub fn on_section(&mut self, layout: &ElectionLayout, o: u64) {
        let part = layout.locate(o);
        if let Some(iter) = self.deciding {
            let still = matches!(part, ElectionPart::Elim { iter: i, class, pass: 1, .. } if i == iter && class == self.class9);
            if !still {
                self.decide(iter);
            }
        }
        self.finish_level();
        match part {
            ElectionPart::Elim { iter, class, pass: 0, .. } if class == self.class9 && self.cand => {
                self.heard.clear();
                self.heard_sets.clear();
                self.deciding = Some(iter);
            }
            ElectionPart::Gle { ph, level, .. } => {
                if ph == layout.iterations && level == 0 {
                    self.close_elimination(layout);
                }
                if level == 0 {
                    self.gle.start(self.id, self.selects(ph));
                }
                self.gle_level = Some(level);
            }
            ElectionPart::Announce { ph, .. } => {
                if ph == layout.iterations && layout.levels == 0 {
                    self.close_elimination(layout);
                }
                if layout.levels == 0 {
                    self.gle.start(self.id, self.selects(ph));
                }
                self.announce = self.gle.leader && self.state == StationState::Active;
            }
            _ => {}
        }
        self.section = Some((part, o));
    }

    fn close_elimination(&mut self, layout: &ElectionLayout) {
        if self.participating && self.cand {
            self.cand = false;
            self.ph = Some(layout.iterations);
            self.flag.get_or_insert_with(|| format!("station {} survived every elimination pass", self.id));
        }
    }

    fn selects(&self, ph: u32) -> bool {
        self.participating && self.state == StationState::Active && self.ph == Some(ph)
    }

    /// First offset `≥ o` in the current section at which this station transmits.
    pub fn next_offset(&self, layout: &ElectionLayout, o: u64) -> Option<u64> {
        let (part, start) = self.section?;
        let rel = o.saturating_sub(start);
        let r = match part {
            ElectionPart::Elim { class, .. } => {
                if !(self.cand && class == self.class9) {
                    return None;
                }
                next_in_cycle(&self.slots, layout.selector_len, rel).filter(|&x| x < layout.selector_len)?
            }
            ElectionPart::Gle { level, .. } => {
                let x = self.gle.planned(level, layout.d)?;
                (x >= rel).then_some(x)?
            }
            ElectionPart::Announce { .. } => (self.announce && self.dslot >= rel).then_some(self.dslot)?,
        };
        Some(start + r)
    }

    pub fn transmit(&mut self) -> Option<ElectionMsg> {
        let (part, _) = self.section?;
        match part {
            ElectionPart::Elim { pass: 0, .. } => Some(ElectionMsg::Probe),
            ElectionPart::Elim { .. } => Some(ElectionMsg::Heard(self.heard.iter().copied().collect())),
            ElectionPart::Gle { level, .. } => {
                self.gle.mark_sent(level);
                Some(ElectionMsg::Gle(level))
            }
            ElectionPart::Announce { .. } => {
                self.announce = false;
                self.state = StationState::Leader;
                Some(ElectionMsg::Announce)
            }
        }
    }

    pub fn receive(&mut self, setup: &ElectionSetup, from: u32, from_pos: Point, msg: &ElectionMsg) {
        if !self.participating {
            return;
        }
        let same_box = pivotal_key(from_pos, &setup.params) == self.box_key;
        let Some((part, _)) = self.section else { return };
        match (part, msg) {
            (ElectionPart::Elim { class, pass: 0, .. }, ElectionMsg::Probe) if class == self.class9 && self.cand && same_box => {
                self.heard.insert(from);
            }
            (ElectionPart::Elim { class, pass: 1, .. }, ElectionMsg::Heard(x)) if class == self.class9 && self.cand => {
                if self.heard.contains(&from) {
                    self.heard_sets.insert(from, x.clone());
                }
            }
            (ElectionPart::Gle { level, .. }, ElectionMsg::Gle(l)) if *l == level => {
                if let Ok(f) = finest_index(from_pos, setup.params.pivotal(), setup.layout.levels) {
                    self.gle.hear(from, level, f, &[]);
                }
            }
            (ElectionPart::Announce { .. }, ElectionMsg::Announce) if same_box && self.state == StationState::Active => {
                self.state = StationState::Passive;
                self.announce = false;
            }
            _ => {}
        }
    }
}
