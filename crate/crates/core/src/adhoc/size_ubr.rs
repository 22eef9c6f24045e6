//! Size-dependent broadcast for stations that know only `n`, `N`, their id
//! and their position.
//!
//! Odd rounds run the grouping thread: blocks of two selector passes in
//! which leaders announce their groups, then the ids they heard, followed
//! by a mutual-minimum matching that merges matched groups. Even rounds run
//! round robin inside each group, diluted over the pivotal grid. A station
//! informed during a block joins both threads at the next block.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::engine::{BoundaryKind, Delivery, Payload, Protocol, Round, StationProgram, StationView};
use crate::error::{Error, Result};
use crate::geometry::{pivotal_key, ModelParams, Network};
use crate::schedules::{build_ssf, dilution_slot, flat_constant, selector_k};

use super::next_in_cycle;

#[derive(Clone, Debug, PartialEq)]
pub enum SizeMsg {
    /// Grouping thread, first stage: sender's group.
    Group(Vec<u32>),
    /// Grouping thread, second stage: leaders the sender heard.
    Heard(Vec<u32>),
    /// Round-robin thread.
    Relay,
}

impl Payload for SizeMsg {
    fn size_bits(&self) -> usize {
        match self {
            SizeMsg::Group(v) | SizeMsg::Heard(v) => 64 + 32 * v.len(),
            SizeMsg::Relay => 64,
        }
    }
}

/// Round layout shared by all stations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeLayout {
    /// Selector length `s`.
    pub selector_len: u64,
    /// Rounds of one stage in grouping-thread rounds: the selector repeated
    /// until a block holds a full dilution frame of the round-robin thread.
    pub stage: u64,
    /// Dilution modulus of the round-robin thread.
    pub d: u32,
    /// Blocks after which stations stop.
    pub budget_blocks: u64,
}

impl SizeLayout {
    pub fn block_len(&self) -> u64 {
        4 * self.stage
    }

    pub fn block_start(&self, block: u64) -> Round {
        1 + block * self.block_len()
    }

    /// Block containing round `t ≥ 1`.
    pub fn block_of(&self, t: Round) -> u64 {
        (t.max(1) - 1) / self.block_len()
    }

    pub fn budget_rounds(&self) -> Round {
        self.block_start(self.budget_blocks)
    }
}

struct Shared {
    params: ModelParams,
    layout: SizeLayout,
    /// Selector slots of each id.
    slots: BTreeMap<u32, Vec<u64>>,
    run_full: bool,
}

/// The size-dependent ad-hoc broadcast.
pub struct SizeUbr {
    shared: Arc<Shared>,
}

impl SizeUbr {
    /// Budget of `24·n + 4` blocks: the progress measure is bounded by `23·n`.
    pub fn new(net: &Network) -> Result<Self> {
        Self::with_budget(net, 24 * net.len() as u64 + 4)
    }

    pub fn with_budget(net: &Network, budget_blocks: u64) -> Result<Self> {
        let p = &net.params;
        if !(p.alpha > 2.0) {
            return Err(Error::Unsupported(format!("size-ubr needs alpha > 2, got {}", p.alpha)));
        }
        let k = selector_k(p.alpha, p.epsilon, p.beta, p.noise)?;
        let ssf = build_ssf(net.id_bound, k.min(net.id_bound as u64) as u32);
        let s = ssf.len() as u64;
        let d = flat_constant(p.alpha, p.epsilon, net.len() as u64)?;
        let frame = (d as u64).pow(2);
        let reps = frame.div_ceil(2 * s).max(1);
        let layout = SizeLayout { selector_len: s, stage: reps * s, d, budget_blocks };
        let slots = net.stations.iter().map(|st| (st.id, ssf.slots_of(st.id))).collect();
        Ok(SizeUbr { shared: Arc::new(Shared { params: net.params, layout, slots, run_full: false }) })
    }

    /// Keeps running until the block budget instead of stopping once all are informed.
    pub fn run_to_budget(mut self) -> Self {
        let shared = Arc::get_mut(&mut self.shared).expect("not yet shared");
        shared.run_full = true;
        self
    }

    pub fn layout(&self) -> &SizeLayout {
        &self.shared.layout
    }
}

pub struct SizeProgram {
    shared: Arc<Shared>,
    id: u32,
    box_key: (i64, i64),
    dslot: u64,
    slots: Vec<u64>,
    /// Taking part in the current block.
    participating: bool,
    block: u64,
    done: bool,
    leader: bool,
    master: u32,
    group: Vec<u32>,
    heard: BTreeSet<u32>,
    heard_groups: BTreeMap<u32, Vec<u32>>,
    heard_sets: BTreeMap<u32, Vec<u32>>,
    matched: Option<u32>,
}

impl SizeProgram {
    fn layout(&self) -> &SizeLayout {
        &self.shared.layout
    }

    fn tid(&self) -> u64 {
        self.group.partition_point(|&u| u < self.id) as u64
    }

    fn modify(&mut self) {
        self.matched = None;
        if self.leader {
            if let Some(&u) = self.heard.iter().next() {
                let mutual = self.heard_sets.get(&u).and_then(|x| x.iter().min()) == Some(&self.id);
                if mutual {
                    self.matched = Some(u);
                    if self.id > u {
                        self.master = u;
                        self.leader = false;
                    }
                    let mut g: BTreeSet<u32> = self.group.iter().copied().collect();
                    g.extend(self.heard_groups.get(&u).into_iter().flatten().copied());
                    self.group = g.into_iter().collect();
                }
            }
        }
        self.heard.clear();
        self.heard_groups.clear();
        self.heard_sets.clear();
    }

    /// First grouping-thread transmission at block-relative step `≥ a`.
    fn next_grouping(&self, a: u64) -> Option<u64> {
        if !self.leader {
            return None;
        }
        let l = self.layout();
        next_in_cycle(&self.slots, l.selector_len, a).filter(|&x| x < 2 * l.stage)
    }

    /// First round-robin step at block-relative step `≥ a`.
    fn next_relay(&self, a: u64) -> Option<u64> {
        let l = self.layout();
        let frame = (l.d as u64).pow(2);
        let base = 2 * l.stage * self.block;
        let from = base + a;
        let m = self.group.len().max(1) as u64;
        let lambda0 = if from <= self.dslot { 0 } else { (from - self.dslot).div_ceil(frame) };
        let lambda = lambda0 + (self.tid() + m - lambda0 % m) % m;
        let tau = lambda * frame + self.dslot;
        (tau < base + 2 * l.stage).then(|| tau - base)
    }
}

impl StationProgram for SizeProgram {
    type Msg = SizeMsg;

    fn on_wake(&mut self, _round: Round) {}

    fn on_receive(&mut self, dl: &Delivery<'_, SizeMsg>) {
        if !self.participating || self.done {
            return;
        }
        let l = self.layout();
        let off = dl.round - l.block_start(self.block);
        if off % 2 == 1 {
            return;
        }
        let stage1 = off / 2 < l.stage;
        match dl.payload {
            SizeMsg::Group(g) if stage1 => {
                if self.leader {
                    if pivotal_key(dl.from_pos, &self.shared.params) == self.box_key {
                        self.heard.insert(dl.from);
                        self.heard_groups.insert(dl.from, g.clone());
                    }
                } else if self.group.iter().all(|v| g.binary_search(v).is_ok()) {
                    self.master = dl.from;
                    self.group = g.clone();
                }
            }
            SizeMsg::Heard(x) if !stage1 => {
                if self.leader && self.heard.contains(&dl.from) {
                    self.heard_sets.insert(dl.from, x.clone());
                }
            }
            _ => {}
        }
    }

    fn on_boundary(&mut self, round: Round, _kind: BoundaryKind) {
        if self.participating {
            self.modify();
        }
        self.block = self.layout().block_of(round);
        self.participating = true;
        if self.block >= self.layout().budget_blocks {
            self.done = true;
        }
    }

    fn next_round(&self, from: Round) -> Option<Round> {
        if !self.participating || self.done {
            return None;
        }
        let start = self.layout().block_start(self.block);
        let rel = from.saturating_sub(start);
        let grouping = self.next_grouping(rel.div_ceil(2)).map(|x| start + 2 * x);
        let relay = self.next_relay(rel.saturating_sub(1).div_ceil(2)).map(|x| start + 2 * x + 1);
        match (grouping, relay) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn on_round(&mut self, round: Round) -> Option<SizeMsg> {
        let off = round - self.layout().block_start(self.block);
        if off % 2 == 1 {
            return Some(SizeMsg::Relay);
        }
        if off / 2 < self.layout().stage {
            Some(SizeMsg::Group(self.group.clone()))
        } else {
            Some(SizeMsg::Heard(self.heard.iter().copied().collect()))
        }
    }

    fn is_terminal(&self) -> bool {
        self.done
    }

    fn view(&self) -> StationView {
        StationView {
            id: self.id,
            informed: true,
            leader: Some(self.leader),
            master: Some(self.master),
            group: Some(self.group.clone()),
            matched: self.matched,
            participating: Some(self.participating),
            ..Default::default()
        }
    }
}

impl Protocol for SizeUbr {
    type Program = SizeProgram;

    fn name(&self) -> String {
        "size-ubr".into()
    }

    fn program(&self, net: &Network, idx: usize) -> SizeProgram {
        let id = net.id(idx);
        let box_key = pivotal_key(net.pos(idx), &net.params);
        SizeProgram {
            shared: self.shared.clone(),
            id,
            box_key,
            dslot: dilution_slot(box_key.0, box_key.1, self.shared.layout.d),
            slots: self.shared.slots[&id].clone(),
            participating: false,
            block: 0,
            done: false,
            leader: true,
            master: id,
            group: vec![id],
            heard: BTreeSet::new(),
            heard_groups: BTreeMap::new(),
            heard_sets: BTreeMap::new(),
            matched: None,
        }
    }

    fn next_boundary(&self, from: Round) -> Option<(Round, BoundaryKind)> {
        let l = &self.shared.layout;
        let b = if from <= 1 { 0 } else { (from - 1).div_ceil(l.block_len()) };
        (b <= l.budget_blocks).then(|| (l.block_start(b), BoundaryKind::Phase))
    }

    fn settled(&self, _net: &Network, views: &[StationView]) -> bool {
        !self.shared.run_full && views.iter().all(|v| v.informed)
    }
}
