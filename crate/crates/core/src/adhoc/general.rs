//! Leader election as a protocol, and broadcast built from repeated
//! elections: in every execution the informed stations that are not yet
//! leaders elect one new leader per box, whose announcement carries the
//! message onward. Leaders retire after announcing.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{BoundaryKind, Delivery, Protocol, Round, StationProgram, StationState, StationView};
use crate::error::Result;
use crate::geometry::{pivotal_key, Network};

use super::leader_election::{ElectionLayout, ElectionMsg, ElectionSetup, ElectionStation};
#[cfg(test)]
use super::leader_election::ElectionPart;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// One execution from round 0 over the stations awake at round 0.
    Election,
    /// Executions from round 1 on, repeated until everyone is informed.
    Broadcast,
}

struct Shared {
    setup: ElectionSetup,
    mode: Mode,
}

impl Shared {
    fn layout(&self) -> &ElectionLayout {
        &self.setup.layout
    }

    fn base(&self) -> Round {
        match self.mode {
            Mode::Election => 0,
            Mode::Broadcast => 1,
        }
    }

    /// Execution index and offset of round `t ≥ base`.
    fn split(&self, t: Round) -> (u64, u64) {
        let e = self.layout().len();
        let r = t - self.base();
        (r / e, r % e)
    }

    fn exec_start(&self, k: u64) -> Round {
        self.base() + k * self.layout().len()
    }
}

pub struct ElectionProgram {
    shared: Arc<Shared>,
    id: u32,
    source: bool,
    source_sent: bool,
    exec: Option<u64>,
    station: ElectionStation,
}

impl StationProgram for ElectionProgram {
    type Msg = ElectionMsg;

    fn on_wake(&mut self, _round: Round) {}

    fn on_receive(&mut self, dl: &Delivery<'_, ElectionMsg>) {
        self.station.receive(&self.shared.setup, dl.from, dl.from_pos, dl.payload);
    }

    fn on_boundary(&mut self, round: Round, _kind: BoundaryKind) {
        let sh = self.shared.clone();
        if round < sh.base() {
            return;
        }
        let (k, o) = sh.split(round);
        if sh.mode == Mode::Election && k > 0 {
            self.station.finish();
            self.exec = None;
            return;
        }
        if o == 0 {
            self.station.finish();
            self.station.start(!self.station.is_leader());
            self.exec = Some(k);
        }
        if self.exec == Some(k) {
            self.station.on_section(sh.layout(), o);
        }
    }

    fn next_round(&self, from: Round) -> Option<Round> {
        if self.source && !self.source_sent && self.shared.mode == Mode::Broadcast {
            return Some(from);
        }
        let k = self.exec?;
        let start = self.shared.exec_start(k);
        let o = self.station.next_offset(self.shared.layout(), from.max(start) - start)?;
        Some(start + o)
    }

    fn on_round(&mut self, _round: Round) -> Option<ElectionMsg> {
        if self.source && !self.source_sent && self.shared.mode == Mode::Broadcast {
            self.source_sent = true;
            return Some(ElectionMsg::Source);
        }
        self.station.transmit()
    }

    fn is_terminal(&self) -> bool {
        self.shared.mode == Mode::Broadcast && self.station.is_leader()
    }

    fn view(&self) -> StationView {
        let s = &self.station;
        StationView {
            id: self.id,
            informed: true,
            state: Some(s.state),
            leader: Some(s.is_leader()),
            participating: Some(s.participating),
            cand: Some(s.cand),
            ph: s.ph,
            flag: s.flag.clone(),
            ..Default::default()
        }
    }
}

fn build(net: &Network, shared: &Arc<Shared>, idx: usize) -> ElectionProgram {
    let id = net.id(idx);
    ElectionProgram {
        shared: shared.clone(),
        id,
        source: idx == net.source_index(),
        source_sent: false,
        exec: None,
        station: ElectionStation::new(&shared.setup, id, net.pos(idx)),
    }
}

fn boundary(sh: &Shared, from: Round, limit: Option<u64>) -> Option<(Round, BoundaryKind)> {
    let (k, o) = sh.split(from.max(sh.base()));
    if let Some(l) = limit {
        if k >= l {
            return (k == l && o == 0).then_some((sh.exec_start(k), BoundaryKind::Phase));
        }
    }
    match sh.layout().next_start(o) {
        Some(0) => Some((sh.exec_start(k), BoundaryKind::Phase)),
        Some(x) => Some((sh.exec_start(k) + x, BoundaryKind::Step)),
        None => Some((sh.exec_start(k + 1), BoundaryKind::Phase)),
    }
}

/// One leader-election execution over the stations awake at round 0; pass
/// the participants through `RunConfig::initially_informed`.
pub struct LeaderElection {
    shared: Arc<Shared>,
}

impl LeaderElection {
    /// Election for at most `n_bound` stations per box.
    pub fn new(net: &Network, n_bound: u64) -> Result<Self> {
        let setup = ElectionSetup::new(net, n_bound)?;
        Ok(LeaderElection { shared: Arc::new(Shared { setup, mode: Mode::Election }) })
    }

    pub fn layout(&self) -> &ElectionLayout {
        self.shared.layout()
    }
}

impl Protocol for LeaderElection {
    type Program = ElectionProgram;

    fn name(&self) -> String {
        "leader-election".into()
    }

    fn program(&self, net: &Network, idx: usize) -> ElectionProgram {
        build(net, &self.shared, idx)
    }

    fn next_boundary(&self, from: Round) -> Option<(Round, BoundaryKind)> {
        boundary(&self.shared, from, Some(1))
    }

    /// Done once the execution is over and every participant is decided.
    fn settled(&self, _net: &Network, views: &[StationView]) -> bool {
        let part: Vec<_> = views.iter().filter(|v| v.participating == Some(true)).collect();
        part.iter().any(|v| v.state == Some(StationState::Leader))
            && part.iter().all(|v| matches!(v.state, Some(StationState::Leader | StationState::Passive)))
    }
}

/// Broadcast by repeated leader election.
pub struct GeneralBroadcast {
    shared: Arc<Shared>,
}

impl GeneralBroadcast {
    /// Stations know only `N`: elections are sized for `N` stations per box.
    pub fn new(net: &Network) -> Result<Self> {
        Self::with_bound(net, net.id_bound as u64)
    }

    /// Elections sized for `n_bound` stations per box.
    pub fn with_bound(net: &Network, n_bound: u64) -> Result<Self> {
        let setup = ElectionSetup::new(net, n_bound)?;
        Ok(GeneralBroadcast { shared: Arc::new(Shared { setup, mode: Mode::Broadcast }) })
    }

    pub fn layout(&self) -> &ElectionLayout {
        self.shared.layout()
    }
}

impl Protocol for GeneralBroadcast {
    type Program = ElectionProgram;

    fn name(&self) -> String {
        "general-broadcast".into()
    }

    fn program(&self, net: &Network, idx: usize) -> ElectionProgram {
        build(net, &self.shared, idx)
    }

    fn next_boundary(&self, from: Round) -> Option<(Round, BoundaryKind)> {
        boundary(&self.shared, from, None)
    }
}

/// Outcome of the per-box checks on a finished election.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectionReport {
    pub participants: usize,
    pub boxes: usize,
    pub leaders: usize,
    /// Every box with participants has exactly one leader.
    pub one_per_box: bool,
    /// In every box, candidates surviving iteration `k` are at most half of those surviving `k − 1`.
    pub halving: bool,
    /// Largest `ph` reached in any box.
    pub max_ph: u32,
    /// Smallest distance between two members of a box's top class, in units of the range.
    pub top_class_min_distance: Option<f64>,
}

impl ElectionReport {
    pub fn ok(&self) -> bool {
        self.one_per_box && self.halving
    }
}

/// Checks final station views of one election over `participants`.
pub fn check_election(net: &Network, views: &[StationView], participants: &[u32]) -> Result<ElectionReport> {
    let by_id: BTreeMap<u32, &StationView> = views.iter().map(|v| (v.id, v)).collect();
    let mut boxes: BTreeMap<(i64, i64), Vec<(u32, usize)>> = BTreeMap::new();
    for &id in participants {
        let idx = net.index_of(id).ok_or_else(|| crate::Error::invalid(format!("unknown participant {id}")))?;
        boxes.entry(pivotal_key(net.pos(idx), &net.params)).or_default().push((id, idx));
    }
    let mut report = ElectionReport {
        participants: participants.len(),
        boxes: boxes.len(),
        leaders: 0,
        one_per_box: true,
        halving: true,
        max_ph: 0,
        top_class_min_distance: None,
    };
    for members in boxes.values() {
        let view = |id: &u32| by_id.get(id).copied();
        let leaders = members.iter().filter(|(id, _)| view(id).and_then(|v| v.state) == Some(StationState::Leader)).count();
        report.leaders += leaders;
        report.one_per_box &= leaders == 1;
        let ph: Vec<u32> = members.iter().map(|(id, _)| view(id).and_then(|v| v.ph).unwrap_or(0)).collect();
        let top = ph.iter().copied().max().unwrap_or(0);
        report.max_ph = report.max_ph.max(top);
        for k in 1..=top {
            let above = ph.iter().filter(|&&p| p > k).count();
            let at_least = ph.iter().filter(|&&p| p >= k).count();
            report.halving &= 2 * above <= at_least;
        }
        let cls: Vec<usize> = members.iter().zip(&ph).filter(|(_, &p)| p == top).map(|((_, i), _)| *i).collect();
        for a in 0..cls.len() {
            for b in a + 1..cls.len() {
                let d = net.dist(cls[a], cls[b]) / net.range();
                report.top_class_min_distance = Some(report.top_class_min_distance.map_or(d, |m: f64| m.min(d)));
            }
        }
    }
    Ok(report)
}
