//! Box-by-box broadcasts for stations that know their neighbourhood.
//!
//! Every pivotal box is asleep, active or idle, and all its stations share
//! that state at phase starts. In each phase and for each of the 20
//! directions, the active stations with a neighbour in that direction
//! elect one leader per box; the leader transmits in its dilution slot and
//! the smallest-id station of the target box that heard it repeats the
//! message to its own box. Boxes reached this way become active in the
//! next phase, and active boxes become idle.
//!
//! The granularity variant elects among all connected active stations
//! with `⌈log₂ g⌉` doubling steps. The diameter variant first splits each
//! box into collision-avoiding squares, picks one connected
//! representative per square by echo search, and elects among
//! representatives on the grid of the partition.

use std::collections::HashMap;
use std::sync::Arc;

use crate::engine::{BoundaryKind, Delivery, Payload, Protocol, Round, StationProgram, StationState, StationView};
use crate::error::{Error, Result};
use crate::geometry::{dir_set, pivotal_key, ModelParams, Network, Point};
use crate::schedules::{dilution_slot, flat_constant};

use super::echo::{EchoAction, EchoRoles, EchoRun};
use super::gle::{finest_index, levels_for, GleStation};
use super::nogran::{nogran_partition, NoGranParams, Partition};
use super::timetable::{Part, Timetable};

#[derive(Clone, Debug, PartialEq)]
pub enum LocalMsg {
    Initial,
    Gle { level: u32, members: Vec<u32> },
    Echo(EchoAction),
    Relay1,
    Relay2,
}

impl Payload for LocalMsg {
    fn size_bits(&self) -> usize {
        match self {
            LocalMsg::Gle { members, .. } => 64 + 32 * members.len(),
            _ => 64,
        }
    }
}

/// What a station knows about its surroundings.
#[derive(Clone, Debug, Default)]
pub struct LocalKnowledge {
    /// Communication-graph neighbours with positions.
    pub neighbors: Vec<(u32, Point)>,
    /// Neighbours in the same pivotal box.
    pub mates: Vec<(u32, Point)>,
    /// Whether some neighbour lies in the box at each direction offset.
    pub connected: Vec<bool>,
}

impl LocalKnowledge {
    pub fn of(net: &Network, idx: usize) -> Self {
        let p = net.pos(idx);
        let r = net.range();
        let own = pivotal_key(p, &net.params);
        let dirs = dir_set();
        let mut k = LocalKnowledge { connected: vec![false; dirs.len()], ..Default::default() };
        for j in 0..net.len() {
            if j == idx || net.dist(idx, j) > r {
                continue;
            }
            let q = net.pos(j);
            k.neighbors.push((net.id(j), q));
            let b = pivotal_key(q, &net.params);
            if b == own {
                k.mates.push((net.id(j), q));
            }
            if let Some(dir) = dirs.iter().position(|&(d1, d2)| (own.0 + d1, own.1 + d2) == b) {
                k.connected[dir] = true;
            }
        }
        k
    }
}

enum Election {
    Granularity,
    Partitioned { partitions: HashMap<(i64, i64), Arc<Partition>> },
}

struct Shared {
    name: &'static str,
    params: ModelParams,
    tt: Timetable,
    dirs: Vec<(i64, i64)>,
    election: Election,
}

/// Builds stations and timetable for one network.
pub struct LocalBroadcast {
    shared: Arc<Shared>,
}

fn check_indices(net: &Network, levels: u32) -> Result<()> {
    for idx in 0..net.len() {
        finest_index(net.pos(idx), net.params.pivotal(), levels)?;
    }
    Ok(())
}

impl LocalBroadcast {
    /// Granularity-based variant; `g` is the known granularity bound.
    pub fn granularity(net: &Network, g: f64) -> Result<Self> {
        if !(g >= 1.0 && g.is_finite()) {
            return Err(Error::invalid(format!("granularity bound {g} must be a finite value >= 1")));
        }
        let d = flat_constant(net.params.alpha, net.params.epsilon, net.len() as u64)?;
        let tt = Timetable::new(d, levels_for(g), Vec::new());
        check_indices(net, tt.levels)?;
        Ok(LocalBroadcast {
            shared: Arc::new(Shared {
                name: "gran-ubr",
                params: net.params,
                tt,
                dirs: dir_set(),
                election: Election::Granularity,
            }),
        })
    }

    /// Partition-based variant; `n_known` is the station-count bound known to all.
    pub fn partitioned(net: &Network, n_known: u64) -> Result<Self> {
        if (n_known as usize) < net.len() {
            return Err(Error::invalid(format!("known bound {n_known} is below n = {}", net.len())));
        }
        let np = NoGranParams::new(&net.params, n_known)?;
        let d = flat_constant(net.params.alpha, net.params.epsilon, n_known)?;
        let mut partitions = HashMap::new();
        for (key, members) in net.pivotal_boxes() {
            let pts: Vec<(u32, Point)> = members.iter().map(|&i| (net.id(i), net.pos(i))).collect();
            partitions.insert(key, Arc::new(nogran_partition(&pts, key, &net.params, &np)?));
        }
        let tt = Timetable::new(d, np.log2_scale, Timetable::echo_sections(np.last_phase));
        check_indices(net, tt.levels)?;
        Ok(LocalBroadcast {
            shared: Arc::new(Shared {
                name: "diam-ubr",
                params: net.params,
                tt,
                dirs: dir_set(),
                election: Election::Partitioned { partitions },
            }),
        })
    }

    pub fn timetable(&self) -> &Timetable {
        &self.shared.tt
    }

    /// Partitions of every pivotal box (partition-based variant only).
    pub fn partitions(&self) -> Vec<Partition> {
        match &self.shared.election {
            Election::Granularity => Vec::new(),
            Election::Partitioned { partitions } => {
                let mut v: Vec<Partition> = partitions.values().map(|p| (**p).clone()).collect();
                v.sort_by_key(|p| p.box_key);
                v
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Initial,
    Echo { section: usize, start: Round },
    Gle { level: u32, start: Round },
    Exchange { start: Round },
}

pub struct LocalProgram {
    shared: Arc<Shared>,
    id: u32,
    pos: Point,
    box_key: (i64, i64),
    source: bool,
    know: LocalKnowledge,
    state: StationState,
    activated: bool,
    initial_sent: bool,
    section: Section,
    dir: usize,
    gle: GleStation,
    roles: Option<EchoRoles>,
    color: Option<(u32, u8, u8)>,
    echo: Option<EchoRun>,
    rep: Option<u32>,
    leader: bool,
    relay1_sent: bool,
    relay2_at: Option<Round>,
    flag: Option<String>,
}

impl LocalProgram {
    fn same_box(&self, p: Point) -> bool {
        pivotal_key(p, &self.shared.params) == self.box_key
    }

    fn exchange_offset(&self) -> u64 {
        2 * dilution_slot(self.box_key.0, self.box_key.1, self.shared.tt.d)
    }

    fn start_direction(&mut self, dir: usize) {
        self.dir = dir;
        self.gle.start(self.id, false);
        self.echo = None;
        self.rep = None;
        self.leader = false;
        self.relay1_sent = false;
        self.relay2_at = None;
    }

    fn end_phase(&mut self) {
        match self.state {
            StationState::Active => self.state = StationState::Idle,
            StationState::Asleep if self.activated => self.state = StationState::Active,
            _ => {}
        }
        self.activated = false;
    }

    fn finish_level(&mut self, level: u32) {
        self.gle.finish(self.id, level);
        if let Some(v) = self.gle.violation.take() {
            self.flag.get_or_insert(v);
        }
    }

    /// `true` if this station is the smallest-id box mate within range of `p`.
    fn dominates(&self, p: Point) -> bool {
        let r = self.shared.params.range();
        self.pos.dist(&p) <= r && self.know.mates.iter().all(|&(id, q)| id > self.id || q.dist(&p) > r)
    }
}

impl StationProgram for LocalProgram {
    type Msg = LocalMsg;

    fn on_wake(&mut self, round: Round) {
        if round == 0 {
            self.state = if self.source { StationState::Active } else { self.state };
            return;
        }
        let shared = self.shared.clone();
        let tt = &shared.tt;
        let slot = tt.locate(round);
        self.section = match slot.part {
            Part::Initial => Section::Initial,
            Part::Echo { section, .. } => Section::Echo { section, start: tt.echo_start(slot.phase, slot.dir, section) },
            Part::Gle { level, .. } => Section::Gle { level, start: tt.gle_start(slot.phase, slot.dir, level) },
            Part::Exchange { .. } => Section::Exchange { start: tt.exchange_start(slot.phase, slot.dir) },
        };
        self.start_direction(slot.dir);
    }

    fn on_receive(&mut self, dl: &Delivery<'_, LocalMsg>) {
        match (dl.payload, self.section) {
            (LocalMsg::Initial, Section::Initial) => {
                if self.state == StationState::Asleep && self.same_box(dl.from_pos) {
                    self.state = StationState::Active;
                }
            }
            (LocalMsg::Gle { level, members }, Section::Gle { level: cur, .. }) if *level == cur => {
                if let Ok(f) = finest_index(dl.from_pos, self.shared.params.pivotal(), self.shared.tt.levels) {
                    self.gle.hear(dl.from, cur, f, members);
                }
            }
            (LocalMsg::Echo(a), Section::Echo { section, start }) => {
                if self.color != Some(self.shared.tt.echo[section].color) {
                    return;
                }
                if let (Some(run), Some(roles)) = (self.echo.as_mut(), self.roles.as_ref()) {
                    run.hear(roles, self.id, dl.round - start, dl.from, *a);
                }
            }
            (LocalMsg::Relay1, Section::Exchange { start }) if (dl.round - start) % 2 == 0 => {
                let (d1, d2) = self.shared.dirs[self.dir];
                let sender = pivotal_key(dl.from_pos, &self.shared.params);
                if self.state == StationState::Asleep
                    && (sender.0 + d1, sender.1 + d2) == self.box_key
                    && self.dominates(dl.from_pos)
                {
                    self.relay2_at = Some(dl.round + 1);
                }
            }
            (LocalMsg::Relay2, Section::Exchange { .. }) => {
                if self.state == StationState::Asleep && self.same_box(dl.from_pos) {
                    self.activated = true;
                }
            }
            _ => {}
        }
    }

    fn on_boundary(&mut self, round: Round, kind: BoundaryKind) {
        let shared = self.shared.clone();
        let tt = &shared.tt;
        let slot = tt.locate(round);
        if kind == BoundaryKind::Phase && slot.phase > 0 {
            self.end_phase();
        }
        if let Section::Gle { level, .. } = self.section {
            self.finish_level(level);
        }
        let dir_start = tt.dir_start(slot.phase, slot.dir) == round;
        if dir_start {
            self.start_direction(slot.dir);
        }
        self.section = match slot.part {
            Part::Initial => Section::Initial,
            Part::Echo { section, .. } => {
                if self.state == StationState::Active && self.color == Some(tt.echo[section].color) {
                    self.echo = Some(EchoRun::new(self.know.connected[self.dir]));
                }
                Section::Echo { section, start: round }
            }
            Part::Gle { level, .. } => {
                if level == 0 {
                    self.close_echo();
                    self.gle.start(self.id, self.participates());
                }
                Section::Gle { level, start: round }
            }
            Part::Exchange { .. } => {
                if tt.levels == 0 {
                    self.close_echo();
                    self.gle.start(self.id, self.participates());
                }
                self.leader = self.gle.leader;
                Section::Exchange { start: round }
            }
        };
    }

    fn next_round(&self, from: Round) -> Option<Round> {
        let tt = &self.shared.tt;
        match self.section {
            Section::Initial => (from == 0 && self.source && !self.initial_sent).then_some(0),
            Section::Echo { section, start } => {
                let (run, roles) = (self.echo.as_ref()?, self.roles.as_ref()?);
                if Some(tt.echo[section].color) != self.color {
                    return None;
                }
                let len = tt.echo[section].len;
                run.next_offset(roles, self.id, from.saturating_sub(start), len).map(|o| start + o)
            }
            Section::Gle { level, start } => {
                let r = start + self.gle.planned(level, tt.d)?;
                (r >= from).then_some(r)
            }
            Section::Exchange { start } => {
                let first = (self.leader && !self.relay1_sent)
                    .then(|| start + self.exchange_offset())
                    .filter(|&r| r >= from);
                let second = self.relay2_at.filter(|&r| r >= from);
                match (first, second) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    fn on_round(&mut self, round: Round) -> Option<LocalMsg> {
        match self.section {
            Section::Initial => {
                self.initial_sent = true;
                Some(LocalMsg::Initial)
            }
            Section::Echo { start, .. } => {
                let (run, roles) = (self.echo.as_ref()?, self.roles.as_ref()?);
                run.action(roles, self.id, round - start).map(LocalMsg::Echo)
            }
            Section::Gle { level, .. } => {
                self.gle.mark_sent(level);
                Some(LocalMsg::Gle { level, members: self.gle.members.clone() })
            }
            Section::Exchange { .. } => {
                if self.relay2_at == Some(round) {
                    self.relay2_at = None;
                    self.activated = true;
                    Some(LocalMsg::Relay2)
                } else {
                    self.relay1_sent = true;
                    Some(LocalMsg::Relay1)
                }
            }
        }
    }

    fn is_terminal(&self) -> bool {
        self.state == StationState::Idle
    }

    fn view(&self) -> StationView {
        StationView {
            id: self.id,
            informed: true,
            state: Some(self.state),
            leader: Some(self.leader),
            participating: Some(self.gle.participating),
            color: self.color,
            flag: self.flag.clone(),
            ..Default::default()
        }
    }
}

impl LocalProgram {
    fn participates(&self) -> bool {
        if self.state != StationState::Active || !self.know.connected[self.dir] {
            return false;
        }
        match self.shared.election {
            Election::Granularity => true,
            Election::Partitioned { .. } => self.rep == Some(self.id),
        }
    }

    fn close_echo(&mut self) {
        if let (Some(run), Some(roles)) = (&self.echo, &self.roles) {
            self.rep = run.outcome(roles, self.id);
        }
        self.echo = None;
    }
}

impl Protocol for LocalBroadcast {
    type Program = LocalProgram;

    fn name(&self) -> String {
        self.shared.name.into()
    }

    fn program(&self, net: &Network, idx: usize) -> LocalProgram {
        let pos = net.pos(idx);
        let id = net.id(idx);
        let box_key = pivotal_key(pos, &net.params);
        let (roles, color) = match &self.shared.election {
            Election::Granularity => (None, None),
            Election::Partitioned { partitions } => {
                let sq = partitions[&box_key].square_of(id).expect("every station has a square");
                let pts: Vec<(u32, Point)> = sq
                    .members
                    .iter()
                    .map(|&m| (m, net.pos(net.index_of(m).expect("member exists"))))
                    .collect();
                (Some(EchoRoles::new(&pts)), sq.color)
            }
        };
        let finest = finest_index(pos, net.params.pivotal(), self.shared.tt.levels).expect("checked at construction");
        LocalProgram {
            shared: self.shared.clone(),
            id,
            pos,
            box_key,
            source: idx == net.source_index(),
            know: LocalKnowledge::of(net, idx),
            state: StationState::Asleep,
            activated: false,
            initial_sent: false,
            section: Section::Initial,
            dir: 0,
            gle: GleStation::new(finest),
            roles,
            color,
            echo: None,
            rep: None,
            leader: false,
            relay1_sent: false,
            relay2_at: None,
            flag: None,
        }
    }

    fn next_boundary(&self, from: Round) -> Option<(Round, BoundaryKind)> {
        self.shared.tt.next_boundary(from)
    }

    fn settled(&self, _net: &Network, views: &[StationView]) -> bool {
        views.iter().all(|v| v.informed && v.state == Some(StationState::Idle))
    }
}
