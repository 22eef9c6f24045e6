//! Round-synchronous execution of station programs.
//!
//! The engine is event driven: it jumps straight to the next round in which
//! some station wants to transmit or the protocol declares a boundary, so
//! protocols with long silent stretches cost only their active rounds.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Network, Point};
use crate::sinr::{Link, Reception};

pub type Round = u64;

/// Structured payload carried by a transmission.
pub trait Payload: Clone + fmt::Debug {
    /// Approximate encoded size, checked against the configured bound.
    fn size_bits(&self) -> usize;
    /// Whether the message carries the broadcast payload and so wakes its receiver.
    fn informs(&self) -> bool {
        true
    }
}

/// A message delivered to `to` from `from` in `round`.
#[derive(Debug)]
pub struct Delivery<'a, M> {
    pub round: Round,
    pub from: u32,
    pub from_pos: Point,
    pub to: u32,
    pub payload: &'a M,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Step,
    Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationState {
    Asleep,
    Active,
    Idle,
    Leader,
    Passive,
}

/// Per-station state exported to snapshots; algorithms fill what applies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StationView {
    pub id: u32,
    pub informed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StationState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participating: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cand: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ph: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<(u32, u8, u8)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

impl StationView {
    pub fn uninformed(id: u32) -> Self {
        StationView { id, ..Default::default() }
    }
}

/// Behaviour of one station.
///
/// Programs are only driven after they wake, so an uninformed station can
/// never transmit. Within a round the engine calls `on_boundary` (if the
/// protocol declares one), then `on_round` for due stations, then
/// `on_receive` for every delivery.
pub trait StationProgram {
    type Msg: Payload;

    /// First receipt of the broadcast message (round 0 for the source).
    fn on_wake(&mut self, round: Round);
    fn on_receive(&mut self, delivery: &Delivery<'_, Self::Msg>);
    fn on_boundary(&mut self, _round: Round, _kind: BoundaryKind) {}
    /// Earliest round `≥ from` in which the station may transmit.
    fn next_round(&self, from: Round) -> Option<Round>;
    fn on_round(&mut self, round: Round) -> Option<Self::Msg>;
    fn is_terminal(&self) -> bool {
        false
    }
    fn view(&self) -> StationView;
}

/// Factory for station programs plus the protocol-wide timetable.
pub trait Protocol {
    type Program: StationProgram;

    fn name(&self) -> String;
    fn program(&self, net: &Network, idx: usize) -> Self::Program;
    /// First boundary at a round `≥ from`.
    fn next_boundary(&self, _from: Round) -> Option<(Round, BoundaryKind)> {
        None
    }
    /// Global completion predicate, evaluated at phase boundaries.
    fn settled(&self, _net: &Network, views: &[StationView]) -> bool {
        views.iter().all(|v| v.informed)
    }
    /// `true` if every informed station transmits the same message in every
    /// round, so a round that informs nobody repeats forever.
    fn memoryless(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotMode {
    #[default]
    Off,
    Boundaries,
    Full,
}

impl std::str::FromStr for SnapshotMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(SnapshotMode::Off),
            "boundaries" => Ok(SnapshotMode::Boundaries),
            "full" => Ok(SnapshotMode::Full),
            other => Err(Error::invalid(format!("unknown snapshot mode {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// Stop after the round that informs the last station.
    AllInformed,
    /// Stop at the first phase boundary where the protocol reports completion.
    Settled,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub max_rounds: Round,
    pub snapshots: SnapshotMode,
    pub stop: StopRule,
    /// Stations awake at round 0 besides the source.
    pub initially_informed: Vec<u32>,
    /// Payload bound in bits; `None` uses `64·n·log₂N`.
    pub payload_bound: Option<usize>,
    pub record_rounds: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_rounds: 50_000_000,
            snapshots: SnapshotMode::Off,
            stop: StopRule::Settled,
            initially_informed: Vec::new(),
            payload_bound: None,
            record_rounds: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Completed,
    BudgetExhausted,
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: Round,
    pub senders: Vec<u32>,
    pub deliveries: Vec<Link>,
    /// Senders whose message carried no broadcast payload.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub silent: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotKind {
    Step,
    Phase,
    Round,
    Final,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub round: Round,
    pub kind: SnapshotKind,
    pub stations: Vec<StationView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub protocol: String,
    pub outcome: Outcome,
    /// Rounds executed, `0..rounds`.
    pub rounds: Round,
    /// Round in which each station (by index) was first informed.
    pub informed_round: Vec<Option<Round>>,
    pub records: Vec<RoundRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Flags raised by programs, as `(station, message)`.
    pub flags: Vec<(u32, String)>,
}

impl Trace {
    pub fn informed_count(&self) -> usize {
        self.informed_round.iter().filter(|r| r.is_some()).count()
    }

    pub fn all_informed(&self) -> bool {
        self.informed_round.iter().all(Option::is_some)
    }

    /// Round that informed the last station.
    pub fn completion_round(&self) -> Option<Round> {
        if !self.all_informed() {
            return None;
        }
        self.informed_round.iter().map(|r| r.unwrap()).max()
    }

    pub fn phase_snapshots(&self) -> impl Iterator<Item = &Snapshot> {
        self.snapshots.iter().filter(|s| matches!(s.kind, SnapshotKind::Phase | SnapshotKind::Final))
    }

    /// Line-delimited JSON: one object per round record and per snapshot, in round order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut snaps = self.snapshots.iter().peekable();
        for rec in &self.records {
            while let Some(s) = snaps.peek() {
                if s.round > rec.round {
                    break;
                }
                out.push_str(&serde_json::json!({ "snapshot": s }).to_string());
                out.push('\n');
                snaps.next();
            }
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        for s in snaps {
            out.push_str(&serde_json::json!({ "snapshot": s }).to_string());
            out.push('\n');
        }
        out
    }
}

/// Parsed line of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceLine {
    Snapshot { snapshot: Snapshot },
    Round(RoundRecord),
}

pub fn parse_jsonl(text: &str) -> Result<(Vec<RoundRecord>, Vec<Snapshot>)> {
    let mut records = Vec::new();
    let mut snaps = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TraceLine>(line) {
            Ok(TraceLine::Round(r)) => records.push(r),
            Ok(TraceLine::Snapshot { snapshot }) => snaps.push(snapshot),
            Err(e) => return Err(Error::invalid(format!("trace line {}: {e}", k + 1))),
        }
    }
    Ok((records, snaps))
}

/// What a single [`Simulation::step`] did.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub round: Round,
    pub boundary: Option<BoundaryKind>,
    pub senders: Vec<usize>,
    pub deliveries: Vec<(usize, usize)>,
}

/// A running execution that can be advanced one event round at a time.
pub struct Simulation<'n, P: Protocol> {
    net: &'n Network,
    protocol: P,
    cfg: RunConfig,
    field: Reception,
    programs: Vec<P::Program>,
    informed: Vec<Option<Round>>,
    scheduled: Vec<Option<Round>>,
    heap: BinaryHeap<Reverse<(Round, usize)>>,
    next_boundary: Option<(Round, BoundaryKind)>,
    /// Next round not yet processed.
    cursor: Round,
    records: Vec<RoundRecord>,
    snapshots: Vec<Snapshot>,
    payload_bound: usize,
    done: Option<Outcome>,
    finished_at: Round,
}

impl<'n, P: Protocol> Simulation<'n, P> {
    pub fn new(net: &'n Network, protocol: P, cfg: RunConfig) -> Result<Self> {
        if cfg.max_rounds == 0 {
            return Err(Error::invalid("max_rounds must be positive"));
        }
        let n = net.len();
        let programs = (0..n).map(|i| protocol.program(net, i)).collect();
        let log_n = (net.id_bound.max(2) as f64).log2().ceil() as usize;
        let payload_bound = cfg.payload_bound.unwrap_or(64 * n.max(1) * log_n);
        let next_boundary = protocol.next_boundary(0);
        let mut sim = Simulation {
            net,
            protocol,
            field: Reception::new(net),
            programs,
            informed: vec![None; n],
            scheduled: vec![None; n],
            heap: BinaryHeap::new(),
            next_boundary,
            cursor: 0,
            records: Vec::new(),
            snapshots: Vec::new(),
            payload_bound,
            done: None,
            finished_at: 0,
            cfg,
        };
        let mut woken = vec![net.source_index()];
        for id in sim.cfg.initially_informed.clone() {
            let idx = net
                .index_of(id)
                .ok_or_else(|| Error::invalid(format!("initially informed station {id} does not exist")))?;
            if !woken.contains(&idx) {
                woken.push(idx);
            }
        }
        for idx in woken {
            sim.informed[idx] = Some(0);
            sim.programs[idx].on_wake(0);
            sim.reschedule(idx, 0)?;
        }
        Ok(sim)
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    pub fn program(&self, idx: usize) -> &P::Program {
        &self.programs[idx]
    }

    pub fn is_informed(&self, idx: usize) -> bool {
        self.informed[idx].is_some()
    }

    pub fn informed_round(&self, idx: usize) -> Option<Round> {
        self.informed[idx]
    }

    pub fn is_done(&self) -> bool {
        self.done.is_some()
    }

    pub fn cursor(&self) -> Round {
        self.cursor
    }

    fn reschedule(&mut self, idx: usize, from: Round) -> Result<()> {
        let next = self.programs[idx].next_round(from);
        if let Some(r) = next {
            if r < from {
                return Err(Error::ContractViolation {
                    station: self.net.id(idx),
                    round: from,
                    detail: format!("next_round returned {r} before {from}"),
                });
            }
            if self.scheduled[idx] != Some(r) {
                self.heap.push(Reverse((r, idx)));
            }
        }
        self.scheduled[idx] = next;
        if self.heap.len() > 8 * self.programs.len() + 64 {
            self.heap = self
                .scheduled
                .iter()
                .enumerate()
                .filter_map(|(i, r)| r.map(|r| Reverse((r, i))))
                .collect();
        }
        Ok(())
    }

    fn next_wake(&mut self) -> Option<Round> {
        while let Some(&Reverse((r, idx))) = self.heap.peek() {
            if self.scheduled[idx] == Some(r) {
                return Some(r);
            }
            self.heap.pop();
        }
        None
    }

    /// Round of the next event, if any.
    pub fn next_event_round(&mut self) -> Option<Round> {
        let wake = self.next_wake();
        let bound = self.next_boundary.map(|(r, _)| r);
        match (wake, bound) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn views(&self) -> Vec<StationView> {
        (0..self.programs.len())
            .map(|i| {
                if self.informed[i].is_some() {
                    let mut v = self.programs[i].view();
                    v.id = self.net.id(i);
                    v.informed = true;
                    v
                } else {
                    StationView::uninformed(self.net.id(i))
                }
            })
            .collect()
    }

    fn all_informed(&self) -> bool {
        self.informed.iter().all(Option::is_some)
    }

    fn all_terminal(&self) -> bool {
        self.informed.iter().zip(&self.programs).all(|(inf, p)| inf.is_some() && p.is_terminal())
    }

    fn finish(&mut self, outcome: Outcome, rounds: Round) {
        self.done = Some(outcome);
        self.finished_at = rounds;
    }

    /// Processes the next event round. Returns `None` once the run is over.
    pub fn step(&mut self) -> Result<Option<StepInfo>> {
        if self.done.is_some() {
            return Ok(None);
        }
        let Some(t) = self.next_event_round() else {
            let outcome = if self.all_informed() { Outcome::Completed } else { Outcome::Stalled };
            let cursor = self.cursor;
            self.finish(outcome, cursor);
            return Ok(None);
        };
        if t >= self.cfg.max_rounds {
            let outcome = if self.all_informed() { Outcome::Completed } else { Outcome::BudgetExhausted };
            let max = self.cfg.max_rounds;
            self.finish(outcome, max);
            return Ok(None);
        }
        let mut boundary = None;
        if let Some((b, kind)) = self.next_boundary {
            if b == t {
                boundary = Some(kind);
                for idx in 0..self.programs.len() {
                    if self.informed[idx].is_some() {
                        self.programs[idx].on_boundary(t, kind);
                    }
                }
                for idx in 0..self.programs.len() {
                    if self.informed[idx].is_some() {
                        self.reschedule(idx, t)?;
                    }
                }
                self.next_boundary = self.protocol.next_boundary(t + 1);
                let snap = match (self.cfg.snapshots, kind) {
                    (SnapshotMode::Off, _) => None,
                    (SnapshotMode::Boundaries, BoundaryKind::Step) => None,
                    (_, BoundaryKind::Phase) => Some(SnapshotKind::Phase),
                    (SnapshotMode::Full, BoundaryKind::Step) => Some(SnapshotKind::Step),
                };
                let settled_check = kind == BoundaryKind::Phase && self.cfg.stop == StopRule::Settled;
                if snap.is_some() || settled_check {
                    let views = self.views();
                    let settled = settled_check && self.protocol.settled(self.net, &views);
                    if let Some(kind) = snap {
                        self.snapshots.push(Snapshot { round: t, kind, stations: views });
                    }
                    if settled {
                        self.finish(Outcome::Completed, t);
                        return Ok(Some(StepInfo { round: t, boundary, senders: vec![], deliveries: vec![] }));
                    }
                }
            }
        }

        let mut due = Vec::new();
        while let Some(&Reverse((r, idx))) = self.heap.peek() {
            if r != t {
                break;
            }
            self.heap.pop();
            if self.scheduled[idx] == Some(r) {
                self.scheduled[idx] = None;
                due.push(idx);
            }
        }
        due.sort_unstable();
        due.dedup();
        let mut senders = Vec::new();
        let mut payloads = Vec::new();
        for &idx in &due {
            if self.informed[idx].is_none() {
                return Err(Error::ContractViolation {
                    station: self.net.id(idx),
                    round: t,
                    detail: "uninformed station scheduled to transmit".into(),
                });
            }
            if let Some(msg) = self.programs[idx].on_round(t) {
                let bits = msg.size_bits();
                if bits > self.payload_bound {
                    return Err(Error::ContractViolation {
                        station: self.net.id(idx),
                        round: t,
                        detail: format!("payload of {bits} bits exceeds bound {}", self.payload_bound),
                    });
                }
                senders.push(idx);
                payloads.push(msg);
            }
        }
        let mut pairs = Vec::new();
        self.field.deliver(&senders, &mut pairs)?;
        let mut touched = due.clone();
        let mut woke = false;
        for &(to, from) in &pairs {
            let k = senders.binary_search(&from).expect("sender present");
            if self.informed[to].is_none() {
                if !payloads[k].informs() {
                    continue;
                }
                self.informed[to] = Some(t);
                self.programs[to].on_wake(t);
                woke = true;
            }
            let d = Delivery {
                round: t,
                from: self.net.id(from),
                from_pos: self.net.pos(from),
                to: self.net.id(to),
                payload: &payloads[k],
            };
            self.programs[to].on_receive(&d);
            touched.push(to);
        }
        touched.sort_unstable();
        touched.dedup();
        for idx in touched {
            self.reschedule(idx, t + 1)?;
        }
        if self.cfg.record_rounds && !senders.is_empty() {
            self.records.push(RoundRecord {
                round: t,
                senders: senders.iter().map(|&i| self.net.id(i)).collect(),
                deliveries: pairs
                    .iter()
                    .map(|&(to, from)| Link { to: self.net.id(to), from: self.net.id(from) })
                    .collect(),
                silent: senders.iter().zip(&payloads).filter(|(_, m)| !m.informs()).map(|(&i, _)| self.net.id(i)).collect(),
            });
        }
        if self.cfg.snapshots == SnapshotMode::Full && !senders.is_empty() {
            let views = self.views();
            self.snapshots.push(Snapshot { round: t, kind: SnapshotKind::Round, stations: views });
        }
        self.cursor = t + 1;
        if self.cfg.stop == StopRule::AllInformed && self.all_informed() {
            self.finish(Outcome::Completed, t + 1);
        } else if self.all_terminal() {
            self.finish(Outcome::Completed, t + 1);
        } else if !woke && !senders.is_empty() && self.protocol.memoryless() {
            let outcome = if self.all_informed() { Outcome::Completed } else { Outcome::Stalled };
            self.finish(outcome, t + 1);
        }
        Ok(Some(StepInfo { round: t, boundary, senders, deliveries: pairs }))
    }

    /// Runs to completion and returns the trace.
    pub fn run(mut self) -> Result<Trace> {
        if self.all_terminal() {
            self.finish(Outcome::Completed, 0);
        }
        while self.step()?.is_some() {}
        Ok(self.into_trace())
    }

    pub fn into_trace(mut self) -> Trace {
        let rounds = self.finished_at.max(self.cursor.min(self.cfg.max_rounds));
        let views = self.views();
        let flags = views.iter().filter_map(|v| v.flag.clone().map(|f| (v.id, f))).collect();
        if self.cfg.snapshots != SnapshotMode::Off {
            self.snapshots.push(Snapshot { round: rounds, kind: SnapshotKind::Final, stations: views });
        }
        Trace {
            protocol: self.protocol.name(),
            outcome: self.done.unwrap_or(Outcome::BudgetExhausted),
            rounds,
            informed_round: self.informed,
            records: self.records,
            snapshots: self.snapshots,
            flags,
        }
    }
}

/// Runs `protocol` on `net` until completion or the round budget.
pub fn run<P: Protocol>(net: &Network, protocol: P, cfg: RunConfig) -> Result<Trace> {
    Simulation::new(net, protocol, cfg)?.run()
}
