//! Scripted programs used to exercise the adversary.

use crate::engine::{Delivery, Payload, Protocol, Round, StationProgram, StationView};
use crate::geometry::Network;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ping;

impl Payload for Ping {
    fn size_bits(&self) -> usize {
        1
    }
}

/// Every informed station transmits in every round.
#[derive(Clone, Copy, Debug, Default)]
pub struct FloodProbe;

pub struct FloodProgram {
    id: u32,
}

impl StationProgram for FloodProgram {
    type Msg = Ping;

    fn on_wake(&mut self, _round: Round) {}

    fn on_receive(&mut self, _d: &Delivery<'_, Ping>) {}

    fn next_round(&self, from: Round) -> Option<Round> {
        Some(from)
    }

    fn on_round(&mut self, _round: Round) -> Option<Ping> {
        Some(Ping)
    }

    fn view(&self) -> StationView {
        StationView { id: self.id, informed: true, ..Default::default() }
    }
}

impl Protocol for FloodProbe {
    type Program = FloodProgram;

    fn name(&self) -> String {
        "probe-flood".into()
    }

    fn memoryless(&self) -> bool {
        true
    }

    fn program(&self, net: &Network, idx: usize) -> FloodProgram {
        FloodProgram { id: net.id(idx) }
    }
}

/// Each station transmits once, in the first round after its wake-up that
/// is congruent to its id modulo `period`.
#[derive(Clone, Copy, Debug)]
pub struct SequentialProbe {
    pub period: u64,
}

impl SequentialProbe {
    pub fn new(net: &Network) -> Self {
        SequentialProbe { period: net.id_bound.max(1) as u64 }
    }
}

pub struct SequentialProgram {
    id: u32,
    period: u64,
    slot: Option<Round>,
    sent: bool,
}

impl StationProgram for SequentialProgram {
    type Msg = Ping;

    fn on_wake(&mut self, round: Round) {
        let a = round + 1;
        let r = self.id as u64 % self.period;
        self.slot = Some(a + (r + self.period - a % self.period) % self.period);
    }

    fn on_receive(&mut self, _d: &Delivery<'_, Ping>) {}

    fn next_round(&self, from: Round) -> Option<Round> {
        self.slot.filter(|&s| !self.sent && s >= from)
    }

    fn on_round(&mut self, _round: Round) -> Option<Ping> {
        self.sent = true;
        Some(Ping)
    }

    fn is_terminal(&self) -> bool {
        self.sent
    }

    fn view(&self) -> StationView {
        StationView { id: self.id, informed: true, ..Default::default() }
    }
}

impl Protocol for SequentialProbe {
    type Program = SequentialProgram;

    fn name(&self) -> String {
        "probe-sequential".into()
    }

    fn program(&self, net: &Network, idx: usize) -> SequentialProgram {
        SequentialProgram { id: net.id(idx), period: self.period, slot: None, sent: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, Outcome, RunConfig};
    use crate::geometry::{ModelParams, Station};

    fn line(k: usize) -> Network {
        let r = ModelParams::default().range();
        let st = (0..k).map(|i| Station { id: i as u32 + 1, x: 0.8 * r * i as f64, y: 0.0 }).collect();
        Network::new(ModelParams::default(), st, 1, 8).unwrap()
    }

    #[test]
    fn sequential_probe_walks_a_line() {
        let n = line(3);
        let t = run(&n, SequentialProbe::new(&n), RunConfig::default()).unwrap();
        assert_eq!(t.outcome, Outcome::Completed);
        assert_eq!(t.informed_round, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn flood_probe_informs_a_line() {
        let n = line(4);
        let t = run(&n, FloodProbe, RunConfig { max_rounds: 100, ..RunConfig::default() }).unwrap();
        assert!(t.all_informed());
    }
}
