//! Representative choice inside a clique by echo-driven binary search.
//!
//! `ψ` (smallest id) and then `φ` (farthest from `ψ`, smallest id among
//! ties) announce whether they qualify. Otherwise the remaining members,
//! ranked by id, are searched by halving: in each iteration the qualified
//! members of the lower half transmit (R1), then again together with `φ`
//! (R2), and `ψ` echoes what it heard (R3). A relayed member ends the
//! search, a relayed `φ` means the lower half is empty, and silence means
//! it holds at least two qualified members.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::Point;

/// Fixed roles inside one square, derived identically by every member.
#[derive(Clone, Debug, PartialEq)]
pub struct EchoRoles {
    /// Members sorted by id.
    pub members: Vec<u32>,
    pub psi: u32,
    pub phi: Option<u32>,
    /// Members other than `ψ` and `φ`, sorted; rank `k` has search index `k + 1`.
    pub ranked: Vec<u32>,
}

impl EchoRoles {
    pub fn new(members: &[(u32, Point)]) -> Self {
        let mut m = members.to_vec();
        m.sort_by_key(|&(id, _)| id);
        let (psi, psi_pos) = m[0];
        let mut phi: Option<(u32, f64)> = None;
        for &(id, p) in &m[1..] {
            let d = psi_pos.dist(&p);
            if phi.is_none_or(|(_, best)| d > best) {
                phi = Some((id, d));
            }
        }
        let phi = phi.map(|(id, _)| id);
        let ranked = m.iter().map(|&(id, _)| id).filter(|&id| id != psi && Some(id) != phi).collect();
        EchoRoles { members: m.iter().map(|&(id, _)| id).collect(), psi, phi, ranked }
    }

    /// Search index of `id`, `1`-based, for members other than `ψ`, `φ`.
    pub fn rank(&self, id: u32) -> Option<usize> {
        self.ranked.iter().position(|&v| v == id).map(|k| k + 1)
    }

    /// Rounds needed for this square: `2 + 3·⌈log₂ |V1|⌉`.
    pub fn rounds(&self) -> u64 {
        let n = self.members.len() as u64;
        2 + 3 * (64 - (n.max(1) - 1).leading_zeros() as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EchoResult {
    Searching { bot: usize, top: usize, iter: u64 },
    Found(u32),
    Empty,
}

/// What one member knows during a run.
#[derive(Clone, Debug, Default)]
pub struct EchoRun {
    pub qualified: bool,
    pub psi_status: Option<bool>,
    pub phi_status: Option<bool>,
    /// Iteration → member relayed in R3 (as heard, or as sent by `ψ`).
    relays: BTreeMap<u64, u32>,
    /// `ψ` only: iteration → member heard in R1.
    heard_r1: BTreeMap<u64, u32>,
    /// `ψ` only: iterations in which `φ` was heard in R2.
    heard_r2: BTreeSet<u64>,
}

/// Transmission kind at an offset of the section.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EchoAction {
    Status(bool),
    Probe(u32),
    Relay(u32),
}

impl EchoRun {
    pub fn new(qualified: bool) -> Self {
        EchoRun { qualified, ..Default::default() }
    }

    /// State before iteration `upto` (all iterations before it are closed).
    pub fn state(&self, roles: &EchoRoles, own: u32, upto: u64) -> EchoResult {
        let psi_q = if own == roles.psi { Some(self.qualified) } else { self.psi_status };
        if psi_q == Some(true) {
            return EchoResult::Found(roles.psi);
        }
        if let Some(phi) = roles.phi {
            let phi_q = if own == phi { Some(self.qualified) } else { self.phi_status };
            if phi_q == Some(true) {
                return EchoResult::Found(phi);
            }
        }
        let (mut bot, mut top) = (1usize, roles.ranked.len());
        // The search never needs more than `|ranked| + 1` iterations.
        for iter in 0..upto.min(roles.ranked.len() as u64 + 1) {
            if bot > top {
                return EchoResult::Empty;
            }
            let mid = (bot + top) / 2;
            match self.relay_of(roles, own, iter) {
                Some(v) if Some(v) == roles.phi => bot = mid + 1,
                Some(v) => return EchoResult::Found(v),
                None => top = mid,
            }
        }
        if bot > top {
            EchoResult::Empty
        } else {
            EchoResult::Searching { bot, top, iter: upto }
        }
    }

    fn relay_of(&self, roles: &EchoRoles, own: u32, iter: u64) -> Option<u32> {
        if own == roles.psi {
            self.heard_r1.get(&iter).copied().or_else(|| self.heard_r2.contains(&iter).then_some(()).and(roles.phi))
        } else {
            self.relays.get(&iter).copied()
        }
    }

    /// Final outcome once the section has passed.
    pub fn outcome(&self, roles: &EchoRoles, own: u32) -> Option<u32> {
        match self.state(roles, own, u64::MAX) {
            EchoResult::Found(v) => Some(v),
            _ => None,
        }
    }

    /// Transmission of `own` at `offset` of the section, if any.
    pub fn action(&self, roles: &EchoRoles, own: u32, offset: u64) -> Option<EchoAction> {
        if offset == 0 {
            return (own == roles.psi).then_some(EchoAction::Status(self.qualified));
        }
        if offset == 1 {
            let psi_q = if own == roles.psi { Some(self.qualified) } else { self.psi_status };
            return (Some(own) == roles.phi && psi_q != Some(true)).then_some(EchoAction::Status(self.qualified));
        }
        let iter = (offset - 2) / 3;
        let round = (offset - 2) % 3;
        let EchoResult::Searching { bot, top, .. } = self.state(roles, own, iter) else {
            return None;
        };
        let mid = (bot + top) / 2;
        let in_t = self.qualified && roles.rank(own).is_some_and(|k| k >= bot && k <= mid);
        match round {
            0 => in_t.then_some(EchoAction::Probe(own)),
            1 => (in_t || Some(own) == roles.phi).then_some(EchoAction::Probe(own)),
            _ => (own == roles.psi).then(|| self.relay_of(roles, own, iter).map(EchoAction::Relay)).flatten(),
        }
    }

    /// First offset `≥ from` and `< len` at which `own` may transmit, assuming nothing more is heard.
    pub fn next_offset(&self, roles: &EchoRoles, own: u32, from: u64, len: u64) -> Option<u64> {
        (from..len).find(|&o| self.action(roles, own, o).is_some())
    }

    /// Records a message heard at `offset` from `from`.
    pub fn hear(&mut self, roles: &EchoRoles, own: u32, offset: u64, from: u32, action: EchoAction) {
        if !roles.members.contains(&from) {
            return;
        }
        match (offset, action) {
            (0, EchoAction::Status(q)) if from == roles.psi => self.psi_status = Some(q),
            (1, EchoAction::Status(q)) if Some(from) == roles.phi => self.phi_status = Some(q),
            (o, a) if o >= 2 => {
                let iter = (o - 2) / 3;
                match ((o - 2) % 3, a) {
                    (0, EchoAction::Probe(v)) if own == roles.psi => {
                        self.heard_r1.entry(iter).or_insert(v);
                    }
                    (1, EchoAction::Probe(v)) if own == roles.psi && Some(v) == roles.phi => {
                        self.heard_r2.insert(iter);
                    }
                    (2, EchoAction::Relay(v)) if from == roles.psi => {
                        self.relays.insert(iter, v);
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Runs one square in isolation with an ideal channel: a round with a
    /// single transmitter is heard by all, `ψ` decodes the lone member of
    /// `T` in R1 and hears `φ` only when it transmits alone.
    fn ideal(members: &[(u32, Point)], qualified: &[u32]) -> (Vec<Option<u32>>, u64) {
        let roles = EchoRoles::new(members);
        let mut runs: Vec<EchoRun> = roles.members.iter().map(|id| EchoRun::new(qualified.contains(id))).collect();
        let len = roles.rounds();
        let mut last = 0;
        for o in 0..len {
            let acts: Vec<(u32, EchoAction)> = roles
                .members
                .iter()
                .zip(&runs)
                .filter_map(|(&id, r)| r.action(&roles, id, o).map(|a| (id, a)))
                .collect();
            if !acts.is_empty() {
                last = o;
            }
            if acts.len() == 1 {
                let (from, a) = acts[0];
                for (k, &id) in roles.members.iter().enumerate() {
                    if id != from {
                        runs[k].hear(&roles, id, o, from, a);
                    }
                }
            }
        }
        (roles.members.iter().zip(&runs).map(|(&id, r)| r.outcome(&roles, id)).collect(), last + 1)
    }

    fn line(k: u32) -> Vec<(u32, Point)> {
        (1..=k).map(|i| (i * 3, Point::new(i as f64 * 0.01, 0.0))).collect()
    }

    #[test]
    fn psi_qualifies_immediately() {
        let (out, used) = ideal(&line(5), &[3]);
        assert!(out.iter().all(|&o| o == Some(3)));
        assert_eq!(used, 1);
    }

    #[test]
    fn empty_set_is_agreed() {
        for k in 1..=9 {
            let (out, _) = ideal(&line(k), &[]);
            assert!(out.iter().all(|o| o.is_none()), "k = {k}");
        }
    }

    #[test]
    fn every_single_member_is_found_in_time() {
        for k in 1..=16u32 {
            let members = line(k);
            let roles = EchoRoles::new(&members);
            for &(q, _) in &members {
                let (out, used) = ideal(&members, &[q]);
                assert!(out.iter().all(|&o| o == Some(q)), "k = {k}, q = {q}");
                assert!(used <= roles.rounds());
            }
        }
    }

    #[test]
    fn agreement_for_all_subsets_of_eight() {
        let members = line(8);
        let ids: Vec<u32> = members.iter().map(|m| m.0).collect();
        for mask in 0u32..256 {
            let q: Vec<u32> = ids.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
            let (out, used) = ideal(&members, &q);
            assert!(used <= 2 + 3 * 3);
            let first = out[0];
            assert!(out.iter().all(|&o| o == first));
            match first {
                Some(v) => assert!(q.contains(&v)),
                None => assert!(q.is_empty()),
            }
        }
    }
}
