//! Broadcasting without local knowledge: stations know their own id and
//! position, `N`, and for the size-dependent algorithm also `n`.

pub mod general;
pub mod leader_election;
pub mod progress;
pub mod size_ubr;

pub use general::{check_election, ElectionReport, GeneralBroadcast, LeaderElection};
pub use leader_election::{ElectionLayout, ElectionMsg, ElectionStation};
pub use progress::{check_progress, check_size_invariants, progress, ProgressSnapshot};
pub use size_ubr::{SizeLayout, SizeMsg, SizeProgram, SizeUbr};

/// Smallest `x ≥ a` with `x mod period` in `slots`.
pub(crate) fn next_in_cycle(slots: &[u64], period: u64, a: u64) -> Option<u64> {
    slots.iter().map(|&s| a + (s + period - a % period) % period).min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_lookup() {
        assert_eq!(next_in_cycle(&[2, 5], 8, 0), Some(2));
        assert_eq!(next_in_cycle(&[2, 5], 8, 3), Some(5));
        assert_eq!(next_in_cycle(&[2, 5], 8, 6), Some(10));
        assert_eq!(next_in_cycle(&[], 8, 6), None);
    }
}
