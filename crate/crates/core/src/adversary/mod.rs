//! Lower-bound network families and the adversaries that run algorithms on them.

pub mod chain;
pub mod fan;
pub mod probes;

pub use chain::{chain_adversary, ChainFamily, ChainGadget, ChainOutcome};
pub use fan::{fan_adversary, FanFamily, FanOutcome, LayerIds};
pub use probes::{FloodProbe, SequentialProbe};

use serde::{Deserialize, Serialize};

/// One row of the adversary results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct AdversaryRow {
    pub family: String,
    pub delta: usize,
    pub D: usize,
    pub algorithm: String,
    pub forced_rounds: u64,
    pub bound: u64,
}
