//! Maxwell-Bloch propagation of dark-state polaritons in a Lambda-type EIT
//! medium.

mod dsp;
mod envelope;
mod protocol;
mod solver;

pub use dsp::{dsp_project, inner, mixing, overlap};
pub use envelope::{envelope_overlap, held_passage, EnvelopeOverlap, HeldPassage, ENVELOPE_BIN};
pub use protocol::{
    standard_pulse, store_magnon, BeamSplitProtocol, StorageProtocol, StoredMagnon, PULSE_LEAD,
};
pub use solver::{
    evolve, Discretization, Efficiencies, SimulationConfig, Solver, Trajectory,
    INSTABILITY_THRESHOLD,
};
