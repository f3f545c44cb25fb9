//! Photon-mediated CZ gates between atoms coupled to nanofiber cavities.
//!
//! Rates and frequencies are angular frequencies in units of 2π×MHz throughout.
//! Qubit indices are 0-based in the API; qubit 0 is the least significant bit
//! of a computational basis index.

pub mod addressing;
pub mod constants;
pub mod error;
pub mod fiber;
pub mod fidelity;
pub mod gate;
pub mod numeric;
pub mod pauli;
pub mod physics;
pub mod scenario;

pub use error::{Error, Result};
pub use gate::{
    CMatrix, Channel, DensityMatrix, Flavor, GMatrix, GateKind, KrausChannel, LocalGateChannel,
    NodeLayout, PlacedAtom, RemoteGateChannel,
};
pub use pauli::PauliChannel;
pub use physics::{AmplitudeSet, AtomSpec, CavitySpec, ResidualCoupling};

pub use num_complex::Complex64 as C64;
