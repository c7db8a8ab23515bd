//! Circuits, simulators and exact references for Floquet dynamics of a
//! one-dimensional Z2 lattice gauge theory encoded on qubits.
//!
//! Qubit 0 is the least significant bit of every basis-state index.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod exact;
pub mod floquet;
pub mod mitigation;
pub mod noise;
pub mod observables;
pub mod pauli;
pub mod randomized;
pub mod rng;
pub mod statevector;
pub mod verify;

pub use circuit::{Circuit, GateKind, GateOp};
pub use error::{Error, Result};
pub use floquet::{Boundary, BondPolarization, CircuitBackend, InitialStateSpec, LatticeSpec, QubitLayout};
pub use noise::NoiseModel;
pub use observables::TimeSeries;
pub use pauli::{Pauli, PauliString};
pub use statevector::{Statevector, SubsystemCut};
