//! Simulator and pulse compiler for a two-qubit phosphorus-donor spin
//! register.
//!
//! The register is a chain of four spin-1/2 objects, `|n2 e2 e1 n1>`: two
//! donor electrons coupled by an exchange interaction `J`, each hyperfine
//! coupled (`A`) to its own nucleus, in a static field with a gradient
//! (`b`, `delta_b`). The crate provides
//!
//! * the 16-state basis, spin operators and static Hamiltonian ([`model`]),
//! * closed-form perturbative and exact eigensystems ([`eigen`]),
//! * rotating-frame propagation of rectangular RF pulses ([`pulse`]),
//! * an analytic gate compiler built on resonance + `2piK` suppression
//!   conditions ([`gates`]),
//! * initialization / entanglement protocols, error metric and parameter
//!   sweeps ([`protocol`]),
//! * the classical nuclear-moment relaxation analysis ([`relax`]),
//! * deterministic CSV rendering for all reports ([`report`]).
//!
//! All frequencies are stored internally as angular frequencies (rad/s)
//! with `hbar = 1`; conversions to ordinary frequency (`omega = 2 pi f`)
//! happen only at configuration and report boundaries.

pub mod basis;
pub mod eigen;
pub mod error;
pub mod gates;
pub mod model;
pub mod operator;
pub mod protocol;
pub mod pulse;
pub mod relax;
pub mod report;

pub use basis::{BasisIndex, Orientation, SpinId};
pub use eigen::{EigenSystem, EnergySource};
pub use error::SimError;
pub use gates::{CompiledPulse, GateKind, GateSpec};
pub use model::SystemParams;
pub use protocol::{ProtocolStep, RunResult};
pub use pulse::{Frame, Pulse, RegisterState};
pub use relax::{RelaxationScenario, Trajectory};
