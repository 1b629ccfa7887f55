// SPDX-License-Identifier: Apache-2.0

//! Compiler and verification workbench for the SAT-to-automata-network
//! metareduction.
//!
//! Given a propositional formula `S` and a gadget family `Γ = {G0..G4}`, the
//! compiler emits a Boolean circuit that succinctly encodes the automata
//! network whose dynamics is the glued graph `2 · S̄ · 4^L · 3`. The glued
//! graph is also materialized explicitly (at desk scale) so the circuit can be
//! checked configuration by configuration, and MSO properties of the result can
//! be model-checked by brute force.

pub mod circuit;
pub mod cli;
pub mod compile;
pub mod error;
pub mod glue;
pub mod instance;
pub mod sat;
pub mod sizing;
pub mod verify;

pub use circuit::{BitWord, Circuit, Gate, GateId, GateKind};
pub use error::{Error, Result};
pub use glue::{BoundariedGraph, ExplicitDynamics, GammaSpec, GadgetKind};
pub use instance::{Mode, ReductionInstance, SizingMode};
pub use sat::PropFormula;
pub use sizing::InstanceSizes;
