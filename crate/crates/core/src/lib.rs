//! Design and verification toolkit for islanded AC microgrids.
//!
//! The pipeline goes: parse a network description -> pick an operating point
//! ([`setpoint`]) -> solve the network equilibrium ([`equilibrium`]) -> certify
//! each subsystem's passivity and synthesize local voltage controllers
//! ([`localsynth`]) -> co-design distributed consensus gains and a sparse
//! communication topology through one global matrix inequality ([`codesign`])
//! -> confirm the closed loop in a nonlinear time-domain simulation ([`sim`]).
//!
//! All matrix inequalities run through the small dense semidefinite solver in
//! [`sdp`]; every certificate can be re-checked by direct substitution,
//! independent of the solver that produced it.

pub mod dq;
pub mod network;
pub mod presets;
pub mod sdp;

pub use dq::{real_block, DqValue};
pub use network::{DgParams, Incidence, LineParams, LoadParams, MgNetwork, NetworkError};
