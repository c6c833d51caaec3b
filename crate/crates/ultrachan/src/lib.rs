//! Group-averaged quantum channels, Cesàro dynamics, and ultrafilter-limit
//! singular states at desk scale.
//!
//! The crate has two engines behind one toolbox:
//!
//! * a **numeric engine** for finite-dimensional Hilbert spaces: density
//!   matrices and observables ([`operator`]), finitely-additive measures on
//!   finite groups with convolution ([`group`]), and the group-averaged
//!   channels they induce, including Cesàro averaging and convergence
//!   diagnostics ([`channel`]);
//! * a **symbolic engine** for states that have no density matrix: set
//!   algebras with ultrafilter decision oracles ([`sets`]) and formal states
//!   mixing density parts with ultralimit atoms, together with executable
//!   checkers for singularity, σ-additivity, excision, and purity
//!   ([`symbolic`]).
//!
//! The [`scenario`] module loads declarative scenario files, runs named
//! checks against both engines, and emits deterministic JSON/CSV reports.
//! See the `examples/` directory for one runnable walkthrough per major
//! capability, and the `ultrachan` binary for the scenario runner.

pub mod channel;
pub mod group;
pub mod operator;
pub mod scenario;
pub mod sets;
pub mod symbolic;
