//! Progressive recovery laboratory for two-layer interdependent networks.
//!
//! A network is modeled as two constituent layers (a control/function layer
//! and an infrastructure layer) joined by directed dependency arcs. After a
//! massive failure, repair resources arrive in per-step budgets and must be
//! assigned to nonfunctional nodes; the objective is the cumulative utility
//! of functional nodes over the recovery window.
//!
//! The crate provides:
//! - [`netmodel`]: the network data model, structural transforms, and the
//!   topology file format;
//! - [`dynamics`]: recovery semantics (saturation, functionality closure,
//!   plan evaluation, the step/reward environment);
//! - [`solvers`]: the RATIO and RANDOM heuristics, the exact subset-DP
//!   planner (DP-OPT), and an enumeration oracle;
//! - [`neural`]: a small dense value network with backprop and Adam;
//! - [`agent`]: DeepPR, a DQN planner with heuristic-integrated exploration;
//! - [`scenlab`]: scenario generators and the shipped fixtures.

pub mod agent;
pub mod dynamics;
pub mod netmodel;
pub mod neural;
pub mod scenlab;
pub mod solvers;
