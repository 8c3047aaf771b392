//! Desk-scale laboratory for autonomous power-grid voltage control.
//!
//! The crate bundles an AC power flow solver ([`powerflow`]), an episodic
//! MDP wrapper around it ([`env`]), the violation-penalty reward family
//! ([`reward`]), a minimal dense neural network stack ([`nn`]), soft
//! actor-critic and imitation-learning agents ([`agents`]), synthetic case
//! generation ([`data`]), and solvability/PCA analysis ([`analysis`]).

pub mod agents;
pub mod analysis;
pub mod data;
pub mod env;
pub mod linalg;
pub mod nn;
pub mod powerflow;
pub mod reward;
pub mod seeding;
