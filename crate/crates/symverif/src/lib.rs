//! Verification and precondition synthesis for group-theoretic symmetry
//! properties of imperative programs.

pub mod expr;
pub mod group;
pub mod lang;
pub mod logic;
pub mod smt;
pub mod synth;
pub mod cli;
