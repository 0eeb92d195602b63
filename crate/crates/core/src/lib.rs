//! Grounding audits: measures how well a symbol-processing architecture links
//! symbols to meanings.

pub mod architecture;
pub mod audit;
pub mod gridworld;
pub mod modulus;
pub mod rng;
pub mod semantics;
pub mod symbolic;
pub mod typology;
