//! Planning engine for dependency-ordered edge-cloud migration modelled as
//! Towers of Hanoi.

pub mod hanoi;
pub mod exact;
pub mod migration;
pub mod graph;
pub mod rl;
pub mod strips;
pub mod plan_io;
pub mod bench;
