pub mod analyze_sim;
pub mod bench;
pub mod eval;
pub mod grid;
pub mod index;
pub mod online;
pub mod translate;
