//! Branch-and-price for nurse rostering with multiple units.

pub mod dfa;
pub mod graph;
pub mod instance;
pub mod labeling;
pub mod oracle;
pub mod scalar;
pub mod lp;
pub mod colgen;
pub mod bnp;
pub mod benchmark;
