//! Classification driver and report formats behind the `asm-galois` binary.

pub mod cli;
pub mod driver;
pub mod report;
