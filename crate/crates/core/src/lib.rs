//! Exact analysis of Galois lines for the Artin-Schreier-Mumford space curve.

pub mod aut;
pub mod curve;
pub mod field;
pub mod galois;
pub mod geom;
pub mod linalg;
pub mod poly;
pub mod series;
pub mod tower;
