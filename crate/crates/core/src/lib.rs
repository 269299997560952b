//! Spherical discrepancy by multiplicative weights, with the geometric
//! constructions built on top of it: certified covering lower bounds, packing
//! generation, a spherical Komlós solver and the NAE-3-SAT gadget reduction.

pub mod cli;
pub mod covering;
pub mod geometry;
pub mod hardness;
pub mod io;
pub mod komlos;
pub mod linalg;
pub mod packing;
pub mod solver;
pub mod sweep;
