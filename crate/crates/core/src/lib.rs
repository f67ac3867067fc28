//! Numerical laboratory for C⁰-rigidity of disk pseudo-rotations.

pub mod analysis_checks;
pub mod cli;
pub mod diophantine;
pub mod floer_solver;
pub mod hamiltonian_disk;
pub mod rigidity_lab;
