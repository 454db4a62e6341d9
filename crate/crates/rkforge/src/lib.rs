//! Sequential preparation of kagome dimer Rokhsar-Kivelson states.
//!
//! The crate models dimer coverings of kagome cylinders and tori as
//! occupation bitmasks over bonds, builds the uniform-superposition state by
//! layered blockade gates, and checks it against brute-force enumeration and
//! an exact matrix-product representation. String-operator probes and
//! Hamiltonian-level pulse checks round it out.
//!
//! Module map:
//! - [`lattice`]: YC/XC geometry and bond indexing.
//! - [`coverings`]: cover validation, enumeration, string operators, sectors.
//! - [`strips`]: `(L, R, u)` strip labels with encode and decode.
//! - [`mps`]: strip tensors, amplitudes, entropy, branching diagrams.
//! - [`simstate`]: sparse statevector over blockade-valid masks.
//! - [`gates`]: logical gate set and digital decompositions.
//! - [`protocols`]: growth, seeding and gluing schedules.
//! - [`probes`]: Z/X strings, basis rotation, anyons, interferometry.
//! - [`pulses`]: time-dependent integration of gate realizations.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod coverings;
pub mod error;
pub mod gates;
pub mod lattice;
pub mod mask;
pub mod mps;
pub mod probes;
pub mod protocols;
pub mod pulses;
pub mod simstate;
pub mod strips;

pub use error::{Result, RkError};
pub use lattice::{build_lattice, BondId, Closure, Lattice, LatticeSpec, Orientation};
pub use mask::Mask;
