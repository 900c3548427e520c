//! Truncated-Fock-space laboratory for rotating-wave spin–boson models.
//!
//! The crate builds discretized boson fields ([`modegrid`], [`fock`],
//! [`fieldops`]), assembles the two-level model and its generalizations
//! ([`sbmodel`], [`gsbmodel`], [`multiatom`]), and studies ultraviolet
//! renormalization along sharp cutoff families ([`renorm`]). Config-driven
//! batch runs live in [`experiments`].

pub mod error;
pub mod experiments;
pub mod fieldops;
pub mod fit;
pub mod fock;
pub mod gsbmodel;
pub mod linalg;
pub mod modegrid;
pub mod multiatom;
pub mod renorm;
pub mod sbmodel;

pub use error::{Error, Result};
pub use linalg::C64;
