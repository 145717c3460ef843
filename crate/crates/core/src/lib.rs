//! Pairs of commuting isometries: defect operators, BCL multiplier models,
//! explicit unitary equivalences and Koszul-complex spectra.

pub mod bcl;
pub mod cli;
pub mod defect;
pub mod error;
pub mod io;
pub mod koszul;
pub mod linops;
pub mod models;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
