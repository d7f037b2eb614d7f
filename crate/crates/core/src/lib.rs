//! Symbolic integro-differential operators, boundary problems and Green's operators.

pub mod boundary;
pub mod charext;
pub mod coeffalg;
pub mod confluence;
pub mod error;
pub mod intdiffop;
pub mod intdiffpoly;
pub mod ncreduce;

pub use error::{Error, Result};
