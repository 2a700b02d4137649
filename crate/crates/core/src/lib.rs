#![no_std]
#![allow(clippy::needless_range_loop)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod averaging;
pub mod crossed;
pub mod error;
pub mod group;
pub mod linalg;
pub mod powers;
pub mod rep;
pub mod structure;
pub mod twist;

pub use error::{Error, Result};
