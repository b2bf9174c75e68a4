//! Adaptive safety-critical control with high-order tuners.
//!
//! Control-affine plants are filtered through adaptive, robust adaptive and
//! tunable robust adaptive control barrier function constraints; manipulators
//! run a Slotine-Li controller whose reference velocity is itself safety
//! filtered. The [`certify`] module checks the sufficient conditions before a
//! run and the invariance certificates along it.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod barriers;
pub mod certify;
pub mod controllers;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod plants;
pub mod scenario;
pub mod sim;
pub mod tuners;
pub mod types;

pub use error::{Error, Result};
