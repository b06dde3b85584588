//! Joint task offloading, IRS phase shift and BS resource allocation for
//! vehicular edge computing, solved as a Stackelberg game with a
//! diffusion-based leader search.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod diffusion;
pub mod compute;
pub mod error;
pub mod game;
pub mod model;
pub mod nn;
pub mod scenario;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{Instance, SlotInstance, SystemParams};
