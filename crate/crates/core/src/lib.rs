pub mod ao;
pub mod beamforming;
pub mod channel;
pub mod config;
pub mod convex;
pub mod covertness;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod positions;
pub mod seed;

pub use error::{Error, Result};
