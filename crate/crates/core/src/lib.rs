pub mod error;
pub mod lattice;
pub mod metrics;
pub mod multiphoton;
pub mod photonics;
pub mod spectral;
pub mod wavepacket;

pub use error::{Error, Result};
