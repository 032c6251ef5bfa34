//! Brownian snakes, the continuum CVS mapping to the Brownian sphere, and its
//! inverse, at desk scale.

pub mod battery;
pub mod cvs;
pub mod error;
pub mod inverse;
pub mod mating;
pub mod quadvar;
pub mod rng;
pub mod roundtrip;
pub mod rtree;
pub mod snake;
pub mod stats;

pub use error::{Error, Result};
