//! Kinetically constrained spin models on finite graphs: constrained
//! heat-bath dynamics, the bootstrap map, and exact finite-volume spectra.

pub mod bootstrap;
pub mod dynamics;
pub mod error;
pub mod gibbs;
pub mod models;
pub mod rng;
pub mod spectra;
pub mod suite;
pub mod topology;

pub use error::{Error, Result};
pub use models::{ModelSpec, SiteMeasure, SpinConfig};
pub use topology::{Graph, Rectangle, RootedTree};
