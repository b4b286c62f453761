//! Synthetic analog-placement datasets, prompt rendering, output extraction
//! and layout scoring.

pub mod baseline;
pub mod error;
pub mod extract;
pub mod geometry;
pub mod layoutgen;
pub mod metrics;
pub mod modelclient;
pub mod netlist;
pub mod promptio;
pub mod render;
pub mod rng;
pub mod toys;

pub use error::{Error, Result};
pub use extract::PlacedTransistor;
pub use geometry::PlacedRect;
pub use layoutgen::{LayoutSample, TransistorSpec};
