//! Shapes of Nelson-Siegel, Bliss and Svensson term structures.
//!
//! The crate classifies forward and yield curves by the sign pattern of their
//! slope, segments the reduced parameter plane with the envelope of extremum
//! lines, and computes shape probabilities under the consistent (arbitrage-free)
//! evolution of the Svensson family.

pub mod consistent_dynamics;
pub mod data_ingest;
pub mod envelope_geometry;
pub mod error;
pub mod expoly;
pub mod numerics;
pub mod segmentation;
pub mod shape;
pub mod shape_oracle;
pub mod term_structure;

pub use error::{Error, Result};
