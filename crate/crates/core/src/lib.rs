//! Semantic trajectory mining for coordinate-free wireless station data.
//!
//! The pipeline turns raw (beacon, entry, exit) observations into per-consumer
//! journeys, offline rest locations, home/work labels, journey-pattern strings
//! and clustering features, then clusters consumers with DBSCAN over a
//! pattern-aware composite distance. A seeded synthetic commuter generator
//! stands in for production data.

pub mod cluster;
pub mod domain;
pub mod error;
pub mod features;
pub mod metric;
pub mod preprocess;
pub mod profile;
pub mod reduce;
pub mod routesim;
pub mod semantics;
pub mod synth;

pub use error::Error;
