//! Online data association and position fusion for static objects
//! observed by heterogeneous sensors.
//!
//! Detections arrive one at a time as `(position, covariance, confidence)`
//! triples. The [`engine::Engine`] clusters them into potential objects
//! with confidence-derived weights, fuses co-observed clusters through an
//! additive information filter, and reports confirmed objects on demand.
//! The [`sim`] module generates Monte Carlo scenarios with heterogeneous
//! sensor models and clutter; [`eval`] scores results (detection/position
//! metrics, multi-object tracking metrics, paired significance tests).

pub mod engine;
pub mod error;
pub mod eval;
pub mod infofilter;
pub mod math;
pub mod rng;
pub mod sim;
pub mod spatial;
pub mod stream;
pub mod types;

pub use engine::{confidence_weight, Engine, EngineMode, EngineSnapshot, SurvivorPolicy};
pub use error::{Error, Result};
pub use math::{Mat2, Vec2};
pub use types::{
    Detection, EngineParams, EstimatedObject, Measurement, ObjectId, PotentialObject,
    SharedDensityTable, Truth,
};
