//! Shared fixtures for the criterion benches: canned streams and
//! pre-loaded engines, kept out of the timed sections.

use soda_citron::sim::{default_sensors, gen_scenario_a, simulate};
use soda_citron::{Detection, Engine, EngineMode};

/// A full scenario-A detection stream (~1.8k detections).
pub fn scenario_a_stream(seed: u64) -> Vec<Detection> {
    let truth = gen_scenario_a(seed);
    simulate(&truth, &default_sensors(), seed).expect("default sensors are valid")
}

/// An engine that has consumed `detections` without reclustering.
pub fn loaded_engine(detections: &[Detection]) -> Engine {
    let mut engine = Engine::with_defaults(EngineMode::SodaCitron);
    for det in detections {
        engine.update(&det.measurement()).expect("simulated detections are valid");
    }
    engine
}
