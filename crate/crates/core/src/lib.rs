//! Trajectory prediction on heterogeneous traffic scenes: scene format,
//! synthetic scenario generation, graph/sequence encoders, fusion, a
//! multimodal decoder, and a deterministic training harness.

pub mod dynamic_graph_encoder;
pub mod ehgt;
pub mod fusion;
pub mod harness;
pub mod model;
pub mod params;
pub mod plot;
pub mod predictor;
pub mod scenario_synth;
pub mod scene_model;
pub mod sequence_encoders;
pub mod tape;
pub mod test_fixtures;
