//! Hand-built scenes for tests.

use crate::scene_model::*;

/// Smallest valid scene: one straight lane segment, one target vehicle
/// driving along it, empty interaction graphs, a constant-velocity future.
pub fn minimal_scene() -> Scene {
    let poses: Vec<LanePose> = (0..N_POSE)
        .map(|i| LanePose::new(i as f64 * 1.5 - 6.0, 0.0, 0.0))
        .collect();
    let lane_graph = LaneGraph {
        nodes: vec![LaneNode {
            id: "lane0".into(),
            poses,
        }],
        edges: Vec::new(),
    };
    let states: Vec<AgentState> = (0..T_OBS)
        .map(|i| AgentState {
            x: (i as f64 - (T_OBS - 1) as f64) * 2.0,
            y: 0.0,
            vel: 4.0,
            acc: 0.0,
            yaw_rate: 0.0,
            present: true,
        })
        .collect();
    let tracks = vec![AgentTrack {
        id: "target".into(),
        agent_type: AgentType::Vehicle,
        states,
    }];
    let interaction_graphs: Vec<InteractionGraph> = (-(T_OBS as i32 - 1)..=0)
        .map(|f| InteractionGraph {
            frame_index: f,
            agent_ids: vec![("target".to_string(), AgentType::Vehicle)],
            edges: Vec::new(),
        })
        .collect();
    let future: Vec<(f64, f64)> = (1..=T_FUTURE).map(|i| (i as f64 * 2.0, 0.0)).collect();
    Scene {
        schema: SCENE_SCHEMA.to_string(),
        scene_id: "fixture-minimal".into(),
        lane_graph,
        tracks,
        interaction_graphs,
        target_id: "target".into(),
        future,
    }
}
