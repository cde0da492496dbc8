//! Lane-node and agent-track sequence encoders: a per-element feed-forward
//! map followed by a GRU; the final hidden state is the embedding.

use crate::params::{gru_step, mlp2, register_gru, register_mlp2, Ctx, ParameterStore};
use crate::scene_model::{AgentTrack, LaneGraph};
use crate::tape::Var;
use ndarray::Array2;
use thiserror::Error;

pub const FEATURE_WIDTH: usize = 5;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("non-finite input feature in {0}")]
    NonFinite(String),
    #[error("track {0} has no present frames")]
    EmptyTrack(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRole {
    Target,
    Surrounding,
}

impl AgentRole {
    fn path(self) -> &'static str {
        match self {
            AgentRole::Target => "enc.target",
            AgentRole::Surrounding => "enc.surr",
        }
    }
}

pub fn register_sequence_encoders(store: &mut ParameterStore, seed: u64, d_model: usize) {
    for role in ["enc.lane", "enc.target", "enc.surr"] {
        register_mlp2(store, seed, &format!("{role}.mlp"), FEATURE_WIDTH, d_model, d_model);
        register_gru(store, seed, &format!("{role}.gru"), d_model, d_model);
    }
}

/// MLP + GRU over a sequence of feature rows; returns the final hidden state.
pub fn encode_feature_sequence(ctx: &mut Ctx, rows: &[[f64; FEATURE_WIDTH]], d_model: usize, path: &str) -> Var {
    let mut h = ctx.tape.zeros(1, d_model);
    for row in rows {
        let x = ctx.input(Array2::from_shape_vec((1, FEATURE_WIDTH), row.to_vec()).unwrap());
        let x = mlp2(ctx, x, &format!("{path}.mlp"));
        h = gru_step(ctx, x, h, &format!("{path}.gru"));
    }
    h
}

/// Embed every lane node over its valid pose prefix. Padding beyond the
/// valid prefix never enters the recurrence.
pub fn encode_lane_nodes(
    ctx: &mut Ctx,
    lane_graph: &LaneGraph,
    d_model: usize,
) -> Result<Vec<(String, Var)>, EncodeError> {
    let mut out = Vec::with_capacity(lane_graph.nodes.len());
    for node in &lane_graph.nodes {
        let rows: Vec<[f64; FEATURE_WIDTH]> = node.poses.iter().map(|p| p.features()).collect();
        if rows.iter().flatten().any(|f| !f.is_finite()) {
            return Err(EncodeError::NonFinite(format!("lane node {}", node.id)));
        }
        let h = encode_feature_sequence(ctx, &rows, d_model, "enc.lane");
        out.push((node.id.clone(), h));
    }
    Ok(out)
}

/// Embed one agent track over its present frames, oldest first.
pub fn encode_agent_track(
    ctx: &mut Ctx,
    track: &AgentTrack,
    role: AgentRole,
    d_model: usize,
) -> Result<Var, EncodeError> {
    let rows: Vec<[f64; FEATURE_WIDTH]> = track
        .states
        .iter()
        .filter(|s| s.present)
        .map(|s| s.features())
        .collect();
    if rows.is_empty() {
        return Err(EncodeError::EmptyTrack(track.id.clone()));
    }
    if rows.iter().flatten().any(|f| !f.is_finite()) {
        return Err(EncodeError::NonFinite(format!("track {}", track.id)));
    }
    Ok(encode_feature_sequence(ctx, &rows, d_model, role.path()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{gru_seq, Ctx};
    use crate::scene_model::{AgentState, AgentType, LaneNode, LanePose, T_OBS};

    const D: usize = 8;

    fn store() -> ParameterStore {
        let mut s = ParameterStore::new();
        register_sequence_encoders(&mut s, 123, D);
        s
    }

    fn track_with_presence(present: &[bool]) -> AgentTrack {
        AgentTrack {
            id: "t".into(),
            agent_type: AgentType::Vehicle,
            states: present
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    if p {
                        AgentState { x: i as f64, y: -(i as f64), vel: 3.0, acc: 0.1, yaw_rate: 0.0, present: true }
                    } else {
                        AgentState::absent()
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn single_present_frame_equals_one_gru_step() {
        let s = store();
        let mut ctx = Ctx::new(&s);
        let track = track_with_presence(&[false, false, false, false, true]);
        let h = encode_agent_track(&mut ctx, &track, AgentRole::Target, D).unwrap();

        let mut ctx2 = Ctx::new(&s);
        let x = ctx2.input(Array2::from_shape_vec((1, 5), track.states[T_OBS - 1].features().to_vec()).unwrap());
        let x = mlp2(&mut ctx2, x, "enc.target.mlp");
        let expect = gru_seq(&mut ctx2, &[x], D, "enc.target.gru");
        assert_eq!(ctx.tape.value(h), ctx2.tape.value(expect));
    }

    #[test]
    fn padding_does_not_leak_into_lane_embedding() {
        let s = store();
        let poses: Vec<LanePose> = (0..4).map(|i| LanePose::new(2.0 * i as f64, 0.0, 0.0)).collect();
        let node_a = LaneNode { id: "a".into(), poses: poses.clone() };
        // identical valid poses, different (conceptual) padding: same prefix
        let node_b = LaneNode { id: "b".into(), poses };
        let g = LaneGraph { nodes: vec![node_a, node_b], edges: vec![] };
        let mut ctx = Ctx::new(&s);
        let out = encode_lane_nodes(&mut ctx, &g, D).unwrap();
        assert_eq!(ctx.tape.value(out[0].1), ctx.tape.value(out[1].1));
    }

    #[test]
    fn target_and_surrounding_roles_use_distinct_parameters() {
        let s = store();
        let track = track_with_presence(&[true; 5]);
        let mut ctx = Ctx::new(&s);
        let ht = encode_agent_track(&mut ctx, &track, AgentRole::Target, D).unwrap();
        let hs = encode_agent_track(&mut ctx, &track, AgentRole::Surrounding, D).unwrap();
        assert_ne!(ctx.tape.value(ht), ctx.tape.value(hs));
    }

    #[test]
    fn encoding_is_deterministic() {
        let s = store();
        let track = track_with_presence(&[false, true, true, true, true]);
        let render = || {
            let mut ctx = Ctx::new(&s);
            let h = encode_agent_track(&mut ctx, &track, AgentRole::Target, D).unwrap();
            ctx.tape.value(h).clone()
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn zero_present_frames_is_an_error() {
        let s = store();
        let mut track = track_with_presence(&[true; 5]);
        for st in &mut track.states {
            *st = AgentState::absent();
        }
        let mut ctx = Ctx::new(&s);
        assert!(matches!(
            encode_agent_track(&mut ctx, &track, AgentRole::Target, D),
            Err(EncodeError::EmptyTrack(_))
        ));
    }

    #[test]
    fn non_finite_feature_is_an_error_naming_the_node() {
        let s = store();
        let node = LaneNode {
            id: "bad".into(),
            poses: vec![LanePose::new(f64::NAN, 0.0, 0.0)],
        };
        let g = LaneGraph { nodes: vec![node], edges: vec![] };
        let mut ctx = Ctx::new(&s);
        match encode_lane_nodes(&mut ctx, &g, D) {
            Err(EncodeError::NonFinite(msg)) => assert!(msg.contains("bad")),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
