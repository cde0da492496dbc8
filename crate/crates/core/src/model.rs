//! End-to-end model assembly: one forward pass from a scene to losses and
//! trajectory samples, plus whole-model parameter registration.

use crate::dynamic_graph_encoder::{encode_dynamic, register_dynamic_graph_encoder, GraphEmbeddings, SurrNeighborhood};
use crate::ehgt::EhgtError;
use crate::fusion::{fuse_final, fuse_lanes, fuse_surrounding, fuse_target, register_fusion};
use crate::params::{Ctx, ParameterStore};
use crate::predictor::{
    cluster_modes, combined_loss_var, decode_modes, graph_decode, register_predictor, trajectory_value,
    wta_loss_var, PredictionSet, PredictorError,
};
use crate::scene_model::Scene;
use crate::sequence_encoders::{
    encode_agent_track, encode_lane_nodes, register_sequence_encoders, AgentRole, EncodeError,
};
use crate::tape::Var;
use thiserror::Error;

#[derive(Debug, Clone, Copy)]
pub struct ModelDims {
    pub d_model: usize,
    pub heads: usize,
    pub ehgt_layers: usize,
    /// decoder sample count k
    pub k: usize,
    /// output mode count K
    pub big_k: usize,
    pub d_z: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            d_model: 64,
            heads: 4,
            ehgt_layers: 1,
            k: 64,
            big_k: 10,
            d_z: 16,
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Ehgt(#[from] EhgtError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
}

pub fn register_model(store: &mut ParameterStore, seed: u64, dims: &ModelDims) {
    register_sequence_encoders(store, seed, dims.d_model);
    register_dynamic_graph_encoder(store, seed, dims.d_model, dims.heads);
    register_fusion(store, seed, dims.d_model);
    register_predictor(store, seed, dims.d_model, dims.d_z, dims.big_k);
}

pub struct ForwardOutput {
    pub samples: Vec<Var>,
    pub aux_modes: Vec<Var>,
    pub l_fr: Var,
    pub l_gr: Var,
    pub l_total: Var,
    pub f_fused: Var,
    pub graph: GraphEmbeddings,
}

/// Build the full differentiable pipeline for one scene.
pub fn forward_scene(
    ctx: &mut Ctx,
    scene: &Scene,
    dims: &ModelDims,
    lambda1: f64,
    lambda2: f64,
    z_seed: u64,
) -> Result<ForwardOutput, ModelError> {
    let d = dims.d_model;

    let h_lane = encode_lane_nodes(ctx, &scene.lane_graph, d)?;
    let target_track = scene.target_track();
    let h_target = encode_agent_track(ctx, target_track, AgentRole::Target, d)?;

    let mut surr_rows = Vec::new();
    for track in &scene.tracks {
        if track.id != scene.target_id {
            surr_rows.push(encode_agent_track(ctx, track, AgentRole::Surrounding, d)?);
        }
    }
    let h_surr = if surr_rows.is_empty() {
        None
    } else {
        Some(ctx.tape.concat_rows(&surr_rows))
    };

    let graph = encode_dynamic(ctx, scene, d, dims.heads, dims.ehgt_layers, SurrNeighborhood::Both)?;
    let g_surr = if graph.g_surr.is_empty() {
        None
    } else {
        let rows: Vec<Var> = graph.g_surr.iter().map(|(_, v)| *v).collect();
        Some(ctx.tape.concat_rows(&rows))
    };

    let sa_interaction = fuse_surrounding(ctx, h_surr, g_surr, dims.heads);
    let h_lanefinal = fuse_lanes(ctx, &h_lane, sa_interaction, &scene.lane_graph, dims.heads);
    let ta_interaction = fuse_target(ctx, h_target, &graph.g_target_steps, dims.heads);
    let f_fused = fuse_final(ctx, ta_interaction, &h_lanefinal, dims.heads);

    let origin = {
        let s = target_track.current();
        (s.x, s.y)
    };
    let samples = decode_modes(ctx, f_fused, dims.k, dims.big_k, dims.d_z, z_seed, origin)?;
    let aux_modes = graph_decode(ctx, graph.g_target, dims.big_k, origin);

    let l_fr = wta_loss_var(ctx, &samples, &scene.future);
    let l_gr = wta_loss_var(ctx, &aux_modes, &scene.future);
    let l_total = combined_loss_var(ctx, l_fr, l_gr, lambda1, lambda2);

    Ok(ForwardOutput {
        samples,
        aux_modes,
        l_fr,
        l_gr,
        l_total,
        f_fused,
        graph,
    })
}

/// Inference: forward pass, then cluster the k samples into K scored modes.
pub fn predict_scene(
    store: &ParameterStore,
    scene: &Scene,
    dims: &ModelDims,
    z_seed: u64,
    cluster_seed: u64,
) -> Result<PredictionSet, ModelError> {
    let mut ctx = Ctx::new(store);
    let out = forward_scene(&mut ctx, scene, dims, 1.0, 0.5, z_seed)?;
    let sample_trajs: Vec<_> = out.samples.iter().map(|&v| trajectory_value(&ctx, v)).collect();
    let (modes, scores) = cluster_modes(&sample_trajs, dims.big_k, cluster_seed)?;
    let aux_modes = out.aux_modes.iter().map(|&v| trajectory_value(&ctx, v)).collect();
    Ok(PredictionSet {
        modes,
        scores,
        aux_modes,
    })
}
