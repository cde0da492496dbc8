//! Per-frame typed agent encoding + EHGT, then a temporal GRU over the
//! target node's five per-frame embeddings.

use crate::ehgt::{ehgt_layer, register_ehgt, type_name, EhgtError, TypedNode};
use crate::params::{mlp2, gru_step, register_gru, register_mlp2, Ctx, ParameterStore};
use crate::scene_model::{AgentType, InteractionGraph, Scene, T_OBS};
use crate::sequence_encoders::FEATURE_WIDTH;
use crate::tape::Var;
use ndarray::Array2;

/// Cap on retained surrounding-agent embeddings.
pub const M_SURR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrNeighborhood {
    /// union of in- and out-neighbors of the target at t=0 (default)
    Both,
    OutOnly,
}

pub struct GraphEmbeddings {
    /// temporal recurrence over the 5 per-frame target embeddings
    pub g_target: Var,
    /// one-hop neighbors of the target at t=0, nearest first, capped at M_SURR
    pub g_surr: Vec<(String, Var)>,
    /// the 5 per-frame target embeddings, oldest first
    pub g_target_steps: Vec<Var>,
}

pub fn register_dynamic_graph_encoder(store: &mut ParameterStore, seed: u64, d_model: usize, heads: usize) {
    for ty in ["vehicle", "human"] {
        register_mlp2(store, seed, &format!("type_enc.{ty}"), FEATURE_WIDTH, d_model, d_model);
    }
    register_ehgt(store, seed, d_model, heads);
    register_gru(store, seed, "temporal.gru", d_model, d_model);
}

/// Encode one frame: per-type feed-forward encoding of the frame's agent
/// states, then one EHGT pass with every agent as an update target.
pub fn encode_frame(
    ctx: &mut Ctx,
    graph: &InteractionGraph,
    scene: &Scene,
    d_model: usize,
    heads: usize,
    ehgt_layers: usize,
) -> Result<Vec<TypedNode>, EhgtError> {
    let frame = (graph.frame_index + (T_OBS as i32 - 1)) as usize;
    let mut nodes: Vec<TypedNode> = Vec::with_capacity(graph.agent_ids.len());
    for (id, ty) in &graph.agent_ids {
        let state = &scene.track(id).expect("validated scene").states[frame];
        let x = ctx.input(Array2::from_shape_vec((1, FEATURE_WIDTH), state.features().to_vec()).unwrap());
        let h = mlp2(ctx, x, &format!("type_enc.{}", type_name(*ty)));
        nodes.push(TypedNode { id: id.clone(), ty: *ty, h });
    }
    let all_ids: Vec<String> = nodes.iter().map(|n| n.id.clone()).collect();
    for _ in 0..ehgt_layers {
        nodes = ehgt_layer(ctx, &nodes, &graph.edges, heads, d_model, &all_ids)?.nodes;
    }
    Ok(nodes)
}

/// Encode all five observed frames and the temporal recurrence over the
/// target's per-frame embeddings.
pub fn encode_dynamic(
    ctx: &mut Ctx,
    scene: &Scene,
    d_model: usize,
    heads: usize,
    ehgt_layers: usize,
    neighborhood: SurrNeighborhood,
) -> Result<GraphEmbeddings, EhgtError> {
    let mut g_target_steps = Vec::with_capacity(T_OBS);
    let mut last_frame_nodes: Vec<TypedNode> = Vec::new();
    for (f, graph) in scene.interaction_graphs.iter().enumerate() {
        // the target is always a node, even when absent from the graph's list
        let mut graph = graph.clone();
        if !graph.agent_ids.iter().any(|(id, _)| id == &scene.target_id) {
            graph.agent_ids.push((scene.target_id.clone(), AgentType::Vehicle));
        }
        let nodes = encode_frame(ctx, &graph, scene, d_model, heads, ehgt_layers)?;
        let target = nodes
            .iter()
            .find(|n| n.id == scene.target_id)
            .expect("target is in the node set");
        g_target_steps.push(target.h);
        if f == T_OBS - 1 {
            last_frame_nodes = nodes;
        }
    }

    let mut h = ctx.tape.zeros(1, d_model);
    for &step in &g_target_steps {
        h = gru_step(ctx, step, h, "temporal.gru");
    }

    // one-hop neighbors of the target at t=0, nearest first
    let t0 = scene.interaction_graphs.last().expect("validated scene");
    let mut neighbor_ids: Vec<String> = Vec::new();
    for e in &t0.edges {
        let candidate = if e.src_id == scene.target_id {
            Some(&e.dst_id)
        } else if e.dst_id == scene.target_id && neighborhood == SurrNeighborhood::Both {
            Some(&e.src_id)
        } else {
            None
        };
        if let Some(id) = candidate {
            if !neighbor_ids.contains(id) {
                neighbor_ids.push(id.clone());
            }
        }
    }
    let tpos = {
        let s = scene.target_track().current();
        (s.x, s.y)
    };
    neighbor_ids.sort_by(|a, b| {
        let d = |id: &str| {
            let s = scene.track(id).unwrap().current();
            (s.x - tpos.0).powi(2) + (s.y - tpos.1).powi(2)
        };
        d(a).partial_cmp(&d(b)).unwrap().then_with(|| a.cmp(b))
    });
    neighbor_ids.truncate(M_SURR);

    let g_surr = neighbor_ids
        .into_iter()
        .map(|id| {
            let node = last_frame_nodes.iter().find(|n| n.id == id).expect("edge endpoint");
            (id, node.h)
        })
        .collect();

    Ok(GraphEmbeddings {
        g_target: h,
        g_surr,
        g_target_steps,
    })
}
