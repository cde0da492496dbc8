//! Edge-enhanced heterogeneous graph transformer layer.
//!
//! A single message-passing layer over typed agent nodes and typed,
//! attribute-bearing edges. Per head, the attention score for an edge
//! (s, e, t) is K(s) . W_ATT . diag(1 + P_attr . a_e) . Q(t)^T scaled by the
//! meta-relation prior mu and 1/sqrt(d_h); messages are M(s) scaled by the
//! same attribute diagonal and W_MSG. Attention is a per-head softmax over
//! the in-neighborhood; aggregation is the attention-weighted message sum,
//! followed by a type-specific output map with a residual connection.

use crate::params::{linear, register_linear, xavier, path_rng, Ctx, ParameterStore};
use crate::scene_model::{AgentType, InteractionEdge, RelationType, ALL_RELATIONS};
use crate::tape::Var;
use ndarray::Array2;
use thiserror::Error;

pub const NODE_TYPES: [AgentType; 2] = [AgentType::Vehicle, AgentType::Human];

/// Distance normalization for edge attributes (meters).
pub const ATTR_DISTANCE_SCALE: f64 = 50.0;

#[derive(Debug, Error)]
pub enum EhgtError {
    #[error("edge {src}->{dst} references a node missing from the node set")]
    DanglingEndpoint { src: String, dst: String },
}

pub fn type_name(ty: AgentType) -> &'static str {
    match ty {
        AgentType::Vehicle => "vehicle",
        AgentType::Human => "human",
    }
}

pub fn relation_name(r: RelationType) -> &'static str {
    match r {
        RelationType::Longitudinal => "longitudinal",
        RelationType::Lateral => "lateral",
        RelationType::Intersecting => "intersecting",
        RelationType::Pedestrian => "pedestrian",
    }
}

/// Register all EHGT parameters. The attribute projections start at zero so
/// the layer is exactly attribute-free HGT at initialization; mu starts at 1.
pub fn register_ehgt(store: &mut ParameterStore, seed: u64, d_model: usize, heads: usize) {
    assert_eq!(d_model % heads, 0, "d_model must be divisible by heads");
    let d_h = d_model / heads;
    for ty in NODE_TYPES {
        let t = type_name(ty);
        for proj in ["q", "k", "m", "a"] {
            register_linear(store, seed, &format!("ehgt.{proj}.{t}"), d_model, d_model);
        }
    }
    for rel in ALL_RELATIONS {
        let r = relation_name(rel);
        for i in 0..heads {
            let att = format!("ehgt.att.{r}.h{i}");
            let mut rng = path_rng(seed, &att);
            store.insert(&att, xavier(&mut rng, d_h, d_h));
            let msg = format!("ehgt.msg.{r}.h{i}");
            let mut rng = path_rng(seed, &msg);
            store.insert(&msg, xavier(&mut rng, d_h, d_h));
            store.insert(&format!("ehgt.attr.{r}.h{i}"), Array2::zeros((3, d_h)));
        }
    }
    for st in NODE_TYPES {
        for rel in ALL_RELATIONS {
            for tt in NODE_TYPES {
                store.insert(
                    &format!("ehgt.mu.{}.{}.{}", type_name(st), relation_name(rel), type_name(tt)),
                    Array2::from_elem((1, 1), 1.0),
                );
            }
        }
    }
}

/// Standardized attribute vector [distance, path_distance, edge_probability].
pub fn standardized_attributes(edge: &InteractionEdge) -> [f64; 3] {
    let a = edge.attributes();
    [a[0] / ATTR_DISTANCE_SCALE, a[1] / ATTR_DISTANCE_SCALE, a[2]]
}

/// Diagonal of the edge attribute matrix for one head:
/// 1 + P_attr_phi(e),head . a_e, as a 1 x d_h row.
pub fn edge_attr_diag(ctx: &mut Ctx, edge: &InteractionEdge, head: usize, d_h: usize) -> Var {
    let a = standardized_attributes(edge);
    let a_var = ctx.input(Array2::from_shape_vec((1, 3), a.to_vec()).unwrap());
    let p = ctx.param(&format!("ehgt.attr.{}.h{head}", relation_name(edge.relation)));
    let proj = ctx.tape.matmul(a_var, p);
    let ones = ctx.input(Array2::from_elem((1, d_h), 1.0));
    ctx.tape.add(ones, proj)
}

/// One typed node with its current embedding.
#[derive(Clone)]
pub struct TypedNode {
    pub id: String,
    pub ty: AgentType,
    pub h: Var,
}

/// Per-target attention trace, for invariant checks.
pub struct AttentionTrace {
    pub target_id: String,
    pub source_ids: Vec<String>,
    /// one 1 x |N(t)| weight row per head
    pub weights: Vec<Var>,
}

pub struct LayerOutput {
    pub nodes: Vec<TypedNode>,
    pub traces: Vec<AttentionTrace>,
}

/// Apply one EHGT layer. Only nodes in `target_ids` with a non-empty
/// in-neighborhood are updated; everything else passes through unchanged.
pub fn ehgt_layer(
    ctx: &mut Ctx,
    nodes: &[TypedNode],
    edges: &[InteractionEdge],
    heads: usize,
    d_model: usize,
    target_ids: &[String],
) -> Result<LayerOutput, EhgtError> {
    let d_h = d_model / heads;
    let index_of = |id: &str| nodes.iter().position(|n| n.id == id);
    for e in edges {
        if index_of(&e.src_id).is_none() || index_of(&e.dst_id).is_none() {
            return Err(EhgtError::DanglingEndpoint {
                src: e.src_id.clone(),
                dst: e.dst_id.clone(),
            });
        }
    }

    // type-specific K and M projections, computed once per source node
    let mut k_proj: Vec<Option<Var>> = vec![None; nodes.len()];
    let mut m_proj: Vec<Option<Var>> = vec![None; nodes.len()];
    let mut source_proj = |ctx: &mut Ctx, idx: usize| {
        if k_proj[idx].is_none() {
            let t = type_name(nodes[idx].ty);
            k_proj[idx] = Some(linear(ctx, nodes[idx].h, &format!("ehgt.k.{t}")));
            m_proj[idx] = Some(linear(ctx, nodes[idx].h, &format!("ehgt.m.{t}")));
        }
        (k_proj[idx].unwrap(), m_proj[idx].unwrap())
    };

    let mut out_nodes = nodes.to_vec();
    let mut traces = Vec::new();

    for target in target_ids {
        let t_idx = index_of(target).expect("target_ids must reference nodes");
        let in_edges: Vec<&InteractionEdge> = edges.iter().filter(|e| &e.dst_id == target).collect();
        if in_edges.is_empty() {
            continue; // pass-through
        }
        let t_ty = type_name(nodes[t_idx].ty);
        let q_full = linear(ctx, nodes[t_idx].h, &format!("ehgt.q.{t_ty}"));

        // per edge and head: score scalars and message rows
        let mut head_scores: Vec<Vec<Var>> = vec![Vec::new(); heads];
        let mut head_msgs: Vec<Vec<Var>> = vec![Vec::new(); heads];
        for e in &in_edges {
            let s_idx = index_of(&e.src_id).unwrap();
            let (k_full, m_full) = source_proj(ctx, s_idx);
            let s_ty = type_name(nodes[s_idx].ty);
            let mu = ctx.param(&format!(
                "ehgt.mu.{}.{}.{}",
                s_ty,
                relation_name(e.relation),
                t_ty
            ));
            let r = relation_name(e.relation);
            for i in 0..heads {
                let ki = ctx.tape.slice_cols(k_full, i * d_h, d_h);
                let mi = ctx.tape.slice_cols(m_full, i * d_h, d_h);
                let qi = ctx.tape.slice_cols(q_full, i * d_h, d_h);
                let w_att = ctx.param(&format!("ehgt.att.{r}.h{i}"));
                let w_msg = ctx.param(&format!("ehgt.msg.{r}.h{i}"));
                let diag = edge_attr_diag(ctx, e, i, d_h);

                let kw = ctx.tape.matmul(ki, w_att);
                let kwd = ctx.tape.mul(kw, diag);
                let qit = ctx.tape.transpose(qi);
                let raw = ctx.tape.matmul(kwd, qit);
                let scaled = ctx.tape.scalar_mul(mu, raw);
                let score = ctx.tape.scale(scaled, 1.0 / (d_h as f64).sqrt());
                head_scores[i].push(score);

                let md = ctx.tape.mul(mi, diag);
                head_msgs[i].push(ctx.tape.matmul(md, w_msg));
            }
        }

        // per-head softmax over the in-neighborhood, then weighted sum
        let mut head_out = Vec::with_capacity(heads);
        let mut weight_rows = Vec::with_capacity(heads);
        for i in 0..heads {
            let score_row = ctx.tape.concat_cols(&head_scores[i]);
            let weights = ctx.tape.softmax_rows(score_row);
            let mut agg: Option<Var> = None;
            for (j, &msg) in head_msgs[i].iter().enumerate() {
                let w = ctx.tape.slice_cols(weights, j, 1);
                let contrib = ctx.tape.scalar_mul(w, msg);
                agg = Some(match agg {
                    Some(a) => ctx.tape.add(a, contrib),
                    None => contrib,
                });
            }
            head_out.push(agg.unwrap());
            weight_rows.push(weights);
        }
        let h_tilde = ctx.tape.concat_cols(&head_out);
        let act = ctx.tape.gelu(h_tilde);
        let mapped = linear(ctx, act, &format!("ehgt.a.{t_ty}"));
        out_nodes[t_idx].h = ctx.tape.add(mapped, nodes[t_idx].h);

        traces.push(AttentionTrace {
            target_id: target.clone(),
            source_ids: in_edges.iter().map(|e| e.src_id.clone()).collect(),
            weights: weight_rows,
        });
    }

    Ok(LayerOutput {
        nodes: out_nodes,
        traces,
    })
}
