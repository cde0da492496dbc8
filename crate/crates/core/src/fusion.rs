//! Information fusion: four cross-attention sub-modules combining the
//! track encodings with the dynamic graph embeddings and lane structure.

use crate::params::{cross_attention, linear, register_cross_attention, register_linear, Ctx, ParameterStore};
use crate::scene_model::{LaneEdgeType, LaneGraph};
use crate::tape::Var;

/// Rounds of relational lane message passing in sub-module 2.
pub const LANE_MP_ROUNDS: usize = 2;

pub fn register_fusion(store: &mut ParameterStore, seed: u64, d_model: usize) {
    for sub in ["sub1", "sub2", "sub3", "sub4"] {
        register_cross_attention(store, seed, &format!("fusion.{sub}.att"), d_model);
    }
    for round in 0..LANE_MP_ROUNDS {
        for et in ["successor", "proximal"] {
            register_linear(store, seed, &format!("fusion.sub2.mp.r{round}.{et}"), d_model, d_model);
        }
    }
}

/// Sub-module 1: surrounding-agent track encodings attend over the
/// surrounding graph embeddings; residual keeps the tracks when the
/// interaction graph is sparse or empty.
pub fn fuse_surrounding(ctx: &mut Ctx, h_surr: Option<Var>, g_surr: Option<Var>, heads: usize) -> Option<Var> {
    let h = h_surr?;
    let att = cross_attention(ctx, h, g_surr, heads, "fusion.sub1.att");
    Some(ctx.tape.add(att, h))
}

/// Sub-module 2: lane nodes attend over `sa_interaction`, then two rounds of
/// per-edge-type mean aggregation with residual.
pub fn fuse_lanes(
    ctx: &mut Ctx,
    h_lane: &[(String, Var)],
    sa_interaction: Option<Var>,
    lane_graph: &LaneGraph,
    heads: usize,
) -> Vec<(String, Var)> {
    let rows: Vec<Var> = h_lane.iter().map(|(_, v)| *v).collect();
    let stacked = ctx.tape.concat_rows(&rows);
    let att = cross_attention(ctx, stacked, sa_interaction, heads, "fusion.sub2.att");
    let mut x: Vec<Var> = {
        let combined = ctx.tape.add(stacked, att);
        (0..h_lane.len()).map(|i| ctx.tape.row(combined, i)).collect()
    };

    let idx_of = |id: &str| h_lane.iter().position(|(nid, _)| nid == id);
    for round in 0..LANE_MP_ROUNDS {
        let mut next = x.clone();
        for (v, (vid, _)) in h_lane.iter().enumerate() {
            let mut update = next[v];
            for (et, name) in [(LaneEdgeType::Successor, "successor"), (LaneEdgeType::Proximal, "proximal")] {
                let neighbors: Vec<usize> = lane_graph
                    .edges
                    .iter()
                    .filter(|e| e.edge_type == et && &e.dst_id == vid)
                    .filter_map(|e| idx_of(&e.src_id))
                    .collect();
                if neighbors.is_empty() {
                    continue;
                }
                let mut acc: Option<Var> = None;
                for &u in &neighbors {
                    let m = linear(ctx, x[u], &format!("fusion.sub2.mp.r{round}.{name}"));
                    acc = Some(match acc {
                        Some(a) => ctx.tape.add(a, m),
                        None => m,
                    });
                }
                let mean = ctx.tape.scale(acc.unwrap(), 1.0 / neighbors.len() as f64);
                update = ctx.tape.add(update, mean);
            }
            next[v] = update;
        }
        x = next;
    }

    h_lane
        .iter()
        .zip(x)
        .map(|((id, _), v)| (id.clone(), v))
        .collect()
}

/// Sub-module 3: the target track encoding attends over the five per-frame
/// graph embeddings of the target; residual.
pub fn fuse_target(ctx: &mut Ctx, h_target: Var, g_target_steps: &[Var], heads: usize) -> Var {
    let kv = ctx.tape.concat_rows(g_target_steps);
    let att = cross_attention(ctx, h_target, Some(kv), heads, "fusion.sub3.att");
    ctx.tape.add(att, h_target)
}

/// Sub-module 4: f_fused = concat(ta_interaction, CrossAtt(ta, h_lanefinal)).
pub fn fuse_final(ctx: &mut Ctx, ta_interaction: Var, h_lanefinal: &[(String, Var)], heads: usize) -> Var {
    let rows: Vec<Var> = h_lanefinal.iter().map(|(_, v)| *v).collect();
    let kv = if rows.is_empty() {
        None
    } else {
        Some(ctx.tape.concat_rows(&rows))
    };
    let att = cross_attention(ctx, ta_interaction, kv, heads, "fusion.sub4.att");
    ctx.tape.concat_cols(&[ta_interaction, att])
}
