//! Synthetic desk-scale scene generation: lane topologies, kinematic agent
//! rollouts with known ground-truth futures, and semantic interaction-graph
//! extraction from road topology.

use crate::scene_model::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FRAME_DT: f64 = 0.5; // 2 Hz

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Straight,
    Curve,
    LaneChange,
    Intersection,
    Roundabout,
}

impl std::str::FromStr for Topology {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "straight" => Ok(Topology::Straight),
            "curve" => Ok(Topology::Curve),
            "lane_change" => Ok(Topology::LaneChange),
            "intersection" => Ok(Topology::Intersection),
            "roundabout" => Ok(Topology::Roundabout),
            other => Err(format!("unknown topology {other}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub topology: Topology,
    pub n_agents: usize,
    pub n_pedestrians: usize,
    pub seed: u64,
    pub noise_std: f64,
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("infeasible config: {0}")]
    Infeasible(String),
}

/// Thresholds for semantic relation classification.
#[derive(Debug, Clone)]
pub struct RelationConfig {
    pub map_match_radius: f64,
    pub max_path_distance: f64,
    pub lateral_offset_max: f64,
    pub pedestrian_radius: f64,
    pub prob_scale: f64,
}

impl Default for RelationConfig {
    fn default() -> Self {
        RelationConfig {
            map_match_radius: 3.0,
            max_path_distance: 50.0,
            lateral_offset_max: 5.0,
            pedestrian_radius: 15.0,
            prob_scale: 20.0,
        }
    }
}

/// One agent as seen in a single frame (world or scene frame, consistent
/// with the lane graph passed alongside).
#[derive(Debug, Clone)]
pub struct FrameAgent {
    pub id: String,
    pub agent_type: AgentType,
    pub x: f64,
    pub y: f64,
}

// ---- lane-graph geometry ----------------------------------------------------

/// Flattened pose-level view of a lane graph for path queries.
pub struct PoseIndex {
    pts: Vec<(f64, f64)>,
    headings: Vec<f64>,
    node_of: Vec<usize>,
    /// directed successor-chain adjacency (pose -> (pose, cost))
    fwd: Vec<Vec<(usize, f64)>>,
    /// proximal pose links (bidirectional, used only in the fallback search)
    prox: Vec<(usize, usize, f64)>,
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

impl PoseIndex {
    pub fn build(g: &LaneGraph) -> PoseIndex {
        let mut pts = Vec::new();
        let mut headings = Vec::new();
        let mut node_of = Vec::new();
        let mut node_ids = Vec::new();
        let mut first_pose = Vec::new();
        let mut last_pose = Vec::new();
        for (ni, node) in g.nodes.iter().enumerate() {
            node_ids.push(node.id.clone());
            first_pose.push(pts.len());
            for p in &node.poses {
                pts.push((p.x, p.y));
                headings.push(p.theta);
                node_of.push(ni);
            }
            last_pose.push(pts.len() - 1);
        }
        let mut fwd: Vec<Vec<(usize, f64)>> = vec![Vec::new(); pts.len()];
        for ni in 0..g.nodes.len() {
            for pi in first_pose[ni]..last_pose[ni] {
                let c = dist2(pts[pi], pts[pi + 1]).sqrt();
                fwd[pi].push((pi + 1, c));
            }
        }
        let node_index = |id: &str| node_ids.iter().position(|n| n == id);
        let mut prox = Vec::new();
        for e in &g.edges {
            let (Some(si), Some(di)) = (node_index(&e.src_id), node_index(&e.dst_id)) else {
                continue;
            };
            match e.edge_type {
                LaneEdgeType::Successor => {
                    let a = last_pose[si];
                    let b = first_pose[di];
                    let c = dist2(pts[a], pts[b]).sqrt();
                    fwd[a].push((b, c));
                }
                LaneEdgeType::Proximal => {
                    // pairwise pose links at matching offsets
                    let la = last_pose[si] - first_pose[si];
                    let lb = last_pose[di] - first_pose[di];
                    for j in 0..=la.min(lb) {
                        let a = first_pose[si] + j;
                        let b = first_pose[di] + j;
                        let c = dist2(pts[a], pts[b]).sqrt();
                        prox.push((a, b, c));
                    }
                }
            }
        }
        PoseIndex {
            pts,
            headings,
            node_of,
            fwd,
            prox,
        }
    }

    /// Nearest pose within `radius`; None if unmatchable.
    pub fn match_pose(&self, x: f64, y: f64, radius: f64) -> Option<usize> {
        let mut best = None;
        let mut best_d2 = radius * radius;
        for (i, &p) in self.pts.iter().enumerate() {
            let d2 = dist2(p, (x, y));
            if d2 <= best_d2 {
                best_d2 = d2;
                best = Some(i);
            }
        }
        best
    }

    fn dijkstra(&self, src: usize, undirected: bool, with_proximal: bool, cap: f64) -> Vec<f64> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let n = self.pts.len();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (a, edges) in self.fwd.iter().enumerate() {
            for &(b, c) in edges {
                adj[a].push((b, c));
                if undirected {
                    adj[b].push((a, c));
                }
            }
        }
        if with_proximal {
            for &(a, b, c) in &self.prox {
                adj[a].push((b, c));
                adj[b].push((a, c));
            }
        }
        let mut dist = vec![f64::INFINITY; n];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((ordered_float(0.0), src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            let d = f64::from_bits(d);
            if d > dist[u] || d > cap {
                continue;
            }
            for &(v, c) in &adj[u] {
                let nd = d + c;
                if nd < dist[v] && nd <= cap {
                    dist[v] = nd;
                    heap.push(Reverse((ordered_float(nd), v)));
                }
            }
        }
        dist
    }

    /// Shortest forward successor-chain distance src -> dst, if <= cap.
    pub fn forward_path_distance(&self, src: usize, dst: usize, cap: f64) -> Option<f64> {
        let d = self.dijkstra(src, false, false, cap)[dst];
        d.is_finite().then_some(d)
    }

    /// Forward polyline of up to `horizon` meters starting at a pose.
    pub fn forward_polyline(&self, start: usize, horizon: f64) -> Vec<(f64, f64)> {
        let mut out = vec![self.pts[start]];
        let mut cur = start;
        let mut acc = 0.0;
        while acc < horizon {
            // follow the single successor chain; stop at branches' first edge
            let Some(&(next, c)) = self.fwd[cur].first() else { break };
            acc += c;
            out.push(self.pts[next]);
            cur = next;
        }
        out
    }
}

// nonnegative finite f64 keys order correctly by bits
fn ordered_float(x: f64) -> u64 {
    x.to_bits()
}

// Touching at endpoints counts as a crossing (lane grids often share the
// conflict-point vertex), but collinear overlap does not: two vehicles on
// the same chain are a longitudinal pair, not an intersecting one.
fn seg_intersect(p1: (f64, f64), p2: (f64, f64), p3: (f64, f64), p4: (f64, f64)) -> bool {
    let d = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| {
        (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
    };
    let d1 = d(p3, p4, p1);
    let d2 = d(p3, p4, p2);
    let d3 = d(p1, p2, p3);
    let d4 = d(p1, p2, p4);
    if (d1 == 0.0 && d2 == 0.0) || (d3 == 0.0 && d4 == 0.0) {
        return false;
    }
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

fn polylines_cross(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    for w in a.windows(2) {
        for v in b.windows(2) {
            if seg_intersect(w[0], w[1], v[0], v[1]) {
                return true;
            }
        }
    }
    false
}

/// Classify semantic relations between the agents of one frame.
///
/// Rules, applied per ordered pair in priority order:
/// - pedestrian: one endpoint human, Euclidean distance <= pedestrian_radius;
///   edge emitted human -> vehicle only.
/// - longitudinal: both vehicles on one successor chain, emitted rear -> ahead
///   with the along-chain distance.
/// - lateral: matched lanes joined by a proximal edge and |along-lane offset|
///   < lateral_offset_max; symmetric, both directions emitted.
/// - intersecting: forward lane paths within max_path_distance geometrically
///   cross; symmetric, both directions emitted.
///
/// Non-pedestrian edges always carry a path distance: the successor-chain
/// distance when one exists, otherwise the shortest successor+proximal path,
/// otherwise the Euclidean distance as a last resort.
pub fn extract_relations(
    agents: &[FrameAgent],
    lane_graph: &LaneGraph,
    cfg: &RelationConfig,
) -> Vec<InteractionEdge> {
    let index = PoseIndex::build(lane_graph);
    extract_relations_with_index(agents, &index, cfg)
}

pub fn extract_relations_with_index(
    agents: &[FrameAgent],
    index: &PoseIndex,
    cfg: &RelationConfig,
) -> Vec<InteractionEdge> {
    let matched: Vec<Option<usize>> = agents
        .iter()
        .map(|a| match a.agent_type {
            AgentType::Vehicle => {
                let m = index.match_pose(a.x, a.y, cfg.map_match_radius);
                if m.is_none() {
                    eprintln!("warning: vehicle {} unmatchable to any lane", a.id);
                }
                m
            }
            AgentType::Human => None,
        })
        .collect();

    let mut edges = Vec::new();
    for (i, a) in agents.iter().enumerate() {
        for (j, b) in agents.iter().enumerate() {
            if i == j {
                continue;
            }
            let distance = dist2((a.x, a.y), (b.x, b.y)).sqrt();
            let edge_probability = (-distance / cfg.prob_scale).exp();
            let mk = |relation, path_distance| InteractionEdge {
                src_id: a.id.clone(),
                dst_id: b.id.clone(),
                relation,
                distance,
                path_distance,
                edge_probability,
            };

            // pedestrian rule: only human -> vehicle, by Euclidean proximity
            if a.agent_type == AgentType::Human {
                if b.agent_type == AgentType::Vehicle && distance <= cfg.pedestrian_radius {
                    edges.push(mk(RelationType::Pedestrian, None));
                }
                continue;
            }
            if b.agent_type == AgentType::Human {
                continue;
            }

            // vehicle-vehicle rules need both map matches
            let (Some(pa), Some(pb)) = (matched[i], matched[j]) else {
                continue;
            };

            // longitudinal: b ahead of a along a successor chain
            if let Some(pd) = index.forward_path_distance(pa, pb, cfg.max_path_distance) {
                edges.push(mk(RelationType::Longitudinal, Some(pd)));
                continue;
            }

            let lane_path_distance = || {
                index
                    .forward_path_distance(pb, pa, cfg.max_path_distance)
                    .or_else(|| {
                        let d = index.dijkstra(pa, true, true, cfg.max_path_distance)[pb];
                        d.is_finite().then_some(d)
                    })
                    .unwrap_or(distance)
            };

            // lateral: proximal-linked lanes, small along-lane offset
            let na = index.node_of[pa];
            let nb = index.node_of[pb];
            let proximal_linked = index
                .prox
                .iter()
                .any(|&(x, y, _)| {
                    (index.node_of[x] == na && index.node_of[y] == nb)
                        || (index.node_of[x] == nb && index.node_of[y] == na)
                });
            if proximal_linked {
                let dir = (index.headings[pa].cos(), index.headings[pa].sin());
                let along = (b.x - a.x) * dir.0 + (b.y - a.y) * dir.1;
                if along.abs() < cfg.lateral_offset_max {
                    edges.push(mk(RelationType::Lateral, Some(lane_path_distance())));
                    continue;
                }
            }

            // intersecting: forward lane paths cross
            let pla = index.forward_polyline(pa, cfg.max_path_distance);
            let plb = index.forward_polyline(pb, cfg.max_path_distance);
            if polylines_cross(&pla, &plb) {
                edges.push(mk(RelationType::Intersecting, Some(lane_path_distance())));
            }
        }
    }
    edges
}

// ---- motion models ----------------------------------------------------------

#[derive(Debug, Clone)]
enum Motion {
    /// Constant speed along a polyline; extrapolates past both ends.
    Polyline { pts: Vec<(f64, f64)>, s0: f64, speed: f64 },
    /// Constant turn rate on a circle.
    Arc { cx: f64, cy: f64, radius: f64, theta0: f64, omega: f64 },
    /// Smoothstep lateral blend from lane y0 to y1 while moving along +x.
    LaneChange { x0: f64, y0: f64, y1: f64, speed: f64, t_start: f64, t_end: f64 },
    /// Constant walking velocity.
    Walk { x0: f64, y0: f64, vx: f64, vy: f64 },
}

fn polyline_point(pts: &[(f64, f64)], s: f64) -> (f64, f64) {
    if s <= 0.0 {
        let (a, b) = (pts[0], pts[1]);
        let l = dist2(a, b).sqrt();
        let u = s / l;
        return (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1));
    }
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let l = dist2(w[0], w[1]).sqrt();
        if acc + l >= s {
            let u = (s - acc) / l;
            return (w[0].0 + u * (w[1].0 - w[0].0), w[0].1 + u * (w[1].1 - w[0].1));
        }
        acc += l;
    }
    let n = pts.len();
    let (a, b) = (pts[n - 2], pts[n - 1]);
    let l = dist2(a, b).sqrt();
    let u = (s - acc) / l + 1.0;
    (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1))
}

impl Motion {
    fn position(&self, t: f64) -> (f64, f64) {
        match self {
            Motion::Polyline { pts, s0, speed } => polyline_point(pts, s0 + speed * t),
            Motion::Arc { cx, cy, radius, theta0, omega } => {
                let th = theta0 + omega * t;
                (cx + radius * th.cos(), cy + radius * th.sin())
            }
            Motion::LaneChange { x0, y0, y1, speed, t_start, t_end } => {
                let u = ((t - t_start) / (t_end - t_start)).clamp(0.0, 1.0);
                let blend = u * u * (3.0 - 2.0 * u);
                (x0 + speed * t, y0 + blend * (y1 - y0))
            }
            Motion::Walk { x0, y0, vx, vy } => (x0 + vx * t, y0 + vy * t),
        }
    }

    /// (x, y, heading, vel, acc, yaw_rate) via central differences of pos(t).
    fn state(&self, t: f64) -> (f64, f64, f64, f64, f64, f64) {
        let dt = 1e-3;
        let speed_heading = |t: f64| {
            let p1 = self.position(t - dt);
            let p2 = self.position(t + dt);
            let vx = (p2.0 - p1.0) / (2.0 * dt);
            let vy = (p2.1 - p1.1) / (2.0 * dt);
            let speed = (vx * vx + vy * vy).sqrt();
            let heading = if speed > 1e-9 { vy.atan2(vx) } else { 0.0 };
            (speed, heading)
        };
        let (x, y) = self.position(t);
        let (v, heading) = speed_heading(t);
        let (v1, h1) = speed_heading(t - dt);
        let (v2, h2) = speed_heading(t + dt);
        let acc = (v2 - v1) / (2.0 * dt);
        let yaw_rate = normalize_angle(h2 - h1) / (2.0 * dt);
        (x, y, heading, v, acc, yaw_rate)
    }
}

struct AgentDef {
    id: String,
    agent_type: AgentType,
    motion: Motion,
    first_present_frame: usize,
}

struct World {
    lane_graph: LaneGraph,
    /// polylines per lane chain (used to route vehicles)
    chains: Vec<Vec<(f64, f64)>>,
}

fn chain_nodes(prefix: &str, pts: &[(f64, f64)], crosswalk_at: Option<usize>) -> (Vec<LaneNode>, Vec<LaneEdge>) {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (ci, chunk) in pts.chunks(N_POSE).enumerate() {
        if chunk.len() < 2 && ci > 0 {
            break; // fold a trailing single pose into nothing; chains are long enough
        }
        let id = format!("{prefix}_{ci:02}");
        let poses = chunk
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| {
                let global = ci * N_POSE + k;
                let next = pts.get(global + 1).copied().unwrap_or((x + 1.0, y));
                let prev = if global > 0 { pts[global - 1] } else { (x - 1.0, y) };
                let theta = (next.1 - prev.1).atan2(next.0 - prev.0);
                let mut p = LanePose::new(x, y, theta);
                if crosswalk_at == Some(global) {
                    p.crosswalk_flag = true;
                    p.stopline_flag = true;
                }
                p
            })
            .collect();
        if ci > 0 {
            edges.push(LaneEdge {
                src_id: format!("{prefix}_{:02}", ci - 1),
                dst_id: id.clone(),
                edge_type: LaneEdgeType::Successor,
            });
        }
        nodes.push(LaneNode { id, poses });
    }
    (nodes, edges)
}

fn line_points(from: (f64, f64), to: (f64, f64), spacing: f64) -> Vec<(f64, f64)> {
    let len = dist2(from, to).sqrt();
    let n = (len / spacing).floor() as usize;
    (0..=n)
        .map(|i| {
            let u = i as f64 * spacing / len;
            (from.0 + u * (to.0 - from.0), from.1 + u * (to.1 - from.1))
        })
        .collect()
}

fn arc_points(cx: f64, cy: f64, r: f64, th0: f64, th1: f64, spacing: f64) -> Vec<(f64, f64)> {
    let arc = (th1 - th0).abs() * r;
    let n = (arc / spacing).floor() as usize;
    (0..=n)
        .map(|i| {
            let th = th0 + (th1 - th0) * (i as f64 * spacing / arc);
            (cx + r * th.cos(), cy + r * th.sin())
        })
        .collect()
}

fn build_world(topology: Topology) -> World {
    match topology {
        Topology::Straight => {
            let pts = line_points((-40.0, 0.0), (120.0, 0.0), 2.0);
            let (nodes, edges) = chain_nodes("lane0", &pts, None);
            World {
                lane_graph: LaneGraph { nodes, edges },
                chains: vec![pts],
            }
        }
        Topology::Curve => {
            // starts before -pi/2 so the whole observation window stays on-lane
            let pts = arc_points(0.0, 40.0, 40.0, -std::f64::consts::FRAC_PI_2 - 0.6, 0.9, 2.0);
            let (nodes, edges) = chain_nodes("arc0", &pts, None);
            World {
                lane_graph: LaneGraph { nodes, edges },
                chains: vec![pts],
            }
        }
        Topology::LaneChange => {
            let pts0 = line_points((-40.0, 0.0), (120.0, 0.0), 2.0);
            let pts1 = line_points((-40.0, 3.5), (120.0, 3.5), 2.0);
            let (mut nodes, mut edges) = chain_nodes("lane0", &pts0, None);
            let (n1, e1) = chain_nodes("lane1", &pts1, None);
            let count = nodes.len().min(n1.len());
            nodes.extend(n1);
            edges.extend(e1);
            for ci in 0..count {
                edges.push(LaneEdge {
                    src_id: format!("lane0_{ci:02}"),
                    dst_id: format!("lane1_{ci:02}"),
                    edge_type: LaneEdgeType::Proximal,
                });
                edges.push(LaneEdge {
                    src_id: format!("lane1_{ci:02}"),
                    dst_id: format!("lane0_{ci:02}"),
                    edge_type: LaneEdgeType::Proximal,
                });
            }
            World {
                lane_graph: LaneGraph { nodes, edges },
                chains: vec![pts0, pts1],
            }
        }
        Topology::Intersection => {
            let pts0 = line_points((-60.0, 0.0), (80.0, 0.0), 2.0);
            let pts1 = line_points((10.0, -60.0), (10.0, 80.0), 2.0);
            // crosswalk just before the crossing point on the east-west lane
            let cw_idx = pts0.iter().position(|p| p.0 >= 4.0);
            let (mut nodes, mut edges) = chain_nodes("ew", &pts0, cw_idx);
            let (n1, e1) = chain_nodes("ns", &pts1, None);
            nodes.extend(n1);
            edges.extend(e1);
            World {
                lane_graph: LaneGraph { nodes, edges },
                chains: vec![pts0, pts1],
            }
        }
        Topology::Roundabout => {
            // open ring (a full ring would close a successor cycle)
            let pts = arc_points(0.0, 30.0, 30.0, -std::f64::consts::FRAC_PI_2 - 0.7, std::f64::consts::PI, 2.0);
            let (nodes, edges) = chain_nodes("ring", &pts, None);
            World {
                lane_graph: LaneGraph { nodes, edges },
                chains: vec![pts],
            }
        }
    }
}

fn chain_arc_length_at(pts: &[(f64, f64)], target: (f64, f64)) -> f64 {
    // arc length at the polyline point closest to `target` (seats agents)
    let mut best = (f64::INFINITY, 0.0);
    let mut acc = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let d = dist2(*p, target);
        if d < best.0 {
            best = (d, acc);
        }
        if i + 1 < pts.len() {
            acc += dist2(*p, pts[i + 1]).sqrt();
        }
    }
    best.1
}

fn normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    std * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Generate one scene. Pure in `cfg`: the same config yields a byte-identical
/// serialized scene.
pub fn generate_scene(cfg: &SynthConfig) -> Result<Scene, GenError> {
    if cfg.n_agents < 1 {
        return Err(GenError::Infeasible("need at least one agent (the target)".into()));
    }
    if cfg.n_agents > 6 {
        return Err(GenError::Infeasible("at most 6 vehicles fit the desk-scale lanes".into()));
    }
    if cfg.noise_std < 0.0 {
        return Err(GenError::Infeasible("noise_std must be >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let world = build_world(cfg.topology);

    let mut agents: Vec<AgentDef> = Vec::new();
    // target: first vehicle, seated so that t=0 sits near the scene center
    let target_motion = match cfg.topology {
        Topology::Straight => Motion::Polyline {
            pts: world.chains[0].clone(),
            s0: chain_arc_length_at(&world.chains[0], (0.0, 0.0)),
            speed: 10.0,
        },
        Topology::Curve | Topology::Roundabout => {
            let r = if cfg.topology == Topology::Curve { 40.0 } else { 30.0 };
            let cy = if cfg.topology == Topology::Curve { 40.0 } else { 30.0 };
            Motion::Arc {
                cx: 0.0,
                cy,
                radius: r,
                theta0: -std::f64::consts::FRAC_PI_2,
                omega: 8.0 / r,
            }
        }
        Topology::LaneChange => Motion::LaneChange {
            x0: 0.0,
            y0: 0.0,
            y1: 3.5,
            speed: 10.0,
            t_start: 0.0,
            t_end: 4.0,
        },
        Topology::Intersection => Motion::Polyline {
            pts: world.chains[0].clone(),
            s0: chain_arc_length_at(&world.chains[0], (-12.0, 0.0)),
            speed: 8.0,
        },
    };
    agents.push(AgentDef {
        id: "veh00".into(),
        agent_type: AgentType::Vehicle,
        motion: target_motion,
        first_present_frame: 0,
    });

    for k in 1..cfg.n_agents {
        let chain = &world.chains[k % world.chains.len()];
        let speed = rng.gen_range(7.0..12.0);
        let offset = rng.gen_range(8.0..22.0) * if k % 2 == 0 { -1.0 } else { 1.0 };
        let s_anchor = match cfg.topology {
            Topology::Intersection if k % world.chains.len() == 1 => {
                // aim the cross-lane vehicle at the conflict point
                chain_arc_length_at(chain, (10.0, 0.0)) - rng.gen_range(10.0..18.0)
            }
            _ => {
                // keep filler vehicles offset from the target's own anchor
                let anchor = if cfg.topology == Topology::Intersection {
                    (-12.0, 0.0)
                } else {
                    (0.0, 0.0)
                };
                chain_arc_length_at(chain, anchor) + offset
            }
        };
        // the third and later vehicles appear mid-window
        let first_present_frame = if k >= 2 { k % 3 } else { 0 };
        agents.push(AgentDef {
            id: format!("veh{k:02}"),
            agent_type: AgentType::Vehicle,
            motion: Motion::Polyline {
                pts: chain.clone(),
                s0: s_anchor,
                speed,
            },
            first_present_frame,
        });
    }

    for k in 0..cfg.n_pedestrians {
        // pedestrians loiter near the scene center (crosswalk area when present)
        let base = if cfg.topology == Topology::Intersection { (4.0, -4.0) } else { (5.0, 4.0) };
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        agents.push(AgentDef {
            id: format!("ped{k:02}"),
            agent_type: AgentType::Human,
            motion: Motion::Walk {
                x0: base.0 + rng.gen_range(-2.0..2.0),
                y0: base.1 + rng.gen_range(-2.0..2.0),
                vx: 1.2 * angle.cos(),
                vy: 1.2 * angle.sin(),
            },
            first_present_frame: 0,
        });
    }

    // target frame: true pose at t=0
    let (tx, ty, th, _, _, _) = agents[0].motion.state(0.0);
    let (c, s) = (th.cos(), th.sin());
    let to_local = |x: f64, y: f64| {
        let dx = x - tx;
        let dy = y - ty;
        (c * dx + s * dy, -s * dx + c * dy)
    };

    // lane graph in the target frame
    let lane_graph = LaneGraph {
        nodes: world
            .lane_graph
            .nodes
            .iter()
            .map(|n| LaneNode {
                id: n.id.clone(),
                poses: n
                    .poses
                    .iter()
                    .map(|p| {
                        let (x, y) = to_local(p.x, p.y);
                        LanePose {
                            x,
                            y,
                            theta: normalize_angle(p.theta - th),
                            stopline_flag: p.stopline_flag,
                            crosswalk_flag: p.crosswalk_flag,
                        }
                    })
                    .collect(),
            })
            .collect(),
        edges: world.lane_graph.edges.clone(),
    };

    // observed tracks with noise; ground truth future noise-free
    let mut tracks = Vec::new();
    let mut frame_positions: Vec<Vec<FrameAgent>> = vec![Vec::new(); T_OBS];
    for def in &agents {
        let mut states = Vec::with_capacity(T_OBS);
        for f in 0..T_OBS {
            if f < def.first_present_frame {
                states.push(AgentState::absent());
                continue;
            }
            let t = (f as f64 - (T_OBS - 1) as f64) * FRAME_DT;
            let (x, y, _, vel, acc, yaw_rate) = def.motion.state(t);
            let (mut lx, mut ly) = to_local(x, y);
            lx += normal(&mut rng, cfg.noise_std);
            ly += normal(&mut rng, cfg.noise_std);
            states.push(AgentState {
                x: lx,
                y: ly,
                vel,
                acc,
                yaw_rate,
                present: true,
            });
            frame_positions[f].push(FrameAgent {
                id: def.id.clone(),
                agent_type: def.agent_type,
                x: lx,
                y: ly,
            });
        }
        tracks.push(AgentTrack {
            id: def.id.clone(),
            agent_type: def.agent_type,
            states,
        });
    }

    let future: Vec<(f64, f64)> = (1..=T_FUTURE)
        .map(|i| {
            let (x, y) = agents[0].motion.position(i as f64 * FRAME_DT);
            to_local(x, y)
        })
        .collect();

    let rel_cfg = RelationConfig::default();
    let pose_index = PoseIndex::build(&lane_graph);
    let interaction_graphs = (0..T_OBS)
        .map(|f| InteractionGraph {
            frame_index: f as i32 - (T_OBS as i32 - 1),
            agent_ids: frame_positions[f]
                .iter()
                .map(|a| (a.id.clone(), a.agent_type))
                .collect(),
            edges: extract_relations_with_index(&frame_positions[f], &pose_index, &rel_cfg),
        })
        .collect();

    let mut scene = Scene {
        schema: SCENE_SCHEMA.to_string(),
        scene_id: format!("{:?}-{}", cfg.topology, cfg.seed).to_lowercase(),
        lane_graph,
        tracks,
        interaction_graphs,
        target_id: "veh00".into(),
        future,
    };
    scene.canonicalize();
    let violations = validate_scene(&scene);
    if !violations.is_empty() {
        return Err(GenError::Infeasible(format!(
            "generated scene failed validation: {violations:?}"
        )));
    }
    Ok(scene)
}

/// Generate `count` scenes with consecutive seeds.
pub fn generate_batch(base: &SynthConfig, count: usize) -> Result<Vec<Scene>, GenError> {
    (0..count)
        .map(|i| {
            let mut cfg = base.clone();
            cfg.seed = base.seed.wrapping_add(i as u64);
            let mut scene = generate_scene(&cfg)?;
            scene.scene_id = format!("{}-{i:04}", scene.scene_id);
            Ok(scene)
        })
        .collect()
}
