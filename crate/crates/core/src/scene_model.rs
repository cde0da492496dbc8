//! Traffic-scene domain types and their canonical line-delimited JSON format.
//!
//! All positions are scene-local: the frame is centered on the target
//! agent's pose at t=0 and aligned with its heading.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Observation window length (2 s at 2 Hz, frames t = -4..=0).
pub const T_OBS: usize = 5;
/// Prediction horizon (6 s at 2 Hz).
pub const T_FUTURE: usize = 12;
/// Fixed pose capacity per lane node.
pub const N_POSE: usize = 10;
/// Scene record schema tag.
pub const SCENE_SCHEMA: &str = "sf-scene/1";

/// Normalize an angle into [-pi, pi).
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = (theta + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if a >= std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanePose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub stopline_flag: bool,
    pub crosswalk_flag: bool,
}

impl LanePose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        LanePose {
            x,
            y,
            theta: normalize_angle(theta),
            stopline_flag: false,
            crosswalk_flag: false,
        }
    }

    /// Feature vector [x, y, theta, stopline, crosswalk].
    pub fn features(&self) -> [f64; 5] {
        [
            self.x,
            self.y,
            self.theta,
            if self.stopline_flag { 1.0 } else { 0.0 },
            if self.crosswalk_flag { 1.0 } else { 0.0 },
        ]
    }
}

/// A lane-centerline segment: up to [`N_POSE`] poses, valid prefix only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneNode {
    pub id: String,
    pub poses: Vec<LanePose>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneEdgeType {
    Successor,
    Proximal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneEdge {
    pub src_id: String,
    pub dst_id: String,
    pub edge_type: LaneEdgeType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneGraph {
    pub nodes: Vec<LaneNode>,
    pub edges: Vec<LaneEdge>,
}

impl LaneGraph {
    pub fn node(&self, id: &str) -> Option<&LaneNode> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentType {
    Vehicle,
    Human,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub vel: f64,
    pub acc: f64,
    pub yaw_rate: f64,
    pub present: bool,
}

impl AgentState {
    pub fn absent() -> Self {
        AgentState {
            x: 0.0,
            y: 0.0,
            vel: 0.0,
            acc: 0.0,
            yaw_rate: 0.0,
            present: false,
        }
    }

    /// Feature vector [x, y, vel, acc, yaw_rate].
    pub fn features(&self) -> [f64; 5] {
        [self.x, self.y, self.vel, self.acc, self.yaw_rate]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTrack {
    pub id: String,
    pub agent_type: AgentType,
    pub states: Vec<AgentState>,
}

impl AgentTrack {
    pub fn current(&self) -> &AgentState {
        &self.states[T_OBS - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    Longitudinal,
    Lateral,
    Intersecting,
    Pedestrian,
}

pub const ALL_RELATIONS: [RelationType; 4] = [
    RelationType::Longitudinal,
    RelationType::Lateral,
    RelationType::Intersecting,
    RelationType::Pedestrian,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEdge {
    pub src_id: String,
    pub dst_id: String,
    pub relation: RelationType,
    pub distance: f64,
    /// Along-lane-graph distance; None for pedestrian edges.
    pub path_distance: Option<f64>,
    pub edge_probability: f64,
}

impl InteractionEdge {
    /// Attribute vector [distance, path_distance, edge_probability];
    /// a missing path distance encodes as 0.0 (pedestrian edges carry
    /// their own weight matrices, so the sentinel is unambiguous).
    pub fn attributes(&self) -> [f64; 3] {
        [
            self.distance,
            self.path_distance.unwrap_or(0.0),
            self.edge_probability,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    /// Frame index in -4..=0.
    pub frame_index: i32,
    pub agent_ids: Vec<(String, AgentType)>,
    pub edges: Vec<InteractionEdge>,
}

impl InteractionGraph {
    pub fn empty(frame_index: i32) -> Self {
        InteractionGraph {
            frame_index,
            agent_ids: Vec::new(),
            edges: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub schema: String,
    pub scene_id: String,
    pub lane_graph: LaneGraph,
    pub tracks: Vec<AgentTrack>,
    pub interaction_graphs: Vec<InteractionGraph>,
    pub target_id: String,
    pub future: Vec<(f64, f64)>,
}

impl Scene {
    pub fn track(&self, id: &str) -> Option<&AgentTrack> {
        self.tracks.iter().find(|t| t.id == id)
    }

    pub fn target_track(&self) -> &AgentTrack {
        self.track(&self.target_id).expect("validated scene has a target track")
    }

    /// Sort all collections into canonical order (by id, then fields).
    pub fn canonicalize(&mut self) {
        self.lane_graph.nodes.sort_by(|a, b| a.id.cmp(&b.id));
        self.lane_graph
            .edges
            .sort_by(|a, b| (&a.src_id, &a.dst_id, a.edge_type).cmp(&(&b.src_id, &b.dst_id, b.edge_type)));
        self.tracks.sort_by(|a, b| a.id.cmp(&b.id));
        self.interaction_graphs.sort_by_key(|g| g.frame_index);
        for g in &mut self.interaction_graphs {
            g.agent_ids.sort();
            g.edges
                .sort_by(|a, b| (&a.src_id, &a.dst_id, a.relation).cmp(&(&b.src_id, &b.dst_id, b.relation)));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("validation failed: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// One invariant violation: which type, which field, which rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub type_name: String,
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(type_name: &str, field: &str, rule: impl Into<String>) -> Self {
        Violation {
            type_name: type_name.to_string(),
            field: field.to_string(),
            rule: rule.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}: {}", self.type_name, self.field, self.rule)
    }
}

/// Maximum spacing between consecutive valid lane poses, meters.
pub const LANE_POSE_SPACING_MAX: f64 = 2.0;

/// Check every structural invariant; empty result means the scene is valid.
pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    let mut v = Vec::new();

    if scene.schema != SCENE_SCHEMA {
        v.push(Violation::new("Scene", "schema", format!("expected {SCENE_SCHEMA}")));
    }

    let mut node_ids = std::collections::BTreeSet::new();
    for node in &scene.lane_graph.nodes {
        if !node_ids.insert(node.id.clone()) {
            v.push(Violation::new("LaneNode", "id", format!("duplicate id {}", node.id)));
        }
        if node.poses.is_empty() {
            v.push(Violation::new("LaneNode", "poses", format!("node {} has no valid pose", node.id)));
        }
        if node.poses.len() > N_POSE {
            v.push(Violation::new(
                "LaneNode",
                "poses",
                format!("node {} exceeds capacity {N_POSE}", node.id),
            ));
        }
        for (i, p) in node.poses.iter().enumerate() {
            if !(p.theta >= -std::f64::consts::PI && p.theta < std::f64::consts::PI) {
                v.push(Violation::new(
                    "LanePose",
                    "theta",
                    format!("node {} pose {i} theta {} outside [-pi, pi)", node.id, p.theta),
                ));
            }
            if i > 0 {
                let q = &node.poses[i - 1];
                let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                if d > LANE_POSE_SPACING_MAX + 1e-9 {
                    v.push(Violation::new(
                        "LaneNode",
                        "poses",
                        format!("node {} poses {}..{} are {:.3} m apart (max {LANE_POSE_SPACING_MAX})", node.id, i - 1, i, d),
                    ));
                }
            }
        }
    }

    for e in &scene.lane_graph.edges {
        if !node_ids.contains(&e.src_id) || !node_ids.contains(&e.dst_id) {
            v.push(Violation::new(
                "LaneGraph",
                "edges",
                format!("edge {}->{} references a missing node", e.src_id, e.dst_id),
            ));
        }
        if e.src_id == e.dst_id {
            v.push(Violation::new("LaneGraph", "edges", format!("self-loop on {}", e.src_id)));
        }
    }
    if successor_cycle(&scene.lane_graph) {
        v.push(Violation::new("LaneGraph", "edges", "successor edges must form a DAG"));
    }

    let mut track_ids = std::collections::BTreeSet::new();
    for t in &scene.tracks {
        if !track_ids.insert(t.id.clone()) {
            v.push(Violation::new("AgentTrack", "id", format!("duplicate id {}", t.id)));
        }
        if t.states.len() != T_OBS {
            v.push(Violation::new(
                "AgentTrack",
                "states",
                format!("track {} has {} states, expected {T_OBS}", t.id, t.states.len()),
            ));
            continue;
        }
        // present flags must be a contiguous suffix ending at t=0
        if !t.states[T_OBS - 1].present {
            v.push(Violation::new(
                "AgentTrack",
                "states",
                format!("track {} absent at the current frame", t.id),
            ));
        }
        let mut seen_present = false;
        for s in &t.states {
            if s.present {
                seen_present = true;
            } else if seen_present {
                v.push(Violation::new(
                    "AgentTrack",
                    "states",
                    format!("track {} present flags are not a contiguous suffix", t.id),
                ));
                break;
            }
        }
        for (i, s) in t.states.iter().enumerate() {
            if !s.present && s.features().iter().any(|&f| f != 0.0) {
                v.push(Violation::new(
                    "AgentState",
                    "present",
                    format!("track {} frame {i} absent but not zero-filled", t.id),
                ));
            }
            if s.present && s.vel < 0.0 {
                v.push(Violation::new("AgentState", "vel", format!("track {} frame {i} vel < 0", t.id)));
            }
        }
    }

    if scene.interaction_graphs.len() != T_OBS {
        v.push(Violation::new(
            "Scene",
            "interaction_graphs",
            format!("expected {T_OBS} graphs, got {}", scene.interaction_graphs.len()),
        ));
    }
    for g in &scene.interaction_graphs {
        if !(-(T_OBS as i32 - 1)..=0).contains(&g.frame_index) {
            v.push(Violation::new("InteractionGraph", "frame_index", format!("frame {} out of range", g.frame_index)));
        }
        let ids: std::collections::BTreeSet<&str> = g.agent_ids.iter().map(|(id, _)| id.as_str()).collect();
        for e in &g.edges {
            if !ids.contains(e.src_id.as_str()) || !ids.contains(e.dst_id.as_str()) {
                v.push(Violation::new(
                    "InteractionEdge",
                    "src_id/dst_id",
                    format!("edge {}->{} endpoint not in agent_ids", e.src_id, e.dst_id),
                ));
            }
            if e.src_id == e.dst_id {
                v.push(Violation::new("InteractionEdge", "src_id", format!("self-loop on {}", e.src_id)));
            }
            match (e.relation, e.path_distance) {
                (RelationType::Pedestrian, Some(_)) => v.push(Violation::new(
                    "InteractionEdge",
                    "path_distance",
                    "pedestrian edges must not carry path_distance (MISSING rule)",
                )),
                (RelationType::Pedestrian, None) => {}
                (_, None) => v.push(Violation::new(
                    "InteractionEdge",
                    "path_distance",
                    "non-pedestrian edges must carry path_distance",
                )),
                (_, Some(pd)) if pd < 0.0 => {
                    v.push(Violation::new("InteractionEdge", "path_distance", "must be >= 0"))
                }
                _ => {}
            }
            if e.distance < 0.0 {
                v.push(Violation::new("InteractionEdge", "distance", "must be >= 0"));
            }
            if !(0.0..=1.0).contains(&e.edge_probability) {
                v.push(Violation::new("InteractionEdge", "edge_probability", "must be in [0, 1]"));
            }
        }
    }

    match scene.track(&scene.target_id) {
        None => v.push(Violation::new("Scene", "target_id", format!("target {} has no track", scene.target_id))),
        Some(t) => {
            if t.agent_type != AgentType::Vehicle {
                v.push(Violation::new("Scene", "target_id", "target must be a vehicle"));
            }
            if t.states.len() == T_OBS && !t.states.iter().all(|s| s.present) {
                v.push(Violation::new("Scene", "target_id", "target must be present at all observed frames"));
            }
        }
    }

    if scene.future.len() != T_FUTURE {
        v.push(Violation::new(
            "Scene",
            "future",
            format!("future has length {}, expected {T_FUTURE}", scene.future.len()),
        ));
    }

    v
}

fn successor_cycle(g: &LaneGraph) -> bool {
    use std::collections::BTreeMap;
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &g.edges {
        if e.edge_type == LaneEdgeType::Successor {
            adj.entry(&e.src_id).or_default().push(&e.dst_id);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = BTreeMap::new();
    fn dfs<'a>(
        n: &'a str,
        adj: &BTreeMap<&'a str, Vec<&'a str>>,
        state: &mut BTreeMap<&'a str, u8>,
    ) -> bool {
        state.insert(n, 1);
        for m in adj.get(n).into_iter().flatten() {
            match state.get(m).copied().unwrap_or(0) {
                1 => return true,
                0 => {
                    if dfs(m, adj, state) {
                        return true;
                    }
                }
                _ => {}
            }
        }
        state.insert(n, 2);
        false
    }
    let keys: Vec<&str> = adj.keys().copied().collect();
    for n in keys {
        if state.get(n).copied().unwrap_or(0) == 0 && dfs(n, &adj, &mut state) {
            return true;
        }
    }
    false
}

/// Canonical single-record encoding (one JSON line, trailing newline).
pub fn serialize_scene(scene: &Scene) -> Result<Vec<u8>, SceneError> {
    let violations = validate_scene(scene);
    if !violations.is_empty() {
        return Err(SceneError::Invalid(violations));
    }
    let mut canon = scene.clone();
    canon.canonicalize();
    let mut bytes = serde_json::to_vec(&canon).expect("scene serializes");
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn deserialize_scene(bytes: &[u8]) -> Result<Scene, SceneError> {
    let scene: Scene = serde_json::from_slice(bytes).map_err(|e| SceneError::Parse {
        offset: e.column().saturating_sub(1),
        message: e.to_string(),
    })?;
    let violations = validate_scene(&scene);
    if !violations.is_empty() {
        return Err(SceneError::Invalid(violations));
    }
    Ok(scene)
}

/// Write scenes as line-delimited records.
pub fn write_scene_file(path: &std::path::Path, scenes: &[Scene]) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for s in scenes {
        let bytes = serialize_scene(s)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
        f.write_all(&bytes)?;
    }
    Ok(())
}

pub fn read_scene_file(path: &std::path::Path) -> Result<Vec<Scene>, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|e| SceneError::Parse {
        offset: 0,
        message: e.to_string(),
    })?;
    let mut scenes = Vec::new();
    let mut offset = 0usize;
    for line in text.lines() {
        if !line.trim().is_empty() {
            let scene = deserialize_scene(line.as_bytes()).map_err(|e| match e {
                SceneError::Parse { offset: o, message } => SceneError::Parse {
                    offset: offset + o,
                    message,
                },
                other => other,
            })?;
            scenes.push(scene);
        }
        offset += line.len() + 1;
    }
    Ok(scenes)
}
