//! SVG rendering of a scene with its predicted modes: lane centerlines,
//! the target's observed track, the ground-truth future, and K modes.

use crate::predictor::PredictionSet;
use crate::scene_model::{LaneEdgeType, Scene};
use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 800.0;
const MARGIN: f64 = 40.0;

struct Frame {
    min_x: f64,
    min_y: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Frame {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for &(x, y) in points {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        let span = (max_x - min_x).max(max_y - min_y).max(1.0);
        Frame {
            min_x,
            min_y,
            scale: (WIDTH - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        // flip y so north is up
        (
            MARGIN + (p.0 - self.min_x) * self.scale,
            HEIGHT - MARGIN - (p.1 - self.min_y) * self.scale,
        )
    }
}

fn polyline(svg: &mut String, frame: &Frame, pts: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts
        .iter()
        .map(|&p| {
            let (x, y) = frame.map(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let dash_attr = dash
        .map(|d| format!(" stroke-dasharray=\"{d}\""))
        .unwrap_or_default();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash_attr}/>",
        coords.join(" ")
    );
}

/// Render one scene and its prediction to SVG markup.
pub fn render_scene(scene: &Scene, prediction: &PredictionSet) -> String {
    let mut all_points: Vec<(f64, f64)> = Vec::new();
    for node in &scene.lane_graph.nodes {
        all_points.extend(node.poses.iter().map(|p| (p.x, p.y)));
    }
    let target = scene.target_track();
    for s in &target.states {
        if s.present {
            all_points.push((s.x, s.y));
        }
    }
    all_points.extend(scene.future.iter().copied());
    for mode in &prediction.modes {
        all_points.extend(mode.iter().copied());
    }
    let frame = Frame::fit(&all_points);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    // lane centerlines: each node's pose chain, plus successor connections
    for node in &scene.lane_graph.nodes {
        let pts: Vec<(f64, f64)> = node.poses.iter().map(|p| (p.x, p.y)).collect();
        polyline(&mut svg, &frame, &pts, "#bbbbbb", 2.0, None);
    }
    for edge in &scene.lane_graph.edges {
        if edge.edge_type != LaneEdgeType::Successor {
            continue;
        }
        let a = scene.lane_graph.node(&edge.src_id).and_then(|n| n.poses.last());
        let b = scene.lane_graph.node(&edge.dst_id).and_then(|n| n.poses.first());
        if let (Some(a), Some(b)) = (a, b) {
            polyline(&mut svg, &frame, &[(a.x, a.y), (b.x, b.y)], "#bbbbbb", 2.0, None);
        }
    }

    // surrounding agent tracks
    for track in &scene.tracks {
        if track.id == scene.target_id {
            continue;
        }
        let pts: Vec<(f64, f64)> = track
            .states
            .iter()
            .filter(|s| s.present)
            .map(|s| (s.x, s.y))
            .collect();
        polyline(&mut svg, &frame, &pts, "#7799cc", 1.5, None);
    }

    // predicted modes; the top-scored one is drawn heavier
    for (i, mode) in prediction.modes.iter().enumerate() {
        let width = if i == 0 { 2.5 } else { 1.5 };
        polyline(&mut svg, &frame, mode, "#dd4444", width, Some("6,3"));
    }

    // observed target history and ground-truth future
    let obs: Vec<(f64, f64)> = target.states.iter().map(|s| (s.x, s.y)).collect();
    polyline(&mut svg, &frame, &obs, "#222222", 3.0, None);
    polyline(&mut svg, &frame, &scene.future, "#22aa55", 3.0, None);

    if let Some(&last) = obs.last() {
        let (cx, cy) = frame.map(last);
        let _ = writeln!(svg, "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"5\" fill=\"#222222\"/>");
    }
    let _ = writeln!(svg, "</svg>");
    svg
}
