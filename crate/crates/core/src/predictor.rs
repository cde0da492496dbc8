//! Multimodal trajectory decoding, K-means mode clustering, losses, and
//! evaluation metrics.

use crate::params::{mlp2, register_mlp2, Ctx, ParameterStore};
use crate::tape::Var;
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene_model::T_FUTURE;

pub const PRED_SCHEMA: &str = "sf-pred/1";
/// Miss-rate threshold, meters.
pub const MR_THRESHOLD: f64 = 2.0;

pub type Trajectory = Vec<(f64, f64)>;

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("sample count k={k} must be >= mode count K={big_k}")]
    TooFewSamples { k: usize, big_k: usize },
    #[error("trajectory length {got} does not match ground truth length {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("prediction has {got} modes, need at least k_eval={k_eval}")]
    TooFewModes { got: usize, k_eval: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionSet {
    /// K trajectories, sorted by score descending.
    pub modes: Vec<Trajectory>,
    /// Cluster member fractions; nonnegative, sum to 1.
    pub scores: Vec<f64>,
    /// K trajectories from the graph head (auxiliary output).
    pub aux_modes: Vec<Trajectory>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub l_fr: f64,
    pub l_gr: f64,
    pub l_total: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

pub fn register_predictor(store: &mut ParameterStore, seed: u64, d_model: usize, d_z: usize, big_k: usize) {
    register_mlp2(store, seed, "dec.fused", 2 * d_model + d_z, d_model, 2 * T_FUTURE);
    for j in 0..big_k {
        register_mlp2(store, seed, &format!("dec.graph.k{j}"), d_model, d_model, 2 * T_FUTURE);
    }
}

/// Lower-triangular pairwise cumulative-sum matrix: offsets -> positions.
fn cumsum_matrix() -> Array2<f64> {
    let n = 2 * T_FUTURE;
    Array2::from_shape_fn((n, n), |(r, c)| {
        if r % 2 == c % 2 && r <= c {
            1.0
        } else {
            0.0
        }
    })
}

fn decode_offsets(ctx: &mut Ctx, input: Var, path: &str, origin: (f64, f64)) -> Var {
    let offsets = mlp2(ctx, input, path);
    let cum = ctx.input(cumsum_matrix());
    let positions = ctx.tape.matmul(offsets, cum);
    let mut base = Vec::with_capacity(2 * T_FUTURE);
    for _ in 0..T_FUTURE {
        base.push(origin.0);
        base.push(origin.1);
    }
    let base = ctx.input(Array2::from_shape_vec((1, 2 * T_FUTURE), base).unwrap());
    ctx.tape.add(positions, base)
}

/// Draw k standard-normal latent vectors and decode each concat(f_fused, z)
/// into a trajectory of cumulative offsets from the target's t=0 position.
pub fn decode_modes(
    ctx: &mut Ctx,
    f_fused: Var,
    k: usize,
    big_k: usize,
    d_z: usize,
    seed: u64,
    origin: (f64, f64),
) -> Result<Vec<Var>, PredictorError> {
    if k < big_k {
        return Err(PredictorError::TooFewSamples { k, big_k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let z: Vec<f64> = (0..d_z).map(|_| standard_normal(&mut rng)).collect();
        let z = ctx.input(Array2::from_shape_vec((1, d_z), z).unwrap());
        let input = ctx.tape.concat_cols(&[f_fused, z]);
        out.push(decode_offsets(ctx, input, "dec.fused", origin));
    }
    Ok(out)
}

/// Decode g_target through K independent branches (no latent sampling).
pub fn graph_decode(ctx: &mut Ctx, g_target: Var, big_k: usize, origin: (f64, f64)) -> Vec<Var> {
    (0..big_k)
        .map(|j| decode_offsets(ctx, g_target, &format!("dec.graph.k{j}"), origin))
        .collect()
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn trajectory_value(ctx: &Ctx, v: Var) -> Trajectory {
    let row = ctx.tape.value(v);
    (0..T_FUTURE).map(|i| (row[[0, 2 * i]], row[[0, 2 * i + 1]])).collect()
}

// ---- clustering ---------------------------------------------------------------

fn flat(t: &Trajectory) -> Vec<f64> {
    t.iter().flat_map(|&(x, y)| [x, y]).collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's K-means over flattened trajectories with seeded farthest-point
/// initialization. Samples are canonically sorted first so the result is
/// invariant to input order.
pub fn cluster_modes(samples: &[Trajectory], big_k: usize, seed: u64) -> Result<(Vec<Trajectory>, Vec<f64>), PredictorError> {
    if samples.len() < big_k {
        return Err(PredictorError::TooFewSamples { k: samples.len(), big_k });
    }
    let mut pts: Vec<Vec<f64>> = samples.iter().map(flat).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = pts.len();
    let dim = pts[0].len();

    // farthest-point init from a seeded first pick
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = vec![pts[rng.gen_range(0..n)].clone()];
    while centers.len() < big_k {
        let far = (0..n)
            .max_by(|&i, &j| {
                let di = centers.iter().map(|c| sq_dist(&pts[i], c)).fold(f64::INFINITY, f64::min);
                let dj = centers.iter().map(|c| sq_dist(&pts[j], c)).fold(f64::INFINITY, f64::min);
                di.partial_cmp(&dj).unwrap()
            })
            .unwrap();
        centers.push(pts[far].clone());
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..100 {
        for (i, p) in pts.iter().enumerate() {
            assignment[i] = (0..big_k)
                .min_by(|&a, &b| sq_dist(p, &centers[a]).partial_cmp(&sq_dist(p, &centers[b])).unwrap())
                .unwrap();
        }
        let mut shift: f64 = 0.0;
        for c in 0..big_k {
            let members: Vec<&Vec<f64>> = pts
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == c)
                .map(|(p, _)| p)
                .collect();
            let new_center = if members.is_empty() {
                // reseed from the sample farthest from its center
                let far = (0..n)
                    .max_by(|&i, &j| {
                        let di = sq_dist(&pts[i], &centers[assignment[i]]);
                        let dj = sq_dist(&pts[j], &centers[assignment[j]]);
                        di.partial_cmp(&dj).unwrap()
                    })
                    .unwrap();
                pts[far].clone()
            } else {
                let mut m = vec![0.0; dim];
                for p in &members {
                    for (mi, pi) in m.iter_mut().zip(p.iter()) {
                        *mi += pi;
                    }
                }
                for mi in &mut m {
                    *mi /= members.len() as f64;
                }
                m
            };
            shift = shift.max(sq_dist(&new_center, &centers[c]).sqrt());
            centers[c] = new_center;
        }
        if shift < 1e-6 {
            break;
        }
    }

    // final assignment for scores
    for (i, p) in pts.iter().enumerate() {
        assignment[i] = (0..big_k)
            .min_by(|&a, &b| sq_dist(p, &centers[a]).partial_cmp(&sq_dist(p, &centers[b])).unwrap())
            .unwrap();
    }
    let mut counted: Vec<(Vec<f64>, f64)> = centers
        .into_iter()
        .enumerate()
        .map(|(c, center)| {
            let frac = assignment.iter().filter(|&&a| a == c).count() as f64 / n as f64;
            (center, frac)
        })
        .collect();
    counted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.partial_cmp(&b.0).unwrap()));

    let modes = counted
        .iter()
        .map(|(c, _)| (0..T_FUTURE).map(|i| (c[2 * i], c[2 * i + 1])).collect())
        .collect();
    let scores = counted.iter().map(|(_, s)| *s).collect();
    Ok((modes, scores))
}

// ---- losses -------------------------------------------------------------------

fn ade(traj: &Trajectory, gt: &Trajectory) -> f64 {
    traj.iter()
        .zip(gt)
        .map(|(p, g)| ((p.0 - g.0).powi(2) + (p.1 - g.1).powi(2)).sqrt())
        .sum::<f64>()
        / gt.len() as f64
}

/// Winner-takes-all average displacement: min over modes of the mean L2
/// distance to the ground truth.
pub fn wta_loss(trajectories: &[Trajectory], gt: &Trajectory) -> Result<f64, PredictorError> {
    for t in trajectories {
        if t.len() != gt.len() {
            return Err(PredictorError::LengthMismatch { got: t.len(), expected: gt.len() });
        }
    }
    Ok(trajectories
        .iter()
        .map(|t| ade(t, gt))
        .fold(f64::INFINITY, f64::min))
}

/// Differentiable WTA loss: builds per-mode ADE nodes and returns the one
/// with the smallest value (gradients flow only to the winning mode).
pub fn wta_loss_var(ctx: &mut Ctx, trajectories: &[Var], gt: &Trajectory) -> Var {
    let gt_row = ctx.input(Array2::from_shape_vec((1, 2 * T_FUTURE), flat(gt)).unwrap());
    // pair-summing matrix: squared coords -> per-step squared distances
    let pair = ctx.input(Array2::from_shape_fn((2 * T_FUTURE, T_FUTURE), |(r, c)| {
        if r / 2 == c {
            1.0
        } else {
            0.0
        }
    }));
    let mut best: Option<(f64, Var)> = None;
    for &t in trajectories {
        let diff = ctx.tape.sub(t, gt_row);
        let sq = ctx.tape.mul(diff, diff);
        let step_sq = ctx.tape.matmul(sq, pair);
        let step_d = ctx.tape.sqrt_eps(step_sq, 1e-12);
        let mode_ade = ctx.tape.mean_all(step_d);
        let v = ctx.tape.scalar_value(mode_ade);
        if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
            best = Some((v, mode_ade));
        }
    }
    best.expect("at least one trajectory").1
}

/// l_total = lambda1 * l_fr + lambda2 * l_gr.
pub fn combined_loss(l_fr: f64, l_gr: f64, lambda1: f64, lambda2: f64) -> LossReport {
    LossReport {
        l_fr,
        l_gr,
        l_total: lambda1 * l_fr + lambda2 * l_gr,
        lambda1,
        lambda2,
    }
}

pub fn combined_loss_var(ctx: &mut Ctx, l_fr: Var, l_gr: Var, lambda1: f64, lambda2: f64) -> Var {
    let a = ctx.tape.scale(l_fr, lambda1);
    let b = ctx.tape.scale(l_gr, lambda2);
    ctx.tape.add(a, b)
}

// ---- metrics ------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SceneMetrics {
    pub ade: f64,
    pub fde: f64,
    pub mr: f64,
}

/// min-ADE / min-FDE / miss-rate over the top k_eval modes by score.
pub fn metrics(pred: &PredictionSet, gt: &Trajectory, k_eval: usize) -> Result<SceneMetrics, PredictorError> {
    if pred.modes.len() < k_eval {
        return Err(PredictorError::TooFewModes { got: pred.modes.len(), k_eval });
    }
    let top = &pred.modes[..k_eval];
    for t in top {
        if t.len() != gt.len() {
            return Err(PredictorError::LengthMismatch { got: t.len(), expected: gt.len() });
        }
    }
    let l2 = |p: &(f64, f64), g: &(f64, f64)| ((p.0 - g.0).powi(2) + (p.1 - g.1).powi(2)).sqrt();
    let ade = top.iter().map(|t| ade(t, gt)).fold(f64::INFINITY, f64::min);
    let fde = top
        .iter()
        .map(|t| l2(t.last().unwrap(), gt.last().unwrap()))
        .fold(f64::INFINITY, f64::min);
    let max_err = top
        .iter()
        .map(|t| t.iter().zip(gt).map(|(p, g)| l2(p, g)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    Ok(SceneMetrics {
        ade,
        fde,
        mr: if max_err > MR_THRESHOLD { 1.0 } else { 0.0 },
    })
}

/// One prediction record in the sf-pred/1 output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub schema: String,
    pub scene_id: String,
    pub modes: Vec<Trajectory>,
    pub scores: Vec<f64>,
}
