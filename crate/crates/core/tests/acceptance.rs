//! Acceptance gate: ten end-to-end properties, one test (and one printed
//! pass line) each. The graph-layer oracle below is written as plain f64
//! loops against the raw parameter store, independent of the library's
//! tape-based implementation.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use socialformer::ehgt::{ehgt_layer, register_ehgt, relation_name, type_name, TypedNode};
use socialformer::harness::{
    evaluate_scenes, load_checkpoint, save_checkpoint, train_store, RunConfig,
};
use socialformer::model::{forward_scene, predict_scene, register_model, ModelDims};
use socialformer::params::{Ctx, ParameterStore};
use socialformer::predictor::{metrics, PredictionSet, MR_THRESHOLD};
use socialformer::scenario_synth::{generate_batch, generate_scene, SynthConfig, Topology};
use socialformer::scene_model::{AgentType, InteractionEdge, RelationType, T_FUTURE};

// ---- independent dense oracle -------------------------------------------------

fn gelu(x: f64) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    0.5 * x * (1.0 + (c * (x + 0.044715 * x.powi(3))).tanh())
}

fn linear_oracle(store: &ParameterStore, path: &str, x: &[f64]) -> Vec<f64> {
    let w = store.get(&format!("{path}.w")).unwrap();
    let b = store.get(&format!("{path}.b")).unwrap();
    let (rows, cols) = w.dim();
    assert_eq!(rows, x.len());
    (0..cols)
        .map(|c| b[[0, c]] + (0..rows).map(|r| x[r] * w[[r, c]]).sum::<f64>())
        .collect()
}

/// One graph-transformer layer computed with explicit scalar loops.
fn layer_oracle(
    store: &ParameterStore,
    embeddings: &[Vec<f64>],
    types: &[AgentType],
    ids: &[String],
    edges: &[InteractionEdge],
    heads: usize,
    d_model: usize,
) -> Vec<Vec<f64>> {
    let d_h = d_model / heads;
    let mut out = embeddings.to_vec();
    for (t_idx, target) in ids.iter().enumerate() {
        let in_edges: Vec<&InteractionEdge> = edges.iter().filter(|e| &e.dst_id == target).collect();
        if in_edges.is_empty() {
            continue;
        }
        let t_ty = type_name(types[t_idx]);
        let q = linear_oracle(store, &format!("ehgt.q.{t_ty}"), &embeddings[t_idx]);

        let mut h_tilde = vec![0.0; d_model];
        for head in 0..heads {
            let qi = &q[head * d_h..(head + 1) * d_h];
            let mut scores = Vec::new();
            let mut messages = Vec::new();
            for e in &in_edges {
                let s_idx = ids.iter().position(|id| id == &e.src_id).unwrap();
                let s_ty = type_name(types[s_idx]);
                let k = linear_oracle(store, &format!("ehgt.k.{s_ty}"), &embeddings[s_idx]);
                let m = linear_oracle(store, &format!("ehgt.m.{s_ty}"), &embeddings[s_idx]);
                let ki = &k[head * d_h..(head + 1) * d_h];
                let mi = &m[head * d_h..(head + 1) * d_h];
                let r = relation_name(e.relation);

                let attrs = [
                    e.distance / 50.0,
                    e.path_distance.unwrap_or(0.0) / 50.0,
                    e.edge_probability,
                ];
                let p_attr = store.get(&format!("ehgt.attr.{r}.h{head}")).unwrap();
                let diag: Vec<f64> = (0..d_h)
                    .map(|c| 1.0 + (0..3).map(|j| attrs[j] * p_attr[[j, c]]).sum::<f64>())
                    .collect();

                let w_att = store.get(&format!("ehgt.att.{r}.h{head}")).unwrap();
                let mu = store
                    .get(&format!("ehgt.mu.{s_ty}.{r}.{t_ty}"))
                    .unwrap()[[0, 0]];
                let mut score = 0.0;
                for c in 0..d_h {
                    let kw: f64 = (0..d_h).map(|b| ki[b] * w_att[[b, c]]).sum();
                    score += kw * diag[c] * qi[c];
                }
                scores.push(mu * score / (d_h as f64).sqrt());

                let w_msg = store.get(&format!("ehgt.msg.{r}.h{head}")).unwrap();
                let msg: Vec<f64> = (0..d_h)
                    .map(|c| (0..d_h).map(|b| mi[b] * diag[b] * w_msg[[b, c]]).sum())
                    .collect();
                messages.push(msg);
            }

            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            for (w, msg) in exps.iter().zip(&messages) {
                for c in 0..d_h {
                    h_tilde[head * d_h + c] += w / z * msg[c];
                }
            }
        }

        let act: Vec<f64> = h_tilde.iter().map(|&v| gelu(v)).collect();
        let mapped = linear_oracle(store, &format!("ehgt.a.{t_ty}"), &act);
        out[t_idx] = mapped
            .iter()
            .zip(&embeddings[t_idx])
            .map(|(a, b)| a + b)
            .collect();
    }
    out
}

// ---- random-graph helpers ------------------------------------------------------

struct RandomGraph {
    ids: Vec<String>,
    types: Vec<AgentType>,
    embeddings: Vec<Vec<f64>>,
    edges: Vec<InteractionEdge>,
}

fn random_graph(rng: &mut ChaCha8Rng, d_model: usize) -> RandomGraph {
    let n = rng.gen_range(2..=6);
    let ids: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let types: Vec<AgentType> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                AgentType::Human
            } else {
                AgentType::Vehicle
            }
        })
        .collect();
    let embeddings: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d_model).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let relations = [
        RelationType::Longitudinal,
        RelationType::Lateral,
        RelationType::Intersecting,
        RelationType::Pedestrian,
    ];
    let n_edges = rng.gen_range(1..=2 * n);
    let mut edges = Vec::new();
    for e in 0..n_edges {
        let src = rng.gen_range(0..n);
        let mut dst = rng.gen_range(0..n);
        if dst == src {
            dst = (dst + 1) % n;
        }
        let relation = relations[e % relations.len()];
        let distance = rng.gen_range(1.0..40.0);
        edges.push(InteractionEdge {
            src_id: ids[src].clone(),
            dst_id: ids[dst].clone(),
            relation,
            distance,
            path_distance: (relation != RelationType::Pedestrian)
                .then(|| distance * rng.gen_range(1.0..1.5)),
            edge_probability: (-distance / 20.0).exp(),
        });
    }
    RandomGraph {
        ids,
        types,
        embeddings,
        edges,
    }
}

fn run_layer(
    store: &ParameterStore,
    g: &RandomGraph,
    order: &[usize],
    heads: usize,
    d_model: usize,
) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
    let mut ctx = Ctx::new(store);
    let nodes: Vec<TypedNode> = order
        .iter()
        .map(|&i| TypedNode {
            id: g.ids[i].clone(),
            ty: g.types[i],
            h: ctx.input(Array2::from_shape_vec((1, d_model), g.embeddings[i].clone()).unwrap()),
        })
        .collect();
    let target_ids: Vec<String> = nodes.iter().map(|n| n.id.clone()).collect();
    let out = ehgt_layer(&mut ctx, &nodes, &g.edges, heads, d_model, &target_ids).unwrap();
    let values: Vec<Vec<f64>> = out
        .nodes
        .iter()
        .map(|n| ctx.tape.value(n.h).iter().cloned().collect())
        .collect();
    let weights: Vec<Vec<Vec<f64>>> = out
        .traces
        .iter()
        .map(|t| {
            t.weights
                .iter()
                .map(|&w| ctx.tape.value(w).iter().cloned().collect())
                .collect()
        })
        .collect();
    (values, weights)
}

// ---- acceptance criteria -------------------------------------------------------

#[test]
fn acceptance_01_graph_layer_matches_dense_oracle() {
    let d_model = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..200 {
        let heads = [1usize, 2, 4][trial % 3];
        let mut store = ParameterStore::new();
        register_ehgt(&mut store, trial as u64, d_model, heads);
        // exercise nonzero attribute projections too
        for r in ["longitudinal", "lateral", "intersecting", "pedestrian"] {
            for h in 0..heads {
                *store.get_mut(&format!("ehgt.attr.{r}.h{h}")).unwrap() =
                    Array2::from_shape_fn((3, d_model / heads), |_| rng.gen_range(-0.5..0.5));
            }
        }
        let g = random_graph(&mut rng, d_model);
        let order: Vec<usize> = (0..g.ids.len()).collect();
        let (got, _) = run_layer(&store, &g, &order, heads, d_model);
        let expect = layer_oracle(&store, &g.embeddings, &g.types, &g.ids, &g.edges, heads, d_model);
        for (i, (a, b)) in got.iter().zip(&expect).enumerate() {
            for (x, y) in a.iter().zip(b) {
                assert!(
                    (x - y).abs() <= 1e-6,
                    "trial {trial} node {i}: impl {x} vs oracle {y}"
                );
            }
        }
    }
    println!("PASS acceptance 1: graph layer matches the dense oracle on 200 random graphs");
}

#[test]
fn acceptance_02_attention_normalization_and_permutation_invariance() {
    let d_model = 8;
    let heads = 2;
    let mut store = ParameterStore::new();
    register_ehgt(&mut store, 7, d_model, heads);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for trial in 0..1000 {
        let g = random_graph(&mut rng, d_model);
        let n = g.ids.len();
        let identity: Vec<usize> = (0..n).collect();
        let (base, weights) = run_layer(&store, &g, &identity, heads, d_model);
        for trace in &weights {
            for head_row in trace {
                let sum: f64 = head_row.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-6, "trial {trial}: weights sum to {sum}");
                assert!(head_row.iter().all(|&w| w >= 0.0));
            }
        }
        // permute node order; results must agree per node id
        let mut perm = identity.clone();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let (permuted, _) = run_layer(&store, &g, &perm, heads, d_model);
        for (pos, &orig) in perm.iter().enumerate() {
            for (x, y) in permuted[pos].iter().zip(&base[orig]) {
                assert!((x - y).abs() <= 1e-6, "trial {trial}: permutation changed node {orig}");
            }
        }
    }
    println!("PASS acceptance 2: attention normalization and permutation invariance on 1000 graphs");
}

#[test]
fn acceptance_03_one_hop_locality_is_exact() {
    let d_model = 8;
    let heads = 2;
    let mut store = ParameterStore::new();
    register_ehgt(&mut store, 11, d_model, heads);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for trial in 0..100 {
        // chain: two-hop nodes feed one-hop nodes feed the target
        let n_one = rng.gen_range(1..=2);
        let n_two = rng.gen_range(1..=3);
        let mut g = RandomGraph {
            ids: vec!["t".to_string()],
            types: vec![AgentType::Vehicle],
            embeddings: vec![(0..d_model).map(|_| rng.gen_range(-1.0..1.0)).collect()],
            edges: Vec::new(),
        };
        for i in 0..n_one {
            g.ids.push(format!("one{i}"));
            g.types.push(AgentType::Vehicle);
            g.embeddings.push((0..d_model).map(|_| rng.gen_range(-1.0..1.0)).collect());
            g.edges.push(InteractionEdge {
                src_id: format!("one{i}"),
                dst_id: "t".to_string(),
                relation: RelationType::Longitudinal,
                distance: 10.0,
                path_distance: Some(11.0),
                edge_probability: 0.6,
            });
        }
        for j in 0..n_two {
            g.ids.push(format!("two{j}"));
            g.types.push(AgentType::Vehicle);
            g.embeddings.push((0..d_model).map(|_| rng.gen_range(-1.0..1.0)).collect());
            g.edges.push(InteractionEdge {
                src_id: format!("two{j}"),
                dst_id: format!("one{}", j % n_one),
                relation: RelationType::Intersecting,
                distance: 14.0,
                path_distance: Some(15.0),
                edge_probability: 0.5,
            });
        }
        let order: Vec<usize> = (0..g.ids.len()).collect();
        let (base, _) = run_layer(&store, &g, &order, heads, d_model);
        // perturb one two-hop node's features
        let victim = 1 + n_one + rng.gen_range(0..n_two);
        for v in g.embeddings[victim].iter_mut() {
            *v += rng.gen_range(0.1..2.0);
        }
        let (perturbed, _) = run_layer(&store, &g, &order, heads, d_model);
        assert_eq!(
            base[0].iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            perturbed[0].iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            "trial {trial}: 2-hop perturbation leaked into the target embedding"
        );
        // sanity: the perturbation does reach its 1-hop neighbor
        assert_ne!(base[1 + (victim - 1 - n_one) % n_one], perturbed[1 + (victim - 1 - n_one) % n_one]);
    }
    println!("PASS acceptance 3: 2-hop perturbations change the target embedding by exactly 0 on 100 scenes");
}

#[test]
fn acceptance_04_gradient_audit_every_parameter() {
    let dims = ModelDims {
        d_model: 8,
        heads: 2,
        ehgt_layers: 1,
        k: 4,
        big_k: 2,
        d_z: 4,
    };
    let mut store = ParameterStore::new();
    register_model(&mut store, 404, &dims);
    // nonzero attribute projections so their gradients are exercised too
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    for r in ["longitudinal", "lateral", "intersecting", "pedestrian"] {
        for h in 0..dims.heads {
            *store.get_mut(&format!("ehgt.attr.{r}.h{h}")).unwrap() =
                Array2::from_shape_fn((3, dims.d_model / dims.heads), |_| rng.gen_range(-0.3..0.3));
        }
    }
    let scene = generate_scene(&SynthConfig {
        topology: Topology::Intersection,
        n_agents: 2,
        n_pedestrians: 1,
        seed: 6,
        noise_std: 0.05,
    })
    .unwrap();

    let loss_of = |store: &ParameterStore| {
        let mut ctx = Ctx::new(store);
        let out = forward_scene(&mut ctx, &scene, &dims, 1.0, 0.5, 17).unwrap();
        ctx.tape.scalar_value(out.l_total)
    };

    let mut ctx = Ctx::new(&store);
    let out = forward_scene(&mut ctx, &scene, &dims, 1.0, 0.5, 17).unwrap();
    let grads = ctx.tape.backward(out.l_total);
    let analytic = ctx.param_grads(&grads);

    let step = 1e-5;
    let paths: Vec<String> = store.paths().map(|p| p.to_string()).collect();
    let mut checked = 0usize;
    let start = std::time::Instant::now();
    for path in &paths {
        let dim = store.get(path).unwrap().dim();
        let an = analytic
            .get(path)
            .cloned()
            .unwrap_or_else(|| Array2::zeros(dim));
        for r in 0..dim.0 {
            for c in 0..dim.1 {
                let orig = store.get(path).unwrap()[[r, c]];
                store.get_mut(path).unwrap()[[r, c]] = orig + step;
                let up = loss_of(&store);
                store.get_mut(path).unwrap()[[r, c]] = orig - step;
                let down = loss_of(&store);
                store.get_mut(path).unwrap()[[r, c]] = orig;
                let fd = (up - down) / (2.0 * step);
                let a = an[[r, c]];
                let err = (fd - a).abs();
                assert!(
                    err <= 1e-4 * fd.abs().max(a.abs()) || err <= 1e-7,
                    "{path}[{r},{c}]: finite difference {fd} vs analytic {a}"
                );
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "gradient audit took {elapsed:?}");
    println!(
        "PASS acceptance 4: {checked} parameter entries pass finite-difference checks in {:.1}s",
        elapsed.as_secs_f64()
    );
}

fn ablation_final_loss(scenes: &[socialformer::scene_model::Scene], freeze: bool) -> f64 {
    let cfg = RunConfig {
        d_model: 8,
        heads: 2,
        ehgt_layers: 1,
        k: 4,
        k_modes: 2,
        d_z: 2,
        epochs: 100,
        batch_size: 10,
        seed: 55,
        weight_decay: 0.0,
        freeze_edge_attr: freeze,
        ..RunConfig::default()
    };
    let mut store = ParameterStore::new();
    register_model(&mut store, cfg.seed, &cfg.dims());
    let logs = train_store(&cfg, &mut store, scenes, None).unwrap();
    logs.last().unwrap().l_total
}

#[test]
fn acceptance_05_edge_attribute_ablation_non_inferiority() {
    let scenes = generate_batch(
        &SynthConfig {
            topology: Topology::LaneChange,
            n_agents: 3,
            n_pedestrians: 0,
            seed: 500,
            noise_std: 0.05,
        },
        50,
    )
    .unwrap();
    let frozen = ablation_final_loss(&scenes, true);
    let learned = ablation_final_loss(&scenes, false);
    assert!(
        learned <= frozen + 1e-9,
        "learned attribute projections ended worse: {learned} vs frozen {frozen}"
    );
    println!(
        "PASS acceptance 5: learned edge attributes (loss {learned:.4}) <= frozen (loss {frozen:.4}) after 500 steps"
    );
}

#[test]
fn acceptance_06_overfit_ten_scenes() {
    let scenes = generate_batch(
        &SynthConfig {
            topology: Topology::Straight,
            n_agents: 2,
            n_pedestrians: 0,
            seed: 600,
            noise_std: 0.0,
        },
        10,
    )
    .unwrap();
    let cfg = RunConfig {
        d_model: 16,
        heads: 2,
        ehgt_layers: 1,
        k: 8,
        k_modes: 5,
        d_z: 1,
        learning_rate: 0.005,
        lr_decay: 0.9975,
        weight_decay: 0.01,
        epochs: 2000,
        batch_size: 10,
        seed: 66,
        ..RunConfig::default()
    };
    assert!(cfg.epochs * scenes.len().div_ceil(cfg.batch_size) <= 2000);
    let start = std::time::Instant::now();
    let mut store = ParameterStore::new();
    register_model(&mut store, cfg.seed, &cfg.dims());
    train_store(&cfg, &mut store, &scenes, None).unwrap();
    let report = evaluate_scenes(&store, &scenes, &cfg.dims(), cfg.seed).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "overfit run took {elapsed:?}");
    assert!(
        report.ade_5 < 0.1,
        "train ADE_5 after overfit is {:.4} m",
        report.ade_5
    );
    println!(
        "PASS acceptance 6: train ADE_5 {:.4} m < 0.1 m after {} steps in {:.0}s",
        report.ade_5,
        cfg.epochs,
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_07_loss_weight_contract() {
    let scenes = generate_batch(
        &SynthConfig {
            topology: Topology::Curve,
            n_agents: 2,
            n_pedestrians: 0,
            seed: 700,
            noise_std: 0.05,
        },
        6,
    )
    .unwrap();
    let dims = ModelDims {
        d_model: 8,
        heads: 2,
        ehgt_layers: 1,
        k: 4,
        big_k: 2,
        d_z: 2,
    };
    for &lambda2 in &[0.0, 0.2, 0.5, 1.0] {
        let cfg = RunConfig {
            d_model: 8,
            heads: 2,
            k: 4,
            k_modes: 2,
            d_z: 2,
            lambda2,
            epochs: 2,
            batch_size: 3,
            seed: 77,
            ..RunConfig::default()
        };
        let mut store = ParameterStore::new();
        register_model(&mut store, cfg.seed, &cfg.dims());
        let logs = train_store(&cfg, &mut store, &scenes, None).unwrap();
        assert_eq!(logs.len(), cfg.epochs);
        // the combination is exact per scene, to the bit
        for (i, scene) in scenes.iter().enumerate() {
            let mut ctx = Ctx::new(&store);
            let out = forward_scene(&mut ctx, scene, &dims, 1.0, lambda2, i as u64).unwrap();
            let fr = ctx.tape.scalar_value(out.l_fr);
            let gr = ctx.tape.scalar_value(out.l_gr);
            let total = ctx.tape.scalar_value(out.l_total);
            assert_eq!(
                total.to_bits(),
                (1.0 * fr + lambda2 * gr).to_bits(),
                "lambda2={lambda2}, scene {i}"
            );
        }
    }
    println!("PASS acceptance 7: lambda2 sweep {{0, 0.2, 0.5, 1}} completes with l_total = l_fr + lambda2*l_gr exactly");
}

#[test]
fn acceptance_08_metric_hand_cases() {
    assert_eq!(MR_THRESHOLD, 2.0);
    let gt: Vec<(f64, f64)> = (0..T_FUTURE).map(|i| (i as f64, 0.0)).collect();
    let offset = |d: f64| -> Vec<(f64, f64)> { gt.iter().map(|&(x, y)| (x, y + d)).collect() };
    let pred = |d: f64| PredictionSet {
        modes: vec![offset(d)],
        scores: vec![1.0],
        aux_modes: vec![],
    };
    let near = metrics(&pred(1.5), &gt, 1).unwrap();
    assert!((near.ade - 1.5).abs() <= 1e-9);
    assert!((near.fde - 1.5).abs() <= 1e-9);
    assert_eq!(near.mr, 0.0);
    let far = metrics(&pred(5.0), &gt, 1).unwrap();
    assert!((far.ade - 5.0).abs() <= 1e-9);
    assert!((far.fde - 5.0).abs() <= 1e-9);
    assert_eq!(far.mr, 1.0);
    println!("PASS acceptance 8: hand-computed ADE/FDE/MR cases match; miss threshold is exactly 2.0 m");
}

#[test]
fn acceptance_09_empty_relation_scenes_predict_finitely() {
    let dims = ModelDims {
        d_model: 8,
        heads: 2,
        ehgt_layers: 1,
        k: 6,
        big_k: 3,
        d_z: 2,
    };
    let mut store = ParameterStore::new();
    register_model(&mut store, 909, &dims);
    for seed in 0..5 {
        let scene = generate_scene(&SynthConfig {
            topology: Topology::Straight,
            n_agents: 1,
            n_pedestrians: 0,
            seed,
            noise_std: 0.05,
        })
        .unwrap();
        assert!(
            scene.interaction_graphs.iter().all(|g| g.edges.is_empty()),
            "single-agent scene should have no interaction edges"
        );
        let pred = predict_scene(&store, &scene, &dims, seed, seed).unwrap();
        assert_eq!(pred.modes.len(), dims.big_k);
        assert!(pred
            .modes
            .iter()
            .chain(&pred.aux_modes)
            .flatten()
            .all(|p| p.0.is_finite() && p.1.is_finite()));
    }
    println!("PASS acceptance 9: scenes with zero interaction edges yield finite predictions");
}

#[test]
fn acceptance_10_determinism_and_checkpoint_round_trip() {
    let scenes = generate_batch(
        &SynthConfig {
            topology: Topology::Roundabout,
            n_agents: 2,
            n_pedestrians: 0,
            seed: 1000,
            noise_std: 0.05,
        },
        6,
    )
    .unwrap();
    let cfg = RunConfig {
        d_model: 8,
        heads: 2,
        k: 4,
        k_modes: 2,
        d_z: 2,
        epochs: 3,
        batch_size: 3,
        seed: 10,
        ..RunConfig::default()
    };
    let run = || {
        let mut store = ParameterStore::new();
        register_model(&mut store, cfg.seed, &cfg.dims());
        let logs = train_store(&cfg, &mut store, &scenes, Some(&scenes)).unwrap();
        (store, logs)
    };
    let (store_a, logs_a) = run();
    let (_, logs_b) = run();
    for (a, b) in logs_a.iter().zip(&logs_b) {
        assert_eq!(a.l_total.to_bits(), b.l_total.to_bits());
        assert_eq!(a.l_fr.to_bits(), b.l_fr.to_bits());
        assert_eq!(a.l_gr.to_bits(), b.l_gr.to_bits());
        let (va, vb) = (a.val.as_ref().unwrap(), b.val.as_ref().unwrap());
        assert_eq!(va.ade_5.to_bits(), vb.ade_5.to_bits());
        assert_eq!(va.mr_10.to_bits(), vb.mr_10.to_bits());
    }

    let before = evaluate_scenes(&store_a, &scenes, &cfg.dims(), cfg.seed).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&path, &cfg, &store_a).unwrap();
    let (cfg2, store2) = load_checkpoint(&path).unwrap();
    let after = evaluate_scenes(&store2, &scenes, &cfg2.dims(), cfg2.seed).unwrap();
    assert_eq!(before.ade_5.to_bits(), after.ade_5.to_bits());
    assert_eq!(before.fde_5.to_bits(), after.fde_5.to_bits());
    assert_eq!(before.mr_5.to_bits(), after.mr_5.to_bits());
    assert_eq!(before.ade_10.to_bits(), after.ade_10.to_bits());
    println!("PASS acceptance 10: seeded training is reproducible and checkpoints round-trip evaluation bit-exactly");
}
