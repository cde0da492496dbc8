use clap::{Parser, Subcommand};
use socialformer::harness::{evaluate_file, load_checkpoint, save_checkpoint, train, RunConfig};
use socialformer::model::predict_scene;
use socialformer::plot::render_scene;
use socialformer::predictor::{PredictionRecord, PRED_SCHEMA};
use socialformer::scenario_synth::{generate_batch, SynthConfig, Topology};
use socialformer::scene_model::{read_scene_file, write_scene_file};
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "socialformer", about = "Trajectory prediction on heterogeneous traffic scenes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic scenes
    Synth {
        /// straight | curve | lane_change | intersection | roundabout
        #[arg(long)]
        topology: Topology,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        noise_std: f64,
        #[arg(long, default_value_t = 3)]
        agents: usize,
        #[arg(long, default_value_t = 0)]
        pedestrians: usize,
    },
    /// Train a model from a flat key=value config file
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint on a scene file
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        scenes: PathBuf,
        /// modes to score (5 or 10)
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Write per-scene mode predictions
    Predict {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render one scene and its prediction to SVG
    Plot {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        scenes: PathBuf,
        #[arg(long)]
        scene_id: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::Synth {
            topology,
            count,
            seed,
            out,
            noise_std,
            agents,
            pedestrians,
        } => {
            let cfg = SynthConfig {
                topology,
                n_agents: agents,
                n_pedestrians: pedestrians,
                seed,
                noise_std,
            };
            let scenes = generate_batch(&cfg, count)?;
            write_scene_file(&out, &scenes)?;
            eprintln!("wrote {} scenes to {}", scenes.len(), out.display());
        }
        Command::Train { config, out } => {
            let cfg = RunConfig::parse(&std::fs::read_to_string(&config)?)?;
            let (store, logs) = train(&cfg)?;
            save_checkpoint(&out, &cfg, &store)?;
            if let Some(last) = logs.last() {
                eprintln!("final l_total {:.4}; checkpoint at {}", last.l_total, out.display());
            }
        }
        Command::Eval { ckpt, scenes, k } => {
            if k != 5 && k != 10 {
                return Err("--k must be 5 or 10".into());
            }
            let (cfg, store) = load_checkpoint(&ckpt)?;
            let report = evaluate_file(&store, &scenes, &cfg.dims(), cfg.seed)?;
            let (ade, fde, mr) = if k == 5 {
                (report.ade_5, report.fde_5, report.mr_5)
            } else {
                (report.ade_10, report.fde_10, report.mr_10)
            };
            println!(
                "scenes {}  ADE_{k} {ade:.4}  FDE_{k} {fde:.4}  MR_{k} {mr:.4}  empty-relation scenes {}",
                report.n_scenes, report.n_empty_relation_scenes
            );
        }
        Command::Predict { ckpt, scenes, out } => {
            let (cfg, store) = load_checkpoint(&ckpt)?;
            let dims = cfg.dims();
            let scene_list = read_scene_file(&scenes)?;
            let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
            for (i, scene) in scene_list.iter().enumerate() {
                let pred = predict_scene(&store, scene, &dims, cfg.seed.wrapping_add(i as u64), cfg.seed)?;
                let record = PredictionRecord {
                    schema: PRED_SCHEMA.to_string(),
                    scene_id: scene.scene_id.clone(),
                    modes: pred.modes,
                    scores: pred.scores,
                };
                serde_json::to_writer(&mut f, &record)?;
                f.write_all(b"\n")?;
            }
            eprintln!("wrote {} predictions to {}", scene_list.len(), out.display());
        }
        Command::Plot {
            ckpt,
            scenes,
            scene_id,
            out,
        } => {
            let (cfg, store) = load_checkpoint(&ckpt)?;
            let scene_list = read_scene_file(&scenes)?;
            let scene = scene_list
                .iter()
                .find(|s| s.scene_id == scene_id)
                .ok_or_else(|| format!("scene id {scene_id} not found in {}", scenes.display()))?;
            let pred = predict_scene(&store, scene, &cfg.dims(), cfg.seed, cfg.seed)?;
            std::fs::write(&out, render_scene(scene, &pred))?;
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
