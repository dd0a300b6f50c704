use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mograsp::config::Config;
use mograsp::picking::PickingMode;
use mograsp::planner::Strategy;
use mograsp::sim::simulate_squeeze_traced;
use mograsp::{Grasp, ObjectGroup, Scene};
use mograsp_bench::filter_eval::{run_filter_eval, FilterEvalConfig};
use mograsp_bench::objects::{gen_object_set, ObjectLibrary};
use mograsp_bench::pick::{run_pick_bench, PickBenchConfig};
use mograsp_bench::planner_bench::{run_planner_bench, PlannerBenchConfig};
use mograsp_bench::render::render_svg;
use mograsp_bench::scenes::{gen_scene, SceneSpec};

/// Relative output paths are resolved against this directory when set.
const OUT_DIR_ENV: &str = "MOGRASP_OUT_DIR";

#[derive(Parser)]
#[command(name = "mograsp", version, about = "Multi-object push-grasp planning experiments")]
struct Cli {
    /// JSON file overriding gripper, simulator, planner and picking settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Object library JSON. Defaults to the library generated from seed 0.
    #[arg(long, global = true)]
    objects: Option<PathBuf>,
    /// Add wall-clock timing columns. Their values differ between runs.
    #[arg(long, global = true)]
    wall_clock: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the object library.
    GenObjects {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "objects.json")]
        out: PathBuf,
    },
    /// Generate grasp-class scenes as JSON files, one per scene.
    GenScenes {
        #[arg(long)]
        class: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory the scene files are written to.
        #[arg(long, default_value = "scenes")]
        out: PathBuf,
    },
    /// Compare the admissibility filters against the simulator.
    FilterEval {
        /// Scenes per grasp class.
        #[arg(long, default_value_t = 20)]
        scenes: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
        classes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use 200 scenes per class.
        #[arg(long)]
        full_scale: bool,
        #[arg(long, default_value = "filter_eval.csv")]
        out: PathBuf,
    },
    /// Compare planning strategies on the same scenes.
    PlannerBench {
        #[arg(long, value_delimiter = ',', default_value = "GP,RandPhys,RankPhys,RandFilPhys")]
        strategies: Vec<Strategy>,
        /// Scenes per grasp class.
        #[arg(long, default_value_t = 20)]
        scenes: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
        classes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use 200 scenes per class.
        #[arg(long)]
        full_scale: bool,
        #[arg(long, default_value = "planner_bench.csv")]
        out: PathBuf,
    },
    /// Clear cluttered tables with a picking policy.
    Pick {
        #[arg(long, value_enum)]
        policy: Policy,
        #[arg(long, default_value_t = 20)]
        scenes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side of the square table area, in metres.
        #[arg(long, default_value_t = 0.3)]
        table_side: f64,
        #[arg(long, default_value_t = 0.002)]
        min_separation: f64,
        #[arg(long, default_value = "pick.csv")]
        out: PathBuf,
    },
    /// Draw a scene, optionally with a grasp and its squeeze.
    Render {
        #[arg(long)]
        scene: PathBuf,
        /// Grasp pose as `x,y,theta`.
        #[arg(long, value_parser = parse_grasp, allow_hyphen_values = true)]
        grasp: Option<Grasp>,
        /// Simulate the squeeze of the whole scene and draw keyframes.
        #[arg(long, requires = "grasp")]
        trace: bool,
        #[arg(long, default_value = "scene.svg")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Single,
    Multi,
}

fn parse_grasp(s: &str) -> Result<Grasp, String> {
    let v: Vec<f64> =
        s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, theta] => Ok(Grasp::new(x, y, theta)),
        _ => Err(format!("expected x,y,theta but got {} values", v.len())),
    }
}

fn out_path(p: &Path) -> Result<PathBuf> {
    let p = match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    };
    if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(p)
}

fn write(p: &Path, text: &str) -> Result<()> {
    let p = out_path(p)?;
    std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
    eprintln!("wrote {}", p.display());
    Ok(())
}

/// `a/b.csv` becomes `a/b_summary.csv`.
fn sibling(p: &Path, suffix: &str) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    p.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

macro_rules! cells {
    ($($e:expr),* $(,)?) => { vec![$($e.to_string()),*] };
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::default(),
    };
    let library = || -> Result<ObjectLibrary> {
        match &cli.objects {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(ObjectLibrary::from_json(&text)?)
            }
            None => Ok(gen_object_set(0)),
        }
    };
    let wall = cli.wall_clock;

    match cli.command {
        Command::GenObjects { seed, out } => write(&out, &(gen_object_set(seed).to_json() + "\n"))?,

        Command::GenScenes { class, count, seed, out } => {
            let lib = library()?;
            for i in 0..count {
                let spec = SceneSpec::grasp_class(class, &cfg.gripper, seed.wrapping_add(i as u64));
                let scene = gen_scene(&spec, &lib, &cfg.gripper)?;
                write(&out.join(format!("class{class}_{i:03}.json")), &(scene.to_json() + "\n"))?;
            }
        }

        Command::FilterEval { scenes, classes, seed, full_scale, out } => {
            let fc = FilterEvalConfig {
                classes,
                scenes_per_class: if full_scale { 200 } else { scenes },
                seed,
                gripper: cfg.gripper,
                sim: cfg.sim,
                planner: cfg.planner,
            };
            let report = run_filter_eval(&fc, &library()?)?;
            let rows = report.rows.iter().map(|r| {
                cells![
                    r.class,
                    r.scene,
                    r.candidate,
                    r.x,
                    r.y,
                    r.theta,
                    format!("{:?}", r.rejected_by),
                    opt(r.h_0),
                    r.h_f_min,
                    r.total_area,
                    r.sim_success
                ]
            });
            let header = [
                "class",
                "scene",
                "candidate",
                "x",
                "y",
                "theta",
                "rejected_by",
                "h_0",
                "h_f_min",
                "total_area",
                "sim_success",
            ];
            write(&out, &csv_text(&header, rows)?)?;
            let summary = report.classes.iter().chain([&report.total]).map(|c| {
                cells![
                    if c.class == 0 { "all".to_string() } else { c.class.to_string() },
                    c.scenes,
                    c.candidates,
                    c.sim_successes,
                    c.true_negatives,
                    c.predicted_by_area,
                    c.predicted_by_diameter,
                    c.predicted_by_both,
                    c.false_negatives,
                    c.coverage(),
                    c.area_share(),
                    c.diameter_share()
                ]
            });
            let header = [
                "class",
                "scenes",
                "candidates",
                "sim_successes",
                "true_negatives",
                "by_area",
                "by_diameter",
                "by_both",
                "false_negatives",
                "coverage",
                "area_share",
                "diameter_share",
            ];
            let text = csv_text(&header, summary)?;
            print!("{text}");
            write(&sibling(&out, "summary"), &text)?;
        }

        Command::PlannerBench { strategies, scenes, classes, seed, full_scale, out } => {
            if strategies.is_empty() {
                bail!("no strategies given");
            }
            let pc = PlannerBenchConfig {
                classes,
                scenes_per_class: if full_scale { 200 } else { scenes },
                seed,
                strategies,
                gripper: cfg.gripper,
                sim: cfg.sim,
                planner: cfg.planner,
            };
            let report = run_planner_bench(&pc, &library()?)?;
            let mut header = vec![
                "class",
                "scene",
                "strategy",
                "found",
                "tested_in_sim",
                "filtered_out",
                "candidates",
                "sim_iterations",
            ];
            if wall {
                header.push("planning_time");
            }
            let rows = report.rows.iter().map(|r| {
                let mut c = cells![
                    r.class,
                    r.scene,
                    r.strategy,
                    r.found,
                    r.tested_in_sim,
                    r.filtered_out,
                    r.candidates,
                    r.sim_iterations
                ];
                if wall {
                    c.push(r.planning_time.to_string());
                }
                c
            });
            write(&out, &csv_text(&header, rows)?)?;

            let mut header = vec![
                "strategy",
                "scenes",
                "found",
                "tested_mean",
                "tested_ci95",
                "tested_when_found_mean",
                "sim_iterations_mean",
                "sim_iterations_ci95",
            ];
            if wall {
                header.extend(["planning_time_mean", "planning_time_ci95"]);
            }
            let summary = report.strategies.iter().map(|s| {
                let mut c = cells![
                    s.strategy,
                    s.scenes,
                    s.found,
                    s.tested.mean,
                    s.tested.ci95,
                    s.tested_when_found.mean,
                    s.sim_iterations.mean,
                    s.sim_iterations.ci95
                ];
                if wall {
                    c.extend(cells![s.planning_time.mean, s.planning_time.ci95]);
                }
                c
            });
            let text = csv_text(&header, summary)?;
            print!("{text}");
            write(&sibling(&out, "summary"), &text)?;
        }

        Command::Pick { policy, scenes, seed, table_side, min_separation, out } => {
            let mode = match policy {
                Policy::Single => PickingMode::SingleObject,
                Policy::Multi => PickingMode::MultiObject,
            };
            let pc = PickBenchConfig {
                scenes,
                seed,
                table_side,
                min_separation,
                modes: vec![mode],
                policy: cfg.picking,
                gripper: cfg.gripper,
                sim: cfg.sim,
                planner: cfg.planner,
            };
            let rows = run_pick_bench(&pc, &library()?)?;
            let mut header = vec![
                "scene",
                "mode",
                "objects_total",
                "objects_picked",
                "grasp_attempts",
                "successful_attempts",
                "success_rate",
                "percent_picked",
                "actions_used",
                "simulated_time",
                "mean_group_size",
                "stop_reason",
            ];
            if wall {
                header.push("planning_time");
            }
            let text = csv_text(
                &header,
                rows.iter().map(|r| {
                    let mut c = cells![
                        r.scene,
                        format!("{:?}", r.mode),
                        r.objects_total,
                        r.objects_picked,
                        r.grasp_attempts,
                        r.successful_attempts,
                        r.success_rate,
                        r.percent_picked,
                        r.actions_used,
                        r.simulated_time,
                        r.mean_group_size,
                        format!("{:?}", r.stop_reason)
                    ];
                    if wall {
                        c.push(r.planning_time.to_string());
                    }
                    c
                }),
            )?;
            write(&out, &text)?;
        }

        Command::Render { scene, grasp, trace, out } => {
            let s = Scene::load(&scene).with_context(|| format!("loading {}", scene.display()))?;
            let g = grasp;
            let mut frames = Vec::new();
            if let (true, Some(g)) = (trace, &g) {
                let group = ObjectGroup::all(&s)?;
                let outcome = simulate_squeeze_traced(&s, &group, g, &cfg.gripper, &cfg.sim, Some(&mut frames))?;
                eprintln!(
                    "squeeze {}: final opening {:.6} m, grasped {:?}",
                    if outcome.success { "succeeded" } else { "failed" },
                    outcome.final_opening,
                    outcome.grasped
                );
            }
            let svg = render_svg(&s, g.as_ref().map(|g| (g, &cfg.gripper)), trace.then_some(frames.as_slice()));
            write(&out, &svg)?;
        }
    }
    Ok(())
}
