//! `ivlmap` command line: synthetic datasets, map builds, queries, navigation, evaluation
//! and figures. Exit status is 0 on success, 1 on a domain error and 2 on a usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ivlmap::eval::{run_suite, Suite};
use ivlmap::io::archive::sha256_hex;
use ivlmap::io::{write_scene_dataset, Dataset, MapArchive, Provenance};
use ivlmap::localization::{approach_cell, resolve, LocalizeParams, ObjAttr, Ordering};
use ivlmap::navigation::{AgentState, Heading, NavParams, NavWorld, Navigator, Trajectory};
use ivlmap::navlang::translator::TranslationSource;
use ivlmap::navlang::{
    external_translate, fallback_program, interpret, parse_program, pretty_print, Program,
    TranslatorConfig,
};
use ivlmap::mapping::FrameStats;
use ivlmap::pipeline::build_map;
use ivlmap::render;
use ivlmap::scene::{tables_in_a_row, CameraSpec, RandomRoom, SceneSpec, SyntheticScene};
use ivlmap::{Cell, ElementType, EngineConfig, Scalar};

#[derive(Parser)]
#[command(name = "ivlmap", version, about = "Instance-aware language maps for navigation")]
struct Cli {
    /// Engine configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene dataset
    Synth(SynthArgs),
    /// Build a map archive from a dataset
    Build(BuildArgs),
    /// Resolve an object reference against a map
    Query(QueryArgs),
    /// Run a program or a command on a map
    Navigate(NavigateArgs),
    /// Run the synthetic task suite
    Eval(EvalArgs),
    /// Write map figures as PNG
    ExportFig(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneKind {
    /// Four same-colored tables in a row, a red sofa and a black chair
    Tables,
    /// Randomly furnished room
    Random,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    scene: SceneKind,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Table color for the `tables` scene
    #[arg(long, default_value = "yellow")]
    color: String,
    /// Embedding noise standard deviation
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    frames: Option<usize>,
    /// Square image side in pixels
    #[arg(long)]
    image_size: Option<usize>,
    /// Focal length in pixels
    #[arg(long)]
    focal: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Args)]
struct BuildArgs {
    /// Dataset manifest
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,
    /// Output archive
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "f32")]
    precision: Precision,
}

#[derive(Args)]
struct QueryArgs {
    /// Map archive
    #[arg(long, value_name = "FILE")]
    map: PathBuf,
    /// Object category
    name: String,
    /// 0 for the nearest, k for the k-th in the chosen ordering
    #[arg(default_value_t = 0)]
    index: u32,
    /// Object color
    color: Option<String>,
    /// Reference cell `row,col`; defaults to the map center
    #[arg(long, value_parser = parse_cell)]
    from: Option<Cell>,
    #[arg(long, default_value = "left-to-right", value_parser = parse_ordering)]
    ordering: Ordering,
}

#[derive(Args)]
struct NavigateArgs {
    #[arg(long, value_name = "FILE")]
    map: PathBuf,
    /// Program file
    #[arg(long, value_name = "FILE", conflicts_with = "command", required_unless_present = "command")]
    program: Option<PathBuf>,
    /// Natural-language command, translated externally or by landmark extraction
    #[arg(long)]
    command: Option<String>,
    /// External translator `host:port`
    #[arg(long, requires = "command")]
    translator: Option<String>,
    /// Start cell `row,col`; defaults to the free cell nearest the map center
    #[arg(long, value_parser = parse_cell)]
    start: Option<Cell>,
    /// Start heading in degrees, 0 = north (decreasing row), 90 = east
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    heading: f64,
    /// Trajectory JSON output
    #[arg(long, value_name = "FILE")]
    trajectory: Option<PathBuf>,
    /// Trajectory overlay PNG output
    #[arg(long, value_name = "FILE")]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Scene seeds, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    tasks: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, value_enum, default_value = "f32")]
    precision: Precision,
    /// Full report as JSON
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, value_name = "FILE")]
    map: PathBuf,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Trajectory JSON from `navigate --trajectory`
    #[arg(long, value_name = "FILE")]
    trajectory: Option<PathBuf>,
}

fn parse_cell(s: &str) -> std::result::Result<Cell, String> {
    let (r, c) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `row,col`, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((num(r)?, num(c)?))
}

fn parse_ordering(s: &str) -> std::result::Result<Ordering, String> {
    s.parse().map_err(|_| format!("expected `nearest` or `left-to-right`, got `{s}`"))
}

/// stdout write that surfaces a closed pipe as an error instead of a panic
macro_rules! out {
    ($($t:tt)*) => {
        writeln!(std::io::stdout().lock(), $($t)*)?
    };
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            // library errors already embed their io cause in the message
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => EngineConfig::load(p)?,
        None => EngineConfig::default(),
    };
    match cli.command {
        Command::Synth(a) => synth(&cfg, a),
        Command::Build(a) => build(&cfg, a),
        Command::Query(a) => match load_any(&a.map)? {
            AnyArchive::F32(m) => query(&m, &a),
            AnyArchive::F64(m) => query(&m, &a),
        },
        Command::Navigate(a) => match load_any(&a.map)? {
            AnyArchive::F32(m) => navigate(&m, &a),
            AnyArchive::F64(m) => navigate(&m, &a),
        },
        Command::Eval(a) => eval(&cfg, a),
        Command::ExportFig(a) => match load_any(&a.map)? {
            AnyArchive::F32(m) => export(&m, &a),
            AnyArchive::F64(m) => export(&m, &a),
        },
    }
}

fn synth(cfg: &EngineConfig, a: SynthArgs) -> Result<()> {
    let mut camera = CameraSpec::default();
    if let Some(n) = a.frames {
        camera.frames = n;
    }
    if let Some(n) = a.image_size {
        camera.width = n;
        camera.height = n;
    }
    if let Some(f) = a.focal {
        camera.focal_px = f;
    }
    let mut spec = match a.scene {
        SceneKind::Tables => tables_in_a_row(a.seed, &a.color),
        SceneKind::Random => SceneSpec::random(
            a.seed,
            &RandomRoom {
                grid: cfg.grid.clone(),
                ..RandomRoom::default()
            },
        )?,
    };
    spec.grid = cfg.grid.clone();
    spec.noise_sigma = a.noise;
    spec.camera = camera;
    let scene = SyntheticScene::new(spec, &cfg.vocabulary)?;
    let manifest = write_scene_dataset(&scene, &a.out, None)?;
    out!(
        "{}",
        json!({
            "manifest": manifest,
            "frames": scene.frame_count(),
            "objects": scene.ground_truth().objects.len(),
        })
    );
    Ok(())
}

fn build(cfg: &EngineConfig, a: BuildArgs) -> Result<()> {
    let ds = Dataset::load(&a.dataset)?;
    let cfg = ds.engine_config(cfg)?;
    let masks = ds.masks((cfg.grid.rows, cfg.grid.cols))?;
    let hash = ds.content_hash()?;
    let (bytes, stats, records) = match a.precision {
        Precision::F32 => build_archive::<f32>(&ds, &cfg, masks, hash)?,
        Precision::F64 => build_archive::<f64>(&ds, &cfg, masks, hash)?,
    };
    ivlmap::io::write_bytes(&a.out, &bytes)?;
    out!(
        "{}",
        json!({
            "archive": a.out,
            "sha256": sha256_hex(&bytes),
            "records": records,
            "frames": stats,
        })
    );
    Ok(())
}

fn build_archive<T: Scalar>(
    ds: &Dataset,
    cfg: &EngineConfig,
    masks: Option<ivlmap::instance::MaskSet>,
    hash: String,
) -> Result<(Vec<u8>, FrameStats, usize)> {
    let (map, stats) = build_map::<T>(
        ds,
        &ds.category_embeddings()?,
        &ds.color_embeddings()?,
        cfg,
        masks,
    )?;
    let records = map.records().len();
    let archive = MapArchive {
        map,
        config: cfg.clone(),
        provenance: Provenance::new(hash, cfg),
    };
    Ok((archive.encode(), stats, records))
}

enum AnyArchive {
    F32(MapArchive<f32>),
    F64(MapArchive<f64>),
}

/// Loads an archive in whichever precision it was built.
fn load_any(path: &Path) -> Result<AnyArchive> {
    let bytes = ivlmap::io::read_bytes(path)?;
    let code = bytes.get(12..16).map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")));
    Ok(match code.and_then(ElementType::from_code) {
        Some(ElementType::F64) => AnyArchive::F64(MapArchive::decode(&bytes, path)?),
        _ => AnyArchive::F32(MapArchive::decode(&bytes, path)?),
    })
}

fn world<'m, T: Scalar>(archive: &'m MapArchive<T>) -> Result<NavWorld<'m, T>> {
    let cfg = &archive.config;
    Ok(NavWorld::new(
        &archive.map,
        &cfg.vocabulary.floor_labels,
        cfg.thresholds.inflation_m,
        NavParams::from(&cfg.thresholds),
    )?)
}

fn center<T: Scalar>(archive: &MapArchive<T>) -> Cell {
    let (h, w) = archive.map.dims();
    (h / 2, w / 2)
}

fn query<T: Scalar>(archive: &MapArchive<T>, a: &QueryArgs) -> Result<()> {
    let world = world(archive)?;
    let from = a.from.unwrap_or_else(|| center(archive));
    let (h, w) = archive.map.dims();
    if from.0 >= h || from.1 >= w {
        bail!("--from {},{} is outside the {h}x{w} map", from.0, from.1);
    }
    let attr = ObjAttr::new(&a.name, a.index, a.color.as_deref());
    let params = LocalizeParams {
        approach_radius_m: archive.config.thresholds.approach_radius_m,
        same_component: true,
    };
    let found = resolve(
        &attr,
        &archive.map,
        world.occupancy(),
        Some(world.components()),
        from,
        a.ordering,
        &params,
    )
    .with_context(|| format!("query {attr} in {}", a.map.display()))?;
    let record = archive.map.record(found.label_id).expect("resolved record exists");
    out!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "query": attr.to_string(),
            "ordering": format!("{:?}", a.ordering),
            "label_id": found.label_id,
            "label": found.label,
            "color": found.color,
            "area": record.area,
            "score": record.score,
            "num_of_same_class": record.num_of_same_class,
            "bbox": found.bbox,
            "centroid": [found.centroid.0, found.centroid.1],
            "goal_cell": [found.goal_cell.0, found.goal_cell.1],
            "approach_cell": [found.approach_cell.0, found.approach_cell.1],
        }))?
    );
    Ok(())
}

fn navigate<T: Scalar>(archive: &MapArchive<T>, a: &NavigateArgs) -> Result<()> {
    let world = world(archive)?;
    let map = &archive.map;
    let (program, source, warnings): (Program, &str, Vec<String>) = match (&a.program, &a.command) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading program {}", path.display()))?;
            let p = parse_program(&text).with_context(|| format!("in {}", path.display()))?;
            (p, "program", Vec::new())
        }
        (None, Some(cmd)) => match &a.translator {
            Some(addr) => {
                let t = external_translate(cmd, &TranslatorConfig::new(addr), map.categories(), map.colors());
                let src = match t.source {
                    TranslationSource::Translator => "translator",
                    TranslationSource::Fallback => "fallback",
                };
                (t.program, src, t.warnings)
            }
            None => {
                let (p, w) = fallback_program(cmd, map.categories(), map.colors());
                (p, "fallback", w)
            }
        },
        (None, None) => unreachable!("clap requires --program or --command"),
    };
    if program.statements.is_empty() {
        bail!("--command names no known object: {}", warnings.join("; "));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let start = match a.start {
        Some(c) => {
            let (h, w) = map.dims();
            if c.0 >= h || c.1 >= w {
                bail!("--start {},{} is outside the {h}x{w} map", c.0, c.1);
            }
            if !world.occupancy().is_traversable(c) {
                bail!("--start {},{} is not a free cell", c.0, c.1);
            }
            c
        }
        None => {
            let (h, w) = map.dims();
            approach_cell(center(archive), world.occupancy(), h.max(w), None)
                .context("map has no free cell to start from")?
        }
    };
    let mut nav = Navigator::new(
        &world,
        AgentState {
            cell: start,
            heading: Heading::from_degrees(a.heading),
        },
    )?;
    let result = interpret(&program, &mut nav);
    let traj = nav.into_trajectory();
    if let Some(p) = &a.trajectory {
        let text = serde_json::to_vec_pretty(&traj)?;
        ivlmap::io::write_bytes(p, &text)?;
    }
    if let Some(p) = &a.overlay {
        render::save_png(p, &render::trajectory_image(map, &traj))?;
    }
    let log = result?;
    let last = traj.steps.last().expect("trajectory has a start step");
    let stops: Vec<[usize; 2]> = traj
        .steps
        .iter()
        .filter(|s| s.event == ivlmap::navigation::Event::Stop)
        .map(|s| [s.cell.0, s.cell.1])
        .collect();
    out!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "source": source,
            "program": pretty_print(&program),
            "warnings": warnings,
            "start": [start.0, start.1],
            "end": [last.cell.0, last.cell.1],
            "heading_deg": last.heading_deg,
            "steps": traj.len(),
            "stops": stops,
            "calls": log,
        }))?
    );
    Ok(())
}

fn eval(cfg: &EngineConfig, a: EvalArgs) -> Result<()> {
    if a.seeds.is_empty() {
        bail!("--seeds needs at least one seed");
    }
    let mut suite = Suite::standard().with_noise(a.noise);
    suite.seeds = a.seeds;
    suite.tasks_per_scene = a.tasks;
    let report = match a.precision {
        Precision::F32 => run_suite::<f32>(&suite, cfg)?,
        Precision::F64 => run_suite::<f64>(&suite, cfg)?,
    };
    out!("{:>6} {:>8} {:>8} {:>8} {:>6} {:>6} {:>6} {:>6} {:>6}", "seed", "objects", "labels", "pixels", "SR", "T1", "T2", "T3", "T4");
    let row = |name: String, objects: String, labels: String, pixels: String, m: &ivlmap::eval::Metrics| -> Result<()> {
        out!(
            "{name:>6} {objects:>8} {labels:>8} {pixels:>8} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3}",
            m.sr, m.t[0], m.t[1], m.t[2], m.t[3]
        );
        Ok(())
    };
    for s in &report.scenes {
        row(
            s.seed.to_string(),
            s.objects.to_string(),
            format!("{:.3}", s.instances.label()),
            format!("{:.4}", s.label_accuracy),
            &s.metrics,
        )?;
    }
    row("all".into(), String::new(), String::new(), String::new(), &report.metrics)?;
    out!(
        "tasks {} subgoals {} successes {} in {:.1} s",
        report.metrics.tasks, report.metrics.subgoals, report.metrics.sn, report.elapsed_s
    );
    if let Some(p) = &a.json {
        ivlmap::io::write_bytes(p, &serde_json::to_vec_pretty(&report)?)?;
    }
    Ok(())
}

fn export<T: Scalar>(archive: &MapArchive<T>, a: &ExportArgs) -> Result<()> {
    let map = &archive.map;
    let mut written = vec![
        (a.out.join("bev.png"), render::bev_image(map)),
        (a.out.join("semantic.png"), render::semantic_image(map)),
        (a.out.join("instances.png"), render::instance_image(map)),
    ];
    if let Some(p) = &a.trajectory {
        let bytes = ivlmap::io::read_bytes(p)?;
        let traj: Trajectory = serde_json::from_slice(&bytes)
            .map_err(|e| anyhow!("{}: not a trajectory: {e}", p.display()))?;
        let (h, w) = map.dims();
        if let Some(s) = traj.steps.iter().find(|s| s.cell.0 >= h || s.cell.1 >= w) {
            bail!("{}: cell {:?} is outside the {h}x{w} map", p.display(), s.cell);
        }
        written.push((a.out.join("trajectory.png"), render::trajectory_image(map, &traj)));
    }
    for (p, img) in &written {
        render::save_png(p, img)?;
    }
    let paths: Vec<_> = written.iter().map(|(p, _)| p).collect();
    out!("{}", json!({ "written": paths }));
    Ok(())
}
