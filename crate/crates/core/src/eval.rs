//! Task generation over synthetic scenes, task execution and success metrics.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::instance::IvlMap;
use crate::localization::{approach_cell, ObjAttr};
use crate::mapping::dilate;
use crate::navigation::{check_success, AgentState, Heading, NavParams, NavWorld, Navigator};
use crate::navlang::{interpret, parse_program};
use crate::pipeline::build_scene_map;
use crate::raster::{Cell, Raster};
use crate::scalar::Scalar;
use crate::scene::{GroundTruth, RandomRoom, SceneSpec, SyntheticScene, FLOOR};

pub const SUBGOALS_PER_TASK: usize = 4;

/// Minimum Chebyshev distance (cells) from a task start to anything that is not floor.
pub const START_CLEARANCE_CELLS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subgoal {
    pub attr: ObjAttr,
    /// Ground-truth object id.
    pub object_id: u32,
    /// Ground-truth centroid `(row, col)`.
    pub target: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub start: Cell,
    pub heading_deg: f64,
    pub subgoals: Vec<Subgoal>,
}

impl Task {
    /// Program for subgoal `k`: visit the landmark, then stop.
    pub fn subgoal_program(&self, k: usize) -> String {
        let a = &self.subgoals[k].attr;
        let color = a
            .color
            .as_ref()
            .map_or_else(|| "None".to_string(), |c| format!("{c:?}"));
        format!("move_to_object(({:?}, {}, {color}))\nstop()\n", a.name, a.instance_idx)
    }
}

/// Objects that can be named unambiguously: the only member of their (category, color)
/// group gets ordinal 0; otherwise the 1-based left-to-right rank, provided no other group
/// member sits within a cell of the same column.
pub fn eligible_objects(gt: &GroundTruth) -> Vec<(u32, ObjAttr)> {
    let mut groups: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, o) in gt.objects.iter().enumerate() {
        groups.entry((&o.category, &o.color)).or_default().push(i);
    }
    let mut out = Vec::new();
    for ((cat, color), mut members) in groups {
        if members.len() == 1 {
            let o = &gt.objects[members[0]];
            out.push((o.id, ObjAttr::new(cat, 0, Some(color))));
            continue;
        }
        members.sort_by(|&a, &b| gt.objects[a].centroid.1.total_cmp(&gt.objects[b].centroid.1));
        for (rank, &m) in members.iter().enumerate() {
            let py = gt.objects[m].centroid.1;
            let crowded = members
                .iter()
                .any(|&o| o != m && (gt.objects[o].centroid.1 - py).abs() < 1.0);
            if !crowded {
                out.push((gt.objects[m].id, ObjAttr::new(cat, rank as u32 + 1, Some(color))));
            }
        }
    }
    out.sort_by_key(|(id, _)| *id);
    out
}

/// Floor cells at least [`START_CLEARANCE_CELLS`] from any non-floor cell.
pub fn start_cells(gt: &GroundTruth, floor_id: u32) -> Vec<Cell> {
    let (h, w) = gt.category.dims();
    let hard = Raster::from_fn(h, w, |c| gt.surface[c].is_none() || gt.category[c] != floor_id);
    let near = dilate(&hard, START_CLEARANCE_CELLS - 1);
    near.iter_cells().filter(|(_, &b)| !b).map(|(c, _)| c).collect()
}

/// `n` tasks of four distinct objects each, reproducible from `seed`.
pub fn make_tasks(scene: &SyntheticScene, n: usize, seed: u64) -> Result<Vec<Task>> {
    let gt = scene.ground_truth();
    let eligible = eligible_objects(gt);
    if eligible.len() < SUBGOALS_PER_TASK {
        return Err(Error::invalid(
            "task generation",
            format!(
                "scene has {} nameable objects, {SUBGOALS_PER_TASK} needed per task",
                eligible.len()
            ),
        ));
    }
    let floor = scene.categories().index_of(FLOOR).expect("scene vocabularies include floor");
    let starts = start_cells(gt, floor);
    if starts.is_empty() {
        return Err(Error::invalid("task generation", "no clear floor cell for a start"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let headings = [0.0, 90.0, 180.0, -90.0];
    let mut tasks = Vec::with_capacity(n);
    for _ in 0..n {
        let start = *starts.choose(&mut rng).expect("non-empty");
        let heading_deg = *headings.choose(&mut rng).expect("non-empty");
        let subgoals = eligible
            .choose_multiple(&mut rng, SUBGOALS_PER_TASK)
            .map(|(id, attr)| Subgoal {
                attr: attr.clone(),
                object_id: *id,
                target: gt.objects[*id as usize - 1].centroid,
            })
            .collect();
        tasks.push(Task {
            start,
            heading_deg,
            subgoals,
        });
    }
    Ok(tasks)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubgoalOutcome {
    pub success: bool,
    pub stop_cell: Option<Cell>,
    pub distance_m: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub start: Cell,
    pub subgoals: Vec<SubgoalOutcome>,
}

impl TaskOutcome {
    pub fn successes(&self) -> Vec<bool> {
        self.subgoals.iter().map(|s| s.success).collect()
    }
}

/// Runs each task from its start, one subgoal program at a time. A failed subgoal does
/// not abort the task; the agent continues from wherever it ended up.
pub fn run_tasks<T: Scalar>(
    map: &IvlMap<T>,
    tasks: &[Task],
    cfg: &EngineConfig,
) -> Result<Vec<TaskOutcome>> {
    let world = NavWorld::new(
        map,
        &cfg.vocabulary.floor_labels,
        cfg.thresholds.inflation_m,
        NavParams::from(&cfg.thresholds),
    )?;
    let s = map.cell_size();
    let mut out = Vec::with_capacity(tasks.len());
    for task in tasks {
        let start = if world.occupancy().is_traversable(task.start) {
            task.start
        } else {
            let r = map.dims().0.max(map.dims().1);
            approach_cell(task.start, world.occupancy(), r, None)?
        };
        let mut nav = Navigator::new(
            &world,
            AgentState {
                cell: start,
                heading: Heading::from_degrees(task.heading_deg),
            },
        )?;
        let mut subgoals = Vec::with_capacity(task.subgoals.len());
        for (k, sg) in task.subgoals.iter().enumerate() {
            let before = nav.trajectory().len();
            let program = parse_program(&task.subgoal_program(k))?;
            let error = interpret(&program, &mut nav).err().map(|e| e.to_string());
            let stop_cell = nav.trajectory().stop_cell_since(before);
            let distance_m = stop_cell.map(|(r, c)| {
                (r as f64 - sg.target.0).hypot(c as f64 - sg.target.1) * s
            });
            let success = check_success(stop_cell, sg.target, s, cfg.thresholds.success_m);
            subgoals.push(SubgoalOutcome {
                success,
                stop_cell,
                distance_m,
                error,
            });
        }
        out.push(TaskOutcome { start, subgoals });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tasks: usize,
    pub subgoals: usize,
    /// Successful subgoals.
    pub sn: usize,
    pub sr: f64,
    /// `t[k-1]`: fraction of tasks whose first `k` subgoals all succeeded.
    pub t: [f64; SUBGOALS_PER_TASK],
}

/// Metrics from per-task success flags; every task must carry four flags.
pub fn evaluate(outcomes: &[Vec<bool>]) -> Result<Metrics> {
    if let Some(bad) = outcomes.iter().find(|o| o.len() != SUBGOALS_PER_TASK) {
        return Err(Error::mismatch("subgoals per task", SUBGOALS_PER_TASK, bad.len()));
    }
    let tasks = outcomes.len();
    let sn = outcomes.iter().flatten().filter(|&&s| s).count();
    let subgoals = tasks * SUBGOALS_PER_TASK;
    let mut t = [0.0; SUBGOALS_PER_TASK];
    if tasks > 0 {
        for (k, tk) in t.iter_mut().enumerate() {
            let n = outcomes.iter().filter(|o| o[..=k].iter().all(|&s| s)).count();
            *tk = n as f64 / tasks as f64;
        }
    }
    Ok(Metrics {
        tasks,
        subgoals,
        sn,
        sr: if subgoals == 0 { 0.0 } else { sn as f64 / subgoals as f64 },
        t,
    })
}

/// Per-object attribution check: each ground-truth object is matched to the instance id
/// covering most of its footprint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceAccuracy {
    pub objects: usize,
    pub label_correct: usize,
    pub color_correct: usize,
}

impl InstanceAccuracy {
    pub fn label(&self) -> f64 {
        ratio(self.label_correct, self.objects)
    }

    pub fn color(&self) -> f64 {
        ratio(self.color_correct, self.objects)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

pub fn instance_accuracy<T: Scalar>(map: &IvlMap<T>, gt: &GroundTruth) -> InstanceAccuracy {
    let mut acc = InstanceAccuracy {
        objects: gt.objects.len(),
        ..Default::default()
    };
    for o in &gt.objects {
        let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
        for r in o.rows.0..o.rows.1 {
            for c in o.cols.0..o.cols.1 {
                let id = map.instance_ids()[(r, c)];
                if id != 0 {
                    *votes.entry(id).or_default() += 1;
                }
            }
        }
        // most votes, smallest id on ties
        let best = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)));
        if let Some(rec) = best.and_then(|(id, _)| map.record(*id)) {
            acc.label_correct += (rec.label == o.category) as usize;
            acc.color_correct += (rec.color == o.color) as usize;
        }
    }
    acc
}

/// Per-cell category label accuracy over observed room cells.
pub fn label_accuracy<T: Scalar>(map: &IvlMap<T>, scene: &SyntheticScene) -> f64 {
    scene.label_accuracy(map.category_labels().labels(), |c| map.bundle().is_observed(c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneReport {
    pub seed: u64,
    pub objects: usize,
    pub records: usize,
    pub label_accuracy: f64,
    pub instances: InstanceAccuracy,
    pub metrics: Metrics,
    pub outcomes: Vec<TaskOutcome>,
}

/// Tasks and scoring for an already built map of `scene`.
pub fn evaluate_map<T: Scalar>(
    map: &IvlMap<T>,
    scene: &SyntheticScene,
    tasks: &[Task],
    cfg: &EngineConfig,
) -> Result<SceneReport> {
    let outcomes = run_tasks(map, tasks, cfg)?;
    let flags: Vec<Vec<bool>> = outcomes.iter().map(TaskOutcome::successes).collect();
    Ok(SceneReport {
        seed: scene.spec().seed,
        objects: scene.ground_truth().objects.len(),
        records: map.records().len(),
        label_accuracy: label_accuracy(map, scene),
        instances: instance_accuracy(map, scene.ground_truth()),
        metrics: evaluate(&flags)?,
        outcomes,
    })
}

/// Seed for the task sampler of a scene.
pub fn task_seed(scene_seed: u64) -> u64 {
    scene_seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ 0x7461_736b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub seeds: Vec<u64>,
    pub tasks_per_scene: usize,
    pub room: RandomRoom,
}

impl Suite {
    /// Five noiseless 10 m rooms, ten tasks each, on a 500×500 grid with 25 frames.
    pub fn standard() -> Self {
        Self {
            seeds: (1..=5).collect(),
            tasks_per_scene: 10,
            room: RandomRoom::default(),
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.room.noise_sigma = sigma;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub scenes: Vec<SceneReport>,
    pub metrics: Metrics,
    pub elapsed_s: f64,
}

pub fn scene_for(seed: u64, suite: &Suite, cfg: &EngineConfig) -> Result<SyntheticScene> {
    let mut room = suite.room.clone();
    room.grid = cfg.grid.clone();
    SyntheticScene::new(SceneSpec::random(seed, &room)?, &cfg.vocabulary)
}

/// Generate, build, task and score every scene of the suite.
pub fn run_suite<T: Scalar>(suite: &Suite, cfg: &EngineConfig) -> Result<SuiteReport> {
    let t0 = Instant::now();
    let mut scenes = Vec::with_capacity(suite.seeds.len());
    let mut flags = Vec::new();
    for &seed in &suite.seeds {
        let scene = scene_for(seed, suite, cfg)?;
        let map = build_scene_map::<T>(&scene, cfg)?;
        let tasks = make_tasks(&scene, suite.tasks_per_scene, task_seed(seed))?;
        let report = evaluate_map(&map, &scene, &tasks, cfg)?;
        tracing::info!(seed, sr = report.metrics.sr, "scene evaluated");
        flags.extend(report.outcomes.iter().map(TaskOutcome::successes));
        scenes.push(report);
    }
    Ok(SuiteReport {
        scenes,
        metrics: evaluate(&flags)?,
        elapsed_s: t0.elapsed().as_secs_f64(),
    })
}
