//! `score`: evaluate prediction runs against ground-truth programs.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use roboground_core::dsl::{execute_source, extract_code, run_source};
use roboground_core::metrics::{aggregate, score_task, Grouping, MatchMode, SuiteReport};
use roboground_core::{Limits, MatchConfig, RobotProfile, TaskScore, Trajectory};
use roboground_synthesis::{jsonl, RunManifest};
use serde::Deserialize;
use serde_json::json;

use crate::config::Settings;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    PerIndex,
    Prefix,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// JSONL files of ground-truth rows (`task_id` or `id`, `code`, optional `group`).
    #[arg(long = "ground-truth", required = true, num_args = 1..)]
    pub ground_truth: Vec<PathBuf>,
    /// One entry per run: a JSONL file of `{task_id, code}` rows or a directory of `<task_id>.py` files.
    #[arg(long, required = true, num_args = 1..)]
    pub predictions: Vec<PathBuf>,
    /// JSON object mapping task id to group; overrides groups given in the ground truth.
    #[arg(long)]
    pub grouping: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Predictions are raw model replies; pull the code out of each first.
    #[arg(long)]
    pub extract: bool,
    #[arg(long, default_value_t = 0.1)]
    pub position_tolerance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub yaw_tolerance: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::PerIndex)]
    pub match_mode: ModeArg,
    /// Merge consecutive rotations before matching.
    #[arg(long)]
    pub coalesce_rotations: bool,
    /// Do not zero SR when the prediction performs extra actions.
    #[arg(long)]
    pub lenient_length: bool,
    /// Score takeoff and land transitions too.
    #[arg(long)]
    pub score_markers: bool,
}

impl ScoreArgs {
    pub fn match_config(&self) -> MatchConfig {
        let mut cfg = MatchConfig::with_tolerances(self.position_tolerance, self.yaw_tolerance);
        cfg.mode = match self.match_mode {
            ModeArg::PerIndex => MatchMode::PerIndex,
            ModeArg::Prefix => MatchMode::Prefix,
        };
        cfg.coalesce_rotations = self.coalesce_rotations;
        cfg.strict_length = !self.lenient_length;
        if self.score_markers {
            cfg.ignore_kinds.clear();
        }
        cfg
    }
}

#[derive(Debug, Deserialize)]
struct GroundTruthRow {
    #[serde(alias = "id")]
    task_id: String,
    code: Option<String>,
    #[serde(default)]
    group: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionRow {
    task_id: String,
    code: String,
}

struct Task {
    id: String,
    trajectory: Trajectory,
}

fn load_ground_truth(paths: &[PathBuf], profile: &Arc<RobotProfile>, cfg: &MatchConfig) -> Result<(Vec<Task>, Grouping)> {
    let mut tasks = Vec::new();
    let mut grouping = Grouping::default();
    let mut seen = HashSet::new();
    for path in paths {
        let rows: Vec<GroundTruthRow> = jsonl::read(path)?;
        for row in rows {
            if !seen.insert(row.task_id.clone()) {
                bail!("{}: duplicate ground-truth task `{}`", path.display(), row.task_id);
            }
            let Some(code) = row.code else {
                bail!("{}: task `{}` has no ground-truth code", path.display(), row.task_id);
            };
            let trajectory: Trajectory = run_source(&code, profile.clone(), Limits::default())
                .with_context(|| format!("{}: ground truth for `{}` does not run", path.display(), row.task_id))?;
            if cfg.scored_actions(&trajectory).is_empty() {
                bail!("{}: ground truth for `{}` performs no scored actions", path.display(), row.task_id);
            }
            if let Some(g) = row.group {
                grouping.assign(row.task_id.clone(), g);
            }
            tasks.push(Task { id: row.task_id, trajectory });
        }
    }
    if tasks.is_empty() {
        bail!("no ground-truth tasks given");
    }
    Ok((tasks, grouping))
}

fn load_grouping(path: &Path, base: &mut Grouping, known: &HashSet<&str>) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).with_context(|| format!("{}: expected a JSON object of task id to group", path.display()))?;
    for (task, group) in map {
        let Some(group) = group.as_str() else {
            bail!("{}: group of `{task}` must be a string", path.display());
        };
        if !known.contains(task.as_str()) {
            bail!("{}: unknown task `{task}`", path.display());
        }
        base.assign(task, group);
    }
    Ok(())
}

/// Predicted code per task id for one run.
fn load_run(path: &Path, known: &HashSet<&str>) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for file in entries.into_iter().filter(|p| p.extension().is_some_and(|e| e == "py")) {
            let id = file.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?.to_string();
            if !known.contains(id.as_str()) {
                bail!("{}: prediction for unknown task `{id}`", file.display());
            }
            let code = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            out.insert(id, code);
        }
    } else {
        let rows: Vec<PredictionRow> = jsonl::read(path)?;
        for row in rows {
            if !known.contains(row.task_id.as_str()) {
                bail!("{}: prediction for unknown task `{}`", path.display(), row.task_id);
            }
            if out.insert(row.task_id.clone(), row.code).is_some() {
                bail!("{}: duplicate prediction for `{}`", path.display(), row.task_id);
            }
        }
    }
    Ok(out)
}

fn score_one(task: &Task, code: Option<&String>, extract: bool, profile: &Arc<RobotProfile>, cfg: &MatchConfig) -> Result<TaskScore> {
    let gt_len = cfg.scored_actions(&task.trajectory).len();
    let Some(code) = code else {
        return Ok(TaskScore::failed(&task.id, gt_len, "no prediction")?);
    };
    let source = if extract {
        match extract_code(code) {
            Some(c) => c,
            None => return Ok(TaskScore::failed(&task.id, gt_len, "no code found in the reply")?),
        }
    } else {
        code.clone()
    };
    let (trajectory, error): (Trajectory, _) = execute_source(&source, profile.clone(), Limits::default());
    Ok(score_task(&task.id, &trajectory, error.map(|e| e.to_string()), &task.trajectory, cfg)?)
}

pub fn run(settings: &Settings, args: &ScoreArgs) -> Result<SuiteReport> {
    let mut manifest = RunManifest::new("score").start(false);
    manifest.config = settings.snapshot();
    manifest.seed = settings.seed;
    let cfg = args.match_config();
    cfg.validate()?;
    let profile = settings.robot()?;
    let (tasks, mut grouping) = load_ground_truth(&args.ground_truth, &profile, &cfg)?;
    let known: HashSet<&str> = tasks.iter().map(|t| t.id.as_str()).collect();
    if let Some(path) = &args.grouping {
        load_grouping(path, &mut grouping, &known)?;
    }
    let runs = args.predictions.iter().map(|p| load_run(p, &known)).collect::<Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(settings.jobs).build()?;
    let scores: Vec<Vec<TaskScore>> = pool.install(|| {
        runs.iter()
            .map(|run| tasks.par_iter().map(|t| score_one(t, run.get(&t.id), args.extract, &profile, &cfg)).collect())
            .collect::<Result<Vec<Vec<_>>>>()
    })?;
    let report = aggregate(&scores, &grouping);

    let json_path = args.out_dir.join("report.json");
    let text_path = args.out_dir.join("report.txt");
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)? + "\n")?;
    std::fs::write(&text_path, report.render_table())?;

    manifest.inputs = args
        .ground_truth
        .iter()
        .chain(&args.predictions)
        .chain(args.grouping.as_ref())
        .map(|p| p.display().to_string())
        .collect();
    manifest.outputs = vec![json_path.display().to_string(), text_path.display().to_string()];
    manifest.details = json!({
        "match_config": cfg,
        "tasks": tasks.len(),
        "runs": runs.len(),
        "missing_predictions": runs.iter().map(|r| tasks.len() - r.len()).collect::<Vec<_>>(),
        "sr": report.overall.sr,
        "completeness": report.overall.completeness,
    });
    manifest.write(&args.out_dir.join("score.manifest.json"))?;
    Ok(report)
}
