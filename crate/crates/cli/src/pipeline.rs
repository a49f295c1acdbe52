//! Dataset pipeline commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use roboground_llm::ChatClient;
use roboground_reward::judge::Judge;
use roboground_synthesis::dataset::SplitStrategy;
use roboground_synthesis::instructions::generate_all;
use roboground_synthesis::review::import_review;
use roboground_synthesis::{
    augment, build_dataset, default_profiles, export_review, ground_all, jsonl, AugmentConfig, AugmentationRecord,
    DatasetConfig, GenerationConfig, Grounder, GroundingConfig, GroundingResult, InstructionRecord, RunManifest,
};
use serde_json::json;

use crate::client;
use crate::config::Settings;

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map(|p| p.join(name)).unwrap_or_else(|| PathBuf::from(name))
}

fn show(path: &Path) -> String {
    path.display().to_string()
}

fn manifest(command: &str, settings: &Settings, client: Option<&dyn ChatClient>) -> RunManifest {
    let mut m = RunManifest::new(command).start(client.is_some_and(|c| c.is_live()));
    m.config = settings.snapshot();
    m.seed = settings.seed;
    m
}

fn model_ids(roles: &[&str], model: &str) -> BTreeMap<String, String> {
    roles.iter().map(|r| (r.to_string(), model.to_string())).collect()
}

fn grounder(settings: &Settings, client: std::sync::Arc<dyn ChatClient>, max_rounds: usize) -> Result<Grounder> {
    let config = GroundingConfig { max_rounds, jobs: settings.jobs, seed: settings.seed, ..Default::default() };
    Ok(Grounder::new(client.clone(), Judge::new(client), settings.robot()?, config))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory receiving instructions.jsonl and its sidecars.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Comma-separated profile ids; defaults to every built-in profile.
    #[arg(long, value_delimiter = ',')]
    pub profiles: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub max_retries: usize,
}

pub fn synth_instructions(settings: &Settings, args: &SynthArgs) -> Result<()> {
    let client = client::build(settings)?;
    let mut m = manifest("synth-instructions", settings, Some(client.as_ref()));
    let all = default_profiles();
    let profiles = if args.profiles.is_empty() {
        all
    } else {
        let mut chosen = Vec::new();
        for id in &args.profiles {
            match all.iter().find(|p| &p.id == id) {
                Some(p) => chosen.push(p.clone()),
                None => bail!("unknown prompt profile `{id}`"),
            }
        }
        chosen
    };
    let cfg = GenerationConfig { max_retries: args.max_retries, seed: settings.seed };
    let outputs = generate_all(client.as_ref(), &profiles, &cfg)?;

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    let mut details = Vec::new();
    for (p, out) in profiles.iter().zip(outputs) {
        details.push(json!({
            "profile": p.id,
            "template": p.template,
            "requested": p.counts,
            "accepted": out.records.len(),
            "attempts": out.attempts,
            "rejected": out.rejections.len(),
            "shortfall": out.shortfall,
        }));
        if !out.shortfall.is_empty() {
            eprintln!("warning: profile {} is short of its quota: {:?}", p.id, out.shortfall);
        }
        eprintln!("{}: {} instructions after {} request(s)", p.id, out.records.len(), out.attempts);
        records.extend(out.records);
        rejections.extend(out.rejections);
    }
    let out_path = args.out_dir.join("instructions.jsonl");
    let rej_path = args.out_dir.join("instructions.rejections.jsonl");
    jsonl::write(&out_path, &records)?;
    jsonl::write(&rej_path, &rejections)?;
    m.outputs = vec![show(&out_path), show(&rej_path)];
    m.model_ids = model_ids(&["instruction"], &client.model_id());
    m.details = json!({ "profiles": details, "total": records.len() });
    m.finish();
    m.write(&args.out_dir.join("synth-instructions.manifest.json"))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct GroundArgs {
    #[arg(long)]
    pub instructions: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub max_rounds: usize,
}

fn status_counts(results: &[GroundingResult]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in results {
        let key = serde_json::to_value(r.status).unwrap().as_str().unwrap().to_string();
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

pub fn ground(settings: &Settings, args: &GroundArgs) -> Result<()> {
    let client = client::build(settings)?;
    let mut m = manifest("ground", settings, Some(client.as_ref()));
    let records: Vec<InstructionRecord> = jsonl::read(&args.instructions)?;
    let g = grounder(settings, client.clone(), args.max_rounds)?;
    let results = ground_all(&g, &records)?;
    jsonl::write(&args.out, &results)?;

    let mut rounds: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &results {
        *rounds.entry(r.rounds_used).or_insert(0) += 1;
    }
    let counts = status_counts(&results);
    eprintln!("grounded {} task(s): {counts:?}", results.len());
    m.inputs = vec![show(&args.instructions)];
    m.outputs = vec![show(&args.out)];
    m.model_ids = model_ids(&["grounding", "judge"], &client.model_id());
    m.details = json!({ "tasks": results.len(), "status": counts, "rounds_used": rounds, "max_rounds": args.max_rounds, "robot_profile": settings.profile });
    m.finish();
    m.write(&sibling(&args.out, "ground.manifest.json"))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReviewExportArgs {
    #[arg(long)]
    pub grounded: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn review_export(settings: &Settings, args: &ReviewExportArgs) -> Result<()> {
    let mut m = manifest("review-export", settings, None);
    let results: Vec<GroundingResult> = jsonl::read(&args.grounded)?;
    let items = export_review(&results);
    jsonl::write(&args.out, &items)?;
    eprintln!("{} task(s) awaiting review", items.len());
    m.inputs = vec![show(&args.grounded)];
    m.outputs = vec![show(&args.out)];
    m.details = json!({ "exported": items.len() });
    m.write(&sibling(&args.out, "review-export.manifest.json"))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReviewImportArgs {
    #[arg(long)]
    pub grounded: PathBuf,
    /// Review file with `resolution_code` filled in.
    #[arg(long)]
    pub review: PathBuf,
    /// Updated grounding results.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn review_import(settings: &Settings, args: &ReviewImportArgs) -> Result<()> {
    let mut m = manifest("review-import", settings, None);
    let mut results: Vec<GroundingResult> = jsonl::read(&args.grounded)?;
    let text = std::fs::read_to_string(&args.review).with_context(|| format!("reading {}", args.review.display()))?;
    let outcome = import_review(&text, &mut results, settings.robot()?, Default::default())?;
    jsonl::write(&args.out, &results)?;
    eprintln!(
        "review: {} accepted, {} rejected, {} still pending",
        outcome.accepted,
        outcome.rejected,
        outcome.pending.len()
    );
    m.inputs = vec![show(&args.grounded), show(&args.review)];
    m.outputs = vec![show(&args.out)];
    m.details = json!({ "outcome": outcome, "status": status_counts(&results) });
    m.write(&sibling(&args.out, "review-import.manifest.json"))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub grounded: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub per_task: usize,
    /// Upper bound on rewrites across all tasks.
    #[arg(long, default_value_t = 395, conflicts_with = "no_cap")]
    pub cap: usize,
    #[arg(long)]
    pub no_cap: bool,
    #[arg(long, default_value_t = 3)]
    pub max_retries: usize,
    /// Ground every rewrite again and flag it unless it reproduces the original actions.
    #[arg(long)]
    pub validate: bool,
}

pub fn augment_cmd(settings: &Settings, args: &AugmentArgs) -> Result<()> {
    let client = client::build(settings)?;
    let mut m = manifest("augment", settings, Some(client.as_ref()));
    let results: Vec<GroundingResult> = jsonl::read(&args.grounded)?;
    let cfg = AugmentConfig {
        per_task: args.per_task,
        total_cap: (!args.no_cap).then_some(args.cap),
        max_retries: args.max_retries,
        jobs: settings.jobs,
        seed: settings.seed,
    };
    let validator = if args.validate { Some(grounder(settings, client.clone(), 3)?) } else { None };
    let records = augment(client.as_ref(), &results, &cfg, validator.as_ref())?;
    jsonl::write(&args.out, &records)?;
    let flagged = records.iter().filter(|r| r.flag_reason.is_some()).count();
    eprintln!("{} rewrite(s), {flagged} flagged", records.len());
    m.inputs = vec![show(&args.grounded)];
    m.outputs = vec![show(&args.out)];
    m.model_ids = model_ids(if args.validate { &["augmentation", "grounding", "judge"] } else { &["augmentation"] }, &client.model_id());
    m.details = json!({
        "rewrites": records.len(),
        "flagged": flagged,
        "per_task": args.per_task,
        "cap": cfg.total_cap,
        "validated": args.validate,
    });
    m.finish();
    m.write(&sibling(&args.out, "augment.manifest.json"))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Random,
    ByProfile,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub grounded: PathBuf,
    #[arg(long)]
    pub augmentations: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 106)]
    pub eval_size: usize,
    #[arg(long, value_enum, default_value_t = SplitArg::Random)]
    pub split: SplitArg,
}

pub fn build_dataset_cmd(settings: &Settings, args: &BuildArgs) -> Result<()> {
    let mut m = manifest("build-dataset", settings, None);
    let results: Vec<GroundingResult> = jsonl::read(&args.grounded)?;
    let augmentations: Vec<AugmentationRecord> = match &args.augmentations {
        Some(p) => jsonl::read(p)?,
        None => Vec::new(),
    };
    let cfg = DatasetConfig {
        seed: settings.seed.unwrap_or(0),
        eval_size: args.eval_size,
        strategy: match args.split {
            SplitArg::Random => SplitStrategy::Random,
            SplitArg::ByProfile => SplitStrategy::ByProfile,
        },
    };
    let out = build_dataset(&results, &augmentations, &cfg)?;
    let train = args.out_dir.join("train.jsonl");
    let eval = args.out_dir.join("eval.jsonl");
    jsonl::write(&train, &out.train)?;
    jsonl::write(&eval, &out.eval)?;
    eprintln!("dataset: {} train, {} eval", out.train.len(), out.eval.len());
    if out.summary.eval_size_deviation != 0 {
        eprintln!(
            "warning: eval split has {} rows, {} requested",
            out.summary.eval_rows, out.summary.eval_size_requested
        );
    }
    m.inputs = std::iter::once(show(&args.grounded)).chain(args.augmentations.as_deref().map(show)).collect();
    m.outputs = vec![show(&train), show(&eval)];
    let mut models = BTreeMap::new();
    for row in out.train.iter().chain(&out.eval) {
        let p = &row.provenance;
        models.insert("instruction".to_string(), p.instruction_model.clone());
        models.insert("grounding".to_string(), p.grounding_model.clone());
        models.insert("judge".to_string(), p.judge_model.clone());
        if let Some(a) = &p.augmentation_model {
            models.insert("augmentation".to_string(), a.clone());
        }
    }
    m.model_ids = models;
    m.seed = Some(cfg.seed);
    m.details = serde_json::to_value(&out.summary)?;
    m.write(&args.out_dir.join("manifest.json"))?;
    Ok(())
}
