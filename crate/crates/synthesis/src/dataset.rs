//! Final assembly: canonical code, provenance and a leakage-free split where
//! an original task and all of its rewrites always land on the same side.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roboground_core::dsl::{parse, pretty, strip_comments};
use serde::{Deserialize, Serialize};

use crate::augment::{AugmentationRecord, AugmentationStatus};
use crate::grounding::{GroundingResult, GroundingStatus};
use crate::SynthesisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStrategy {
    /// Seeded shuffle of task groups, sized to the requested eval count.
    #[default]
    Random,
    /// Tasks generated under an `*-eval` profile form the eval split.
    ByProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Original,
    Augmented,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingMode {
    Auto,
    Human,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub instruction_model: String,
    pub grounding_model: String,
    pub judge_model: String,
    pub augmentation_model: Option<String>,
    pub grounding: GroundingMode,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRow {
    pub id: String,
    pub instruction: String,
    pub code: String,
    pub source: Source,
    pub base_task_id: String,
    pub split: Split,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub seed: u64,
    pub eval_size: usize,
    pub strategy: SplitStrategy,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { seed: 0, eval_size: 106, strategy: SplitStrategy::Random }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leakage {
    pub shared_base_ids: Vec<String>,
    pub shared_instructions: Vec<String>,
    pub clean: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub strategy: SplitStrategy,
    pub seed: u64,
    pub base_tasks: usize,
    pub original_rows: usize,
    pub augmented_rows: usize,
    pub train_rows: usize,
    pub eval_rows: usize,
    pub eval_size_requested: usize,
    /// Achieved minus requested eval rows; non-zero only when no grouping of
    /// whole tasks reaches the request.
    pub eval_size_deviation: i64,
    pub train_base_ids: Vec<String>,
    pub eval_base_ids: Vec<String>,
    pub leakage: Leakage,
    pub dropped: Vec<Dropped>,
}

#[derive(Debug, Clone)]
pub struct DatasetOutput {
    pub train: Vec<DatasetRow>,
    pub eval: Vec<DatasetRow>,
    pub summary: DatasetSummary,
}

/// Comment-free code in canonical layout.
pub fn canonical_code(code: &str) -> Result<String, String> {
    let program = parse(&strip_comments(code)).map_err(|e| e.to_string())?;
    Ok(pretty(&program))
}

/// Picks group indices whose sizes sum as close to `target` as possible,
/// preferring earlier groups in the given order.
pub fn choose_groups(sizes: &[usize], target: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let n = sizes.len();
    // reach[i][s]: some subset of groups i.. sums to s.
    let mut reach = vec![vec![false; total + 1]; n + 1];
    reach[n][0] = true;
    for i in (0..n).rev() {
        for s in 0..=total {
            reach[i][s] = reach[i + 1][s] || (s >= sizes[i] && reach[i + 1][s - sizes[i]]);
        }
    }
    let best = (0..=total)
        .filter(|&s| reach[0][s])
        .min_by_key(|&s| (s.abs_diff(target), s > target))
        .unwrap_or(0);
    let mut remaining = best;
    let mut chosen = Vec::new();
    for i in 0..n {
        if remaining >= sizes[i] && reach[i + 1][remaining - sizes[i]] {
            chosen.push(i);
            remaining -= sizes[i];
        }
    }
    chosen
}

pub fn build_dataset(
    tasks: &[GroundingResult],
    augmentations: &[AugmentationRecord],
    cfg: &DatasetConfig,
) -> Result<DatasetOutput, SynthesisError> {
    let mut dropped = Vec::new();
    let mut bases: BTreeMap<&str, (&GroundingResult, String)> = BTreeMap::new();
    for t in tasks.iter().filter(|t| t.status.is_accepted()) {
        let Some(code) = t.code.as_deref() else {
            dropped.push(Dropped { id: t.instruction_id.clone(), reason: "accepted without code".into() });
            continue;
        };
        match canonical_code(code) {
            Ok(c) => {
                if bases.insert(t.instruction_id.as_str(), (t, c)).is_some() {
                    return Err(SynthesisError::Config(format!("duplicate task id `{}`", t.instruction_id)));
                }
            }
            Err(e) => dropped.push(Dropped { id: t.instruction_id.clone(), reason: format!("code does not parse: {e}") }),
        }
    }

    let mut rows: Vec<DatasetRow> = Vec::new();
    let provenance = |t: &GroundingResult, aug_model: Option<String>| Provenance {
        instruction_model: t.instruction_model.clone(),
        grounding_model: t.model.clone(),
        judge_model: t.judge_model.clone(),
        augmentation_model: aug_model,
        grounding: if t.status == GroundingStatus::ReviewedAccepted { GroundingMode::Human } else { GroundingMode::Auto },
        rounds: t.rounds_used,
    };
    for (id, (t, code)) in &bases {
        rows.push(DatasetRow {
            id: id.to_string(),
            instruction: t.instruction.clone(),
            code: code.clone(),
            source: Source::Original,
            base_task_id: id.to_string(),
            split: Split::Train,
            provenance: provenance(t, None),
        });
    }
    for a in augmentations {
        if a.status != AugmentationStatus::Accepted {
            dropped.push(Dropped { id: a.id.clone(), reason: a.flag_reason.clone().unwrap_or_else(|| "flagged".into()) });
            continue;
        }
        let Some((t, code)) = bases.get(a.base_task_id.as_str()) else {
            dropped.push(Dropped { id: a.id.clone(), reason: format!("base task `{}` is not in the dataset", a.base_task_id) });
            continue;
        };
        rows.push(DatasetRow {
            id: a.id.clone(),
            instruction: a.instruction.clone(),
            code: code.clone(),
            source: Source::Augmented,
            base_task_id: a.base_task_id.clone(),
            split: Split::Train,
            provenance: provenance(t, Some(a.model.clone())),
        });
    }
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = rows.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(SynthesisError::Config(format!("duplicate row id `{}`", w[0].id)));
    }

    // Tasks sharing an instruction text must land on the same side, so they
    // are merged into one group keyed by the smallest base id.
    let mut parent: BTreeMap<String, String> = bases.keys().map(|k| (k.to_string(), k.to_string())).collect();
    fn root(parent: &BTreeMap<String, String>, id: &str) -> String {
        let mut cur = id.to_string();
        while parent[&cur] != cur {
            cur = parent[&cur].clone();
        }
        cur
    }
    let mut by_text: BTreeMap<String, String> = BTreeMap::new();
    for r in &rows {
        let key = r.instruction.trim().to_lowercase();
        match by_text.get(&key) {
            None => {
                by_text.insert(key, r.base_task_id.clone());
            }
            Some(other) => {
                let (a, b) = (root(&parent, other), root(&parent, &r.base_task_id));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent.insert(hi, lo);
                }
            }
        }
    }
    let group_of: BTreeMap<String, String> = parent.keys().map(|k| (k.clone(), root(&parent, k))).collect();
    let mut group_size: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &rows {
        *group_size.entry(group_of[&r.base_task_id].as_str()).or_default() += 1;
    }
    let eval_ids: BTreeSet<String> = match cfg.strategy {
        SplitStrategy::Random => {
            let mut groups: Vec<(&str, usize)> = group_size.iter().map(|(k, v)| (*k, *v)).collect();
            groups.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
            let sizes: Vec<usize> = groups.iter().map(|g| g.1).collect();
            choose_groups(&sizes, cfg.eval_size).into_iter().map(|i| groups[i].0.to_string()).collect()
        }
        SplitStrategy::ByProfile => bases
            .iter()
            .filter(|(_, (t, _))| t.profile_id.ends_with("-eval"))
            .map(|(id, _)| group_of[*id].clone())
            .collect(),
    };
    for r in rows.iter_mut() {
        if eval_ids.contains(&group_of[&r.base_task_id]) {
            r.split = Split::Eval;
        }
    }
    let (eval, train): (Vec<DatasetRow>, Vec<DatasetRow>) = rows.into_iter().partition(|r| r.split == Split::Eval);

    let base_set = |rows: &[DatasetRow]| rows.iter().map(|r| r.base_task_id.clone()).collect::<BTreeSet<_>>();
    let text_set = |rows: &[DatasetRow]| {
        rows.iter().map(|r| r.instruction.trim().to_lowercase()).collect::<BTreeSet<_>>()
    };
    let (train_bases, eval_bases) = (base_set(&train), base_set(&eval));
    let shared_base_ids: Vec<String> = train_bases.intersection(&eval_bases).cloned().collect();
    let shared_instructions: Vec<String> = text_set(&train).intersection(&text_set(&eval)).cloned().collect();
    let leakage = Leakage {
        clean: shared_base_ids.is_empty() && shared_instructions.is_empty(),
        shared_base_ids,
        shared_instructions,
    };
    if !leakage.clean {
        tracing::warn!(?leakage, "train and eval splits overlap");
    }

    let augmented_rows = train.iter().chain(&eval).filter(|r| r.source == Source::Augmented).count();
    let summary = DatasetSummary {
        strategy: cfg.strategy,
        seed: cfg.seed,
        base_tasks: bases.len(),
        original_rows: bases.len(),
        augmented_rows,
        train_rows: train.len(),
        eval_rows: eval.len(),
        eval_size_requested: cfg.eval_size,
        eval_size_deviation: eval.len() as i64 - cfg.eval_size as i64,
        train_base_ids: train_bases.into_iter().collect(),
        eval_base_ids: eval_bases.into_iter().collect(),
        leakage,
        dropped,
    };
    Ok(DatasetOutput { train, eval, summary })
}
