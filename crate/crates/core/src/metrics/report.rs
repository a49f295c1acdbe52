use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize, Serializer};

use super::TaskScore;

/// Name of the group collecting tasks the grouping does not mention.
pub const UNGROUPED: &str = "ungrouped";

/// Task → group assignment with a declared group order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub order: Vec<String>,
    pub assignment: BTreeMap<String, String>,
}

impl Grouping {
    /// Groups are ordered by first appearance.
    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut g = Grouping::default();
        for (task, group) in pairs {
            g.assign(task, group);
        }
        g
    }

    pub fn declare(&mut self, group: impl Into<String>) {
        let group = group.into();
        if !self.order.contains(&group) {
            self.order.push(group);
        }
    }

    pub fn assign(&mut self, task: impl Into<String>, group: impl Into<String>) {
        let group = group.into();
        self.declare(group.clone());
        self.assignment.insert(task.into(), group);
    }

    pub fn group_of(&self, task: &str) -> Option<&str> {
        self.assignment.get(task).map(String::as_str)
    }
}

fn round4<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64((v * 10_000.0).round() / 10_000.0)
}

fn round4_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| (x * 10_000.0).round() / 10_000.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task_id: String,
    pub group: String,
    pub runs: usize,
    #[serde(serialize_with = "round4")]
    pub sr: f64,
    #[serde(serialize_with = "round4")]
    pub completeness: f64,
    pub sr_per_run: Vec<u8>,
    #[serde(serialize_with = "round4_vec")]
    pub completeness_per_run: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub tasks: usize,
    #[serde(serialize_with = "round4")]
    pub sr: f64,
    #[serde(serialize_with = "round4")]
    pub completeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub run_count: usize,
    pub groups: Vec<GroupSummary>,
    pub overall: GroupSummary,
    pub tasks: Vec<TaskRow>,
    #[serde(default)]
    pub notes: Vec<String>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Averages scores over runs per task, then over tasks per group.
///
/// `runs[r]` holds the task scores of run `r`. Tasks keep the order in which
/// they first appear. Tasks without a group land in [`UNGROUPED`]; declared
/// groups without tasks are omitted and noted.
pub fn aggregate(runs: &[Vec<TaskScore>], grouping: &Grouping) -> SuiteReport {
    let mut order: Vec<&str> = Vec::new();
    let mut per_task: HashMap<&str, Vec<&TaskScore>> = HashMap::new();
    for run in runs {
        for score in run {
            let entry = per_task.entry(score.task_id.as_str()).or_default();
            if entry.is_empty() {
                order.push(score.task_id.as_str());
            }
            entry.push(score);
        }
    }

    let mut notes = Vec::new();
    let tasks: Vec<TaskRow> = order
        .iter()
        .map(|id| {
            let scores = &per_task[id];
            let group = match grouping.group_of(id) {
                Some(g) => g.to_string(),
                None => UNGROUPED.to_string(),
            };
            TaskRow {
                task_id: id.to_string(),
                group,
                runs: scores.len(),
                sr: mean(scores.iter().map(|s| f64::from(s.sr))),
                completeness: mean(scores.iter().map(|s| s.completeness)),
                sr_per_run: scores.iter().map(|s| s.sr).collect(),
                completeness_per_run: scores.iter().map(|s| s.completeness).collect(),
                errors: scores.iter().filter_map(|s| s.error.clone()).collect(),
            }
        })
        .collect();

    let ungrouped = tasks.iter().filter(|t| t.group == UNGROUPED).count();
    if ungrouped > 0 && !grouping.order.iter().any(|g| g == UNGROUPED) {
        notes.push(format!("{ungrouped} task(s) not present in the grouping were reported as `{UNGROUPED}`"));
    }
    let mut group_names: Vec<String> = grouping.order.clone();
    if ungrouped > 0 && !group_names.iter().any(|g| g == UNGROUPED) {
        group_names.push(UNGROUPED.to_string());
    }

    let summarize = |name: &str, rows: Vec<&TaskRow>| GroupSummary {
        group: name.to_string(),
        tasks: rows.len(),
        sr: mean(rows.iter().map(|t| t.sr)),
        completeness: mean(rows.iter().map(|t| t.completeness)),
    };
    let mut groups = Vec::new();
    for name in &group_names {
        let rows: Vec<&TaskRow> = tasks.iter().filter(|t| &t.group == name).collect();
        if rows.is_empty() {
            notes.push(format!("group `{name}` has no scored tasks and was omitted"));
            continue;
        }
        groups.push(summarize(name, rows));
    }
    let overall = summarize("overall", tasks.iter().collect());

    SuiteReport { run_count: runs.len(), groups, overall, tasks, notes }
}

impl SuiteReport {
    /// Aligned plain-text table of the group summaries.
    pub fn render_table(&self) -> String {
        let width = self
            .groups
            .iter()
            .map(|g| g.group.len())
            .chain([self.overall.group.len(), "group".len()])
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>5}  {:>7}  {:>12}", "group", "tasks", "SR", "Completeness");
        let _ = writeln!(out, "{}", "-".repeat(width + 32));
        for g in self.groups.iter().chain(std::iter::once(&self.overall)) {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5}  {:>6.1}%  {:>11.1}%",
                g.group,
                g.tasks,
                g.sr * 100.0,
                g.completeness * 100.0
            );
        }
        let _ = writeln!(out, "runs: {}", self.run_count);
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}
