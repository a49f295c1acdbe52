//! Binary reward for generated robot code: 1 when the candidate makes the
//! robot perform the same actions as the reference, else 0.
//!
//! [`RewardEngine`] evaluates requests in-process; [`service`] exposes it over
//! HTTP for training loops.

pub mod judge;
pub mod service;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use roboground_core::dsl::{execute, execute_source, extract_code, parse, DslError, Limits};
use roboground_core::metrics::{completeness, MatchConfig, MatchMode};
use roboground_core::sim::{ProfileRegistry, RobotProfile, Trajectory, TransitionKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use judge::{parse_verdict, Judge, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    #[default]
    Deterministic,
    Llm,
    Hybrid,
}

impl RewardMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RewardMode::Deterministic => "deterministic",
            RewardMode::Llm => "llm",
            RewardMode::Hybrid => "hybrid",
        }
    }

    pub fn uses_judge(self) -> bool {
        self != RewardMode::Deterministic
    }
}

impl std::str::FromStr for RewardMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deterministic" => Ok(RewardMode::Deterministic),
            "llm" => Ok(RewardMode::Llm),
            "hybrid" => Ok(RewardMode::Hybrid),
            other => Err(format!("unknown reward mode `{other}` (expected deterministic, llm or hybrid)")),
        }
    }
}

/// Per-request changes to the default matching configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchOverrides {
    pub position_tolerance: Option<f64>,
    pub yaw_tolerance: Option<f64>,
    pub mode: Option<MatchMode>,
    pub ignore_kinds: Option<Vec<TransitionKind>>,
    pub coalesce_rotations: Option<bool>,
}

impl MatchOverrides {
    pub fn apply(&self, base: &MatchConfig<f64>) -> MatchConfig<f64> {
        let mut cfg = base.clone();
        if let Some(v) = self.position_tolerance {
            cfg.position_tolerance = v;
        }
        if let Some(v) = self.yaw_tolerance {
            cfg.yaw_tolerance = v;
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = &self.ignore_kinds {
            cfg.ignore_kinds = v.iter().copied().collect();
        }
        if let Some(v) = self.coalesce_rotations {
            cfg.coalesce_rotations = v;
        }
        cfg
    }
}

fn default_profile() -> String {
    "uav".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardRequest {
    pub candidate_code: String,
    pub reference_code: String,
    #[serde(default = "default_profile")]
    pub robot_profile: String,
    /// Falls back to the engine's default mode.
    #[serde(default)]
    pub mode: Option<RewardMode>,
    #[serde(default)]
    pub match_config: Option<MatchOverrides>,
    /// Also report completeness as a partial-credit signal.
    #[serde(default)]
    pub shaped: bool,
}

impl RewardRequest {
    pub fn new(candidate: impl Into<String>, reference: impl Into<String>) -> Self {
        Self {
            candidate_code: candidate.into(),
            reference_code: reference.into(),
            robot_profile: default_profile(),
            mode: None,
            match_config: None,
            shaped: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardResponse {
    pub reward: u8,
    pub reason: String,
    pub mode: RewardMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_trajectory: Option<Trajectory<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shaped_reward: Option<f64>,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("{field}: {message}")]
    BadRequest { field: String, message: String },
    #[error("unknown robot profile `{0}`")]
    UnknownProfile(String),
    #[error("reference code does not run cleanly: {0}")]
    Reference(String),
    #[error("judge unavailable: {0}")]
    Judge(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl RewardError {
    pub fn bad(field: impl Into<String>, message: impl Into<String>) -> Self {
        RewardError::BadRequest { field: field.into(), message: message.into() }
    }

    pub fn status(&self) -> u16 {
        match self {
            RewardError::BadRequest { .. } => 400,
            RewardError::UnknownProfile(_) => 422,
            RewardError::Reference(_) | RewardError::Internal(_) => 500,
            RewardError::Judge(_) => 503,
        }
    }
}

/// Stateless evaluator; cheap to clone and share between request handlers.
#[derive(Clone)]
pub struct RewardEngine {
    registry: Arc<ProfileRegistry>,
    default_mode: RewardMode,
    judge: Option<Judge>,
    base_config: MatchConfig<f64>,
    limits: Limits,
}

enum Comparison {
    Match,
    /// Lengths equal and every action within the widened tolerance.
    NearMiss(String),
    Miss(String),
}

impl RewardEngine {
    pub fn new(registry: Arc<ProfileRegistry>) -> Self {
        Self {
            registry,
            default_mode: RewardMode::Deterministic,
            judge: None,
            base_config: MatchConfig::default(),
            limits: Limits::default(),
        }
    }

    pub fn with_mode(mut self, mode: RewardMode) -> Self {
        self.default_mode = mode;
        self
    }

    pub fn with_judge(mut self, judge: Judge) -> Self {
        self.judge = Some(judge);
        self
    }

    pub fn with_match_config(mut self, cfg: MatchConfig<f64>) -> Self {
        self.base_config = cfg;
        self
    }

    pub fn default_mode(&self) -> RewardMode {
        self.default_mode
    }

    pub fn registry(&self) -> &ProfileRegistry {
        &self.registry
    }

    /// Field checks that do not need the simulator.
    pub fn validate(&self, req: &RewardRequest) -> Result<(RewardMode, Arc<RobotProfile>, MatchConfig<f64>), RewardError> {
        if req.candidate_code.trim().is_empty() {
            return Err(RewardError::bad("candidate_code", "must not be empty"));
        }
        if req.reference_code.trim().is_empty() {
            return Err(RewardError::bad("reference_code", "must not be empty"));
        }
        let profile =
            self.registry.get(&req.robot_profile).ok_or_else(|| RewardError::UnknownProfile(req.robot_profile.clone()))?;
        let cfg = match &req.match_config {
            Some(o) => o.apply(&self.base_config),
            None => self.base_config.clone(),
        };
        cfg.validate().map_err(|e| RewardError::bad("match_config", e.to_string()))?;
        let mode = req.mode.unwrap_or(self.default_mode);
        if mode.uses_judge() && self.judge.is_none() {
            return Err(RewardError::bad("mode", format!("`{}` needs a judge but none is configured", mode.as_str())));
        }
        Ok((mode, profile, cfg))
    }

    /// Evaluates one request, converting interpreter panics into errors.
    pub fn evaluate(&self, req: &RewardRequest) -> Result<RewardResponse, RewardError> {
        guarded(|| self.evaluate_inner(req))
    }

    fn evaluate_inner(&self, req: &RewardRequest) -> Result<RewardResponse, RewardError> {
        let started = Instant::now();
        let (mode, profile, cfg) = self.validate(req)?;
        let mut resp = match mode {
            RewardMode::Deterministic => self.deterministic(req, &profile, &cfg)?,
            RewardMode::Llm => self.llm(req, &profile)?,
            RewardMode::Hybrid => self.hybrid(req, &profile, &cfg)?,
        };
        resp.mode = mode;
        if !req.shaped {
            resp.shaped_reward = None;
        }
        resp.latency_ms = started.elapsed().as_secs_f64() * 1e3;
        Ok(resp)
    }

    fn run_reference(&self, req: &RewardRequest, profile: &Arc<RobotProfile>) -> Result<Trajectory<f64>, RewardError> {
        let (traj, err) = execute_source::<f64>(&req.reference_code, profile.clone(), self.limits);
        match err {
            Some(e) => Err(RewardError::Reference(e.to_string())),
            None => Ok(traj),
        }
    }

    /// Runs the candidate, falling back to code extracted from prose.
    fn run_candidate(&self, code: &str, profile: &Arc<RobotProfile>) -> (Trajectory<f64>, Option<DslError>) {
        match parse(code) {
            Ok(program) => {
                let ex = execute::<f64>(&program, profile.clone(), self.limits);
                (ex.trajectory, ex.error.map(DslError::from))
            }
            Err(_) => {
                let source = extract_code(code).unwrap_or_else(|| code.to_string());
                execute_source::<f64>(&source, profile.clone(), self.limits)
            }
        }
    }

    fn compare(cfg: &MatchConfig<f64>, cand: &Trajectory<f64>, reference: &Trajectory<f64>) -> Comparison {
        let c = cfg.scored_actions(cand);
        let r = cfg.scored_actions(reference);
        if c.len() != r.len() {
            return Comparison::Miss(format!("candidate performs {} actions, reference performs {}", c.len(), r.len()));
        }
        let matches = cfg.match_sequences(&c, &r);
        let Some(first) = matches.iter().position(|m| !m) else {
            return Comparison::Match;
        };
        let reason = format!("action {} differs from the reference", first + 1);
        let wide = MatchConfig {
            position_tolerance: cfg.position_tolerance * 2.0,
            yaw_tolerance: cfg.yaw_tolerance * 2.0,
            mode: MatchMode::PerIndex,
            ..cfg.clone()
        };
        if wide.match_sequences(&c, &r).iter().all(|m| *m) {
            Comparison::NearMiss(reason)
        } else {
            Comparison::Miss(reason)
        }
    }

    fn shaped(cfg: &MatchConfig<f64>, cand: &Trajectory<f64>, reference: &Trajectory<f64>) -> Option<f64> {
        let gt = cfg.scored_actions(reference);
        let matches = cfg.match_sequences(&cfg.scored_actions(cand), &gt);
        completeness(&matches).ok()
    }

    fn deterministic(
        &self,
        req: &RewardRequest,
        profile: &Arc<RobotProfile>,
        cfg: &MatchConfig<f64>,
    ) -> Result<RewardResponse, RewardError> {
        Ok(self.deterministic_with(req, profile, cfg)?.0)
    }

    fn deterministic_with(
        &self,
        req: &RewardRequest,
        profile: &Arc<RobotProfile>,
        cfg: &MatchConfig<f64>,
    ) -> Result<(RewardResponse, bool), RewardError> {
        let reference = self.run_reference(req, profile)?;
        let (cand, err) = self.run_candidate(&req.candidate_code, profile);
        let shaped_reward = Self::shaped(cfg, &cand, &reference);
        let mut resp = RewardResponse {
            reward: 0,
            reason: String::new(),
            mode: RewardMode::Deterministic,
            candidate_trajectory: None,
            shaped_reward,
            latency_ms: 0.0,
        };
        let mut near_miss = false;
        match err {
            Some(e) => {
                resp.reason = format!("candidate failed: {e}");
            }
            None => match Self::compare(cfg, &cand, &reference) {
                Comparison::Match => {
                    resp.reward = 1;
                    resp.reason = "trajectories match".into();
                }
                Comparison::NearMiss(reason) => {
                    near_miss = true;
                    resp.reason = reason;
                }
                Comparison::Miss(reason) => resp.reason = reason,
            },
        }
        resp.candidate_trajectory = Some(cand);
        Ok((resp, near_miss))
    }

    fn judge(&self) -> Result<&Judge, RewardError> {
        self.judge.as_ref().ok_or_else(|| RewardError::Internal("no judge configured".into()))
    }

    fn llm(&self, req: &RewardRequest, profile: &Arc<RobotProfile>) -> Result<RewardResponse, RewardError> {
        let verdict = self
            .judge()?
            .compare_code(profile, &req.candidate_code, &req.reference_code)
            .map_err(|e| RewardError::Judge(e.to_string()))?;
        let reason = match verdict.value {
            Some(1) => "judge: match".to_string(),
            Some(_) => "judge: mismatch".to_string(),
            None => judge::UNPARSEABLE.to_string(),
        };
        Ok(RewardResponse {
            reward: verdict.reward(),
            reason,
            mode: RewardMode::Llm,
            candidate_trajectory: None,
            shaped_reward: None,
            latency_ms: 0.0,
        })
    }

    fn hybrid(
        &self,
        req: &RewardRequest,
        profile: &Arc<RobotProfile>,
        cfg: &MatchConfig<f64>,
    ) -> Result<RewardResponse, RewardError> {
        let (mut resp, near_miss) = self.deterministic_with(req, profile, cfg)?;
        if near_miss {
            let judged = self.llm(req, profile)?;
            resp.reward = judged.reward;
            resp.reason = format!("{}; {}", resp.reason, judged.reason);
        }
        Ok(resp)
    }
}

/// Runs `f`, turning a panic into [`RewardError::Internal`].
pub fn guarded<T>(f: impl FnOnce() -> Result<T, RewardError>) -> Result<T, RewardError> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            Err(RewardError::Internal(msg))
        }
    }
}
