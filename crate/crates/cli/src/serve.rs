//! `serve-reward`: the HTTP reward service.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::Args;
use roboground_reward::service::{serve, ServiceConfig};
use roboground_reward::{Judge, RewardEngine, RewardMode};

use crate::client;
use crate::config::Settings;

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Require this value in the `x-reward-secret` header.
    #[arg(long, env = "ROBOGROUND_REWARD_SECRET")]
    pub secret: Option<String>,
    /// Judge calls allowed in flight at once.
    #[arg(long, default_value_t = 4)]
    pub judge_concurrency: usize,
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
}

pub fn engine(settings: &Settings) -> Result<RewardEngine> {
    let mode: RewardMode = match &settings.mode {
        Some(m) => m.parse().map_err(|e| anyhow::anyhow!("{e}"))?,
        None => RewardMode::Deterministic,
    };
    let mut engine = RewardEngine::new(Arc::new(settings.registry()?)).with_mode(mode);
    // Requests may ask for a judged mode even when the default is deterministic,
    // so a configured model is always attached.
    if mode.uses_judge() || settings.llm.is_some() {
        engine = engine.with_judge(Judge::new(client::build(settings)?));
    }
    Ok(engine)
}

pub fn run(settings: &Settings, args: &ServeArgs) -> Result<()> {
    let engine = engine(settings)?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse().context("invalid --host/--port")?;
    let config = ServiceConfig {
        request_timeout: Duration::from_secs(args.timeout_secs),
        judge_concurrency: args.judge_concurrency,
        shared_secret: args.secret.clone(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    tracing::info!(%addr, mode = engine.default_mode().as_str(), "reward service listening");
    runtime.block_on(serve(addr, engine, config)).context("serving")
}
