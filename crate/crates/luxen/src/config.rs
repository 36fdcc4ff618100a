use clap::Args;
use luxen_core::optimize::{DEFAULT_PRUNE_MARGIN, DEFAULT_SAMPLE_CAP, DEFAULT_SEED};
use luxen_core::EngineConfig;

/// Engine settings shared by every subcommand. Each flag also reads an env var.
#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Rows in the cached sample used for approximate scoring.
    #[arg(long, env = "LUXEN_SAMPLE_CAP", default_value_t = DEFAULT_SAMPLE_CAP)]
    pub sample_cap: usize,
    /// Visualizations kept per action.
    #[arg(long = "k", env = "LUXEN_TOPK", default_value_t = luxen_core::engine::DEFAULT_K)]
    pub k: usize,
    /// Factor by which exact cost must exceed the two-pass cost before pruning.
    #[arg(long, env = "LUXEN_PRUNE_MARGIN", default_value_t = DEFAULT_PRUNE_MARGIN)]
    pub prune_margin: f64,
    /// Actions computed concurrently. Defaults to the available parallelism.
    #[arg(long, env = "LUXEN_PARALLELISM")]
    pub parallelism: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Disable approximate top-k pruning.
    #[arg(long)]
    pub no_prune: bool,
}

impl Default for EngineArgs {
    fn default() -> Self {
        EngineArgs {
            sample_cap: DEFAULT_SAMPLE_CAP,
            k: luxen_core::engine::DEFAULT_K,
            prune_margin: DEFAULT_PRUNE_MARGIN,
            parallelism: None,
            seed: DEFAULT_SEED,
            no_prune: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

impl EngineArgs {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sample_cap == 0 {
            return Err(ConfigError("sample cap must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(ConfigError("k must be at least 1".into()));
        }
        if !(self.prune_margin.is_finite() && self.prune_margin > 0.0) {
            return Err(ConfigError(format!("prune margin must be positive, got {}", self.prune_margin)));
        }
        if self.parallelism == Some(0) {
            return Err(ConfigError("parallelism must be at least 1".into()));
        }
        Ok(())
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            k: self.k,
            sample_cap: self.sample_cap,
            seed: self.seed,
            prune_margin: self.prune_margin,
            prune: !self.no_prune,
        }
    }

    pub fn workers(&self) -> usize {
        self.parallelism.unwrap_or_else(default_parallelism)
    }
}

pub fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
