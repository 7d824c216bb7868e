//! Run configuration file: the standard parameter names plus time zone and
//! seed. Unknown keys are a hard error so typos cannot silently fall back to
//! defaults.

use std::path::Path;

use anyhow::{Context, Result};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use semtraj::cluster::DbscanParams;
use semtraj::preprocess::PreprocessConfig;
use semtraj::semantics::ScoringConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "MAX_TIME_BETWEEN_POINTS_IN_JOURNEY", default = "default_max_gap")]
    pub max_time_between_points_in_journey: i64,
    #[serde(rename = "MIN_TIME_FOR_ORL", default = "default_min_rest")]
    pub min_time_for_orl: i64,
    #[serde(rename = "MIN_TRAJECTORY_LENGTH", default = "default_min_length")]
    pub min_trajectory_length: usize,
    #[serde(rename = "MAX_NUM_TRAJECTORIES", default = "default_max_trajectories")]
    pub max_num_trajectories: usize,
    #[serde(rename = "EARLIEST_VALID_TIMESTAMP", default = "default_earliest")]
    pub earliest_valid_timestamp: i64,
    #[serde(rename = "MIN_NUM_DAYS_DATA_FOR_VALID_TRAJ", default = "default_min_days")]
    pub min_num_days_data_for_valid_traj: u32,
    #[serde(rename = "MinPts", default = "default_min_pts")]
    pub min_pts: usize,
    #[serde(rename = "Eps", default = "default_eps")]
    pub eps: f64,
    #[serde(rename = "TIME_ZONE", default = "default_time_zone")]
    pub time_zone: String,
    #[serde(rename = "SEED", default = "default_seed")]
    pub seed: u64,
}

fn default_max_gap() -> i64 {
    1000 * 60 * 80
}
fn default_min_rest() -> i64 {
    1000 * 60 * 30
}
fn default_min_length() -> usize {
    10
}
fn default_max_trajectories() -> usize {
    10_000
}
// The published cutoff value 946684800 is labelled milliseconds but is only
// meaningful as seconds (2000-01-01T00:00Z); stored here in milliseconds.
fn default_earliest() -> i64 {
    946_684_800_000
}
fn default_min_days() -> u32 {
    1
}
fn default_min_pts() -> usize {
    10
}
fn default_eps() -> f64 {
    0.04
}
fn default_time_zone() -> String {
    "Europe/London".to_string()
}
fn default_seed() -> u64 {
    42
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults populate an empty config")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.eps > 0.0, "Eps must be positive, got {}", self.eps);
        anyhow::ensure!(self.min_pts >= 1, "MinPts must be at least 1");
        anyhow::ensure!(
            self.max_time_between_points_in_journey > 0,
            "MAX_TIME_BETWEEN_POINTS_IN_JOURNEY must be positive"
        );
        anyhow::ensure!(self.min_time_for_orl > 0, "MIN_TIME_FOR_ORL must be positive");
        anyhow::ensure!(self.max_num_trajectories >= 1, "MAX_NUM_TRAJECTORIES must be at least 1");
        self.timezone()?;
        Ok(())
    }

    pub fn timezone(&self) -> Result<Tz> {
        self.time_zone
            .parse()
            .map_err(|e| anyhow::anyhow!("unknown TIME_ZONE {:?}: {e}", self.time_zone))
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig {
            max_gap_in_journey_ms: self.max_time_between_points_in_journey,
            min_rest_for_orl_ms: self.min_time_for_orl,
            min_trajectory_length: self.min_trajectory_length,
            min_days_data: self.min_num_days_data_for_valid_traj,
            earliest_valid_timestamp_ms: self.earliest_valid_timestamp,
        }
    }

    pub fn scoring(&self) -> Result<ScoringConfig> {
        Ok(ScoringConfig {
            timezone: self.timezone()?,
            ..ScoringConfig::default()
        })
    }

    pub fn dbscan(&self) -> DbscanParams {
        DbscanParams {
            eps: self.eps,
            min_pts: self.min_pts,
            cache_budget_bytes: None,
        }
    }
}
