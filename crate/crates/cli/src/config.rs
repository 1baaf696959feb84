//! Experiment configuration: a flat key set shared by the command-line
//! flags and the JSON config file. Flags override file values; unknown
//! keys in a file are rejected.

use std::path::Path;

use bdsim_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Resolved configuration of one run. Serialized as the `config` field of
/// the run manifest; any manifest's config re-executes the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub command: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xs: Option<Vec<f64>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_law: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_param: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_events: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newick: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_command: Option<String>,
}

pub const COMMANDS: [&str; 14] = [
    "simulate",
    "speed",
    "diameter",
    "renewal-n2",
    "random-sum",
    "hitting",
    "escape",
    "stationarity",
    "recurrence",
    "couple-monotone",
    "couple-killright",
    "bbm-many-to-one",
    "bbm-radius",
    "sweep",
];

impl ExperimentConfig {
    pub fn new(command: &str) -> ExperimentConfig {
        ExperimentConfig {
            command: command.to_string(),
            seed: 42,
            threads: None,
            output_dir: None,
            n: None,
            n_prime: None,
            dimension: None,
            rule: None,
            mu: None,
            horizon: None,
            reps: None,
            r_grid: None,
            mu_grid: None,
            n_grid: None,
            horizon_grid: None,
            xs: None,
            t: None,
            t_law: None,
            t_param: None,
            functional: None,
            law: None,
            kind: None,
            burn_in: None,
            sample_gap: None,
            samples: None,
            init_a: None,
            init_b: None,
            init: None,
            steps: None,
            events: None,
            seeds: None,
            cap: None,
            dump_events: None,
            newick: None,
            sweep_command: None,
        }
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Configuration(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Configuration(format!("bad config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !COMMANDS.contains(&self.command.as_str()) {
            return Err(Error::Configuration(format!(
                "unknown command {:?} (expected one of {})",
                self.command,
                COMMANDS.join(", ")
            )));
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Error::Configuration("threads must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// Overlay file values under explicit flag values: any field already set
    /// on `self` wins; the file fills the gaps. The file's command, when
    /// present as a different command, is an error.
    pub fn merge_under(&mut self, file: ExperimentConfig) -> Result<()> {
        if !file.command.is_empty() && file.command != self.command {
            return Err(Error::Configuration(format!(
                "config file is for command {:?}, invoked {:?}",
                file.command, self.command
            )));
        }
        macro_rules! take {
            ($($field:ident),* $(,)?) => {
                $(if self.$field.is_none() { self.$field = file.$field; })*
            };
        }
        take!(
            threads, output_dir, n, n_prime, dimension, rule, mu, horizon, reps, r_grid,
            mu_grid, n_grid, horizon_grid, xs, t, t_law, t_param, functional, law, kind,
            burn_in, sample_gap, samples, init_a, init_b, init, steps, events, seeds, cap,
            dump_events, newick, sweep_command
        );
        Ok(())
    }
}
