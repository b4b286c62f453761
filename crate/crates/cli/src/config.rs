//! The TOML configuration file.
//!
//! Every section is optional. Command-line flags override environment
//! variables, which override values from this file.
//!
//! ```toml
//! [netlist]      # NetlistConfig
//! [toy]          # ToyConfig
//! [v1]           # V1Config
//! [v2]           # V2Config
//! [v3]           # V3Config
//! [prompt]       # n_examples, approx_groups
//! [model]        # endpoint, path, api_key, auth_header, name, max_tokens, temperature, ...
//! [rules]        # Rules
//! [baseline]     # column / mirror settings
//! ```

use std::path::Path;

use placebench::baseline::{ColumnConfig, MirrorConfig};
use placebench::layoutgen::{V1Config, V2Config, V3Config};
use placebench::metrics::Rules;
use placebench::modelclient::{HttpConfig, DEFAULT_MAX_TOKENS};
use placebench::netlist::NetlistConfig;
use placebench::promptio::GridPromptConfig;
use placebench::toys::{IndexLabel, ToyKind};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub netlist: NetlistConfig,
    pub toy: ToyConfig,
    pub v1: V1Config,
    pub v2: V2Config,
    pub v3: V3Config,
    pub prompt: GridPromptConfig,
    pub model: ModelConfig,
    pub rules: Rules,
    pub baseline: BaselineConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub kind: ToyKind,
    pub rows: usize,
    pub cols: usize,
    pub n: usize,
    pub len: usize,
    pub alphabet_max: u32,
    pub label: IndexLabel,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            kind: ToyKind::Grid4th,
            rows: 4,
            cols: 5,
            n: 7,
            len: 20,
            alphabet_max: 9,
            label: IndexLabel::ValueBefore,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub http: HttpConfig,
    pub name: String,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            http: HttpConfig::default(),
            name: String::new(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub column: ColumnConfig,
    pub mirror: MirrorConfig,
    pub axis: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// First non-empty value of flag, environment variable, config.
pub fn pick(flag: Option<&str>, env: &str, config: &str) -> Option<String> {
    [
        flag.map(str::to_string),
        std::env::var(env).ok(),
        Some(config.to_string()),
    ]
    .into_iter()
    .flatten()
    .find(|s| !s.is_empty())
}
