//! Set-construction configuration, read from TOML or JSON.
//!
//! ```toml
//! a = 0.5
//! b = 4.0
//! K = 1.0
//! annuli = "gaussian"
//!
//! [constants]
//! littlewood = 0.4   # omit to use the Dirichlet sweep
//! alpha = 2.0
//! lambda = 2.718281828459045
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use wpset_core::approx::{littlewood_empirical_l, Family};
use wpset_core::wpsets::Constants;

use crate::error::{invalid, CliError};
use crate::manifest::{ConstantsRecord, Run};

/// Environment variable that overrides `--config`.
pub const CONFIG_ENV: &str = "WPSET_CONFIG";

/// Dirichlet sweep feeding the default Littlewood constant: `N = 2^8 .. 2^14`.
pub const SWEEP_LOG2: (u32, u32) = (8, 14);
pub const SWEEP_OVERSAMPLE: usize = 64;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub littlewood: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetUConfig {
    #[serde(default)]
    pub constants: ConstantsConfig,
    pub a: Option<f64>,
    pub b: Option<f64>,
    #[serde(rename = "K", alias = "k")]
    pub k: Option<f64>,
    pub annuli: Option<String>,
}

pub const DEFAULT_A: f64 = 0.5;
pub const DEFAULT_B: f64 = 4.0;
pub const DEFAULT_K: f64 = 1.0;

/// The config path in effect: the environment variable wins over the flag.
pub fn effective_path(flag: Option<PathBuf>, use_env: bool) -> Option<PathBuf> {
    let env = use_env.then(|| std::env::var_os(CONFIG_ENV)).flatten().filter(|v| !v.is_empty());
    env.map(PathBuf::from).or(flag)
}

pub fn load(run: &mut Run, path: &Path) -> Result<SetUConfig, CliError> {
    let bytes = run.read_input("config", path)?;
    let text = String::from_utf8(bytes).map_err(|_| invalid(format!("{} is not UTF-8", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

/// Smallest `||D_N||_1 / ln(2N + 1)` over the default sweep.
pub fn swept_littlewood() -> Result<f64, CliError> {
    let family: Vec<_> = Family::Dirichlet.members(SWEEP_LOG2.0, SWEEP_LOG2.1).into_iter().map(|(_, f)| f).collect();
    Ok(littlewood_empirical_l(&family, SWEEP_OVERSAMPLE)?.min_ratio)
}

pub fn constants(cfg: &ConstantsConfig) -> Result<(Constants, ConstantsRecord), CliError> {
    let (littlewood, source) = match cfg.littlewood {
        Some(l) => (l, "config".to_string()),
        None => (
            swept_littlewood()?,
            format!("dirichlet sweep N = 2^{}..2^{}, oversample {}", SWEEP_LOG2.0, SWEEP_LOG2.1, SWEEP_OVERSAMPLE),
        ),
    };
    let consts = Constants::new(littlewood, cfg.alpha.unwrap_or(2.0), cfg.lambda.unwrap_or(std::f64::consts::E))?;
    let record = ConstantsRecord {
        littlewood: consts.littlewood,
        alpha: consts.alpha,
        lambda: consts.lambda,
        c: consts.c,
        littlewood_source: source,
    };
    Ok((consts, record))
}
