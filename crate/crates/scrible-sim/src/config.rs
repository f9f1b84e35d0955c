//! Flat `key = value` experiment configuration.
//!
//! The format is deliberately plain text: `#` starts a comment, blank lines
//! are skipped, keys are applied in file order on top of the preset's
//! defaults, and command-line overrides land last. Unknown keys are
//! rejected by name.

use std::fmt;
use std::path::Path;

use scrible_core::learner::AlgorithmKind;

use crate::harness::{ExperimentConfig, NuMode, PerturbationKind, Preset};

/// Configuration errors carry enough context to be printed as-is.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

pub const KNOWN_KEYS: &[&str] = &[
    "preset",
    "dimension",
    "horizon",
    "radius",
    "norm_cap",
    "epsilon",
    "algorithms",
    "reps",
    "seed",
    "perturbation",
    "nu_mode",
    "barrier_scale",
    "barrier_inner_nu",
    "literal_nu",
];

/// Parses `key = value` lines; `#` comments out the rest of a line.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(idx) => &raw[..idx],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "line {}: expected 'key = value', got '{raw}'",
                lineno + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Builds the experiment from a preset base plus ordered overrides.
///
/// The preset may be set by a `preset` key anywhere in the pairs (the last
/// one wins and is applied first, as the base); every other key then
/// overrides field by field in order.
pub fn build_config(pairs: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut preset = Preset::Theorem;
    for (key, value) in pairs {
        if key == "preset" {
            preset = value
                .parse::<Preset>()
                .map_err(ConfigError)?;
        } else if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!(
                "unknown key '{key}' (known keys: {})",
                KNOWN_KEYS.join(", ")
            )));
        }
    }
    let mut config = ExperimentConfig::for_preset(preset);
    for (key, value) in pairs {
        apply_key(&mut config, key, value)?;
    }
    Ok(config)
}

fn apply_key(config: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        value
            .parse::<T>()
            .map_err(|e| ConfigError(format!("key '{key}': {e}")))
    }

    match key {
        "preset" => {} // applied as the base in build_config
        "dimension" => config.dimension = parse(key, value)?,
        "horizon" => config.horizon = parse(key, value)?,
        "radius" => config.radius = parse(key, value)?,
        "norm_cap" => config.norm_cap = parse(key, value)?,
        "epsilon" => {
            config.epsilons = value
                .split(',')
                .map(|v| parse::<f64>(key, v.trim()))
                .collect::<Result<Vec<f64>>>()?;
        }
        "algorithms" => {
            config.algorithms = value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<AlgorithmKind>()
                        .map_err(|e| ConfigError(format!("key '{key}': {e}")))
                })
                .collect::<Result<Vec<AlgorithmKind>>>()?;
        }
        "reps" => config.repetitions = parse(key, value)?,
        "seed" => config.base_seed = parse(key, value)?,
        "perturbation" => config.perturbation = parse::<PerturbationKind>(key, value)?,
        "nu_mode" => config.nu_mode = parse::<NuMode>(key, value)?,
        "barrier_scale" => config.barrier.scale = parse(key, value)?,
        "barrier_inner_nu" => config.barrier.inner_nu = parse(key, value)?,
        "literal_nu" => config.literal_nu = parse(key, value)?,
        other => {
            return Err(ConfigError(format!(
                "unknown key '{other}' (known keys: {})",
                KNOWN_KEYS.join(", ")
            )))
        }
    }
    Ok(())
}

/// Reads the optional config file, layers command-line pairs on top, and
/// validates the result.
pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut pairs = Vec::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError(format!("cannot read config file '{}': {e}", path.display()))
        })?;
        pairs.extend(parse_pairs(&text)?);
    }
    pairs.extend_from_slice(overrides);
    let config = build_config(&pairs)?;
    config
        .validate()
        .map_err(|e| ConfigError(format!("{e:#}")))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let text = "
# experiment grid
horizon = 100   # short
epsilon = 0, 0.5

seed = 9
";
        let pairs = parse_pairs(text).unwrap();
        assert_eq!(
            pairs,
            vec![
                ("horizon".into(), "100".into()),
                ("epsilon".into(), "0, 0.5".into()),
                ("seed".into(), "9".into()),
            ]
        );
    }

    #[test]
    fn rejects_unknown_keys_by_name() {
        let pairs = vec![("horizno".to_string(), "100".to_string())];
        let err = build_config(&pairs).unwrap_err();
        assert!(err.to_string().contains("horizno"), "{err}");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_pairs("just words").is_err());
    }

    #[test]
    fn preset_is_base_then_keys_override() {
        let pairs = vec![
            ("horizon".to_string(), "123".to_string()),
            ("preset".to_string(), "section7".to_string()),
        ];
        let config = build_config(&pairs).unwrap();
        // preset applies first even when listed later
        assert_eq!(config.preset, Preset::Section7);
        assert_eq!(config.horizon, 123);
        assert_eq!(config.epsilons, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn value_errors_name_the_key() {
        let pairs = vec![("horizon".to_string(), "soon".to_string())];
        let err = build_config(&pairs).unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
    }

    #[test]
    fn algorithm_lists_parse() {
        let pairs = vec![(
            "algorithms".to_string(),
            "lifted, classic".to_string(),
        )];
        let config = build_config(&pairs).unwrap();
        assert_eq!(
            config.algorithms,
            vec![AlgorithmKind::Lifted, AlgorithmKind::Classic]
        );
    }
}
