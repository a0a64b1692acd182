//! Named experiment configurations shipped with the crate.

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const PRESETS: &[(&str, &str)] = &[
    ("parabolic-variance", include_str!("../../presets/parabolic-variance.toml")),
    ("perturbed-cat-variance", include_str!("../../presets/perturbed-cat-variance.toml")),
    ("perturbed-cat-egorov", include_str!("../../presets/perturbed-cat-egorov.toml")),
    ("parabolic-classical-rate", include_str!("../../presets/parabolic-classical-rate.toml")),
    ("parabolic-classical-rate-p-only", include_str!("../../presets/parabolic-classical-rate-p-only.toml")),
    ("parabolic-offdiag", include_str!("../../presets/parabolic-offdiag.toml")),
    ("audit-parabolic", include_str!("../../presets/audit-parabolic.toml")),
    ("audit-perturbed-cat", include_str!("../../presets/audit-perturbed-cat.toml")),
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
        Error::Config(format!("unknown preset '{name}' (available: {})", names.join(", ")))
    })?;
    let cfg = ExperimentConfig::parse(text)?;
    cfg.validate()?;
    Ok(cfg)
}
