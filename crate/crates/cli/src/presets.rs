//! Figure presets shipped with the binary.

use crate::config::RawConfig;
use crate::CliError;

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        pub const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../../../presets/", $name, ".json")))),*
        ];
    };
}

presets!(
    "fig1", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b", "fig4c", "fig4d",
    "fig5a", "fig5b", "fig5c", "fig5d", "fig6a", "fig6b", "fig6c", "fig6d", "fig7a", "fig7b", "fig7c", "fig7d", "fig8",
);

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn text(name: &str) -> Result<&'static str, CliError> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| {
        CliError::Config(format!("unknown preset {name:?}; available: {}", names().collect::<Vec<_>>().join(", ")))
    })
}

/// The preset as a raw config. Presets never chain to other presets.
pub fn raw(name: &str) -> Result<RawConfig, CliError> {
    let mut raw = RawConfig::from_json(text(name)?)?;
    raw.seed_preset = None;
    Ok(raw)
}
