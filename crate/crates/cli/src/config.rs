//! Config document: the chain plus run defaults, read from JSON.

use std::fs;
use std::path::Path;

use qdchain::{
    validate_config, ChainConfig, FrequencyGrid, FrequencyUnit, MirrorTermination, SubsystemParams,
    ValidatedChain, WaveguideLink,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Grid used when neither flags nor defaults give one: ±3Γ₁ around the
/// reference frequency.
pub const DEFAULT_POINTS: usize = 6001;
pub const DEFAULT_SPAN_IN_GAMMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDefaults {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridDefaults>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prominence: Option<f64>,
    /// Gate carrier offset from the reference frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub units: FrequencyUnit,
    #[serde(default)]
    pub reference_frequency: f64,
    pub subsystems: Vec<SubsystemParams>,
    #[serde(default)]
    pub links: Vec<WaveguideLink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror: Option<MirrorTermination>,
    #[serde(default)]
    pub defaults: Defaults,
}

impl ConfigDocument {
    pub fn chain_config(&self) -> ChainConfig {
        ChainConfig {
            units: self.units,
            reference_frequency: self.reference_frequency,
            subsystems: self.subsystems.clone(),
            links: self.links.clone(),
            mirror: self.mirror,
        }
    }
}

/// Validated chain together with the normalized (κ₀ units) document.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub chain: ValidatedChain,
    pub normalized: ConfigDocument,
    /// Factor that divides config-unit frequencies into κ₀ units.
    pub scale: f64,
}

impl LoadedConfig {
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(&self.normalized).expect("document serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(&self.normalized).expect("document serializes")
    }

    /// Converts a frequency offset from config units to κ₀ units.
    pub fn to_kappa0(&self, value: f64) -> f64 {
        value / self.scale
    }

    pub fn prominence(&self) -> f64 {
        self.normalized
            .defaults
            .prominence
            .unwrap_or(qdchain::spectra::DEFAULT_PROMINENCE)
    }

    pub fn carrier(&self) -> f64 {
        self.normalized
            .defaults
            .carrier
            .unwrap_or(qdchain::gate::DEFAULT_CARRIER)
    }

    /// Grid in κ₀ units. Flags are in config units and override the
    /// defaults field by field.
    pub fn grid(
        &self,
        start: Option<f64>,
        stop: Option<f64>,
        points: Option<usize>,
    ) -> Result<FrequencyGrid, CliError> {
        let span = DEFAULT_SPAN_IN_GAMMA * self.chain.reference_decay();
        let fallback = self.normalized.defaults.grid.unwrap_or(GridDefaults {
            start: -span,
            stop: span,
            points: DEFAULT_POINTS,
        });
        FrequencyGrid::new(
            start.map_or(fallback.start, |v| self.to_kappa0(v)),
            stop.map_or(fallback.stop, |v| self.to_kappa0(v)),
            points.unwrap_or(fallback.points),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn parse_document(text: &str) -> Result<ConfigDocument, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("parse error: {e}")))
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let doc =
        parse_document(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    resolve(&doc)
}

pub fn resolve(doc: &ConfigDocument) -> Result<LoadedConfig, CliError> {
    let chain = validate_config(&doc.chain_config())
        .map_err(|e| CliError::Config(format!("validation error: {e}")))?;
    let scale = match doc.units {
        FrequencyUnit::Kappa0 => 1.0,
        FrequencyUnit::Absolute => doc.subsystems[0].kappa0,
    };
    let check = |name: &str, v: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!("defaults.{name} is not finite")))
        }
    };
    let defaults = &doc.defaults;
    let grid = match defaults.grid {
        Some(g) => Some(GridDefaults {
            start: check("grid.start", g.start)? / scale,
            stop: check("grid.stop", g.stop)? / scale,
            points: g.points,
        }),
        None => None,
    };
    if let Some(p) = defaults.prominence {
        if !(p.is_finite() && p > 0.0) {
            return Err(CliError::Config(format!(
                "defaults.prominence must be positive, got {p}"
            )));
        }
    }
    let carrier = match defaults.carrier {
        Some(c) => Some(check("carrier", c)? / scale),
        None => None,
    };

    let normalized_chain = chain.config();
    let normalized = ConfigDocument {
        units: normalized_chain.units,
        reference_frequency: normalized_chain.reference_frequency,
        subsystems: normalized_chain.subsystems.clone(),
        links: normalized_chain.links.clone(),
        mirror: normalized_chain.mirror,
        defaults: Defaults {
            grid,
            prominence: defaults.prominence,
            carrier,
        },
    };
    Ok(LoadedConfig {
        chain,
        normalized,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABSOLUTE: &str = r#"{
        "units": "absolute",
        "reference_frequency": 190000.0,
        "subsystems": [
            {"omega_c": 190000.0, "kappa0": 2.0, "kappa1": 100.0},
            {"omega_c": 190001.0, "omega_r": 190001.0, "kappa0": 2.0, "kappa1": 100.0,
             "g": 20.0, "gamma_s": 0.0, "gamma_p": 2.0}
        ],
        "links": [{"theta": 62.83185307179586}],
        "defaults": {"grid": {"start": -10.0, "stop": 10.0, "points": 11}, "carrier": -5.0}
    }"#;

    #[test]
    fn absolute_units_are_divided_by_first_kappa0() {
        let loaded = resolve(&parse_document(ABSOLUTE).unwrap()).unwrap();
        assert_eq!(loaded.scale, 2.0);
        assert_eq!(loaded.normalized.units, FrequencyUnit::Kappa0);
        assert_eq!(loaded.normalized.subsystems[1].g, 10.0);
        assert_eq!(loaded.carrier(), -2.5);
        let grid = loaded.grid(None, Some(20.0), None).unwrap();
        assert_eq!((grid.start, grid.stop, grid.points), (-5.0, 10.0, 11));
    }

    #[test]
    fn echo_round_trips_to_same_digest() {
        let first = resolve(&parse_document(ABSOLUTE).unwrap()).unwrap();
        let second = resolve(&parse_document(&first.echo()).unwrap()).unwrap();
        assert_eq!(first.digest(), second.digest());
        assert_eq!(first.normalized, second.normalized);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err =
            parse_document("{\n  \"units\": \"kappa0\",\n  \"subsystem\": []\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("subsystem") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn missing_unit_tag_is_an_error() {
        let err = parse_document(r#"{"subsystems": [{"omega_c": 0, "kappa0": 1, "kappa1": 50}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("units"));
    }
}
