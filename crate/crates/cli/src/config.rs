//! The JSON run configuration and flag overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use relay_rates::channel::{gains_from_geometry, ChannelGains, NodePlacement};
use relay_rates::optimizer::{GeometrySpec, SearchBox, SweepParam, SweepSpec};
use relay_rates::schemes::SchemeId;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Rates,
    Optimize,
    Sweep,
    VerifyFm,
    Selftest,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_fm_tol")]
    pub fm: f64,
}

fn default_fm_tol() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { fm: default_fm_tol() }
    }
}

fn default_gamma() -> f64 {
    2.0
}

fn default_powers() -> [f64; 3] {
    [1.0; 3]
}

fn default_valuations() -> usize {
    100
}

/// Everything a run can be told. Every field is optional in the file; the
/// command decides which ones it needs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub geometry: Option<GeometrySpec>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_powers")]
    pub powers: [f64; 3],
    #[serde(default)]
    pub schemes: Vec<SchemeId>,
    /// Fixed parameters for `rates`, by coordinate name (`alpha`, `beta`,
    /// `nhat3`, `nhat2`, `s`, `t`, `g2`, `rho12`, `rho13`, `rho23`); a value
    /// may be the string `"inf"`.
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub boxes: BTreeMap<SchemeId, SearchBox>,
    pub sweep: Option<SweepBlock>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerance: Tolerances,
    /// Random valuations used by `verify-fm`.
    #[serde(default = "default_valuations")]
    pub fm_valuations: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn schemes_or_all(&self) -> Vec<SchemeId> {
        if self.schemes.is_empty() {
            SchemeId::ALL.to_vec()
        } else {
            self.schemes.clone()
        }
    }

    pub fn channel(&self) -> Result<ChannelGains> {
        let Some(geometry) = self.geometry else {
            bail!("config field `geometry` is required for this command (line or coordinates)");
        };
        let placement = match geometry {
            GeometrySpec::Line(l) => l.placement(self.gamma)?,
            GeometrySpec::Coordinates(c) => NodePlacement::new(c, self.gamma)?,
        };
        Ok(gains_from_geometry(&placement, self.powers)?)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let Some(geometry) = self.geometry else {
            bail!("config field `geometry` is required for `sweep`");
        };
        let Some(sw) = &self.sweep else {
            bail!("config field `sweep` ({{param, values}}) is required for `sweep`");
        };
        let spec = SweepSpec {
            geometry,
            gamma: self.gamma,
            powers: self.powers,
            param: sw.param,
            values: sw.values.clone(),
            schemes: self.schemes_or_all(),
            boxes: self.boxes.clone(),
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Fixed parameter `name` from the `params` block.
    pub fn param(&self, name: &str) -> Result<Option<f64>> {
        match self.params.get(name) {
            None => Ok(None),
            Some(serde_json::Value::Number(n)) => Ok(n.as_f64()),
            Some(serde_json::Value::String(s)) if s == "inf" => Ok(Some(f64::INFINITY)),
            Some(v) => bail!("params.{name}: expected a number or \"inf\", got {v}"),
        }
    }

    pub fn validate_boxes(&self) -> Result<()> {
        for (s, b) in &self.boxes {
            b.validate().with_context(|| format!("boxes.{s}"))?;
            let want = relay_rates::optimizer::default_box(*s).params.len();
            if b.params.len() != want {
                bail!("boxes.{s}: expected {want} parameters, got {}", b.params.len());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_defaults() {
        let c = RunConfig::default();
        assert_eq!((c.gamma, c.powers, c.seed, c.fm_valuations), (2.0, [1.0; 3], 0, 100));
        assert_eq!(c.schemes_or_all(), SchemeId::ALL.to_vec());
        assert!(c.channel().is_err());
        assert!(c.sweep_spec().is_err());
    }

    #[test]
    fn params_accept_inf() {
        let c: RunConfig = serde_json::from_str(r#"{"params": {"nhat3": "inf", "beta": 0.5, "alpha": true}}"#).unwrap();
        assert_eq!(c.param("nhat3").unwrap(), Some(f64::INFINITY));
        assert_eq!(c.param("beta").unwrap(), Some(0.5));
        assert_eq!(c.param("s").unwrap(), None);
        assert!(c.param("alpha").is_err());
    }

    #[test]
    fn box_overrides_are_checked() {
        let c: RunConfig = serde_json::from_str(
            r#"{"boxes": {"NNC": {"params": [{"name": "nhat2", "lower": 0.1, "upper": 10, "scale": "log"}]}}}"#,
        )
        .unwrap();
        assert!(c.validate_boxes().unwrap_err().to_string().contains("expected 2"));
        let c: RunConfig = serde_json::from_str(
            r#"{"boxes": {"DF_SNNC": {"params": [{"name": "beta", "lower": 0, "upper": 1},
                {"name": "nhat3", "lower": 0, "upper": 10, "scale": "log"}]}}}"#,
        )
        .unwrap();
        assert!(c.validate_boxes().is_err());
    }
}
