//! Rate bounds of every scheme the toolkit compares.
//!
//! A scheme's rate is the largest `R` satisfying all of its bounds
//! `m * R <= v`, i.e. `max(0, min v / m)`. Negative bound values are legal
//! and simply clamp the rate to zero.

mod baselines;
mod remarks;
mod snncrs;

pub use baselines::{
    cutset_bound_gaussian, cutset_bounds_gaussian, cutset_system, dfdf_bounds_gaussian, dfdf_input_covariance,
    dfdf_rate_gaussian, nnc_bounds_gaussian, nnc_system, Correlations, DfSplits,
};
pub use remarks::{remark_conditions, remark_conditions_gaussian, RemarkFlags};
pub use snncrs::{
    dfsnnc_bounds_gaussian, snncrs_bounds_gaussian, snncrs_system, thm2_bounds, thm2_bounds_discrete, thm3_bounds,
    thm3_bounds_discrete, thm3_bounds_gaussian, SuccessiveBounds,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(x) = log2(1 + x)`.
pub fn cap(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::InvalidParams(format!("C(x) needs x >= 0, got {x}")));
    }
    Ok(cap_unchecked(x))
}

/// `C(x)` for arguments already known to be nonnegative.
pub(crate) fn cap_unchecked(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Free parameters of the Gaussian split scheme.
///
/// `alpha` is the share of relay-2 power carried by the cloud-center
/// codeword, `beta` the coherent-combining share between source and relay 1,
/// `nhat3` the quantization noise variance (`+inf` turns the quantizer off).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnncRsParams {
    pub alpha: f64,
    pub beta: f64,
    pub nhat3: f64,
}

impl SnncRsParams {
    pub fn new(alpha: f64, beta: f64, nhat3: f64) -> Result<Self> {
        let p = SnncRsParams { alpha, beta, nhat3 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParams(format!("alpha = {} not in [0, 1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParams(format!("beta = {} not in [0, 1]", self.beta)));
        }
        if !(self.nhat3 > 0.0) {
            return Err(Error::InvalidParams(format!("nhat3 = {} must be > 0", self.nhat3)));
        }
        Ok(())
    }
}

/// One constraint `multiplier * R <= value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub name: String,
    pub multiplier: u32,
    pub value: f64,
}

impl RateBound {
    pub fn per_unit(&self) -> f64 {
        self.value / self.multiplier as f64
    }
}

/// Named set of rate constraints.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateBounds(Vec<RateBound>);

impl RateBounds {
    pub fn new() -> Self {
        RateBounds(Vec::new())
    }

    /// Adds a bound; names must be unique and multipliers positive.
    pub fn push(&mut self, name: &str, multiplier: u32, value: f64) -> Result<()> {
        if multiplier == 0 {
            return Err(Error::InvalidParams(format!("bound {name} has zero multiplier")));
        }
        if self.0.iter().any(|b| b.name == name) {
            return Err(Error::InvalidParams(format!("duplicate bound name {name}")));
        }
        if !value.is_finite() {
            return Err(Error::InvalidParams(format!("bound {name} evaluates to {value}")));
        }
        self.0.push(RateBound {
            name: name.to_string(),
            multiplier,
            value,
        });
        Ok(())
    }

    pub(crate) fn with(mut self, name: &str, multiplier: u32, value: f64) -> Result<Self> {
        self.push(name, multiplier, value)?;
        Ok(self)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RateBound> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&RateBound> {
        self.0.iter().find(|b| b.name == name)
    }

    /// Keeps the first `n` bounds.
    pub fn truncated(&self, n: usize) -> Self {
        RateBounds(self.0.iter().take(n).cloned().collect())
    }

    /// The bound with the smallest `value / multiplier` (first on ties).
    pub fn binding(&self) -> Option<&RateBound> {
        self.0.iter().fold(None, |best: Option<&RateBound>, b| match best {
            Some(x) if x.per_unit() <= b.per_unit() => Some(x),
            _ => Some(b),
        })
    }

    /// `max(0, min value / multiplier)`; an empty set has rate 0.
    pub fn rate(&self) -> f64 {
        self.binding().map_or(0.0, |b| b.per_unit().max(0.0))
    }
}

/// Max-R of a bound set, i.e. [`RateBounds::rate`].
pub fn snncrs_rate(bounds: &RateBounds) -> f64 {
    bounds.rate()
}

/// The schemes compared by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemeId {
    /// Split quantization index, joint decoding at the DF relay.
    SnncRsJoint,
    /// Split quantization index, successive decoding at the DF relay.
    SnncRsSuccessive,
    /// Mixed DF / short-message NNC without splitting.
    DfSnnc,
    DfDf,
    Nnc,
    Cutset,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::SnncRsJoint,
        SchemeId::SnncRsSuccessive,
        SchemeId::DfSnnc,
        SchemeId::DfDf,
        SchemeId::Nnc,
        SchemeId::Cutset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::SnncRsJoint => "SNNC_RS_JOINT",
            SchemeId::SnncRsSuccessive => "SNNC_RS_SUCCESSIVE",
            SchemeId::DfSnnc => "DF_SNNC",
            SchemeId::DfDf => "DF_DF",
            SchemeId::Nnc => "NNC",
            SchemeId::Cutset => "CUTSET",
        }
    }

    /// Every scheme except the cut-set upper bound.
    pub fn is_achievable(self) -> bool {
        self != SchemeId::Cutset
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == norm)
            .ok_or_else(|| Error::InvalidParams(format!("unknown scheme {s:?}")))
    }
}

/// Serialized evaluation of one scheme at fixed parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub scheme: SchemeId,
    pub params: serde_json::Value,
    pub bounds: RateBounds,
    pub rate: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_values() {
        assert_eq!(cap(0.0).unwrap(), 0.0);
        assert!((cap(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((cap(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(cap(-0.1).is_err());
    }

    fn bounds(v: &[(u32, f64)]) -> RateBounds {
        let mut b = RateBounds::new();
        for (i, &(m, x)) in v.iter().enumerate() {
            b.push(&format!("b{i}"), m, x).unwrap();
        }
        b
    }

    #[test]
    fn rate_is_min_over_bounds() {
        assert_eq!(bounds(&[(1, 0.5), (1, 0.7), (2, 1.2)]).rate(), 0.5);
        let b = bounds(&[(1, 0.9), (2, 1.0)]);
        assert_eq!(b.rate(), 0.5);
        assert_eq!(b.binding().unwrap().name, "b1");
        assert_eq!(bounds(&[(1, 0.9), (1, -0.2)]).rate(), 0.0);
        assert_eq!(snncrs_rate(&bounds(&[(1, 0.3)])), 0.3);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut b = RateBounds::new();
        b.push("x", 1, 1.0).unwrap();
        assert!(b.push("x", 1, 2.0).is_err());
        assert!(b.push("y", 0, 2.0).is_err());
        assert!(b.push("z", 1, f64::NAN).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.name().parse::<SchemeId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
        assert_eq!("df-snnc".parse::<SchemeId>().unwrap(), SchemeId::DfSnnc);
        assert!("relay".parse::<SchemeId>().is_err());
    }

    #[test]
    fn params_box() {
        assert!(SnncRsParams::new(0.3, 0.4, 1.0).is_ok());
        assert!(SnncRsParams::new(0.3, 0.4, f64::INFINITY).is_ok());
        assert!(SnncRsParams::new(1.3, 0.4, 1.0).is_err());
        assert!(SnncRsParams::new(0.3, -0.1, 1.0).is_err());
        assert!(SnncRsParams::new(0.3, 0.4, 0.0).is_err());
        assert!(SnncRsParams::new(0.3, 0.4, f64::NAN).is_err());
    }
}
