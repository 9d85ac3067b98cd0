//! Reference schemes: two-relay DF, two-relay NNC and the cut-set bound.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{cap_unchecked as c, RateBounds};
use crate::channel::ChannelGains;
use crate::error::{Error, Result};
use crate::info::labels::{X1, X2, X3, Y2, Y3, Y4, YHAT2, YHAT3};
use crate::info::{Field, GaussianSystem, InfoSource};

/// Source/relay power splits of sequential two-relay DF.
///
/// The source sends fresh (`g1a`), relay-1-coherent (`g1b`) and
/// relay-2-coherent (`g1c`) components; relay 1 puts `g2` of its power on the
/// part coherent with the source's new message and the rest on the part
/// coherent with relay 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfSplits {
    pub g1a: f64,
    pub g1b: f64,
    pub g1c: f64,
    pub g2: f64,
}

impl DfSplits {
    pub fn new(g1a: f64, g1b: f64, g1c: f64, g2: f64) -> Result<Self> {
        let s = Self { g1a, g1b, g1c, g2 };
        s.validate()?;
        Ok(s)
    }

    /// Maps the unit cube onto the simplex: `g1a = s`, `g1b = (1-s) t`, `g1c = (1-s)(1-t)`.
    pub fn from_unit(s: f64, t: f64, g2: f64) -> Result<Self> {
        for (n, v) in [("s", s), ("t", t)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{n} = {v} outside [0, 1]")));
            }
        }
        Self::new(s, (1.0 - s) * t, (1.0 - s) * (1.0 - t), g2)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.g1a, self.g1b, self.g1c, self.g2];
        if parts.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParams(format!("DF splits outside [0, 1]: {self:?}")));
        }
        if (self.g1a + self.g1b + self.g1c - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("source splits must sum to 1: {self:?}")));
        }
        Ok(())
    }

    /// Input correlations `(rho12, rho13, rho23)` these splits induce.
    pub fn correlations(&self) -> Correlations {
        let g2b = 1.0 - self.g2;
        Correlations {
            rho12: ((self.g1b * self.g2).sqrt() + (self.g1c * g2b).sqrt()).min(1.0),
            rho13: self.g1c.sqrt(),
            rho23: g2b.sqrt(),
        }
    }
}

/// Covariance of `(X1, X2, X3)` under the DF splits.
pub fn dfdf_input_covariance(ch: &ChannelGains, s: &DfSplits) -> Result<DMatrix<f64>> {
    s.validate()?;
    // Rows: X1, X2, X3; columns: fresh, relay-1-coherent, relay-2-coherent latents.
    let g2b = 1.0 - s.g2;
    let load = DMatrix::from_row_slice(
        3,
        3,
        &[
            (s.g1a * ch.p1).sqrt(),
            (s.g1b * ch.p1).sqrt(),
            (s.g1c * ch.p1).sqrt(),
            0.0,
            (s.g2 * ch.p2).sqrt(),
            (g2b * ch.p2).sqrt(),
            0.0,
            0.0,
            ch.p3.sqrt(),
        ],
    );
    Ok(&load * load.transpose())
}

/// The three DF bounds: relay 1 decodes, relay 2 decodes, destination decodes.
pub fn dfdf_bounds_gaussian(ch: &ChannelGains, s: &DfSplits) -> Result<RateBounds> {
    ch.validate()?;
    s.validate()?;
    let ChannelGains {
        h12,
        h13,
        h14,
        h23,
        h24,
        h34,
        p1,
        p2,
        p3,
        ..
    } = *ch;
    let g2b = 1.0 - s.g2;
    let r1 = c(s.g1a * h12 * h12 * p1);
    let r2 = c(s.g1a * h13 * h13 * p1 + ((s.g1b * p1).sqrt() * h13 + (s.g2 * p2).sqrt() * h23).powi(2));
    let r3 = c(s.g1a * h14 * h14 * p1
        + ((s.g1b * p1).sqrt() * h14 + (s.g2 * p2).sqrt() * h24).powi(2)
        + ((s.g1c * p1).sqrt() * h14 + (g2b * p2).sqrt() * h24 + p3.sqrt() * h34).powi(2));
    RateBounds::new()
        .with("df_relay1", 1, r1)?
        .with("df_relay2", 1, r2)?
        .with("df_dest", 1, r3)
}

pub fn dfdf_rate_gaussian(ch: &ChannelGains, s: &DfSplits) -> Result<f64> {
    Ok(dfdf_bounds_gaussian(ch, s)?.rate())
}

/// Independent Gaussian inputs, both relays quantizing: `Yhat_k = Y_k + N(0, nhat_k)`.
pub fn nnc_system(ch: &ChannelGains, nhat2: f64, nhat3: f64) -> Result<GaussianSystem> {
    ch.validate()?;
    let mut sys = GaussianSystem::independent_inputs(&[(X1, ch.p1), (X2, ch.p2), (X3, ch.p3)], Field::Complex)?;
    sys.add_output(Y2, &[(X1, ch.h12), (X3, ch.h32)])?;
    sys.add_output(Y3, &[(X1, ch.h13), (X2, ch.h23)])?;
    sys.add_output(Y4, &[(X1, ch.h14), (X2, ch.h24), (X3, ch.h34)])?;
    sys.add_quantized(YHAT2, Y2, nhat2)?;
    sys.add_quantized(YHAT3, Y3, nhat3)?;
    Ok(sys)
}

/// One bound per set `S` of relays on the source side of the cut, named
/// `nnc_S{}`, `nnc_S{2}`, `nnc_S{3}`, `nnc_S{2,3}`.
pub fn nnc_bounds_gaussian(ch: &ChannelGains, nhat2: f64, nhat3: f64) -> Result<RateBounds> {
    let sys = nnc_system(ch, nhat2, nhat3)?;
    let relays = [(2, X2, Y2, YHAT2), (3, X3, Y3, YHAT3)];
    let mut out = RateBounds::new();
    for mask in 0..4u8 {
        let (mut xs, mut xsc, mut ys, mut yhs, mut yhsc, mut names) =
            (vec![X1], vec![], vec![], vec![], vec![], vec![]);
        for (bit, &(k, x, y, yh)) in relays.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                xs.push(x);
                ys.push(y);
                yhs.push(yh);
                names.push(k.to_string());
            } else {
                xsc.push(x);
                yhsc.push(yh);
            }
        }
        let mut obs = yhsc.clone();
        obs.push(Y4);
        let gain = sys.mutual_info(&xs, &obs, &xsc)?;
        let mut given = vec![X1, X2, X3];
        given.extend(&obs);
        let pen = if ys.is_empty() {
            0.0
        } else {
            sys.mutual_info(&ys, &yhs, &given)?
        };
        out.push(&format!("nnc_S{{{}}}", names.join(",")), 1, gain - pen)?;
    }
    Ok(out)
}

/// Pairwise input correlation coefficients of `(X1, X2, X3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Correlations {
    pub rho12: f64,
    pub rho13: f64,
    pub rho23: f64,
}

impl Correlations {
    pub fn covariance(&self, ch: &ChannelGains) -> DMatrix<f64> {
        let (p1, p2, p3) = (ch.p1, ch.p2, ch.p3);
        let c12 = self.rho12 * (p1 * p2).sqrt();
        let c13 = self.rho13 * (p1 * p3).sqrt();
        let c23 = self.rho23 * (p2 * p3).sqrt();
        DMatrix::from_row_slice(3, 3, &[p1, c12, c13, c12, p2, c23, c13, c23, p3])
    }
}

/// Channel outputs driven by correlated inputs.
pub fn cutset_system(ch: &ChannelGains, corr: &Correlations) -> Result<GaussianSystem> {
    ch.validate()?;
    for r in [corr.rho12, corr.rho13, corr.rho23] {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::InvalidParams(format!("correlation {r} outside [-1, 1]")));
        }
    }
    let mut sys = GaussianSystem::with_inputs(&[X1, X2, X3], corr.covariance(ch), Field::Complex)?;
    sys.add_output(Y2, &[(X1, ch.h12), (X3, ch.h32)])?;
    sys.add_output(Y3, &[(X1, ch.h13), (X2, ch.h23)])?;
    sys.add_output(Y4, &[(X1, ch.h14), (X2, ch.h24), (X3, ch.h34)])?;
    Ok(sys)
}

/// The four source/destination cut values at fixed correlations.
pub fn cutset_bounds_gaussian(ch: &ChannelGains, corr: &Correlations) -> Result<RateBounds> {
    let sys = cutset_system(ch, corr)?;
    RateBounds::new()
        .with("cut_1", 1, sys.mutual_info(&[X1], &[Y2, Y3, Y4], &[X2, X3])?)?
        .with("cut_12", 1, sys.mutual_info(&[X1, X2], &[Y3, Y4], &[X3])?)?
        .with("cut_13", 1, sys.mutual_info(&[X1, X3], &[Y2, Y4], &[X2])?)?
        .with("cut_123", 1, sys.mutual_info(&[X1, X2, X3], &[Y4], &[])?)
}

/// Min-cut value at fixed correlations; the bound proper is its maximum over them.
pub fn cutset_bound_gaussian(ch: &ChannelGains, corr: &Correlations) -> Result<f64> {
    Ok(cutset_bounds_gaussian(ch, corr)?.rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn channel() -> ChannelGains {
        ChannelGains {
            h12: 2.0,
            h13: 0.7,
            h14: 0.5,
            h23: 1.4,
            h24: 0.9,
            h32: 0.6,
            h34: 1.8,
            p1: 1.5,
            p2: 2.0,
            p3: 0.7,
        }
    }

    #[test]
    fn splits_domain() {
        assert!(DfSplits::new(0.5, 0.5, 0.5, 0.5).is_err());
        assert!(DfSplits::from_unit(1.2, 0.0, 0.0).is_err());
        let s = DfSplits::from_unit(0.2, 0.25, 0.6).unwrap();
        assert_abs_diff_eq!(s.g1b, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.g1c, 0.6, epsilon = 1e-15);
    }

    #[test]
    fn dfdf_degenerate_relay2() {
        let mut ch = channel();
        ch.h13 = 0.0;
        ch.h23 = 0.0;
        ch.h34 = 0.0;
        let s = DfSplits::new(0.4, 0.6, 0.0, 1.0).unwrap();
        let b = dfdf_bounds_gaussian(&ch, &s).unwrap();
        assert_eq!(b.get("df_relay2").unwrap().value, 0.0);
        assert_eq!(dfdf_rate_gaussian(&ch, &s).unwrap(), 0.0);
        let two_hop = c(0.4 * 4.0 * 1.5).min(c(
            0.4 * 0.25 * 1.5 + ((0.6f64 * 1.5).sqrt() * 0.5 + 2f64.sqrt() * 0.9).powi(2)
        ));
        assert_abs_diff_eq!(
            b.get("df_relay1").unwrap().value.min(b.get("df_dest").unwrap().value),
            two_hop,
            epsilon = 1e-14
        );
    }

    #[test]
    fn dfdf_no_relay_gains_is_zero() {
        let ch = ChannelGains::direct_only(0.8, 1.0, 1.0, 1.0);
        let s = DfSplits::new(1.0, 0.0, 0.0, 0.5).unwrap();
        let b = dfdf_bounds_gaussian(&ch, &s).unwrap();
        assert_abs_diff_eq!(b.get("df_dest").unwrap().value, c(0.64), epsilon = 1e-14);
        assert_eq!(b.rate(), 0.0);
    }

    #[test]
    fn correlations_match_covariance() {
        let ch = channel();
        let s = DfSplits::from_unit(0.3, 0.4, 0.7).unwrap();
        let cov = dfdf_input_covariance(&ch, &s).unwrap();
        let r = s.correlations();
        let want = r.covariance(&ch);
        assert!((cov - want).abs().max() < 1e-12);
    }

    #[test]
    fn nnc_washout() {
        let ch = channel();
        let b = nnc_bounds_gaussian(&ch, 1e9, 1e9).unwrap();
        assert_abs_diff_eq!(b.rate(), c(0.25 * 1.5), epsilon = 1e-7);
        let off = nnc_bounds_gaussian(&ch, f64::INFINITY, f64::INFINITY).unwrap();
        assert_abs_diff_eq!(off.rate(), c(0.25 * 1.5), epsilon = 1e-12);
    }

    #[test]
    fn nnc_without_relay_gains() {
        let ch = ChannelGains::direct_only(0.7, 1.0, 1.0, 1.0);
        let b = nnc_bounds_gaussian(&ch, 2.0, 3.0).unwrap();
        assert_abs_diff_eq!(b.get("nnc_S{}").unwrap().value, c(0.49), epsilon = 1e-12);
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn cutset_trivial_and_coherent() {
        let ch = ChannelGains::direct_only(0.6, 2.0, 2.0, 1.0);
        assert_abs_diff_eq!(
            cutset_bound_gaussian(&ch, &Correlations::default()).unwrap(),
            c(0.72),
            epsilon = 1e-12
        );
        // Fully coherent X1, X2 with h24 = h14: the broadcast cut sees (2 h14)^2 P1.
        let mut ch = ch;
        ch.h24 = 0.6;
        let b = cutset_bounds_gaussian(
            &ch,
            &Correlations {
                rho12: 1.0,
                rho13: 0.0,
                rho23: 0.0,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(b.get("cut_123").unwrap().value, c(4.0 * 0.36 * 2.0), epsilon = 1e-9);
    }

    #[test]
    fn cutset_rejects_non_psd() {
        let ch = channel();
        let bad = Correlations {
            rho12: 0.99,
            rho13: 0.99,
            rho23: -0.99,
        };
        assert!(matches!(cutset_bound_gaussian(&ch, &bad), Err(Error::NotPsd(_))));
    }

    proptest! {
        #[test]
        fn dfdf_matches_log_det(
            s in 0.0..1.0f64, t in 0.0..1.0f64, g2 in 0.01..0.99f64,
            h in proptest::array::uniform7(0.05..3.0f64), p in proptest::array::uniform3(0.1..5.0f64),
        ) {
            let ch = ChannelGains {
                h12: h[0], h13: h[1], h14: h[2], h23: h[3], h24: h[4], h32: h[5], h34: h[6],
                p1: p[0], p2: p[1], p3: p[2],
            };
            let sp = DfSplits::from_unit(s, t, g2).unwrap();
            let mut sys = GaussianSystem::with_inputs(&[X1, X2, X3], dfdf_input_covariance(&ch, &sp).unwrap(), Field::Complex).unwrap();
            sys.add_output(Y2, &[(X1, ch.h12), (X3, ch.h32)]).unwrap();
            sys.add_output(Y3, &[(X1, ch.h13), (X2, ch.h23)]).unwrap();
            sys.add_output(Y4, &[(X1, ch.h14), (X2, ch.h24), (X3, ch.h34)]).unwrap();
            // Skip near-singular input covariances where conditioning loses precision.
            let min_eig = dfdf_input_covariance(&ch, &sp).unwrap().symmetric_eigenvalues().min();
            prop_assume!(min_eig > 1e-6);
            let b = dfdf_bounds_gaussian(&ch, &sp).unwrap();
            let o1 = sys.mutual_info(&[X1], &[Y2], &[X2, X3]).unwrap();
            let o2 = sys.mutual_info(&[X1, X2], &[Y3], &[X3]).unwrap();
            let o3 = sys.mutual_info(&[X1, X2, X3], &[Y4], &[]).unwrap();
            prop_assert!((b.get("df_relay1").unwrap().value - o1).abs() < 1e-9);
            prop_assert!((b.get("df_relay2").unwrap().value - o2).abs() < 1e-9);
            prop_assert!((b.get("df_dest").unwrap().value - o3).abs() < 1e-9);
        }

        #[test]
        fn nnc_relay_swap_symmetry(
            h in proptest::array::uniform7(0.0..3.0f64), p in proptest::array::uniform3(0.1..5.0f64),
            n2 in 0.01..100.0f64, n3 in 0.01..100.0f64,
        ) {
            let ch = ChannelGains {
                h12: h[0], h13: h[1], h14: h[2], h23: h[3], h24: h[4], h32: h[5], h34: h[6],
                p1: p[0], p2: p[1], p3: p[2],
            };
            let a = nnc_bounds_gaussian(&ch, n2, n3).unwrap();
            let b = nnc_bounds_gaussian(&ch.swap_relays(), n3, n2).unwrap();
            for (x, y) in [("nnc_S{}", "nnc_S{}"), ("nnc_S{2}", "nnc_S{3}"), ("nnc_S{3}", "nnc_S{2}"), ("nnc_S{2,3}", "nnc_S{2,3}")] {
                prop_assert!((a.get(x).unwrap().value - b.get(y).unwrap().value).abs() < 1e-9);
            }
        }
    }
}
