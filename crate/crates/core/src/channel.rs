//! The Gaussian two-relay channel.
//!
//! ```text
//! Y2 = h12 X1 + h32 X3 + Z2
//! Y3 = h13 X1 + h23 X2 + Z3
//! Y4 = h14 X1 + h24 X2 + h34 X3 + Z4,     Zi ~ N(0, 1)
//! ```
//!
//! Node 1 is the source, node 2 the decode-and-forward relay ("relay 1"),
//! node 3 the quantizing relay ("relay 2") and node 4 the destination.
//! Gains are real amplitudes; a link of length `d` has gain `d^(-gamma/2)`,
//! so received power falls off as `d^(-gamma)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PATHLOSS_EXPONENT: f64 = 2.0;

/// Amplitude gains and power constraints of the two-relay Gaussian channel.
///
/// Receiver noise variances are fixed to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub h12: f64,
    pub h13: f64,
    pub h14: f64,
    pub h23: f64,
    pub h24: f64,
    pub h32: f64,
    pub h34: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl ChannelGains {
    /// Checks that every gain and power is finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("h12", self.h12),
            ("h13", self.h13),
            ("h14", self.h14),
            ("h23", self.h23),
            ("h24", self.h24),
            ("h32", self.h32),
            ("h34", self.h34),
            ("P1", self.p1),
            ("P2", self.p2),
            ("P3", self.p3),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidChannel(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Direct link only: every gain touching a relay is zero.
    pub fn direct_only(h14: f64, p1: f64, p2: f64, p3: f64) -> Self {
        ChannelGains {
            h12: 0.0,
            h13: 0.0,
            h14,
            h23: 0.0,
            h24: 0.0,
            h32: 0.0,
            h34: 0.0,
            p1,
            p2,
            p3,
        }
    }

    /// The same channel with relay 2 (node 3) cut off from the network.
    pub fn without_relay2(&self) -> Self {
        ChannelGains {
            h13: 0.0,
            h23: 0.0,
            h32: 0.0,
            h34: 0.0,
            ..*self
        }
    }

    /// Relabels the two relays. Used to check symmetric schemes.
    pub fn swap_relays(&self) -> Self {
        ChannelGains {
            h12: self.h13,
            h13: self.h12,
            h14: self.h14,
            h23: self.h32,
            h24: self.h34,
            h32: self.h23,
            h34: self.h24,
            p1: self.p1,
            p2: self.p3,
            p3: self.p2,
        }
    }

    /// Sets all three power constraints to `p`.
    pub fn with_common_power(&self, p: f64) -> Self {
        ChannelGains {
            p1: p,
            p2: p,
            p3: p,
            ..*self
        }
    }
}

/// Planar positions of the four nodes plus the pathloss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePlacement {
    /// Source, relay 1, relay 2, destination.
    pub positions: [[f64; 2]; 4],
    pub gamma: f64,
}

impl NodePlacement {
    pub fn new(positions: [[f64; 2]; 4], gamma: f64) -> Result<Self> {
        let placement = NodePlacement { positions, gamma };
        placement.validate()?;
        Ok(placement)
    }

    /// Distance between nodes `i` and `j`, numbered 1..=4.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let a = self.positions[i - 1];
        let b = self.positions[j - 1];
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "pathloss exponent must be > 0, got {}",
                self.gamma
            )));
        }
        if self.positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite coordinate".into()));
        }
        for i in 1..=4 {
            for j in (i + 1)..=4 {
                if self.distance(i, j) <= 0.0 {
                    return Err(Error::InvalidGeometry(format!("nodes {i} and {j} are co-located")));
                }
            }
        }
        Ok(())
    }

    /// Amplitude gain `d^(-gamma/2)` of the link between `i` and `j`.
    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.distance(i, j).powf(-self.gamma / 2.0)
    }

    /// Uniform scaling of every coordinate.
    pub fn scaled(&self, s: f64) -> Self {
        let mut positions = self.positions;
        for p in positions.iter_mut() {
            p[0] *= s;
            p[1] *= s;
        }
        NodePlacement {
            positions,
            gamma: self.gamma,
        }
    }
}

/// Derives the channel gains of a placement under the `d^(-gamma/2)` law.
pub fn gains_from_geometry(placement: &NodePlacement, powers: [f64; 3]) -> Result<ChannelGains> {
    placement.validate()?;
    let g = |i, j| placement.gain(i, j);
    let gains = ChannelGains {
        h12: g(1, 2),
        h13: g(1, 3),
        h14: g(1, 4),
        h23: g(2, 3),
        h24: g(2, 4),
        h32: g(3, 2),
        h34: g(3, 4),
        p1: powers[0],
        p2: powers[1],
        p3: powers[2],
    };
    gains.validate()?;
    Ok(gains)
}

/// Distances of the collinear source -- relay 1 -- relay 2 -- destination layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineGeometry {
    pub d12: f64,
    pub d34: f64,
    pub d14: f64,
}

impl LineGeometry {
    /// Places node 1 at 0, node 2 at `d12`, node 3 at `d14 - d34`, node 4 at `d14`.
    pub fn placement(&self, gamma: f64) -> Result<NodePlacement> {
        let LineGeometry { d12, d34, d14 } = *self;
        let ok = d12 > 0.0 && d34 > 0.0 && d12 < d14 && d34 < d14 && d12 + d34 < d14;
        if !ok || ![d12, d34, d14].iter().all(|d| d.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "line network needs 0 < d12, 0 < d34 and d12 + d34 < d14 (got d12={d12}, d34={d34}, d14={d14})"
            )));
        }
        NodePlacement::new([[0.0, 0.0], [d12, 0.0], [d14 - d34, 0.0], [d14, 0.0]], gamma)
    }
}

/// Gains of the collinear network with the given distances and powers.
pub fn line_network(d12: f64, d34: f64, d14: f64, gamma: f64, p1: f64, p2: f64, p3: f64) -> Result<ChannelGains> {
    let placement = LineGeometry { d12, d34, d14 }.placement(gamma)?;
    gains_from_geometry(&placement, [p1, p2, p3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_distance_is_unit_gain() {
        for gamma in [1.0, 2.0, 3.5] {
            let p = NodePlacement {
                positions: [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                gamma,
            };
            assert_relative_eq!(p.gain(1, 2), 1.0);
        }
    }

    #[test]
    fn quarter_distance_square_law() {
        let p = NodePlacement::new([[0.0, 0.0], [0.25, 0.0], [0.5, 0.3], [1.0, 0.0]], 2.0).unwrap();
        assert_relative_eq!(p.gain(1, 2), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn fig4_line_distances() {
        let p = LineGeometry {
            d12: 0.1,
            d34: 0.05,
            d14: 1.0,
        }
        .placement(2.0)
        .unwrap();
        assert_relative_eq!(p.distance(1, 3), 0.95, epsilon = 1e-12);
        assert_relative_eq!(p.distance(2, 3), 0.85, epsilon = 1e-12);
        assert_relative_eq!(p.distance(2, 4), 0.9, epsilon = 1e-12);

        let ch = line_network(0.1, 0.05, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(ch.h14, 1.0, epsilon = 1e-12);
        assert_relative_eq!(ch.h12, 10.0, epsilon = 1e-9);
        assert_relative_eq!(ch.h34, 20.0, epsilon = 1e-9);
        assert_relative_eq!(ch.h32, 1.0 / 0.85, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_line_gains() {
        let ch = line_network(0.2, 0.2, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(ch.h12, 5.0, epsilon = 1e-12);
        assert_relative_eq!(ch.h34, 5.0, epsilon = 1e-12);
        assert_relative_eq!(ch.h14, 1.0, epsilon = 1e-12);
        assert_eq!(ch.h23, ch.h32);
    }

    #[test]
    fn colocated_relays_rejected() {
        let err = line_network(0.5, 0.5, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidGeometry(_)));
        assert!(line_network(0.0, 0.2, 1.0, 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(line_network(1.2, 0.2, 1.0, 2.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_distance_and_bad_exponent_rejected() {
        let same = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(NodePlacement::new(same, 2.0).is_err());
        let fine = [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(NodePlacement::new(fine, 0.0).is_err());
        assert!(NodePlacement::new(fine, -1.0).is_err());
    }

    #[test]
    fn negative_power_rejected() {
        let p = NodePlacement::new([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [2.0, 0.0]], 2.0).unwrap();
        assert!(gains_from_geometry(&p, [1.0, -1.0, 1.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn placement() -> impl Strategy<Value = NodePlacement> {
            (prop::array::uniform4(prop::array::uniform2(-5.0f64..5.0)), 1.0f64..5.0).prop_filter_map(
                "co-located",
                |(positions, gamma)| {
                    NodePlacement::new(positions, gamma)
                        .ok()
                        .filter(|p| (1..=4).all(|i| (i + 1..=4).all(|j| p.distance(i, j) > 1e-3)))
                },
            )
        }

        proptest! {
            #[test]
            fn scaling_scales_gains(p in placement(), s in 0.1f64..10.0) {
                let a = gains_from_geometry(&p, [1.0; 3]).unwrap();
                let b = gains_from_geometry(&p.scaled(s), [1.0; 3]).unwrap();
                let f = s.powf(-p.gamma / 2.0);
                for (x, y) in [(a.h12, b.h12), (a.h14, b.h14), (a.h23, b.h23), (a.h34, b.h34)] {
                    prop_assert!((y - f * x).abs() <= 1e-9 * y.abs().max(1.0));
                }
                prop_assert!((a.h12 / a.h34 - b.h12 / b.h34).abs() <= 1e-9 * (a.h12 / a.h34).max(1.0));
            }

            #[test]
            fn reciprocal_links_match(p in placement()) {
                let g = gains_from_geometry(&p, [1.0; 3]).unwrap();
                prop_assert_eq!(g.h23, g.h32);
            }
        }
    }
}
