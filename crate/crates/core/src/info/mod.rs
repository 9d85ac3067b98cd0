//! Exact information measures.
//!
//! Two evaluators share one interface, [`InfoSource`]: dense finite-alphabet
//! joint distributions ([`JointPmf`]) and jointly Gaussian linear systems
//! ([`GaussianSystem`]). Rate expressions are written once against the trait
//! and evaluated on either.

mod gaussian;
mod pmf;

pub use gaussian::{Field, GaussianMi, GaussianSystem, EIGEN_FLOOR};
pub use pmf::{build_joint_thm2, ConditionalPmf, JointPmf, MAX_CELLS};

use crate::error::Result;

/// Variable names used by the two-relay rate expressions.
pub mod labels {
    pub const X1: &str = "X1";
    pub const X2: &str = "X2";
    pub const X3: &str = "X3";
    pub const X30: &str = "X30";
    pub const X31: &str = "X31";
    pub const Y2: &str = "Y2";
    pub const Y3: &str = "Y3";
    pub const Y4: &str = "Y4";
    pub const YHAT2: &str = "Yhat2";
    pub const YHAT3: &str = "Yhat3";

    /// Label order of the joint built by [`build_joint_thm2`](super::build_joint_thm2).
    pub const THM2_ORDER: [&str; 8] = [X1, X2, X30, X31, YHAT3, Y2, Y3, Y4];
}

/// Anything that can evaluate a conditional mutual information `I(A;B|C)` in bits.
pub trait InfoSource {
    fn mutual_info(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64>;

    /// Short provenance string for reports.
    fn provenance(&self) -> String;
}

impl InfoSource for JointPmf {
    fn mutual_info(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        JointPmf::mutual_info(self, a, b, c)
    }

    fn provenance(&self) -> String {
        format!("pmf{:?}x{:?}", self.labels(), self.sizes())
    }
}

impl InfoSource for GaussianSystem {
    fn mutual_info(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        self.gaussian_mi(a, b, c).map(|mi| mi.bits)
    }

    fn provenance(&self) -> String {
        format!("gaussian{:?}", self.labels())
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

pub(crate) fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for g in groups {
        for l in g.iter() {
            if !seen.insert(*l) {
                return Err(crate::Error::Labels(format!(
                    "label {l} appears in more than one group"
                )));
            }
        }
    }
    Ok(())
}
