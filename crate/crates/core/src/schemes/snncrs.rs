//! Bounds of the split-index scheme: relay 1 decodes-and-forwards, relay 2
//! quantizes and sends its index as a cloud center `X30` plus satellite `X31`.

use nalgebra::DMatrix;

use super::{cap_unchecked as c, RateBounds, SnncRsParams};
use crate::channel::ChannelGains;
use crate::error::{Error, Result};
use crate::info::labels::{X1, X2, X30, X31, Y2, Y3, Y4, YHAT3};
use crate::info::{Field, GaussianSystem, InfoSource, JointPmf};

const FACTORIZATION_TOL: f64 = 1e-9;

/// Closed-form Gaussian bounds `jd1, jd2, jd3, jd9, 2R` of the joint-decoding scheme.
pub fn snncrs_bounds_gaussian(ch: &ChannelGains, p: &SnncRsParams) -> Result<RateBounds> {
    ch.validate()?;
    p.validate()?;
    let ChannelGains {
        h12,
        h13,
        h14,
        h23,
        h24,
        h32,
        h34,
        p1,
        p2,
        p3,
    } = *ch;
    let (a, ab) = (p.alpha, 1.0 - p.alpha);
    let (b, bb) = (p.beta, 1.0 - p.beta);
    let n = p.nhat3;
    let q = 1.0 / (1.0 + n);
    let coh = (b * p1 * p2).sqrt();
    let penalty = c(1.0 / n);
    let dest = |relay_power: f64| c(h14 * h14 * p1 + h24 * h24 * p2 + 2.0 * h14 * h24 * coh + h34 * h34 * relay_power);

    let b1 = c(bb * h12 * h12 * p1 / (1.0 + ab * h32 * h32 * p3));
    let b2 = c(p1 * (h13 * h13 * q + h14 * h14)
        + p2 * (h23 * h23 * q + h24 * h24)
        + 2.0 * coh * (h13 * h23 * q + h14 * h24)
        + bb * p1 * p2 * q * (h13 * h24 - h23 * h14).powi(2));
    let b3 = dest(p3) - penalty;
    let b4 =
        c(ab * h34 * h34 * p3) + c((bb * h12 * h12 * p1 + a * h32 * h32 * p3) / (1.0 + ab * h32 * h32 * p3)) - penalty;
    let b5 = dest(ab * p3) - penalty
        + c(a * h32 * h32 * p3 / (1.0 + ab * h32 * h32 * p3))
        + c(bb * h12 * h12 * p1 / (1.0 + h32 * h32 * p3));

    RateBounds::new()
        .with("jd1", 1, b1)?
        .with("jd2", 1, b2)?
        .with("jd3", 1, b3)?
        .with("jd9", 1, b4)?
        .with("2R", 2, b5)
}

/// Gaussian bounds of the unsplit mixed scheme: the split scheme at `alpha = 0`
/// keeping only its first three bounds.
pub fn dfsnnc_bounds_gaussian(ch: &ChannelGains, beta: f64, nhat3: f64) -> Result<RateBounds> {
    let p = SnncRsParams::new(0.0, beta, nhat3)?;
    Ok(snncrs_bounds_gaussian(ch, &p)?.truncated(3))
}

/// Complex Gaussian system induced by the split scheme's inputs.
///
/// `X2 ~ N(0, P2)`, `X1 = sqrt(beta P1 / P2) X2 + N(0, (1 - beta) P1)`,
/// `X30 ~ N(0, alpha P3)` and `X31 ~ N(0, (1 - alpha) P3)` independent, relay 2
/// sends `X30 + X31`, and `Yhat3 = Y3 + N(0, nhat3)`.
pub fn snncrs_system(ch: &ChannelGains, p: &SnncRsParams) -> Result<GaussianSystem> {
    ch.validate()?;
    p.validate()?;
    let cross = (p.beta * ch.p1 * ch.p2).sqrt();
    let mut cov = DMatrix::zeros(4, 4);
    cov[(0, 0)] = ch.p1;
    cov[(1, 1)] = ch.p2;
    cov[(0, 1)] = cross;
    cov[(1, 0)] = cross;
    cov[(2, 2)] = p.alpha * ch.p3;
    cov[(3, 3)] = (1.0 - p.alpha) * ch.p3;
    let mut sys = GaussianSystem::with_inputs(&[X1, X2, X30, X31], cov, Field::Complex)?;
    sys.add_output(Y2, &[(X1, ch.h12), (X30, ch.h32), (X31, ch.h32)])?;
    sys.add_output(Y3, &[(X1, ch.h13), (X2, ch.h23)])?;
    sys.add_output(Y4, &[(X1, ch.h14), (X2, ch.h24), (X30, ch.h34), (X31, ch.h34)])?;
    sys.add_quantized(YHAT3, Y3, p.nhat3)?;
    Ok(sys)
}

/// `I(Yhat3; Y3 | X1 X2 X30 X31 Y4)`, the quantization penalty shared by several bounds.
fn penalty(src: &impl InfoSource) -> Result<f64> {
    src.mutual_info(&[YHAT3], &[Y3], &[X1, X2, X30, X31, Y4])
}

/// Joint-decoding bounds evaluated on any information source.
pub fn thm2_bounds(src: &impl InfoSource) -> Result<RateBounds> {
    let pen = penalty(src)?;
    let relay_sum = src.mutual_info(&[X1, X30], &[Y2], &[X2])?;
    RateBounds::new()
        .with("jd1", 1, src.mutual_info(&[X1], &[Y2], &[X2, X30])?)?
        .with("jd2", 1, src.mutual_info(&[X1, X2], &[YHAT3, Y4], &[X30, X31])?)?
        .with("jd3", 1, src.mutual_info(&[X1, X2, X30, X31], &[Y4], &[])? - pen)?
        .with(
            "jd9",
            1,
            src.mutual_info(&[X31], &[Y4], &[X1, X2, X30])? - pen + relay_sum,
        )?
        .with(
            "2R",
            2,
            src.mutual_info(&[X1, X2, X31], &[Y4], &[X30])? - pen + relay_sum,
        )
}

/// Successive-decoding bounds plus the strict feasibility condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessiveBounds {
    pub bounds: RateBounds,
    /// `I(X31;Y4|X1 X2 X30) + I(X30;Y2|X2) - I(Yhat3;Y3|X1 X2 X30 X31 Y4)`; feasible iff > 0.
    pub feasibility_margin: f64,
}

impl SuccessiveBounds {
    pub fn feasible(&self) -> bool {
        self.feasibility_margin > 0.0
    }

    /// Max-R, or 0 when the feasibility condition fails.
    pub fn rate(&self) -> f64 {
        if self.feasible() {
            self.bounds.rate()
        } else {
            0.0
        }
    }
}

/// Successive-decoding bounds evaluated on any information source.
pub fn thm3_bounds(src: &impl InfoSource) -> Result<SuccessiveBounds> {
    let pen = penalty(src)?;
    let cloud = src.mutual_info(&[X30], &[Y2], &[X2])?;
    let bounds = RateBounds::new()
        .with("sd1", 1, src.mutual_info(&[X1], &[Y2], &[X2, X30])?)?
        .with("sd2", 1, src.mutual_info(&[X1, X2], &[YHAT3, Y4], &[X30, X31])?)?
        .with("sd3", 1, src.mutual_info(&[X1, X2, X30, X31], &[Y4], &[])? - pen)?
        .with("sd4", 1, src.mutual_info(&[X1, X2, X31], &[Y4], &[X30])? - pen + cloud)?;
    let margin = src.mutual_info(&[X31], &[Y4], &[X1, X2, X30])? + cloud - pen;
    Ok(SuccessiveBounds {
        bounds,
        feasibility_margin: margin,
    })
}

/// Checks that a joint factors as `P(x1x2) P(x30x31) P(yhat3|x30x31y3) P(y2y3y4|x1x2x30x31)`.
fn check_factorization(joint: &JointPmf) -> Result<()> {
    let tests: [(&str, &[&str], &[&str], &[&str]); 2] = [
        ("I(X1,X2;X30,X31)", &[X1, X2], &[X30, X31], &[]),
        (
            "I(Yhat3;X1,X2,Y2,Y4|X30,X31,Y3)",
            &[YHAT3],
            &[X1, X2, Y2, Y4],
            &[X30, X31, Y3],
        ),
    ];
    for (name, a, b, cond) in tests {
        let v = joint.mutual_info(a, b, cond)?;
        if v > FACTORIZATION_TOL {
            return Err(Error::Factorization {
                test: name.to_string(),
                value: v,
                tolerance: FACTORIZATION_TOL,
            });
        }
    }
    Ok(())
}

/// Joint-decoding bounds of a discrete joint over the eight scheme variables.
pub fn thm2_bounds_discrete(joint: &JointPmf) -> Result<RateBounds> {
    check_factorization(joint)?;
    thm2_bounds(joint)
}

/// Successive-decoding bounds of a discrete joint.
pub fn thm3_bounds_discrete(joint: &JointPmf) -> Result<SuccessiveBounds> {
    check_factorization(joint)?;
    thm3_bounds(joint)
}

/// Successive-decoding bounds on the Gaussian channel.
///
/// There is no printed closed form for this case; the bounds are the generic
/// log-det evaluation on the same input structure as [`snncrs_system`].
pub fn thm3_bounds_gaussian(ch: &ChannelGains, p: &SnncRsParams) -> Result<SuccessiveBounds> {
    thm3_bounds(&snncrs_system(ch, p)?)
}
