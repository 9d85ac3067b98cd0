//! Sufficient conditions under which some split-scheme bounds are loose.

use serde::Serialize;

use super::snncrs::snncrs_system;
use super::SnncRsParams;
use crate::channel::ChannelGains;
use crate::error::Result;
use crate::info::labels::{X1, X2, X30, X31, Y2, Y3, Y4, YHAT3};
use crate::info::InfoSource;

/// Condition flags reported next to every split-scheme evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RemarkFlags {
    /// `I(X30;Y4|X1X2) < I(X30;Y2|X1X2)`: relay 1 can decode the whole cloud index.
    pub remark2_full_decode: bool,
    /// `I(X30;Y4) < I(X30;Y2|X2)`: the `2R` bound is loose.
    pub remark3: bool,
    /// `I(X1X2X30;Y4) < I(X1X30;Y2|X2)`: the `jd9` bound is loose.
    pub remark4: bool,
    /// `h32 > h34`; only defined for Gaussian channels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian_full: Option<bool>,
    /// `I(Yhat3;Y3|X1X2X30X31Y4) <= I(X30X31;Y4|X1X2)`, the condition dropped from
    /// the joint-decoding theorem.
    pub condition_holds: bool,
}

/// Evaluates the flags on any information source over the split-scheme labels.
pub fn remark_conditions(src: &impl InfoSource) -> Result<RemarkFlags> {
    let full = src.mutual_info(&[X30], &[Y4], &[X1, X2])? < src.mutual_info(&[X30], &[Y2], &[X1, X2])?;
    let r3 = src.mutual_info(&[X30], &[Y4], &[])? < src.mutual_info(&[X30], &[Y2], &[X2])?;
    let r4 = src.mutual_info(&[X1, X2, X30], &[Y4], &[])? < src.mutual_info(&[X1, X30], &[Y2], &[X2])?;
    let pen = src.mutual_info(&[YHAT3], &[Y3], &[X1, X2, X30, X31, Y4])?;
    let cond = pen <= src.mutual_info(&[X30, X31], &[Y4], &[X1, X2])?;
    Ok(RemarkFlags {
        remark2_full_decode: full,
        remark3: r3,
        remark4: r4,
        gaussian_full: None,
        condition_holds: cond,
    })
}

/// Flags on the Gaussian channel, including the gain comparison `h32 > h34`.
pub fn remark_conditions_gaussian(ch: &ChannelGains, p: &SnncRsParams) -> Result<RemarkFlags> {
    let mut flags = remark_conditions(&snncrs_system(ch, p)?)?;
    flags.gaussian_full = Some(ch.h32 > ch.h34);
    Ok(flags)
}
