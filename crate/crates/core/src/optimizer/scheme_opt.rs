//! Scheme evaluators and their default search boxes.
//!
//! Parameter vectors per scheme:
//!
//! | scheme | coordinates |
//! |---|---|
//! | `SNNC_RS_JOINT`, `SNNC_RS_SUCCESSIVE` | `alpha, beta, nhat3` |
//! | `DF_SNNC` | `beta, nhat3` |
//! | `DF_DF` | `s, t, g2` (see [`DfSplits::from_unit`]) |
//! | `NNC` | `nhat2, nhat3` |
//! | `CUTSET` | `rho12, rho13, rho23` |

use super::{optimize, OptResult, Param, SearchBox};
use crate::channel::ChannelGains;
use crate::error::{Error, Result};
use crate::schemes::{
    cutset_bounds_gaussian, dfdf_bounds_gaussian, dfsnnc_bounds_gaussian, nnc_bounds_gaussian, snncrs_bounds_gaussian,
    thm3_bounds_gaussian, Correlations, DfSplits, RateBounds, SchemeId, SnncRsParams,
};

/// Upper end of the cut-set correlation box.
const RHO_MAX: f64 = 0.999;

/// Rate, bounds and binding bound of a scheme at one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rate: f64,
    pub bounds: RateBounds,
    /// Name of the bound that sets the rate; `"infeasible"` when a feasibility
    /// condition fails and `"psd"` when the cut-set covariance is invalid.
    pub binding: String,
}

impl Evaluation {
    fn from_bounds(bounds: RateBounds) -> Self {
        let binding = bounds.binding().map_or_else(String::new, |b| b.name.clone());
        Evaluation {
            rate: bounds.rate(),
            bounds,
            binding,
        }
    }
}

/// Default box of each scheme.
pub fn default_box(scheme: SchemeId) -> SearchBox {
    let nhat = |n: &str| Param::log(n, 1e-3, 1e3, true);
    let unit = |n: &str| Param::linear(n, 0.0, 1.0);
    let params = match scheme {
        SchemeId::SnncRsJoint | SchemeId::SnncRsSuccessive => vec![unit("alpha"), unit("beta"), nhat("nhat3")],
        SchemeId::DfSnnc => vec![unit("beta"), nhat("nhat3")],
        SchemeId::DfDf => vec![unit("s"), unit("t"), unit("g2")],
        SchemeId::Nnc => vec![nhat("nhat2"), nhat("nhat3")],
        SchemeId::Cutset => ["rho12", "rho13", "rho23"]
            .iter()
            .map(|n| Param::linear(n, 0.0, RHO_MAX))
            .collect(),
    };
    SearchBox::new(params)
}

fn dimension(scheme: SchemeId) -> usize {
    default_box(scheme).params.len()
}

/// Evaluates `scheme` at `x`. Parameter-range violations are errors; a
/// covariance that is not PSD yields rate 0 with binding `"psd"`.
pub fn evaluate_scheme(ch: &ChannelGains, scheme: SchemeId, x: &[f64]) -> Result<Evaluation> {
    let d = dimension(scheme);
    if x.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: x.len(),
        });
    }
    match scheme {
        SchemeId::SnncRsJoint => {
            let p = SnncRsParams::new(x[0], x[1], x[2])?;
            Ok(Evaluation::from_bounds(snncrs_bounds_gaussian(ch, &p)?))
        }
        SchemeId::SnncRsSuccessive => {
            let p = SnncRsParams::new(x[0], x[1], x[2])?;
            let sb = thm3_bounds_gaussian(ch, &p)?;
            let mut e = Evaluation::from_bounds(sb.bounds.clone());
            if !sb.feasible() {
                e.rate = 0.0;
                e.binding = "infeasible".into();
            }
            Ok(e)
        }
        SchemeId::DfSnnc => Ok(Evaluation::from_bounds(dfsnnc_bounds_gaussian(ch, x[0], x[1])?)),
        SchemeId::DfDf => Ok(Evaluation::from_bounds(dfdf_bounds_gaussian(
            ch,
            &DfSplits::from_unit(x[0], x[1], x[2])?,
        )?)),
        SchemeId::Nnc => Ok(Evaluation::from_bounds(nnc_bounds_gaussian(ch, x[0], x[1])?)),
        SchemeId::Cutset => {
            let corr = Correlations {
                rho12: x[0],
                rho13: x[1],
                rho23: x[2],
            };
            match cutset_bounds_gaussian(ch, &corr) {
                Ok(b) => Ok(Evaluation::from_bounds(b)),
                Err(Error::NotPsd(_)) => Ok(Evaluation {
                    rate: 0.0,
                    bounds: RateBounds::new(),
                    binding: "psd".into(),
                }),
                Err(e) => Err(e),
            }
        }
    }
}

/// Input correlations `(rho12, rho13, rho23)` induced by an achievable
/// scheme at its parameters, used to seed the cut-set search.
pub fn induced_correlations(scheme: SchemeId, x: &[f64]) -> Result<Correlations> {
    Ok(match scheme {
        SchemeId::SnncRsJoint | SchemeId::SnncRsSuccessive => Correlations {
            rho12: x[1].sqrt(),
            ..Default::default()
        },
        SchemeId::DfSnnc => Correlations {
            rho12: x[0].sqrt(),
            ..Default::default()
        },
        SchemeId::DfDf => DfSplits::from_unit(x[0], x[1], x[2])?.correlations(),
        SchemeId::Nnc => Correlations::default(),
        SchemeId::Cutset => Correlations {
            rho12: x[0],
            rho13: x[1],
            rho23: x[2],
        },
    })
}

/// Optimizes `scheme` over `bx` (the default box when `None`) with extra seeds.
pub fn optimize_scheme_seeded(
    ch: &ChannelGains,
    scheme: SchemeId,
    bx: Option<&SearchBox>,
    seeds: &[Vec<f64>],
) -> Result<OptResult> {
    ch.validate()?;
    let owned;
    let bx = match bx {
        Some(b) => b,
        None => {
            owned = default_box(scheme);
            &owned
        }
    };
    let d = dimension(scheme);
    if bx.params.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: bx.params.len(),
        });
    }
    let mut res = optimize(|x| evaluate_scheme(ch, scheme, x).map_or(0.0, |e| e.rate), bx, seeds)?;
    let e = evaluate_scheme(ch, scheme, &res.params)?;
    res.binding = Some(e.binding);
    Ok(res)
}

/// Optimizes one scheme with its standard seeding: `SNNC_RS_*` start from the
/// `DF_SNNC` optimum at `alpha = 0`, and `CUTSET` from the induced
/// correlations of every other scheme's optimum.
pub fn optimize_scheme(ch: &ChannelGains, scheme: SchemeId, bx: Option<&SearchBox>) -> Result<OptResult> {
    match scheme {
        SchemeId::SnncRsJoint | SchemeId::SnncRsSuccessive => {
            let df = optimize_scheme_seeded(ch, SchemeId::DfSnnc, None, &[])?;
            optimize_scheme_seeded(ch, scheme, bx, &[vec![0.0, df.params[0], df.params[1]]])
        }
        SchemeId::Cutset => {
            let others: Vec<SchemeId> = SchemeId::ALL.into_iter().filter(|s| s.is_achievable()).collect();
            let all = optimize_all(ch, &others, &|_| None)?;
            let seeds = cutset_seeds(&all)?;
            optimize_scheme_seeded(ch, scheme, bx, &seeds)
        }
        _ => optimize_scheme_seeded(ch, scheme, bx, &[]),
    }
}

fn cutset_seeds(results: &[(SchemeId, OptResult)]) -> Result<Vec<Vec<f64>>> {
    results
        .iter()
        .filter(|(s, _)| s.is_achievable())
        .map(|(s, r)| {
            let c = induced_correlations(*s, &r.params)?;
            Ok(vec![c.rho12, c.rho13, c.rho23])
        })
        .collect()
}

/// Optimizes a list of schemes on one channel, sharing work: `DF_SNNC` is run
/// once and seeds `SNNC_RS_*`; `CUTSET` runs last, seeded by every other
/// result. Output order follows `schemes`.
pub fn optimize_all(
    ch: &ChannelGains,
    schemes: &[SchemeId],
    boxes: &dyn Fn(SchemeId) -> Option<SearchBox>,
) -> Result<Vec<(SchemeId, OptResult)>> {
    let mut done: Vec<(SchemeId, OptResult)> = vec![];
    let run = |s: SchemeId, done: &[(SchemeId, OptResult)]| -> Result<OptResult> {
        let bx = boxes(s);
        match s {
            SchemeId::SnncRsJoint | SchemeId::SnncRsSuccessive => {
                let df = match done.iter().find(|(id, _)| *id == SchemeId::DfSnnc) {
                    Some((_, r)) if boxes(SchemeId::DfSnnc).is_none() => r.clone(),
                    _ => optimize_scheme_seeded(ch, SchemeId::DfSnnc, None, &[])?,
                };
                optimize_scheme_seeded(ch, s, bx.as_ref(), &[vec![0.0, df.params[0], df.params[1]]])
            }
            SchemeId::Cutset => {
                let mut pool: Vec<(SchemeId, OptResult)> = done.to_vec();
                for other in SchemeId::ALL.into_iter().filter(|o| o.is_achievable()) {
                    if !pool.iter().any(|(id, _)| *id == other) {
                        let r = if matches!(other, SchemeId::SnncRsJoint | SchemeId::SnncRsSuccessive) {
                            optimize_scheme(ch, other, None)?
                        } else {
                            optimize_scheme_seeded(ch, other, None, &[])?
                        };
                        pool.push((other, r));
                    }
                }
                optimize_scheme_seeded(ch, s, bx.as_ref(), &cutset_seeds(&pool)?)
            }
            _ => optimize_scheme_seeded(ch, s, bx.as_ref(), &[]),
        }
    };
    // DF_SNNC first so it can seed the split scheme, CUTSET last.
    let mut order: Vec<SchemeId> = schemes.to_vec();
    order.sort_by_key(|s| match s {
        SchemeId::DfSnnc => 0,
        SchemeId::Cutset => 2,
        _ => 1,
    });
    for s in order {
        if done.iter().any(|(id, _)| *id == s) {
            continue;
        }
        let r = run(s, &done)?;
        done.push((s, r));
    }
    Ok(schemes
        .iter()
        .map(|s| done.iter().find(|(id, _)| id == s).expect("every scheme ran").clone())
        .collect())
}
