//! Acceptance checks with oracles that do not share code with the
//! evaluators they check.
//!
//! Each `criterion_N` returns a [`CriterionOutcome`]; [`run_selftest`] runs
//! all seven in order.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{line_network, ChannelGains};
use crate::error::Result;
use crate::info::labels::{X1, X2, X30, X31, Y2, Y3, Y4, YHAT3};
use crate::info::JointPmf;
use crate::optimizer::{optimize_all, optimize_scheme, sweep, write_csv, GeometrySpec, SweepParam, SweepSpec};
use crate::regions::{
    appendix_system, fm_atoms, max_rate, random_factored_joint, sample_valuations, verify_fm, AlphabetChoice,
    AtomValuation,
};
use crate::schemes::{
    remark_conditions_gaussian, snncrs_bounds_gaussian, snncrs_system, thm2_bounds, thm2_bounds_discrete,
    thm3_bounds_discrete, SchemeId, SnncRsParams,
};

/// Result of one acceptance criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    /// The numeric check passed and the run stayed within its time budget.
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionOutcome {
    /// `criterion N: PASS|FAIL title (detail, t s)`.
    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} {} ({}; {:.2} s of {} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.seconds,
            self.budget_seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionOutcome>,
}

fn timed(
    id: u8,
    title: &'static str,
    budget: f64,
    f: impl FnOnce() -> Result<(bool, String)>,
) -> Result<CriterionOutcome> {
    let t = Instant::now();
    let (ok, detail) = f()?;
    let seconds = t.elapsed().as_secs_f64();
    Ok(CriterionOutcome {
        id,
        title,
        pass: ok && seconds <= budget,
        detail,
        seconds,
        budget_seconds: budget,
    })
}

/// Runs criteria 1 to 7.
pub fn run_selftest(seed: u64) -> Result<SelftestReport> {
    let criteria = vec![
        criterion_1(seed)?,
        criterion_2(seed)?,
        criterion_3(seed)?,
        criterion_4()?,
        criterion_5()?,
        criterion_6(seed)?,
        criterion_7(seed)?,
    ];
    Ok(SelftestReport {
        seed,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    })
}

fn random_channel(rng: &mut impl Rng) -> ChannelGains {
    let mut g = || rng.random_range(0.05..3.0);
    let (h12, h13, h14, h23, h24, h32, h34) = (g(), g(), g(), g(), g(), g(), g());
    let mut p = || 10f64.powf(rng.random_range(-1.0..2.0));
    ChannelGains {
        h12,
        h13,
        h14,
        h23,
        h24,
        h32,
        h34,
        p1: p(),
        p2: p(),
        p3: p(),
    }
}

fn random_params(rng: &mut impl Rng) -> SnncRsParams {
    SnncRsParams {
        // (0, 1]: at alpha = 0 both sides of the decoding comparison vanish.
        alpha: 1.0 - rng.random::<f64>(),
        beta: rng.random(),
        nhat3: 10f64.powf(rng.random_range(-3.0..3.0)),
    }
}

/// Closed-form Gaussian bounds against the generic log-det evaluation.
pub fn criterion_1(seed: u64) -> Result<CriterionOutcome> {
    timed(1, "closed-form bounds match log-det evaluation", 10.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let (ch, p) = (random_channel(&mut rng), random_params(&mut rng));
            let closed = snncrs_bounds_gaussian(&ch, &p)?;
            let generic = thm2_bounds(&snncrs_system(&ch, &p)?)?;
            for b in closed.iter() {
                let g = generic
                    .get(&b.name)
                    .map_or(f64::INFINITY, |x| (x.value - b.value).abs());
                worst = worst.max(g);
            }
        }
        Ok((worst <= 1e-9, format!("1000 draws, max |diff| = {worst:.2e} bits")))
    })
}

/// Max-R of the appendix system by brute force over an `(R30, R31)` grid.
pub fn appendix_grid_oracle(v: &AtomValuation, step: f64) -> Result<f64> {
    let a = |id: &str| v.get(id);
    let a1 = a("I(X1;Y2|X2,X30)")?;
    let a2 = a("I(X1,X2;Yhat3,Y4|X30,X31)")?;
    let a3 = a("I(Yhat3;X1,X2,Y4|X30,X31)")?;
    let a4 = a("I(X30,X31;Y4|X1,X2)")?;
    let a5 = a("I(X1,X2,X30,X31;Y4)")?;
    let a6 = a("I(X31;Y4|X1,X2,X30)")?;
    let a7 = a("I(X1,X2,X31;Y4|X30)")?;
    let a8 = a("I(X1,X30;Y2|X2)")?;
    let a9 = a("I(Yhat3;Y3|X30,X31)")?;
    let mut best = 0.0f64;
    let n30 = (a8.max(0.0) / step).floor() as usize + 1;
    let n31 = ((a3 + a6).max(0.0) / step).floor() as usize + 1;
    for i in 0..n30 {
        let r30 = i as f64 * step;
        for j in 0..n31 {
            let r31 = j as f64 * step;
            let ok = r30 + r31 <= a3 + a4 && r31 <= a3 + a6 && r30 + r31 >= a9;
            if !ok {
                continue;
            }
            let r = a1.min(a2).min(a3 + a5 - r30 - r31).min(a3 + a7 - r31).min(a8 - r30);
            best = best.max(r);
        }
    }
    Ok(best)
}

/// Elimination check plus the grid oracle on the appendix system.
pub fn criterion_2(seed: u64) -> Result<CriterionOutcome> {
    timed(2, "elimination reproduces the joint-decoding bounds", 60.0, || {
        let report = verify_fm(seed, 100, 1e-9)?;
        let vals = sample_valuations(&fm_atoms(), 20, seed, AlphabetChoice::Mixed)?;
        let app = appendix_system();
        let mut worst = 0.0f64;
        for v in &vals {
            let exact = max_rate(&app, v)?.rate;
            worst = worst.max((exact - appendix_grid_oracle(v, 1e-3)?).abs());
        }
        let ok = report.equivalence.pass && worst <= 2e-3;
        Ok((
            ok,
            format!(
                "equivalence gap {:.2e} on {} valuations, grid oracle gap {worst:.2e} on 20",
                report.equivalence.worst_gap, report.equivalence.valuations
            ),
        ))
    })
}

/// The full-decoding remark against the gain comparison.
pub fn criterion_3(seed: u64) -> Result<CriterionOutcome> {
    timed(3, "full cloud decoding iff h32 > h34", 10.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3);
        let mut exceptions = 0;
        for _ in 0..500 {
            let (ch, p) = (random_channel(&mut rng), random_params(&mut rng));
            let f = remark_conditions_gaussian(&ch, &p)?;
            if f.remark2_full_decode != (ch.h32 > ch.h34) {
                exceptions += 1;
            }
        }
        Ok((exceptions == 0, format!("500 channels, {exceptions} exceptions")))
    })
}

/// One point of the ordering experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingPoint {
    pub gamma: f64,
    pub power: f64,
    pub rates: Vec<(SchemeId, f64)>,
}

impl OrderingPoint {
    pub fn rate(&self, s: SchemeId) -> f64 {
        self.rates.iter().find(|(id, _)| *id == s).map_or(f64::NAN, |r| r.1)
    }

    /// `SNNC_RS_JOINT - DF_SNNC`.
    pub fn split_gain(&self) -> f64 {
        self.rate(SchemeId::SnncRsJoint) - self.rate(SchemeId::DfSnnc)
    }

    /// Smallest `CUTSET - scheme` over achievable schemes.
    pub fn cutset_slack(&self) -> f64 {
        let c = self.rate(SchemeId::Cutset);
        self.rates
            .iter()
            .filter(|(s, _)| s.is_achievable())
            .map(|(_, r)| c - r)
            .fold(f64::INFINITY, f64::min)
    }
}

/// All schemes on the line network at `gamma` and ten log-spaced powers in `[0.1, 100]`.
pub fn ordering_points(gamma: f64) -> Result<Vec<OrderingPoint>> {
    (0..10)
        .map(|k| {
            let power = 10f64.powf(-1.0 + 3.0 * k as f64 / 9.0);
            let ch = line_network(0.1, 0.05, 1.0, gamma, power, power, power)?;
            let rates = optimize_all(&ch, &SchemeId::ALL, &|_| None)?
                .into_iter()
                .map(|(s, r)| (s, r.rate))
                .collect();
            Ok(OrderingPoint { gamma, power, rates })
        })
        .collect()
}

/// Scheme ordering on the line network.
pub fn criterion_4() -> Result<CriterionOutcome> {
    timed(4, "split scheme >= DF-SNNC and every scheme <= cut-set", 300.0, || {
        let mut pts = ordering_points(2.0)?;
        pts.extend(ordering_points(3.0)?);
        let gain = pts.iter().map(OrderingPoint::split_gain).fold(f64::INFINITY, f64::min);
        let slack = pts
            .iter()
            .map(OrderingPoint::cutset_slack)
            .fold(f64::INFINITY, f64::min);
        Ok((
            gain >= -1e-6 && slack >= -1e-6,
            format!("20 points, min split gain {gain:.2e}, min cut-set slack {slack:.2e}"),
        ))
    })
}

/// `max over beta of min(C(bbar h12^2 P1), C(h14^2 P1 + h24^2 P2 + 2 h14 h24 sqrt(beta P1 P2)))`
/// by bisection on the crossing of a decreasing and an increasing term.
pub fn df_only_rate(ch: &ChannelGains) -> f64 {
    let c = |x: f64| (1.0 + x).log2();
    let relay = |b: f64| c((1.0 - b) * ch.h12 * ch.h12 * ch.p1);
    let dest = |b: f64| {
        c(ch.h14 * ch.h14 * ch.p1 + ch.h24 * ch.h24 * ch.p2 + 2.0 * ch.h14 * ch.h24 * (b * ch.p1 * ch.p2).sqrt())
    };
    if relay(0.0) <= dest(0.0) {
        return relay(0.0);
    }
    if relay(1.0) >= dest(1.0) {
        return dest(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if relay(mid) > dest(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    relay(lo).min(dest(lo))
}

/// Per-scheme optimized rate against `C(h14^2 P1)` on the direct-link-only channel.
pub fn direct_only_rates(ch: &ChannelGains) -> Result<Vec<(SchemeId, f64, f64)>> {
    let target = (1.0 + ch.h14 * ch.h14 * ch.p1).log2();
    optimize_all(ch, &SchemeId::ALL, &|_| None).map(|v| v.into_iter().map(|(s, r)| (s, r.rate, target)).collect())
}

/// Degenerate networks: relay 2 cut off, then both relays cut off.
pub fn criterion_5() -> Result<CriterionOutcome> {
    timed(
        5,
        "degenerate networks reduce to the point-to-point formulas",
        30.0,
        || {
            let mut worst_a = 0.0f64;
            for p in [0.1, 1.0, 10.0, 100.0] {
                for gamma in [2.0, 3.0] {
                    let ch = line_network(0.1, 0.05, 1.0, gamma, p, p, p)?.without_relay2();
                    let r = optimize_scheme(&ch, SchemeId::SnncRsJoint, None)?.rate;
                    worst_a = worst_a.max((r - df_only_rate(&ch)).abs());
                }
            }
            let ch = ChannelGains::direct_only(0.8, 2.0, 1.0, 1.0);
            let mut misses = vec![];
            for (s, r, target) in direct_only_rates(&ch)? {
                if (r - target).abs() > 1e-9 {
                    misses.push(format!("{s} {r:.6} vs {target:.6}"));
                }
            }
            let detail = format!(
                "relay 2 removed: max gap {worst_a:.2e}; relays removed: {}",
                if misses.is_empty() {
                    "all schemes match".into()
                } else {
                    format!("mismatch {}", misses.join(", "))
                }
            );
            Ok((worst_a <= 1e-6 && misses.is_empty(), detail))
        },
    )
}

/// `I(A;B|C)` by summing `p log(p(abc) p(c) / (p(ac) p(bc)))` over the table.
pub fn brute_force_mi(joint: &JointPmf, a: &[&str], b: &[&str], c: &[&str]) -> f64 {
    let labels = joint.labels();
    let idx = |set: &[&str]| -> Vec<usize> {
        set.iter()
            .map(|l| labels.iter().position(|x| x == l).expect("label in joint"))
            .collect()
    };
    let (ia, ib, ic) = (idx(a), idx(b), idx(c));
    let sizes = joint.sizes();
    let mut cells = Vec::with_capacity(joint.probs().len());
    for (k, &p) in joint.probs().iter().enumerate() {
        // Row-major decode, last label fastest.
        let mut digits = vec![0usize; sizes.len()];
        let mut rest = k;
        for i in (0..sizes.len()).rev() {
            digits[i] = rest % sizes[i];
            rest /= sizes[i];
        }
        cells.push((digits, p));
    }
    let key =
        |d: &[usize], sets: &[&[usize]]| -> Vec<usize> { sets.iter().flat_map(|s| s.iter().map(|&i| d[i])).collect() };
    let mut marg: [HashMap<Vec<usize>, f64>; 4] = Default::default();
    let groups: [Vec<&[usize]>; 4] = [vec![&ia, &ib, &ic], vec![&ic], vec![&ia, &ic], vec![&ib, &ic]];
    for (d, p) in &cells {
        for (m, g) in marg.iter_mut().zip(&groups) {
            *m.entry(key(d, g)).or_default() += p;
        }
    }
    let mut total = 0.0;
    for (d, p) in &cells {
        if *p <= 0.0 {
            continue;
        }
        let v: Vec<f64> = marg.iter().zip(&groups).map(|(m, g)| m[&key(d, g)]).collect();
        total += p * (v[0] * v[1] / (v[2] * v[3])).log2();
    }
    total
}

/// Discrete bounds against the definition-level evaluation.
pub fn criterion_6(seed: u64) -> Result<CriterionOutcome> {
    timed(6, "discrete bounds match brute-force mutual information", 60.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let j = random_factored_joint(&mut rng, AlphabetChoice::Binary)?;
            let mi = |a: &[&str], b: &[&str], c: &[&str]| brute_force_mi(&j, a, b, c);
            let pen = mi(&[YHAT3], &[Y3], &[X1, X2, X30, X31, Y4]);
            let relay = mi(&[X30], &[Y2], &[X1, X2]) + mi(&[X1], &[Y2], &[X2]);
            let cloud = mi(&[X30], &[Y2], &[X2]);
            let jd = [
                ("jd1", mi(&[X1], &[Y2], &[X2, X30])),
                ("jd2", mi(&[X1, X2], &[YHAT3, Y4], &[X30, X31])),
                ("jd3", mi(&[X1, X2, X30, X31], &[Y4], &[]) - pen),
                ("jd9", mi(&[X31], &[Y4], &[X1, X2, X30]) - pen + relay),
                ("2R", mi(&[X1, X2, X31], &[Y4], &[X30]) - pen + relay),
            ];
            let sd = [
                ("sd1", jd[0].1),
                ("sd2", jd[1].1),
                ("sd3", jd[2].1),
                ("sd4", mi(&[X1, X2, X31], &[Y4], &[X30]) - pen + cloud),
            ];
            let (b2, b3) = (thm2_bounds_discrete(&j)?, thm3_bounds_discrete(&j)?);
            for (name, want) in jd {
                worst = worst.max(b2.get(name).map_or(f64::INFINITY, |b| (b.value - want).abs()));
            }
            for (name, want) in sd {
                worst = worst.max(b3.bounds.get(name).map_or(f64::INFINITY, |b| (b.value - want).abs()));
            }
            let margin = mi(&[X31], &[Y4], &[X1, X2, X30]) + cloud - pen;
            worst = worst.max((b3.feasibility_margin - margin).abs());
        }
        Ok((
            worst <= 1e-9,
            format!("50 binary joints, max |diff| = {worst:.2e} bits"),
        ))
    })
}

/// The sweep used by the determinism check.
pub fn determinism_spec(seed: u64) -> SweepSpec {
    SweepSpec {
        geometry: GeometrySpec::Line(crate::channel::LineGeometry {
            d12: 0.1,
            d34: 0.05,
            d14: 1.0,
        }),
        gamma: 2.0,
        powers: [1.0; 3],
        param: SweepParam::Power,
        values: vec![0.1, 1.0, 10.0],
        schemes: SchemeId::ALL.to_vec(),
        boxes: Default::default(),
        seed,
    }
}

/// Two identical sweeps give byte-identical CSV.
pub fn criterion_7(seed: u64) -> Result<CriterionOutcome> {
    timed(7, "sweep output is byte-identical across runs", 120.0, || {
        let spec = determinism_spec(seed);
        let run = || -> Result<Vec<u8>> {
            let mut out = vec![];
            write_csv(&sweep(&spec)?, &mut out)?;
            Ok(out)
        };
        let (a, b) = (run()?, run()?);
        Ok((a == b, format!("{} bytes per run", a.len())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::witness_valuations;

    #[test]
    fn brute_force_mi_on_copy() {
        // X1 = Y2 fair bit: I = 1, conditioning on the copy kills it.
        let j = JointPmf::new(vec!["X1".into(), "Y2".into()], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((brute_force_mi(&j, &["X1"], &["Y2"], &[]) - 1.0).abs() < 1e-15);
        assert_eq!(brute_force_mi(&j, &["X1"], &["Y2"], &["Y2"]), 0.0);
    }

    #[test]
    fn df_only_limits() {
        // Weak source-relay link: relay term binds at beta = 0.
        let ch = ChannelGains {
            h12: 0.1,
            h24: 1.0,
            h14: 1.0,
            ..ChannelGains::direct_only(1.0, 1.0, 1.0, 1.0)
        };
        assert!((df_only_rate(&ch) - (1.0 + 0.01f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn grid_oracle_on_witnesses() {
        let app = appendix_system();
        for v in witness_valuations(&fm_atoms()).unwrap() {
            let exact = max_rate(&app, &v).unwrap().rate;
            let grid = appendix_grid_oracle(&v, 1e-3).unwrap();
            assert!(
                grid <= exact + 1e-12 && exact - grid <= 2e-3,
                "{}: {exact} vs {grid}",
                v.provenance()
            );
        }
    }
}
