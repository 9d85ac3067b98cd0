//! Grounding atoms in real distributions and comparing systems on them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::fm::{max_rate, project, remove_redundant, MaxRate, RateStatus, RATE_VAR};
use super::systems::{appendix_system, fallback_atoms, theorem2_bounds_system, theorem2_system};
use super::{Atom, InequalitySystem};
use crate::error::{Error, Result};
use crate::info::labels::{X1, X2, X30, X31, Y2, Y3, Y4, YHAT3};
use crate::info::{build_joint_thm2, ConditionalPmf, InfoSource, JointPmf};

/// Numeric values for atoms, tagged with where they came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AtomValuation {
    values: BTreeMap<String, f64>,
    provenance: String,
}

impl AtomValuation {
    pub fn new(provenance: &str) -> Self {
        AtomValuation {
            values: BTreeMap::new(),
            provenance: provenance.to_string(),
        }
    }

    pub fn insert(&mut self, atom: &str, value: f64) {
        self.values.insert(atom.to_string(), value);
    }

    pub fn get(&self, atom: &str) -> Result<f64> {
        self.values
            .get(atom)
            .copied()
            .ok_or_else(|| Error::InvalidSystem(format!("valuation has no value for {atom}")))
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

/// Values every mutual-information atom on `src`.
pub fn atoms_from_source(src: &impl InfoSource, atoms: &[Atom]) -> Result<AtomValuation> {
    let mut v = AtomValuation::new(&src.provenance());
    for a in atoms {
        let [x, y, z] = a
            .groups()
            .ok_or_else(|| Error::InvalidSystem(format!("{a} is not a mutual-information atom")))?;
        fn refs(g: &[String]) -> Vec<&str> {
            g.iter().map(String::as_str).collect()
        }
        v.insert(a.id(), src.mutual_info(&refs(x), &refs(y), &refs(z))?);
    }
    Ok(v)
}

pub fn atoms_from_pmf(joint: &JointPmf, atoms: &[Atom]) -> Result<AtomValuation> {
    atoms_from_source(joint, atoms)
}

/// Alphabet sizes for the sampled joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphabetChoice {
    Binary,
    Ternary,
    /// Each variable independently binary or ternary.
    Mixed,
}

fn dirichlet_row(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn dirichlet_table(rng: &mut impl Rng, rows: usize, len: usize) -> Vec<f64> {
    (0..rows).flat_map(|_| dirichlet_row(rng, len)).collect()
}

/// A joint over the split-scheme labels built from independently drawn
/// factors, each row uniform on its simplex.
pub fn random_factored_joint(rng: &mut impl Rng, alphabets: AlphabetChoice) -> Result<JointPmf> {
    let mut size = || match alphabets {
        AlphabetChoice::Binary => 2,
        AlphabetChoice::Ternary => 3,
        AlphabetChoice::Mixed => rng.random_range(2..=3),
    };
    let [s1, s2, s30, s31, sq, sy2, sy3, sy4] = [(); 8].map(|_| size());
    let p12 = JointPmf::new(vec![X1.into(), X2.into()], vec![s1, s2], dirichlet_row(rng, s1 * s2))?;
    let p3 = JointPmf::new(
        vec![X30.into(), X31.into()],
        vec![s30, s31],
        dirichlet_row(rng, s30 * s31),
    )?;
    let q = ConditionalPmf::new(
        &[(X30, s30), (X31, s31), (Y3, sy3)],
        &[(YHAT3, sq)],
        dirichlet_table(rng, s30 * s31 * sy3, sq),
    )?;
    let ch = ConditionalPmf::new(
        &[(X1, s1), (X2, s2), (X30, s30), (X31, s31)],
        &[(Y2, sy2), (Y3, sy3), (Y4, sy4)],
        dirichlet_table(rng, s1 * s2 * s30 * s31, sy2 * sy3 * sy4),
    )?;
    build_joint_thm2(&p12, &p3, &q, &ch)
}

/// `n` valuations of `atoms` on seeded random factored joints.
pub fn sample_valuations(atoms: &[Atom], n: usize, seed: u64, alphabets: AlphabetChoice) -> Result<Vec<AtomValuation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let joint = random_factored_joint(&mut rng, alphabets)?;
            let mut v = atoms_from_pmf(&joint, atoms)?;
            v.provenance = format!("seed {seed} draw {i} sizes {:?}", joint.sizes());
            Ok(v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub provenance: String,
    pub a: MaxRate,
    pub b: MaxRate,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub tolerance: f64,
    pub valuations: usize,
    pub worst_gap: f64,
    pub worst_provenance: Option<String>,
    pub rows: Vec<EquivalenceRow>,
}

fn gap(a: &MaxRate, b: &MaxRate) -> f64 {
    match (a.status, b.status) {
        (RateStatus::Unbounded, RateStatus::Unbounded) => 0.0,
        (RateStatus::Unbounded, _) | (_, RateStatus::Unbounded) => f64::INFINITY,
        _ => (a.rate - b.rate).abs(),
    }
}

/// Compares max-R of two systems at every valuation.
pub fn verify_equivalence(
    sys_a: &InequalitySystem,
    sys_b: &InequalitySystem,
    vals: &[AtomValuation],
    tol: f64,
) -> Result<EquivalenceReport> {
    let (pa, pb) = (project(sys_a, &[RATE_VAR]), project(sys_b, &[RATE_VAR]));
    let mut rows = Vec::with_capacity(vals.len());
    let (mut worst, mut worst_at) = (0.0f64, None);
    for v in vals {
        let (a, b) = (max_rate(&pa, v)?, max_rate(&pb, v)?);
        let g = gap(&a, &b);
        if g > worst || (worst_at.is_none() && g > tol) {
            worst = g;
            worst_at = Some(v.provenance.clone());
        }
        rows.push(EquivalenceRow {
            provenance: v.provenance.clone(),
            a,
            b,
            gap: g,
        });
    }
    Ok(EquivalenceReport {
        pass: worst <= tol,
        tolerance: tol,
        valuations: vals.len(),
        worst_gap: worst,
        worst_provenance: worst_at,
        rows,
    })
}

/// What happens at valuations where the dropped condition fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmissionReport {
    /// Valuations violating the condition.
    pub violating: usize,
    /// The five bounds never exceed the noise-treating fallback there.
    pub five_bound_within_fallback: bool,
    /// Largest `five-bound max-R - fallback` seen (negative when always below).
    pub max_excess: Option<f64>,
    /// Violating valuations where the five-bound rate is positive although the
    /// full projected system gives 0.
    pub five_bound_positive: usize,
}

/// Checks the fallback argument at condition-violating valuations. The
/// valuations must cover the joint-decoding system and [`fallback_atoms`].
pub fn omission_report(vals: &[AtomValuation], tol: f64) -> Result<OmissionReport> {
    let (with, without) = (theorem2_system(), theorem2_bounds_system());
    let [fa, fb] = fallback_atoms();
    let mut rep = OmissionReport {
        violating: 0,
        five_bound_within_fallback: true,
        max_excess: None,
        five_bound_positive: 0,
    };
    for v in vals {
        if max_rate(&with, v)?.status != RateStatus::Infeasible {
            continue;
        }
        rep.violating += 1;
        let five = max_rate(&without, v)?.rate;
        let fallback = v.get(fa.id())?.min(v.get(fb.id())?);
        let excess = five - fallback;
        rep.max_excess = Some(rep.max_excess.map_or(excess, |m: f64| m.max(excess)));
        if excess > tol {
            rep.five_bound_within_fallback = false;
        }
        if five > tol {
            rep.five_bound_positive += 1;
        }
    }
    Ok(rep)
}

/// Deterministic factored joint: `X1 = (U, V)` uniform on four symbols, `X2`
/// constant, `X30`, `X31` fair bits, outputs drawn from `f(u, v, x30, x31)`,
/// and `Yhat3` either constant (`None`) or `Y3` through a symmetric channel
/// with the given error probability.
fn structured_joint(
    sizes: [usize; 3],
    quantizer: Option<f64>,
    f: impl Fn(usize, usize, usize, usize) -> Vec<([usize; 3], f64)>,
) -> Result<JointPmf> {
    let [n2, n3, n4] = sizes;
    let p12 = JointPmf::new(vec![X1.into(), X2.into()], vec![4, 1], vec![0.25; 4])?;
    let p3 = JointPmf::new(vec![X30.into(), X31.into()], vec![2, 2], vec![0.25; 4])?;
    let nq = if quantizer.is_some() { n3 } else { 1 };
    let mut q = vec![];
    for _ in 0..4 {
        for y3 in 0..n3 {
            match quantizer {
                None => q.push(1.0),
                Some(e) => q.extend((0..nq).map(|k| if k == y3 { 1.0 - e } else { e / (nq - 1) as f64 })),
            }
        }
    }
    let q = ConditionalPmf::new(&[(X30, 2), (X31, 2), (Y3, n3)], &[(YHAT3, nq)], q)?;
    let mut t = vec![];
    for x1 in 0..4 {
        for x30 in 0..2 {
            for x31 in 0..2 {
                let mut row = vec![0.0; n2 * n3 * n4];
                for ([a, b, c], p) in f(x1 / 2, x1 % 2, x30, x31) {
                    row[(a * n3 + b) * n4 + c] += p;
                }
                t.extend(row);
            }
        }
    }
    let ch = ConditionalPmf::new(
        &[(X1, 4), (X2, 1), (X30, 2), (X31, 2)],
        &[(Y2, n2), (Y3, n3), (Y4, n4)],
        t,
    )?;
    build_joint_thm2(&p12, &p3, &q, &ch)
}

/// Hand-built joints at which each joint-decoding bound, named by the first
/// entry, is the unique binding one, plus `cond`: the dropped condition fails
/// (a one-bit quantization penalty, relay 2 invisible at the destination)
/// while the five bounds still allow rate 1. Uniform random joints rarely hit
/// these cases, so the witnesses are added wherever constraints must be shown
/// necessary.
pub fn witness_joints() -> Result<Vec<(&'static str, JointPmf)>> {
    Ok(vec![
        (
            "jd1",
            structured_joint([4, 1, 4], None, |u, v, x30, _| vec![([2 * u + x30, 0, 2 * u + v], 1.0)])?,
        ),
        (
            "jd2",
            structured_joint([4, 1, 8], None, |u, v, x30, x31| {
                vec![([2 * (u ^ x30) + v, 0, 4 * (u ^ x31) + 2 * x30 + x31], 1.0)]
            })?,
        ),
        (
            "jd3",
            structured_joint([4, 4, 2], Some(0.0), |u, v, x30, x31| {
                vec![([2 * (u ^ x30) + v, 2 * u + v, x31], 1.0)]
            })?,
        ),
        (
            "jd9",
            structured_joint([2, 2, 4], Some(0.1), |u, v, x30, _| {
                vec![([u, 0, 2 * x30 + v], 0.5), ([u, 1, 2 * x30 + v], 0.5)]
            })?,
        ),
        (
            "2R",
            structured_joint([4, 2, 4], Some(0.0), |u, v, x30, x31| {
                vec![([2 * (u ^ x30) + v, v, 2 * (u ^ x31) + x30], 1.0)]
            })?,
        ),
        (
            "cond",
            structured_joint([4, 2, 4], Some(0.0), |u, v, _, _| {
                vec![([2 * u + v, 0, 2 * u + v], 0.5), ([2 * u + v, 1, 2 * u + v], 0.5)]
            })?,
        ),
    ])
}

/// Valuations of `atoms` at every witness joint.
pub fn witness_valuations(atoms: &[Atom]) -> Result<Vec<AtomValuation>> {
    witness_joints()?
        .into_iter()
        .map(|(name, j)| {
            let mut v = atoms_from_pmf(&j, atoms)?;
            v.provenance = format!("witness {name}");
            Ok(v)
        })
        .collect()
}

/// Result of comparing the appendix system against the theorem with one
/// constraint removed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationRow {
    pub removed: String,
    /// Some valuation tells the two systems apart.
    pub detected: bool,
    pub failing_valuations: usize,
}

/// Full elimination check: appendix system against the joint-decoding theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmReport {
    pub seed: u64,
    /// Equivalence holds and every single-constraint mutation is detected.
    pub pass: bool,
    pub equivalence: EquivalenceReport,
    pub mutations: Vec<MutationRow>,
    pub omission: OmissionReport,
    /// Size of the projection onto `R` before redundancy removal.
    pub projected_constraints: usize,
    /// The projection after redundancy removal, in the text format.
    pub reduced_system: String,
}

/// Atoms of the appendix system, the theorem and the fallback.
pub fn fm_atoms() -> Vec<Atom> {
    let mut atoms = appendix_system().merged_atoms(&theorem2_system());
    for a in fallback_atoms() {
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    atoms
}

/// Runs the elimination check on `n` random valuations plus the witnesses.
pub fn verify_fm(seed: u64, n: usize, tol: f64) -> Result<FmReport> {
    let (app, thm) = (appendix_system(), theorem2_system());
    let atoms = fm_atoms();
    let mut vals = sample_valuations(&atoms, n, seed, AlphabetChoice::Mixed)?;
    vals.extend(witness_valuations(&atoms)?);
    let equivalence = verify_equivalence(&app, &thm, &vals, tol)?;
    let mutations = thm
        .constraints()
        .iter()
        .map(|c| {
            let r = verify_equivalence(&app, &thm.without(&c.label), &vals, tol)?;
            Ok(MutationRow {
                removed: c.label.clone(),
                detected: !r.pass,
                failing_valuations: r.rows.iter().filter(|x| x.gap > tol).count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let omission = omission_report(&vals, tol)?;
    let projected = project(&app, &[RATE_VAR]);
    let reduced = remove_redundant(&projected, &vals)?;
    Ok(FmReport {
        seed,
        pass: equivalence.pass && mutations.iter().all(|m| m.detected),
        equivalence,
        mutations,
        omission,
        projected_constraints: projected.len(),
        reduced_system: reduced.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::labels::THM2_ORDER;

    #[test]
    fn point_mass_values_zero() {
        let j = JointPmf::point_mass(&THM2_ORDER, &[2; 8]).unwrap();
        let v = atoms_from_pmf(&j, appendix_system().atoms()).unwrap();
        assert_eq!(v.values().len(), 9);
        assert!(v.values().values().all(|&x| x == 0.0));
    }

    #[test]
    fn copy_pair_isolated() {
        // X1 = Y2 fair bit, everything else independent fair bits.
        let labels: Vec<String> = THM2_ORDER.iter().map(|s| s.to_string()).collect();
        let (ix1, iy2) = (0, 5);
        let probs: Vec<f64> = (0..256usize)
            .map(|k| {
                let bit = |i: usize| (k >> (7 - i)) & 1;
                if bit(ix1) == bit(iy2) {
                    1.0 / 128.0
                } else {
                    0.0
                }
            })
            .collect();
        let j = JointPmf::new(labels, vec![2; 8], probs).unwrap();
        let atoms = appendix_system().atoms().to_vec();
        let v = atoms_from_pmf(&j, &atoms).unwrap();
        for a in &atoms {
            let g = a.groups().unwrap();
            let has = |l: &str| g[0].iter().chain(&g[1]).any(|x| x == l);
            let cond = |l: &str| g[2].iter().any(|x| x == l);
            let want = if has(X1) && has(Y2) && !cond(X1) && !cond(Y2) {
                1.0
            } else {
                0.0
            };
            assert!((v.get(a.id()).unwrap() - want).abs() < 1e-12, "{a}");
        }
        assert!(atoms_from_pmf(&j, &[Atom::new("A1").unwrap()]).is_err());
    }

    #[test]
    fn sampled_joints_satisfy_identities() {
        let atoms = appendix_system().merged_atoms(&theorem2_system());
        let vals = sample_valuations(&atoms, 20, 7, AlphabetChoice::Mixed).unwrap();
        for v in &vals {
            let g = |s: &str| v.get(s).unwrap();
            // Markov chain Yhat3 - (X3, Y3) - (Xbar, Y4): the quantizer penalty
            // equals I(Yhat3;Y3|X3) - I(Yhat3;Xbar Y4|X3).
            let pen = g("I(Yhat3;Y3|X1,X2,X30,X31,Y4)");
            let diff = g("I(Yhat3;Y3|X30,X31)") - g("I(Yhat3;X1,X2,Y4|X30,X31)");
            assert!((pen - diff).abs() < 1e-9, "{}", v.provenance());
            assert!(g("I(Yhat3;Y3|X30,X31)") >= g("I(Yhat3;X1,X2,Y4|X30,X31)") - 1e-12);
        }
        let again = sample_valuations(&atoms, 20, 7, AlphabetChoice::Mixed).unwrap();
        assert_eq!(vals, again);
    }

    #[test]
    fn each_witness_binds_its_bound() {
        let thm = theorem2_system();
        let five = theorem2_bounds_system();
        let vals = witness_valuations(thm.atoms()).unwrap();
        let expect = [
            ("jd1", 1.0),
            ("jd2", 1.0),
            ("jd3", 1.0),
            ("jd9", 1.0 - 2.0 * (0.5 - crate::info::binary_entropy(0.1) / 2.0)),
            ("2R", 1.5),
        ];
        for (v, (name, rate)) in vals.iter().zip(expect) {
            assert_eq!(v.provenance(), format!("witness {name}"));
            let r = max_rate(&thm, v).unwrap();
            assert_eq!(r.status, RateStatus::Feasible, "{name}");
            assert!((r.rate - rate).abs() < 1e-12, "{name}: {} vs {rate}", r.rate);
            assert!(remark_flags_hold(v), "{name}");
            // Removing the named bound raises the rate; removing any other does not.
            for c in five.constraints() {
                let lifted = max_rate(&thm.without(&c.label), v).unwrap().rate;
                assert_eq!(lifted > rate + 1e-6, c.label == name, "{name} without {}", c.label);
            }
        }
    }

    fn remark_flags_hold(v: &AtomValuation) -> bool {
        max_rate(&theorem2_system(), v).unwrap().rate == max_rate(&theorem2_bounds_system(), v).unwrap().rate
    }

    #[test]
    fn cond_witness_needs_the_condition() {
        let vals = witness_valuations(&fm_atoms()).unwrap();
        let v = vals.iter().find(|v| v.provenance() == "witness cond").unwrap();
        assert_eq!(max_rate(&theorem2_system(), v).unwrap().status, RateStatus::Infeasible);
        assert!((max_rate(&theorem2_bounds_system(), v).unwrap().rate - 1.0).abs() < 1e-12);
        assert_eq!(max_rate(&appendix_system(), v).unwrap().status, RateStatus::Infeasible);
    }

    #[test]
    fn identical_systems_have_zero_gap() {
        let s = theorem2_system();
        let vals = sample_valuations(s.atoms(), 10, 1, AlphabetChoice::Binary).unwrap();
        let r = verify_equivalence(&s, &s, &vals, 0.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.worst_gap, 0.0);
        assert!(r.worst_provenance.is_none());
    }
}
