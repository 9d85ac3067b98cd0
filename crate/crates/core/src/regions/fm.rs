//! Elimination, numeric max-rate evaluation and redundancy removal.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{add_term, to_f64, AtomValuation, InequalitySystem, LinearConstraint, Rational, Sense};
use crate::error::{Error, Result};

/// The variable whose maximum is the achievable rate.
pub const RATE_VAR: &str = "R";

/// Slack below which a numeric constraint still counts as satisfied.
pub const FEAS_TOL: f64 = 1e-9;

/// Margin by which a dropped constraint's negation must be violated before it
/// counts as implied by the rest.
const IMPLIED_MARGIN: f64 = 1e-8;
const IMPLIED_TOL: f64 = 1e-11;

/// Exact Fourier-Motzkin elimination of `var`.
///
/// Constraints without `var` are kept as they are (and first); every pair of
/// an upper and a lower bound on `var` is combined with positive multipliers
/// that normalize its coefficient to one. A system that never mentions `var`
/// is returned unchanged.
pub fn fm_eliminate(sys: &InequalitySystem, var: &str) -> InequalitySystem {
    if sys.constraints().iter().all(|c| c.coeff(var).is_zero()) {
        return sys.clone();
    }
    let (mut pos, mut neg, mut out) = (vec![], vec![], vec![]);
    for c in sys.constraints() {
        let le = c.to_le();
        let k = le.coeff(var);
        if k.is_positive() {
            pos.push((le, k));
        } else if k.is_negative() {
            neg.push((le, -k));
        } else {
            out.push(c.clone());
        }
    }
    for (p, kp) in &pos {
        for (n, kn) in &neg {
            out.push(combine(p, kp, n, kn, var));
        }
    }
    let mut res = sys.with_constraints(out);
    res.vars.retain(|v| v != var);
    res
}

fn combine(p: &LinearConstraint, kp: &Rational, n: &LinearConstraint, kn: &Rational, var: &str) -> LinearConstraint {
    let mut c = LinearConstraint {
        label: format!("{}&{}", p.label, n.label),
        vars: BTreeMap::new(),
        sense: Sense::Le,
        atoms: BTreeMap::new(),
        constant: &p.constant / kp + &n.constant / kn,
    };
    for (src, k) in [(p, kp), (n, kn)] {
        for (v, a) in &src.vars {
            if v != var {
                add_term(&mut c.vars, v, a / k);
            }
        }
        for (at, a) in &src.atoms {
            add_term(&mut c.atoms, at, a / k);
        }
    }
    c
}

/// Eliminates every declared variable not in `keep`, in declaration order.
pub fn project(sys: &InequalitySystem, keep: &[&str]) -> InequalitySystem {
    let drop: Vec<String> = sys
        .vars()
        .iter()
        .filter(|v| !keep.contains(&v.as_str()))
        .cloned()
        .collect();
    let mut s = sys.clone();
    for v in &drop {
        s = fm_eliminate(&s, v);
        s.vars.retain(|x| x != v);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateStatus {
    Feasible,
    /// No rate satisfies the system; the reported rate is 0.
    Infeasible,
    /// Nothing bounds `R` from above; the reported rate is `+inf`.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxRate {
    pub rate: f64,
    pub status: RateStatus,
}

/// Largest `R >= 0` allowed by the system at a valuation.
///
/// All non-rate variables are eliminated symbolically, then atoms are
/// substituted. Strict and non-strict inequalities are not distinguished.
pub fn max_rate(sys: &InequalitySystem, val: &AtomValuation) -> Result<MaxRate> {
    NumericSystem::new(&project(sys, &[RATE_VAR]), val)?.max_rate()
}

/// Drops constraints that, at every valuation, are implied by the remaining
/// ones and leave max-R unchanged. Constraints are visited in order, so of two
/// duplicates the later one survives.
pub fn remove_redundant(sys: &InequalitySystem, vals: &[AtomValuation]) -> Result<InequalitySystem> {
    if vals.is_empty() {
        return Err(Error::InvalidSystem(
            "redundancy removal needs at least one valuation".into(),
        ));
    }
    let mut keep: Vec<LinearConstraint> = sys.constraints().to_vec();
    let mut i = 0;
    while i < keep.len() {
        let mut others = keep.clone();
        let cand = others.remove(i);
        let full = sys.with_constraints(keep.clone());
        let rest = sys.with_constraints(others.clone());
        let mut droppable = true;
        for v in vals {
            let num_rest = NumericSystem::new(&rest, v)?;
            if !num_rest.implies(&cand, v)? {
                droppable = false;
                break;
            }
            let (a, b) = (NumericSystem::new(&full, v)?.max_rate()?, num_rest.max_rate()?);
            if a.status != b.status || (a.rate - b.rate).abs() > FEAS_TOL {
                droppable = false;
                break;
            }
        }
        if droppable {
            keep = others;
        } else {
            i += 1;
        }
    }
    Ok(sys.with_constraints(keep))
}

/// `a . x <= b` rows after substituting atom values.
#[derive(Debug, Clone)]
struct NumericSystem {
    vars: Vec<String>,
    rows: Vec<(Vec<f64>, f64)>,
}

impl NumericSystem {
    fn new(sys: &InequalitySystem, val: &AtomValuation) -> Result<Self> {
        let vars = sys.vars().to_vec();
        let rows = sys
            .constraints()
            .iter()
            .map(|c| Self::row(&vars, c, val))
            .collect::<Result<_>>()?;
        Ok(NumericSystem { vars, rows })
    }

    fn row(vars: &[String], c: &LinearConstraint, val: &AtomValuation) -> Result<(Vec<f64>, f64)> {
        let le = c.to_le();
        let a = vars.iter().map(|v| to_f64(&le.coeff(v))).collect();
        let mut b = to_f64(&le.constant);
        for (at, k) in &le.atoms {
            b += to_f64(k) * val.get(at)?;
        }
        Ok((a, b))
    }

    fn eliminate(&mut self, j: usize) {
        let (mut pos, mut neg, mut out) = (vec![], vec![], vec![]);
        for (a, b) in self.rows.drain(..) {
            if a[j] > 0.0 {
                pos.push((a, b));
            } else if a[j] < 0.0 {
                neg.push((a, b));
            } else {
                out.push((a, b));
            }
        }
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let (kp, kn) = (ap[j], -an[j]);
                let mut a: Vec<f64> = ap.iter().zip(an).map(|(x, y)| x / kp + y / kn).collect();
                a[j] = 0.0;
                out.push((a, bp / kp + bn / kn));
            }
        }
        self.rows = out;
    }

    fn rate_index(&self) -> Option<usize> {
        self.vars.iter().position(|v| v == RATE_VAR)
    }

    fn eliminate_all_but(&mut self, keep: Option<usize>) {
        for j in 0..self.vars.len() {
            if Some(j) != keep {
                self.eliminate(j);
            }
        }
    }

    fn max_rate(mut self) -> Result<MaxRate> {
        let r = self.rate_index();
        self.eliminate_all_but(r);
        let (mut lo, mut hi, mut feasible) = (f64::NEG_INFINITY, f64::INFINITY, true);
        for (a, b) in &self.rows {
            let k = r.map_or(0.0, |r| a[r]);
            if !b.is_finite() {
                return Err(Error::InvalidSystem(format!("non-finite right-hand side {b}")));
            }
            if k > 0.0 {
                hi = hi.min(b / k);
            } else if k < 0.0 {
                lo = lo.max(b / k);
            } else if *b < -FEAS_TOL {
                feasible = false;
            }
        }
        if !feasible || lo > hi + FEAS_TOL {
            return Ok(MaxRate {
                rate: 0.0,
                status: RateStatus::Infeasible,
            });
        }
        if hi == f64::INFINITY {
            return Ok(MaxRate {
                rate: f64::INFINITY,
                status: RateStatus::Unbounded,
            });
        }
        Ok(MaxRate {
            rate: hi.max(0.0),
            status: RateStatus::Feasible,
        })
    }

    /// Whether every point of this system satisfies `c`: the system plus
    /// `lhs >= rhs + margin` has no solution.
    fn implies(&self, c: &LinearConstraint, val: &AtomValuation) -> Result<bool> {
        let (a, b) = Self::row(&self.vars, c, val)?;
        let mut s = self.clone();
        s.rows.push((a.iter().map(|x| -x).collect(), -b - IMPLIED_MARGIN));
        s.eliminate_all_but(None);
        Ok(s.rows.iter().any(|(_, b)| *b < -IMPLIED_TOL))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{rat, Atom};
    use proptest::prelude::*;

    fn sys(text: &str) -> InequalitySystem {
        InequalitySystem::parse(text).unwrap()
    }

    #[test]
    fn hand_examples() {
        let s = sys("a: 1*y <= 2\nb: 1*x + -1*y <= 1\nc: 1*y >= 0");
        let e = fm_eliminate(&s, "y");
        assert_eq!(e.to_string(), "a&b: 1*x <= 3\na&c: 0 <= 2\n");
        assert_eq!(e.vars(), ["x"]);
        let e = fm_eliminate(&sys("a: 1*y >= 5\nb: 1*y <= 3"), "y");
        assert_eq!(e.to_string(), "b&a: 0 <= -2\n");
    }

    #[test]
    fn absent_variable_is_identity() {
        let s = sys("a: 1*R <= 1*A\nb: 2*R + 1*x <= 1");
        assert_eq!(fm_eliminate(&s, "y"), s);
        assert_eq!(fm_eliminate(&fm_eliminate(&s, "x"), "x"), fm_eliminate(&s, "x"));
    }

    #[test]
    fn max_rate_examples() {
        let v = AtomValuation::default();
        let r = max_rate(&sys("a: 1*R <= 0.7\nb: 2*R <= 1"), &v).unwrap();
        assert_eq!(
            r,
            MaxRate {
                rate: 0.5,
                status: RateStatus::Feasible
            }
        );
        let r = max_rate(&sys("a: 1*R <= 0.7\nk: 0 <= -1"), &v).unwrap();
        assert_eq!(r.status, RateStatus::Infeasible);
        assert_eq!(r.rate, 0.0);
        let r = max_rate(&sys("a: 1*R >= 0"), &v).unwrap();
        assert_eq!(r.status, RateStatus::Unbounded);
        let r = max_rate(&sys("a: 1*R <= -1"), &v).unwrap();
        assert_eq!(r.rate, 0.0);
        assert_eq!(r.status, RateStatus::Feasible);
        let r = max_rate(&sys("a: 1*R <= -1\nb: 1*R >= 0"), &v).unwrap();
        assert_eq!(r.status, RateStatus::Infeasible);
    }

    #[test]
    fn max_rate_eliminates_auxiliaries() {
        let mut v = AtomValuation::default();
        v.insert("A", 1.0);
        v.insert("B", 0.25);
        // R + S <= A, S >= B  ->  R <= A - B
        let r = max_rate(&sys("a: 1*R + 1*S <= 1*A\nb: 1*S >= 1*B"), &v).unwrap();
        assert!((r.rate - 0.75).abs() < 1e-15);
        assert!(max_rate(&sys("a: 1*R <= 1*C"), &v).is_err());
    }

    #[test]
    fn redundancy() {
        let s = sys("a: 1*R <= 1*A1\nb: 1*R <= 1*A1 + 1*A2");
        let vals: Vec<AtomValuation> = [(0.3, 0.0), (0.2, 0.7), (1.0, 2.0)]
            .iter()
            .map(|&(a, b)| {
                let mut v = AtomValuation::default();
                v.insert("A1", a);
                v.insert("A2", b);
                v
            })
            .collect();
        let r = remove_redundant(&s, &vals).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.constraints()[0].label, "a");

        let dup = sys("a: 1*R <= 1*A1\nb: 1*R <= 1*A1");
        assert_eq!(remove_redundant(&dup, &vals).unwrap().len(), 1);

        let empty = InequalitySystem::default();
        assert_eq!(remove_redundant(&empty, &vals).unwrap(), empty);
        assert!(remove_redundant(&s, &[]).is_err());

        // Incomparable bounds both survive.
        let both = sys("a: 1*R <= 1*A1\nb: 1*R <= 1*A2");
        assert_eq!(remove_redundant(&both, &vals).unwrap().len(), 2);
    }

    #[test]
    fn combined_coefficients_stay_exact() {
        let a = Atom::new("A").unwrap();
        let mut s = InequalitySystem::new(&["R", "S"], vec![a.clone()]);
        s.push(LinearConstraint::new(
            "p",
            &[("R", 1), ("S", 3)],
            Sense::Le,
            &[(&a, 1)],
            0,
        ))
        .unwrap();
        s.push(LinearConstraint::new("n", &[("S", 7)], Sense::Ge, &[], 1))
            .unwrap();
        let e = fm_eliminate(&s, "S");
        let c = &e.constraints()[0];
        assert_eq!(c.coeff("R"), Rational::new(1.into(), 3.into()));
        assert_eq!(c.atoms["A"], Rational::new(1.into(), 3.into()));
        assert_eq!(c.constant, -Rational::new(1.into(), 7.into()));
        assert_eq!(c.to_le().coeff("S"), rat(0));
    }

    /// Random system over (x, y) with small integer coefficients.
    fn small_system() -> impl Strategy<Value = InequalitySystem> {
        proptest::collection::vec((-3i64..=3, -3i64..=3, -6i64..=6), 1..6).prop_map(|rows| {
            let mut s = InequalitySystem::new(&["x", "y"], vec![]);
            for (i, (a, b, k)) in rows.into_iter().enumerate() {
                s.push(LinearConstraint::new(
                    &format!("c{i}"),
                    &[("x", a), ("y", b)],
                    Sense::Le,
                    &[],
                    k,
                ))
                .unwrap();
            }
            s
        })
    }

    fn holds(s: &InequalitySystem, x: f64, y: f64) -> bool {
        let vars: BTreeMap<&str, f64> = [("x", x), ("y", y)].into_iter().collect();
        let v = AtomValuation::default();
        s.constraints().iter().all(|c| c.slack(&vars, &v).unwrap() >= -1e-9)
    }

    proptest! {
        #[test]
        fn projection_matches_dense_search(s in small_system(), xi in -40i32..=40) {
            let x = xi as f64 / 8.0;
            let proj = fm_eliminate(&s, "y");
            prop_assert!(proj.constraints().iter().all(|c| c.coeff("y").is_zero()));
            let in_proj = holds(&proj, x, 0.0);
            // With x on a 1/8 grid and |coef(y)| <= 3, every endpoint of the y-slice
            // is a multiple of 1/48, so this grid meets every nonempty slice.
            let witness = (-48 * 40..=48 * 40).any(|k| holds(&s, x, k as f64 / 48.0));
            prop_assert_eq!(in_proj, witness);
        }

        #[test]
        fn elimination_is_idempotent(s in small_system()) {
            let once = fm_eliminate(&s, "y");
            prop_assert_eq!(fm_eliminate(&once, "y"), once);
        }
    }
}
