//! Linear inequality systems over rate variables with symbolic
//! mutual-information atoms, exact Fourier-Motzkin elimination, and checks
//! that two systems describe the same achievable rate.
//!
//! A constraint reads `sum(c_v * var) <= sum(c_a * atom) + k` (or `>=`) with
//! exact rational coefficients. Atoms are opaque symbols for elimination and
//! only become numbers through an [`AtomValuation`].

mod fm;
mod systems;
mod valuation;

pub use fm::{fm_eliminate, max_rate, project, remove_redundant, MaxRate, RateStatus, FEAS_TOL, RATE_VAR};
pub use systems::{appendix_system, fallback_atoms, theorem2_bounds_system, theorem2_system, theorem3_system};
pub use valuation::{
    atoms_from_pmf, atoms_from_source, fm_atoms, omission_report, random_factored_joint, sample_valuations,
    verify_equivalence, verify_fm, witness_joints, witness_valuations, AlphabetChoice, AtomValuation,
    EquivalenceReport, EquivalenceRow, FmReport, MutationRow, OmissionReport,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact coefficient type.
pub type Rational = BigRational;

pub(crate) fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// A symbolic quantity. Identifiers of the form `I(A;B|C)` (comma-separated
/// labels, `|C` optional) carry the groups needed to value them from a
/// distribution; any other identifier is an opaque symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    id: String,
    groups: Option<[Vec<String>; 3]>,
}

impl Atom {
    pub fn new(id: &str) -> Result<Self> {
        let id = id.trim();
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(Error::InvalidSystem(format!("bad atom identifier {id:?}")));
        }
        let groups = if id.starts_with("I(") {
            Some(parse_mi(id)?)
        } else {
            None
        };
        Ok(Atom {
            id: id.to_string(),
            groups,
        })
    }

    /// Atom for `I(A;B|C)` with canonical text.
    pub fn mi(a: &[&str], b: &[&str], c: &[&str]) -> Self {
        let id = if c.is_empty() {
            format!("I({};{})", a.join(","), b.join(","))
        } else {
            format!("I({};{}|{})", a.join(","), b.join(","), c.join(","))
        };
        Atom::new(&id).expect("canonical MI atom")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// `(A, B, C)` for mutual-information atoms.
    pub fn groups(&self) -> Option<&[Vec<String>; 3]> {
        self.groups.as_ref()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

fn parse_mi(id: &str) -> Result<[Vec<String>; 3]> {
    let bad = || Error::InvalidSystem(format!("malformed mutual-information atom {id}"));
    let inner = id
        .strip_prefix("I(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let (ab, c) = match inner.split_once('|') {
        Some((ab, c)) => (ab, c),
        None => (inner, ""),
    };
    let (a, b) = ab.split_once(';').ok_or_else(bad)?;
    let list = |s: &str| -> Result<Vec<String>> {
        if s.is_empty() {
            return Ok(vec![]);
        }
        s.split(',')
            .map(|l| if l.is_empty() { Err(bad()) } else { Ok(l.to_string()) })
            .collect()
    };
    let (a, b, c) = (list(a)?, list(b)?, list(c)?);
    if a.is_empty() || b.is_empty() {
        return Err(bad());
    }
    let mut all: Vec<&String> = a.iter().chain(&b).chain(&c).collect();
    let n = all.len();
    all.sort();
    all.dedup();
    if all.len() != n {
        return Err(Error::InvalidSystem(format!("overlapping groups in {id}")));
    }
    Ok([a, b, c])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        }
    }
}

/// `lhs(vars) sense rhs(atoms) + constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub label: String,
    pub vars: BTreeMap<String, Rational>,
    pub sense: Sense,
    pub atoms: BTreeMap<String, Rational>,
    pub constant: Rational,
}

impl LinearConstraint {
    /// Builds a constraint from integer coefficients; zero entries are dropped.
    pub fn new(label: &str, vars: &[(&str, i64)], sense: Sense, atoms: &[(&Atom, i64)], constant: i64) -> Self {
        let mut c = LinearConstraint {
            label: label.to_string(),
            vars: BTreeMap::new(),
            sense,
            atoms: BTreeMap::new(),
            constant: rat(constant),
        };
        for &(v, k) in vars {
            add_term(&mut c.vars, v, rat(k));
        }
        for &(a, k) in atoms {
            add_term(&mut c.atoms, a.id(), rat(k));
        }
        c
    }

    pub fn coeff(&self, var: &str) -> Rational {
        self.vars.get(var).cloned().unwrap_or_else(Rational::zero)
    }

    /// Same constraint written with `<=`.
    pub fn to_le(&self) -> Self {
        match self.sense {
            Sense::Le => self.clone(),
            Sense::Ge => LinearConstraint {
                label: self.label.clone(),
                vars: negate(&self.vars),
                sense: Sense::Le,
                atoms: negate(&self.atoms),
                constant: -self.constant.clone(),
            },
        }
    }

    /// True when no variable, atom or constant remains: `0 <= 0`.
    pub fn is_trivial(&self) -> bool {
        self.vars.is_empty() && self.atoms.is_empty() && self.constant.is_zero()
    }

    /// Right-hand side minus left-hand side for `<=` (slack), numerically.
    #[cfg(test)]
    pub(crate) fn slack(&self, vars: &BTreeMap<&str, f64>, atoms: &AtomValuation) -> Result<f64> {
        let le = self.to_le();
        let mut s = to_f64(&le.constant);
        for (a, k) in &le.atoms {
            s += to_f64(k) * atoms.get(a)?;
        }
        for (v, k) in &le.vars {
            let x = vars
                .get(v.as_str())
                .ok_or_else(|| Error::InvalidSystem(format!("no value for {v}")))?;
            s -= to_f64(k) * x;
        }
        Ok(s)
    }
}

fn negate(m: &BTreeMap<String, Rational>) -> BTreeMap<String, Rational> {
    m.iter().map(|(k, v)| (k.clone(), -v.clone())).collect()
}

pub(crate) fn add_term(m: &mut BTreeMap<String, Rational>, key: &str, k: Rational) {
    let entry = m.entry(key.to_string()).or_insert_with(Rational::zero);
    *entry += k;
    if entry.is_zero() {
        m.remove(key);
    }
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

fn fmt_side(terms: &BTreeMap<String, Rational>, constant: Option<&Rational>) -> String {
    let mut parts: Vec<String> = terms.iter().map(|(n, k)| format!("{k}*{n}")).collect();
    if let Some(c) = constant.filter(|c| !c.is_zero()) {
        parts.push(c.to_string());
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} {} {}",
            self.label,
            fmt_side(&self.vars, None),
            self.sense.symbol(),
            fmt_side(&self.atoms, Some(&self.constant))
        )
    }
}

/// Ordered constraints plus the declared variables and atoms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InequalitySystem {
    vars: Vec<String>,
    atoms: Vec<Atom>,
    constraints: Vec<LinearConstraint>,
}

impl InequalitySystem {
    pub fn new(vars: &[&str], atoms: Vec<Atom>) -> Self {
        InequalitySystem {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            atoms,
            constraints: vec![],
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraint(&self, label: &str) -> Option<&LinearConstraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    /// Appends a constraint, declaring any new atom it mentions.
    pub fn push(&mut self, c: LinearConstraint) -> Result<()> {
        for v in c.vars.keys() {
            if !self.vars.contains(v) {
                return Err(Error::InvalidSystem(format!("{}: undeclared variable {v}", c.label)));
            }
        }
        for a in c.atoms.keys() {
            if !self.atoms.iter().any(|x| x.id() == a) {
                self.atoms.push(Atom::new(a)?);
            }
        }
        self.constraints.push(c);
        Ok(())
    }

    /// The system without the constraint carrying `label`.
    pub fn without(&self, label: &str) -> Self {
        let mut s = self.clone();
        s.constraints.retain(|c| c.label != label);
        s
    }

    pub(crate) fn with_constraints(&self, constraints: Vec<LinearConstraint>) -> Self {
        InequalitySystem {
            vars: self.vars.clone(),
            atoms: self.atoms.clone(),
            constraints,
        }
    }

    /// Constraints that bound `var` from above.
    pub fn upper_bounds_on(&self, var: &str) -> Vec<&LinearConstraint> {
        self.constraints
            .iter()
            .filter(|c| c.to_le().coeff(var).is_positive())
            .collect()
    }

    /// Atoms of both systems, in first-seen order.
    pub fn merged_atoms(&self, other: &Self) -> Vec<Atom> {
        let mut out = self.atoms.clone();
        for a in &other.atoms {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
        out
    }

    /// Parses the one-constraint-per-line text format; blank lines and lines
    /// starting with `#` are skipped. Terms left of the sense are variables
    /// unless they are `I(...)` atoms; terms right of it are atoms or constants.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sys = InequalitySystem::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let c = parse_line(line).map_err(|message| Error::Parse { line: n + 1, message })?;
            for v in c.vars.keys() {
                if !sys.vars.contains(v) {
                    sys.vars.push(v.clone());
                }
            }
            sys.push(c)?;
        }
        Ok(sys)
    }
}

impl fmt::Display for InequalitySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for InequalitySystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn parse_line(line: &str) -> std::result::Result<LinearConstraint, String> {
    let (label, body) = line.split_once(':').ok_or("missing `label:` prefix")?;
    let label = label.trim();
    if label.is_empty() {
        return Err("empty label".into());
    }
    let (lhs, sense, rhs) = if let Some((l, r)) = body.split_once("<=") {
        (l, Sense::Le, r)
    } else if let Some((l, r)) = body.split_once(">=") {
        (l, Sense::Ge, r)
    } else {
        return Err("expected `<=` or `>=`".into());
    };
    let mut c = LinearConstraint {
        label: label.to_string(),
        vars: BTreeMap::new(),
        sense,
        atoms: BTreeMap::new(),
        constant: Rational::zero(),
    };
    for (k, name) in parse_side(lhs)? {
        match name {
            None => c.constant -= k,
            Some(n) if n.starts_with("I(") => {
                Atom::new(&n).map_err(|e| e.to_string())?;
                add_term(&mut c.atoms, &n, -k)
            }
            Some(n) => add_term(&mut c.vars, &n, k),
        }
    }
    for (k, name) in parse_side(rhs)? {
        match name {
            None => c.constant += k,
            Some(n) => {
                Atom::new(&n).map_err(|e| e.to_string())?;
                add_term(&mut c.atoms, &n, k)
            }
        }
    }
    Ok(c)
}

/// `[coef*]name` or a bare rational, joined by `+` (or `-`).
fn parse_side(side: &str) -> std::result::Result<Vec<(Rational, Option<String>)>, String> {
    let side = side.trim().replace(" - ", " + -");
    let mut out = vec![];
    for term in side.split(" + ") {
        let term = term.trim();
        if term.is_empty() {
            return Err("empty term".into());
        }
        let (coef, name) = match term.split_once('*') {
            Some((k, n)) => (parse_rational(k.trim())?, Some(n.trim().to_string())),
            None => match parse_rational(term) {
                Ok(k) => (k, None),
                Err(_) => match term.strip_prefix('-') {
                    Some(n) => (-Rational::one(), Some(n.to_string())),
                    None => (Rational::one(), Some(term.to_string())),
                },
            },
        };
        if let Some(n) = &name {
            if n.is_empty() || n.contains(char::is_whitespace) {
                return Err(format!("bad term {term:?}"));
            }
        }
        out.push((coef, name));
    }
    Ok(out)
}

/// Integers, `p/q` fractions and finite decimals, all exact.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let err = || format!("bad rational {s:?}");
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(digits, scale));
    }
    s.parse::<BigInt>().map(Rational::from_integer).map_err(|_| err())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_groups() {
        let a = Atom::new("I(X1;Y2|X2,X30)").unwrap();
        let g = a.groups().unwrap();
        assert_eq!(g[0], vec!["X1"]);
        assert_eq!(g[2], vec!["X2", "X30"]);
        assert_eq!(Atom::mi(&["X1", "X2"], &["Y4"], &[]).id(), "I(X1,X2;Y4)");
        assert!(Atom::new("A1").unwrap().groups().is_none());
        assert!(Atom::new("I(X1;X1)").is_err());
        assert!(Atom::new("I(;Y)").is_err());
        assert!(Atom::new("I(X Y)").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), Rational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn text_round_trip() {
        let text = "\
JD4: 1*R + 1*R30 + 1*R31 <= 1*I(X1,X2,X30,X31;Y4) + 1*I(Yhat3;X1,X2,Y4|X30,X31)
JD7: 1*R30 + 1*R31 >= 1*I(Yhat3;Y3|X30,X31)
c: 2*R <= 1/2*A1 + -3*A2 + 5/3
k: 0 <= 2
";
        let sys = InequalitySystem::parse(text).unwrap();
        assert_eq!(sys.vars(), ["R", "R30", "R31"]);
        assert_eq!(sys.atoms().len(), 5);
        assert_eq!(sys.to_string(), text);
        assert_eq!(InequalitySystem::parse(&sys.to_string()).unwrap(), sys);
    }

    #[test]
    fn parse_moves_lhs_atoms_and_constants() {
        let sys = InequalitySystem::parse("a: R - I(X;Y) + 1 <= 2").unwrap();
        let c = &sys.constraints()[0];
        assert_eq!(c.atoms["I(X;Y)"], rat(1));
        assert_eq!(c.constant, rat(1));
        assert_eq!(c.coeff("R"), rat(1));
    }

    #[test]
    fn parse_errors_carry_line() {
        match InequalitySystem::parse("a: R <= 1\n\nb R <= 2") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(InequalitySystem::parse("a: R < 1").is_err());
        assert!(InequalitySystem::parse("a: R <= 1/0*A").is_err());
    }

    #[test]
    fn ge_to_le() {
        let a = Atom::new("A").unwrap();
        let c = LinearConstraint::new("x", &[("R", 1)], Sense::Ge, &[(&a, 1)], 2).to_le();
        assert_eq!(c.to_string(), "x: -1*R <= -1*A + -2");
    }
}
