use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::check_disjoint;
use super::labels::{THM2_ORDER, X1, X2, X30, X31, Y2, Y3, Y4, YHAT3};
use crate::error::{Error, Result};

/// Largest product alphabet a dense table may have.
pub const MAX_CELLS: usize = 10_000_000;

const MASS_TOL: f64 = 1e-12;
const ROW_TOL: f64 = 1e-9;

/// Dense joint distribution over labeled finite alphabets.
///
/// The table is flat and row-major: the first label varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointPmfDoc", into = "JointPmfDoc")]
pub struct JointPmf {
    labels: Vec<String>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

/// On-disk form: `{labels, alphabet_sizes, probabilities}`.
#[derive(Serialize, Deserialize)]
struct JointPmfDoc {
    labels: Vec<String>,
    alphabet_sizes: Vec<usize>,
    probabilities: Vec<f64>,
}

impl TryFrom<JointPmfDoc> for JointPmf {
    type Error = Error;

    fn try_from(doc: JointPmfDoc) -> Result<Self> {
        JointPmf::new(doc.labels, doc.alphabet_sizes, doc.probabilities)
    }
}

impl From<JointPmf> for JointPmfDoc {
    fn from(p: JointPmf) -> Self {
        JointPmfDoc {
            labels: p.labels,
            alphabet_sizes: p.sizes,
            probabilities: p.probs,
        }
    }
}

fn cell_count(sizes: &[usize]) -> Result<usize> {
    sizes.iter().try_fold(1usize, |acc, &s| {
        if s == 0 {
            return Err(Error::InvalidDistribution("alphabet of size 0".into()));
        }
        acc.checked_mul(s)
            .filter(|&n| n <= MAX_CELLS)
            .ok_or_else(|| Error::InvalidDistribution(format!("product alphabet exceeds {MAX_CELLS} cells")))
    })
}

impl JointPmf {
    pub fn new(labels: Vec<String>, sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != sizes.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels but {} alphabet sizes",
                labels.len(),
                sizes.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Labels(format!("duplicate label {l}")));
            }
        }
        let cells = cell_count(&sizes)?;
        if probs.len() != cells {
            return Err(Error::InvalidDistribution(format!(
                "expected {cells} probabilities, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("total mass {total} != 1")));
        }
        Ok(JointPmf { labels, sizes, probs })
    }

    /// Point mass on the all-zero symbol.
    pub fn point_mass(labels: &[&str], sizes: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; cell_count(sizes)?];
        probs[0] = 1.0;
        JointPmf::new(labels.iter().map(|s| s.to_string()).collect(), sizes.to_vec(), probs)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Labels(format!("{label} is not a variable of this joint")))
    }

    pub fn alphabet_size(&self, label: &str) -> Result<usize> {
        Ok(self.sizes[self.position(label)?])
    }

    /// Marginal on `keep`, in the given label order.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointPmf> {
        check_disjoint(&[keep])?;
        let pos: Vec<usize> = keep.iter().map(|l| self.position(l)).collect::<Result<_>>()?;
        let out_sizes: Vec<usize> = pos.iter().map(|&i| self.sizes[i]).collect();
        let mut out = vec![0.0; out_sizes.iter().product()];

        // Stride of each kept variable inside the marginal table.
        let mut out_stride = vec![0usize; self.labels.len()];
        let mut s = 1;
        for (k, &i) in pos.iter().enumerate().rev() {
            out_stride[i] = s;
            s *= out_sizes[k];
        }

        let mut digits = vec![0usize; self.sizes.len()];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] += p;
            // Odometer increment, keeping `target` in sync.
            for v in (0..digits.len()).rev() {
                digits[v] += 1;
                target += out_stride[v];
                if digits[v] < self.sizes[v] {
                    break;
                }
                target -= out_stride[v] * digits[v];
                digits[v] = 0;
            }
        }
        Ok(JointPmf {
            labels: keep.iter().map(|s| s.to_string()).collect(),
            sizes: out_sizes,
            probs: out,
        })
    }

    /// Shannon entropy of the marginal on `a`, in bits.
    pub fn entropy(&self, a: &[&str]) -> Result<f64> {
        if a.is_empty() {
            return Ok(0.0);
        }
        let m = self.marginal(a)?;
        Ok(m.probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum())
    }

    /// `I(A;B|C)` in bits from marginal entropies, clamped at zero.
    pub fn mutual_info(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        check_disjoint(&[a, b, c])?;
        for l in a.iter().chain(b).chain(c) {
            self.position(l)?;
        }
        fn cat<'a>(x: &[&'a str], y: &[&'a str]) -> Vec<&'a str> {
            x.iter().chain(y).copied().collect()
        }
        let h_ac = self.entropy(&cat(a, c))?;
        let h_bc = self.entropy(&cat(b, c))?;
        let h_c = self.entropy(c)?;
        let h_abc = self.entropy(&cat(&cat(a, b), c))?;
        Ok((h_ac + h_bc - h_c - h_abc).max(0.0))
    }

    /// Probability of one assignment, given as `label -> symbol`.
    pub fn prob_of(&self, assignment: &BTreeMap<&str, usize>) -> Result<f64> {
        let mut flat = 0;
        for (i, l) in self.labels.iter().enumerate() {
            let v = *assignment
                .get(l.as_str())
                .ok_or_else(|| Error::Labels(format!("assignment is missing {l}")))?;
            if v >= self.sizes[i] {
                return Err(Error::Labels(format!("symbol {v} out of range for {l}")));
            }
            flat = flat * self.sizes[i] + v;
        }
        Ok(self.probs[flat])
    }
}

/// Conditional distribution `P(outcome | given)` as a dense table of rows,
/// one row per `given` assignment (row-major, first label slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPmf {
    pub given: Vec<(String, usize)>,
    pub outcome: Vec<(String, usize)>,
    pub table: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(given: &[(&str, usize)], outcome: &[(&str, usize)], table: Vec<f64>) -> Result<Self> {
        let own = |v: &[(&str, usize)]| v.iter().map(|(l, s)| (l.to_string(), *s)).collect();
        let c = ConditionalPmf {
            given: own(given),
            outcome: own(outcome),
            table,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn rows(&self) -> usize {
        self.given.iter().map(|g| g.1).product()
    }

    pub fn row_len(&self) -> usize {
        self.outcome.iter().map(|g| g.1).product()
    }

    pub fn validate(&self) -> Result<()> {
        let sizes: Vec<usize> = self.given.iter().chain(&self.outcome).map(|g| g.1).collect();
        let cells = cell_count(&sizes)?;
        if self.table.len() != cells {
            return Err(Error::InvalidDistribution(format!(
                "conditional table needs {cells} entries, has {}",
                self.table.len()
            )));
        }
        for (r, row) in self.table.chunks(self.row_len()).enumerate() {
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidDistribution(format!("row {r} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidDistribution(format!("row {r} sums to {s}")));
            }
        }
        Ok(())
    }

    fn expect_shape(&self, what: &str, given: &[&str], outcome: &[&str]) -> Result<()> {
        let names = |v: &[(String, usize)]| v.iter().map(|g| g.0.clone()).collect::<Vec<_>>();
        if names(&self.given) != given || names(&self.outcome) != outcome {
            return Err(Error::Labels(format!(
                "{what} must be P({outcome:?} | {given:?}), got P({:?} | {:?})",
                names(&self.outcome),
                names(&self.given)
            )));
        }
        Ok(())
    }

    fn size_of(&self, label: &str) -> usize {
        self.given
            .iter()
            .chain(&self.outcome)
            .find(|g| g.0 == label)
            .map(|g| g.1)
            .unwrap_or(0)
    }
}

/// Assembles `P(x1 x2) P(x30 x31) P(yhat3 | x30 x31 y3) P(y2 y3 y4 | x1 x2 x30 x31)`.
///
/// The result is labeled in [`THM2_ORDER`].
pub fn build_joint_thm2(
    p_x1x2: &JointPmf,
    p_x30x31: &JointPmf,
    q_yhat: &ConditionalPmf,
    channel: &ConditionalPmf,
) -> Result<JointPmf> {
    if p_x1x2.labels() != [X1, X2] {
        return Err(Error::Labels(format!(
            "source pmf must be over (X1, X2), got {:?}",
            p_x1x2.labels()
        )));
    }
    if p_x30x31.labels() != [X30, X31] {
        return Err(Error::Labels(format!(
            "relay pmf must be over (X30, X31), got {:?}",
            p_x30x31.labels()
        )));
    }
    q_yhat.expect_shape("quantizer", &[X30, X31, Y3], &[YHAT3])?;
    channel.expect_shape("channel", &[X1, X2, X30, X31], &[Y2, Y3, Y4])?;
    q_yhat.validate()?;
    channel.validate()?;

    let (n1, n2) = (p_x1x2.sizes()[0], p_x1x2.sizes()[1]);
    let (n30, n31) = (p_x30x31.sizes()[0], p_x30x31.sizes()[1]);
    let mismatch = |what: &str| Error::InvalidDistribution(format!("alphabet mismatch on {what}"));
    if channel.size_of(X1) != n1 || channel.size_of(X2) != n2 {
        return Err(mismatch("X1/X2"));
    }
    if channel.size_of(X30) != n30 || channel.size_of(X31) != n31 {
        return Err(mismatch("X30/X31"));
    }
    if q_yhat.size_of(X30) != n30 || q_yhat.size_of(X31) != n31 {
        return Err(mismatch("X30/X31 in quantizer"));
    }
    let (ny2, ny3, ny4) = (channel.size_of(Y2), channel.size_of(Y3), channel.size_of(Y4));
    if q_yhat.size_of(Y3) != ny3 {
        return Err(mismatch("Y3"));
    }
    let nyh = q_yhat.size_of(YHAT3);

    let sizes = vec![n1, n2, n30, n31, nyh, ny2, ny3, ny4];
    let mut probs = vec![0.0; cell_count(&sizes)?];
    let mut k = 0;
    for x1 in 0..n1 {
        for x2 in 0..n2 {
            let px = p_x1x2.probs[x1 * n2 + x2];
            for x30 in 0..n30 {
                for x31 in 0..n31 {
                    let pr = p_x30x31.probs[x30 * n31 + x31];
                    let ch_row = ((x1 * n2 + x2) * n30 + x30) * n31 + x31;
                    for yh in 0..nyh {
                        for y2 in 0..ny2 {
                            for y3 in 0..ny3 {
                                let q_row = (x30 * n31 + x31) * ny3 + y3;
                                let q = q_yhat.table[q_row * nyh + yh];
                                for y4 in 0..ny4 {
                                    let c = channel.table[ch_row * (ny2 * ny3 * ny4) + (y2 * ny3 + y3) * ny4 + y4];
                                    probs[k] = px * pr * q * c;
                                    k += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // Renormalize the accumulated rounding so the mass check stays at 1e-12.
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    JointPmf::new(THM2_ORDER.iter().map(|s| s.to_string()).collect(), sizes, probs)
}
