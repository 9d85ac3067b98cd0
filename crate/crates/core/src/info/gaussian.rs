use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::check_disjoint;
use crate::error::{Error, Result};

/// Eigenvalues below this are floored when taking log-determinants.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Relative tolerance for accepting slightly negative eigenvalues as zero.
const PSD_TOL: f64 = 1e-9;

/// Whether variables are real or circularly-symmetric complex Gaussians.
///
/// Real systems give `I = 1/2 log2 det(..)`; complex ones drop the one half,
/// which is the convention behind `C(x) = log2(1 + x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Field {
    #[default]
    Real,
    Complex,
}

impl Field {
    fn factor(self) -> f64 {
        match self {
            Field::Real => 0.5,
            Field::Complex => 1.0,
        }
    }
}

/// Result of a log-det mutual-information evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMi {
    pub bits: f64,
    /// Set when a singular block had eigenvalues floored at [`EIGEN_FLOOR`].
    pub floored: bool,
}

/// Jointly Gaussian, zero-mean variables built from independent latent sources.
///
/// Every variable is a row of `loadings`, i.e. a linear combination of
/// independent unit-variance latents; the joint covariance is `A A^T`, so it
/// is positive semidefinite by construction once the inputs are.
#[derive(Debug, Clone)]
pub struct GaussianSystem {
    labels: Vec<String>,
    loadings: DMatrix<f64>,
    field: Field,
}

fn sym_sqrt(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    let scale = (0..n).map(|i| cov[(i, i)].abs()).fold(1.0f64, f64::max);
    let eig = SymmetricEigen::new(cov.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * scale {
        return Err(Error::NotPsd(min));
    }
    let mut root = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        root.column_mut(j).scale_mut(s);
    }
    Ok(root)
}

impl GaussianSystem {
    /// Starts a system from transmit variables with covariance `cov`.
    pub fn with_inputs(labels: &[&str], cov: DMatrix<f64>, field: Field) -> Result<Self> {
        if cov.nrows() != labels.len() || cov.ncols() != labels.len() {
            return Err(Error::Dimension {
                expected: labels.len(),
                got: cov.nrows(),
            });
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite covariance entry".into()));
        }
        let asym = (&cov - cov.transpose()).abs().max();
        if asym > 1e-12 * cov.abs().max().max(1.0) {
            return Err(Error::InvalidParams("covariance is not symmetric".into()));
        }
        check_disjoint(&[labels])?;
        Ok(GaussianSystem {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            loadings: sym_sqrt(&cov)?,
            field,
        })
    }

    /// Independent inputs with the given variances.
    pub fn independent_inputs(inputs: &[(&str, f64)], field: Field) -> Result<Self> {
        let labels: Vec<&str> = inputs.iter().map(|i| i.0).collect();
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            inputs.len(),
            inputs.iter().map(|i| i.1),
        ));
        Self::with_inputs(&labels, cov, field)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Labels(format!("{label} is not a variable of this system")))
    }

    /// Adds `label = sum(coeff * existing) + N(0, noise_var)`.
    pub fn add_combination(&mut self, label: &str, terms: &[(&str, f64)], noise_var: f64) -> Result<()> {
        if self.labels.iter().any(|l| l == label) {
            return Err(Error::Labels(format!("{label} already defined")));
        }
        if !(noise_var >= 0.0) {
            return Err(Error::InvalidParams(format!("noise variance {noise_var} for {label}")));
        }
        let latent = self.loadings.ncols();
        let mut row = nalgebra::RowDVector::zeros(latent + 1);
        for &(src, c) in terms {
            if !c.is_finite() {
                return Err(Error::InvalidParams(format!("non-finite coefficient on {src}")));
            }
            let i = self.index(src)?;
            for k in 0..latent {
                row[k] += c * self.loadings[(i, k)];
            }
        }
        if noise_var.is_infinite() {
            // Pure noise: independent of everything, scale is irrelevant for MI.
            row.fill(0.0);
            row[latent] = 1.0;
        } else {
            row[latent] = noise_var.sqrt();
        }
        let rows = self.loadings.nrows();
        let mut grown = self.loadings.clone().insert_column(latent, 0.0).insert_row(rows, 0.0);
        grown.row_mut(rows).copy_from(&row);
        self.loadings = grown;
        self.labels.push(label.to_string());
        Ok(())
    }

    /// Adds a receiver output `label = sum(gain * input) + N(0, 1)`.
    pub fn add_output(&mut self, label: &str, gains: &[(&str, f64)]) -> Result<()> {
        self.add_combination(label, gains, 1.0)
    }

    /// Adds `label = source + N(0, variance)`; an infinite variance gives an
    /// output independent of everything else.
    pub fn add_quantized(&mut self, label: &str, source: &str, variance: f64) -> Result<()> {
        if !(variance > 0.0) {
            return Err(Error::InvalidParams(format!(
                "quantization variance for {label} must be > 0, got {variance}"
            )));
        }
        self.add_combination(label, &[(source, 1.0)], variance)
    }

    /// Full covariance matrix in label order.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.loadings * self.loadings.transpose()
    }

    fn log_det(&self, idx: &[usize]) -> (f64, bool) {
        if idx.is_empty() {
            return (0.0, false);
        }
        let a = self.loadings.select_rows(idx);
        let m = &a * a.transpose();
        if let Some(ch) = m.clone().cholesky() {
            let l = ch.l_dirty();
            let diag: Vec<f64> = (0..idx.len()).map(|i| l[(i, i)]).collect();
            if diag.iter().all(|d| d * d >= 1e-10) {
                return (diag.iter().map(|d| 2.0 * d.ln()).sum(), false);
            }
        }
        let eig = SymmetricEigen::new(m);
        let mut floored = false;
        let ld = eig
            .eigenvalues
            .iter()
            .map(|&l| {
                if l < EIGEN_FLOOR {
                    floored = true;
                    EIGEN_FLOOR.ln()
                } else {
                    l.ln()
                }
            })
            .sum();
        (ld, floored)
    }

    /// `I(A;B|C)` from log-determinants of covariance blocks.
    pub fn gaussian_mi(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<GaussianMi> {
        check_disjoint(&[a, b, c])?;
        let idx = |g: &[&str]| g.iter().map(|l| self.index(l)).collect::<Result<Vec<_>>>();
        let (ia, ib, ic) = (idx(a)?, idx(b)?, idx(c)?);
        let join = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
        let (ac, fac) = self.log_det(&join(&ia, &ic));
        let (bc, fbc) = self.log_det(&join(&ib, &ic));
        let (cc, fc) = self.log_det(&ic);
        let (abc, fabc) = self.log_det(&join(&join(&ia, &ib), &ic));
        let nats = ac + bc - cc - abc;
        Ok(GaussianMi {
            bits: (self.field.factor() * nats / std::f64::consts::LN_2).max(0.0),
            floored: fac || fbc || fc || fabc,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(var_x: f64) -> GaussianSystem {
        let mut s = GaussianSystem::independent_inputs(&[("X", var_x)], Field::Real).unwrap();
        s.add_output("Y", &[("X", 1.0)]).unwrap();
        s
    }

    #[test]
    fn scalar_awgn() {
        assert_abs_diff_eq!(
            scalar(1.0).gaussian_mi(&["X"], &["Y"], &[]).unwrap().bits,
            0.5,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            scalar(3.0).gaussian_mi(&["X"], &["Y"], &[]).unwrap().bits,
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn mac_conditional() {
        let mut s = GaussianSystem::independent_inputs(&[("X1", 1.0), ("X2", 1.0)], Field::Real).unwrap();
        s.add_output("Y", &[("X1", 1.0), ("X2", 1.0)]).unwrap();
        let mi = s.gaussian_mi(&["X1"], &["Y"], &["X2"]).unwrap();
        assert_abs_diff_eq!(mi.bits, 0.5, epsilon = 1e-14);
        assert!(!mi.floored);
        // Complex convention doubles it: C(1) = 1.
        let mut c = GaussianSystem::independent_inputs(&[("X1", 1.0), ("X2", 1.0)], Field::Complex).unwrap();
        c.add_output("Y", &[("X1", 1.0), ("X2", 1.0)]).unwrap();
        assert_abs_diff_eq!(
            c.gaussian_mi(&["X1"], &["Y"], &["X2"]).unwrap().bits,
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn independent_groups_have_zero_mi() {
        let s = GaussianSystem::independent_inputs(&[("A", 2.0), ("B", 5.0), ("C", 0.3)], Field::Real).unwrap();
        assert!(s.gaussian_mi(&["A"], &["B"], &[]).unwrap().bits.abs() <= 1e-12);
        assert!(s.gaussian_mi(&["A", "C"], &["B"], &[]).unwrap().bits.abs() <= 1e-12);
    }

    #[test]
    fn singular_conditioning_is_floored() {
        // X2 is an exact copy of X1: conditioning on both is singular.
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let mut s = GaussianSystem::with_inputs(&["X1", "X2"], cov, Field::Complex).unwrap();
        s.add_output("Y", &[("X1", 1.0), ("X2", 1.0)]).unwrap();
        let mi = s.gaussian_mi(&["X1", "X2"], &["Y"], &[]).unwrap();
        assert_abs_diff_eq!(mi.bits, 5f64.log2(), epsilon = 1e-9);
        let cond = s.gaussian_mi(&["X1"], &["Y"], &["X2"]).unwrap();
        assert!(cond.floored);
        assert!(cond.bits.abs() < 1e-6);
    }

    #[test]
    fn non_psd_rejected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianSystem::with_inputs(&["A", "B"], cov, Field::Real),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn quantized_output() {
        let mut s = GaussianSystem::independent_inputs(&[("X", 1.0)], Field::Complex).unwrap();
        s.add_output("Y", &[("X", 1.0)]).unwrap();
        s.add_quantized("Yq", "Y", 2.0).unwrap();
        // Yq = X + N(0, 3): C(1/3).
        let got = s.gaussian_mi(&["X"], &["Yq"], &[]).unwrap().bits;
        assert_abs_diff_eq!(got, (4.0f64 / 3.0).log2(), epsilon = 1e-13);
        // Given X, I(Y; Yq | X) = C(1/2).
        assert_abs_diff_eq!(
            s.gaussian_mi(&["Y"], &["Yq"], &["X"]).unwrap().bits,
            1.5f64.log2(),
            epsilon = 1e-13
        );
        s.add_quantized("Yoff", "Y", f64::INFINITY).unwrap();
        assert!(s.gaussian_mi(&["X", "Y"], &["Yoff"], &[]).unwrap().bits.abs() < 1e-12);
        assert!(s.add_quantized("Ybad", "Y", 0.0).is_err());
    }

    #[test]
    fn label_checks() {
        let s = scalar(1.0);
        assert!(s.gaussian_mi(&["X"], &["X"], &[]).is_err());
        assert!(s.gaussian_mi(&["X"], &["Q"], &[]).is_err());
    }

    /// A finely discretized scalar Gaussian channel lands close to the log-det value.
    #[test]
    fn discretized_gaussian_agrees_coarsely() {
        use crate::info::JointPmf;
        let (var_x, step, half) = (1.0f64, 0.1f64, 60i64);
        let pts: Vec<f64> = (-half..=half).map(|k| k as f64 * step).collect();
        let dens = |x: f64, v: f64| (-x * x / (2.0 * v)).exp();
        let mut probs = Vec::with_capacity(pts.len() * pts.len());
        for &x in &pts {
            for &y in &pts {
                probs.push(dens(x, var_x) * dens(y - x, 1.0));
            }
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let n = pts.len();
        let joint = JointPmf::new(vec!["X".into(), "Y".into()], vec![n, n], probs).unwrap();
        let discrete = joint.mutual_info(&["X"], &["Y"], &[]).unwrap();
        let exact = scalar(var_x).gaussian_mi(&["X"], &["Y"], &[]).unwrap().bits;
        assert!((discrete - exact).abs() < 0.02, "discrete {discrete} vs {exact}");
    }
}
