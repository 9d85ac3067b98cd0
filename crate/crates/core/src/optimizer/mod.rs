//! Parameter search: an exhaustive grid followed by coordinate-wise
//! golden-section refinement, plus the per-scheme wiring and sweeps.

mod scheme_opt;
mod sweep;

pub use scheme_opt::{
    default_box, evaluate_scheme, induced_correlations, optimize_all, optimize_scheme, optimize_scheme_seeded,
    Evaluation,
};
pub use sweep::{
    fmt_sig, gnuplot_data, gnuplot_script, read_csv_rows, sweep, sweep_json, write_csv, GeometrySpec, SweepParam,
    SweepRow, SweepSpec,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// One searched coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub scale: Scale,
    /// Also try `+inf` for this coordinate (a limit the evaluator understands).
    #[serde(default)]
    pub allow_infinite: bool,
}

impl Param {
    pub fn linear(name: &str, lower: f64, upper: f64) -> Self {
        Param {
            name: name.to_string(),
            lower,
            upper,
            scale: Scale::Linear,
            allow_infinite: false,
        }
    }

    pub fn log(name: &str, lower: f64, upper: f64, allow_infinite: bool) -> Self {
        Param {
            name: name.to_string(),
            lower,
            upper,
            scale: Scale::Log,
            allow_infinite,
        }
    }

    /// Unit coordinate to parameter value; `u = +inf` maps to `+inf`.
    fn at(&self, u: f64) -> f64 {
        if u == f64::INFINITY {
            return f64::INFINITY;
        }
        match self.scale {
            Scale::Linear => self.lower + u * (self.upper - self.lower),
            Scale::Log => (self.lower.ln() + u * (self.upper.ln() - self.lower.ln())).exp(),
        }
    }

    fn unit(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return f64::INFINITY;
        }
        match self.scale {
            Scale::Linear => (x - self.lower) / (self.upper - self.lower),
            Scale::Log => (x.ln() - self.lower.ln()) / (self.upper.ln() - self.lower.ln()),
        }
    }
}

fn default_resolution() -> usize {
    21
}

fn default_rounds() -> usize {
    5
}

fn default_shrink() -> f64 {
    0.5
}

/// Search box plus the knobs of the grid and refinement passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub params: Vec<Param>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    /// Extra uniformly random points tried after the grid.
    #[serde(default)]
    pub random_probes: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SearchBox {
    pub fn new(params: Vec<Param>) -> Self {
        SearchBox {
            params,
            resolution: default_resolution(),
            rounds: default_rounds(),
            shrink: default_shrink(),
            random_probes: 0,
            seed: 0,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::InvalidBox("no parameters".into()));
        }
        for p in &self.params {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                return Err(Error::InvalidBox(format!("{}: need finite lower < upper", p.name)));
            }
            if p.scale == Scale::Log && p.lower <= 0.0 {
                return Err(Error::InvalidBox(format!("{}: log scale needs lower > 0", p.name)));
            }
        }
        if self.resolution < 2 {
            return Err(Error::InvalidBox("resolution must be >= 2".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidBox("shrink must lie in (0, 1)".into()));
        }
        let cells = (self.resolution as f64).powi(self.params.len() as i32);
        if cells > 5e7 {
            return Err(Error::InvalidBox(format!("grid of {cells} points is too large")));
        }
        Ok(())
    }
}

/// Outcome of a search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub rate: f64,
    /// Name of the binding bound at `params`, when the evaluator reports one.
    pub binding: Option<String>,
    pub evaluations: usize,
    /// Best rate after the grid, seeds, probes and limit points.
    pub grid_rate: f64,
    /// `rate - grid_rate`.
    pub improvement: f64,
    /// Incumbent rate after each refinement round.
    pub round_rates: Vec<f64>,
}

impl OptResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.params[i])
    }
}

const GOLDEN_STEPS: usize = 40;

struct Search<'a, F> {
    f: F,
    bx: &'a SearchBox,
    evals: usize,
    best_u: Vec<f64>,
    best_x: Vec<f64>,
    best: f64,
}

impl<F: FnMut(&[f64]) -> f64> Search<'_, F> {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_finite() && v > 0.0 {
            v
        } else {
            0.0
        }
    }

    fn to_x(&self, u: &[f64]) -> Vec<f64> {
        self.bx.params.iter().zip(u).map(|(p, &u)| p.at(u)).collect()
    }

    /// Evaluates at `u` (or at an explicit `x`) and keeps it if strictly better.
    fn offer(&mut self, u: Vec<f64>, x: Option<Vec<f64>>) -> f64 {
        let x = x.unwrap_or_else(|| self.to_x(&u));
        let v = self.value(&x);
        if v > self.best {
            self.best = v;
            self.best_u = u;
            self.best_x = x;
        }
        v
    }

    fn grid(&mut self) {
        let (d, n) = (self.bx.params.len(), self.bx.resolution);
        let step = 1.0 / (n - 1) as f64;
        let mut idx = vec![0usize; d];
        loop {
            let u: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
            self.offer(u, None);
            // Odometer with the last coordinate fastest: lexicographic order.
            let mut i = d;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < n {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    /// Golden-section search of coordinate `i` over `[a, b]` in unit space.
    fn refine_coordinate(&mut self, i: usize, a: f64, b: f64) {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let base = self.best_u.clone();
        let eval_at = |s: &mut Self, t: f64| {
            let mut u = base.clone();
            u[i] = t;
            s.offer(u, None)
        };
        let (mut a, mut b) = (a, b);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (eval_at(self, c), eval_at(self, d));
        for _ in 0..GOLDEN_STEPS {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = eval_at(self, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = eval_at(self, d);
            }
        }
    }
}

/// Maximizes `f` over the box.
///
/// Deterministic: the full grid in lexicographic order (first point wins
/// ties), then `seeds` (explicit parameter vectors, possibly outside the
/// box), then `random_probes` seeded points, then `+inf` for every coordinate
/// that admits it, then `rounds` rounds of golden-section refinement per
/// coordinate within a window that starts at one grid step and shrinks by
/// `shrink`. Only strict improvements move the incumbent. Non-finite or
/// negative values count as 0.
pub fn optimize(f: impl FnMut(&[f64]) -> f64, bx: &SearchBox, seeds: &[Vec<f64>]) -> Result<OptResult> {
    bx.validate()?;
    let d = bx.params.len();
    for s in seeds {
        if s.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: s.len(),
            });
        }
    }
    let mut s = Search {
        f,
        bx,
        evals: 0,
        best_u: vec![0.0; d],
        best_x: bx.params.iter().map(|p| p.lower).collect(),
        best: f64::NEG_INFINITY,
    };
    s.grid();
    for x in seeds {
        let u = bx.params.iter().zip(x).map(|(p, &x)| p.unit(x)).collect();
        s.offer(u, Some(x.clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(bx.seed);
    for _ in 0..bx.random_probes {
        let u: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        s.offer(u, None);
    }
    for i in 0..d {
        if bx.params[i].allow_infinite && s.best_u[i].is_finite() {
            let mut u = s.best_u.clone();
            u[i] = f64::INFINITY;
            s.offer(u, None);
        }
    }
    let grid_rate = s.best;
    let mut w = 1.0 / (bx.resolution - 1) as f64;
    let mut round_rates = vec![];
    for _ in 0..bx.rounds {
        for i in 0..d {
            let c = s.best_u[i];
            let (a, b) = if c.is_finite() {
                ((c - w).max(0.0), (c + w).min(1.0))
            } else {
                (1.0 - w, 1.0)
            };
            if b > a {
                s.refine_coordinate(i, a, b);
            }
        }
        round_rates.push(s.best);
        w *= bx.shrink;
    }
    Ok(OptResult {
        names: bx.names(),
        params: s.best_x,
        rate: s.best,
        binding: None,
        evaluations: s.evals,
        grid_rate,
        improvement: s.best - grid_rate,
        round_rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(res: usize, rounds: usize) -> SearchBox {
        SearchBox::new(vec![Param::linear("x", 0.0, 1.0)])
            .with_resolution(res)
            .with_rounds(rounds)
    }

    #[test]
    fn known_optimum() {
        // Shift the optimum off the grid so refinement has work to do.
        let r = optimize(|x| 1.0 - (x[0] - 0.3137).powi(2), &unit_box(11, 3), &[]).unwrap();
        assert!((r.params[0] - 0.3137).abs() < 1e-3, "{:?}", r.params);
        assert!(r.rate >= r.grid_rate);
        assert!(r.round_rates.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn constant_objective_keeps_first_grid_point() {
        let r = optimize(|_| 0.7, &unit_box(5, 2), &[]).unwrap();
        assert_eq!(r.params, vec![0.0]);
        assert_eq!(r.rate, 0.7);
        assert_eq!(r.improvement, 0.0);
    }

    #[test]
    fn negative_and_nan_are_zero() {
        let r = optimize(|x| if x[0] < 0.5 { f64::NAN } else { -1.0 }, &unit_box(5, 1), &[]).unwrap();
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn lexicographic_ties() {
        let bx = SearchBox::new(vec![Param::linear("a", 0.0, 1.0), Param::linear("b", 0.0, 1.0)]).with_resolution(3);
        // Ties between (0, 1) and (1, 0): first in order wins.
        let r = optimize(|x| x[0].max(x[1]), &bx.with_rounds(0), &[]).unwrap();
        assert_eq!(r.params, vec![0.0, 1.0]);
    }

    #[test]
    fn log_scale_and_infinite_limit() {
        let bx = SearchBox::new(vec![Param::log("n", 1e-3, 1e3, true)]);
        let r = optimize(|x| 1.0 - 1.0 / (1.0 + x[0]), &bx, &[]).unwrap();
        assert_eq!(r.params[0], f64::INFINITY);
        assert_eq!(r.rate, 1.0);
        let bx = SearchBox::new(vec![Param::log("n", 1e-3, 1e3, false)]);
        let r = optimize(|x| -(x[0].ln() - 2f64.ln()).powi(2), &bx, &[]).unwrap();
        assert_eq!(r.rate, 0.0);
        let r = optimize(|x| 5.0 - (x[0].ln() - 2f64.ln()).powi(2), &bx, &[]).unwrap();
        assert!((r.params[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn seeds_and_probes() {
        let bx = unit_box(3, 0);
        let spike = |x: &[f64]| if (x[0] - 0.123).abs() < 1e-12 { 2.0 } else { 1.0 };
        let r = optimize(spike, &bx, &[vec![0.123]]).unwrap();
        assert_eq!(r.rate, 2.0);
        assert!(optimize(spike, &bx, &[vec![0.1, 0.2]]).is_err());
        let mut bx = unit_box(3, 0);
        bx.random_probes = 10;
        bx.seed = 9;
        let a = optimize(|x| x[0] * (1.0 - x[0]) + x[0] * 0.01, &bx, &[]).unwrap();
        let b = optimize(|x| x[0] * (1.0 - x[0]) + x[0] * 0.01, &bx, &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluations, 13);
    }

    #[test]
    fn invalid_boxes() {
        assert!(optimize(|_| 0.0, &SearchBox::new(vec![]), &[]).is_err());
        assert!(optimize(|_| 0.0, &SearchBox::new(vec![Param::linear("x", 1.0, 1.0)]), &[]).is_err());
        assert!(optimize(|_| 0.0, &SearchBox::new(vec![Param::log("x", 0.0, 1.0, false)]), &[]).is_err());
        assert!(optimize(|_| 0.0, &unit_box(1, 1), &[]).is_err());
    }
}
