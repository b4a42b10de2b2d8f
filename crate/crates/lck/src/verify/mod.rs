//! Checks that certify or refute identities on a structure, each reporting
//! its worst residual over a set of sample points.
//!
//! Sample loops run on the current rayon pool and collect in input order,
//! so reports do not depend on the number of threads.

mod checks;
mod lcr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::Result;
use crate::hermitian::extract_lee_form;
use crate::tensor::DifferentialForm;

pub use checks::*;
pub use lcr::*;

/// Tolerance for algebraic identities evaluated along one path.
pub const TOL_ALGEBRAIC: f64 = 1e-10;
/// Tolerance for identities involving jet derivatives.
pub const TOL_JET: f64 = 1e-8;
/// Tolerance for two-stage finite-difference checks.
pub const TOL_FINITE_DIFFERENCE: f64 = 1e-5;

/// One verified identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    #[serde(rename = "points")]
    pub points_tested: usize,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
}

impl CheckResult {
    /// `pass` is derived: `max_residual < tolerance`, false for `NaN`.
    pub fn new(name: impl Into<String>, max_residual: f64, tolerance: f64, points_tested: usize) -> Self {
        CheckResult {
            name: name.into(),
            max_residual,
            tolerance,
            points_tested,
            pass: max_residual < tolerance,
            notes: String::new(),
        }
    }

    /// A lower-bound check `value > bound`, encoded as residual `−value`
    /// against tolerance `−bound`.
    pub fn lower_bound(name: impl Into<String>, min_value: f64, bound: f64, points_tested: usize) -> Self {
        let mut c = CheckResult::new(name, -min_value, -bound, points_tested);
        c.notes = format!("lower bound: min value {min_value:.6e} must exceed {bound:e}");
        c
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    /// Recomputes `pass` from the stored residual and tolerance.
    pub fn recomputed_pass(&self) -> bool {
        self.max_residual < self.tolerance
    }

    /// A failed check recording an error that prevented evaluation.
    pub fn errored(name: impl Into<String>, tolerance: f64, err: &crate::Error) -> Self {
        CheckResult::new(name, f64::NAN, tolerance, 0).with_notes(format!("error: {err}"))
    }
}

/// Maximum of the inputs, `NaN` if any input is `NaN`.
pub fn worst<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut m = 0.0f64;
    for v in values {
        if v.is_nan() {
            return f64::NAN;
        }
        m = m.max(v);
    }
    m
}

fn minimum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut m = f64::INFINITY;
    for v in values {
        if v.is_nan() {
            return f64::NAN;
        }
        m = m.min(v);
    }
    m
}

/// Evaluates `f` at every point on the current rayon pool, in order.
pub(crate) fn per_point<T: Send>(points: &[Vec<f64>], f: impl Fn(&[f64]) -> T + Sync + Send) -> Vec<T> {
    points.par_iter().map(|p| f(p)).collect()
}

/// Folds per-point results into one residual; an error at any point makes
/// the residual `NaN` and is recorded in the notes.
fn collect_residuals(name: &str, tolerance: f64, results: Vec<Result<f64>>) -> CheckResult {
    let n = results.len();
    let mut vals = Vec::with_capacity(n);
    for r in results {
        match r {
            Ok(v) => vals.push(v),
            Err(e) => return CheckResult::errored(name, tolerance, &e),
        }
    }
    CheckResult::new(name, worst(vals), tolerance, n)
}

const FD_STEP: f64 = 1e-4;

/// The extracted Lee form at `x` and its coordinate Jacobian
/// `∂_k θ_l`, by Richardson-extrapolated central differences.
pub fn lee_form_with_jacobian(
    omega: &DifferentialForm,
    chart: &Chart,
    x: &[f64],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = x.len();
    let theta = extract_lee_form(omega, chart, x)?.theta;
    let at = |k: usize, h: f64| -> Result<Vec<f64>> {
        let mut y = x.to_vec();
        y[k] += h;
        Ok(extract_lee_form(omega, chart, &y)?.theta)
    };
    let mut jac = vec![vec![0.0; d]; d];
    for (k, row) in jac.iter_mut().enumerate() {
        let central = |h: f64| -> Result<Vec<f64>> {
            let (p, m) = (at(k, h)?, at(k, -h)?);
            Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        };
        let (coarse, fine) = (central(FD_STEP)?, central(FD_STEP / 2.0)?);
        for l in 0..d {
            row[l] = (4.0 * fine[l] - coarse[l]) / 3.0;
        }
    }
    Ok((theta, jac))
}

/// Sample standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn bilinear(m: &[f64], d: usize, u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += u[i] * m[i * d + j] * v[j];
        }
    }
    s
}

fn max_abs(v: &[f64]) -> f64 {
    worst(v.iter().map(|c| c.abs()))
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
