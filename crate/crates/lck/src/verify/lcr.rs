use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{max_abs, minimum, per_point, sub, worst, CheckResult};
use crate::chart::SmoothMap;
use crate::error::{Error, Result};
use crate::hermitian::{build_adapted_coframe, AdaptedCoframe, HermitianStructure};
use crate::sampling::Sampler;
use crate::tensor::DifferentialForm;

/// The structure-group element relating `f*(coframe at f(p))` to the
/// coframe at `p`.
#[derive(Clone, Debug)]
pub struct LCRDecomposition {
    pub lambda: f64,
    pub u: DMatrix<Complex64>,
    pub v: DVector<Complex64>,
    /// Largest entry of `M − M(λ, U, v)` for the full coefficient matrix.
    pub equation_residual: f64,
    /// `max |U†U − I|`.
    pub unitarity_residual: f64,
}

/// Coframe covectors `θ, θ∘J, θ^α, θ̄^α` in coordinate components.
pub fn coframe_rows(cf: &AdaptedCoframe) -> Vec<Vec<Complex64>> {
    let real = |v: &[f64]| v.iter().map(|c| Complex64::new(*c, 0.0)).collect::<Vec<_>>();
    let mut rows = vec![real(&cf.theta), real(&cf.theta_j)];
    for (re, im) in &cf.theta_alpha {
        rows.push(re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect());
    }
    for (re, im) in &cf.theta_alpha {
        rows.push(re.iter().zip(im).map(|(a, b)| Complex64::new(*a, -*b)).collect());
    }
    rows
}

/// The matrix of a structure-group element acting on the coframe rows.
pub fn g_element_matrix(lambda: f64, u: &DMatrix<Complex64>, v: &DVector<Complex64>) -> DMatrix<Complex64> {
    let k = u.nrows();
    let m = 2 + 2 * k;
    let sl = lambda.sqrt();
    let mut g = DMatrix::zeros(m, m);
    g[(0, 0)] = Complex64::new(1.0, 0.0);
    g[(1, 1)] = Complex64::new(lambda, 0.0);
    for a in 0..k {
        g[(2 + a, 1)] = v[a];
        g[(2 + k + a, 1)] = v[a].conj();
        for b in 0..k {
            g[(2 + a, 2 + b)] = u[(a, b)] * sl;
            g[(2 + k + a, 2 + k + b)] = u[(a, b)].conj() * sl;
        }
    }
    g
}

/// Applies `M` to the coframe at `p`: the covectors `Σ_s M_rs c_s`.
pub fn plant(cf: &AdaptedCoframe, m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    let rows = coframe_rows(cf);
    let d = cf.point.len();
    (0..m.nrows())
        .map(|r| {
            (0..d)
                .map(|i| (0..rows.len()).map(|s| m[(r, s)] * rows[s][i]).sum())
                .collect()
        })
        .collect()
}

/// Expresses `pulled` (covectors at `p`, ordered like the coframe) in the
/// coframe at `p` and splits the coefficient matrix into `(λ, U, v)`.
pub fn decompose(
    pulled: &[Vec<Complex64>],
    cf: &AdaptedCoframe,
    frame: &[Vec<f64>],
    metric: &DMatrix<f64>,
) -> Result<LCRDecomposition> {
    let rows = coframe_rows(cf);
    let m = frame.len();
    if rows.len() != m || pulled.len() != m {
        return Err(Error::InvalidInput("coframe and tangent frame sizes differ".into()));
    }
    let on_frame = |c: &[Complex64]| -> Vec<Complex64> {
        frame
            .iter()
            .map(|e| c.iter().zip(e).map(|(a, b)| a * b).sum())
            .collect()
    };
    let f = DMatrix::from_fn(m, m, |r, k| on_frame(&rows[r])[k]);
    let p = DMatrix::from_fn(m, m, |r, k| on_frame(&pulled[r])[k]);
    let finv = f
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("coframe is degenerate".into()))?;
    let coef = &p * finv;

    // λ from the metric pairing of real covectors on the tangent frame
    let ge = DMatrix::from_fn(m, m, |a, b| {
        DVector::from_column_slice(&frame[a]).dot(&(metric * DVector::from_column_slice(&frame[b])))
    });
    let gi = ge
        .try_inverse()
        .ok_or_else(|| Error::Singular("metric is singular on the frame".into()))?;
    let tj: DVector<f64> = f.row(1).transpose().map(|c| c.re);
    let ptj: DVector<f64> = p.row(1).transpose().map(|c| c.re);
    let lambda = ptj.dot(&(&gi * &tj)) / tj.dot(&(&gi * &tj));
    if !(lambda > 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "λ = {lambda:e}: the map does not preserve the co-orientation of θ∘J"
        )));
    }

    let k = (m - 2) / 2;
    let sl = lambda.sqrt();
    let u = DMatrix::from_fn(k, k, |a, b| coef[(2 + a, 2 + b)] / sl);
    let v = DVector::from_fn(k, |a, _| coef[(2 + a, 1)]);
    let model = g_element_matrix(lambda, &u, &v);
    let equation_residual = (&coef - &model).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let unitarity_residual = (u.adjoint() * &u - DMatrix::identity(k, k))
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    Ok(LCRDecomposition {
        lambda,
        u,
        v,
        equation_residual,
        unitarity_residual,
    })
}

/// Decomposes `f` at `x` against adapted coframes at `x` and `f(x)`.
pub fn decompose_map(
    f: &SmoothMap,
    h: &HermitianStructure,
    theta: &DifferentialForm,
    x: &[f64],
) -> Result<LCRDecomposition> {
    let cf_p = build_adapted_coframe(h, theta, x)?;
    let y = f.apply_coords(x);
    let cf_q = build_adapted_coframe(h, theta, &y)?;
    let jac = f.jacobian(x);
    let d = x.len();
    let pulled: Vec<Vec<Complex64>> = coframe_rows(&cf_q)
        .iter()
        .map(|c| {
            (0..d)
                .map(|i| (0..d).map(|r| c[r] * jac[r][i]).sum())
                .collect()
        })
        .collect();
    decompose(&pulled, &cf_p, &h.chart.tangent_frame(x), &h.g.matrix_at(x))
}

/// Runs [`decompose_map`] over the samples and reports the equation
/// residual, unitarity of `U` and positivity of `λ`.
pub fn analyze_lcr(
    f: &SmoothMap,
    h: &HermitianStructure,
    theta: &DifferentialForm,
    points: &[Vec<f64>],
) -> (Vec<LCRDecomposition>, Vec<CheckResult>) {
    let names = ["lcr_equation", "lcr_unitary", "lcr_lambda_positive"];
    let res = per_point(points, |x| decompose_map(f, h, theta, x));
    let mut out = Vec::with_capacity(res.len());
    for r in res {
        match r {
            Ok(d) => out.push(d),
            Err(e) => {
                let checks = vec![
                    CheckResult::errored(names[0], 1e-7, &e),
                    CheckResult::errored(names[1], 1e-8, &e),
                    CheckResult::errored(names[2], 0.0, &e),
                ];
                return (out, checks);
            }
        }
    }
    let n = out.len();
    let checks = vec![
        CheckResult::new(names[0], worst(out.iter().map(|d| d.equation_residual)), 1e-7, n),
        CheckResult::new(names[1], worst(out.iter().map(|d| d.unitarity_residual)), 1e-8, n),
        CheckResult::lower_bound(names[2], minimum(out.iter().map(|d| d.lambda)), 0.0, n),
    ];
    (out, checks)
}

/// `f_*` keeps `{θ^♯, Jθ^♯}^⊥` orthogonal to the Lee fields at the image
/// point and commutes with `J` there.
pub fn check_perp_preservation(
    f: &SmoothMap,
    h: &HermitianStructure,
    theta: &DifferentialForm,
    points: &[Vec<f64>],
) -> CheckResult {
    let res = per_point(points, |x| -> Result<f64> {
        let cf_p = build_adapted_coframe(h, theta, x)?;
        let y = f.apply_coords(x);
        let cf_q = build_adapted_coframe(h, theta, &y)?;
        let gy = h.g.matrix_at(&y);
        let pair = |u: &[f64], v: &[f64]| DVector::from_column_slice(u).dot(&(&gy * DVector::from_column_slice(v)));
        let mut r: f64 = 0.0;
        for u in &cf_p.frame {
            for xv in [u.clone(), h.j.apply_at(x, u)] {
                let fx = f.push_coords(x, &xv);
                r = worst([
                    r,
                    pair(&fx, &cf_q.lee_vector).abs(),
                    pair(&fx, &cf_q.j_lee_vector).abs(),
                    max_abs(&sub(&f.push_coords(x, &h.j.apply_at(x, &xv)), &h.j.apply_at(&y, &fx))),
                ]);
            }
        }
        Ok(r)
    });
    super::collect_residuals("perp_preservation", 1e-9, res)
}

/// A random element of `U(k)` from the QR factorization of a complex
/// Gaussian matrix, with the phases of `R` absorbed.
pub fn random_unitary(sampler: &mut Sampler, k: usize) -> DMatrix<Complex64> {
    let re = sampler.gaussian(k * k);
    let im = sampler.gaussian(k * k);
    let z = DMatrix::from_fn(k, k, |a, b| Complex64::new(re[a * k + b], im[a * k + b]));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for b in 0..k {
        let d = r[(b, b)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for a in 0..k {
            q[(a, b)] *= phase;
        }
    }
    q
}

/// Plants random structure-group elements on the coframe at each point and
/// checks that [`decompose`] returns them.
pub fn check_plant_and_recover(
    h: &HermitianStructure,
    theta: &DifferentialForm,
    points: &[Vec<f64>],
    sampler: &mut Sampler,
) -> CheckResult {
    let k = (h.chart.dim() - 2) / 2;
    // draw serially so the planted elements do not depend on thread count
    let planted: Vec<(f64, DMatrix<Complex64>, DVector<Complex64>)> = points
        .iter()
        .map(|_| {
            let lambda = sampler.uniform(-1.5, 1.5).exp();
            let u = random_unitary(sampler, k);
            let g = sampler.gaussian(2 * k);
            let v = DVector::from_fn(k, |a, _| Complex64::new(g[2 * a], g[2 * a + 1]));
            (lambda, u, v)
        })
        .collect();
    let inputs: Vec<(usize, Vec<f64>)> = points.iter().cloned().enumerate().collect();
    let res: Vec<Result<f64>> = {
        use rayon::prelude::*;
        inputs
            .par_iter()
            .map(|(i, x)| {
                let (lambda, u, v) = &planted[*i];
                let cf = build_adapted_coframe(h, theta, x)?;
                let pulled = plant(&cf, &g_element_matrix(*lambda, u, v));
                let d = decompose(&pulled, &cf, &h.chart.tangent_frame(x), &h.g.matrix_at(x))?;
                let du = (&d.u - u).iter().map(|c| c.norm()).fold(0.0, f64::max);
                let dv = (&d.v - v).iter().map(|c| c.norm()).fold(0.0, f64::max);
                Ok(worst([(d.lambda - lambda).abs() / lambda, du, dv, d.equation_residual]))
            })
            .collect()
    };
    super::collect_residuals("lcr_plant_and_recover", 1e-7, res)
}
