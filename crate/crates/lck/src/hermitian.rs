//! Objects derived from a Hermitian pair `(g, J)`: fundamental form, Lee
//! form, Nijenhuis tensor, Levi form and the adapted unitary coframe.
//!
//! Everything here works on tangent spaces of the chart's manifold. On the
//! punctured chart that is the whole coordinate space; on the cylinder it
//! is the span of [`Chart::tangent_frame`], and fields are expected to be
//! extended off `ℝ × S^{2n−1}` so that vectors tangent to the level sets of
//! `|w|` stay tangent.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::chart::{dot, Chart};
use crate::error::{Error, Result};
use crate::jet;
use crate::tensor::{
    bracket, d_two_form, sharp, wedge_one_two, ComplexStructureField, DifferentialForm,
    MetricField, VectorField, MAX_CONDITION,
};

/// A metric and almost complex structure on one chart.
#[derive(Clone, Debug)]
pub struct HermitianStructure {
    pub chart: Chart,
    pub g: MetricField,
    pub j: ComplexStructureField,
}

impl HermitianStructure {
    pub fn new(chart: Chart, g: MetricField, j: ComplexStructureField) -> Result<Self> {
        if g.dim() != chart.dim() || j.dim() != chart.dim() {
            return Err(Error::InvalidInput(format!(
                "fields of dimension {}/{} on a chart of dimension {}",
                g.dim(),
                j.dim(),
                chart.dim()
            )));
        }
        Ok(HermitianStructure { chart, g, j })
    }

    /// Flat `ℂⁿ` with `J₀`.
    pub fn flat(n: usize) -> Self {
        let chart = Chart::punctured(n);
        HermitianStructure {
            chart,
            g: MetricField::euclidean(2 * n),
            j: ComplexStructureField::standard(2 * n),
        }
    }

    pub fn fundamental_form(&self) -> DifferentialForm {
        fundamental_form(&self.g, &self.j)
    }
}

/// `ω(X, Y) = g(X, JY)`.
pub fn fundamental_form(g: &MetricField, j: &ComplexStructureField) -> DifferentialForm {
    let d = g.dim();
    let (g, j) = (g.clone(), j.clone());
    DifferentialForm::two_form(d, move |x| {
        let (m, jm) = (g.eval_jets(x), j.eval_jets(x));
        let mut w = Vec::with_capacity(d * d);
        for i in 0..d {
            for k in 0..d {
                w.push((0..d).map(|l| m[i * d + l] * jm[l * d + k]).sum());
            }
        }
        w
    })
}

/// Result of a pointwise Lee form extraction.
#[derive(Clone, Debug, PartialEq)]
pub struct LeeExtraction {
    /// `θ_p` as a coordinate covector, vanishing on the chart's normal
    /// direction.
    pub theta: Vec<f64>,
    /// Largest violation of `dω = θ∧ω` over all frame triples.
    pub residual: f64,
}

/// Solves `dω(e_i, e_j, e_k) = (θ∧ω)(e_i, e_j, e_k)` for `θ` in the least
/// squares sense over all triples of the tangent frame at `x`.
pub fn extract_lee_form(omega: &DifferentialForm, chart: &Chart, x: &[f64]) -> Result<LeeExtraction> {
    let d = omega.dim();
    if chart.manifold_dim() < 4 {
        return Err(Error::InvalidInput("Lee extraction needs real dimension ≥ 4".into()));
    }
    let frame = chart.tangent_frame(x);
    let m = frame.len();
    let c = omega.coeffs_at(x, 2);
    let w = jet::values(&c);
    let om = |u: &[f64], v: &[f64]| -> f64 {
        (0..d).map(|i| u[i] * (0..d).map(|k| w[i * d + k] * v[k]).sum::<f64>()).sum()
    };

    let pairing = DMatrix::from_fn(m, m, |i, k| om(&frame[i], &frame[k]));
    let sv = pairing.clone().svd(false, false).singular_values;
    if !(sv.min() > 0.0) || sv.max() / sv.min() > MAX_CONDITION {
        return Err(Error::Singular("fundamental form is degenerate at the sample".into()));
    }

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let mut row = vec![0.0; m];
                row[i] += pairing[(j, k)] / 3.0;
                row[j] += pairing[(k, i)] / 3.0;
                row[k] += pairing[(i, j)] / 3.0;
                rows.push(row);
                rhs.push(d_two_form(&c, d, &frame[i], &frame[j], &frame[k]));
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), m, |r, k| rows[r][k]);
    let b = DVector::from_vec(rhs);
    let coeffs = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let residual = (&a * &coeffs - &b).amax();

    // the frame is Euclidean orthonormal, so θ = Σ θ(e_i) e_i
    let mut theta = vec![0.0; d];
    for (e, &ci) in frame.iter().zip(coeffs.iter()) {
        for k in 0..d {
            theta[k] += ci * e[k];
        }
    }
    Ok(LeeExtraction { theta, residual })
}

/// Maximum violation of `dω = θ∧ω` for a given `θ` over tangent frame triples.
pub fn lck_residual(omega: &DifferentialForm, theta: &[f64], chart: &Chart, x: &[f64]) -> f64 {
    let d = omega.dim();
    let frame = chart.tangent_frame(x);
    let c = omega.coeffs_at(x, 2);
    let w = jet::values(&c);
    let m = frame.len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let (u, v, z) = (&frame[i], &frame[j], &frame[k]);
                let r = d_two_form(&c, d, u, v, z) - wedge_one_two(theta, &w, d, u, v, z);
                worst = worst.max(r.abs());
            }
        }
    }
    worst
}

/// `θ^♯ = g⁻¹θ`.
pub fn lee_field(g: &MetricField, theta: &DifferentialForm) -> Result<VectorField> {
    sharp(g, theta)
}

/// `N(X, Y) = [JX, JY] − J[JX, Y] − J[X, JY] − [X, Y]` at `x`.
pub fn nijenhuis(
    j: &ComplexStructureField,
    x_field: &VectorField,
    y_field: &VectorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    let jx = j.apply_field(x_field);
    let jy = j.apply_field(y_field);
    let a = bracket(&jx, &jy)?.at(x);
    let b = j.apply_at(x, &bracket(&jx, y_field)?.at(x));
    let c = j.apply_at(x, &bracket(x_field, &jy)?.at(x));
    let e = bracket(x_field, y_field)?.at(x);
    Ok((0..a.len()).map(|i| a[i] - b[i] - c[i] - e[i]).collect())
}

/// `Ψ(X, Y) = dη(JX, Y)` for `X, Y ∈ Null η`.
pub fn levi_form(
    deta: &DifferentialForm,
    eta: &DifferentialForm,
    j: &ComplexStructureField,
    x: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<f64> {
    let e = eta.values_at(x);
    if dot(&e, u).abs() > 1e-9 || dot(&e, v).abs() > 1e-9 {
        return Err(Error::InvalidInput("Levi form arguments must lie in Null η".into()));
    }
    Ok(deta.evaluate(x, &[&j.apply_at(x, u), v]))
}

/// Euclidean-orthonormal basis of `Null η ∩ span` at `x`, for an
/// orthonormal spanning set.
pub fn null_basis(eta: &DifferentialForm, x: &[f64], span: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let e = eta.values_at(x);
    let d = e.len();
    let m = span.len();
    let r = DVector::from_fn(m, |k, _| dot(&e, &span[k]));
    let rn = r.norm();
    let unit = if rn > 0.0 { r / rn } else { DVector::zeros(m) };
    let mut coefs: Vec<DVector<f64>> = Vec::new();
    for k in 0..m {
        let mut v = DVector::from_fn(m, |i, _| if i == k { 1.0 } else { 0.0 });
        v -= &unit * unit.dot(&v);
        for b in &coefs {
            v -= b * b.dot(&v);
        }
        let l = v.norm();
        if l > 1e-8 {
            coefs.push(v / l);
        }
    }
    coefs
        .into_iter()
        .map(|coef| {
            let mut v = vec![0.0; d];
            for (k, s) in span.iter().enumerate() {
                for i in 0..d {
                    v[i] += coef[k] * s[i];
                }
            }
            v
        })
        .collect()
}

/// The Levi matrix `Ψ_ij = dη(J b_i, b_j)` over `basis`.
pub fn levi_matrix(
    deta: &DifferentialForm,
    j: &ComplexStructureField,
    x: &[f64],
    basis: &[Vec<f64>],
) -> DMatrix<f64> {
    let w = deta.values_at(x);
    let d = deta.dim();
    let jm = j.matrix_at(x);
    let jb: Vec<DVector<f64>> = basis
        .iter()
        .map(|b| &jm * DVector::from_column_slice(b))
        .collect();
    let wm = DMatrix::from_row_slice(d, d, &w);
    DMatrix::from_fn(basis.len(), basis.len(), |a, b| {
        jb[a].dot(&(&wm * DVector::from_column_slice(&basis[b])))
    })
}

/// Smallest eigenvalue of the symmetric part of a square matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

/// An adapted unitary coframe `{θ, θ∘J, θ^α, θ̄^α}` at one point, stored as
/// coordinate covectors. `θ^α = re[α] + i·im[α]`.
#[derive(Clone, Debug)]
pub struct AdaptedCoframe {
    pub point: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_j: Vec<f64>,
    pub theta_alpha: Vec<(Vec<f64>, Vec<f64>)>,
    /// `u_α` with `θ^α(u_β) = δ`, `θ^α(J u_β) = i δ`.
    pub frame: Vec<Vec<f64>>,
    pub lee_vector: Vec<f64>,
    pub j_lee_vector: Vec<f64>,
}

impl AdaptedCoframe {
    pub fn rank(&self) -> usize {
        self.theta_alpha.len()
    }

    /// `θ^α(X)` as a complex number.
    pub fn theta_alpha_at(&self, alpha: usize, v: &[f64]) -> num_complex::Complex64 {
        let (re, im) = &self.theta_alpha[alpha];
        num_complex::Complex64::new(dot(re, v), dot(im, v))
    }
}

/// Builds the adapted coframe at `x` by complex Gram–Schmidt over the
/// tangent frame, orthogonal to `θ^♯` and `Jθ^♯`.
pub fn build_adapted_coframe(
    h: &HermitianStructure,
    theta: &DifferentialForm,
    x: &[f64],
) -> Result<AdaptedCoframe> {
    let th = theta.values_at(x);
    build_adapted_coframe_from(h, &th, x)
}

/// [`build_adapted_coframe`] for a Lee covector already known at `x`.
pub fn build_adapted_coframe_from(h: &HermitianStructure, th: &[f64], x: &[f64]) -> Result<AdaptedCoframe> {
    let d = h.chart.dim();
    let gm = h.g.matrix_at(x);
    let jm = h.j.matrix_at(x);
    let ip = |u: &[f64], v: &[f64]| -> f64 {
        DVector::from_column_slice(u).dot(&(&gm * DVector::from_column_slice(v)))
    };
    let apply_j = |v: &[f64]| -> Vec<f64> { (&jm * DVector::from_column_slice(v)).as_slice().to_vec() };

    let sharp = gm
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(th))
        .ok_or_else(|| Error::Singular("metric is singular".into()))?;
    let lee: Vec<f64> = sharp.as_slice().to_vec();
    let lee_norm = ip(&lee, &lee).sqrt();
    if !(lee_norm > 1e-12) {
        return Err(Error::HypothesisViolated(
            "Lee form vanishes; the adapted coframe is undefined".into(),
        ));
    }
    let j_lee = apply_j(&lee);

    let mut basis: Vec<Vec<f64>> = vec![
        lee.iter().map(|c| c / lee_norm).collect(),
        j_lee.iter().map(|c| c / lee_norm).collect(),
    ];
    let mut frame = Vec::new();
    let want = h.chart.manifold_dim() / 2 - 1;
    for seed in h.chart.tangent_frame(x) {
        if frame.len() == want {
            break;
        }
        let mut v = seed.clone();
        for b in &basis {
            let c = ip(b, &v);
            for k in 0..d {
                v[k] -= c * b[k];
            }
        }
        let l = ip(&v, &v).sqrt();
        if l < 1e-6 {
            continue;
        }
        let u: Vec<f64> = v.iter().map(|c| c / l).collect();
        let ju = apply_j(&u);
        // Ju is g-orthogonal to u and to the previous J-stable pairs
        basis.push(u.clone());
        basis.push(ju);
        frame.push(u);
    }
    if frame.len() != want {
        return Err(Error::Singular("tangent frame does not span the Lee complement".into()));
    }

    let lower = |v: &[f64]| -> Vec<f64> { (&gm * DVector::from_column_slice(v)).as_slice().to_vec() };
    let theta_alpha = frame
        .iter()
        .map(|u| (lower(u), lower(&apply_j(u))))
        .collect();
    let theta_j = (jm.transpose() * DVector::from_column_slice(th)).as_slice().to_vec();
    Ok(AdaptedCoframe {
        point: x.to_vec(),
        theta: th.to_vec(),
        theta_j,
        theta_alpha,
        frame,
        lee_vector: lee,
        j_lee_vector: j_lee,
    })
}
