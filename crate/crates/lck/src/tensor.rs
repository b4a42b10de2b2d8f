//! Pointwise tensor calculus over chart coordinates.
//!
//! Fields are closures from coordinate jets to jet-valued coefficients, so
//! every operator here is exact up to floating point: derivatives come from
//! the jets, not from differencing.
//!
//! Conventions. A 2-form `ω` is stored as a coefficient matrix `W` with
//! `ω(X, Y) = Xᵀ W Y`. Alternation carries the factor ½:
//!
//! * `(α∧β)(X, Y) = ½(α(X)β(Y) − α(Y)β(X))`
//! * `dα(X, Y) = ½(Xα(Y) − Yα(X) − α([X, Y]))`
//! * `dω(X, Y, Z) = ⅓(Xω(Y,Z) + Yω(Z,X) + Zω(X,Y) − …)`
//!
//! and the interior product is plain insertion, `(ι_X ω)(Y) = ω(X, Y)`.
//! Under these conventions Cartan's formula reads
//! `L_X α = 2 ι_X dα + d(ι_X α)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::{dot, SmoothMap};
use crate::error::{Error, Result};
use crate::jet::{self, reseeded, Jet};

pub type CoeffFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// Makes coefficient closures correct under composition: derivatives taken
/// inside are with respect to the point they are evaluated at.
fn local(f: CoeffFn) -> CoeffFn {
    Arc::new(move |x| reseeded(x, |y| f(y)))
}

/// Metrics whose coefficient matrix is worse conditioned than this are
/// treated as degenerate samples.
pub const MAX_CONDITION: f64 = 1e12;

/// A differential form of degree 0, 1 or 2.
#[derive(Clone)]
pub struct DifferentialForm {
    degree: usize,
    dim: usize,
    coeffs: CoeffFn,
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DifferentialForm(degree {}, dim {})", self.degree, self.dim)
    }
}

impl DifferentialForm {
    pub fn new(degree: usize, dim: usize, coeffs: CoeffFn) -> Self {
        assert!(degree <= 2, "only forms of degree ≤ 2 are stored");
        DifferentialForm {
            degree,
            dim,
            coeffs: local(coeffs),
        }
    }

    pub fn scalar(dim: usize, f: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static) -> Self {
        DifferentialForm::new(0, dim, Arc::new(move |x| vec![f(x)]))
    }

    pub fn one_form(dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        DifferentialForm::new(1, dim, Arc::new(f))
    }

    /// A 2-form from its full coefficient matrix (row-major, `dim × dim`).
    pub fn two_form(dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        DifferentialForm::new(2, dim, Arc::new(f))
    }

    /// The differential of the coordinate function `x_index`.
    pub fn coordinate_differential(dim: usize, index: usize) -> Self {
        DifferentialForm::one_form(dim, move |_| {
            let mut c = vec![Jet::constant(0.0); dim];
            c[index] = Jet::constant(1.0);
            c
        })
    }

    pub fn zero(degree: usize, dim: usize) -> Self {
        let len = dim.pow(degree as u32);
        DifferentialForm::new(degree, dim, Arc::new(move |_| vec![Jet::constant(0.0); len]))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficients on already-seeded coordinate jets.
    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.coeffs)(x)
    }

    /// Coefficients at `x`, tracked to the requested derivative order.
    pub fn coeffs_at(&self, x: &[f64], order: u8) -> Vec<Jet> {
        self.eval_jets(&Jet::seed(x, order))
    }

    /// Coefficient values at `x`.
    pub fn values_at(&self, x: &[f64]) -> Vec<f64> {
        jet::values(&self.coeffs_at(x, self.required_order()))
    }

    /// Derived forms need derivative orders of their inputs; two is always
    /// enough for the forms built in this crate.
    fn required_order(&self) -> u8 {
        2
    }

    /// Evaluates the form at `x` on `vectors.len() == degree` vectors.
    pub fn evaluate(&self, x: &[f64], vectors: &[&[f64]]) -> f64 {
        assert_eq!(vectors.len(), self.degree);
        let c = self.values_at(x);
        contract(&c, self.degree, self.dim, vectors)
    }

    pub fn scale(&self, k: f64) -> Self {
        let inner = self.coeffs.clone();
        DifferentialForm::new(
            self.degree,
            self.dim,
            Arc::new(move |x| inner(x).into_iter().map(|c| c * k).collect()),
        )
    }

    /// `f · self` for a 0-form `f`.
    pub fn multiply(&self, f: &DifferentialForm) -> Result<Self> {
        expect_degree(f, 0)?;
        same_dim(self.dim, f.dim)?;
        let inner = self.coeffs.clone();
        let g = f.coeffs.clone();
        Ok(DifferentialForm::new(
            self.degree,
            self.dim,
            Arc::new(move |x| {
                let s = g(x)[0];
                inner(x).into_iter().map(|c| c * s).collect()
            }),
        ))
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        same_dim(self.dim, other.dim)?;
        let a = self.coeffs.clone();
        let b = other.coeffs.clone();
        Ok(DifferentialForm::new(
            self.degree,
            self.dim,
            Arc::new(move |x| a(x).into_iter().zip(b(x)).map(|(p, q)| p + q).collect()),
        ))
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }
}

fn contract(c: &[f64], degree: usize, d: usize, v: &[&[f64]]) -> f64 {
    match degree {
        0 => c[0],
        1 => dot(c, v[0]),
        2 => {
            let mut s = 0.0;
            for i in 0..d {
                if v[0][i] == 0.0 {
                    continue;
                }
                for j in 0..d {
                    s += v[0][i] * c[i * d + j] * v[1][j];
                }
            }
            s
        }
        _ => unreachable!(),
    }
}

fn expect_degree(a: &DifferentialForm, k: usize) -> Result<()> {
    if a.degree == k {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "expected a {k}-form, got a {}-form",
            a.degree
        )))
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "fields live on charts of different dimension ({a} vs {b})"
        )))
    }
}

/// `α∧β` for two 1-forms.
pub fn wedge(alpha: &DifferentialForm, beta: &DifferentialForm) -> Result<DifferentialForm> {
    expect_degree(alpha, 1)?;
    expect_degree(beta, 1)?;
    same_dim(alpha.dim, beta.dim)?;
    let d = alpha.dim;
    let a = alpha.coeffs.clone();
    let b = beta.coeffs.clone();
    Ok(DifferentialForm::two_form(d, move |x| {
        let (p, q) = (a(x), b(x));
        let mut w = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                w.push((p[i] * q[j] - p[j] * q[i]) * 0.5);
            }
        }
        w
    }))
}

/// `(θ∧ω)(X, Y, Z)` for a 1-form `θ` and a 2-form `ω`, from values.
pub fn wedge_one_two(theta: &[f64], omega: &[f64], d: usize, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let w = |u: &[f64], v: &[f64]| contract(omega, 2, d, &[u, v]);
    (dot(theta, x) * w(y, z) + dot(theta, y) * w(z, x) + dot(theta, z) * w(x, y)) / 3.0
}

/// `d` on 0- and 1-forms.
pub fn exterior_derivative(alpha: &DifferentialForm) -> Result<DifferentialForm> {
    let d = alpha.dim;
    let a = alpha.coeffs.clone();
    match alpha.degree {
        0 => Ok(DifferentialForm::one_form(d, move |x| {
            let f = a(x)[0];
            (0..d).map(|i| f.d(i)).collect()
        })),
        1 => Ok(DifferentialForm::two_form(d, move |x| {
            let c = a(x);
            let mut w = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    w.push((c[j].d(i) - c[i].d(j)) * 0.5);
                }
            }
            w
        })),
        k => Err(Error::InvalidInput(format!(
            "exterior_derivative takes 0- or 1-forms, got degree {k}; use ThreeForm::exterior_derivative"
        ))),
    }
}

/// The exterior derivative of a 2-form, available for evaluation only.
#[derive(Clone, Debug)]
pub struct ThreeForm {
    omega: DifferentialForm,
}

impl ThreeForm {
    pub fn exterior_derivative(omega: &DifferentialForm) -> Result<Self> {
        expect_degree(omega, 2)?;
        Ok(ThreeForm {
            omega: omega.clone(),
        })
    }

    /// `dω(X, Y, Z)` at `x` for constant coordinate vectors.
    pub fn evaluate(&self, x: &[f64], u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let c = self.omega.coeffs_at(x, 2);
        d_two_form(&c, self.omega.dim, u, v, w)
    }
}

/// `dω(X, Y, Z)` from the coefficient jets of a 2-form at one point.
pub fn d_two_form(c: &[Jet], d: usize, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
    let directional = |dir: &[f64], p: &[f64], q: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                let coef = p[i] * q[j];
                if coef == 0.0 {
                    continue;
                }
                let g: f64 = (0..d).map(|k| dir[k] * c[i * d + j].grad(k)).sum();
                s += coef * g;
            }
        }
        s
    };
    (directional(u, v, w) + directional(v, w, u) + directional(w, u, v)) / 3.0
}

/// A vector field with jet-valued components.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    comps: CoeffFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField(dim {})", self.dim)
    }
}

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        VectorField::from_fn(dim, Arc::new(f))
    }

    pub fn from_fn(dim: usize, comps: CoeffFn) -> Self {
        VectorField {
            dim,
            comps: local(comps),
        }
    }

    /// The coordinate field `∂_index`.
    pub fn coordinate(dim: usize, index: usize) -> Self {
        VectorField::constant(&{
            let mut e = vec![0.0; dim];
            e[index] = 1.0;
            e
        })
    }

    pub fn constant(v: &[f64]) -> Self {
        let v = v.to_vec();
        VectorField::new(v.len(), move |_| v.iter().map(|&c| Jet::constant(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        VectorField::constant(&vec![0.0; dim])
    }

    /// The constant field `v` projected onto the leaves of `chart`, so that
    /// it is tangent to `ℝ × {|w| = r}` everywhere on the cylinder.
    pub fn tangent_extension(chart: &crate::chart::Chart, v: &[f64]) -> Self {
        let v = v.to_vec();
        if chart.id == crate::chart::ChartId::PuncturedCn {
            return VectorField::constant(&v);
        }
        VectorField::new(v.len(), move |x| {
            let r2: Jet = x[1..].iter().map(|c| *c * *c).sum();
            let k: Jet = x[1..].iter().zip(&v[1..]).map(|(c, vi)| *c * *vi).sum::<Jet>() / r2;
            let mut out = vec![Jet::constant(v[0])];
            for i in 1..x.len() {
                out.push(Jet::constant(v[i]) - k * x[i]);
            }
            out
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.comps)(x)
    }

    pub fn at(&self, x: &[f64]) -> Vec<f64> {
        jet::values(&self.eval_jets(&Jet::seed(x, 2)))
    }

    pub fn scale(&self, k: f64) -> Self {
        let c = self.comps.clone();
        VectorField::new(self.dim, move |x| c(x).into_iter().map(|v| v * k).collect())
    }

    /// `f · X` for a 0-form `f`.
    pub fn multiply(&self, f: &DifferentialForm) -> Result<Self> {
        expect_degree(f, 0)?;
        let c = self.comps.clone();
        let g = f.coeffs.clone();
        Ok(VectorField::new(self.dim, move |x| {
            let s = g(x)[0];
            c(x).into_iter().map(|v| v * s).collect()
        }))
    }

    pub fn add(&self, other: &VectorField) -> Self {
        let (a, b) = (self.comps.clone(), other.comps.clone());
        VectorField::new(self.dim, move |x| {
            a(x).into_iter().zip(b(x)).map(|(p, q)| p + q).collect()
        })
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.add(&other.scale(-1.0))
    }
}

/// `[X, Y]^i = X^j ∂_j Y^i − Y^j ∂_j X^i`.
pub fn bracket(x_field: &VectorField, y_field: &VectorField) -> Result<VectorField> {
    same_dim(x_field.dim, y_field.dim)?;
    let d = x_field.dim;
    let (xc, yc) = (x_field.comps.clone(), y_field.comps.clone());
    Ok(VectorField::new(d, move |p| {
        let (xv, yv) = (xc(p), yc(p));
        (0..d)
            .map(|i| {
                let mut s = Jet::constant(0.0);
                for j in 0..d {
                    s += xv[j] * yv[i].d(j) - yv[j] * xv[i].d(j);
                }
                s
            })
            .collect()
    }))
}

/// A field of bilinear forms: metrics, Lie derivatives of metrics.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    coeffs: CoeffFn,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricField(dim {})", self.dim)
    }
}

impl MetricField {
    pub fn new(dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        MetricField {
            dim,
            coeffs: local(Arc::new(f)),
        }
    }

    pub fn euclidean(dim: usize) -> Self {
        MetricField::new(dim, move |_| {
            let mut m = vec![Jet::constant(0.0); dim * dim];
            for i in 0..dim {
                m[i * dim + i] = Jet::constant(1.0);
            }
            m
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.coeffs)(x)
    }

    pub fn coeffs_at(&self, x: &[f64], order: u8) -> Vec<Jet> {
        self.eval_jets(&Jet::seed(x, order))
    }

    pub fn matrix_at(&self, x: &[f64]) -> DMatrix<f64> {
        let c = self.coeffs_at(x, 2);
        DMatrix::from_row_iterator(self.dim, self.dim, c.iter().map(Jet::value))
    }

    pub fn evaluate(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let m = self.matrix_at(x);
        let (u, v) = (
            nalgebra::DVector::from_column_slice(u),
            nalgebra::DVector::from_column_slice(v),
        );
        u.dot(&(m * v))
    }

    /// `e^f · g` for a 0-form `f`.
    pub fn conformal(&self, f: &DifferentialForm) -> Result<Self> {
        expect_degree(f, 0)?;
        let c = self.coeffs.clone();
        let g = f.coeffs.clone();
        Ok(MetricField::new(self.dim, move |x| {
            let s = g(x)[0].exp();
            c(x).into_iter().map(|v| v * s).collect()
        }))
    }

    pub fn add(&self, other: &MetricField) -> Self {
        let (a, b) = (self.coeffs.clone(), other.coeffs.clone());
        MetricField::new(self.dim, move |x| {
            a(x).into_iter().zip(b(x)).map(|(p, q)| p + q).collect()
        })
    }
}

/// A field of endomorphisms `X ↦ JX`, stored row-major.
#[derive(Clone)]
pub struct ComplexStructureField {
    dim: usize,
    coeffs: CoeffFn,
}

impl fmt::Debug for ComplexStructureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexStructureField(dim {})", self.dim)
    }
}

impl ComplexStructureField {
    pub fn new(dim: usize, f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static) -> Self {
        ComplexStructureField {
            dim,
            coeffs: local(Arc::new(f)),
        }
    }

    /// Constant `J₀ = −i` on `ℝ^{2n}` with coordinates `(x₁, y₁, …)`:
    /// `J₀ ∂_x = −∂_y`, `J₀ ∂_y = ∂_x`.
    pub fn standard(dim: usize) -> Self {
        ComplexStructureField::new(dim, move |_| {
            let mut m = vec![Jet::constant(0.0); dim * dim];
            for k in (0..dim).step_by(2) {
                m[k * dim + k + 1] = Jet::constant(1.0);
                m[(k + 1) * dim + k] = Jet::constant(-1.0);
            }
            m
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.coeffs)(x)
    }

    pub fn matrix_at(&self, x: &[f64]) -> DMatrix<f64> {
        let c = self.eval_jets(&Jet::seed(x, 2));
        DMatrix::from_row_iterator(self.dim, self.dim, c.iter().map(Jet::value))
    }

    pub fn apply_at(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let m = self.matrix_at(x);
        (m * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec()
    }

    pub fn apply(&self, v: &crate::chart::TangentVector) -> crate::chart::TangentVector {
        let base = v.base().clone();
        let out = self.apply_at(base.coords(), v.components());
        crate::chart::TangentVector::projected(base, &out)
    }

    /// The vector field `J X`.
    pub fn apply_field(&self, x_field: &VectorField) -> VectorField {
        let d = self.dim;
        let (j, xc) = (self.coeffs.clone(), x_field.comps.clone());
        VectorField::new(d, move |p| {
            let (m, v) = (j(p), xc(p));
            (0..d)
                .map(|r| (0..d).map(|c| m[r * d + c] * v[c]).sum())
                .collect()
        })
    }

    pub fn negate(&self) -> Self {
        let c = self.coeffs.clone();
        ComplexStructureField::new(self.dim, move |x| c(x).into_iter().map(|v| -v).collect())
    }
}

/// `(ι_X α)`: lowers the degree of a 1- or 2-form by one.
pub fn interior_product(x_field: &VectorField, alpha: &DifferentialForm) -> Result<DifferentialForm> {
    same_dim(x_field.dim, alpha.dim)?;
    let d = alpha.dim;
    let (xc, a) = (x_field.comps.clone(), alpha.coeffs.clone());
    match alpha.degree {
        1 => Ok(DifferentialForm::scalar(d, move |p| {
            let (v, c) = (xc(p), a(p));
            (0..d).map(|i| v[i] * c[i]).sum()
        })),
        2 => Ok(DifferentialForm::one_form(d, move |p| {
            let (v, c) = (xc(p), a(p));
            (0..d)
                .map(|j| (0..d).map(|i| v[i] * c[i * d + j]).sum())
                .collect()
        })),
        k => Err(Error::InvalidInput(format!(
            "interior product needs a 1- or 2-form, got degree {k}"
        ))),
    }
}

/// `(f*α)(p; X…) = α(f(p); f_*X…)`.
pub fn pullback(f: &SmoothMap, alpha: &DifferentialForm) -> Result<DifferentialForm> {
    same_dim(f.to.dim(), alpha.dim)?;
    let (m, k) = (f.from.dim(), alpha.dim);
    let (map, a) = (f.clone(), alpha.coeffs.clone());
    let degree = alpha.degree;
    Ok(DifferentialForm::new(
        degree,
        m,
        Arc::new(move |x| {
            let y = map.eval_jets(x);
            let c = a(&y);
            // df[r][i] = ∂_i f^r
            let df: Vec<Vec<Jet>> = y.iter().map(|yr| (0..m).map(|i| yr.d(i)).collect()).collect();
            match degree {
                0 => c,
                1 => (0..m)
                    .map(|i| (0..k).map(|r| c[r] * df[r][i]).sum())
                    .collect(),
                _ => {
                    let mut out = Vec::with_capacity(m * m);
                    for i in 0..m {
                        for j in 0..m {
                            let mut s = Jet::constant(0.0);
                            for r in 0..k {
                                for q in 0..k {
                                    s += df[r][i] * c[r * k + q] * df[q][j];
                                }
                            }
                            out.push(s);
                        }
                    }
                    out
                }
            }
        }),
    ))
}

/// `(f*g)(X, Y) = g(f_*X, f_*Y)`.
pub fn pullback_metric(f: &SmoothMap, g: &MetricField) -> Result<MetricField> {
    same_dim(f.to.dim(), g.dim)?;
    let (m, k) = (f.from.dim(), g.dim);
    let (map, gc) = (f.clone(), g.coeffs.clone());
    Ok(MetricField::new(m, move |x| {
        let y = map.eval_jets(x);
        let c = gc(&y);
        let df: Vec<Vec<Jet>> = y.iter().map(|yr| (0..m).map(|i| yr.d(i)).collect()).collect();
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut s = Jet::constant(0.0);
                for r in 0..k {
                    for q in 0..k {
                        s += df[r][i] * c[r * k + q] * df[q][j];
                    }
                }
                out.push(s);
            }
        }
        out
    }))
}

/// `(L_X g)_{ij} = X^k ∂_k g_{ij} + g_{kj} ∂_i X^k + g_{ik} ∂_j X^k`,
/// i.e. `X·g(∂_i,∂_j) − g([X,∂_i],∂_j) − g(∂_i,[X,∂_j])`.
pub fn lie_derivative_metric(x_field: &VectorField, g: &MetricField) -> Result<MetricField> {
    same_dim(x_field.dim, g.dim)?;
    let d = g.dim;
    let (xc, gc) = (x_field.comps.clone(), g.coeffs.clone());
    Ok(MetricField::new(d, move |p| {
        let (x, m) = (xc(p), gc(p));
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut s = Jet::constant(0.0);
                for k in 0..d {
                    s += x[k] * m[i * d + j].d(k)
                        + m[k * d + j] * x[k].d(i)
                        + m[i * d + k] * x[k].d(j);
                }
                out.push(s);
            }
        }
        out
    }))
}

/// `(L_X α)_i = X^k ∂_k α_i + α_k ∂_i X^k`.
pub fn lie_derivative_oneform(x_field: &VectorField, alpha: &DifferentialForm) -> Result<DifferentialForm> {
    expect_degree(alpha, 1)?;
    same_dim(x_field.dim, alpha.dim)?;
    let d = alpha.dim;
    let (xc, a) = (x_field.comps.clone(), alpha.coeffs.clone());
    Ok(DifferentialForm::one_form(d, move |p| {
        let (x, c) = (xc(p), a(p));
        (0..d)
            .map(|i| (0..d).map(|k| x[k] * c[i].d(k) + c[k] * x[k].d(i)).sum())
            .collect()
    }))
}

/// `L_X α` assembled from Cartan's formula, `2 ι_X dα + d(ι_X α)`.
pub fn lie_derivative_oneform_cartan(x_field: &VectorField, alpha: &DifferentialForm) -> Result<DifferentialForm> {
    let first = interior_product(x_field, &exterior_derivative(alpha)?)?.scale(2.0);
    let second = exterior_derivative(&interior_product(x_field, alpha)?)?;
    first.add(&second)
}

/// `(L_X J)(Y) = [X, JY] − J[X, Y]`.
pub fn lie_derivative_complex_structure(
    x_field: &VectorField,
    j: &ComplexStructureField,
    y_field: &VectorField,
) -> Result<VectorField> {
    let a = bracket(x_field, &j.apply_field(y_field))?;
    let b = j.apply_field(&bracket(x_field, y_field)?);
    Ok(a.sub(&b))
}

/// Solves `A u = b` over jets by Gauss–Jordan elimination with partial
/// pivoting on values.
pub fn jet_solve(a: &[Jet], b: &[Jet], d: usize) -> Result<Vec<Jet>> {
    let mut m: Vec<Jet> = a.to_vec();
    let mut r: Vec<Jet> = b.to_vec();
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&p, &q| {
                m[p * d + col]
                    .value()
                    .abs()
                    .partial_cmp(&m[q * d + col].value().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m[piv * d + col].value().abs() < 1e-300 {
            return Err(Error::Singular("metric matrix is singular".into()));
        }
        if piv != col {
            for k in 0..d {
                m.swap(piv * d + k, col * d + k);
            }
            r.swap(piv, col);
        }
        let inv = m[col * d + col].recip();
        for k in 0..d {
            m[col * d + k] = m[col * d + k] * inv;
        }
        r[col] = r[col] * inv;
        for row in 0..d {
            if row == col {
                continue;
            }
            let f = m[row * d + col];
            if f.value() == 0.0 && f.order() == 0 {
                continue;
            }
            for k in 0..d {
                m[row * d + k] = m[row * d + k] - f * m[col * d + k];
            }
            r[row] = r[row] - f * r[col];
        }
    }
    Ok(r)
}

/// Raises the index of a 1-form: `α^♯ = g⁻¹α`.
pub fn sharp(g: &MetricField, alpha: &DifferentialForm) -> Result<VectorField> {
    expect_degree(alpha, 1)?;
    same_dim(g.dim, alpha.dim)?;
    let d = g.dim;
    let (gc, a) = (g.coeffs.clone(), alpha.coeffs.clone());
    Ok(VectorField::new(d, move |p| {
        jet_solve(&gc(p), &a(p), d).unwrap_or_else(|_| vec![Jet::constant(f64::NAN); d])
    }))
}

/// Lowers the index of a vector field: `X^♭ = g(X, ·)`.
pub fn flat(g: &MetricField, x_field: &VectorField) -> DifferentialForm {
    let d = g.dim;
    let (gc, xc) = (g.coeffs.clone(), x_field.comps.clone());
    DifferentialForm::one_form(d, move |p| {
        let (m, x) = (gc(p), xc(p));
        (0..d)
            .map(|j| (0..d).map(|i| x[i] * m[i * d + j]).sum())
            .collect()
    })
}

fn checked_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sv = m.clone().svd(false, false).singular_values;
    let (max, min) = (sv.max(), sv.min());
    if !(min > 0.0) || max / min > MAX_CONDITION {
        return Err(Error::Singular(format!(
            "metric condition number {:e} exceeds {:e}",
            max / min,
            MAX_CONDITION
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("metric matrix is not invertible".into()))
}

/// Christoffel symbols `Γ^k_{ij}` at `x`, indexed `[k][i][j]`.
pub fn christoffel(g: &MetricField, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let d = g.dim;
    let c = g.coeffs_at(x, 2);
    let m = DMatrix::from_row_iterator(d, d, c.iter().map(Jet::value));
    let inv = checked_inverse(&m)?;
    let dg = |a: usize, b: usize, k: usize| c[a * d + b].grad(k);
    // lowered symbols Γ_{ijl} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut lowered = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                lowered[(i * d + j) * d + l] = 0.5 * (dg(j, l, i) + dg(i, l, j) - dg(i, j, l));
            }
        }
    }
    let mut gamma = vec![vec![vec![0.0; d]; d]; d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                gamma[k][i][j] = (0..d)
                    .map(|l| inv[(k, l)] * lowered[(i * d + j) * d + l])
                    .sum();
            }
        }
    }
    Ok(gamma)
}

/// `(∇σ)_{ij} = ∂_i σ_j − Γ^k_{ij} σ_k` at `x`, row-major.
pub fn covariant_derivative_oneform(g: &MetricField, sigma: &DifferentialForm, x: &[f64]) -> Result<Vec<f64>> {
    expect_degree(sigma, 1)?;
    let d = g.dim;
    let gamma = christoffel(g, x)?;
    let s = sigma.coeffs_at(x, 2);
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let corr: f64 = (0..d).map(|k| gamma[k][i][j] * s[k].value()).sum();
            out.push(s[j].grad(i) - corr);
        }
    }
    Ok(out)
}

/// `(∇_k g)_{ij} = ∂_k g_ij − Γ^l_{ki} g_lj − Γ^l_{kj} g_il`, indexed `[k][i][j]`.
pub fn covariant_derivative_metric(g: &MetricField, x: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let d = g.dim;
    let gamma = christoffel(g, x)?;
    let c = g.coeffs_at(x, 2);
    let mut out = vec![vec![vec![0.0; d]; d]; d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut s = c[i * d + j].grad(k);
                for l in 0..d {
                    s -= gamma[l][k][i] * c[l * d + j].value() + gamma[l][k][j] * c[i * d + l].value();
                }
                out[k][i][j] = s;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_coord(dim: usize, i: usize) -> DifferentialForm {
        DifferentialForm::scalar(dim, move |x| x[i])
    }

    #[test]
    fn wedge_is_antisymmetric() {
        let a = exterior_derivative(&x_coord(3, 0)).unwrap();
        let aa = wedge(&a, &a).unwrap();
        assert_eq!(aa.evaluate(&[0.1, 0.2, 0.3], &[&[1.0, 2.0, 3.0], &[3.0, -1.0, 0.5]]), 0.0);
        let b = DifferentialForm::one_form(3, |x| vec![x[1], x[2] * x[0], Jet::constant(1.0)]);
        let ab = wedge(&a, &b).unwrap();
        let p = [0.4, -0.2, 0.9];
        let (u, v) = ([1.0, 0.5, -0.3], [0.2, 0.1, 0.7]);
        let s = ab.evaluate(&p, &[&u, &v]);
        assert!((s + ab.evaluate(&p, &[&v, &u])).abs() < 1e-15);
        // ½(α(u)β(v) − α(v)β(u))
        let bv = |w: &[f64]| -0.2 * w[0] + 0.9 * 0.4 * w[1] + w[2];
        let expect = 0.5 * (u[0] * bv(&v) - v[0] * bv(&u));
        assert!((s - expect).abs() < 1e-15);
    }

    #[test]
    fn d_of_coordinate_differential_vanishes() {
        let dt = exterior_derivative(&x_coord(4, 0)).unwrap();
        let ddt = exterior_derivative(&dt).unwrap();
        assert!(ddt.values_at(&[0.3, 1.0, 2.0, -1.0]).iter().all(|c| *c == 0.0));
    }

    #[test]
    fn exterior_derivative_convention() {
        // α = x dy on ℝ²: dα(∂x, ∂y) = ½
        let alpha = DifferentialForm::one_form(2, |x| vec![Jet::constant(0.0), x[0]]);
        let da = exterior_derivative(&alpha).unwrap();
        assert!((da.evaluate(&[0.3, 0.4], &[&[1.0, 0.0], &[0.0, 1.0]]) - 0.5).abs() < 1e-15);
        assert!(ThreeForm::exterior_derivative(&alpha).is_err());
        assert!(exterior_derivative(&da).is_err());
    }

    #[test]
    fn bracket_of_rotation_and_radial() {
        // [x∂y − y∂x, x∂x + y∂y] = 0
        let rot = VectorField::new(2, |x| vec![-x[1], x[0]]);
        let rad = VectorField::new(2, |x| vec![x[0], x[1]]);
        let b = bracket(&rot, &rad).unwrap();
        assert!(b.at(&[0.3, -0.7]).iter().all(|c| c.abs() < 1e-15));
        // [∂x, x∂y] = ∂y
        let b = bracket(&VectorField::coordinate(2, 0), &VectorField::new(2, |x| vec![Jet::constant(0.0), x[0]])).unwrap();
        assert_eq!(b.at(&[0.5, 0.5]), vec![0.0, 1.0]);
    }

    #[test]
    fn euclidean_christoffel_vanishes() {
        let g = MetricField::euclidean(3);
        let gamma = christoffel(&g, &[0.1, 0.2, 0.3]).unwrap();
        assert!(gamma.iter().flatten().flatten().all(|c| *c == 0.0));
    }

    #[test]
    fn polar_christoffel() {
        // g = dr² + r² dφ²: Γ^r_φφ = −r, Γ^φ_rφ = 1/r
        let g = MetricField::new(2, |x| {
            vec![Jet::constant(1.0), Jet::constant(0.0), Jet::constant(0.0), x[0] * x[0]]
        });
        let gamma = christoffel(&g, &[2.0, 0.3]).unwrap();
        assert!((gamma[0][1][1] + 2.0).abs() < 1e-14);
        assert!((gamma[1][0][1] - 0.5).abs() < 1e-14);
        assert!((gamma[1][1][0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let g = MetricField::new(2, |_| {
            vec![Jet::constant(1.0), Jet::constant(0.0), Jet::constant(0.0), Jet::constant(1e-14)]
        });
        assert!(matches!(christoffel(&g, &[0.0, 0.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn linear_differential_is_parallel_in_flat_space() {
        let f = DifferentialForm::scalar(3, |x| x[0] * 2.0 - x[2] + 1.0);
        let df = exterior_derivative(&f).unwrap();
        let nab = covariant_derivative_oneform(&MetricField::euclidean(3), &df, &[0.3, 0.1, 0.2]).unwrap();
        assert!(nab.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn translation_preserves_flat_metric() {
        let l = lie_derivative_metric(&VectorField::coordinate(3, 1), &MetricField::euclidean(3)).unwrap();
        assert!(l.matrix_at(&[1.0, 2.0, 3.0]).iter().all(|c| *c == 0.0));
    }

    #[test]
    fn interior_product_with_zero_field() {
        let omega = wedge(
            &exterior_derivative(&x_coord(2, 0)).unwrap(),
            &exterior_derivative(&x_coord(2, 1)).unwrap(),
        )
        .unwrap();
        let i = interior_product(&VectorField::zero(2), &omega).unwrap();
        assert_eq!(i.values_at(&[0.2, 0.3]), vec![0.0, 0.0]);
    }

    #[test]
    fn pullback_by_identity() {
        let alpha = DifferentialForm::one_form(2, |x| vec![x[1] * x[1], x[0].sin()]);
        let id = SmoothMap::identity(crate::chart::Chart::punctured(1));
        let pulled = pullback(&id, &alpha).unwrap();
        assert_eq!(pulled.values_at(&[0.4, 0.5]), alpha.values_at(&[0.4, 0.5]));
    }

    #[test]
    fn jet_solve_inverts() {
        let x = Jet::seed(&[0.5, 0.2], 2);
        let a = vec![x[0] + 2.0, x[1], x[1], x[0] * x[0] + 1.0];
        let b = vec![Jet::constant(1.0), x[0]];
        let u = jet_solve(&a, &b, 2).unwrap();
        // residual A u − b vanishes with its derivatives
        for r in 0..2 {
            let res = a[r * 2] * u[0] + a[r * 2 + 1] * u[1] - b[r];
            assert!(res.value().abs() < 1e-14);
            assert!(res.grad(0).abs() < 1e-13 && res.grad(1).abs() < 1e-13);
        }
    }
}
