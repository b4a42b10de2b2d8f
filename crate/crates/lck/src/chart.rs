//! Coordinate charts on the two model spaces and the map between them.
//!
//! The cylinder `ℝ × S^{2n−1}` is carried in ambient coordinates
//! `(t, x₁, y₁, …, xₙ, yₙ)`, with the sphere factor embedded in `ℝ^{2n}`.
//! The punctured space `ℂⁿ − {0}` uses `(x₁, y₁, …, xₙ, yₙ)` directly.
//!
//! The complex structure on `ℂⁿ` is `J₀ = −i`, i.e. `J₀ ∂_x = −∂_y`. With
//! this orientation the map `H(t, z) = (e^{a₁t}z₁, …, e^{aₙt}zₙ)` pulls
//! `J₀` back to the structure `J_A` with `J_A N = −A`, `J_A A = N`, and the
//! Kähler form `d(eᵗ η_A)` is positive.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{self, Jet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChartId {
    Cylinder,
    PuncturedCn,
}

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartId::Cylinder => write!(f, "CYLINDER"),
            ChartId::PuncturedCn => write!(f, "PUNCTURED_CN"),
        }
    }
}

/// One of the two model charts for complex dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chart {
    pub id: ChartId,
    pub n: usize,
}

impl Chart {
    pub fn cylinder(n: usize) -> Self {
        Chart {
            id: ChartId::Cylinder,
            n,
        }
    }

    pub fn punctured(n: usize) -> Self {
        Chart {
            id: ChartId::PuncturedCn,
            n,
        }
    }

    /// Number of coordinates (ambient on the cylinder).
    pub fn dim(&self) -> usize {
        match self.id {
            ChartId::Cylinder => 2 * self.n + 1,
            ChartId::PuncturedCn => 2 * self.n,
        }
    }

    /// Real dimension of the manifold itself.
    pub fn manifold_dim(&self) -> usize {
        2 * self.n
    }

    /// A basis of the tangent space at `coords`, in ambient components.
    ///
    /// On the cylinder this is `∂_t` followed by a Euclidean-orthonormal
    /// basis of `w^⊥` (taken with respect to the leaf `|w| = const` through
    /// the point, so it is defined off the unit sphere as well). On `ℂⁿ` it
    /// is the coordinate frame.
    pub fn tangent_frame(&self, coords: &[f64]) -> Vec<Vec<f64>> {
        match self.id {
            ChartId::PuncturedCn => (0..self.dim())
                .map(|i| unit(self.dim(), i))
                .collect(),
            ChartId::Cylinder => {
                let d = self.dim();
                let mut frame = vec![unit(d, 0)];
                for v in sphere_frame(&coords[1..]) {
                    let mut e = vec![0.0; d];
                    e[1..].copy_from_slice(&v);
                    frame.push(e);
                }
                frame
            }
        }
    }

    /// Euclidean orthogonal projection of an ambient vector onto the tangent
    /// space of the leaf through `coords`.
    pub fn project(&self, coords: &[f64], v: &[f64]) -> Vec<f64> {
        match self.id {
            ChartId::PuncturedCn => v.to_vec(),
            ChartId::Cylinder => {
                let w = &coords[1..];
                let w2: f64 = w.iter().map(|x| x * x).sum();
                let k: f64 = w.iter().zip(&v[1..]).map(|(a, b)| a * b).sum::<f64>() / w2;
                let mut out = v.to_vec();
                for (o, wi) in out[1..].iter_mut().zip(w) {
                    *o -= k * wi;
                }
                out
            }
        }
    }
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of `w^⊥ ⊂ ℝ^{2n}`.
///
/// Projects the standard basis vectors, skipping the one most aligned with
/// `w`, and orthonormalizes them in index order.
pub fn sphere_frame(w: &[f64]) -> Vec<Vec<f64>> {
    orthonormal_complement(&[w.to_vec()], w.len())
}

/// Euclidean orthonormal basis of the complement of `span(vectors)` in `ℝ^d`,
/// built by Gram–Schmidt over the standard basis.
pub(crate) fn orthonormal_complement(vectors: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        for b in &basis {
            let k = dot(&u, b);
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= k * y);
        }
        let nu = norm(&u);
        if nu > 1e-12 {
            basis.push(u.into_iter().map(|x| x / nu).collect());
        }
    }
    let fixed = basis.len();
    let target = d - fixed;
    // Try standard vectors in order of increasing overlap with the span so
    // the surviving directions are well conditioned.
    let mut order: Vec<usize> = (0..d).collect();
    let overlap = |i: usize| basis.iter().map(|b| b[i] * b[i]).sum::<f64>();
    order.sort_by(|&i, &j| overlap(i).partial_cmp(&overlap(j)).unwrap().then(i.cmp(&j)));
    let mut chosen: Vec<usize> = order.into_iter().take(target).collect();
    chosen.sort_unstable();
    let mut out = Vec::new();
    for i in chosen {
        let mut u = unit(d, i);
        for b in basis.iter().chain(out.iter()) {
            let k = dot(&u, b);
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= k * y);
        }
        let nu = norm(&u);
        out.push(u.into_iter().map(|x| x / nu).collect::<Vec<f64>>());
    }
    out
}

/// A point of one of the model charts.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    chart: Chart,
    coords: Vec<f64>,
}

impl ChartPoint {
    /// A cylinder point `(t, w)` with `|w| = 1` within `1e-12`.
    pub fn cylinder(t: f64, w: &[f64]) -> Result<Self> {
        if w.len() < 4 || w.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "sphere factor needs 2n ≥ 4 coordinates, got {}",
                w.len()
            )));
        }
        let r = norm(w);
        if (r - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "cylinder point must lie on the unit sphere (|w| = {r})"
            )));
        }
        let mut coords = Vec::with_capacity(w.len() + 1);
        coords.push(t);
        coords.extend_from_slice(w);
        Ok(ChartPoint {
            chart: Chart::cylinder(w.len() / 2),
            coords,
        })
    }

    /// A point of `ℂⁿ − {0}` given as `(x₁, y₁, …, xₙ, yₙ)`.
    pub fn punctured(q: &[f64]) -> Result<Self> {
        if q.len() < 4 || q.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "ℂⁿ point needs 2n ≥ 4 coordinates, got {}",
                q.len()
            )));
        }
        if dot(q, q) <= 0.0 {
            return Err(Error::InvalidInput("origin is not in ℂⁿ − {0}".into()));
        }
        Ok(ChartPoint {
            chart: Chart::punctured(q.len() / 2),
            coords: q.to_vec(),
        })
    }

    pub fn from_complex(z: &[Complex64]) -> Result<Self> {
        ChartPoint::punctured(&complex_to_real(z))
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `t` on the cylinder.
    pub fn t(&self) -> Option<f64> {
        (self.chart.id == ChartId::Cylinder).then(|| self.coords[0])
    }

    /// The complex coordinates: `w` on the cylinder, `q` on `ℂⁿ`.
    pub fn complex(&self) -> Vec<Complex64> {
        match self.chart.id {
            ChartId::Cylinder => real_to_complex(&self.coords[1..]),
            ChartId::PuncturedCn => real_to_complex(&self.coords),
        }
    }

    pub fn expect_chart(&self, id: ChartId) -> Result<()> {
        if self.chart.id == id {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                expected: id.to_string(),
                found: self.chart.id.to_string(),
            })
        }
    }
}

pub fn complex_to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn real_to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// A tangent vector in ambient chart components.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: ChartPoint,
    components: Vec<f64>,
}

impl TangentVector {
    /// Validates the component count and, on the cylinder, tangency to the
    /// sphere factor within `1e-10`.
    pub fn new(base: ChartPoint, components: Vec<f64>) -> Result<Self> {
        let chart = base.chart();
        if components.len() != chart.dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} components, got {}",
                chart.dim(),
                components.len()
            )));
        }
        if chart.id == ChartId::Cylinder {
            let radial = dot(&components[1..], &base.coords[1..]);
            if radial.abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "vector is not tangent to the sphere (⟨v,w⟩ = {radial:e})"
                )));
            }
        }
        Ok(TangentVector { base, components })
    }

    /// Projects arbitrary ambient components onto the tangent space first.
    pub fn projected(base: ChartPoint, ambient: &[f64]) -> Self {
        let components = base.chart().project(base.coords(), ambient);
        TangentVector { base, components }
    }

    pub fn base(&self) -> &ChartPoint {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }
}

/// Parameters of one primary Hopf manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfData {
    pub n: usize,
    pub a: Vec<f64>,
    pub s: f64,
    pub c: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
}

impl HopfData {
    pub fn new(a: Vec<f64>, s: f64, c: Vec<Complex64>) -> Result<Self> {
        let n = a.len();
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "n must be at least 2 (got {n})"
            )));
        }
        if 2 * n + 1 > jet::MAX_DIM {
            return Err(Error::InvalidConfig(format!(
                "n must be at most {} (got {n})",
                (jet::MAX_DIM - 1) / 2
            )));
        }
        if c.len() != n {
            return Err(Error::InvalidConfig(format!(
                "c must have n = {n} entries (got {})",
                c.len()
            )));
        }
        if a.iter().any(|x| !x.is_finite()) || !(a[0] > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "a must satisfy 0 < a_1 (got a_1 = {})",
                a[0]
            )));
        }
        if let Some(i) = (1..n).find(|&i| a[i] < a[i - 1]) {
            return Err(Error::InvalidConfig(format!(
                "a must be sorted: 0 < a_1 <= ... <= a_n (a_{} = {} > a_{} = {})",
                i,
                a[i - 1],
                i + 1,
                a[i]
            )));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidConfig(format!("s must be positive (got {s})")));
        }
        if let Some((j, cj)) = c
            .iter()
            .enumerate()
            .find(|(_, cj)| (cj.norm() - 1.0).abs() > 1e-12)
        {
            return Err(Error::InvalidConfig(format!(
                "c must be unit complex numbers (|c_{}| = {})",
                j + 1,
                cj.norm()
            )));
        }
        let lambda = a
            .iter()
            .zip(&c)
            .map(|(aj, cj)| cj * (-aj * s).exp())
            .collect();
        Ok(HopfData { n, a, s, c, lambda })
    }

    /// The standard Hopf manifold `ℂⁿ − {0} / ⟨z ↦ e^{−s} z⟩`.
    pub fn standard(n: usize, s: f64) -> Result<Self> {
        HopfData::new(vec![1.0; n], s, vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn cylinder(&self) -> Chart {
        Chart::cylinder(self.n)
    }

    pub fn punctured(&self) -> Chart {
        Chart::punctured(self.n)
    }
}

pub type JetMap = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// A smooth map between charts, evaluated on coordinate jets.
#[derive(Clone)]
pub struct SmoothMap {
    pub from: Chart,
    pub to: Chart,
    map: JetMap,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.from.id, self.to.id)
    }
}

impl SmoothMap {
    pub fn new(from: Chart, to: Chart, map: JetMap) -> Self {
        SmoothMap { from, to, map }
    }

    pub fn identity(chart: Chart) -> Self {
        SmoothMap::new(chart, chart, Arc::new(|x: &[Jet]| x.to_vec()))
    }

    /// Evaluates on jets, composing derivatives.
    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.map)(x)
    }

    pub fn apply_coords(&self, x: &[f64]) -> Vec<f64> {
        jet::values(&self.eval_jets(&Jet::seed(x, 0)))
    }

    pub fn apply(&self, p: &ChartPoint) -> Result<ChartPoint> {
        p.expect_chart(self.from.id)?;
        Ok(ChartPoint {
            chart: self.to,
            coords: self.apply_coords(p.coords()),
        })
    }

    /// Jacobian `∂f^r/∂x^c` at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let out = self.eval_jets(&Jet::seed(x, 1));
        jet::jacobian(&out, x.len())
    }

    /// `f_* v` at raw ambient coordinates.
    pub fn push_coords(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.jacobian(x).iter().map(|row| dot(row, v)).collect()
    }

    /// Composition `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> SmoothMap {
        let outer = self.map.clone();
        let first = inner.map.clone();
        SmoothMap::new(inner.from, self.to, Arc::new(move |x| outer(&first(x))))
    }
}

/// Jacobian-vector product `f_* v`, based at `f(base(v))`.
pub fn pushforward(f: &SmoothMap, v: &TangentVector) -> Result<TangentVector> {
    let base = f.apply(v.base())?;
    let components = f.push_coords(v.base().coords(), v.components());
    Ok(TangentVector { base, components })
}

/// `H(t, z) = (e^{a₁t}z₁, …, e^{aₙt}zₙ)` as a jet map.
pub fn h_map(hopf: &HopfData) -> SmoothMap {
    let a = hopf.a.clone();
    SmoothMap::new(
        hopf.cylinder(),
        hopf.punctured(),
        Arc::new(move |x: &[Jet]| {
            let t = x[0];
            let mut out = Vec::with_capacity(2 * a.len());
            for (j, aj) in a.iter().enumerate() {
                let e = (t * *aj).exp();
                out.push(e * x[1 + 2 * j]);
                out.push(e * x[2 + 2 * j]);
            }
            out
        }),
    )
}

pub fn map_h(hopf: &HopfData, p: &ChartPoint) -> Result<ChartPoint> {
    h_map(hopf).apply(p)
}

const INVERSE_MAX_ITER: usize = 200;
const INVERSE_TOL: f64 = 1e-12;

/// Solves `Σ e^{−2a_j t}|q_j|² = 1` for `t`.
///
/// The left side is strictly decreasing in `t`, so a bracket from the
/// extreme exponents followed by safeguarded Newton always converges.
pub fn solve_cylinder_time(a: &[f64], q: &[f64]) -> Result<f64> {
    let m: Vec<f64> = q.chunks(2).map(|p| p[0] * p[0] + p[1] * p[1]).collect();
    let r2: f64 = m.iter().sum();
    if !(r2 > 0.0) {
        return Err(Error::InvalidInput("origin is not in ℂⁿ − {0}".into()));
    }
    let f = |t: f64| -> (f64, f64) {
        let mut v = -1.0;
        let mut dv = 0.0;
        for (aj, mj) in a.iter().zip(&m) {
            let e = (-2.0 * aj * t).exp() * mj;
            v += e;
            dv -= 2.0 * aj * e;
        }
        (v, dv)
    };
    let l = 0.5 * r2.ln();
    let a_min = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let a_max = a.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = {
        let (x, y) = (l / a_min, l / a_max);
        (x.min(y) - 1e-9, x.max(y) + 1e-9)
    };
    let mut t = 0.5 * (lo + hi);
    for iter in 0..INVERSE_MAX_ITER {
        let (v, dv) = f(t);
        if v.abs() < INVERSE_TOL {
            return Ok(t);
        }
        // decreasing function: v > 0 means the root is to the right
        if v > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - v / dv;
        t = if newton > lo && newton < hi && iter > 2 {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let (v, _) = f(t);
    if v.abs() < INVERSE_TOL {
        Ok(t)
    } else {
        Err(Error::NotConverged {
            iterations: INVERSE_MAX_ITER,
            residual: v.abs(),
        })
    }
}

pub fn map_h_inverse(hopf: &HopfData, q: &ChartPoint) -> Result<ChartPoint> {
    q.expect_chart(ChartId::PuncturedCn)?;
    let qc = q.coords();
    let t = solve_cylinder_time(&hopf.a, qc)?;
    let mut w = Vec::with_capacity(qc.len());
    for (j, aj) in hopf.a.iter().enumerate() {
        let e = (-aj * t).exp();
        w.push(e * qc[2 * j]);
        w.push(e * qc[2 * j + 1]);
    }
    let mut coords = vec![t];
    coords.extend(w);
    Ok(ChartPoint {
        chart: hopf.cylinder(),
        coords,
    })
}

/// `H⁻¹` as a jet map. The time coordinate is found numerically, then
/// lifted to a jet by Newton steps in jet arithmetic, each of which
/// doubles the number of correct derivative orders.
pub fn h_inverse_map(hopf: &HopfData) -> SmoothMap {
    let a = hopf.a.clone();
    SmoothMap::new(
        hopf.punctured(),
        hopf.cylinder(),
        Arc::new(move |q: &[Jet]| {
            let qv = jet::values(q);
            let t0 = solve_cylinder_time(&a, &qv).unwrap_or(f64::NAN);
            let mut t = Jet::constant(t0);
            for _ in 0..3 {
                let mut f = Jet::constant(-1.0);
                let mut df = Jet::constant(0.0);
                for (j, aj) in a.iter().enumerate() {
                    let m = q[2 * j] * q[2 * j] + q[2 * j + 1] * q[2 * j + 1];
                    let e = (t * (-2.0 * aj)).exp() * m;
                    f += e;
                    df += e * (-2.0 * aj);
                }
                t = t - f / df;
            }
            let mut out = vec![t];
            for (j, aj) in a.iter().enumerate() {
                let e = (t * -*aj).exp();
                out.push(e * q[2 * j]);
                out.push(e * q[2 * j + 1]);
            }
            out
        }),
    )
}
