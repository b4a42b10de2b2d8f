//! The explicit l.c.K. structure on `ℝ × S^{2n−1}` and the group actions
//! that descend it to a Hopf manifold.
//!
//! Coordinates on the cylinder are `(t, w)` with `w = (x₁, y₁, …, xₙ, yₙ)`.
//! Every field is defined on the open set `w ≠ 0` in a way that is tangent
//! to (or annihilates the normal of) each level set `|w| = r`, so the
//! ambient jets differentiate the intrinsic objects correctly along the
//! manifold.
//!
//! Sign conventions: `J₀` is multiplication by `−i`, so `J₀ ∂_x = −∂_y`,
//! and `H(t, z) = (e^{a_j t} z_j)`. With these choices `g̃` is positive
//! definite and `H` intertwines `J_A` with `J₀`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chart::{h_map, Chart, ChartId, ChartPoint, HopfData, SmoothMap};
use crate::error::{Error, Result};
use crate::hermitian::HermitianStructure;
use crate::jet::Jet;
use crate::tensor::{
    exterior_derivative, ComplexStructureField, DifferentialForm, MetricField, VectorField,
};

fn w_norm2(x: &[Jet]) -> Jet {
    x[1..].iter().map(|c| *c * *c).sum()
}

/// `Σ a_j |w_j|²`.
fn weighted_norm2(a: &[f64], x: &[Jet]) -> Jet {
    a.iter()
        .enumerate()
        .map(|(j, aj)| (x[1 + 2 * j] * x[1 + 2 * j] + x[2 + 2 * j] * x[2 + 2 * j]) * *aj)
        .sum()
}

fn eta0_coeffs(x: &[Jet]) -> Vec<Jet> {
    let n = (x.len() - 1) / 2;
    let mut c = vec![Jet::constant(0.0)];
    for j in 0..n {
        c.push(-x[2 + 2 * j]);
        c.push(x[1 + 2 * j]);
    }
    c
}

/// `η₀ = Σ (x_j dy_j − y_j dx_j)` on the cylinder chart.
pub fn build_eta0(n: usize) -> DifferentialForm {
    DifferentialForm::one_form(2 * n + 1, eta0_coeffs)
}

/// `η_A = η₀ / Σ a_j |z_j|²`.
pub fn build_eta_a(data: &HopfData) -> DifferentialForm {
    let a = data.a.clone();
    DifferentialForm::one_form(2 * data.n + 1, move |x| {
        let inv = weighted_norm2(&a, x).recip();
        eta0_coeffs(x).into_iter().map(|c| c * inv).collect()
    })
}

/// `A = Σ a_j (x_j ∂_{y_j} − y_j ∂_{x_j})`, the generator of the weighted
/// circle action.
pub fn build_a(data: &HopfData) -> VectorField {
    let a = data.a.clone();
    VectorField::new(2 * data.n + 1, move |x| {
        let mut c = vec![Jet::constant(0.0)];
        for (j, aj) in a.iter().enumerate() {
            c.push(x[2 + 2 * j] * -*aj);
            c.push(x[1 + 2 * j] * *aj);
        }
        c
    })
}

/// `N = ∂_t`.
pub fn build_n(n: usize) -> VectorField {
    VectorField::coordinate(2 * n + 1, 0)
}

fn j_a_coeffs(a: &[f64], x: &[Jet]) -> Vec<Jet> {
    let n = a.len();
    let d = 2 * n + 1;
    let zero = Jet::constant(0.0);
    let inv_r2 = w_norm2(x).recip();
    let psi_inv = weighted_norm2(a, x).recip();
    let eta: Vec<Jet> = eta0_coeffs(x).into_iter().map(|c| c * psi_inv).collect();
    let mut aw = vec![zero; 2 * n];
    for j in 0..n {
        aw[2 * j] = x[2 + 2 * j] * -a[j];
        aw[2 * j + 1] = x[1 + 2 * j] * a[j];
    }
    // J₀ on ℝ^{2n}: (u, v) ↦ (v, −u) per complex coordinate
    let j0 = |v: &[Jet]| -> Vec<Jet> {
        let mut out = vec![zero; 2 * n];
        for k in 0..n {
            out[2 * k] = v[2 * k + 1];
            out[2 * k + 1] = -v[2 * k];
        }
        out
    };
    let mut m = vec![zero; d * d];
    for c in 1..d {
        m[c] = eta[c];
    }
    let j0a = j0(&aw);
    for r in 0..2 * n {
        m[(r + 1) * d] = -aw[r];
    }
    // columns for the sphere block: J₀Π e_c − (J₀A) η_c
    for c in 0..2 * n {
        let mut col = vec![zero; 2 * n];
        for (r, v) in col.iter_mut().enumerate() {
            let delta = if r == c { 1.0 } else { 0.0 };
            *v = x[1 + r] * x[1 + c] * -inv_r2 + delta;
        }
        let jc = j0(&col);
        for r in 0..2 * n {
            m[(r + 1) * d + c + 1] = jc[r] - j0a[r] * eta[c + 1];
        }
    }
    m
}

/// `J_A`: `N ↦ −A`, `A ↦ N`, `J₀` on `Null η_A`, radial direction ↦ 0.
pub fn build_j_a(data: &HopfData) -> ComplexStructureField {
    let a = data.a.clone();
    ComplexStructureField::new(2 * data.n + 1, move |x| j_a_coeffs(&a, x))
}

fn omega_a_form(data: &HopfData) -> DifferentialForm {
    let a = data.a.clone();
    let primitive = DifferentialForm::one_form(2 * data.n + 1, move |x| {
        let e = x[0].exp();
        let inv = weighted_norm2(&a, x).recip();
        eta0_coeffs(x).into_iter().map(|c| c * inv * e).collect()
    });
    exterior_derivative(&primitive).expect("1-form")
}

/// The full structure of the construction on one cylinder chart.
#[derive(Clone, Debug)]
pub struct HopfStructure {
    pub data: HopfData,
    pub chart: Chart,
    pub eta0: DifferentialForm,
    pub eta_a: DifferentialForm,
    pub a_field: VectorField,
    pub n_field: VectorField,
    pub xi: VectorField,
    pub j_a: ComplexStructureField,
    /// `Ω_A = d(e^t η_A)`, Kähler on the cylinder.
    pub omega_a: DifferentialForm,
    /// `ω̃ = 2e^{−t} Ω_A`.
    pub omega_tilde: DifferentialForm,
    /// `g̃(X, Y) = ω̃(J_A X, Y)`, extended by the unit normal off the sphere.
    pub g_tilde: MetricField,
    /// `θ = −dt`.
    pub theta: DifferentialForm,
}

/// Builds every field of the structure for `data`.
pub fn build_forms_and_metric(data: &HopfData) -> HopfStructure {
    let n = data.n;
    let d = 2 * n + 1;
    let omega_a = omega_a_form(data);
    let oa = omega_a.clone();
    let omega_tilde = DifferentialForm::two_form(d, move |x| {
        let f = (-x[0]).exp() * 2.0;
        oa.eval_jets(x).into_iter().map(|c| c * f).collect()
    });

    let a = data.a.clone();
    let ot = omega_tilde.clone();
    let g_tilde = MetricField::new(d, move |x| {
        let j = j_a_coeffs(&a, x);
        let w = ot.eval_jets(x);
        let inv_r2 = w_norm2(x).recip();
        // Π, the projection onto the leaf, as a full matrix
        let mut pi = vec![Jet::constant(0.0); d * d];
        pi[0] = Jet::constant(1.0);
        for r in 1..d {
            for c in 1..d {
                let delta = if r == c { 1.0 } else { 0.0 };
                pi[r * d + c] = x[r] * x[c] * -inv_r2 + delta;
            }
        }
        // B = Jᵀ W
        let mut b = vec![Jet::constant(0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                b[r * d + c] = (0..d).map(|k| j[k * d + r] * w[k * d + c]).sum();
            }
        }
        // B Π
        let mut bp = vec![Jet::constant(0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                bp[r * d + c] = (0..d).map(|k| b[r * d + k] * pi[k * d + c]).sum();
            }
        }
        let mut g = vec![Jet::constant(0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                let normal = if r > 0 && c > 0 {
                    x[r] * x[c] * inv_r2
                } else {
                    Jet::constant(0.0)
                };
                g[r * d + c] = (0..d).map(|k| pi[k * d + r] * bp[k * d + c]).sum::<Jet>() + normal;
            }
        }
        g
    });

    HopfStructure {
        data: data.clone(),
        chart: data.cylinder(),
        eta0: build_eta0(n),
        eta_a: build_eta_a(data),
        a_field: build_a(data),
        n_field: build_n(n),
        xi: build_n(n),
        j_a: build_j_a(data),
        omega_a,
        omega_tilde,
        g_tilde,
        theta: DifferentialForm::coordinate_differential(d, 0).scale(-1.0),
    }
}

impl HopfStructure {
    pub fn new(data: &HopfData) -> Self {
        build_forms_and_metric(data)
    }

    pub fn hermitian(&self) -> HermitianStructure {
        HermitianStructure {
            chart: self.chart,
            g: self.g_tilde.clone(),
            j: self.j_a.clone(),
        }
    }

    pub fn h(&self) -> SmoothMap {
        h_map(&self.data)
    }
}

/// An element of the groups acting on the two models.
#[derive(Clone, Debug, PartialEq)]
pub enum DeckGroupElement {
    /// `φ_s(t, w) = (t + s, w)` on the cylinder.
    Flow(f64),
    /// `ψ_θ(w)_j = e^{iθa_j} w_j` on the cylinder.
    Torus(f64),
    /// `γ^k(z) = (λ_j^k z_j)` on `ℂⁿ − {0}`.
    Deck(i32),
    /// A unitary matrix commuting with `diag(a)`, acting on `w` or `z`.
    Unitary(DMatrix<Complex64>),
}

impl DeckGroupElement {
    /// Validates a unitary element against the weights of `data`.
    pub fn unitary(data: &HopfData, u: DMatrix<Complex64>) -> Result<Self> {
        let n = data.n;
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::InvalidInput(format!("unitary must be {n}×{n}")));
        }
        let err = (u.adjoint() * &u - DMatrix::identity(n, n)).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if err > 1e-10 {
            return Err(Error::InvalidInput(format!("matrix is not unitary (error {err:e})")));
        }
        for r in 0..n {
            for c in 0..n {
                if (data.a[r] - data.a[c]).abs() > 0.0 && u[(r, c)].norm() > 1e-10 {
                    return Err(Error::InvalidInput(
                        "unitary must commute with diag(a)".into(),
                    ));
                }
            }
        }
        Ok(DeckGroupElement::Unitary(u))
    }

    /// The element as a jet map on the chart it acts on.
    pub fn as_map(&self, data: &HopfData, chart: ChartId) -> Result<SmoothMap> {
        let n = data.n;
        let needed = match self {
            DeckGroupElement::Flow(_) | DeckGroupElement::Torus(_) => Some(ChartId::Cylinder),
            DeckGroupElement::Deck(_) => Some(ChartId::PuncturedCn),
            DeckGroupElement::Unitary(_) => None,
        };
        if let Some(id) = needed {
            if id != chart {
                return Err(Error::ChartMismatch {
                    expected: id.to_string(),
                    found: chart.to_string(),
                });
            }
        }
        let target = match chart {
            ChartId::Cylinder => data.cylinder(),
            ChartId::PuncturedCn => data.punctured(),
        };
        let offset = usize::from(chart == ChartId::Cylinder);
        let map: Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync> = match self.clone() {
            DeckGroupElement::Flow(s) => Arc::new(move |x: &[Jet]| {
                let mut out = x.to_vec();
                out[0] = x[0] + s;
                out
            }),
            DeckGroupElement::Torus(angle) => {
                let rot: Vec<Complex64> = data
                    .a
                    .iter()
                    .map(|aj| Complex64::from_polar(1.0, angle * aj))
                    .collect();
                diagonal_map(rot, offset)
            }
            DeckGroupElement::Deck(k) => {
                diagonal_map(data.lambda.iter().map(|l| l.powi(k)).collect(), offset)
            }
            DeckGroupElement::Unitary(u) => Arc::new(move |x: &[Jet]| {
                let mut out = x[..offset].to_vec();
                for r in 0..n {
                    let (mut re, mut im) = (Jet::constant(0.0), Jet::constant(0.0));
                    for c in 0..n {
                        let (p, q) = (x[offset + 2 * c], x[offset + 2 * c + 1]);
                        let m = u[(r, c)];
                        re += p * m.re - q * m.im;
                        im += p * m.im + q * m.re;
                    }
                    out.push(re);
                    out.push(im);
                }
                out
            }),
        };
        Ok(SmoothMap::new(target, target, map))
    }
}

fn diagonal_map(d: Vec<Complex64>, offset: usize) -> Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync> {
    Arc::new(move |x: &[Jet]| {
        let mut out = x[..offset].to_vec();
        for (j, m) in d.iter().enumerate() {
            let (p, q) = (x[offset + 2 * j], x[offset + 2 * j + 1]);
            out.push(p * m.re - q * m.im);
            out.push(p * m.im + q * m.re);
        }
        out
    })
}

/// Applies a group element to a point of the matching chart.
pub fn group_action(el: &DeckGroupElement, data: &HopfData, p: &ChartPoint) -> Result<ChartPoint> {
    el.as_map(data, p.chart().id)?.apply(p)
}

/// The lift of `γ^k` to the cylinder: `(t, w) ↦ (t − ks, c^k w)`.
pub fn deck_on_cylinder(data: &HopfData, k: i32) -> SmoothMap {
    let shift = -(k as f64) * data.s;
    let rot: Vec<Complex64> = data.c.iter().map(|c| c.powi(k)).collect();
    let inner = diagonal_map(rot, 1);
    let chart = data.cylinder();
    SmoothMap::new(
        chart,
        chart,
        Arc::new(move |x: &[Jet]| {
            let mut out = inner(x);
            out[0] = x[0] + shift;
            out
        }),
    )
}

/// `H ∘ (φ_s × ψ_θ) ∘ H⁻¹` is multiplication by this diagonal.
pub fn conjugate_diagonal(data: &HopfData, s: f64, angle: f64) -> Vec<Complex64> {
    data.a
        .iter()
        .map(|aj| Complex64::from_polar((aj * s).exp(), aj * angle))
        .collect()
}

/// Output of the Theorem A rescaling.
#[derive(Clone, Debug)]
pub struct Rescaled {
    /// `Θ̄ = 2 s⁻¹ Ω`.
    pub theta_bar_form: DifferentialForm,
    /// `θ̄ = −d(log s)`.
    pub lee: DifferentialForm,
    /// `s = 2Ω(Jξ, ξ)`.
    pub s: DifferentialForm,
}

/// Rebuilds a l.c.K. metric from a Kähler form with a holomorphic
/// homothetic flow `ξ`: `s = 2Ω(Jξ, ξ)`, `Θ̄ = 2Ω/s`, `θ̄ = −d log s`.
/// Fails if `s ≤ 0` at any of the given sample points.
pub fn theorem_a_rescale(
    omega: &DifferentialForm,
    xi: &VectorField,
    j: &ComplexStructureField,
    samples: &[Vec<f64>],
) -> Result<Rescaled> {
    let d = omega.dim();
    let (om, xf, jf) = (omega.clone(), xi.clone(), j.clone());
    let s_form = DifferentialForm::scalar(d, move |x| {
        let (w, v, jm) = (om.eval_jets(x), xf.eval_jets(x), jf.eval_jets(x));
        let jv: Vec<Jet> = (0..d)
            .map(|r| (0..d).map(|c| jm[r * d + c] * v[c]).sum())
            .collect();
        let mut s = Jet::constant(0.0);
        for r in 0..d {
            for c in 0..d {
                s += jv[r] * w[r * d + c] * v[c];
            }
        }
        s * 2.0
    });
    for p in samples {
        let s = s_form.values_at(p)[0];
        if !(s > 0.0) {
            return Err(Error::HypothesisViolated(format!(
                "s = 2Ω(Jξ, ξ) = {s:e} is not positive at {p:?}"
            )));
        }
    }
    let (om, sf) = (omega.clone(), s_form.clone());
    let theta_bar_form = DifferentialForm::two_form(d, move |x| {
        let inv = sf.eval_jets(x)[0].recip() * 2.0;
        om.eval_jets(x).into_iter().map(|c| c * inv).collect()
    });
    let sf = s_form.clone();
    let log_s = DifferentialForm::scalar(d, move |x| sf.eval_jets(x)[0].ln());
    let lee = exterior_derivative(&log_s)?.scale(-1.0);
    Ok(Rescaled {
        theta_bar_form,
        lee,
        s: s_form,
    })
}
