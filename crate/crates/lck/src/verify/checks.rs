use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{
    bilinear, collect_residuals, lee_form_with_jacobian, max_abs, minimum, per_point, std_dev, sub,
    worst, CheckResult, TOL_FINITE_DIFFERENCE,
};
use crate::chart::{complex_to_real, dot, real_to_complex, Chart, HopfData, SmoothMap};
use crate::error::{Error, Result};
use crate::hermitian::{
    extract_lee_form, levi_matrix, min_eigenvalue, nijenhuis, null_basis, HermitianStructure,
};
use crate::hopf::{
    conjugate_diagonal, theorem_a_rescale, DeckGroupElement, HopfStructure,
};
use crate::tensor::{
    bracket, christoffel, exterior_derivative, lie_derivative_complex_structure,
    lie_derivative_metric, pullback, sharp, ComplexStructureField, DifferentialForm, VectorField,
};

/// `dω = θ∧ω` and `dθ = 0` for the Lee form extracted from `(g, J)`.
pub fn check_lck(h: &HermitianStructure, points: &[Vec<f64>]) -> Vec<CheckResult> {
    let omega = h.fundamental_form();
    let lck = per_point(points, |x| extract_lee_form(&omega, &h.chart, x).map(|l| l.residual));
    let closed = per_point(points, |x| {
        let (_, jac) = lee_form_with_jacobian(&omega, &h.chart, x)?;
        let d = x.len();
        let dtheta: Vec<f64> = (0..d * d)
            .map(|ij| 0.5 * (jac[ij / d][ij % d] - jac[ij % d][ij / d]))
            .collect();
        let frame = h.chart.tangent_frame(x);
        Ok(worst(frame.iter().flat_map(|u| {
            frame.iter().map(|v| bilinear(&dtheta, d, u, v).abs()).collect::<Vec<_>>()
        })))
    });
    vec![
        collect_residuals("lck_condition", 1e-7, lck),
        collect_residuals("lee_form_closed", TOL_FINITE_DIFFERENCE, closed),
    ]
}

/// `∇θ = 0` for the extracted Lee form, and constancy of `|θ|_g`.
pub fn check_parallel_lee(h: &HermitianStructure, points: &[Vec<f64>]) -> Vec<CheckResult> {
    let omega = h.fundamental_form();
    let results = per_point(points, |x| -> Result<(f64, f64)> {
        let (theta, jac) = lee_form_with_jacobian(&omega, &h.chart, x)?;
        let d = x.len();
        let gamma = christoffel(&h.g, x)?;
        let nabla: Vec<f64> = (0..d * d)
            .map(|ij| {
                let (i, j) = (ij / d, ij % d);
                jac[i][j] - (0..d).map(|k| gamma[k][i][j] * theta[k]).sum::<f64>()
            })
            .collect();
        let frame = h.chart.tangent_frame(x);
        let res = worst(frame.iter().flat_map(|u| {
            frame.iter().map(|v| bilinear(&nabla, d, u, v).abs()).collect::<Vec<_>>()
        }));
        let g = h.g.matrix_at(x);
        let sharp = g
            .lu()
            .solve(&DVector::from_column_slice(&theta))
            .ok_or_else(|| Error::Singular("metric is singular".into()))?;
        let norm = DVector::from_column_slice(&theta).dot(&sharp).sqrt();
        Ok((res, norm))
    });
    let n = results.len();
    let mut residuals = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    for r in results {
        match r {
            Ok((a, b)) => {
                residuals.push(a);
                norms.push(b);
            }
            Err(e) => {
                return vec![
                    CheckResult::errored("lee_form_parallel", 1e-6, &e),
                    CheckResult::errored("lee_norm_constant", 1e-8, &e),
                ]
            }
        }
    }
    let mean = if n > 0 { norms.iter().sum::<f64>() / n as f64 } else { 0.0 };
    vec![
        CheckResult::new("lee_form_parallel", worst(residuals), 1e-6, n),
        CheckResult::new("lee_norm_constant", std_dev(&norms), 1e-8, n)
            .with_notes(format!("mean |θ|_g = {mean:.12}")),
    ]
}

/// Contact and pseudo-Hermitian structure of `(η, J)` on the sphere factor
/// of the cylinder: volume pairing, Reeb identities for `reeb`, Levi form.
pub fn check_contact_pseudohermitian(
    eta: &DifferentialForm,
    j: &ComplexStructureField,
    reeb: &VectorField,
    chart: &Chart,
    points: &[Vec<f64>],
) -> Vec<CheckResult> {
    let deta = match exterior_derivative(eta) {
        Ok(f) => f,
        Err(e) => return vec![CheckResult::errored("contact_volume", -1e-6, &e)],
    };
    let per = per_point(points, |x| {
        let span: Vec<Vec<f64>> = chart.tangent_frame(x).into_iter().skip(1).collect();
        let e = eta.values_at(x);
        let null = null_basis(eta, x, &span);
        let mut b0 = vec![0.0; x.len()];
        for s in &span {
            let c = dot(&e, s);
            for (b, si) in b0.iter_mut().zip(s) {
                *b += c * si;
            }
        }
        let l = dot(&b0, &b0).sqrt();
        if l > 0.0 {
            b0.iter_mut().for_each(|c| *c /= l);
        }
        let mut cols = vec![b0];
        cols.extend(null.iter().cloned());
        let m = cols.len();
        let pairing = DMatrix::from_fn(m, m, |r, k| {
            if r == 0 {
                dot(&e, &cols[k])
            } else {
                deta.evaluate(x, &[&null[r - 1], &cols[k]])
            }
        });
        let det = pairing.determinant().abs();
        let a = reeb.at(x);
        let norm_res = (dot(&e, &a) - 1.0).abs();
        let interior = worst(span.iter().map(|s| deta.evaluate(x, &[&a, s]).abs()));
        let levi = min_eigenvalue(&levi_matrix(&deta, j, x, &null));
        (det, norm_res, interior, levi)
    });
    let n = per.len();
    vec![
        CheckResult::lower_bound("contact_volume", minimum(per.iter().map(|p| p.0)), 1e-6, n),
        CheckResult::new("reeb_normalization", worst(per.iter().map(|p| p.1)), 1e-10, n),
        CheckResult::new("reeb_interior", worst(per.iter().map(|p| p.2)), 1e-9, n),
        CheckResult::lower_bound("levi_form_positive", minimum(per.iter().map(|p| p.3)), 0.0, n),
    ]
}

/// `f*g = g` and `f_*∘J = J∘f_*` on tangent frames.
pub fn check_holomorphic_isometry(
    f: &SmoothMap,
    h: &HermitianStructure,
    points: &[Vec<f64>],
) -> Vec<CheckResult> {
    let per = per_point(points, |x| {
        let y = f.apply_coords(x);
        let frame = h.chart.tangent_frame(x);
        let pushed: Vec<Vec<f64>> = frame.iter().map(|u| f.push_coords(x, u)).collect();
        let (gx, gy) = (h.g.matrix_at(x), h.g.matrix_at(&y));
        let pair = |m: &DMatrix<f64>, u: &[f64], v: &[f64]| {
            DVector::from_column_slice(u).dot(&(m * DVector::from_column_slice(v)))
        };
        let mut iso: f64 = 0.0;
        for (a, u) in frame.iter().enumerate() {
            for (b, v) in frame.iter().enumerate() {
                iso = worst([iso, (pair(&gy, &pushed[a], &pushed[b]) - pair(&gx, u, v)).abs()]);
            }
        }
        let holo = worst(frame.iter().zip(&pushed).map(|(u, fu)| {
            let lhs = f.push_coords(x, &h.j.apply_at(x, u));
            max_abs(&sub(&lhs, &h.j.apply_at(&y, fu)))
        }));
        (iso, holo)
    });
    let n = per.len();
    vec![
        CheckResult::new("isometry", worst(per.iter().map(|p| p.0)), 1e-9, n),
        CheckResult::new("holomorphic", worst(per.iter().map(|p| p.1)), 1e-9, n),
    ]
}

/// `f*Ω = ρ·Ω`, as a residual relative to `|ρ·Ω|` on the tangent frame.
pub fn check_homothety(
    name: &str,
    f: &SmoothMap,
    omega: &DifferentialForm,
    rho: f64,
    chart: &Chart,
    points: &[Vec<f64>],
) -> CheckResult {
    let pulled = match pullback(f, omega) {
        Ok(p) => p,
        Err(e) => return CheckResult::errored(name, 1e-8, &e),
    };
    let per = per_point(points, |x| {
        let frame = chart.tangent_frame(x);
        let (pw, ow) = (pulled.values_at(x), omega.values_at(x));
        let d = x.len();
        let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
        for u in &frame {
            for v in &frame {
                let target = rho * bilinear(&ow, d, u, v);
                diff = worst([diff, (bilinear(&pw, d, u, v) - target).abs()]);
                scale = scale.max(target.abs());
            }
        }
        diff / scale
    });
    CheckResult::new(name, worst(per.iter().copied()), 1e-8, points.len())
        .with_notes(format!("expected factor {rho:.12}"))
}

/// Least-squares homothety factor of `f` at `x`.
pub fn estimate_homothety(f: &SmoothMap, omega: &DifferentialForm, chart: &Chart, x: &[f64]) -> Result<f64> {
    let pulled = pullback(f, omega)?;
    let frame = chart.tangent_frame(x);
    let (pw, ow) = (pulled.values_at(x), omega.values_at(x));
    let d = x.len();
    let (mut num, mut den) = (0.0, 0.0);
    for u in &frame {
        for v in &frame {
            let (p, o) = (bilinear(&pw, d, u, v), bilinear(&ow, d, u, v));
            num += p * o;
            den += o * o;
        }
    }
    Ok(num / den)
}

/// `ρ(f₁∘f₂) = ρ(f₁)ρ(f₂)` with factors estimated pointwise.
pub fn check_multiplicativity(
    pairs: &[(SmoothMap, SmoothMap)],
    omega: &DifferentialForm,
    chart: &Chart,
    points: &[Vec<f64>],
) -> CheckResult {
    let mut results = Vec::new();
    for (f1, f2) in pairs {
        let comp = f1.compose(f2);
        results.extend(per_point(points, |x| -> Result<f64> {
            let a = estimate_homothety(f1, omega, chart, x)?;
            let b = estimate_homothety(f2, omega, chart, x)?;
            let c = estimate_homothety(&comp, omega, chart, x)?;
            Ok((c - a * b).abs() / (a * b).abs())
        }));
    }
    let mut c = collect_residuals("homothety_multiplicative", 1e-9, results);
    c.points_tested = points.len() * pairs.len();
    c
}

/// Nijenhuis tensor on leaf-tangent extensions of the given vector pairs.
pub fn check_integrability(
    h: &HermitianStructure,
    points: &[Vec<f64>],
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> CheckResult {
    let idx: Vec<Vec<f64>> = (0..points.len()).map(|i| vec![i as f64]).collect();
    let res = per_point(&idx, |i| {
        let i = i[0] as usize;
        let (u, v) = &pairs[i];
        let x = VectorField::tangent_extension(&h.chart, u);
        let y = VectorField::tangent_extension(&h.chart, v);
        nijenhuis(&h.j, &x, &y, &points[i]).map(|n| max_abs(&n))
    });
    collect_residuals("nijenhuis", 1e-7, res)
}

/// `H_*∘J_A = J₀∘H_*` on the given tangent vectors.
pub fn check_biholomorphism(
    hopf: &HopfStructure,
    points: &[Vec<f64>],
    vectors: &[Vec<Vec<f64>>],
) -> CheckResult {
    let map = hopf.h();
    let j0 = ComplexStructureField::standard(2 * hopf.data.n);
    let idx: Vec<Vec<f64>> = (0..points.len()).map(|i| vec![i as f64]).collect();
    let res = per_point(&idx, |i| {
        let i = i[0] as usize;
        let x = &points[i];
        let q = map.apply_coords(x);
        worst(vectors[i].iter().map(|v| {
            let lhs = map.push_coords(x, &hopf.j_a.apply_at(x, v));
            let rhs = j0.apply_at(&q, &map.push_coords(x, v));
            max_abs(&sub(&lhs, &rhs))
        }))
    });
    let count: usize = vectors.iter().map(Vec::len).sum();
    CheckResult::new("biholomorphism", worst(res), 1e-7, count)
}

/// `L_{θ^♯}g`, `L_{Jθ^♯}g`, `L_{θ^♯}J`, `L_{Jθ^♯}J` and `[θ^♯, Jθ^♯]`.
pub fn check_lee_symmetries(
    h: &HermitianStructure,
    theta: &DifferentialForm,
    points: &[Vec<f64>],
) -> Vec<CheckResult> {
    let names = [
        "lie_lee_metric",
        "lie_anti_lee_metric",
        "lie_lee_complex_structure",
        "lie_anti_lee_complex_structure",
        "lee_bracket",
    ];
    let lee = match sharp(&h.g, theta) {
        Ok(v) => v,
        Err(e) => return names.iter().map(|n| CheckResult::errored(*n, 1e-7, &e)).collect(),
    };
    let jlee = h.j.apply_field(&lee);
    let fields = [&lee, &jlee];
    let lg: Vec<_> = fields
        .iter()
        .map(|f| lie_derivative_metric(f, &h.g).expect("same chart"))
        .collect();
    let br = bracket(&lee, &jlee).expect("same chart");
    let per = per_point(points, |x| {
        let frame = h.chart.tangent_frame(x);
        let mut out = [0.0f64; 5];
        for (k, l) in lg.iter().enumerate() {
            let m = l.matrix_at(x);
            for u in &frame {
                for v in &frame {
                    let val = DVector::from_column_slice(u).dot(&(&m * DVector::from_column_slice(v)));
                    out[k] = worst([out[k], val.abs()]);
                }
            }
        }
        for (k, f) in fields.iter().enumerate() {
            for u in &frame {
                let uf = VectorField::tangent_extension(&h.chart, u);
                let r = lie_derivative_complex_structure(f, &h.j, &uf)
                    .map(|v| max_abs(&v.at(x)))
                    .unwrap_or(f64::NAN);
                out[2 + k] = worst([out[2 + k], r]);
            }
        }
        out[4] = max_abs(&br.at(x));
        out
    });
    let n = per.len();
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let tol = if k == 4 { 1e-9 } else { 1e-7 };
            CheckResult::new(*name, worst(per.iter().map(|p| p[k])), tol, n)
        })
        .collect()
}

/// Rescaling `(Ω_A, ξ, J_A)` reproduces `ω̃` and `θ = −dt`, invariantly
/// under `Ω ↦ cΩ`.
pub fn check_theorem_a(hopf: &HopfStructure, points: &[Vec<f64>], c: f64) -> Vec<CheckResult> {
    let names = ["theorem_a_metric", "theorem_a_lee_form", "theorem_a_scale_invariance"];
    let r1 = theorem_a_rescale(&hopf.omega_a, &hopf.xi, &hopf.j_a, points);
    let r2 = theorem_a_rescale(&hopf.omega_a.scale(c), &hopf.xi, &hopf.j_a, points);
    let (r1, r2) = match (r1, r2) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return names.iter().map(|n| CheckResult::errored(*n, 1e-9, &e)).collect()
        }
    };
    let chart = hopf.chart;
    let per = per_point(points, |x| {
        let frame = chart.tangent_frame(x);
        let d = x.len();
        let (w1, w2, wt) = (
            r1.theta_bar_form.values_at(x),
            r2.theta_bar_form.values_at(x),
            hopf.omega_tilde.values_at(x),
        );
        let (mut metric, mut scaled) = (0.0f64, 0.0f64);
        for u in &frame {
            for v in &frame {
                let a = bilinear(&w1, d, u, v);
                metric = worst([metric, (a - bilinear(&wt, d, u, v)).abs()]);
                scaled = worst([scaled, (a - bilinear(&w2, d, u, v)).abs()]);
            }
        }
        let lee = max_abs(&sub(&r1.lee.values_at(x), &hopf.theta.values_at(x)));
        (metric, lee, scaled)
    });
    let n = per.len();
    vec![
        CheckResult::new(names[0], worst(per.iter().map(|p| p.0)), 1e-9, n),
        CheckResult::new(names[1], worst(per.iter().map(|p| p.1)), 1e-9, n),
        CheckResult::new(names[2], worst(per.iter().map(|p| p.2)), 1e-10, n)
            .with_notes(format!("Ω scaled by {c}")),
    ]
}

/// `|γ^k(z) − z|` stays away from zero for `k = 1, 2, 3`.
pub fn check_deck_freeness(data: &HopfData, points: &[Vec<f64>]) -> CheckResult {
    let maps: Vec<SmoothMap> = (1..=3)
        .map(|k| {
            DeckGroupElement::Deck(k)
                .as_map(data, crate::chart::ChartId::PuncturedCn)
                .expect("deck acts on ℂⁿ")
        })
        .collect();
    let per = per_point(points, |z| {
        minimum(maps.iter().map(|m| {
            let w = m.apply_coords(z);
            dot(&sub(&w, z), &sub(&w, z)).sqrt()
        }))
    });
    CheckResult::lower_bound("deck_free", minimum(per), 1e-6, points.len())
}

/// `H(φ_s ψ_θ p) = diag(e^{a_j(s + iθ)}) H(p)`.
pub fn check_conjugation(hopf: &HopfStructure, s: f64, angle: f64, points: &[Vec<f64>]) -> CheckResult {
    let chart = crate::chart::ChartId::Cylinder;
    let flow = DeckGroupElement::Flow(s).as_map(&hopf.data, chart).expect("cylinder");
    let torus = DeckGroupElement::Torus(angle).as_map(&hopf.data, chart).expect("cylinder");
    let both = flow.compose(&torus);
    let diag = conjugate_diagonal(&hopf.data, s, angle);
    let h = hopf.h();
    let per = per_point(points, |x| {
        let lhs = h.apply_coords(&both.apply_coords(x));
        let z: Vec<Complex64> = real_to_complex(&h.apply_coords(x))
            .iter()
            .zip(&diag)
            .map(|(a, b)| a * b)
            .collect();
        // relative: |z| reaches e^{a_max (t + s)} on the sample range
        max_abs(&sub(&lhs, &complex_to_real(&z))) / max_abs(&lhs).max(1.0)
    });
    CheckResult::new("conjugation", worst(per), 1e-10, points.len())
}

/// `f*α = α` for a 1-form.
pub fn check_form_invariance(name: &str, f: &SmoothMap, alpha: &DifferentialForm, points: &[Vec<f64>]) -> CheckResult {
    let pulled = match pullback(f, alpha) {
        Ok(p) => p,
        Err(e) => return CheckResult::errored(name, 1e-8, &e),
    };
    let per = per_point(points, |x| max_abs(&sub(&pulled.values_at(x), &alpha.values_at(x))));
    CheckResult::new(name, worst(per), 1e-8, points.len())
}
