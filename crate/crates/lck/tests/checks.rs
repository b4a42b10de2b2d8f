use lck::chart::{ChartId, HopfData};
use lck::hermitian::HermitianStructure;
use lck::hopf::{deck_on_cylinder, DeckGroupElement, HopfStructure};
use lck::jet::Jet;
use lck::sampling::Sampler;
use lck::tensor::{DifferentialForm, MetricField};
use lck::verify::*;
use num_complex::Complex64;

fn hopf(a: &[f64]) -> HopfStructure {
    let c = vec![Complex64::new(1.0, 0.0); a.len()];
    HopfStructure::new(&HopfData::new(a.to_vec(), 0.8, c).unwrap())
}

fn points(h: &HopfStructure, count: usize, seed: u64) -> Vec<Vec<f64>> {
    Sampler::new(h.chart, seed).points(count)
}

fn by_name<'a>(checks: &'a [CheckResult], name: &str) -> &'a CheckResult {
    checks.iter().find(|c| c.name == name).unwrap()
}

#[test]
fn hopf_structure_is_lck_with_parallel_lee_form() {
    let h = hopf(&[1.0, 2.0]);
    let pts = points(&h, 12, 1);
    let lck = check_lck(&h.hermitian(), &pts);
    let par = check_parallel_lee(&h.hermitian(), &pts);
    for c in lck.iter().chain(&par) {
        assert!(c.pass, "{c:?}");
    }
    let norm = by_name(&par, "lee_norm_constant");
    assert!(norm.notes.contains("1.0000000000"), "{}", norm.notes);
}

#[test]
fn flat_space_is_kahler() {
    let h = HermitianStructure::flat(2);
    let pts = Sampler::new(h.chart, 2).points(5);
    for c in check_lck(&h, &pts).iter().chain(&check_parallel_lee(&h, &pts)) {
        assert!(c.pass, "{c:?}");
        assert!(c.max_residual < 1e-12, "{c:?}");
    }
}

fn perturbed(h: &HopfStructure, eps: f64) -> HermitianStructure {
    let d = h.chart.dim();
    let bump = MetricField::new(d, move |x| {
        let mut m = vec![Jet::constant(0.0); d * d];
        let f = (x[1] * x[3]).sin() * eps;
        for i in 1..d {
            m[i * d + i] = f;
        }
        m
    });
    HermitianStructure {
        chart: h.chart,
        g: h.g_tilde.add(&bump),
        j: h.j_a.clone(),
    }
}

#[test]
fn perturbed_metric_fails_in_proportion() {
    let h = hopf(&[1.0, 2.0, 4.0]);
    let pts = points(&h, 6, 3);
    let r = |eps: f64| check_lck(&perturbed(&h, eps), &pts)[0].max_residual;
    let (a, b) = (r(1e-3), r(1e-2));
    assert!(a > 10.0 * 1e-7, "{a}");
    assert!((b / a - 10.0).abs() < 1.0, "{a} {b}");
}

#[test]
fn perturbation_in_complex_dimension_two_breaks_closedness() {
    // in real dimension four dω = θ∧ω is always solvable; dθ = 0 is not
    let h = hopf(&[1.0, 2.0]);
    let pts = points(&h, 6, 3);
    let checks = check_lck(&perturbed(&h, 1e-2), &pts);
    assert!(checks[0].pass);
    assert!(checks[1].max_residual > 10.0 * checks[1].tolerance, "{:?}", checks[1]);
}

#[test]
fn conformal_rescaling_breaks_parallelism() {
    let h = hopf(&[1.0, 2.0]);
    let pts = points(&h, 6, 4);
    let f = DifferentialForm::scalar(5, |x| x[1] * 0.4 + x[0] * x[2] * 0.3);
    let rescaled = HermitianStructure {
        chart: h.chart,
        g: h.g_tilde.conformal(&f).unwrap(),
        j: h.j_a.clone(),
    };
    let par = check_parallel_lee(&rescaled, &pts);
    assert!(!par[0].pass);
    assert!(par[0].max_residual > 10.0 * par[0].tolerance);
    // still l.c.K.
    assert!(check_lck(&rescaled, &pts)[0].pass);
}

#[test]
fn contact_structure_of_eta_a() {
    let h = hopf(&[2.0, 3.0]);
    let pts = points(&h, 10, 5);
    let checks = check_contact_pseudohermitian(&h.eta_a, &h.j_a, &h.a_field, &h.chart, &pts);
    for c in &checks {
        assert!(c.pass, "{c:?}");
    }
    let flipped = check_contact_pseudohermitian(&h.eta_a.scale(-1.0), &h.j_a, &h.a_field.scale(-1.0), &h.chart, &pts);
    let levi = by_name(&flipped, "levi_form_positive");
    assert!(!levi.pass);
    let closed = DifferentialForm::coordinate_differential(5, 1);
    let vol = check_contact_pseudohermitian(&closed, &h.j_a, &h.a_field, &h.chart, &pts);
    assert!(!by_name(&vol, "contact_volume").pass);
}

#[test]
fn torus_and_flow_are_holomorphic_isometries() {
    let h = hopf(&[1.0, 2.0]);
    let pts = points(&h, 8, 6);
    for el in [DeckGroupElement::Torus(0.7), DeckGroupElement::Flow(0.4)] {
        let f = el.as_map(&h.data, ChartId::Cylinder).unwrap();
        for c in check_holomorphic_isometry(&f, &h.hermitian(), &pts) {
            assert!(c.pass, "{el:?} {c:?}");
        }
    }
}

#[test]
fn homothety_factors() {
    let h = hopf(&[1.0, 2.0]);
    let pts = points(&h, 8, 7);
    for s in [-1.0, 0.3, 2.0] {
        let f = DeckGroupElement::Flow(s).as_map(&h.data, ChartId::Cylinder).unwrap();
        let c = check_homothety("flow", &f, &h.omega_a, s.exp(), &h.chart, &pts);
        assert!(c.pass, "{c:?}");
        let wrong = check_homothety("flow", &f, &h.omega_a, 1.0, &h.chart, &pts);
        assert!(s == 0.0 || !wrong.pass);
    }
    let deck = deck_on_cylinder(&h.data, 1);
    let c = check_homothety("deck", &deck, &h.omega_a, (-h.data.s).exp(), &h.chart, &pts);
    assert!(c.pass, "{c:?}");
}

#[test]
fn lee_symmetries_hold() {
    let h = hopf(&[1.0, 2.0]);
    let pts = points(&h, 4, 8);
    for c in check_lee_symmetries(&h.hermitian(), &h.theta, &pts) {
        assert!(c.pass, "{c:?}");
    }
}

#[test]
fn theorem_a_round_trip() {
    let h = hopf(&[1.0, 3.0]);
    let pts = points(&h, 8, 9);
    for c in check_theorem_a(&h, &pts, 3.5) {
        assert!(c.pass, "{c:?}");
    }
}

#[test]
fn torus_is_lcr_with_unit_factor() {
    let h = hopf(&[1.0, 2.0, 2.0]);
    let pts = points(&h, 5, 10);
    let f = DeckGroupElement::Torus(1.1).as_map(&h.data, ChartId::Cylinder).unwrap();
    let (dec, checks) = analyze_lcr(&f, &h.hermitian(), &h.theta, &pts);
    for c in &checks {
        assert!(c.pass, "{c:?}");
    }
    for d in &dec {
        assert!((d.lambda - 1.0).abs() < 1e-8);
        assert!(d.v.norm() < 1e-8);
    }
    let perp = check_perp_preservation(&f, &h.hermitian(), &h.theta, &pts);
    assert!(perp.pass, "{perp:?}");
}
