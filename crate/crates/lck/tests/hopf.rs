use lck::chart::*;
use lck::hermitian::fundamental_form;
use lck::hopf::*;
use lck::sampling::Sampler;
use lck::tensor::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn data(a: &[f64], s: f64) -> HopfData {
    HopfData::new(a.to_vec(), s, vec![one(); a.len()]).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fd_jacobian(f: &SmoothMap, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let m = f.apply_coords(x).len();
    let mut jac = vec![vec![0.0; x.len()]; m];
    for i in 0..x.len() {
        let (mut p, mut q) = (x.to_vec(), x.to_vec());
        p[i] += h;
        q[i] -= h;
        let (fp, fq) = (f.apply_coords(&p), f.apply_coords(&q));
        for r in 0..m {
            jac[r][i] = (fp[r] - fq[r]) / (2.0 * h);
        }
    }
    jac
}

#[test]
fn h_scales_each_coordinate_and_its_jacobian_matches_differences() {
    let d = data(&[1.0, 2.0], 0.5);
    let r = 0.5f64.sqrt();
    let p = ChartPoint::cylinder(1.0, &[r, 0.0, 0.0, r]).unwrap();
    let q = map_h(&d, &p).unwrap();
    let e = std::f64::consts::E;
    assert!(max_diff(q.coords(), &[r * e, 0.0, 0.0, r * e * e]) < 1e-14);
    let h = h_map(&d);
    let x = p.coords();
    for (row, fd) in h.jacobian(x).iter().zip(fd_jacobian(&h, x, 1e-6)) {
        assert!(max_diff(row, &fd) < 1e-8);
    }
}

#[test]
fn h_pushes_the_flow_generator_to_the_weighted_euler_field() {
    let d = data(&[1.0, 1.0], 0.5);
    let s = 0.7;
    let w = [0.6, 0.0, 0.0, -0.8];
    let p = ChartPoint::cylinder(s, &w).unwrap();
    let v = TangentVector::new(p, vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let pushed = pushforward(&h_map(&d), &v).unwrap();
    let expect: Vec<f64> = w.iter().map(|c| s.exp() * c).collect();
    assert!(max_diff(pushed.components(), &expect) < 1e-14);
    // identity leaves vectors alone
    let id = SmoothMap::identity(d.cylinder());
    let same = pushforward(&id, &v).unwrap();
    assert_eq!(same.components(), v.components());
}

#[test]
fn deck_generator_halves_for_log_two() {
    let d = data(&[1.0, 1.0], 2f64.ln());
    for l in &d.lambda {
        assert!((l - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }
    let g = DeckGroupElement::Deck(1).as_map(&d, ChartId::PuncturedCn).unwrap();
    let z = [0.3, -1.2, 2.0, 0.4];
    assert!(max_diff(&g.apply_coords(&z), &[0.15, -0.6, 1.0, 0.2]) < 1e-15);
}

#[test]
fn deck_pushforward_matches_finite_differences() {
    let d = HopfData::new(vec![1.0, 2.0], 0.4, vec![Complex64::new(0.6, 0.8), Complex64::new(0.0, 1.0)]).unwrap();
    let g = DeckGroupElement::Deck(2).as_map(&d, ChartId::PuncturedCn).unwrap();
    let mut s = Sampler::new(d.punctured(), 1);
    for x in s.points(10) {
        let v = s.gaussian(4);
        let fd = fd_jacobian(&g, &x, 1e-5);
        let approx: Vec<f64> = fd.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        assert!(max_diff(&g.push_coords(&x, &v), &approx) < 1e-6);
    }
}

#[test]
fn group_elements_check_their_chart_and_unitarity() {
    let d = data(&[1.0, 2.0], 0.5);
    assert!(matches!(
        DeckGroupElement::Flow(0.2).as_map(&d, ChartId::PuncturedCn),
        Err(lck::Error::ChartMismatch { .. })
    ));
    let not_unitary = DMatrix::from_diagonal_element(2, 2, Complex64::new(2.0, 0.0));
    assert!(DeckGroupElement::unitary(&d, not_unitary).is_err());
    // swaps coordinates with different weights: unitary but not commuting
    let swap = DMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), one(), one(), Complex64::new(0.0, 0.0)]);
    assert!(DeckGroupElement::unitary(&d, swap.clone()).is_err());
    let equal = data(&[1.0, 1.0], 0.5);
    let u = DeckGroupElement::unitary(&equal, swap).unwrap();
    let f = u.as_map(&equal, ChartId::Cylinder).unwrap();
    let y = f.apply_coords(&[0.3, 0.6, 0.0, 0.0, 0.8]);
    assert!(max_diff(&y, &[0.3, 0.0, 0.8, 0.6, 0.0]) < 1e-15);
    for zero in [DeckGroupElement::Flow(0.0), DeckGroupElement::Torus(0.0)] {
        let f = zero.as_map(&d, ChartId::Cylinder).unwrap();
        let x = [0.4, 0.0, 0.6, 0.8, 0.0];
        assert_eq!(f.apply_coords(&x), x.to_vec());
    }
}

#[test]
fn eta0_on_the_weighted_field_is_the_weighted_norm() {
    let d = data(&[1.0, 2.0], 0.5);
    let (eta0, a_field) = (build_eta0(2), build_a(&d));
    for p in Sampler::new(d.cylinder(), 2).points(100) {
        let psi = p[1] * p[1] + p[2] * p[2] + 2.0 * (p[3] * p[3] + p[4] * p[4]);
        assert!((eta0.evaluate(&p, &[&a_field.at(&p)]) - psi).abs() < 1e-12);
        // radial direction pairs to zero
        let radial = [0.0, p[1], p[2], p[3], p[4]];
        assert!(eta0.evaluate(&p, &[&radial]).abs() < 1e-15);
    }
}

#[test]
fn eta_a_is_eta0_divided_by_the_weighted_norm() {
    let d = data(&[1.0, 3.0], 0.5);
    let (eta0, eta) = (build_eta0(2), build_eta_a(&d));
    let mut s = Sampler::new(d.cylinder(), 3);
    for p in s.points(50) {
        let v = s.tangent(&p);
        let psi = p[1] * p[1] + p[2] * p[2] + 3.0 * (p[3] * p[3] + p[4] * p[4]);
        assert!((eta.evaluate(&p, &[&v]) * psi - eta0.evaluate(&p, &[&v])).abs() < 1e-11);
    }
    let equal = data(&[1.0, 1.0], 0.5);
    let eta_equal = build_eta_a(&equal);
    for p in Sampler::new(equal.cylinder(), 4).points(20) {
        assert!(max_diff(&eta_equal.values_at(&p), &eta0.values_at(&p)) < 1e-15);
    }
}

#[test]
fn complex_structure_rotates_the_flow_and_reeb_fields() {
    let h = HopfStructure::new(&data(&[1.0, 2.0], 0.5));
    for p in Sampler::new(h.chart, 5).points(30) {
        let (n, a) = (h.n_field.at(&p), h.a_field.at(&p));
        let minus_a: Vec<f64> = a.iter().map(|c| -c).collect();
        assert!(max_diff(&h.j_a.apply_at(&p, &n), &minus_a) < 1e-10);
        assert!(max_diff(&h.j_a.apply_at(&p, &a), &n) < 1e-10);
    }
}

#[test]
fn two_forms_agree_along_independent_paths() {
    let h = HopfStructure::new(&data(&[1.0, 2.0, 2.0], 0.5));
    let om = fundamental_form(&h.g_tilde, &h.j_a);
    for p in Sampler::new(h.chart, 6).points(100) {
        let t = p[0];
        // ω̃ = 2e^{−t}Ω_A on the same path
        let scaled: Vec<f64> = h.omega_a.values_at(&p).iter().map(|c| 2.0 * (-t).exp() * c).collect();
        assert!(max_diff(&h.omega_tilde.values_at(&p), &scaled) < 1e-12);
        // Ω_A = d(e^t η_A) against ½e^t ω(g̃, J_A), compared on tangent vectors
        let frame = h.chart.tangent_frame(&p);
        for u in &frame {
            for v in &frame {
                let a = h.omega_a.evaluate(&p, &[u, v]);
                let b = 0.5 * t.exp() * om.evaluate(&p, &[u, v]);
                assert!((a - b).abs() < 1e-8 * t.exp().max(1.0));
            }
        }
    }
}

#[test]
fn evaluations_on_the_flow_and_its_rotation() {
    let h = HopfStructure::new(&data(&[1.0, 3.0], 0.5));
    let dt = DifferentialForm::coordinate_differential(5, 0);
    let dt_eta = wedge(&dt, &h.eta_a).unwrap();
    let iota = interior_product(&h.xi, &h.omega_a).unwrap();
    let mut s = Sampler::new(h.chart, 7);
    for p in s.points(20) {
        let xi = h.xi.at(&p);
        let minus_j: Vec<f64> = h.j_a.apply_at(&p, &xi).iter().map(|c| -c).collect();
        // ½-alternation: (dt∧η)(ξ, −Jξ) = ½(dt(ξ)η(−Jξ) − dt(−Jξ)η(ξ))
        assert!((dt_eta.evaluate(&p, &[&xi, &minus_j]) - 0.5).abs() < 1e-12);
        // on the slice t = 0, ι_ξΩ_A = ½η_A
        let mut w = p.clone();
        w[0] = 0.0;
        let v = s.tangent(&w);
        let v_slice = [0.0, v[1], v[2], v[3], v[4]];
        assert!((iota.evaluate(&w, &[&v_slice]) - 0.5 * h.eta_a.evaluate(&w, &[&v_slice])).abs() < 1e-12);
    }
    // [∂_t, A] = 0
    let b = bracket(&h.n_field, &h.a_field).unwrap();
    for p in s.points(10) {
        assert!(b.at(&p).iter().all(|c| c.abs() < 1e-14));
    }
    assert!(ThreeForm::exterior_derivative(&h.theta).is_err());
    let dtheta = exterior_derivative(&h.theta).unwrap();
    assert!(dtheta.values_at(&[0.1, 1.0, 0.0, 0.0, 0.0]).iter().all(|c| *c == 0.0));
}

#[test]
fn torus_generator_is_a_killing_field() {
    let d = data(&[1.0, 2.0], 0.5);
    let h = HopfStructure::new(&d);
    let lie = lie_derivative_metric(&h.a_field, &h.g_tilde).unwrap();
    let eps = 1e-4;
    let pulled = |ang: f64| {
        let f = DeckGroupElement::Torus(ang).as_map(&d, ChartId::Cylinder).unwrap();
        pullback_metric(&f, &h.g_tilde).unwrap()
    };
    let (plus, minus) = (pulled(eps), pulled(-eps));
    let mut s = Sampler::new(h.chart, 8);
    for p in s.points(20) {
        let (u, v) = (s.tangent(&p), s.tangent(&p));
        let fd = (plus.evaluate(&p, &u, &v) - minus.evaluate(&p, &u, &v)) / (2.0 * eps);
        let exact = lie.evaluate(&p, &u, &v);
        assert!(exact.abs() < 1e-8, "{exact}");
        assert!((fd - exact).abs() < 1e-7, "{fd} {exact}");
    }
}

#[test]
fn equal_weights_give_a_squashed_hopf_metric() {
    // |z|⁻² on the complex line through z, 2|z|⁻² on its orthogonal complement
    let d = data(&[1.0, 1.0], 0.5);
    let h = HopfStructure::new(&d);
    let pushed = pullback_metric(&h_inverse_map(&d), &h.g_tilde).unwrap();
    let mut s = Sampler::new(d.punctured(), 9);
    for z in s.points(20) {
        let r2: f64 = z.iter().map(|c| c * c).sum();
        let u: Vec<f64> = z.iter().map(|c| c / r2.sqrt()).collect();
        let ju = [u[1], -u[0], u[3], -u[2]];
        let m = pushed.matrix_at(&z) * r2;
        for i in 0..4 {
            for k in 0..4 {
                let delta = if i == k { 2.0 } else { 0.0 };
                assert!((m[(i, k)] - (delta - u[i] * u[k] - ju[i] * ju[k])).abs() < 1e-9);
            }
        }
        // the ratio g(v, v)/|v|² is therefore not direction independent
        let (radial, transverse) = (pushed.evaluate(&z, &u, &u), {
            let v = [-u[2], u[3], u[0], -u[1]];
            pushed.evaluate(&z, &v, &v)
        });
        assert!((radial * r2 - 1.0).abs() < 1e-9);
        assert!((transverse * r2 - 2.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_and_its_inverse_round_trip(
        t in -3.0f64..3.0,
        w in prop::array::uniform4(-1.0f64..1.0),
        weights in prop::sample::select(vec![vec![1.0, 1.0], vec![1.0, 3.0], vec![0.5, 7.0]]),
    ) {
        let n = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let w: Vec<f64> = w.iter().map(|c| c / n).collect();
        let d = data(&weights, 0.5);
        let p = ChartPoint::cylinder(t, &w).unwrap();
        let back = map_h_inverse(&d, &map_h(&d, &p).unwrap()).unwrap();
        prop_assert!(max_diff(back.coords(), p.coords()) < 1e-10);
        let z = map_h(&d, &p).unwrap();
        let again = map_h(&d, &map_h_inverse(&d, &z).unwrap()).unwrap();
        let scale = z.coords().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        prop_assert!(max_diff(again.coords(), z.coords()) < 1e-12 * scale);
    }
}
