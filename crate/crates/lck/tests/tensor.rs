use std::sync::Arc;

use lck::chart::{Chart, SmoothMap};
use lck::jet::Jet;
use lck::tensor::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

const D: usize = 4;

fn chart() -> Chart {
    Chart::punctured(2)
}

/// A 1-form with trigonometric-polynomial coefficients driven by `k`.
fn wavy_one_form(k: [f64; 4]) -> DifferentialForm {
    DifferentialForm::one_form(D, move |x| {
        vec![
            (x[1] * k[0]).sin() * x[2],
            x[0] * x[3] * k[1] + x[2],
            (x[0] * k[2] + x[3]).cos(),
            x[1] * x[1] * k[3] - x[0] * x[2],
        ]
    })
}

fn linear_map(m: DMatrix<f64>) -> SmoothMap {
    let c = chart();
    SmoothMap::new(
        c,
        c,
        Arc::new(move |x: &[Jet]| {
            (0..D)
                .map(|r| (0..D).map(|s| x[s] * m[(r, s)]).sum())
                .collect()
        }),
    )
}

fn bendy_map() -> SmoothMap {
    let c = chart();
    SmoothMap::new(
        c,
        c,
        Arc::new(|x: &[Jet]| {
            vec![
                x[0] + x[1] * x[2] * 0.3,
                x[1].sin() + x[3],
                x[2] * x[0].cos() - x[1],
                (x[3] * 0.5).exp() + x[0] * x[0],
            ]
        }),
    )
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn pullback_commutes_with_d() {
    // regression: derived forms once differentiated against the seed point
    let alpha = wavy_one_form([1.3, -0.4, 0.7, 2.0]);
    let f = bendy_map();
    let lhs = pullback(&f, &exterior_derivative(&alpha).unwrap()).unwrap();
    let rhs = exterior_derivative(&pullback(&f, &alpha).unwrap()).unwrap();
    for x in [[0.3, -0.2, 0.9, 0.1], [1.1, 0.5, -0.7, -0.4]] {
        assert!(max_diff(&lhs.values_at(&x), &rhs.values_at(&x)) < 1e-12);
    }
}

#[test]
fn pullback_of_pullback_is_pullback_of_composite() {
    let alpha = exterior_derivative(&wavy_one_form([0.2, 1.0, -1.5, 0.3])).unwrap();
    let (f, g) = (bendy_map(), linear_map(DMatrix::from_fn(D, D, |r, s| ((r * 3 + s) as f64).sin())));
    let twice = pullback(&g, &pullback(&f, &alpha).unwrap()).unwrap();
    let once = pullback(&f.compose(&g), &alpha).unwrap();
    let x = [0.4, 0.1, -0.3, 0.8];
    assert!(max_diff(&twice.values_at(&x), &once.values_at(&x)) < 1e-12);
}

#[test]
fn lie_derivative_matches_flow_difference_quotient() {
    // X = A x has flow exp(tA)
    let a = DMatrix::from_row_slice(D, D, &[0.0, 1.0, 0.2, 0.0, -1.0, 0.0, 0.0, 0.5, 0.3, 0.0, 0.1, 0.0, 0.0, -0.4, 0.0, 0.2]);
    let am = a.clone();
    let x_field = VectorField::new(D, move |x| {
        (0..D)
            .map(|r| (0..D).map(|s| x[s] * am[(r, s)]).sum())
            .collect()
    });
    let alpha = wavy_one_form([0.9, 0.3, -0.6, 1.1]);
    let p = [0.5, -0.3, 0.2, 0.7];
    let h = 1e-4;
    let at = |t: f64| pullback(&linear_map((&a * t).exp()), &alpha).unwrap().values_at(&p);
    let fd: Vec<f64> = at(h).iter().zip(at(-h)).map(|(u, v)| (u - v) / (2.0 * h)).collect();
    let direct = lie_derivative_oneform(&x_field, &alpha).unwrap().values_at(&p);
    let cartan = lie_derivative_oneform_cartan(&x_field, &alpha).unwrap().values_at(&p);
    assert!(max_diff(&fd, &direct) < 1e-7, "{fd:?} {direct:?}");
    assert!(max_diff(&direct, &cartan) < 1e-12);
}

/// Round metric on S² in polar coordinates, padded to the test dimension
/// by a flat factor.
fn sphere_metric() -> MetricField {
    MetricField::new(D, |x| {
        let mut m = vec![Jet::constant(0.0); D * D];
        m[0] = Jet::constant(1.0);
        let s = x[0].sin();
        m[D + 1] = s * s;
        m[2 * D + 2] = Jet::constant(1.0);
        m[3 * D + 3] = Jet::constant(1.0);
        m
    })
}

fn embed(th: f64, ph: f64) -> [f64; 3] {
    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]
}

#[test]
fn geodesics_of_the_round_sphere_are_great_circles() {
    let g = sphere_metric();
    let accel = |x: &[f64], v: &[f64]| -> Vec<f64> {
        let mut p = x.to_vec();
        p.extend([0.0, 0.0]);
        let gamma = christoffel(&g, &p).unwrap();
        (0..2)
            .map(|k| -(0..2).map(|i| (0..2).map(|j| gamma[k][i][j] * v[i] * v[j]).sum::<f64>()).sum::<f64>())
            .collect()
    };
    // RK4 on (θ, φ, θ', φ')
    let rhs = |s: &[f64]| -> Vec<f64> {
        let a = accel(&s[..2], &s[2..]);
        vec![s[2], s[3], a[0], a[1]]
    };
    let (th0, ph0): (f64, f64) = (1.0, 0.3);
    let (u, w) = (0.6, 0.8 / th0.sin()); // unit speed
    let mut s = vec![th0, ph0, u, w];
    let dt = 1e-3;
    let steps = 1500;
    for _ in 0..steps {
        let k1 = rhs(&s);
        let k2 = rhs(&s.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect::<Vec<_>>());
        let k3 = rhs(&s.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect::<Vec<_>>());
        let k4 = rhs(&s.iter().zip(&k3).map(|(a, b)| a + dt * b).collect::<Vec<_>>());
        for i in 0..4 {
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    // great circle through p with unit tangent e: cos(L) p + sin(L) e
    let p = embed(th0, ph0);
    let e_th = [th0.cos() * ph0.cos(), th0.cos() * ph0.sin(), -th0.sin()];
    let e_ph = [-ph0.sin(), ph0.cos(), 0.0];
    let len = dt * steps as f64;
    let expect: Vec<f64> = (0..3)
        .map(|i| len.cos() * p[i] + len.sin() * (u * e_th[i] + 0.8 * e_ph[i]))
        .collect();
    let got = embed(s[0], s[1]);
    assert!(max_diff(&got, &expect) < 1e-9, "{got:?} {expect:?}");
}

#[test]
fn christoffel_symbols_agree_with_koszul_by_finite_differences() {
    let g = MetricField::new(D, |x| {
        let mut m = vec![Jet::constant(0.0); D * D];
        for i in 0..D {
            m[i * D + i] = (x[i] * 0.3).exp() + 1.0;
        }
        let off = x[0] * x[1] * 0.2;
        m[1] = off;
        m[D] = off;
        let off2 = (x[2] + x[3]).sin() * 0.1;
        m[2 * D + 3] = off2;
        m[3 * D + 2] = off2;
        m
    });
    let x = [0.2, -0.5, 0.4, 0.9];
    let gamma = christoffel(&g, &x).unwrap();
    let h = 1e-5;
    let dg = |k: usize| -> DMatrix<f64> {
        let (mut p, mut m) = (x, x);
        p[k] += h;
        m[k] -= h;
        (g.matrix_at(&p) - g.matrix_at(&m)) / (2.0 * h)
    };
    let d: Vec<DMatrix<f64>> = (0..D).map(dg).collect();
    let inv = g.matrix_at(&x).try_inverse().unwrap();
    for k in 0..D {
        for i in 0..D {
            for j in 0..D {
                let fd: f64 = (0..D)
                    .map(|l| 0.5 * inv[(k, l)] * (d[i][(j, l)] + d[j][(i, l)] - d[l][(i, j)]))
                    .sum();
                assert!((fd - gamma[k][i][j]).abs() < 1e-8);
                assert!((gamma[k][i][j] - gamma[k][j][i]).abs() < 1e-14);
            }
        }
    }
    for slab in covariant_derivative_metric(&g, &x).unwrap() {
        for row in slab {
            for v in row {
                assert!(v.abs() < 1e-12);
            }
        }
    }
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0f64..2.0)
}

fn point() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.5f64..1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squared_vanishes(k in coeffs(), x in point(), u in point(), v in point(), w in point()) {
        let f = DifferentialForm::scalar(D, move |y| (y[0] * k[0] + y[1]).sin() * y[2] + y[3] * y[1] * k[1]);
        let ddf = exterior_derivative(&exterior_derivative(&f).unwrap()).unwrap();
        prop_assert!(ddf.values_at(&x).iter().all(|c| c.abs() < 1e-12));
        let da = exterior_derivative(&wavy_one_form(k)).unwrap();
        let dda = ThreeForm::exterior_derivative(&da).unwrap();
        prop_assert!(dda.evaluate(&x, &u, &v, &w).abs() < 1e-11);
    }

    #[test]
    fn wedge_and_two_forms_are_antisymmetric(k in coeffs(), x in point(), u in point(), v in point()) {
        let a = wavy_one_form(k);
        let b = wavy_one_form([k[3], k[2], k[1], k[0]]);
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        prop_assert!((ab.evaluate(&x, &[&u, &v]) + ab.evaluate(&x, &[&v, &u])).abs() < 1e-12);
        prop_assert!((ab.evaluate(&x, &[&u, &v]) + ba.evaluate(&x, &[&u, &v])).abs() < 1e-12);
        let da = exterior_derivative(&a).unwrap();
        prop_assert!(da.evaluate(&x, &[&u, &u]).abs() < 1e-14);
    }

    #[test]
    fn cartan_formula_holds(k in coeffs(), x in point()) {
        let xf = VectorField::new(D, move |y| vec![y[1] * k[0], y[2].sin(), y[0] * y[3], (y[1] * k[3]).cos()]);
        let alpha = wavy_one_form(k);
        let direct = lie_derivative_oneform(&xf, &alpha).unwrap().values_at(&x);
        let cartan = lie_derivative_oneform_cartan(&xf, &alpha).unwrap().values_at(&x);
        prop_assert!(max_diff(&direct, &cartan) < 1e-11);
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(k in coeffs(), x in point()) {
        let a = VectorField::new(D, move |y| vec![y[1] * k[0], y[2], y[0] * y[0], y[3] * k[1]]);
        let b = VectorField::new(D, move |y| vec![(y[3] * k[2]).sin(), y[0] * y[1], Jet::constant(1.0), y[2]]);
        let c = VectorField::new(D, move |y| vec![y[2], y[3] * k[3], y[1], y[0] * y[2]]);
        let ab = bracket(&a, &b).unwrap().at(&x);
        let ba = bracket(&b, &a).unwrap().at(&x);
        prop_assert!(ab.iter().zip(&ba).all(|(p, q)| (p + q).abs() < 1e-12));
        // Jacobi only needs first derivatives of brackets, available from 2-jets
        let j1 = bracket(&a, &bracket(&b, &c).unwrap()).unwrap().at(&x);
        let j2 = bracket(&b, &bracket(&c, &a).unwrap()).unwrap().at(&x);
        let j3 = bracket(&c, &bracket(&a, &b).unwrap()).unwrap().at(&x);
        for i in 0..D {
            prop_assert!((j1[i] + j2[i] + j3[i]).abs() < 1e-10);
        }
    }
}
