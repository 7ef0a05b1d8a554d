use proptest::prelude::*;
use sqm_core::jet::JetLayout;
use sqm_core::parse::parse;
use sqm_core::{Expr, MultiIndex};

fn xy() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + b.abs())
}

// reference values from sympy at (0.37, -0.81)
#[test]
fn second_order_jet_matches_symbolic_reference() {
    let f = parse("sin(x*y) + exp(x)*y^2 - log(1 + x^2)/(2 + y) + sqrt(3 + x*y) + (x - y)^5/7", &xy()).unwrap();
    let layout = JetLayout::get(2, 2);
    let j = f.jet(&[0.37, -0.81], &layout).unwrap();
    let d = |a: u8, b: u8| j.partial(&MultiIndex::from_slice(&[a, b])).unwrap();
    let want = [
        ((0, 0), 2.516887035671639),
        ((1, 0), 0.7673754245704814),
        ((0, 1), -3.1734782240259722),
        ((2, 0), 4.678697620932969),
        ((1, 1), -5.391967338943226),
        ((0, 2), 7.470274072842711),
    ];
    for ((a, b), w) in want {
        let got = d(a, b);
        assert!(close(got.re, w, 1e-13) && got.im.abs() < 1e-13, "∂({a},{b}) = {got}, want {w}");
    }
}

#[test]
fn symbolic_derivative_agrees_with_jet() {
    let f = parse("x^3*y - cos(y)*exp(2*x) + sqrt(4 + y^2)", &xy()).unwrap();
    let layout = JetLayout::get(2, 2);
    let p = [0.2, 0.6];
    let j = f.jet(&p, &layout).unwrap();
    let fx = f.diff(0).eval(&p).unwrap();
    let fxy = f.diff(0).diff(1).eval(&p).unwrap();
    assert!((j.partial(&MultiIndex::unit(2, 0)).unwrap() - fx).norm() < 1e-13);
    assert!((j.partial(&MultiIndex::from_slice(&[1, 1])).unwrap() - fxy).norm() < 1e-13);
}

#[test]
fn complex_constants_and_conjugation_free_parsing() {
    let f = parse("(1 + 2*i)*x - i*y^2", &xy()).unwrap();
    let v = f.eval(&[1.0, 2.0]).unwrap();
    assert!((v.re - 1.0).abs() < 1e-15 && (v.im - (2.0 - 4.0)).abs() < 1e-15);
}

#[test]
fn parse_errors_are_positioned() {
    let e = parse("x + * y", &xy()).unwrap_err();
    assert!(e.to_string().contains('4') || e.to_string().contains("column"), "{e}");
    assert!(parse("z + 1", &xy()).is_err());
    assert!(parse("frob(x)", &xy()).is_err());
}

#[test]
fn domain_errors_surface_at_evaluation() {
    let f = parse("log(x)", &xy()).unwrap();
    assert!(f.eval(&[0.0, 1.0]).is_err() || !f.eval(&[0.0, 1.0]).unwrap().re.is_finite());
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-2.0f64..2.0).prop_map(Expr::real),
        Just(Expr::coord(0)),
        Just(Expr::coord(1)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| (a * 0.3).exp()),
            (inner, 1i64..4).prop_map(|(a, n)| a.powi(n)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn jets_match_central_differences(f in arb_expr(), x in -0.8f64..0.8, y in -0.8f64..0.8) {
        let layout = JetLayout::get(2, 2);
        let j = f.jet(&[x, y], &layout).unwrap();
        let h = 1e-5;
        for k in 0..2 {
            let mut p = [x, y];
            let mut m = [x, y];
            p[k] += h;
            m[k] -= h;
            let fd = (f.eval(&p).unwrap() - f.eval(&m).unwrap()) / (2.0 * h);
            let ad = j.partial(&MultiIndex::unit(2, k)).unwrap_or_default();
            prop_assert!((ad - fd).norm() <= 1e-6 * (1.0 + fd.norm()), "first {k}: {ad} vs {fd}");
            // second derivative from differences of the exact first derivative
            let dk = f.diff(k);
            for l in 0..2 {
                let mut p = [x, y];
                let mut m = [x, y];
                p[l] += h;
                m[l] -= h;
                let fd2 = (dk.eval(&p).unwrap() - dk.eval(&m).unwrap()) / (2.0 * h);
                let ad2 = j.partial(&MultiIndex::unit(2, k).add(&MultiIndex::unit(2, l))).unwrap_or_default();
                prop_assert!((ad2 - fd2).norm() <= 1e-6 * (1.0 + fd2.norm()), "second {k}{l}: {ad2} vs {fd2}");
            }
        }
    }
}
