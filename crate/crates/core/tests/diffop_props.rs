use std::sync::Arc;

use proptest::prelude::*;
use sqm_core::clifford::complex_fermions;
use sqm_core::verify::jacobi;
use sqm_core::{CMat, DiffOp, Expr, Field, SampleSpec, Space, C64};

fn space() -> Arc<Space> {
    Space::new(vec!["x".into(), "y".into()], complex_fermions(2, 1).unwrap())
}

/// `Σ_k (a_k + b_k x + c_k y²) · M_k · p_k + d · N` with `M_k`, `N` built
/// from the fermion generators.
fn op(space: &Arc<Space>, c: &[f64; 8], odd: bool) -> DiffOp {
    let rep = &space.rep;
    let e = |k: usize| Expr::coord(k);
    let mat = |k: usize| -> CMat {
        if odd {
            rep.psi(k) * C64::new(c[6], 0.3) + rep.psibar(1 - k) * C64::new(0.0, c[7])
        } else {
            rep.psi(k) * rep.psibar(1 - k) * C64::new(c[6], 0.0) + rep.identity() * C64::new(c[7], 0.0)
        }
    };
    let mut out = DiffOp::zero(space);
    for k in 0..2 {
        let coef = Expr::real(c[3 * k]) + e(0) * c[3 * k + 1] + e(1).powi(2) * c[3 * k + 2];
        let f = Field::expr(coef).mul(&Field::constant(mat(k)));
        out = out.add(&DiffOp::momentum(space, k).left_mul(&f)).unwrap();
    }
    let pot = Field::expr(e(0) * e(1)).mul(&Field::constant(mat(0) * mat(1)));
    out.add(&DiffOp::mult(space, pot)).unwrap()
}

fn vanishes(d: &DiffOp) -> f64 {
    let spec = SampleSpec::cube(2, -0.7, 0.7, 4, 1);
    d.residual(&spec).unwrap().relative()
}

fn coeffs() -> impl Strategy<Value = [f64; 8]> {
    prop::array::uniform8(-1.0f64..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn graded_jacobi_identity(a in coeffs(), b in coeffs(), c in coeffs()) {
        let s = space();
        let (x, y, z) = (op(&s, &a, true), op(&s, &b, true), op(&s, &c, false));
        prop_assert!(vanishes(&jacobi((&x, true), (&y, true), (&z, false)).unwrap()) < 1e-12);
        prop_assert!(vanishes(&jacobi((&x, true), (&y, true), (&x, true)).unwrap()) < 1e-12);
    }

    #[test]
    fn brackets_are_graded_antisymmetric(a in coeffs(), b in coeffs()) {
        let s = space();
        let (x, y) = (op(&s, &a, true), op(&s, &b, false));
        prop_assert!(vanishes(&x.anticommutator(&x).unwrap().sub(&x.compose(&x).unwrap().scale_re(2.0)).unwrap()) < 1e-12);
        prop_assert!(vanishes(&x.commutator(&y).unwrap().add(&y.commutator(&x).unwrap()).unwrap()) < 1e-12);
    }

    #[test]
    fn dagger_is_an_antihomomorphism(a in coeffs(), b in coeffs()) {
        let s = space();
        let (x, y) = (op(&s, &a, true), op(&s, &b, false));
        prop_assert!(vanishes(&x.naive_dagger().naive_dagger().sub(&x).unwrap()) < 1e-12);
        let lhs = x.compose(&y).unwrap().naive_dagger();
        let rhs = y.naive_dagger().compose(&x.naive_dagger()).unwrap();
        prop_assert!(vanishes(&lhs.sub(&rhs).unwrap()) < 1e-12);
    }

    #[test]
    fn similarity_is_an_algebra_map(a in coeffs(), b in coeffs(), w in -0.5f64..0.5) {
        let s = space();
        let (x, y) = (op(&s, &a, true), op(&s, &b, false));
        let r = Field::expr(Expr::coord(0).powi(2) * w + Expr::coord(1) * 0.3).mul(&Field::constant(s.rep.fermion_number()));
        let lhs = x.compose(&y).unwrap().similarity(&r);
        let rhs = x.similarity(&r).compose(&y.similarity(&r)).unwrap();
        prop_assert!(vanishes(&lhs.sub(&rhs).unwrap()) < 1e-12);
    }
}

#[test]
fn composition_of_momenta_matches_hand_expansion() {
    // [p_x, f(x)] = -i f'(x) for f = x^3
    let s = space();
    let f = Field::expr(Expr::coord(0).powi(3));
    let comm = DiffOp::momentum(&s, 0).commutator(&DiffOp::mult(&s, f)).unwrap();
    let want = DiffOp::mult(&s, Field::expr(Expr::coord(0).powi(2) * 3.0)).scale(C64::new(0.0, -1.0));
    assert!(vanishes(&comm.sub(&want).unwrap()) < 1e-14);
}

#[test]
fn measure_adjoint_differs_from_naive_by_log_derivative() {
    // (ψ p_x)^†_μ = ψ̄ p_x − i ∂_x ln μ ψ̄ for real μ
    let s = space();
    let q = DiffOp::momentum(&s, 0).left_mul(&s.rep.psi_field(0));
    let mu = Field::expr((Expr::coord(0) * 0.4).exp());
    let adj = q.adjoint_with_measure(&mu);
    let want = q.naive_dagger().add(&DiffOp::mult(&s, s.rep.psibar_field(0)).scale(C64::new(0.0, -0.4))).unwrap();
    assert!(vanishes(&adj.sub(&want).unwrap()) < 1e-14);
}
