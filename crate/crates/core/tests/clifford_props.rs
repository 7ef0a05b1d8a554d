use sqm_core::clifford::{complex_fermions, const_tensor, epsilon3, hermitian_fermions, pauli, thooft, TensorName};
use sqm_core::jet::max_abs;
use sqm_core::CMat;

#[test]
fn canonical_relations_hold_exactly() {
    for d in 1..=4 {
        let rep = complex_fermions(d, 1).unwrap();
        assert_eq!(rep.dim(), 1 << d);
        assert_eq!(rep.relation_residual(), 0.0, "d = {d}");
        // fermion number spectrum 0..=d with binomial multiplicities
        let n = rep.fermion_number();
        let mut counts = vec![0usize; d + 1];
        for k in 0..rep.dim() {
            counts[n[(k, k)].re.round() as usize] += 1;
        }
        let binom: Vec<usize> = (0..=d).map(|k| (0..k).fold(1, |acc, i| acc * (d - i) / (i + 1))).collect();
        assert_eq!(counts, binom);
    }
    for big_d in [2, 4, 8] {
        let rep = hermitian_fermions(big_d).unwrap();
        assert!(rep.relation_residual() < 1e-15);
        assert!(rep.gamma_relations_exact());
    }
}

#[test]
fn colored_fermions_commute_with_color() {
    let rep = complex_fermions(2, 2).unwrap();
    let t = pauli().map(|s| rep.color_op(&s));
    for a in 0..2 {
        for ta in &t {
            assert!(max_abs(&(rep.psi(a) * ta - ta * rep.psi(a))) < 1e-15);
        }
    }
}

// octonionic structure constants: Γ^a real antisymmetric with {Γ^a, Γ^b} = −2δ^{ab}
#[test]
fn seven_dimensional_gammas_form_a_clifford_algebra() {
    let g = const_tensor(TensorName::Gamma7);
    assert_eq!(g.mats.len(), 7);
    let id = CMat::identity(8, 8);
    for a in 0..7 {
        assert!(g.mats[a].iter().all(|z| z.im == 0.0));
        assert!(max_abs(&(&g.mats[a] + g.mats[a].transpose())) == 0.0);
        for b in 0..7 {
            let ac = &g.mats[a] * &g.mats[b] + &g.mats[b] * &g.mats[a];
            let want = if a == b { &id * sqm_core::C64::new(-2.0, 0.0) } else { CMat::zeros(8, 8) };
            assert!(max_abs(&(ac - want)) < 1e-15, "a = {a}, b = {b}");
        }
    }
}

#[test]
fn thooft_symbols_are_self_dual_and_close_su2() {
    let eta = |a: usize, bar: bool| CMat::from_fn(4, 4, |m, n| sqm_core::C64::new(thooft(a, m, n, bar), 0.0));
    for bar in [false, true] {
        for a in 0..3 {
            for b in 0..3 {
                // [η^a, η^b] = −2 ε^{abc} η^c
                let comm = eta(a, bar) * eta(b, bar) - eta(b, bar) * eta(a, bar);
                let mut want = CMat::zeros(4, 4);
                for c in 0..3 {
                    want += eta(c, bar) * sqm_core::C64::new(-2.0 * epsilon3(a, b, c), 0.0);
                }
                assert!(max_abs(&(comm - want)) < 1e-15, "bar = {bar}, a = {a}, b = {b}");
                // self-dual and anti-self-dual families commute
                let mixed = eta(a, false) * eta(b, true) - eta(b, true) * eta(a, false);
                assert!(max_abs(&mixed) < 1e-15);
            }
        }
    }
}
