use sqm_core::parse::parse;
use sqm_core::sample::Exclusion;
use sqm_core::verify::{check_expected, check_n2};
use sqm_core::zoo::{self, DeRhamOptions};
use sqm_core::{Checker, Execution, Field, MultiIndex, SampleSpec, Verdict};

fn x() -> Vec<String> {
    vec!["x".into()]
}

// H = ½[p² + W'² + W''(ψ̄ψ − ψψ̄)], W = x³ − x at x = 0.37: potential ½(W'² ± W'')
#[test]
fn witten_potential_matches_closed_form() {
    let m = zoo::witten(&parse("x^3 - x", &x()).unwrap()).unwrap();
    let v = m.hamiltonian.coefficient(&MultiIndex::zero(1)).unwrap().value_at(&[0.37]).unwrap();
    let mut eig: Vec<f64> = (0..2).map(|k| v[(k, k)].re).collect();
    eig.sort_by(f64::total_cmp);
    assert!(v[(0, 1)].norm() < 1e-15 && v[(1, 0)].norm() < 1e-15);
    assert!((eig[0] - (-0.936362755)).abs() < 1e-12, "{eig:?}");
    assert!((eig[1] - 1.283637245).abs() < 1e-12, "{eig:?}");
    // no first-order part; the second-order part is the same as the free particle
    assert!(m.hamiltonian.coefficient(&MultiIndex::unit(1, 0)).is_none_or(|f| f.value_at(&[0.37]).unwrap().iter().all(|z| z.norm() < 1e-14)));
    let free = zoo::free_real(1).unwrap();
    let two = MultiIndex::from_slice(&[2]);
    let a = m.hamiltonian.coefficient(&two).unwrap().value_at(&[0.37]).unwrap();
    let b = free.hamiltonian.coefficient(&two).unwrap().value_at(&[0.37]).unwrap();
    assert!((a - b).iter().all(|z| z.norm() < 1e-15));
}

#[test]
fn sequential_and_parallel_reports_are_identical() {
    let n: Vec<String> = (1..=2).map(|k| format!("x{k}")).collect();
    let om = ["0.3*x1*x2", "0.2*x1", "0.2*x1", "0.1*x2^2"].map(|s| parse(s, &n).unwrap());
    let m = zoo::de_rham(&Field::exprs(2, 2, om.to_vec()), &DeRhamOptions::default()).unwrap();
    let spec = m.sample_spec(12, 9).unwrap();
    let seq = Checker::new(spec.clone()).unwrap().with_exec(Execution::Sequential);
    let par = Checker::new(spec).unwrap().with_exec(Execution::Parallel);
    let a = serde_json::to_string(&check_expected(&m, &seq).unwrap()).unwrap();
    let b = serde_json::to_string(&check_expected(&m, &par).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sampling_is_seeded_boxed_and_respects_exclusions() {
    let names = vec!["a".to_string(), "b".to_string()];
    let spec = SampleSpec::new(vec![(0.3, 1.5), (-1.2, 1.2)], 50, 4).exclude(Exclusion::parse("a != b", &names).unwrap());
    let p1 = spec.points().unwrap();
    let p2 = spec.points().unwrap();
    assert_eq!(p1, p2);
    assert_eq!(p1.len(), 50);
    for p in &p1 {
        assert!((0.3..=1.5).contains(&p[0]) && (-1.2..=1.2).contains(&p[1]));
        assert!((p[0] - p[1]).abs() > 1e-6);
    }
    let other = SampleSpec::new(vec![(0.3, 1.5), (-1.2, 1.2)], 50, 5).points().unwrap();
    assert_ne!(p1, other);
}

#[test]
fn a_wrong_superpotential_sign_in_h_is_detected() {
    // supercharges of one model against the Hamiltonian of another
    let a = zoo::witten(&parse("x^3 - x", &x()).unwrap()).unwrap();
    let mut b = zoo::witten(&parse("x^3 + x", &x()).unwrap()).unwrap();
    b.hamiltonian = a.hamiltonian.clone();
    let ck = Checker::new(b.sample_spec(10, 1).unwrap()).unwrap();
    let reps = check_n2(&b, &ck).unwrap();
    let r = reps.iter().find(|r| r.name == "{Qbar,Q}-2H").unwrap();
    assert_eq!(r.verdict, Verdict::Fail, "{}", r.line());
    assert!(reps.iter().filter(|r| r.name != "{Qbar,Q}-2H").all(|r| r.verdict == Verdict::Pass));
}

#[test]
fn instanton_at_infinite_size_is_free() {
    let m = zoo::instanton(f64::INFINITY).unwrap();
    let free = zoo::free_real(4).unwrap();
    let p = [0.1, -0.2, 0.3, 0.4];
    for (k, f) in m.hamiltonian.terms() {
        let v = f.value_at(&p).unwrap();
        if k.order() < 2 {
            assert!(v.iter().all(|z| z.norm() < 1e-14), "order {} term nonzero", k.order());
        } else {
            let w = free.hamiltonian.coefficient(k).unwrap().value_at(&p).unwrap();
            assert!((v[(0, 0)] - w[(0, 0)]).norm() < 1e-15);
        }
    }
}

#[test]
fn every_constructor_meets_its_declared_algebra() {
    let cases: Vec<zoo::Model> = vec![
        zoo::witten(&parse("x^4/4 - x", &x()).unwrap()).unwrap(),
        zoo::free_complex(2).unwrap(),
        zoo::free_real(3).unwrap(),
        zoo::okt_flat().unwrap(),
        zoo::instanton(0.7).unwrap(),
        zoo::gauge_sym3().unwrap(),
        zoo::wz_modes(&[[0, 0, 0], [1, 0, 0]]).unwrap(),
    ];
    for m in cases {
        let ck = Checker::new(m.sample_spec(5, 11).unwrap()).unwrap();
        for r in check_expected(&m, &ck).unwrap() {
            assert!(r.verdict.ok(true), "{}: {}", m.name, r.line());
        }
    }
}

#[test]
fn constructors_reject_bad_parameters() {
    assert!(zoo::wz_modes(&[]).is_err());
    assert!(zoo::wz_modes(&[[0, 0, 0]; 5]).is_err());
    assert!(zoo::wz_interacting(&parse("x", &["a".into(), "x".into()]).unwrap()).is_err());
}
