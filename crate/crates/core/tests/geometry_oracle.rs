use sqm_core::geometry::{check_complex_structure, GeometryData, GibbonsHawking};
use sqm_core::parse::parse;
use sqm_core::{CMat, Checker, Field, SampleSpec, Verdict, C64};

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("x{k}")).collect()
}

fn taub_nut() -> GibbonsHawking {
    GibbonsHawking { centers: vec![[0.0, 0.0, 0.0]], weights: vec![1.0], epsilon: 1.0, deformation: None }
}

// V dx.dx + (dt + A.dx)^2 / V at (0.5, 0.7, 0.2), evaluated with sympy/numpy
#[test]
fn gibbons_hawking_metric_matches_reference() {
    let geo = GeometryData::from_coframe(taub_nut().coframe()).unwrap();
    let p = [0.5, 0.7, 0.2, 0.3];
    let g = geo.metric.value_at(&p).unwrap();
    let want = [
        [2.3833845553887385, -0.1793625151743877, 0.0, 0.34316899736817646],
        [-0.1793625151743877, 2.2603931164120157, 0.0, -0.24512071240584035],
        [0.0, 0.0, 2.132277034144596, 0.0],
        [0.34316899736817646, -0.24512071240584035, 0.0, 0.46898221196720313],
    ];
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            assert!((g[(i, j)] - C64::new(*w, 0.0)).norm() < 1e-13, "g[{i}{j}] = {}, want {w}", g[(i, j)]);
        }
    }
    // √det g = V for this metric
    let vol = geo.volume().value_at(&p).unwrap()[(0, 0)];
    assert!((vol.re - 2.1322770341445962).abs() < 1e-13);
}

#[test]
fn gibbons_hawking_vector_potential_has_curl_grad_v() {
    let gh = taub_nut();
    let a = gh.vector_potential();
    let v = gh.potential();
    let p = [0.5, 0.7, 0.2];
    let d = |e: &sqm_core::Expr, k: usize| e.diff(k).eval(&p).unwrap();
    let curl = [d(&a[2], 1) - d(&a[1], 2), d(&a[0], 2) - d(&a[2], 0), d(&a[1], 0) - d(&a[0], 1)];
    for k in 0..3 {
        assert!((curl[k] - d(&v, k)).norm() < 1e-13, "component {k}");
    }
}

#[test]
fn one_center_selects_a_covariantly_constant_triple() {
    let spec = SampleSpec::new(vec![(0.3, 1.0), (0.3, 1.0), (-0.5, 0.5), (-1.0, 1.0)], 6, 3);
    let hk = taub_nut().build(&spec).unwrap();
    let sel = hk.selected.expect("one orientation is parallel");
    assert!(hk.candidates[sel].residual < 1e-12);
    let other = 1 - sel;
    assert!(hk.candidates[other].residual > 1e-3, "both orientations constant? {}", hk.candidates[other].residual);
}

// warped product e^{2u}(dx1^2 + dx2^2) + dx3^2 + dx4^2: √det g = e^{2u}
#[test]
fn warped_coframe_volume_and_structure() {
    let n = names(4);
    let u = parse("0.3*x1^2 + 0.2*x1*x2 - 0.1*x2^3", &n).unwrap();
    let z = sqm_core::Expr::real(0.0);
    let o = sqm_core::Expr::real(1.0);
    let eu = u.exp();
    let f = Field::exprs(
        4,
        4,
        vec![
            eu.clone(), z.clone(), z.clone(), z.clone(),
            z.clone(), eu, z.clone(), z.clone(),
            z.clone(), z.clone(), o.clone(), z.clone(),
            z.clone(), z.clone(), z, o,
        ],
    );
    let geo = GeometryData::from_coframe(f).unwrap();
    let vol = geo.volume().value_at(&[0.4, -0.3, 0.1, 0.2]).unwrap()[(0, 0)];
    assert!((vol.re - 1.0548515013430235).abs() < 1e-13);

    let mut j = CMat::zeros(4, 4);
    for (r, c, s) in [(0, 1, 1.0), (1, 0, -1.0), (2, 3, 1.0), (3, 2, -1.0)] {
        j[(r, c)] = C64::new(s, 0.0);
    }
    let i = geo.world_structure(&j, None);
    let ck = Checker::new(SampleSpec::cube(4, -0.5, 0.5, 8, 2)).unwrap();
    for r in check_complex_structure(&i, &geo, &ck, "I").unwrap() {
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.line());
    }
}

#[test]
fn levi_civita_connection_is_compatible_and_torsion_free() {
    let n = names(2);
    let om = ["0.3*x1*x2", "0.2*x1", "0.2*x1", "0.1*x2^2"].map(|s| parse(s, &n).unwrap());
    let omega = Field::exprs(2, 2, om.to_vec());
    let geo = GeometryData::from_omega(&omega, sqm_core::geometry::OmegaKind::parse("real_symmetric").unwrap()).unwrap();
    let pts = SampleSpec::cube(2, -0.5, 0.5, 10, 4).points().unwrap();
    for (what, fields) in [("compatibility", geo.metric_compatibility()), ("torsion", geo.torsion()), ("spin antisymmetry", geo.spin_connection_symmetric_part()), ("frame", vec![geo.frame_identity()])] {
        for f in fields {
            for p in &pts {
                let v = f.value_at(p).unwrap();
                assert!(v.iter().all(|x| x.norm() < 1e-12), "{what} at {p:?}");
            }
        }
    }
}
