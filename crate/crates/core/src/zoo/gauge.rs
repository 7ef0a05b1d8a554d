//! Instanton background, SU(2) gauge quantum mechanics and its resolved form.

use super::*;
use crate::clifford::{complex_fermions, const_tensor, epsilon3, pauli, thooft, TensorName};
use crate::jet::CMat;

/// `N = 4` model in a self-dual instanton field:
/// `Q_α = (σ_μ ψ̄)_α (p_μ − 𝒜_μ)`, `𝒜_μ = 2η^a_{μν} x_ν t^a / (x² + ρ²)`.
/// `ρ = ∞` gives the free model.
pub fn instanton(rho: f64) -> Result<Model> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::Invalid("instanton size must be positive".into()));
    }
    let rep = complex_fermions(2, 2)?;
    let space = Space::new(indexed("x", 4), rep);
    let rep = &space.rep;
    let t: Vec<CMat> = pauli().iter().map(|s| rep.color_op(&(s * c(0.5, 0.0)))).collect();
    let sig = const_tensor(TensorName::SigmaEuclid).mats;
    let x: Vec<Expr> = (0..4).map(Expr::coord).collect();
    let r2 = x.iter().fold(Expr::real(rho * rho), |acc, xi| acc + xi.powi(2));
    let a_mu: Vec<Field> = (0..4)
        .map(|mu| {
            if rho.is_infinite() {
                return Field::zero(1, 1);
            }
            let parts = (0..3)
                .filter_map(|a| {
                    let num = (0..4).filter(|&nu| thooft(a, mu, nu, false) != 0.0).fold(Expr::real(0.0), |acc, nu| acc + x[nu].clone() * (2.0 * thooft(a, mu, nu, false)));
                    if num.is_zero() {
                        return None;
                    }
                    Some((one(), Field::expr(num / r2.clone()).mul(&Field::constant(t[a].clone()))))
                })
                .collect();
            Field::sum(parts)
        })
        .collect();
    let cov: Vec<DiffOp> = (0..4).map(|mu| DiffOp::momentum(&space, mu).sub(&DiffOp::mult(&space, a_mu[mu].clone()))).collect::<Result<_>>()?;
    let mut m = Model::new("instanton", space.clone(), Algebra::Extended);
    m.domain = vec![(-1.5, 1.5); 4];
    m.step(format!("A_μ = 2η^a_μν x_ν t^a/(x² + ρ²), ρ = {rho}"));
    m.step("Q_α = (σ_μ ψ̄)_α (p_μ - A_μ), Qbar^α = Q_α†");
    let mut qs = Vec::new();
    for al in 0..2 {
        let mut ops = Vec::new();
        for (mu, s) in sig.iter().enumerate() {
            let mut f = CMat::zeros(rep.dim(), rep.dim());
            for be in 0..2 {
                f += rep.psibar(be) * s[(al, be)];
            }
            ops.push(cov[mu].left_mul(&Field::constant(f)));
        }
        let q = sum_ops(&space, &ops)?;
        qs.push(q.clone());
        m.charge(&format!("Q{}", al + 1), q.clone(), q.naive_dagger());
    }
    // L^a = 2t^a − iη^a_μν (x_μ ∂_ν + ¼ ψ σ†_μ σ_ν ψ̄)
    let mut ls = Vec::new();
    for (a, ta) in t.iter().enumerate() {
        let mut parts = vec![DiffOp::mult(&space, Field::constant(ta * c(2.0, 0.0)))];
        for mu in 0..4 {
            for nu in 0..4 {
                let e = thooft(a, mu, nu, false);
                if e == 0.0 {
                    continue;
                }
                let orb = DiffOp::partial(&space, nu).left_mul(&Field::expr(x[mu].clone()));
                let spin = rep.bilinear_const(&(sig[mu].adjoint() * &sig[nu]), Ordering::PsiPsibar) * c(0.25, 0.0);
                let op = orb.add(&DiffOp::mult(&space, Field::constant(spin)))?;
                parts.push(op.scale(c(0.0, -e)));
            }
        }
        let l = sum_ops(&space, &parts)?;
        m.extras.push((format!("L{}", a + 1), l.clone()));
        ls.push(l);
    }
    let mut m = m.finish()?;
    for (a, l) in ls.iter().enumerate() {
        for (al, q) in qs.iter().enumerate() {
            m.identity(&format!("[L{},Q{}]", a + 1, al + 1), l.commutator(q)?, None);
        }
        let lh = l.commutator(&m.hamiltonian)?;
        m.identity(&format!("[L{},H]", a + 1), lh, None);
        for b in a + 1..3 {
            let k = 3 - a - b;
            let rel = l.commutator(&ls[b])?.sub(&ls[k].scale(c(0.0, 2.0 * epsilon3(a, b, k))))?;
            m.identity(&format!("[L{},L{}]-2ieL", a + 1, b + 1), rel, None);
        }
    }
    Ok(m)
}

/// Coordinate index of `A^a_j` (0-based `a`, `j`).
fn aj(a: usize, j: usize) -> usize {
    2 * a + j
}

/// Dimensionally reduced SU(2) SYM in 2+1 dimensions:
/// `Q = Π₋^a ψ^a + i B^a ψ̄^a`, `B^a = ε^{abc} A^b_1 A^c_2`, Gauss law `Ĝ^a`.
pub fn gauge_sym3() -> Result<Model> {
    let names: Vec<String> = (1..=3).flat_map(|a| (1..=2).map(move |j| format!("A{a}{j}"))).collect();
    let space = Space::new(names, complex_fermions(3, 1)?);
    let rep = &space.rep;
    let x = |a: usize, j: usize| Expr::coord(aj(a, j));
    let p = |a: usize, j: usize| DiffOp::momentum(&space, aj(a, j));
    let mut b_field = Vec::new();
    for a in 0..3 {
        let mut e = Expr::real(0.0);
        for b in 0..3 {
            for k in 0..3 {
                let s = epsilon3(a, b, k);
                if s != 0.0 {
                    e = e + x(b, 0) * x(k, 1) * s;
                }
            }
        }
        b_field.push(e);
    }
    let mut qparts = Vec::new();
    for a in 0..3 {
        let pim = DiffOp::lin(&[(one(), &p(a, 0)), (c(0.0, -1.0), &p(a, 1))])?;
        qparts.push(pim.left_mul(&rep.psi_field(a)));
        qparts.push(DiffOp::mult(&space, Field::expr(b_field[a].clone()).mul(&rep.psibar_field(a))).scale(c(0.0, 1.0)));
    }
    let q = sum_ops(&space, &qparts)?;
    let mut m = Model::new("gauge_sym3", space.clone(), Algebra::Gauge);
    m.step("Q = Π₋^a ψ^a + i B^a ψ̄^a, B^a = ε^abc A^b_1 A^c_2; Qbar = Q†");
    m.step("H = {Qbar, Q}/2");
    m.charge("Q", q.clone(), q.naive_dagger());
    // Ĝ^a = ε^{abc}(A^b_j Π^c_j − i ψ^b ψ̄^c)
    let mut gs = Vec::new();
    for a in 0..3 {
        let mut parts = Vec::new();
        for b in 0..3 {
            for k in 0..3 {
                let s = epsilon3(a, b, k);
                if s == 0.0 {
                    continue;
                }
                for j in 0..2 {
                    parts.push(p(k, j).left_mul(&Field::expr(x(b, j))).scale_re(s));
                }
                let ff = rep.psi(b) * rep.psibar(k) * c(0.0, -s);
                parts.push(DiffOp::mult(&space, Field::constant(ff)));
            }
        }
        let g = sum_ops(&space, &parts)?;
        m.constraints.push((format!("G{}", a + 1), g.clone()));
        gs.push(g);
    }
    let mut m = m.finish()?;
    // Q² = A₋^a Ĝ^a
    let am: Vec<Field> = (0..3).map(|a| Field::expr(x(a, 0) - x(a, 1) * Expr::imag_unit())).collect();
    let ap: Vec<Expr> = (0..3).map(|a| x(a, 0) + x(a, 1) * Expr::imag_unit()).collect();
    let ag: Vec<DiffOp> = (0..3).map(|a| gs[a].left_mul(&am[a])).collect();
    let q2 = q.compose(&q)?.sub(&sum_ops(&space, &ag)?)?;
    m.identity("Q^2-A_-G", q2, None);
    for a in 0..3 {
        let gh = gs[a].commutator(&m.hamiltonian)?;
        m.identity(&format!("[G{},H]", a + 1), gh, None);
        for b in a + 1..3 {
            let k = 3 - a - b;
            let rel = gs[a].commutator(&gs[b])?.sub(&gs[k].scale(c(0.0, epsilon3(a, b, k))))?;
            m.identity(&format!("[G{},G{}]-ieG", a + 1, b + 1), rel, None);
        }
        let aa = (0..3).flat_map(|b| (0..2).map(move |j| (b, j))).fold(Expr::real(0.0), |acc, (b, j)| acc + x(b, j).powi(2));
        let inv = gs[a].commutator(&DiffOp::mult(&space, Field::expr(aa)))?;
        m.identity(&format!("[G{},A.A]", a + 1), inv, None);
    }
    // H as written out: ½Π² + ¼[(A·A)² − (A_j·A_k)²] + (iε/2)[ψ̄ψ̄A₊ + ψψA₋]
    let mut hparts = Vec::new();
    for a in 0..3 {
        for j in 0..2 {
            hparts.push(p(a, j).compose(&p(a, j))?.scale_re(0.5));
        }
    }
    let dot = |j: usize, k: usize| (0..3).fold(Expr::real(0.0), |acc, a| acc + x(a, j) * x(a, k));
    let aa = dot(0, 0) + dot(1, 1);
    let mut quartic = aa.clone() * aa;
    for j in 0..2 {
        for k in 0..2 {
            quartic = quartic - dot(j, k) * dot(j, k);
        }
    }
    hparts.push(DiffOp::mult(&space, Field::expr(quartic * 0.25)));
    for a in 0..3 {
        for b in 0..3 {
            for k in 0..3 {
                let s = epsilon3(a, b, k);
                if s == 0.0 {
                    continue;
                }
                let t1 = Field::expr(ap[k].clone()).mul(&Field::constant(rep.psibar(a) * rep.psibar(b)));
                let t2 = am[k].mul(&Field::constant(rep.psi(a) * rep.psi(b)));
                hparts.push(DiffOp::mult(&space, t1.add(&t2)).scale(c(0.0, 0.5 * s)));
            }
        }
    }
    let h49 = sum_ops(&space, &hparts)?;
    let hd = m.hamiltonian.sub(&h49)?;
    m.identity("H-H(written)", hd, None);
    m.extras.push(("H_written".into(), h49));
    m.identity_expect("Q^2", q.compose(&q)?, None, Expect::Violated);
    Ok(m)
}

/// Resolved (gauge-invariant) supercharges on `(a, b, α)` assembled as
/// printed; all checks are exploratory except the α-independence of `H`.
pub fn gauge_sym3_resolved(g0: f64) -> Result<Model> {
    if !(g0 > 0.0) {
        return Err(Error::Invalid("g0 must be positive".into()));
    }
    let space = Space::new(vec!["a".into(), "b".into(), "alpha".into()], complex_fermions(3, 1)?);
    let rep = &space.rep;
    // J^a = i ε^{abc} ψ^b ψ̄^c
    let jm: Vec<CMat> = (0..3)
        .map(|a| {
            let mut m = CMat::zeros(rep.dim(), rep.dim());
            for b in 0..3 {
                for k in 0..3 {
                    let s = epsilon3(a, b, k);
                    if s != 0.0 {
                        m += rep.psi(b) * rep.psibar(k) * c(0.0, s);
                    }
                }
            }
            m
        })
        .collect();
    let (ea, eb, al) = (Expr::coord(0), Expr::coord(1), Expr::coord(2));
    let den = (ea.powi(2) - eb.powi(2)).powi(-1);
    let (pa, pb, pal) = (DiffOp::momentum(&space, 0), DiffOp::momentum(&space, 1), DiffOp::momentum(&space, 2));
    let f = |e: Expr| Field::expr(e);
    let fj = |e: Expr, k: usize| Field::expr(e).mul(&Field::constant(jm[k].clone()));
    let build = |sign: f64, bar: bool| -> Result<DiffOp> {
        // sign = −1 for Q, +1 for Q̄ (the i's flip under conjugation)
        let i = c(0.0, 1.0);
        let (f1, f2, f3) = if bar { (rep.psibar_field(0), rep.psibar_field(1), rep.psibar_field(2)) } else { (rep.psi_field(0), rep.psi_field(1), rep.psi_field(2)) };
        let t1 = DiffOp::lin(&[
            (one(), &pa),
            (i * sign, &pal.left_mul(&f(ea.clone() * den.clone()))),
            (i * sign, &DiffOp::mult(&space, fj(eb.clone() * den.clone(), 2))),
        ])?
        .left_mul(&f1);
        let t2 = DiffOp::lin(&[
            (-i * sign, &pb),
            (one(), &pal.left_mul(&f(eb.clone() * den.clone()))),
            (one(), &DiffOp::mult(&space, fj(ea.clone() * den.clone(), 2))),
        ])?
        .left_mul(&f2);
        let t3 = DiffOp::mult(&space, fj(ea.powi(-1), 1).add(&fj(eb.powi(-1), 0).scale(-i * sign)))
            .left_mul(&f3)
            .neg();
        let phase = (Expr::imag_unit() * al.clone() * (-sign)).exp() * g0;
        let body = sum_ops(&space, &[t1, t2, t3])?.left_mul(&f(phase));
        let other = if bar { rep.psi_field(2) } else { rep.psibar_field(2) };
        let last = DiffOp::mult(&space, f(ea.clone() * eb.clone() / g0).mul(&other)).scale(-i * sign);
        body.add(&last)
    };
    let q = build(-1.0, false)?;
    let qbar = build(1.0, true)?;
    let mut m = Model::new("gauge_sym3_resolved", space.clone(), Algebra::Exploratory);
    m.domain = vec![(0.3, 1.5), (-1.2, 1.2), (-3.0, 3.0)];
    m.exclusions = vec!["a != b".into(), "a != -b".into(), "b != 0".into()];
    m.step(format!("Q^cov, Qbar^cov as printed, g0 = {g0}"));
    m.charge("Q", q.clone(), qbar.clone());
    let mut m = m.finish()?;
    let ex = Expect::Exploratory;
    m.identity_expect("Q^2", q.compose(&q)?, None, ex);
    m.identity_expect("Qbar^2", qbar.compose(&qbar)?, None, ex);
    m.identity_expect("Qbar-Q†", qbar.sub(&q.naive_dagger())?, None, ex);
    let h = m.hamiltonian.clone();
    m.identity_expect("H-H†", h.sub(&h.naive_dagger())?, None, ex);
    m.identity_expect("[p_alpha,H]", pal.commutator(&h)?, None, ex);
    Ok(m)
}
