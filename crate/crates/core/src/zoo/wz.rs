//! Mode truncations of the Wess–Zumino model on a 3-torus.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use super::*;
use crate::clifford::{complex_fermions, pauli};
use crate::jet::CMat;

/// Eigenvectors of `n·σ` for eigenvalues `+|n|`, `−|n|`, phase fixed so the
/// first nonzero component is real positive. `n = 0` gives the standard basis.
fn mode_basis(n: [i64; 3]) -> [[C64; 2]; 2] {
    let [n1, n2, n3] = n.map(|k| k as f64);
    let len = (n1 * n1 + n2 * n2 + n3 * n3).sqrt();
    if len == 0.0 {
        return [[one(), c(0.0, 0.0)], [c(0.0, 0.0), one()]];
    }
    let fix = |u: [C64; 2]| {
        let norm = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        let lead = if u[0].norm() > 1e-14 { u[0] } else { u[1] };
        let ph = lead.conj() / lead.norm();
        [u[0] * ph / norm, u[1] * ph / norm]
    };
    let eig = |lam: f64| {
        let a = [c(lam + n3, 0.0), c(n1, n2)];
        if a[0].norm() + a[1].norm() > 1e-12 {
            fix(a)
        } else {
            fix([c(n1, -n2), c(lam - n3, 0.0)])
        }
    };
    [eig(len), eig(-len)]
}

struct Mode {
    n: [i64; 3],
    len: f64,
    f1: usize,
    f2: usize,
    psi: [usize; 2],
}

fn modes_of(list: &[[i64; 3]]) -> Vec<Mode> {
    list.iter()
        .enumerate()
        .map(|(k, &n)| Mode { n, len: n.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt(), f1: 2 * k, f2: 2 * k + 1, psi: [2 * k, 2 * k + 1] })
        .collect()
}

/// Free Wess–Zumino supercharges restricted to the listed momentum modes.
///
/// Per mode `φ = (f¹ + if²)/√2`, `Π = (P¹ − iP²)/√2` and two complex fermions;
/// `Q_α = √2 Σ_n [Π ψ_α + 2πi (ψ n·σ)_α φ̄]`. The rotated charges
/// `𝒬_n = χ¹(P¹ + 2πi|n|f¹) + χ²(P² − 2πi|n|f²)` with `χ` the eigen-combinations
/// of `n·σ`, and `𝒬 = e^W 𝒬⁽⁰⁾ e^{−W}`, `W = Σ π|n|((f¹)² − (f²)²)`.
pub fn wz_modes(list: &[[i64; 3]]) -> Result<Model> {
    if list.is_empty() {
        return Err(Error::Invalid("at least one mode is required".into()));
    }
    if list.len() > 4 {
        return Err(Error::Invalid("at most 4 modes (fermion Fock space 2^(2M))".into()));
    }
    let modes = modes_of(list);
    let names: Vec<String> = (1..=list.len()).flat_map(|k| [format!("f1_{k}"), format!("f2_{k}")]).collect();
    let space = Space::new(names, complex_fermions(2 * list.len(), 1)?);
    let rep = &space.rep;
    let p = |k: usize| DiffOp::momentum(&space, k);
    let sig = pauli();
    let e = |k: usize| Expr::coord(k);
    let mut m = Model::new("wz_modes", space.clone(), Algebra::Central);
    m.domain = vec![(-0.6, 0.6); space.dim()];
    let listed: Vec<String> = list.iter().map(|n| format!("({},{},{})", n[0], n[1], n[2])).collect();
    m.step(format!("modes {}", listed.join(" ")));
    m.step("Q_α = √2 Σ_n [Π_n ψ_αn + 2πi (ψ_n n·σ)_α φ̄_n], Qbar^α = Q_α†");
    m.step("H = ({Qbar1,Q1} + {Qbar2,Q2})/4");
    let nsig = |md: &Mode| -> CMat { sig.iter().zip(md.n).fold(CMat::zeros(2, 2), |acc, (s, k)| acc + s * c(k as f64, 0.0)) };
    for al in 0..2 {
        let mut parts = Vec::new();
        for md in &modes {
            let pi = DiffOp::lin(&[(c(FRAC_1_SQRT_2, 0.0), &p(md.f1)), (c(0.0, -FRAC_1_SQRT_2), &p(md.f2))])?;
            parts.push(pi.left_mul(&rep.psi_field(md.psi[al])).scale_re(SQRT_2));
            let ns = nsig(md);
            let phibar = (e(md.f1) - e(md.f2) * Expr::imag_unit()) * FRAC_1_SQRT_2;
            let mut ferm = CMat::zeros(rep.dim(), rep.dim());
            for be in 0..2 {
                ferm += rep.psi(md.psi[be]) * ns[(be, al)];
            }
            if md.len > 0.0 {
                let f = Field::expr(phibar).mul(&Field::constant(ferm * c(0.0, 2.0 * PI * SQRT_2)));
                parts.push(DiffOp::mult(&space, f));
            }
        }
        let q = sum_ops(&space, &parts)?;
        m.charge(&format!("Q{}", al + 1), q.clone(), q.naive_dagger());
    }
    // H = Σ_n [Π̄Π + (2π|n|)² φ̄φ − 2π ψ (n·σ) ψ̄]
    let mut hparts = Vec::new();
    let mut hn = Vec::new();
    let mut cal = Vec::new();
    let mut cal0 = Vec::new();
    let mut w = Expr::real(0.0);
    for md in &modes {
        let lap = p(md.f1).compose(&p(md.f1))?.add(&p(md.f2).compose(&p(md.f2))?)?.scale_re(0.5);
        let w2 = (2.0 * PI * md.len).powi(2);
        let pot = (e(md.f1).powi(2) + e(md.f2).powi(2)) * (0.5 * w2);
        let ns = nsig(md);
        let mut ferm = CMat::zeros(rep.dim(), rep.dim());
        for a in 0..2 {
            for b in 0..2 {
                ferm += rep.psi(md.psi[a]) * rep.psibar(md.psi[b]) * ns[(a, b)];
            }
        }
        let h = lap.add(&DiffOp::mult(&space, Field::expr(pot).add(&Field::constant(ferm * c(-2.0 * PI, 0.0)))))?;
        hparts.push(h.clone());
        hn.push(h);
        // χ^k = Σ_α ψ_α (u_k)_α
        let u = mode_basis(md.n);
        let chi: Vec<CMat> = u
            .iter()
            .map(|uk| {
                let mut x = CMat::zeros(rep.dim(), rep.dim());
                for a in 0..2 {
                    x += rep.psi(md.psi[a]) * uk[a];
                }
                x
            })
            .collect();
        let k = 2.0 * PI * md.len;
        let a1 = p(md.f1).add(&DiffOp::mult(&space, Field::expr(e(md.f1) * Expr::constant(c(0.0, k)))))?;
        let a2 = p(md.f2).add(&DiffOp::mult(&space, Field::expr(e(md.f2) * Expr::constant(c(0.0, -k)))))?;
        let qn = a1.left_mul(&Field::constant(chi[0].clone())).add(&a2.left_mul(&Field::constant(chi[1].clone())))?;
        cal.push(qn);
        cal0.push(p(md.f1).left_mul(&Field::constant(chi[0].clone())).add(&p(md.f2).left_mul(&Field::constant(chi[1].clone())))?);
        w = w + (e(md.f1).powi(2) - e(md.f2).powi(2)) * (PI * md.len);
    }
    let h59 = sum_ops(&space, &hparts)?;
    // P_j = Σ_n 2π n_j [i(φ̄Π̄ − φΠ) + 1 − F_n]
    for j in 0..3 {
        let mut parts = Vec::new();
        for md in &modes {
            if md.n[j] == 0 {
                continue;
            }
            let k = 2.0 * PI * md.n[j] as f64;
            let phi = Field::expr((e(md.f1) + e(md.f2) * Expr::imag_unit()) * FRAC_1_SQRT_2);
            let phibar = Field::expr((e(md.f1) - e(md.f2) * Expr::imag_unit()) * FRAC_1_SQRT_2);
            let pi = DiffOp::lin(&[(c(FRAC_1_SQRT_2, 0.0), &p(md.f1)), (c(0.0, -FRAC_1_SQRT_2), &p(md.f2))])?;
            let pibar = DiffOp::lin(&[(c(FRAC_1_SQRT_2, 0.0), &p(md.f1)), (c(0.0, FRAC_1_SQRT_2), &p(md.f2))])?;
            let orb = pibar.left_mul(&phibar).sub(&pi.left_mul(&phi))?.scale(c(0.0, k));
            let mut num = CMat::identity(rep.dim(), rep.dim());
            for a in 0..2 {
                num -= rep.psi(md.psi[a]) * rep.psibar(md.psi[a]);
            }
            parts.push(orb.add(&DiffOp::mult(&space, Field::constant(num * c(k, 0.0))))?);
        }
        m.central.push((format!("P{}", j + 1), sum_ops(&space, &parts)?));
    }
    let calq = sum_ops(&space, &cal)?;
    let calq_sim = sum_ops(&space, &cal0)?.similarity(&Field::expr(w));
    m.extras.push(("H_written".into(), h59.clone()));
    m.extras.push(("calQ".into(), calq.clone()));
    m.extras.push(("calQ_similarity".into(), calq_sim.clone()));
    let mut m = m.finish()?;
    let (a, b) = (&m.supercharges[0], &m.supercharges[1]);
    m.hamiltonian = a.qbar.anticommutator(&a.q)?.add(&b.qbar.anticommutator(&b.q)?)?.scale_re(0.25);
    for (k, (q, h)) in cal.iter().zip(&hn).enumerate() {
        let rel = q.naive_dagger().anticommutator(q)?.sub(&h.scale_re(2.0))?;
        m.identity(&format!("{{calQ{},calQbar{}}}-2H{}", k + 1, k + 1, k + 1), rel, None);
    }
    m.identity("calQ(similarity)-sum calQ_n", calq_sim.sub(&calq)?, Some(1e-10));
    let all = calq.naive_dagger().anticommutator(&calq)?.sub(&h59.scale_re(2.0))?;
    m.identity("{calQ,calQbar}-2H", all, None);
    let hd = m.hamiltonian.sub(&h59)?;
    m.identity("H-H(written)", hd, None);
    Ok(m)
}

/// Zero-mode truncation with a superpotential `𝒲′(φ̄)`, given as an
/// expression in the single coordinate `phibar`:
/// `Q_α = √2 Π ψ_α + i√2 𝒲′(φ̄) ψ̄_α`. Display only.
pub fn wz_interacting(wprime: &Expr) -> Result<Model> {
    let space = Space::new(vec!["f1_1".into(), "f2_1".into()], complex_fermions(2, 1)?);
    if wprime.max_coord().is_some_and(|k| k > 0) {
        return Err(Error::Invalid("W' must depend on phibar only".into()));
    }
    let rep = &space.rep;
    let phibar = (Expr::coord(0) - Expr::coord(1) * Expr::imag_unit()) * FRAC_1_SQRT_2;
    let wp = wprime.substitute(&|_| phibar.clone());
    let p = |k: usize| DiffOp::momentum(&space, k);
    let pi = DiffOp::lin(&[(one(), &p(0)), (c(0.0, -1.0), &p(1))])?;
    let mut m = Model::new("wz_interacting", space.clone(), Algebra::Exploratory);
    m.step(format!("Q_α = √2 Π ψ_α + i√2 W'(φ̄) ψ̄_α, W' = {}", wprime.display(&["phibar".to_string()])));
    for al in 0..2 {
        let kin = pi.left_mul(&rep.psi_field(al));
        let pot = DiffOp::mult(&space, Field::expr(wp.clone()).mul(&rep.psibar_field(al))).scale(c(0.0, SQRT_2));
        let q = kin.add(&pot)?;
        m.charge(&format!("Q{}", al + 1), q.clone(), q.naive_dagger());
    }
    m.finish()
}
