//! Kähler, hyper-Kähler, HKT and OKT models.

use std::f64::consts::FRAC_1_SQRT_2;

use super::*;
use crate::clifford::{complex_fermions, const_tensor, epsilon2, hermitian_fermions, TensorName};
use crate::geometry::{antiholomorphic_deriv, holomorphic_deriv, GibbonsHawking};

fn frame_space(geo: &GeometryData) -> Result<Arc<Space>> {
    Ok(Space::new(indexed("x", geo.dim), complex_fermions(geo.dim, 1)?))
}

/// `F₊ = ½ I_{MN} ψ̄^M ψ̄^N`, `F₋ = ½ I_{MN} ψ^M ψ^N`.
fn f_pair(space: &Arc<Space>, geo: &GeometryData, i: &ComplexStructure) -> Result<(DiffOp, DiffOp)> {
    let flat = geo.vielbein.mul(&i.lowered(geo)).mul(&geo.vielbein.transpose()).scale_re(0.5);
    let fp = space.rep.bilinear(&flat, Ordering::PsibarPsibar)?;
    let fm = space.rep.bilinear(&flat, Ordering::PsiPsi)?;
    Ok((DiffOp::mult(space, fp), DiffOp::mult(space, fm)))
}

fn rotated_charge(space: &Arc<Space>, geo: &GeometryData, i: &ComplexStructure) -> Result<DiffOp> {
    sigma_charge(space, &geo.vielbein.mul(&i.world), &geo.spin_connection)
}

/// `Q = ψ^M(p_M − iΩ_{M,AB}ψ_Aψ̄_B)`, `S = ψ^M I_M^N(p_N − iΩ_{N,AB}ψ_Aψ̄_B)`,
/// the triplet `F₊, F₋, F₀` and `T₁ = (Q − iS)/√2`, `T₂ = (Q̄ − iS̄)/√2`
/// (in the flat limit `S` here is `−p_A I_{AB} ψ_B`).
pub fn kahler(geo: &GeometryData, i: &ComplexStructure) -> Result<Model> {
    if geo.dim % 2 == 1 {
        return Err(Error::Invalid("Kähler models need even D".into()));
    }
    let space = frame_space(geo)?;
    let q = sigma_charge(&space, &geo.vielbein, &geo.spin_connection)?;
    let s = rotated_charge(&space, geo, i)?;
    let mut m = Model::new("kahler", space.clone(), Algebra::Kahler);
    m.measure = geo.volume();
    m.step("Q = ψ^M (p_M - iΩ_M ψψ̄), S = ψ^M I_M^N (p_N - iΩ_N ψψ̄)");
    m.step("Qbar, Sbar = μ^-1 (·)† μ, μ = √det g");
    m.charge_adj("Q", q);
    m.charge_adj("S", s);
    let (fp, fm) = f_pair(&space, geo, i)?;
    let f0 = DiffOp::mult(&space, Field::constant(space.rep.fermion_number()));
    let (qq, ss) = (&m.supercharges[0], &m.supercharges[1]);
    let k = c(FRAC_1_SQRT_2, 0.0);
    let t1 = DiffOp::lin(&[(k, &qq.q), (c(0.0, -FRAC_1_SQRT_2), &ss.q)])?;
    let t2 = DiffOp::lin(&[(k, &qq.qbar), (c(0.0, -FRAC_1_SQRT_2), &ss.qbar)])?;
    m.extras.extend([("F+".into(), fp), ("F-".into(), fm), ("F0".into(), f0), ("T1".into(), t1), ("T2".into(), t2)]);
    m.geometry = Some(geo.clone());
    m.structures = vec![i.clone()];
    m.finish()
}

/// `Q` and `S^a = ψ^M I^a_M^N(p_N − iΩ_N ψψ̄)` for a quaternionic triple,
/// plus `F^a_±` and `F₀`.
pub fn hyperkahler(geo: &GeometryData, triple: &[ComplexStructure; 3]) -> Result<Model> {
    if !geo.dim.is_multiple_of(4) {
        return Err(Error::Invalid("hyper-Kähler models need D divisible by 4".into()));
    }
    let space = frame_space(geo)?;
    let mut m = Model::new("hyperkahler", space.clone(), Algebra::HyperKahler);
    m.measure = geo.volume();
    m.step("Q = ψ^M (p_M - iΩ_M ψψ̄), S^a = ψ^M I^a_M^N (p_N - iΩ_N ψψ̄)");
    m.charge_adj("Q", sigma_charge(&space, &geo.vielbein, &geo.spin_connection)?);
    for (a, i) in triple.iter().enumerate() {
        m.charge_adj(&format!("S{}", a + 1), rotated_charge(&space, geo, i)?);
        let (fp, fm) = f_pair(&space, geo, i)?;
        m.extras.push((format!("F{}+", a + 1), fp));
        m.extras.push((format!("F{}-", a + 1), fm));
    }
    m.extras.push(("F0".into(), DiffOp::mult(&space, Field::constant(space.rep.fermion_number()))));
    m.geometry = Some(geo.clone());
    m.structures = triple.to_vec();
    m.finish()
}

/// Hyper-Kähler model on a Gibbons–Hawking metric, orientation chosen by
/// covariant constancy. Without a constant orientation the best candidate is
/// used and the recipe says so (for negative controls).
pub fn gibbons_hawking_model(gh: &GibbonsHawking, domain: &[(f64, f64)]) -> Result<Model> {
    if domain.len() != 4 {
        return Err(Error::Invalid("Gibbons–Hawking domain needs 4 boxes".into()));
    }
    let spec = SampleSpec::new(domain.to_vec(), 6, 11);
    let hk = gh.build(&spec)?;
    let (idx, note) = match hk.selected {
        Some(i) => (i, "covariantly constant"),
        None => {
            let best = (0..hk.candidates.len())
                .min_by(|&a, &b| hk.candidates[a].residual.total_cmp(&hk.candidates[b].residual))
                .expect("two candidates");
            (best, "NOT covariantly constant (best of both orientations)")
        }
    };
    let cand = &hk.candidates[idx];
    let mut m = hyperkahler(&hk.geometry, &cand.triple)?;
    m.name = "gibbons_hawking".into();
    m.domain = domain.to_vec();
    let orient = if cand.anti_self_dual { "-η̄" } else { "-η" };
    m.recipe.insert(0, format!("V = {}; triple {orient} ({note}, residual {:.1e})", gh.potential().display(&m.space.coords), cand.residual));
    Ok(m)
}

/// Conformally flat HKT model in two complex dimensions: flat `Q`, `S`
/// rotated by `R = g ψ_a ψ̄_a`. `Q̄`, `S̄` are adjoints for the measure
/// `e^{−2g}`, i.e. the flat ones rotated by `e^{g ψ̄_c ψ_c}`; the plain
/// adjoints (`e^{−R}` with `R = R†`) do not close N=4.
pub fn hkt_conformal(g: &Expr) -> Result<Model> {
    let d = 2;
    let space = Space::new(complex_names(d), complex_fermions(d, 1)?);
    check_coords(&Field::expr(g.clone()), 2 * d, "g")?;
    let rep = &space.rep;
    let mom = |k: usize| DiffOp::momentum(&space, k);
    let pi = |a: usize, sign: f64| DiffOp::lin(&[(one(), &mom(2 * a)), (c(0.0, sign), &mom(2 * a + 1))]);
    let mut qf = Vec::new();
    let mut sf = Vec::new();
    for a in 0..d {
        qf.push(pi(a, 1.0)?.left_mul(&rep.psi_field(a)));
        for b in 0..d {
            let e = epsilon2(a, b);
            if e != 0.0 {
                sf.push(pi(b, -1.0)?.left_mul(&rep.psi_field(a)).scale_re(e));
            }
        }
    }
    let (q_flat, s_flat) = (sum_ops(&space, &qf)?, sum_ops(&space, &sf)?);
    let gf = Field::expr(g.clone());
    let nf = Field::constant(rep.fermion_number());
    let r = gf.mul(&nf);
    let q = q_flat.similarity(&r);
    let s = s_flat.similarity(&r);
    // direct: √2 f ψ_a(π_a + i ∂_a g N), √2 f ε_ab ψ_a(π̄_b + i ∂̄_b g N)
    let f = gf.exp();
    let s2 = std::f64::consts::SQRT_2;
    let mut qd = Vec::new();
    let mut sd = Vec::new();
    for a in 0..d {
        let dg = holomorphic_deriv(&gf, 2 * d, a).mul(&nf);
        let inner = pi(a, 1.0)?.add(&DiffOp::mult(&space, dg).scale(c(0.0, s2)))?;
        qd.push(inner.left_mul(&f.mul(&rep.psi_field(a))));
        for b in 0..d {
            let e = epsilon2(a, b);
            if e != 0.0 {
                let dgb = antiholomorphic_deriv(&gf, 2 * d, b).mul(&nf);
                let inner = pi(b, -1.0)?.add(&DiffOp::mult(&space, dgb).scale(c(0.0, s2)))?;
                sd.push(inner.left_mul(&f.mul(&rep.psi_field(a))).scale_re(e));
            }
        }
    }
    let (q_dir, s_dir) = (sum_ops(&space, &qd)?, sum_ops(&space, &sd)?);
    let mut m = Model::new("hkt_conformal", space.clone(), Algebra::Extended);
    m.step(format!("Q, S = e^R (flat) e^-R, R = g ψ_a ψ̄_a, g = {}", g.display(&space.coords)));
    m.step("Qbar, Sbar = μ^-1 (·)† μ, μ = e^-2g");
    m.measure = gf.scale_re(-2.0).exp();
    m.charge_adj("Q", q.clone());
    m.charge_adj("S", s.clone());
    let mut m = m.finish()?;
    m.identity("Q(similarity)-Q(direct)", q.sub(&q_dir)?, Some(1e-10));
    m.identity("S(similarity)-S(direct)", s.sub(&s_dir)?, Some(1e-10));
    m.extras.push(("Q_direct".into(), q_dir));
    m.extras.push(("S_direct".into(), s_dir));
    Ok(m)
}

/// Flat `D = 8` model with Hermitian fermions: `𝒬 = p_A ψ_A`,
/// `𝒮^a = Γ^a_{AB} p_A ψ_B`.
pub fn okt_flat() -> Result<Model> {
    let space = Space::new(indexed("x", 8), hermitian_fermions(8)?);
    let rep = &space.rep;
    let gam = const_tensor(TensorName::Gamma7);
    let mut m = Model::new("okt_flat", space.clone(), Algebra::Extended);
    m.step("Q = p_A ψ_A, S^a = Γ^a_AB p_A ψ_B (Hermitian ψ)");
    m.hermitian.push(("Q".into(), flat_real_charge(&space)?));
    for (a, g) in gam.mats.iter().enumerate() {
        let mut ops = Vec::new();
        for aa in 0..8 {
            let f = Field::constant(row_combo(rep, g, aa));
            ops.push(DiffOp::momentum(&space, aa).left_mul(&f));
        }
        m.hermitian.push((format!("S{}", a + 1), sum_ops(&space, &ops)?));
    }
    let lap: Vec<DiffOp> = (0..8).map(|k| DiffOp::momentum(&space, k).compose(&DiffOp::momentum(&space, k))).collect::<Result<_>>()?;
    let h_dir = sum_ops(&space, &lap)?.scale_re(0.5);
    let mut m = m.finish()?;
    let hd = m.hamiltonian.sub(&h_dir)?;
    m.identity("H-p^2/2", hd, None);
    Ok(m)
}

/// `Σ_B Γ_{AB} ψ_B` for a fixed row `A`.
fn row_combo(rep: &crate::clifford::FermionRep, g: &crate::jet::CMat, row: usize) -> crate::jet::CMat {
    let mut out = crate::jet::CMat::zeros(rep.dim(), rep.dim());
    for b in 0..g.ncols() {
        let k = g[(row, b)];
        if k != c(0.0, 0.0) {
            out += rep.psi(b) * k;
        }
    }
    out
}
