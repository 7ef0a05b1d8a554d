//! Witten, free, Dolbeault, de Rham and quasicomplex models.

use std::f64::consts::SQRT_2;

use super::*;
use crate::clifford::complex_fermions;
use crate::geometry::OmegaKind;

/// `Q = ψ(p + iW′)`, built as `e^W (ψp) e^{−W}` and compared with the
/// direct form; `H` compared with `½[p² + W′² + W″(ψ̄ψ − ψψ̄)]`.
pub fn witten(w: &Expr) -> Result<Model> {
    let space = Space::new(vec!["x".into()], complex_fermions(1, 1)?);
    if w.deps() >> 1 != 0 {
        return Err(Error::Invalid("the superpotential may only depend on x".into()));
    }
    let psi = space.rep.psi_field(0);
    let psib = space.rep.psibar_field(0);
    let p = DiffOp::momentum(&space, 0);
    let (wp, wpp) = (w.diff(0), w.diff(0).diff(0));
    let q_free = p.left_mul(&psi);
    let q = q_free.similarity(&Field::expr(w.clone()));
    let q_dir = p.add(&DiffOp::mult(&space, Field::expr(wp.clone())).scale(c(0.0, 1.0)))?.left_mul(&psi);
    let mut m = Model::new("witten", space.clone(), Algebra::N2);
    m.domain = vec![(-1.5, 1.5)];
    m.step(format!("Q = e^W (ψ p) e^-W, W = {}", w.display(&space.coords)));
    m.step("Qbar = Q† (flat measure)");
    let qbar = q.naive_dagger();
    m.charge("Q", q.clone(), qbar);
    let fermi = psib.mul(&psi).sub(&psi.mul(&psib));
    let h_dir = DiffOp::lin(&[
        (c(0.5, 0.0), &p.compose(&p)?),
        (c(0.5, 0.0), &DiffOp::mult(&space, Field::expr(wp.clone() * wp))),
        (c(0.5, 0.0), &DiffOp::mult(&space, Field::expr(wpp).mul(&fermi))),
    ])?;
    let mut m = m.finish()?;
    m.identity("Q(similarity)-Q(direct)", q.sub(&q_dir)?, Some(1e-10));
    let hd = m.hamiltonian.sub(&h_dir)?;
    m.identity("H-H(direct)", hd, None);
    m.extras.push(("Q_direct".into(), q_dir));
    m.extras.push(("H_direct".into(), h_dir));
    Ok(m)
}

/// `√2 ψ_a π_a = Σ ψ_a (p_{x_a} + i p_{y_a})`.
fn free_complex_charge(space: &Arc<Space>, d: usize) -> Result<DiffOp> {
    let ops: Vec<DiffOp> = (0..d)
        .map(|a| {
            let pi = DiffOp::lin(&[(one(), &DiffOp::momentum(space, 2 * a)), (c(0.0, 1.0), &DiffOp::momentum(space, 2 * a + 1))]).expect("same space");
            pi.left_mul(&space.rep.psi_field(a))
        })
        .collect();
    sum_ops(space, &ops)
}

/// Flat complex model in `d` dimensions; for `d = 2` also the second pair
/// `S = √2 ε_ab ψ_a π̄_b`.
pub fn free_complex(d: usize) -> Result<Model> {
    let space = Space::new(complex_names(d), complex_fermions(d, 1)?);
    let q = free_complex_charge(&space, d)?;
    let expected = if d == 2 { Algebra::Extended } else { Algebra::N2 };
    let mut m = Model::new("free_complex", space.clone(), expected);
    m.step(format!("Q = √2 ψ_a π_a, d = {d}"));
    m.charge("Q", q.clone(), q.naive_dagger());
    if d == 2 {
        let mut parts = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                let e = crate::clifford::epsilon2(a, b);
                if e == 0.0 {
                    continue;
                }
                let pib = DiffOp::lin(&[(one(), &DiffOp::momentum(&space, 2 * b)), (c(0.0, -1.0), &DiffOp::momentum(&space, 2 * b + 1))])?;
                parts.push(pib.left_mul(&space.rep.psi_field(a)).scale_re(e));
            }
        }
        let s = sum_ops(&space, &parts)?;
        m.step("S = √2 ε_ab ψ_a π̄_b");
        m.charge("S", s.clone(), s.naive_dagger());
    }
    let lap: Vec<DiffOp> = (0..2 * d).map(|k| DiffOp::momentum(&space, k).compose(&DiffOp::momentum(&space, k))).collect::<Result<_>>()?;
    let h_dir = sum_ops(&space, &lap)?.scale_re(0.5);
    let mut m = m.finish()?;
    let hd = m.hamiltonian.sub(&h_dir)?;
    m.identity("H-pibar*pi", hd, None);
    Ok(m)
}

/// `Q = p_A ψ_A`; also obtained by reducing `free_complex(D)` over all `y`.
pub fn free_real(big_d: usize) -> Result<Model> {
    let space = Space::new(indexed("x", big_d), complex_fermions(big_d, 1)?);
    let q = flat_real_charge(&space)?;
    let mut m = Model::new("free_real", space.clone(), Algebra::N2);
    m.step(format!("Q = p_A ψ_A, D = {big_d}"));
    m.charge("Q", q.clone(), q.naive_dagger());
    let full = free_complex(big_d)?;
    let ys: Vec<usize> = (0..big_d).map(|a| 2 * a + 1).collect();
    let spec = full.sample_spec(4, 0)?;
    let reduced = full.supercharges[0].q.reduce_onto(&ys, &spec, &space)?;
    m.step("cross-check: reduce free_complex over y_a");
    let mut m = m.finish()?;
    m.identity("Q-reduce(Q_complex)", q.sub(&reduced)?, None);
    Ok(m)
}

#[derive(Clone, Debug, Default)]
pub struct DolbeaultOptions {
    /// Holomorphic twist `G = W − ¼ ln det h`.
    pub potential: Option<Expr>,
    /// Record the identity between the `G = −½ ln det h` twist and the
    /// `exp{−ω_ab ψ̄_b ψ_a}` rotation (needs Hermitian ω).
    pub antiholomorphic_check: bool,
}

/// Dolbeault model over `d` complex coordinates `(x_a, y_a)`.
pub fn dolbeault(omega: &Field, opts: &DolbeaultOptions) -> Result<Model> {
    let (d, k) = omega.shape();
    if d != k {
        return Err(Error::Invalid("ω must be square".into()));
    }
    check_coords(omega, 2 * d, "ω")?;
    let space = Space::new(complex_names(d), complex_fermions(d, 1)?);
    let geo = GeometryData::from_omega(omega, OmegaKind::ComplexDolbeault)?;
    let q_free = free_complex_charge(&space, d)?;
    let r = space.rep.bilinear(omega, Ordering::PsiPsibar)?;
    let q_sim = q_free.similarity(&r);
    // √2 ψ_d (e^ω)_{dc} [π_c − i(e^ω ∂_c e^{−ω})_{ab} ψ_a ψ̄_b]
    let mut parts = Vec::new();
    for (cc, conn) in geo.spin_connection.iter().enumerate() {
        let phi = frame_fermion(&space, &geo.vielbein, cc, false);
        let bil = space.rep.bilinear(conn, Ordering::PsiPsibar)?;
        let inner = DiffOp::lin(&[
            (one(), &DiffOp::momentum(&space, 2 * cc)),
            (c(0.0, 1.0), &DiffOp::momentum(&space, 2 * cc + 1)),
            (c(0.0, -SQRT_2), &DiffOp::mult(&space, bil)),
        ])?;
        parts.push(inner.left_mul(&phi));
    }
    let q_eq8 = sum_ops(&space, &parts)?;
    let h = geo.hermitian_metric.clone().expect("dolbeault metric");
    let deth = h.det();
    let mut m = Model::new("dolbeault", space.clone(), Algebra::N2);
    m.measure = deth.clone();
    m.step("Q = e^R (√2 ψ_a π_a) e^-R, R = ω_ab ψ_a ψ̄_b");
    let mut q = q_sim.clone();
    if let Some(w) = &opts.potential {
        check_coords(&Field::expr(w.clone()), 2 * d, "W")?;
        let g = Field::expr(w.clone()).sub(&deth.ln().scale_re(0.25));
        q = q.similarity(&g);
        m.step(format!("twist G = W - ¼ ln det h, W = {}", w.display(&space.coords)));
    }
    m.step("Qbar = (det h)^-1 Q† det h");
    m.charge_adj("Q", q);
    m.geometry = Some(geo);
    let mut m = m.finish()?;
    m.identity("Q(similarity)-Q(vielbein form)", q_sim.sub(&q_eq8)?, None);
    if opts.antiholomorphic_check {
        let g0 = deth.ln().scale_re(-0.5);
        let lhs = q_sim.similarity(&g0);
        let r2 = space.rep.bilinear(&omega.transpose().neg(), Ordering::PsibarPsi)?;
        let rhs = q_free.similarity(&r2);
        m.identity("twist(-½ln det h)-rotate(-ω ψ̄ψ)", lhs.sub(&rhs)?, None);
    }
    m.extras.push(("Q_vielbein".into(), q_eq8));
    Ok(m)
}

#[derive(Clone, Debug, Default)]
pub struct DeRhamOptions {
    pub potential: Option<Expr>,
    /// Antisymmetric `𝓑_MN`; rotates by `exp{𝓑_MN ψ^M ψ^N}`.
    pub torsion: Option<Field>,
}

fn sigma_model(name: &str, omega: &Field, kind: OmegaKind) -> Result<(Model, DiffOp, DiffOp)> {
    let (n, k) = omega.shape();
    if n != k {
        return Err(Error::Invalid("ω must be square".into()));
    }
    check_coords(omega, n, "ω")?;
    let space = Space::new(indexed("x", n), complex_fermions(n, 1)?);
    let geo = GeometryData::from_omega(omega, kind)?;
    let q_free = flat_real_charge(&space)?;
    let r = space.rep.bilinear(omega, Ordering::PsiPsibar)?;
    let q_sim = q_free.similarity(&r);
    let q_frame = sigma_charge(&space, &geo.vielbein, &geo.frame_connection())?;
    let mut m = Model::new(name, space, Algebra::N2);
    m.measure = geo.volume();
    m.geometry = Some(geo);
    m.step("Q = e^R (p_A ψ_A) e^-R, R = ω_AB ψ_A ψ̄_B");
    Ok((m, q_sim, q_frame))
}

/// De Rham sigma model with `e = e^ω`, optionally with potential and torsion.
pub fn de_rham(omega: &Field, opts: &DeRhamOptions) -> Result<Model> {
    let (mut m, q_sim, q_frame) = sigma_model("de_rham", omega, OmegaKind::RealSymmetric)?;
    let space = m.space.clone();
    let geo = m.geometry.clone().expect("geometry");
    let q_spin = sigma_charge(&space, &geo.vielbein, &geo.spin_connection)?;
    let mut q = q_sim.clone();
    if let Some(b) = &opts.torsion {
        let n = space.dim();
        if b.shape() != (n, n) {
            return Err(Error::Invalid("torsion 𝓑 must be D×D".into()));
        }
        let bf = geo.vielbein.mul(b).mul(&geo.vielbein.transpose());
        q = q.similarity(&space.rep.bilinear(&bf, Ordering::PsiPsi)?);
        m.step("rotate by exp{B_MN ψ^M ψ^N}");
    }
    if let Some(w) = &opts.potential {
        q = q.similarity(&Field::expr(w.clone()));
        m.step(format!("rotate by e^W, W = {}", w.display(&space.coords)));
    }
    m.step("Qbar = μ^-1 Q† μ, μ = √det g");
    m.charge_adj("Q", q);
    let mut m = m.finish()?;
    m.identity("Q(similarity)-Q(spin connection)", q_sim.sub(&q_spin)?, None);
    m.identity("Q(similarity)-Q(frame form)", q_sim.sub(&q_frame)?, None);
    m.extras.push(("Q_spin".into(), q_spin));
    Ok(m)
}

/// Quasicomplex model: de Rham form with a Hermitian (complex) ω. With
/// `rhombus`, also reduce the Dolbeault model with `ω(Re z)` over `Im z`
/// and compare.
pub fn quasicomplex(omega: &Field, rhombus: bool) -> Result<Model> {
    let (mut m, q_sim, q_frame) = sigma_model("quasicomplex", omega, OmegaKind::Hermitian)?;
    m.step("Qbar = μ^-1 Q† μ, μ = det e^-ω");
    m.charge_adj("Q", q_sim.clone());
    let mut m = m.finish()?;
    m.identity("Q(similarity)-Q(frame form)", q_sim.sub(&q_frame)?, None);
    if rhombus {
        let n = m.space.dim();
        let lifted = remap_field(omega, &|k| 2 * k)?;
        let dol = dolbeault(&lifted, &DolbeaultOptions::default())?;
        let mut boxes = Vec::new();
        for k in 0..n {
            boxes.push(m.domain[k]);
            boxes.push((-1.0, 1.0));
        }
        let spec = SampleSpec::new(boxes, 8, 0);
        let ys: Vec<usize> = (0..n).map(|k| 2 * k + 1).collect();
        let reduced = dol.supercharges[0].q.reduce_onto(&ys, &spec, &m.space)?;
        m.step("rhombus: reduce Dolbeault(ω(Re z)) over Im z");
        m.identity("reduce(similarity)-similarity(reduce)", reduced.sub(&q_sim)?, None);
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorsionKind {
    /// `exp{B_jk ψ_j ψ_k}`.
    Holomorphic,
    /// `exp{C_AB ψ̄_A ψ̄_B}`.
    Antiholomorphic,
}

impl TorsionKind {
    pub fn parse(s: &str) -> Result<TorsionKind> {
        match s {
            "holomorphic" => Ok(TorsionKind::Holomorphic),
            "antiholomorphic" => Ok(TorsionKind::Antiholomorphic),
            _ => Err(Error::UnknownName(s.into())),
        }
    }
}

/// Rotate every supercharge of `m` by the exponential of a fermion bilinear.
pub fn torsion_rotate(m: &Model, b: &Field, kind: TorsionKind) -> Result<Model> {
    let f = m.space.rep.count();
    let (r, k) = b.shape();
    if r != k || r > f {
        return Err(Error::Invalid(format!("B must be square with at most {f} rows")));
    }
    let o = match kind {
        TorsionKind::Holomorphic => Ordering::PsiPsi,
        TorsionKind::Antiholomorphic => Ordering::PsibarPsibar,
    };
    let rot = m.space.rep.bilinear(b, o)?;
    let mut out = Model::new(&format!("{}+torsion", m.name), m.space.clone(), Algebra::N2);
    out.measure = m.measure.clone();
    out.geometry = m.geometry.clone();
    out.domain = m.domain.clone();
    out.exclusions = m.exclusions.clone();
    out.recipe = m.recipe.clone();
    out.step(format!("rotate by exp of {kind:?} bilinear"));
    for ch in &m.supercharges {
        out.charge_adj(&ch.name, ch.q.similarity(&rot));
    }
    out.finish()
}
