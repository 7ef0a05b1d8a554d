//! Vielbeins, metrics, Christoffel symbols and spin connections as fields,
//! plus the complex-structure predicates the theorem suites rely on.
//!
//! Index layout (all matrices row-major):
//! - `vielbein[A][M] = e^M_A` (so `e = e^ω` reads `E = exp(ω)`),
//! - `inv_vielbein[M][A] = e_{MA}`, the inverse matrix,
//! - `metric = F Fᵀ` with `F` the inverse vielbein, i.e. `e^{−2ω}` for real symmetric ω,
//! - `christoffel[M][N][K] = Γ^N_{MK}`,
//! - `spin_connection[M][A][B] = Ω_{M,AB} = e_{AN}(∂_M e^N_B + Γ^N_{MK} e^K_B)`.
//!
//! A complex structure is stored with world indices, `J[M][N] = I_M^N`;
//! a flat one becomes `J = F I E`. The lowered form is `I_{MN} = (J g)_{MN}`.

use crate::clifford::{const_tensor, TensorName};
use crate::error::{Error, Result};
use crate::expr::{Expr, Rational};
use crate::field::Field;
use crate::jet::{CMat, C64};
use crate::sample::SampleSpec;
use crate::verify::{CheckReport, Checker, Expect};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaKind {
    RealSymmetric,
    Hermitian,
    /// `d×d` over `2d` real coordinates `(x_1, y_1, …)`; the connection is
    /// the holomorphic one `e^ω ∂_c e^{−ω}` with `∂_c = (∂_x + i∂_y)/√2`.
    ComplexDolbeault,
}

impl OmegaKind {
    pub fn parse(s: &str) -> Result<OmegaKind> {
        match s {
            "real_symmetric" => Ok(OmegaKind::RealSymmetric),
            "hermitian" => Ok(OmegaKind::Hermitian),
            "complex_dolbeault" => Ok(OmegaKind::ComplexDolbeault),
            _ => Err(Error::UnknownName(s.into())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeometryData {
    pub dim: usize,
    pub nvars: usize,
    pub vielbein: Field,
    pub inv_vielbein: Field,
    pub metric: Field,
    pub inv_metric: Field,
    /// Empty for the Dolbeault kind.
    pub christoffel: Vec<Field>,
    pub spin_connection: Vec<Field>,
    pub hermitian_metric: Option<Field>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn one() -> C64 {
    c(1.0, 0.0)
}

impl GeometryData {
    /// From `E[A][M] = e^M_A` over `dim` coordinates.
    pub fn from_vielbein(e: Field) -> Result<GeometryData> {
        let f = square(&e)?.inv();
        Ok(GeometryData::assemble(e, f))
    }

    /// From the coframe `F[M][A] = e_{MA}` (the form metrics are usually given in).
    pub fn from_coframe(f: Field) -> Result<GeometryData> {
        let e = square(&f)?.inv();
        Ok(GeometryData::assemble(e, f))
    }

    pub fn from_omega(omega: &Field, kind: OmegaKind) -> Result<GeometryData> {
        let d = square(omega)?.shape().0;
        if kind == OmegaKind::ComplexDolbeault {
            return Ok(GeometryData::dolbeault(omega, d));
        }
        let e = omega.exp();
        let f = omega.neg().exp();
        let mut g = GeometryData::assemble(e, f);
        if kind == OmegaKind::Hermitian {
            g.hermitian_metric = Some(omega.adjoint().exp().mul(&omega.exp()));
        }
        Ok(g)
    }

    fn dolbeault(omega: &Field, d: usize) -> GeometryData {
        let nvars = 2 * d;
        let e = omega.exp();
        let f = omega.neg().exp();
        let h = omega.adjoint().exp().mul(&e);
        let conn = (0..d).map(|k| e.mul(&holomorphic_deriv(&f, nvars, k))).collect();
        GeometryData {
            dim: d,
            nvars,
            vielbein: e,
            inv_vielbein: f,
            metric: h.clone(),
            inv_metric: h.inv(),
            christoffel: Vec::new(),
            spin_connection: conn,
            hermitian_metric: Some(h),
        }
    }

    fn assemble(e: Field, f: Field) -> GeometryData {
        let n = e.shape().0;
        let g = f.mul(&f.transpose());
        let ginv = e.transpose().mul(&e);
        let dg: Vec<Field> = (0..n).map(|k| g.deriv1(n, k)).collect();
        let christoffel: Vec<Field> = (0..n)
            .map(|m| {
                // T_M[L][K] = ∂_M g_LK + ∂_K g_LM − ∂_L g_MK
                let extra: Vec<Field> = (0..n * n)
                    .map(|i| {
                        let (l, k) = (i / n, i % n);
                        dg[k].entry(l, m).sub(&dg[l].entry(m, k))
                    })
                    .collect();
                let t = dg[m].add(&Field::from_entries(n, n, extra));
                ginv.mul(&t).scale_re(0.5)
            })
            .collect();
        let et = e.transpose();
        let ft = f.transpose();
        let spin_connection = (0..n).map(|m| ft.mul(&et.deriv1(n, m).add(&christoffel[m].mul(&et)))).collect();
        GeometryData { dim: n, nvars: n, vielbein: e, inv_vielbein: f, metric: g, inv_metric: ginv, christoffel, spin_connection, hermitian_metric: None }
    }

    /// `√det g`, taken as `det F` (the sign drops out of measure adjoints).
    pub fn volume(&self) -> Field {
        self.inv_vielbein.det()
    }

    /// `e^ω ∂_M e^{−ω}`-type connection `E ∂_M F` (the similarity-transform form).
    pub fn frame_connection(&self) -> Vec<Field> {
        (0..self.nvars).map(|m| self.vielbein.mul(&self.inv_vielbein.deriv1(self.nvars, m))).collect()
    }

    /// `∇_P g_MN` for every `P`; vanishes identically for a Levi-Civita connection.
    pub fn metric_compatibility(&self) -> Vec<Field> {
        (0..self.dim).map(|p| covariant_deriv_2form(&self.metric, &self.christoffel[p], self.nvars, p)).collect()
    }

    /// `Γ^N_{MK} − Γ^N_{KM}`.
    pub fn torsion(&self) -> Vec<Field> {
        let n = self.dim;
        let mut out = Vec::new();
        for m in 0..n {
            for k in m + 1..n {
                let entries = (0..n).map(|nn| self.christoffel[m].entry(nn, k).sub(&self.christoffel[k].entry(nn, m))).collect();
                out.push(Field::from_entries(n, 1, entries));
            }
        }
        out
    }

    /// `Ω_{M,AB} + Ω_{M,BA}`.
    pub fn spin_connection_symmetric_part(&self) -> Vec<Field> {
        self.spin_connection.iter().map(|o| o.add(&o.transpose())).collect()
    }

    /// `e · e⁻¹ − 1`.
    pub fn frame_identity(&self) -> Field {
        self.vielbein.mul(&self.inv_vielbein).sub(&Field::identity(self.dim))
    }

    /// World complex structure from a flat one: `J = F I E`.
    pub fn world_structure(&self, flat: &CMat, label: Option<usize>) -> ComplexStructure {
        let i = Field::constant(flat.clone());
        ComplexStructure { world: self.inv_vielbein.mul(&i).mul(&self.vielbein), flat: Some(flat.clone()), label }
    }
}

fn square(f: &Field) -> Result<&Field> {
    let (r, k) = f.shape();
    if r != k {
        return Err(Error::Invalid(format!("expected a square matrix field, got {r}×{k}")));
    }
    Ok(f)
}

/// `(∂_x + i∂_y)/√2` on coordinate pair `k` of interleaved `(x_1, y_1, …)`.
pub fn holomorphic_deriv(f: &Field, nvars: usize, k: usize) -> Field {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Field::sum(vec![(c(s, 0.0), f.deriv1(nvars, 2 * k)), (c(0.0, s), f.deriv1(nvars, 2 * k + 1))])
}

/// `(∂_x − i∂_y)/√2`.
pub fn antiholomorphic_deriv(f: &Field, nvars: usize, k: usize) -> Field {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Field::sum(vec![(c(s, 0.0), f.deriv1(nvars, 2 * k)), (c(0.0, -s), f.deriv1(nvars, 2 * k + 1))])
}

/// `∂_P T_MN − Γ^S_PM T_SN − Γ^S_PN T_MS` for a two-index covariant tensor.
pub fn covariant_deriv_2form(t: &Field, gamma_p: &Field, nvars: usize, p: usize) -> Field {
    Field::sum(vec![(one(), t.deriv1(nvars, p)), (-one(), gamma_p.transpose().mul(t)), (-one(), t.mul(gamma_p))])
}

#[derive(Clone, Debug)]
pub struct ComplexStructure {
    /// `J[M][N] = I_M^N`.
    pub world: Field,
    pub flat: Option<CMat>,
    pub label: Option<usize>,
}

impl ComplexStructure {
    pub fn constant(m: CMat, label: Option<usize>) -> ComplexStructure {
        ComplexStructure { world: Field::constant(m.clone()), flat: Some(m), label }
    }

    /// `I_{MN} = g_{MP} I_P^N`, written as `J g` in our row convention
    /// (`J g = F I Fᵀ` for `J = F I E`).
    pub fn lowered(&self, g: &GeometryData) -> Field {
        self.world.mul(&g.metric)
    }
}

/// `−η^a` (self-dual) or `−η̄^a` (anti-self-dual) as constant 4×4 matrices;
/// the minus sign makes them satisfy `I^a I^b = −δ^{ab} + ε^{abc} I^c`.
pub fn canonical_triple(anti_self_dual: bool) -> [CMat; 3] {
    let t = const_tensor(if anti_self_dual { TensorName::EtaBar } else { TensorName::Eta });
    [-&t.mats[0], -&t.mats[1], -&t.mats[2]]
}

/// Residuals of `I² + 1`, antisymmetry of `I_{MN}`, and `∇_P I_{MN} = 0`.
pub fn check_complex_structure(i: &ComplexStructure, g: &GeometryData, ck: &Checker, tag: &str) -> Result<Vec<CheckReport>> {
    if i.world.shape() != (g.dim, g.dim) {
        return Err(Error::Invalid("complex structure and metric dimensions differ".into()));
    }
    let sq = i.world.mul(&i.world).add(&Field::identity(g.dim));
    let low = i.lowered(g);
    let anti = low.add(&low.transpose());
    let nabla: Vec<Field> = (0..g.dim).map(|p| covariant_deriv_2form(&low, &g.christoffel[p], g.nvars, p)).collect();
    Ok(vec![
        ck.fields_vanish(&format!("{tag}^2+1"), &[tag], &[sq], Expect::Holds)?,
        ck.fields_vanish(&format!("{tag}_MN+{tag}_NM"), &[tag], &[anti], Expect::Holds)?,
        ck.fields_vanish(&format!("D{tag}"), &[tag], &nabla, Expect::Holds)?,
    ])
}

/// All nine products `I^a I^b + δ^{ab} − ε^{abc} I^c`.
pub fn check_quaternion(t: &[ComplexStructure; 3], ck: &Checker) -> Result<CheckReport> {
    let n = t[0].world.shape().0;
    let mut fields = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let mut parts = vec![(one(), t[a].world.mul(&t[b].world))];
            if a == b {
                parts.push((one(), Field::identity(n)));
            }
            for (k, tk) in t.iter().enumerate() {
                let e = crate::clifford::epsilon3(a, b, k);
                if e != 0.0 {
                    parts.push((c(-e, 0.0), tk.world.clone()));
                }
            }
            fields.push(Field::sum(parts));
        }
    }
    ck.fields_vanish("IaIb+d-eIc", &["I1", "I2", "I3"], &fields, Expect::Holds)
}

/// Gibbons–Hawking data `V = ε + Σ w_i/|x − x_i|` in coordinates `(x, y, z, t)`.
#[derive(Clone, Debug)]
pub struct GibbonsHawking {
    pub centers: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub epsilon: f64,
    /// Optional extra (non-harmonic) term added to `V`, for negative controls.
    pub deformation: Option<Expr>,
}

#[derive(Clone, Debug)]
pub struct HkCandidate {
    pub anti_self_dual: bool,
    pub triple: [ComplexStructure; 3],
    /// Worst covariant-constancy residual over the triple (relative).
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct HkGeometry {
    pub geometry: GeometryData,
    pub candidates: Vec<HkCandidate>,
    /// Index into `candidates` of the covariantly constant orientation.
    pub selected: Option<usize>,
}

impl HkGeometry {
    pub fn triple(&self) -> Option<&[ComplexStructure; 3]> {
        self.selected.map(|i| &self.candidates[i].triple)
    }
}

impl GibbonsHawking {
    pub fn potential(&self) -> Expr {
        let x: Vec<Expr> = (0..3).map(Expr::coord).collect();
        let mut v = Expr::real(self.epsilon);
        for (cen, &w) in self.centers.iter().zip(&self.weights) {
            v = v + Expr::real(w) * radius(&x, cen).pow(Rational::integer(-1));
        }
        if let Some(d) = &self.deformation {
            v = v + d.clone();
        }
        v
    }

    /// `A = Σ −w_i (−(y−b), x−a, 0) / (r_i (r_i + z − c))`, with `curl A = ∇V`
    /// for the harmonic part. Singular on the negative z half-axis below each
    /// centre (the Dirac string); sampling boxes must avoid it.
    pub fn vector_potential(&self) -> [Expr; 3] {
        let x: Vec<Expr> = (0..3).map(Expr::coord).collect();
        let mut a = [Expr::real(0.0), Expr::real(0.0), Expr::real(0.0)];
        for (cen, &w) in self.centers.iter().zip(&self.weights) {
            let r = radius(&x, cen);
            let den = (r.clone() * (r + (x[2].clone() - cen[2]))).pow(Rational::integer(-1));
            a[0] = a[0].clone() + Expr::real(w) * (x[1].clone() - cen[1]) * den.clone();
            a[1] = a[1].clone() - Expr::real(w) * (x[0].clone() - cen[0]) * den;
        }
        a
    }

    /// Coframe `θ^i = √V dx^i`, `θ^4 = (dt + A·dx)/√V`.
    pub fn coframe(&self) -> Field {
        let v = self.potential();
        let sv = v.pow(Rational::new(1, 2).expect("1/2"));
        let isv = v.pow(Rational::new(-1, 2).expect("-1/2"));
        let a = self.vector_potential();
        let z = Expr::real(0.0);
        let mut f = vec![z; 16];
        for i in 0..3 {
            f[i * 4 + i] = sv.clone();
            f[i * 4 + 3] = a[i].clone() * isv.clone();
        }
        f[15] = isv;
        Field::exprs(4, 4, f)
    }

    /// Build the geometry and both candidate triples; the orientation whose
    /// triple is covariantly constant at the sample points is selected.
    pub fn build(&self, spec: &SampleSpec) -> Result<HkGeometry> {
        let ck = Checker::new(spec.clone())?;
        let v = Field::expr(self.potential());
        let vr = crate::sample::residual_of_fields(std::slice::from_ref(&v), ck.points(), ck.exec)?;
        for p in ck.points() {
            let val = v.value_at(p)?[(0, 0)].re;
            if val <= 0.0 {
                return Err(Error::Invalid(format!("Gibbons–Hawking potential is nonpositive ({val}) at {p:?}")));
            }
        }
        let _ = vr;
        let geometry = GeometryData::from_coframe(self.coframe())?;
        let mut candidates = Vec::new();
        for asd in [false, true] {
            let flat = canonical_triple(asd);
            let triple = [0, 1, 2].map(|a| geometry.world_structure(&flat[a], Some(a + 1)));
            let mut worst = 0.0f64;
            for (a, i) in triple.iter().enumerate() {
                for r in check_complex_structure(i, &geometry, &ck, &format!("I{}", a + 1))? {
                    worst = worst.max(r.relative);
                }
            }
            candidates.push(HkCandidate { anti_self_dual: asd, triple, residual: worst });
        }
        let selected = candidates.iter().position(|k| k.residual <= ck.tol);
        Ok(HkGeometry { geometry, candidates, selected })
    }
}

fn radius(x: &[Expr], c: &[f64; 3]) -> Expr {
    let d = |i: usize| (x[i].clone() - c[i]).powi(2);
    (d(0) + d(1) + d(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::residual_of_fields;

    fn pts(n: usize) -> Vec<Vec<f64>> {
        SampleSpec::cube(n, 0.2, 0.9, 10, 5).points().unwrap()
    }

    #[test]
    fn flat_geometry() {
        let g = GeometryData::from_omega(&Field::zero(3, 3), OmegaKind::RealSymmetric).unwrap();
        let p = pts(3);
        let r = residual_of_fields(&g.christoffel, &p, Default::default()).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert_eq!(g.metric.value_at(&p[0]).unwrap(), CMat::identity(3, 3));
    }

    #[test]
    fn one_dimensional_christoffel() {
        // g = e^{−2w}, Γ¹₁₁ = −w′
        let w = Expr::coord(0).sin() * 0.3;
        let g = GeometryData::from_omega(&Field::expr(w.clone()), OmegaKind::RealSymmetric).unwrap();
        for p in pts(1) {
            let gam = g.christoffel[0].value_at(&p).unwrap()[(0, 0)];
            let expect = -w.diff(0).eval(&p).unwrap();
            assert!((gam - expect).norm() < 1e-12);
            let metric = g.metric.value_at(&p).unwrap()[(0, 0)];
            assert!((metric - (w.eval(&p).unwrap() * -2.0).exp()).norm() < 1e-12);
        }
        let r = residual_of_fields(&g.metric_compatibility(), &pts(1), Default::default()).unwrap();
        assert!(r.max_abs < 1e-10);
    }

    #[test]
    fn canonical_triples_are_quaternionic() {
        for asd in [false, true] {
            assert!(crate::clifford::quaternion_residual(&canonical_triple(asd)) < 1e-15);
        }
    }
}
