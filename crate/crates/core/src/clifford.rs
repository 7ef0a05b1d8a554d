//! Matrix representations of fermionic operators and fixed numeric tensors.
//!
//! Basis ordering (Jordan–Wigner, mode 1 outermost): the Fock state with
//! occupations `n_1 … n_d` has index `Σ n_a 2^(d−a)`. `ψ_a` raises `n_a`:
//! `ψ_a = Z ⊗ … ⊗ Z ⊗ σ⁺ ⊗ 1 ⊗ … ⊗ 1` with `σ⁺ = [[0,0],[1,0]]` and
//! `Z = diag(1,−1)`; `ψ̄_a = ψ_a†`. A colour factor is tensored on the
//! right (innermost), so every fermion operator is `op ⊗ 1_color`.
//!
//! Hermitian fermions are the real and imaginary parts of complex ones:
//! `ψ_{2a−1} = (ψ_a + ψ̄_a)/√2`, `ψ_{2a} = i(ψ_a − ψ̄_a)/√2`. The unscaled
//! `γ_A = √2 ψ_A` have entries in `{0, ±1, ±i}` and are kept for exact checks.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::jet::{max_abs, CMat, C64};

pub const MAX_FOCK_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FermionKind {
    Complex(usize),
    Hermitian(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    PsiPsibar,
    PsibarPsi,
    PsiPsi,
    PsibarPsibar,
}

#[derive(Clone)]
pub struct FermionRep {
    kind: FermionKind,
    fock_dim: usize,
    color_dim: usize,
    psi: Vec<CMat>,
    psibar: Vec<CMat>,
    gamma: Vec<CMat>,
}

impl fmt::Debug for FermionRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FermionRep").field("kind", &self.kind).field("fock_dim", &self.fock_dim).field("color_dim", &self.color_dim).finish()
    }
}

impl PartialEq for FermionRep {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.color_dim == other.color_dim
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn kron_all(factors: &[CMat]) -> CMat {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, m| acc.kronecker(m))
}

/// Jordan–Wigner creation operators for `d` modes.
pub fn complex_fermions(d: usize, color_dim: usize) -> Result<FermionRep> {
    if d == 0 {
        return Err(Error::Invalid("need at least one fermion mode".into()));
    }
    if d > 12 || color_dim == 0 || (1usize << d) > MAX_FOCK_DIM {
        return Err(Error::DimensionCap(format!("{d} complex fermions exceed Fock dimension {MAX_FOCK_DIM}")));
    }
    let one = CMat::identity(2, 2);
    let z = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let sp = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let color = CMat::identity(color_dim, color_dim);
    let mut psi = Vec::with_capacity(d);
    for a in 0..d {
        let mut f: Vec<CMat> = (0..d)
            .map(|b| match b.cmp(&a) {
                std::cmp::Ordering::Less => z.clone(),
                std::cmp::Ordering::Equal => sp.clone(),
                std::cmp::Ordering::Greater => one.clone(),
            })
            .collect();
        f.push(color.clone());
        psi.push(kron_all(&f));
    }
    let psibar = psi.iter().map(|m| m.adjoint()).collect();
    Ok(FermionRep { kind: FermionKind::Complex(d), fock_dim: 1 << d, color_dim, psi, psibar, gamma: Vec::new() })
}

/// Hermitian (Clifford) fermions for even `big_d`.
pub fn hermitian_fermions(big_d: usize) -> Result<FermionRep> {
    hermitian_fermions_colored(big_d, 1)
}

pub fn hermitian_fermions_colored(big_d: usize, color_dim: usize) -> Result<FermionRep> {
    if big_d == 0 || big_d % 2 == 1 {
        return Err(Error::Invalid(format!("hermitian fermions need an even positive count, got {big_d}")));
    }
    if big_d > 16 {
        return Err(Error::DimensionCap(format!("{big_d} hermitian fermions exceed the cap of 16")));
    }
    realify(&complex_fermions(big_d / 2, color_dim)?)
}

/// Real/imaginary parts of complex fermions as Hermitian fermions.
pub fn realify(rep: &FermionRep) -> Result<FermionRep> {
    let FermionKind::Complex(d) = rep.kind else {
        return Err(Error::Invalid("realify needs a complex representation".into()));
    };
    let mut gamma = Vec::with_capacity(2 * d);
    for a in 0..d {
        gamma.push(&rep.psi[a] + &rep.psibar[a]);
        gamma.push((&rep.psi[a] - &rep.psibar[a]) * c(0.0, 1.0));
    }
    let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let psi: Vec<CMat> = gamma.iter().map(|g| g * s).collect();
    Ok(FermionRep {
        kind: FermionKind::Hermitian(2 * d),
        fock_dim: rep.fock_dim,
        color_dim: rep.color_dim,
        psibar: psi.clone(),
        psi,
        gamma,
    })
}

impl FermionRep {
    pub fn kind(&self) -> FermionKind {
        self.kind
    }

    /// Number of fermion operators ψ (complex modes or Hermitian generators).
    pub fn count(&self) -> usize {
        self.psi.len()
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn color_dim(&self) -> usize {
        self.color_dim
    }

    /// Total matrix dimension, fermions times colour.
    pub fn dim(&self) -> usize {
        self.fock_dim * self.color_dim
    }

    pub fn is_hermitian(&self) -> bool {
        matches!(self.kind, FermionKind::Hermitian(_))
    }

    pub fn psi(&self, a: usize) -> &CMat {
        &self.psi[a]
    }

    pub fn psibar(&self, a: usize) -> &CMat {
        &self.psibar[a]
    }

    /// Exact `γ_A = √2 ψ_A` (Hermitian kind only).
    pub fn gamma(&self, a: usize) -> Option<&CMat> {
        self.gamma.get(a)
    }

    pub fn identity(&self) -> CMat {
        CMat::identity(self.dim(), self.dim())
    }

    pub fn psi_field(&self, a: usize) -> Field {
        Field::labelled(self.psi[a].clone(), format!("ψ_{}", a + 1))
    }

    pub fn psibar_field(&self, a: usize) -> Field {
        if self.is_hermitian() {
            return self.psi_field(a);
        }
        Field::labelled(self.psibar[a].clone(), format!("ψ̄_{}", a + 1))
    }

    /// `1_fermions ⊗ m` for a colour-space matrix `m`.
    pub fn color_op(&self, m: &CMat) -> CMat {
        assert_eq!(m.nrows(), self.color_dim, "colour matrix dimension");
        CMat::identity(self.fock_dim, self.fock_dim).kronecker(m)
    }

    /// `Σ_a ψ_a ψ̄_a` (complex kind).
    pub fn fermion_number(&self) -> CMat {
        let mut n = CMat::zeros(self.dim(), self.dim());
        for a in 0..self.count() {
            n += &self.psi[a] * &self.psibar[a];
        }
        n
    }

    /// `(−1)^F` as a diagonal matrix.
    pub fn parity(&self) -> CMat {
        let mut p = CMat::zeros(self.dim(), self.dim());
        for i in 0..self.fock_dim {
            let s = if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            for k in 0..self.color_dim {
                let j = i * self.color_dim + k;
                p[(j, j)] = c(s, 0.0);
            }
        }
        p
    }

    fn left(&self, o: Ordering, a: usize) -> &CMat {
        match o {
            Ordering::PsiPsibar | Ordering::PsiPsi => &self.psi[a],
            _ => &self.psibar[a],
        }
    }

    fn right(&self, o: Ordering, b: usize) -> &CMat {
        match o {
            Ordering::PsiPsibar | Ordering::PsibarPsibar => &self.psibar[b],
            _ => &self.psi[b],
        }
    }

    /// Constant bilinear `Σ M_ab L_a R_b` for a numeric matrix.
    pub fn bilinear_const(&self, m: &CMat, o: Ordering) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for a in 0..m.nrows() {
            for b in 0..m.ncols() {
                if m[(a, b)] != C64::default() {
                    out += self.left(o, a) * self.right(o, b) * m[(a, b)];
                }
            }
        }
        out
    }

    /// Field `x ↦ Σ M_ab(x) L_a R_b` in the requested ordering.
    pub fn bilinear(&self, m: &Field, o: Ordering) -> Result<Field> {
        let (r, k) = m.shape();
        if r > self.count() || k > self.count() {
            return Err(Error::Invalid(format!("bilinear coefficient {r}×{k} exceeds {} fermions", self.count())));
        }
        if let Some(mc) = m.as_const() {
            return Ok(Field::constant(self.bilinear_const(&mc, o)));
        }
        let mut parts = Vec::new();
        for a in 0..r {
            for b in 0..k {
                let e = m.entry(a, b);
                if e.is_zero() {
                    continue;
                }
                let op = Field::constant(self.left(o, a) * self.right(o, b));
                parts.push((c(1.0, 0.0), e.mul(&op)));
            }
        }
        let out = Field::sum(parts);
        Ok(if out.is_scalar() { Field::zero(self.dim(), self.dim()) } else { out })
    }

    /// Largest deviation from the canonical (anti)commutation relations.
    pub fn relation_residual(&self) -> f64 {
        let n = self.count();
        let id = self.identity();
        let mut worst = 0.0f64;
        let ac = |x: &CMat, y: &CMat| x * y + y * x;
        for a in 0..n {
            for b in 0..n {
                let delta = if a == b { 1.0 } else { 0.0 };
                let r = if self.is_hermitian() {
                    max_abs(&(ac(&self.psi[a], &self.psi[b]) - &id * c(delta, 0.0)))
                } else {
                    let r1 = max_abs(&(ac(&self.psi[a], &self.psibar[b]) - &id * c(delta, 0.0)));
                    let r2 = max_abs(&ac(&self.psi[a], &self.psi[b]));
                    let r3 = max_abs(&(&self.psibar[a] - self.psi[a].adjoint()));
                    r1.max(r2).max(r3)
                };
                worst = worst.max(r);
            }
        }
        worst
    }

    /// Exact Clifford check on the integer `γ`: `{γ_A, γ_B} = 2δ_AB`, `γ_A† = γ_A`.
    pub fn gamma_relations_exact(&self) -> bool {
        let id = self.identity();
        let n = self.gamma.len();
        (0..n).all(|a| {
            self.gamma[a] == self.gamma[a].adjoint()
                && (0..n).all(|b| {
                    let ac = &self.gamma[a] * &self.gamma[b] + &self.gamma[b] * &self.gamma[a];
                    ac == &id * c(if a == b { 2.0 } else { 0.0 }, 0.0)
                })
        })
    }
}

/// Levi-Civita symbol on three indices `0..3`.
pub fn epsilon3(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Levi-Civita symbol on four indices `0..4`.
pub fn epsilon4(idx: [usize; 4]) -> f64 {
    if idx.iter().any(|&i| i > 3) {
        return 0.0;
    }
    let mut v = idx;
    let mut sign = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if v[i] == v[j] {
                return 0.0;
            }
        }
    }
    for i in 0..4 {
        while v[i] != i {
            let t = v[i];
            v.swap(i, t);
            sign = -sign;
        }
    }
    sign
}

/// `ε_{αβ}` with `ε_{12} = 1`.
pub fn epsilon2(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorName {
    Eta,
    EtaBar,
    Gamma7,
    SigmaEuclid,
    SigmaMinkowski,
    Epsilon,
}

impl TensorName {
    pub fn parse(s: &str) -> Result<TensorName> {
        Ok(match s {
            "eta" => TensorName::Eta,
            "eta_bar" => TensorName::EtaBar,
            "gamma7" => TensorName::Gamma7,
            "sigma_euclid" => TensorName::SigmaEuclid,
            "sigma_minkowski" => TensorName::SigmaMinkowski,
            "epsilon" => TensorName::Epsilon,
            _ => return Err(Error::UnknownName(s.to_string())),
        })
    }
}

/// A list of constant matrices: `η^a`, `Γ^a`, `σ_μ`, or `(ε^a)_{bc} = ε_{abc}`.
#[derive(Clone, Debug)]
pub struct ConstTensor {
    pub name: TensorName,
    pub mats: Vec<CMat>,
}

fn real_mat(n: usize, f: impl Fn(usize, usize) -> f64) -> CMat {
    CMat::from_fn(n, n, |i, j| c(f(i, j), 0.0))
}

/// 't Hooft symbol `η^a_{μν}` (indices 0-based, μ = 3 is the fourth).
/// `η^a_{bc} = ε_{abc}`, `η^a_{b4} = δ_{ab}`, `η^a_{4b} = −δ_{ab}`; the
/// anti-self-dual `η̄` flips the sign of the fourth-index entries.
pub fn thooft(a: usize, mu: usize, nu: usize, bar: bool) -> f64 {
    let s = if bar { -1.0 } else { 1.0 };
    match (mu, nu) {
        (3, 3) => 0.0,
        (m, 3) => s * if m == a { 1.0 } else { 0.0 },
        (3, n) => -s * if n == a { 1.0 } else { 0.0 },
        (m, n) => epsilon3(a, m, n),
    }
}

fn block(tl: &CMat, tr: &CMat, bl: &CMat, br: &CMat) -> CMat {
    let n = tl.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(tl);
    m.view_mut((0, n), (n, n)).copy_from(tr);
    m.view_mut((n, 0), (n, n)).copy_from(bl);
    m.view_mut((n, n), (n, n)).copy_from(br);
    m
}

pub fn const_tensor(name: TensorName) -> ConstTensor {
    let eta = |bar: bool| (0..3).map(|a| real_mat(4, |m, n| thooft(a, m, n, bar))).collect::<Vec<_>>();
    let mats = match name {
        TensorName::Eta => eta(false),
        TensorName::EtaBar => eta(true),
        TensorName::Gamma7 => {
            let (e, eb) = (eta(false), eta(true));
            let z = CMat::zeros(4, 4);
            let one = CMat::identity(4, 4);
            let mut g: Vec<CMat> = eb.iter().map(|m| block(&(-m), &z, &z, m)).collect();
            g.extend(e.iter().map(|m| block(&z, m, m, &z)));
            g.push(block(&z, &one, &(-&one), &z));
            g
        }
        TensorName::SigmaEuclid => sigma_list(c(0.0, 1.0), false),
        TensorName::SigmaMinkowski => sigma_list(c(1.0, 0.0), true),
        TensorName::Epsilon => (0..3).map(|a| real_mat(3, |b, k| epsilon3(a, b, k))).collect(),
    };
    ConstTensor { name, mats }
}

/// Pauli matrices σ1, σ2, σ3.
pub fn pauli() -> [CMat; 3] {
    let z = c(0.0, 0.0);
    [
        CMat::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
        CMat::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
    ]
}

// Euclidean: (σ1, σ2, σ3, i·1) indexed μ = 1..4. Minkowski: (1, σ1, σ2, σ3).
fn sigma_list(unit: C64, unit_first: bool) -> Vec<CMat> {
    let p = pauli();
    let u = CMat::identity(2, 2) * unit;
    if unit_first {
        vec![u, p[0].clone(), p[1].clone(), p[2].clone()]
    } else {
        vec![p[0].clone(), p[1].clone(), p[2].clone(), u]
    }
}

/// Residual of the quaternion algebra `I^a I^b = −δ^{ab} + ε^{abc} I^c`.
pub fn quaternion_residual(i: &[CMat; 3]) -> f64 {
    let n = i[0].nrows();
    let id = CMat::identity(n, n);
    let mut worst = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            let mut rhs = if a == b { -&id } else { CMat::zeros(n, n) };
            for k in 0..3 {
                let e = epsilon3(a, b, k);
                if e != 0.0 {
                    rhs += &i[k] * c(e, 0.0);
                }
            }
            worst = worst.max(max_abs(&(&i[a] * &i[b] - rhs)));
        }
    }
    worst
}

/// Smallest quaternion residual of `{Γ^a, Γ^b, Γ^c}` over all orderings and
/// sign choices.
pub fn best_quaternion_residual(g: &[CMat], triple: [usize; 3]) -> f64 {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best = f64::INFINITY;
    for p in perms {
        for signs in 0..8u32 {
            let pick = |k: usize| {
                let s = if signs >> k & 1 == 1 { -1.0 } else { 1.0 };
                &g[triple[p[k]]] * c(s, 0.0)
            };
            best = best.min(quaternion_residual(&[pick(0), pick(1), pick(2)]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_is_sigma_plus() {
        let r = complex_fermions(1, 1).unwrap();
        let expect = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(r.psi(0), &expect);
        assert_eq!(r.relation_residual(), 0.0);
    }

    #[test]
    fn car_relations_exact() {
        for d in 1..=4 {
            assert_eq!(complex_fermions(d, 1).unwrap().relation_residual(), 0.0);
        }
    }

    #[test]
    fn color_factor_commutes() {
        let r = complex_fermions(3, 2).unwrap();
        let t = r.color_op(&pauli()[0]);
        for a in 0..3 {
            assert_eq!(r.psi(a) * &t, &t * r.psi(a));
        }
        assert_eq!(r.dim(), 16);
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(complex_fermions(13, 1), Err(Error::DimensionCap(_))));
        assert!(matches!(hermitian_fermions(3), Err(Error::Invalid(_))));
    }

    #[test]
    fn hermitian_d2_are_pauli() {
        let r = hermitian_fermions(2).unwrap();
        let p = pauli();
        assert_eq!(r.gamma(0).unwrap(), &p[0]);
        assert_eq!(r.gamma(1).unwrap(), &p[1]);
        assert!(r.gamma_relations_exact());
    }

    #[test]
    fn thooft_values_and_self_duality() {
        assert_eq!(thooft(0, 1, 2, false), 1.0);
        assert_eq!(thooft(0, 0, 3, false), 1.0);
        assert_eq!(thooft(0, 3, 0, false), -1.0);
        for bar in [false, true] {
            let s = if bar { -1.0 } else { 1.0 };
            for a in 0..3 {
                for m in 0..4 {
                    for n in 0..4 {
                        let mut dual = 0.0;
                        for r in 0..4 {
                            for q in 0..4 {
                                dual += 0.5 * epsilon4([m, n, r, q]) * thooft(a, r, q, bar);
                            }
                        }
                        assert_eq!(dual, s * thooft(a, m, n, bar));
                    }
                }
            }
        }
    }

    #[test]
    fn epsilon4_signs() {
        assert_eq!(epsilon4([0, 1, 2, 3]), 1.0);
        assert_eq!(epsilon4([1, 0, 2, 3]), -1.0);
        assert_eq!(epsilon4([3, 0, 1, 2]), -1.0);
        assert_eq!(epsilon4([0, 0, 2, 3]), 0.0);
    }
}
