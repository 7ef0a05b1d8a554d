//! Matrix-valued differential operators `Σ_α F_α(x) ∂^α`.
//!
//! Coefficients act on the fermionic module (dense matrices); the grading is
//! carried by the matrices themselves, so brackets only need the parities
//! of their operands. Operators are stored with `∂`; `p = −i∂`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::clifford::FermionRep;
use crate::error::{Error, Result};
use crate::field::{Field, Reduction};
use crate::jet::{MultiIndex, C64};
use crate::sample::{map_points, residual_of_fields, Execution, Residual, SampleSpec};

/// Highest derivative order an operator may carry.
pub const MAX_OP_ORDER: usize = 4;

/// Coordinates plus fermionic module shared by a family of operators.
#[derive(Debug)]
pub struct Space {
    pub coords: Vec<String>,
    pub rep: FermionRep,
}

impl Space {
    pub fn new(coords: Vec<String>, rep: FermionRep) -> Arc<Space> {
        Arc::new(Space { coords, rep })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn module_dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    fn same(&self, other: &Space) -> bool {
        self.coords == other.coords && self.rep == other.rep
    }
}

#[derive(Clone, Debug)]
pub struct DiffOp {
    space: Arc<Space>,
    terms: BTreeMap<MultiIndex, Field>,
}

fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

fn i_pow(n: usize) -> C64 {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][n % 4]
}

impl DiffOp {
    pub fn zero(space: &Arc<Space>) -> DiffOp {
        DiffOp { space: space.clone(), terms: BTreeMap::new() }
    }

    /// Build from `(α, F_α)` pairs; repeated indices are summed.
    pub fn from_terms(space: &Arc<Space>, terms: Vec<(MultiIndex, Field)>) -> Result<DiffOp> {
        let mut acc: BTreeMap<MultiIndex, Vec<(C64, Field)>> = BTreeMap::new();
        for (a, f) in terms {
            if a.nvars() != space.dim() {
                return Err(Error::Invalid(format!("multi-index over {} variables on a {}-dimensional space", a.nvars(), space.dim())));
            }
            if a.order() > MAX_OP_ORDER {
                return Err(Error::OrderOverflow { order: a.order(), cap: MAX_OP_ORDER });
            }
            let n = space.module_dim();
            if !f.is_scalar() && f.shape() != (n, n) {
                return Err(Error::Invalid(format!("coefficient shape {:?} on a module of dimension {n}", f.shape())));
            }
            acc.entry(a).or_default().push((cone(), f));
        }
        Ok(DiffOp::collect(space, acc))
    }

    fn collect(space: &Arc<Space>, acc: BTreeMap<MultiIndex, Vec<(C64, Field)>>) -> DiffOp {
        let terms = acc.into_iter().map(|(a, parts)| (a, Field::sum(parts))).filter(|(_, f)| !f.is_zero()).collect();
        DiffOp { space: space.clone(), terms }
    }

    /// Multiplication by a field.
    pub fn mult(space: &Arc<Space>, f: Field) -> DiffOp {
        DiffOp::from_terms(space, vec![(MultiIndex::zero(space.dim()), f)]).expect("zeroth-order term")
    }

    pub fn scalar(space: &Arc<Space>, c: C64) -> DiffOp {
        DiffOp::mult(space, Field::scalar(c))
    }

    pub fn identity(space: &Arc<Space>) -> DiffOp {
        DiffOp::scalar(space, cone())
    }

    /// `∂_var`.
    pub fn partial(space: &Arc<Space>, var: usize) -> DiffOp {
        DiffOp::from_terms(space, vec![(MultiIndex::unit(space.dim(), var), Field::real(1.0))]).expect("first-order term")
    }

    /// `p_var = −i ∂_var`.
    pub fn momentum(space: &Arc<Space>, var: usize) -> DiffOp {
        DiffOp::partial(space, var).scale(C64::new(0.0, -1.0))
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Field> {
        &self.terms
    }

    pub fn coefficient(&self, a: &MultiIndex) -> Option<&Field> {
        self.terms.get(a)
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    fn check_space(&self, other: &DiffOp) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space.same(&other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!("{:?} vs {:?}", self.space.coords, other.space.coords)))
        }
    }

    pub fn lin(parts: &[(C64, &DiffOp)]) -> Result<DiffOp> {
        let first = parts.first().ok_or_else(|| Error::Invalid("empty linear combination".into()))?.1;
        let mut acc: BTreeMap<MultiIndex, Vec<(C64, Field)>> = BTreeMap::new();
        for (c, op) in parts {
            first.check_space(op)?;
            for (a, f) in &op.terms {
                acc.entry(a.clone()).or_default().push((*c, f.clone()));
            }
        }
        Ok(DiffOp::collect(&first.space, acc))
    }

    pub fn add(&self, other: &DiffOp) -> Result<DiffOp> {
        DiffOp::lin(&[(cone(), self), (cone(), other)])
    }

    pub fn sub(&self, other: &DiffOp) -> Result<DiffOp> {
        DiffOp::lin(&[(cone(), self), (-cone(), other)])
    }

    pub fn scale(&self, c: C64) -> DiffOp {
        let terms = self.terms.iter().map(|(a, f)| (a.clone(), f.scale(c))).filter(|(_, f)| !f.is_zero()).collect();
        DiffOp { space: self.space.clone(), terms }
    }

    pub fn scale_re(&self, x: f64) -> DiffOp {
        self.scale(C64::new(x, 0.0))
    }

    pub fn neg(&self) -> DiffOp {
        self.scale(-cone())
    }

    /// `F ∘ A` (no derivatives act on `F`).
    pub fn left_mul(&self, f: &Field) -> DiffOp {
        let terms = self.terms.iter().map(|(a, g)| (a.clone(), f.mul(g))).filter(|(_, g)| !g.is_zero()).collect();
        DiffOp { space: self.space.clone(), terms }
    }

    /// `A ∘ F`, with derivatives of `A` distributed over `F` by Leibniz.
    pub fn right_mul(&self, f: &Field) -> DiffOp {
        let mut acc: BTreeMap<MultiIndex, Vec<(C64, Field)>> = BTreeMap::new();
        for (a, g) in &self.terms {
            for gamma in a.sub_indices() {
                let rest = a.checked_sub(&gamma).expect("sub-index");
                let df = f.deriv(&gamma);
                if df.is_zero() {
                    continue;
                }
                acc.entry(rest).or_default().push((C64::new(a.binomial(&gamma), 0.0), g.mul(&df)));
            }
        }
        DiffOp::collect(&self.space, acc)
    }

    /// `A ∘ B` in normal form: `Σ C(α,γ) F_α (∂^γ G_β) ∂^{α−γ+β}`.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        self.check_space(other)?;
        let ord = self.order() + other.order();
        if ord > MAX_OP_ORDER && !self.terms.is_empty() && !other.terms.is_empty() {
            return Err(Error::OrderOverflow { order: ord, cap: MAX_OP_ORDER });
        }
        let mut acc: BTreeMap<MultiIndex, Vec<(C64, Field)>> = BTreeMap::new();
        for (a, f) in &self.terms {
            let subs = a.sub_indices();
            for (b, g) in &other.terms {
                for gamma in &subs {
                    let dg = g.deriv(gamma);
                    if dg.is_zero() {
                        continue;
                    }
                    let out = a.checked_sub(gamma).expect("sub-index").add(b);
                    acc.entry(out).or_default().push((C64::new(a.binomial(gamma), 0.0), f.mul(&dg)));
                }
            }
        }
        Ok(DiffOp::collect(&self.space, acc))
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &DiffOp) -> Result<DiffOp> {
        self.compose(other)?.add(&other.compose(self)?)
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &DiffOp) -> Result<DiffOp> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Graded bracket `AB − (−1)^{|A||B|} BA` for parities `pa`, `pb`.
    pub fn bracket(&self, other: &DiffOp, pa: bool, pb: bool) -> Result<DiffOp> {
        if pa && pb {
            self.anticommutator(other)
        } else {
            self.commutator(other)
        }
    }

    /// Formal adjoint for the flat measure:
    /// `(F ∂^α)† = (−1)^{|α|} ∂^α ∘ F†`, rewritten in normal form.
    pub fn naive_dagger(&self) -> DiffOp {
        let mut acc: BTreeMap<MultiIndex, Vec<(C64, Field)>> = BTreeMap::new();
        for (a, f) in &self.terms {
            let sign = if a.order() % 2 == 0 { 1.0 } else { -1.0 };
            let fd = f.adjoint();
            for gamma in a.sub_indices() {
                let d = fd.deriv(&gamma);
                if d.is_zero() {
                    continue;
                }
                let rest = a.checked_sub(&gamma).expect("sub-index");
                acc.entry(rest).or_default().push((C64::new(sign * a.binomial(&gamma), 0.0), d));
            }
        }
        DiffOp::collect(&self.space, acc)
    }

    /// Adjoint for the measure `μ dx`: `μ⁻¹ ∘ A† ∘ μ`.
    pub fn adjoint_with_measure(&self, mu: &Field) -> DiffOp {
        assert!(mu.is_scalar(), "measure must be a scalar field");
        self.naive_dagger().right_mul(mu).left_mul(&mu.inv())
    }

    /// Exact conjugation `e^R ∘ A ∘ e^{−R}`.
    pub fn similarity(&self, r: &Field) -> DiffOp {
        if r.is_zero() {
            return self.clone();
        }
        self.right_mul(&r.neg().exp()).left_mul(&r.exp())
    }

    /// Conjugation by an explicit pair `U ∘ A ∘ V` (e.g. `V = U⁻¹`).
    pub fn conjugate_by(&self, u: &Field, v: &Field) -> DiffOp {
        self.right_mul(v).left_mul(u)
    }

    /// Hamiltonian reduction onto `p_dropped = 0`. Every coefficient must be
    /// independent of the dropped coordinates; this is verified at the
    /// sample points of `spec` (which lives on the unreduced space).
    pub fn reduce_cyclic(&self, dropped: &[usize], spec: &SampleSpec) -> Result<DiffOp> {
        let n = self.space.dim();
        if dropped.iter().any(|&d| d >= n) {
            return Err(Error::Invalid("dropped coordinate out of range".into()));
        }
        let points = spec.points()?;
        self.check_independent(dropped, &points, Execution::default())?;
        let keep: Vec<usize> = (0..n).filter(|i| !dropped.contains(i)).collect();
        let ctx = Arc::new(Reduction { keep: keep.clone(), anchor: points[0].clone(), full_names: self.space.coords.clone() });
        let space = Space::new(keep.iter().map(|&k| self.space.coords[k].clone()).collect(), self.space.rep.clone());
        let mut terms = Vec::new();
        for (a, f) in &self.terms {
            if dropped.iter().any(|&d| a.get(d) > 0) {
                continue;
            }
            terms.push((a.project(&keep), f.restrict(&ctx)));
        }
        DiffOp::from_terms(&space, terms)
    }

    /// Same as [`reduce_cyclic`](Self::reduce_cyclic) but onto an existing
    /// reduced space (so results of several reductions can be compared).
    pub fn reduce_onto(&self, dropped: &[usize], spec: &SampleSpec, target: &Arc<Space>) -> Result<DiffOp> {
        let r = self.reduce_cyclic(dropped, spec)?;
        if !r.space.same(target) {
            return Err(Error::SpaceMismatch(format!("{:?} vs {:?}", r.space.coords, target.coords)));
        }
        Ok(DiffOp { space: target.clone(), terms: r.terms })
    }

    fn check_independent(&self, dropped: &[usize], points: &[Vec<f64>], exec: Execution) -> Result<()> {
        let mask = dropped.iter().fold(0u64, |m, &d| m | 1 << d);
        let suspects: Vec<&Field> = self.terms.values().filter(|f| f.deps() & mask != 0).collect();
        if suspects.is_empty() {
            return Ok(());
        }
        let n = self.space.dim();
        let derivs: Vec<(usize, Field)> = dropped
            .iter()
            .flat_map(|&d| suspects.iter().map(move |f| (d, f.deriv1(n, d))))
            .collect();
        let fields: Vec<Field> = derivs.iter().map(|(_, f)| f.clone()).collect();
        let values: Vec<Field> = suspects.iter().map(|f| (*f).clone()).collect();
        let per_point = map_points(points, exec, |p| {
            let d = crate::sample::fields_at(&fields, p)?;
            let v = crate::sample::fields_at(&values, p)?;
            Ok::<_, crate::error::EvalError>((d.0, v.0))
        });
        for (p, r) in points.iter().zip(per_point) {
            let (d, v) = r.map_err(|source| Error::AtPoint { point: p.clone(), source })?;
            if d > 1e-9 * (1.0 + v) {
                // name the first offending coordinate
                let coord = dropped
                    .iter()
                    .find(|&&c| {
                        let fs: Vec<Field> = derivs.iter().filter(|(k, _)| *k == c).map(|(_, f)| f.clone()).collect();
                        crate::sample::fields_at(&fs, p).map(|x| x.0 > 1e-9 * (1.0 + v)).unwrap_or(true)
                    })
                    .copied()
                    .unwrap_or(dropped[0]);
                return Err(Error::Dependence { coord: self.space.coords[coord].clone(), magnitude: d });
            }
        }
        Ok(())
    }

    /// Coefficient fields, for residual evaluation.
    pub fn fields(&self) -> Vec<Field> {
        self.terms.values().cloned().collect()
    }

    pub fn residual_at(&self, points: &[Vec<f64>], exec: Execution) -> Result<Residual> {
        residual_of_fields(&self.fields(), points, exec)
    }

    pub fn residual(&self, spec: &SampleSpec) -> Result<Residual> {
        self.residual_at(&spec.points()?, Execution::default())
    }

    /// Probabilistic zero test: pass iff `max |entry| ≤ tol·(1 + scale)`.
    pub fn is_zero(&self, spec: &SampleSpec, tol: f64) -> Result<(bool, Residual)> {
        let r = self.residual(spec)?;
        Ok((r.passes(tol), r))
    }

    /// Apply the operator to a (matrix- or vector-valued) field.
    pub fn apply(&self, f: &Field) -> Field {
        Field::sum(self.terms.iter().map(|(a, g)| (cone(), g.mul(&f.deriv(a)))).collect())
    }

    /// Human-readable normal-ordered text, with `∂^α` written as
    /// `i^{|α|} p^α`.
    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names = &self.space.coords;
        let mut lines = Vec::new();
        for (a, f) in self.terms.iter().rev() {
            let coef = f.scale(i_pow(a.order()));
            let mut s = coef.display(names);
            if a.order() > 0 {
                s = format!("({s})");
                for (i, &k) in a.as_slice().iter().enumerate() {
                    match k {
                        0 => {}
                        1 => {
                            let _ = write!(s, " p_{}", names[i]);
                        }
                        _ => {
                            let _ = write!(s, " p_{}^{k}", names[i]);
                        }
                    }
                }
            }
            lines.push(s);
        }
        lines.join("\n  + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::complex_fermions;
    use crate::expr::Expr;

    fn space1() -> Arc<Space> {
        Space::new(vec!["x".into()], complex_fermions(1, 1).unwrap())
    }

    #[test]
    fn leibniz_on_multiplication() {
        let s = space1();
        let f = Field::expr(Expr::coord(0).powi(3));
        let lhs = DiffOp::partial(&s, 0).compose(&DiffOp::mult(&s, f.clone())).unwrap();
        let rhs = DiffOp::mult(&s, f.clone())
            .compose(&DiffOp::partial(&s, 0))
            .unwrap()
            .add(&DiffOp::mult(&s, Field::expr(Expr::coord(0).powi(2) * 3.0)))
            .unwrap();
        let spec = SampleSpec::cube(1, -2.0, 2.0, 10, 1);
        let (ok, r) = lhs.sub(&rhs).unwrap().is_zero(&spec, 1e-12).unwrap();
        assert!(ok, "{r:?}");
    }

    #[test]
    fn momentum_is_self_adjoint() {
        let s = space1();
        let p = DiffOp::momentum(&s, 0);
        let spec = SampleSpec::cube(1, -1.0, 1.0, 5, 2);
        assert!(p.naive_dagger().sub(&p).unwrap().is_zero(&spec, 0.0).unwrap().0);
    }

    #[test]
    fn dagger_of_f_partial() {
        let s = space1();
        let f = Field::expr(Expr::coord(0).sin() * Expr::imag_unit());
        let op = DiffOp::partial(&s, 0).left_mul(&f);
        let fbar = Field::expr(-(Expr::coord(0).sin() * Expr::imag_unit()));
        let expect = DiffOp::partial(&s, 0)
            .left_mul(&fbar)
            .add(&DiffOp::mult(&s, Field::expr(-(Expr::coord(0).cos() * Expr::imag_unit()))))
            .unwrap()
            .neg();
        let spec = SampleSpec::cube(1, -1.0, 1.0, 8, 3);
        assert!(op.naive_dagger().sub(&expect).unwrap().is_zero(&spec, 1e-13).unwrap().0);
    }

    #[test]
    fn order_overflow_detected() {
        let s = space1();
        let p = DiffOp::partial(&s, 0);
        let p2 = p.compose(&p).unwrap();
        let p4 = p2.compose(&p2).unwrap();
        assert!(matches!(p4.compose(&p), Err(Error::OrderOverflow { .. })));
    }

    #[test]
    fn reduction_rejects_dependence() {
        let s = Space::new(vec!["x".into(), "y".into()], complex_fermions(1, 1).unwrap());
        let op = DiffOp::mult(&s, Field::expr(Expr::coord(1)));
        let spec = SampleSpec::cube(2, -1.0, 1.0, 4, 0);
        assert!(matches!(op.reduce_cyclic(&[1], &spec), Err(Error::Dependence { .. })));
        let op = DiffOp::partial(&s, 0).add(&DiffOp::partial(&s, 1)).unwrap();
        let r = op.reduce_cyclic(&[1], &spec).unwrap();
        assert_eq!(r.space().coords, vec!["x".to_string()]);
        assert_eq!(r.order(), 1);
        assert_eq!(r.terms().len(), 1);
    }
}
