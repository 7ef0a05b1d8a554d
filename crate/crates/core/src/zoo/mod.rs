//! Constructors for the model catalogue.
//!
//! Each constructor returns a [`Model`]: named supercharges, the Hamiltonian
//! `{Q̄₁,Q₁}/2`, auxiliary operators, and a list of identities (alternative
//! constructions that must agree, constraint algebras) for `verify`.

use std::sync::Arc;

use crate::clifford::Ordering;
use crate::diffop::{DiffOp, Space};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{Field, Kind};
use crate::geometry::{ComplexStructure, GeometryData};
use crate::jet::C64;
use crate::sample::{Exclusion, SampleSpec};
use crate::verify::Expect;

mod flat;
mod gauge;
mod kahler;
mod wz;

pub use flat::{de_rham, dolbeault, free_complex, free_real, quasicomplex, torsion_rotate, witten, DeRhamOptions, DolbeaultOptions, TorsionKind};
pub use gauge::{gauge_sym3, gauge_sym3_resolved, instanton};
pub use kahler::{gibbons_hawking_model, hkt_conformal, hyperkahler, kahler, okt_flat};
pub use wz::{wz_interacting, wz_modes};

/// Which suite `verify::check_expected` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algebra {
    N2,
    Extended,
    Central,
    Kahler,
    HyperKahler,
    Gauge,
    Exploratory,
}

impl Algebra {
    pub fn label(self) -> &'static str {
        match self {
            Algebra::N2 => "N=2",
            Algebra::Extended => "extended (pairwise)",
            Algebra::Central => "central charge",
            Algebra::Kahler => "N=4 Kähler (Theorem 1)",
            Algebra::HyperKahler => "N=8 hyper-Kähler (Theorem 2)",
            Algebra::Gauge => "gauge constraints",
            Algebra::Exploratory => "exploratory",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Charge {
    pub name: String,
    pub q: DiffOp,
    pub qbar: DiffOp,
}

/// An operator that should vanish (or, for negative controls, not).
#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub op: DiffOp,
    pub tol: Option<f64>,
    pub expect: Expect,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub space: Arc<Space>,
    pub supercharges: Vec<Charge>,
    /// Hermitian supercharges (real form), e.g. the OKT set.
    pub hermitian: Vec<(String, DiffOp)>,
    pub hamiltonian: DiffOp,
    pub constraints: Vec<(String, DiffOp)>,
    pub central: Vec<(String, DiffOp)>,
    pub extras: Vec<(String, DiffOp)>,
    pub identities: Vec<Identity>,
    pub measure: Field,
    pub expected: Algebra,
    pub recipe: Vec<String>,
    pub geometry: Option<GeometryData>,
    pub structures: Vec<ComplexStructure>,
    /// Default sampling box per coordinate and exclusion strings.
    pub domain: Vec<(f64, f64)>,
    pub exclusions: Vec<String>,
}

impl Model {
    pub fn new(name: &str, space: Arc<Space>, expected: Algebra) -> Model {
        let n = space.dim();
        Model {
            name: name.to_string(),
            hamiltonian: DiffOp::zero(&space),
            space,
            supercharges: Vec::new(),
            hermitian: Vec::new(),
            constraints: Vec::new(),
            central: Vec::new(),
            extras: Vec::new(),
            identities: Vec::new(),
            measure: Field::real(1.0),
            expected,
            recipe: Vec::new(),
            geometry: None,
            structures: Vec::new(),
            domain: vec![(-1.0, 1.0); n],
            exclusions: Vec::new(),
        }
    }

    pub fn charge(&mut self, name: &str, q: DiffOp, qbar: DiffOp) {
        self.supercharges.push(Charge { name: name.into(), q, qbar });
    }

    /// Supercharge with `Q̄` the measure adjoint.
    pub fn charge_adj(&mut self, name: &str, q: DiffOp) {
        let qbar = q.adjoint_with_measure(&self.measure);
        self.charge(name, q, qbar);
    }

    pub fn extra(&self, name: &str) -> Result<&DiffOp> {
        self.extras.iter().find(|(n, _)| n == name).map(|(_, o)| o).ok_or_else(|| Error::UnknownName(name.into()))
    }

    pub fn identity(&mut self, name: &str, op: DiffOp, tol: Option<f64>) {
        self.identities.push(Identity { name: name.into(), op, tol, expect: Expect::Holds });
    }

    pub fn identity_expect(&mut self, name: &str, op: DiffOp, tol: Option<f64>, expect: Expect) {
        self.identities.push(Identity { name: name.into(), op, tol, expect });
    }

    pub fn step(&mut self, s: impl Into<String>) {
        self.recipe.push(s.into());
    }

    /// `H = {Q̄₁,Q₁}/2`, or `𝒬₁²` for purely Hermitian models.
    pub fn finish(mut self) -> Result<Model> {
        self.hamiltonian = if let Some(c) = self.supercharges.first() {
            c.qbar.anticommutator(&c.q)?.scale_re(0.5)
        } else if let Some((_, q)) = self.hermitian.first() {
            q.compose(q)?
        } else {
            DiffOp::zero(&self.space)
        };
        Ok(self)
    }

    /// Look up any named operator: `Q`, `Qbar`, `H`, extras, constraints, ...
    pub fn op(&self, name: &str) -> Result<DiffOp> {
        if name == "H" {
            return Ok(self.hamiltonian.clone());
        }
        for c in &self.supercharges {
            if c.name == name {
                return Ok(c.q.clone());
            }
            if format!("{}bar", c.name) == name {
                return Ok(c.qbar.clone());
            }
        }
        let lists = [&self.hermitian, &self.constraints, &self.central, &self.extras];
        for l in lists {
            if let Some((_, o)) = l.iter().find(|(n, _)| n == name) {
                return Ok(o.clone());
            }
        }
        if let Some(id) = self.identities.iter().find(|i| i.name == name) {
            return Ok(id.op.clone());
        }
        Err(Error::UnknownName(name.into()))
    }

    pub fn op_names(&self) -> Vec<String> {
        let mut v = vec!["H".to_string()];
        for c in &self.supercharges {
            v.push(c.name.clone());
            v.push(format!("{}bar", c.name));
        }
        for l in [&self.hermitian, &self.constraints, &self.central, &self.extras] {
            v.extend(l.iter().map(|(n, _)| n.clone()));
        }
        v.extend(self.identities.iter().map(|i| i.name.clone()));
        v
    }

    pub fn sample_spec(&self, n_points: usize, seed: u64) -> Result<SampleSpec> {
        let mut s = SampleSpec::new(self.domain.clone(), n_points, seed);
        for e in &self.exclusions {
            s = s.exclude(Exclusion::parse(e, &self.space.coords)?);
        }
        Ok(s)
    }

    /// Every coefficient field of every operator the model carries.
    pub fn all_fields(&self) -> Vec<Field> {
        let mut ops: Vec<&DiffOp> = vec![&self.hamiltonian];
        for c in &self.supercharges {
            ops.push(&c.q);
            ops.push(&c.qbar);
        }
        for l in [&self.hermitian, &self.constraints, &self.central, &self.extras] {
            ops.extend(l.iter().map(|(_, o)| o));
        }
        ops.into_iter().flat_map(|o| o.fields()).collect()
    }

    /// The measure and the coefficient fields of the supercharges only.
    pub fn charge_fields(&self) -> Vec<Field> {
        let mut out = vec![self.measure.clone()];
        for c in &self.supercharges {
            out.extend(c.q.fields());
            out.extend(c.qbar.fields());
        }
        for (_, o) in &self.hermitian {
            out.extend(o.fields());
        }
        out
    }
}

// --- shared helpers --------------------------------------------------------

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn one() -> C64 {
    c(1.0, 0.0)
}

pub(crate) fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// `x1, y1, x2, y2, …` for `d` complex coordinates.
pub(crate) fn complex_names(d: usize) -> Vec<String> {
    (1..=d).flat_map(|k| [format!("x{k}"), format!("y{k}")]).collect()
}

pub(crate) fn sum_ops(space: &Arc<Space>, ops: &[DiffOp]) -> Result<DiffOp> {
    let parts: Vec<(C64, &DiffOp)> = ops.iter().map(|o| (one(), o)).collect();
    if parts.is_empty() {
        return Ok(DiffOp::zero(space));
    }
    DiffOp::lin(&parts)
}

/// `Σ_A M[A][col] ψ_A` (or `ψ̄_A`).
pub(crate) fn frame_fermion(space: &Space, m: &Field, col: usize, bar: bool) -> Field {
    let rep = &space.rep;
    let rows = m.shape().0;
    let parts = (0..rows)
        .filter_map(|a| {
            let e = m.entry(a, col);
            if e.is_zero() {
                return None;
            }
            let f = if bar { rep.psibar_field(a) } else { rep.psi_field(a) };
            Some((one(), e.mul(&f)))
        })
        .collect();
    let out = Field::sum(parts);
    if out.is_scalar() {
        Field::zero(space.module_dim(), space.module_dim())
    } else {
        out
    }
}

/// `Σ_N Φ_N (p_N − i Ω_{N,AB} ψ_A ψ̄_B)` with `Φ_N = Σ_A M[A][N] ψ_A`.
pub(crate) fn sigma_charge(space: &Arc<Space>, m: &Field, conn: &[Field]) -> Result<DiffOp> {
    let mut terms = Vec::new();
    for (n, om) in conn.iter().enumerate() {
        let phi = frame_fermion(space, m, n, false);
        if phi.is_zero() {
            continue;
        }
        let bil = space.rep.bilinear(om, Ordering::PsiPsibar)?;
        let inner = DiffOp::momentum(space, n).sub(&DiffOp::mult(space, bil).scale(c(0.0, 1.0)))?;
        terms.push(inner.left_mul(&phi));
    }
    sum_ops(space, &terms)
}

/// `Σ_A ψ_A p_A` over the first `n` coordinates.
pub(crate) fn flat_real_charge(space: &Arc<Space>) -> Result<DiffOp> {
    let ops: Vec<DiffOp> = (0..space.dim()).map(|a| DiffOp::momentum(space, a).left_mul(&space.rep.psi_field(a))).collect();
    sum_ops(space, &ops)
}

/// Re-index an expression-grid field (e.g. lift a field of `x_k` to the
/// interleaved complex coordinates).
pub(crate) fn remap_field(f: &Field, map: &dyn Fn(usize) -> usize) -> Result<Field> {
    let (r, k) = f.shape();
    match f.kind() {
        Kind::Zero | Kind::Const { .. } => Ok(f.clone()),
        Kind::Exprs(v) => Ok(Field::exprs(r, k, v.iter().map(|e| e.substitute(&|i| Expr::coord(map(i)))).collect())),
        _ => Err(Error::Invalid("only expression or constant fields can be re-indexed".into())),
    }
}

/// Number of coordinates an expression-grid field touches (1 + highest index).
pub(crate) fn check_coords(f: &Field, n: usize, what: &str) -> Result<()> {
    let d = f.deps();
    if n < 64 && d >> n != 0 {
        return Err(Error::Invalid(format!("{what} refers to coordinates beyond the {n} of this model")));
    }
    Ok(())
}
