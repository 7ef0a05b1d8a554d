//! Lazily evaluated matrix-valued fields.
//!
//! A [`Field`] is an immutable DAG. Leaves are constant matrices or grids of
//! [`Expr`]; interior nodes are sums, products, derivatives, matrix
//! exponentials, inverses and friends. A `1×1` field is a scalar: it
//! broadcasts in products and is promoted to a multiple of the identity in sums.
//!
//! Evaluation goes through an [`Evaluator`] bound to one point. It caches
//! each node at the highest jet order any consumer asked for, so shared
//! subgraphs (e.g. `e^R` used by many coefficients) are computed once.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::EvalError;
use crate::expr::Expr;
use crate::jet::{CMat, Jet, JetLayout, MatJet, MultiIndex, ScalarJet, C64, MAX_ORDER};

/// Context of a cyclic reduction: which coordinates survive and where the
/// dropped ones are pinned while evaluating the original field.
#[derive(Debug)]
pub struct Reduction {
    pub keep: Vec<usize>,
    pub anchor: Vec<f64>,
    pub full_names: Vec<String>,
}

#[derive(Debug)]
pub enum Kind {
    Zero,
    Const { value: CMat, label: Option<String> },
    Exprs(Vec<Expr>),
    Sum(Vec<(C64, Field)>),
    Product(Field, Field),
    Deriv(Field, MultiIndex),
    Exp(Field),
    Inv(Field),
    Adjoint(Field),
    Transpose(Field),
    Entry(Field, usize, usize),
    FromEntries(Vec<Field>),
    Det(Field),
    Log(Field),
    Pow(Field, f64),
    Restrict(Field, Arc<Reduction>),
}

#[derive(Debug)]
pub struct FieldNode {
    kind: Kind,
    rows: usize,
    cols: usize,
    deps: u64,
}

#[derive(Clone, Debug)]
pub struct Field(Arc<FieldNode>);

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

impl Field {
    fn new(kind: Kind, rows: usize, cols: usize, deps: u64) -> Field {
        Field(Arc::new(FieldNode { kind, rows, cols, deps }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.0.rows, self.0.cols)
    }

    pub fn is_scalar(&self) -> bool {
        self.shape() == (1, 1)
    }

    /// Coordinates this field may depend on (conservative bit mask).
    pub fn deps(&self) -> u64 {
        self.0.deps
    }

    pub fn ptr_eq(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn zero(rows: usize, cols: usize) -> Field {
        Field::new(Kind::Zero, rows, cols, 0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind(), Kind::Zero)
    }

    pub fn constant(value: CMat) -> Field {
        if value.iter().all(|z| *z == czero()) {
            return Field::zero(value.nrows(), value.ncols());
        }
        let (r, c) = value.shape();
        Field::new(Kind::Const { value, label: None }, r, c, 0)
    }

    /// Constant with a display label (used for fermion operators).
    pub fn labelled(value: CMat, label: impl Into<String>) -> Field {
        let (r, c) = value.shape();
        Field::new(Kind::Const { value, label: Some(label.into()) }, r, c, 0)
    }

    pub fn scalar(c: C64) -> Field {
        Field::constant(CMat::from_element(1, 1, c))
    }

    pub fn real(x: f64) -> Field {
        Field::scalar(C64::new(x, 0.0))
    }

    pub fn identity(n: usize) -> Field {
        Field::constant(CMat::identity(n, n))
    }

    pub fn as_const(&self) -> Option<CMat> {
        match self.kind() {
            Kind::Const { value, .. } => Some(value.clone()),
            Kind::Zero => Some(CMat::zeros(self.0.rows, self.0.cols)),
            _ => None,
        }
    }

    pub fn expr(e: Expr) -> Field {
        if let Some(c) = e.as_const() {
            return Field::scalar(c);
        }
        let d = e.deps();
        Field::new(Kind::Exprs(vec![e]), 1, 1, d)
    }

    /// Row-major grid of expressions.
    pub fn exprs(rows: usize, cols: usize, entries: Vec<Expr>) -> Field {
        assert_eq!(entries.len(), rows * cols, "expression grid shape");
        if entries.iter().all(|e| e.as_const().is_some()) {
            let m = CMat::from_row_iterator(rows, cols, entries.iter().map(|e| e.as_const().unwrap_or_default()));
            return Field::constant(m);
        }
        if rows == 1 && cols == 1 {
            return Field::expr(entries[0].clone());
        }
        let d = entries.iter().fold(0, |a, e| a | e.deps());
        Field::new(Kind::Exprs(entries), rows, cols, d)
    }

    /// `Σ c_i F_i`, flattening nested sums and folding constants.
    pub fn sum(parts: Vec<(C64, Field)>) -> Field {
        let mut flat: Vec<(C64, Field)> = Vec::new();
        let (mut rows, mut cols) = (1, 1);
        for (c, f) in parts {
            if c == czero() || f.is_zero() {
                if !f.is_scalar() {
                    (rows, cols) = f.shape();
                }
                continue;
            }
            if !f.is_scalar() {
                if (rows, cols) != (1, 1) {
                    assert_eq!((rows, cols), f.shape(), "sum of fields with mismatched shapes");
                }
                (rows, cols) = f.shape();
            }
            match f.kind() {
                Kind::Sum(inner) => flat.extend(inner.iter().map(|(d, g)| (c * d, g.clone()))),
                _ => flat.push((c, f)),
            }
        }
        // fold constant summands
        let (consts, mut rest): (Vec<_>, Vec<_>) = flat.into_iter().partition(|(_, f)| f.as_const().is_some());
        if consts.len() > 1 || (consts.len() == 1 && rest.is_empty() && consts[0].0 != cone()) {
            let mut acc = CMat::zeros(rows, cols);
            for (c, f) in &consts {
                let m = f.as_const().expect("constant");
                if m.shape() == (1, 1) && (rows, cols) != (1, 1) {
                    acc += CMat::identity(rows, cols) * (m[(0, 0)] * c);
                } else {
                    acc += m * *c;
                }
            }
            let k = Field::constant(acc);
            if !k.is_zero() {
                rest.push((cone(), k));
            }
        } else {
            rest.extend(consts);
        }
        match rest.len() {
            0 => Field::zero(rows, cols),
            1 if rest[0].0 == cone() && rest[0].1.shape() == (rows, cols) => rest.pop().expect("one").1,
            _ => {
                let d = rest.iter().fold(0, |a, (_, f)| a | f.deps());
                Field::new(Kind::Sum(rest), rows, cols, d)
            }
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        Field::sum(vec![(cone(), self.clone()), (cone(), other.clone())])
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field::sum(vec![(cone(), self.clone()), (-cone(), other.clone())])
    }

    pub fn scale(&self, c: C64) -> Field {
        if c == cone() {
            return self.clone();
        }
        Field::sum(vec![(c, self.clone())])
    }

    pub fn scale_re(&self, x: f64) -> Field {
        self.scale(C64::new(x, 0.0))
    }

    pub fn neg(&self) -> Field {
        self.scale(-cone())
    }

    /// Matrix (or broadcast scalar) product.
    pub fn mul(&self, other: &Field) -> Field {
        let shape = match (self.is_scalar(), other.is_scalar()) {
            (true, _) => other.shape(),
            (_, true) => self.shape(),
            _ => {
                assert_eq!(self.0.cols, other.0.rows, "product of fields with mismatched shapes");
                (self.0.rows, other.0.cols)
            }
        };
        if self.is_zero() || other.is_zero() {
            return Field::zero(shape.0, shape.1);
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            let m = match (self.is_scalar(), other.is_scalar()) {
                (true, _) => b * a[(0, 0)],
                (_, true) => a * b[(0, 0)],
                _ => a * b,
            };
            return Field::constant(m);
        }
        if self.is_scalar() {
            if let Some(a) = self.as_const() {
                return other.scale(a[(0, 0)]);
            }
        }
        if other.is_scalar() {
            if let Some(b) = other.as_const() {
                return self.scale(b[(0, 0)]);
            }
        }
        // hoist scalar factors of single-term sums so constants keep folding
        if let Kind::Sum(v) = self.kind() {
            if v.len() == 1 {
                return v[0].1.mul(other).scale(v[0].0);
            }
        }
        if let Kind::Sum(v) = other.kind() {
            if v.len() == 1 {
                return self.mul(&v[0].1).scale(v[0].0);
            }
        }
        Field::new(Kind::Product(self.clone(), other.clone()), shape.0, shape.1, self.deps() | other.deps())
    }

    /// Partial derivative `∂^γ`.
    pub fn deriv(&self, gamma: &MultiIndex) -> Field {
        if gamma.is_zero() {
            return self.clone();
        }
        let (r, c) = self.shape();
        let touched = gamma.as_slice().iter().enumerate().fold(0u64, |a, (i, &k)| if k > 0 { a | (1 << i) } else { a });
        if touched & !self.deps() != 0 {
            return Field::zero(r, c);
        }
        match self.kind() {
            Kind::Zero | Kind::Const { .. } => Field::zero(r, c),
            Kind::Deriv(inner, g0) => Field::new(Kind::Deriv(inner.clone(), g0.add(gamma)), r, c, self.deps()),
            Kind::Sum(v) => Field::sum(v.iter().map(|(k, f)| (*k, f.deriv(gamma))).collect()),
            _ => Field::new(Kind::Deriv(self.clone(), gamma.clone()), r, c, self.deps()),
        }
    }

    pub fn deriv1(&self, nvars: usize, var: usize) -> Field {
        self.deriv(&MultiIndex::unit(nvars, var))
    }

    pub fn exp(&self) -> Field {
        let (r, c) = self.shape();
        assert_eq!(r, c, "matrix exponential of a non-square field");
        if let Some(m) = self.as_const() {
            let j = Jet::constant(JetLayout::get(0, 0), m).exp(r);
            return Field::constant(j.value().cloned().unwrap_or_else(|| CMat::identity(r, r)));
        }
        Field::new(Kind::Exp(self.clone()), r, c, self.deps())
    }

    pub fn inv(&self) -> Field {
        let (r, c) = self.shape();
        assert_eq!(r, c, "inverse of a non-square field");
        if let Some(m) = self.as_const() {
            if let Some(i) = m.try_inverse() {
                return Field::constant(i);
            }
        }
        Field::new(Kind::Inv(self.clone()), r, c, self.deps())
    }

    pub fn adjoint(&self) -> Field {
        let (r, c) = self.shape();
        match self.kind() {
            Kind::Zero => Field::zero(c, r),
            Kind::Const { value, label } => {
                let v = value.adjoint();
                match label {
                    Some(l) if *value == value.adjoint() => Field::labelled(v, l.clone()),
                    _ => Field::constant(v),
                }
            }
            Kind::Adjoint(inner) => inner.clone(),
            _ => Field::new(Kind::Adjoint(self.clone()), c, r, self.deps()),
        }
    }

    pub fn transpose(&self) -> Field {
        let (r, c) = self.shape();
        match self.kind() {
            Kind::Zero => Field::zero(c, r),
            Kind::Const { value, .. } => Field::constant(value.transpose()),
            Kind::Exprs(v) => {
                let t = (0..c).flat_map(|j| (0..r).map(move |i| (i, j))).map(|(i, j)| v[i * c + j].clone()).collect();
                Field::exprs(c, r, t)
            }
            Kind::Transpose(inner) => inner.clone(),
            _ => Field::new(Kind::Transpose(self.clone()), c, r, self.deps()),
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> Field {
        assert!(r < self.0.rows && c < self.0.cols, "entry out of range");
        match self.kind() {
            Kind::Zero => Field::zero(1, 1),
            Kind::Const { value, .. } => Field::scalar(value[(r, c)]),
            Kind::Exprs(v) => Field::expr(v[r * self.0.cols + c].clone()),
            Kind::FromEntries(v) => v[r * self.0.cols + c].clone(),
            _ if self.is_scalar() => self.clone(),
            _ => Field::new(Kind::Entry(self.clone(), r, c), 1, 1, self.deps()),
        }
    }

    /// Row-major grid of scalar fields.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Field>) -> Field {
        assert_eq!(entries.len(), rows * cols, "entry grid shape");
        assert!(entries.iter().all(Field::is_scalar), "entries must be scalar");
        if entries.iter().all(|e| e.as_const().is_some()) {
            let m = CMat::from_row_iterator(rows, cols, entries.iter().map(|e| e.as_const().expect("const")[(0, 0)]));
            return Field::constant(m);
        }
        if rows == 1 && cols == 1 {
            return entries[0].clone();
        }
        let d = entries.iter().fold(0, |a, e| a | e.deps());
        Field::new(Kind::FromEntries(entries), rows, cols, d)
    }

    pub fn det(&self) -> Field {
        let (r, c) = self.shape();
        assert_eq!(r, c, "determinant of a non-square field");
        if self.is_scalar() {
            return self.clone();
        }
        if let Some(m) = self.as_const() {
            return Field::scalar(m.determinant());
        }
        Field::new(Kind::Det(self.clone()), 1, 1, self.deps())
    }

    pub fn trace(&self) -> Field {
        let n = self.0.rows.min(self.0.cols);
        Field::sum((0..n).map(|i| (cone(), self.entry(i, i))).collect())
    }

    pub fn ln(&self) -> Field {
        assert!(self.is_scalar(), "log of a matrix field");
        Field::new(Kind::Log(self.clone()), 1, 1, self.deps())
    }

    pub fn powf(&self, p: f64) -> Field {
        assert!(self.is_scalar(), "power of a matrix field");
        if p == 1.0 {
            return self.clone();
        }
        if let Some(m) = self.as_const() {
            return Field::scalar(m[(0, 0)].powf(p));
        }
        Field::new(Kind::Pow(self.clone(), p), 1, 1, self.deps())
    }

    pub fn sqrt(&self) -> Field {
        self.powf(0.5)
    }

    /// Kronecker product with a constant matrix on the right: `F ⊗ K`.
    pub fn kron_const(&self, k: &CMat) -> Field {
        let (r, c) = self.shape();
        let (kr, kc) = k.shape();
        let entries = (0..r * kr)
            .flat_map(|i| (0..c * kc).map(move |j| (i, j)))
            .map(|(i, j)| self.entry(i / kr, j / kc).scale(k[(i % kr, j % kc)]))
            .collect();
        Field::from_entries(r * kr, c * kc, entries)
    }

    /// Re-express this field on the reduced coordinate set of `ctx`.
    pub fn restrict(&self, ctx: &Arc<Reduction>) -> Field {
        let (r, c) = self.shape();
        if let Some(m) = self.as_const() {
            return match self.kind() {
                Kind::Const { label: Some(_), .. } => self.clone(),
                _ => Field::constant(m),
            };
        }
        let d = ctx.keep.iter().enumerate().fold(0u64, |a, (j, &k)| if self.deps() >> k & 1 == 1 { a | 1 << j } else { a });
        Field::new(Kind::Restrict(self.clone(), ctx.clone()), r, c, d)
    }

    /// Evaluate at a single point with a fresh evaluator.
    pub fn eval_at(&self, point: &[f64], order: usize) -> Result<Val, EvalError> {
        let mut ev = Evaluator::new(point.to_vec());
        ev.demand(self, order);
        Ok((*ev.eval(self, order)?).clone())
    }

    /// Matrix value at a point (scalars as `1×1`).
    pub fn value_at(&self, point: &[f64]) -> Result<CMat, EvalError> {
        Ok(self.eval_at(point, 0)?.value_matrix(self.shape()))
    }

    pub fn display(&self, names: &[String]) -> String {
        let mut s = String::new();
        write_field(&mut s, self, names, 0);
        s
    }
}

/// A jet-valued evaluation result.
#[derive(Clone, Debug)]
pub enum Val {
    S(ScalarJet),
    M(MatJet),
}

impl Val {
    pub fn order(&self) -> usize {
        match self {
            Val::S(j) => j.order(),
            Val::M(j) => j.order(),
        }
    }

    pub fn truncate(&self, order: usize) -> Val {
        match self {
            Val::S(j) => Val::S(j.truncate(order)),
            Val::M(j) => Val::M(j.truncate(order)),
        }
    }

    pub fn as_scalar(&self) -> Result<&ScalarJet, EvalError> {
        match self {
            Val::S(j) => Ok(j),
            Val::M(_) => Err(EvalError::Shape("expected a scalar".into())),
        }
    }

    /// Lift to a matrix jet of the given square dimension.
    pub fn to_mat(&self, dim: usize) -> MatJet {
        match self {
            Val::S(j) => j.lift(dim),
            Val::M(j) => j.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Val::S(j) => j.value_max_abs(),
            Val::M(j) => j.value_max_abs(),
        }
    }

    pub fn value_matrix(&self, shape: (usize, usize)) -> CMat {
        match self {
            Val::S(j) => CMat::from_element(1, 1, j.value_or_zero()),
            Val::M(j) => j.value().cloned().unwrap_or_else(|| CMat::zeros(shape.0, shape.1)),
        }
    }

    /// Taylor coefficient matrix at monomial `m`.
    pub fn taylor_matrix(&self, m: &MultiIndex, shape: (usize, usize)) -> CMat {
        match self {
            Val::S(j) => CMat::from_element(1, 1, j.taylor(m).copied().unwrap_or_default()),
            Val::M(j) => j.taylor(m).cloned().unwrap_or_else(|| CMat::zeros(shape.0, shape.1)),
        }
    }

    /// `∂^α` at the base point as a matrix.
    pub fn partial_matrix(&self, m: &MultiIndex, shape: (usize, usize)) -> CMat {
        self.taylor_matrix(m, shape) * C64::new(m.factorial(), 0.0)
    }
}

/// Per-point evaluation context with node caching.
pub struct Evaluator {
    point: Vec<f64>,
    demand: HashMap<usize, usize>,
    cache: HashMap<usize, Arc<Val>>,
    subs: HashMap<usize, Evaluator>,
}

impl Evaluator {
    pub fn new(point: Vec<f64>) -> Evaluator {
        Evaluator { point, demand: HashMap::new(), cache: HashMap::new(), subs: HashMap::new() }
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    fn sub(&mut self, ctx: &Arc<Reduction>) -> &mut Evaluator {
        let key = Arc::as_ptr(ctx) as usize;
        let point = &self.point;
        self.subs.entry(key).or_insert_with(|| {
            let mut full = ctx.anchor.clone();
            for (j, &k) in ctx.keep.iter().enumerate() {
                full[k] = point[j];
            }
            Evaluator::new(full)
        })
    }

    /// Record that `f` will be needed to order `k`. Calling this for every
    /// root before [`Evaluator::eval`] avoids recomputation at rising orders.
    pub fn demand(&mut self, f: &Field, k: usize) {
        let key = f.key();
        match self.demand.get(&key) {
            Some(&d) if d >= k => return,
            _ => {}
        }
        self.demand.insert(key, k);
        match f.kind() {
            Kind::Zero | Kind::Const { .. } | Kind::Exprs(_) => {}
            Kind::Sum(v) => v.iter().for_each(|(_, g)| self.demand(g, k)),
            Kind::Product(a, b) => {
                self.demand(a, k);
                self.demand(b, k);
            }
            Kind::Deriv(a, g) => self.demand(a, k + g.order()),
            Kind::Exp(a)
            | Kind::Inv(a)
            | Kind::Adjoint(a)
            | Kind::Transpose(a)
            | Kind::Entry(a, ..)
            | Kind::Det(a)
            | Kind::Log(a)
            | Kind::Pow(a, _) => self.demand(a, k),
            Kind::FromEntries(v) => v.iter().for_each(|g| self.demand(g, k)),
            Kind::Restrict(a, ctx) => self.sub(ctx).demand(a, k),
        }
    }

    pub fn eval(&mut self, f: &Field, k: usize) -> Result<Arc<Val>, EvalError> {
        if k > MAX_ORDER {
            return Err(EvalError::OrderCap { requested: k, cap: MAX_ORDER });
        }
        let key = f.key();
        if let Some(v) = self.cache.get(&key) {
            match v.order() {
                o if o == k => return Ok(v.clone()),
                o if o > k => return Ok(Arc::new(v.truncate(k))),
                _ => {}
            }
        }
        let target = self.demand.get(&key).copied().unwrap_or(k).max(k).min(MAX_ORDER);
        let v = Arc::new(self.compute(f, target)?);
        self.cache.insert(key, v.clone());
        Ok(if target == k { v } else { Arc::new(v.truncate(k)) })
    }

    fn compute(&mut self, f: &Field, k: usize) -> Result<Val, EvalError> {
        let layout = JetLayout::get(self.point.len(), k);
        let (rows, cols) = f.shape();
        let scalar = f.is_scalar();
        Ok(match f.kind() {
            Kind::Zero => {
                if scalar {
                    Val::S(Jet::zero(layout))
                } else {
                    Val::M(Jet::zero(layout))
                }
            }
            Kind::Const { value, .. } => {
                if scalar {
                    Val::S(Jet::constant(layout, value[(0, 0)]))
                } else {
                    Val::M(Jet::constant(layout, value.clone()))
                }
            }
            Kind::Exprs(v) => {
                if scalar {
                    Val::S(v[0].jet(&self.point, &layout)?)
                } else {
                    let jets = v.iter().map(|e| e.jet(&self.point, &layout)).collect::<Result<Vec<_>, _>>()?;
                    Val::M(assemble(&layout, rows, cols, &jets))
                }
            }
            Kind::Sum(parts) => {
                if scalar {
                    let mut acc = Jet::zero(layout);
                    for (c, g) in parts {
                        acc.add_assign(&self.eval(g, k)?.as_scalar()?.scale(*c));
                    }
                    Val::S(acc)
                } else {
                    let mut acc = Jet::zero(layout);
                    for (c, g) in parts {
                        let v = self.eval(g, k)?;
                        match &*v {
                            Val::S(s) => acc.add_assign(&s.scale(*c).lift(rows)),
                            Val::M(m) => acc.add_assign(&m.scale(*c)),
                        }
                    }
                    Val::M(acc)
                }
            }
            Kind::Product(a, b) => {
                let va = self.eval(a, k)?;
                let vb = self.eval(b, k)?;
                match (&*va, &*vb) {
                    (Val::S(x), Val::S(y)) => Val::S(x.mul(y)),
                    (Val::S(x), Val::M(y)) | (Val::M(y), Val::S(x)) => Val::M(y.mul_scalar(x)),
                    (Val::M(x), Val::M(y)) => Val::M(x.mul(y)),
                }
            }
            Kind::Deriv(a, g) => {
                let need = k + g.order();
                if need > MAX_ORDER {
                    return Err(EvalError::OrderCap { requested: need, cap: MAX_ORDER });
                }
                match &*self.eval(a, need)? {
                    Val::S(x) => Val::S(x.derivative(g)?),
                    Val::M(x) => Val::M(x.derivative(g)?),
                }
            }
            Kind::Exp(a) => match &*self.eval(a, k)? {
                Val::S(x) => Val::S(x.exp()),
                Val::M(x) => Val::M(x.exp(rows)),
            },
            Kind::Inv(a) => match &*self.eval(a, k)? {
                Val::S(x) => Val::S(x.recip()?),
                Val::M(x) => Val::M(x.inverse(rows)?),
            },
            Kind::Adjoint(a) => match &*self.eval(a, k)? {
                Val::S(x) => Val::S(x.conj()),
                Val::M(x) => Val::M(x.adjoint()),
            },
            Kind::Transpose(a) => match &*self.eval(a, k)? {
                Val::S(x) => Val::S(x.clone()),
                Val::M(x) => Val::M(x.transpose()),
            },
            Kind::Entry(a, r, c) => match &*self.eval(a, k)? {
                Val::S(x) => Val::S(x.clone()),
                Val::M(x) => Val::S(x.entry(*r, *c)),
            },
            Kind::FromEntries(v) => {
                let mut jets = Vec::with_capacity(v.len());
                for g in v {
                    jets.push(self.eval(g, k)?.as_scalar()?.clone());
                }
                Val::M(assemble(&layout, rows, cols, &jets))
            }
            Kind::Det(a) => {
                let n = a.shape().0;
                match &*self.eval(a, k)? {
                    Val::S(x) => Val::S(x.clone()),
                    Val::M(x) => Val::S(x.det(n)?),
                }
            }
            Kind::Log(a) => Val::S(self.eval(a, k)?.as_scalar()?.ln()?),
            Kind::Pow(a, p) => Val::S(self.eval(a, k)?.as_scalar()?.powf(*p)?),
            Kind::Restrict(a, ctx) => {
                let full = self.sub(ctx).eval(a, k)?;
                let nfull = ctx.anchor.len();
                let project = |i: usize| layout.monomial(i).embed(&ctx.keep, nfull);
                match &*full {
                    Val::S(x) => {
                        Val::S(Jet::from_coeffs(layout.clone(), (0..layout.len()).map(|i| x.taylor(&project(i)).copied()).collect()))
                    }
                    Val::M(x) => {
                        Val::M(Jet::from_coeffs(layout.clone(), (0..layout.len()).map(|i| x.taylor(&project(i)).cloned()).collect()))
                    }
                }
            }
        })
    }
}

fn assemble(layout: &Arc<JetLayout>, rows: usize, cols: usize, jets: &[ScalarJet]) -> MatJet {
    let coeffs = (0..layout.len())
        .map(|i| {
            if jets.iter().all(|j| j.coeff(i).is_none()) {
                return None;
            }
            Some(CMat::from_row_iterator(rows, cols, jets.iter().map(|j| j.coeff(i).copied().unwrap_or_default())))
        })
        .collect();
    Jet::from_coeffs(layout.clone(), coeffs)
}

const DISPLAY_LIMIT: usize = 2000;

fn write_scalar_const(out: &mut String, c: C64) {
    let _ = write!(out, "{}", Expr::constant(c).display(&[]));
}

fn write_matrix(out: &mut String, m: &CMat) {
    out.push('[');
    for i in 0..m.nrows() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for j in 0..m.ncols() {
            if j > 0 {
                out.push_str(", ");
            }
            write_scalar_const(out, m[(i, j)]);
        }
        out.push(']');
    }
    out.push(']');
}

// precedence: 0 top, 1 sum operand, 2 product operand
fn write_field(out: &mut String, f: &Field, names: &[String], prec: u8) {
    if out.len() > DISPLAY_LIMIT {
        if !out.ends_with('…') {
            out.push('…');
        }
        return;
    }
    match f.kind() {
        Kind::Zero => out.push('0'),
        Kind::Const { label: Some(l), .. } => out.push_str(l),
        Kind::Const { value, label: None } => {
            if f.is_scalar() {
                let c = value[(0, 0)];
                let simple = c.im == 0.0 && c.re >= 0.0;
                if !simple && prec > 0 {
                    out.push('(');
                }
                write_scalar_const(out, c);
                if !simple && prec > 0 {
                    out.push(')');
                }
            } else {
                write_matrix(out, value);
            }
        }
        Kind::Exprs(v) => {
            if f.is_scalar() {
                let s = v[0].display(names).to_string();
                let atomic = s.chars().all(|ch| ch.is_alphanumeric() || ch == '_' || ch == '.' || ch == '(' || ch == ')' || ch == '^');
                if prec > 0 && !atomic {
                    let _ = write!(out, "({s})");
                } else {
                    out.push_str(&s);
                }
            } else {
                let (r, c) = f.shape();
                out.push('[');
                for i in 0..r {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push('[');
                    for j in 0..c {
                        if j > 0 {
                            out.push_str(", ");
                        }
                        let _ = write!(out, "{}", v[i * c + j].display(names));
                    }
                    out.push(']');
                }
                out.push(']');
            }
        }
        Kind::Sum(parts) => {
            let single = parts.len() == 1;
            let paren = (prec > 0 && !single) || (prec > 1 && single);
            if paren {
                out.push('(');
            }
            for (n, (c, g)) in parts.iter().enumerate() {
                if *c == cone() {
                    if n > 0 {
                        out.push_str(" + ");
                    }
                } else if *c == -cone() {
                    out.push_str(if n > 0 { " - " } else { "-" });
                } else {
                    if n > 0 {
                        out.push_str(" + ");
                    }
                    let simple = c.im == 0.0 && c.re >= 0.0;
                    if !simple {
                        out.push('(');
                    }
                    write_scalar_const(out, *c);
                    if !simple {
                        out.push(')');
                    }
                    out.push('·');
                }
                write_field(out, g, names, if *c == cone() && !single { 1 } else { 2 });
            }
            if paren {
                out.push(')');
            }
        }
        Kind::Product(a, b) => {
            if prec > 2 {
                out.push('(');
            }
            write_field(out, a, names, 2);
            out.push('·');
            write_field(out, b, names, 2);
            if prec > 2 {
                out.push(')');
            }
        }
        Kind::Deriv(a, g) => {
            for (i, &p) in g.as_slice().iter().enumerate() {
                for _ in 0..p {
                    let _ = write!(out, "∂_{}", names.get(i).map_or("?", |s| s.as_str()));
                }
            }
            out.push('(');
            write_field(out, a, names, 0);
            out.push(')');
        }
        Kind::Exp(a) => wrap(out, "exp(", a, names, ")"),
        Kind::Inv(a) => wrap(out, "inv(", a, names, ")"),
        Kind::Adjoint(a) => wrap(out, "(", a, names, ")†"),
        Kind::Transpose(a) => wrap(out, "(", a, names, ")ᵀ"),
        Kind::Entry(a, r, c) => {
            wrap(out, "(", a, names, ")");
            let _ = write!(out, "[{r},{c}]");
        }
        Kind::FromEntries(v) => {
            let (r, c) = f.shape();
            out.push('[');
            for i in 0..r {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push('[');
                for j in 0..c {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    write_field(out, &v[i * c + j], names, 0);
                }
                out.push(']');
            }
            out.push(']');
        }
        Kind::Det(a) => wrap(out, "det(", a, names, ")"),
        Kind::Log(a) => wrap(out, "log(", a, names, ")"),
        Kind::Pow(a, p) => {
            wrap(out, "(", a, names, ")");
            let _ = write!(out, "^{p}");
        }
        Kind::Restrict(a, ctx) => write_field(out, a, &ctx.full_names, prec),
    }
}

fn wrap(out: &mut String, open: &str, f: &Field, names: &[String], close: &str) {
    out.push_str(open);
    write_field(out, f, names, 0);
    out.push_str(close);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::coord(0)
    }

    #[test]
    fn constant_field_has_no_partials() {
        let f = Field::constant(CMat::from_element(2, 2, C64::new(3.0, 1.0)));
        let v = f.eval_at(&[0.3, 0.4], 3).unwrap();
        let m = MultiIndex::from_slice(&[1, 1]);
        assert_eq!(v.partial_matrix(&m, (2, 2)), CMat::zeros(2, 2));
    }

    #[test]
    fn mixed_partial_of_xy_is_one() {
        let f = Field::expr(Expr::coord(0) * Expr::coord(1));
        let v = f.eval_at(&[0.3, -2.0], 2).unwrap();
        let p = v.partial_matrix(&MultiIndex::from_slice(&[1, 1]), (1, 1));
        assert_eq!(p[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn derivative_node_skips_independent_coordinates() {
        let f = Field::expr(x().powi(2));
        assert!(f.deriv(&MultiIndex::from_slice(&[0, 1])).is_zero());
        let d = f.deriv(&MultiIndex::from_slice(&[1, 0]));
        let v = d.value_at(&[1.5, 0.0]).unwrap();
        assert!((v[(0, 0)] - 3.0).norm() < 1e-14);
    }

    #[test]
    fn scalars_broadcast_and_promote() {
        let s = Field::expr(x());
        let m = Field::identity(2).scale(C64::new(2.0, 0.0));
        let sum = m.add(&s);
        let v = sum.value_at(&[0.5]).unwrap();
        assert_eq!(v, CMat::identity(2, 2) * C64::new(2.5, 0.0));
        let p = s.mul(&m).value_at(&[0.5]).unwrap();
        assert_eq!(p, CMat::identity(2, 2) * C64::new(1.0, 0.0));
    }

    #[test]
    fn exp_times_exp_minus_is_identity() {
        let w = Field::exprs(2, 2, vec![x(), Expr::real(1.0), Expr::real(0.0), -x()]);
        let prod = w.exp().mul(&w.neg().exp());
        let v = prod.eval_at(&[0.3], 2).unwrap();
        let ident = CMat::identity(2, 2);
        assert!((v.value_matrix((2, 2)) - ident).norm() < 1e-13);
        let d = v.partial_matrix(&MultiIndex::from_slice(&[1]), (2, 2));
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn restriction_projects_jets() {
        let f = Field::expr(x() * x() + Expr::coord(1));
        let ctx = Arc::new(Reduction { keep: vec![0], anchor: vec![0.0, 5.0], full_names: vec!["x".into(), "y".into()] });
        let r = f.restrict(&ctx);
        let v = r.eval_at(&[2.0], 2).unwrap();
        let j = v.as_scalar().unwrap();
        assert!((j.value_or_zero() - 9.0).norm() < 1e-14);
        assert!((j.partial(&MultiIndex::from_slice(&[2])).unwrap() - 2.0).norm() < 1e-14);
    }

    #[test]
    fn display_is_readable() {
        let names = vec!["x".to_string()];
        let psi = Field::labelled(CMat::zeros(2, 2), "ψ");
        let f = psi.mul(&Field::expr(x().powi(2) - 1.0));
        assert_eq!(f.display(&names), "ψ·(x^2 - 1)");
    }
}
