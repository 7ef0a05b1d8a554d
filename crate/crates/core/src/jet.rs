//! Truncated multivariate Taylor series ("jets").
//!
//! A jet of order `k` in `n` variables stores the Taylor coefficients
//! `c_α` of a function around a base point for every multi-index with
//! `|α| ≤ k`. Partial derivatives are recovered as `∂^α f = α! c_α`.
//! Monomials are laid out degree by degree, so a lower-order jet is a
//! prefix of a higher-order one.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::EvalError;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

/// Hard cap on the jet order any evaluation may request.
pub const MAX_ORDER: usize = 8;

/// Largest entry modulus of a matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// A derivative multi-index over a fixed number of coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut v = vec![0; nvars];
        v[var] = 1;
        MultiIndex(v)
    }

    pub fn from_slice(powers: &[u8]) -> Self {
        MultiIndex(powers.to_vec())
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&p| p == 0)
    }

    pub fn get(&self, var: usize) -> u8 {
        self.0[var]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.nvars(), other.nvars());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` when some component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    /// `α!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&p| factorial(p as usize)).product()
    }

    /// Multinomial `C(self, sub) = Π C(self_i, sub_i)`.
    pub fn binomial(&self, sub: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&sub.0)
            .map(|(&a, &b)| binomial(a as usize, b as usize))
            .product()
    }

    /// Every `γ ≤ self` componentwise, including zero and `self`.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.nvars())];
        for (var, &p) in self.0.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (p as usize + 1));
            for base in &out {
                for k in 0..=p {
                    let mut m = base.clone();
                    m.0[var] = k;
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    /// Keeps only the listed variables, in the given order.
    pub fn project(&self, keep: &[usize]) -> MultiIndex {
        MultiIndex(keep.iter().map(|&k| self.0[k]).collect())
    }

    /// Inverse of [`project`](Self::project): scatter into `nvars` slots.
    pub fn embed(&self, keep: &[usize], nvars: usize) -> MultiIndex {
        let mut v = vec![0; nvars];
        for (i, &k) in keep.iter().enumerate() {
            v[k] = self.0[i];
        }
        MultiIndex(v)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Monomial bookkeeping for a given `(nvars, order)`; shared and cached.
pub struct JetLayout {
    pub nvars: usize,
    pub order: usize,
    monos: Vec<MultiIndex>,
    degree: Vec<usize>,
    /// `block_end[d]` = number of monomials with degree ≤ d.
    block_end: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
    /// `products[i][j]` = index of `mono_i + mono_j` for `j < block_end[order - deg_i]`.
    products: Vec<Vec<u32>>,
}

impl fmt::Debug for JetLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetLayout(nvars={}, order={})", self.nvars, self.order)
    }
}

fn layout_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<JetLayout>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl JetLayout {
    pub fn get(nvars: usize, order: usize) -> Arc<JetLayout> {
        let mut cache = layout_cache().lock().expect("layout cache poisoned");
        cache
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetLayout::build(nvars, order)))
            .clone()
    }

    fn build(nvars: usize, order: usize) -> JetLayout {
        let mut monos = Vec::new();
        let mut degree = Vec::new();
        let mut block_end = Vec::new();
        for d in 0..=order {
            let mut block = Vec::new();
            monomials_of_degree(nvars, d, &mut vec![0; nvars], 0, &mut block);
            // descending lexicographic order inside a block: x0 powers first
            block.sort_by(|a: &MultiIndex, b| b.cmp(a));
            for m in block {
                monos.push(m);
                degree.push(d);
            }
            block_end.push(monos.len());
        }
        let lookup: HashMap<MultiIndex, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let products = (0..monos.len())
            .map(|i| {
                let room = order - degree[i];
                (0..block_end[room])
                    .map(|j| lookup[&monos[i].add(&monos[j])] as u32)
                    .collect()
            })
            .collect();
        JetLayout { nvars, order, monos, degree, block_end, lookup, products }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn len_for_order(&self, order: usize) -> usize {
        self.block_end[order]
    }

    pub fn monomial(&self, i: usize) -> &MultiIndex {
        &self.monos[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.lookup.get(m).copied()
    }
}

fn monomials_of_degree(nvars: usize, left: usize, cur: &mut Vec<u8>, var: usize, out: &mut Vec<MultiIndex>) {
    if nvars == 0 {
        if left == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if var == nvars - 1 {
        cur[var] = left as u8;
        out.push(MultiIndex(cur.clone()));
        cur[var] = 0;
        return;
    }
    for p in 0..=left {
        cur[var] = p as u8;
        monomials_of_degree(nvars, left - p, cur, var + 1, out);
    }
    cur[var] = 0;
}

/// Ring operations a jet coefficient must support.
pub trait Coeff: Clone + Send + Sync {
    fn add_assign(&mut self, other: &Self);
    /// `acc += a * b`, respecting operand order.
    fn mul_acc(acc: &mut Option<Self>, a: &Self, b: &Self);
    fn scaled(&self, c: C64) -> Self;
    fn conj(&self) -> Self;
    fn max_abs(&self) -> f64;
}

impl Coeff for C64 {
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_acc(acc: &mut Option<Self>, a: &Self, b: &Self) {
        let p = a * b;
        match acc {
            Some(v) => *v += p,
            None => *acc = Some(p),
        }
    }
    fn scaled(&self, c: C64) -> Self {
        self * c
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn max_abs(&self) -> f64 {
        self.norm()
    }
}

impl Coeff for CMat {
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_acc(acc: &mut Option<Self>, a: &Self, b: &Self) {
        match acc {
            Some(v) => v.gemm(C64::new(1.0, 0.0), a, b, C64::new(1.0, 0.0)),
            None => *acc = Some(a * b),
        }
    }
    fn scaled(&self, c: C64) -> Self {
        self * c
    }
    fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }
    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Taylor coefficients of a function around a point. `None` marks an
/// exactly-zero coefficient so that sparse jets stay cheap.
#[derive(Clone)]
pub struct Jet<T: Coeff> {
    layout: Arc<JetLayout>,
    coeffs: Vec<Option<T>>,
}

impl<T: Coeff + fmt::Debug> fmt::Debug for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("order", &self.order()).field("coeffs", &self.coeffs).finish()
    }
}

impl<T: Coeff> Jet<T> {
    pub fn zero(layout: Arc<JetLayout>) -> Self {
        let n = layout.len();
        Jet { layout, coeffs: vec![None; n] }
    }

    pub fn constant(layout: Arc<JetLayout>, value: T) -> Self {
        let mut j = Self::zero(layout);
        j.coeffs[0] = Some(value);
        j
    }

    pub fn from_coeffs(layout: Arc<JetLayout>, coeffs: Vec<Option<T>>) -> Self {
        assert_eq!(layout.len(), coeffs.len());
        Jet { layout, coeffs }
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn coeff(&self, i: usize) -> Option<&T> {
        self.coeffs[i].as_ref()
    }

    pub fn coeffs(&self) -> &[Option<T>] {
        &self.coeffs
    }

    pub fn taylor(&self, m: &MultiIndex) -> Option<&T> {
        self.layout.index_of(m).and_then(|i| self.coeffs[i].as_ref())
    }

    pub fn value(&self) -> Option<&T> {
        self.coeffs[0].as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_none())
    }

    /// True when only the constant term may be nonzero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_none())
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Jet<U> {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|c| c.as_ref().map(&f)).collect() }
    }

    pub fn truncate(&self, order: usize) -> Jet<T> {
        assert!(order <= self.order());
        if order == self.order() {
            return self.clone();
        }
        let layout = JetLayout::get(self.nvars(), order);
        let n = layout.len();
        Jet { layout, coeffs: self.coeffs[..n].to_vec() }
    }

    pub fn add(&self, other: &Jet<T>) -> Jet<T> {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Jet<T>) {
        debug_assert_eq!(self.order(), other.order());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if let Some(b) = b {
                match a {
                    Some(a) => a.add_assign(b),
                    None => *a = Some(b.clone()),
                }
            }
        }
    }

    pub fn scale(&self, c: C64) -> Jet<T> {
        if c == C64::new(0.0, 0.0) {
            return Jet::zero(self.layout.clone());
        }
        self.map_coeffs(|t| t.scaled(c))
    }

    pub fn conj(&self) -> Jet<T> {
        self.map_coeffs(|t| t.conj())
    }

    /// Truncated product `self * other`.
    pub fn mul(&self, other: &Jet<T>) -> Jet<T> {
        debug_assert_eq!(self.order(), other.order());
        let layout = &self.layout;
        let mut out: Vec<Option<T>> = vec![None; layout.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            let Some(a) = a else { continue };
            for (j, &k) in layout.products[i].iter().enumerate() {
                if let Some(b) = &other.coeffs[j] {
                    T::mul_acc(&mut out[k as usize], a, b);
                }
            }
        }
        Jet { layout: self.layout.clone(), coeffs: out }
    }

    /// `∂^γ` of the series; the result has order `order - |γ|`.
    pub fn derivative(&self, gamma: &MultiIndex) -> Result<Jet<T>, EvalError> {
        let g = gamma.order();
        if g > self.order() {
            return Err(EvalError::OrderCap { requested: g, cap: self.order() });
        }
        let target = JetLayout::get(self.nvars(), self.order() - g);
        let mut coeffs = Vec::with_capacity(target.len());
        for i in 0..target.len() {
            let beta = target.monomial(i);
            let full = beta.add(gamma);
            let src = self.layout.index_of(&full).expect("monomial within order");
            let c = self.coeffs[src].as_ref().map(|t| {
                let weight: f64 = beta
                    .as_slice()
                    .iter()
                    .zip(gamma.as_slice())
                    .map(|(&b, &gm)| factorial((b + gm) as usize) / factorial(b as usize))
                    .product();
                t.scaled(C64::new(weight, 0.0))
            });
            coeffs.push(c);
        }
        Ok(Jet { layout: target, coeffs })
    }

    /// The partial derivative `∂^α f` at the base point.
    pub fn partial(&self, alpha: &MultiIndex) -> Option<T> {
        self.taylor(alpha).map(|t| t.scaled(C64::new(alpha.factorial(), 0.0)))
    }

    /// Largest coefficient magnitude of the constant term.
    pub fn value_max_abs(&self) -> f64 {
        self.coeffs[0].as_ref().map_or(0.0, |t| t.max_abs())
    }

    /// The series with its constant term removed (nilpotent part).
    pub fn nilpotent_part(&self) -> Jet<T> {
        let mut out = self.clone();
        out.coeffs[0] = None;
        out
    }
}

pub type ScalarJet = Jet<C64>;
pub type MatJet = Jet<CMat>;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

impl ScalarJet {
    pub fn variable(layout: Arc<JetLayout>, var: usize, at: f64) -> ScalarJet {
        let mut j = Jet::constant(layout.clone(), C64::new(at, 0.0));
        if layout.order >= 1 {
            let idx = layout.index_of(&MultiIndex::unit(layout.nvars, var)).expect("linear monomial");
            j.coeffs[idx] = Some(C64::new(1.0, 0.0));
        }
        j
    }

    pub fn value_or_zero(&self) -> C64 {
        self.coeffs[0].unwrap_or_else(czero)
    }

    /// `f(self)` from the derivatives `f^(m)(a)`, `m = 0..=order`, at `a = self(0)`.
    pub fn compose_univariate(&self, derivs: &[C64]) -> ScalarJet {
        let k = self.order();
        debug_assert!(derivs.len() > k);
        let h = self.nilpotent_part();
        let mut out = Jet::constant(self.layout.clone(), derivs[0]);
        if h.is_zero() {
            return out;
        }
        let mut power = h.clone();
        for (m, d) in derivs.iter().enumerate().take(k + 1).skip(1) {
            if m > 1 {
                power = power.mul(&h);
            }
            let c = d / factorial(m);
            if c != czero() {
                out.add_assign(&power.scale(c));
            }
        }
        out
    }

    pub fn exp(&self) -> ScalarJet {
        let e = self.value_or_zero().exp();
        self.compose_univariate(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Result<ScalarJet, EvalError> {
        let a = self.value_or_zero();
        if a.norm() == 0.0 {
            return Err(EvalError::Singular("log of zero".into()));
        }
        let mut d = vec![a.ln()];
        for m in 1..=self.order() {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            d.push(C64::new(sign * factorial(m - 1), 0.0) / a.powi(m as i32));
        }
        Ok(self.compose_univariate(&d))
    }

    /// `self^p` for a real exponent, principal branch.
    pub fn powf(&self, p: f64) -> Result<ScalarJet, EvalError> {
        if p.fract() == 0.0 && p >= 0.0 {
            return Ok(self.powi(p as u32));
        }
        let a = self.value_or_zero();
        if a.norm() == 0.0 {
            return Err(EvalError::Singular(format!("non-integer or negative power {p} of zero")));
        }
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut falling = 1.0;
        for m in 0..=self.order() {
            d.push(a.powc(C64::new(p - m as f64, 0.0)) * falling);
            falling *= p - m as f64;
        }
        Ok(self.compose_univariate(&d))
    }

    pub fn powi(&self, n: u32) -> ScalarJet {
        let mut out = Jet::constant(self.layout.clone(), C64::new(1.0, 0.0));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn recip(&self) -> Result<ScalarJet, EvalError> {
        let a = self.value_or_zero();
        if a.norm() == 0.0 {
            return Err(EvalError::Singular("division by zero".into()));
        }
        let mut d = Vec::with_capacity(self.order() + 1);
        for m in 0..=self.order() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            d.push(C64::new(sign * factorial(m), 0.0) / a.powi(m as i32 + 1));
        }
        Ok(self.compose_univariate(&d))
    }

    pub fn sin(&self) -> ScalarJet {
        let a = self.value_or_zero();
        let cyc = [a.sin(), a.cos(), -a.sin(), -a.cos()];
        self.compose_univariate(&(0..=self.order()).map(|m| cyc[m % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> ScalarJet {
        let a = self.value_or_zero();
        let cyc = [a.cos(), -a.sin(), -a.cos(), a.sin()];
        self.compose_univariate(&(0..=self.order()).map(|m| cyc[m % 4]).collect::<Vec<_>>())
    }

    pub fn lift(&self, dim: usize) -> MatJet {
        self.map_coeffs(|c| CMat::from_diagonal_element(dim, dim, *c))
    }
}

impl MatJet {
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.coeffs.iter().flatten().next().map(|m| m.shape())
    }

    pub fn entry(&self, r: usize, c: usize) -> ScalarJet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|m| m.as_ref().map(|m| m[(r, c)]).filter(|z| *z != czero())).collect(),
        }
    }

    pub fn adjoint(&self) -> MatJet {
        self.map_coeffs(|m| m.adjoint())
    }

    pub fn transpose(&self) -> MatJet {
        self.map_coeffs(|m| m.transpose())
    }

    pub fn mul_scalar(&self, s: &ScalarJet) -> MatJet {
        let layout = &self.layout;
        let mut out: Vec<Option<CMat>> = vec![None; layout.len()];
        for (i, a) in s.coeffs.iter().enumerate() {
            let Some(a) = a else { continue };
            for (j, &k) in layout.products[i].iter().enumerate() {
                if let Some(b) = &self.coeffs[j] {
                    let term = b * *a;
                    match &mut out[k as usize] {
                        Some(v) => *v += term,
                        None => out[k as usize] = Some(term),
                    }
                }
            }
        }
        Jet { layout: self.layout.clone(), coeffs: out }
    }

    pub fn add_scalar(&self, s: &ScalarJet, dim: usize) -> MatJet {
        self.add(&s.lift(dim))
    }

    pub fn trace(&self) -> ScalarJet {
        self.map_coeffs(|m| m.trace())
    }

    /// Matrix exponential by scaling and squaring with a Taylor series.
    pub fn exp(&self, dim: usize) -> MatJet {
        let norm = self.coeffs[0].as_ref().map_or(0.0, |m| m.iter().map(|z| z.norm()).sum::<f64>());
        let mut squarings = 0u32;
        while norm / 2f64.powi(squarings as i32) > 0.25 {
            squarings += 1;
        }
        let scaled = self.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
        let ident = Jet::constant(self.layout.clone(), CMat::identity(dim, dim));
        let mut sum = ident.clone();
        let mut term = ident;
        // 0.25^30 / 30! is far below f64 resolution; nilpotent parts need only `order` more terms
        let terms = 24 + self.order();
        for m in 1..=terms {
            term = term.mul(&scaled).scale(C64::new(1.0 / m as f64, 0.0));
            if term.is_zero() {
                break;
            }
            sum.add_assign(&term);
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Inverse via Neumann series around the constant term.
    pub fn inverse(&self, dim: usize) -> Result<MatJet, EvalError> {
        let x0 = self.coeffs[0].clone().unwrap_or_else(|| CMat::zeros(dim, dim));
        let inv0 = x0.try_inverse().ok_or_else(|| EvalError::Singular("singular matrix".into()))?;
        let inv0_jet = Jet::constant(self.layout.clone(), inv0.clone());
        let n = self.nilpotent_part();
        if n.is_zero() {
            return Ok(inv0_jet);
        }
        // X^-1 = Σ_m (-X0^-1 N)^m X0^-1
        let y = inv0_jet.mul(&n).scale(C64::new(-1.0, 0.0));
        let mut sum = inv0_jet.clone();
        let mut power = inv0_jet.clone();
        for _ in 0..self.order() {
            power = y.mul(&power);
            sum.add_assign(&power);
        }
        Ok(sum)
    }

    /// Determinant through `det X0 · exp(tr log(1 + X0^-1 N))`.
    pub fn det(&self, dim: usize) -> Result<ScalarJet, EvalError> {
        let x0 = self.coeffs[0].clone().unwrap_or_else(|| CMat::zeros(dim, dim));
        let det0 = x0.clone().determinant();
        if det0.norm() == 0.0 {
            return Err(EvalError::Singular("zero determinant".into()));
        }
        let inv0 = x0.try_inverse().ok_or_else(|| EvalError::Singular("singular matrix".into()))?;
        let y = Jet::constant(self.layout.clone(), inv0).mul(&self.nilpotent_part());
        let mut log = Jet::<CMat>::zero(self.layout.clone());
        let mut power = y.clone();
        for m in 1..=self.order() {
            if m > 1 {
                power = power.mul(&y);
            }
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            log.add_assign(&power.scale(C64::new(sign / m as f64, 0.0)));
        }
        let tr = log.trace();
        Ok(tr.exp().scale(det0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn layout_is_graded_prefix() {
        let lo = JetLayout::get(3, 2);
        let hi = JetLayout::get(3, 4);
        for i in 0..lo.len() {
            assert_eq!(lo.monomial(i), hi.monomial(i));
        }
        assert_eq!(hi.len(), 35);
        assert_eq!(hi.len_for_order(2), lo.len());
    }

    #[test]
    fn product_of_variables_has_mixed_partial_one() {
        let l = JetLayout::get(2, 3);
        let x = ScalarJet::variable(l.clone(), 0, 0.7);
        let y = ScalarJet::variable(l.clone(), 1, -1.3);
        let p = x.mul(&y);
        assert_eq!(p.partial(&MultiIndex::from_slice(&[1, 1])), Some(c(1.0)));
        assert_eq!(p.partial(&MultiIndex::from_slice(&[2, 0])), None);
    }

    #[test]
    fn reciprocal_derivative_matches_hand_value() {
        // d/dx 1/(x^2+1) at x=1 is -2x/(x^2+1)^2 = -0.5
        let l = JetLayout::get(1, 2);
        let x = ScalarJet::variable(l.clone(), 0, 1.0);
        let f = x.mul(&x).add(&Jet::constant(l, c(1.0))).recip().unwrap();
        let d = f.partial(&MultiIndex::from_slice(&[1])).unwrap();
        assert!((d - c(-0.5)).norm() < 1e-15);
    }

    #[test]
    fn derivative_lowers_order() {
        let l = JetLayout::get(2, 4);
        let x = ScalarJet::variable(l.clone(), 0, 0.5);
        let f = x.powi(4);
        let d = f.derivative(&MultiIndex::from_slice(&[2, 0])).unwrap();
        assert_eq!(d.order(), 2);
        // 12 x^2 at 0.5
        assert!((d.value_or_zero() - c(3.0)).norm() < 1e-14);
        assert!(f.derivative(&MultiIndex::from_slice(&[3, 2])).is_err());
    }

    #[test]
    fn matrix_exp_of_diagonal() {
        let l = JetLayout::get(1, 0);
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.3), c(-1.7)]));
        let e = MatJet::constant(l, m).exp(2);
        let v = e.value().unwrap();
        assert!((v[(0, 0)] - c(0.3f64.exp())).norm() < 1e-14);
        assert!((v[(1, 1)] - c((-1.7f64).exp())).norm() < 1e-14);
        assert!(v[(0, 1)].norm() < 1e-16);
    }

    #[test]
    fn log_and_exp_invert() {
        let l = JetLayout::get(2, 3);
        let x = ScalarJet::variable(l.clone(), 0, 0.4);
        let y = ScalarJet::variable(l, 1, 0.9);
        let f = x.mul(&y).exp();
        let g = f.ln().unwrap();
        let h = x.mul(&y);
        for (a, b) in g.coeffs().iter().zip(h.coeffs()) {
            let a = a.unwrap_or_default();
            let b = b.unwrap_or_default();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn sub_indices_enumerates_box() {
        let a = MultiIndex::from_slice(&[2, 1]);
        let subs = a.sub_indices();
        assert_eq!(subs.len(), 6);
        assert!(subs.contains(&MultiIndex::from_slice(&[1, 1])));
        assert_eq!(a.binomial(&MultiIndex::from_slice(&[1, 0])), 2.0);
    }
}
