//! Superalgebra suites and theorem checks.
//!
//! Every check reduces to "this operator (or set of fields) vanishes at the
//! sample points". Verdicts compare `max|entry| / (1 + scale)` against two
//! thresholds; anything in between is gray and counts as a failure.

use serde::Serialize;

use crate::clifford::epsilon3;
use crate::diffop::DiffOp;
use crate::error::{EvalError, Result};
use crate::field::{Evaluator, Field, Kind};
use crate::jet::{CMat, MultiIndex, C64};
use crate::sample::{map_points, residual_of_fields, Execution, Residual, SampleSpec};
use crate::zoo::{Algebra, Model};

pub const PASS_TOL: f64 = 1e-9;
pub const VIOLATED_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Holds,
    Violated,
    Exploratory,
}

impl Expect {
    pub fn parse(s: &str) -> Option<Expect> {
        match s {
            "holds" | "pass" => Some(Expect::Holds),
            "violated" => Some(Expect::Violated),
            "exploratory" => Some(Expect::Exploratory),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Gray,
    ViolatedAsExpected,
    Exploratory,
}

impl Verdict {
    /// Whether this verdict is acceptable for the run.
    pub fn ok(self, fail_on_gray: bool) -> bool {
        match self {
            Verdict::Pass | Verdict::ViolatedAsExpected | Verdict::Exploratory => true,
            Verdict::Gray => !fail_on_gray,
            Verdict::Fail => false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub point: Vec<f64>,
    pub verdict: Verdict,
    pub relative: f64,
    pub scale: f64,
    pub tol: f64,
    pub expect: Expect,
    pub operands: Vec<String>,
    pub points: usize,
    pub seed: u64,
}

impl CheckReport {
    fn classify(relative: f64, tol: f64, violated_tol: f64, expect: Expect) -> Verdict {
        let (small, large) = (relative <= tol, relative >= violated_tol);
        match expect {
            Expect::Exploratory => Verdict::Exploratory,
            Expect::Holds if small => Verdict::Pass,
            Expect::Holds if large || relative.is_nan() => Verdict::Fail,
            Expect::Violated if large => Verdict::ViolatedAsExpected,
            Expect::Violated if small || relative.is_nan() => Verdict::Fail,
            _ => Verdict::Gray,
        }
    }

    /// Re-judge under a different expectation.
    pub fn expecting(mut self, expect: Expect) -> CheckReport {
        self.expect = expect;
        self.verdict = CheckReport::classify(self.relative, self.tol, VIOLATED_TOL, expect);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> CheckReport {
        self.tol = tol;
        self.verdict = CheckReport::classify(self.relative, tol, VIOLATED_TOL, self.expect);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn line(&self) -> String {
        format!("{:<24} {:<40} residual {:.3e} (scale {:.2e})", format!("{:?}", self.verdict), self.name, self.max_residual, self.scale)
    }
}

/// Sample points plus thresholds, shared by a batch of checks.
#[derive(Clone, Debug)]
pub struct Checker {
    pub spec: SampleSpec,
    pub tol: f64,
    pub exec: Execution,
    points: Vec<Vec<f64>>,
}

impl Checker {
    pub fn new(spec: SampleSpec) -> Result<Checker> {
        let points = spec.points()?;
        Ok(Checker { spec, tol: PASS_TOL, exec: Execution::default(), points })
    }

    pub fn with_tol(mut self, tol: f64) -> Checker {
        self.tol = tol;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Checker {
        self.exec = exec;
        self
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn report(&self, name: &str, operands: &[&str], r: Residual, expect: Expect) -> CheckReport {
        let relative = r.relative();
        CheckReport {
            name: name.to_string(),
            max_residual: r.max_abs,
            point: r.argmax_point,
            verdict: CheckReport::classify(relative, self.tol, VIOLATED_TOL, expect),
            relative,
            scale: r.scale,
            tol: self.tol,
            expect,
            operands: operands.iter().map(|s| s.to_string()).collect(),
            points: self.points.len(),
            seed: self.spec.seed,
        }
    }

    pub fn fields_vanish(&self, name: &str, operands: &[&str], fields: &[Field], expect: Expect) -> Result<CheckReport> {
        let r = residual_of_fields(fields, &self.points, self.exec)?;
        Ok(self.report(name, operands, r, expect))
    }

    pub fn vanishes(&self, name: &str, operands: &[&str], op: &DiffOp, expect: Expect) -> Result<CheckReport> {
        self.fields_vanish(name, operands, &op.fields(), expect)
    }

    /// `lhs − rhs ≡ 0`, with the scale taken from both sides.
    pub fn equal(&self, name: &str, lhs: &DiffOp, rhs: &DiffOp, expect: Expect) -> Result<CheckReport> {
        let diff = lhs.sub(rhs)?;
        let mut fields = diff.fields();
        let r = residual_of_fields(&fields, &self.points, self.exec)?;
        fields = lhs.fields().into_iter().chain(rhs.fields()).collect();
        let s = residual_of_fields(&fields, &self.points, self.exec)?;
        let r = Residual { scale: r.scale.max(s.scale), ..r };
        Ok(self.report(name, &[], r, expect))
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `{A,B} − 2δ·H` style relation: `{A,B} − Σ c_k X_k`.
pub fn bracket_minus(a: &DiffOp, b: &DiffOp, odd: bool, rhs: &[(C64, &DiffOp)]) -> Result<DiffOp> {
    let br = a.bracket(b, odd, odd)?;
    if rhs.is_empty() {
        return Ok(br);
    }
    let r = DiffOp::lin(rhs)?;
    br.sub(&r)
}

/// Graded Jacobi residual operator for three operands of given parities:
/// `[A,[B,C]} − [[A,B},C} − (−1)^{|A||B|}[B,[A,C]}`.
pub fn jacobi(a: (&DiffOp, bool), b: (&DiffOp, bool), cc: (&DiffOp, bool)) -> Result<DiffOp> {
    let (x, px) = a;
    let (y, py) = b;
    let (z, pz) = cc;
    let yz = y.bracket(z, py, pz)?;
    let lhs = x.bracket(&yz, px, py ^ pz)?;
    let xy = x.bracket(y, px, py)?;
    let t1 = xy.bracket(z, px ^ py, pz)?;
    let xz = x.bracket(z, px, pz)?;
    let t2 = y.bracket(&xz, py, px ^ pz)?;
    let sign = if px && py { -1.0 } else { 1.0 };
    DiffOp::lin(&[(c(1.0, 0.0), &lhs), (c(-1.0, 0.0), &t1), (c(-sign, 0.0), &t2)])
}

/// `Q² = Q̄² = 0`, `{Q̄,Q} = 2H` for the first supercharge pair.
pub fn check_n2(m: &Model, ck: &Checker) -> Result<Vec<CheckReport>> {
    let Some(first) = m.supercharges.first() else {
        return Ok(Vec::new());
    };
    let (q, qb) = (&first.q, &first.qbar);
    let n = &first.name;
    let h = &m.hamiltonian;
    let exp = if m.expected == Algebra::Gauge { Expect::Violated } else { Expect::Holds };
    Ok(vec![
        ck.vanishes(&format!("{n}^2"), &[n], &q.compose(q)?, exp)?,
        ck.vanishes(&format!("{n}bar^2"), &[n], &qb.compose(qb)?, exp)?,
        ck.vanishes(&format!("{{{n}bar,{n}}}-2H"), &[n, "H"], &bracket_minus(qb, q, true, &[(c(2.0, 0.0), h)])?, Expect::Holds)?,
    ])
}

/// All pairwise `{Q_a,Q_b} = 0`, `{Q_a,Q̄_b} = 2δ_ab H`, `Q_a² = 0`.
pub fn check_extended(m: &Model, ck: &Checker) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let h = &m.hamiltonian;
    let qs = &m.supercharges;
    for (i, a) in qs.iter().enumerate() {
        for (j, b) in qs.iter().enumerate() {
            if j < i {
                continue;
            }
            let (na, nb) = (&a.name, &b.name);
            out.push(ck.vanishes(&format!("{{{na},{nb}}}"), &[na, nb], &a.q.anticommutator(&b.q)?, Expect::Holds)?);
            out.push(ck.vanishes(&format!("{{{na}bar,{nb}bar}}"), &[na, nb], &a.qbar.anticommutator(&b.qbar)?, Expect::Holds)?);
        }
        for (j, b) in qs.iter().enumerate() {
            let (na, nb) = (&a.name, &b.name);
            let rel = if i == j {
                bracket_minus(&a.q, &b.qbar, true, &[(c(2.0, 0.0), h)])?
            } else {
                a.q.anticommutator(&b.qbar)?
            };
            let name = if i == j { format!("{{{na},{nb}bar}}-2H") } else { format!("{{{na},{nb}bar}}") };
            out.push(ck.vanishes(&name, &[na, nb], &rel, Expect::Holds)?);
        }
    }
    // Hermitian supercharges: {X_a, X_b} = 2δ_ab H.
    let hs = &m.hermitian;
    for (i, (na, a)) in hs.iter().enumerate() {
        for (nb, b) in hs.iter().skip(i) {
            let rel = if na == nb {
                bracket_minus(a, b, true, &[(c(2.0, 0.0), h)])?
            } else {
                a.anticommutator(b)?
            };
            let name = if na == nb { format!("{{{na},{na}}}-2H") } else { format!("{{{na},{nb}}}") };
            out.push(ck.vanishes(&name, &[na, nb], &rel, Expect::Holds)?);
        }
    }
    Ok(out)
}

/// Central-charge algebra `{Q̄_β, Q_α} = 2(δ_αβ H + (σ_j)_βα P_j)`,
/// `{Q_α,Q_β} = 0`, `[P_j, Q_α] = 0`. Charges are taken in model order.
pub fn check_central(m: &Model, p: &[(String, DiffOp)], ck: &Checker) -> Result<Vec<CheckReport>> {
    let sig = crate::clifford::pauli();
    let h = &m.hamiltonian;
    let mut out = Vec::new();
    let qs = &m.supercharges;
    for (al, a) in qs.iter().enumerate() {
        for (be, b) in qs.iter().enumerate() {
            let mut rhs: Vec<(C64, &DiffOp)> = Vec::new();
            if al == be {
                rhs.push((c(2.0, 0.0), h));
            }
            if qs.len() == 2 {
                for (j, (_, pj)) in p.iter().enumerate().take(3) {
                    let s = sig[j][(be, al)];
                    if s != c(0.0, 0.0) {
                        rhs.push((s * 2.0, pj));
                    }
                }
            }
            let name = format!("{{{},{}bar}}-2(dH+sP)", a.name, b.name);
            out.push(ck.vanishes(&name, &[&a.name, &b.name], &bracket_minus(&a.q, &b.qbar, true, &rhs)?, Expect::Holds)?);
            if be >= al {
                let name = format!("{{{},{}}}", a.name, b.name);
                out.push(ck.vanishes(&name, &[&a.name, &b.name], &a.q.anticommutator(&b.q)?, Expect::Holds)?);
            }
        }
        for (pn, pj) in p {
            let name = format!("[{pn},{}]", a.name);
            out.push(ck.vanishes(&name, &[pn, &a.name], &pj.commutator(&a.q)?, Expect::Holds)?);
        }
    }
    Ok(out)
}

fn extra<'a>(m: &'a Model, name: &str) -> Result<&'a DiffOp> {
    m.extra(name)
}

/// Kähler structure relations: `[F₊,F₋] = F₀ − D/2`, the four brackets
/// of the triplet with the supercharges, the two vanishing ones, and N=4.
pub fn check_theorem1(m: &Model, ck: &Checker) -> Result<Vec<CheckReport>> {
    let q = &m.supercharges[0];
    let s = &m.supercharges[1];
    let (fp, fm, f0) = (extra(m, "F+")?, extra(m, "F-")?, extra(m, "F0")?);
    let half_d = m.space.rep.count() as f64 / 2.0;
    let id = DiffOp::identity(&m.space);
    let one = c(1.0, 0.0);
    let mut out = vec![ck.vanishes(
        "[F+,F-]-(F0-D/2)",
        &["F+", "F-", "F0"],
        &bracket_minus(fp, fm, false, &[(one, f0), (c(-half_d, 0.0), &id)])?,
        Expect::Holds,
    )?];
    let rels: [(&str, &DiffOp, &DiffOp, Option<(f64, &DiffOp)>); 6] = [
        ("[Q,F+]+Sbar", &q.q, fp, Some((-1.0, &s.qbar))),
        ("[Qbar,F-]+S", &q.qbar, fm, Some((-1.0, &s.q))),
        ("[S,F+]-Qbar", &s.q, fp, Some((1.0, &q.qbar))),
        ("[Sbar,F-]-Q", &s.qbar, fm, Some((1.0, &q.q))),
        ("[Q,F-]", &q.q, fm, None),
        ("[Qbar,F+]", &q.qbar, fp, None),
    ];
    for (name, a, b, rhs) in rels {
        let r = match rhs {
            Some((k, x)) => bracket_minus(a, b, false, &[(c(k, 0.0), x)])?,
            None => a.commutator(b)?,
        };
        out.push(ck.vanishes(name, &[], &r, Expect::Holds)?);
    }
    out.extend(check_extended(m, ck)?);
    Ok(out)
}

/// Hyper-Kähler relations: `[S^a, F^b₊] = δ^{ab} Q̄ + ε^{abc} S̄^c`,
/// `[S^a,F^b₋] = [S̄^a,F^b₊] = 0`, and N=8 closure.
pub fn check_theorem2(m: &Model, ck: &Checker) -> Result<Vec<CheckReport>> {
    let q = &m.supercharges[0];
    let s: Vec<_> = m.supercharges[1..4].iter().collect();
    let mut out = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let fp = extra(m, &format!("F{}+", b + 1))?;
            let fm = extra(m, &format!("F{}-", b + 1))?;
            let mut rhs: Vec<(C64, &DiffOp)> = Vec::new();
            if a == b {
                rhs.push((c(1.0, 0.0), &q.qbar));
            }
            for (k, sk) in s.iter().enumerate() {
                let e = epsilon3(a, b, k);
                if e != 0.0 {
                    rhs.push((c(e, 0.0), &sk.qbar));
                }
            }
            let name = format!("[S{},F{}+]-(dQbar+eSbar)", a + 1, b + 1);
            out.push(ck.vanishes(&name, &[], &bracket_minus(&s[a].q, fp, false, &rhs)?, Expect::Holds)?);
            out.push(ck.vanishes(&format!("[S{},F{}-]", a + 1, b + 1), &[], &s[a].q.commutator(fm)?, Expect::Holds)?);
            out.push(ck.vanishes(&format!("[S{}bar,F{}+]", a + 1, b + 1), &[], &s[a].qbar.commutator(fp)?, Expect::Holds)?);
        }
    }
    out.extend(check_extended(m, ck)?);
    Ok(out)
}

/// Every identity the model records (alternative constructions, constraint
/// algebras), each with its own tolerance and expectation.
pub fn check_identities(m: &Model, ck: &Checker) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for id in &m.identities {
        let r = ck.vanishes(&id.name, &[], &id.op, id.expect)?;
        out.push(match id.tol {
            Some(t) => r.with_tol(t),
            None => r,
        });
    }
    Ok(out)
}

/// `Q̄_i` agrees with the measure adjoint of `Q_i`, and `H` is self-adjoint
/// for the model measure.
pub fn check_adjoints(m: &Model, ck: &Checker) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for ch in &m.supercharges {
        let adj = ch.q.adjoint_with_measure(&m.measure);
        out.push(ck.vanishes(&format!("{}bar-adj({})", ch.name, ch.name), &[&ch.name], &ch.qbar.sub(&adj)?, Expect::Holds)?);
    }
    let h = &m.hamiltonian;
    out.push(ck.vanishes("H-adj(H)", &["H"], &h.sub(&h.adjoint_with_measure(&m.measure))?, Expect::Holds)?);
    Ok(out)
}

/// Relative tolerance and step of the finite-difference oracle.
pub const FD_TOL: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-5;
/// The FD oracle uses at most this many of the checker's points.
pub const FD_MAX_POINTS: usize = 4;

/// Compare jet first and second derivatives of every non-constant field with
/// central differences: `∂_i f` against `(f(x+he_i) − f(x−he_i))/2h`, and
/// `∂_i∂_j f` against the same difference of the exact `∂_j f`. The residual
/// is `max |jet − fd| / (1 + |fd|)` entrywise.
pub fn check_fd_oracle(name: &str, fields: &[Field], nvars: usize, ck: &Checker) -> Result<CheckReport> {
    let mut seen = std::collections::HashSet::new();
    let live: Vec<&Field> = fields
        .iter()
        .filter(|f| f.deps() != 0 && !matches!(f.kind(), Kind::Zero | Kind::Const { .. }))
        .filter(|f| seen.insert(f.key()))
        .collect();
    let h = FD_STEP;
    let deps = live.iter().fold(0, |a, f| a | f.deps());
    let pts = &ck.points()[..ck.points().len().min(FD_MAX_POINTS)];
    let per_point = map_points(pts, ck.exec, |p| -> std::result::Result<f64, EvalError> {
        // one evaluator per shifted point so shared subexpressions are computed once
        let at = |q: Vec<f64>, order: usize| {
            let mut ev = Evaluator::new(q);
            for f in &live {
                ev.demand(f, order);
            }
            ev
        };
        let mut centre = at(p.to_vec(), 2);
        let mut worst = 0.0f64;
        let zero = MultiIndex::zero(nvars);
        let two_h = C64::new(2.0 * h, 0.0);
        for i in (0..nvars).filter(|&i| deps >> i & 1 == 1) {
            let mut q = p.to_vec();
            q[i] += h;
            let mut plus = at(q.clone(), 1);
            q[i] -= 2.0 * h;
            let mut minus = at(q, 1);
            for f in live.iter().filter(|f| f.deps() >> i & 1 == 1) {
                let shape = f.shape();
                let base = centre.eval(f, 2)?;
                let (vp, vm) = (plus.eval(f, 1)?, minus.eval(f, 1)?);
                let fd = (vp.partial_matrix(&zero, shape) - vm.partial_matrix(&zero, shape)) / two_h;
                worst = worst.max(rel_dev(&base.partial_matrix(&MultiIndex::unit(nvars, i), shape), &fd));
                for j in 0..nvars {
                    let ej = MultiIndex::unit(nvars, j);
                    let fd2 = (vp.partial_matrix(&ej, shape) - vm.partial_matrix(&ej, shape)) / two_h;
                    let exact = base.partial_matrix(&ej.add(&MultiIndex::unit(nvars, i)), shape);
                    worst = worst.max(rel_dev(&exact, &fd2));
                }
            }
        }
        Ok(worst)
    });
    let mut r = Residual::zero(ck.points().first().cloned().unwrap_or_default());
    for (p, w) in pts.iter().zip(per_point) {
        let w = w.map_err(|source| crate::error::Error::AtPoint { point: p.clone(), source })?;
        if w > r.max_abs || w.is_nan() {
            r.max_abs = w;
            r.argmax_point = p.clone();
        }
    }
    let mut rep = ck.report(name, &[], r, Expect::Holds).with_tol(FD_TOL);
    rep.points = pts.len();
    Ok(rep)
}

fn rel_dev(exact: &CMat, fd: &CMat) -> f64 {
    exact.iter().zip(fd.iter()).map(|(a, b)| (a - b).norm() / (1.0 + b.norm())).fold(0.0, f64::max)
}

/// The suite matching the model's declared algebra.
pub fn check_expected(m: &Model, ck: &Checker) -> Result<Vec<CheckReport>> {
    let mut out = match m.expected {
        Algebra::N2 => check_n2(m, ck)?,
        Algebra::Extended => check_extended(m, ck)?,
        Algebra::Central => check_central(m, &m.central, ck)?,
        Algebra::Kahler => check_theorem1(m, ck)?,
        Algebra::HyperKahler => check_theorem2(m, ck)?,
        Algebra::Gauge | Algebra::Exploratory => Vec::new(),
    };
    out.extend(check_identities(m, ck)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_thresholds() {
        let k = |r, e| CheckReport::classify(r, PASS_TOL, VIOLATED_TOL, e);
        assert_eq!(k(1e-12, Expect::Holds), Verdict::Pass);
        assert_eq!(k(1e-6, Expect::Holds), Verdict::Gray);
        assert_eq!(k(1e-1, Expect::Holds), Verdict::Fail);
        assert_eq!(k(1e-1, Expect::Violated), Verdict::ViolatedAsExpected);
        assert_eq!(k(1e-12, Expect::Violated), Verdict::Fail);
        assert_eq!(k(f64::NAN, Expect::Holds), Verdict::Fail);
        assert!(!Verdict::Gray.ok(true));
        assert!(Verdict::Gray.ok(false));
    }
}
