//! Scenario documents: coordinates, named fields, one model, a list of checks.
//!
//! ```toml
//! name = "witten"
//! seed = 1
//! points = 20
//!
//! [fields]
//! W = "x^3 - x"
//!
//! [model]
//! constructor = "witten"
//! W = "W"
//!
//! [[checks]]
//! suite = "n2"
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use sqm_core::clifford::epsilon2;
use sqm_core::geometry::{canonical_triple, check_complex_structure, check_quaternion, ComplexStructure, GeometryData, GibbonsHawking};
use sqm_core::parse::parse_with;
use sqm_core::verify::{self, check_fd_oracle, jacobi, CheckReport, Checker, Expect};
use sqm_core::zoo::{self, DeRhamOptions, DolbeaultOptions, Model, TorsionKind};
use sqm_core::{CMat, Error, Expr, Field, Result, C64};

fn default_seed() -> u64 {
    1
}

fn default_points() -> usize {
    16
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub coordinates: Coordinates,
    #[serde(default)]
    pub fields: Table,
    pub model: Table,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(skip)]
    source: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coordinates {
    /// Per-coordinate sample box, overriding the model default.
    #[serde(default)]
    pub boxes: Table,
    #[serde(default)]
    pub exclude: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub suite: String,
    /// `holds` (default), `violated` or `exploratory`; overrides every
    /// report of the suite.
    #[serde(default)]
    pub expect: Option<String>,
    /// Keep only reports with these names.
    #[serde(default)]
    pub only: Option<Vec<String>>,
    #[serde(default)]
    pub tol: Option<f64>,
}

/// Run-time overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub model: String,
    pub expected_algebra: String,
    pub seed: u64,
    pub points: usize,
    pub tolerance: f64,
    pub fail_on_gray: bool,
    pub passed: bool,
    pub recipe: Vec<String>,
    pub checks: Vec<CheckReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Scenario { line, msg: msg.into() }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|r| text[..r.start].matches('\n').count() + 1).unwrap_or(0);
            err(line, e.message().to_string())
        })?;
        s.source = text.to_string();
        if s.points == 0 {
            return Err(err(s.line_of("points"), "points must be at least 1"));
        }
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| err(0, format!("cannot read {}: {e}", path.display())))?;
        Scenario::parse(&text)
    }

    /// First line mentioning `key` as a TOML key (best effort, for messages).
    fn line_of(&self, key: &str) -> usize {
        for (i, l) in self.source.lines().enumerate() {
            let t = l.trim_start();
            if t.starts_with(key) && t[key.len()..].trim_start().starts_with('=') {
                return i + 1;
            }
        }
        0
    }

    pub fn constructor(&self) -> Result<&str> {
        self.model.get("constructor").and_then(Value::as_str).ok_or_else(|| err(self.line_of("constructor"), "[model] needs a string `constructor`"))
    }

    /// Build the model with the scenario's field definitions and domain.
    pub fn build(&self) -> Result<Model> {
        Ok(self.build_with_fields()?.0)
    }

    /// The model together with every field the scenario defines or passes
    /// as a parameter.
    pub fn build_with_fields(&self) -> Result<(Model, Vec<Field>)> {
        let ctor = self.constructor()?;
        let coords = coords_for(ctor, &self.model).map_err(|e| self.locate(e, ctor))?;
        let env = Env::new(self, coords)?;
        let mut m = build_model(ctor, &env).map_err(|e| self.locate(e, ctor))?;
        if let Some(rot) = self.model.get("rotate") {
            let t = rot.as_table().ok_or_else(|| err(self.line_of("rotate"), "`rotate` must be a table"))?;
            let b = env.matrix_value(t.get("B").ok_or_else(|| err(self.line_of("rotate"), "`rotate` needs B"))?, "B")?;
            let kind = TorsionKind::parse(t.get("kind").and_then(Value::as_str).unwrap_or("holomorphic"))?;
            m = zoo::torsion_rotate(&m, &b, kind)?;
        }
        for (name, v) in &self.coordinates.boxes {
            let k = m.space.index_of(name).ok_or_else(|| err(self.line_of(name), format!("unknown coordinate `{name}`")))?;
            let pair = v.as_array().filter(|a| a.len() == 2).and_then(|a| Some((num(&a[0])?, num(&a[1])?)));
            let (lo, hi) = pair.ok_or_else(|| err(self.line_of(name), "box must be [lo, hi]"))?;
            if !(lo < hi) {
                return Err(err(self.line_of(name), "box must have lo < hi"));
            }
            m.domain[k] = (lo, hi);
        }
        m.exclusions.extend(self.coordinates.exclude.iter().cloned());
        let mut fields: Vec<Field> = env.scalars.values().map(|e| Field::expr(e.clone())).collect();
        fields.extend(env.matrices.values().cloned());
        for (k, v) in &self.model {
            match v {
                Value::String(_) if k != "constructor" && k != "orientation" && k != "kind" => {
                    if let Ok(e) = env.scalar_value(v, k) {
                        fields.push(Field::expr(e));
                    } else if let Ok(f) = env.matrix_value(v, k) {
                        fields.push(f);
                    }
                }
                Value::Array(_) => {
                    if let Ok(f) = env.matrix_value(v, k) {
                        fields.push(f);
                    }
                }
                _ => {}
            }
        }
        Ok((m, fields))
    }

    fn locate(&self, e: Error, ctor: &str) -> Error {
        match e {
            Error::Scenario { .. } => e,
            Error::UnknownName(n) if n == ctor => err(self.line_of("constructor"), format!("unknown constructor `{ctor}`")),
            other => err(self.line_of("constructor"), other.to_string()),
        }
    }

    pub fn run(&self, ov: &Overrides, fail_on_gray: bool) -> Result<RunReport> {
        let (m, fields) = self.build_with_fields()?;
        let seed = ov.seed.unwrap_or(self.seed);
        let points = ov.points.unwrap_or(self.points);
        let tol = ov.tol.or(self.tolerance).unwrap_or(verify::PASS_TOL);
        let ck = Checker::new(m.sample_spec(points, seed)?)?.with_tol(tol);
        let default = vec![CheckSpec { suite: "expected".into(), expect: None, only: None, tol: None }];
        let specs = if self.checks.is_empty() { &default } else { &self.checks };
        let mut checks = Vec::new();
        for spec in specs {
            let res = if spec.suite == "fd_oracle" { fd_suite(&m, &fields, &ck) } else { run_suite(&m, &spec.suite, &ck) };
            let mut reps = res.map_err(|e| match e {
                Error::UnknownName(n) => err(self.line_of("suite"), format!("unknown suite or operator `{n}`")),
                other => other,
            })?;
            if let Some(only) = &spec.only {
                for o in only {
                    if !reps.iter().any(|r| &r.name == o) {
                        return Err(err(self.line_of("only"), format!("suite `{}` has no check named `{o}`", spec.suite)));
                    }
                }
                reps.retain(|r| only.contains(&r.name));
            }
            if let Some(t) = spec.tol {
                reps = reps.into_iter().map(|r| r.with_tol(t)).collect();
            }
            if let Some(e) = &spec.expect {
                let e = Expect::parse(e).ok_or_else(|| err(self.line_of("expect"), format!("unknown expectation `{e}`")))?;
                reps = reps.into_iter().map(|r| r.expecting(e)).collect();
            }
            checks.extend(reps);
        }
        let passed = checks.iter().all(|r| r.verdict.ok(fail_on_gray));
        Ok(RunReport {
            scenario: self.name.clone(),
            model: m.name.clone(),
            expected_algebra: m.expected.label().to_string(),
            seed,
            points,
            tolerance: tol,
            fail_on_gray,
            passed,
            recipe: m.recipe.clone(),
            checks,
        })
    }
}

fn num(v: &Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

/// Named scalar and matrix definitions, parsed against the model coordinates.
struct Env<'a> {
    sc: &'a Scenario,
    coords: Vec<String>,
    scalars: HashMap<String, Expr>,
    matrices: HashMap<String, Field>,
}

impl<'a> Env<'a> {
    fn new(sc: &'a Scenario, coords: Vec<String>) -> Result<Env<'a>> {
        let mut env = Env { sc, coords, scalars: HashMap::new(), matrices: HashMap::new() };
        for (name, v) in &sc.fields {
            if env.coords.contains(name) {
                return Err(err(sc.line_of(name), format!("field `{name}` shadows a coordinate")));
            }
            match v {
                Value::Array(_) => {
                    let f = env.matrix_value(v, name)?;
                    env.matrices.insert(name.clone(), f);
                }
                _ => {
                    let e = env.scalar_value(v, name)?;
                    env.scalars.insert(name.clone(), e);
                }
            }
        }
        Ok(env)
    }

    fn scalar_value(&self, v: &Value, key: &str) -> Result<Expr> {
        match v {
            Value::String(s) => {
                if let Some(e) = self.scalars.get(s.trim()) {
                    return Ok(e.clone());
                }
                parse_with(s, &self.coords, &self.scalars).map_err(|e| err(self.sc.line_of(key), format!("`{key}`: {e}")))
            }
            _ => num(v).map(Expr::real).ok_or_else(|| err(self.sc.line_of(key), format!("`{key}` must be an expression or a number"))),
        }
    }

    fn matrix_value(&self, v: &Value, key: &str) -> Result<Field> {
        if let Value::String(s) = v {
            return self.matrices.get(s.trim()).cloned().ok_or_else(|| err(self.sc.line_of(key), format!("`{key}`: no matrix field named `{s}`")));
        }
        let rows = v.as_array().ok_or_else(|| err(self.sc.line_of(key), format!("`{key}` must be a matrix (array of rows)")))?;
        let mut entries = Vec::new();
        let mut width = None;
        for r in rows {
            let r = r.as_array().ok_or_else(|| err(self.sc.line_of(key), format!("`{key}`: rows must be arrays")))?;
            if *width.get_or_insert(r.len()) != r.len() {
                return Err(err(self.sc.line_of(key), format!("`{key}`: ragged matrix")));
            }
            for x in r {
                entries.push(self.scalar_value(x, key)?);
            }
        }
        let k = width.unwrap_or(0);
        if rows.is_empty() || k == 0 {
            return Err(err(self.sc.line_of(key), format!("`{key}`: empty matrix")));
        }
        Ok(Field::exprs(rows.len(), k, entries))
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.sc.model.get(key)
    }

    fn expr(&self, key: &str) -> Result<Expr> {
        let v = self.get(key).ok_or_else(|| err(self.sc.line_of("constructor"), format!("missing parameter `{key}`")))?;
        self.scalar_value(v, key)
    }

    fn opt_expr(&self, key: &str) -> Result<Option<Expr>> {
        self.get(key).map(|v| self.scalar_value(v, key)).transpose()
    }

    fn matrix(&self, key: &str) -> Result<Field> {
        let v = self.get(key).ok_or_else(|| err(self.sc.line_of("constructor"), format!("missing parameter `{key}`")))?;
        self.matrix_value(v, key)
    }

    fn opt_matrix(&self, key: &str) -> Result<Option<Field>> {
        self.get(key).map(|v| self.matrix_value(v, key)).transpose()
    }

    fn float(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.get(key) {
            None => default.ok_or_else(|| err(self.sc.line_of("constructor"), format!("missing parameter `{key}`"))),
            Some(Value::String(s)) if s == "inf" => Ok(f64::INFINITY),
            Some(v) => num(v).ok_or_else(|| err(self.sc.line_of(key), format!("`{key}` must be a number"))),
        }
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some(v) => v.as_bool().ok_or_else(|| err(self.sc.line_of(key), format!("`{key}` must be true or false"))),
        }
    }

    /// A constant numeric matrix (for flat complex structures).
    fn const_matrix(&self, key: &str) -> Result<Option<CMat>> {
        let Some(f) = self.opt_matrix(key)? else { return Ok(None) };
        let v = f.value_at(&vec![0.0; self.coords.len()])?;
        if f.deps() != 0 {
            return Err(err(self.sc.line_of(key), format!("`{key}` must be constant")));
        }
        Ok(Some(v))
    }
}

fn int_param(model: &Table, key: &str) -> Result<usize> {
    model
        .get(key)
        .and_then(Value::as_integer)
        .filter(|&k| k >= 1)
        .map(|k| k as usize)
        .ok_or_else(|| Error::Invalid(format!("parameter `{key}` must be a positive integer")))
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

fn complex_names(d: usize) -> Vec<String> {
    (1..=d).flat_map(|k| [format!("x{k}"), format!("y{k}")]).collect()
}

fn modes(model: &Table) -> Result<Vec<[i64; 3]>> {
    let bad = || Error::Invalid("`modes` must be a list of integer 3-vectors".into());
    let arr = model.get("modes").and_then(Value::as_array).ok_or_else(bad)?;
    arr.iter()
        .map(|v| {
            let a = v.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
            let mut out = [0i64; 3];
            for (o, x) in out.iter_mut().zip(a) {
                *o = x.as_integer().ok_or_else(bad)?;
            }
            Ok(out)
        })
        .collect()
}

/// Coordinate names a constructor will use (needed before parsing fields).
pub fn coords_for(ctor: &str, model: &Table) -> Result<Vec<String>> {
    Ok(match ctor {
        "witten" => vec!["x".into()],
        "free_complex" | "dolbeault" => complex_names(int_param(model, "d")?),
        "hkt_conformal" => complex_names(2),
        "free_real" | "de_rham" | "quasicomplex" | "kahler" | "hyperkahler" => names("x", int_param(model, "D")?),
        "gibbons_hawking" | "instanton" => names("x", 4),
        "okt_flat" => names("x", 8),
        "gauge_sym3" => (1..=3).flat_map(|a| (1..=2).map(move |j| format!("A{a}{j}"))).collect(),
        "gauge_sym3_resolved" => vec!["a".into(), "b".into(), "alpha".into()],
        "wz_modes" => (1..=modes(model)?.len()).flat_map(|k| [format!("f1_{k}"), format!("f2_{k}")]).collect(),
        "wz_interacting" => vec!["phibar".into()],
        other => return Err(Error::UnknownName(other.into())),
    })
}

fn geometry(env: &Env) -> Result<GeometryData> {
    match (env.opt_matrix("coframe")?, env.opt_matrix("vielbein")?) {
        (Some(f), None) => GeometryData::from_coframe(f),
        (None, Some(e)) => GeometryData::from_vielbein(e),
        _ => Err(Error::Invalid("give exactly one of `coframe` or `vielbein`".into())),
    }
}

/// `ε ⊕ ε ⊕ …`, the block complex structure in flat indices.
fn block_structure(n: usize) -> CMat {
    let mut j = CMat::zeros(n, n);
    for b in 0..n / 2 {
        for r in 0..2 {
            for k in 0..2 {
                j[(2 * b + r, 2 * b + k)] = C64::new(epsilon2(r, k), 0.0);
            }
        }
    }
    j
}

fn build_model(ctor: &str, env: &Env) -> Result<Model> {
    let model = &env.sc.model;
    match ctor {
        "witten" => zoo::witten(&env.expr("W")?),
        "free_complex" => zoo::free_complex(int_param(model, "d")?),
        "free_real" => zoo::free_real(int_param(model, "D")?),
        "dolbeault" => {
            let opts = DolbeaultOptions { potential: env.opt_expr("W")?, antiholomorphic_check: env.flag("antiholomorphic_check")? };
            zoo::dolbeault(&env.matrix("omega")?, &opts)
        }
        "de_rham" => {
            let opts = DeRhamOptions { potential: env.opt_expr("W")?, torsion: env.opt_matrix("torsion")? };
            zoo::de_rham(&env.matrix("omega")?, &opts)
        }
        "quasicomplex" => zoo::quasicomplex(&env.matrix("omega")?, env.flag("rhombus")?),
        "kahler" => {
            let geo = geometry(env)?;
            let flat = env.const_matrix("structure")?.unwrap_or_else(|| block_structure(geo.dim));
            zoo::kahler(&geo, &geo.world_structure(&flat, None))
        }
        "hyperkahler" => {
            let geo = geometry(env)?;
            let asd = match model.get("orientation").and_then(Value::as_str).unwrap_or("self_dual") {
                "self_dual" => false,
                "anti_self_dual" => true,
                o => return Err(Error::Invalid(format!("unknown orientation `{o}`"))),
            };
            let t = canonical_triple(asd);
            let triple: [ComplexStructure; 3] = std::array::from_fn(|a| geo.world_structure(&t[a], Some(a + 1)));
            zoo::hyperkahler(&geo, &triple)
        }
        "gibbons_hawking" => {
            let bad = || Error::Invalid("`centers` must be a list of 3-vectors".into());
            let centers = model
                .get("centers")
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|c| {
                    let a = c.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
                    let v: Option<Vec<f64>> = a.iter().map(num).collect();
                    let v = v.ok_or_else(bad)?;
                    Ok([v[0], v[1], v[2]])
                })
                .collect::<Result<Vec<_>>>()?;
            let weights = match model.get("weights") {
                None => vec![1.0; centers.len()],
                Some(w) => w.as_array().and_then(|a| a.iter().map(num).collect::<Option<Vec<_>>>()).ok_or_else(|| Error::Invalid("`weights` must be numbers".into()))?,
            };
            if weights.len() != centers.len() {
                return Err(Error::Invalid("one weight per center".into()));
            }
            let gh = GibbonsHawking { centers, weights, epsilon: env.float("epsilon", Some(1.0))?, deformation: env.opt_expr("deformation")? };
            let dom = vec![(0.3, 1.0), (0.3, 1.0), (-0.5, 0.5), (-1.0, 1.0)];
            let dom = env.sc.coordinates.boxes.iter().fold(dom, |mut d, (k, v)| {
                if let (Some(i), Some(a)) = (env.coords.iter().position(|c| c == k), v.as_array()) {
                    if let (Some(lo), Some(hi)) = (a.first().and_then(num), a.get(1).and_then(num)) {
                        d[i] = (lo, hi);
                    }
                }
                d
            });
            zoo::gibbons_hawking_model(&gh, &dom)
        }
        "hkt_conformal" => zoo::hkt_conformal(&env.expr("g")?),
        "okt_flat" => zoo::okt_flat(),
        "instanton" => zoo::instanton(env.float("rho", Some(1.0))?),
        "gauge_sym3" => zoo::gauge_sym3(),
        "gauge_sym3_resolved" => zoo::gauge_sym3_resolved(env.float("g0", Some(1.0))?),
        "wz_modes" => zoo::wz_modes(&modes(model)?),
        "wz_interacting" => zoo::wz_interacting(&env.expr("Wprime")?),
        other => Err(Error::UnknownName(other.into())),
    }
}

/// Autodiff vs central differences on the given fields, the geometry and the
/// supercharge coefficients.
pub fn fd_suite(m: &Model, extra: &[Field], ck: &Checker) -> Result<Vec<CheckReport>> {
    let mut fields = extra.to_vec();
    if let Some(g) = &m.geometry {
        fields.extend([g.vielbein.clone(), g.inv_vielbein.clone(), g.metric.clone()]);
        fields.extend(g.spin_connection.iter().cloned());
    }
    fields.extend(m.charge_fields());
    Ok(vec![check_fd_oracle("fd_oracle", &fields, m.space.dim(), ck)?])
}

/// Run one named suite against a model.
pub fn run_suite(m: &Model, suite: &str, ck: &Checker) -> Result<Vec<CheckReport>> {
    Ok(match suite {
        "expected" => verify::check_expected(m, ck)?,
        "n2" => verify::check_n2(m, ck)?,
        "extended" => verify::check_extended(m, ck)?,
        "central" => verify::check_central(m, &m.central, ck)?,
        "theorem1" => verify::check_theorem1(m, ck)?,
        "theorem2" => verify::check_theorem2(m, ck)?,
        "identities" => verify::check_identities(m, ck)?,
        "adjoints" => verify::check_adjoints(m, ck)?,
        "complex_structure" => {
            let geo = m.geometry.as_ref().ok_or_else(|| Error::Invalid("model has no geometry".into()))?;
            let mut out = Vec::new();
            for (k, s) in m.structures.iter().enumerate() {
                let tag = if m.structures.len() == 1 { "I".to_string() } else { format!("I{}", k + 1) };
                out.extend(check_complex_structure(s, geo, ck, &tag)?);
            }
            out
        }
        "quaternion" => {
            let t: &[ComplexStructure; 3] = m.structures.get(..3).and_then(|s| s.try_into().ok()).ok_or_else(|| Error::Invalid("model has no quaternionic triple".into()))?;
            vec![check_quaternion(t, ck)?]
        }
        "fd_oracle" => fd_suite(m, &[], ck)?,
        "jacobi" => {
            let mut out = Vec::new();
            if let Some(c) = m.supercharges.first() {
                let h = &m.hamiltonian;
                out.push(ck.vanishes("jacobi(Q,Qbar,H)", &[&c.name, "H"], &jacobi((&c.q, true), (&c.qbar, true), (h, false))?, Expect::Holds)?);
                out.push(ck.vanishes("jacobi(Q,Q,Qbar)", &[&c.name], &jacobi((&c.q, true), (&c.q, true), (&c.qbar, true))?, Expect::Holds)?);
            }
            out
        }
        other => return Err(Error::UnknownName(other.into())),
    })
}
