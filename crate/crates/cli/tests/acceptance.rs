//! Acceptance suite: one PASS/FAIL line per criterion, 20 seeded points,
//! every scenario under 60 s. Runs without the libtest harness so the lines
//! are always printed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sqm_cli::{Overrides, RunReport, Scenario};
use sqm_core::clifford::{best_quaternion_residual, const_tensor, TensorName};
use sqm_core::Verdict;

const POINTS: usize = 20;
const BUDGET: Duration = Duration::from_secs(60);

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

struct Run {
    report: RunReport,
    elapsed: Duration,
}

fn run(name: &str, points: usize) -> Result<Run, String> {
    let sc = Scenario::load(&scenario_dir().join(format!("{name}.toml"))).map_err(|e| format!("{name}: {e}"))?;
    let t = Instant::now();
    let report = sc.run(&Overrides { points: Some(points), ..Default::default() }, true).map_err(|e| format!("{name}: {e}"))?;
    Ok(Run { report, elapsed: t.elapsed() })
}

struct Runs(BTreeMap<String, Run>);

impl Runs {
    fn get(&self, name: &str) -> Result<&Run, String> {
        self.0.get(name).ok_or_else(|| format!("{name}: scenario missing"))
    }

    /// Whole scenario passed in time; every named check is present with the
    /// given verdict.
    fn require(&self, name: &str, checks: &[(&str, Verdict)]) -> Result<String, String> {
        let r = self.get(name)?;
        if r.elapsed > BUDGET {
            return Err(format!("{name}: {:.1}s exceeds the budget", r.elapsed.as_secs_f64()));
        }
        if !r.report.passed {
            let bad: Vec<String> = r.report.checks.iter().filter(|c| !c.verdict.ok(true)).map(|c| format!("{} {:?} {:.2e}", c.name, c.verdict, c.max_residual)).collect();
            return Err(format!("{name}: {}", bad.join("; ")));
        }
        let mut worst = 0.0f64;
        for (check, v) in checks {
            let c = self.check(name, check)?;
            if c.verdict != *v {
                return Err(format!("{name}: {check} is {:?}, wanted {v:?}", c.verdict));
            }
            if *v == Verdict::Pass {
                worst = worst.max(c.relative);
            }
        }
        Ok(format!("{name} worst {worst:.1e} in {:.1}s", r.elapsed.as_secs_f64()))
    }

    fn check(&self, name: &str, check: &str) -> Result<&sqm_core::CheckReport, String> {
        self.get(name)?.report.checks.iter().find(|c| c.name == check).ok_or_else(|| format!("{name}: no check `{check}`"))
    }

    fn all_pass(&self, name: &str) -> Result<String, String> {
        let names: Vec<String> = self.get(name)?.report.checks.iter().filter(|c| c.expect == sqm_core::Expect::Holds && c.name != "fd_oracle").map(|c| c.name.clone()).collect();
        let req: Vec<(&str, Verdict)> = names.iter().map(|n| (n.as_str(), Verdict::Pass)).collect();
        self.require(name, &req)
    }
}

const P: Verdict = Verdict::Pass;
const V: Verdict = Verdict::ViolatedAsExpected;

fn n2() -> [(&'static str, Verdict); 3] {
    [("Q^2", P), ("Qbar^2", P), ("{Qbar,Q}-2H", P)]
}

fn both(a: Result<String, String>, b: Result<String, String>) -> Result<String, String> {
    Ok(format!("{}; {}", a?, b?))
}

fn criteria(runs: &Runs) -> Vec<(&'static str, Result<String, String>)> {
    let mut out = Vec::new();
    out.push(("Witten W=x^3-x: nilpotency, {Qbar,Q}=2H, similarity = direct", {
        let r = runs.require("witten", &[n2()[0], n2()[1], n2()[2], ("Q(similarity)-Q(direct)", P)]);
        r.and_then(|s| {
            let c = runs.check("witten", "Q(similarity)-Q(direct)")?;
            if c.relative < 1e-10 {
                Ok(s)
            } else {
                Err(format!("similarity residual {:.2e} above 1e-10", c.relative))
            }
        })
    }));
    out.push((
        "free complex d=2: N=2 and N=4 with the S pair",
        runs.require("free_complex", &[n2()[0], n2()[1], n2()[2], ("{Q,Sbar}", P), ("{S,Sbar}-2H", P), ("{Q,S}", P), ("{S,S}", P)]),
    ));
    out.push((
        "Dolbeault d=2, nondiagonal omega: N=2 with measure adjoint, holomorphic twist",
        both(
            runs.require("dolbeault", &[n2()[0], n2()[1], n2()[2], ("Qbar-adj(Q)", P), ("H-adj(H)", P)]),
            runs.require("dolbeault_antiholomorphic", &[n2()[0], n2()[1], n2()[2]]),
        ),
    ));
    out.push((
        "de Rham D=2, D=4: similarity = spin connection, N=2 with sqrt(det g)",
        both(
            runs.require("de_rham_2d", &[n2()[0], n2()[1], n2()[2], ("Q(similarity)-Q(spin connection)", P), ("Qbar-adj(Q)", P)]),
            runs.require("de_rham_4d", &[n2()[0], n2()[1], n2()[2], ("Q(similarity)-Q(spin connection)", P)]),
        ),
    ));
    out.push(("rhombus: reduction commutes with similarity", runs.require("quasicomplex_rhombus", &[("reduce(similarity)-similarity(reduce)", P)])));
    out.push(("warped Kähler D=4: Theorem 1 and N=4; non-Kähler control breaks {Q,Sbar}", {
        let ok = runs.all_pass("kahler_warped");
        let broken = runs.require("kahler_broken", &[("{Q,Sbar}", V), ("DI", V)]).and_then(|s| {
            let c = runs.check("kahler_broken", "{Q,Sbar}")?;
            if c.max_residual >= 1e-3 {
                Ok(format!("{s}, |{{Q,Sbar}}| = {:.2e}", c.max_residual))
            } else {
                Err(format!("{{Q,Sbar}} only {:.2e}", c.max_residual))
            }
        });
        both(ok, broken)
    }));
    out.push((
        "Gibbons–Hawking one-center: quaternion, DI = 0, [S,F+] relations, N=8; flat",
        both(runs.all_pass("gibbons_hawking"), runs.all_pass("hyperkahler_flat")),
    ));
    out.push(("HKT conformally flat: N=4, direct = similarity to 1e-10", {
        runs.all_pass("hkt_conformal").and_then(|s| {
            for n in ["Q(similarity)-Q(direct)", "S(similarity)-S(direct)"] {
                let c = runs.check("hkt_conformal", n)?;
                if c.relative >= 1e-10 {
                    return Err(format!("{n} {:.2e}", c.relative));
                }
            }
            Ok(s)
        })
    }));
    out.push(("OKT flat D=8: eight Hermitian charges, no quaternionic Gamma triple", {
        runs.all_pass("okt_flat").and_then(|s| {
            let g = const_tensor(TensorName::Gamma7);
            let mut best = f64::INFINITY;
            for a in 0..7 {
                for b in a + 1..7 {
                    for c in b + 1..7 {
                        best = best.min(best_quaternion_residual(&g.mats, [a, b, c]));
                    }
                }
            }
            if best >= 0.5 {
                Ok(format!("{s}, min triple residual {best:.2}"))
            } else {
                Err(format!("a Gamma triple is nearly quaternionic ({best:.2e})"))
            }
        })
    }));
    out.push((
        "instanton rho=1: N=4, [L,Q]=0, su(2)",
        runs.require("instanton", &[("{Q1,Q1bar}-2H", P), ("{Q1,Q2bar}", P), ("[L1,Q1]", P), ("[L3,Q2]", P), ("[L1,L2]-2ieL", P), ("[L2,L3]-2ieL", P)]),
    ));
    out.push((
        "SYM3: Q^2 = A_- G, [G,H] = 0, Gauss law su(2)",
        runs.require("gauge_sym3", &[("Q^2-A_-G", P), ("[G1,H]", P), ("[G2,H]", P), ("[G3,H]", P), ("[G1,G2]-ieG", P), ("[G1,G3]-ieG", P), ("[G2,G3]-ieG", P)]),
    ));
    out.push(("Wess–Zumino, 3 modes: central algebra, per-mode charges, similarity", {
        runs.all_pass("wz_modes").and_then(|s| {
            let c = runs.check("wz_modes", "calQ(similarity)-sum calQ_n")?;
            if c.relative < 1e-10 {
                Ok(s)
            } else {
                Err(format!("similarity {:.2e}", c.relative))
            }
        })
    }));
    out.push(("autodiff vs central differences on every shipped scenario", {
        let mut worst = (0.0f64, String::new());
        let mut err = None;
        for (name, r) in &runs.0 {
            match r.report.checks.iter().find(|c| c.name == "fd_oracle") {
                Some(c) if c.verdict == P => {
                    if c.max_residual > worst.0 {
                        worst = (c.max_residual, name.clone());
                    }
                }
                Some(c) => err = Some(format!("{name}: fd_oracle {:?} {:.2e}", c.verdict, c.max_residual)),
                None => err = Some(format!("{name}: no fd_oracle check")),
            }
        }
        match err {
            Some(e) => Err(e),
            None => Ok(format!("{} scenarios, worst {:.1e} ({})", runs.0.len(), worst.0, worst.1)),
        }
    }));
    out.push(("same seed gives byte-identical reports", {
        let mut res = Ok(String::new());
        for name in ["witten", "gibbons_hawking", "instanton"] {
            let a = run(name, POINTS).map(|r| r.report.to_json());
            let b = run(name, POINTS).map(|r| r.report.to_json());
            match (a, b) {
                (Ok(a), Ok(b)) if a == b && a == runs.get(name).map(|r| r.report.to_json()).unwrap_or_default() => {}
                (Ok(_), Ok(_)) => res = Err(format!("{name}: reports differ")),
                (Err(e), _) | (_, Err(e)) => res = Err(e),
            }
        }
        res.map(|_| "witten, gibbons_hawking, instanton".to_string())
    }));
    out
}

fn main() {
    let mut names: Vec<String> = std::fs::read_dir(scenario_dir())
        .expect("scenarios directory")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut runs = Runs(BTreeMap::new());
    let mut load_errors = Vec::new();
    for n in &names {
        match run(n, POINTS) {
            Ok(r) => {
                runs.0.insert(n.clone(), r);
            }
            Err(e) => load_errors.push(e),
        }
    }
    let mut failed = 0;
    for (k, (title, res)) in criteria(&runs).into_iter().enumerate() {
        match res {
            Ok(detail) => println!("PASS {:>2}  {title}  [{detail}]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2}  {title}  [{why}]", k + 1);
            }
        }
    }
    for e in &load_errors {
        println!("ERROR {e}");
    }
    if failed > 0 || !load_errors.is_empty() {
        std::process::exit(1);
    }
}
