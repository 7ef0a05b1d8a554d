use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

use sqm_cli::{catalog_text, Overrides, Scenario};

#[derive(Parser)]
#[command(name = "sqmzoo", version, about = "Verify supersymmetry algebras of quantum-mechanical models at sample points")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write a JSON report; exit 0 iff every check passes.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Report path (default: <scenario name>.report.json).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Residuals between the pass and violation thresholds fail the run;
        /// `--fail-on-gray=false` turns them into warnings.
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
        fail_on_gray: bool,
        /// Suppress per-check lines.
        #[arg(long, short)]
        quiet: bool,
    },
    /// List the constructors with parameters, expected algebras and anchors.
    ListModels,
    /// Print an operator of the scenario's model in normal-ordered form.
    ShowOp { scenario: PathBuf, op: String },
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::ListModels => {
            print!("{}", catalog_text());
            ExitCode::SUCCESS
        }
        Cmd::ShowOp { scenario, op } => {
            let res = Scenario::load(&scenario).and_then(|s| s.build()).and_then(|m| m.op(&op).map(|o| (m, o)));
            match res {
                Ok((m, o)) => {
                    println!("{op} [{}] =\n  {}", m.name, o.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Run { scenario, seed, points, tol, report, fail_on_gray, quiet } => {
            let sc = match Scenario::load(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}: {e}", scenario.display());
                    return ExitCode::from(2);
                }
            };
            let rep = match sc.run(&Overrides { seed, points, tol }, fail_on_gray) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}: {e}", scenario.display());
                    return ExitCode::from(2);
                }
            };
            if !quiet {
                for c in &rep.checks {
                    println!("{}", c.line());
                }
            }
            let path = report.unwrap_or_else(|| PathBuf::from(format!("{}.report.json", sc.name)));
            if let Err(e) = std::fs::write(&path, rep.to_json()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            let gray = rep.checks.iter().filter(|c| c.verdict == sqm_core::Verdict::Gray).count();
            if gray > 0 && !fail_on_gray {
                eprintln!("warning: {gray} check(s) in the gray zone");
            }
            println!("{}: {} ({} checks, report {})", sc.name, if rep.passed { "PASS" } else { "FAIL" }, rep.checks.len(), path.display());
            if rep.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
