use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use specwres::clifford::{GradingKind, ModuleKind};
use specwres::functionals::{coefficient_table, default_grading, evaluate, DensityReport, FunctionalKind, OracleStatus};
use specwres::jets::{ResolvedScenario, Scenario};
use specwres::parallel::Execution;
use specwres::verify::{self, Group, VerifyOptions};

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "specwres", version, about = "Residue densities of torsion-perturbed Dirac operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Relative tolerance for oracle comparisons.
    #[arg(long, env = "SPECWRES_TOL", default_value_t = 1e-9, value_parser = parse_tolerance)]
    tolerance: f64,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(format!("tolerance must be a finite non-negative number, got {t}"))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification sweeps.
    Verify {
        /// Restrict to these groups (repeatable).
        #[arg(long = "group")]
        groups: Vec<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random draws per dimension and module.
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a functional density on a scenario file or a random scenario.
    Density {
        /// Scenario JSON: one scenario, or a list of {"id", "scenario"} entries.
        scenario: Option<PathBuf>,
        #[arg(long)]
        functional: String,
        #[arg(long)]
        chiral: bool,
        /// Grading for chiral functionals (implies --chiral).
        #[arg(long)]
        grading: Option<String>,
        /// Dimension of a random scenario when no file is given.
        #[arg(long)]
        n: Option<usize>,
        /// Module of a random scenario when no file is given.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Print the closed-form constants for a module and dimension.
    Table {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchEntry {
    id: String,
    scenario: Scenario,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    Batch(Vec<BatchEntry>),
    Single(Box<Scenario>),
}

#[derive(Serialize)]
struct BatchReport {
    id: String,
    report: DensityReport,
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn fmt_c(z: Complex64) -> String {
    format!("{:+.12e} {:+.12e}i", z.re, z.im)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { groups, n, seed, count, common } => cmd_verify(groups, n, seed, count, &common),
        Command::Density { scenario, functional, chiral, grading, n, kind, seed, common } => {
            cmd_density(scenario, &functional, chiral, grading, n, kind, seed, &common)
        }
        Command::Table { kind, n, common } => cmd_table(&kind, n, &common),
    }
}

fn cmd_verify(groups: Vec<String>, n: Option<usize>, seed: u64, count: usize, common: &Common) -> ExitCode {
    let groups = if groups.is_empty() {
        Group::ALL.to_vec()
    } else {
        match groups.iter().map(|g| g.parse::<Group>()).collect::<Result<Vec<_>, _>>() {
            Ok(g) => g,
            Err(e) => {
                let names: Vec<&str> = Group::ALL.iter().map(|g| g.name()).collect();
                return input_error(format!("{e}; expected one of {}", names.join(", ")));
            }
        }
    };
    if count == 0 {
        return input_error("--count must be positive");
    }
    let opts = VerifyOptions { groups, n, seed, count, tolerance: common.tolerance, exec: Execution::default() };
    let summary = match verify::run(&opts) {
        Ok(s) => s,
        Err(e) => return input_error(e),
    };
    if common.json {
        println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
    } else {
        for c in &summary.checks {
            println!(
                "{} [{}] {}  max residual {:.3e} (tol {:.1e}, {} samples){}",
                if c.passed { "PASS" } else { "FAIL" },
                c.group,
                c.name,
                c.max_residual,
                c.tolerance,
                c.samples,
                c.note.as_deref().map(|n| format!("  -- {n}")).unwrap_or_default()
            );
        }
        let failed = summary.failures().count();
        println!("{} checks, {} failed", summary.checks.len(), failed);
    }
    if summary.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_density(
    path: Option<PathBuf>,
    functional: &str,
    chiral: bool,
    grading: Option<String>,
    n: Option<usize>,
    kind: Option<String>,
    seed: u64,
    common: &Common,
) -> ExitCode {
    let functional: FunctionalKind = match functional.parse() {
        Ok(f) => f,
        Err(e) => return input_error(e),
    };
    let grading: Option<GradingKind> = match grading.map(|g| g.parse()) {
        None => None,
        Some(Ok(g)) => Some(g),
        Some(Err(e)) => return input_error(e),
    };
    let mut items: Vec<(String, ResolvedScenario)> = Vec::new();
    match path {
        Some(p) => {
            if n.is_some() || kind.is_some() {
                return input_error("--n and --kind describe a random scenario and cannot be combined with a scenario file");
            }
            let text = match std::fs::read_to_string(&p) {
                Ok(t) => t,
                Err(e) => return input_error(format!("{}: {e}", p.display())),
            };
            let parsed: ScenarioFile = match serde_json::from_str(&text) {
                Ok(f) => f,
                Err(_) => match Scenario::from_json(&text) {
                    // reparse for the precise schema diagnostic
                    Ok(s) => ScenarioFile::Single(Box::new(s)),
                    Err(e) => return input_error(e),
                },
            };
            let entries = match parsed {
                ScenarioFile::Single(s) => vec![("scenario".to_string(), *s)],
                ScenarioFile::Batch(b) => b.into_iter().map(|e| (e.id, e.scenario)).collect(),
            };
            for (id, s) in entries {
                match s.resolve() {
                    Ok(r) => items.push((id, r)),
                    Err(e) => return input_error(format!("{id}: {e}")),
                }
            }
        }
        None => {
            let (Some(n), Some(kind)) = (n, kind) else {
                return input_error("give a scenario file, or --n and --kind for a random scenario");
            };
            let kind: ModuleKind = match kind.parse() {
                Ok(k) => k,
                Err(e) => return input_error(e),
            };
            match ResolvedScenario::random(n, kind, seed) {
                Ok(r) => items.push((format!("random-{seed}"), r)),
                Err(e) => return input_error(e),
            }
        }
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let chiral = chiral || grading.is_some();
    let results = Execution::default().map(&items, |(id, sc)| {
        let g = chiral.then(|| grading.unwrap_or_else(|| default_grading(sc.module)));
        evaluate(sc, functional, g, common.tolerance).map(|r| (id.clone(), r))
    });
    let mut reports = Vec::new();
    for r in results {
        match r {
            Ok(x) => reports.push(x),
            Err(e) => return input_error(e),
        }
    }
    let mismatch = reports.iter().any(|(_, r)| r.oracle == OracleStatus::Mismatch);
    if common.json {
        let out = if reports.len() == 1 && items[0].0 == "scenario" {
            serde_json::to_string_pretty(&reports[0].1)
        } else {
            let batch: Vec<BatchReport> = reports.into_iter().map(|(id, report)| BatchReport { id, report }).collect();
            serde_json::to_string_pretty(&batch)
        };
        println!("{}", out.expect("serializable"));
    } else {
        for (id, r) in &reports {
            println!("{id}: {:?} n={} {}{}", r.functional, r.n, r.kind, r.grading.map(|g| format!(" chiral ({g:?})")).unwrap_or_default());
            println!("  value     {}", fmt_c(r.value));
            if let Some(x) = r.reference {
                println!("  reference {}", fmt_c(x));
            }
            let status = match r.oracle {
                OracleStatus::Matched => "matched",
                OracleStatus::Mismatch => "MISMATCH",
                OracleStatus::EngineOnly => "engine-only",
            };
            match r.residual {
                Some(res) => println!("  oracle    {status} (residual {res:.3e})"),
                None => println!("  oracle    {status}"),
            }
            if let Some(n) = &r.note {
                println!("  note      {n}");
            }
        }
    }
    if mismatch {
        ExitCode::from(EXIT_MISMATCH)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_table(kind: &str, n: usize, common: &Common) -> ExitCode {
    let kind: ModuleKind = match kind.parse() {
        Ok(k) => k,
        Err(e) => return input_error(e),
    };
    let rows = match coefficient_table(kind, n) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    if common.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
    } else {
        println!("{kind} module, n = {n}");
        let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &rows {
            println!("  {:<w$}  {:>44}   {}", r.name, fmt_c(r.value), r.expression);
            if let Some(note) = &r.note {
                println!("  {:<w$}  note: {note}", "");
            }
        }
    }
    ExitCode::SUCCESS
}
