//! Command-line front end. Exit codes: 0 success, 1 usage, 2 domain or
//! validation failure, 3 search budget exhausted.

use crate::constructions::{build_family, FAMILIES};
use crate::feasibility::scan;
use crate::gf::FieldSpec;
use crate::plane::{build_pg2q, load_plane, Plane};
use crate::sets::{analyze, classify, secant_spectrum, Candidate};
use crate::solver::{
    enumerate_minimal_dominating, min_blocking, min_dominating_with, SearchOptions, SolverError,
};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Parser, Debug)]
#[command(name = "planedom", version, about = "Dominating sets in finite projective planes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build PG(2,q) and print it as plane JSON.
    Build {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a plane file against the projective plane axioms.
    Validate {
        #[arg(long)]
        plane: PathBuf,
    },
    /// Build a named dominating-set family in PG(2,q).
    Construct {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(FAMILIES))]
        family: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report every predicate, spectrum and bound for a candidate set.
    Analyze {
        /// Plane file; PG(2,q) is built instead when --q is given.
        #[arg(long, conflicts_with = "q", required_unless_present = "q")]
        plane: Option<PathBuf>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        set: PathBuf,
    },
    /// Domination number of the incidence graph of PG(2,q).
    Gamma {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        budget_seconds: Option<u64>,
        /// Stop as soon as the incumbent meets the counting bound 2q.
        #[arg(long)]
        analytic: bool,
    },
    /// Smallest (optionally nontrivial) blocking set of PG(2,q).
    MinBlocking {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        nontrivial: bool,
    },
    /// All minimal dominating sets up to a size bound.
    EnumerateMinimal {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        max_size: usize,
    },
    /// Feasible parameter tuples of the two-type configuration, one JSON line each.
    Scan {
        #[arg(long)]
        qmin: u64,
        #[arg(long)]
        qmax: u64,
        /// Also scan k = √q for square q.
        #[arg(long)]
        all_k: bool,
    },
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn domain(kind: &'static str, e: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            kind,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn pg(q: u64) -> Result<Plane, Failure> {
    let f = FieldSpec::of_order(q).map_err(|e| Failure::domain("field", e))?;
    build_pg2q(&f).map_err(|e| Failure::domain("plane", e))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::domain("io", format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::domain("io", format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Plane, Failure> {
    let bytes = read(path)?;
    load_plane(&bytes, &path.display().to_string()).map_err(|e| Failure::domain("plane", e))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::domain("io", e))
}

fn solver_failure(e: SolverError) -> Failure {
    let kind = match e {
        SolverError::InvalidPlane => "invalid_plane",
        SolverError::TooLarge { .. } => "too_large",
        SolverError::BadParameter(_) => "bad_parameter",
        SolverError::BudgetExhausted(_) => "budget_exhausted",
    };
    Failure::domain(kind, e)
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Build { q, out: file } => {
            let text = pg(q)?.to_json();
            match file {
                Some(path) => write_file(&path, &text)?,
                None => emit(out, &text)?,
            }
            Ok(0)
        }
        Command::Validate { plane } => {
            let p = load(&plane)?;
            let report = p.validate_axioms();
            emit(out, &pretty(&report))?;
            Ok(if report.is_valid() { 0 } else { 2 })
        }
        Command::Construct { family, q, t, out: file } => {
            let p = pg(q)?;
            let c = build_family(&p, &family, t).map_err(|e| Failure::domain("construction", e))?;
            let summary = json!({
                "family": c.name,
                "q": q,
                "expected_size": c.expected_size,
                "expected": c.expected,
            })
            .to_string();
            let cand = c.candidate.to_json();
            match file {
                Some(path) => {
                    write_file(&path, &cand)?;
                    emit(out, &summary)?;
                }
                None => {
                    emit(out, &cand)?;
                    emit(err, &summary)?;
                }
            }
            Ok(0)
        }
        Command::Analyze { plane, q, set } => {
            let p = match (plane, q) {
                (Some(path), _) => load(&path)?,
                (None, Some(q)) => pg(q)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            let report = p.validate_axioms();
            if !report.is_valid() {
                return Err(Failure::domain(
                    "invalid_plane",
                    format!("{} axiom violations", report.violations.len()),
                ));
            }
            let cand =
                Candidate::from_json(&read(&set)?).map_err(|e| Failure::domain("candidate", e))?;
            cand.check(&p).map_err(|e| Failure::domain("candidate", e))?;
            emit(out, &analyze(&p, &cand).to_json())?;
            Ok(0)
        }
        Command::Gamma {
            q,
            budget_seconds,
            analytic,
        } => {
            let p = pg(q)?;
            let opts = SearchOptions {
                budget: budget_seconds.map(Duration::from_secs),
                analytic_pruning: analytic,
                ..Default::default()
            };
            match min_dominating_with(&p, &opts) {
                Ok(r) => {
                    let doc = json!({
                        "q": q,
                        "optimum": r.optimum,
                        "proof": r.proof,
                        "nodes_expanded": r.nodes_expanded,
                        "witness": r.witness,
                    });
                    emit(out, &pretty(&doc))?;
                    Ok(0)
                }
                Err(SolverError::BudgetExhausted(part)) => {
                    let doc = json!({
                        "q": q,
                        "status": "budget_exhausted",
                        "lower": part.lower.max(part.analytic_lower),
                        "search_lower": part.lower,
                        "analytic_lower": part.analytic_lower,
                        "upper": part.upper,
                        "bound_met": part.bound_met(),
                        "nodes_expanded": part.nodes_expanded,
                        "witness": part.witness,
                    });
                    emit(out, &pretty(&doc))?;
                    Ok(3)
                }
                Err(e) => Err(solver_failure(e)),
            }
        }
        Command::MinBlocking { q, nontrivial } => {
            let p = pg(q)?;
            let r = min_blocking(&p, nontrivial).map_err(solver_failure)?;
            let doc = match r {
                Some(r) => json!({
                    "q": q,
                    "nontrivial": nontrivial,
                    "optimum": r.optimum,
                    "witness": r.witness,
                    "spectrum": secant_spectrum(&p, &r.witness.points),
                    "nodes_expanded": r.nodes_expanded,
                }),
                None => json!({
                    "q": q,
                    "nontrivial": nontrivial,
                    "optimum": null,
                }),
            };
            emit(out, &pretty(&doc))?;
            Ok(0)
        }
        Command::EnumerateMinimal { q, max_size } => {
            let p = pg(q)?;
            let sets = enumerate_minimal_dominating(&p, max_size).map_err(solver_failure)?;
            let items: Vec<_> = sets
                .iter()
                .map(|c| {
                    let label = classify(&p, c).map(|l| l.label()).unwrap_or("unclassified");
                    json!({ "set": c, "classification": label })
                })
                .collect();
            let doc = json!({
                "q": q,
                "max_size": max_size,
                "count": items.len(),
                "sets": items,
            });
            emit(out, &pretty(&doc))?;
            Ok(0)
        }
        Command::Scan { qmin, qmax, all_k } => {
            let recs = scan(qmin, qmax, all_k).map_err(|e| Failure::domain("scan", e))?;
            for r in recs {
                emit(out, &serde_json::to_string(&r).expect("record serializes"))?;
            }
            Ok(0)
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let msg = e.render().to_string();
                    let line = json!({ "error": "usage", "message": msg.trim() });
                    let _ = writeln!(err, "{line}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let line = json!({ "error": f.kind, "message": f.message });
            let _ = writeln!(err, "{line}");
            f.code
        }
    }
}
