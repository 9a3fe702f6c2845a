use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use torusclass::classify::{
    compare_report, rigidity_class_in, ClassifyError, RigidityClass, RigidityClause,
    RIGIDITY_CLAUSES,
};
use torusclass::davisjan::{dj_characteristic_classes, CharMatrix};
use torusclass::invariants::{cohomology, report};
use torusclass::isosearch::{default_bound, find_iso, SearchConfig, SearchMode, SearchOutcome};
use torusclass::{parse_descriptor, ManifoldDescriptor};

mod table;

const BOUND_VAR: &str = "TORUSCLASS_ORACLE_BOUND";
/// Test hook: `partition` appends a clause overlapping every other one.
const FAULT_VAR: &str = "TORUSCLASS_FAULT";

#[derive(Parser)]
#[command(
    name = "torusclass",
    version,
    about = "Cohomology, characteristic classes and diffeomorphism classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cohomology ring, Pontrjagin class and Stiefel-Whitney class of a manifold
    Invariants {
        #[arg(value_parser = descriptor, allow_hyphen_values = true)]
        descriptor: ManifoldDescriptor,
    },
    /// Diffeomorphism verdict plus ring and characteristic-class evidence
    Compare {
        #[arg(value_parser = descriptor, allow_hyphen_values = true)]
        first: ManifoldDescriptor,
        #[arg(value_parser = descriptor, allow_hyphen_values = true)]
        second: ManifoldDescriptor,
    },
    /// Rigidity class and the clause that assigns it
    Rigidity {
        #[arg(value_parser = descriptor, allow_hyphen_values = true)]
        descriptor: ManifoldDescriptor,
    },
    /// Cohomology and characteristic classes from a characteristic matrix (JSON file)
    Dj {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Search for a graded ring isomorphism between two cohomology rings
    OracleIso {
        #[arg(value_parser = descriptor, allow_hyphen_values = true)]
        first: ManifoldDescriptor,
        #[arg(value_parser = descriptor, allow_hyphen_values = true)]
        second: ManifoldDescriptor,
        /// Coefficient window for enumeration (default: from the descriptors, or $TORUSCLASS_ORACLE_BOUND)
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
    /// Classification table over a parameter grid
    Table(table::TableSpec),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Enum,
}

fn descriptor(s: &str) -> Result<ManifoldDescriptor, String> {
    parse_descriptor(s).map_err(|e| e.to_string())
}

/// A contradiction inside the classifier; exits with status 2.
#[derive(Debug)]
struct Inconsistency(String);

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal consistency failure: {}", self.0)
    }
}

impl std::error::Error for Inconsistency {}

fn classify_error(e: ClassifyError) -> anyhow::Error {
    match e {
        ClassifyError::Partition { .. } | ClassifyError::Inconsistent(..) => {
            Inconsistency(e.to_string()).into()
        }
        other => other.into(),
    }
}

fn clauses() -> Vec<RigidityClause> {
    let mut out: Vec<RigidityClause> = RIGIDITY_CLAUSES.into_iter().collect();
    if std::env::var(FAULT_VAR).as_deref() == Ok("partition") {
        out.push(RigidityClause {
            class: RigidityClass::R1,
            text: "injected fault",
            test: |_| true,
        });
    }
    out
}

fn oracle_bound(
    flag: Option<u64>,
    d1: &ManifoldDescriptor,
    d2: &ManifoldDescriptor,
) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BOUND_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{BOUND_VAR}={v:?} is not a non-negative integer")),
        Err(_) => Ok(default_bound(d1, d2)),
    }
}

fn run(cli: Cli) -> Result<String> {
    let value: Value = match cli.command {
        Command::Invariants { descriptor } => serde_json::to_value(report(&descriptor).to_json())?,
        Command::Compare { first, second } => {
            serde_json::to_value(compare_report(&first, &second).map_err(classify_error)?)?
        }
        Command::Rigidity { descriptor } => {
            let m = rigidity_class_in(&descriptor, &clauses()).map_err(classify_error)?;
            json!({ "descriptor": descriptor, "class": m.class, "clause": m.clause })
        }
        Command::Dj { matrix } => {
            let text = std::fs::read_to_string(&matrix)
                .with_context(|| format!("reading {}", matrix.display()))?;
            let m: CharMatrix = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", matrix.display()))?;
            let c = dj_characteristic_classes(&m)?;
            let survivors: Vec<String> = c
                .elimination
                .survivors
                .iter()
                .map(|i| format!("v{}", i + 1))
                .collect();
            json!({
                "blocks": m.blocks().sizes(),
                "survivors": survivors,
                "cohomology": c.elimination.presentation.to_json(),
                "presentation": c.elimination.presentation.to_string(),
                "pontrjagin": c.pontrjagin.to_string(),
                "stiefel_whitney": c.stiefel_whitney.to_string(),
            })
        }
        Command::OracleIso {
            first,
            second,
            bound,
            mode,
        } => {
            let bound = oracle_bound(bound, &first, &second)?;
            let search_mode = match mode {
                Mode::Exact => SearchMode::Exact,
                Mode::Enum => SearchMode::Enumerate,
            };
            let cfg = SearchConfig::new(bound, search_mode)?;
            let outcome = find_iso(&cohomology(&first), &cohomology(&second), &cfg)?;
            let (name, witness) = match &outcome {
                SearchOutcome::Found(w) => ("Found", Some(w)),
                SearchOutcome::NotIsomorphic => ("NotIsomorphic", None),
                SearchOutcome::NotFoundWithinBound(_) => ("NotFoundWithinBound", None),
            };
            json!({
                "first": first,
                "second": second,
                "mode": match mode { Mode::Exact => "exact", Mode::Enum => "enum" },
                "bound": bound,
                "outcome": name,
                "witness": witness.map(ToString::to_string),
            })
        }
        Command::Table(spec) => {
            let rows = table::run_table(&spec, &clauses()).map_err(classify_error)?;
            return Ok(table::render(&rows, spec.format)?);
        }
    };
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Inconsistency>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
