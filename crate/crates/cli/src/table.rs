//! Batch classification tables over parameter grids.

use std::fmt;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use torusclass::classify::{rigidity_class_in, ClassifyError, RigidityClass, RigidityClause};
use torusclass::invariants::report;
use torusclass::{Family, ManifoldDescriptor};

/// Inclusive integer range written `a..b` (or a single `a`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let int = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad bound {t:?}: {e}"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (int(a)?, int(b.strip_prefix('=').unwrap_or(b))?),
            None => (int(s)?, int(s)?),
        };
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(IntRange { lo, hi })
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyFilter {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Debug, Args)]
pub struct TableSpec {
    /// Base dimension range, e.g. 1..3
    #[arg(long = "l", allow_hyphen_values = true)]
    pub ell: IntRange,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: IntRange,
    #[arg(long, allow_hyphen_values = true)]
    pub k1: IntRange,
    #[arg(long, allow_hyphen_values = true)]
    pub k2: IntRange,
    /// Restrict to one family (default: both)
    #[arg(long, value_enum, ignore_case = true)]
    pub family: Option<FamilyFilter>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub descriptor: ManifoldDescriptor,
    pub dimension: u32,
    pub cohomology: String,
    pub pontrjagin: String,
    pub stiefel_whitney: String,
    pub rigidity: RigidityClass,
    pub clause: &'static str,
}

impl TableSpec {
    /// Valid descriptors in the grid, in lexicographic parameter order.
    pub fn descriptors(&self) -> Vec<ManifoldDescriptor> {
        let families: &[Family] = match self.family {
            Some(FamilyFilter::A) => &[Family::A],
            Some(FamilyFilter::B) => &[Family::B],
            None => &[Family::A, Family::B],
        };
        let mut out = Vec::new();
        for &family in families {
            for ell in self.ell.lo..=self.ell.hi {
                for rho in self.rho.lo..=self.rho.hi {
                    for k1 in self.k1.lo..=self.k1.hi {
                        for k2 in self.k2.lo..=self.k2.hi {
                            if let Ok(d) = ManifoldDescriptor::new(family, ell, rho, k1, k2) {
                                out.push(d);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn row(d: &ManifoldDescriptor, clauses: &[RigidityClause]) -> Result<TableRow, ClassifyError> {
    let m = rigidity_class_in(d, clauses)?;
    let r = report(d);
    Ok(TableRow {
        descriptor: *d,
        dimension: r.dimension,
        cohomology: r.cohomology.to_string(),
        pontrjagin: r.pontrjagin.to_string(),
        stiefel_whitney: r.stiefel_whitney.to_string(),
        rigidity: m.class,
        clause: m.clause,
    })
}

/// Rows are computed in parallel; `collect` keeps the input order.
pub fn run_table(
    spec: &TableSpec,
    clauses: &[RigidityClause],
) -> Result<Vec<TableRow>, ClassifyError> {
    spec.descriptors()
        .par_iter()
        .map(|d| row(d, clauses))
        .collect()
}

pub fn render(rows: &[TableRow], format: Format) -> serde_json::Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(rows).map(|s| s + "\n"),
        Format::Tsv => {
            let mut out = String::from("descriptor\tdimension\tcohomology\tpontrjagin\tstiefel_whitney\trigidity\tclause\n");
            for r in rows {
                out += &format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.descriptor,
                    r.dimension,
                    r.cohomology,
                    r.pontrjagin,
                    r.stiefel_whitney,
                    r.rigidity,
                    r.clause
                );
            }
            Ok(out)
        }
    }
}
