//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//! Run with `cargo test -p torusclass --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use torusclass::classify::{
    bott_equivalent, cohomology_isomorphic, compare_report, diffeomorphic, rigidity_class,
    CompareReport, DiffeoOutcome, RigidityClass,
};
use torusclass::davisjan::{char_matrix_for, dj_characteristic_classes};
use torusclass::invariants::{cohomology, pontrjagin, stiefel_whitney};
use torusclass::isosearch::{find_iso, verify_iso, SearchConfig, SearchMode, SearchOutcome};
use torusclass::{Family, ManifoldDescriptor};

use common::{both, grid, same_dimension_pairs, SUITES};

const C1_BUDGET: Duration = Duration::from_secs(10);
const C3_BUDGET: Duration = Duration::from_secs(5);
const C5_MAX_INDETERMINATE: f64 = 0.01;
const C8_BUDGET: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn b(l: i64, r: i64, k1: i64, k2: i64) -> ManifoldDescriptor {
    ManifoldDescriptor::b(l, r, k1, k2).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ds: Vec<_> = grid(3, 6, 3, &[Family::A])
        .into_iter()
        .filter(|d| d.k1() <= 3 && d.k2() <= 3)
        .collect();
    let bad: Vec<String> = ds
        .par_iter()
        .filter_map(|d| {
            let dj = char_matrix_for(d).and_then(|m| dj_characteristic_classes(&m));
            match dj {
                Ok(c)
                    if c.elimination.presentation == cohomology(d)
                        && c.pontrjagin == pontrjagin(d)
                        && c.stiefel_whitney == stiefel_whitney(d) =>
                {
                    None
                }
                Ok(_) => Some(format!("{d}: mismatch")),
                Err(e) => Some(format!("{d}: {e}")),
            }
        })
        .collect();
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && elapsed < C1_BUDGET,
        format!(
            "{} descriptors, {} mismatches {:?}, {:.2?}",
            ds.len(),
            bad.len(),
            bad.first(),
            elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let corpus = [b(3, 2, 1, 3), b(3, 1, 4, 0), b(3, 2, 4, 0)];
    let mut problems = Vec::new();
    for d in &corpus {
        for e in &corpus {
            let (p1, p2) = (cohomology(d), cohomology(e));
            for mode in [SearchMode::Exact, SearchMode::Enumerate] {
                let cfg = SearchConfig::default_for(d, e).with_mode(mode);
                match find_iso(&p1, &p2, &cfg) {
                    Ok(SearchOutcome::Found(w)) if verify_iso(&w, &p1, &p2) => {}
                    other => problems.push(format!("{d} vs {e} ({mode:?}): {other:?}")),
                }
            }
            if !cohomology_isomorphic(d, e) {
                problems.push(format!("{d} vs {e}: closed form says not isomorphic"));
            }
        }
    }
    let p1: Vec<String> = corpus
        .iter()
        .map(|d| pontrjagin(d).poly().graded_component(4).to_string())
        .collect();
    if p1 != ["8*x^2", "8*x^2", "20*x^2"] {
        problems.push(format!("p1 values {p1:?}"));
    }
    let verdicts = [
        diffeomorphic(&corpus[0], &corpus[1]).outcome,
        diffeomorphic(&corpus[0], &corpus[2]).outcome,
        diffeomorphic(&corpus[1], &corpus[2]).outcome,
    ];
    use DiffeoOutcome::*;
    if verdicts != [Diffeomorphic, NotDiffeomorphic, NotDiffeomorphic] {
        problems.push(format!("verdicts {verdicts:?}"));
    }
    outcome(
        problems.is_empty(),
        format!(
            "p1 = {}; verdicts {verdicts:?}; {problems:?}",
            p1.join(", ")
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let ds = grid(6, 5, 4, &both());
    let bad: Vec<String> = ds
        .iter()
        .filter_map(|d| rigidity_class(d).err().map(|e| e.to_string()))
        .collect();
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && elapsed < C3_BUDGET,
        format!(
            "{} descriptors, {} outside the partition {:?}, {:.2?}",
            ds.len(),
            bad.len(),
            bad.first(),
            elapsed
        ),
    )
}

/// Compare reports for every same-dimension pair of the rigidity grid.
fn rigidity_reports() -> Vec<Result<CompareReport, String>> {
    let pairs = same_dimension_pairs(&grid(4, 4, 3, &both()));
    pairs
        .par_iter()
        .map(|(d, e)| compare_report(d, e).map_err(|err| err.to_string()))
        .collect()
}

fn criterion_4(reports: &[Result<CompareReport, String>]) -> Outcome {
    let mut problems: Vec<String> = reports
        .iter()
        .filter_map(|r| r.as_ref().err().cloned())
        .collect();
    let ok: Vec<&CompareReport> = reports.iter().filter_map(|r| r.as_ref().ok()).collect();
    let has = |r: &CompareReport, c| r.rigidity.iter().any(|m| m.class == c);
    let diffeo = |r: &CompareReport| r.verdict.is_diffeomorphic();

    // (a) R1: ring isomorphism already decides
    let r1_bad: Vec<_> = ok
        .iter()
        .filter(|r| has(r, RigidityClass::R1) && r.ring_isomorphic && !diffeo(r))
        .collect();
    problems.extend(
        r1_bad
            .iter()
            .map(|r| format!("R1 {} ~ring {} but not diffeomorphic", r.first, r.second)),
    );

    // (b) R2: ring iso is not enough, ring iso preserving p is
    let r2 = |r: &&&CompareReport| has(r, RigidityClass::R2);
    let r2_witnesses = ok
        .iter()
        .filter(r2)
        .filter(|r| r.ring_isomorphic && !diffeo(r))
        .count();
    if r2_witnesses == 0 {
        problems.push("no R2 pair is ring-isomorphic without being diffeomorphic".into());
    }
    let r2_bad: Vec<_> = ok
        .iter()
        .filter(r2)
        .filter(|r| r.p_preservable == Some(true) && !diffeo(r))
        .collect();
    problems.extend(r2_bad.iter().map(|r| {
        format!(
            "R2 {} vs {}: p-preserving iso but not diffeomorphic",
            r.first, r.second
        )
    }));

    // (c) R3: p is not enough, w separates
    let r3 = |r: &&&CompareReport| has(r, RigidityClass::R3);
    let r3_witnesses: Vec<_> = ok
        .iter()
        .filter(r3)
        .filter(|r| r.p_preservable == Some(true) && !diffeo(r) && r.w_preservable == Some(false))
        .collect();
    if r3_witnesses.is_empty() {
        problems.push("no R3 pair is separated by w alone".into());
    }
    let r3_bad = ok
        .iter()
        .filter(r3)
        .filter(|r| r.p_preservable == Some(true) && r.w_preservable == Some(true) && !diffeo(r));
    problems.extend(r3_bad.map(|r| {
        format!(
            "R3 {} vs {}: p and w preserved but not diffeomorphic",
            r.first, r.second
        )
    }));
    let named = compare_report(&b(1, 1, 1, 1), &b(1, 0, 1, 1)).map_err(|e| e.to_string());
    match &named {
        Ok(r)
            if r.ring_isomorphic
                && r.p_preservable == Some(true)
                && r.w_preservable == Some(false)
                && !diffeo(r) => {}
        other => problems.push(format!("B(1,1,1,1) vs B(1,0,1,1): {other:?}")),
    }
    let undecided = ok
        .iter()
        .filter(|r| r.p_indeterminate || r.w_indeterminate)
        .count();
    outcome(
        problems.is_empty(),
        format!(
            "{} pairs, {} R2 witnesses, {} R3 witnesses, {} undecided preservation; {} problems {:?}",
            reports.len(),
            r2_witnesses,
            r3_witnesses.len(),
            undecided,
            problems.len(),
            problems.first()
        ),
    )
}

fn criterion_5() -> Outcome {
    let pairs = same_dimension_pairs(&grid(4, 4, 3, &both()));
    // Some(true|false) = agreement, None = oracle indeterminate
    let results: Vec<(String, Option<bool>)> = pairs
        .par_iter()
        .map(|(d, e)| {
            let cfg = SearchConfig::default_for(d, e).with_mode(SearchMode::Exact);
            let oracle = match find_iso(&cohomology(d), &cohomology(e), &cfg) {
                Ok(SearchOutcome::Found(_)) => Some(true),
                Ok(SearchOutcome::NotIsomorphic) => Some(false),
                _ => None,
            };
            (
                format!("{d} vs {e}"),
                oracle.map(|o| o == cohomology_isomorphic(d, e)),
            )
        })
        .collect();
    let disagreements: Vec<&String> = results
        .iter()
        .filter(|(_, r)| *r == Some(false))
        .map(|(p, _)| p)
        .collect();
    let indeterminate = results.iter().filter(|(_, r)| r.is_none()).count();
    let share = indeterminate as f64 / results.len() as f64;
    outcome(
        disagreements.is_empty() && share < C5_MAX_INDETERMINATE,
        format!(
            "{} pairs, {} disagreements {:?}, {} indeterminate ({:.2}%)",
            results.len(),
            disagreements.len(),
            disagreements.first(),
            indeterminate,
            100.0 * share
        ),
    )
}

/// The `l = 1` grid of the congruence check, as pairs with equal fibre sum.
fn bott_pairs() -> Vec<(ManifoldDescriptor, ManifoldDescriptor)> {
    let ds: Vec<_> = grid(1, 4, 6, &[Family::A])
        .into_iter()
        .filter(|d| d.k1() <= 3)
        .collect();
    let mut out = Vec::new();
    for d in &ds {
        for e in &ds {
            if d.fiber_sum() == e.fiber_sum() {
                out.push((*d, *e));
            }
        }
    }
    out
}

fn congruent(d: &ManifoldDescriptor, e: &ManifoldDescriptor, modulus: i64) -> bool {
    let (x, y) = (d.rho() * i64::from(d.k1()), e.rho() * i64::from(e.k1()));
    (x - y).rem_euclid(modulus) == 0 || (x + y).rem_euclid(modulus) == 0
}

/// Checks the congruence with modulus `k1 + k2 + shift`.
fn bott_congruence(shift: i64) -> (usize, usize, Option<String>) {
    let pairs = bott_pairs();
    let bad: Vec<String> = pairs
        .iter()
        .filter(|(d, e)| {
            let m = i64::from(d.fiber_sum()) + shift;
            bott_equivalent(d, e).unwrap().is_some() != congruent(d, e, m)
        })
        .map(|(d, e)| format!("{d} vs {e}"))
        .collect();
    (pairs.len(), bad.len(), bad.into_iter().next())
}

fn criterion_6() -> Outcome {
    let (n, bad, first) = bott_congruence(1);
    outcome(
        bad == 0,
        format!("modulus k1+k2+1: {n} pairs, {bad} mismatches, first {first:?}"),
    )
}

/// Evidence for the congruence modulus: the same grid against `k1 + k2`, and
/// `bott_equivalent` against the ring oracle.
fn criterion_6_diagnostics() -> Vec<String> {
    let (n, bad, first) = bott_congruence(0);
    let oracle_bad = bott_pairs()
        .par_iter()
        .filter(|(d, e)| {
            let found = find_iso(
                &cohomology(d),
                &cohomology(e),
                &SearchConfig::default_for(d, e),
            )
            .unwrap()
            .is_found();
            found != bott_equivalent(d, e).unwrap().is_some()
        })
        .count();
    let plus_one_vs_oracle = bott_pairs()
        .par_iter()
        .filter(|(d, e)| {
            let found = find_iso(
                &cohomology(d),
                &cohomology(e),
                &SearchConfig::default_for(d, e),
            )
            .unwrap()
            .is_found();
            found != congruent(d, e, i64::from(d.fiber_sum()) + 1)
        })
        .count();
    vec![
        format!("modulus k1+k2: {n} pairs, {bad} mismatches, first {first:?}"),
        format!("bott_equivalent vs ring oracle: {oracle_bad} disagreements"),
        format!("modulus k1+k2+1 vs ring oracle: {plus_one_vs_oracle} disagreements"),
    ]
}

/// `prod (1 + c_i x)^{n_i}` in `Z[x]/x^(l+1)`, coefficients only.
fn series(factors: &[(i64, u32)], ell: usize) -> Vec<i64> {
    let mut out = vec![0i64; ell + 1];
    out[0] = 1;
    for &(c, n) in factors {
        for _ in 0..n {
            for j in (1..=ell).rev() {
                out[j] += c * out[j - 1];
            }
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let ds = grid(1, 5, 5, &[Family::B]);
    let mut bad = Vec::new();
    for d in &ds {
        let (rho, k1) = (d.rho(), d.k1());
        // p has only even-degree factors (1 + x^2)^2 (1 + rho^2 x^2)^k1; with x^2 = 0 only 1 survives
        let p_series = series(&[(1, 2), (rho * rho, k1)], 1);
        let w_series = series(&[(1, 2), (rho, k1)], 1);
        let p_expected = if p_series[0] == 1 {
            "1".to_string()
        } else {
            String::new()
        };
        let w_expected = if w_series[1].rem_euclid(2) == 1 {
            "1 + x"
        } else {
            "1"
        };
        let closed_w = if (i64::from(k1) * rho).rem_euclid(2) == 1 {
            "1 + x"
        } else {
            "1"
        };
        let (p, w) = (pontrjagin(d).to_string(), stiefel_whitney(d).to_string());
        if p != p_expected || w != w_expected || w != closed_w {
            bad.push(format!("{d}: p = {p}, w = {w}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} descriptors, {} mismatches {:?}",
            ds.len(),
            bad.len(),
            bad.first()
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let failures: Vec<String> = SUITES
        .iter()
        .filter_map(|(name, run)| run().err().map(|e| format!("{name}: {e}")))
        .collect();
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < C8_BUDGET,
        format!(
            "{} suites, {} failing {:?}, {:.2?}",
            SUITES.len(),
            failures.len(),
            failures.first(),
            elapsed
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let reports = rigidity_reports();
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(&reports),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        println!(
            "criterion {}: {} - {}",
            i + 1,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
        if i == 5 {
            for line in criterion_6_diagnostics() {
                println!("    {line}");
            }
        }
        failed += usize::from(!r.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.2?}",
        results.len() - failed,
        results.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
