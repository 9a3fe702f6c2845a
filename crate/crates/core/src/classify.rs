//! Diffeomorphism, cohomology and rigidity decisions for the `A`/`B` family.
//!
//! Everything here is closed-form arithmetic on the parameters; the ring
//! oracle in [`crate::isosearch`] is consulted only by [`compare_report`], and
//! only to report class preservation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::descriptor::{Family, ManifoldDescriptor};
use crate::invariants::{cohomology, dimension, pontrjagin, stiefel_whitney};
use crate::isosearch::{find_all_isos, IsoError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("{descriptor} is not in family {expected}")]
    WrongFamily {
        descriptor: ManifoldDescriptor,
        expected: Family,
    },
    #[error("{descriptor} matches {} rigidity clauses ({}), expected exactly one", matched.len(), matched.join("; "))]
    Partition {
        descriptor: ManifoldDescriptor,
        matched: Vec<&'static str>,
    },
    #[error("inconsistent comparison of {0} and {1}: {2}")]
    Inconsistent(ManifoldDescriptor, ManifoldDescriptor, String),
}

/// `B(l,rho,1,0)` is the projectivization `A(l,rho,1,1)`; everything else is
/// left alone.
pub fn normalize(d: &ManifoldDescriptor) -> ManifoldDescriptor {
    if d.family() == Family::B && d.k1() == 1 && d.k2() == 0 {
        ManifoldDescriptor::a(d.ell().into(), d.rho(), 1, 1).expect("valid A parameters")
    } else {
        *d
    }
}

fn require(d: &ManifoldDescriptor, family: Family) -> Result<(), ClassifyError> {
    if d.family() != family {
        return Err(ClassifyError::WrongFamily {
            descriptor: *d,
            expected: family,
        });
    }
    Ok(())
}

/// Whether `A(l,rho,k1,k2)` is diffeomorphic to `CP^l x CP^(k1+k2-1)`:
/// `rho = 0` for `l > 1`, `rho k1 = 0 mod (k1+k2)` for `l = 1`.
pub fn bott_decomposable(d: &ManifoldDescriptor) -> Result<bool, ClassifyError> {
    require(d, Family::A)?;
    Ok(if d.ell() > 1 {
        d.rho() == 0
    } else {
        (i128::from(d.rho()) * i128::from(d.k1())).rem_euclid(i128::from(d.fiber_sum())) == 0
    })
}

/// Sign and line-bundle twist relating two projectivizations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BottTwist {
    pub epsilon: i8,
    pub r: i64,
}

/// `(1 + c x)^n mod x^(l+1)`.
fn linear_power(c: i64, n: u32, ell: u32) -> Vec<BigInt> {
    (0..=ell.min(n))
        .map(|j| {
            BigInt::from(binomial(u64::from(n), u64::from(j)))
                * num_traits::pow(BigInt::from(c), j as usize)
        })
        .chain(std::iter::repeat(BigInt::zero()))
        .take(ell as usize + 1)
        .collect()
}

fn truncated_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len()];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate().take(a.len() - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Twist `(epsilon, r)` with
/// `(1 + eps r x)^k2 (1 + eps (rho + r) x)^k1 = (1 + rho' x)^k1'` in
/// `Z[x]/x^(l+1)`, i.e. total Chern classes of `eps (E ⊗ L^r)` and `E'` for
/// `E = C_rho^k1 + C^k2`. Requires `l = l'` and `k1+k2 = k1'+k2'`.
///
/// The linear coefficient forces `r (k1+k2) + rho k1 = eps rho' k1'`, so each
/// sign has at most one candidate, which is then checked in full.
pub fn bott_equivalent(
    d: &ManifoldDescriptor,
    e: &ManifoldDescriptor,
) -> Result<Option<BottTwist>, ClassifyError> {
    require(d, Family::A)?;
    require(e, Family::A)?;
    if d.ell() != e.ell() || d.fiber_sum() != e.fiber_sum() {
        return Ok(None);
    }
    let ell = d.ell();
    let sum = i128::from(d.fiber_sum());
    let rhs = linear_power(e.rho(), e.k1(), ell);
    for epsilon in [1i8, -1] {
        let num = i128::from(epsilon) * i128::from(e.rho()) * i128::from(e.k1())
            - i128::from(d.rho()) * i128::from(d.k1());
        if num % sum != 0 {
            continue;
        }
        let Ok(r) = i64::try_from(num / sum) else {
            continue;
        };
        let eps = i64::from(epsilon);
        let lhs = truncated_mul(
            &linear_power(eps * r, d.k2(), ell),
            &linear_power(eps * (d.rho() + r), d.k1(), ell),
        );
        if lhs == rhs {
            return Ok(Some(BottTwist { epsilon, r }));
        }
    }
    Ok(None)
}

/// Sphere bundles `B` with `k1 + k2 >= 2` over the same `CP^l`:
///
/// * `l >= 4`: `rho = rho' = 0` with equal `k1+k2`, or `rho = ±rho' != 0` with equal `(k1, k2)`;
/// * `l = 2, 3`: equal `k1+k2` and `k1 rho^2 = k1' rho'^2`;
/// * `l = 1`: equal `k1+k2` and the same parity of `k1 rho`.
pub fn sphere_equivalent(
    d: &ManifoldDescriptor,
    e: &ManifoldDescriptor,
) -> Result<bool, ClassifyError> {
    require(d, Family::B)?;
    require(e, Family::B)?;
    if d.ell() != e.ell() || d.fiber_sum() != e.fiber_sum() {
        return Ok(false);
    }
    let sq =
        |d: &ManifoldDescriptor| i128::from(d.k1()) * i128::from(d.rho()) * i128::from(d.rho());
    Ok(match d.ell() {
        1 => {
            (i128::from(d.k1()) * i128::from(d.rho()) - i128::from(e.k1()) * i128::from(e.rho()))
                .rem_euclid(2)
                == 0
        }
        2 | 3 => sq(d) == sq(e),
        _ => {
            (d.rho() == 0 && e.rho() == 0)
                || (d.rho() != 0
                    && d.rho().abs() == e.rho().abs()
                    && d.k1() == e.k1()
                    && d.k2() == e.k2())
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiffeoOutcome {
    Diffeomorphic,
    NotDiffeomorphic,
    DimensionMismatch,
}

impl fmt::Display for DiffeoOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffeoVerdict {
    pub outcome: DiffeoOutcome,
    /// The criterion that decided the verdict.
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twist: Option<BottTwist>,
}

impl DiffeoVerdict {
    fn new(diffeo: bool, reason: impl Into<String>) -> Self {
        let outcome = if diffeo {
            DiffeoOutcome::Diffeomorphic
        } else {
            DiffeoOutcome::NotDiffeomorphic
        };
        DiffeoVerdict {
            outcome,
            reason: reason.into(),
            twist: None,
        }
    }

    pub fn is_diffeomorphic(&self) -> bool {
        self.outcome == DiffeoOutcome::Diffeomorphic
    }
}

pub fn diffeomorphic(d1: &ManifoldDescriptor, d2: &ManifoldDescriptor) -> DiffeoVerdict {
    let (n1, n2) = (dimension(d1), dimension(d2));
    if n1 != n2 {
        return DiffeoVerdict {
            outcome: DiffeoOutcome::DimensionMismatch,
            reason: format!("dimensions differ ({n1} vs {n2})"),
            twist: None,
        };
    }
    let (a, b) = (normalize(d1), normalize(d2));
    match (a.family(), b.family()) {
        (Family::A, Family::A) => {
            let (da, db) = (
                bott_decomposable(&a).unwrap(),
                bott_decomposable(&b).unwrap(),
            );
            match (da, db) {
                (true, true) => {
                    let mut fa = [a.ell(), a.fiber_sum() - 1];
                    let mut fb = [b.ell(), b.fiber_sum() - 1];
                    fa.sort_unstable();
                    fb.sort_unstable();
                    DiffeoVerdict::new(
                        fa == fb,
                        format!(
                            "both decomposable: CP^{} x CP^{} vs CP^{} x CP^{}",
                            fa[0], fa[1], fb[0], fb[1]
                        ),
                    )
                }
                (true, false) | (false, true) => {
                    DiffeoVerdict::new(false, "exactly one projectivization is decomposable")
                }
                (false, false) => match bott_equivalent(&a, &b).unwrap() {
                    Some(twist) => DiffeoVerdict {
                        twist: Some(twist),
                        ..DiffeoVerdict::new(
                            true,
                            "projectivizations related by a line-bundle twist and sign",
                        )
                    },
                    None if a.ell() != b.ell() || a.fiber_sum() != b.fiber_sum() => {
                        DiffeoVerdict::new(
                            false,
                            "indecomposable projectivizations with different base or fibre",
                        )
                    }
                    None => DiffeoVerdict::new(
                        false,
                        "no line-bundle twist matches the total Chern classes",
                    ),
                },
            }
        }
        (Family::B, Family::B) => {
            let criterion = match a.ell() {
                1 => "sphere bundles over CP^1: k1+k2 and parity of k1*rho",
                2 | 3 => "sphere bundles over CP^2, CP^3: k1+k2 and k1*rho^2",
                _ => "sphere bundles over CP^l, l >= 4: rho = rho' = 0 or rho = ±rho' with equal k1, k2",
            };
            let same = sphere_equivalent(&a, &b).unwrap();
            if a.ell() != b.ell() {
                DiffeoVerdict::new(
                    false,
                    "sphere bundles over projective spaces of different dimension",
                )
            } else {
                DiffeoVerdict::new(same, criterion)
            }
        }
        _ => DiffeoVerdict::new(
            false,
            "projectivization vs sphere bundle: degree-2 cohomology has rank 2 vs 1",
        ),
    }
}

/// `H*(B) = H*(CP^l x S^(2k1+2k2))`.
pub fn in_product_class(d: &ManifoldDescriptor) -> bool {
    let (ell, rho, k1) = (i64::from(d.ell()), d.rho(), i64::from(d.k1()));
    rho == 0 || d.k2() > 0 || k1 > ell || (rho % 2 == 0 && k1 <= ell && ell < 2 * k1)
}

pub fn cohomology_isomorphic(d1: &ManifoldDescriptor, d2: &ManifoldDescriptor) -> bool {
    let (a, b) = (normalize(d1), normalize(d2));
    match (a.family(), b.family()) {
        (Family::A, Family::A) => diffeomorphic(&a, &b).is_diffeomorphic(),
        (Family::B, Family::B) => {
            if a.ell() != b.ell() || a.fiber_sum() != b.fiber_sum() {
                return false;
            }
            if a.ell() == 1 {
                return true;
            }
            match (in_product_class(&a), in_product_class(&b)) {
                (true, true) => true,
                (false, false) => {
                    2 * a.k1() > a.ell() || (a.rho().abs() == b.rho().abs() && a.k1() == b.k1())
                }
                _ => false,
            }
        }
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RigidityClass {
    R1,
    R2,
    R3,
}

impl fmt::Display for RigidityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub struct RigidityClause {
    pub class: RigidityClass,
    pub text: &'static str,
    pub test: fn(&ManifoldDescriptor) -> bool,
}

fn is_b(d: &ManifoldDescriptor) -> bool {
    d.family() == Family::B
}

pub const RIGIDITY_CLAUSES: [RigidityClause; 7] = [
    RigidityClause {
        class: RigidityClass::R1,
        text: "A(l,rho,k1,k2)",
        test: |d| d.family() == Family::A,
    },
    RigidityClause {
        class: RigidityClass::R1,
        text: "B(l,rho,1,0)",
        test: |d| is_b(d) && d.k1() == 1 && d.k2() == 0,
    },
    RigidityClause {
        class: RigidityClass::R1,
        text: "B(l,rho,k1,0) with rho != 0 and 4 <= 2k1 <= l",
        test: |d| {
            is_b(d) && d.k2() == 0 && d.rho() != 0 && 4 <= 2 * d.k1() && 2 * d.k1() <= d.ell()
        },
    },
    RigidityClause {
        class: RigidityClass::R2,
        text: "B(l,rho,k1,0) with rho != 0 and 3 <= l+1 <= 2k1",
        test: |d| is_b(d) && d.k2() == 0 && d.rho() != 0 && d.ell() >= 2 && d.ell() < 2 * d.k1(),
    },
    RigidityClause {
        class: RigidityClass::R2,
        text: "B(l,0,k1,0) with l >= 2 and k1 >= 2",
        test: |d| is_b(d) && d.k2() == 0 && d.rho() == 0 && d.ell() >= 2 && d.k1() >= 2,
    },
    RigidityClause {
        class: RigidityClass::R2,
        text: "B(l,rho,k1,k2) with l >= 2 and k2 > 0",
        test: |d| is_b(d) && d.ell() >= 2 && d.k2() > 0,
    },
    RigidityClause {
        class: RigidityClass::R3,
        text: "B(1,rho,k1,k2) with k1+k2 >= 2",
        test: |d| is_b(d) && d.ell() == 1 && d.fiber_sum() >= 2,
    },
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RigidityMatch {
    pub class: RigidityClass,
    pub clause: &'static str,
}

/// Classifies against an explicit clause table; exactly one clause must match.
pub fn rigidity_class_in(
    d: &ManifoldDescriptor,
    clauses: &[RigidityClause],
) -> Result<RigidityMatch, ClassifyError> {
    let hits: Vec<&RigidityClause> = clauses.iter().filter(|c| (c.test)(d)).collect();
    match hits[..] {
        [c] => Ok(RigidityMatch {
            class: c.class,
            clause: c.text,
        }),
        _ => Err(ClassifyError::Partition {
            descriptor: *d,
            matched: hits.iter().map(|c| c.text).collect(),
        }),
    }
}

pub fn rigidity_class(d: &ManifoldDescriptor) -> Result<RigidityMatch, ClassifyError> {
    rigidity_class_in(d, &RIGIDITY_CLAUSES)
}

/// What the ring oracle found for the pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    /// `None` when the search could not be made exhaustive.
    pub ring_isomorphic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompareReport {
    pub first: ManifoldDescriptor,
    pub second: ManifoldDescriptor,
    pub dimensions: [u32; 2],
    pub ring_isomorphic: bool,
    /// Some ring isomorphism carries `p` to `p`; `None` when undecided.
    pub p_preservable: Option<bool>,
    /// Some ring isomorphism carries `w` to `w` (mod 2); `None` when undecided.
    pub w_preservable: Option<bool>,
    pub p_indeterminate: bool,
    pub w_indeterminate: bool,
    pub oracle: OracleSummary,
    pub verdict: DiffeoVerdict,
    pub rigidity: [RigidityMatch; 2],
}

fn oracle_preservation(
    d1: &ManifoldDescriptor,
    d2: &ManifoldDescriptor,
) -> Result<(OracleSummary, Option<bool>, Option<bool>), IsoError> {
    let (r1, r2) = (cohomology(d1), cohomology(d2));
    let all = find_all_isos(&r1, &r2)?;
    if !all.complete {
        let summary = OracleSummary {
            ring_isomorphic: None,
            witness: None,
            error: None,
        };
        return Ok((summary, None, None));
    }
    let first = all.representative();
    let summary = OracleSummary {
        ring_isomorphic: Some(first.is_some()),
        witness: first.as_ref().map(ToString::to_string),
        error: None,
    };
    if first.is_none() {
        return Ok((summary, Some(false), Some(false)));
    }
    let (p1, p2) = (pontrjagin(d1), pontrjagin(d2));
    let (w1, w2) = (stiefel_whitney(d1), stiefel_whitney(d2));
    let p = all.preserving(&[(&p1, &p2)])?.is_some();
    let w = all.preserving(&[(&w1, &w2)])?.is_some();
    Ok((summary, Some(p), Some(w)))
}

/// Full comparison. Fails only when the verdict contradicts the ring data
/// (a diffeomorphism must induce a ring isomorphism preserving `p` and `w`).
pub fn compare_report(
    d1: &ManifoldDescriptor,
    d2: &ManifoldDescriptor,
) -> Result<CompareReport, ClassifyError> {
    let rigidity = [rigidity_class(d1)?, rigidity_class(d2)?];
    let verdict = diffeomorphic(d1, d2);
    let ring_isomorphic = cohomology_isomorphic(d1, d2);
    let (oracle, p, w) = match oracle_preservation(d1, d2) {
        Ok(t) => t,
        Err(e) => (
            OracleSummary {
                ring_isomorphic: None,
                witness: None,
                error: Some(e.to_string()),
            },
            None,
            None,
        ),
    };
    let report = CompareReport {
        first: *d1,
        second: *d2,
        dimensions: [dimension(d1), dimension(d2)],
        ring_isomorphic,
        p_preservable: p,
        w_preservable: w,
        p_indeterminate: p.is_none(),
        w_indeterminate: w.is_none(),
        oracle,
        verdict,
        rigidity,
    };
    if report.verdict.is_diffeomorphic() {
        let problem = if !report.ring_isomorphic {
            Some("diffeomorphic but cohomology rings not isomorphic")
        } else if report.p_preservable == Some(false) {
            Some("diffeomorphic but no ring isomorphism preserves p")
        } else if report.w_preservable == Some(false) {
            Some("diffeomorphic but no ring isomorphism preserves w")
        } else {
            None
        };
        if let Some(msg) = problem {
            return Err(ClassifyError::Inconsistent(*d1, *d2, msg.to_string()));
        }
    }
    Ok(report)
}
