//! Shared helpers for the integration suites: descriptor grids and the
//! property checks, which run under fixed seeds.
#![allow(dead_code)]

use std::collections::HashMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};
use torusclass::classify::{cohomology_isomorphic, diffeomorphic};
use torusclass::intpoly::{generators, CoeffDomain, Generators, GradedPoly};
use torusclass::invariants::{cohomology, dimension};
use torusclass::isosearch::{find_iso, verify_iso, SearchConfig, SearchMode, SearchOutcome};
use torusclass::quotient::RingPresentation;
use torusclass::{Family, ManifoldDescriptor};

/// Every valid descriptor with `l <= max_ell`, `k1 + k2 <= max_sum`, `|rho| <= max_rho`.
pub fn grid(
    max_ell: u32,
    max_sum: u32,
    max_rho: i64,
    families: &[Family],
) -> Vec<ManifoldDescriptor> {
    let mut out = Vec::new();
    for &family in families {
        for ell in 1..=max_ell {
            for rho in -max_rho..=max_rho {
                for k1 in 1..=max_sum {
                    for k2 in 0..=max_sum - k1 {
                        if let Ok(d) =
                            ManifoldDescriptor::new(family, ell.into(), rho, k1.into(), k2.into())
                        {
                            out.push(d);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn both() -> [Family; 2] {
    [Family::A, Family::B]
}

/// Unordered pairs `i < j` of equal dimension.
pub fn same_dimension_pairs(
    ds: &[ManifoldDescriptor],
) -> Vec<(ManifoldDescriptor, ManifoldDescriptor)> {
    let mut out = Vec::new();
    for (i, d) in ds.iter().enumerate() {
        for e in &ds[i + 1..] {
            if dimension(d) == dimension(e) {
                out.push((*d, *e));
            }
        }
    }
    out
}

fn runner(seed: u64, cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    })
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

// --- intpoly -----------------------------------------------------------------

fn xy() -> Generators {
    generators(&[("x", 2), ("y", 4)]).unwrap()
}

fn poly_strategy(gens: Generators, domain: CoeffDomain) -> impl Strategy<Value = GradedPoly> {
    prop::collection::vec(((0u32..4, 0u32..3), -6i64..=6), 0..6).prop_map(move |terms| {
        GradedPoly::from_terms(
            &gens,
            domain,
            terms.into_iter().map(|((i, j), c)| (vec![i, j], c)),
        )
        .unwrap()
    })
}

pub fn intpoly_ring_axioms() -> Result<(), String> {
    let g = xy();
    let p = || poly_strategy(g.clone(), CoeffDomain::Integers);
    let images = (-3i64..=3, -3i64..=3, -3i64..=3);
    runner(0x5eed_0001, 128)
        .run(&(p(), p(), p(), images), |(a, b, c, (s, t, u))| {
            let add = |x: &GradedPoly, y: &GradedPoly| x.add(y).unwrap();
            let mul = |x: &GradedPoly, y: &GradedPoly| x.mul(y).unwrap();
            check(add(&a, &b) == add(&b, &a), || "addition commutes".into())?;
            check(mul(&a, &b) == mul(&b, &a), || {
                "multiplication commutes".into()
            })?;
            check(mul(&mul(&a, &b), &c) == mul(&a, &mul(&b, &c)), || {
                "multiplication associates".into()
            })?;
            check(add(&add(&a, &b), &c) == add(&a, &add(&b, &c)), || {
                "addition associates".into()
            })?;
            check(
                mul(&a, &add(&b, &c)) == add(&mul(&a, &b), &mul(&a, &c)),
                || "distributivity".into(),
            )?;
            check(a.sub(&a).unwrap().is_zero(), || "a - a = 0".into())?;
            check(
                mul(&a, &GradedPoly::one(&g, CoeffDomain::Integers)) == a,
                || "unit".into(),
            )?;
            check(
                mul(&a, &b).reduce_mod2() == a.reduce_mod2().mul(&b.reduce_mod2()).unwrap(),
                || "reduction mod 2 is multiplicative".into(),
            )?;
            // substitution x -> s x, y -> t y + u x^2 is a ring map
            let img = [
                GradedPoly::from_terms(&g, CoeffDomain::Integers, [(vec![1, 0], s)]).unwrap(),
                GradedPoly::from_terms(
                    &g,
                    CoeffDomain::Integers,
                    [(vec![0, 1], t), (vec![2, 0], u)],
                )
                .unwrap(),
            ];
            let sub = |x: &GradedPoly| x.substitute(&img).unwrap();
            check(sub(&mul(&a, &b)) == mul(&sub(&a), &sub(&b)), || {
                "substitution is multiplicative".into()
            })?;
            check(sub(&add(&a, &b)) == add(&sub(&a), &sub(&b)), || {
                "substitution is additive".into()
            })?;
            // canonical text form parses back
            check(
                GradedPoly::parse(&a.to_string(), &g, CoeffDomain::Integers).unwrap() == a,
                || format!("display round trip of {a}"),
            )
        })
        .map_err(|e| e.to_string())
}

// --- quotient ----------------------------------------------------------------

fn presentation_strategy() -> impl Strategy<Value = RingPresentation> {
    (
        1u32..=4,
        prop::sample::select(vec![2u32, 4, 6]),
        1u32..=3,
        prop::collection::vec(-3i64..=3, 3),
    )
        .prop_map(|(ell, wd, big_d, tail)| {
            let gens = generators(&[("x", 2), ("w", wd)]).unwrap();
            let mut terms = vec![(vec![0, big_d], 1i64)];
            for b in 0..big_d {
                let a = (big_d - b) * wd / 2;
                terms.push((vec![a, b], tail[b as usize]));
            }
            let f = GradedPoly::from_terms(&gens, CoeffDomain::Integers, terms).unwrap();
            RingPresentation::raw(ell, f).unwrap().canonicalize()
        })
}

fn element_strategy() -> impl Strategy<Value = Vec<((u32, u32), i64)>> {
    prop::collection::vec(((0u32..6, 0u32..5), -5i64..=5), 0..6)
}

pub fn quotient_normal_forms() -> Result<(), String> {
    runner(0x5eed_0002, 128)
        .run(
            &(
                presentation_strategy(),
                element_strategy(),
                element_strategy(),
                element_strategy(),
            ),
            |(ring, p, q, r)| {
                let el = |t: &Vec<((u32, u32), i64)>| {
                    GradedPoly::from_terms(
                        ring.gens(),
                        CoeffDomain::Integers,
                        t.iter().map(|&((i, j), c)| (vec![i, j], c)),
                    )
                    .unwrap()
                };
                let (p, q, r) = (el(&p), el(&q), el(&r));
                let nf = |x: &GradedPoly| ring.normal_form(x).unwrap();
                // adding ideal elements does not change the normal form
                let shifted = p
                    .add(&q.mul(ring.relation()).unwrap())
                    .and_then(|s| s.add(&r.mul(&ring.truncation()).unwrap()))
                    .unwrap();
                check(nf(&shifted) == nf(&p), || {
                    format!("ideal shift changed NF in {ring}")
                })?;
                check(nf(nf(&p).poly()) == nf(&p), || "NF is idempotent".into())?;
                check(
                    nf(&p.add(&q).unwrap()) == nf(&p).add(&nf(&q)).unwrap(),
                    || "NF is additive".into(),
                )?;
                check(
                    nf(&p.mul(&q).unwrap()) == nf(&p).mul(&nf(&q)).unwrap(),
                    || "NF is multiplicative".into(),
                )?;
                let basis = ring.normal_basis();
                check(
                    nf(&p).poly().terms().all(|(m, _)| basis.contains(m)),
                    || "NF lies on the basis".into(),
                )?;
                let ranks: usize = ring.graded_ranks().values().sum();
                check(
                    ranks == ring.additive_rank() && basis.len() == ranks,
                    || "rank count".into(),
                )?;
                check(
                    ring.additive_rank() == (ring.ell() as usize + 1) * ring.w_exponent() as usize,
                    || "rank is (l+1)D".into(),
                )
            },
        )
        .map_err(|e| e.to_string())
}

// --- isosearch ---------------------------------------------------------------

fn small_grid() -> Vec<ManifoldDescriptor> {
    grid(3, 4, 3, &both())
}

pub fn isosearch_soundness_and_symmetry() -> Result<(), String> {
    let ds = small_grid();
    let n = ds.len();
    let pick = (0..n, 0..n).prop_filter("same dimension", {
        let ds = ds.clone();
        move |&(i, j)| dimension(&ds[i]) == dimension(&ds[j])
    });
    runner(0x5eed_0003, 96)
        .run(&pick, |(i, j)| {
            let (d, e) = (ds[i], ds[j]);
            let (p1, p2) = (cohomology(&d), cohomology(&e));
            let cfg = SearchConfig::default_for(&d, &e);
            let there = find_iso(&p1, &p2, &cfg).unwrap();
            let back = find_iso(&p2, &p1, &cfg).unwrap();
            if let SearchOutcome::Found(w) = &there {
                check(w.is_verified() && verify_iso(w, &p1, &p2), || {
                    format!("unsound witness {d} -> {e}")
                })?;
            }
            check(there.is_found() == back.is_found(), || {
                format!("asymmetric search for {d}, {e}")
            })?;
            check(there.is_found() == cohomology_isomorphic(&d, &e), || {
                format!("oracle vs closed form on {d}, {e}")
            })?;
            // a small enumeration window never contradicts the exact answer
            let en = find_iso(
                &p1,
                &p2,
                &SearchConfig::new(6, SearchMode::Enumerate).unwrap(),
            )
            .unwrap();
            check(!en.is_found() || there.is_found(), || {
                format!("enumeration found extra iso {d}, {e}")
            })?;
            check(
                !matches!(there, SearchOutcome::NotIsomorphic) || !en.is_found(),
                || "modes disagree".into(),
            )
        })
        .map_err(|e| e.to_string())
}

// --- classify ----------------------------------------------------------------

/// Reflexive, symmetric and transitive on `l <= 4, k1+k2 <= 4, |rho| <= 3`;
/// transitivity is checked by closing each class and testing every pair in it.
pub fn diffeomorphic_equivalence() -> Result<(), String> {
    let ds = grid(4, 4, 3, &both());
    let mut by_dim: HashMap<u32, Vec<ManifoldDescriptor>> = HashMap::new();
    for d in &ds {
        by_dim.entry(dimension(d)).or_default().push(*d);
        if !diffeomorphic(d, d).is_diffeomorphic() {
            return Err(format!("{d} not diffeomorphic to itself"));
        }
        if !diffeomorphic(d, &d.with_rho(-d.rho())).is_diffeomorphic() {
            return Err(format!("{d} not diffeomorphic to its rho-negation"));
        }
    }
    for group in by_dim.values() {
        let n = group.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut rel = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                let v = diffeomorphic(&group[i], &group[j]);
                rel[i][j] = v.is_diffeomorphic();
                if i < j {
                    let back = diffeomorphic(&group[j], &group[i]).is_diffeomorphic();
                    if back != rel[i][j] {
                        return Err(format!("asymmetric verdict {} {}", group[i], group[j]));
                    }
                }
                if rel[i][j] {
                    let (d, e) = (group[i], group[j]);
                    if !cohomology_isomorphic(&d, &e)
                        || cohomology(&d).graded_ranks() != cohomology(&e).graded_ranks()
                    {
                        return Err(format!("{d} ~ {e} without matching cohomology"));
                    }
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if root(&mut parent, i) == root(&mut parent, j) && !rel[i][j] {
                    return Err(format!(
                        "transitivity fails between {} and {}",
                        group[i], group[j]
                    ));
                }
            }
        }
    }
    Ok(())
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

pub const SUITES: [Suite; 4] = [
    ("intpoly ring axioms", intpoly_ring_axioms),
    ("quotient normal forms and ranks", quotient_normal_forms),
    (
        "isosearch soundness and symmetry",
        isosearch_soundness_and_symmetry,
    ),
    (
        "diffeomorphic equivalence relation",
        diffeomorphic_equivalence,
    ),
];
