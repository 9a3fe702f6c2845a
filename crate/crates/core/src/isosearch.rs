//! Search for graded ring isomorphisms between two-generator presentations.
//!
//! This is an oracle: it knows nothing about manifolds, only about the rings.
//! Any map it returns has passed [`verify_iso`].
//!
//! Every candidate map is written `x -> U`, `w -> V0 + s * Dir` with a single
//! integer parameter `s`:
//!
//! * degree 2 of rank 1: `U = ±X`, `V0 = ±W` (or 0), `Dir = X^(d/2)`;
//! * degree 2 of rank 2: `U = pX + qW` with `U^(l+1) = 0`, `V0 = ±v0` completing
//!   `U` to a basis of degree 2, `Dir = U`.
//!
//! The relation `f(U, V0 + s Dir)` reduced in the target is a vector of integer
//! polynomials in `s`. Exact mode solves them (rational root theorem) and is
//! therefore complete; enumerate mode tests every `s` (and every `U`) within
//! the configured window.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::{binomial, Integer};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::descriptor::ManifoldDescriptor;
use crate::intpoly::{CoeffDomain, GradedPoly, Monomial, PolyError};
use crate::quotient::{evaluate_hom, NormalElement, QuotientError, RingPresentation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsoError {
    #[error("isomorphism search runs over the integers")]
    IntegerDomainRequired,
    #[error("classes live in different coefficient domains")]
    DomainMismatch,
    #[error("class does not belong to the witness's {0} ring")]
    RingMismatch(&'static str),
    #[error("witness has not been verified")]
    Unverified,
    #[error("search bound must be at least 1")]
    ZeroBound,
    #[error("degree-{0} part of the target is not spanned by a power of x and w")]
    Unsupported(u32),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

impl From<PolyError> for IsoError {
    fn from(e: PolyError) -> Self {
        IsoError::Quotient(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Enumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    bound: u64,
    mode: SearchMode,
}

impl SearchConfig {
    pub fn new(bound: u64, mode: SearchMode) -> Result<Self, IsoError> {
        if bound == 0 {
            return Err(IsoError::ZeroBound);
        }
        Ok(SearchConfig { bound, mode })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn mode(&self) -> SearchMode {
        self.mode
    }

    pub fn with_mode(self, mode: SearchMode) -> Self {
        SearchConfig { mode, ..self }
    }

    /// `2 * max(|rho|, |rho'|, 2)^max(k1+k2, k1'+k2') + 2`, exact mode.
    pub fn default_for(d1: &ManifoldDescriptor, d2: &ManifoldDescriptor) -> Self {
        SearchConfig {
            bound: default_bound(d1, d2),
            mode: SearchMode::Exact,
        }
    }
}

pub fn default_bound(d1: &ManifoldDescriptor, d2: &ManifoldDescriptor) -> u64 {
    let base = d1.rho().unsigned_abs().max(d2.rho().unsigned_abs()).max(2);
    let exp = d1.fiber_sum().max(d2.fiber_sum());
    base.checked_pow(exp)
        .and_then(|p| p.checked_mul(2))
        .and_then(|p| p.checked_add(2))
        .unwrap_or(u64::MAX)
}

/// How a witness was parametrized; kept for display and ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessParams {
    /// `x -> eps X`, `w -> a X^(d/2) + b W`.
    Rank1 { epsilon: i8, a: BigInt, b: i8 },
    /// Rows are the coordinates of the images of `x` and `w` on `(X, W)`.
    Rank2 { matrix: [[BigInt; 2]; 2] },
}

impl WitnessParams {
    fn key(&self) -> (BigInt, u8, Vec<BigInt>) {
        fn zigzag(n: &BigInt) -> BigInt {
            if n.is_positive() {
                n * 2 - 1
            } else {
                -n * 2
            }
        }
        match self {
            WitnessParams::Rank1 { epsilon, a, b } => (
                a.abs(),
                u8::from(*epsilon != 1) + u8::from(*b != 1),
                vec![zigzag(a)],
            ),
            WitnessParams::Rank2 {
                matrix: [[p, q], [r, s]],
            } => {
                let l1 = p.abs() + q.abs() + r.abs() + s.abs();
                let off = u8::try_from(u32::from(!q.is_zero()) + u32::from(!r.is_zero())).unwrap();
                (
                    l1,
                    off,
                    vec![zigzag(&(p - 1)), zigzag(&(s - 1)), zigzag(q), zigzag(r)],
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness {
    source: RingPresentation,
    target: RingPresentation,
    images: Vec<GradedPoly>,
    params: Option<WitnessParams>,
    verified: bool,
}

impl IsoWitness {
    /// An unchecked candidate; see [`IsoWitness::verified`].
    pub fn candidate(
        source: &RingPresentation,
        target: &RingPresentation,
        images: Vec<GradedPoly>,
    ) -> Self {
        IsoWitness {
            source: source.clone(),
            target: target.clone(),
            images,
            params: None,
            verified: false,
        }
    }

    /// Runs [`verify_iso`] and marks the witness as verified on success.
    pub fn verified(mut self) -> Option<Self> {
        if verify_iso(&self, &self.source, &self.target) {
            self.verified = true;
            Some(self)
        } else {
            None
        }
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn source(&self) -> &RingPresentation {
        &self.source
    }

    pub fn target(&self) -> &RingPresentation {
        &self.target
    }

    /// Images of the source generators, in the target's generators.
    pub fn images(&self) -> &[GradedPoly] {
        &self.images
    }

    pub fn params(&self) -> Option<&WitnessParams> {
        self.params.as_ref()
    }

    /// `(source generator name, image)` pairs.
    pub fn assignments(&self) -> Vec<(String, String)> {
        self.source
            .gens()
            .iter()
            .zip(&self.images)
            .map(|(g, img)| (g.name.clone(), img.to_string()))
            .collect()
    }
}

impl fmt::Display for IsoWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .assignments()
            .into_iter()
            .map(|(g, img)| format!("{g} -> {img}"))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Box<IsoWitness>),
    /// Ruled out exhaustively (exact mode, or a structural invariant differs).
    NotIsomorphic,
    /// Enumeration exhausted the window; says nothing beyond it.
    NotFoundWithinBound(u64),
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&IsoWitness> {
        match self {
            SearchOutcome::Found(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

// ---------------------------------------------------------------------------
// integer polynomial helpers; polynomials are coefficient vectors, low to high

/// Integer values of a parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootSet {
    All,
    Finite(Vec<BigInt>),
}

pub fn eval_poly(coeffs: &[BigInt], t: &BigInt) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| acc * t + c)
}

/// `sum a_i p^i q^(n-i)`, i.e. `q^n P(p/q)` with `n = deg` as stored.
fn eval_homogeneous(coeffs: &[BigInt], p: &BigInt, q: &BigInt) -> BigInt {
    let n = coeffs.len().saturating_sub(1);
    let mut acc = BigInt::zero();
    for (i, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc += c * num_traits::pow(p.clone(), i) * num_traits::pow(q.clone(), n - i);
        }
    }
    acc
}

/// Positive divisors of `|n|`, `n != 0`, ascending.
pub fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    assert!(!n.is_zero(), "divisors of zero");
    let mut small = Vec::new();
    let mut large = Vec::new();
    if let Some(v) = n.to_u128() {
        let mut d = 1u128;
        while d * d <= v {
            if v % d == 0 {
                small.push(BigInt::from(d));
                if d * d != v {
                    large.push(BigInt::from(v / d));
                }
            }
            d += 1;
        }
    } else {
        let mut d = BigInt::one();
        while &d * &d <= n {
            if (&n % &d).is_zero() {
                small.push(d.clone());
                if &d * &d != n {
                    large.push(&n / &d);
                }
            }
            d += 1;
        }
    }
    small.extend(large.into_iter().rev());
    small
}

fn lowest_nonzero(p: &[BigInt]) -> Option<(usize, &BigInt)> {
    p.iter().enumerate().find(|(_, c)| !c.is_zero())
}

fn highest_nonzero(p: &[BigInt]) -> Option<(usize, &BigInt)> {
    p.iter().enumerate().rev().find(|(_, c)| !c.is_zero())
}

fn gcd_of<'a>(it: impl Iterator<Item = &'a BigInt>) -> BigInt {
    it.fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn by_size(a: &BigInt, b: &BigInt) -> Ordering {
    a.abs().cmp(&b.abs()).then(b.cmp(a))
}

/// Common integer roots of all `polys`, ordered `0, 1, -1, 2, -2, ...`.
pub fn common_integer_roots(polys: &[Vec<BigInt>]) -> RootSet {
    let nonzero: Vec<&Vec<BigInt>> = polys
        .iter()
        .filter(|p| lowest_nonzero(p).is_some())
        .collect();
    if nonzero.is_empty() {
        return RootSet::All;
    }
    // A nonzero root r of P divides P's lowest nonzero coefficient.
    let g = gcd_of(nonzero.iter().map(|p| lowest_nonzero(p).unwrap().1));
    let mut candidates = vec![BigInt::zero()];
    for d in divisors(&g) {
        candidates.push(-&d);
        candidates.push(d);
    }
    let mut roots: Vec<BigInt> = candidates
        .into_iter()
        .filter(|t| nonzero.iter().all(|p| eval_poly(p, t).is_zero()))
        .collect();
    roots.sort_by(by_size);
    RootSet::Finite(roots)
}

/// Common rational roots `p/q` (`q > 0`, lowest terms) of all `polys`, or
/// `None` when every polynomial vanishes identically.
pub fn common_rational_roots(polys: &[Vec<BigInt>]) -> Option<Vec<(BigInt, BigInt)>> {
    let nonzero: Vec<&Vec<BigInt>> = polys
        .iter()
        .filter(|p| lowest_nonzero(p).is_some())
        .collect();
    if nonzero.is_empty() {
        return None;
    }
    let low = gcd_of(nonzero.iter().map(|p| lowest_nonzero(p).unwrap().1));
    let high = gcd_of(nonzero.iter().map(|p| highest_nonzero(p).unwrap().1));
    let mut candidates = vec![(BigInt::zero(), BigInt::one())];
    for q in divisors(&high) {
        for p in divisors(&low) {
            if p.gcd(&q).is_one() {
                candidates.push((p.clone(), q.clone()));
                candidates.push((-p, q.clone()));
            }
        }
    }
    let mut roots: Vec<(BigInt, BigInt)> = candidates
        .into_iter()
        .filter(|(p, q)| {
            nonzero.iter().all(|poly| {
                let top = highest_nonzero(poly).unwrap().0;
                eval_homogeneous(&poly[..=top], p, q).is_zero()
            })
        })
        .collect();
    roots.sort_by(|(p1, q1), (p2, q2)| (p1.abs() + q1).cmp(&(p2.abs() + q2)).then(p2.cmp(p1)));
    roots.dedup();
    Some(roots)
}

/// Bareiss fraction-free determinant.
pub fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

// ---------------------------------------------------------------------------
// verification

fn basis_poly(ring: &RingPresentation, m: &Monomial) -> GradedPoly {
    GradedPoly::monomial(ring.gens(), ring.domain(), m.exps(), 1).unwrap()
}

/// Checks that `w` defines a graded ring isomorphism `p1 -> p2`: both relations
/// of `p1` map to zero, and every graded piece maps by an integer matrix of
/// determinant `±1`.
pub fn verify_iso(w: &IsoWitness, p1: &RingPresentation, p2: &RingPresentation) -> bool {
    verify_images(&w.images, p1, p2).unwrap_or(false)
}

fn verify_images(
    images: &[GradedPoly],
    p1: &RingPresentation,
    p2: &RingPresentation,
) -> Result<bool, IsoError> {
    if images.len() != 2 || images.iter().any(|i| i.gens() != p2.gens()) {
        return Ok(false);
    }
    if p1.domain() != p2.domain() || p1.graded_ranks() != p2.graded_ranks() {
        return Ok(false);
    }
    for rel in [p1.truncation(), p1.relation().clone()] {
        if !evaluate_hom(images, &rel, p2)?.is_zero() {
            return Ok(false);
        }
    }
    for d in p1.graded_ranks().into_keys() {
        let source = p1.basis_in_degree(d);
        let matrix: Vec<Vec<BigInt>> = source
            .iter()
            .map(|m| evaluate_hom(images, &basis_poly(p1, m), p2).map(|e| e.coordinates(d)))
            .collect::<Result<_, _>>()?;
        let det = determinant(matrix);
        if p2.domain() == CoeffDomain::Mod2 {
            if det.is_even() {
                return Ok(false);
            }
        } else if det.abs() != BigInt::one() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the witness carries `c1` to `c2`. Integer classes use the witness
/// as is; mod-2 classes use its reduction.
pub fn check_preserves(
    w: &IsoWitness,
    c1: &NormalElement,
    c2: &NormalElement,
) -> Result<bool, IsoError> {
    if !w.verified {
        return Err(IsoError::Unverified);
    }
    let (d1, d2) = (c1.ring().domain(), c2.ring().domain());
    if d1 != d2 {
        return Err(IsoError::DomainMismatch);
    }
    let same_ring = |ring: &RingPresentation, of: &RingPresentation| match ring.domain() {
        CoeffDomain::Integers => ring == of,
        CoeffDomain::Mod2 => *ring == of.reduce_mod2(),
    };
    if !same_ring(c1.ring(), &w.source) {
        return Err(IsoError::RingMismatch("source"));
    }
    if !same_ring(c2.ring(), &w.target) {
        return Err(IsoError::RingMismatch("target"));
    }
    Ok(evaluate_hom(&w.images, c1.poly(), c2.ring())? == *c2)
}

// ---------------------------------------------------------------------------
// parametrized maps

struct Target<'a> {
    ring: &'a RingPresentation,
    basis: Vec<Monomial>,
}

impl<'a> Target<'a> {
    fn new(ring: &'a RingPresentation) -> Self {
        Target {
            ring,
            basis: ring.normal_basis(),
        }
    }

    fn nf(&self, p: &GradedPoly) -> Result<GradedPoly, IsoError> {
        Ok(self.ring.normal_form(p)?.poly().clone())
    }

    fn coords(&self, p: &GradedPoly) -> Vec<BigInt> {
        self.basis.iter().map(|m| p.coefficient(m.exps())).collect()
    }

    /// `p^0 .. p^n`, each reduced.
    fn powers(&self, p: &GradedPoly, n: u32) -> Result<Vec<GradedPoly>, IsoError> {
        let mut out = vec![GradedPoly::one(self.ring.gens(), self.ring.domain())];
        for _ in 0..n {
            let next = self.nf(&out.last().unwrap().mul(p)?)?;
            out.push(next);
        }
        Ok(out)
    }

    fn var(&self, i: usize) -> GradedPoly {
        if i == 0 {
            self.ring.x()
        } else {
            self.ring.w()
        }
    }
}

/// `x -> u`, `w -> v0 + s * dir`.
#[derive(Clone, Debug)]
struct Family {
    u: GradedPoly,
    v0: GradedPoly,
    dir: GradedPoly,
    shape: Shape,
}

#[derive(Clone, Debug)]
enum Shape {
    Rank1 { epsilon: i8, b: i8 },
    Rank2 { u: [BigInt; 2], v0: [BigInt; 2] },
}

impl Family {
    fn images(&self, s: &BigInt) -> Vec<GradedPoly> {
        vec![self.u.clone(), self.v0.add(&self.dir.scale(s)).unwrap()]
    }

    fn params(&self, s: &BigInt) -> WitnessParams {
        match &self.shape {
            Shape::Rank1 { epsilon, b } => WitnessParams::Rank1 {
                epsilon: *epsilon,
                a: s.clone(),
                b: *b,
            },
            Shape::Rank2 { u, v0 } => WitnessParams::Rank2 {
                matrix: [u.clone(), [&v0[0] + s * &u[0], &v0[1] + s * &u[1]]],
            },
        }
    }

    /// Coordinates of `g(u, v0 + s dir)` in the target, as polynomials in `s`.
    fn expand(&self, g: &GradedPoly, target: &Target) -> Result<Vec<Vec<BigInt>>, IsoError> {
        let max_i = g.terms().map(|(m, _)| m.exps()[0]).max().unwrap_or(0);
        let max_k = g.terms().map(|(m, _)| m.exps()[1]).max().unwrap_or(0);
        let u_pow = target.powers(&self.u, max_i)?;
        let v_pow = target.powers(&self.v0, max_k)?;
        let d_pow = target.powers(&self.dir, max_k)?;
        let zero = GradedPoly::zero(target.ring.gens(), target.ring.domain());
        let mut by_power = vec![zero; max_k as usize + 1];
        for (m, c) in g.terms() {
            let (i, k) = (m.exps()[0] as usize, m.exps()[1]);
            for j in 0..=k {
                let coeff = c * BigInt::from(binomial(u64::from(k), u64::from(j)));
                let term = u_pow[i]
                    .mul(&d_pow[j as usize])?
                    .mul(&v_pow[(k - j) as usize])?
                    .scale(&coeff);
                by_power[j as usize] = by_power[j as usize].add(&term)?;
            }
        }
        let coords: Vec<Vec<BigInt>> = by_power
            .iter()
            .map(|p| target.nf(p).map(|nf| target.coords(&nf)))
            .collect::<Result<_, _>>()?;
        Ok((0..target.basis.len())
            .map(|b| coords.iter().map(|c| c[b].clone()).collect())
            .collect())
    }

    fn witness(
        &self,
        s: &BigInt,
        p1: &RingPresentation,
        p2: &RingPresentation,
    ) -> Option<IsoWitness> {
        let mut w = IsoWitness::candidate(p1, p2, self.images(s)).verified()?;
        w.params = Some(self.params(s));
        Some(w)
    }
}

/// Pre-checks shared by every mode: graded ranks and the degrees of the
/// indecomposables `{2, d}` must agree.
fn structurally_compatible(p1: &RingPresentation, p2: &RingPresentation) -> bool {
    fn indecomposable_degree(p: &RingPresentation) -> Option<u32> {
        (p.w_exponent() >= 2).then(|| p.w_degree())
    }
    p1.graded_ranks() == p2.graded_ranks() && indecomposable_degree(p1) == indecomposable_degree(p2)
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    (e.gcd, e.x, e.y)
}

/// Candidate families, in canonical order. `u_filter` decides which `x`
/// images are admissible in degree-2-rank-2 targets.
fn families(
    p1: &RingPresentation,
    p2: &RingPresentation,
    us: &[[BigInt; 2]],
) -> Result<Vec<Family>, IsoError> {
    let target = Target::new(p2);
    let gens = p2.gens();
    let int = p2.domain();
    let lin = |c: &[BigInt; 2]| {
        GradedPoly::from_terms(
            gens,
            int,
            [(vec![1, 0], c[0].clone()), (vec![0, 1], c[1].clone())],
        )
        .unwrap()
    };
    let mut out = Vec::new();
    if p2.basis_in_degree(2).len() == 1 {
        let d = p1.w_degree();
        let basis = p2.basis_in_degree(d);
        let has_w = basis.iter().any(|m| m.exps() == [0, 1]);
        let has_x = basis.iter().any(|m| m.exps() == [d / 2, 0]);
        if basis.len() != usize::from(has_w) + usize::from(has_x) {
            return Err(IsoError::Unsupported(d));
        }
        let dir = if has_x {
            GradedPoly::monomial(gens, int, &[d / 2, 0], 1)?
        } else {
            GradedPoly::zero(gens, int)
        };
        let bs: &[i8] = if has_w { &[1, -1] } else { &[0] };
        for epsilon in [1i8, -1] {
            for &b in bs {
                out.push(Family {
                    u: target.var(0).scale(&epsilon.into()),
                    v0: target.var(1).scale(&b.into()),
                    dir: dir.clone(),
                    shape: Shape::Rank1 { epsilon, b },
                });
            }
        }
    } else {
        for u in us {
            // v0 with det(u, v0) = 1
            let (g, s, t) = ext_gcd(&u[0], &u[1]);
            debug_assert!(g.is_one());
            let v0 = [-t, s];
            for sigma in [1i64, -1] {
                let v = [&v0[0] * sigma, &v0[1] * sigma];
                out.push(Family {
                    u: lin(u),
                    v0: lin(&v),
                    dir: lin(u),
                    shape: Shape::Rank2 {
                        u: u.clone(),
                        v0: v,
                    },
                });
            }
        }
    }
    Ok(out)
}

/// Coordinates of `(pX + qW)^(l+1)` as polynomials in `p` (homogeneous with `q`).
fn truncation_conditions(
    p1: &RingPresentation,
    target: &Target,
) -> Result<Vec<Vec<BigInt>>, IsoError> {
    let n = p1.ell() + 1;
    let xs = target.powers(&target.var(0), n)?;
    let ws = target.powers(&target.var(1), n)?;
    let mut rows = vec![vec![BigInt::zero(); n as usize + 1]; target.basis.len()];
    for j in 0..=n {
        let term = target.nf(&xs[j as usize].mul(&ws[(n - j) as usize])?)?;
        let c = BigInt::from(binomial(u64::from(n), u64::from(j)));
        for (b, v) in target.coords(&term).into_iter().enumerate() {
            rows[b][j as usize] = &c * v;
        }
    }
    Ok(rows)
}

fn x_images_exact(
    p1: &RingPresentation,
    p2: &RingPresentation,
) -> Result<Option<Vec<[BigInt; 2]>>, IsoError> {
    let target = Target::new(p2);
    let rows = truncation_conditions(p1, &target)?;
    let Some(roots) = common_rational_roots(&rows) else {
        return Ok(None);
    };
    let mut us = Vec::new();
    // q = 0: the top coefficient must vanish everywhere
    if rows.iter().all(|r| r.last().unwrap().is_zero()) {
        us.push([BigInt::one(), BigInt::zero()]);
        us.push([-BigInt::one(), BigInt::zero()]);
    }
    for (p, q) in roots {
        us.push([p.clone(), q.clone()]);
        us.push([-p, -q]);
    }
    Ok(Some(us))
}

fn x_images_window(
    p1: &RingPresentation,
    p2: &RingPresentation,
    bound: i64,
) -> Result<Vec<[BigInt; 2]>, IsoError> {
    let target = Target::new(p2);
    let rows = truncation_conditions(p1, &target)?;
    let us: Vec<[BigInt; 2]> = (-bound..=bound)
        .into_par_iter()
        .flat_map_iter(|p| {
            let rows = &rows;
            (-bound..=bound).filter_map(move |q| {
                if p.gcd(&q) != 1 {
                    return None;
                }
                let (pb, qb) = (BigInt::from(p), BigInt::from(q));
                rows.iter()
                    .all(|r| eval_homogeneous(r, &pb, &qb).is_zero())
                    .then_some([pb, qb])
            })
        })
        .collect();
    Ok(us)
}

/// Parameter values `s` for which the family maps the relation (and any extra
/// `(source class, target class)` pairs) correctly.
fn solve_family(
    fam: &Family,
    p1: &RingPresentation,
    target: &Target,
    extra: &[(&GradedPoly, &NormalElement)],
) -> Result<RootSet, IsoError> {
    let mut conditions = fam.expand(p1.relation(), target)?;
    for (g, c2) in extra {
        let mut rows = fam.expand(g, target)?;
        for (row, c) in rows.iter_mut().zip(target.coords(c2.poly())) {
            row[0] -= c;
        }
        conditions.extend(rows);
    }
    Ok(common_integer_roots(&conditions))
}

/// Window of `s` keeping every image coefficient within `[-bound, bound]`.
fn s_window(fam: &Family, bound: i64) -> Option<(i64, i64)> {
    let (mut lo, mut hi) = (-bound, bound);
    if let Shape::Rank2 { u, v0 } = &fam.shape {
        for (ui, vi) in u.iter().zip(v0) {
            let (ui, vi) = (ui.to_i64()?, vi.to_i64()?);
            if ui == 0 {
                if vi.abs() > bound {
                    return None;
                }
                continue;
            }
            // |vi + s ui| <= bound
            let a = Integer::div_ceil(&(-bound - vi), &ui.abs());
            let b = Integer::div_floor(&(bound - vi), &ui.abs());
            let (a, b) = if ui > 0 { (a, b) } else { (-b, -a) };
            lo = lo.max(a);
            hi = hi.min(b);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// A few representative parameter values for a family whose every member
/// works: the ones closest to making the image of `w` small.
fn free_parameter_choices(fam: &Family) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero()];
    if let Shape::Rank2 { u, v0 } = &fam.shape {
        for (ui, vi) in u.iter().zip(v0) {
            if !ui.is_zero() {
                let t = -vi.div_floor(ui);
                for d in -1..=1 {
                    out.push(&t + d);
                }
            }
        }
    }
    out.sort_by(by_size);
    out.dedup();
    out
}

fn best(mut found: Vec<IsoWitness>) -> Option<IsoWitness> {
    found.sort_by_key(|w| w.params.as_ref().map(WitnessParams::key));
    found.into_iter().next()
}

fn require_integers(p1: &RingPresentation, p2: &RingPresentation) -> Result<(), IsoError> {
    if p1.domain() != CoeffDomain::Integers || p2.domain() != CoeffDomain::Integers {
        return Err(IsoError::IntegerDomainRequired);
    }
    Ok(())
}

fn bound_i64(cfg: &SearchConfig) -> i64 {
    i64::try_from(cfg.bound)
        .unwrap_or(i64::MAX / 4)
        .min(i64::MAX / 4)
}

/// Looks for an isomorphism `p1 -> p2`. The returned witness is the smallest
/// one in a fixed canonical order, independent of thread scheduling.
pub fn find_iso(
    p1: &RingPresentation,
    p2: &RingPresentation,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, IsoError> {
    require_integers(p1, p2)?;
    if !structurally_compatible(p1, p2) {
        return Ok(SearchOutcome::NotIsomorphic);
    }
    match cfg.mode {
        SearchMode::Exact => {
            let all = find_all_isos(p1, p2)?;
            if let Some(w) = all.representative() {
                return Ok(SearchOutcome::Found(Box::new(w)));
            }
            if all.complete {
                Ok(SearchOutcome::NotIsomorphic)
            } else {
                find_iso(p1, p2, &cfg.with_mode(SearchMode::Enumerate))
            }
        }
        SearchMode::Enumerate => enumerate(p1, p2, cfg),
    }
}

fn enumerate(
    p1: &RingPresentation,
    p2: &RingPresentation,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, IsoError> {
    let bound = bound_i64(cfg);
    let target = Target::new(p2);
    let us = if p2.basis_in_degree(2).len() == 2 {
        x_images_window(p1, p2, bound)?
    } else {
        Vec::new()
    };
    let fams = families(p1, p2, &us)?;
    let found: Vec<IsoWitness> = fams
        .par_iter()
        .map(|fam| -> Result<Vec<IsoWitness>, IsoError> {
            let conditions = fam.expand(p1.relation(), &target)?;
            let Some((lo, hi)) = s_window(fam, bound) else {
                return Ok(Vec::new());
            };
            let range: Vec<i64> = if fam.dir.is_zero() {
                vec![0]
            } else {
                (lo..=hi).collect()
            };
            Ok(range
                .into_iter()
                .map(BigInt::from)
                .filter(|s| conditions.iter().all(|c| eval_poly(c, s).is_zero()))
                .filter_map(|s| fam.witness(&s, p1, p2))
                .collect())
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(match best(found) {
        Some(w) => SearchOutcome::Found(Box::new(w)),
        None => SearchOutcome::NotFoundWithinBound(cfg.bound),
    })
}

/// Every isomorphism, grouped into one-parameter families.
#[derive(Clone, Debug)]
pub struct IsoFamilies {
    source: RingPresentation,
    target: RingPresentation,
    members: Vec<(Family, RootSet)>,
    /// `false` when the search could not be made exhaustive; an empty result
    /// then proves nothing.
    pub complete: bool,
}

impl IsoFamilies {
    pub fn is_empty(&self) -> bool {
        self.members
            .iter()
            .all(|(_, r)| matches!(r, RootSet::Finite(v) if v.is_empty()))
    }

    /// Number of families with infinitely many members.
    pub fn free_families(&self) -> usize {
        self.members
            .iter()
            .filter(|(_, r)| *r == RootSet::All)
            .count()
    }

    /// All isolated witnesses plus a few representatives of each free family.
    pub fn sample(&self) -> Vec<IsoWitness> {
        let (p1, p2) = (&self.source, &self.target);
        let mut out = Vec::new();
        for (fam, roots) in &self.members {
            let values = match roots {
                RootSet::Finite(v) => v.clone(),
                RootSet::All => free_parameter_choices(fam),
            };
            out.extend(values.iter().filter_map(|s| fam.witness(s, p1, p2)));
        }
        out
    }

    /// The canonical first witness.
    pub fn representative(&self) -> Option<IsoWitness> {
        best(self.sample())
    }

    /// An isomorphism carrying each `c1` to its `c2`, if one exists. Integer
    /// pairs are solved exactly; mod-2 pairs depend only on the parity of the
    /// family parameter and are checked on both residues.
    pub fn preserving(
        &self,
        pairs: &[(&NormalElement, &NormalElement)],
    ) -> Result<Option<IsoWitness>, IsoError> {
        let (p1, p2) = (&self.source, &self.target);
        let target = Target::new(p2);
        let int_pairs: Vec<(&GradedPoly, &NormalElement)> = pairs
            .iter()
            .filter(|(c1, _)| c1.ring().domain() == CoeffDomain::Integers)
            .map(|(c1, c2)| (c1.poly(), *c2))
            .collect();
        let ok = |w: &IsoWitness| -> Result<bool, IsoError> {
            for (c1, c2) in pairs {
                if !check_preserves(w, c1, c2)? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let mut found = Vec::new();
        for (fam, roots) in &self.members {
            let values = match roots {
                RootSet::Finite(v) => v.clone(),
                RootSet::All => match solve_family(fam, p1, &target, &int_pairs)? {
                    RootSet::Finite(v) => v,
                    RootSet::All => vec![BigInt::zero(), BigInt::one()],
                },
            };
            for s in values {
                if let Some(w) = fam.witness(&s, p1, p2) {
                    if ok(&w)? {
                        found.push(w);
                    }
                }
            }
        }
        Ok(best(found))
    }
}

/// Exact solve over all admissible families.
pub fn find_all_isos(
    p1: &RingPresentation,
    p2: &RingPresentation,
) -> Result<IsoFamilies, IsoError> {
    require_integers(p1, p2)?;
    let mut out = IsoFamilies {
        source: p1.clone(),
        target: p2.clone(),
        members: Vec::new(),
        complete: true,
    };
    if !structurally_compatible(p1, p2) {
        return Ok(out);
    }
    let us = if p2.basis_in_degree(2).len() == 2 {
        match x_images_exact(p1, p2)? {
            Some(us) => us,
            None => {
                out.complete = false;
                return Ok(out);
            }
        }
    } else {
        Vec::new()
    };
    let target = Target::new(p2);
    for fam in families(p1, p2, &us)? {
        let roots = if fam.dir.is_zero() {
            match solve_family(&fam, p1, &target, &[])? {
                RootSet::All => RootSet::Finite(vec![BigInt::zero()]),
                RootSet::Finite(_) => RootSet::Finite(Vec::new()),
            }
        } else {
            solve_family(&fam, p1, &target, &[])?
        };
        out.members.push((fam, roots));
    }
    Ok(out)
}
