//! Exact multivariate polynomials over the integers or the two-element field.
//!
//! Generators carry even cohomological degrees. Terms are kept in a sorted map
//! keyed by [`Monomial`], whose order is ascending total degree and, within a
//! degree, descending lexicographic order on exponent vectors. That order is
//! the one used by the canonical text form (`1 + 8*x^2 + 22*x^4`).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffDomain {
    Integers,
    Mod2,
}

impl CoeffDomain {
    /// Brings an integer into canonical form for this domain (`0` or `1` for `Mod2`).
    pub fn normalize(self, c: BigInt) -> BigInt {
        match self {
            CoeffDomain::Integers => c,
            CoeffDomain::Mod2 => c.mod_floor(&BigInt::from(2)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

/// Shared, ordered generator list. Cloning a polynomial never copies it.
pub type Generators = Arc<[Generator]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("generator lists differ")]
    GeneratorMismatch,
    #[error("coefficient domains differ")]
    DomainMismatch,
    #[error("generator `{name}` has degree {degree}; degrees must be even and positive")]
    InvalidDegree { name: String, degree: u32 },
    #[error("generator `{0}` appears twice")]
    DuplicateGenerator(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("exponent vector has {found} entries, expected {expected}")]
    ExponentArity { expected: usize, found: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("expected {expected} generator images, got {found}")]
    ImageCount { expected: usize, found: usize },
}

/// Builds a validated generator list from `(name, degree)` pairs.
pub fn generators(list: &[(&str, u32)]) -> Result<Generators, PolyError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(list.len());
    for &(name, degree) in list {
        if degree == 0 || degree % 2 != 0 {
            return Err(PolyError::InvalidDegree {
                name: name.to_string(),
                degree,
            });
        }
        if !seen.insert(name) {
            return Err(PolyError::DuplicateGenerator(name.to_string()));
        }
        out.push(Generator {
            name: name.to_string(),
            degree,
        });
    }
    Ok(out.into())
}

/// Exponent vector together with its cohomological degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u32]>,
}

impl Monomial {
    pub fn new(exps: &[u32], gens: &[Generator]) -> Result<Self, PolyError> {
        if exps.len() != gens.len() {
            return Err(PolyError::ExponentArity {
                expected: gens.len(),
                found: exps.len(),
            });
        }
        let degree = exps.iter().zip(gens).map(|(e, g)| e * g.degree).sum();
        Ok(Monomial {
            degree,
            exps: exps.into(),
        })
    }

    pub fn one(n: usize) -> Self {
        Monomial {
            degree: 0,
            exps: vec![0; n].into(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let exps: Box<[u32]> = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(a, b)| a + b)
            .collect();
        Monomial {
            degree: self.degree + other.degree,
            exps,
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedPoly {
    gens: Generators,
    domain: CoeffDomain,
    terms: BTreeMap<Monomial, BigInt>,
}

impl GradedPoly {
    pub fn zero(gens: &Generators, domain: CoeffDomain) -> Self {
        GradedPoly {
            gens: gens.clone(),
            domain,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(gens: &Generators, domain: CoeffDomain) -> Self {
        Self::constant(gens, domain, BigInt::one())
    }

    pub fn constant(gens: &Generators, domain: CoeffDomain, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(gens, domain);
        p.add_term(Monomial::one(gens.len()), c.into());
        p
    }

    /// The generator called `name`, as a polynomial.
    pub fn var(gens: &Generators, domain: CoeffDomain, name: &str) -> Result<Self, PolyError> {
        let idx = gens
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| PolyError::UnknownGenerator(name.to_string()))?;
        let mut exps = vec![0; gens.len()];
        exps[idx] = 1;
        Self::monomial(gens, domain, &exps, 1)
    }

    pub fn monomial(
        gens: &Generators,
        domain: CoeffDomain,
        exps: &[u32],
        c: impl Into<BigInt>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(gens, domain);
        p.add_term(Monomial::new(exps, gens)?, c.into());
        Ok(p)
    }

    pub fn from_terms<I, C>(
        gens: &Generators,
        domain: CoeffDomain,
        terms: I,
    ) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(gens, domain);
        for (exps, c) in terms {
            p.add_term(Monomial::new(&exps, gens)?, c.into());
        }
        Ok(p)
    }

    pub fn gens(&self) -> &Generators {
        &self.gens
    }

    pub fn domain(&self) -> CoeffDomain {
        self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (ascending graded, then descending lex) order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        Monomial::new(exps, &self.gens)
            .ok()
            .and_then(|m| self.terms.get(&m).cloned())
            .unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&Monomial::one(self.gens.len()))
            .cloned()
            .unwrap_or_default()
    }

    /// Distinct degrees of the nonzero terms.
    pub fn degrees(&self) -> BTreeSet<u32> {
        self.terms.keys().map(Monomial::degree).collect()
    }

    pub fn top_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degrees().len() <= 1
    }

    /// Adds `c * mono` in place, pruning zeros.
    pub fn add_term(&mut self, mono: Monomial, c: BigInt) {
        let c = self.domain.normalize(c);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = self.domain.normalize(o.get() + c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_compatible(&self, other: &GradedPoly) -> Result<(), PolyError> {
        if !Arc::ptr_eq(&self.gens, &other.gens) && self.gens != other.gens {
            return Err(PolyError::GeneratorMismatch);
        }
        if self.domain != other.domain {
            return Err(PolyError::DomainMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedPoly) -> Result<GradedPoly, PolyError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GradedPoly) -> Result<GradedPoly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GradedPoly {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, k: &BigInt) -> GradedPoly {
        let mut out = Self::zero(&self.gens, self.domain);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &GradedPoly) -> Result<GradedPoly, PolyError> {
        self.check_compatible(other)?;
        let mut out = Self::zero(&self.gens, self.domain);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// `self^e` by repeated squaring; `p^0 = 1`.
    pub fn pow(&self, e: u32) -> GradedPoly {
        let mut result = Self::one(&self.gens, self.domain);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same ring");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same ring");
            }
        }
        result
    }

    /// Coefficients taken mod 2. Already-mod-2 input is returned unchanged.
    pub fn reduce_mod2(&self) -> GradedPoly {
        let mut out = Self::zero(&self.gens, CoeffDomain::Mod2);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Sum of the terms of degree exactly `d`.
    pub fn graded_component(&self, d: u32) -> GradedPoly {
        let mut out = Self::zero(&self.gens, self.domain);
        for (m, c) in self.terms.iter().filter(|(m, _)| m.degree == d) {
            out.terms.insert(m.clone(), c.clone());
        }
        out
    }

    /// Keeps only the terms for which `keep` holds.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Monomial) -> bool) -> GradedPoly {
        let mut out = Self::zero(&self.gens, self.domain);
        for (m, c) in self.terms.iter().filter(|(m, _)| keep(m)) {
            out.terms.insert(m.clone(), c.clone());
        }
        out
    }

    /// Substitutes `images[i]` for the `i`-th generator. The result lives in the
    /// images' ring; integer coefficients are reduced when the images are mod 2.
    pub fn substitute(&self, images: &[GradedPoly]) -> Result<GradedPoly, PolyError> {
        if images.len() != self.gens.len() {
            return Err(PolyError::ImageCount {
                expected: self.gens.len(),
                found: images.len(),
            });
        }
        let Some(first) = images.first() else {
            return Ok(self.clone());
        };
        for img in images {
            first.check_compatible(img)?;
        }
        if self.domain == CoeffDomain::Mod2 && first.domain == CoeffDomain::Integers {
            return Err(PolyError::DomainMismatch);
        }
        let mut powers: Vec<Vec<GradedPoly>> = images
            .iter()
            .map(|img| vec![GradedPoly::one(&first.gens, first.domain), img.clone()])
            .collect();
        let mut out = GradedPoly::zero(&first.gens, first.domain);
        for (m, c) in &self.terms {
            let mut term = GradedPoly::constant(&first.gens, first.domain, c.clone());
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i])?;
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Parses the canonical text form (`1 + 8*x^2 - 3*x*y`) over `gens`.
    pub fn parse(
        text: &str,
        gens: &Generators,
        domain: CoeffDomain,
    ) -> Result<GradedPoly, PolyError> {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            gens,
            domain,
        }
        .parse_poly()
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if m.degree == 0 || !mag.is_one() {
                factors.push(mag.to_string());
            }
            for (g, &e) in self.gens.iter().zip(m.exps.iter()) {
                match e {
                    0 => {}
                    1 => factors.push(g.name.clone()),
                    _ => factors.push(format!("{}^{}", g.name, e)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    gens: &'a Generators,
    domain: CoeffDomain,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(digits.parse().unwrap())
    }

    fn parse_poly(&mut self) -> Result<GradedPoly, PolyError> {
        let mut out = GradedPoly::zero(self.gens, self.domain);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None if first => return self.err("empty polynomial"),
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    BigInt::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    BigInt::from(-1)
                }
                Some(_) if first => BigInt::one(),
                Some(_) => return self.err("expected `+` or `-`"),
            };
            first = false;
            let (mono, c) = self.parse_term()?;
            out.add_term(mono, sign * c);
        }
        Ok(out)
    }

    fn parse_term(&mut self) -> Result<(Monomial, BigInt), PolyError> {
        let mut coeff = BigInt::one();
        let mut exps = vec![0u32; self.gens.len()];
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_digit() => coeff *= self.number()?,
                Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric()
                            || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let Some(idx) = self.gens.iter().position(|g| g.name == name) else {
                        self.pos = start;
                        return self.err(format!("unknown generator `{name}`"));
                    };
                    let e = if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let n = self.number()?;
                        u32::try_from(n).or_else(|_| self.err("exponent too large"))?
                    } else {
                        1
                    };
                    exps[idx] += e;
                }
                _ => return self.err("expected a number or generator"),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((Monomial::new(&exps, self.gens)?, coeff))
    }
}
