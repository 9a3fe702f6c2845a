//! Quotient rings `R[x, w] / <x^(l+1), f(x, w)>` with `f` monic in `w`.
//!
//! Every cohomology ring handled by this crate has that shape, so reduction is
//! a two-step affair: rewrite `w^D` using `f`, then truncate powers of `x`
//! above `l`. The surviving monomials `x^a w^b` (`a <= l`, `b < D`) form a
//! basis, which makes normal forms unique and equality syntactic.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intpoly::{generators, CoeffDomain, Generators, GradedPoly, Monomial, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuotientError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("presentation needs exactly two generators, the first of degree 2")]
    BadGenerators,
    #[error("relation is not monic in `{0}`")]
    NonMonic(String),
    #[error("relation is not homogeneous")]
    NotHomogeneous,
    #[error("image of `{name}` must be homogeneous of degree {expected}")]
    ImageDegree { name: String, expected: u32 },
}

/// `Z[x, w] / <x^(ell+1), relation>` (or the same over `F2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingPresentation {
    gens: Generators,
    ell: u32,
    relation: GradedPoly,
    w_exponent: u32,
}

impl RingPresentation {
    /// Validates the relation without reducing it; see [`Self::canonicalize`].
    pub fn raw(ell: u32, relation: GradedPoly) -> Result<Self, QuotientError> {
        let gens = relation.gens().clone();
        if gens.len() != 2 || gens[0].degree != 2 {
            return Err(QuotientError::BadGenerators);
        }
        let w_exponent = relation
            .terms()
            .map(|(m, _)| m.exps()[1])
            .max()
            .unwrap_or(0);
        let monic = {
            let mut leading = relation.terms().filter(|(m, _)| m.exps()[1] == w_exponent);
            match (leading.next(), leading.next()) {
                (Some((m, c)), None) => w_exponent >= 1 && m.exps()[0] == 0 && c.is_one(),
                _ => false,
            }
        };
        if !monic {
            return Err(QuotientError::NonMonic(gens[1].name.clone()));
        }
        if !relation.is_homogeneous() {
            return Err(QuotientError::NotHomogeneous);
        }
        Ok(RingPresentation {
            gens,
            ell,
            relation,
            w_exponent,
        })
    }

    /// Canonical presentation from a relation given in text form.
    pub fn parse(
        x: &str,
        w: &str,
        w_degree: u32,
        ell: u32,
        relation: &str,
        domain: CoeffDomain,
    ) -> Result<Self, QuotientError> {
        let gens = generators(&[(x, 2), (w, w_degree)])?;
        let f = GradedPoly::parse(relation, &gens, domain)?;
        Ok(Self::raw(ell, f)?.canonicalize())
    }

    /// Drops the relation's terms that already vanish modulo `x^(ell+1)`.
    pub fn canonicalize(&self) -> Self {
        let ell = self.ell;
        let relation = self.relation.filter_terms(|m| m.exps()[0] <= ell);
        RingPresentation {
            relation,
            ..self.clone()
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.relation.terms().all(|(m, _)| m.exps()[0] <= self.ell)
    }

    pub fn gens(&self) -> &Generators {
        &self.gens
    }

    pub fn x_name(&self) -> &str {
        &self.gens[0].name
    }

    pub fn w_name(&self) -> &str {
        &self.gens[1].name
    }

    pub fn w_degree(&self) -> u32 {
        self.gens[1].degree
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// The `w`-degree `D` of the monic relation.
    pub fn w_exponent(&self) -> u32 {
        self.w_exponent
    }

    pub fn relation(&self) -> &GradedPoly {
        &self.relation
    }

    pub fn domain(&self) -> CoeffDomain {
        self.relation.domain()
    }

    pub fn x(&self) -> GradedPoly {
        GradedPoly::monomial(&self.gens, self.domain(), &[1, 0], 1).unwrap()
    }

    pub fn w(&self) -> GradedPoly {
        GradedPoly::monomial(&self.gens, self.domain(), &[0, 1], 1).unwrap()
    }

    /// `x^(ell+1)`, the truncation relation.
    pub fn truncation(&self) -> GradedPoly {
        GradedPoly::monomial(&self.gens, self.domain(), &[self.ell + 1, 0], 1).unwrap()
    }

    /// Same presentation with coefficients reduced mod 2.
    pub fn reduce_mod2(&self) -> Self {
        RingPresentation {
            relation: self.relation.reduce_mod2(),
            ..self.clone()
        }
    }

    /// Rank of the ring as a free module: `(ell + 1) * D`.
    pub fn additive_rank(&self) -> usize {
        (self.ell as usize + 1) * self.w_exponent as usize
    }

    /// The monomials `x^a w^b`, `a <= ell`, `b < D`, in canonical order.
    pub fn normal_basis(&self) -> Vec<Monomial> {
        let mut basis: Vec<Monomial> = (0..=self.ell)
            .flat_map(|a| (0..self.w_exponent).map(move |b| [a, b]))
            .map(|e| Monomial::new(&e, &self.gens).unwrap())
            .collect();
        basis.sort();
        basis
    }

    pub fn basis_in_degree(&self, d: u32) -> Vec<Monomial> {
        self.normal_basis()
            .into_iter()
            .filter(|m| m.degree() == d)
            .collect()
    }

    /// Rank of each nonzero graded piece.
    pub fn graded_ranks(&self) -> BTreeMap<u32, usize> {
        let mut ranks = BTreeMap::new();
        for m in self.normal_basis() {
            *ranks.entry(m.degree()).or_insert(0) += 1;
        }
        ranks
    }

    /// Degree of the top basis monomial `x^ell w^(D-1)`.
    pub fn top_degree(&self) -> u32 {
        2 * self.ell + (self.w_exponent - 1) * self.w_degree()
    }

    fn check_element(&self, p: &GradedPoly) -> Result<(), QuotientError> {
        if p.gens() != &self.gens {
            return Err(PolyError::GeneratorMismatch.into());
        }
        if p.domain() != self.domain() {
            return Err(PolyError::DomainMismatch.into());
        }
        Ok(())
    }

    /// Unique representative of `p` in the normal basis.
    pub fn normal_form(&self, p: &GradedPoly) -> Result<NormalElement, QuotientError> {
        self.check_element(p)?;
        let big_d = self.w_exponent;
        let tail: Vec<(u32, u32, BigInt)> = self
            .relation
            .terms()
            .filter(|(m, _)| m.exps()[1] < big_d)
            .map(|(m, c)| (m.exps()[0], m.exps()[1], c.clone()))
            .collect();

        // keyed by (w-exponent, x-exponent) so the last entry has the highest w power
        let mut work: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
        let put = |work: &mut BTreeMap<(u32, u32), BigInt>, key: (u32, u32), c: BigInt| {
            if key.1 > self.ell {
                return;
            }
            let entry = work.entry(key).or_insert_with(BigInt::zero);
            *entry += c;
            if entry.is_zero() {
                work.remove(&key);
            }
        };
        for (m, c) in p.terms() {
            put(&mut work, (m.exps()[1], m.exps()[0]), c.clone());
        }
        while let Some((&(b, a), _)) = work.last_key_value() {
            if b < big_d {
                break;
            }
            let c = work.remove(&(b, a)).unwrap();
            // x^a w^b = x^a w^(b-D) (w^D - f)
            for (fa, fb, fc) in &tail {
                put(&mut work, (b - big_d + fb, a + fa), -(&c * fc));
            }
        }
        let poly = GradedPoly::from_terms(
            &self.gens,
            self.domain(),
            work.into_iter().map(|((b, a), c)| (vec![a, b], c)),
        )?;
        Ok(NormalElement {
            ring: self.clone(),
            poly,
        })
    }

    pub fn ring_equal(&self, p: &GradedPoly, q: &GradedPoly) -> Result<bool, QuotientError> {
        Ok(self.normal_form(p)? == self.normal_form(q)?)
    }

    /// JSON form: `{"gens":[["x",2],["z",8]],"ell":3,"relation":"z^2"}`.
    pub fn to_json(&self) -> PresentationJson {
        PresentationJson {
            gens: self
                .gens
                .iter()
                .map(|g| (g.name.clone(), g.degree))
                .collect(),
            ell: self.ell,
            relation: self.relation.to_string(),
            domain: self.domain(),
        }
    }

    pub fn from_json(json: &PresentationJson) -> Result<Self, QuotientError> {
        let [(x, 2), (w, wd)] = json.gens.as_slice() else {
            return Err(QuotientError::BadGenerators);
        };
        Self::parse(x, w, *wd, json.ell, &json.relation, json.domain)
    }
}

impl fmt::Display for RingPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.domain() {
            CoeffDomain::Integers => "Z",
            CoeffDomain::Mod2 => "F2",
        };
        write!(
            f,
            "{base}[{},{}]/<{}^{}, {}>",
            self.x_name(),
            self.w_name(),
            self.x_name(),
            self.ell + 1,
            self.relation
        )
    }
}

fn is_integers(d: &CoeffDomain) -> bool {
    *d == CoeffDomain::Integers
}

fn integers() -> CoeffDomain {
    CoeffDomain::Integers
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationJson {
    pub gens: Vec<(String, u32)>,
    pub ell: u32,
    pub relation: String,
    #[serde(default = "integers", skip_serializing_if = "is_integers")]
    pub domain: CoeffDomain,
}

/// An element of a presented ring, stored in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalElement {
    ring: RingPresentation,
    poly: GradedPoly,
}

impl NormalElement {
    pub fn ring(&self) -> &RingPresentation {
        &self.ring
    }

    pub fn poly(&self) -> &GradedPoly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, other: &NormalElement) -> Result<NormalElement, QuotientError> {
        self.ring.normal_form(&self.poly.add(&other.poly)?)
    }

    pub fn mul(&self, other: &NormalElement) -> Result<NormalElement, QuotientError> {
        self.ring.normal_form(&self.poly.mul(&other.poly)?)
    }

    /// Coefficients of this element on the degree-`d` part of the normal basis.
    pub fn coordinates(&self, d: u32) -> Vec<BigInt> {
        self.ring
            .basis_in_degree(d)
            .iter()
            .map(|m| self.poly.coefficient(m.exps()))
            .collect()
    }
}

impl fmt::Display for NormalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

/// Applies the ring map sending the `i`-th generator of `p`'s ring to
/// `images[i]`, then reduces in `target`. Integer images are reduced mod 2
/// when `target` is a mod-2 ring.
pub fn evaluate_hom(
    images: &[GradedPoly],
    p: &GradedPoly,
    target: &RingPresentation,
) -> Result<NormalElement, QuotientError> {
    for (g, img) in p.gens().iter().zip(images) {
        if !img.is_zero() && img.degrees().into_iter().ne([g.degree]) {
            return Err(QuotientError::ImageDegree {
                name: g.name.clone(),
                expected: g.degree,
            });
        }
    }
    let images: Vec<GradedPoly> = match target.domain() {
        CoeffDomain::Mod2 => images.iter().map(GradedPoly::reduce_mod2).collect(),
        CoeffDomain::Integers => images.to_vec(),
    };
    target.normal_form(&p.substitute(&images)?)
}
