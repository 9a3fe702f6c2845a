//! Closed-form cohomology rings and characteristic classes of the `A` and `B`
//! families, read off directly from the parameters.

use serde::Serialize;

use crate::descriptor::{Family, ManifoldDescriptor};
use crate::intpoly::{generators, CoeffDomain, Generators, GradedPoly};
use crate::quotient::{NormalElement, PresentationJson, RingPresentation};

/// Real dimension: `2(l+k1+k2-1)` for `A`, `2(l+k1+k2)` for `B`.
pub fn dimension(d: &ManifoldDescriptor) -> u32 {
    match d.family() {
        Family::A => 2 * (d.ell() + d.fiber_sum() - 1),
        Family::B => 2 * (d.ell() + d.fiber_sum()),
    }
}

/// Degree of the second generator: 2 for `A`, `2 k1` for `B` with `k2 = 0`,
/// otherwise `2(k1 + k2)`.
pub fn fiber_class_degree(d: &ManifoldDescriptor) -> u32 {
    match d.family() {
        Family::A => 2,
        Family::B if d.k2() == 0 => 2 * d.k1(),
        Family::B => 2 * d.fiber_sum(),
    }
}

fn ring_gens(d: &ManifoldDescriptor) -> Generators {
    let w = match d.family() {
        Family::A => "y",
        Family::B => "z",
    };
    generators(&[("x", 2), (w, fiber_class_degree(d))]).unwrap()
}

fn lin(gens: &Generators, domain: CoeffDomain, c0: i64, cx: i64, cw: i64) -> GradedPoly {
    GradedPoly::from_terms(
        gens,
        domain,
        [(vec![0, 0], c0), (vec![1, 0], cx), (vec![0, 1], cw)],
    )
    .unwrap()
}

/// The unreduced relation `f`: `y^k2 (y + rho x)^k1`, `z (z + (rho x)^k1)` or `z^2`.
pub fn relation(d: &ManifoldDescriptor) -> GradedPoly {
    let gens = ring_gens(d);
    let int = CoeffDomain::Integers;
    let w = GradedPoly::var(&gens, int, &gens[1].name).unwrap();
    match d.family() {
        Family::A => {
            let shifted = lin(&gens, int, 0, d.rho(), 1);
            w.pow(d.k2()).mul(&shifted.pow(d.k1())).unwrap()
        }
        Family::B if d.k2() == 0 => {
            let twist = GradedPoly::monomial(&gens, int, &[1, 0], d.rho())
                .unwrap()
                .pow(d.k1());
            w.mul(&w.add(&twist).unwrap()).unwrap()
        }
        Family::B => w.pow(2),
    }
}

pub fn cohomology(d: &ManifoldDescriptor) -> RingPresentation {
    RingPresentation::raw(d.ell(), relation(d))
        .expect("family relations are monic and homogeneous")
        .canonicalize()
}

/// Unreduced total Pontrjagin class as an integer polynomial.
pub fn pontrjagin_product(d: &ManifoldDescriptor) -> GradedPoly {
    let gens = ring_gens(d);
    let int = CoeffDomain::Integers;
    let x = lin(&gens, int, 0, 1, 0);
    let one = GradedPoly::one(&gens, int);
    let sq_plus_one = |p: &GradedPoly| one.add(&p.mul(p).unwrap()).unwrap();
    let base = sq_plus_one(&x).pow(d.ell() + 1);
    match d.family() {
        Family::A => {
            let shifted = lin(&gens, int, 0, d.rho(), 1);
            let y = lin(&gens, int, 0, 0, 1);
            base.mul(&sq_plus_one(&shifted).pow(d.k1()))
                .and_then(|p| p.mul(&sq_plus_one(&y).pow(d.k2())))
                .unwrap()
        }
        Family::B => base
            .mul(&sq_plus_one(&lin(&gens, int, 0, d.rho(), 0)).pow(d.k1()))
            .unwrap(),
    }
}

/// Integer lift of the total Stiefel-Whitney product, before reduction mod 2.
pub fn stiefel_whitney_product(d: &ManifoldDescriptor) -> GradedPoly {
    let gens = ring_gens(d);
    let int = CoeffDomain::Integers;
    let base = lin(&gens, int, 1, 1, 0).pow(d.ell() + 1);
    match d.family() {
        Family::A => base
            .mul(&lin(&gens, int, 1, d.rho(), 1).pow(d.k1()))
            .and_then(|p| p.mul(&lin(&gens, int, 1, 0, 1).pow(d.k2())))
            .unwrap(),
        Family::B => base
            .mul(&lin(&gens, int, 1, d.rho(), 0).pow(d.k1()))
            .unwrap(),
    }
}

pub fn pontrjagin(d: &ManifoldDescriptor) -> NormalElement {
    cohomology(d).normal_form(&pontrjagin_product(d)).unwrap()
}

pub fn stiefel_whitney(d: &ManifoldDescriptor) -> NormalElement {
    cohomology(d)
        .reduce_mod2()
        .normal_form(&stiefel_whitney_product(d).reduce_mod2())
        .unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharClassReport {
    pub descriptor: ManifoldDescriptor,
    pub dimension: u32,
    pub cohomology: RingPresentation,
    pub pontrjagin: NormalElement,
    pub stiefel_whitney: NormalElement,
}

pub fn report(d: &ManifoldDescriptor) -> CharClassReport {
    CharClassReport {
        descriptor: *d,
        dimension: dimension(d),
        cohomology: cohomology(d),
        pontrjagin: pontrjagin(d),
        stiefel_whitney: stiefel_whitney(d),
    }
}

#[derive(Serialize)]
pub struct ReportJson {
    pub descriptor: ManifoldDescriptor,
    pub dimension: u32,
    pub cohomology: PresentationJson,
    pub pontrjagin: String,
    pub stiefel_whitney: String,
}

impl CharClassReport {
    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            descriptor: self.descriptor,
            dimension: self.dimension,
            cohomology: self.cohomology.to_json(),
            pontrjagin: self.pontrjagin.to_string(),
            stiefel_whitney: self.stiefel_whitney.to_string(),
        }
    }
}
