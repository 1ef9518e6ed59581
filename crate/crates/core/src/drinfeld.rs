//! Drinfeld modules over A = F_q[x] and A' = F_q[y] in standard form, the
//! cover x = p(y), restriction of coefficients and scalar isomorphisms.

use std::fmt;

use thiserror::Error;

use crate::ff::{FfError, FieldElement, FieldTower};
use crate::poly::{Degree, Poly};
use crate::report::VerificationReport;
use crate::skew::{substitute, SkewError, SkewPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DrinfeldError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("module fails verification: {0}")]
    Unverified(String),
    #[error(transparent)]
    Skew(#[from] SkewError),
    #[error(transparent)]
    Field(#[from] FfError),
}

impl DrinfeldError {
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(
            self,
            DrinfeldError::Field(FfError::CapExceeded { .. })
                | DrinfeldError::Skew(SkewError::Field(FfError::CapExceeded { .. }))
        )
    }
}

/// Which coefficient ring the module is over: A = F_q[x] or A' = F_q[y].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingTag {
    A,
    APrime,
}

impl RingTag {
    pub fn variable(self) -> &'static str {
        match self {
            RingTag::A => "x",
            RingTag::APrime => "y",
        }
    }
}

/// A Drinfeld module given by the image of the ring generator.
///
/// The constructor does not validate; see [`DrinfeldModule::verify_standard_form`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DrinfeldModule {
    ring: RingTag,
    gen_image: SkewPoly,
    rank: usize,
    characteristic: FieldElement,
}

impl fmt::Debug for DrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ↦ {} (rank {}, characteristic {})",
            self.ring.variable(),
            self.gen_image,
            self.rank,
            self.tower().format(self.characteristic)
        )
    }
}

impl DrinfeldModule {
    pub fn new(
        ring: RingTag,
        gen_image: SkewPoly,
        rank: usize,
        characteristic: FieldElement,
    ) -> DrinfeldModule {
        DrinfeldModule {
            ring,
            gen_image,
            rank,
            characteristic,
        }
    }

    /// The module whose rank and characteristic are read off `gen_image`.
    pub fn from_generator(ring: RingTag, gen_image: SkewPoly) -> Result<DrinfeldModule, DrinfeldError> {
        let rank = match gen_image.degree() {
            Degree::Finite(r) if r >= 1 => r,
            d => {
                return Err(DrinfeldError::Unverified(format!(
                    "generator image has τ-degree {d}, rank must be positive"
                )))
            }
        };
        let characteristic = gen_image.coeff(0);
        Ok(DrinfeldModule::new(ring, gen_image, rank, characteristic))
    }

    pub fn tower(&self) -> &FieldTower {
        self.gen_image.tower()
    }

    pub fn ring(&self) -> RingTag {
        self.ring
    }

    pub fn gen_image(&self) -> &SkewPoly {
        &self.gen_image
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn characteristic(&self) -> FieldElement {
        self.characteristic
    }

    pub fn verify_standard_form(&self) -> VerificationReport {
        let t = self.tower();
        let var = self.ring.variable();
        let mut rep = VerificationReport::new(format!("Drinfeld module over F_q[{var}]"));
        let in_tower = t.contains(self.characteristic);
        rep.check(
            "characteristic lies in K",
            in_tower,
            if in_tower { "" } else { "characteristic belongs to another field" },
        );
        rep.check("rank is positive", self.rank >= 1, format!("rank {}", self.rank));
        let deg = self.gen_image.degree();
        rep.check(
            "degree equals rank",
            deg == Degree::Finite(self.rank),
            format!("deg φ({var}) = {deg}, claimed rank {}", self.rank),
        );
        let lead_ok = self.gen_image.leading().is_some_and(|l| !l.is_zero());
        rep.check("leading coefficient is a unit", lead_ok, "");
        let c0 = self.gen_image.coeff(0);
        let c0_ok = in_tower && c0 == self.characteristic;
        rep.check(
            "constant coefficient equals characteristic",
            c0_ok,
            if c0_ok {
                String::new()
            } else if in_tower {
                format!(
                    "δ_0 = {}, characteristic {}",
                    t.format(c0),
                    t.format(self.characteristic)
                )
            } else {
                "characteristic not comparable".to_string()
            },
        );
        rep
    }

    fn require_verified(&self) -> Result<(), DrinfeldError> {
        let rep = self.verify_standard_form();
        let failure = rep.failures().next().map(|c| c.name.clone());
        match failure {
            None => Ok(()),
            Some(name) => Err(DrinfeldError::Unverified(name)),
        }
    }

    /// φ(a) for a polynomial `a` with F_q coefficients in the ring variable.
    pub fn evaluate_at(&self, a: &Poly) -> Result<SkewPoly, DrinfeldError> {
        self.require_verified()?;
        let a = lift_central(a, self.tower())?;
        Ok(substitute(&a, &self.gen_image)?)
    }

    /// The A-module y ↦ φ'(y) composed with x ↦ p(y).
    pub fn restrict(&self, cover: &CoverMap) -> Result<DrinfeldModule, DrinfeldError> {
        if self.ring != RingTag::APrime {
            return Err(DrinfeldError::ShapeMismatch(
                "restriction needs a module over F_q[y]".into(),
            ));
        }
        self.require_verified()?;
        let p = cover.poly_over(self.tower())?;
        let gen_image = substitute(&p, &self.gen_image)?;
        Ok(DrinfeldModule::new(
            RingTag::A,
            gen_image,
            cover.degree() * self.rank,
            p.eval(self.characteristic),
        ))
    }

    /// The same module over a larger field.
    pub fn base_change(&self, target: &FieldTower) -> Result<DrinfeldModule, DrinfeldError> {
        let emb = self.tower().embedding_into(target)?;
        Ok(DrinfeldModule::new(
            self.ring,
            self.gen_image.embed(&emb)?,
            self.rank,
            emb.apply(self.characteristic)?,
        ))
    }

    /// The module `ε⁻¹ φ ε`, isomorphic to `self` via ε.
    pub fn conjugate(&self, eps: FieldElement) -> Result<DrinfeldModule, DrinfeldError> {
        Ok(DrinfeldModule::new(
            self.ring,
            self.gen_image.conjugate(eps)?,
            self.rank,
            self.characteristic,
        ))
    }
}

/// Rewrites a polynomial with F_q coefficients over another tower sharing F_q.
pub(crate) fn lift_central(a: &Poly, target: &FieldTower) -> Result<Poly, DrinfeldError> {
    if a.tower() == target {
        return Ok(a.clone());
    }
    let src = a.tower();
    if !src.same_base(target) {
        return Err(DrinfeldError::Field(FfError::TowerMismatch));
    }
    let coeffs = a
        .coeffs()
        .iter()
        .enumerate()
        .map(|(index, &c)| {
            if !src.is_in_base(c) {
                return Err(DrinfeldError::Skew(SkewError::NonCentralCoefficient { index }));
            }
            Ok(target.element(c.value())?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Poly::new(target, coeffs))
}

/// The cover `P¹ → P¹` given by `x = p(y)` with `p` monic over F_q.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CoverMap {
    p_poly: Poly,
}

impl fmt::Debug for CoverMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x = {}", self.p_poly.display("y"))
    }
}

impl CoverMap {
    pub fn new(p_poly: Poly) -> Result<CoverMap, DrinfeldError> {
        let t = p_poly.tower();
        if p_poly.degree() < Degree::Finite(1) {
            return Err(DrinfeldError::InvalidCover("degree must be at least 1".into()));
        }
        if p_poly.leading() != Some(t.one()) {
            return Err(DrinfeldError::InvalidCover("p(Y) must be monic".into()));
        }
        if let Some(i) = p_poly.coeffs().iter().position(|&c| !t.is_in_base(c)) {
            return Err(DrinfeldError::InvalidCover(format!(
                "coefficient {i} does not lie in F_q"
            )));
        }
        Ok(CoverMap { p_poly })
    }

    /// The identity cover `x = y`.
    pub fn identity(tower: &FieldTower) -> CoverMap {
        CoverMap {
            p_poly: Poly::x(tower),
        }
    }

    pub fn poly(&self) -> &Poly {
        &self.p_poly
    }

    pub fn degree(&self) -> usize {
        self.p_poly.degree().finite().expect("cover has positive degree")
    }

    /// `p` with coefficients placed in `tower` (which must share F_q).
    pub fn poly_over(&self, tower: &FieldTower) -> Result<Poly, DrinfeldError> {
        lift_central(&self.p_poly, tower)
    }

    /// π(a) = p(a) for a point of the affine line.
    pub fn map_point(&self, tower: &FieldTower, a: FieldElement) -> Result<FieldElement, DrinfeldError> {
        Ok(self.poly_over(tower)?.eval(a))
    }

    /// π*(a) = a(p(y)) for `a` in A.
    pub fn pullback(&self, a: &Poly) -> Result<Poly, DrinfeldError> {
        let t = a.tower();
        let p = self.poly_over(t)?;
        Ok(a
            .coeffs()
            .iter()
            .rev()
            .fold(Poly::zero(t), |acc, &c| &(&acc * &p) + &Poly::constant(t, c)))
    }
}

fn check_shapes(m1: &DrinfeldModule, m2: &DrinfeldModule) -> Result<(), DrinfeldError> {
    if m1.tower() != m2.tower() {
        return Err(DrinfeldError::ShapeMismatch("modules over different fields".into()));
    }
    if m1.ring != m2.ring {
        return Err(DrinfeldError::ShapeMismatch("modules over different rings".into()));
    }
    if m1.rank != m2.rank {
        return Err(DrinfeldError::ShapeMismatch(format!(
            "ranks {} and {}",
            m1.rank, m2.rank
        )));
    }
    if m1.characteristic != m2.characteristic {
        return Err(DrinfeldError::ShapeMismatch("different characteristics".into()));
    }
    Ok(())
}

/// All ε in K^× with ε·φ₁ = φ₂·ε, in canonical order.
///
/// Coefficientwise this reads `ε^(q^i - 1) = δ_{1,i} / δ_{2,i}`; an index
/// where exactly one side vanishes has no solution.
pub fn iso_solver(m1: &DrinfeldModule, m2: &DrinfeldModule) -> Result<Vec<FieldElement>, DrinfeldError> {
    check_shapes(m1, m2)?;
    let t = m1.tower();
    let q_order = t.size() - 1;
    let len = m1.gen_image.coeffs().len().max(m2.gen_image.coeffs().len());
    let mut candidates: Option<Vec<FieldElement>> = None;
    for i in 0..len {
        let (a, b) = (m1.gen_image.coeff(i), m2.gen_image.coeff(i));
        match (a.is_zero(), b.is_zero()) {
            (true, true) => continue,
            (true, false) | (false, true) => return Ok(Vec::new()),
            (false, false) => {}
        }
        let ratio = t.div(a, b)?;
        // exponent q^i - 1 reduced mod Q - 1
        let n = (t.frobenius_exponent(i as u64) + q_order - 1) % q_order;
        let sols = t.power_preimages(n, ratio);
        candidates = Some(match candidates {
            None => sols,
            Some(prev) => prev.into_iter().filter(|e| sols.binary_search(e).is_ok()).collect(),
        });
        if candidates.as_ref().is_some_and(Vec::is_empty) {
            return Ok(Vec::new());
        }
    }
    Ok(candidates.unwrap_or_else(|| t.units().collect()))
}

/// Aut(φ) with a check of the group axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutGroup {
    pub elements: Vec<FieldElement>,
    pub contains_identity: bool,
    pub closed_under_products: bool,
    pub closed_under_inverses: bool,
}

impl AutGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_group(&self) -> bool {
        self.contains_identity && self.closed_under_products && self.closed_under_inverses
    }
}

pub fn aut_group(m: &DrinfeldModule) -> Result<AutGroup, DrinfeldError> {
    let elements = iso_solver(m, m)?;
    let t = m.tower();
    let has = |e: &FieldElement| elements.binary_search(e).is_ok();
    let contains_identity = has(&t.one());
    let closed_under_products = elements
        .iter()
        .all(|&a| elements.iter().all(|&b| has(&t.mul(a, b))));
    let closed_under_inverses = elements
        .iter()
        .all(|&a| t.inv(a).is_ok_and(|b| has(&b)));
    Ok(AutGroup {
        elements,
        contains_identity,
        closed_under_products,
        closed_under_inverses,
    })
}

/// Smallest `s ≤ s_max` such that the modules become isomorphic over the
/// degree-`s` extension of K.
pub fn twist_min_degree(
    m1: &DrinfeldModule,
    m2: &DrinfeldModule,
    s_max: usize,
    field_cap: u64,
) -> Result<Option<usize>, DrinfeldError> {
    check_shapes(m1, m2)?;
    for s in 1..=s_max {
        let ext = m1.tower().extension(s, field_cap)?;
        let (a, b) = (m1.base_change(&ext)?, m2.base_change(&ext)?);
        if !iso_solver(&a, &b)?.is_empty() {
            return Ok(Some(s));
        }
    }
    Ok(None)
}
