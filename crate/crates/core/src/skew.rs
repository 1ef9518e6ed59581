//! The twisted polynomial ring K{τ} with τ·b = b^q·τ.
//!
//! A skew polynomial `Σ δ_i τ^i` acts on K as the additive, F_q-linear map
//! `x ↦ Σ δ_i x^(q^i)`, and composition of these maps is the skew product.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::ff::{Embedding, FfError, FieldElement, FieldTower};
use crate::poly::{Degree, Poly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkewError {
    #[error("operands live over different field towers")]
    TowerMismatch,
    #[error("coefficient {index} of the substituted polynomial is not in F_q")]
    NonCentralCoefficient { index: usize },
    #[error("conjugating element must be nonzero")]
    ZeroConjugator,
    #[error(transparent)]
    Field(#[from] FfError),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SkewPoly {
    tower: FieldTower,
    coeffs: Vec<FieldElement>,
}

impl PartialOrd for SkewPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: lexicographic on coefficients, constant term first.
impl Ord for SkewPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}

impl fmt::Debug for SkewPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SkewPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let t = &self.tower;
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = t.format(c);
            let cs = if cs.contains(" + ") { format!("({cs})") } else { cs };
            let mono = match i {
                0 => String::new(),
                1 => "τ".to_string(),
                _ => format!("τ^{i}"),
            };
            terms.push(match (i, cs.as_str()) {
                (0, _) => cs,
                (_, "1") => mono,
                _ => format!("{cs}{mono}"),
            });
        }
        write!(f, "{}", terms.join(" + "))
    }
}

impl SkewPoly {
    pub fn new(tower: &FieldTower, mut coeffs: Vec<FieldElement>) -> SkewPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        SkewPoly {
            tower: tower.clone(),
            coeffs,
        }
    }

    pub fn zero(tower: &FieldTower) -> SkewPoly {
        SkewPoly::new(tower, Vec::new())
    }

    pub fn one(tower: &FieldTower) -> SkewPoly {
        SkewPoly::constant(tower, tower.one())
    }

    pub fn constant(tower: &FieldTower, c: FieldElement) -> SkewPoly {
        SkewPoly::new(tower, vec![c])
    }

    /// `c τ^i`.
    pub fn monomial(tower: &FieldTower, c: FieldElement, i: usize) -> SkewPoly {
        let mut coeffs = vec![tower.zero(); i + 1];
        coeffs[i] = c;
        SkewPoly::new(tower, coeffs)
    }

    pub fn tau(tower: &FieldTower) -> SkewPoly {
        SkewPoly::monomial(tower, tower.one(), 1)
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).copied().unwrap_or_else(|| self.tower.zero())
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::NegInfinity,
            n => Degree::Finite(n - 1),
        }
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Product in K{τ}; fails on mismatched towers.
    pub fn try_mul(&self, rhs: &SkewPoly) -> Result<SkewPoly, SkewError> {
        if self.tower != rhs.tower {
            return Err(SkewError::TowerMismatch);
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &SkewPoly) -> SkewPoly {
        let t = &self.tower;
        if self.is_zero() || rhs.is_zero() {
            return SkewPoly::zero(t);
        }
        let mut out = vec![t.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                // (a τ^i)(b τ^j) = a b^(q^i) τ^(i+j)
                out[i + j] = t.add(out[i + j], t.mul(a, t.frobenius(b, i as u64)));
            }
        }
        SkewPoly::new(t, out)
    }

    pub fn pow(&self, mut k: u32) -> SkewPoly {
        let mut base = self.clone();
        let mut acc = SkewPoly::one(&self.tower);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            k >>= 1;
        }
        acc
    }

    /// The additive polynomial `x ↦ Σ δ_i x^(q^i)` evaluated at `x`.
    pub fn evaluate_additive(&self, x: FieldElement) -> Result<FieldElement, SkewError> {
        let t = &self.tower;
        if !t.contains(x) {
            return Err(SkewError::TowerMismatch);
        }
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .fold(t.zero(), |acc, (i, &d)| {
                t.add(acc, t.mul(d, t.frobenius(x, i as u64)))
            }))
    }

    /// `ε⁻¹ · self · ε`, i.e. `δ_i ↦ δ_i ε^(q^i - 1)`.
    pub fn conjugate(&self, eps: FieldElement) -> Result<SkewPoly, SkewError> {
        let t = &self.tower;
        if !t.contains(eps) {
            return Err(SkewError::TowerMismatch);
        }
        let eps_inv = t.inv(eps).map_err(|_| SkewError::ZeroConjugator)?;
        Ok(SkewPoly::new(
            t,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &d)| t.mul(t.mul(d, eps_inv), t.frobenius(eps, i as u64)))
                .collect(),
        ))
    }

    /// Maps every coefficient along a field embedding.
    pub fn embed(&self, emb: &Embedding) -> Result<SkewPoly, SkewError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| emb.apply(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SkewPoly::new(emb.target(), coeffs))
    }

    fn zip_with(
        &self,
        rhs: &SkewPoly,
        f: impl Fn(FieldElement, FieldElement) -> FieldElement,
    ) -> SkewPoly {
        assert_eq!(self.tower, rhs.tower, "skew polynomials over different towers");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        SkewPoly::new(&self.tower, (0..n).map(|i| f(self.coeff(i), rhs.coeff(i))).collect())
    }
}

/// `p(D)` for an ordinary polynomial `p` with coefficients in F_q, which are
/// central in K{τ}. Evaluated by Horner's rule.
pub fn substitute(p: &Poly, d: &SkewPoly) -> Result<SkewPoly, SkewError> {
    let t = d.tower();
    if p.tower() != t {
        return Err(SkewError::TowerMismatch);
    }
    if let Some(index) = p.coeffs().iter().position(|&c| !t.is_in_base(c)) {
        return Err(SkewError::NonCentralCoefficient { index });
    }
    Ok(p.coeffs().iter().rev().fold(SkewPoly::zero(t), |acc, &c| {
        &acc.mul_unchecked(d) + &SkewPoly::constant(t, c)
    }))
}

impl Mul for &SkewPoly {
    type Output = SkewPoly;
    /// Panics when the operands live over different towers; see [`SkewPoly::try_mul`].
    fn mul(self, rhs: &SkewPoly) -> SkewPoly {
        self.try_mul(rhs).expect("skew polynomials over different towers")
    }
}

impl Add for &SkewPoly {
    type Output = SkewPoly;
    fn add(self, rhs: &SkewPoly) -> SkewPoly {
        let t = self.tower.clone();
        self.zip_with(rhs, |a, b| t.add(a, b))
    }
}

impl Sub for &SkewPoly {
    type Output = SkewPoly;
    fn sub(self, rhs: &SkewPoly) -> SkewPoly {
        let t = self.tower.clone();
        self.zip_with(rhs, |a, b| t.sub(a, b))
    }
}

impl Neg for &SkewPoly {
    type Output = SkewPoly;
    fn neg(self) -> SkewPoly {
        let t = &self.tower;
        SkewPoly::new(t, self.coeffs.iter().map(|&c| t.neg(c)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> FieldTower {
        FieldTower::new(3, &[0, 1], &[vec![1], vec![0], vec![1]]).unwrap()
    }

    #[test]
    fn commutation_rule() {
        let f9 = f9();
        let i = f9.generator();
        let tau = SkewPoly::tau(&f9);
        let prod = &tau * &SkewPoly::constant(&f9, i);
        assert_eq!(prod, SkewPoly::monomial(&f9, f9.neg(i), 1));
        assert_eq!(&prod * &SkewPoly::one(&f9), prod);
    }

    #[test]
    fn square_of_linear_matches_hand_expansion() {
        let f9 = f9();
        for a in f9.units() {
            for b in f9.elements() {
                let p = SkewPoly::new(&f9, vec![b, a]);
                let sq = &p * &p;
                // (aτ + b)^2 = a^(1+q) τ^2 + a(b + b^q) τ + b^2
                let expected = SkewPoly::new(
                    &f9,
                    vec![
                        f9.mul(b, b),
                        f9.mul(a, f9.add(b, f9.frobenius(b, 1))),
                        f9.pow(a, 4),
                    ],
                );
                assert_eq!(sq, expected);
            }
        }
    }

    #[test]
    fn additive_evaluation() {
        let f9 = f9();
        let i = f9.generator();
        let tau2 = SkewPoly::monomial(&f9, f9.one(), 2);
        assert_eq!(tau2.evaluate_additive(i).unwrap(), i);
        assert_eq!(SkewPoly::one(&f9).evaluate_additive(i).unwrap(), i);
        assert!(SkewPoly::zero(&f9).evaluate_additive(i).unwrap().is_zero());
        let f3 = FieldTower::prime(3).unwrap();
        assert_eq!(
            tau2.evaluate_additive(f3.one()),
            Err(SkewError::TowerMismatch)
        );
    }

    #[test]
    fn substitution_examples() {
        let f3 = FieldTower::prime(3).unwrap();
        let y2 = Poly::from_ints(&f3, &[0, 0, 1]);
        let tau = SkewPoly::tau(&f3);
        let tau2 = SkewPoly::monomial(&f3, f3.one(), 2);
        assert_eq!(substitute(&y2, &tau).unwrap(), tau2);
        assert_eq!(substitute(&y2, &-&tau).unwrap(), tau2);
        let y = Poly::from_ints(&f3, &[0, 1]);
        assert_eq!(substitute(&y, &tau).unwrap(), tau);

        let f9 = f9();
        let bad = Poly::new(&f9, vec![f9.generator(), f9.one()]);
        assert_eq!(
            substitute(&bad, &SkewPoly::tau(&f9)),
            Err(SkewError::NonCentralCoefficient { index: 0 })
        );
    }

    #[test]
    fn conjugation_examples() {
        let f9 = f9();
        let i = f9.generator();
        for a in f9.units() {
            let d = SkewPoly::monomial(&f9, a, 1);
            assert_eq!(
                d.conjugate(i).unwrap(),
                SkewPoly::monomial(&f9, f9.neg(a), 1)
            );
            assert_eq!(d.conjugate(f9.one()).unwrap(), d);
            assert_eq!(d.conjugate(f9.from_int(2)).unwrap(), d);
        }
        assert_eq!(
            SkewPoly::tau(&f9).conjugate(f9.zero()),
            Err(SkewError::ZeroConjugator)
        );
    }

    #[test]
    fn conjugation_is_skew_conjugation() {
        let f9 = f9();
        let d = SkewPoly::new(&f9, vec![f9.one(), f9.generator(), f9.from_int(2)]);
        for eps in f9.units() {
            let lhs = d.conjugate(eps).unwrap();
            let eps_inv = f9.inv(eps).unwrap();
            let rhs = &(&SkewPoly::constant(&f9, eps_inv) * &d) * &SkewPoly::constant(&f9, eps);
            assert_eq!(lhs, rhs);
        }
    }
}
