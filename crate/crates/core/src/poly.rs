//! Dense univariate polynomials over a field tower K, i.e. the ring K[x].

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use crate::ff::{Embedding, FfError, FieldElement, FieldTower};

/// Degree of a polynomial; the zero polynomial has degree `NegInfinity`,
/// which compares below every finite degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }

    /// Degree of a product: degrees add, `-inf` absorbs.
    pub fn plus(self, other: Degree) -> Degree {
        match (self, other) {
            (Degree::Finite(a), Degree::Finite(b)) => Degree::Finite(a + b),
            _ => Degree::NegInfinity,
        }
    }

    /// True when the degree is at most `bound`; a negative bound admits only zero.
    pub fn at_most(self, bound: i64) -> bool {
        match self {
            Degree::NegInfinity => true,
            Degree::Finite(d) => (d as i64) <= bound,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// A polynomial `c_0 + c_1 x + ..` with coefficients in K, stored without
/// trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    tower: FieldTower,
    coeffs: Vec<FieldElement>,
}

impl Hash for Poly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: lexicographic on the coefficient sequence, constant term first.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

impl Poly {
    pub fn new(tower: &FieldTower, mut coeffs: Vec<FieldElement>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly {
            tower: tower.clone(),
            coeffs,
        }
    }

    pub fn zero(tower: &FieldTower) -> Poly {
        Poly::new(tower, Vec::new())
    }

    pub fn one(tower: &FieldTower) -> Poly {
        Poly::constant(tower, tower.one())
    }

    pub fn constant(tower: &FieldTower, c: FieldElement) -> Poly {
        Poly::new(tower, vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(tower: &FieldTower, c: FieldElement, k: usize) -> Poly {
        let mut coeffs = vec![tower.zero(); k + 1];
        coeffs[k] = c;
        Poly::new(tower, coeffs)
    }

    pub fn x(tower: &FieldTower) -> Poly {
        Poly::monomial(tower, tower.one(), 1)
    }

    /// `x - c`.
    pub fn linear(tower: &FieldTower, c: FieldElement) -> Poly {
        Poly::new(tower, vec![tower.neg(c), tower.one()])
    }

    /// Polynomial with prime-field coefficients given as integers.
    pub fn from_ints(tower: &FieldTower, ints: &[i64]) -> Poly {
        Poly::new(tower, ints.iter().map(|&n| tower.from_int(n)).collect())
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

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    pub fn scale(&self, c: FieldElement) -> Poly {
        let t = &self.tower;
        Poly::new(t, self.coeffs.iter().map(|&a| t.mul(a, c)).collect())
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.tower.zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly::new(&self.tower, coeffs)
    }

    /// The monic associate; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => self.clone(),
            Some(l) => self.scale(self.tower.inv(l).expect("leading coefficient is nonzero")),
        }
    }

    pub fn eval(&self, a: FieldElement) -> FieldElement {
        let t = &self.tower;
        self.coeffs
            .iter()
            .rev()
            .fold(t.zero(), |acc, &c| t.add(t.mul(acc, a), c))
    }

    /// Maps every coefficient along a field embedding.
    pub fn embed(&self, emb: &Embedding) -> Result<Poly, FfError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| emb.apply(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Poly::new(emb.target(), coeffs))
    }

    /// Applies the `k`-fold q-power Frobenius to every coefficient.
    pub fn frobenius(&self, k: u64) -> Poly {
        let t = &self.tower;
        Poly::new(t, self.coeffs.iter().map(|&c| t.frobenius(c, k)).collect())
    }

    pub fn pow(&self, mut k: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.tower);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly), FfError> {
        let t = &self.tower;
        let lead = divisor.leading().ok_or(FfError::DivisionByZero)?;
        let lead_inv = t.inv(lead)?;
        let dd = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(t), self.clone()));
        }
        let mut quot = vec![t.zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = t.mul(rem[i + dd], lead_inv);
            quot[i] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &dj) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = t.sub(rem[i + j], t.mul(c, dj));
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(t, quot), Poly::new(t, rem)))
    }

    /// True when `divisor` divides `self` (zero divides only zero).
    pub fn is_divisible_by(&self, divisor: &Poly) -> bool {
        if divisor.is_zero() {
            return self.is_zero();
        }
        self.div_rem(divisor).map(|(_, r)| r.is_zero()).unwrap_or(false)
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Digits of `self` in base `radix`: `self = sum_k digits[k] * radix^k`
    /// with every digit of degree below `deg radix`.
    pub fn radix_expansion(&self, radix: &Poly) -> Result<Vec<Poly>, FfError> {
        if radix.degree() < Degree::Finite(1) {
            return Err(FfError::ZeroArgument);
        }
        let mut digits = Vec::new();
        let mut rest = self.clone();
        while !rest.is_zero() {
            let (q, r) = rest.div_rem(radix)?;
            digits.push(r);
            rest = q;
        }
        Ok(digits)
    }

    /// Multiplicity of the root `c`, or `None` for the zero polynomial.
    pub fn root_multiplicity(&self, c: FieldElement) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let lin = Poly::linear(&self.tower, c);
        let mut k = 0;
        let mut cur = self.clone();
        loop {
            let (q, r) = cur.div_rem(&lin).expect("linear divisor");
            if !r.is_zero() {
                return Some(k);
            }
            cur = q;
            k += 1;
        }
    }

    /// Renders the polynomial in the variable `var`.
    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let t = &self.tower;
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = t.format(c);
            let cs = if cs.contains(" + ") { format!("({cs})") } else { cs };
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            terms.push(match (k, cs.as_str()) {
                (0, _) => cs,
                (_, "1") => mono,
                _ => format!("{cs}*{mono}"),
            });
        }
        terms.join(" + ")
    }

    fn zip_with(&self, other: &Poly, f: impl Fn(FieldElement, FieldElement) -> FieldElement) -> Poly {
        assert_eq!(self.tower, other.tower, "polynomials over different towers");
        let t = &self.tower;
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(t, (0..n).map(|i| f(self.coeff(i), other.coeff(i))).collect())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let t = self.tower.clone();
        self.zip_with(rhs, |a, b| t.add(a, b))
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let t = self.tower.clone();
        self.zip_with(rhs, |a, b| t.sub(a, b))
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let t = &self.tower;
        Poly::new(t, self.coeffs.iter().map(|&c| t.neg(c)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.tower, rhs.tower, "polynomials over different towers");
        let t = &self.tower;
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(t);
        }
        let mut out = vec![t.zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = t.add(out[i + j], t.mul(a, b));
            }
        }
        Poly::new(t, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_and_gcd() {
        let f3 = FieldTower::prime(3).unwrap();
        // (x^2 - 1) = (x - 1)(x + 1)
        let a = Poly::from_ints(&f3, &[-1, 0, 1]);
        let b = Poly::from_ints(&f3, &[1, 1]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, Poly::from_ints(&f3, &[-1, 1]));
        assert_eq!(a.gcd(&Poly::from_ints(&f3, &[2, 2])), b);
        assert_eq!(a.div_rem(&Poly::zero(&f3)), Err(FfError::DivisionByZero));
    }

    #[test]
    fn degree_sentinel_orders_below_everything() {
        let f2 = FieldTower::prime(2).unwrap();
        assert!(Poly::zero(&f2).degree() < Poly::one(&f2).degree());
        assert!(Degree::NegInfinity < Degree::Finite(0));
        assert!(Poly::zero(&f2).degree().at_most(-3));
    }

    #[test]
    fn radix_expansion_reconstructs() {
        let f3 = FieldTower::prime(3).unwrap();
        let f = Poly::from_ints(&f3, &[1, 2, 0, 1, 1, 2]);
        let radix = Poly::from_ints(&f3, &[1, 0, 1]);
        let digits = f.radix_expansion(&radix).unwrap();
        let rebuilt = digits
            .iter()
            .rev()
            .fold(Poly::zero(&f3), |acc, d| &(&acc * &radix) + d);
        assert_eq!(rebuilt, f);
        assert!(digits.iter().all(|d| d.degree() < Degree::Finite(2)));
    }

    #[test]
    fn root_multiplicity_counts() {
        let f3 = FieldTower::prime(3).unwrap();
        let x2 = Poly::from_ints(&f3, &[0, 0, 1]);
        assert_eq!(x2.root_multiplicity(f3.zero()), Some(2));
        assert_eq!(x2.root_multiplicity(f3.one()), Some(0));
    }
}
