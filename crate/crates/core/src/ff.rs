//! Finite fields F_q and their extensions K = F_{q^m}.
//!
//! A [`FieldTower`] is described by two explicit moduli: a monic irreducible
//! polynomial over F_p defining F_q = F_p[z]/(base), and a monic irreducible
//! polynomial over F_q defining K = F_q[w]/(ext). Elements are stored as a
//! single index whose base-p digits are the F_p coordinates, ordered as
//! `w^0 z^0, w^0 z^1, .., w^1 z^0, ..` with the constant digit least
//! significant. Index order is the canonical element order used everywhere
//! in the crate.
//!
//! Arithmetic runs through exp/log tables of a primitive element, with a
//! Zech table for addition in odd characteristic. The tables are built once
//! per tower and shared through an `Arc`, so a tower handle is cheap to clone.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// Largest field size a tower will build tables for by default.
pub const DEFAULT_FIELD_CAP: u64 = 1 << 22;

const ZECH_NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different field towers")]
    TowerMismatch,
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("modulus {0} is reducible")]
    Reducible(String),
    #[error("no embedding of a field of degree {source_degree} over F_p into one of degree {target_degree}")]
    NoEmbedding {
        source_degree: usize,
        target_degree: usize,
    },
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("exponent must be positive")]
    ZeroExponent,
    #[error("field of size {required} exceeds the cap {cap}")]
    CapExceeded { required: u128, cap: u64 },
    #[error("invalid coordinates: {0}")]
    InvalidCoordinates(String),
}

/// Structural identity of a tower: equal moduli give equal ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TowerId(u64);

/// An element of some [`FieldTower`].
///
/// The element is a plain index plus the id of its tower; all arithmetic goes
/// through the tower. Ordering is by index, which is the canonical
/// lexicographic coordinate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement {
    value: u32,
    tower: TowerId,
}

impl FieldElement {
    pub fn value(self) -> u32 {
        self.value
    }

    pub fn tower_id(self) -> TowerId {
        self.tower
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exp/log tables of a finite field of `size` elements in index representation.
#[derive(Debug)]
struct Tables {
    p: u32,
    size: u32,
    /// exp[k] = g^k for 0 <= k < 2(size-1).
    exp: Vec<u32>,
    log: Vec<u32>,
    /// zech[d] = log(1 + g^d), or ZECH_NONE when 1 + g^d = 0. Empty for p = 2.
    zech: Vec<u32>,
}

impl Tables {
    fn build(p: u32, size: u32, slow_mul: impl Fn(u32, u32) -> u32) -> Tables {
        let order = size - 1;
        let slow_pow = |mut base: u32, mut e: u64| {
            let mut acc = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(acc, base);
                }
                base = slow_mul(base, base);
                e >>= 1;
            }
            acc
        };
        let factors = prime_factors(order as u64);
        let generator = (1..size)
            .find(|&g| factors.iter().all(|&l| slow_pow(g, order as u64 / l) != 1))
            .expect("a finite field has a primitive element");

        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut acc = 1u32;
        for k in 0..order as usize {
            exp[k] = acc;
            exp[k + order as usize] = acc;
            log[acc as usize] = k as u32;
            acc = slow_mul(acc, generator);
        }
        debug_assert_eq!(acc, 1);

        let zech = if p == 2 {
            Vec::new()
        } else {
            (0..order as usize)
                .map(|d| {
                    let v = exp[d];
                    let low = v % p;
                    let succ = v - low + (low + 1) % p;
                    if succ == 0 {
                        ZECH_NONE
                    } else {
                        log[succ as usize]
                    }
                })
                .collect()
        };
        Tables {
            p,
            size,
            exp,
            log,
            zech,
        }
    }

    #[inline]
    fn order(&self) -> u32 {
        self.size - 1
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let order = self.order();
        let la = self.log[a as usize];
        let lb = self.log[b as usize];
        let d = if lb >= la { lb - la } else { lb + order - la };
        match self.zech[d as usize] {
            ZECH_NONE => 0,
            z => self.exp[(la + z) as usize],
        }
    }

    #[inline]
    fn neg(&self, a: u32) -> u32 {
        if self.p == 2 || a == 0 {
            return a;
        }
        let half = self.order() / 2;
        self.exp[(self.log[a as usize] + half) as usize]
    }

    #[inline]
    fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    #[inline]
    fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let order = self.order();
        let l = self.log[a as usize];
        Some(self.exp[((order - l) % order.max(1)) as usize])
    }

    fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = self.order() as u64;
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e % order)) % order) as usize]
    }
}

/// Minimal scalar interface used by the polynomial helpers that run before
/// tables exist (irreducibility checks over F_p and over F_q).
trait Scalars {
    fn add(&self, a: u32, b: u32) -> u32;
    fn sub(&self, a: u32, b: u32) -> u32;
    fn mul(&self, a: u32, b: u32) -> u32;
}

struct PrimeScalars(u32);

impl Scalars for PrimeScalars {
    fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.0
    }
    fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.0 - b) % self.0
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }
}

impl Scalars for Tables {
    fn add(&self, a: u32, b: u32) -> u32 {
        Tables::add(self, a, b)
    }
    fn sub(&self, a: u32, b: u32) -> u32 {
        Tables::sub(self, a, b)
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        Tables::mul(self, a, b)
    }
}

/// Remainder of `a` modulo the monic polynomial `m` (coefficients constant-term first).
fn rem_monic<S: Scalars>(s: &S, a: &[u32], m: &[u32]) -> Vec<u32> {
    let dm = m.len() - 1;
    let mut r = a.to_vec();
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (j, &mj) in m.iter().enumerate() {
                r[shift + j] = s.sub(r[shift + j], s.mul(lead, mj));
            }
        }
        r.pop();
    }
    r
}

fn mul_mod<S: Scalars>(s: &S, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = s.add(prod[i + j], s.mul(ai, bj));
        }
    }
    rem_monic(s, &prod, m)
}

/// Exhaustive trial division by every monic polynomial of degree <= deg/2
/// over a field with `field_size` elements.
fn is_irreducible<S: Scalars>(s: &S, f: &[u32], field_size: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (field_size as u64).pow(d as u32);
        for code in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                divisor.push((c % field_size as u64) as u32);
                c /= field_size as u64;
            }
            divisor.push(1);
            if rem_monic(s, f, &divisor).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

fn digits(mut v: u32, base: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(v % base);
        v /= base;
    }
    out
}

fn pack(ds: &[u32], base: u32) -> u32 {
    ds.iter().rev().fold(0u32, |acc, &d| acc * base + d)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d: &u32| d * d <= p).all(|d| p % d != 0)
}

fn mod_pow(base: u64, mut e: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

#[derive(Debug)]
struct TowerInner {
    id: TowerId,
    p: u32,
    e: usize,
    m: usize,
    q: u32,
    base_modulus: Vec<u32>,
    /// Coefficients of the extension modulus as indices of F_q.
    ext_modulus: Vec<u32>,
    base: Arc<Tables>,
    tables: Arc<Tables>,
    /// q^k mod (Q - 1) for k < m; the q-power Frobenius has order m on K.
    frob_exp: Vec<u64>,
}

/// A finite field K = F_{q^m} together with its presentation over F_q and F_p.
///
/// Cloning is cheap. Two towers built from the same moduli compare equal and
/// their elements are interchangeable.
#[derive(Clone)]
pub struct FieldTower {
    inner: Arc<TowerInner>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FieldTower(F_{}: p={}, base={:?}, ext={:?})",
            self.size(),
            self.inner.p,
            self.inner.base_modulus,
            self.inner.ext_modulus
        )
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.inner.id == other.inner.id
    }
}

impl Eq for FieldTower {}

impl std::hash::Hash for FieldTower {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.id.hash(state);
    }
}

impl FieldTower {
    /// Builds a tower from the F_p coordinates of both moduli. Each entry of
    /// `ext_modulus` is the coordinate vector of an F_q coefficient.
    pub fn new(p: u32, base_modulus: &[u32], ext_modulus: &[Vec<u32>]) -> Result<Self, FfError> {
        Self::with_cap(p, base_modulus, ext_modulus, DEFAULT_FIELD_CAP)
    }

    pub fn with_cap(
        p: u32,
        base_modulus: &[u32],
        ext_modulus: &[Vec<u32>],
        cap: u64,
    ) -> Result<Self, FfError> {
        let base = Self::build_base(p, base_modulus, cap)?;
        let e = base_modulus.len() - 1;
        let q = base.size;
        let mut ext = Vec::with_capacity(ext_modulus.len());
        for c in ext_modulus {
            if c.len() > e || c.iter().any(|&d| d >= p) {
                return Err(FfError::InvalidModulus(format!(
                    "extension coefficient {c:?} is not an element of F_{q}"
                )));
            }
            ext.push(pack(c, p));
        }
        Self::assemble(p, base_modulus.to_vec(), base, ext, cap)
    }

    /// The prime field F_p.
    pub fn prime(p: u32) -> Result<Self, FfError> {
        Self::new(p, &[0, 1], &[vec![0], vec![1]])
    }

    /// F_q = F_p[z]/(base) viewed as a tower with trivial extension.
    pub fn simple(p: u32, base_modulus: &[u32]) -> Result<Self, FfError> {
        Self::new(p, base_modulus, &[vec![0], vec![1]])
    }

    fn build_base(p: u32, base_modulus: &[u32], cap: u64) -> Result<Arc<Tables>, FfError> {
        if !is_prime(p) {
            return Err(FfError::NotPrime(p));
        }
        if base_modulus.len() < 2 {
            return Err(FfError::InvalidModulus(
                "base modulus must have degree >= 1".into(),
            ));
        }
        if base_modulus.iter().any(|&c| c >= p) {
            return Err(FfError::InvalidModulus(format!(
                "base modulus {base_modulus:?} has coefficients outside 0..{p}"
            )));
        }
        if *base_modulus.last().unwrap() != 1 {
            return Err(FfError::InvalidModulus(format!(
                "base modulus {base_modulus:?} is not monic"
            )));
        }
        let e = base_modulus.len() - 1;
        let required = (p as u128).pow(e as u32);
        if required > cap as u128 {
            return Err(FfError::CapExceeded { required, cap });
        }
        let scalars = PrimeScalars(p);
        if !is_irreducible(&scalars, base_modulus, p) {
            return Err(FfError::Reducible(format!("{base_modulus:?}")));
        }
        let q = required as u32;
        Ok(Arc::new(Tables::build(p, q, |a, b| {
            let prod = mul_mod(&scalars, &digits(a, p, e), &digits(b, p, e), base_modulus);
            pack(&prod, p)
        })))
    }

    fn assemble(
        p: u32,
        base_modulus: Vec<u32>,
        base: Arc<Tables>,
        ext: Vec<u32>,
        cap: u64,
    ) -> Result<Self, FfError> {
        let e = base_modulus.len() - 1;
        let q = base.size;
        if ext.len() < 2 {
            return Err(FfError::InvalidModulus(
                "extension modulus must have degree >= 1".into(),
            ));
        }
        if ext.iter().any(|&c| c >= q) {
            return Err(FfError::InvalidModulus(format!(
                "extension modulus {ext:?} has coefficients outside F_{q}"
            )));
        }
        if *ext.last().unwrap() != 1 {
            return Err(FfError::InvalidModulus(format!(
                "extension modulus {ext:?} is not monic"
            )));
        }
        let m = ext.len() - 1;
        let required = (q as u128).pow(m as u32);
        if required > cap as u128 {
            return Err(FfError::CapExceeded { required, cap });
        }
        if m > 1 && !is_irreducible(base.as_ref(), &ext, q) {
            return Err(FfError::Reducible(format!("{ext:?} over F_{q}")));
        }
        let tables = if m == 1 {
            base.clone()
        } else {
            let bt = base.clone();
            Arc::new(Tables::build(p, required as u32, |a, b| {
                let prod = mul_mod(bt.as_ref(), &digits(a, q, m), &digits(b, q, m), &ext);
                pack(&prod, q)
            }))
        };
        let order = tables.size as u64 - 1;
        let frob_exp = (0..m as u64).map(|k| mod_pow(q as u64, k, order)).collect();
        let mut hasher = DefaultHasher::new();
        (p, &base_modulus, &ext).hash(&mut hasher);
        let id = TowerId(hasher.finish());
        Ok(FieldTower {
            inner: Arc::new(TowerInner {
                id,
                p,
                e,
                m,
                q,
                base_modulus,
                ext_modulus: ext,
                base,
                tables,
                frob_exp,
            }),
        })
    }

    pub fn id(&self) -> TowerId {
        self.inner.id
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.p
    }

    /// q, the size of the base field F_q.
    pub fn q(&self) -> u64 {
        self.inner.q as u64
    }

    /// Q = q^m, the size of K.
    pub fn size(&self) -> u64 {
        self.inner.tables.size as u64
    }

    /// m = [K : F_q].
    pub fn degree(&self) -> usize {
        self.inner.m
    }

    /// e = [F_q : F_p].
    pub fn base_degree(&self) -> usize {
        self.inner.e
    }

    pub fn base_modulus(&self) -> &[u32] {
        &self.inner.base_modulus
    }

    /// F_p coordinates of the extension modulus coefficients.
    pub fn ext_modulus_coords(&self) -> Vec<Vec<u32>> {
        self.inner
            .ext_modulus
            .iter()
            .map(|&c| digits(c, self.inner.p, self.inner.e))
            .collect()
    }

    /// The tower F_q with the same base modulus and trivial extension.
    pub fn base_field(&self) -> FieldTower {
        if self.inner.m == 1 && self.inner.ext_modulus == [0, 1] {
            return self.clone();
        }
        Self::assemble(
            self.inner.p,
            self.inner.base_modulus.clone(),
            self.inner.base.clone(),
            vec![0, 1],
            u64::MAX,
        )
        .expect("the base field is always constructible")
    }

    /// True when both towers present the same F_q.
    pub fn same_base(&self, other: &FieldTower) -> bool {
        self.inner.p == other.inner.p && self.inner.base_modulus == other.inner.base_modulus
    }

    fn wrap(&self, value: u32) -> FieldElement {
        FieldElement {
            value,
            tower: self.inner.id,
        }
    }

    #[inline]
    fn check(&self, a: FieldElement) {
        debug_assert_eq!(a.tower, self.inner.id, "element from a different tower");
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.tower == self.inner.id
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    /// The element with the given index.
    pub fn element(&self, value: u32) -> Result<FieldElement, FfError> {
        if (value as u64) < self.size() {
            Ok(self.wrap(value))
        } else {
            Err(FfError::InvalidCoordinates(format!(
                "index {value} outside F_{}",
                self.size()
            )))
        }
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> FieldElement {
        self.wrap(n.rem_euclid(self.inner.p as i64) as u32)
    }

    /// The generator w of K over F_q when m > 1, else z when e > 1, else a
    /// primitive element of F_p.
    pub fn generator(&self) -> FieldElement {
        if self.inner.m > 1 {
            self.wrap(self.inner.q as u32)
        } else if self.inner.e > 1 {
            self.wrap(self.inner.p)
        } else {
            self.primitive_element()
        }
    }

    /// Builds an element from `m` F_q-coefficients, each given by its F_p
    /// coordinates (shorter vectors are zero-padded).
    pub fn from_coords(&self, coords: &[Vec<u32>]) -> Result<FieldElement, FfError> {
        let (p, e, m, q) = (self.inner.p, self.inner.e, self.inner.m, self.inner.q);
        if coords.len() > m {
            return Err(FfError::InvalidCoordinates(format!(
                "{} coefficients given, field has degree {m} over F_{q}",
                coords.len()
            )));
        }
        let mut packed = Vec::with_capacity(m);
        for c in coords {
            if c.len() > e || c.iter().any(|&d| d >= p) {
                return Err(FfError::InvalidCoordinates(format!(
                    "{c:?} is not an element of F_{q}"
                )));
            }
            packed.push(pack(c, p));
        }
        Ok(self.wrap(pack(&packed, q)))
    }

    /// The `m x e` coordinate array of `a`, constant term first.
    pub fn coords(&self, a: FieldElement) -> Vec<Vec<u32>> {
        self.check(a);
        digits(a.value, self.inner.q, self.inner.m)
            .into_iter()
            .map(|c| digits(c, self.inner.p, self.inner.e))
            .collect()
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.inner.tables.size).map(move |v| self.wrap(v))
    }

    /// All nonzero elements in canonical order.
    pub fn units(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.inner.tables.size).map(move |v| self.wrap(v))
    }

    /// Every element exactly once, in canonical order, refusing fields above `cap`.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<FieldElement>, FfError> {
        if self.size() > cap {
            return Err(FfError::CapExceeded {
                required: self.size() as u128,
                cap,
            });
        }
        Ok(self.elements().collect())
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        self.wrap(self.inner.tables.add(a.value, b.value))
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        self.wrap(self.inner.tables.sub(a.value, b.value))
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.check(a);
        self.wrap(self.inner.tables.neg(a.value))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        self.wrap(self.inner.tables.mul(a.value, b.value))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FfError> {
        self.check(a);
        self.inner
            .tables
            .inv(a.value)
            .map(|v| self.wrap(v))
            .ok_or(FfError::DivisionByZero)
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        self.check(a);
        self.wrap(self.inner.tables.pow(a.value, e))
    }

    /// Checked arithmetic: rejects elements of other towers and division by zero.
    pub fn arith(
        &self,
        a: FieldElement,
        b: FieldElement,
        op: ArithOp,
    ) -> Result<FieldElement, FfError> {
        if !self.contains(a) || !self.contains(b) {
            return Err(FfError::TowerMismatch);
        }
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    /// q^e reduced modulo Q - 1, the exponent of the e-fold q-power Frobenius
    /// on K^x.
    pub fn frobenius_exponent(&self, e: u64) -> u64 {
        self.inner.frob_exp[(e % self.inner.m as u64) as usize]
    }

    /// a^(q^e).
    #[inline]
    pub fn frobenius(&self, a: FieldElement, e: u64) -> FieldElement {
        if a.value <= 1 {
            return a;
        }
        let order = self.size() - 1;
        let l = self.inner.tables.log[a.value as usize] as u64;
        let k = self.frobenius_exponent(e);
        self.wrap(self.inner.tables.exp[((l * k) % order) as usize])
    }

    /// True when `a` lies in F_q, i.e. is fixed by the q-power Frobenius.
    pub fn is_in_base(&self, a: FieldElement) -> bool {
        (a.value as u64) < self.q()
    }

    /// The primitive element used for the exp/log tables.
    pub fn primitive_element(&self) -> FieldElement {
        self.wrap(self.inner.tables.exp[if self.size() > 2 { 1 } else { 0 }])
    }

    /// Discrete log with respect to [`Self::primitive_element`].
    pub fn log(&self, a: FieldElement) -> Result<u64, FfError> {
        self.check(a);
        if a.is_zero() {
            return Err(FfError::ZeroArgument);
        }
        Ok(self.inner.tables.log[a.value as usize] as u64)
    }

    /// The complete set `{eps in K^x : eps^n = c}` in canonical order.
    pub fn solve_power_equation(
        &self,
        n: u64,
        c: FieldElement,
    ) -> Result<Vec<FieldElement>, FfError> {
        if !self.contains(c) {
            return Err(FfError::TowerMismatch);
        }
        if n == 0 {
            return Err(FfError::ZeroExponent);
        }
        if c.is_zero() {
            return Err(FfError::ZeroArgument);
        }
        Ok(self.power_preimages(n, c))
    }

    /// Same as [`Self::solve_power_equation`] but accepts any `n`; `n = 0`
    /// yields all of K^x when `c = 1`.
    pub(crate) fn power_preimages(&self, n: u64, c: FieldElement) -> Vec<FieldElement> {
        let order = self.size() - 1;
        let n_red = n % order;
        let g = gcd(n_red, order);
        let lc = self.inner.tables.log[c.value as usize] as u64;
        let solvable = lc % g == 0;
        debug_assert_eq!(solvable, self.pow(c, order / g) == self.one());
        if !solvable {
            return Vec::new();
        }
        let reduced_order = order / g;
        let k0 = (lc / g) % reduced_order
            * mod_inverse((n_red / g) % reduced_order, reduced_order).unwrap()
            % reduced_order.max(1);
        let mut out: Vec<FieldElement> = (0..g)
            .map(|t| {
                let k = (k0 + t * reduced_order) % order;
                self.wrap(self.inner.tables.exp[k as usize])
            })
            .collect();
        out.sort();
        out
    }

    /// The degree-`s` extension of K over F_q: a fresh tower over the same
    /// F_q of degree `m*s`, using the smallest monic irreducible modulus in
    /// canonical coefficient order. `s = 1` returns `self`.
    pub fn extension(&self, s: usize, cap: u64) -> Result<FieldTower, FfError> {
        if s == 0 {
            return Err(FfError::ZeroExponent);
        }
        if s == 1 {
            return Ok(self.clone());
        }
        let q = self.inner.q as u64;
        let degree = self.inner.m * s;
        let required = (q as u128).checked_pow(degree as u32).unwrap_or(u128::MAX);
        if required > cap as u128 {
            return Err(FfError::CapExceeded { required, cap });
        }
        let base = self.inner.base.as_ref();
        for code in 0..q.pow(degree as u32) {
            let mut modulus = digits(code as u32, q as u32, degree);
            modulus.push(1);
            if is_irreducible(base, &modulus, q as u32) {
                return Self::assemble(
                    self.inner.p,
                    self.inner.base_modulus.clone(),
                    self.inner.base.clone(),
                    modulus,
                    cap,
                );
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// The embedding of `self` into `target` (see [`Embedding`]).
    pub fn embedding_into(&self, target: &FieldTower) -> Result<Embedding, FfError> {
        Embedding::new(self, target)
    }

    /// Maps `a` into `target` along the canonical embedding.
    pub fn embed(&self, a: FieldElement, target: &FieldTower) -> Result<FieldElement, FfError> {
        if !self.contains(a) {
            return Err(FfError::TowerMismatch);
        }
        self.embedding_into(target)?.apply(a)
    }

    /// Human-readable form, e.g. `2 + w` or `(1+z) + (z)w`.
    pub fn format(&self, a: FieldElement) -> String {
        let coords = self.coords(a);
        let e = self.inner.e;
        let mut terms = Vec::new();
        for (j, c) in coords.iter().enumerate() {
            if c.iter().all(|&d| d == 0) {
                continue;
            }
            let coeff = if e == 1 {
                c[0].to_string()
            } else {
                let parts: Vec<String> = c
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d != 0)
                    .map(|(t, &d)| match t {
                        0 => d.to_string(),
                        1 if d == 1 => "z".to_string(),
                        1 => format!("{d}z"),
                        _ if d == 1 => format!("z^{t}"),
                        _ => format!("{d}z^{t}"),
                    })
                    .collect();
                format!("({})", parts.join("+"))
            };
            let term = match j {
                0 => coeff,
                _ => {
                    let w = if j == 1 { "w".to_string() } else { format!("w^{j}") };
                    if coeff == "1" {
                        w
                    } else {
                        format!("{coeff}{w}")
                    }
                }
            };
            terms.push(term);
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// A field embedding K -> K' determined by where the generators go.
///
/// When both towers share F_q, z maps to z and F_q is fixed pointwise;
/// otherwise the image of z is the smallest root of the base modulus in K'.
/// The image of w is the smallest root in K' of the extension modulus with
/// its coefficients mapped along z.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: TowerId,
    target: FieldTower,
    map: Arc<Vec<u32>>,
}

impl Embedding {
    pub fn new(source: &FieldTower, target: &FieldTower) -> Result<Self, FfError> {
        let src_deg = source.inner.e * source.inner.m;
        let dst_deg = target.inner.e * target.inner.m;
        if source.inner.p != target.inner.p || dst_deg % src_deg != 0 {
            return Err(FfError::NoEmbedding {
                source_degree: src_deg,
                target_degree: dst_deg,
            });
        }
        if source == target {
            return Ok(Embedding {
                source: source.id(),
                target: target.clone(),
                map: Arc::new((0..source.size() as u32).collect()),
            });
        }
        let p = source.inner.p;
        let eval = |coeffs: &[FieldElement], x: FieldElement| {
            coeffs
                .iter()
                .rev()
                .fold(target.zero(), |acc, &c| target.add(target.mul(acc, x), c))
        };
        let base_coeffs: Vec<FieldElement> = source
            .inner
            .base_modulus
            .iter()
            .map(|&c| target.from_int(c as i64))
            .collect();
        let z_img = if source.same_base(target) && source.inner.e > 1 {
            Some(target.wrap(p))
        } else {
            target.elements().find(|&x| eval(&base_coeffs, x).is_zero())
        }
        .ok_or(FfError::NoEmbedding {
                source_degree: src_deg,
                target_degree: dst_deg,
            })?;
        let e = source.inner.e;
        let map_base = |c: u32| {
            let ds = digits(c, p, e);
            let cs: Vec<FieldElement> = ds.iter().map(|&d| target.from_int(d as i64)).collect();
            eval(&cs, z_img)
        };
        let ext_coeffs: Vec<FieldElement> =
            source.inner.ext_modulus.iter().map(|&c| map_base(c)).collect();
        let w_img = target
            .elements()
            .find(|&x| eval(&ext_coeffs, x).is_zero())
            .ok_or(FfError::NoEmbedding {
                source_degree: src_deg,
                target_degree: dst_deg,
            })?;
        let q = source.inner.q;
        let m = source.inner.m;
        let map = (0..source.size() as u32)
            .map(|v| {
                let cs: Vec<FieldElement> =
                    digits(v, q, m).into_iter().map(map_base).collect();
                eval(&cs, w_img).value
            })
            .collect();
        Ok(Embedding {
            source: source.id(),
            target: target.clone(),
            map: Arc::new(map),
        })
    }

    pub fn target(&self) -> &FieldTower {
        &self.target
    }

    pub fn apply(&self, a: FieldElement) -> Result<FieldElement, FfError> {
        if a.tower != self.source {
            return Err(FfError::TowerMismatch);
        }
        Ok(self.target.wrap(self.map[a.value as usize]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f9() -> FieldTower {
        FieldTower::new(3, &[0, 1], &[vec![1], vec![0], vec![1]]).unwrap()
    }

    #[test]
    fn prime_field_arithmetic() {
        let f3 = FieldTower::prime(3).unwrap();
        let two = f3.from_int(2);
        assert_eq!(f3.add(two, two), f3.one());
        assert_eq!(f3.neg(f3.one()), two);
        assert_eq!(f3.div(f3.one(), two).unwrap(), two);
    }

    #[test]
    fn gaussian_integers_mod_three() {
        let f9 = f9();
        let i = f9.generator();
        assert_eq!(f9.mul(i, i), f9.from_int(-1));
        let a = f9.add(f9.one(), i);
        let b = f9.sub(f9.one(), i);
        assert_eq!(f9.mul(a, b), f9.from_int(2));
        assert_eq!(f9.frobenius(i, 1), f9.neg(i));
        assert_eq!(f9.frobenius(i, 0), i);
        assert_eq!(f9.frobenius(f9.from_int(2), 1), f9.from_int(2));
    }

    #[test]
    fn division_by_zero_and_mismatch() {
        let f9 = f9();
        let f3 = FieldTower::prime(3).unwrap();
        assert_eq!(
            f9.arith(f9.one(), f9.zero(), ArithOp::Div),
            Err(FfError::DivisionByZero)
        );
        assert_eq!(
            f9.arith(f9.one(), f3.one(), ArithOp::Add),
            Err(FfError::TowerMismatch)
        );
    }

    #[test]
    fn rejects_reducible_and_non_prime() {
        assert!(matches!(
            FieldTower::new(3, &[0, 1], &[vec![2], vec![0], vec![1]]),
            Err(FfError::Reducible(_))
        ));
        assert!(matches!(FieldTower::prime(9), Err(FfError::NotPrime(9))));
        assert!(matches!(
            FieldTower::simple(2, &[1, 1, 2]),
            Err(FfError::InvalidModulus(_))
        ));
    }

    #[test]
    fn enumeration_order_and_cap() {
        let f2 = FieldTower::prime(2).unwrap();
        let v: Vec<u32> = f2.enumerate(10).unwrap().iter().map(|a| a.value()).collect();
        assert_eq!(v, vec![0, 1]);
        let f3 = FieldTower::prime(3).unwrap();
        let v: Vec<u32> = f3.enumerate(10).unwrap().iter().map(|a| a.value()).collect();
        assert_eq!(v, vec![0, 1, 2]);
        assert!(matches!(f9().enumerate(8), Err(FfError::CapExceeded { .. })));
    }

    #[test]
    fn coordinates_round_trip() {
        let f4 = FieldTower::simple(2, &[1, 1, 1]).unwrap();
        let f16 = FieldTower::new(2, &[1, 1, 1], &[vec![0, 1], vec![1], vec![1]]).unwrap();
        assert_eq!(f16.size(), 16);
        for a in f16.elements() {
            assert_eq!(f16.from_coords(&f16.coords(a)).unwrap(), a);
        }
        assert_eq!(f4.coords(f4.generator()), vec![vec![0, 1]]);
    }

    #[test]
    fn power_equation_examples() {
        let f3 = FieldTower::prime(3).unwrap();
        assert!(f3.solve_power_equation(2, f3.from_int(-1)).unwrap().is_empty());
        let f9 = f9();
        let i = f9.generator();
        let sols = f9.solve_power_equation(2, f9.from_int(-1)).unwrap();
        let mut expected = vec![i, f9.neg(i)];
        expected.sort();
        assert_eq!(sols, expected);
        for c in f9.units() {
            assert_eq!(f9.solve_power_equation(1, c).unwrap(), vec![c]);
        }
        assert_eq!(
            f9.solve_power_equation(2, f9.zero()),
            Err(FfError::ZeroArgument)
        );
    }

    #[test]
    fn embedding_f4_into_f16() {
        let f4 = FieldTower::simple(2, &[1, 1, 1]).unwrap();
        let f16 = FieldTower::new(2, &[1, 1, 1], &[vec![0, 1], vec![1], vec![1]]).unwrap();
        let g = f4.generator();
        let img = f4.embed(g, &f16).unwrap();
        // g satisfies g^2 + g + 1 = 0
        assert!(f16.add(f16.add(f16.mul(img, img), img), f16.one()).is_zero());
        assert_eq!(f4.embed(f4.one(), &f16).unwrap(), f16.one());
        assert_eq!(f4.embed(g, &f4).unwrap(), g);

        let f8 = FieldTower::simple(2, &[1, 1, 0, 1]).unwrap();
        assert!(matches!(
            f4.embed(g, &f8),
            Err(FfError::NoEmbedding { .. })
        ));
    }

    #[test]
    fn extension_towers_contain_the_base() {
        let f3 = FieldTower::prime(3).unwrap();
        let f9 = f3.extension(2, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(f9.size(), 9);
        // smallest monic irreducible quadratic over F_3 is w^2 + 1
        assert_eq!(f9.ext_modulus_coords(), vec![vec![1], vec![0], vec![1]]);
        assert_eq!(f9, self::f9());
        let f81 = f9.extension(2, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(f81.size(), 81);
        let emb = f9.embedding_into(&f81).unwrap();
        for a in f9.elements() {
            for b in f9.elements() {
                assert_eq!(
                    emb.apply(f9.mul(a, b)).unwrap(),
                    f81.mul(emb.apply(a).unwrap(), emb.apply(b).unwrap())
                );
            }
        }
    }
}
