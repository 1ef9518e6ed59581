//! Matrices over K[x]: products, Frobenius twists, determinants and the
//! elementary divisors at the finite chart and at ∞.

use std::cmp::Ordering;
use std::fmt;

use crate::ff::{Embedding, FfError, FieldElement, FieldTower};
use crate::poly::{Degree, Poly};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    tower: FieldTower,
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PartialOrd for PolyMatrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Row-major lexicographic on entries, each compared as a polynomial.
impl Ord for PolyMatrix {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.rows, self.cols, &self.entries).cmp(&(other.rows, other.cols, &other.entries))
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("x"))
    }
}

impl PolyMatrix {
    /// Builds a matrix from row-major entries. Panics on a shape mismatch.
    pub fn new(tower: &FieldTower, rows: usize, cols: usize, entries: Vec<Poly>) -> PolyMatrix {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        PolyMatrix {
            tower: tower.clone(),
            rows,
            cols,
            entries,
        }
    }

    pub fn from_rows(tower: &FieldTower, rows: Vec<Vec<Poly>>) -> Option<PolyMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(PolyMatrix::new(tower, r, c, rows.into_iter().flatten().collect()))
    }

    pub fn from_fn(
        tower: &FieldTower,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Poly,
    ) -> PolyMatrix {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        PolyMatrix::new(tower, rows, cols, entries)
    }

    pub fn zero(tower: &FieldTower, rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix::from_fn(tower, rows, cols, |_, _| Poly::zero(tower))
    }

    pub fn identity(tower: &FieldTower, n: usize) -> PolyMatrix {
        PolyMatrix::scalar(tower, n, &Poly::one(tower))
    }

    /// `f · Id`.
    pub fn scalar(tower: &FieldTower, n: usize, f: &Poly) -> PolyMatrix {
        PolyMatrix::from_fn(tower, n, n, |i, j| {
            if i == j {
                f.clone()
            } else {
                Poly::zero(tower)
            }
        })
    }

    pub fn diagonal(tower: &FieldTower, diag: &[Poly]) -> PolyMatrix {
        let n = diag.len();
        PolyMatrix::from_fn(tower, n, n, |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                Poly::zero(tower)
            }
        })
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: Poly) {
        self.entries[i * self.cols + j] = f;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn row_vecs(&self) -> Vec<Vec<Poly>> {
        self.entries.chunks(self.cols.max(1)).map(<[Poly]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn max_degree(&self) -> Degree {
        self.entries.iter().map(Poly::degree).max().unwrap_or(Degree::NegInfinity)
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix::new(&self.tower, self.rows, self.cols, self.entries.iter().map(f).collect())
    }

    /// Maps every coefficient along a field embedding.
    pub fn embed(&self, emb: &Embedding) -> Result<PolyMatrix, FfError> {
        let entries = self
            .entries
            .iter()
            .map(|f| f.embed(emb))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMatrix::new(emb.target(), self.rows, self.cols, entries))
    }

    /// `p(self)` for a square matrix and a polynomial `p` whose coefficients
    /// act as scalars.
    pub fn eval_poly(&self, p: &Poly) -> PolyMatrix {
        assert!(self.is_square(), "polynomial of a non-square matrix");
        let t = &self.tower;
        let n = self.rows;
        p.coeffs().iter().rev().fold(PolyMatrix::zero(t, n, n), |acc, &c| {
            let prod = acc.try_mul(self).expect("square");
            prod.try_add(&PolyMatrix::scalar(t, n, &Poly::constant(t, c)))
                .expect("square")
        })
    }

    /// σ^k: the q^k-power Frobenius on every coefficient.
    pub fn frobenius(&self, k: u64) -> PolyMatrix {
        self.map(|f| f.frobenius(k))
    }

    pub fn scale(&self, f: &Poly) -> PolyMatrix {
        self.map(|g| g * f)
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(&self.tower, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Product; `None` when the inner dimensions or towers disagree.
    pub fn try_mul(&self, rhs: &PolyMatrix) -> Option<PolyMatrix> {
        if self.cols != rhs.rows || self.tower != rhs.tower {
            return None;
        }
        let t = &self.tower;
        Some(PolyMatrix::from_fn(t, self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(Poly::zero(t), |acc, k| {
                let a = self.get(i, k);
                if a.is_zero() {
                    return acc;
                }
                &acc + &(a * rhs.get(k, j))
            })
        }))
    }

    pub fn try_add(&self, rhs: &PolyMatrix) -> Option<PolyMatrix> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) || self.tower != rhs.tower {
            return None;
        }
        Some(PolyMatrix::new(
            &self.tower,
            self.rows,
            self.cols,
            self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn neg(&self) -> PolyMatrix {
        self.map(|f| -f)
    }

    pub fn try_sub(&self, rhs: &PolyMatrix) -> Option<PolyMatrix> {
        self.try_add(&rhs.neg())
    }

    /// True when entry (j, t) has degree at most `bound(j, t)`.
    pub fn respects_bounds(&self, bound: impl Fn(usize, usize) -> i64) -> bool {
        (0..self.rows).all(|j| (0..self.cols).all(|t| self.get(j, t).degree().at_most(bound(j, t))))
    }

    /// Determinant by Euclidean row reduction. Panics on non-square input.
    pub fn det(&self) -> Poly {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let t = &self.tower;
        let n = self.rows;
        let mut a = self.row_vecs();
        let mut negate = false;
        for k in 0..n {
            loop {
                let pivot = (k..n)
                    .filter(|&i| !a[i][k].is_zero())
                    .min_by_key(|&i| a[i][k].degree());
                let Some(pi) = pivot else {
                    return Poly::zero(t);
                };
                if pi != k {
                    a.swap(pi, k);
                    negate = !negate;
                }
                let mut done = true;
                for i in k + 1..n {
                    if a[i][k].is_zero() {
                        continue;
                    }
                    let (q, _) = a[i][k].div_rem(&a[k][k]).expect("pivot is nonzero");
                    for j in k..n {
                        let sub = &q * &a[k][j];
                        a[i][j] = &a[i][j] - &sub;
                    }
                    if !a[i][k].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
        }
        let d = (0..n).fold(Poly::one(t), |acc, i| &acc * &a[i][i]);
        if negate {
            -&d
        } else {
            d
        }
    }

    /// Invariant factors over the principal ideal domain K[x]: the monic
    /// diagonal of the Smith normal form, each dividing the next, followed
    /// by zeros for rank deficiency. Length is `min(rows, cols)`.
    pub fn invariant_factors(&self) -> Vec<Poly> {
        let t = &self.tower;
        let (r, c) = (self.rows, self.cols);
        let mut a = self.row_vecs();
        let n = r.min(c);
        let mut diag = Vec::with_capacity(n);
        for k in 0..n {
            let Some((pi, pj)) = min_degree_entry(&a, k, r, c) else {
                diag.extend((k..n).map(|_| Poly::zero(t)));
                break;
            };
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            loop {
                let mut clean = true;
                for i in k + 1..r {
                    if a[i][k].is_zero() {
                        continue;
                    }
                    let (q, rem) = a[i][k].div_rem(&a[k][k]).expect("pivot is nonzero");
                    for j in k..c {
                        let sub = &q * &a[k][j];
                        a[i][j] = &a[i][j] - &sub;
                    }
                    if !rem.is_zero() {
                        a.swap(i, k);
                        clean = false;
                    }
                }
                for j in k + 1..c {
                    if a[k][j].is_zero() {
                        continue;
                    }
                    let (q, rem) = a[k][j].div_rem(&a[k][k]).expect("pivot is nonzero");
                    for row in a.iter_mut().skip(k) {
                        let sub = &q * &row[k];
                        row[j] = &row[j] - &sub;
                    }
                    if !rem.is_zero() {
                        for row in a.iter_mut() {
                            row.swap(j, k);
                        }
                        clean = false;
                    }
                }
                if !clean {
                    continue;
                }
                // pivot must divide the remaining block
                let bad = (k + 1..r).find(|&i| (k + 1..c).any(|j| !a[i][j].is_divisible_by(&a[k][k])));
                match bad {
                    Some(i) => {
                        for j in k..c {
                            let v = a[i][j].clone();
                            a[k][j] = &a[k][j] + &v;
                        }
                    }
                    None => break,
                }
            }
            diag.push(a[k][k].monic());
        }
        diag
    }

    /// Length of the cokernel over the finite chart, `None` when the cokernel
    /// has positive rank.
    pub fn finite_length(&self) -> Option<usize> {
        if self.rows != self.cols {
            return None;
        }
        self.invariant_factors()
            .iter()
            .map(|f| f.degree().finite())
            .sum()
    }

    /// The matrix of the bundle map `⊕ O(a_t ∞) → ⊕ O(b_j ∞)` in the ∞-chart
    /// coordinate `u = 1/x`, with local frames `x^{a_t} e_t` and `x^{b_j} e_j`.
    /// Entry (j, t) is `f_{jt}(1/u) u^{b_j - a_t}`, a polynomial in `u` when
    /// the degree bounds hold; `None` otherwise.
    pub fn infinity_chart(&self, source: &[i64], target: &[i64]) -> Option<PolyMatrix> {
        if source.len() != self.cols || target.len() != self.rows {
            return None;
        }
        let t = &self.tower;
        let mut out = Vec::with_capacity(self.entries.len());
        for j in 0..self.rows {
            for s in 0..self.cols {
                let f = self.get(j, s);
                let e = target[j] - source[s];
                let Some(d) = f.degree().finite() else {
                    out.push(Poly::zero(t));
                    continue;
                };
                if d as i64 > e {
                    return None;
                }
                // f(1/u) u^e = Σ c_k u^{e-k}
                let e = e as usize;
                let mut coeffs = vec![t.zero(); e + 1];
                for (k, &c) in f.coeffs().iter().enumerate() {
                    coeffs[e - k] = c;
                }
                out.push(Poly::new(t, coeffs));
            }
        }
        Some(PolyMatrix::new(t, self.rows, self.cols, out))
    }

    /// Cokernel data at ∞ for the bundle map with the given splitting types,
    /// computed as elementary divisors over K[[u]]/(u^precision).
    pub fn infinity_divisors(
        &self,
        source: &[i64],
        target: &[i64],
        precision: usize,
    ) -> Option<InfinityDivisors> {
        let m = self.infinity_chart(source, target)?;
        Some(series_elementary_divisors(&m, precision))
    }

    pub fn display(&self, var: &str) -> String {
        let rows: Vec<String> = self
            .row_vecs()
            .iter()
            .map(|row| {
                let cells: Vec<String> = row.iter().map(|f| f.display(var)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

fn min_degree_entry(a: &[Vec<Poly>], k: usize, r: usize, c: usize) -> Option<(usize, usize)> {
    let mut best: Option<(Degree, usize, usize)> = None;
    for (i, row) in a.iter().enumerate().take(r).skip(k) {
        for (j, f) in row.iter().enumerate().take(c).skip(k) {
            if f.is_zero() {
                continue;
            }
            let d = f.degree();
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Elementary divisors at ∞: the u-adic valuations of the Smith form over
/// K[[u]] truncated at `precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfinityDivisors {
    /// Valuations below the precision, ascending.
    pub valuations: Vec<usize>,
    /// Number of diagonal entries that vanish modulo `u^precision`.
    pub saturated: usize,
    pub precision: usize,
}

impl InfinityDivisors {
    /// Total length, `None` when some divisor reached the precision.
    pub fn length(&self) -> Option<usize> {
        (self.saturated == 0).then(|| self.valuations.iter().sum())
    }

    pub fn is_trivial(&self) -> bool {
        self.saturated == 0 && self.valuations.iter().all(|&v| v == 0)
    }
}

/// Smith form over the local ring K[[u]]/(u^P): every elimination divides by
/// a pivot of minimal valuation, so the working entries stay exact mod u^P.
fn series_elementary_divisors(m: &PolyMatrix, precision: usize) -> InfinityDivisors {
    let t = m.tower();
    let (r, c) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Vec<FieldElement>>> = m
        .row_vecs()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|f| (0..precision).map(|k| f.coeff(k)).collect())
                .collect()
        })
        .collect();
    let val = |s: &[FieldElement]| s.iter().position(|x| !x.is_zero());
    let n = r.min(c);
    let mut valuations = Vec::new();
    let mut saturated = 0;
    for k in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, s) in row.iter().enumerate().skip(k) {
                if let Some(v) = val(s) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            saturated = n - k;
            break;
        };
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        valuations.push(v);
        // unit part of the pivot, inverted mod u^(P-v)
        let unit_inv = series_inverse(t, &a[k][k][v..]);
        for i in k + 1..r {
            if val(&a[i][k]).is_none() {
                continue;
            }
            let factor = series_mul(t, &a[i][k][v..], &unit_inv, precision - v);
            for j in k..c {
                let prod = series_mul(t, &factor, &a[k][j][v..], precision - v);
                // a[k][j] has valuation >= v, so factor * a[k][j]/u^v * u^v is exact
                for (idx, &x) in prod.iter().enumerate() {
                    let slot = &mut a[i][j][idx + v];
                    *slot = t.sub(*slot, x);
                }
            }
        }
        for j in k + 1..c {
            if val(&a[k][j]).is_none() {
                continue;
            }
            let factor = series_mul(t, &a[k][j][v..], &unit_inv, precision - v);
            for i in k..r {
                let prod = series_mul(t, &factor, &a[i][k][v..], precision - v);
                for (idx, &x) in prod.iter().enumerate() {
                    let slot = &mut a[i][j][idx + v];
                    *slot = t.sub(*slot, x);
                }
            }
        }
    }
    valuations.sort_unstable();
    InfinityDivisors {
        valuations,
        saturated,
        precision,
    }
}

fn series_mul(t: &FieldTower, a: &[FieldElement], b: &[FieldElement], len: usize) -> Vec<FieldElement> {
    let mut out = vec![t.zero(); len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            out[i + j] = t.add(out[i + j], t.mul(x, y));
        }
    }
    out
}

/// Inverse of a unit series, to the length of the input.
fn series_inverse(t: &FieldTower, a: &[FieldElement]) -> Vec<FieldElement> {
    let len = a.len();
    let a0_inv = t.inv(a[0]).expect("unit series has nonzero constant term");
    let mut inv = vec![t.zero(); len];
    inv[0] = a0_inv;
    for k in 1..len {
        let mut s = t.zero();
        for i in 1..=k {
            s = t.add(s, t.mul(a[i], inv[k - i]));
        }
        inv[k] = t.neg(t.mul(s, a0_inv));
    }
    inv
}
