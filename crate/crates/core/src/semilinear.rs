//! Linear systems in unknown polynomial matrices with Frobenius-twisted terms.
//!
//! Every equation has the form `Σ_k L_k · σ^{s_k}(X_{u_k}) · R_k = 0`. Since
//! σ is additive and fixes F_p, the map from the F_p-coordinates of the
//! unknowns to the coordinates of the left-hand sides is F_p-linear, and the
//! solution set is the kernel of one matrix over F_p.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::ff::{FieldElement, FieldTower};
use crate::poly::Poly;
use crate::polymat::PolyMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemilinearError {
    #[error("solution space has {required} elements, above the cap of {cap}")]
    CapExceeded { required: u128, cap: u64 },
    #[error("term shapes do not match the unknown block {block}")]
    ShapeMismatch { block: usize },
}

/// An unknown `rows × cols` matrix whose entry (j, t) has degree at most
/// `bounds[j][t]` (negative bounds force the entry to vanish).
#[derive(Clone, Debug)]
pub struct UnknownBlock {
    pub rows: usize,
    pub cols: usize,
    pub bounds: Vec<Vec<i64>>,
}

impl UnknownBlock {
    pub fn new(rows: usize, cols: usize, bound: impl Fn(usize, usize) -> i64) -> UnknownBlock {
        UnknownBlock {
            rows,
            cols,
            bounds: (0..rows).map(|j| (0..cols).map(|t| bound(j, t)).collect()).collect(),
        }
    }
}

/// `left · σ^twist(X_unknown) · right`.
#[derive(Clone, Debug)]
pub struct Term {
    pub left: PolyMatrix,
    pub unknown: usize,
    pub twist: u64,
    pub right: PolyMatrix,
}

#[derive(Clone, Debug)]
pub struct SemilinearSystem {
    tower: FieldTower,
    blocks: Vec<UnknownBlock>,
    equations: Vec<Vec<Term>>,
}

/// One F_p-coordinate of one unknown: block, entry, x-power, digit.
#[derive(Clone, Copy, Debug)]
struct Coordinate {
    block: usize,
    row: usize,
    col: usize,
    power: usize,
    digit: usize,
}

impl SemilinearSystem {
    pub fn new(tower: &FieldTower, blocks: Vec<UnknownBlock>) -> SemilinearSystem {
        SemilinearSystem {
            tower: tower.clone(),
            blocks,
            equations: Vec::new(),
        }
    }

    pub fn blocks(&self) -> &[UnknownBlock] {
        &self.blocks
    }

    /// Adds the equation `Σ terms = 0`.
    pub fn add_equation(&mut self, terms: Vec<Term>) -> Result<(), SemilinearError> {
        let shape = terms.first().map(|t| (t.left.rows(), t.right.cols()));
        for term in &terms {
            let b = self
                .blocks
                .get(term.unknown)
                .ok_or(SemilinearError::ShapeMismatch { block: term.unknown })?;
            if term.left.cols() != b.rows
                || term.right.rows() != b.cols
                || Some((term.left.rows(), term.right.cols())) != shape
            {
                return Err(SemilinearError::ShapeMismatch { block: term.unknown });
            }
        }
        self.equations.push(terms);
        Ok(())
    }

    fn coordinates(&self) -> Vec<Coordinate> {
        let digits = self.tower.base_degree() * self.tower.degree();
        let mut out = Vec::new();
        for (block, b) in self.blocks.iter().enumerate() {
            for row in 0..b.rows {
                for col in 0..b.cols {
                    let bound = b.bounds[row][col];
                    for power in 0..=bound.max(-1) {
                        for digit in 0..digits {
                            out.push(Coordinate {
                                block,
                                row,
                                col,
                                power: power as usize,
                                digit,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn basis_element(&self, digit: usize) -> FieldElement {
        let p = self.tower.characteristic();
        self.tower
            .element(p.pow(digit as u32))
            .expect("p^digit is below the field size")
    }

    /// The unknown matrices with the single coordinate `c` set to one.
    fn unit_matrix(&self, c: &Coordinate) -> PolyMatrix {
        let t = &self.tower;
        let b = &self.blocks[c.block];
        let mut m = PolyMatrix::zero(t, b.rows, b.cols);
        m.set(c.row, c.col, Poly::monomial(t, self.basis_element(c.digit), c.power));
        m
    }

    /// Kernel of the system over F_p.
    pub fn solve(&self) -> SolutionSpace {
        let t = &self.tower;
        let p = t.characteristic();
        let digits = t.base_degree() * t.degree();
        let coords = self.coordinates();
        // columns of the F_p matrix, as sparse (row key -> value) maps
        let columns: Vec<Vec<((usize, usize, usize, usize, usize), u32)>> = coords
            .par_iter()
            .map(|c| {
                let x = self.unit_matrix(c);
                let mut col = Vec::new();
                for (e, terms) in self.equations.iter().enumerate() {
                    let mut acc: Option<PolyMatrix> = None;
                    for term in terms.iter().filter(|term| term.unknown == c.block) {
                        let y = term
                            .left
                            .try_mul(&x.frobenius(term.twist))
                            .and_then(|m| m.try_mul(&term.right))
                            .expect("shapes checked on insertion");
                        acc = Some(match acc {
                            None => y,
                            Some(a) => a.try_add(&y).expect("same shape"),
                        });
                    }
                    let Some(acc) = acc else { continue };
                    for i in 0..acc.rows() {
                        for j in 0..acc.cols() {
                            for (k, &coef) in acc.get(i, j).coeffs().iter().enumerate() {
                                let mut v = coef.value();
                                for d in 0..digits {
                                    if v % p != 0 {
                                        col.push(((e, i, j, k, d), v % p));
                                    }
                                    v /= p;
                                }
                            }
                        }
                    }
                }
                col
            })
            .collect();
        let mut row_index: HashMap<(usize, usize, usize, usize, usize), usize> = HashMap::new();
        for col in &columns {
            for (key, _) in col {
                let n = row_index.len();
                row_index.entry(*key).or_insert(n);
            }
        }
        let mut rows = vec![vec![0u32; coords.len()]; row_index.len()];
        for (j, col) in columns.iter().enumerate() {
            for (key, v) in col {
                rows[row_index[key]][j] = *v;
            }
        }
        let kernel = nullspace_mod_p(rows, coords.len(), p);
        let basis = kernel
            .into_iter()
            .map(|v| self.assemble(&coords, &v))
            .collect();
        SolutionSpace {
            tower: t.clone(),
            shapes: self.blocks.iter().map(|b| (b.rows, b.cols)).collect(),
            basis,
        }
    }

    fn assemble(&self, coords: &[Coordinate], v: &[u32]) -> Vec<PolyMatrix> {
        let t = &self.tower;
        let mut out: Vec<PolyMatrix> = self
            .blocks
            .iter()
            .map(|b| PolyMatrix::zero(t, b.rows, b.cols))
            .collect();
        for (c, &a) in coords.iter().zip(v) {
            if a == 0 {
                continue;
            }
            let coef = t.mul(t.from_int(a as i64), self.basis_element(c.digit));
            let term = Poly::monomial(t, coef, c.power);
            let cur = out[c.block].get(c.row, c.col).clone();
            out[c.block].set(c.row, c.col, &cur + &term);
        }
        out
    }

    /// Checks a candidate against every equation exactly.
    pub fn is_solution(&self, x: &[PolyMatrix]) -> bool {
        if x.len() != self.blocks.len() {
            return false;
        }
        for (b, m) in self.blocks.iter().zip(x) {
            if (m.rows(), m.cols()) != (b.rows, b.cols)
                || !m.respects_bounds(|j, t| b.bounds[j][t])
            {
                return false;
            }
        }
        self.equations.iter().all(|terms| {
            let mut acc: Option<PolyMatrix> = None;
            for term in terms {
                let y = term
                    .left
                    .try_mul(&x[term.unknown].frobenius(term.twist))
                    .and_then(|m| m.try_mul(&term.right));
                let Some(y) = y else { return false };
                acc = Some(match acc {
                    None => y,
                    Some(a) => a.try_add(&y).expect("same shape"),
                });
            }
            acc.is_none_or(|a| a.is_zero())
        })
    }
}

/// The F_p-vector space of solutions, given by a basis.
#[derive(Clone, Debug)]
pub struct SolutionSpace {
    tower: FieldTower,
    shapes: Vec<(usize, usize)>,
    basis: Vec<Vec<PolyMatrix>>,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<PolyMatrix>] {
        &self.basis
    }

    /// Number of solutions, `p^dim`.
    pub fn cardinality(&self) -> u128 {
        (self.tower.characteristic() as u128).saturating_pow(self.basis.len() as u32)
    }

    /// The solution with F_p-coordinates given by the base-p digits of `index`.
    pub fn element(&self, mut index: u128) -> Vec<PolyMatrix> {
        let t = &self.tower;
        let p = t.characteristic() as u128;
        let mut out: Vec<PolyMatrix> = self
            .shapes
            .iter()
            .map(|&(r, c)| PolyMatrix::zero(t, r, c))
            .collect();
        for b in &self.basis {
            let d = (index % p) as i64;
            index /= p;
            if d == 0 {
                continue;
            }
            let scale = Poly::constant(t, t.from_int(d));
            for (o, m) in out.iter_mut().zip(b) {
                *o = o.try_add(&m.scale(&scale)).expect("same shape");
            }
        }
        out
    }

    /// All solutions accepted by `keep`, canonically sorted. Fails when the
    /// space is larger than `cap`.
    pub fn filter<F>(&self, cap: u64, keep: F) -> Result<Vec<Vec<PolyMatrix>>, SemilinearError>
    where
        F: Fn(&[PolyMatrix]) -> bool + Sync,
    {
        let n = self.cardinality();
        if n > cap as u128 {
            return Err(SemilinearError::CapExceeded { required: n, cap });
        }
        let mut out: Vec<Vec<PolyMatrix>> = (0..n as u64)
            .into_par_iter()
            .map(|i| self.element(i as u128))
            .filter(|x| keep(x))
            .collect();
        out.sort();
        Ok(out)
    }
}

/// Basis of `{v : rows · v = 0}` over F_p, one vector per free column.
pub fn nullspace_mod_p(mut rows: Vec<Vec<u32>>, ncols: usize, p: u32) -> Vec<Vec<u32>> {
    let inv = |a: u32| -> u32 {
        let mut r = 1u64;
        let mut b = a as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let s = inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = (*v as u64 * s as u64 % p as u64) as u32;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (v, &w) in row.iter_mut().zip(&pivot_row) {
                *v = ((*v + p - (f as u64 * w as u64 % p as u64) as u32) % p) as u32;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let mut is_pivot = vec![false; ncols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![0u32; ncols];
            v[free] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - rows[i][free]) % p;
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_small() {
        // x + y + z = 0 over F_3
        let k = nullspace_mod_p(vec![vec![1, 1, 1]], 3, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(v.iter().sum::<u32>() % 3, 0);
        }
        let k = nullspace_mod_p(vec![vec![1, 0], vec![0, 1]], 2, 2);
        assert!(k.is_empty());
    }

    #[test]
    fn twisted_scalar_equation() {
        // u · y = -y · σ(u) over F_9 with u constant: u^(q-1) = -1
        let t = FieldTower::new(3, &[0, 1], &[vec![1], vec![0], vec![1]]).unwrap();
        let y = PolyMatrix::new(&t, 1, 1, vec![Poly::from_ints(&t, &[0, 1])]);
        let id = PolyMatrix::identity(&t, 1);
        let mut sys = SemilinearSystem::new(&t, vec![UnknownBlock::new(1, 1, |_, _| 0)]);
        sys.add_equation(vec![
            Term { left: id.clone(), unknown: 0, twist: 0, right: y.clone() },
            Term { left: y.clone(), unknown: 0, twist: 1, right: id.clone() },
        ])
        .unwrap();
        let space = sys.solve();
        let sols = space.filter(1 << 10, |x| !x[0].is_zero()).unwrap();
        assert_eq!(sols.len(), 2);
        for s in &sols {
            assert!(sys.is_solution(s));
            let u = s[0].get(0, 0).coeff(0);
            assert_eq!(t.pow(u, 2), t.from_int(-1));
        }
    }
}
