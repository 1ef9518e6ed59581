//! Abelian sheaves on P¹ as periodic ladders `F_i --Π_i--> F_{i+1}`,
//! `σ*F_i --τ_i--> F_{i+1}` of split bundles `⊕_j O(a_j ∞)`.
//!
//! A map `⊕ O(a_t ∞) → ⊕ O(b_j ∞)` is a matrix over K[x] whose entry (j, t)
//! has degree at most `b_j - a_t`; column t is the image of the t-th basis
//! section. Only levels `0..ℓ` are stored: `F_{i+ℓ} = F_i(k∞)` with the same
//! matrices.

use std::fmt;

use thiserror::Error;

use crate::drinfeld::{CoverMap, DrinfeldError, DrinfeldModule};
use crate::ff::{FfError, FieldElement, FieldTower};
use crate::poly::Poly;
use crate::polymat::PolyMatrix;
use crate::report::VerificationReport;
use crate::semilinear::{SemilinearError, SemilinearSystem, Term, UnknownBlock};
use crate::Caps;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SheafError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("rank {rank} is not divisible by the cover degree {degree}")]
    NonDivisibleRank { rank: usize, degree: usize },
    #[error("search space has {required} elements, above the cap of {cap}")]
    CapExceeded { required: u128, cap: u64 },
    #[error("input fails verification: {0}")]
    Unverified(String),
    #[error(transparent)]
    Drinfeld(#[from] DrinfeldError),
    #[error(transparent)]
    Field(#[from] FfError),
}

impl From<SemilinearError> for SheafError {
    fn from(e: SemilinearError) -> Self {
        match e {
            SemilinearError::CapExceeded { required, cap } => SheafError::CapExceeded { required, cap },
            SemilinearError::ShapeMismatch { block } => {
                SheafError::ShapeMismatch(format!("unknown block {block}"))
            }
        }
    }
}

impl SheafError {
    pub fn is_cap_exceeded(&self) -> bool {
        match self {
            SheafError::CapExceeded { .. } | SheafError::Field(FfError::CapExceeded { .. }) => true,
            SheafError::Drinfeld(d) => d.is_cap_exceeded(),
            _ => false,
        }
    }
}

/// The bundle `⊕_j O(degs_j ∞)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplittingType {
    pub degs: Vec<i64>,
}

impl SplittingType {
    pub fn new(degs: Vec<i64>) -> SplittingType {
        SplittingType { degs }
    }

    pub fn rank(&self) -> usize {
        self.degs.len()
    }

    /// Total degree.
    pub fn degree(&self) -> i64 {
        self.degs.iter().sum()
    }

    /// The twist by `O(k ∞)`.
    pub fn twist(&self, k: i64) -> SplittingType {
        SplittingType::new(self.degs.iter().map(|d| d + k).collect())
    }
}

/// Bound for entry (j, t) of a map from `source` to `target`.
pub fn map_bounds<'a>(
    source: &'a SplittingType,
    target: &'a SplittingType,
) -> impl Fn(usize, usize) -> i64 + 'a {
    move |j, t| target.degs[j] - source.degs[t]
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Level {
    pub splits: SplittingType,
    pub pi: PolyMatrix,
    pub tau: PolyMatrix,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AbelianSheafLadder {
    tower: FieldTower,
    rank: usize,
    dim: usize,
    period: usize,
    twist: i64,
    characteristic: FieldElement,
    levels: Vec<Level>,
}

impl fmt::Debug for AbelianSheafLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ladder rank {} dim {} period {} twist {} characteristic {}",
            self.rank,
            self.dim,
            self.period,
            self.twist,
            self.tower.format(self.characteristic)
        )?;
        for (i, l) in self.levels.iter().enumerate() {
            writeln!(f, "  F_{i} = {:?}, Π = {:?}, τ = {:?}", l.splits.degs, l.pi, l.tau)?;
        }
        Ok(())
    }
}

impl AbelianSheafLadder {
    /// Checks shapes only; see [`verify_abelian_sheaf`] for the axioms.
    pub fn new(
        rank: usize,
        dim: usize,
        period: usize,
        twist: i64,
        characteristic: FieldElement,
        levels: Vec<Level>,
    ) -> Result<AbelianSheafLadder, SheafError> {
        let tower = levels
            .first()
            .map(|l| l.pi.tower().clone())
            .ok_or_else(|| SheafError::ShapeMismatch("no levels".into()))?;
        if rank == 0 || period == 0 {
            return Err(SheafError::ShapeMismatch("rank and period must be positive".into()));
        }
        if levels.len() != period {
            return Err(SheafError::ShapeMismatch(format!(
                "{} levels given for period {period}",
                levels.len()
            )));
        }
        if !tower.contains(characteristic) {
            return Err(SheafError::ShapeMismatch("characteristic lies in another field".into()));
        }
        for (i, l) in levels.iter().enumerate() {
            let square = |m: &PolyMatrix| m.rows() == rank && m.cols() == rank && m.tower() == &tower;
            if l.splits.rank() != rank || !square(&l.pi) || !square(&l.tau) {
                return Err(SheafError::ShapeMismatch(format!("level {i} is not of rank {rank}")));
            }
        }
        Ok(AbelianSheafLadder {
            tower,
            rank,
            dim,
            period,
            twist,
            characteristic,
            levels,
        })
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn twist(&self) -> i64 {
        self.twist
    }

    pub fn characteristic(&self) -> FieldElement {
        self.characteristic
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    fn wrap(&self, i: i64) -> (usize, i64) {
        let l = self.period as i64;
        (i.rem_euclid(l) as usize, i.div_euclid(l))
    }

    /// Splitting type of `F_i` for any integer `i`.
    pub fn splits_at(&self, i: i64) -> SplittingType {
        let (r, q) = self.wrap(i);
        self.levels[r].splits.twist(q * self.twist)
    }

    pub fn pi_at(&self, i: i64) -> &PolyMatrix {
        &self.levels[self.wrap(i).0].pi
    }

    pub fn tau_at(&self, i: i64) -> &PolyMatrix {
        &self.levels[self.wrap(i).0].tau
    }

    /// The ladder re-indexed so that its level `i` is level `i + s` of `self`.
    pub fn shifted(&self, s: i64) -> AbelianSheafLadder {
        let levels = (0..self.period as i64)
            .map(|i| Level {
                splits: self.splits_at(i + s),
                pi: self.pi_at(i + s).clone(),
                tau: self.tau_at(i + s).clone(),
            })
            .collect();
        AbelianSheafLadder { levels, ..self.clone() }
    }

    /// The same ladder over a larger field.
    pub fn base_change(&self, target: &FieldTower) -> Result<AbelianSheafLadder, SheafError> {
        let emb = self.tower.embedding_into(target)?;
        let levels = self
            .levels
            .iter()
            .map(|l| {
                Ok(Level {
                    splits: l.splits.clone(),
                    pi: l.pi.embed(&emb)?,
                    tau: l.tau.embed(&emb)?,
                })
            })
            .collect::<Result<Vec<_>, FfError>>()?;
        Ok(AbelianSheafLadder {
            tower: target.clone(),
            characteristic: emb.apply(self.characteristic)?,
            levels,
            ..self.clone()
        })
    }

    fn precision(&self) -> usize {
        let maxdeg = self
            .levels
            .iter()
            .flat_map(|l| [l.pi.max_degree(), l.tau.max_degree()])
            .filter_map(|d| d.finite())
            .max()
            .unwrap_or(0);
        self.dim + self.twist.max(0) as usize + maxdeg + 1
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Where the cokernel of a bundle map must be supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Support {
    /// At the point `x = a`, annihilated by `(x - a)^d`.
    Point(FieldElement),
    Infinity,
    /// Only the total length is constrained.
    Anywhere,
}

/// Checks a square bundle map: injective, with cokernel of total length `d`
/// supported as required.
#[allow(clippy::too_many_arguments)]
pub(crate) fn check_cokernel(
    rep: &mut VerificationReport,
    label: &str,
    m: &PolyMatrix,
    source: &SplittingType,
    target: &SplittingType,
    d: usize,
    support: Support,
    precision: usize,
) {
    let t = m.tower();
    if m.det().is_zero() {
        rep.check(label, false, "not injective (determinant vanishes)");
        return;
    }
    let factors = m.invariant_factors();
    let finite: usize = factors.iter().filter_map(|f| f.degree().finite()).sum();
    let Some(inf) = m.infinity_divisors(&source.degs, &target.degs, precision) else {
        rep.check(label, false, "entries exceed the degree bounds");
        return;
    };
    let inf_len = inf.length();
    let inf_text = inf_len.map_or_else(|| format!(">= {precision}"), |l| l.to_string());
    let invariants = factors
        .iter()
        .filter(|f| !f.is_constant())
        .map(|f| f.display("x"))
        .collect::<Vec<_>>()
        .join(", ");
    match support {
        Support::Point(xi) => {
            let power = Poly::linear(t, xi).pow(d as u32);
            let annihilated = factors.iter().all(|f| power.is_divisible_by(f));
            rep.check(
                label,
                finite == d && annihilated && inf.is_trivial(),
                format!(
                    "finite length {finite}, invariant factors [{invariants}], {}annihilated by (x - {})^{d}, ∞ length {inf_text} (precision {precision})",
                    if annihilated { "" } else { "not " },
                    t.format(xi),
                ),
            );
        }
        Support::Infinity => rep.check(
            label,
            finite == 0 && inf_len == Some(d),
            format!("finite length {finite}, ∞ length {inf_text} (precision {precision})"),
        ),
        Support::Anywhere => rep.check(
            label,
            inf_len.is_some_and(|l| l + finite == d),
            format!(
                "finite length {finite}, invariant factors [{invariants}], ∞ length {inf_text} (precision {precision})"
            ),
        ),
    }
}

pub fn verify_abelian_sheaf(l: &AbelianSheafLadder) -> VerificationReport {
    let t = l.tower();
    let mut rep = VerificationReport::new(format!(
        "abelian sheaf of rank {}, dimension {}",
        l.rank, l.dim
    ));
    let (r, d, ell, k) = (l.rank as u64, l.dim as u64, l.period as u64, l.twist);
    let lowest = k > 0 && gcd(k as u64, ell) == 1 && (k as u64) * r == d * ell && d > 0;
    rep.check(
        "twist and period",
        lowest,
        format!("k/ℓ = {k}/{ell}, d/r = {d}/{r}"),
    );
    let precision = l.precision();
    let mut bounds_ok = true;
    for i in 0..l.period as i64 {
        let (s0, s1) = (l.splits_at(i), l.splits_at(i + 1));
        let b = map_bounds(&s0, &s1);
        let ok = l.pi_at(i).respects_bounds(&b) && l.tau_at(i).respects_bounds(&b);
        bounds_ok &= ok;
        rep.check(format!("degree bounds at level {i}"), ok, "");
    }
    for i in 0..l.period as i64 {
        let lhs = l.pi_at(i + 1).try_mul(l.tau_at(i)).expect("square");
        let rhs = l.tau_at(i + 1).try_mul(&l.pi_at(i).frobenius(1)).expect("square");
        rep.check(format!("commutativity at level {i}"), lhs == rhs, "");
    }
    for i in 0..l.period as i64 {
        let composite = (i..i + l.period as i64).fold(PolyMatrix::identity(t, l.rank), |acc, j| {
            l.pi_at(j).try_mul(&acc).expect("square")
        });
        rep.check(
            format!("period identification at level {i}"),
            composite == PolyMatrix::identity(t, l.rank),
            "",
        );
    }
    if !bounds_ok {
        return rep;
    }
    for i in 0..l.period as i64 {
        let (s0, s1) = (l.splits_at(i), l.splits_at(i + 1));
        check_cokernel(
            &mut rep,
            &format!("Π cokernel at level {i}"),
            l.pi_at(i),
            &s0,
            &s1,
            l.dim,
            Support::Anywhere,
            precision,
        );
        check_cokernel(
            &mut rep,
            &format!("τ cokernel at level {i}"),
            l.tau_at(i),
            &s0,
            &s1,
            l.dim,
            Support::Point(l.characteristic),
            precision,
        );
    }
    rep
}

/// The elliptic sheaf of a Drinfeld module in the basis `1, τ, …, τ^{r-1}`
/// of K{τ}, with x acting on the right through φ(x) and τ on the left.
pub fn from_drinfeld(m: &DrinfeldModule) -> Result<AbelianSheafLadder, SheafError> {
    let rep = m.verify_standard_form();
    if let Some(c) = rep.failures().next() {
        return Err(SheafError::Unverified(c.name.clone()));
    }
    let t = m.tower();
    let r = m.rank();
    let phi = m.gen_image();
    let lead_inv = t.inv(phi.leading().expect("verified"))?;
    let mut tau = PolyMatrix::zero(t, r, r);
    for j in 0..r - 1 {
        tau.set(j + 1, j, Poly::one(t));
    }
    // τ·τ^{r-1} = lead⁻¹ (x·1 - Σ_{i<r} δ_i τ^i)
    for i in 0..r {
        let mut entry = Poly::constant(t, t.neg(t.mul(lead_inv, phi.coeff(i))));
        if i == 0 {
            entry = &entry + &Poly::monomial(t, lead_inv, 1);
        }
        tau.set(i, r - 1, entry);
    }
    let levels = (0..r as i64)
        .map(|i| Level {
            splits: SplittingType::new(
                (0..r as i64).map(|j| (i + r as i64 - 1 - j).div_euclid(r as i64)).collect(),
            ),
            pi: PolyMatrix::identity(t, r),
            tau: tau.clone(),
        })
        .collect();
    AbelianSheafLadder::new(r, 1, r, 1, m.characteristic(), levels)
}

/// Rewrites a matrix over K[y] as one over K[x] with x = p(y), in the basis
/// `y^t e_j` indexed by `j·n + t`.
pub fn push_matrix(m: &PolyMatrix, p: &Poly) -> PolyMatrix {
    let t = m.tower();
    let n = p.degree().finite().expect("cover degree");
    let mut out = PolyMatrix::zero(t, m.rows() * n, m.cols() * n);
    for j in 0..m.rows() {
        for c in 0..m.cols() {
            let g = m.get(j, c);
            if g.is_zero() {
                continue;
            }
            for s in 0..n {
                let digits = g.shift(s).radix_expansion(p).expect("p has positive degree");
                for u in 0..n {
                    let coeffs: Vec<FieldElement> = digits.iter().map(|dk| dk.coeff(u)).collect();
                    out.set(j * n + u, c * n + s, Poly::new(t, coeffs));
                }
            }
        }
    }
    out
}

/// Splitting type of π_*(⊕ O(a_j ∞')) in the basis `y^t e_j`: the section
/// `y^t x^s e_j` has pole order `t + n s` at ∞', so the summand is
/// `O(⌊(a_j - t)/n⌋ ∞)`.
pub fn push_splits(s: &SplittingType, n: usize) -> SplittingType {
    let n = n as i64;
    SplittingType::new(
        s.degs
            .iter()
            .flat_map(|&a| (0..n).map(move |t| (a - t).div_euclid(n)))
            .collect(),
    )
}

/// π_* of a ladder on the cover.
pub fn pushforward(l: &AbelianSheafLadder, cover: &CoverMap) -> Result<AbelianSheafLadder, SheafError> {
    let t = l.tower();
    let p = cover.poly_over(t)?;
    let n = cover.degree();
    let g = gcd(l.twist.unsigned_abs(), n as u64) as usize;
    let period = l.period * n / g;
    let twist = l.twist / g as i64;
    let levels = (0..period as i64)
        .map(|i| Level {
            splits: push_splits(&l.splits_at(i), n),
            pi: push_matrix(l.pi_at(i), &p),
            tau: push_matrix(l.tau_at(i), &p),
        })
        .collect();
    AbelianSheafLadder::new(
        l.rank * n,
        l.dim,
        period,
        twist,
        p.eval(l.characteristic),
        levels,
    )
}

/// A ladder isomorphism `U_i : F_i → F'_i`, one matrix per stored level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LadderIso {
    pub maps: Vec<PolyMatrix>,
}

fn same_shape(l1: &AbelianSheafLadder, l2: &AbelianSheafLadder) -> Result<(), SheafError> {
    let key = |l: &AbelianSheafLadder| (l.rank, l.dim, l.period, l.twist, l.characteristic);
    if l1.tower != l2.tower {
        return Err(SheafError::ShapeMismatch("ladders over different fields".into()));
    }
    if key(l1) != key(l2) {
        return Err(SheafError::ShapeMismatch(
            "rank, dimension, period, twist or characteristic differ".into(),
        ));
    }
    Ok(())
}

/// Equations `U_{i+1} Π_i = Π'_i U_i` and `U_{i+1} τ_i = τ'_i σ(U_i)`, with
/// `U_ℓ = U_0`; unknown `i` is `U_i` with bounds from `F_i → F'_i(shift ∞)`.
fn ladder_system(
    l1: &AbelianSheafLadder,
    l2: &AbelianSheafLadder,
    shift: i64,
) -> Result<SemilinearSystem, SheafError> {
    let t = l1.tower();
    let r = l1.rank;
    let ell = l1.period as i64;
    let blocks = (0..ell)
        .map(|i| {
            let (a, b) = (l1.splits_at(i), l2.splits_at(i).twist(shift));
            UnknownBlock::new(r, r, |j, s| b.degs[j] - a.degs[s])
        })
        .collect();
    let mut sys = SemilinearSystem::new(t, blocks);
    let id = PolyMatrix::identity(t, r);
    for i in 0..ell {
        let next = ((i + 1) % ell) as usize;
        let cur = i as usize;
        sys.add_equation(vec![
            Term { left: id.clone(), unknown: next, twist: 0, right: l1.pi_at(i).clone() },
            Term { left: l2.pi_at(i).neg(), unknown: cur, twist: 0, right: id.clone() },
        ])?;
        sys.add_equation(vec![
            Term { left: id.clone(), unknown: next, twist: 0, right: l1.tau_at(i).clone() },
            Term { left: l2.tau_at(i).neg(), unknown: cur, twist: 1, right: id.clone() },
        ])?;
    }
    Ok(sys)
}

fn is_unit_matrix(m: &PolyMatrix) -> bool {
    let d = m.det();
    !d.is_zero() && d.is_constant()
}

/// All ladder isomorphisms `L1 → L2`, canonically ordered.
pub fn semilinear_iso_solver(
    l1: &AbelianSheafLadder,
    l2: &AbelianSheafLadder,
    caps: &Caps,
) -> Result<Vec<LadderIso>, SheafError> {
    same_shape(l1, l2)?;
    let sys = ladder_system(l1, l2, 0)?;
    let space = sys.solve();
    let sols = space.filter(caps.solution_space, |x| x.iter().all(is_unit_matrix))?;
    Ok(sols.into_iter().map(|maps| LadderIso { maps }).collect())
}

/// True when `iso` satisfies every defining equation of a ladder isomorphism.
pub fn is_ladder_iso(l1: &AbelianSheafLadder, l2: &AbelianSheafLadder, iso: &LadderIso) -> bool {
    if same_shape(l1, l2).is_err() || iso.maps.len() != l1.period {
        return false;
    }
    let ell = l1.period as i64;
    (0..ell).all(|i| {
        let u = &iso.maps[i as usize];
        let un = &iso.maps[((i + 1) % ell) as usize];
        let (a, b) = (l1.splits_at(i), l2.splits_at(i));
        u.rows() == l1.rank
            && u.respects_bounds(map_bounds(&a, &b))
            && is_unit_matrix(u)
            && un.try_mul(l1.pi_at(i)) == l2.pi_at(i).try_mul(u)
            && un.try_mul(l1.tau_at(i)) == l2.tau_at(i).try_mul(&u.frobenius(1))
    })
}

/// An action of y on a ladder: `Y_i : F_i → F_i(∞)` commuting with Π and τ,
/// with `p(Y_i) = x`. The ladder on the cover is the same data with y acting
/// through `Y`, identified with the original by the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SheafModuleStructure {
    pub y: Vec<PolyMatrix>,
}

/// All module structures over F_q[y] on `l` compatible with the cover.
pub fn enumerate_sheaf_module_structures(
    l: &AbelianSheafLadder,
    cover: &CoverMap,
    caps: &Caps,
) -> Result<Vec<SheafModuleStructure>, SheafError> {
    let n = cover.degree();
    if l.rank % n != 0 {
        return Err(SheafError::NonDivisibleRank { rank: l.rank, degree: n });
    }
    let t = l.tower();
    let p = cover.poly_over(t)?;
    let sys = ladder_system(l, l, 1)?;
    let space = sys.solve();
    let x_id = PolyMatrix::scalar(t, l.rank, &Poly::x(t));
    let ell = l.period as i64;
    let sols = space.filter(caps.solution_space, |ys| {
        ys.iter().enumerate().all(|(i, y)| {
            if y.eval_poly(&p) != x_id {
                return false;
            }
            // y^j has pole order j/n < 1 at ∞, so Y^j maps F_i into F_i(∞)
            let (a, b) = (l.splits_at(i as i64 % ell), l.splits_at(i as i64 % ell).twist(1));
            let mut power = y.clone();
            for _ in 2..n {
                power = power.try_mul(y).expect("square");
                if !power.respects_bounds(map_bounds(&a, &b)) {
                    return false;
                }
            }
            true
        })
    })?;
    Ok(sols.into_iter().map(|y| SheafModuleStructure { y }).collect())
}

/// Ladder automorphisms `U` of `l` with `U_i Y1_i = Y2_i U_i`: isomorphisms
/// between two module structures on the same ladder.
pub fn module_structure_isomorphisms(
    l: &AbelianSheafLadder,
    s1: &SheafModuleStructure,
    s2: &SheafModuleStructure,
    caps: &Caps,
) -> Result<Vec<LadderIso>, SheafError> {
    if s1.y.len() != l.period || s2.y.len() != l.period {
        return Err(SheafError::ShapeMismatch("one matrix per level expected".into()));
    }
    let mut sys = ladder_system(l, l, 0)?;
    let id = PolyMatrix::identity(l.tower(), l.rank);
    for i in 0..l.period {
        sys.add_equation(vec![
            Term { left: id.clone(), unknown: i, twist: 0, right: s1.y[i].clone() },
            Term { left: s2.y[i].neg(), unknown: i, twist: 0, right: id.clone() },
        ])?;
    }
    let space = sys.solve();
    let sols = space.filter(caps.solution_space, |x| x.iter().all(is_unit_matrix))?;
    Ok(sols.into_iter().map(|maps| LadderIso { maps }).collect())
}
