//! Shtukas: a single square `j, τ` of rank-r bundles on P¹ whose cokernels
//! have length d and sit at the pole and the zero.
//!
//! Right orientation: `j : E → E'` and `τ : σ*E → E'`.
//! Left orientation: `j : E' → σ*E` and `τ : E' → E`.

use std::fmt;

use crate::drinfeld::CoverMap;
use crate::ff::{FieldElement, FieldTower};
use crate::polymat::PolyMatrix;
use crate::report::VerificationReport;
use crate::semilinear::{SemilinearSystem, Term, UnknownBlock};
use crate::sheaves::{
    check_cokernel, map_bounds, push_matrix, push_splits, AbelianSheafLadder, SheafError,
    SplittingType, Support,
};
use crate::Caps;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Right,
    Left,
}

/// A point of P¹.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Affine(FieldElement),
    Infinity,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Shtuka {
    pub orientation: Orientation,
    pub rank: usize,
    pub dim: usize,
    pub pole: Point,
    pub zero: Point,
    pub split_e: SplittingType,
    pub split_e_prime: SplittingType,
    pub j: PolyMatrix,
    pub t: PolyMatrix,
}

impl fmt::Debug for Shtuka {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} shtuka rank {} dim {} E = {:?} E' = {:?} j = {:?} τ = {:?}",
            self.orientation,
            self.rank,
            self.dim,
            self.split_e.degs,
            self.split_e_prime.degs,
            self.j,
            self.t
        )
    }
}

impl Shtuka {
    pub fn tower(&self) -> &FieldTower {
        self.j.tower()
    }

    /// Source and target splitting types of both maps.
    fn map_types(&self) -> (&SplittingType, &SplittingType) {
        match self.orientation {
            Orientation::Right => (&self.split_e, &self.split_e_prime),
            Orientation::Left => (&self.split_e_prime, &self.split_e),
        }
    }

    /// The same shtuka over a larger field.
    pub fn base_change(&self, target: &FieldTower) -> Result<Shtuka, SheafError> {
        let emb = self.tower().embedding_into(target)?;
        let point = |p: Point| -> Result<Point, SheafError> {
            Ok(match p {
                Point::Affine(a) => Point::Affine(emb.apply(a)?),
                Point::Infinity => Point::Infinity,
            })
        };
        Ok(Shtuka {
            pole: point(self.pole)?,
            zero: point(self.zero)?,
            j: self.j.embed(&emb)?,
            t: self.t.embed(&emb)?,
            ..self.clone()
        })
    }
}

fn support(p: Point) -> Support {
    match p {
        Point::Affine(a) => Support::Point(a),
        Point::Infinity => Support::Infinity,
    }
}

pub fn verify_shtuka(s: &Shtuka) -> VerificationReport {
    let mut rep = VerificationReport::new(format!(
        "{} shtuka of rank {}, dimension {}",
        match s.orientation {
            Orientation::Right => "right",
            Orientation::Left => "left",
        },
        s.rank,
        s.dim
    ));
    let t = s.tower();
    let square = |m: &PolyMatrix| m.rows() == s.rank && m.cols() == s.rank && m.tower() == t;
    let points_ok = [s.pole, s.zero]
        .iter()
        .all(|p| !matches!(p, Point::Affine(a) if !t.contains(*a)));
    let shape_ok = square(&s.j)
        && square(&s.t)
        && s.split_e.rank() == s.rank
        && s.split_e_prime.rank() == s.rank
        && points_ok;
    rep.check("shape", shape_ok, "");
    if !shape_ok {
        return rep;
    }
    let (src, dst) = s.map_types();
    let b = map_bounds(src, dst);
    let j_ok = s.j.respects_bounds(&b);
    let t_ok = s.t.respects_bounds(&b);
    rep.check("degree bounds of j", j_ok, "");
    rep.check("degree bounds of τ", t_ok, "");
    let maxdeg = [s.j.max_degree(), s.t.max_degree()]
        .iter()
        .filter_map(|d| d.finite())
        .max()
        .unwrap_or(0);
    let precision = s.dim + maxdeg + 1;
    if j_ok {
        check_cokernel(&mut rep, "j cokernel at the pole", &s.j, src, dst, s.dim, support(s.pole), precision);
    }
    if t_ok {
        check_cokernel(&mut rep, "τ cokernel at the zero", &s.t, src, dst, s.dim, support(s.zero), precision);
    }
    rep
}

/// The right shtuka `(F_i, F_{i+1}, Π_i, τ_i)` of a ladder; the pole is ∞.
pub fn from_abelian_sheaf(l: &AbelianSheafLadder, i: i64) -> Shtuka {
    Shtuka {
        orientation: Orientation::Right,
        rank: l.rank(),
        dim: l.dim(),
        pole: Point::Infinity,
        zero: Point::Affine(l.characteristic()),
        split_e: l.splits_at(i),
        split_e_prime: l.splits_at(i + 1),
        j: l.pi_at(i).clone(),
        t: l.tau_at(i).clone(),
    }
}

/// π_* along `x = p(y)`. Since p is monic, ∞ is totally ramified and maps to ∞.
pub fn pushforward_shtuka(s: &Shtuka, cover: &CoverMap) -> Result<Shtuka, SheafError> {
    let t = s.tower();
    let p = cover.poly_over(t)?;
    let n = cover.degree();
    let point = |q: Point| match q {
        Point::Affine(a) => Point::Affine(p.eval(a)),
        Point::Infinity => Point::Infinity,
    };
    Ok(Shtuka {
        orientation: s.orientation,
        rank: s.rank * n,
        dim: s.dim,
        pole: point(s.pole),
        zero: point(s.zero),
        split_e: push_splits(&s.split_e, n),
        split_e_prime: push_splits(&s.split_e_prime, n),
        j: push_matrix(&s.j, &p),
        t: push_matrix(&s.t, &p),
    })
}

/// A shtuka isomorphism: `U : E₁ → E₂` and `U' : E₁' → E₂'`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShtukaIso {
    pub u: PolyMatrix,
    pub u_prime: PolyMatrix,
}

fn shtuka_system(s1: &Shtuka, s2: &Shtuka) -> Result<SemilinearSystem, SheafError> {
    let same = s1.orientation == s2.orientation
        && s1.rank == s2.rank
        && s1.dim == s2.dim
        && s1.pole == s2.pole
        && s1.zero == s2.zero
        && s1.tower() == s2.tower();
    if !same {
        return Err(SheafError::ShapeMismatch(
            "orientation, rank, dimension, pole, zero or field differ".into(),
        ));
    }
    let t = s1.tower();
    let r = s1.rank;
    let block = |a: &SplittingType, b: &SplittingType| {
        UnknownBlock::new(r, r, |j, k| b.degs[j] - a.degs[k])
    };
    let mut sys = SemilinearSystem::new(
        t,
        vec![
            block(&s1.split_e, &s2.split_e),
            block(&s1.split_e_prime, &s2.split_e_prime),
        ],
    );
    let id = PolyMatrix::identity(t, r);
    let term = |left: &PolyMatrix, unknown, twist, right: &PolyMatrix| Term {
        left: left.clone(),
        unknown,
        twist,
        right: right.clone(),
    };
    match s1.orientation {
        Orientation::Right => {
            // U' j₁ = j₂ U and U' τ₁ = τ₂ σ(U)
            sys.add_equation(vec![term(&id, 1, 0, &s1.j), term(&s2.j.neg(), 0, 0, &id)])?;
            sys.add_equation(vec![term(&id, 1, 0, &s1.t), term(&s2.t.neg(), 0, 1, &id)])?;
        }
        Orientation::Left => {
            // σ(U) j₁ = j₂ U' and U τ₁ = τ₂ U'
            sys.add_equation(vec![term(&id, 0, 1, &s1.j), term(&s2.j.neg(), 1, 0, &id)])?;
            sys.add_equation(vec![term(&id, 0, 0, &s1.t), term(&s2.t.neg(), 1, 0, &id)])?;
        }
    }
    Ok(sys)
}

/// All shtuka isomorphisms `S1 → S2`, canonically ordered.
pub fn shtuka_iso_solver(s1: &Shtuka, s2: &Shtuka, caps: &Caps) -> Result<Vec<ShtukaIso>, SheafError> {
    let sys = shtuka_system(s1, s2)?;
    let unit = |m: &PolyMatrix| {
        let d = m.det();
        !d.is_zero() && d.is_constant()
    };
    let sols = sys
        .solve()
        .filter(caps.solution_space, |x| x.iter().all(unit))?;
    Ok(sols
        .into_iter()
        .map(|mut x| {
            let u_prime = x.pop().expect("two blocks");
            let u = x.pop().expect("two blocks");
            ShtukaIso { u, u_prime }
        })
        .collect())
}

/// True when `iso` satisfies the defining equations exactly.
pub fn is_shtuka_iso(s1: &Shtuka, s2: &Shtuka, iso: &ShtukaIso) -> bool {
    let Ok(sys) = shtuka_system(s1, s2) else {
        return false;
    };
    let unit = |m: &PolyMatrix| {
        let d = m.det();
        !d.is_zero() && d.is_constant()
    };
    unit(&iso.u) && unit(&iso.u_prime) && sys.is_solution(&[iso.u.clone(), iso.u_prime.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::sheaves::{pushforward, Level};

    fn f3() -> FieldTower {
        FieldTower::prime(3).unwrap()
    }

    fn p(t: &FieldTower, c: &[i64]) -> Poly {
        Poly::from_ints(t, c)
    }

    fn one_by_one(t: &FieldTower, j: &[i64], tau: &[i64], pole: Point, zero: Point) -> Shtuka {
        Shtuka {
            orientation: Orientation::Right,
            rank: 1,
            dim: 1,
            pole,
            zero,
            split_e: SplittingType::new(vec![0]),
            split_e_prime: SplittingType::new(vec![1]),
            j: PolyMatrix::new(t, 1, 1, vec![p(t, j)]),
            t: PolyMatrix::new(t, 1, 1, vec![p(t, tau)]),
        }
    }

    #[test]
    fn rank_one_shtukas() {
        let t = f3();
        for beta in t.elements() {
            for xi in t.elements() {
                let b = t.neg(beta);
                let x = t.neg(xi);
                let s = Shtuka {
                    j: PolyMatrix::new(&t, 1, 1, vec![Poly::new(&t, vec![b, t.one()])]),
                    t: PolyMatrix::new(&t, 1, 1, vec![Poly::new(&t, vec![x, t.one()])]),
                    ..one_by_one(&t, &[1], &[1], Point::Affine(beta), Point::Affine(xi))
                };
                assert!(verify_shtuka(&s).passed(), "{}", verify_shtuka(&s));
            }
        }
        let bad = one_by_one(&t, &[0, 1], &[0, 1], Point::Affine(t.one()), Point::Affine(t.zero()));
        assert!(verify_shtuka(&bad).failed("j cokernel"));
    }

    #[test]
    fn from_companion_ladder() {
        let t = f3();
        let tau = PolyMatrix::new(&t, 2, 2, vec![p(&t, &[]), p(&t, &[0, 1]), p(&t, &[1]), p(&t, &[])]);
        let levels = (0..2)
            .map(|i| Level {
                splits: SplittingType::new(vec![(i + 1) / 2, i / 2]),
                pi: PolyMatrix::identity(&t, 2),
                tau: tau.clone(),
            })
            .collect();
        let l = AbelianSheafLadder::new(2, 1, 2, 1, t.zero(), levels).unwrap();
        let s0 = from_abelian_sheaf(&l, 0);
        let s1 = from_abelian_sheaf(&l, 1);
        assert_eq!(s0.t, tau);
        assert_eq!(s0.split_e_prime, s1.split_e);
        assert!(verify_shtuka(&s0).passed(), "{}", verify_shtuka(&s0));
        assert!(verify_shtuka(&s1).passed());
        let mut singular = s0.clone();
        singular.t = PolyMatrix::new(&t, 2, 2, vec![p(&t, &[]), p(&t, &[0, 1]), p(&t, &[]), p(&t, &[])]);
        assert!(verify_shtuka(&singular).failed("τ cokernel"));

        let cover = CoverMap::new(p(&t, &[0, 0, 1])).unwrap();
        let rank_one = AbelianSheafLadder::new(
            1,
            1,
            1,
            1,
            t.zero(),
            vec![Level {
                splits: SplittingType::new(vec![1]),
                pi: PolyMatrix::identity(&t, 1),
                tau: PolyMatrix::new(&t, 1, 1, vec![p(&t, &[0, 1])]),
            }],
        )
        .unwrap();
        let pushed = pushforward_shtuka(&from_abelian_sheaf(&rank_one, 0), &cover).unwrap();
        assert_eq!(pushed, from_abelian_sheaf(&pushforward(&rank_one, &cover).unwrap(), 0));
        assert_eq!(pushed.t, tau);
    }

    #[test]
    fn zero_moves_under_pushforward() {
        let t = FieldTower::new(3, &[0, 1], &[vec![1], vec![0], vec![1]]).unwrap();
        let cover = CoverMap::new(p(&t, &[0, 0, 1])).unwrap();
        for xi in t.elements() {
            let s = Shtuka {
                t: PolyMatrix::new(&t, 1, 1, vec![Poly::new(&t, vec![t.neg(xi), t.one()])]),
                ..one_by_one(&t, &[1], &[1], Point::Infinity, Point::Affine(xi))
            };
            assert!(verify_shtuka(&s).passed());
            let pushed = pushforward_shtuka(&s, &cover).unwrap();
            assert_eq!(pushed.zero, Point::Affine(t.mul(xi, xi)));
            assert!(verify_shtuka(&pushed).passed(), "{}", verify_shtuka(&pushed));
        }
    }

    #[test]
    fn isomorphisms_of_pushed_shtukas() {
        let t = f3();
        let caps = Caps::default();
        let cover = CoverMap::new(p(&t, &[0, 0, 1])).unwrap();
        let plus = one_by_one(&t, &[1], &[0, 1], Point::Infinity, Point::Affine(t.zero()));
        let minus = one_by_one(&t, &[1], &[0, -1], Point::Infinity, Point::Affine(t.zero()));
        assert!(shtuka_iso_solver(&plus, &minus, &caps).unwrap().is_empty());
        let selfs = shtuka_iso_solver(&plus, &plus, &caps).unwrap();
        let id = ShtukaIso { u: PolyMatrix::identity(&t, 1), u_prime: PolyMatrix::identity(&t, 1) };
        assert!(selfs.contains(&id));
        let (pp, pm) = (
            pushforward_shtuka(&plus, &cover).unwrap(),
            pushforward_shtuka(&minus, &cover).unwrap(),
        );
        let isos = shtuka_iso_solver(&pp, &pm, &caps).unwrap();
        let diag = PolyMatrix::diagonal(&t, &[p(&t, &[1]), p(&t, &[-1])]);
        assert!(isos.contains(&ShtukaIso { u: diag.clone(), u_prime: diag }));
        assert!(isos.iter().all(|i| is_shtuka_iso(&pp, &pm, i)));
    }

    #[test]
    fn left_orientation_mirrors_the_right() {
        let t = f3();
        let s = Shtuka {
            orientation: Orientation::Left,
            split_e: SplittingType::new(vec![1]),
            split_e_prime: SplittingType::new(vec![0]),
            ..one_by_one(&t, &[0, 1], &[2, 1], Point::Affine(t.zero()), Point::Affine(t.one()))
        };
        assert!(verify_shtuka(&s).passed(), "{}", verify_shtuka(&s));
        let caps = Caps::default();
        assert!(!shtuka_iso_solver(&s, &s, &caps).unwrap().is_empty());
    }
}
