use drinfeld_core::drinfeld::{aut_group, iso_solver};
use drinfeld_core::extend::{enumerate_extensions, ExtensionProblem};
use drinfeld_core::sheaves::{
    enumerate_sheaf_module_structures, from_drinfeld, module_structure_isomorphisms, pushforward,
    semilinear_iso_solver,
};
use drinfeld_core::shtuka::{from_abelian_sheaf, pushforward_shtuka, shtuka_iso_solver, verify_shtuka};
use drinfeld_core::{
    substitute, Caps, CoverMap, Degree, DrinfeldModule, FieldTower, Poly, PolyMatrix, RingTag, SkewPoly,
};
use proptest::prelude::*;

fn f3() -> FieldTower {
    FieldTower::prime(3).unwrap()
}

fn f4() -> FieldTower {
    FieldTower::new(2, &[0, 1], &[vec![1], vec![1], vec![1]]).unwrap()
}

fn f9() -> FieldTower {
    FieldTower::new(3, &[0, 1], &[vec![1], vec![0], vec![1]]).unwrap()
}

fn skew_from(t: &FieldTower, values: &[u32]) -> SkewPoly {
    let size = t.size() as u32;
    SkewPoly::new(t, values.iter().map(|v| t.element(v % size).unwrap()).collect())
}

fn all_skew(t: &FieldTower, max_deg: usize) -> Vec<SkewPoly> {
    let size = t.size() as u32;
    (0..size.pow(max_deg as u32 + 1))
        .map(|code| {
            let digits: Vec<u32> = (0..=max_deg).map(|k| code / size.pow(k as u32) % size).collect();
            skew_from(t, &digits)
        })
        .collect()
}

#[test]
fn skew_ring_axioms_exhaustive() {
    for t in [FieldTower::prime(2).unwrap(), f3()] {
        let polys = all_skew(&t, 2);
        for a in &polys {
            for b in &polys {
                let ab = a * b;
                assert_eq!(ab.degree(), a.degree().plus(b.degree()));
                for c in &polys {
                    assert_eq!(&ab * c, a * &(b * c));
                    assert_eq!(a * &(b + c), &ab + &(a * c));
                    assert_eq!(&(a + b) * c, &(a * c) + &(b * c));
                }
            }
        }
    }
}

#[test]
fn zero_degree_is_below_every_degree() {
    let t = f3();
    let zero = SkewPoly::zero(&t);
    assert!(zero.degree() < Degree::Finite(0));
    assert_eq!((&zero * &SkewPoly::tau(&t)).degree(), zero.degree());
}

#[test]
fn embeddings_are_ring_homomorphisms() {
    let f16 = f4().extension(2, 1 << 16).unwrap();
    let f81 = f9().extension(2, 1 << 16).unwrap();
    for (src, dst) in [(f3(), f9()), (f4(), f16), (f9(), f81.clone()), (f3(), f81)] {
        let emb = src.embedding_into(&dst).unwrap();
        let image: Vec<_> = src.elements().map(|a| emb.apply(a).unwrap()).collect();
        let mut distinct = image.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), image.len());
        for a in src.elements() {
            let ea = image[a.value() as usize];
            if src.is_in_base(a) {
                assert!(dst.is_in_base(ea));
            }
            for b in src.elements() {
                let eb = image[b.value() as usize];
                assert_eq!(emb.apply(src.add(a, b)).unwrap(), dst.add(ea, eb));
                assert_eq!(emb.apply(src.mul(a, b)).unwrap(), dst.mul(ea, eb));
            }
        }
    }
}

#[test]
fn substitution_is_multiplicative() {
    let t = f9();
    let p = Poly::from_ints(&t, &[1, 2, 0, 1]);
    let r = Poly::from_ints(&t, &[0, 1, 1]);
    for d in all_skew(&t, 1).iter().step_by(7) {
        let lhs = substitute(&(&p * &r), d).unwrap();
        let rhs = &substitute(&p, d).unwrap() * &substitute(&r, d).unwrap();
        assert_eq!(lhs, rhs);
    }
    let i = t.element(3).unwrap();
    assert!(substitute(&Poly::constant(&t, i), &SkewPoly::tau(&t)).is_err());
}

#[test]
fn iso_sets_are_aut_cosets() {
    let t = f9();
    for d in all_skew(&t, 2).iter().filter(|d| d.degree() == Degree::Finite(2)).step_by(11) {
        let m1 = DrinfeldModule::from_generator(RingTag::A, d.clone()).unwrap();
        let aut = aut_group(&m1).unwrap();
        assert!(aut.is_group());
        for eps in t.units().step_by(3) {
            let m2 = m1.conjugate(eps).unwrap();
            let isos = iso_solver(&m1, &m2).unwrap();
            let brute: Vec<_> = t
                .units()
                .filter(|&e| {
                    let c = SkewPoly::constant(&t, e);
                    &c * m1.gen_image() == m2.gen_image() * &c
                })
                .collect();
            assert_eq!(isos, brute);
            assert_eq!(isos.len(), aut.order());
            for &e in &isos {
                for &a in &aut.elements {
                    assert!(isos.contains(&t.mul(e, a)));
                }
            }
        }
    }
}

#[test]
fn extensions_persist_under_base_change() {
    let t = f3();
    let cover = CoverMap::new(Poly::from_ints(&t, &[1, 1, 1])).unwrap();
    let ext = t.extension(2, 1 << 16).unwrap();
    for d in all_skew(&t, 1).iter().filter(|d| d.degree() == Degree::Finite(1)) {
        let base = DrinfeldModule::from_generator(RingTag::APrime, d.clone())
            .unwrap()
            .restrict(&cover)
            .unwrap();
        let prob = ExtensionProblem::new(base, cover.clone(), 1).unwrap();
        let small = enumerate_extensions(&prob).unwrap();
        let big = enumerate_extensions(&prob.base_change(&ext).unwrap()).unwrap();
        let emb = t.embedding_into(&ext).unwrap();
        assert!(small.len() <= big.len());
        for s in &small {
            let image = s.delta.embed(&emb).unwrap();
            assert!(big.iter().any(|b| b.delta == image));
        }
    }
}

#[test]
fn module_structures_merge_over_f9() {
    let caps = Caps::default();
    for (t, count, classes) in [(f3(), 2, 2), (f9(), 4, 1)] {
        let phi = DrinfeldModule::from_generator(RingTag::A, SkewPoly::monomial(&t, t.one(), 2)).unwrap();
        let l = from_drinfeld(&phi).unwrap();
        let cover = CoverMap::new(Poly::from_ints(&t, &[0, 0, 1])).unwrap();
        let structures = enumerate_sheaf_module_structures(&l, &cover, &caps).unwrap();
        assert_eq!(structures.len(), count);
        let mut reps: Vec<usize> = Vec::new();
        for (k, s) in structures.iter().enumerate() {
            let known = reps.iter().any(|&r| {
                !module_structure_isomorphisms(&l, &structures[r], s, &caps).unwrap().is_empty()
            });
            if !known {
                reps.push(k);
            }
        }
        assert_eq!(reps.len(), classes);
    }
}

#[test]
fn shtuka_pushforward_commutes_with_ladders() {
    let caps = Caps::default();
    let t = f3();
    let cover = CoverMap::new(Poly::from_ints(&t, &[0, 0, 1])).unwrap();
    for d in all_skew(&t, 1).iter().filter(|d| d.degree() == Degree::Finite(1)) {
        let mp = DrinfeldModule::from_generator(RingTag::APrime, d.clone()).unwrap();
        let l = from_drinfeld(&mp).unwrap().shifted(1);
        let pushed = pushforward(&l, &cover).unwrap();
        let via_ladder = from_abelian_sheaf(&pushed, 0);
        let via_shtuka = pushforward_shtuka(&from_abelian_sheaf(&l, 0), &cover).unwrap();
        assert!(verify_shtuka(&via_shtuka).passed());
        assert!(shtuka_iso_solver(&via_ladder, &via_shtuka, &caps)
            .unwrap()
            .iter()
            .any(|iso| iso.u == PolyMatrix::identity(&t, 2)));
        let restricted = from_drinfeld(&mp.restrict(&cover).unwrap()).unwrap();
        assert!(!semilinear_iso_solver(&restricted, &pushed, &caps).unwrap().is_empty());
    }
}

fn matrix(t: &FieldTower, n: usize, values: &[Vec<u32>]) -> PolyMatrix {
    let size = t.size() as u32;
    let entries = values
        .iter()
        .take(n * n)
        .map(|c| Poly::new(t, c.iter().map(|v| t.element(v % size).unwrap()).collect()))
        .collect();
    PolyMatrix::new(t, n, n, entries)
}

fn entries() -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0u32..9, 0..4), 9)
}

proptest! {
    #[test]
    fn det_is_multiplicative(a in entries(), b in entries(), n in 1usize..=3) {
        let t = f9();
        let (ma, mb) = (matrix(&t, n, &a), matrix(&t, n, &b));
        prop_assert_eq!(ma.try_mul(&mb).unwrap().det(), &ma.det() * &mb.det());
    }

    #[test]
    fn finite_length_is_degree_of_det(a in entries(), n in 1usize..=3) {
        let t = f3();
        let m = matrix(&t, n, &a);
        let factors = m.invariant_factors();
        for w in factors.windows(2) {
            prop_assert!(w[1].is_divisible_by(&w[0]));
        }
        prop_assert_eq!(m.finite_length(), m.det().degree().finite());
    }

    #[test]
    fn conjugation_is_invertible(c in prop::collection::vec(0u32..9, 1..5), e in 1u32..9) {
        let t = f9();
        let d = skew_from(&t, &c);
        let eps = t.element(e).unwrap();
        let back = d.conjugate(eps).unwrap().conjugate(t.inv(eps).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn frobenius_fixes_the_base_field(v in 0u32..81) {
        let t = f9().extension(2, 1 << 16).unwrap();
        let a = t.element(v).unwrap();
        prop_assert_eq!(t.frobenius(a, t.degree() as u64), a);
        prop_assert_eq!(t.pow(a, t.size()), a);
        if t.is_in_base(a) {
            prop_assert_eq!(t.frobenius(a, 1), a);
        }
    }
}
