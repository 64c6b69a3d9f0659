mod common;

use common::*;
use flatfix::averaging::{
    check_invariant, det_table, lefschetz_from, nielsen_from, recipe_subgroup, CosetTable, InvariantData,
};
use flatfix::crystal::{CrystGroup, Decomposition};
use flatfix::exact::rational::{format_rational, parse_rational};
use flatfix::exact::{cokernel, hnf, snf, Int, IntMatrix, Lattice, RatMatrix, RatVec, Rational};
use flatfix::nvmorph::NvMorphism;
use flatfix::trace::{lift_change_class, reidemeister_trace, ClassContext, TraceVector};
use num::{Signed, Zero};
use proptest::prelude::*;
use rand::Rng;

fn int_mat(rows: &[Vec<i64>]) -> IntMatrix {
    IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect()).unwrap()
}

fn square(max_dim: usize, range: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_dim).prop_flat_map(move |m| prop::collection::vec(prop::collection::vec(-range..=range, m), m))
}

fn sublattice(rng: &mut rand_chacha::ChaCha8Rng, m: usize) -> Lattice {
    loop {
        let gens: Vec<RatVec> = (0..m)
            .map(|_| (0..m).map(|_| Rational::from_integer(Int::from(rng.gen_range(-4..=4)))).collect())
            .collect();
        let l = Lattice::from_generators(m, &gens).unwrap();
        if l.is_full_rank() {
            return l;
        }
    }
}

fn same(a: &Lattice, b: &Lattice) -> bool {
    a.contains_lattice(b) && b.contains_lattice(a)
}

fn groups() -> Vec<CrystGroup> {
    ["klein.json", "hantzsche_wendt_times3.json", "torus2_diag_2_3.json"]
        .iter()
        .map(|n| fixture(n).morphism.group().clone())
        .collect()
}

/// Random morphisms from every family used in the suite.
fn random_morphism(seed: u64) -> NvMorphism {
    let mut rng = rng(seed);
    let klein = fixture("klein.json").morphism.group().clone();
    match seed % 4 {
        0 => NvMorphism::torus_linear(&int_matrix(&random_matrix(&mut rng, 2, 3))).unwrap(),
        1 => random_circle(&mut rng),
        2 => random_klein(&mut rng, &klein),
        _ => {
            let f = random_klein(&mut rng, &klein);
            let x = random_tuple(&mut rng, &klein, f.n(), 2);
            f.conjugate(&x).unwrap()
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..500) {
        let x = Rational::new(Int::from(p), Int::from(q));
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn cokernel_order_is_abs_det(a in square(3, 6)) {
        let m = int_matrix(&a);
        let det = m.det().unwrap();
        let c = cokernel(&m.columns(), &RatMatrix::identity(a.len())).unwrap();
        if det.is_zero() {
            prop_assert!(c.order().is_none());
        } else {
            prop_assert_eq!(Rational::from_integer(c.order().unwrap()), det.abs());
        }
    }

    #[test]
    fn smith_form_is_a_unimodular_diagonalization(a in square(4, 9)) {
        let m = int_mat(&a);
        let s = snf(&m);
        prop_assert_eq!(&(&s.u * &m) * &s.v, s.d.clone());
        prop_assert_eq!(s.u.det().unwrap().abs(), Int::from(1));
        prop_assert_eq!(s.v.det().unwrap().abs(), Int::from(1));
        let d = s.invariant_factors();
        for w in d.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        for i in 0..a.len() {
            for j in 0..a.len() {
                prop_assert!(i == j || s.d.get(i, j).is_zero());
            }
        }
    }

    #[test]
    fn hermite_form_is_a_unimodular_echelon(a in square(4, 9)) {
        let m = int_mat(&a);
        let h = hnf(&m);
        prop_assert_eq!(&h.u * &m, h.h.clone());
        prop_assert_eq!(h.u.det().unwrap().abs(), Int::from(1));
        prop_assert_eq!(h.rank, int_matrix(&a).rank());
    }

    #[test]
    fn intersection_laws(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let m = 1 + (seed % 3) as usize;
        let (a, b, c) = (sublattice(&mut rng, m), sublattice(&mut rng, m), sublattice(&mut rng, m));
        let ab = a.intersect(&b).unwrap();
        prop_assert!(same(&ab, &b.intersect(&a).unwrap()));
        prop_assert!(a.contains_lattice(&ab) && b.contains_lattice(&ab));
        prop_assert!(same(&ab.intersect(&c).unwrap(), &a.intersect(&b.intersect(&c).unwrap()).unwrap()));
        prop_assert!(ab.is_full_rank());
    }

    #[test]
    fn decompose_inverts_reconstruct(seed in any::<u64>()) {
        let mut rng = rng(seed);
        for g in groups() {
            let t: Vec<Int> = (0..g.dim()).map(|_| Int::from(rng.gen_range(-9..=9))).collect();
            let d = Decomposition { lattice_coords: t, rep_index: rng.gen_range(0..g.holonomy_order()) };
            prop_assert_eq!(g.decompose(&g.reconstruct(&d)).unwrap(), d);
            let x = random_element(&mut rng, &g, 3);
            let y = random_element(&mut rng, &g, 3);
            prop_assert!(g.contains(&x.compose(&y)));
            prop_assert!(g.contains(&x.inverse().unwrap()));
        }
    }

    #[test]
    fn morphisms_are_homomorphisms(seed in any::<u64>()) {
        let f = random_morphism(seed);
        prop_assert!(f.validate().unwrap().is_valid());
        let mut rng = rng(seed ^ 0x5eed);
        let g = f.group();
        let x = random_element(&mut rng, g, 3);
        let y = random_element(&mut rng, g, 3);
        let fxy = f.evaluate(&x.compose(&y)).unwrap();
        prop_assert_eq!(fxy, f.evaluate(&x).unwrap().mul(&f.evaluate(&y).unwrap()).unwrap());
    }

    #[test]
    fn sigma_and_branches_factor_through_s(seed in any::<u64>()) {
        let f = random_morphism(seed);
        let inv = InvariantData::new(&f).unwrap();
        prop_assert!(check_invariant(&f, &inv.s).is_ok());
        let mut rng = rng(seed ^ 0xface);
        let g = f.group();
        let x = random_element(&mut rng, g, 3);
        let k: Vec<Int> = (0..inv.s.rank()).map(|_| Int::from(rng.gen_range(-3..=3))).collect();
        let s = flatfix::crystal::AffineElement::translation(inv.s.vector(&k));
        let fx = f.evaluate(&x).unwrap();
        let fxs = f.evaluate(&x.compose(&s)).unwrap();
        prop_assert_eq!(&fx.perm, &fxs.perm);
        for i in 0..f.n() {
            prop_assert!(g.contains(&f.evaluate(&s).unwrap().components[i]));
            prop_assert_eq!(fx.components[i].linear_part(), fxs.components[i].linear_part());
        }
    }

    #[test]
    fn trace_sums_to_lefschetz_and_support_is_nielsen(seed in any::<u64>()) {
        let f = random_morphism(seed);
        let inv = InvariantData::new(&f).unwrap();
        let table = det_table(&inv).unwrap();
        let t = reidemeister_trace(&f).unwrap();
        prop_assert_eq!(t.coefficient_sum(), lefschetz_from(&inv, &table).unwrap());
        prop_assert_eq!(Int::from(t.support_size()), nielsen_from(&inv, &table).unwrap());
    }

    #[test]
    fn recipe_subgroup_gives_the_same_numbers(seed in any::<u64>()) {
        let f = random_morphism(seed);
        let inv = InvariantData::new(&f).unwrap();
        let r = recipe_subgroup(&f).unwrap();
        prop_assert!(inv.s.contains_lattice(&r));
        let rinv = InvariantData::with_lattice(&f, r).unwrap();
        let (a, b) = (det_table(&inv).unwrap(), det_table(&rinv).unwrap());
        prop_assert_eq!(lefschetz_from(&inv, &a).unwrap(), lefschetz_from(&rinv, &b).unwrap());
        prop_assert_eq!(nielsen_from(&inv, &a).unwrap(), nielsen_from(&rinv, &b).unwrap());
    }

    #[test]
    fn lift_change_is_covariant(seed in any::<u64>()) {
        let f = random_morphism(seed);
        let mut rng = rng(seed ^ 0xc0de);
        let x = random_tuple(&mut rng, f.group(), f.n(), 2);
        let g = f.conjugate(&x).unwrap();
        let t = reidemeister_trace(&f).unwrap();
        let ctx = ClassContext::new(&g).unwrap();
        let mut mapped = TraceVector::new();
        for (c, k) in t.iter() {
            mapped.add(lift_change_class(&ctx, &x, c).unwrap(), k);
        }
        prop_assert_eq!(mapped, reidemeister_trace(&g).unwrap());
    }

    #[test]
    fn coset_table_covers_pi_mod_s(seed in any::<u64>()) {
        let f = random_morphism(seed);
        let inv = InvariantData::new(&f).unwrap();
        let cosets = CosetTable::new(&f, &inv.s).unwrap();
        prop_assert_eq!(Int::from(cosets.len()), inv.index_pi_s.clone());
        prop_assert!(cosets.reps[0].element.is_identity());
    }
}

#[test]
fn quotient_tables_are_groups() {
    for g in groups() {
        let q = g.quotient_table().unwrap();
        let n = q.order();
        for a in 0..n {
            assert_eq!(q.product(0, a), a);
            assert_eq!(q.product(a, q.inverse(a)), 0);
            for b in 0..n {
                for c in 0..n {
                    assert_eq!(q.product(q.product(a, b), c), q.product(a, q.product(b, c)));
                }
            }
        }
    }
}

#[test]
fn relators_hold_in_the_group() {
    for g in groups() {
        for r in g.relators().unwrap() {
            assert!(g.evaluate_word(&r.word).unwrap().is_identity(), "{}", r.name);
        }
    }
}
