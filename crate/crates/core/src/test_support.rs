use crate::crystal::{AffineElement, CrystGroup};
use crate::exact::rational::{rat, ri, rvec};
use crate::exact::RatMatrix;
use crate::nvmorph::{NvMorphism, Permutation, PermutedTuple};

pub fn klein() -> CrystGroup {
    let b = AffineElement::new(vec![ri(0), rat(1, 2)], RatMatrix::diagonal(&[ri(-1), ri(1)])).unwrap();
    CrystGroup::new(2, vec![("a".into(), rvec(&[1, 0])), ("b2".into(), rvec(&[0, 1]))], vec![("b".into(), b)]).unwrap()
}

/// `F(a) = (1,1; id)`, `F(b2) = (b,b; id)`, `F(b) = (b,1; swap)`.
pub fn klein_morphism() -> NvMorphism {
    let g = klein();
    let one = AffineElement::identity(2);
    let b = g.rep(1).clone();
    let id = Permutation::identity(2);
    let images = vec![
        PermutedTuple::new(vec![one.clone(), one.clone()], id.clone()).unwrap(),
        PermutedTuple::new(vec![b.clone(), b.clone()], id).unwrap(),
        PermutedTuple::new(vec![b, one], Permutation::transposition(2, 0, 1)).unwrap(),
    ];
    NvMorphism::new(g, 2, images).unwrap()
}

/// Three branches on `T²`: `e1 ↦ ((1,0),(2,0),0; (1 2))`, `e2` trivial.
pub fn three_branch_torus() -> NvMorphism {
    let g = CrystGroup::torus(2);
    let t = |x: i64, y: i64| AffineElement::translation(rvec(&[x, y]));
    let images = vec![
        PermutedTuple::new(vec![t(1, 0), t(2, 0), t(0, 0)], Permutation::from_one_line(&[2, 1, 3]).unwrap()).unwrap(),
        PermutedTuple::identity(3, 2),
    ];
    NvMorphism::new(g, 3, images).unwrap()
}

/// Two branches on the circle: `F(a) = (a, a²; swap)`.
pub fn circle_two_valued() -> NvMorphism {
    let g = CrystGroup::torus(1);
    let images = vec![PermutedTuple::new(
        vec![AffineElement::translation(rvec(&[1])), AffineElement::translation(rvec(&[2]))],
        Permutation::transposition(2, 0, 1),
    )
    .unwrap()];
    NvMorphism::new(g, 2, images).unwrap()
}

/// The flat 3-manifold with holonomy `(Z/2)²`, with the map induced by `x ↦ 3x`.
pub fn hantzsche_wendt_group() -> CrystGroup {
    let el = |v: [(i64, i64); 3], d: [i64; 3]| {
        AffineElement::new(v.iter().map(|&(p, q)| rat(p, q)).collect(), RatMatrix::diagonal(&d.map(ri))).unwrap()
    };
    let a = el([(1, 2), (1, 2), (0, 1)], [1, -1, -1]);
    let b = el([(0, 1), (1, 2), (1, 2)], [-1, 1, -1]);
    let c = el([(1, 2), (0, 1), (1, 2)], [-1, -1, 1]);
    CrystGroup::new(
        3,
        vec![("e1".into(), rvec(&[1, 0, 0])), ("e2".into(), rvec(&[0, 1, 0])), ("e3".into(), rvec(&[0, 0, 1]))],
        vec![("a".into(), a), ("b".into(), b), ("c".into(), c)],
    )
    .unwrap()
}

pub fn hantzsche_wendt() -> NvMorphism {
    let g = hantzsche_wendt_group();
    let three = ri(3);
    let images = g
        .generators()
        .into_iter()
        .map(|gen| {
            let e = g.generator_element(gen);
            let v = e.translation_part().iter().map(|x| x * &three).collect();
            PermutedTuple::new(vec![AffineElement::new(v, e.linear_part().clone()).unwrap()], Permutation::identity(1))
                .unwrap()
        })
        .collect();
    NvMorphism::new(g, 1, images).unwrap()
}

fn affine(rows: &[&[(i64, i64)]], c: &[(i64, i64)]) -> crate::oracle::AffineMap {
    let m = RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect()).unwrap();
    crate::oracle::AffineMap::new(m, c.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
}

/// `(t1, t2) ↦ {(0, t2/2), (0, t2/2 − 1/4)}`.
pub fn klein_lift() -> crate::oracle::AffineLift {
    let a: &[&[(i64, i64)]] = &[&[(0, 1), (0, 1)], &[(0, 1), (1, 2)]];
    crate::oracle::AffineLift::new(vec![affine(a, &[(0, 1), (0, 1)]), affine(a, &[(0, 1), (-1, 4)])]).unwrap()
}

/// `t ↦ {3t/2, 3t/2 + 1/2}`.
pub fn circle_lift() -> crate::oracle::AffineLift {
    let a: &[&[(i64, i64)]] = &[&[(3, 2)]];
    crate::oracle::AffineLift::new(vec![affine(a, &[(0, 1)]), affine(a, &[(1, 2)])]).unwrap()
}

/// `x ↦ {(3x1/2, 0), (3x1/2 + 1/2, 0), (0, 1/2)}`.
pub fn three_branch_lift() -> crate::oracle::AffineLift {
    let a: &[&[(i64, i64)]] = &[&[(3, 2), (0, 1)], &[(0, 1), (0, 1)]];
    let z: &[&[(i64, i64)]] = &[&[(0, 1), (0, 1)], &[(0, 1), (0, 1)]];
    crate::oracle::AffineLift::new(vec![
        affine(a, &[(0, 1), (0, 1)]),
        affine(a, &[(1, 2), (0, 1)]),
        affine(z, &[(0, 1), (1, 2)]),
    ])
    .unwrap()
}
