#![allow(dead_code)]

use std::path::PathBuf;

use flatfix::crystal::{AffineElement, CrystGroup, Generator};
use flatfix::exact::rational::{rat, ri};
use flatfix::exact::{Int, RatMatrix};
use flatfix::io::{InputDocument, Problem};
use flatfix::nvmorph::{NvMorphism, Permutation, PermutedTuple};
use flatfix::oracle::{AffineLift, AffineMap};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: &[&str] = &[
    "klein.json",
    "circle_two_valued.json",
    "torus2_three_branch.json",
    "hantzsche_wendt_times3.json",
    "torus1_m3.json",
    "torus1_m2.json",
    "torus1_m1.json",
    "torus1_0.json",
    "torus1_2.json",
    "torus1_3.json",
    "torus1_5.json",
    "torus2_diag_2_3.json",
    "torus2_minus_identity.json",
    "torus2_cat.json",
    "torus2_rotation.json",
    "torus2_mixed.json",
    "torus2_constant.json",
];

pub fn fixture(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    InputDocument::from_json(&text).unwrap().build().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn int_matrix(rows: &[Vec<i64>]) -> RatMatrix {
    RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| ri(x)).collect()).collect()).unwrap()
}

/// `det(I − A)` by cofactor expansion in `i128`, independent of the library.
pub fn det_i_minus(a: &[Vec<i64>]) -> i128 {
    let m = a.len();
    let b: Vec<Vec<i128>> = (0..m)
        .map(|i| (0..m).map(|j| i128::from(i == j) - i128::from(a[i][j])).collect())
        .collect();
    fn det(b: &[Vec<i128>]) -> i128 {
        if b.is_empty() {
            return 1;
        }
        (0..b.len())
            .map(|j| {
                let minor: Vec<Vec<i128>> =
                    b[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * b[0][j] * det(&minor)
            })
            .sum()
    }
    det(&b)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, range: i64) -> Vec<Vec<i64>> {
    (0..m).map(|_| (0..m).map(|_| rng.gen_range(-range..=range)).collect()).collect()
}

pub fn random_nonsingular(rng: &mut ChaCha8Rng, m: usize, range: i64) -> Vec<Vec<i64>> {
    loop {
        let a = random_matrix(rng, m, range);
        if det_i_minus(&a) != 0 {
            return a;
        }
    }
}

/// The torus map `x ↦ A x + c` with a random rational shift `c`.
pub fn torus_map(rng: &mut ChaCha8Rng, a: &[Vec<i64>]) -> (NvMorphism, AffineLift) {
    let m = int_matrix(a);
    let f = NvMorphism::torus_linear(&m).unwrap();
    let c = (0..a.len()).map(|_| rat(rng.gen_range(0..7), 7)).collect();
    (f, AffineLift::new(vec![AffineMap::new(m, c).unwrap()]).unwrap())
}

pub fn random_element(rng: &mut ChaCha8Rng, g: &CrystGroup, range: i64) -> AffineElement {
    let t: Vec<Int> = (0..g.dim()).map(|_| Int::from(rng.gen_range(-range..=range))).collect();
    let k = rng.gen_range(0..g.holonomy_order());
    g.lattice_element(&t).compose(g.rep(k))
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    Permutation::from_images(p).unwrap()
}

pub fn random_tuple(rng: &mut ChaCha8Rng, g: &CrystGroup, n: usize, range: i64) -> PermutedTuple {
    let comps = (0..n).map(|_| random_element(rng, g, range)).collect();
    PermutedTuple::new(comps, random_permutation(rng, n)).unwrap()
}

/// `F(e1) = (e1^{k_1}, …, e1^{k_n}; σ)` on the circle.
pub fn random_circle(rng: &mut ChaCha8Rng) -> NvMorphism {
    let n = rng.gen_range(1..=3);
    let g = CrystGroup::torus(1);
    let comps = (0..n).map(|_| AffineElement::translation(vec![ri(rng.gen_range(-4..=4))])).collect();
    let img = PermutedTuple::new(comps, random_permutation(rng, n)).unwrap();
    NvMorphism::new(g, n, vec![img]).unwrap()
}

fn klein_word(g: &CrystGroup, word: &[(&str, i64)]) -> AffineElement {
    let w: Vec<(Generator, i64)> = word.iter().map(|&(s, e)| (g.generator_by_name(s).unwrap(), e)).collect();
    g.evaluate_word(&w).unwrap()
}

/// A random endomorphism of the Klein bottle group: `a ↦ a^p`,
/// `b ↦ a^r b^q` with `q` odd, or `p = 0` and `q` even.
pub fn random_klein_endo(rng: &mut ChaCha8Rng, g: &CrystGroup) -> (AffineElement, AffineElement) {
    let q = rng.gen_range(-3..=3);
    let p = if q % 2 == 0 { 0 } else { rng.gen_range(-3..=3) };
    let r = rng.gen_range(-2..=2);
    (klein_word(g, &[("a", p)]), klein_word(g, &[("a", r), ("b", q)]))
}

/// Klein morphisms: products of endomorphisms (`σ = id`), or the swapping
/// family `F(a) = (1, 1)`, `F(b) = (a^k b, a^j; swap)`.
pub fn random_klein(rng: &mut ChaCha8Rng, g: &CrystGroup) -> NvMorphism {
    let n = rng.gen_range(1..=2);
    let (fa, fb) = if n == 2 && rng.gen_bool(0.5) {
        let one = AffineElement::identity(2);
        let x = klein_word(g, &[("a", rng.gen_range(-2..=2)), ("b", 1)]);
        let y = klein_word(g, &[("a", rng.gen_range(-2..=2))]);
        (
            PermutedTuple::new(vec![one.clone(), one], Permutation::identity(2)).unwrap(),
            PermutedTuple::new(vec![x, y], Permutation::transposition(2, 0, 1)).unwrap(),
        )
    } else {
        let endos: Vec<_> = (0..n).map(|_| random_klein_endo(rng, g)).collect();
        (
            PermutedTuple::new(endos.iter().map(|e| e.0.clone()).collect(), Permutation::identity(n)).unwrap(),
            PermutedTuple::new(endos.iter().map(|e| e.1.clone()).collect(), Permutation::identity(n)).unwrap(),
        )
    };
    let fb2 = fb.mul(&fb).unwrap();
    NvMorphism::new(g.clone(), n, vec![fa, fb2, fb]).unwrap()
}

/// `(v, A) ↦ (k v, A)` on the Hantzsche-Wendt group, `k` odd.
pub fn hw_scaled(g: &CrystGroup, k: i64) -> NvMorphism {
    let images = g
        .generators()
        .into_iter()
        .map(|gen| {
            let e = g.generator_element(gen);
            let v = e.translation_part().iter().map(|x| x * ri(k)).collect();
            PermutedTuple::new(vec![AffineElement::new(v, e.linear_part().clone()).unwrap()], Permutation::identity(1))
                .unwrap()
        })
        .collect();
    NvMorphism::new(g.clone(), 1, images).unwrap()
}
