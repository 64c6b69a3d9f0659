//! f-Γ-invariant subgroups, split-lift matrices and the determinant
//! averaging formulas for the Lefschetz and Nielsen numbers.

use num::{One, Signed, Zero};

use crate::crystal::{AffineElement, CrystGroup, Decomposition, QuotientTable};
use crate::error::{Error, Result};
use crate::exact::rational::sub_vec;
use crate::exact::{
    box_points, cokernel, solve_affine_lattice, AffineLatticeSolution, CokernelStructure, Int, IntVec, Lattice,
    RatMatrix, Rational,
};
use crate::nvmorph::{NvMorphism, PermutedTuple};
use crate::par;

/// An f-Γ-invariant lattice `S` with the linearized branch maps on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantData {
    pub s: Lattice,
    /// `[π : Γ]`
    pub index_pi_gamma: Int,
    /// `[Γ : S]`
    pub index_gamma_s: Int,
    /// `[π : S]`
    pub index_pi_s: Int,
    /// `M_i`: the linear extension of `φ_i` restricted to `S`.
    pub branch_maps: Vec<RatMatrix>,
    /// `M_{i,k} = A_{h_k} · M_i`, indexed `[i][k]`.
    pub matrices: Vec<Vec<RatMatrix>>,
}

/// `{t ∈ L : χ(t) = 1}` for a homomorphism `χ` from `L` to the holonomy
/// group, given by the images of `L`'s basis.
fn holonomy_kernel(l: &Lattice, images: &[usize], table: &QuotientTable) -> Result<Lattice> {
    let orders: Vec<Int> = images
        .iter()
        .map(|&x| {
            let mut k = 1usize;
            let mut y = x;
            while y != 0 {
                y = table.product(y, x);
                k += 1;
            }
            Int::from(k)
        })
        .collect();
    let mut gens: Vec<Vec<Rational>> = Vec::new();
    for (j, o) in orders.iter().enumerate() {
        let mut c = vec![Int::zero(); images.len()];
        c[j] = o.clone();
        gens.push(l.vector(&c));
    }
    for t in box_points(&orders) {
        let mut acc = 0usize;
        for (j, k) in t.iter().enumerate() {
            let mut e = Int::zero();
            while &e < k {
                acc = table.product(acc, images[j]);
                e += 1;
            }
        }
        if acc == 0 && t.iter().any(|x| !x.is_zero()) {
            gens.push(l.vector(&t));
        }
    }
    Lattice::from_generators(l.dim(), &gens)
}

impl InvariantData {
    /// Builds the largest convenient `S`: start from `Γ ∩ ker σ`, keep the
    /// elements every branch sends into `Γ`, then take the core under the
    /// holonomy action.
    pub fn new(f: &NvMorphism) -> Result<Self> {
        let group = f.group();
        let table = group.quotient_table()?;
        let l = f.sigma_kernel()?.lattice_part;
        let mut lp = l.clone();
        for i in 0..f.n() {
            let images = l
                .basis()
                .iter()
                .map(|v| {
                    let coords = group.lattice_coords(v)?.expect("kernel lattice lies in Γ");
                    let img = &f.evaluate_lattice(&coords)?.components[i];
                    Ok(group.decompose(img)?.rep_index)
                })
                .collect::<Result<Vec<_>>>()?;
            let k = holonomy_kernel(&l, &images, &table)?;
            lp = lp.intersect(&k)?;
        }
        let mut s = lp.clone();
        for rep in group.reps().iter().skip(1) {
            s = s.intersect(&lp.image(rep.element.linear_part())?)?;
        }
        Self::build(f, s).map_err(|e| match e {
            Error::Precondition(msg) => Error::Inconsistency(format!("constructed subgroup failed verification: {msg}")),
            other => other,
        })
    }

    /// Uses a caller-supplied lattice after checking that it is f-Γ-invariant.
    pub fn with_lattice(f: &NvMorphism, s: Lattice) -> Result<Self> {
        Self::build(f, s)
    }

    fn build(f: &NvMorphism, s: Lattice) -> Result<Self> {
        check_invariant(f, &s)?;
        let group = f.group();
        let index_pi_gamma = Int::from(group.holonomy_order());
        let index_gamma_s = group.lattice().index_of(&s)?;
        let index_pi_s = &index_pi_gamma * &index_gamma_s;
        let branch_maps = (0..f.n()).map(|i| f.linearize(i, &s)).collect::<Result<Vec<_>>>()?;
        let matrices = split_matrices(group, &branch_maps);
        Ok(InvariantData { s, index_pi_gamma, index_gamma_s, index_pi_s, branch_maps, matrices })
    }

    pub fn n(&self) -> usize {
        self.branch_maps.len()
    }

    pub fn matrix(&self, i: usize, k: usize) -> &RatMatrix {
        &self.matrices[i][k]
    }

    /// `2S`, `3S`, …: a refinement that is again f-Γ-invariant.
    pub fn refined(&self, f: &NvMorphism, factor: i64) -> Result<Self> {
        Self::with_lattice(f, self.s.scaled(&Rational::from_integer(Int::from(factor)))?)
    }
}

/// Checks every defining property of an f-Γ-invariant lattice.
pub fn check_invariant(f: &NvMorphism, s: &Lattice) -> Result<()> {
    let group = f.group();
    if s.dim() != group.dim() || !s.is_full_rank() {
        return Err(Error::Precondition("S must be a full-rank lattice".into()));
    }
    if !group.lattice().contains_lattice(s) {
        return Err(Error::Precondition("S is not contained in the translation lattice".into()));
    }
    for v in s.basis() {
        let coords = group.lattice_coords(v)?.expect("checked containment");
        let img = f.evaluate_lattice(&coords)?;
        if !img.perm.is_identity() {
            return Err(Error::Precondition(format!("S is not in the kernel of sigma (basis vector {v:?})")));
        }
        for (i, c) in img.components.iter().enumerate() {
            if !c.is_pure_translation() || !group.lattice().contains(c.translation_part()) {
                return Err(Error::Precondition(format!("branch {} does not map S into the lattice", i + 1)));
            }
        }
    }
    for rep in group.reps() {
        if !s.contains_lattice(&s.image(rep.element.linear_part())?) {
            return Err(Error::Precondition(format!("S is not normalised by {}", rep.name)));
        }
    }
    Ok(())
}

/// `M_{i,k} = A_{h_k} · M_i`. Representatives `t · h_k` give the same table,
/// since translations have trivial linear part.
pub fn split_matrices(group: &CrystGroup, branch_maps: &[RatMatrix]) -> Vec<Vec<RatMatrix>> {
    branch_maps
        .iter()
        .map(|m| group.reps().iter().map(|r| r.element.linear_part() * m).collect())
        .collect()
}

/// The split matrices for explicit coset representatives.
pub fn split_matrices_with_reps(inv: &InvariantData, reps: &[AffineElement]) -> Vec<Vec<RatMatrix>> {
    inv.branch_maps.iter().map(|m| reps.iter().map(|r| r.linear_part() * m).collect()).collect()
}

/// The lattice generated by `α^{[π:Γ]}` for `α ∈ ker σ`.
pub fn recipe_subgroup(f: &NvMorphism) -> Result<Lattice> {
    let group = f.group();
    let n_hol = group.holonomy_order();
    let big_n = Rational::from_integer(Int::from(n_hol));
    let ker = f.sigma_kernel()?;
    let mut gens: Vec<Vec<Rational>> = ker.lattice_part.basis().iter().map(|v| v.iter().map(|x| x * &big_n).collect()).collect();
    for w in &ker.coset_witnesses {
        let c = group.reconstruct(w);
        let p = c.pow(n_hol as i64)?;
        if !p.is_pure_translation() {
            return Err(Error::Inconsistency("power of a kernel element is not a translation".into()));
        }
        gens.push(p.translation_part().clone());
        let a = c.linear_part();
        let mut sum = RatMatrix::zeros(group.dim(), group.dim());
        let mut pw = RatMatrix::identity(group.dim());
        for _ in 0..n_hol {
            sum = &sum + &pw;
            pw = &pw * a;
        }
        for l in ker.lattice_part.basis() {
            gens.push(sum.mul_vec(l));
        }
    }
    Lattice::from_generators(group.dim(), &gens)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetTerm {
    pub branch: usize,
    pub rep_index: usize,
    /// `det(I − M_{i,k})`
    pub det: Rational,
}

pub fn det_table(inv: &InvariantData) -> Result<Vec<DetTerm>> {
    let cells: Vec<(usize, usize)> =
        (0..inv.n()).flat_map(|i| (0..inv.matrices[i].len()).map(move |k| (i, k))).collect();
    par::try_map(&cells, |&(i, k)| {
        let m = inv.matrix(i, k);
        let det = (&RatMatrix::identity(m.rows()) - m).det()?;
        Ok(DetTerm { branch: i, rep_index: k, det })
    })
}

fn averaged(terms: impl Iterator<Item = Rational>, index: &Int, what: &str) -> Result<Int> {
    let total: Rational = terms.fold(Rational::zero(), |acc, x| acc + x);
    let avg = total / Rational::from_integer(index.clone());
    if !avg.is_integer() {
        return Err(Error::NonInteger(format!("{what} averages to {avg}")));
    }
    Ok(avg.to_integer())
}

pub fn lefschetz_from(inv: &InvariantData, table: &[DetTerm]) -> Result<Int> {
    averaged(table.iter().map(|t| t.det.clone()), &inv.index_pi_gamma, "the Lefschetz sum")
}

pub fn nielsen_from(inv: &InvariantData, table: &[DetTerm]) -> Result<Int> {
    averaged(table.iter().map(|t| t.det.abs()), &inv.index_pi_gamma, "the Nielsen sum")
}

pub fn lefschetz(f: &NvMorphism) -> Result<Int> {
    let inv = InvariantData::new(f)?;
    lefschetz_from(&inv, &det_table(&inv)?)
}

pub fn nielsen(f: &NvMorphism) -> Result<Int> {
    let inv = InvariantData::new(f)?;
    nielsen_from(&inv, &det_table(&inv)?)
}

/// `Σ det` and `Σ |det|` over the grid, before averaging.
pub fn grid_sums(table: &[DetTerm]) -> (Rational, Rational) {
    table.iter().fold((Rational::zero(), Rational::zero()), |(s, a), t| (s + &t.det, a + t.det.abs()))
}

/// One representative of each coset of `π/S`, with its image under `f̃_#`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetRep {
    pub decomposition: Decomposition,
    pub element: AffineElement,
    pub image: PermutedTuple,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetTable {
    pub reps: Vec<CosetRep>,
}

impl CosetTable {
    /// Representatives `t · h_k` ordered by `k`, then by `t`; the identity comes first.
    pub fn new(f: &NvMorphism, s: &Lattice) -> Result<Self> {
        let group = f.group();
        let mut ts = group
            .lattice()
            .coset_representatives(s)?
            .iter()
            .map(|v| Ok(group.lattice_coords(v)?.expect("coset representatives lie in Γ")))
            .collect::<Result<Vec<IntVec>>>()?;
        ts.sort();
        if let Some(z) = ts.iter().position(|t| s.contains(&group.lattice_vector(t))) {
            let t0 = ts.remove(z);
            ts.insert(0, t0.iter().map(|_| Int::zero()).collect());
        }
        let decs: Vec<Decomposition> = (0..group.holonomy_order())
            .flat_map(|k| ts.iter().map(move |t| Decomposition { lattice_coords: t.clone(), rep_index: k }))
            .collect();
        let reps = par::try_map(&decs, |d| {
            Ok(CosetRep { decomposition: d.clone(), element: group.reconstruct(d), image: f.evaluate_decomposition(d)? })
        })?;
        Ok(CosetTable { reps })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Representatives `c` with `σ_c(j) = i`.
    pub fn moving(&self, j: usize, i: usize) -> impl Iterator<Item = &CosetRep> {
        self.reps.iter().filter(move |c| c.image.perm.apply(j) == i)
    }
}

/// `coin(τ_g φ_i, ι_i) = {γ ∈ S_i : g φ_i(γ) g⁻¹ = γ}`, described through `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoincidenceSubgroup {
    /// `coin ∩ S`, any rank.
    pub lattice_part: Lattice,
    /// One element of `coin` in each `S`-coset it meets; the first is the identity.
    pub coset_witnesses: Vec<AffineElement>,
}

impl CoincidenceSubgroup {
    /// `|u_i(coin)|`: the number of cosets of `S` met.
    pub fn projection_size(&self) -> usize {
        self.coset_witnesses.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.lattice_part.rank() == 0 && self.coset_witnesses.len() == 1
    }
}

pub fn coincidence_subgroup(
    f: &NvMorphism,
    inv: &InvariantData,
    cosets: &CosetTable,
    i: usize,
    g: &AffineElement,
) -> Result<CoincidenceSubgroup> {
    if i >= f.n() {
        return Err(Error::Precondition(format!("branch {} out of range", i + 1)));
    }
    let g_inv = g.inverse()?;
    let m = g.dim();
    let a = &RatMatrix::identity(m) - &(g.linear_part() * &inv.branch_maps[i]);
    let mut lattice_part = Lattice::zero(m);
    let mut coset_witnesses = Vec::new();
    for c in cosets.moving(i, i) {
        let y = g.compose(&c.image.components[i]).compose(&g_inv);
        if y.linear_part() != c.element.linear_part() {
            continue;
        }
        let rhs = sub_vec(y.translation_part(), c.element.translation_part());
        if let AffineLatticeSolution::Coset { point, lattice } = solve_affine_lattice(&a, &rhs, &inv.s)? {
            if coset_witnesses.is_empty() {
                lattice_part = lattice;
            }
            coset_witnesses.push(AffineElement::translation(point).compose(&c.element));
        }
    }
    Ok(CoincidenceSubgroup { lattice_part, coset_witnesses })
}

/// Cover classes `Γ / (I − A_α M_i) S` for the representative `h_k`.
pub fn cover_cokernel(group: &CrystGroup, inv: &InvariantData, i: usize, k: usize) -> Result<CokernelStructure> {
    let m = inv.matrix(i, k);
    let images: Vec<Vec<Rational>> = inv.s.basis().iter().map(|s| sub_vec(s, &m.mul_vec(s))).collect();
    cokernel(&images, group.generator_matrix())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualityViolation {
    pub branch: usize,
    pub rep_index: usize,
    pub cover_class: IntVec,
    pub projection_size: usize,
    pub lattice_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualityReport {
    pub lower_bound: Int,
    pub terms_checked: usize,
    pub violations: Vec<EqualityViolation>,
}

impl EqualityReport {
    pub fn equality(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `coin(τ_{βα} φ_i, ι_i)` is trivial for every essential cover
/// class `β`, which makes the averaged lower bound an equality.
pub fn nielsen_equality_report(f: &NvMorphism, inv: &InvariantData, cosets: &CosetTable) -> Result<EqualityReport> {
    let group = f.group();
    let table = det_table(inv)?;
    let lower_bound = nielsen_from(inv, &table)?;
    let essential: Vec<&DetTerm> = table.iter().filter(|t| !t.det.is_zero()).collect();
    let per_term = par::try_map(&essential, |t| {
        let coker = cover_cokernel(group, inv, t.branch, t.rep_index)?;
        let reps = coker.representatives().expect("nonsingular cover term has finitely many classes");
        let alpha = group.rep(t.rep_index);
        let mut out = Vec::new();
        for beta in &reps {
            let g = group.lattice_element(beta).compose(alpha);
            let coin = coincidence_subgroup(f, inv, cosets, t.branch, &g)?;
            out.push((beta.clone(), coin));
        }
        Ok(out)
    })?;
    let mut violations = Vec::new();
    let mut terms_checked = 0;
    for (t, classes) in essential.iter().zip(per_term) {
        for (beta, coin) in classes {
            terms_checked += 1;
            if !coin.is_trivial() {
                violations.push(EqualityViolation {
                    branch: t.branch,
                    rep_index: t.rep_index,
                    cover_class: beta,
                    projection_size: coin.projection_size(),
                    lattice_rank: coin.lattice_part.rank(),
                });
            }
        }
    }
    Ok(EqualityReport { lower_bound, terms_checked, violations })
}

/// Number of cover classes of a nonsingular term, `[Γ:S] · |det|`.
pub fn cover_class_count(inv: &InvariantData, det: &Rational) -> Result<Int> {
    let c = Rational::from_integer(inv.index_gamma_s.clone()) * det.abs();
    if !c.is_integer() {
        return Err(Error::NonInteger(format!("cover class count {c}")));
    }
    Ok(c.to_integer())
}

pub fn sign(det: &Rational) -> Int {
    if det.is_positive() {
        Int::one()
    } else if det.is_negative() {
        -Int::one()
    } else {
        Int::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, ri, rvec};
    use crate::test_support::{circle_two_valued, hantzsche_wendt, klein_morphism, three_branch_torus};

    fn lat(vs: &[&[i64]]) -> Lattice {
        let b: Vec<_> = vs.iter().map(|v| rvec(v)).collect();
        Lattice::from_basis(b[0].len(), &b).unwrap()
    }

    #[test]
    fn klein_invariant_subgroup() {
        let f = klein_morphism();
        let inv = InvariantData::new(&f).unwrap();
        assert_eq!(inv.s, lat(&[&[1, 0], &[0, 2]]));
        assert_eq!(inv.index_pi_s, Int::from(4));
        assert_eq!(inv.index_pi_gamma, Int::from(2));
        let m = RatMatrix::diagonal(&[ri(0), rat(1, 2)]);
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(inv.matrix(i, k), &m);
            }
        }
        let table = det_table(&inv).unwrap();
        assert!(table.iter().all(|t| t.det == rat(1, 2)));
        assert_eq!(lefschetz_from(&inv, &table).unwrap(), Int::from(1));
        assert_eq!(nielsen_from(&inv, &table).unwrap(), Int::from(1));
    }

    #[test]
    fn recipe_is_contained() {
        for f in [klein_morphism(), three_branch_torus(), circle_two_valued(), hantzsche_wendt()] {
            let inv = InvariantData::new(&f).unwrap();
            let r = recipe_subgroup(&f).unwrap();
            assert!(inv.s.contains_lattice(&r));
            let rinv = InvariantData::with_lattice(&f, r).unwrap();
            let (t1, t2) = (det_table(&inv).unwrap(), det_table(&rinv).unwrap());
            assert_eq!(lefschetz_from(&inv, &t1).unwrap(), lefschetz_from(&rinv, &t2).unwrap());
            assert_eq!(nielsen_from(&inv, &t1).unwrap(), nielsen_from(&rinv, &t2).unwrap());
        }
    }

    #[test]
    fn torus_values() {
        let a = RatMatrix::diagonal(&[ri(2), ri(3)]);
        let f = NvMorphism::torus_linear(&a).unwrap();
        let inv = InvariantData::new(&f).unwrap();
        assert_eq!(inv.s, Lattice::standard(2));
        assert_eq!(lefschetz(&f).unwrap(), Int::from(2));
        assert_eq!(nielsen(&f).unwrap(), Int::from(2));
        let id = NvMorphism::torus_linear(&RatMatrix::identity(2)).unwrap();
        assert_eq!(lefschetz(&id).unwrap(), Int::zero());
        assert_eq!(nielsen(&id).unwrap(), Int::zero());
    }

    #[test]
    fn circle_and_three_branch() {
        let f = circle_two_valued();
        let inv = InvariantData::new(&f).unwrap();
        assert_eq!(inv.s, lat(&[&[2]]));
        assert_eq!(inv.branch_maps[0], RatMatrix::diagonal(&[rat(3, 2)]));
        assert_eq!(lefschetz(&f).unwrap(), Int::from(-1));
        assert_eq!(nielsen(&f).unwrap(), Int::from(1));
        let g = three_branch_torus();
        assert_eq!(lefschetz(&g).unwrap(), Int::zero());
        assert_eq!(nielsen(&g).unwrap(), Int::from(2));
    }

    #[test]
    fn hantzsche_wendt_values() {
        let f = hantzsche_wendt();
        let inv = InvariantData::new(&f).unwrap();
        let table = det_table(&inv).unwrap();
        // single-valued: the average of the four holonomy terms
        let dets: Vec<Rational> = f
            .group()
            .reps()
            .iter()
            .map(|r| (&RatMatrix::identity(3) - &(r.element.linear_part() * &RatMatrix::diagonal(&[ri(3), ri(3), ri(3)])))
                .det()
                .unwrap())
            .collect();
        let avg: Rational = dets.iter().sum::<Rational>() / ri(4);
        assert_eq!(Rational::from_integer(lefschetz_from(&inv, &table).unwrap()), avg);
        assert_eq!(lefschetz_from(&inv, &table).unwrap(), Int::from(-26));
        assert_eq!(nielsen_from(&inv, &table).unwrap(), Int::from(26));
    }

    #[test]
    fn rejects_bad_lattice() {
        let f = klein_morphism();
        assert!(matches!(InvariantData::with_lattice(&f, Lattice::standard(2)), Err(Error::Precondition(_))));
        assert!(InvariantData::with_lattice(&f, lat(&[&[2, 0], &[0, 2]])).is_ok());
    }

    #[test]
    fn klein_coincidence_trivial() {
        let f = klein_morphism();
        let inv = InvariantData::new(&f).unwrap();
        let cosets = CosetTable::new(&f, &inv.s).unwrap();
        assert_eq!(cosets.len(), 4);
        assert!(cosets.reps[0].element.is_identity());
        let coin = coincidence_subgroup(&f, &inv, &cosets, 0, &AffineElement::identity(2)).unwrap();
        assert!(coin.is_trivial());
        let r = nielsen_equality_report(&f, &inv, &cosets).unwrap();
        assert!(r.equality());
        assert_eq!(r.lower_bound, Int::one());
        assert_eq!(r.terms_checked, 4);
    }

    #[test]
    fn identity_coincidence_is_everything() {
        let f = NvMorphism::torus_linear(&RatMatrix::identity(2)).unwrap();
        let inv = InvariantData::new(&f).unwrap();
        let cosets = CosetTable::new(&f, &inv.s).unwrap();
        let coin = coincidence_subgroup(&f, &inv, &cosets, 0, &AffineElement::identity(2)).unwrap();
        assert_eq!(coin.lattice_part, Lattice::standard(2));
        let r = nielsen_equality_report(&f, &inv, &cosets).unwrap();
        assert_eq!((r.lower_bound.clone(), r.terms_checked), (Int::zero(), 0));
        assert!(r.equality());
    }

    #[test]
    fn torus_coincidence_trivial() {
        let f = NvMorphism::torus_linear(&RatMatrix::diagonal(&[ri(2), ri(3)])).unwrap();
        let inv = InvariantData::new(&f).unwrap();
        let cosets = CosetTable::new(&f, &inv.s).unwrap();
        let coin = coincidence_subgroup(&f, &inv, &cosets, 0, &AffineElement::identity(2)).unwrap();
        assert!(coin.is_trivial());
        let r = nielsen_equality_report(&f, &inv, &cosets).unwrap();
        assert!(r.equality());
        assert_eq!((r.lower_bound.clone(), r.terms_checked), (Int::from(2), 2));
    }
}
