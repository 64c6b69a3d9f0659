//! Reidemeister classes of `f̃_#` and the averaged Reidemeister trace.
//!
//! A class is a set of pairs `(α, i) ∈ π × {1, …, n}` closed under
//! `γ · (α, i) = (γ α φ_i(γ⁻¹), σ_γ(i))`.

use std::collections::BTreeMap;
use std::fmt;

use num::{Integer, One, Zero};

use crate::averaging::{
    coincidence_subgroup, cover_class_count, cover_cokernel, det_table, lefschetz_from, nielsen_from, sign, CosetTable,
    InvariantData,
};
use crate::crystal::{AffineElement, Decomposition};
use crate::error::{Error, Result};
use crate::exact::rational::sub_vec;
use crate::exact::{solve_affine_lattice, AffineLatticeSolution, CokernelStructure, Int, IntVec, RatMatrix, Rational};
use crate::nvmorph::NvMorphism;
use crate::par;
use crate::unionfind::UnionFind;

/// Canonical representative of a class: the element `t · h_k` in branch `i`.
/// Ordered by branch, then representative index, then coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReidClass {
    pub branch: usize,
    pub rep_index: usize,
    pub lattice_coords: IntVec,
}

impl ReidClass {
    pub fn decomposition(&self) -> Decomposition {
        Decomposition { lattice_coords: self.lattice_coords.clone(), rep_index: self.rep_index }
    }
}

impl fmt::Display for ReidClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.lattice_coords.iter().map(|x| x.to_string()).collect();
        write!(f, "[({}; h{}, {})]", c.join(","), self.rep_index, self.branch + 1)
    }
}

/// Finitely supported integer combination of classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceVector {
    terms: BTreeMap<ReidClass, Int>,
}

impl TraceVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, class: ReidClass, coeff: &Int) {
        let e = self.terms.entry(class).or_insert_with(Int::zero);
        *e += coeff;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn get(&self, class: &ReidClass) -> Int {
        self.terms.get(class).cloned().unwrap_or_else(Int::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ReidClass, &Int)> {
        self.terms.iter()
    }

    pub fn coefficient_sum(&self) -> Int {
        self.terms.values().sum()
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn to_rational(&self) -> BTreeMap<ReidClass, Rational> {
        self.terms.iter().map(|(k, v)| (k.clone(), Rational::from_integer(v.clone()))).collect()
    }
}

impl FromIterator<(ReidClass, Int)> for TraceVector {
    fn from_iter<I: IntoIterator<Item = (ReidClass, Int)>>(iter: I) -> Self {
        let mut t = TraceVector::new();
        for (c, k) in iter {
            t.add(c, &k);
        }
        t
    }
}

/// Precomputed data for deciding and normalising classes of one morphism.
///
/// Always built from the default invariant subgroup, so canonical
/// representatives do not depend on the `S` used for a computation.
#[derive(Clone, Debug)]
pub struct ClassContext<'a> {
    f: &'a NvMorphism,
    inv: InvariantData,
    cosets: CosetTable,
    /// `[i][k]`: `Γ / (I − A_k M_i) S`, the `S`-orbits on `Γ h_k` in branch `i`.
    orbit_quotients: Vec<Vec<CokernelStructure>>,
    /// `[c][j]`: `φ_j(c)⁻¹`.
    phi_inv: Vec<Vec<AffineElement>>,
    /// Smallest index in the orbit of each branch.
    orbit_min: Vec<usize>,
    /// A coset moving branch `i` to `orbit_min[i]`.
    movers: Vec<usize>,
    /// Cosets of `S_i / S`.
    stabilizers: Vec<Vec<usize>>,
}

impl<'a> ClassContext<'a> {
    pub fn new(f: &'a NvMorphism) -> Result<Self> {
        Self::with_invariant(f, InvariantData::new(f)?)
    }

    /// `inv` must be the default invariant data of `f`; pass it to avoid recomputing.
    pub fn with_invariant(f: &'a NvMorphism, inv: InvariantData) -> Result<Self> {
        let group = f.group();
        let cosets = CosetTable::new(f, &inv.s)?;
        let cells: Vec<(usize, usize)> =
            (0..f.n()).flat_map(|i| (0..group.holonomy_order()).map(move |k| (i, k))).collect();
        let flat = par::try_map(&cells, |&(i, k)| cover_cokernel(group, &inv, i, k))?;
        let mut it = flat.into_iter();
        let orbit_quotients =
            (0..f.n()).map(|_| (0..group.holonomy_order()).map(|_| it.next().unwrap()).collect()).collect();
        let phi_inv = par::try_map(&cosets.reps, |c| {
            c.image.components.iter().map(AffineElement::inverse).collect::<Result<Vec<_>>>()
        })?;
        let partition = f.orbit_partition()?;
        let n = f.n();
        let orbit_min: Vec<usize> = (0..n).map(|i| partition.orbit_of(i).members[0]).collect();
        let movers = (0..n)
            .map(|i| {
                cosets
                    .reps
                    .iter()
                    .position(|c| c.image.perm.apply(i) == orbit_min[i])
                    .ok_or_else(|| Error::Inconsistency(format!("no coset moves branch {} within its orbit", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let stabilizers = (0..n)
            .map(|i| (0..cosets.len()).filter(|&c| cosets.reps[c].image.perm.apply(i) == i).collect())
            .collect();
        Ok(ClassContext { f, inv, cosets, orbit_quotients, phi_inv, orbit_min, movers, stabilizers })
    }

    pub fn morphism(&self) -> &NvMorphism {
        self.f
    }

    pub fn invariant(&self) -> &InvariantData {
        &self.inv
    }

    pub fn cosets(&self) -> &CosetTable {
        &self.cosets
    }

    /// `c · (x, i)` for the coset representative with index `c`.
    fn act(&self, c: usize, x: &AffineElement, i: usize) -> (AffineElement, usize) {
        let rep = &self.cosets.reps[c];
        let j = rep.image.perm.apply(i);
        (rep.element.compose(x).compose(&self.phi_inv[c][j]), j)
    }

    /// Normal form of `(x, i)` among pairs in branch `i`, under `S_i`.
    pub fn local_canonical(&self, x: &AffineElement, i: usize) -> Result<ReidClass> {
        let group = self.f.group();
        let mut best: Option<(usize, IntVec)> = None;
        for &c in &self.stabilizers[i] {
            let (y, _) = self.act(c, x, i);
            let d = group.decompose(&y)?;
            let nf = self.orbit_quotients[i][d.rep_index].normal_form(&d.lattice_coords);
            let key = (d.rep_index, nf);
            if best.as_ref().is_none_or(|b| &key < b) {
                best = Some(key);
            }
        }
        let (rep_index, nf) = best.expect("the identity coset stabilises every branch");
        let lattice_coords = self.orbit_quotients[i][rep_index].canonical_from_normal(&nf);
        Ok(ReidClass { branch: i, rep_index, lattice_coords })
    }

    /// Canonical representative: move to the smallest branch of the orbit,
    /// then take the least `(representative index, Smith-reduced coordinates)`.
    pub fn canonical_rep(&self, x: &AffineElement, i: usize) -> Result<ReidClass> {
        let (y, i0) = self.act(self.movers[i], x, i);
        debug_assert_eq!(i0, self.orbit_min[i]);
        self.local_canonical(&y, i0)
    }

    pub fn canonical_class(&self, c: &ReidClass) -> Result<ReidClass> {
        self.canonical_rep(&self.f.group().reconstruct(&c.decomposition()), c.branch)
    }

    /// Decides whether `(g, i)` and `(h, j)` are in the same class. On
    /// success returns `γ` with `σ_γ(j) = i` and `g = γ h φ_j(γ⁻¹)`.
    pub fn same_class(&self, g: &AffineElement, i: usize, h: &AffineElement, j: usize) -> Result<Option<AffineElement>> {
        let m = g.dim();
        for (c, rep) in self.cosets.reps.iter().enumerate() {
            if rep.image.perm.apply(j) != i {
                continue;
            }
            let (z, _) = self.act(c, h, j);
            if z.linear_part() != g.linear_part() {
                continue;
            }
            let a = &RatMatrix::identity(m) - &(z.linear_part() * &self.inv.branch_maps[i]);
            let rhs = sub_vec(g.translation_part(), z.translation_part());
            if let AffineLatticeSolution::Coset { point, .. } = solve_affine_lattice(&a, &rhs, &self.inv.s)? {
                return Ok(Some(AffineElement::translation(point).compose(&rep.element)));
            }
        }
        Ok(None)
    }

    /// `r̂_i^α`: the class of `(β α, i)` for a cover class `β ∈ Γ`.
    pub fn rhat_push(&self, i: usize, alpha: &AffineElement, beta: &[Int]) -> Result<ReidClass> {
        let x = self.f.group().lattice_element(beta).compose(alpha);
        self.canonical_rep(&x, i)
    }
}

/// Checks a witness returned by [`ClassContext::same_class`].
pub fn is_witness(
    f: &NvMorphism,
    gamma: &AffineElement,
    g: &AffineElement,
    i: usize,
    h: &AffineElement,
    j: usize,
) -> Result<bool> {
    let img = f.evaluate(gamma)?;
    if img.perm.apply(j) != i {
        return Ok(false);
    }
    let phi = f.evaluate(&gamma.inverse()?)?.components[j].clone();
    Ok(gamma.compose(h).compose(&phi) == *g)
}

/// `R[τ_α φ'_i, ι]` for the representative `h_k`.
pub fn twisted_classes_cover(ctx: &ClassContext<'_>, inv: &InvariantData, i: usize, k: usize) -> Result<CokernelStructure> {
    cover_cokernel(ctx.morphism().group(), inv, i, k)
}

/// Cover classes of one grid cell, pushed to canonical classes.
#[derive(Clone, Debug)]
struct CellPush {
    branch: usize,
    rep_index: usize,
    sign: Int,
    pushes: Vec<(IntVec, AffineElement, ReidClass)>,
}

fn push_cells(ctx: &ClassContext<'_>, inv: &InvariantData, reps: &[AffineElement]) -> Result<Vec<CellPush>> {
    let group = ctx.morphism().group();
    if reps.len() != group.holonomy_order() {
        return Err(Error::Dimension("one representative per holonomy coset".into()));
    }
    for (k, r) in reps.iter().enumerate() {
        if group.decompose(r)?.rep_index != k {
            return Err(Error::Precondition(format!("representative {k} lies in the wrong coset")));
        }
    }
    let table = det_table(inv)?;
    let essential: Vec<_> = table.into_iter().filter(|t| !t.det.is_zero()).collect();
    par::try_map(&essential, |t| {
        let coker = cover_cokernel(group, inv, t.branch, t.rep_index)?;
        let betas = coker.representatives().expect("nonsingular term");
        let expected = cover_class_count(inv, &t.det)?;
        if Int::from(betas.len()) != expected {
            return Err(Error::Inconsistency(format!(
                "branch {} rep {}: {} cover classes, expected {expected}",
                t.branch + 1,
                t.rep_index,
                betas.len()
            )));
        }
        let alpha = &reps[t.rep_index];
        let pushes = betas
            .into_iter()
            .map(|b| {
                let x = group.lattice_element(&b).compose(alpha);
                let c = ctx.canonical_rep(&x, t.branch)?;
                Ok((b, x, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CellPush { branch: t.branch, rep_index: t.rep_index, sign: sign(&t.det), pushes })
    })
}

fn finish(inv: &InvariantData, sums: BTreeMap<ReidClass, Int>) -> Result<TraceVector> {
    let mut out = TraceVector::new();
    for (c, total) in sums {
        let (q, r) = total.div_rem(&inv.index_pi_s);
        if !r.is_zero() {
            return Err(Error::Inconsistency(format!(
                "coefficient of {c} is {total}/{}, not an integer",
                inv.index_pi_s
            )));
        }
        out.add(c, &q);
    }
    let table = det_table(inv)?;
    let (l, n) = (lefschetz_from(inv, &table)?, nielsen_from(inv, &table)?);
    if out.coefficient_sum() != l || Int::from(out.support_size()) != n {
        return Err(Error::Inconsistency(format!(
            "trace has coefficient sum {} and support {}, but L = {l} and N = {n}",
            out.coefficient_sum(),
            out.support_size()
        )));
    }
    Ok(out)
}

/// The averaged trace for invariant data `inv` and coset representatives `reps`.
pub fn reidemeister_trace_with(ctx: &ClassContext<'_>, inv: &InvariantData, reps: &[AffineElement]) -> Result<TraceVector> {
    let cells = push_cells(ctx, inv, reps)?;
    let mut sums: BTreeMap<ReidClass, Int> = BTreeMap::new();
    for cell in &cells {
        for (_, _, c) in &cell.pushes {
            *sums.entry(c.clone()).or_insert_with(Int::zero) += &cell.sign;
        }
    }
    finish(inv, sums)
}

pub fn default_reps(f: &NvMorphism) -> Vec<AffineElement> {
    f.group().reps().iter().map(|r| r.element.clone()).collect()
}

pub fn reidemeister_trace(f: &NvMorphism) -> Result<TraceVector> {
    let ctx = ClassContext::new(f)?;
    reidemeister_trace_with(&ctx, &ctx.inv.clone(), &default_reps(f))
}

/// A merge performed while grouping pushed pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeWitness {
    pub from: (AffineElement, usize),
    pub into: (AffineElement, usize),
    /// `γ` with `γ · into = from`.
    pub gamma: AffineElement,
}

#[derive(Clone, Debug)]
pub struct AuditedTrace {
    pub trace: TraceVector,
    pub merges: Vec<MergeWitness>,
}

/// Same trace, with classes formed by union-find over the pushed pairs,
/// deciding every merge with [`ClassContext::same_class`] and keeping the
/// witnesses. Fails if the grouping disagrees with the canonical keys.
pub fn reidemeister_trace_audited(ctx: &ClassContext<'_>, inv: &InvariantData) -> Result<AuditedTrace> {
    let f = ctx.morphism();
    let cells = push_cells(ctx, inv, &default_reps(f))?;
    let mut items: Vec<(AffineElement, usize, ReidClass, Int)> = Vec::new();
    for cell in &cells {
        for (_, x, c) in &cell.pushes {
            items.push((x.clone(), cell.branch, c.clone(), cell.sign.clone()));
        }
    }
    items.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    let mut uf = UnionFind::new(items.len());
    let mut roots: Vec<usize> = Vec::new();
    let mut merges = Vec::new();
    for k in 0..items.len() {
        let mut joined = false;
        for &r in &roots {
            let (x, i) = (&items[k].0, items[k].1);
            let (y, j) = (&items[r].0, items[r].1);
            if let Some(gamma) = ctx.same_class(x, i, y, j)? {
                uf.union(r, k);
                merges.push(MergeWitness { from: (x.clone(), i), into: (y.clone(), j), gamma });
                joined = true;
                break;
            }
        }
        if !joined {
            roots.push(k);
        }
    }
    let mut sums: BTreeMap<ReidClass, Int> = BTreeMap::new();
    for group in uf.groups() {
        let key = &items[group[0]].2;
        for &k in &group {
            if &items[k].2 != key {
                return Err(Error::Inconsistency(format!(
                    "same_class merged pairs with canonical classes {} and {key}",
                    items[k].2
                )));
            }
            *sums.entry(key.clone()).or_insert_with(Int::zero) += &items[k].3;
        }
    }
    let distinct_groups = uf.groups().len();
    let distinct_keys = items.iter().map(|x| &x.2).collect::<std::collections::BTreeSet<_>>().len();
    if distinct_groups != distinct_keys {
        return Err(Error::Inconsistency(format!(
            "{distinct_groups} classes by same_class but {distinct_keys} canonical keys"
        )));
    }
    Ok(AuditedTrace { trace: finish(inv, sums)?, merges })
}

/// One term of the decomposition over cover classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaTerm {
    pub branch: usize,
    pub rep_index: usize,
    pub cover_class: IntVec,
    pub class: ReidClass,
    /// `|u_i(coin(τ_{βα} φ_i, ι_i))|`
    pub projection_size: usize,
}

pub type RationalTrace = BTreeMap<ReidClass, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionReport {
    /// Branches used as orbit representatives.
    pub orbit_representatives: Vec<usize>,
    /// Sum over orbit representatives `i_ℓ` and the classes of `φ_{i_ℓ}`.
    pub orbit_grouping: RationalTrace,
    /// Sum over all `i` of `1/[π:S_i]` times the classes of `φ_i`.
    pub branch_grouping: RationalTrace,
    /// `1/[π:S]` times the sum over cover classes weighted by `|u_i(coin)|`.
    pub lemma_grouping: RationalTrace,
    pub lemma_terms: Vec<LemmaTerm>,
}

impl PartitionReport {
    pub fn consistent_with(&self, trace: &TraceVector) -> bool {
        let t = trace.to_rational();
        self.orbit_grouping == t && self.branch_grouping == t && self.lemma_grouping == t
    }
}

fn add_to(map: &mut RationalTrace, c: &ReidClass, x: Rational) {
    let e = map.entry(c.clone()).or_insert_with(Rational::zero);
    *e += x;
    if e.is_zero() {
        map.remove(c);
    }
}

/// Evaluates the trace through the two orbit groupings and the cover-class
/// decomposition, with each class weighted by its coefficient in `trace`.
pub fn class_partition_report(
    ctx: &ClassContext<'_>,
    inv: &InvariantData,
    cosets: &CosetTable,
    trace: &TraceVector,
) -> Result<PartitionReport> {
    let f = ctx.morphism();
    let partition = f.orbit_partition()?;
    let cells = push_cells(ctx, inv, &default_reps(f))?;

    // classes of φ_i on S_i, found among the pushes into branch i
    let mut local: Vec<BTreeMap<ReidClass, ReidClass>> = vec![BTreeMap::new(); f.n()];
    let mut lemma_terms = Vec::new();
    for cell in &cells {
        for (beta, x, c) in &cell.pushes {
            let l = ctx.local_canonical(x, cell.branch)?;
            if let Some(prev) = local[cell.branch].insert(l, c.clone()) {
                if &prev != c {
                    return Err(Error::Inconsistency(format!("branch class maps to both {prev} and {c}")));
                }
            }
            let coin = coincidence_subgroup(f, inv, cosets, cell.branch, x)?;
            lemma_terms.push(LemmaTerm {
                branch: cell.branch,
                rep_index: cell.rep_index,
                cover_class: beta.clone(),
                class: c.clone(),
                projection_size: coin.projection_size(),
            });
        }
    }
    let coeff = |c: &ReidClass| Rational::from_integer(trace.get(c));

    let orbit_representatives: Vec<usize> = partition.orbits.iter().map(|o| o.representative).collect();
    let mut orbit_grouping = RationalTrace::new();
    for &i in &orbit_representatives {
        for c in local[i].values() {
            add_to(&mut orbit_grouping, c, coeff(c));
        }
    }
    let mut branch_grouping = RationalTrace::new();
    for (i, classes) in local.iter().enumerate() {
        let w = Rational::new(Int::one(), f.stabilizer(i)?.index);
        for c in classes.values() {
            add_to(&mut branch_grouping, c, coeff(c) * &w);
        }
    }
    let mut lemma_grouping = RationalTrace::new();
    let w = Rational::new(Int::one(), inv.index_pi_s.clone());
    for t in &lemma_terms {
        add_to(&mut lemma_grouping, &t.class, coeff(&t.class) * Rational::from_integer(Int::from(t.projection_size)) * &w);
    }
    Ok(PartitionReport { orbit_representatives, orbit_grouping, branch_grouping, lemma_grouping, lemma_terms })
}

/// Image of a class under the bijection induced by changing the lift to
/// `(γ; η) f̃`: `[(α, i)] ↦ [(α γ_{η(i)}⁻¹, η(i))]`, canonicalised for the
/// new morphism.
pub fn lift_change_class(
    new_ctx: &ClassContext<'_>,
    x: &crate::nvmorph::PermutedTuple,
    c: &ReidClass,
) -> Result<ReidClass> {
    let group = new_ctx.morphism().group();
    let alpha = group.reconstruct(&c.decomposition());
    let j = x.perm.apply(c.branch);
    let y = alpha.compose(&x.components[j].inverse()?);
    new_ctx.canonical_rep(&y, j)
}
