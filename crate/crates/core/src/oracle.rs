//! Geometric cross-check: enumerate the fixed points of an explicit affine
//! lift on a fundamental domain and rebuild `L`, `N` and the trace from them.

use std::collections::BTreeSet;
use std::fmt;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::averaging::{coincidence_subgroup, CosetTable, InvariantData};
use crate::crystal::{AffineElement, Decomposition};
use crate::error::{Error, Result};
use crate::exact::rational::{add_vec, ceil_int, common_denominator, int_to_rat, sign, sub_vec};
use crate::exact::{centered_box, solve_affine_lattice, AffineLatticeSolution, Int, IntVec, RatMatrix, RatVec, Rational};
use crate::nvmorph::NvMorphism;
use crate::par;
use crate::trace::{ClassContext, ReidClass, TraceVector};
use crate::unionfind::UnionFind;

/// `x ↦ A x + c`; `A` may be singular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub matrix: RatMatrix,
    pub translation: RatVec,
}

impl AffineMap {
    pub fn new(matrix: RatMatrix, translation: RatVec) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != translation.len() {
            return Err(Error::Dimension(format!(
                "affine map with {}x{} matrix and translation of length {}",
                matrix.rows(),
                matrix.cols(),
                translation.len()
            )));
        }
        Ok(AffineMap { matrix, translation })
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[Rational]) -> RatVec {
        add_vec(&self.matrix.mul_vec(x), &self.translation)
    }

    /// `self ∘ g`.
    pub fn after(&self, g: &AffineElement) -> AffineMap {
        AffineMap { matrix: &self.matrix * g.linear_part(), translation: self.apply(g.translation_part()) }
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &AffineElement) -> AffineMap {
        AffineMap { matrix: g.linear_part() * &self.matrix, translation: g.apply(&self.translation) }
    }
}

/// `f̃ = (f̃_1, …, f̃_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineLift {
    pub branches: Vec<AffineMap>,
}

impl AffineLift {
    pub fn new(branches: Vec<AffineMap>) -> Result<Self> {
        let Some(first) = branches.first() else {
            return Err(Error::InvalidLift("a lift needs at least one branch".into()));
        };
        if branches.iter().any(|b| b.dim() != first.dim()) {
            return Err(Error::Dimension("lift branches of different dimensions".into()));
        }
        Ok(AffineLift { branches })
    }

    pub fn n(&self) -> usize {
        self.branches.len()
    }

    pub fn dim(&self) -> usize {
        self.branches[0].dim()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivarianceFailure {
    pub generator: String,
    pub branch: usize,
}

/// Grid point where `p f̃_i(x) = p f̃_j(x)`: `f̃_i(x) = deck · f̃_j(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub point: RatVec,
    pub branches: (usize, usize),
    pub deck: AffineElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftReport {
    pub equivariance: Vec<EquivarianceFailure>,
    pub collisions: Vec<Collision>,
    pub grid_points: usize,
}

impl LiftReport {
    pub fn is_equivariant(&self) -> bool {
        self.equivariance.is_empty()
    }

    pub fn ensure_equivariant(&self) -> Result<()> {
        match self.equivariance.first() {
            None => Ok(()),
            Some(e) => Err(Error::InvalidLift(format!(
                "branch {} is not equivariant under generator {}",
                e.branch + 1,
                e.generator
            ))),
        }
    }
}

fn check_shape(f: &NvMorphism, lift: &AffineLift) -> Result<()> {
    if lift.dim() != f.group().dim() {
        return Err(Error::Dimension(format!("lift in dimension {} for a group in dimension {}", lift.dim(), f.group().dim())));
    }
    if lift.n() != f.n() {
        return Err(Error::Dimension(format!("lift with {} branches for a {}-valued morphism", lift.n(), f.n())));
    }
    Ok(())
}

/// Fundamental-domain coordinates with respect to `Γ`.
struct Domain {
    basis: RatMatrix,
    coords: RatMatrix,
}

impl Domain {
    fn new(f: &NvMorphism) -> Result<Self> {
        let basis = f.group().generator_matrix().clone();
        let coords = basis.inverse()?;
        Ok(Domain { basis, coords })
    }

    fn coords(&self, x: &[Rational]) -> RatVec {
        self.coords.mul_vec(x)
    }

    fn reduce(&self, x: &[Rational]) -> RatVec {
        let c: RatVec = self.coords(x).iter().map(|c| c - c.floor()).collect();
        self.basis.mul_vec(&c)
    }
}

/// Checks `f̃_i ∘ γ = φ_i(γ) ∘ f̃_{σ_γ⁻¹(i)}` on every generator exactly, and
/// samples `grid^m` points of the fundamental domain for branch collisions.
pub fn verify_lift(f: &NvMorphism, lift: &AffineLift, grid: usize) -> Result<LiftReport> {
    check_shape(f, lift)?;
    let group = f.group();
    let mut equivariance = Vec::new();
    for g in group.generators() {
        let gamma = group.generator_element(g);
        let image = f.image(g);
        let back = image.perm.inverse();
        for i in 0..f.n() {
            let lhs = lift.branches[i].after(&gamma);
            let rhs = lift.branches[back.apply(i)].then(&image.components[i]);
            if lhs != rhs {
                equivariance.push(EquivarianceFailure { generator: group.generator_name(g).to_string(), branch: i });
            }
        }
    }
    let mut collisions = Vec::new();
    let mut grid_points = 0;
    if f.n() > 1 && grid > 0 {
        let dom = Domain::new(f)?;
        let m = f.group().dim();
        let g = Int::from(grid);
        for k in crate::exact::box_points(&vec![g.clone(); m]) {
            let c: RatVec = k.iter().map(|x| Rational::new(x.clone(), g.clone())).collect();
            let x = dom.basis.mul_vec(&c);
            grid_points += 1;
            let ys: Vec<RatVec> = lift.branches.iter().map(|b| b.apply(&x)).collect();
            for i in 0..f.n() {
                for j in i + 1..f.n() {
                    for rep in group.reps() {
                        let h = &rep.element;
                        let w = sub_vec(&ys[i], &h.apply(&ys[j]));
                        if let Some(t) = group.lattice_coords(&w)? {
                            let deck = group.lattice_element(&t).compose(h);
                            collisions.push(Collision { point: x.clone(), branches: (i, j), deck });
                        }
                    }
                }
            }
        }
    }
    Ok(LiftReport { equivariance, collisions, grid_points })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Overrides the computed deck bound.
    pub bound: Option<i64>,
    /// Refuses enumerations with more cells than this.
    pub max_cells: u64,
    pub grid: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { bound: None, max_cells: 20_000_000, grid: 4 }
    }
}

/// A fixed point `x` of the branch `γ⁻¹ f̃_i` on the fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointRecord {
    pub point: RatVec,
    pub branch: usize,
    pub deck: AffineElement,
    pub deck_decomposition: Decomposition,
    pub index: i32,
}

impl FixedPointRecord {
    /// The element `γ⁻¹` naming the class of this point.
    pub fn class_element(&self) -> Result<AffineElement> {
        self.deck.inverse()
    }
}

impl fmt::Display for FixedPointRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.point.iter().map(|x| x.to_string()).collect();
        write!(f, "({}) branch {} index {:+}", p.join(","), self.branch + 1, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub bound: Int,
    pub records: Vec<FixedPointRecord>,
}

/// Largest lattice coordinate of a deck element that can fix a point of
/// the fundamental domain.
pub fn deck_bound(f: &NvMorphism, lift: &AffineLift) -> Result<Int> {
    check_shape(f, lift)?;
    let dom = Domain::new(f)?;
    let group = f.group();
    let norm = |v: &[Rational]| v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero);
    let diam: Rational = group.lattice_generators().iter().map(|b| norm(b)).sum();
    let mut worst = Rational::zero();
    for b in &lift.branches {
        for rep in group.reps() {
            let h = &rep.element;
            let t = b.matrix.norm_inf() * &diam
                + norm(&b.translation)
                + h.linear_part().norm_inf() * &diam
                + norm(h.translation_part());
            worst = worst.max(t);
        }
    }
    Ok(ceil_int(&(dom.coords.norm_inf() * worst)))
}

/// Solves `f̃_i(x) = γ x` for every branch and every `γ = t · h` with
/// `|t|_∞ ≤ B` in lattice coordinates, keeping one point per `π`-orbit.
pub fn enumerate_fixed_points(f: &NvMorphism, lift: &AffineLift, opts: &OracleOptions) -> Result<Enumeration> {
    let bound = match opts.bound {
        Some(b) if b >= 0 => Int::from(b),
        Some(b) => return Err(Error::Config(format!("negative deck bound {b}"))),
        None => deck_bound(f, lift)?,
    };
    enumerate_with_bound(f, lift, &bound, opts.max_cells)
}

/// `f̃_i(x) = t h x` for fixed `(i, h)`, in lattice coordinates scaled to
/// integers: `x = G (x0 + Q t) / den`.
enum Kind {
    Regular { den: Int, x0: IntVec, columns: Vec<IntVec> },
    Singular { base: RatVec, left_kernel: Vec<RatVec> },
}

struct System {
    branch: usize,
    rep_index: usize,
    kind: Kind,
}

impl System {
    fn new(b: &AffineMap, h: &AffineElement, gm: &RatMatrix, dom: &Domain, branch: usize, rep_index: usize) -> Result<Self> {
        let a = &b.matrix - h.linear_part();
        let base = sub_vec(h.translation_part(), &b.translation);
        let kind = match a.inverse() {
            Ok(p) => {
                let x0 = dom.coords(&p.mul_vec(&base));
                let q = &(&dom.coords * &p) * gm;
                let den = common_denominator(x0.iter().chain(q.to_rows().iter().flatten()));
                let scale = |v: &[Rational]| -> IntVec {
                    v.iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect()
                };
                Kind::Regular { x0: scale(&x0), columns: q.columns().iter().map(|c| scale(c)).collect(), den }
            }
            Err(_) => {
                let zero = vec![Rational::zero(); a.rows()];
                let left_kernel = a.transpose().solve(&zero)?.map(|s| s.kernel).unwrap_or_default();
                Kind::Singular { base, left_kernel }
            }
        };
        Ok(System { branch, rep_index, kind })
    }

    fn solve(&self, t: &[Int], gm: &RatMatrix, dom: &Domain) -> Result<Option<RatVec>> {
        match &self.kind {
            Kind::Regular { den, x0, columns } => {
                let mut x = x0.clone();
                for (tj, col) in t.iter().zip(columns) {
                    if tj.is_zero() {
                        continue;
                    }
                    for (xi, ci) in x.iter_mut().zip(col) {
                        *xi += tj * ci;
                    }
                }
                if x.iter().any(|xi| xi.is_negative() || xi >= den) {
                    return Ok(None);
                }
                let c: RatVec = x.into_iter().map(|xi| Rational::new(xi, den.clone())).collect();
                Ok(Some(dom.basis.mul_vec(&c)))
            }
            Kind::Singular { base, left_kernel } => {
                let rhs = add_vec(base, &gm.mul_vec(&int_to_rat(t)));
                let solvable =
                    left_kernel.iter().all(|y| y.iter().zip(&rhs).map(|(a, b)| a * b).sum::<Rational>().is_zero());
                if solvable {
                    return Err(Error::DegenerateFixedSet(format!(
                        "branch {} has a positive-dimensional fixed set; perturb the lift",
                        self.branch + 1
                    )));
                }
                Ok(None)
            }
        }
    }
}

fn enumerate_with_bound(f: &NvMorphism, lift: &AffineLift, bound: &Int, max_cells: u64) -> Result<Enumeration> {
    check_shape(f, lift)?;
    let group = f.group();
    let m = group.dim();
    let dom = Domain::new(f)?;
    let width: Int = Int::from(2) * bound + 1;
    let cells = num::pow(width.clone(), m) * Int::from(group.holonomy_order() * f.n());
    if cells > Int::from(max_cells) {
        return Err(Error::Config(format!("deck bound {bound} needs {cells} cells, more than the limit {max_cells}")));
    }
    let ts = centered_box(m, bound);
    let gm = group.generator_matrix();
    let systems = (0..f.n())
        .flat_map(|i| (0..group.holonomy_order()).map(move |k| (i, k)))
        .map(|(i, k)| System::new(&lift.branches[i], group.rep(k), gm, &dom, i, k))
        .collect::<Result<Vec<_>>>()?;
    const CHUNK: usize = 2048;
    let tasks: Vec<(usize, usize)> =
        (0..systems.len()).flat_map(|s| (0..ts.len().div_ceil(CHUNK)).map(move |c| (s, c))).collect();
    let found = par::try_map(&tasks, |&(s, c)| {
        let sys = &systems[s];
        let mut out = Vec::new();
        for t in &ts[c * CHUNK..ts.len().min((c + 1) * CHUNK)] {
            if let Some(x) = sys.solve(t, gm, &dom)? {
                out.push((sys.branch, x, Decomposition { lattice_coords: t.clone(), rep_index: sys.rep_index }));
            }
        }
        Ok(out)
    })?;
    let mut records = Vec::new();
    for sols in found {
        for (i, x, d) in sols {
            let key = dom.coords(&x);
            let orbit_min = group
                .reps()
                .iter()
                .map(|r| dom.coords(&dom.reduce(&r.element.apply(&x))))
                .min()
                .expect("the identity is a representative");
            if orbit_min != key {
                continue;
            }
            let deck = group.reconstruct(&d);
            let b = &lift.branches[i];
            if b.apply(&x) != deck.apply(&x) {
                return Err(Error::Inconsistency("fixed point fails its defining equation".into()));
            }
            let hinv = deck.linear_part().inverse()?;
            let det = (&RatMatrix::identity(m) - &(&hinv * &b.matrix)).det()?;
            let index = sign(&det);
            if index == 0 {
                return Err(Error::DegenerateFixedSet(format!("fixed point with zero index on branch {}", i + 1)));
            }
            records.push(FixedPointRecord { point: x, branch: i, deck, deck_decomposition: d, index });
        }
    }
    records.sort_by(|p, q| {
        (dom.coords(&p.point), p.branch, &p.deck_decomposition).cmp(&(dom.coords(&q.point), q.branch, &q.deck_decomposition))
    });
    Ok(Enumeration { bound: bound.clone(), records })
}

/// Re-enumerates with the bound doubled; `true` when nothing changes.
pub fn bound_is_stable(f: &NvMorphism, lift: &AffineLift, e: &Enumeration, max_cells: u64) -> Result<bool> {
    let doubled = enumerate_with_bound(f, lift, &(Int::from(2) * &e.bound), max_cells)?;
    Ok(doubled.records == e.records)
}

/// A fixed point class: records grouped by the class of `(γ⁻¹, i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleClass {
    pub class: ReidClass,
    pub members: Vec<usize>,
    pub index: Int,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleInvariants {
    pub lefschetz: Int,
    pub nielsen: Int,
    pub trace: TraceVector,
    pub classes: Vec<OracleClass>,
}

/// Groups records with [`ClassContext::same_class`], then names each group
/// by its canonical representative.
pub fn oracle_invariants(ctx: &ClassContext<'_>, records: &[FixedPointRecord]) -> Result<OracleInvariants> {
    let elems = records.iter().map(|r| r.class_element()).collect::<Result<Vec<_>>>()?;
    let mut uf = UnionFind::new(records.len());
    let mut roots: Vec<usize> = Vec::new();
    for (a, r) in records.iter().enumerate() {
        let mut joined = false;
        for &b in &roots {
            if ctx.same_class(&elems[a], r.branch, &elems[b], records[b].branch)?.is_some() {
                uf.union(a, b);
                joined = true;
                break;
            }
        }
        if !joined {
            roots.push(a);
        }
    }
    let mut classes = Vec::new();
    let mut seen = BTreeSet::new();
    for members in uf.groups() {
        let keys = members
            .iter()
            .map(|&a| ctx.canonical_rep(&elems[a], records[a].branch))
            .collect::<Result<BTreeSet<_>>>()?;
        if keys.len() != 1 {
            return Err(Error::Inconsistency("records in one class have different canonical keys".into()));
        }
        let class = keys.into_iter().next().expect("nonempty group");
        if !seen.insert(class.clone()) {
            return Err(Error::Inconsistency(format!("class {class} split across fixed point groups")));
        }
        let index: Int = members.iter().map(|&a| Int::from(records[a].index)).sum();
        classes.push(OracleClass { class, members, index });
    }
    classes.sort_by(|p, q| p.class.cmp(&q.class));
    let lefschetz = records.iter().map(|r| Int::from(r.index)).sum();
    let nielsen = Int::from(classes.iter().filter(|c| !c.index.is_zero()).count());
    let trace = classes.iter().map(|c| (c.class.clone(), c.index.clone())).collect();
    Ok(OracleInvariants { lefschetz, nielsen, trace, classes })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberCount {
    pub record: usize,
    pub geometric: usize,
    pub algebraic: usize,
}

/// For each record `x`, counts the points of the `S`-cover over `p(x)` that
/// lie in `p' Fix(γ⁻¹ f̃_i)`, and compares with `|u_i(coin(τ_{γ⁻¹} φ_i, ι_i))|`.
pub fn fiber_counts(
    f: &NvMorphism,
    lift: &AffineLift,
    inv: &InvariantData,
    cosets: &CosetTable,
    records: &[FixedPointRecord],
) -> Result<Vec<FiberCount>> {
    check_shape(f, lift)?;
    let s_basis = inv.s.basis_matrix();
    let s_coords = s_basis.inverse()?;
    let m = f.group().dim();
    let counts = par::try_map(&records.iter().enumerate().collect::<Vec<_>>(), |&(idx, r)| {
        let alpha = r.class_element()?;
        let b = &lift.branches[r.branch];
        let fiber: BTreeSet<RatVec> = cosets
            .reps
            .iter()
            .map(|c| {
                let y = c.element.apply(&r.point);
                let k: RatVec = s_coords.mul_vec(&y).iter().map(|c| c.floor()).collect();
                sub_vec(&y, &s_basis.mul_vec(&k))
            })
            .collect();
        let a = &RatMatrix::identity(m) - &(alpha.linear_part() * &b.matrix);
        let mut geometric = 0;
        for y in &fiber {
            let rhs = sub_vec(&alpha.apply(&b.apply(y)), y);
            if let AffineLatticeSolution::Coset { .. } = solve_affine_lattice(&a, &rhs, &inv.s)? {
                geometric += 1;
            }
        }
        let algebraic = coincidence_subgroup(f, inv, cosets, r.branch, &alpha)?.projection_size();
        Ok(FiberCount { record: idx, geometric, algebraic })
    })?;
    if let Some(c) = counts.iter().find(|c| c.geometric != c.algebraic) {
        return Err(Error::Inconsistency(format!(
            "fixed point {}: {} lifts in the cover but |u(coin)| = {}",
            records[c.record], c.geometric, c.algebraic
        )));
    }
    Ok(counts)
}
