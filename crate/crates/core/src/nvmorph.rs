//! Morphisms `f̃_# = (φ_1, …, φ_n; σ) : π → π^n ⋊ S_n`.

use std::fmt;

use num::{Integer, One, ToPrimitive, Zero};

use crate::crystal::{AffineElement, CrystGroup, Decomposition, Generator, Word};
use crate::error::{Error, Result};
use crate::exact::rational::ivec;
use crate::exact::{box_points, Int, IntVec, Lattice, RatMatrix};

/// A permutation of `{0, …, n-1}` stored in one-line form: `p[i] = σ(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidMorphism(format!("not a permutation: {images:?}")));
            }
        }
        Ok(Permutation(images))
    }

    /// One-line notation with 1-based entries, e.g. `[2, 1]` for the swap.
    pub fn from_one_line(one_based: &[usize]) -> Result<Self> {
        if one_based.contains(&0) {
            return Err(Error::InvalidMorphism(format!("permutation entries are 1-based: {one_based:?}")));
        }
        Self::from_images(one_based.iter().map(|x| x - 1).collect())
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(a, b);
        Permutation(p)
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.0.iter().map(|x| x + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Permutation(inv)
    }

    pub fn pow(&self, k: &Int) -> Self {
        let order = Int::from(self.order());
        let e = k.mod_floor(&order).to_usize().expect("reduced exponent fits");
        (0..e).fold(Self::identity(self.len()), |acc, _| acc.compose(self))
    }

    pub fn order(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut order = 1usize;
        for start in 0..self.len() {
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x];
                len += 1;
            }
            if len > 0 {
                order = order.lcm(&len);
            }
        }
        order
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_line().iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// An element `(α_1, …, α_n; σ)` of `π^n ⋊ S_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermutedTuple {
    pub components: Vec<AffineElement>,
    pub perm: Permutation,
}

impl PermutedTuple {
    pub fn new(components: Vec<AffineElement>, perm: Permutation) -> Result<Self> {
        if components.len() != perm.len() {
            return Err(Error::Dimension(format!(
                "{} components with a permutation of {} points",
                components.len(),
                perm.len()
            )));
        }
        Ok(PermutedTuple { components, perm })
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        PermutedTuple { components: vec![AffineElement::identity(dim); n], perm: Permutation::identity(n) }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.is_identity() && self.components.iter().all(AffineElement::is_identity)
    }

    /// `(α; σ)(β; τ) = (α_i β_{σ⁻¹(i)}; στ)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!("tuples of size {} and {}", self.len(), other.len())));
        }
        let inv = self.perm.inverse();
        let components = (0..self.len())
            .map(|i| self.components[i].checked_compose(&other.components[inv.apply(i)]))
            .collect::<Result<Vec<_>>>()?;
        Ok(PermutedTuple { components, perm: self.perm.compose(&other.perm) })
    }

    /// `(α; σ)⁻¹ = (γ; σ⁻¹)` with `γ_j = α_{σ(j)}⁻¹`.
    pub fn inverse(&self) -> Result<Self> {
        let components = (0..self.len())
            .map(|j| self.components[self.perm.apply(j)].inverse())
            .collect::<Result<Vec<_>>>()?;
        Ok(PermutedTuple { components, perm: self.perm.inverse() })
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let dim = self.components.first().map_or(0, AffineElement::dim);
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::identity(self.len(), dim);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    fn pow_int(&self, k: &Int) -> Result<Self> {
        let e = k.to_i64().ok_or_else(|| Error::Config(format!("exponent {k} out of range")))?;
        self.pow(e)
    }

    /// `self · x · self⁻¹`
    pub fn conjugate(&self, x: &Self) -> Result<Self> {
        self.mul(x)?.mul(&self.inverse()?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismViolation {
    NotMember { generator: String, component: usize },
    Relator { relator: String },
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismViolation::NotMember { generator, component } => {
                write!(f, "component {} of the image of {generator} is not in the group", component + 1)
            }
            MorphismViolation::Relator { relator } => write!(f, "relator {relator} does not map to the identity"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MorphismReport {
    pub relators_checked: usize,
    pub violations: Vec<MorphismViolation>,
}

impl MorphismReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A subgroup `H ⊆ π` containing a finite-index sublattice of `Γ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupData {
    /// `H ∩ Γ` as a lattice of translation vectors.
    pub lattice_part: Lattice,
    /// Holonomy representatives whose `Γ`-coset meets `H`.
    pub rep_indices: Vec<usize>,
    /// One element of `H` in each such coset.
    pub coset_witnesses: Vec<Decomposition>,
    /// `[π : H]`.
    pub index: Int,
}

impl SubgroupData {
    pub fn contains_rep(&self, k: usize) -> bool {
        self.rep_indices.contains(&k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub members: Vec<usize>,
    pub representative: usize,
    /// `[π : S_i]` for the representative.
    pub stabilizer_index: Int,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPartition {
    pub orbits: Vec<Orbit>,
}

impl OrbitPartition {
    pub fn orbit_of(&self, i: usize) -> &Orbit {
        self.orbits.iter().find(|o| o.members.contains(&i)).expect("every index lies in an orbit")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NvMorphism {
    group: CrystGroup,
    n: usize,
    images: Vec<PermutedTuple>,
    rep_images: Vec<PermutedTuple>,
}

impl NvMorphism {
    /// `images` are listed in the order of [`CrystGroup::generators`].
    pub fn new(group: CrystGroup, n: usize, images: Vec<PermutedTuple>) -> Result<Self> {
        let gens = group.generators();
        if images.len() != gens.len() {
            return Err(Error::InvalidMorphism(format!(
                "{} generator images given, the group has {} generators",
                images.len(),
                gens.len()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidMorphism("multiplicity must be positive".into()));
        }
        for (g, img) in gens.iter().zip(&images) {
            if img.len() != n {
                return Err(Error::InvalidMorphism(format!(
                    "image of {} has {} components, expected {n}",
                    group.generator_name(*g),
                    img.len()
                )));
            }
            if img.components.iter().any(|c| c.dim() != group.dim()) {
                return Err(Error::Dimension(format!("image of {} has wrong dimension", group.generator_name(*g))));
            }
        }
        let mut rep_images = vec![PermutedTuple::identity(n, group.dim())];
        rep_images.extend(images[group.dim()..].iter().cloned());
        Ok(NvMorphism { group, n, images, rep_images })
    }

    /// The single-valued morphism induced by a linear map of `Z^m`, on the torus group.
    pub fn torus_linear(a: &RatMatrix) -> Result<Self> {
        let m = a.rows();
        let group = CrystGroup::torus(m);
        let images = (0..m)
            .map(|j| PermutedTuple::new(vec![AffineElement::translation(a.column(j))], Permutation::identity(1)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, 1, images)
    }

    pub fn group(&self) -> &CrystGroup {
        &self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn images(&self) -> &[PermutedTuple] {
        &self.images
    }

    pub fn image(&self, g: Generator) -> &PermutedTuple {
        &self.images[self.group.generator_position(g)]
    }

    pub fn rep_image(&self, k: usize) -> &PermutedTuple {
        &self.rep_images[k]
    }

    pub fn validate(&self) -> Result<MorphismReport> {
        let mut violations = Vec::new();
        for (g, img) in self.group.generators().into_iter().zip(&self.images) {
            for (c, x) in img.components.iter().enumerate() {
                if !self.group.contains(x) {
                    violations.push(MorphismViolation::NotMember {
                        generator: self.group.generator_name(g).to_string(),
                        component: c,
                    });
                }
            }
        }
        let relators = self.group.relators()?;
        for r in &relators {
            if !self.evaluate_word(&r.word)?.is_identity() {
                violations.push(MorphismViolation::Relator { relator: r.name.clone() });
            }
        }
        Ok(MorphismReport { relators_checked: relators.len(), violations })
    }

    /// Errors with `InvalidMorphism` unless [`NvMorphism::validate`] is clean.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate()?;
        if report.is_valid() {
            Ok(())
        } else {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidMorphism(msgs.join("; ")))
        }
    }

    pub fn evaluate_word(&self, word: &[(Generator, i64)]) -> Result<PermutedTuple> {
        word.iter().try_fold(PermutedTuple::identity(self.n, self.group.dim()), |acc, &(g, e)| {
            acc.mul(&self.image(g).pow(e)?)
        })
    }

    /// `f̃_#(t)` for a lattice element given by coordinates.
    pub fn evaluate_lattice(&self, coords: &[Int]) -> Result<PermutedTuple> {
        let mut acc = PermutedTuple::identity(self.n, self.group.dim());
        for (j, k) in coords.iter().enumerate() {
            if !k.is_zero() {
                acc = acc.mul(&self.images[j].pow_int(k)?)?;
            }
        }
        Ok(acc)
    }

    pub fn evaluate_decomposition(&self, d: &Decomposition) -> Result<PermutedTuple> {
        self.evaluate_lattice(&d.lattice_coords)?.mul(&self.rep_images[d.rep_index])
    }

    pub fn evaluate(&self, g: &AffineElement) -> Result<PermutedTuple> {
        self.evaluate_decomposition(&self.group.decompose(g)?)
    }

    /// `σ` on a lattice element.
    pub fn sigma_lattice(&self, coords: &[Int]) -> Permutation {
        coords.iter().enumerate().fold(Permutation::identity(self.n), |acc, (j, k)| {
            acc.compose(&self.images[j].perm.pow(k))
        })
    }

    pub fn sigma(&self, d: &Decomposition) -> Permutation {
        self.sigma_lattice(&d.lattice_coords).compose(&self.rep_images[d.rep_index].perm)
    }

    /// Orders of `σ(a_j)`; `σ` on `Γ` factors through the box they span.
    fn lattice_sigma_orders(&self) -> Vec<Int> {
        (0..self.group.dim()).map(|j| Int::from(self.images[j].perm.order())).collect()
    }

    /// The subgroup `{t ∈ Γ : pred(σ_t)}` for a predicate cutting out a
    /// subgroup of `σ(Γ)`.
    fn lattice_subgroup(&self, pred: impl Fn(&Permutation) -> bool) -> Result<Lattice> {
        let m = self.group.dim();
        let orders = self.lattice_sigma_orders();
        let mut gens = Vec::new();
        for (j, o) in orders.iter().enumerate() {
            let mut c = vec![Int::zero(); m];
            c[j] = o.clone();
            gens.push(c);
        }
        for t in box_points(&orders) {
            if pred(&self.sigma_lattice(&t)) && t.iter().any(|x| !x.is_zero()) {
                gens.push(t);
            }
        }
        let vecs: Vec<_> = gens.iter().map(|c| self.group.lattice_vector(c)).collect();
        Lattice::from_generators(m, &vecs)
    }

    fn subgroup(&self, pred: impl Fn(&Permutation) -> bool) -> Result<SubgroupData> {
        let lattice_part = self.lattice_subgroup(&pred)?;
        let orders = self.lattice_sigma_orders();
        let lattice_box = box_points(&orders);
        let mut rep_indices = Vec::new();
        let mut coset_witnesses = Vec::new();
        for k in 0..self.group.holonomy_order() {
            let hk = &self.rep_images[k].perm;
            if let Some(t) = lattice_box.iter().find(|t| pred(&self.sigma_lattice(t).compose(hk))) {
                rep_indices.push(k);
                coset_witnesses.push(Decomposition { lattice_coords: t.clone(), rep_index: k });
            }
        }
        let lattice_index = self.group.lattice().index_of(&lattice_part)?;
        let total = lattice_index * Int::from(self.group.holonomy_order());
        let count = Int::from(rep_indices.len());
        if !total.is_multiple_of(&count) {
            return Err(Error::Inconsistency("subgroup index is not an integer".into()));
        }
        Ok(SubgroupData { lattice_part, rep_indices, coset_witnesses, index: total / count })
    }

    pub fn sigma_kernel(&self) -> Result<SubgroupData> {
        self.subgroup(Permutation::is_identity)
    }

    /// `S_i = {α ∈ π : σ_α(i) = i}`.
    pub fn stabilizer(&self, i: usize) -> Result<SubgroupData> {
        self.subgroup(|p| p.apply(i) == i)
    }

    pub fn orbit_partition(&self) -> Result<OrbitPartition> {
        let gens: Vec<&Permutation> = self.images.iter().map(|t| &t.perm).collect();
        let mut assigned = vec![false; self.n];
        let mut orbits = Vec::new();
        for start in 0..self.n {
            if assigned[start] {
                continue;
            }
            let mut members = vec![start];
            assigned[start] = true;
            let mut k = 0;
            while k < members.len() {
                let x = members[k];
                for p in &gens {
                    let y = p.apply(x);
                    if !assigned[y] {
                        assigned[y] = true;
                        members.push(y);
                    }
                }
                k += 1;
            }
            members.sort_unstable();
            let stabilizer_index = self.stabilizer(start)?.index;
            if stabilizer_index != Int::from(members.len()) {
                return Err(Error::Inconsistency(format!(
                    "orbit of {} has {} elements but the stabilizer has index {stabilizer_index}",
                    start + 1,
                    members.len()
                )));
            }
            orbits.push(Orbit { members, representative: start, stabilizer_index });
        }
        Ok(OrbitPartition { orbits })
    }

    /// The linear map sending each basis vector `λ` of `l` to the translation
    /// part of `φ_i(λ)`. Requires `l ⊆ S_i ∩ Γ` of full rank with
    /// `φ_i(l)` consisting of translations.
    pub fn linearize(&self, i: usize, l: &Lattice) -> Result<RatMatrix> {
        if i >= self.n {
            return Err(Error::Precondition(format!("branch {} out of range", i + 1)));
        }
        if !l.is_full_rank() || l.dim() != self.group.dim() {
            return Err(Error::Precondition("linearize needs a full-rank lattice".into()));
        }
        let mut images = Vec::with_capacity(l.rank());
        for lambda in l.basis() {
            let coords = self
                .group
                .lattice_coords(lambda)?
                .ok_or_else(|| Error::Precondition(format!("{lambda:?} is not in the translation lattice")))?;
            let img = self.evaluate_lattice(&coords)?;
            if img.perm.apply(i) != i {
                return Err(Error::Precondition(format!(
                    "basis vector {} does not stabilise branch {}",
                    fmt_vec(lambda),
                    i + 1
                )));
            }
            let phi = &img.components[i];
            if !phi.is_pure_translation() {
                return Err(Error::Precondition(format!(
                    "branch {} maps basis vector {} to {phi}, which is not a translation",
                    i + 1,
                    fmt_vec(lambda)
                )));
            }
            images.push(phi.translation_part().clone());
        }
        let w = RatMatrix::from_columns(self.group.dim(), &images)?;
        Ok(&w * &l.basis_matrix().inverse()?)
    }

    /// The morphism for the lift `(γ; η) f̃`: every image conjugated by `x`.
    pub fn conjugate(&self, x: &PermutedTuple) -> Result<Self> {
        if x.len() != self.n {
            return Err(Error::Dimension("conjugating tuple has the wrong size".into()));
        }
        let images = self.images.iter().map(|y| x.conjugate(y)).collect::<Result<Vec<_>>>()?;
        Self::new(self.group.clone(), self.n, images)
    }

    /// Same morphism over a group with shifted representatives
    /// (see [`CrystGroup::with_shifted_reps`]).
    pub fn with_shifted_reps(&self, shifts: &[IntVec]) -> Result<Self> {
        let group = self.group.with_shifted_reps(shifts)?;
        let m = self.group.dim();
        let mut images = self.images[..m].to_vec();
        for k in 1..self.group.holonomy_order() {
            images.push(self.evaluate_lattice(&shifts[k])?.mul(&self.rep_images[k])?);
        }
        Self::new(group, self.n, images)
    }

    pub fn word_for(&self, d: &Decomposition) -> Result<Word> {
        self.group.decomposition_word(d)
    }
}

fn fmt_vec(v: &[crate::exact::Rational]) -> String {
    let parts: Vec<String> = v.iter().map(crate::exact::rational::format_rational).collect();
    format!("({})", parts.join(", "))
}

/// `t` as a decomposition with identity representative.
pub fn lattice_decomposition(t: IntVec) -> Decomposition {
    Decomposition { lattice_coords: t, rep_index: 0 }
}

pub fn unit_vector(m: usize, j: usize) -> IntVec {
    let mut v = ivec(&vec![0; m]);
    v[j] = Int::one();
    v
}

pub fn translation_of(group: &CrystGroup, coords: &[Int]) -> AffineElement {
    AffineElement::translation(group.lattice_vector(coords))
}
