//! Crystallographic groups `π ⊂ R^m ⋊ GL_m(Q)`, presented by their
//! translation lattice `Γ` and one affine representative per holonomy coset.

use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::rational::{add_vec, int_to_rat, is_zero_vec, neg_vec, sub_vec, zero_vec};
use crate::exact::{lattice_member, Int, IntVec, Lattice, RatMatrix, RatVec, Rational};

/// An affine motion `x ↦ A x + v`, written `(v, A)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineElement {
    translation: RatVec,
    linear: RatMatrix,
}

impl AffineElement {
    pub fn new(translation: RatVec, linear: RatMatrix) -> Result<Self> {
        if !linear.is_square() || linear.rows() != translation.len() {
            return Err(Error::Dimension(format!(
                "affine element with {}x{} linear part and translation of length {}",
                linear.rows(),
                linear.cols(),
                translation.len()
            )));
        }
        Ok(AffineElement { translation, linear })
    }

    pub fn identity(dim: usize) -> Self {
        AffineElement { translation: zero_vec(dim), linear: RatMatrix::identity(dim) }
    }

    pub fn translation(v: RatVec) -> Self {
        let dim = v.len();
        AffineElement { translation: v, linear: RatMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn translation_part(&self) -> &RatVec {
        &self.translation
    }

    pub fn linear_part(&self) -> &RatMatrix {
        &self.linear
    }

    pub fn is_identity(&self) -> bool {
        self.is_pure_translation() && is_zero_vec(&self.translation)
    }

    pub fn is_pure_translation(&self) -> bool {
        self.linear.is_identity()
    }

    /// `(v, A)(w, B) = (v + A w, A B)`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "composing affine elements of different dimension");
        AffineElement {
            translation: add_vec(&self.translation, &self.linear.mul_vec(&other.translation)),
            linear: &self.linear * &other.linear,
        }
    }

    pub fn checked_compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("compose in dimensions {} and {}", self.dim(), other.dim())));
        }
        Ok(self.compose(other))
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.linear.inverse()?;
        let translation = neg_vec(&inv.mul_vec(&self.translation));
        Ok(AffineElement { translation, linear: inv })
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::identity(self.dim());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.compose(&sq);
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, x: &[Rational]) -> RatVec {
        add_vec(&self.linear.mul_vec(x), &self.translation)
    }

    /// `self · g · self⁻¹`
    pub fn conjugate(&self, g: &Self) -> Result<Self> {
        Ok(self.compose(g).compose(&self.inverse()?))
    }
}

impl fmt::Display for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t: Vec<String> = self.translation.iter().map(crate::exact::rational::format_rational).collect();
        write!(f, "([{}], {})", t.join(", "), self.linear)
    }
}

/// A non-lattice generator is a non-identity holonomy representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Lattice(usize),
    Holonomy(usize),
}

/// A word in the generators, as `(generator, exponent)` letters.
pub type Word = Vec<(Generator, i64)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HolonomyRep {
    pub name: String,
    pub element: AffineElement,
}

/// Normal form `g = t · h` with `t ∈ Γ` and `h` a holonomy representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decomposition {
    pub lattice_coords: IntVec,
    pub rep_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relator {
    pub name: String,
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupViolation {
    SingularHolonomy { rep: String },
    HolonomyClash { first: String, second: String },
    NotNormal { rep: String, generator: String },
    NotClosed { left: String, right: String },
    IdentityRep,
}

impl fmt::Display for GroupViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupViolation::SingularHolonomy { rep } => write!(f, "holonomy representative {rep} is not invertible"),
            GroupViolation::HolonomyClash { first, second } => {
                write!(f, "representatives {first} and {second} share a linear part")
            }
            GroupViolation::NotNormal { rep, generator } => {
                write!(f, "linear part of {rep} does not preserve the lattice (image of {generator})")
            }
            GroupViolation::NotClosed { left, right } => {
                write!(f, "{left}·{right} is not a lattice element times a representative")
            }
            GroupViolation::IdentityRep => write!(f, "first representative is not the identity"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupReport {
    pub violations: Vec<GroupViolation>,
}

impl GroupReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Multiplication table of `π/Γ`: `h_i · h_j = t · h_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientTable {
    pub products: Vec<Vec<Decomposition>>,
}

impl QuotientTable {
    pub fn order(&self) -> usize {
        self.products.len()
    }

    pub fn product(&self, i: usize, j: usize) -> usize {
        self.products[i][j].rep_index
    }

    pub fn inverse(&self, i: usize) -> usize {
        (0..self.order()).find(|&j| self.product(i, j) == 0).expect("quotient table has inverses")
    }
}

/// A crystallographic group given by a lattice basis `a_1, …, a_m` of `Γ`
/// and holonomy representatives (index 0 is always the identity).
///
/// Torsion-freeness is not checked: the invariants computed here only depend
/// on the algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrystGroup {
    dim: usize,
    lattice_names: Vec<String>,
    lattice_gens: Vec<RatVec>,
    gen_matrix: RatMatrix,
    lattice: Lattice,
    reps: Vec<HolonomyRep>,
}

pub const IDENTITY_NAME: &str = "1";

impl CrystGroup {
    /// `reps` lists the non-identity representatives; the identity is prepended.
    pub fn new(dim: usize, lattice: Vec<(String, RatVec)>, reps: Vec<(String, AffineElement)>) -> Result<Self> {
        if lattice.len() != dim {
            return Err(Error::InvalidGroup(format!("need {dim} lattice generators, got {}", lattice.len())));
        }
        let (lattice_names, lattice_gens): (Vec<String>, Vec<RatVec>) = lattice.into_iter().unzip();
        if lattice_gens.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension("lattice generator length".into()));
        }
        let gen_matrix = RatMatrix::from_columns(dim, &lattice_gens)?;
        if gen_matrix.rank() != dim {
            return Err(Error::InvalidGroup("lattice generators are not linearly independent".into()));
        }
        let lattice_l = Lattice::from_basis(dim, &lattice_gens)?;
        let mut all_reps = vec![HolonomyRep { name: IDENTITY_NAME.into(), element: AffineElement::identity(dim) }];
        for (name, element) in reps {
            if element.dim() != dim {
                return Err(Error::Dimension(format!("representative {name} has dimension {}", element.dim())));
            }
            all_reps.push(HolonomyRep { name, element });
        }
        let mut names: Vec<&String> = lattice_names.iter().chain(all_reps.iter().map(|r| &r.name)).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGroup("duplicate generator names".into()));
        }
        Ok(CrystGroup { dim, lattice_names, lattice_gens, gen_matrix, lattice: lattice_l, reps: all_reps })
    }

    /// `Z^m` with trivial holonomy.
    pub fn torus(dim: usize) -> Self {
        let gens = (0..dim)
            .map(|i| {
                let mut v = zero_vec(dim);
                v[i] = Rational::one();
                (format!("e{}", i + 1), v)
            })
            .collect();
        Self::new(dim, gens, Vec::new()).expect("standard torus group")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ`, in canonical form.
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Columns are the lattice generators `a_1, …, a_m`.
    pub fn generator_matrix(&self) -> &RatMatrix {
        &self.gen_matrix
    }

    pub fn lattice_generators(&self) -> &[RatVec] {
        &self.lattice_gens
    }

    pub fn reps(&self) -> &[HolonomyRep] {
        &self.reps
    }

    pub fn rep(&self, k: usize) -> &AffineElement {
        &self.reps[k].element
    }

    /// `[π : Γ]`.
    pub fn holonomy_order(&self) -> usize {
        self.reps.len()
    }

    pub fn generators(&self) -> Vec<Generator> {
        (0..self.dim)
            .map(Generator::Lattice)
            .chain((1..self.reps.len()).map(Generator::Holonomy))
            .collect()
    }

    /// Position of a generator in [`CrystGroup::generators`].
    pub fn generator_position(&self, g: Generator) -> usize {
        match g {
            Generator::Lattice(j) => j,
            Generator::Holonomy(k) => self.dim + k - 1,
        }
    }

    pub fn generator_name(&self, g: Generator) -> &str {
        match g {
            Generator::Lattice(j) => &self.lattice_names[j],
            Generator::Holonomy(k) => &self.reps[k].name,
        }
    }

    pub fn generator_by_name(&self, name: &str) -> Option<Generator> {
        if let Some(j) = self.lattice_names.iter().position(|n| n == name) {
            return Some(Generator::Lattice(j));
        }
        self.reps.iter().skip(1).position(|r| r.name == name).map(|k| Generator::Holonomy(k + 1))
    }

    pub fn generator_element(&self, g: Generator) -> AffineElement {
        match g {
            Generator::Lattice(j) => AffineElement::translation(self.lattice_gens[j].clone()),
            Generator::Holonomy(k) => self.reps[k].element.clone(),
        }
    }

    pub fn evaluate_word(&self, word: &[(Generator, i64)]) -> Result<AffineElement> {
        word.iter().try_fold(AffineElement::identity(self.dim), |acc, &(g, e)| {
            Ok(acc.compose(&self.generator_element(g).pow(e)?))
        })
    }

    pub fn word_to_string(&self, word: &[(Generator, i64)]) -> String {
        if word.is_empty() {
            return IDENTITY_NAME.into();
        }
        word.iter()
            .map(|&(g, e)| {
                let n = self.generator_name(g);
                if e == 1 { n.to_string() } else { format!("{n}^{e}") }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Coordinates of a translation vector in the generator basis, or `None`
    /// if it is not in `Γ`.
    pub fn lattice_coords(&self, v: &[Rational]) -> Result<Option<IntVec>> {
        lattice_member(&self.gen_matrix, v)
    }

    pub fn lattice_vector(&self, coords: &[Int]) -> RatVec {
        self.gen_matrix.mul_vec(&int_to_rat(coords))
    }

    pub fn lattice_element(&self, coords: &[Int]) -> AffineElement {
        AffineElement::translation(self.lattice_vector(coords))
    }

    /// Word `a_1^{k_1} ⋯ a_m^{k_m}` for lattice coordinates.
    pub fn lattice_word(&self, coords: &[Int]) -> Result<Word> {
        coords
            .iter()
            .enumerate()
            .filter(|(_, k)| !k.is_zero())
            .map(|(j, k)| {
                let e = i64::try_from(k)
                    .map_err(|_| Error::Config(format!("lattice coordinate {k} too large for a word")))?;
                Ok((Generator::Lattice(j), e))
            })
            .collect()
    }

    pub fn rep_index_of_linear(&self, linear: &RatMatrix) -> Option<usize> {
        self.reps.iter().position(|r| r.element.linear_part() == linear)
    }

    /// Unique `g = t · h_k`.
    pub fn decompose(&self, g: &AffineElement) -> Result<Decomposition> {
        if g.dim() != self.dim {
            return Err(Error::Dimension(format!("element of dimension {} in group of dimension {}", g.dim(), self.dim)));
        }
        let rep_index = self
            .rep_index_of_linear(g.linear_part())
            .ok_or_else(|| Error::NotMember(format!("{g}: linear part is not a holonomy element")))?;
        let t = sub_vec(g.translation_part(), self.reps[rep_index].element.translation_part());
        let lattice_coords = self
            .lattice_coords(&t)?
            .ok_or_else(|| Error::NotMember(format!("{g}: translation is off the lattice")))?;
        Ok(Decomposition { lattice_coords, rep_index })
    }

    pub fn contains(&self, g: &AffineElement) -> bool {
        self.decompose(g).is_ok()
    }

    pub fn reconstruct(&self, d: &Decomposition) -> AffineElement {
        self.lattice_element(&d.lattice_coords).compose(&self.reps[d.rep_index].element)
    }

    pub fn decomposition_word(&self, d: &Decomposition) -> Result<Word> {
        let mut w = self.lattice_word(&d.lattice_coords)?;
        if d.rep_index != 0 {
            w.push((Generator::Holonomy(d.rep_index), 1));
        }
        Ok(w)
    }

    pub fn validate(&self) -> GroupReport {
        let mut violations = Vec::new();
        if !self.reps[0].element.is_identity() {
            violations.push(GroupViolation::IdentityRep);
        }
        for r in &self.reps {
            if r.element.linear_part().det().map_or(true, |d| d.is_zero()) {
                violations.push(GroupViolation::SingularHolonomy { rep: r.name.clone() });
            }
        }
        for i in 0..self.reps.len() {
            for j in i + 1..self.reps.len() {
                if self.reps[i].element.linear_part() == self.reps[j].element.linear_part() {
                    violations.push(GroupViolation::HolonomyClash {
                        first: self.reps[i].name.clone(),
                        second: self.reps[j].name.clone(),
                    });
                }
            }
        }
        if !violations.is_empty() {
            return GroupReport { violations };
        }
        for r in &self.reps {
            let a = r.element.linear_part();
            let a_inv = a.inverse().expect("checked invertible");
            for (j, v) in self.lattice_gens.iter().enumerate() {
                let ok = |m: &RatMatrix| matches!(self.lattice_coords(&m.mul_vec(v)), Ok(Some(_)));
                if !ok(a) || !ok(&a_inv) {
                    violations.push(GroupViolation::NotNormal {
                        rep: r.name.clone(),
                        generator: self.lattice_names[j].clone(),
                    });
                }
            }
        }
        for x in &self.reps {
            for y in &self.reps {
                if self.decompose(&x.element.compose(&y.element)).is_err() {
                    violations.push(GroupViolation::NotClosed { left: x.name.clone(), right: y.name.clone() });
                }
            }
        }
        GroupReport { violations }
    }

    /// A defining set of relations for the extension `Γ → π → π/Γ`:
    /// commutators of lattice generators, the holonomy action on the
    /// lattice, and the cocycle `h_i h_j = t h_k`.
    pub fn relators(&self) -> Result<Vec<Relator>> {
        let mut out = Vec::new();
        let m = self.dim;
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (Generator::Lattice(i), Generator::Lattice(j));
                out.push(Relator {
                    name: format!("[{},{}]", self.lattice_names[i], self.lattice_names[j]),
                    word: vec![(a, 1), (b, 1), (a, -1), (b, -1)],
                });
            }
        }
        for k in 1..self.reps.len() {
            let h = Generator::Holonomy(k);
            let a_h = self.reps[k].element.linear_part();
            for j in 0..m {
                let img = a_h.mul_vec(&self.lattice_gens[j]);
                let coords = self.lattice_coords(&img)?.ok_or_else(|| {
                    Error::InvalidGroup(format!("{} does not preserve the lattice", self.reps[k].name))
                })?;
                let mut word = vec![(h, 1), (Generator::Lattice(j), 1), (h, -1)];
                word.extend(invert_word(&self.lattice_word(&coords)?));
                out.push(Relator {
                    name: format!("{}*{}*{}^-1 = {}", self.reps[k].name, self.lattice_names[j], self.reps[k].name,
                        self.word_to_string(&self.lattice_word(&coords)?)),
                    word,
                });
            }
        }
        for i in 1..self.reps.len() {
            for j in 1..self.reps.len() {
                let prod = self.reps[i].element.compose(&self.reps[j].element);
                let d = self
                    .decompose(&prod)
                    .map_err(|_| Error::InvalidGroup(format!("{}·{} leaves the group", self.reps[i].name, self.reps[j].name)))?;
                let rhs = self.decomposition_word(&d)?;
                let mut word = vec![(Generator::Holonomy(i), 1), (Generator::Holonomy(j), 1)];
                word.extend(invert_word(&rhs));
                out.push(Relator {
                    name: format!("{}*{} = {}", self.reps[i].name, self.reps[j].name, self.word_to_string(&rhs)),
                    word,
                });
            }
        }
        Ok(out)
    }

    pub fn quotient_table(&self) -> Result<QuotientTable> {
        let products = self
            .reps
            .iter()
            .map(|x| {
                self.reps
                    .iter()
                    .map(|y| {
                        self.decompose(&x.element.compose(&y.element)).map_err(|_| {
                            Error::InvalidGroup(format!("{}·{} is not in the group", x.name, y.name))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuotientTable { products })
    }

    /// Returns a copy with each non-identity representative `h_k` replaced
    /// by `t_k · h_k`.
    pub fn with_shifted_reps(&self, shifts: &[IntVec]) -> Result<Self> {
        if shifts.len() != self.reps.len() {
            return Err(Error::Dimension("one shift per representative".into()));
        }
        let lattice = self.lattice_names.iter().cloned().zip(self.lattice_gens.iter().cloned()).collect();
        let reps = self.reps[1..]
            .iter()
            .zip(&shifts[1..])
            .map(|(r, t)| (r.name.clone(), self.lattice_element(t).compose(&r.element)))
            .collect();
        Self::new(self.dim, lattice, reps)
    }
}

pub fn invert_word(w: &[(Generator, i64)]) -> Word {
    w.iter().rev().map(|&(g, e)| (g, -e)).collect()
}
