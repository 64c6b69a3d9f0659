//! Rational lattices (discrete subgroups of Q^m) and the integer linear
//! algebra built on them: membership, intersection, affine solving and
//! cokernels.

use num::{One, Signed, Zero};

use super::matrix::{IntMatrix, RatMatrix};
use super::normal_form::{hnf, snf};
use super::rational::{common_denominator, int_to_rat, mod_floor, Int, IntVec, RatVec, Rational};
use crate::error::{Error, Result};

/// A lattice in Q^m, stored by its canonical (Hermite reduced) basis so that
/// equal lattices compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: usize,
    basis: Vec<RatVec>,
}

impl Lattice {
    /// The lattice generated by an arbitrary finite set of vectors.
    pub fn from_generators(dim: usize, gens: &[RatVec]) -> Result<Self> {
        if gens.iter().any(|g| g.len() != dim) {
            return Err(Error::Dimension(format!("generator not of length {dim}")));
        }
        if gens.is_empty() {
            return Ok(Lattice { dim, basis: Vec::new() });
        }
        let den = common_denominator(gens.iter().flatten());
        let den_q = Rational::from_integer(den.clone());
        let m = IntMatrix::from_fn(gens.len(), dim, |i, j| (&gens[i][j] * &den_q).to_integer());
        let h = hnf(&m);
        let basis = (0..h.rank)
            .map(|i| h.h.row(i).iter().map(|x| Rational::new(x.clone(), den.clone())).collect())
            .collect();
        Ok(Lattice { dim, basis })
    }

    /// Like [`Lattice::from_generators`] but insists the vectors are independent.
    pub fn from_basis(dim: usize, basis: &[RatVec]) -> Result<Self> {
        let l = Self::from_generators(dim, basis)?;
        if l.rank() != basis.len() {
            return Err(Error::Precondition("lattice basis vectors are linearly dependent".into()));
        }
        Ok(l)
    }

    /// Z^m.
    pub fn standard(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        Lattice { dim, basis }
    }

    pub fn zero(dim: usize) -> Self {
        Lattice { dim, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn basis(&self) -> &[RatVec] {
        &self.basis
    }

    /// `dim × rank` matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> RatMatrix {
        RatMatrix::from_fn(self.dim, self.rank(), |i, j| self.basis[j][i].clone())
    }

    pub fn scaled(&self, k: &Rational) -> Result<Self> {
        if k.is_zero() {
            return Ok(Self::zero(self.dim));
        }
        let gens: Vec<RatVec> = self.basis.iter().map(|b| b.iter().map(|x| x * k).collect()).collect();
        Self::from_generators(self.dim, &gens)
    }

    /// `A · L`.
    pub fn image(&self, a: &RatMatrix) -> Result<Self> {
        if a.cols() != self.dim {
            return Err(Error::Dimension("map does not act on lattice ambient space".into()));
        }
        let gens: Vec<RatVec> = self.basis.iter().map(|b| a.mul_vec(b)).collect();
        Self::from_generators(a.rows(), &gens)
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let gens: Vec<RatVec> = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::from_generators(self.dim, &gens)
    }

    /// Integer coordinates of `v` in the canonical basis, or `None` if `v ∉ L`.
    pub fn coordinates(&self, v: &[Rational]) -> Result<Option<IntVec>> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!("vector of length {} in dimension {}", v.len(), self.dim)));
        }
        if self.rank() == 0 {
            return Ok(v.iter().all(Zero::is_zero).then(Vec::new));
        }
        let Some(sol) = self.basis_matrix().solve(v)? else {
            return Ok(None);
        };
        debug_assert!(sol.kernel.is_empty());
        Ok(sol.particular.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect())
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        matches!(self.coordinates(v), Ok(Some(_)))
    }

    pub fn contains_lattice(&self, other: &Self) -> bool {
        other.dim == self.dim && other.basis.iter().all(|b| self.contains(b))
    }

    pub fn vector(&self, coords: &[Int]) -> RatVec {
        self.basis_matrix().mul_vec(&int_to_rat(coords))
    }

    /// Dual lattice `{x : x·l ∈ Z for all l ∈ L}` of a full rank lattice.
    pub fn dual(&self) -> Result<Self> {
        self.require_full_rank("dual")?;
        let inv_t = self.basis_matrix().inverse()?.transpose();
        Self::from_generators(self.dim, &inv_t.columns())
    }

    /// `L1 ∩ L2` for full rank lattices, computed as the dual of `L1* + L2*`.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        self.require_full_rank("intersection")?;
        other.require_full_rank("intersection")?;
        self.dual()?.sum(&other.dual()?)?.dual()
    }

    /// `[self : sub]` for a full rank sublattice.
    pub fn index_of(&self, sub: &Self) -> Result<Int> {
        self.check_dim(sub)?;
        self.require_full_rank("index")?;
        sub.require_full_rank("index")?;
        if !self.contains_lattice(sub) {
            return Err(Error::Precondition("index of a non-sublattice".into()));
        }
        let inv = self.basis_matrix().inverse()?;
        let coords = &inv * &sub.basis_matrix();
        Ok(coords.det()?.abs().to_integer())
    }

    /// Coset representatives of `self / sub`, as vectors.
    pub fn coset_representatives(&self, sub: &Self) -> Result<Vec<RatVec>> {
        let cok = cokernel(sub.basis(), &self.basis_matrix())?;
        let reps = cok
            .representatives()
            .ok_or_else(|| Error::Precondition("sublattice of infinite index".into()))?;
        Ok(reps.iter().map(|c| self.vector(c)).collect())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("lattices in dimensions {} and {}", self.dim, other.dim)));
        }
        Ok(())
    }

    fn require_full_rank(&self, what: &str) -> Result<()> {
        if !self.is_full_rank() {
            return Err(Error::Precondition(format!("{what} requires a full rank lattice")));
        }
        Ok(())
    }
}

/// Integer coordinates of `v` with respect to the basis given by the columns
/// of `basis` (any independent set), or `None` if `v` is not in their span
/// over Z.
pub fn lattice_member(basis: &RatMatrix, v: &[Rational]) -> Result<Option<IntVec>> {
    if v.len() != basis.rows() {
        return Err(Error::Dimension(format!("vector of length {} in dimension {}", v.len(), basis.rows())));
    }
    let Some(sol) = basis.solve(v)? else {
        return Ok(None);
    };
    if !sol.kernel.is_empty() {
        return Err(Error::Precondition("basis vectors are linearly dependent".into()));
    }
    Ok(sol.particular.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect())
}

/// Solution set of `A t = b` with `t` restricted to a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AffineLatticeSolution {
    Empty,
    /// `point + lattice`, where `lattice` may have any rank.
    Coset { point: RatVec, lattice: Lattice },
}

impl AffineLatticeSolution {
    pub fn is_empty(&self) -> bool {
        matches!(self, AffineLatticeSolution::Empty)
    }
}

/// All `t ∈ L` with `A t = b`.
pub fn solve_affine_lattice(a: &RatMatrix, b: &[Rational], l: &Lattice) -> Result<AffineLatticeSolution> {
    if a.cols() != l.dim() || a.rows() != b.len() {
        return Err(Error::Dimension("affine lattice system".into()));
    }
    let basis = l.basis_matrix();
    let c = &(a * &basis);
    let (rows, r) = (c.rows(), c.cols());

    // clear denominators row by row
    let mut ci = IntMatrix::zeros(rows, r);
    let mut bi = Vec::with_capacity(rows);
    for i in 0..rows {
        let den = Rational::from_integer(common_denominator(c.row(i).iter().chain(std::iter::once(&b[i]))));
        for j in 0..r {
            ci.set(i, j, (c.get(i, j) * &den).to_integer());
        }
        bi.push((&b[i] * &den).to_integer());
    }

    let s = snf(&ci);
    let ub = s.u.mul_vec(&bi);
    let diag = s.diagonal();
    let mut y = vec![Int::zero(); r];
    for k in 0..rows {
        if k < s.rank {
            let (q, rem) = num::Integer::div_rem(&ub[k], &diag[k]);
            if !rem.is_zero() {
                return Ok(AffineLatticeSolution::Empty);
            }
            y[k] = q;
        } else if !ub[k].is_zero() {
            return Ok(AffineLatticeSolution::Empty);
        }
    }
    let coords = s.v.mul_vec(&y);
    let point = basis.mul_vec(&int_to_rat(&coords));
    let kernel: Vec<RatVec> = (s.rank..r)
        .map(|k| basis.mul_vec(&int_to_rat(&s.v.column(k))))
        .collect();
    Ok(AffineLatticeSolution::Coset { point, lattice: Lattice::from_generators(l.dim(), &kernel)? })
}

/// One invariant factor of a finitely generated abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvariantFactor {
    Finite(Int),
    Infinite,
}

/// The quotient `target / image`, with a normal form for its elements.
///
/// Elements of the target are handled by their integer coordinates in the
/// target basis. If `U · C · V = D` is the Smith form of the image
/// coordinates `C`, then `x ↦ U x` identifies the quotient with
/// `⊕ Z/d_k`, and reducing each coordinate gives the normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CokernelStructure {
    pub invariant_factors: Vec<InvariantFactor>,
    u: IntMatrix,
    u_inv: IntMatrix,
}

/// Cokernel of the map sending the source basis to `images`, inside the
/// lattice whose basis is the columns of `target_basis`.
pub fn cokernel(images: &[RatVec], target_basis: &RatMatrix) -> Result<CokernelStructure> {
    let m = target_basis.rows();
    if target_basis.cols() != m {
        return Err(Error::Precondition("cokernel target must be a full rank basis".into()));
    }
    let inv = target_basis.inverse()?;
    let mut cols = Vec::with_capacity(images.len());
    for img in images {
        if img.len() != m {
            return Err(Error::Dimension("image vector length".into()));
        }
        let c = inv.mul_vec(img);
        let ci = super::rational::rat_to_int(&c)
            .ok_or_else(|| Error::Precondition("image does not lie in the target lattice".into()))?;
        cols.push(ci);
    }
    let c = IntMatrix::from_columns(m, &cols)?;
    let s = snf(&c);
    let diag = s.diagonal();
    let invariant_factors = (0..m)
        .map(|k| if k < s.rank { InvariantFactor::Finite(diag[k].clone()) } else { InvariantFactor::Infinite })
        .collect();
    let u_inv = s.u.unimodular_inverse()?;
    Ok(CokernelStructure { invariant_factors, u: s.u, u_inv })
}

impl CokernelStructure {
    pub fn is_finite(&self) -> bool {
        self.invariant_factors.iter().all(|f| matches!(f, InvariantFactor::Finite(_)))
    }

    /// Number of elements, `None` when infinite.
    pub fn order(&self) -> Option<Int> {
        self.invariant_factors.iter().try_fold(Int::one(), |acc, f| match f {
            InvariantFactor::Finite(d) => Some(acc * d),
            InvariantFactor::Infinite => None,
        })
    }

    /// Normal form (Smith coordinates, reduced into `[0, d_k)`).
    pub fn normal_form(&self, coords: &[Int]) -> IntVec {
        let y = self.u.mul_vec(coords);
        y.iter()
            .zip(&self.invariant_factors)
            .map(|(y, f)| match f {
                InvariantFactor::Finite(d) => mod_floor(y, d),
                InvariantFactor::Infinite => y.clone(),
            })
            .collect()
    }

    /// Target coordinates of the canonical representative of a class.
    pub fn canonical(&self, coords: &[Int]) -> IntVec {
        self.u_inv.mul_vec(&self.normal_form(coords))
    }

    /// Inverse of [`CokernelStructure::normal_form`] on normal forms.
    pub fn canonical_from_normal(&self, nf: &[Int]) -> IntVec {
        self.u_inv.mul_vec(nf)
    }

    pub fn same_class(&self, a: &[Int], b: &[Int]) -> bool {
        self.normal_form(a) == self.normal_form(b)
    }

    /// One canonical representative per class (target coordinates), in
    /// lexicographic order of the Smith box; `None` for infinite quotients.
    pub fn representatives(&self) -> Option<Vec<IntVec>> {
        let bounds: Vec<Int> = self
            .invariant_factors
            .iter()
            .map(|f| match f {
                InvariantFactor::Finite(d) => Some(d.clone()),
                InvariantFactor::Infinite => None,
            })
            .collect::<Option<_>>()?;
        Some(box_points(&bounds).iter().map(|y| self.u_inv.mul_vec(y)).collect())
    }
}

/// All integer points of `∏ [0, b_k)`, lexicographically.
pub fn box_points(bounds: &[Int]) -> Vec<IntVec> {
    let mut out = vec![Vec::new()];
    for b in bounds {
        let mut next = Vec::new();
        for p in &out {
            let mut k = Int::zero();
            while &k < b {
                let mut q = p.clone();
                q.push(k.clone());
                next.push(q);
                k += 1;
            }
        }
        out = next;
    }
    out
}

/// All integer points of `[-b, b]^dim`.
pub fn centered_box(dim: usize, b: &Int) -> Vec<IntVec> {
    let width = Int::from(2) * b + 1;
    box_points(&vec![width; dim])
        .into_iter()
        .map(|p| p.into_iter().map(|x| x - b).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::rational::{ivec, rat, ri, rvec};
    use super::*;

    fn lat(vs: &[&[i64]]) -> Lattice {
        let b: Vec<RatVec> = vs.iter().map(|v| rvec(v)).collect();
        Lattice::from_basis(b[0].len(), &b).unwrap()
    }

    #[test]
    fn membership_examples() {
        let l = lat(&[&[2, 0], &[1, 1]]);
        let c = l.coordinates(&rvec(&[3, 1])).unwrap().unwrap();
        assert_eq!(l.vector(&c), rvec(&[3, 1]));
        assert_eq!(l.coordinates(&rvec(&[1, 0])).unwrap(), None);
        assert_eq!(l.coordinates(&rvec(&[0, 0])).unwrap(), Some(ivec(&[0, 0])));
        assert!(matches!(l.coordinates(&rvec(&[1])), Err(Error::Dimension(_))));
    }

    #[test]
    fn member_with_explicit_basis() {
        let b = RatMatrix::from_columns(2, &[rvec(&[2, 0]), rvec(&[1, 1])]).unwrap();
        assert_eq!(lattice_member(&b, &rvec(&[3, 1])).unwrap(), Some(ivec(&[1, 1])));
        assert_eq!(lattice_member(&b, &rvec(&[1, 0])).unwrap(), None);
        assert_eq!(lattice_member(&b, &rvec(&[0, 0])).unwrap(), Some(ivec(&[0, 0])));
    }

    #[test]
    fn coordinates_in_canonical_basis() {
        // canonical basis of <(2,0),(1,1)> is {(1,1),(0,2)}
        let l = lat(&[&[2, 0], &[1, 1]]);
        assert_eq!(l.basis(), &[rvec(&[1, 1]), rvec(&[0, 2])]);
        assert_eq!(l.coordinates(&rvec(&[3, 1])).unwrap(), Some(ivec(&[3, -1])));
    }

    #[test]
    fn canonical_equality() {
        assert_eq!(lat(&[&[1, 0], &[0, 1]]), lat(&[&[1, 1], &[0, 1]]));
        assert_eq!(lat(&[&[2, 0], &[1, 1]]), lat(&[&[1, 1], &[3, 1]]));
    }

    #[test]
    fn intersection_examples() {
        let two = Lattice::standard(2).scaled(&ri(2)).unwrap();
        let three = Lattice::standard(2).scaled(&ri(3)).unwrap();
        assert_eq!(two.intersect(&three).unwrap(), Lattice::standard(2).scaled(&ri(6)).unwrap());
        assert_eq!(two.intersect(&two).unwrap(), two);
        let a = lat(&[&[1, 0], &[0, 2]]);
        let b = lat(&[&[2, 0], &[0, 1]]);
        assert_eq!(a.intersect(&b).unwrap(), lat(&[&[2, 0], &[0, 2]]));
    }

    #[test]
    fn intersection_rational_lattices() {
        let a = lat(&[&[1, 0], &[0, 1]]);
        let b = Lattice::from_basis(2, &[vec![rat(1, 2), ri(0)], vec![ri(0), rat(3, 2)]]).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), lat(&[&[1, 0], &[0, 3]]));
    }

    #[test]
    fn affine_solve_examples() {
        let z2 = Lattice::standard(2);
        let id = RatMatrix::identity(2);
        match solve_affine_lattice(&id, &rvec(&[1, 0]), &z2).unwrap() {
            AffineLatticeSolution::Coset { point, lattice } => {
                assert_eq!(point, rvec(&[1, 0]));
                assert_eq!(lattice.rank(), 0);
            }
            AffineLatticeSolution::Empty => panic!("expected a point"),
        }
        let zero = RatMatrix::zeros(2, 2);
        assert!(solve_affine_lattice(&zero, &rvec(&[1, 0]), &z2).unwrap().is_empty());

        let a = RatMatrix::diagonal(&[ri(1), ri(0)]);
        let AffineLatticeSolution::Coset { point, lattice } = solve_affine_lattice(&a, &rvec(&[2, 0]), &z2).unwrap()
        else {
            panic!("expected a line");
        };
        assert_eq!(lattice, Lattice::from_generators(2, &[rvec(&[0, 1])]).unwrap());
        for k in -3..=3 {
            let t: RatVec = vec![point[0].clone(), &point[1] + ri(k)];
            assert_eq!(a.mul_vec(&t), rvec(&[2, 0]));
            assert_eq!(t[0], ri(2));
        }
    }

    #[test]
    fn affine_solve_respects_lattice() {
        // t ∈ 2Z with t = 3 has no solution
        let l = Lattice::standard(1).scaled(&ri(2)).unwrap();
        assert!(solve_affine_lattice(&RatMatrix::identity(1), &rvec(&[3]), &l).unwrap().is_empty());
        // (1/2) t = 1 with t ∈ Z: t = 2
        let a = RatMatrix::diagonal(&[rat(1, 2)]);
        let sol = solve_affine_lattice(&a, &rvec(&[1]), &Lattice::standard(1)).unwrap();
        assert!(matches!(sol, AffineLatticeSolution::Coset { ref point, .. } if point == &rvec(&[2])));
    }

    #[test]
    fn cokernel_examples() {
        let z2 = RatMatrix::identity(2);
        let c = cokernel(&[rvec(&[1, 0]), rvec(&[0, 1])], &z2).unwrap();
        assert_eq!(c.order(), Some(Int::one()));

        let c = cokernel(&[rvec(&[-1, 0]), rvec(&[0, -2])], &z2).unwrap();
        assert_eq!(
            c.invariant_factors,
            vec![InvariantFactor::Finite(Int::from(1)), InvariantFactor::Finite(Int::from(2))]
        );
        let reps = c.representatives().unwrap();
        assert_eq!(reps.len(), 2);
        assert!(!c.same_class(&reps[0], &reps[1]));

        let c = cokernel(&[rvec(&[0])], &RatMatrix::identity(1)).unwrap();
        assert_eq!(c.invariant_factors, vec![InvariantFactor::Infinite]);
        assert!(c.representatives().is_none());
        assert_eq!(c.order(), None);
    }

    #[test]
    fn cokernel_normal_form_is_class_invariant() {
        let c = cokernel(&[rvec(&[2, 1]), rvec(&[0, 3])], &RatMatrix::identity(2)).unwrap();
        assert_eq!(c.order(), Some(Int::from(6)));
        let x = ivec(&[1, 1]);
        let y = ivec(&[3, 2]); // x + (2,1)
        assert!(c.same_class(&x, &y));
        assert_eq!(c.canonical(&x), c.canonical(&y));
    }

    #[test]
    fn coset_representatives_count() {
        let z2 = Lattice::standard(2);
        let sub = lat(&[&[2, 0], &[1, 3]]);
        let reps = z2.coset_representatives(&sub).unwrap();
        assert_eq!(reps.len(), 6);
        assert_eq!(z2.index_of(&sub).unwrap(), Int::from(6));
    }
}
