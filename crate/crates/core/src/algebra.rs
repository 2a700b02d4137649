//! The coefficient algebra `A = M_{d_1} ⊕ ... ⊕ M_{d_b}`, its elements,
//! automorphisms, (invariant) ideals and invariant tracial states.
//!
//! `A` acts on `H = C^{d_1} ⊕ ... ⊕ C^{d_b}` block-diagonally; this is the
//! faithful representation used by the regular representation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{usage, Result};
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{CMatrix, C64, ONE, ZERO};

/// Tolerance for unitarity of automorphism conjugators.
pub const UNITARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoeffAlgebra {
    dims: Vec<usize>,
}

impl CoeffAlgebra {
    pub fn matrix_blocks(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(usage(
                "algebra needs at least one block and all block dimensions >= 1",
            ));
        }
        Ok(Self { dims })
    }

    /// `C(X)` for `|X| = size`.
    pub fn functions_on_set(size: usize) -> Result<Self> {
        Self::matrix_blocks(vec![1; size])
    }

    pub fn scalars() -> Self {
        Self { dims: vec![1] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn is_commutative(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }

    /// `Σ d_i²`.
    pub fn dimension(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    /// `Σ d_i`, the dimension of the Hilbert space `A` acts on.
    pub fn hilbert_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Offset of block `i` inside `H`.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.dims
            .iter()
            .map(|d| {
                let o = acc;
                acc += d;
                o
            })
            .collect()
    }

    /// Matrix units `e^{(k)}_{ij}` in block order, row-major within a block.
    pub fn basis(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.dimension());
        for (k, &d) in self.dims.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    out.push(AlgebraElement::matrix_unit(self, k, i, j));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn zero(alg: &CoeffAlgebra) -> Self {
        Self {
            blocks: alg.dims.iter().map(|&d| CMatrix::zeros(d, d)).collect(),
        }
    }

    pub fn one(alg: &CoeffAlgebra) -> Self {
        Self::scalar(alg, ONE)
    }

    pub fn scalar(alg: &CoeffAlgebra, c: C64) -> Self {
        Self {
            blocks: alg
                .dims
                .iter()
                .map(|&d| CMatrix::identity(d).scale(c))
                .collect(),
        }
    }

    /// Central element with value `phases[k]` on block `k`.
    pub fn central(alg: &CoeffAlgebra, phases: &[C64]) -> Self {
        Self {
            blocks: alg
                .dims
                .iter()
                .zip(phases)
                .map(|(&d, &p)| CMatrix::identity(d).scale(p))
                .collect(),
        }
    }

    pub fn matrix_unit(alg: &CoeffAlgebra, block: usize, i: usize, j: usize) -> Self {
        let mut a = Self::zero(alg);
        a.blocks[block][(i, j)] = ONE;
        a
    }

    /// Element of `C(X)` from its values.
    pub fn from_function(alg: &CoeffAlgebra, values: &[C64]) -> Result<Self> {
        if !alg.is_commutative() || values.len() != alg.num_blocks() {
            return Err(usage(
                "function values need a commutative algebra of matching size",
            ));
        }
        Ok(Self::central(alg, values))
    }

    pub fn from_blocks(alg: &CoeffAlgebra, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != alg.num_blocks()
            || blocks
                .iter()
                .zip(&alg.dims)
                .any(|(b, &d)| b.rows() != d || b.cols() != d)
        {
            return Err(usage(
                "coefficient blocks do not match the algebra's block profile",
            ));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.scale(c)).collect(),
        }
    }

    /// Multiplies block `k` by `phases[k]` (product with a central element).
    pub fn scale_blocks(&self, phases: &[C64]) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(phases)
                .map(|(b, &p)| b.scale(p))
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(CMatrix::adjoint).collect(),
        }
    }

    /// C*-norm: the largest block operator norm.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(CMatrix::operator_norm)
            .fold(0.0, f64::max)
    }

    /// Frobenius norm over all blocks (an upper bound for [`Self::norm`]).
    pub fn frobenius(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let f = b.frobenius();
                f * f
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).frobenius()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.frobenius() <= tol
    }

    /// Blocks on which the element is nonzero (Frobenius above `tol`).
    pub fn block_support(&self, tol: f64) -> BTreeSet<usize> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.frobenius() > tol)
            .map(|(k, _)| k)
            .collect()
    }

    /// Block-diagonal matrix on `H`.
    pub fn to_matrix(&self) -> CMatrix {
        let n: usize = self.blocks.iter().map(CMatrix::rows).sum();
        let mut m = CMatrix::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            m.set_block(off, off, b);
            off += b.rows();
        }
        m
    }

    /// Reads the block-diagonal part of a matrix on `H`.
    pub fn from_matrix(alg: &CoeffAlgebra, m: &CMatrix) -> Self {
        let offs = alg.offsets();
        Self {
            blocks: alg
                .dims
                .iter()
                .zip(offs)
                .map(|(&d, o)| m.block(o, o, d, d))
                .collect(),
        }
    }

    /// Frobenius norm of the part of a matrix on `H` lying outside the block diagonal.
    pub fn off_block_residual(alg: &CoeffAlgebra, m: &CMatrix) -> f64 {
        let diag = Self::from_matrix(alg, m).to_matrix();
        m.distance(&diag)
    }
}

/// Ideal of a finite-dimensional C*-algebra: a sum of full matrix blocks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdealDescriptor {
    blocks: BTreeSet<usize>,
    total: usize,
}

impl IdealDescriptor {
    pub fn new(blocks: impl IntoIterator<Item = usize>, total: usize) -> Result<Self> {
        let blocks: BTreeSet<usize> = blocks.into_iter().collect();
        if blocks.iter().any(|&b| b >= total) {
            return Err(usage("ideal block index out of range"));
        }
        Ok(Self { blocks, total })
    }

    pub fn zero(total: usize) -> Self {
        Self {
            blocks: BTreeSet::new(),
            total,
        }
    }

    pub fn whole(total: usize) -> Self {
        Self {
            blocks: (0..total).collect(),
            total,
        }
    }

    pub fn blocks(&self) -> &BTreeSet<usize> {
        &self.blocks
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_proper(&self) -> bool {
        self.blocks.len() != self.total
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn contains_ideal(&self, other: &Self) -> bool {
        other.blocks.is_subset(&self.blocks)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            blocks: self.blocks.intersection(&other.blocks).copied().collect(),
            total: self.total,
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self {
            blocks: self.blocks.union(&other.blocks).copied().collect(),
            total: self.total,
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            blocks: (0..self.total)
                .filter(|b| !self.blocks.contains(b))
                .collect(),
            total: self.total,
        }
    }

    /// Does `a` lie in this ideal (all blocks outside the ideal vanish)?
    pub fn contains_element(&self, a: &AlgebraElement, tol: f64) -> bool {
        a.block_support(tol).is_subset(&self.blocks)
    }

    pub fn is_invariant_under(&self, auto: &AlgebraAutomorphism) -> bool {
        self.blocks
            .iter()
            .all(|&b| self.blocks.contains(&auto.perm[b]))
    }
}

/// `*`-automorphism of `A`: block `i` is carried to block `perm[i]` and
/// conjugated by `unitaries[i]`, i.e. `α(a)_{perm[i]} = u_i a_i u_i*`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraAutomorphism {
    perm: Vec<usize>,
    unitaries: Vec<CMatrix>,
}

impl AlgebraAutomorphism {
    pub fn identity(alg: &CoeffAlgebra) -> Self {
        Self {
            perm: (0..alg.num_blocks()).collect(),
            unitaries: alg.dims.iter().map(|&d| CMatrix::identity(d)).collect(),
        }
    }

    /// Pure block permutation (e.g. a permutation of the points of `X` for `C(X)`).
    pub fn permutation(alg: &CoeffAlgebra, perm: Vec<usize>) -> Result<Self> {
        let unitaries = alg.dims.iter().map(|&d| CMatrix::identity(d)).collect();
        Self::new(alg, perm, unitaries)
    }

    pub fn new(alg: &CoeffAlgebra, perm: Vec<usize>, unitaries: Vec<CMatrix>) -> Result<Self> {
        let b = alg.num_blocks();
        if perm.len() != b || unitaries.len() != b {
            return Err(usage("automorphism size does not match the algebra"));
        }
        let distinct: BTreeSet<usize> = perm.iter().copied().collect();
        if distinct.len() != b || perm.iter().any(|&p| p >= b) {
            return Err(usage("block map is not a permutation"));
        }
        for (i, &p) in perm.iter().enumerate() {
            if alg.dims[i] != alg.dims[p] {
                return Err(usage(format!(
                    "block {i} mapped to block {p} of different dimension"
                )));
            }
            let u = &unitaries[i];
            if u.rows() != alg.dims[i] || !u.is_unitary(UNITARY_TOL) {
                return Err(usage(format!(
                    "conjugator for block {i} is not a unitary of the right size"
                )));
            }
        }
        Ok(Self { perm, unitaries })
    }

    pub fn block_permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn num_blocks(&self) -> usize {
        self.perm.len()
    }

    /// Largest disagreement of the two maps on matrix units (conjugators
    /// differing by a phase give the same automorphism).
    pub fn distance(&self, other: &Self) -> f64 {
        if self.perm != other.perm {
            return f64::INFINITY;
        }
        let alg = CoeffAlgebra {
            dims: self.unitaries.iter().map(CMatrix::rows).collect(),
        };
        alg.basis()
            .iter()
            .map(|a| self.apply(a).distance(&other.apply(a)))
            .fold(0.0, f64::max)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
            && self
                .unitaries
                .iter()
                .all(|u| u.distance(&CMatrix::identity(u.rows())) <= tol)
    }

    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        let mut blocks: Vec<CMatrix> = a.blocks.clone();
        for (i, &p) in self.perm.iter().enumerate() {
            let u = &self.unitaries[i];
            blocks[p] = &(u * &a.blocks[i]) * &u.adjoint();
        }
        AlgebraElement { blocks }
    }

    /// Image of the central element with block values `phases`.
    pub fn apply_central(&self, phases: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; phases.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = phases[i];
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let perm = other.perm.iter().map(|&j| self.perm[j]).collect();
        let unitaries = other
            .perm
            .iter()
            .zip(&other.unitaries)
            .map(|(&j, u)| &self.unitaries[j] * u)
            .collect();
        Self { perm, unitaries }
    }

    pub fn inverse(&self) -> Self {
        let b = self.perm.len();
        let mut perm = vec![0; b];
        let mut unitaries = vec![CMatrix::zeros(0, 0); b];
        for (i, &p) in self.perm.iter().enumerate() {
            perm[p] = i;
            unitaries[p] = self.unitaries[i].adjoint();
        }
        Self { perm, unitaries }
    }
}

/// Orbits of the block permutations generated by `autos`, ordered by smallest member.
pub fn block_orbits(alg: &CoeffAlgebra, autos: &[AlgebraAutomorphism]) -> Vec<Vec<usize>> {
    let b = alg.num_blocks();
    let mut seen = vec![false; b];
    let mut out = Vec::new();
    for start in 0..b {
        if seen[start] {
            continue;
        }
        let mut orbit = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            if orbit.insert(x) {
                seen[x] = true;
                for a in autos {
                    stack.push(a.perm[x]);
                    // Orbits of a group; inverses are covered by finiteness.
                }
            }
        }
        out.push(orbit.into_iter().collect());
    }
    out
}

/// Lattice of invariant ideals with its Hasse diagram.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdealLattice {
    pub ideals: Vec<IdealDescriptor>,
    /// `(i, j)`: `ideals[i]` is covered by `ideals[j]`.
    pub covers: Vec<(usize, usize)>,
}

/// Largest number of block orbits for which the lattice is enumerated.
pub const MAX_LATTICE_ORBITS: usize = 20;

/// All ideals `J` with `α_g(J) ⊆ J` for every automorphism in `autos`
/// (unions of block orbits), sorted by size then lexicographically.
pub fn invariant_ideals(alg: &CoeffAlgebra, autos: &[AlgebraAutomorphism]) -> Result<IdealLattice> {
    let orbits = block_orbits(alg, autos);
    if orbits.len() > MAX_LATTICE_ORBITS {
        return Err(crate::Error::Resource {
            what: "invariant ideal lattice orbits",
            needed: orbits.len(),
            cap: MAX_LATTICE_ORBITS,
        });
    }
    let b = alg.num_blocks();
    let mut ideals: Vec<IdealDescriptor> = (0u32..(1u32 << orbits.len()))
        .map(|mask| IdealDescriptor {
            blocks: orbits
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .flat_map(|(_, o)| o.iter().copied())
                .collect(),
            total: b,
        })
        .collect();
    ideals.sort_by(|x, y| x.blocks.len().cmp(&y.blocks.len()).then_with(|| x.cmp(y)));
    let mut covers = Vec::new();
    for (i, x) in ideals.iter().enumerate() {
        for (j, y) in ideals.iter().enumerate() {
            if i != j && y.contains_ideal(x) && x != y {
                let between = ideals
                    .iter()
                    .any(|z| z != x && z != y && z.contains_ideal(x) && y.contains_ideal(z));
                if !between {
                    covers.push((i, j));
                }
            }
        }
    }
    Ok(IdealLattice { ideals, covers })
}

/// Maximal proper invariant ideals: complements of single block orbits.
pub fn maximal_invariant_ideals(
    alg: &CoeffAlgebra,
    autos: &[AlgebraAutomorphism],
) -> Vec<IdealDescriptor> {
    let b = alg.num_blocks();
    block_orbits(alg, autos)
        .into_iter()
        .map(|o| IdealDescriptor {
            blocks: (0..b).filter(|x| !o.contains(x)).collect(),
            total: b,
        })
        .collect()
}

/// Tracial state `a ↦ Σ_k w_k tr(a_k)/d_k` given by block weights.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceWeights {
    pub weights: Vec<f64>,
}

impl TraceWeights {
    pub fn evaluate(&self, a: &AlgebraElement) -> C64 {
        self.weights
            .iter()
            .zip(&a.blocks)
            .map(|(&w, b)| b.trace() * (w / b.rows() as f64))
            .sum()
    }
}

/// Extreme invariant tracial states: uniform weights on each block orbit.
pub fn invariant_traces(alg: &CoeffAlgebra, autos: &[AlgebraAutomorphism]) -> Vec<TraceWeights> {
    let b = alg.num_blocks();
    block_orbits(alg, autos)
        .into_iter()
        .map(|o| {
            let mut weights = vec![0.0; b];
            for &x in &o {
                weights[x] = 1.0 / o.len() as f64;
            }
            TraceWeights { weights }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn perm(alg: &CoeffAlgebra, p: &[usize]) -> AlgebraAutomorphism {
        AlgebraAutomorphism::permutation(alg, p.to_vec()).unwrap()
    }

    #[test]
    fn invariant_ideal_counts() {
        let c2 = CoeffAlgebra::functions_on_set(2).unwrap();
        let lat = invariant_ideals(&c2, &[perm(&c2, &[1, 0])]).unwrap();
        assert_eq!(lat.ideals.len(), 2);
        assert!(lat.ideals[0].is_zero());
        assert!(!lat.ideals[1].is_proper());

        let c3 = CoeffAlgebra::functions_on_set(3).unwrap();
        assert_eq!(invariant_ideals(&c3, &[]).unwrap().ideals.len(), 8);

        let c4 = CoeffAlgebra::functions_on_set(4).unwrap();
        let lat = invariant_ideals(&c4, &[perm(&c4, &[1, 0, 3, 2])]).unwrap();
        assert_eq!(lat.ideals.len(), 4);
        // Hasse diagram of a 2-element Boolean lattice: 4 covering edges.
        assert_eq!(lat.covers.len(), 4);
    }

    #[test]
    fn lattice_is_closed_under_meet_and_join() {
        let c5 = CoeffAlgebra::functions_on_set(5).unwrap();
        let lat = invariant_ideals(&c5, &[perm(&c5, &[1, 0, 2, 4, 3])]).unwrap();
        for x in &lat.ideals {
            for y in &lat.ideals {
                assert!(lat.ideals.contains(&x.intersection(y)));
                assert!(lat.ideals.contains(&x.sum(y)));
            }
        }
    }

    #[test]
    fn maximal_invariant_ideal_examples() {
        let c2 = CoeffAlgebra::functions_on_set(2).unwrap();
        let m = maximal_invariant_ideals(&c2, &[perm(&c2, &[1, 0])]);
        assert_eq!(m, [IdealDescriptor::zero(2)]);

        let c4 = CoeffAlgebra::functions_on_set(4).unwrap();
        let autos = [perm(&c4, &[1, 0, 3, 2])];
        let m = maximal_invariant_ideals(&c4, &autos);
        assert_eq!(m.len(), 2);
        let lat = invariant_ideals(&c4, &autos).unwrap();
        for j in &m {
            assert!(j.is_proper());
            assert!(j.is_invariant_under(&autos[0]));
            let above = lat
                .ideals
                .iter()
                .filter(|k| k.contains_ideal(j) && *k != j && k.is_proper())
                .count();
            assert_eq!(above, 0);
        }

        let m2m2 = CoeffAlgebra::matrix_blocks(vec![2, 2]).unwrap();
        let m = maximal_invariant_ideals(&m2m2, &[perm(&m2m2, &[1, 0])]);
        assert_eq!(m, [IdealDescriptor::zero(2)]);
    }

    #[test]
    fn invariant_trace_examples() {
        let c2 = CoeffAlgebra::functions_on_set(2).unwrap();
        let t = invariant_traces(&c2, &[perm(&c2, &[1, 0])]);
        assert_eq!(
            t,
            [TraceWeights {
                weights: vec![0.5, 0.5]
            }]
        );
        let t = invariant_traces(&c2, &[]);
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].weights, [1.0, 0.0]);
        assert_eq!(t[1].weights, [0.0, 1.0]);

        let c4 = CoeffAlgebra::functions_on_set(4).unwrap();
        let autos = [perm(&c4, &[1, 0, 3, 2])];
        let t = invariant_traces(&c4, &autos);
        assert_eq!(t.len(), 2);
        for phi in &t {
            for a in c4.basis() {
                let diff = phi.evaluate(&autos[0].apply(&a)) - phi.evaluate(&a);
                assert!(diff.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn automorphism_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alg = CoeffAlgebra::matrix_blocks(vec![2, 1, 2]).unwrap();
        let u0 = CMatrix::random_unitary(&mut rng, 2);
        let u2 = CMatrix::random_unitary(&mut rng, 2);
        let f = AlgebraAutomorphism::new(&alg, vec![2, 1, 0], vec![u0, CMatrix::identity(1), u2])
            .unwrap();
        let g = AlgebraAutomorphism::new(
            &alg,
            vec![0, 1, 2],
            vec![
                CMatrix::random_unitary(&mut rng, 2),
                CMatrix::identity(1),
                CMatrix::identity(2),
            ],
        )
        .unwrap();
        for a in alg.basis() {
            let lhs = f.compose(&g).apply(&a);
            let rhs = f.apply(&g.apply(&a));
            assert!(lhs.distance(&rhs) < 1e-12);
            assert!(f.inverse().apply(&f.apply(&a)).distance(&a) < 1e-12);
            // *-homomorphism on products.
            let b = alg.basis()[1].clone();
            assert!(f.apply(&a.mul(&b)).distance(&f.apply(&a).mul(&f.apply(&b))) < 1e-12);
        }
        assert!(f.compose(&f.inverse()).is_identity(1e-12));
        assert!(AlgebraAutomorphism::permutation(&alg, vec![1, 0, 2]).is_err());
    }

    #[test]
    fn element_norms() {
        let alg = CoeffAlgebra::matrix_blocks(vec![1, 2]).unwrap();
        let a = AlgebraElement::from_blocks(
            &alg,
            vec![
                CMatrix::scalar(C64::new(0.5, 0.0)),
                CMatrix::from_rows(&[vec![ZERO, C64::new(3.0, 0.0)], vec![ZERO, ZERO]]),
            ],
        )
        .unwrap();
        assert!((a.norm() - 3.0).abs() < 1e-12);
        assert_eq!(a.block_support(1e-14), [0, 1].into_iter().collect());
        assert!(AlgebraElement::from_blocks(&alg, vec![CMatrix::scalar(ONE)]).is_err());
    }
}
