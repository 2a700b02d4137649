//! Finitely supported elements `x = Σ x̂(g) λ(g)` of the twisted crossed
//! product, with twisted convolution, adjoint and the expectation `E`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::AlgebraElement;
use crate::error::{usage, Result};
use crate::group::GroupElement;
use crate::linalg::{C64, I};
use crate::twist::TwistedSystem;

/// Coefficients with Frobenius norm below this are dropped.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Clone)]
pub struct CrossedElement {
    system: Arc<TwistedSystem>,
    coeffs: BTreeMap<GroupElement, AlgebraElement>,
}

impl fmt::Debug for CrossedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

impl CrossedElement {
    pub fn zero(system: &Arc<TwistedSystem>) -> Self {
        Self {
            system: system.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(system: &Arc<TwistedSystem>) -> Self {
        Self::embed(system, AlgebraElement::one(system.algebra()))
    }

    /// `a·λ(e)`.
    pub fn embed(system: &Arc<TwistedSystem>, a: AlgebraElement) -> Self {
        let e = system.group().identity();
        Self::from_terms(system, [(e, a)]).expect("identity belongs to the group")
    }

    /// `λ(g)`.
    pub fn lambda(system: &Arc<TwistedSystem>, g: impl Into<GroupElement>) -> Result<Self> {
        let one = AlgebraElement::one(system.algebra());
        Self::from_terms(system, [(g.into(), one)])
    }

    /// `Σ a_i λ(g_i)`; repeated group elements are summed.
    pub fn from_terms(
        system: &Arc<TwistedSystem>,
        terms: impl IntoIterator<Item = (GroupElement, AlgebraElement)>,
    ) -> Result<Self> {
        let mut out = Self::zero(system);
        let dims = system.algebra().dims();
        for (g, a) in terms {
            if !system.group().contains(&g) {
                return Err(usage(format!("{g} is not an element of the group")));
            }
            if a.blocks().len() != dims.len()
                || a.blocks().iter().zip(dims).any(|(b, &d)| b.rows() != d)
            {
                return Err(usage("coefficient does not match the algebra"));
            }
            out.accumulate(g, a);
        }
        out.normalize();
        Ok(out)
    }

    fn accumulate(&mut self, g: GroupElement, a: AlgebraElement) {
        match self.coeffs.get_mut(&g) {
            Some(c) => *c = c.add(&a),
            None => {
                self.coeffs.insert(g, a);
            }
        }
    }

    fn normalize(&mut self) {
        self.coeffs.retain(|_, a| a.frobenius() >= DROP_TOL);
    }

    pub fn system(&self) -> &Arc<TwistedSystem> {
        &self.system
    }

    fn same_system(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) {
            Ok(())
        } else {
            Err(usage("elements belong to different twisted systems"))
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &AlgebraElement)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> BTreeSet<GroupElement> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Longest word in the support (0 for finite groups' identity only).
    pub fn max_length(&self) -> usize {
        self.coeffs
            .keys()
            .map(GroupElement::word_length)
            .max()
            .unwrap_or(0)
    }

    /// `x̂(g)`.
    pub fn fourier(&self, g: &GroupElement) -> AlgebraElement {
        self.coeffs
            .get(g)
            .cloned()
            .unwrap_or_else(|| AlgebraElement::zero(self.system.algebra()))
    }

    /// `E(x) = x̂(e)`.
    pub fn expectation(&self) -> AlgebraElement {
        self.fourier(&self.system.group().identity())
    }

    /// `(xy)^(gh) = Σ x̂(g)·α_g(ŷ(h))·σ(g,h)`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_system(other)?;
        let sys = &*self.system;
        let mut out = Self::zero(&self.system);
        for (g, a) in &self.coeffs {
            let alpha = (!sys.has_trivial_action()).then(|| sys.alpha(g));
            for (h, b) in &other.coeffs {
                let moved = match &alpha {
                    Some(al) => al.apply(b),
                    None => b.clone(),
                };
                let c = sys.twist(&a.mul(&moved), g, h);
                out.accumulate(sys.group().mul_unchecked(g, h), c);
            }
        }
        out.normalize();
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_system(other)?;
        let mut out = self.clone();
        for (g, a) in &other.coeffs {
            out.accumulate(g.clone(), a.clone());
        }
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self {
            system: self.system.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(g, a)| (g.clone(), a.scale(c)))
                .collect(),
        };
        out.normalize();
        out
    }

    /// `(aλ(g))* = σ(g⁻¹,g)*·α_{g⁻¹}(a*)·λ(g⁻¹)`.
    pub fn adjoint(&self) -> Self {
        let sys = &*self.system;
        let mut out = Self::zero(&self.system);
        for (g, a) in &self.coeffs {
            let gi = sys.group().inv_unchecked(g);
            let moved = sys.apply_alpha(&gi, &a.adjoint());
            let phases: Vec<C64> = sys.sigma(&gi, g).iter().map(|z| z.conj()).collect();
            out.accumulate(gi, moved.scale_blocks(&phases));
        }
        out.normalize();
        out
    }

    /// `λ(h)·x·λ(h)*`.
    pub fn conjugate(&self, h: &GroupElement) -> Result<Self> {
        let l = Self::lambda(&self.system, h.clone())?;
        l.multiply(self)?.multiply(&l.adjoint())
    }

    /// `(x + x*)/2`.
    pub fn real_part(&self) -> Self {
        self.add(&self.adjoint()).unwrap().scale(C64::new(0.5, 0.0))
    }

    /// `(x − x*)/(2i)`, so that `x = re + i·im`.
    pub fn imag_part(&self) -> Self {
        self.sub(&self.adjoint()).unwrap().scale(-I * 0.5)
    }

    /// Largest coefficient distance (Frobenius) over the union of supports.
    pub fn distance(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&GroupElement> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .map(|g| self.fourier(g).distance(&other.fourier(g)))
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol
    }

    /// `Σ_g ‖x̂(g)‖`, an upper bound for the norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(AlgebraElement::norm).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CoeffAlgebra;
    use crate::group::{FiniteGroup, Group, Word};
    use crate::linalg::{CMatrix, ONE};
    use crate::twist::{builtin_cocycle, Action, TwoCocycle};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free2() -> Arc<TwistedSystem> {
        Arc::new(
            TwistedSystem::new(
                Group::free(2).unwrap(),
                CoeffAlgebra::scalars(),
                Action::Trivial,
                TwoCocycle::Trivial,
            )
            .unwrap(),
        )
    }

    fn w(s: &str) -> GroupElement {
        GroupElement::Free(Word::parse(s).unwrap())
    }

    fn pauli() -> Arc<TwistedSystem> {
        let g = Group::Finite(FiniteGroup::cyclic_product(&[2, 2]).unwrap());
        let c = builtin_cocycle("pauli", &g, None).unwrap();
        Arc::new(TwistedSystem::new(g, CoeffAlgebra::scalars(), Action::Trivial, c).unwrap())
    }

    /// `Z₂` swapping two blocks of `M₂ ⊕ M₂` through a non-trivial conjugator,
    /// with a per-block table cocycle.
    fn twisted_blocks() -> Arc<TwistedSystem> {
        let g = Group::Finite(FiniteGroup::cyclic(4).unwrap());
        let alg = CoeffAlgebra::matrix_blocks(vec![2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = CMatrix::random_unitary(&mut rng, 2);
        // α_1 swaps blocks; α_1⁴ must be the identity: conjugators (u, u*) compose to 1 after two steps.
        let gen = crate::algebra::AlgebraAutomorphism::new(
            &alg,
            vec![1, 0],
            vec![u.clone(), u.adjoint()],
        )
        .unwrap();
        let action = Action::from_finite_generators(&g, &alg, &[(1, gen)]).unwrap();
        Arc::new(TwistedSystem::new(g, alg, action, TwoCocycle::Trivial).unwrap())
    }

    fn random_element(
        sys: &Arc<TwistedSystem>,
        rng: &mut ChaCha8Rng,
        support: &[GroupElement],
    ) -> CrossedElement {
        let terms = support.iter().map(|g| {
            let blocks = sys
                .algebra()
                .dims()
                .iter()
                .map(|&d| CMatrix::random_gaussian(rng, d, d))
                .collect();
            (
                g.clone(),
                AlgebraElement::from_blocks(sys.algebra(), blocks).unwrap(),
            )
        });
        CrossedElement::from_terms(sys, terms).unwrap()
    }

    #[test]
    fn lambda_times_inverse() {
        let sys = pauli();
        for g in 0..4 {
            let x = CrossedElement::lambda(&sys, GroupElement::Finite(g)).unwrap();
            let gi = sys.group().inv(&GroupElement::Finite(g)).unwrap();
            let y = CrossedElement::lambda(&sys, gi.clone()).unwrap();
            let s = sys.sigma_scalar(&GroupElement::Finite(g), &gi).unwrap();
            let expected = CrossedElement::one(&sys).scale(s);
            assert!(x.multiply(&y).unwrap().distance(&expected) < 1e-15);
        }
    }

    #[test]
    fn free_square() {
        let sys = free2();
        let x = CrossedElement::lambda(&sys, w("a"))
            .unwrap()
            .add(&CrossedElement::lambda(&sys, w("a^-1")).unwrap())
            .unwrap();
        let sq = x.multiply(&x).unwrap();
        assert_eq!(sq.num_terms(), 3);
        assert_eq!(sq.fourier(&w("a^2")).blocks()[0][(0, 0)], ONE);
        assert_eq!(sq.fourier(&w("a^-2")).blocks()[0][(0, 0)], ONE);
        assert_eq!(sq.expectation().blocks()[0][(0, 0)], C64::new(2.0, 0.0));
        assert!(x.is_self_adjoint(0.0));
        assert!(x.expectation().is_zero(0.0));
    }

    #[test]
    fn pauli_anticommutation() {
        let sys = pauli();
        let x = CrossedElement::lambda(&sys, GroupElement::Finite(2)).unwrap();
        let y = CrossedElement::lambda(&sys, GroupElement::Finite(1)).unwrap();
        let xy = x.multiply(&y).unwrap();
        let yx = y.multiply(&x).unwrap();
        let l3 = CrossedElement::lambda(&sys, GroupElement::Finite(3)).unwrap();
        assert!(xy.distance(&l3) < 1e-15);
        assert!(yx.distance(&l3.scale(C64::new(-1.0, 0.0))) < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let sys = free2();
        assert!(CrossedElement::lambda(&sys, w("b a"))
            .unwrap()
            .expectation()
            .is_zero(0.0));
        assert!(
            CrossedElement::one(&sys)
                .expectation()
                .distance(&AlgebraElement::one(sys.algebra()))
                == 0.0
        );
        assert!(CrossedElement::lambda(&sys, w("c")).is_err());
    }

    #[test]
    fn mixed_systems_are_rejected() {
        let (s1, s2) = (free2(), free2());
        let x = CrossedElement::one(&s1);
        let y = CrossedElement::one(&s2);
        assert!(x.multiply(&y).is_err());
        assert!(x.add(&y).is_err());
    }

    #[test]
    fn fourier_via_expectation_and_equivariance() {
        for sys in [pauli(), twisted_blocks()] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let all = sys.group().elements().unwrap();
            let x = random_element(&sys, &mut rng, &all);
            for g in &all {
                let l = CrossedElement::lambda(&sys, g.clone()).unwrap();
                let via = x.multiply(&l.adjoint()).unwrap().expectation();
                assert!(via.distance(&x.fourier(g)) < 1e-12);
                let lhs = l
                    .multiply(&x)
                    .unwrap()
                    .multiply(&l.adjoint())
                    .unwrap()
                    .expectation();
                let rhs = sys.alpha(g).apply(&x.expectation());
                assert!(lhs.distance(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn expectation_is_bimodular() {
        let sys = twisted_blocks();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let all = sys.group().elements().unwrap();
        let x = random_element(&sys, &mut rng, &all);
        let e = [sys.group().identity()];
        let a = random_element(&sys, &mut rng, &e);
        let b = random_element(&sys, &mut rng, &e);
        let lhs = a.multiply(&x).unwrap().multiply(&b).unwrap().expectation();
        let rhs = a.expectation().mul(&x.expectation()).mul(&b.expectation());
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn split_of_centred_elements() {
        let sys = pauli();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random_element(
            &sys,
            &mut rng,
            &[GroupElement::Finite(1), GroupElement::Finite(3)],
        );
        let (re, im) = (y.real_part(), y.imag_part());
        assert!(re.is_self_adjoint(1e-14) && im.is_self_adjoint(1e-14));
        assert!(re.expectation().is_zero(1e-14) && im.expectation().is_zero(1e-14));
        assert!(re.add(&im.scale(I)).unwrap().distance(&y) < 1e-14);
    }

    proptest! {
        #[test]
        fn algebraic_laws(seed in any::<u64>(), which in 0usize..3) {
            let sys = match which { 0 => pauli(), 1 => twisted_blocks(), _ => free2() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pool: Vec<GroupElement> = match sys.group().elements() {
                Some(all) => all,
                None => sys.group().ball(2).unwrap(),
            };
            let pick = |rng: &mut ChaCha8Rng| {
                let k = rng.gen_range(1..4);
                (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect::<Vec<_>>()
            };
            let (sx, sy, sz) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let x = random_element(&sys, &mut rng, &sx);
            let y = random_element(&sys, &mut rng, &sy);
            let z = random_element(&sys, &mut rng, &sz);
            let xy = x.multiply(&y).unwrap();
            let lhs = xy.multiply(&z).unwrap();
            let rhs = x.multiply(&y.multiply(&z).unwrap()).unwrap();
            prop_assert!(lhs.distance(&rhs) < 1e-10);
            prop_assert!(x.adjoint().adjoint().distance(&x) < 1e-12);
            prop_assert!(xy.adjoint().distance(&y.adjoint().multiply(&x.adjoint()).unwrap()) < 1e-10);
            let inv: BTreeSet<GroupElement> = x.support().iter().map(|g| sys.group().inv(g).unwrap()).collect();
            prop_assert_eq!(x.adjoint().support(), inv);
            for k in xy.support() {
                prop_assert!(x.support().iter().any(|g| y.support().iter().any(|h| sys.group().mul(g, h).unwrap() == k)));
            }
        }
    }
}
