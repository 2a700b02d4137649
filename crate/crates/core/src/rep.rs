//! The regular covariant representation on `ℓ²(G, H)`, compressed to a
//! finite window `D ⊂ G`:
//!
//! `(π(a)ξ)(h) = α_{h⁻¹}(a) ξ(h)` and `(λ(g)ξ)(h) = σ(h⁻¹,g) ξ(g⁻¹h)`.
//!
//! Basis vectors are `δ_h ⊗ v` ordered by window position, then by the
//! coordinate of `H`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraElement, CoeffAlgebra};
use crate::crossed::CrossedElement;
use crate::error::{usage, Error, Result};
use crate::group::{FiniteGroup, Group, GroupElement, Letter, Word, DEFAULT_BALL_CAP};
use crate::linalg::{gaussian, vec_inner, vec_norm, CMatrix, C64, ZERO};
use crate::twist::{builtin_cocycle, Action, TwistedSystem, TwoCocycle};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

/// How to choose the window `D`.
#[derive(Clone, Debug, PartialEq)]
pub enum WindowSpec {
    /// Word-length ball of radius `R` (all of `G` for finite groups).
    Ball(i64),
    /// Ball of radius `R` in the subgroup generated by the listed free generators.
    SubgroupBall { radius: i64, generators: Vec<u32> },
    /// All of a finite group.
    Full,
    /// `{e}` ∪ the given elements.
    Elements(Vec<GroupElement>),
    /// Start from `{e} ∪ seeds` and `depth` times add `s·w` for `s ∈ steps`.
    Adaptive {
        seeds: Vec<GroupElement>,
        steps: Vec<GroupElement>,
        depth: usize,
    },
}

/// Generators occurring in the support of an element of a free-group system.
pub fn support_generators(x: &CrossedElement) -> Vec<u32> {
    let set: BTreeSet<u32> = x
        .terms()
        .filter_map(|(g, _)| g.as_word())
        .flat_map(|w| w.blocks().iter().map(|b| b.0).collect::<Vec<_>>())
        .collect();
    set.into_iter().collect()
}

fn letter_ball(generators: &[u32], radius: usize, cap: usize) -> Result<Vec<GroupElement>> {
    let letters: Vec<Letter> = generators
        .iter()
        .flat_map(|&g| {
            [false, true].map(|inverse| Letter {
                generator: g,
                inverse,
            })
        })
        .collect();
    let mut out = vec![Word::identity()];
    let mut start = 0;
    for _ in 0..radius {
        let end = out.len();
        for i in start..end {
            for &l in &letters {
                if let Some(w) = out[i].extend_reduced(l) {
                    out.push(w);
                    if out.len() > cap {
                        return Err(Error::Resource {
                            what: "window",
                            needed: out.len(),
                            cap,
                        });
                    }
                }
            }
        }
        start = end;
    }
    Ok(out.into_iter().map(GroupElement::Free).collect())
}

/// Compression of the regular representation to a finite window.
#[derive(Clone, Debug)]
pub struct TruncatedRep {
    system: Arc<TwistedSystem>,
    window: Vec<GroupElement>,
    index: BTreeMap<GroupElement, usize>,
    dim: usize,
    guard: usize,
    exact: bool,
}

impl TruncatedRep {
    pub fn new(system: &Arc<TwistedSystem>, spec: &WindowSpec) -> Result<Self> {
        Self::with_cap(system, spec, DEFAULT_BALL_CAP)
    }

    pub fn with_cap(system: &Arc<TwistedSystem>, spec: &WindowSpec, cap: usize) -> Result<Self> {
        let group = system.group();
        let e = group.identity();
        let mut guard = 0;
        let window: Vec<GroupElement> = match spec {
            WindowSpec::Full => group
                .elements()
                .ok_or_else(|| Error::Unsupported("full window of an infinite group".into()))?,
            WindowSpec::Ball(r) => {
                guard = (*r).max(0) as usize;
                group.ball_with_cap(*r, cap)?
            }
            WindowSpec::SubgroupBall { radius, generators } => match group {
                Group::Finite(_) => group.elements().unwrap(),
                Group::Free { rank } => {
                    if *radius < 0 || generators.iter().any(|g| g >= rank) {
                        return Err(usage("bad subgroup ball"));
                    }
                    guard = *radius as usize;
                    letter_ball(generators, *radius as usize, cap)?
                }
            },
            WindowSpec::Elements(v) => {
                let mut seen = BTreeSet::new();
                core::iter::once(e.clone())
                    .chain(v.iter().cloned())
                    .filter(|g| seen.insert(g.clone()))
                    .collect()
            }
            WindowSpec::Adaptive {
                seeds,
                steps,
                depth,
            } => {
                let mut seen: BTreeSet<GroupElement> = BTreeSet::new();
                let mut out = Vec::new();
                for g in core::iter::once(&e).chain(seeds) {
                    if seen.insert(g.clone()) {
                        out.push(g.clone());
                    }
                }
                let mut frontier = 0;
                for _ in 0..*depth {
                    let end = out.len();
                    for i in frontier..end {
                        for s in steps {
                            let k = group.mul(s, &out[i])?;
                            if seen.insert(k.clone()) {
                                out.push(k);
                                if out.len() > cap {
                                    return Err(Error::Resource {
                                        what: "window",
                                        needed: out.len(),
                                        cap,
                                    });
                                }
                            }
                        }
                    }
                    frontier = end;
                }
                out
            }
        };
        for g in &window {
            if !group.contains(g) {
                return Err(usage("window element outside the group"));
            }
        }
        let index: BTreeMap<GroupElement, usize> = window
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, g)| (g, i))
            .collect();
        let exact = group.as_finite().is_some_and(|t| index.len() == t.order());
        Ok(Self {
            system: system.clone(),
            dim: system.algebra().hilbert_dim(),
            window,
            index,
            guard,
            exact,
        })
    }

    pub fn system(&self) -> &Arc<TwistedSystem> {
        &self.system
    }

    pub fn window(&self) -> &[GroupElement] {
        &self.window
    }

    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    /// `dim H`.
    pub fn fiber_dim(&self) -> usize {
        self.dim
    }

    /// Size of the basis, `|D|·dim H`.
    pub fn size(&self) -> usize {
        self.window.len() * self.dim
    }

    /// Radius of the ball the window was built from (0 otherwise).
    pub fn guard(&self) -> usize {
        self.guard
    }

    /// True when the window is all of a finite group.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Window elements `h` with `g·h ∈ D` for every `g ∈ supp(x)`: on vectors
    /// supported there the compression of `x` acts exactly.
    pub fn exact_columns(&self, x: &CrossedElement) -> Vec<bool> {
        let group = self.system.group();
        self.window
            .iter()
            .map(|h| {
                x.terms()
                    .all(|(g, _)| self.contains(&group.mul_unchecked(g, h)))
            })
            .collect()
    }

    fn check_system(&self, x: &CrossedElement) -> Result<()> {
        if Arc::ptr_eq(&self.system, x.system()) {
            Ok(())
        } else {
            Err(usage("element belongs to a different twisted system"))
        }
    }

    /// `P_D ρ(x) P_D` with `ρ = Σ π(x̂(g))λ(g)`. The block at `(gh, h)` is
    /// `α_{(gh)⁻¹}(x̂(g))·σ((gh)⁻¹, g)`.
    pub fn represent(&self, x: &CrossedElement) -> Result<SparseOperator> {
        self.check_system(x)?;
        let sys = &*self.system;
        let group = sys.group();
        let d = self.dim;
        let mut b = Builder::new(self.size());
        for (j, h) in self.window.iter().enumerate() {
            for (g, a) in x.terms() {
                let k = group.mul_unchecked(g, h);
                let Some(i) = self.position(&k) else {
                    b.compressed = true;
                    continue;
                };
                let ki = group.inv_unchecked(&k);
                let block = sys.twist(&sys.apply_alpha(&ki, a), &ki, g);
                b.add_block(i * d, j * d, &block);
            }
        }
        Ok(b.finish())
    }

    /// `π(a)` on the window.
    pub fn pi(&self, a: &AlgebraElement) -> SparseOperator {
        self.represent(&CrossedElement::embed(&self.system, a.clone()))
            .unwrap()
    }

    /// `λ(g)` on the window.
    pub fn lambda(&self, g: &GroupElement) -> Result<SparseOperator> {
        self.represent(&CrossedElement::lambda(&self.system, g.clone())?)
    }

    /// `M_F` for `F: G → B(H)`, `(M_F ξ)(h) = F(h) ξ(h)`.
    pub fn multiplication(&self, f: impl Fn(&GroupElement) -> CMatrix) -> SparseOperator {
        let d = self.dim;
        let mut b = Builder::new(self.size());
        for (j, h) in self.window.iter().enumerate() {
            let m = f(h);
            for r in 0..d {
                for c in 0..d {
                    b.push(j * d + r, j * d + c, m[(r, c)]);
                }
            }
        }
        b.finish()
    }

    /// Indicator of `S ∩ D` on window positions.
    pub fn mask(&self, member: impl Fn(&GroupElement) -> bool) -> Vec<bool> {
        self.window.iter().map(member).collect()
    }

    /// `P_S ξ` for a window mask.
    pub fn project(&self, mask: &[bool], v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        v.iter()
            .enumerate()
            .map(|(i, &z)| if mask[i / d] { z } else { ZERO })
            .collect()
    }

    pub fn random_vector(&self, rng: &mut impl Rng) -> Vec<C64> {
        (0..self.size())
            .map(|_| C64::new(gaussian(rng), gaussian(rng)))
            .collect()
    }

    /// Lower bound for `‖x‖` from the compression.
    pub fn norm_lower(&self, x: &CrossedElement, opts: &PowerOptions) -> Result<NormEstimate> {
        let op = self.represent(x)?;
        Ok(op.norm_estimate(opts))
    }
}

/// `Σ_g ‖x̂(g)‖ ≥ ‖x‖`.
pub fn norm_upper_l1(x: &CrossedElement) -> f64 {
    x.l1_norm()
}

struct Builder {
    n: usize,
    triplets: Vec<(usize, usize, C64)>,
    compressed: bool,
}

impl Builder {
    fn new(n: usize) -> Self {
        Self {
            n,
            triplets: Vec::new(),
            compressed: false,
        }
    }

    fn push(&mut self, r: usize, c: usize, v: C64) {
        if v != ZERO {
            self.triplets.push((r, c, v));
        }
    }

    fn add_block(&mut self, r0: usize, c0: usize, a: &AlgebraElement) {
        let mut off = 0;
        for blk in a.blocks() {
            for r in 0..blk.rows() {
                for c in 0..blk.cols() {
                    self.push(r0 + off + r, c0 + off + c, blk[(r, c)]);
                }
            }
            off += blk.rows();
        }
    }

    fn finish(mut self) -> SparseOperator {
        self.triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(self.triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(self.triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOperator {
            n: self.n,
            row_ptr,
            cols,
            vals,
            compressed: self.compressed,
        }
    }
}

/// Square sparse matrix (CSR) on the window basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    compressed: bool,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Some translate left the window while building the compression.
    pub fn compressed(&self) -> bool {
        self.compressed
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.vals[k] * v[self.cols[k]])
                    .sum()
            })
            .collect()
    }

    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.n];
        for r in 0..self.n {
            let vr = v[r];
            if vr == ZERO {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.cols[k]] += self.vals[k].conj() * vr;
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    /// Largest singular value by power iteration on `T*T` from a seeded
    /// Gaussian start. The value is `‖Tv‖` for a unit vector `v`, hence a
    /// lower bound for `‖T‖` whether or not the iteration converged.
    pub fn norm_estimate(&self, opts: &PowerOptions) -> NormEstimate {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut v: Vec<C64> = (0..self.n)
            .map(|_| C64::new(gaussian(&mut rng), gaussian(&mut rng)))
            .collect();
        let mut est = NormEstimate {
            value: 0.0,
            iterations: 0,
            converged: false,
            residual: f64::INFINITY,
            compressed: self.compressed,
        };
        let nv = vec_norm(&v);
        if self.n == 0 || self.nnz() == 0 || nv == 0.0 {
            est.converged = true;
            est.residual = 0.0;
            return est;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        for it in 1..=opts.max_iter.max(1) {
            let w = self.apply(&v);
            let u = self.apply_adjoint(&w);
            let rho = vec_inner(&v, &u).re;
            est.iterations = it;
            est.value = est.value.max(rho.max(0.0).sqrt());
            let nu = vec_norm(&u);
            if nu == 0.0 {
                est.converged = true;
                est.residual = 0.0;
                break;
            }
            let res = u
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * rho).norm_sqr())
                .sum::<f64>()
                .sqrt();
            est.residual = res / rho.max(f64::MIN_POSITIVE);
            if est.residual <= opts.tol {
                est.converged = true;
                break;
            }
            // Components that have decayed below 1e-150 are dropped before
            // they become subnormal; the norm of v can only shrink.
            v = u
                .into_iter()
                .map(|z| z / nu)
                .map(|z| if z.norm_sqr() < 1e-300 { ZERO } else { z })
                .collect();
        }
        est
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    /// Stop once `‖T*Tv − ρv‖ ≤ tol·ρ`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormEstimate {
    /// Always a valid lower bound for the norm of the compressed operator,
    /// hence for the norm in the reduced crossed product.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative residual at the last iteration.
    pub residual: f64,
    pub compressed: bool,
}

/// Both sides of `Σ_j ‖P_{g_jD}ζ‖ ≤ √N‖ζ‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

fn translate(
    group: &Group,
    g: &GroupElement,
    set: &BTreeSet<GroupElement>,
) -> BTreeSet<GroupElement> {
    set.iter().map(|d| group.mul_unchecked(g, d)).collect()
}

/// Evaluates the disjoint-translate inequality. Fails if the translates
/// `g_jD` are not pairwise disjoint.
pub fn d_inequality(
    rep: &TruncatedRep,
    d: &BTreeSet<GroupElement>,
    translates: &[GroupElement],
    zeta: &[C64],
) -> Result<InequalityCheck> {
    let group = rep.system().group();
    let mut used = BTreeSet::new();
    let mut lhs = 0.0;
    for g in translates {
        let gd = translate(group, g, d);
        if gd.iter().any(|x| used.contains(x)) {
            return Err(usage("translates are not pairwise disjoint"));
        }
        let mask = rep.mask(|h| gd.contains(h));
        lhs += vec_norm(&rep.project(&mask, zeta));
        used.extend(gd);
    }
    Ok(InequalityCheck {
        lhs,
        rhs: (translates.len() as f64).sqrt() * vec_norm(zeta),
    })
}

/// Data for the estimate
/// `|⟨M_F λ(g)ξ, η⟩| ≤ Σ_j (‖M_Fλ(g)ξ‖‖P_{D_j}η‖ + ‖P_{D_j}ξ‖‖M_F*η‖)`.
#[derive(Clone, Debug)]
pub struct FundInstance {
    pub g: GroupElement,
    pub u: BTreeSet<GroupElement>,
    pub ds: Vec<BTreeSet<GroupElement>>,
    pub f: Vec<CMatrix>,
    pub xi: Vec<C64>,
    pub eta: Vec<C64>,
}

/// Checks the hypotheses `G∖U ⊆ ∪D_j`, `gU ∩ U = ∅` on the window (which must
/// be a whole finite group) and evaluates both sides.
pub fn fund_estimate(rep: &TruncatedRep, inst: &FundInstance) -> Result<InequalityCheck> {
    if !rep.is_exact() {
        return Err(usage("the estimate is checked on whole finite groups"));
    }
    let group = rep.system().group();
    if inst.g == group.identity() {
        return Err(usage("g must differ from e"));
    }
    for h in rep.window() {
        if !inst.u.contains(h) && !inst.ds.iter().any(|d| d.contains(h)) {
            return Err(usage("D_1, ..., D_n do not cover G∖U"));
        }
    }
    if translate(group, &inst.g, &inst.u)
        .iter()
        .any(|x| inst.u.contains(x))
    {
        return Err(usage("gU meets U"));
    }
    let mf = rep.multiplication(|h| inst.f[rep.position(h).unwrap()].clone());
    let lg = rep.lambda(&inst.g)?;
    let v = mf.apply(&lg.apply(&inst.xi));
    let lhs = vec_inner(&inst.eta, &v).norm();
    let mf_eta = vec_norm(&mf.apply_adjoint(&inst.eta));
    let nv = vec_norm(&v);
    let rhs = inst
        .ds
        .iter()
        .map(|d| {
            let mask = rep.mask(|h| d.contains(h));
            nv * vec_norm(&rep.project(&mask, &inst.eta))
                + vec_norm(&rep.project(&mask, &inst.xi)) * mf_eta
        })
        .sum();
    Ok(InequalityCheck { lhs, rhs })
}

/// Small twisted systems used by the randomised lemma suites: cyclic and
/// symmetric groups, matrix coefficients, Pauli-type cocycles and a
/// block-swapping action.
pub fn sample_system(rng: &mut impl Rng) -> Arc<TwistedSystem> {
    let choice = rng.gen_range(0..5);
    let sys = match choice {
        0 => {
            let n = rng.gen_range(2..24);
            let dims = (0..rng.gen_range(1..3))
                .map(|_| rng.gen_range(1..3))
                .collect();
            TwistedSystem::new(
                Group::Finite(FiniteGroup::cyclic(n).unwrap()),
                CoeffAlgebra::matrix_blocks(dims).unwrap(),
                Action::Trivial,
                TwoCocycle::Trivial,
            )
        }
        1 => TwistedSystem::new(
            Group::Finite(FiniteGroup::symmetric(rng.gen_range(3..5)).unwrap()),
            CoeffAlgebra::matrix_blocks(vec![rng.gen_range(1..3)]).unwrap(),
            Action::Trivial,
            TwoCocycle::Trivial,
        ),
        2 => {
            let g = Group::Finite(FiniteGroup::cyclic_product(&[2, 2]).unwrap());
            let c = builtin_cocycle("pauli", &g, None).unwrap();
            TwistedSystem::new(
                g,
                CoeffAlgebra::matrix_blocks(vec![2]).unwrap(),
                Action::Trivial,
                c,
            )
        }
        3 => {
            let g = Group::Finite(FiniteGroup::cyclic_product(&[4, 4]).unwrap());
            let c = builtin_cocycle("bicharacter", &g, Some((vec![vec![0, 1], vec![0, 0]], 4)))
                .unwrap();
            TwistedSystem::new(g, CoeffAlgebra::scalars(), Action::Trivial, c)
        }
        _ => {
            let g = Group::Finite(FiniteGroup::cyclic(2 * rng.gen_range(1..6)).unwrap());
            let alg = CoeffAlgebra::matrix_blocks(vec![2, 2]).unwrap();
            let u = CMatrix::random_unitary(rng, 2);
            let swap = crate::algebra::AlgebraAutomorphism::new(
                &alg,
                vec![1, 0],
                vec![u.clone(), u.adjoint()],
            )
            .unwrap();
            let action = Action::from_finite_generators(&g, &alg, &[(1, swap)]).unwrap();
            TwistedSystem::new(g, alg, action, TwoCocycle::Trivial)
        }
    };
    Arc::new(sys.expect("sample systems are well formed"))
}

fn random_subset(rng: &mut impl Rng, elems: &[GroupElement], p: f64) -> BTreeSet<GroupElement> {
    elems.iter().filter(|_| rng.gen_bool(p)).cloned().collect()
}

/// Random `(rep, D, g_1..g_N, ζ)` with pairwise disjoint translates.
pub fn random_d_inequality(
    rng: &mut impl Rng,
) -> (
    TruncatedRep,
    BTreeSet<GroupElement>,
    Vec<GroupElement>,
    Vec<C64>,
) {
    let sys = sample_system(rng);
    let rep = TruncatedRep::new(&sys, &WindowSpec::Full).unwrap();
    let elems = rep.window().to_vec();
    let group = sys.group();
    let p = rng.gen_range(0.05..0.5);
    let mut d = random_subset(rng, &elems, p);
    if d.is_empty() {
        d.insert(elems[rng.gen_range(0..elems.len())].clone());
    }
    let mut order = elems.clone();
    order.shuffle(rng);
    let mut used = BTreeSet::new();
    let mut gs = Vec::new();
    for g in order {
        let gd = translate(group, &g, &d);
        if gd.iter().all(|x| !used.contains(x)) {
            used.extend(gd);
            gs.push(g);
        }
    }
    // Sometimes make ζ concentrate on the translates, where the bound is tight.
    let mut zeta = rep.random_vector(rng);
    if rng.gen_bool(0.5) {
        let mask = rep.mask(|h| used.contains(h));
        zeta = rep.project(&mask, &zeta);
    }
    (rep, d, gs, zeta)
}

/// Random instance satisfying the hypotheses of [`fund_estimate`].
pub fn random_fund_instance(rng: &mut impl Rng) -> (TruncatedRep, FundInstance) {
    loop {
        let sys = sample_system(rng);
        let rep = TruncatedRep::new(&sys, &WindowSpec::Full).unwrap();
        let elems = rep.window().to_vec();
        let group = sys.group();
        let g = elems[rng.gen_range(0..elems.len())].clone();
        if g == group.identity() {
            continue;
        }
        let gi = group.inv_unchecked(&g);
        let mut order = elems.clone();
        order.shuffle(rng);
        let mut u = BTreeSet::new();
        for h in order {
            if rng.gen_bool(0.7) {
                let (gh, gih) = (group.mul_unchecked(&g, &h), group.mul_unchecked(&gi, &h));
                if gh != h && !u.contains(&gh) && !u.contains(&gih) {
                    u.insert(h);
                }
            }
        }
        let n = rng.gen_range(1..4);
        let mut ds: Vec<BTreeSet<GroupElement>> =
            (0..n).map(|_| random_subset(rng, &elems, 0.1)).collect();
        for h in &elems {
            if !u.contains(h) {
                let j = rng.gen_range(0..n);
                ds[j].insert(h.clone());
            }
        }
        let d = rep.fiber_dim();
        let f = elems
            .iter()
            .map(|_| CMatrix::random_gaussian(rng, d, d))
            .collect();
        let xi = rep.random_vector(rng);
        let eta = rep.random_vector(rng);
        return (
            rep,
            FundInstance {
                g,
                u,
                ds,
                f,
                xi,
                eta,
            },
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use core::f64::consts::PI;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

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

    fn a_plus_inverse(sys: &Arc<TwistedSystem>) -> CrossedElement {
        CrossedElement::lambda(sys, w("a"))
            .unwrap()
            .add(&CrossedElement::lambda(sys, w("a^-1")).unwrap())
            .unwrap()
    }

    #[test]
    fn basis_sizes() {
        let sys = free2();
        assert_eq!(
            TruncatedRep::new(&sys, &WindowSpec::Ball(2))
                .unwrap()
                .size(),
            17
        );
        let g = Group::Finite(FiniteGroup::cyclic(3).unwrap());
        let s = Arc::new(
            TwistedSystem::new(
                g,
                CoeffAlgebra::functions_on_set(4).unwrap(),
                Action::Trivial,
                TwoCocycle::Trivial,
            )
            .unwrap(),
        );
        assert_eq!(TruncatedRep::new(&s, &WindowSpec::Full).unwrap().size(), 12);
        assert!(matches!(
            TruncatedRep::with_cap(&sys, &WindowSpec::Ball(20), 1000),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn identity_and_translation() {
        let sys = free2();
        let rep = TruncatedRep::new(&sys, &WindowSpec::Ball(3)).unwrap();
        let id = rep.represent(&CrossedElement::one(&sys)).unwrap();
        assert!(id.to_dense().distance(&CMatrix::identity(rep.size())) == 0.0);
        assert!(!id.compressed());
        let la = rep.lambda(&w("a")).unwrap();
        assert!(la.compressed());
        let dense = la.to_dense();
        // Partial permutation: every column has at most one 1, boundary columns none.
        for c in 0..rep.size() {
            let col: Vec<C64> = (0..rep.size()).map(|r| dense[(r, c)]).collect();
            let ones = col.iter().filter(|&&z| z == ONE).count();
            let h = &rep.window()[c];
            let inside = rep.contains(&sys.group().mul(&w("a"), h).unwrap());
            assert_eq!(ones, usize::from(inside));
            assert_eq!(col.iter().filter(|&&z| z != ZERO).count(), ones);
        }
    }

    #[test]
    fn path_spectrum_norms() {
        let sys = free2();
        let x = a_plus_inverse(&sys);
        for r in [2i64, 6] {
            let rep = TruncatedRep::new(&sys, &WindowSpec::Ball(r)).unwrap();
            let est = rep.norm_lower(&x, &PowerOptions::default()).unwrap();
            let exact = 2.0 * (PI / (2 * r + 2) as f64).cos();
            assert!(est.converged);
            assert!((est.value - exact).abs() < 1e-7, "{} vs {exact}", est.value);
        }
        assert_eq!(norm_upper_l1(&x), 2.0);
        let sub = TruncatedRep::new(
            &sys,
            &WindowSpec::SubgroupBall {
                radius: 100,
                generators: support_generators(&x),
            },
        )
        .unwrap();
        assert_eq!(sub.size(), 201);
        let est = sub.norm_lower(&x, &PowerOptions::default()).unwrap();
        assert!((est.value - 2.0 * (PI / 202.0).cos()).abs() < 1e-6);
    }

    #[test]
    fn norm_lower_grows_with_nested_windows() {
        let sys = free2();
        let x = ["a", "b", "a^-1", "b^-1"]
            .iter()
            .map(|s| CrossedElement::lambda(&sys, w(s)).unwrap())
            .reduce(|p, q| p.add(&q).unwrap())
            .unwrap();
        let mut last = 0.0;
        for r in 1..6 {
            let rep = TruncatedRep::new(&sys, &WindowSpec::Ball(r)).unwrap();
            let v = rep.norm_lower(&x, &PowerOptions::default()).unwrap().value;
            assert!(v >= last - 1e-9);
            assert!(v <= 2.0 * 3f64.sqrt());
            last = v;
        }
    }

    #[test]
    fn adaptive_window() {
        let sys = free2();
        let y0 = a_plus_inverse(&sys);
        let seeds: Vec<GroupElement> = (1..=8)
            .flat_map(|j| {
                let bj = GroupElement::Free(Word::power(1, j));
                y0.support()
                    .into_iter()
                    .map(move |s| {
                        GroupElement::Free(
                            s.as_word()
                                .unwrap()
                                .conjugate_by(&Word::power(1, -j))
                                .clone(),
                        )
                    })
                    .chain(core::iter::once(bj))
                    .collect::<Vec<_>>()
            })
            .collect();
        let rep = TruncatedRep::new(
            &sys,
            &WindowSpec::Adaptive {
                seeds: seeds.clone(),
                steps: vec![],
                depth: 0,
            },
        )
        .unwrap();
        assert!(rep.window().len() <= 8 * 2 * 3);
        assert!(rep.contains(&sys.group().identity()));
    }

    fn finite_systems() -> Vec<Arc<TwistedSystem>> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        (0..12).map(|_| sample_system(&mut rng)).collect()
    }

    #[test]
    fn finite_models_are_homomorphic_and_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sys in finite_systems() {
            let rep = TruncatedRep::new(&sys, &WindowSpec::Full).unwrap();
            let elems = rep.window().to_vec();
            let rand_elt = |rng: &mut ChaCha8Rng| {
                let terms: Vec<(GroupElement, AlgebraElement)> = (0..3)
                    .map(|_| {
                        let g = elems[rng.gen_range(0..elems.len())].clone();
                        let blocks = sys
                            .algebra()
                            .dims()
                            .iter()
                            .map(|&d| CMatrix::random_gaussian(rng, d, d))
                            .collect();
                        (
                            g,
                            AlgebraElement::from_blocks(sys.algebra(), blocks).unwrap(),
                        )
                    })
                    .collect();
                CrossedElement::from_terms(&sys, terms).unwrap()
            };
            let (x, y) = (rand_elt(&mut rng), rand_elt(&mut rng));
            let rx = rep.represent(&x).unwrap().to_dense();
            let ry = rep.represent(&y).unwrap().to_dense();
            let rxy = rep.represent(&x.multiply(&y).unwrap()).unwrap().to_dense();
            assert!(rxy.distance(&(&rx * &ry)) < 1e-10);
            assert!(
                rep.represent(&x.adjoint())
                    .unwrap()
                    .to_dense()
                    .distance(&rx.adjoint())
                    < 1e-10
            );
            let a = x.terms().next().unwrap().1.clone();
            for g in &elems {
                let l = rep.lambda(g).unwrap().to_dense();
                let lhs = &(&l * &rep.pi(&a).to_dense()) * &l.adjoint();
                assert!(lhs.distance(&rep.pi(&sys.alpha(g).apply(&a)).to_dense()) < 1e-10);
                // λ(g)P_D = P_{gD}λ(g) and the conjugated symbol of M_F.
                let dset = random_subset(&mut rng, &elems, 0.4);
                let gd = translate(sys.group(), g, &dset);
                let d = rep.fiber_dim();
                let proj = |s: &BTreeSet<GroupElement>| {
                    rep.multiplication(|h| {
                        if s.contains(h) {
                            CMatrix::identity(d)
                        } else {
                            CMatrix::zeros(d, d)
                        }
                    })
                    .to_dense()
                };
                assert!((&l * &proj(&dset)).distance(&(&proj(&gd) * &l)) < 1e-12);
                let fvals: Vec<CMatrix> = elems
                    .iter()
                    .map(|_| CMatrix::random_gaussian(&mut rng, d, d))
                    .collect();
                let f = |h: &GroupElement| fvals[rep.position(h).unwrap()].clone();
                let mf = rep.multiplication(f).to_dense();
                let group = sys.group();
                let fg = rep.multiplication(|h| {
                    let hi = group.inv(h).unwrap();
                    let s = AlgebraElement::central(sys.algebra(), &sys.sigma(&hi, g)).to_matrix();
                    let src = group.mul(&group.inv(g).unwrap(), h).unwrap();
                    &(&s * &f(&src)) * &s.adjoint()
                });
                assert!((&(&l * &mf) * &l.adjoint()).distance(&fg.to_dense()) < 1e-10);
            }
        }
    }

    #[test]
    fn free_window_is_exact_in_the_interior() {
        let sys = free2();
        let rep = TruncatedRep::new(&sys, &WindowSpec::Ball(4)).unwrap();
        let x = CrossedElement::lambda(&sys, w("a b"))
            .unwrap()
            .add(&CrossedElement::lambda(&sys, w("b^-1")).unwrap())
            .unwrap();
        let y = CrossedElement::lambda(&sys, w("a^-1")).unwrap();
        let exact_y = rep.exact_columns(&y);
        let exact_x = rep.exact_columns(&x);
        let rx = rep.represent(&x).unwrap();
        let ry = rep.represent(&y).unwrap();
        let rxy = rep.represent(&x.multiply(&y).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut v = rep.random_vector(&mut rng);
        // Keep columns h with y·h and x·y·h inside the window.
        for (j, h) in rep.window().iter().enumerate() {
            let yh = sys.group().mul(&w("a^-1"), h).unwrap();
            let keep = exact_y[j] && rep.position(&yh).is_some_and(|p| exact_x[p]);
            if !keep {
                v[j] = ZERO;
            }
        }
        let lhs = rxy.apply(&v);
        let rhs = rx.apply(&ry.apply(&v));
        assert!(lhs.iter().zip(&rhs).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn hypothesis_violations_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (rep, mut inst) = random_fund_instance(&mut rng);
        inst.ds.clear();
        if inst.u.len() < rep.window().len() {
            assert!(fund_estimate(&rep, &inst).is_err());
        }
        let (rep, d, mut gs, zeta) = random_d_inequality(&mut rng);
        gs.push(gs[0].clone());
        assert!(d_inequality(&rep, &d, &gs, &zeta).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn disjoint_translates(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (rep, d, gs, zeta) = random_d_inequality(&mut rng);
            let c = d_inequality(&rep, &d, &gs, &zeta).unwrap();
            prop_assert!(c.holds(1e-9), "{:?}", c);
        }

        #[test]
        fn fundamental_estimate(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (rep, inst) = random_fund_instance(&mut rng);
            let c = fund_estimate(&rep, &inst).unwrap();
            prop_assert!(c.holds(1e-9), "{:?}", c);
        }
    }
}
