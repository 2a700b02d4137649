//! Finite-dimensional models of `C*_r(Σ)` for finite `G`: basis closure,
//! block decomposition from the centre, ideals, traces and the orbit
//! decomposition for `A = C(X)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    block_orbits, invariant_traces, maximal_invariant_ideals, AlgebraAutomorphism, AlgebraElement,
    CoeffAlgebra, IdealDescriptor, TraceWeights,
};
use crate::crossed::CrossedElement;
use crate::error::{usage, Error, Result};
use crate::group::{Group, GroupElement};
use crate::linalg::{gaussian, hermitian_eigen, CMatrix, Span, C64};
use crate::rep::{TruncatedRep, WindowSpec};
use crate::twist::{Action, TwistedSystem, TwoCocycle};

/// Largest ambient dimension `|G|·dim H` for a model.
pub const MODEL_DIM_CAP: usize = 4096;
pub const CLOSURE_TOL: f64 = 1e-10;
pub const GAP_TOL: f64 = 1e-6;
pub const SIMPLE_TOL: f64 = 1e-8;
pub const TRACE_TOL: f64 = 1e-9;
pub const DECOMPOSITION_SEED: u64 = 42;
const DECOMPOSITION_ATTEMPTS: u64 = 5;

fn vectorize(m: &CMatrix) -> &[C64] {
    m.as_slice()
}

fn unvectorize(n: usize, v: &[C64]) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| v[r * n + c])
}

/// `C*_r(Σ)` realised on `ℓ²(G, H)`.
pub struct MatrixModel {
    rep: TruncatedRep,
    ambient: usize,
    generators: Vec<CMatrix>,
    basis: Vec<CMatrix>,
    span: Span,
}

impl MatrixModel {
    pub fn new(system: &Arc<TwistedSystem>) -> Result<Self> {
        Self::with_cap(system, MODEL_DIM_CAP)
    }

    /// Generated by `π(e_ij)` for the matrix units of `A` and all `λ(g)`;
    /// the basis is the closure under left multiplication by generators.
    pub fn with_cap(system: &Arc<TwistedSystem>, cap: usize) -> Result<Self> {
        let group = system.group();
        let order = group
            .as_finite()
            .ok_or_else(|| Error::Unsupported("matrix models need a finite group".into()))?
            .order();
        let ambient = order * system.algebra().hilbert_dim();
        if ambient > cap {
            return Err(Error::Resource {
                what: "model ambient dimension",
                needed: ambient,
                cap,
            });
        }
        let rep = TruncatedRep::new(system, &WindowSpec::Full)?;
        let mut generators: Vec<CMatrix> = system
            .algebra()
            .basis()
            .iter()
            .map(|a| rep.pi(a).to_dense())
            .collect();
        for g in group.elements().unwrap() {
            generators.push(rep.lambda(&g)?.to_dense());
        }
        let mut span = Span::new(ambient * ambient, CLOSURE_TOL);
        let mut basis = Vec::new();
        let mut frontier = Vec::new();
        for g in &generators {
            if span.insert(vectorize(g)) {
                frontier.push(g.clone());
            }
        }
        while let Some(b) = frontier.pop() {
            basis.push(b.clone());
            for s in &generators {
                let p = s * &b;
                if span.insert(vectorize(&p)) {
                    frontier.push(p);
                }
            }
        }
        Ok(Self {
            rep,
            ambient,
            generators,
            basis,
            span,
        })
    }

    pub fn system(&self) -> &Arc<TwistedSystem> {
        self.rep.system()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Spanning products found by the closure (linearly independent).
    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Orthonormal basis (trace inner product).
    pub fn orthonormal_basis(&self) -> Vec<CMatrix> {
        self.span
            .basis()
            .iter()
            .map(|v| unvectorize(self.ambient, v))
            .collect()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn contains(&self, m: &CMatrix) -> bool {
        self.span.contains(vectorize(m))
    }

    pub fn element(&self, x: &CrossedElement) -> Result<CMatrix> {
        Ok(self.rep.represent(x)?.to_dense())
    }

    pub fn pi(&self, a: &AlgebraElement) -> CMatrix {
        self.rep.pi(a).to_dense()
    }

    /// `x̂(g)` read off the column of `e`: the block at `(g, e)` is
    /// `α_{g⁻¹}(x̂(g))·σ(g⁻¹, g)`.
    pub fn fourier(&self, m: &CMatrix, g: &GroupElement) -> AlgebraElement {
        let sys = self.system();
        let group = sys.group();
        let d = sys.algebra().hilbert_dim();
        let e = group.identity();
        let r = self.rep.position(g).unwrap() * d;
        let c = self.rep.position(&e).unwrap() * d;
        let block = AlgebraElement::from_matrix(sys.algebra(), &m.block(r, c, d, d));
        let gi = group.inv(g).unwrap();
        let phases: Vec<C64> = sys.sigma(&gi, g).iter().map(|z| z.conj()).collect();
        sys.apply_alpha(g, &block.scale_blocks(&phases))
    }

    pub fn to_crossed(&self, m: &CMatrix) -> Result<CrossedElement> {
        let g = self.system().group();
        let terms: Vec<_> = g
            .elements()
            .unwrap()
            .into_iter()
            .map(|h| {
                let a = self.fourier(m, &h);
                (h, a)
            })
            .collect();
        CrossedElement::from_terms(self.system(), terms)
    }

    /// `E(m) = π(m̂(e))`.
    pub fn expectation(&self, m: &CMatrix) -> CMatrix {
        self.pi(&self.fourier(m, &self.system().group().identity()))
    }

    /// Smallest eigenvalue of the Gram matrix `tr E(b_i* b_j)`; positive iff
    /// `E` is faithful on the model.
    pub fn faithfulness_margin(&self) -> f64 {
        let ob = self.orthonormal_basis();
        let n = ob.len();
        let gram = CMatrix::from_fn(n, n, |i, j| {
            self.expectation(&(&ob[i].adjoint() * &ob[j])).trace()
        });
        let (vals, _) = hermitian_eigen(&gram);
        vals.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// One simple summand `M_d` appearing with multiplicity `m` on the ambient
/// space.
#[derive(Clone, Debug)]
pub struct SimpleBlock {
    pub dim: usize,
    pub multiplicity: usize,
    /// Minimal central projection.
    pub projection: CMatrix,
    /// Isometry onto the range of the projection.
    pub isometry: CMatrix,
}

#[derive(Clone, Debug)]
pub struct BlockStructure {
    pub blocks: Vec<SimpleBlock>,
    pub center_dim: usize,
}

impl BlockStructure {
    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn algebra_dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Blocks on which some element of `ms` is nonzero.
    pub fn support(&self, ms: &[CMatrix]) -> BTreeSet<usize> {
        (0..self.blocks.len())
            .filter(|&k| {
                ms.iter()
                    .any(|m| (&self.blocks[k].projection * m).max_abs() > SIMPLE_TOL)
            })
            .collect()
    }

    /// Central projection of a block set.
    pub fn projection(&self, set: &BTreeSet<usize>) -> CMatrix {
        let n = self.blocks.first().map_or(0, |b| b.projection.rows());
        set.iter().fold(CMatrix::zeros(n, n), |acc, &k| {
            &acc + &self.blocks[k].projection
        })
    }

    pub fn ideal_dimension(&self, set: &BTreeSet<usize>) -> usize {
        set.iter()
            .map(|&k| self.blocks[k].dim * self.blocks[k].dim)
            .sum()
    }
}

fn span_dim(ms: impl IntoIterator<Item = CMatrix>, len: usize) -> usize {
    let mut s = Span::new(len, CLOSURE_TOL);
    for m in ms {
        s.insert(vectorize(&m));
    }
    s.dim()
}

/// Centre of the model (orthonormal basis of central elements).
pub fn center(model: &MatrixModel) -> Vec<CMatrix> {
    let ob = model.orthonormal_basis();
    let n = ob.len();
    let comm: Vec<Vec<CMatrix>> = ob
        .iter()
        .map(|b| {
            model
                .generators()
                .iter()
                .map(|s| &(b * s) - &(s * b))
                .collect()
        })
        .collect();
    let gram = CMatrix::from_fn(n, n, |i, j| {
        comm[i]
            .iter()
            .zip(&comm[j])
            .map(|(x, y)| x.hs_inner(y))
            .sum()
    });
    let (vals, vecs) = hermitian_eigen(&gram);
    let top = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    (0..n)
        .filter(|&k| vals[k].abs() <= 1e-9 * top)
        .map(|k| {
            (0..n).fold(
                CMatrix::zeros(model.ambient(), model.ambient()),
                |acc, i| &acc + &ob[i].scale(vecs[(i, k)]),
            )
        })
        .collect()
}

/// Minimal central projections from the spectrum of a random self-adjoint
/// central element; each block is checked simple.
pub fn block_decompose(model: &MatrixModel) -> Result<BlockStructure> {
    let z = center(model);
    let n = model.ambient();
    for attempt in 0..DECOMPOSITION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(DECOMPOSITION_SEED + attempt);
        let mut h = CMatrix::zeros(n, n);
        for c in &z {
            let sa = &(c + &c.adjoint()).scale(C64::new(0.5, 0.0));
            let ia = &(c - &c.adjoint()).scale(C64::new(0.0, -0.5));
            h = &h
                + &(&sa.scale(C64::new(gaussian(&mut rng), 0.0))
                    + &ia.scale(C64::new(gaussian(&mut rng), 0.0)));
        }
        let (vals, vecs) = hermitian_eigen(&h);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        // Gaps above GAP_TOL split clusters; gaps between 1e-9 and GAP_TOL are ambiguous.
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut ambiguous = false;
        for (pos, &k) in order.iter().enumerate() {
            let gap = if pos == 0 {
                f64::INFINITY
            } else {
                vals[k] - vals[order[pos - 1]]
            };
            if gap > GAP_TOL {
                clusters.push(vec![k]);
            } else {
                ambiguous |= gap > 1e-9;
                clusters.last_mut().unwrap().push(k);
            }
        }
        if ambiguous || clusters.len() != z.len() {
            continue;
        }
        let mut blocks = Vec::with_capacity(clusters.len());
        for cl in &clusters {
            let v = CMatrix::from_fn(n, cl.len(), |r, c| vecs[(r, cl[c])]);
            let p = &v * &v.adjoint();
            let d2 = span_dim(model.basis().iter().map(|b| &p * b), n * n);
            let d = (d2 as f64).sqrt().round() as usize;
            if d * d != d2 || d == 0 || cl.len() % d != 0 {
                return Err(Error::Indeterminate(format!(
                    "block of dimension {d2} is not a full matrix algebra"
                )));
            }
            if span_dim(z.iter().map(|c| &p * c), n * n) != 1 {
                return Err(Error::Indeterminate(
                    "block centre is not one-dimensional".into(),
                ));
            }
            blocks.push(SimpleBlock {
                dim: d,
                multiplicity: cl.len() / d,
                projection: p,
                isometry: v,
            });
        }
        let bs = BlockStructure {
            blocks,
            center_dim: z.len(),
        };
        if bs.algebra_dimension() != model.dimension() {
            return Err(Error::Indeterminate(format!(
                "block dimensions sum to {} but the model has dimension {}",
                bs.algebra_dimension(),
                model.dimension()
            )));
        }
        return Ok(bs);
    }
    Err(Error::Indeterminate(
        "central spectrum gap below threshold after retries".into(),
    ))
}

fn automorphisms(sys: &TwistedSystem) -> Vec<AlgebraAutomorphism> {
    sys.group()
        .elements()
        .unwrap_or_default()
        .iter()
        .map(|g| sys.alpha(g))
        .collect()
}

fn embedded_ideal(model: &MatrixModel, j: &IdealDescriptor) -> Vec<CMatrix> {
    let alg = model.system().algebra();
    let dims = alg.dims();
    let mut out = Vec::new();
    for &k in j.blocks() {
        for r in 0..dims[k] {
            for c in 0..dims[k] {
                out.push(model.pi(&AlgebraElement::matrix_unit(alg, k, r, c)));
            }
        }
    }
    out
}

/// Two-sided ideal generated by `ms`: closure under left and right
/// multiplication by the generators.
fn saturate(model: &MatrixModel, ms: Vec<CMatrix>) -> Vec<CMatrix> {
    let n = model.ambient();
    let mut span = Span::new(n * n, CLOSURE_TOL);
    let mut frontier: Vec<CMatrix> = ms
        .into_iter()
        .filter(|m| span.insert(vectorize(m)))
        .collect();
    let mut out = Vec::new();
    while let Some(b) = frontier.pop() {
        for s in model.generators() {
            for p in [s * &b, &b * s] {
                if span.insert(vectorize(&p)) {
                    frontier.push(p);
                }
            }
        }
        out.push(b);
    }
    out
}

/// `⟨J⟩` and `J̃` as sets of model blocks.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdealPair {
    pub generated: BTreeSet<usize>,
    pub tilde: BTreeSet<usize>,
    pub equal: bool,
    /// `E(⟨J⟩) = J`.
    pub expectation_recovers: bool,
    /// `⟨J⟩ ⊆ J̃`.
    pub contained: bool,
}

pub fn ideal_pair(
    model: &MatrixModel,
    blocks: &BlockStructure,
    j: &IdealDescriptor,
) -> Result<IdealPair> {
    let sys = model.system();
    let alg = sys.algebra();
    if j.total() != alg.num_blocks() {
        return Err(usage("ideal does not match the coefficient algebra"));
    }
    if let Some(a) = automorphisms(sys).iter().find(|a| !j.is_invariant_under(a)) {
        return Err(usage(format!(
            "ideal is not invariant (block permutation {:?})",
            a.block_permutation()
        )));
    }
    let gen_basis = saturate(model, embedded_ideal(model, j));
    let generated = blocks.support(&gen_basis);
    if gen_basis.len() != blocks.ideal_dimension(&generated) {
        return Err(Error::Indeterminate(
            "saturated ideal is not a sum of blocks".into(),
        ));
    }
    let group = sys.group();
    let mut tilde_basis = Vec::new();
    for g in group.elements().unwrap() {
        let l = model.element(&CrossedElement::lambda(sys, g)?)?;
        for m in embedded_ideal(model, j) {
            tilde_basis.push(&m * &l);
        }
    }
    let tilde = blocks.support(&tilde_basis);
    let e = group.identity();
    let mut recovered = BTreeSet::new();
    let mut contained = true;
    for b in &gen_basis {
        recovered.extend(model.fourier(b, &e).block_support(SIMPLE_TOL));
        for g in group.elements().unwrap() {
            if !model
                .fourier(b, &g)
                .block_support(SIMPLE_TOL)
                .is_subset(j.blocks())
            {
                contained = false;
            }
        }
    }
    Ok(IdealPair {
        equal: generated == tilde,
        expectation_recovers: &recovered == j.blocks(),
        contained: contained && generated.is_subset(&tilde),
        generated,
        tilde,
    })
}

/// `J ↦ ⟨J⟩` from maximal invariant ideals of `A` to maximal ideals of the model.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BijectionReport {
    pub invariant_maximal: Vec<BTreeSet<usize>>,
    pub model_blocks: usize,
    pub images: Vec<BTreeSet<usize>>,
    /// Number of `J` whose image is a maximal ideal.
    pub matched: usize,
    pub injective: bool,
    pub surjective: bool,
    pub bijection: bool,
    pub explanation: Option<String>,
}

pub const ABSENT_HYPOTHESIS: &str = "hypothesis (DP)/class 𝒫 absent";

pub fn bijection_report(model: &MatrixModel, blocks: &BlockStructure) -> Result<BijectionReport> {
    let sys = model.system();
    let mi = maximal_invariant_ideals(sys.algebra(), &automorphisms(sys));
    let all: BTreeSet<usize> = (0..blocks.len()).collect();
    let mut images = Vec::new();
    for j in &mi {
        images.push(ideal_pair(model, blocks, j)?.generated);
    }
    let maximal: BTreeSet<BTreeSet<usize>> = (0..blocks.len())
        .map(|k| all.iter().copied().filter(|&i| i != k).collect())
        .collect();
    let matched = images.iter().filter(|i| maximal.contains(*i)).count();
    let distinct: BTreeSet<&BTreeSet<usize>> = images.iter().collect();
    let injective = distinct.len() == images.len();
    let surjective = maximal.iter().all(|m| images.contains(m));
    let bijection = injective && surjective && matched == images.len();
    Ok(BijectionReport {
        invariant_maximal: mi.iter().map(|j| j.blocks().clone()).collect(),
        model_blocks: blocks.len(),
        images,
        matched,
        injective,
        surjective,
        bijection,
        explanation: (!bijection).then(|| {
            format!(
                "{ABSENT_HYPOTHESIS}: G is finite, hence amenable, so property (DP) fails unless the model is simple"
            )
        }),
    })
}

/// Checks over every ideal `𝒥` of the model: `E(𝒥)` is an invariant ideal
/// with `𝒥 ⊆ E(𝒥)~`, and `𝒥 = ⟨E(𝒥)⟩` whenever `E(𝒥) ⊆ 𝒥`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdealLemmaReport {
    pub ideals_checked: usize,
    pub expectation_invariant: bool,
    pub contained_in_tilde: bool,
    pub e_invariant_ideals: usize,
    pub e_invariant_generated: bool,
}

pub fn ideal_lemmas(model: &MatrixModel, blocks: &BlockStructure) -> Result<IdealLemmaReport> {
    let k = blocks.len();
    if k > 16 {
        return Err(Error::Resource {
            what: "model blocks for ideal enumeration",
            needed: k,
            cap: 16,
        });
    }
    let sys = model.system();
    let autos = automorphisms(sys);
    let e = sys.group().identity();
    let basis = model.orthonormal_basis();
    let mut report = IdealLemmaReport {
        ideals_checked: 0,
        expectation_invariant: true,
        contained_in_tilde: true,
        e_invariant_ideals: 0,
        e_invariant_generated: true,
    };
    for mask in 0u32..(1 << k) {
        let set: BTreeSet<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let p = blocks.projection(&set);
        let ideal: Vec<CMatrix> = basis.iter().map(|b| &p * b).collect();
        let mut image = BTreeSet::new();
        for m in &ideal {
            image.extend(model.fourier(m, &e).block_support(SIMPLE_TOL));
        }
        let j = IdealDescriptor::new(image, sys.algebra().num_blocks())?;
        report.ideals_checked += 1;
        if !autos.iter().all(|a| j.is_invariant_under(a)) {
            report.expectation_invariant = false;
            continue;
        }
        let pair = ideal_pair(model, blocks, &j)?;
        if !set.is_subset(&pair.tilde) {
            report.contained_in_tilde = false;
        }
        let comp = &CMatrix::identity(model.ambient()) - &p;
        let e_invariant = ideal
            .iter()
            .all(|m| (&comp * &model.expectation(m)).max_abs() <= SIMPLE_TOL);
        if e_invariant {
            report.e_invariant_ideals += 1;
            if pair.generated != set {
                report.e_invariant_generated = false;
            }
        }
    }
    Ok(report)
}

/// `φ ↦ φ∘E` from invariant traces of `A` to traces of the model.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceReport {
    pub invariant_traces: Vec<TraceWeights>,
    pub model_traces: usize,
    /// `φ∘E` as weights on the model blocks.
    pub image_weights: Vec<Vec<f64>>,
    /// Largest `|τ(xy) − τ(yx)|` over basis pairs.
    pub tracial_defect: f64,
    /// Largest `|φ∘E(π(a)) − φ(a)|` over a basis of `A`.
    pub extension_defect: f64,
    pub injective: bool,
    pub surjective: bool,
}

pub fn trace_correspondence(model: &MatrixModel, blocks: &BlockStructure) -> Result<TraceReport> {
    let sys = model.system();
    let alg = sys.algebra();
    let phis = invariant_traces(alg, &automorphisms(sys));
    let e = sys.group().identity();
    let basis = model.orthonormal_basis();
    let products: Vec<Vec<CMatrix>> = basis
        .iter()
        .map(|x| basis.iter().map(|y| x * y).collect())
        .collect();
    let mut tracial_defect: f64 = 0.0;
    let mut extension_defect: f64 = 0.0;
    let mut image_weights = Vec::new();
    for phi in &phis {
        let tau = |m: &CMatrix| phi.evaluate(&model.fourier(m, &e));
        for i in 0..basis.len() {
            for j in 0..i {
                tracial_defect =
                    tracial_defect.max((tau(&products[i][j]) - tau(&products[j][i])).norm());
            }
        }
        for a in alg.basis() {
            extension_defect = extension_defect.max((tau(&model.pi(&a)) - phi.evaluate(&a)).norm());
        }
        let w: Vec<f64> = blocks
            .blocks
            .iter()
            .map(|b| tau(&b.projection).re)
            .collect();
        // τ must equal Σ w_k tr(p_k ·)/rank(p_k).
        for b in &basis {
            let recon: C64 = blocks
                .blocks
                .iter()
                .zip(&w)
                .map(|(blk, &wk)| {
                    (&blk.projection * b).trace() * (wk / (blk.dim * blk.multiplicity) as f64)
                })
                .sum();
            tracial_defect = tracial_defect.max((recon - tau(b)).norm());
        }
        image_weights.push(w);
    }
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
    let injective = (0..image_weights.len())
        .all(|i| (0..i).all(|j| !close(&image_weights[i], &image_weights[j])));
    let surjective = (0..blocks.len()).all(|k| {
        let mut unit = vec![0.0; blocks.len()];
        unit[k] = 1.0;
        image_weights.iter().any(|w| close(w, &unit))
    });
    Ok(TraceReport {
        invariant_traces: phis,
        model_traces: blocks.len(),
        image_weights,
        tracial_defect,
        extension_defect,
        injective,
        surjective,
    })
}

/// One orbit `O_j` with its subsystem `Σ_j = (C(O_j), G, α_j, σ)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitSummary {
    pub points: Vec<usize>,
    pub stabilizer_order: usize,
    pub model_dimension: usize,
    pub block_dims: Vec<usize>,
    /// `[G:G_x]²·|G_x|`.
    pub morita_dimension: usize,
    /// Block dimensions of `C*_r(G_x)` scaled by `[G:G_x]`; trivial `σ` only.
    pub stabilizer_block_dims: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrbitDecomposition {
    pub orbits: Vec<OrbitSummary>,
    pub total_dimension: usize,
    pub block_dims: Vec<usize>,
    pub dimensions_add_up: bool,
    pub blocks_concatenate: bool,
    /// `dim B_j = [G:G_x]²·|G_x|` and, for trivial `σ`, the block check.
    pub morita_consistent: bool,
    /// The Morita block check is informational when `σ` is nontrivial.
    pub morita_informational: bool,
}

fn restrict_cocycle(c: &TwoCocycle, points: &[usize]) -> TwoCocycle {
    match c {
        TwoCocycle::Table { entries } => TwoCocycle::Table {
            entries: entries
                .iter()
                .map(|(&k, v)| {
                    let v = if v.len() == 1 {
                        v.clone()
                    } else {
                        points.iter().map(|&p| v[p]).collect()
                    };
                    (k, v)
                })
                .collect(),
        },
        other => other.clone(),
    }
}

/// Subsystem on the orbit `points` of `A = C(X)`.
pub fn orbit_subsystem(sys: &TwistedSystem, points: &[usize]) -> Result<Arc<TwistedSystem>> {
    let alg = CoeffAlgebra::functions_on_set(points.len())?;
    let index: BTreeMap<usize, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let group = sys.group().clone();
    let action = match sys.action() {
        Action::Trivial => Action::Trivial,
        Action::PerElement(v) => Action::PerElement(
            v.iter()
                .map(|a| {
                    let perm = points
                        .iter()
                        .map(|p| index.get(&a.block_permutation()[*p]).copied())
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| usage("points do not form an invariant set"))?;
                    AlgebraAutomorphism::permutation(&alg, perm)
                })
                .collect::<Result<_>>()?,
        ),
        Action::PerGenerator(_) => {
            return Err(Error::Unsupported(
                "orbit decomposition needs a finite group".into(),
            ))
        }
    };
    Ok(Arc::new(TwistedSystem::new(
        group,
        alg,
        action,
        restrict_cocycle(sys.cocycle(), points),
    )?))
}

pub fn orbit_decomposition(system: &Arc<TwistedSystem>) -> Result<OrbitDecomposition> {
    let alg = system.algebra();
    if !alg.is_commutative() {
        return Err(Error::Unsupported(
            "orbit decomposition needs a commutative coefficient algebra".into(),
        ));
    }
    let finite = system
        .group()
        .as_finite()
        .ok_or_else(|| Error::Unsupported("orbit decomposition needs a finite group".into()))?;
    let autos = automorphisms(system);
    let whole = MatrixModel::new(system)?;
    let whole_blocks = block_decompose(&whole)?;
    let trivial_sigma = system.has_trivial_cocycle();
    let mut orbits = Vec::new();
    let mut concat = Vec::new();
    let mut morita_consistent = true;
    for points in block_orbits(alg, &autos) {
        let sub = orbit_subsystem(system, &points)?;
        let model = MatrixModel::new(&sub)?;
        let bs = block_decompose(&model)?;
        let x0 = points[0];
        let stab: Vec<usize> = (0..finite.order())
            .filter(|&g| autos[g].block_permutation()[x0] == x0)
            .collect();
        let index = points.len();
        let morita_dimension = index * index * stab.len();
        let mut dims = bs.dims();
        dims.sort_unstable();
        let stabilizer_block_dims = if trivial_sigma {
            let (h, _) = finite.subgroup(&stab)?;
            let hs = Arc::new(TwistedSystem::new(
                Group::Finite(h),
                CoeffAlgebra::scalars(),
                Action::Trivial,
                TwoCocycle::Trivial,
            )?);
            let hm = MatrixModel::new(&hs)?;
            let mut hd: Vec<usize> = block_decompose(&hm)?
                .dims()
                .iter()
                .map(|d| d * index)
                .collect();
            hd.sort_unstable();
            Some(hd)
        } else {
            None
        };
        if model.dimension() != morita_dimension
            || stabilizer_block_dims.as_ref().is_some_and(|h| *h != dims)
        {
            morita_consistent = false;
        }
        concat.extend(dims.iter().copied());
        orbits.push(OrbitSummary {
            points,
            stabilizer_order: stab.len(),
            model_dimension: model.dimension(),
            block_dims: dims,
            morita_dimension,
            stabilizer_block_dims,
        });
    }
    let mut block_dims = whole_blocks.dims();
    block_dims.sort_unstable();
    concat.sort_unstable();
    Ok(OrbitDecomposition {
        total_dimension: whole.dimension(),
        dimensions_add_up: orbits.iter().map(|o| o.model_dimension).sum::<usize>()
            == whole.dimension(),
        blocks_concatenate: concat == block_dims,
        block_dims,
        orbits,
        morita_consistent,
        morita_informational: !trivial_sigma,
    })
}
