//! Averaging processes `x ↦ (1/n) Σ λ(h_i) x λ(h_i)*`, the Powers contraction
//! step, the iterated PH averaging, the `(P_com)` average and the reduction
//! of a centred element to its self-adjoint parts.
//!
//! Every numeric run records `norm_lower ≤ certified bound`; a violation is
//! a refutation and is surfaced in the result.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::crossed::CrossedElement;
use crate::error::{usage, Error, Result};
use crate::group::GroupElement;
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::powers::{construct_powers_triple, PcomCertificate, PowersTriple, DEFAULT_TRIPLE_SIZE};
use crate::rep::{norm_upper_l1, PowerOptions, TruncatedRep, WindowSpec};

/// The contraction factor certified for one Powers step.
pub const CERTIFIED_FACTOR: f64 = 0.991;
/// Slack allowed between a computed lower bound and a certified bound.
pub const REFUTATION_TOL: f64 = 1e-6;
/// Tolerance for the hypotheses of [`hs_bound_check`].
pub const HS_TOL: f64 = 1e-9;
pub const DEFAULT_KMAX: usize = 4;
/// Largest number of stored nonzeros for a monitoring window.
pub const DEFAULT_WINDOW_BUDGET: usize = 2_500_000;

/// `5/6 + √2/9`.
pub fn hs_constant() -> f64 {
    5.0 / 6.0 + 2f64.sqrt() / 9.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimpleAveraging {
    pub conjugators: Vec<GroupElement>,
}

impl SimpleAveraging {
    pub fn new(conjugators: Vec<GroupElement>) -> Result<Self> {
        if conjugators.is_empty() {
            return Err(usage("an averaging step needs at least one conjugator"));
        }
        Ok(Self { conjugators })
    }

    pub fn apply(&self, x: &CrossedElement) -> Result<CrossedElement> {
        let mut acc = CrossedElement::zero(x.system());
        for h in &self.conjugators {
            acc = acc.add(&x.conjugate(h)?)?;
        }
        Ok(acc.scale(C64::new(1.0 / self.conjugators.len() as f64, 0.0)))
    }
}

/// `ψ = φ_m ∘ ⋯ ∘ φ_1`, stored in application order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AveragingProcess {
    pub steps: Vec<SimpleAveraging>,
}

impl AveragingProcess {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `other ∘ self`.
    pub fn then(mut self, other: &AveragingProcess) -> Self {
        self.steps.extend(other.steps.iter().cloned());
        self
    }
}

pub fn apply_averaging(process: &AveragingProcess, x: &CrossedElement) -> Result<CrossedElement> {
    let mut y = x.clone();
    for step in &process.steps {
        y = step.apply(&y)?;
    }
    Ok(y)
}

/// One row of a decay trace.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub step: usize,
    pub terms: usize,
    pub norm_lower: f64,
    pub l1_upper: f64,
    pub certified_bound: f64,
}

impl TraceRow {
    pub fn refutes(&self) -> bool {
        self.norm_lower > self.certified_bound + REFUTATION_TOL
            || self.norm_lower > self.l1_upper + REFUTATION_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayTrace {
    pub rows: Vec<TraceRow>,
}

impl DecayTrace {
    pub fn refuted(&self) -> bool {
        self.rows.iter().any(TraceRow::refutes)
    }

    pub fn certified_nonincreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].certified_bound <= w[0].certified_bound + 1e-15)
    }
}

/// Settings for the numeric monitors attached to averaging runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorOptions {
    pub power: PowerOptions,
    pub window_budget: usize,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self {
            power: PowerOptions::default(),
            window_budget: DEFAULT_WINDOW_BUDGET,
        }
    }
}

/// Window `{e} ∪ S ∪ S·S` for `S = supp(x) ∪ supp(x)⁻¹`, dropping to
/// `{e} ∪ S` when the compression would exceed the budget. Finite groups
/// use the whole group.
pub fn monitor_window(x: &CrossedElement, budget: usize) -> WindowSpec {
    let group = x.system().group();
    if group.as_finite().is_some() {
        return WindowSpec::Full;
    }
    let mut s: BTreeSet<GroupElement> = x.support();
    s.extend(x.support().iter().map(|g| group.inv(g).unwrap()));
    let n = s.len();
    let depth = if (1 + n + n * n).saturating_mul(n) <= budget {
        2
    } else {
        1
    };
    WindowSpec::Adaptive {
        seeds: vec![],
        steps: s.into_iter().collect(),
        depth,
    }
}

/// Lower bound for `‖x‖` on [`monitor_window`].
pub fn monitored_norm(x: &CrossedElement, opts: &MonitorOptions) -> Result<f64> {
    if x.is_zero() {
        return Ok(0.0);
    }
    let rep = TruncatedRep::new(x.system(), &monitor_window(x, opts.window_budget))?;
    Ok(rep.norm_lower(x, &opts.power)?.value)
}

fn row(step: usize, x: &CrossedElement, bound: f64, opts: &MonitorOptions) -> Result<TraceRow> {
    Ok(TraceRow {
        step,
        terms: x.num_terms(),
        norm_lower: monitored_norm(x, opts)?,
        l1_upper: norm_upper_l1(x),
        certified_bound: bound,
    })
}

fn require_centred_self_adjoint(x: &CrossedElement) -> Result<()> {
    let scale = x.l1_norm().max(1.0);
    if !x.is_self_adjoint(1e-12 * scale) {
        return Err(usage("element must be self-adjoint"));
    }
    require_centred(x)
}

fn require_centred(x: &CrossedElement) -> Result<()> {
    let scale = x.l1_norm().max(1.0);
    if !x.expectation().is_zero(1e-12 * scale) {
        return Err(usage("element must satisfy E(x) = 0"));
    }
    Ok(())
}

/// Result of [`powers_step`].
#[derive(Clone, Debug)]
pub struct PowersStep {
    pub element: CrossedElement,
    pub step: SimpleAveraging,
    pub factor: f64,
}

/// `φ(x) = (1/3) Σ_{j≤3} λ(h_j) x λ(h_j)*` with the certified factor 0.991.
pub fn powers_step(x: &CrossedElement, triple: &PowersTriple) -> Result<PowersStep> {
    require_centred_self_adjoint(x)?;
    if triple.conjugators.len() < DEFAULT_TRIPLE_SIZE {
        return Err(usage("a Powers step needs three conjugators"));
    }
    let group = x.system().group();
    let mut allowed: BTreeSet<GroupElement> = triple.target.iter().cloned().collect();
    allowed.extend(triple.target.iter().map(|g| group.inv(g).unwrap()));
    if let Some(g) = x.support().iter().find(|g| !allowed.contains(g)) {
        return Err(usage(format!("support element {g} is outside F ∪ F⁻¹")));
    }
    let step = SimpleAveraging::new(triple.conjugators[..DEFAULT_TRIPLE_SIZE].to_vec())?;
    Ok(PowersStep {
        element: step.apply(x)?,
        step,
        factor: CERTIFIED_FACTOR,
    })
}

/// Largest entry of `p_j ρ(x) p_j` on the window, where `p_j` projects onto
/// `G∖h_j⁻¹T_j`. Zero for valid triples.
pub fn corner_defect(
    rep: &TruncatedRep,
    x: &CrossedElement,
    triple: &PowersTriple,
    j: usize,
) -> Result<f64> {
    let group = x.system().group();
    let h = &triple.conjugators[j];
    let t = &triple.sets[j];
    let mask = rep.mask(|g| !t.contains(&group.mul(h, g).unwrap()));
    let dense_cols = rep.fiber_dim();
    let op = rep.represent(x)?;
    let mut worst: f64 = 0.0;
    let n = rep.size();
    // Column sweep through the sparse operator applied to unit vectors on the mask.
    for c in 0..n {
        if !mask[c / dense_cols] {
            continue;
        }
        let mut e = vec![ZERO; n];
        e[c] = ONE;
        let col = op.apply(&e);
        for (r, z) in col.iter().enumerate() {
            if mask[r / dense_cols] {
                worst = worst.max(z.norm());
            }
        }
    }
    Ok(worst)
}

/// Result of [`ph_average`].
#[derive(Clone, Debug)]
pub struct PhRun {
    pub process: AveragingProcess,
    pub trace: DecayTrace,
    /// `ψ(x)` after the symbolic steps.
    pub element: CrossedElement,
    /// The `{s, s⁻¹}` parts of `x`.
    pub components: Vec<CrossedElement>,
    /// `0.991^k·ℓ¹(x_j)` after the symbolic steps, per component.
    pub component_bounds: Vec<f64>,
    /// Steps needed for `0.991^k·ℓ¹(x) < ε`.
    pub steps_for_epsilon: usize,
    /// Certified bound after `steps_for_epsilon` steps.
    pub final_bound: f64,
}

impl PhRun {
    pub fn refuted(&self) -> bool {
        self.trace.refuted()
    }
}

/// `⌈log(ε/ℓ¹)/log 0.991⌉` (0 when `ℓ¹ < ε` already).
pub fn steps_for_epsilon(l1: f64, eps: f64) -> usize {
    if l1 < eps {
        return 0;
    }
    let k = ((eps / l1).ln() / CERTIFIED_FACTOR.ln()).ceil() as usize;
    // Strict inequality d^k·ℓ¹ < ε.
    if CERTIFIED_FACTOR.powi(k as i32) * l1 < eps {
        k
    } else {
        k + 1
    }
}

/// Splits a self-adjoint element into parts supported on `{s, s⁻¹}`,
/// ordered by the smaller of `s, s⁻¹`. Involutions are unsupported.
pub fn split_components(x: &CrossedElement) -> Result<Vec<CrossedElement>> {
    let group = x.system().group();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (g, _) in x.terms() {
        if seen.contains(g) {
            continue;
        }
        let gi = group.inv(g)?;
        if *g == gi {
            return Err(Error::Unsupported(format!(
                "support element {g} has order two"
            )));
        }
        let terms = [g.clone(), gi.clone()].map(|k| (k.clone(), x.fourier(&k)));
        seen.insert(g.clone());
        seen.insert(gi);
        out.push(CrossedElement::from_terms(x.system(), terms)?);
    }
    Ok(out)
}

/// The run for `x` before any symbolic step.
fn ph_setup(x: &CrossedElement, eps: f64) -> Result<PhRun> {
    if eps <= 0.0 {
        return Err(usage("ε must be positive"));
    }
    require_centred_self_adjoint(x)?;
    let components = split_components(x)?;
    let l1 = x.l1_norm();
    let steps = steps_for_epsilon(l1, eps);
    Ok(PhRun {
        process: AveragingProcess::identity(),
        trace: DecayTrace::default(),
        element: x.clone(),
        component_bounds: components.iter().map(CrossedElement::l1_norm).collect(),
        components,
        steps_for_epsilon: steps,
        final_bound: CERTIFIED_FACTOR.powi(steps as i32) * l1,
    })
}

/// `k_max` Powers steps on `run.element`, each with a triple rebuilt from
/// the current support; `each(k, step, element)` sees every step.
fn iterate_powers(
    run: &mut PhRun,
    k_max: usize,
    mut each: impl FnMut(usize, &SimpleAveraging, &CrossedElement) -> Result<()>,
) -> Result<()> {
    if run.element.is_zero() {
        return Ok(());
    }
    let group = run.element.system().group().clone();
    for k in 1..=k_max {
        let f: Vec<GroupElement> = run.element.support().into_iter().collect();
        let triple = construct_powers_triple(&group, &f, DEFAULT_TRIPLE_SIZE)?;
        let out = powers_step(&run.element, &triple)?;
        each(k, &out.step, &out.element)?;
        run.process.steps.push(out.step);
        run.element = out.element;
        for b in &mut run.component_bounds {
            *b *= CERTIFIED_FACTOR;
        }
    }
    Ok(())
}

/// Iterated Powers averaging of a centred self-adjoint element: `k_max`
/// steps, each with a triple rebuilt from the current support. A step built
/// for `F = supp` contracts every part supported in `F ∪ F⁻¹`, so each
/// component `x_j` is certified at `0.991^k·ℓ¹(x_j)` and the whole element
/// at `0.991^k·ℓ¹(x)`. The decay to `ε` beyond `k_max` is reported
/// analytically.
pub fn ph_average(
    x: &CrossedElement,
    eps: f64,
    k_max: usize,
    opts: &MonitorOptions,
) -> Result<PhRun> {
    let mut run = ph_setup(x, eps)?;
    if x.is_zero() {
        return Ok(run);
    }
    let l1 = x.l1_norm();
    let mut rows = vec![row(0, x, l1, opts)?];
    iterate_powers(&mut run, k_max, |k, _, e| {
        rows.push(row(k, e, CERTIFIED_FACTOR.powi(k as i32) * l1, opts)?);
        Ok(())
    })?;
    run.trace.rows = rows;
    Ok(run)
}

/// Result of [`pcom_average`].
#[derive(Clone, Debug)]
pub struct PcomAverage {
    pub element: CrossedElement,
    pub n: usize,
    pub certified_bound: f64,
}

/// `y_N = (1/N) Σ_{j=1}^N λ(g₀⁻ʲ) y₀ λ(g₀⁻ʲ)*` with the certified bound
/// `(2n/√N) Σ ‖a_g‖`, `n` the number of sets `D_k`.
pub fn pcom_average(y0: &CrossedElement, cert: &PcomCertificate, n: usize) -> Result<PcomAverage> {
    if n == 0 {
        return Err(usage("N must be at least 1"));
    }
    require_centred(y0)?;
    let target: BTreeSet<&GroupElement> = cert.target.iter().collect();
    if let Some(g) = y0.support().iter().find(|g| !target.contains(g)) {
        return Err(usage(format!(
            "support element {g} is outside the certificate's F"
        )));
    }
    let group = y0.system().group();
    let g0i = group.inv(&cert.g0)?;
    let mut gj = group.identity();
    let mut conj = Vec::with_capacity(n);
    for _ in 0..n {
        gj = group.mul(&g0i, &gj)?;
        conj.push(gj.clone());
    }
    let element = SimpleAveraging::new(conj)?.apply(y0)?;
    let certified_bound = 2.0 * cert.ds.len() as f64 / (n as f64).sqrt() * y0.l1_norm();
    Ok(PcomAverage {
        element,
        n,
        certified_bound,
    })
}

/// `y_N` for each `N` with its monitored norm; rows use `step = N`.
pub fn pcom_sweep(
    y0: &CrossedElement,
    cert: &PcomCertificate,
    ns: &[usize],
    opts: &MonitorOptions,
) -> Result<DecayTrace> {
    let mut trace = DecayTrace::default();
    for &n in ns {
        let avg = pcom_average(y0, cert, n)?;
        trace
            .rows
            .push(row(n, &avg.element, avg.certified_bound, opts)?);
    }
    Ok(trace)
}

/// Result of [`dixmier_reduce`].
#[derive(Clone, Debug)]
pub struct DixmierRun {
    pub process: AveragingProcess,
    pub trace: DecayTrace,
    pub element: CrossedElement,
    pub real: PhRun,
    pub imaginary: PhRun,
    /// Certified bound for `ψ(y)` once both phases reach their analytic step counts.
    pub final_bound: f64,
}

impl DixmierRun {
    pub fn refuted(&self) -> bool {
        self.trace.refuted()
    }
}

/// Writes `y = x₁ + i x₂`, averages `x₁` to `ε/2` by `ψ₁`, then `ψ₁(x₂)`
/// to `ε/2` by `ψ₂`, and returns `ψ₂ ∘ ψ₁`. The trace follows the whole
/// element `ψ(y)`, certified by `0.991^{k₁}ℓ¹(x₁) + 0.991^{k₂}ℓ¹(ψ₁(x₂))`
/// (a phase that does not target a part still does not increase its norm).
pub fn dixmier_reduce(
    y: &CrossedElement,
    eps: f64,
    k_max: usize,
    opts: &MonitorOptions,
) -> Result<DixmierRun> {
    require_centred(y)?;
    let i = C64::new(0.0, 1.0);
    let x1 = y.real_part();
    let x2 = y.imag_part();
    let mut real = ph_setup(&x1, eps / 2.0)?;
    let l1_real = x1.l1_norm();
    let mut rows = vec![row(0, y, l1_real + x2.l1_norm(), opts)?];
    let mut passenger = x2.clone();
    iterate_powers(&mut real, k_max, |k, step, e| {
        passenger = step.apply(&passenger)?;
        let whole = e.add(&passenger.scale(i))?;
        let bound = CERTIFIED_FACTOR.powi(k as i32) * l1_real + x2.l1_norm();
        rows.push(row(k, &whole, bound, opts)?);
        Ok(())
    })?;
    let k1 = real.process.len();
    let real_bound = CERTIFIED_FACTOR.powi(k1 as i32) * l1_real;
    let mut imaginary = ph_setup(&passenger, eps / 2.0)?;
    let l1_imag = passenger.l1_norm();
    let mut carried = real.element.clone();
    iterate_powers(&mut imaginary, k_max, |k, step, e| {
        carried = step.apply(&carried)?;
        let whole = carried.add(&e.scale(i))?;
        let bound = real_bound + CERTIFIED_FACTOR.powi(k as i32) * l1_imag;
        rows.push(row(k1 + k, &whole, bound, opts)?);
        Ok(())
    })?;
    let process = real.process.clone().then(&imaginary.process);
    let element = carried.add(&imaginary.element.scale(i))?;
    Ok(DixmierRun {
        final_bound: real.final_bound + imaginary.final_bound,
        process,
        trace: DecayTrace { rows },
        element,
        real,
        imaginary,
    })
}

/// Outcome of [`hs_bound_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsOutcome {
    /// `‖(1/3)Σ u_j x u_j*‖ / ‖x‖` (0 for `x = 0`).
    pub ratio: f64,
    pub passed: bool,
}

/// Verifies the hypotheses (`x = x*`, `p_j x p_j = 0`, the `u_j(1−p_j)u_j*`
/// pairwise orthogonal) and tests `‖(1/3)Σu_j x u_j*‖ ≤ (5/6 + √2/9)‖x‖`.
pub fn hs_bound_check(x: &CMatrix, p: &[CMatrix; 3], u: &[CMatrix; 3]) -> Result<HsOutcome> {
    let n = x.rows();
    let scale = x.max_abs().max(1.0);
    if !x.is_square() || !x.is_hermitian(HS_TOL * scale) {
        return Err(usage("x must be self-adjoint"));
    }
    let id = CMatrix::identity(n);
    let mut q = Vec::with_capacity(3);
    for j in 0..3 {
        if p[j].rows() != n
            || u[j].rows() != n
            || !p[j].is_projection(HS_TOL)
            || !u[j].is_unitary(HS_TOL)
        {
            return Err(usage(
                "p_j must be projections and u_j unitaries of matching size",
            ));
        }
        if (&(&p[j] * x) * &p[j]).max_abs() > HS_TOL * scale {
            return Err(usage(format!("p_{} x p_{} ≠ 0", j + 1, j + 1)));
        }
        q.push(&(&u[j] * &(&id - &p[j])) * &u[j].adjoint());
    }
    for j in 0..3 {
        for k in j + 1..3 {
            if (&q[j] * &q[k]).max_abs() > HS_TOL {
                return Err(usage(
                    "the projections u_j(1−p_j)u_j* are not pairwise orthogonal",
                ));
            }
        }
    }
    let xn = x.operator_norm();
    if xn == 0.0 {
        return Ok(HsOutcome {
            ratio: 0.0,
            passed: true,
        });
    }
    let mut y = CMatrix::zeros(n, n);
    for uj in u {
        y = &y + &(&(uj * x) * &uj.adjoint());
    }
    let y = y.scale(C64::new(1.0 / 3.0, 0.0));
    let yn = y.operator_norm();
    Ok(HsOutcome {
        ratio: yn / xn,
        passed: yn <= hs_constant() * xn + HS_TOL,
    })
}

/// A randomly generated instance of the hypotheses of [`hs_bound_check`].
#[derive(Clone, Debug)]
pub struct HsInstance {
    pub x: CMatrix,
    pub p: [CMatrix; 3],
    pub u: [CMatrix; 3],
}

fn coordinate_projection(n: usize, set: &BTreeSet<usize>) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| {
        if r == c && set.contains(&r) {
            ONE
        } else {
            ZERO
        }
    })
}

/// Unitary that is `U_in` on the coordinates in `set` and `U_out` on the rest.
fn split_unitary(rng: &mut impl Rng, n: usize, set: &BTreeSet<usize>) -> CMatrix {
    let inside: Vec<usize> = set.iter().copied().collect();
    let outside: Vec<usize> = (0..n).filter(|i| !set.contains(i)).collect();
    let mut m = CMatrix::zeros(n, n);
    for idx in [inside, outside] {
        let v = CMatrix::random_unitary(rng, idx.len());
        for (a, &r) in idx.iter().enumerate() {
            for (b, &c) in idx.iter().enumerate() {
                m[(r, c)] = v[(a, b)];
            }
        }
    }
    m
}

/// Dimension `n = 3m + r ≤ max_dim`. Random `m`-sets `E_j`; `p_j` projects
/// onto the complement of `E_j`; `u_j` carries `span(E_j)` onto the `j`-th
/// coordinate block `B_j` (so the `u_j(1−p_j)u_j*` are the orthogonal block
/// projections); `x` is a random Hermitian matrix on the entries `(a, b)`
/// with `a ∈ E_j` or `b ∈ E_j` for every `j`. Half of the instances are
/// conjugated by a global random unitary.
pub fn random_hs_instance(rng: &mut impl Rng, max_dim: usize) -> HsInstance {
    let max_dim = max_dim.max(3);
    let m = rng.gen_range(1..=max_dim / 3);
    let r = rng.gen_range(0..=(max_dim - 3 * m).min(4));
    let n = 3 * m + r;
    let coords: Vec<usize> = (0..n).collect();
    let mut es = Vec::with_capacity(3);
    let mut ps = Vec::with_capacity(3);
    let mut us = Vec::with_capacity(3);
    for j in 0..3 {
        let e: BTreeSet<usize> = coords.choose_multiple(rng, m).copied().collect();
        let b: BTreeSet<usize> = (j * m..(j + 1) * m).collect();
        let comp: BTreeSet<usize> = (0..n).filter(|i| !e.contains(i)).collect();
        ps.push(coordinate_projection(n, &comp));
        // Permutation sending E_j onto B_j.
        let mut targets: Vec<usize> = b.iter().copied().collect();
        let mut rest: Vec<usize> = (0..n).filter(|i| !b.contains(i)).collect();
        targets.shuffle(rng);
        rest.shuffle(rng);
        let mut perm = vec![0usize; n];
        let (mut ti, mut ri) = (targets.into_iter(), rest.into_iter());
        for i in 0..n {
            perm[i] = if e.contains(&i) {
                ti.next().unwrap()
            } else {
                ri.next().unwrap()
            };
        }
        let pm = CMatrix::from_fn(n, n, |row, col| if perm[col] == row { ONE } else { ZERO });
        let u = &(&split_unitary(rng, n, &b) * &pm) * &split_unitary(rng, n, &e);
        us.push(u);
        es.push(e);
    }
    let g = CMatrix::random_hermitian(rng, n);
    let mut x = CMatrix::from_fn(n, n, |a, b| {
        if es.iter().all(|e| e.contains(&a) || e.contains(&b)) {
            g[(a, b)]
        } else {
            ZERO
        }
    });
    if rng.gen_bool(0.5) {
        let w = CMatrix::random_unitary(rng, n);
        let conj = |a: &CMatrix| &(&w * a) * &w.adjoint();
        x = conj(&x);
        for k in 0..3 {
            ps[k] = conj(&ps[k]);
            us[k] = conj(&us[k]);
        }
    }
    let [p0, p1, p2]: [CMatrix; 3] = ps.try_into().unwrap();
    let [u0, u1, u2]: [CMatrix; 3] = us.try_into().unwrap();
    HsInstance {
        x,
        p: [p0, p1, p2],
        u: [u0, u1, u2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraElement, CoeffAlgebra};
    use crate::group::{Group, Word};
    use crate::powers::construct_pcom;
    use crate::twist::{builtin_cocycle, Action, TwistedSystem, TwoCocycle};
    use alloc::sync::Arc;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::SeedableRng;
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

    fn lam(sys: &Arc<TwistedSystem>, s: &str) -> CrossedElement {
        CrossedElement::lambda(sys, w(s)).unwrap()
    }

    fn sum(sys: &Arc<TwistedSystem>, words: &[&str]) -> CrossedElement {
        words.iter().fold(CrossedElement::zero(sys), |acc, s| {
            acc.add(&lam(sys, s)).unwrap()
        })
    }

    #[test]
    fn hs_constant_is_below_the_factor() {
        assert!((hs_constant() - 0.990_468).abs() < 1e-6);
        assert!(hs_constant() < CERTIFIED_FACTOR);
    }

    #[test]
    fn simple_averaging_examples() {
        let sys = free2();
        let x = sum(&sys, &["a", "a^-1"]);
        let id = AveragingProcess {
            steps: vec![SimpleAveraging::new(vec![w("e")]).unwrap()],
        };
        assert!(apply_averaging(&id, &x).unwrap().distance(&x) == 0.0);
        let by_b = AveragingProcess {
            steps: vec![SimpleAveraging::new(vec![w("b")]).unwrap()],
        };
        let y = apply_averaging(&by_b, &x).unwrap();
        assert!(y.distance(&sum(&sys, &["b a b^-1", "b a^-1 b^-1"])) < 1e-15);
        let a = CrossedElement::embed(
            &sys,
            AlgebraElement::scalar(sys.algebra(), C64::new(2.0, 1.0)),
        );
        let many = AveragingProcess {
            steps: vec![SimpleAveraging::new(vec![w("b"), w("a^3 b")]).unwrap()],
        };
        assert!(apply_averaging(&many, &a).unwrap().distance(&a) < 1e-15);
    }

    #[test]
    fn contraction_of_the_a_generator() {
        let sys = free2();
        let x = sum(&sys, &["a", "a^-1"]);
        let triple = construct_powers_triple(sys.group(), &[w("a"), w("a^-1")], 3).unwrap();
        let rep = TruncatedRep::new(&sys, &WindowSpec::Ball(6)).unwrap();
        for j in 0..3 {
            assert_eq!(corner_defect(&rep, &x, &triple, j).unwrap(), 0.0);
        }
        let step = powers_step(&x, &triple).unwrap();
        assert_eq!(step.factor, 0.991);
        let lower = monitored_norm(&step.element, &MonitorOptions::default()).unwrap();
        assert!(lower <= 0.991 * 2.0 + REFUTATION_TOL);
        // Six conjugates b^j a^{±1} b^{-j}, j = 1..3, generate a free group of rank 3.
        assert!(lower <= 2.0 * 5f64.sqrt() / 3.0 + 1e-9);
        assert!(lower > 1.0);
    }

    #[test]
    fn twisted_contraction() {
        let f = Group::free(2).unwrap();
        let c = builtin_cocycle("pauli", &f, None).unwrap();
        let sys =
            Arc::new(TwistedSystem::new(f, CoeffAlgebra::scalars(), Action::Trivial, c).unwrap());
        let x = lam(&sys, "a")
            .sub(&lam(&sys, "a^-1"))
            .unwrap()
            .scale(C64::new(0.0, 1.0));
        assert!(x.is_self_adjoint(0.0));
        let triple = construct_powers_triple(sys.group(), &[w("a")], 3).unwrap();
        let step = powers_step(&x, &triple).unwrap();
        assert_eq!(step.factor, CERTIFIED_FACTOR);
        assert!(step.element.is_self_adjoint(1e-14));
        let lower = monitored_norm(&step.element, &MonitorOptions::default()).unwrap();
        assert!(lower <= 0.991 * x.l1_norm());
    }

    #[test]
    fn powers_step_preconditions() {
        let sys = free2();
        let triple = construct_powers_triple(sys.group(), &[w("a")], 3).unwrap();
        assert!(powers_step(&sum(&sys, &["b", "b^-1"]), &triple).is_err());
        assert!(powers_step(&lam(&sys, "a"), &triple).is_err());
        assert!(powers_step(&sum(&sys, &["e", "a", "a^-1"]), &triple).is_err());
    }

    #[test]
    fn ph_average_examples() {
        let sys = free2();
        let opts = MonitorOptions::default();
        assert_eq!(steps_for_epsilon(2.0, 0.01), 587);
        let run = ph_average(&CrossedElement::zero(&sys), 0.01, 4, &opts).unwrap();
        assert!(run.process.is_empty() && run.trace.rows.is_empty());

        let x = sum(&sys, &["a", "a^-1"]);
        let run = ph_average(&x, 0.01, 2, &opts).unwrap();
        assert_eq!(run.steps_for_epsilon, 587);
        assert!(run.final_bound < 0.01);
        assert_eq!(run.trace.rows.len(), 3);
        assert!(!run.refuted() && run.trace.certified_nonincreasing());

        let x = sum(&sys, &["a", "a^-1", "b", "b^-1"]);
        let run = ph_average(&x, 0.01, 4, &opts).unwrap();
        assert_eq!(run.components.len(), 2);
        assert_eq!(run.process.len(), 4);
        assert!(run.element.num_terms() <= 4 * 81);
        for b in &run.component_bounds {
            assert!((b - 0.991f64.powi(4) * 2.0).abs() < 1e-12);
        }
        let cert = run.trace.rows.last().unwrap().certified_bound;
        assert!((cert - 0.991f64.powi(4) * 4.0).abs() < 1e-12);
        assert!(!run.refuted());
    }

    #[test]
    fn component_term_counts() {
        let sys = free2();
        let x = sum(&sys, &["a", "a^-1", "b", "b^-1"]);
        let parts = split_components(&x).unwrap();
        assert_eq!(parts.len(), 2);
        let mut cur = parts[0].clone();
        for _ in 0..4 {
            let f: Vec<GroupElement> = cur.support().into_iter().collect();
            let t = construct_powers_triple(sys.group(), &f, 3).unwrap();
            cur = powers_step(&cur, &t).unwrap().element;
        }
        assert!(cur.num_terms() <= 2 * 81);
    }

    #[test]
    fn pcom_examples() {
        let sys = free2();
        let y0 = sum(&sys, &["a", "a^-1"]);
        let cert = construct_pcom(sys.group(), &[w("a"), w("a^-1")]).unwrap();
        let avg = pcom_average(&y0, &cert, 64).unwrap();
        assert!((avg.certified_bound - 0.5).abs() < 1e-15);
        let one = pcom_average(&y0, &cert, 1).unwrap();
        assert!(one.element.distance(&y0.conjugate(&w("b^-1")).unwrap()) < 1e-15);
        assert_eq!(one.certified_bound, 4.0);
        assert!(pcom_average(&lam(&sys, "b"), &cert, 4).is_err());
        let trace = pcom_sweep(&y0, &cert, &[1, 4, 16], &MonitorOptions::default()).unwrap();
        for r in &trace.rows {
            assert!(r.norm_lower <= 4.0 / (r.step as f64).sqrt() + REFUTATION_TOL);
            // Exact value for the free family of N conjugates of a.
            let n = r.step as f64;
            assert!(r.norm_lower <= 2.0 * (2.0 * n - 1.0).sqrt() / n + 1e-9);
        }
    }

    #[test]
    fn dixmier_examples() {
        let sys = free2();
        let opts = MonitorOptions::default();
        let y = sum(&sys, &["a", "a^-1"]);
        let run = dixmier_reduce(&y, 0.01, 2, &opts).unwrap();
        assert!(run.imaginary.process.is_empty());
        assert_eq!(
            run.process,
            ph_average(&y, 0.005, 2, &opts).unwrap().process
        );

        let run = dixmier_reduce(&lam(&sys, "a"), 0.01, 3, &opts).unwrap();
        assert_eq!(run.process.len(), 6);
        assert!(run.final_bound < 0.01);
        assert!(!run.refuted() && run.trace.certified_nonincreasing());
        assert_eq!(run.trace.rows.len(), 7);
        let direct = apply_averaging(&run.process, &lam(&sys, "a")).unwrap();
        assert!(direct.distance(&run.element) < 1e-12);
        assert!(matches!(
            dixmier_reduce(&CrossedElement::one(&sys), 0.01, 3, &opts),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn hs_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_hs_instance(&mut rng, 12);
        let zero = CMatrix::zeros(inst.x.rows(), inst.x.rows());
        assert_eq!(hs_bound_check(&zero, &inst.p, &inst.u).unwrap().ratio, 0.0);
        let mut bad = inst.clone();
        bad.p[0] = CMatrix::zeros(inst.x.rows(), inst.x.rows());
        let id = CMatrix::identity(inst.x.rows());
        bad.p[0] = &id - &bad.p[0];
        // p = 1 forces x = 0, which random x violates.
        if inst.x.max_abs() > 0.0 {
            assert!(hs_bound_check(&inst.x, &bad.p, &bad.u).is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn hs_inequality(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_hs_instance(&mut rng, 18);
            let out = hs_bound_check(&inst.x, &inst.p, &inst.u).unwrap();
            prop_assert!(out.passed, "ratio {}", out.ratio);
        }

        #[test]
        fn averaging_laws(seed in any::<u64>()) {
            let sys = free2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ball = sys.group().ball(2).unwrap();
            let pick = |rng: &mut ChaCha8Rng| ball[rng.gen_range(1..ball.len())].clone();
            let terms: Vec<(GroupElement, AlgebraElement)> = (0..3)
                .map(|_| (pick(&mut rng), AlgebraElement::scalar(sys.algebra(), C64::new(rng.gen(), rng.gen()))))
                .collect();
            let y = CrossedElement::from_terms(&sys, terms).unwrap();
            let x = y.real_part();
            let hs: Vec<GroupElement> = (0..rng.gen_range(1..4)).map(|_| pick(&mut rng)).collect();
            let phi = SimpleAveraging::new(hs.clone()).unwrap();
            let out = phi.apply(&x).unwrap();
            prop_assert!(out.is_self_adjoint(1e-12));
            prop_assert!(out.expectation().is_zero(1e-12));
            let group = sys.group();
            let allowed: BTreeSet<GroupElement> = hs
                .iter()
                .flat_map(|h| x.support().into_iter().map(move |s| group.mul(&group.mul(h, &s).unwrap(), &group.inv(h).unwrap()).unwrap()))
                .collect();
            prop_assert!(out.support().is_subset(&allowed));
        }
    }
}
