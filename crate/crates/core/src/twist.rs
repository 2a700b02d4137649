//! Twisted actions `(α, σ)` and their validation.
//!
//! Cocycle values are central unitaries of `A`, stored as one phase per
//! block. A scalar cocycle has equal phases everywhere.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraAutomorphism, AlgebraElement, CoeffAlgebra};
use crate::error::{usage, Error, Result};
use crate::group::{Group, GroupElement};
use crate::linalg::{C64, ONE};

/// Tolerance on unitarity and on every axiom check.
pub const AXIOM_TOL: f64 = 1e-9;
/// Radius of the ball sampled when validating systems over free groups.
pub const DEFAULT_SAMPLE_RADIUS: i64 = 3;
/// Number of sampled triples for free groups (and very large finite groups).
pub const SAMPLED_TRIPLES: usize = 2000;
/// Finite groups up to this order are checked on every triple.
pub const EXHAUSTIVE_TRIPLE_ORDER: usize = 64;
pub const VALIDATION_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq)]
pub enum TwoCocycle {
    Trivial,
    /// Finite groups only. Missing pairs are `1`. A value of length one is
    /// a scalar; otherwise it holds one phase per block of `A`.
    Table {
        entries: BTreeMap<(usize, usize), Vec<C64>>,
    },
    /// `σ(g,h) = exp(2πi·gᵀQh/m)` on the coordinates of a product of cyclic
    /// groups, or on exponent sums for free groups.
    Bicharacter {
        matrix: Vec<Vec<i64>>,
        root_order: u32,
    },
}

impl TwoCocycle {
    pub fn is_trivial(&self) -> bool {
        match self {
            TwoCocycle::Trivial => true,
            TwoCocycle::Table { entries } => entries.values().all(|v| v.iter().all(|&z| z == ONE)),
            TwoCocycle::Bicharacter { matrix, .. } => matrix.iter().flatten().all(|&q| q == 0),
        }
    }

    fn coordinates(group: &Group, g: &GroupElement) -> Option<Vec<i64>> {
        match (group, g) {
            (Group::Finite(t), GroupElement::Finite(i)) => {
                t.digits(*i).map(|d| d.into_iter().map(i64::from).collect())
            }
            (Group::Free { rank }, GroupElement::Free(w)) => Some(w.abelianization(*rank as usize)),
            _ => None,
        }
    }
}

/// `Q` with a single `1` at `(1, 0)`: on `Z₂²` this is `(-1)^{x₂y₁}`.
pub fn pauli_matrix(rank: usize) -> Vec<Vec<i64>> {
    let mut q = vec![vec![0; rank]; rank];
    q[1][0] = 1;
    q
}

/// `trivial`, `pauli` or `bicharacter` (with `matrix` and `root_order`).
pub fn builtin_cocycle(
    name: &str,
    group: &Group,
    bicharacter: Option<(Vec<Vec<i64>>, u32)>,
) -> Result<TwoCocycle> {
    let rank = match group {
        Group::Finite(g) => g.cyclic_factors().map(<[u32]>::len),
        Group::Free { rank } => Some(*rank as usize),
    };
    let cocycle = match name {
        "trivial" => return Ok(TwoCocycle::Trivial),
        "pauli" => {
            let rank = rank.filter(|&r| r >= 2).ok_or_else(|| {
                usage("pauli cocycle needs a product of at least two cyclic factors")
            })?;
            TwoCocycle::Bicharacter {
                matrix: pauli_matrix(rank),
                root_order: 2,
            }
        }
        "bicharacter" => {
            let rank =
                rank.ok_or_else(|| usage("bicharacter cocycle needs a product of cyclic groups"))?;
            let (matrix, root_order) =
                bicharacter.ok_or_else(|| usage("bicharacter needs a matrix and a root order"))?;
            if matrix.len() != rank || matrix.iter().any(|r| r.len() != rank) {
                return Err(usage(format!("bicharacter matrix must be {rank}x{rank}")));
            }
            if root_order == 0 {
                return Err(usage("root order must be positive"));
            }
            TwoCocycle::Bicharacter { matrix, root_order }
        }
        other => return Err(usage(format!("unknown cocycle '{other}'"))),
    };
    let probe = TwistedSystem::new(
        group.clone(),
        CoeffAlgebra::scalars(),
        Action::Trivial,
        cocycle.clone(),
    )?;
    match probe.report().first_failure() {
        None => Ok(cocycle),
        Some(c) => Err(usage(format!("builtin cocycle fails {}", c.name))),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Trivial,
    /// Finite groups: `α_g` for every element in index order.
    PerElement(Vec<AlgebraAutomorphism>),
    /// Free groups: `α` on each generator, extended multiplicatively.
    PerGenerator(Vec<AlgebraAutomorphism>),
}

impl Action {
    /// Extends generator images to all of a finite group. Fails when the
    /// assignment does not define a homomorphism.
    pub fn from_finite_generators(
        group: &Group,
        alg: &CoeffAlgebra,
        gens: &[(usize, AlgebraAutomorphism)],
    ) -> Result<Self> {
        let t = group
            .as_finite()
            .ok_or_else(|| usage("per-element actions need a finite group"))?;
        let mut table: Vec<Option<AlgebraAutomorphism>> = vec![None; t.order()];
        table[t.identity()] = Some(AlgebraAutomorphism::identity(alg));
        let mut queue = VecDeque::from([t.identity()]);
        while let Some(g) = queue.pop_front() {
            for (s, a) in gens {
                if *s >= t.order() {
                    return Err(usage(format!("generator index {s} out of range")));
                }
                let sg = t.mul(*s, g);
                let img = a.compose(table[g].as_ref().unwrap());
                match &table[sg] {
                    Some(prev) if prev.distance(&img) > AXIOM_TOL => {
                        return Err(usage(format!(
                            "action generators do not define a homomorphism (conflict at {})",
                            t.label(sg)
                        )));
                    }
                    Some(_) => {}
                    None => {
                        table[sg] = Some(img);
                        queue.push_back(sg);
                    }
                }
            }
        }
        if table.iter().any(Option::is_none) {
            return Err(usage("action generators do not generate the group"));
        }
        Ok(Action::PerElement(
            table.into_iter().map(Option::unwrap).collect(),
        ))
    }
}

/// Outcome of one axiom over the checked sample.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxiomCheck {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub exhaustive: bool,
    pub max_defect: f64,
    /// Group elements of the first failing case.
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `Σ = (A, G, α, σ)` together with the report of its last validation.
#[derive(Clone, Debug)]
pub struct TwistedSystem {
    group: Group,
    algebra: CoeffAlgebra,
    action: Action,
    cocycle: TwoCocycle,
    report: ValidationReport,
}

impl TwistedSystem {
    /// Checks shapes and runs [`validate_system`] at the default radius.
    /// Axiom failures do not make this fail; inspect [`Self::report`].
    pub fn new(
        group: Group,
        algebra: CoeffAlgebra,
        action: Action,
        cocycle: TwoCocycle,
    ) -> Result<Self> {
        match (&group, &action) {
            (_, Action::Trivial) => {}
            (Group::Finite(t), Action::PerElement(v)) if v.len() == t.order() => {}
            (Group::Free { rank }, Action::PerGenerator(v)) if v.len() == *rank as usize => {}
            _ => return Err(usage("action does not match the group")),
        }
        let autos = match &action {
            Action::Trivial => &[][..],
            Action::PerElement(v) | Action::PerGenerator(v) => &v[..],
        };
        if autos.iter().any(|a| a.num_blocks() != algebra.num_blocks()) {
            return Err(usage("action does not match the algebra"));
        }
        match (&group, &cocycle) {
            (_, TwoCocycle::Trivial) => {}
            (Group::Finite(t), TwoCocycle::Table { entries }) => {
                for (&(g, h), v) in entries {
                    if g >= t.order() || h >= t.order() {
                        return Err(usage("cocycle table index out of range"));
                    }
                    if v.len() != 1 && v.len() != algebra.num_blocks() {
                        return Err(usage(
                            "cocycle value must be a scalar or one phase per block",
                        ));
                    }
                }
            }
            (Group::Free { .. }, TwoCocycle::Table { .. }) => {
                return Err(Error::Unsupported("table cocycles on free groups".into()))
            }
            (_, TwoCocycle::Bicharacter { matrix, root_order }) => {
                let probe =
                    TwoCocycle::coordinates(&group, &group.identity()).ok_or_else(|| {
                        usage(
                            "bicharacter cocycle needs a product of cyclic groups or a free group",
                        )
                    })?;
                let r = probe.len();
                if *root_order == 0 || matrix.len() != r || matrix.iter().any(|row| row.len() != r)
                {
                    return Err(usage(format!(
                        "bicharacter needs an {r}x{r} matrix and positive root order"
                    )));
                }
            }
        }
        let mut sys = Self {
            group,
            algebra,
            action,
            cocycle,
            report: ValidationReport::default(),
        };
        sys.report = validate_system(&sys, DEFAULT_SAMPLE_RADIUS);
        Ok(sys)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn algebra(&self) -> &CoeffAlgebra {
        &self.algebra
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn cocycle(&self) -> &TwoCocycle {
        &self.cocycle
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_valid(&self) -> bool {
        self.report.passed()
    }

    pub fn has_trivial_action(&self) -> bool {
        match &self.action {
            Action::Trivial => true,
            Action::PerElement(v) | Action::PerGenerator(v) => v.iter().all(|a| a.is_identity(0.0)),
        }
    }

    pub fn has_trivial_cocycle(&self) -> bool {
        self.cocycle.is_trivial()
    }

    /// `α_g`.
    pub fn alpha(&self, g: &GroupElement) -> AlgebraAutomorphism {
        match (&self.action, g) {
            (Action::Trivial, _) => AlgebraAutomorphism::identity(&self.algebra),
            (Action::PerElement(v), GroupElement::Finite(i)) => v[*i].clone(),
            (Action::PerGenerator(v), GroupElement::Free(w)) => {
                let mut out = AlgebraAutomorphism::identity(&self.algebra);
                for &(s, e) in w.blocks() {
                    let step = if e > 0 {
                        v[s as usize].clone()
                    } else {
                        v[s as usize].inverse()
                    };
                    for _ in 0..e.unsigned_abs() {
                        out = out.compose(&step);
                    }
                }
                out
            }
            _ => panic!("group element {g} does not match the action"),
        }
    }

    /// `α_g(a)`, skipping work for trivial actions.
    pub fn apply_alpha(&self, g: &GroupElement, a: &AlgebraElement) -> AlgebraElement {
        if matches!(self.action, Action::Trivial) {
            a.clone()
        } else {
            self.alpha(g).apply(a)
        }
    }

    /// `σ(g,h)` as one phase per block.
    pub fn sigma(&self, g: &GroupElement, h: &GroupElement) -> Vec<C64> {
        let b = self.algebra.num_blocks();
        match &self.cocycle {
            TwoCocycle::Trivial => vec![ONE; b],
            TwoCocycle::Table { entries } => {
                let key = (g.as_index().unwrap(), h.as_index().unwrap());
                match entries.get(&key) {
                    None => vec![ONE; b],
                    Some(v) if v.len() == 1 => vec![v[0]; b],
                    Some(v) => v.clone(),
                }
            }
            TwoCocycle::Bicharacter { matrix, root_order } => {
                vec![self.bicharacter(matrix, *root_order, g, h); b]
            }
        }
    }

    /// `σ(g,h)` when it is a scalar (always the case for trivial and
    /// bicharacter cocycles).
    pub fn sigma_scalar(&self, g: &GroupElement, h: &GroupElement) -> Option<C64> {
        match &self.cocycle {
            TwoCocycle::Trivial => Some(ONE),
            TwoCocycle::Bicharacter { matrix, root_order } => {
                Some(self.bicharacter(matrix, *root_order, g, h))
            }
            TwoCocycle::Table { .. } => {
                let v = self.sigma(g, h);
                v.iter().all(|&z| z == v[0]).then(|| v[0])
            }
        }
    }

    fn bicharacter(&self, q: &[Vec<i64>], m: u32, g: &GroupElement, h: &GroupElement) -> C64 {
        let x = TwoCocycle::coordinates(&self.group, g).unwrap();
        let y = TwoCocycle::coordinates(&self.group, h).unwrap();
        let mut s: i64 = 0;
        for (i, row) in q.iter().enumerate() {
            for (j, &qij) in row.iter().enumerate() {
                if qij != 0 {
                    s = (s + (x[i] * qij % m as i64) * y[j]).rem_euclid(m as i64);
                }
            }
        }
        root_of_unity(s, m)
    }

    /// `σ(g,h)·a` for central `σ`.
    pub fn twist(&self, a: &AlgebraElement, g: &GroupElement, h: &GroupElement) -> AlgebraElement {
        match self.sigma_scalar(g, h) {
            Some(z) if z == ONE => a.clone(),
            Some(z) => a.scale(z),
            None => a.scale_blocks(&self.sigma(g, h)),
        }
    }

    fn sigma_element(&self, g: &GroupElement, h: &GroupElement) -> AlgebraElement {
        AlgebraElement::central(&self.algebra, &self.sigma(g, h))
    }
}

/// `exp(2πi·s/m)`, exact at quarter turns.
pub fn root_of_unity(s: i64, m: u32) -> C64 {
    let s = s.rem_euclid(m as i64);
    if (4 * s) % m as i64 == 0 {
        return match 4 * s / m as i64 {
            0 => ONE,
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let t = 2.0 * PI * s as f64 / m as f64;
    C64::new(t.cos(), t.sin())
}

struct Checker {
    check: AxiomCheck,
}

impl Checker {
    fn new(name: &str, exhaustive: bool) -> Self {
        Self {
            check: AxiomCheck {
                name: name.to_string(),
                passed: true,
                cases: 0,
                exhaustive,
                max_defect: 0.0,
                witness: None,
            },
        }
    }

    fn record(&mut self, defect: f64, witness: &[&GroupElement]) {
        let c = &mut self.check;
        c.cases += 1;
        let defect = if defect.is_nan() {
            f64::INFINITY
        } else {
            defect
        };
        if defect > c.max_defect {
            c.max_defect = defect;
        }
        if defect > AXIOM_TOL && c.passed {
            c.passed = false;
            c.witness = Some(witness.iter().map(|g| g.to_string()).collect());
        }
    }
}

/// Checks every axiom and derived identity of a twisted system.
///
/// Finite groups of order at most [`EXHAUSTIVE_TRIPLE_ORDER`] are checked on
/// all pairs and triples; free groups (and larger finite groups) on a seeded
/// sample from `ball(sample_radius)`. Derived identities are evaluated
/// directly rather than inferred from the axioms.
pub fn validate_system(sys: &TwistedSystem, sample_radius: i64) -> ValidationReport {
    let group = &sys.group;
    let alg = &sys.algebra;
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
    let ball = match group {
        Group::Finite(_) => group.elements().unwrap(),
        Group::Free { .. } => group
            .ball(sample_radius.max(0))
            .unwrap_or_else(|_| group.ball(1).unwrap()),
    };
    let exhaustive = matches!(group, Group::Finite(t) if t.order() <= EXHAUSTIVE_TRIPLE_ORDER);
    let pick = |rng: &mut ChaCha8Rng| ball.choose(rng).unwrap().clone();
    let pairs: Vec<(GroupElement, GroupElement)> = if exhaustive {
        ball.iter()
            .flat_map(|g| ball.iter().map(move |h| (g.clone(), h.clone())))
            .collect()
    } else {
        (0..SAMPLED_TRIPLES)
            .map(|_| (pick(&mut rng), pick(&mut rng)))
            .collect()
    };
    let triples: Vec<[GroupElement; 3]> = if exhaustive {
        pairs
            .iter()
            .flat_map(|(g, h)| ball.iter().map(move |k| [g.clone(), h.clone(), k.clone()]))
            .collect()
    } else {
        (0..SAMPLED_TRIPLES)
            .map(|_| [pick(&mut rng), pick(&mut rng), pick(&mut rng)])
            .collect()
    };
    let basis = alg.basis();
    let e = group.identity();
    let one = AlgebraElement::one(alg);

    let mut unit = Checker::new("cocycle values unitary", exhaustive);
    for (g, h) in &pairs {
        let d = sys
            .sigma(g, h)
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        unit.record(d, &[g, h]);
    }

    let mut norm = Checker::new("normalization σ(g,e) = σ(e,g) = 1", exhaustive);
    for g in &ball {
        let d = sys.sigma_element(g, &e).distance(&one) + sys.sigma_element(&e, g).distance(&one);
        norm.record(d, &[g]);
    }

    let mut cocycle = Checker::new("cocycle identity", exhaustive);
    for [g, h, k] in &triples {
        let gh = group.mul_unchecked(g, h);
        let hk = group.mul_unchecked(h, k);
        let lhs = sys.sigma_element(g, h).mul(&sys.sigma_element(&gh, k));
        let rhs = sys
            .apply_alpha(g, &sys.sigma_element(h, k))
            .mul(&sys.sigma_element(g, &hk));
        cocycle.record(lhs.distance(&rhs), &[g, h, k]);
    }

    let mut twisted = Checker::new("twisted action α_g∘α_h = Ad(σ(g,h))∘α_gh", exhaustive);
    for (g, h) in &pairs {
        let (ag, ah) = (sys.alpha(g), sys.alpha(h));
        let agh = sys.alpha(&group.mul_unchecked(g, h));
        let s = sys.sigma_element(g, h);
        let d = basis
            .iter()
            .map(|a| {
                let lhs = ag.apply(&ah.apply(a));
                let rhs = s.mul(&agh.apply(a)).mul(&s.adjoint());
                lhs.distance(&rhs)
            })
            .fold(0.0, f64::max);
        twisted.record(d, &[g, h]);
    }

    let mut alpha_e = Checker::new("α_e = id", true);
    let ae = sys.alpha(&e);
    alpha_e.record(
        basis
            .iter()
            .map(|a| ae.apply(a).distance(a))
            .fold(0.0, f64::max),
        &[&e],
    );

    let mut inv_sigma = Checker::new("σ(g,g⁻¹) = α_g(σ(g⁻¹,g))", exhaustive);
    let mut inv_alpha = Checker::new("α_g⁻¹ = α_{g⁻¹}∘Ad(σ(g,g⁻¹)*)", exhaustive);
    let mut central = Checker::new("cocycle values commute with A", exhaustive);
    for g in &ball {
        let gi = group.inv_unchecked(g);
        let s = sys.sigma_element(g, &gi);
        let rhs = sys.apply_alpha(g, &sys.sigma_element(&gi, g));
        inv_sigma.record(s.distance(&rhs), &[g]);
        let (ag, agi) = (sys.alpha(g), sys.alpha(&gi));
        let d = basis
            .iter()
            .map(|a| {
                let pre = agi.apply(&s.adjoint().mul(a).mul(&s));
                ag.apply(&pre).distance(a)
            })
            .fold(0.0, f64::max);
        inv_alpha.record(d, &[g]);
    }
    for (g, h) in &pairs {
        let s = sys.sigma_element(g, h);
        let d = basis
            .iter()
            .map(|a| s.mul(a).distance(&a.mul(&s)))
            .fold(0.0, f64::max);
        central.record(d, &[g, h]);
    }

    ValidationReport {
        checks: [
            unit, norm, cocycle, twisted, alpha_e, inv_sigma, inv_alpha, central,
        ]
        .into_iter()
        .map(|c| c.check)
        .collect(),
    }
}
