//! Combinatorial certificates for free groups: prefix sets, Powers triples
//! `(h_j, T_j)` and `(P_com)` data `(U, D_k, g₀)`, plus ball falsifiers that
//! work for any group.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{usage, Error, Result};
use crate::group::{Group, GroupElement, Letter, Word, DEFAULT_BALL_CAP};

/// Default number of conjugators in a Powers triple.
pub const DEFAULT_TRIPLE_SIZE: usize = 3;

/// `{w : w begins with some prefix} ∪ extra`, or its complement.
///
/// Prefixes are matched letter by letter on reduced words; `extra` holds
/// explicit elements (the only part that applies to finite groups).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PrefixSet {
    pub prefixes: Vec<Word>,
    pub extra: BTreeSet<GroupElement>,
    pub complement: bool,
}

impl PrefixSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn everything() -> Self {
        Self {
            complement: true,
            ..Self::default()
        }
    }

    pub fn prefixes(prefixes: impl IntoIterator<Item = Word>) -> Self {
        Self {
            prefixes: prefixes.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn elements(extra: impl IntoIterator<Item = GroupElement>) -> Self {
        Self {
            extra: extra.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn complemented(&self) -> Self {
        Self {
            complement: !self.complement,
            ..self.clone()
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        let base = self.extra.contains(g)
            || g.as_word()
                .is_some_and(|w| self.prefixes.iter().any(|p| w.starts_with(p)));
        base != self.complement
    }

    fn max_prefix_len(&self) -> usize {
        self.prefixes.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Symbolic disjointness test in `F_rank`. Returns `None` when an explicit
    /// element is not a word (finite groups: use [`Self::disjoint_on`]).
    pub fn disjoint(&self, other: &Self, rank: u32) -> Option<bool> {
        if self
            .extra
            .iter()
            .chain(&other.extra)
            .any(|g| g.as_word().is_none())
        {
            return None;
        }
        let (a, b) = (self, other);
        Some(match (a.complement, b.complement) {
            (false, false) => {
                let cones = a.prefixes.iter().any(|p| {
                    b.prefixes
                        .iter()
                        .any(|q| p.starts_with(q) || q.starts_with(p))
                });
                !cones
                    && !a.extra.iter().any(|g| b.contains(g))
                    && !b.extra.iter().any(|g| a.contains(g))
            }
            (true, false) => b.subset_of_base(a, rank),
            (false, true) => a.subset_of_base(b, rank),
            (true, true) => {
                let union = PrefixSet {
                    prefixes: a.prefixes.iter().chain(&b.prefixes).cloned().collect(),
                    extra: a.extra.union(&b.extra).cloned().collect(),
                    complement: false,
                };
                let depth = union.max_prefix_len();
                union.covers(&Word::identity(), rank, depth)
            }
        })
    }

    /// For plain `self`: is it inside the un-complemented part of `other`?
    fn subset_of_base(&self, other: &Self, rank: u32) -> bool {
        let base = PrefixSet {
            complement: false,
            ..other.clone()
        };
        let depth = base.max_prefix_len();
        self.extra.iter().all(|g| base.contains(g))
            && self.prefixes.iter().all(|p| base.covers(p, rank, depth))
    }

    /// Does this (plain) set contain every reduced word beginning with `q`?
    fn covers(&self, q: &Word, rank: u32, depth: usize) -> bool {
        if self.prefixes.iter().any(|p| q.starts_with(p)) {
            return true;
        }
        // Beyond the longest prefix only whole cones can cover, and none did.
        if q.len() > depth || !self.extra.contains(&GroupElement::Free(q.clone())) {
            return false;
        }
        letters(rank)
            .filter_map(|l| q.extend_reduced(l))
            .all(|w| self.covers(&w, rank, depth))
    }

    /// Disjointness by enumeration over a finite list of elements.
    pub fn disjoint_on<'a>(
        &self,
        other: &Self,
        elements: impl IntoIterator<Item = &'a GroupElement>,
    ) -> bool {
        elements
            .into_iter()
            .all(|g| !(self.contains(g) && other.contains(g)))
    }
}

fn letters(rank: u32) -> impl Iterator<Item = Letter> {
    (0..rank).flat_map(|g| {
        [false, true].map(|inverse| Letter {
            generator: g,
            inverse,
        })
    })
}

impl fmt::Display for PrefixSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.prefixes.iter().map(|p| format!("{p}…")).collect();
        parts.extend(self.extra.iter().map(|g| format!("{g}")));
        let body = if parts.is_empty() {
            String::from("∅")
        } else {
            parts.join(" ∪ ")
        };
        if self.complement {
            write!(f, "G∖({body})")
        } else {
            write!(f, "{body}")
        }
    }
}

/// Outcome of a ball falsifier.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Pass,
    Counterexample {
        condition: String,
        witness: Vec<GroupElement>,
    },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn fail(condition: &str, witness: Vec<GroupElement>) -> Self {
        Verdict::Counterexample {
            condition: condition.into(),
            witness,
        }
    }
}

/// Checks `m·w ∈ T` for every `m ∈ M` and `w ∈ ball(R)∖T`. A pass does not
/// prove largeness; a counterexample refutes it.
pub fn verify_largeness(
    group: &Group,
    t: &PrefixSet,
    m: &[GroupElement],
    radius: i64,
) -> Result<Verdict> {
    for w in group.ball_with_cap(radius, DEFAULT_BALL_CAP)? {
        if t.contains(&w) {
            continue;
        }
        for g in m {
            if !t.contains(&group.mul(g, &w)?) {
                return Ok(Verdict::fail("largeness", vec![g.clone(), w]));
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Conjugators `h_j` and pairwise disjoint `T_j` with `T_j` being
/// `h_j S h_j⁻¹`-large for `S = F ∪ F⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowersTriple {
    pub conjugators: Vec<GroupElement>,
    pub sets: Vec<PrefixSet>,
    pub target: Vec<GroupElement>,
}

fn free_rank_at_least_two(group: &Group) -> Result<u32> {
    match group {
        Group::Free { rank } if *rank >= 2 => Ok(*rank),
        Group::Free { .. } => Err(Error::Unsupported(
            "certificates need a free group of rank at least 2".into(),
        )),
        Group::Finite(_) => Err(Error::Unsupported(
            "certificates are only constructed for free groups; supply one for this group".into(),
        )),
    }
}

/// `F` as words, rejecting `e` and foreign elements; returns the words and `L`.
fn target_words(group: &Group, f: &[GroupElement]) -> Result<(Vec<Word>, usize)> {
    if f.is_empty() {
        return Err(usage("the target set F must be non-empty"));
    }
    let mut words = Vec::with_capacity(f.len());
    for g in f {
        if !group.contains(g) {
            return Err(usage(format!("{g} is not in the group")));
        }
        let w = g.as_word().unwrap();
        if w.is_identity() {
            return Err(usage("the target set F must not contain e"));
        }
        words.push(w.clone());
    }
    let l = words.iter().map(Word::len).max().unwrap();
    Ok((words, l))
}

fn is_a_letter(l: Option<Letter>) -> bool {
    l.is_some_and(|l| l.generator == 0)
}

/// `a^{L+1} f a^{-(L+1)}` begins and ends with `a^{±1}` for every `|f| ≤ L`.
fn conjugate_into_a_letters(words: &[Word], l: usize) -> Result<(Word, Vec<Word>)> {
    let c = Word::power(0, l as i64 + 1);
    let out: Vec<Word> = words.iter().map(|w| w.conjugate_by(&c)).collect();
    for w in &out {
        if !is_a_letter(w.first_letter()) || !is_a_letter(w.last_letter()) {
            return Err(Error::Indeterminate(format!(
                "conjugate {w} does not start and end in a-letters"
            )));
        }
    }
    Ok((c, out))
}

/// `h_j = bʲ a^{L+1}`, `T_j = {words beginning bʲa or bʲa⁻¹}`, `j = 1..N`.
///
/// For `s ∈ S` the conjugate `a^{L+1}s a^{-(L+1)}` starts and ends in
/// `a`-letters, so `h_j s h_j⁻¹ = bʲ c b⁻ʲ` sends every word outside `T_j`
/// into `T_j`. The constructor re-checks this letter condition.
pub fn construct_powers_triple(
    group: &Group,
    f: &[GroupElement],
    n: usize,
) -> Result<PowersTriple> {
    let rank = free_rank_at_least_two(group)?;
    if n == 0 {
        return Err(usage("a Powers triple needs at least one conjugator"));
    }
    let (words, l) = target_words(group, f)?;
    let sym: Vec<Word> = words
        .iter()
        .flat_map(|w| [w.clone(), w.inverse()])
        .collect();
    let (c, _) = conjugate_into_a_letters(&sym, l)?;
    let conjugators: Vec<GroupElement> = (1..=n as i64)
        .map(|j| GroupElement::Free(Word::power(1, j).mul(&c)))
        .collect();
    let sets: Vec<PrefixSet> = (1..=n as i64)
        .map(|j| {
            let bj = Word::power(1, j);
            PrefixSet::prefixes([bj.mul(&Word::power(0, 1)), bj.mul(&Word::power(0, -1))])
        })
        .collect();
    for i in 0..n {
        for k in i + 1..n {
            if sets[i].disjoint(&sets[k], rank) != Some(true) {
                return Err(Error::Indeterminate(
                    "constructed sets are not disjoint".into(),
                ));
            }
        }
    }
    Ok(PowersTriple {
        conjugators,
        sets,
        target: f.to_vec(),
    })
}

/// Ball falsifier for a triple: pairwise disjointness and largeness of each
/// `T_j` with respect to `h_j S h_j⁻¹`.
pub fn verify_powers_triple(group: &Group, triple: &PowersTriple, radius: i64) -> Result<Verdict> {
    let ball = group.ball_with_cap(radius, DEFAULT_BALL_CAP)?;
    let n = triple.sets.len();
    for i in 0..n {
        for k in i + 1..n {
            if let Some(g) = ball
                .iter()
                .find(|g| triple.sets[i].contains(g) && triple.sets[k].contains(g))
            {
                return Ok(Verdict::fail("disjointness", vec![g.clone()]));
            }
        }
    }
    let sym: Vec<GroupElement> = triple
        .target
        .iter()
        .flat_map(|g| [g.clone(), group.inv(g).unwrap()])
        .collect();
    for (h, t) in triple.conjugators.iter().zip(&triple.sets) {
        let hi = group.inv(h)?;
        let m: Vec<GroupElement> = sym
            .iter()
            .map(|s| group.mul(&group.mul(h, s).unwrap(), &hi).unwrap())
            .collect();
        let v = verify_largeness(group, t, &m, radius)?;
        if !v.passed() {
            return Ok(v);
        }
    }
    Ok(Verdict::Pass)
}

/// Data `(g₀, U, D_1..D_n)` for the target `F`. `conjugator` is the element
/// `c` such that the certificate applies to `cFc⁻¹`; the caller conjugates
/// elements by `λ(c)` before averaging.
#[derive(Clone, Debug, PartialEq)]
pub struct PcomCertificate {
    pub g0: GroupElement,
    pub u: PrefixSet,
    pub ds: Vec<PrefixSet>,
    pub target: Vec<GroupElement>,
    pub conjugator: GroupElement,
}

/// `U = prefix(b^{±1})`, `D₁ = G∖U`, `g₀ = b`, `n = 1`, for `F` conjugated by
/// `a^{L+1}`. Conditions: a conjugated `f` starts and ends in `a`-letters so
/// `fU` starts with an `a`-letter; `b⁻ʲD₁` starts with `b⁻¹`.
pub fn construct_pcom(group: &Group, f: &[GroupElement]) -> Result<PcomCertificate> {
    free_rank_at_least_two(group)?;
    let (words, l) = target_words(group, f)?;
    let (c, conj) = conjugate_into_a_letters(&words, l)?;
    let u = PrefixSet::prefixes([Word::power(1, 1), Word::power(1, -1)]);
    Ok(PcomCertificate {
        g0: GroupElement::Free(Word::generator(1)),
        ds: vec![u.complemented()],
        u,
        target: conj.into_iter().map(GroupElement::Free).collect(),
        conjugator: GroupElement::Free(c),
    })
}

/// Checks (i) `G∖U ⊆ ∪D_k`, (ii) `gU ∩ U = ∅` for `g ∈ F` and
/// (iii) `g₀⁻ʲD_k ∩ D_k = ∅` for `1 ≤ j ≤ j_max`, all on `ball(R)`.
pub fn verify_pcom(
    group: &Group,
    cert: &PcomCertificate,
    f: &[GroupElement],
    radius: i64,
    j_max: i64,
) -> Result<Verdict> {
    let ball = group.ball_with_cap(radius, DEFAULT_BALL_CAP)?;
    for w in &ball {
        if !cert.u.contains(w) && !cert.ds.iter().any(|d| d.contains(w)) {
            return Ok(Verdict::fail("(i) covering", vec![w.clone()]));
        }
    }
    for g in f {
        for w in ball.iter().filter(|w| cert.u.contains(w)) {
            if cert.u.contains(&group.mul(g, w)?) {
                return Ok(Verdict::fail(
                    "(ii) displacement",
                    vec![g.clone(), w.clone()],
                ));
            }
        }
    }
    let g0i = group.inv(&cert.g0)?;
    let mut power = group.identity();
    for _ in 1..=j_max {
        power = group.mul(&g0i, &power)?;
        for d in &cert.ds {
            for w in ball.iter().filter(|w| d.contains(w)) {
                if d.contains(&group.mul(&power, w)?) {
                    return Ok(Verdict::fail(
                        "(iii) power displacement",
                        vec![power.clone(), w.clone()],
                    ));
                }
            }
        }
    }
    Ok(Verdict::Pass)
}
