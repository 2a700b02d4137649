//! Discrete groups: finite groups given by a multiplication table and free
//! groups `F_k` with elements stored as reduced exponent-block words.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Error, Result};

/// Default cap on the number of elements a ball enumeration may produce.
pub const DEFAULT_BALL_CAP: usize = 3_000_000;

/// Largest order for which the group laws are checked exhaustively.
pub const EXHAUSTIVE_LAW_LIMIT: usize = 512;

/// A single signed letter `s^{±1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: u32,
    pub inverse: bool,
}

impl Letter {
    /// Position in the alphabet order `a, a⁻¹, b, b⁻¹, ...`.
    fn rank(self) -> u64 {
        2 * self.generator as u64 + self.inverse as u64
    }
}

/// Reduced word in a free group, stored as exponent blocks `(generator, exponent)`
/// with no zero exponents and no two adjacent blocks on the same generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    blocks: Vec<(u32, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(g: u32) -> Self {
        Self::power(g, 1)
    }

    pub fn power(g: u32, exp: i64) -> Self {
        if exp == 0 {
            Self::identity()
        } else {
            Self {
                blocks: vec![(g, exp)],
            }
        }
    }

    /// Builds a word from arbitrary (possibly unreduced) blocks.
    pub fn from_blocks(blocks: impl IntoIterator<Item = (u32, i64)>) -> Self {
        let mut w = Self::identity();
        for (g, e) in blocks {
            w.push_block(g, e);
        }
        w
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        Self::from_blocks(
            letters
                .into_iter()
                .map(|l| (l.generator, if l.inverse { -1 } else { 1 })),
        )
    }

    fn push_block(&mut self, g: u32, e: i64) {
        if e == 0 {
            return;
        }
        match self.blocks.last_mut() {
            Some(last) if last.0 == g => {
                last.1 += e;
                if last.1 == 0 {
                    self.blocks.pop();
                }
            }
            _ => self.blocks.push((g, e)),
        }
    }

    pub fn blocks(&self) -> &[(u32, i64)] {
        &self.blocks
    }

    /// Word length in the free generators.
    pub fn len(&self) -> usize {
        self.blocks
            .iter()
            .map(|&(_, e)| e.unsigned_abs() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn max_generator(&self) -> Option<u32> {
        self.blocks.iter().map(|&(g, _)| g).max()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.blocks.iter().flat_map(|&(g, e)| {
            core::iter::repeat_n(
                Letter {
                    generator: g,
                    inverse: e < 0,
                },
                e.unsigned_abs() as usize,
            )
        })
    }

    pub fn first_letter(&self) -> Option<Letter> {
        self.blocks.first().map(|&(g, e)| Letter {
            generator: g,
            inverse: e < 0,
        })
    }

    pub fn last_letter(&self) -> Option<Letter> {
        self.blocks.last().map(|&(g, e)| Letter {
            generator: g,
            inverse: e < 0,
        })
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        let mut out = self.clone();
        let mut i = 0;
        // Only the junction can cancel; once a block survives the rest is reduced.
        while let Some(&(g, e)) = rhs.blocks.get(i) {
            match out.blocks.last_mut() {
                Some(last) if last.0 == g => {
                    last.1 += e;
                    i += 1;
                    if last.1 != 0 {
                        break;
                    }
                    out.blocks.pop();
                }
                _ => break,
            }
        }
        out.blocks.extend_from_slice(&rhs.blocks[i..]);
        out
    }

    pub fn inverse(&self) -> Word {
        Word {
            blocks: self.blocks.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `h · self · h⁻¹`.
    pub fn conjugate_by(&self, h: &Word) -> Word {
        h.mul(self).mul(&h.inverse())
    }

    /// Letter-level prefix test: does `self` begin with the letters of `prefix`?
    pub fn starts_with(&self, prefix: &Word) -> bool {
        let n = prefix.blocks.len();
        if n == 0 {
            return true;
        }
        if self.blocks.len() < n {
            return false;
        }
        if self.blocks[..n - 1] != prefix.blocks[..n - 1] {
            return false;
        }
        let (pg, pe) = prefix.blocks[n - 1];
        let (g, e) = self.blocks[n - 1];
        g == pg && e.signum() == pe.signum() && e.abs() >= pe.abs()
    }

    /// Appends one letter; returns `None` when it would cancel the last letter.
    pub fn extend_reduced(&self, l: Letter) -> Option<Word> {
        if let Some(last) = self.last_letter() {
            if last.generator == l.generator && last.inverse != l.inverse {
                return None;
            }
        }
        let mut w = self.clone();
        w.push_block(l.generator, if l.inverse { -1 } else { 1 });
        Some(w)
    }

    /// Exponent sum per generator (image in the abelianisation `Z^rank`).
    pub fn abelianization(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for &(g, e) in &self.blocks {
            v[g as usize] += e;
        }
        v
    }

    /// Parses the text form used by the description files, e.g. `"a^2 b^-1 a"`.
    /// `"e"`, `"1"` and the empty string denote the identity.
    pub fn parse(s: &str) -> Result<Word> {
        let mut blocks = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "e" || tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>()
                        .map_err(|_| usage(format!("bad exponent in '{tok}'")))?,
                ),
                None => (tok, 1),
            };
            let g =
                generator_index(name).ok_or_else(|| usage(format!("unknown letter '{name}'")))?;
            blocks.push((g, exp));
        }
        Ok(Word::from_blocks(blocks))
    }
}

const ALPHABET: &[u8] = b"abcdfghijklmnopqrstuvwxyz";

/// Display name of generator `g`: `a, b, c, d, f, ...` (`e` is reserved for
/// the identity), then `[25], [26], ...`.
pub fn generator_name(g: u32) -> String {
    match ALPHABET.get(g as usize) {
        Some(&c) => (c as char).to_string(),
        None => format!("[{g}]"),
    }
}

fn generator_index(name: &str) -> Option<u32> {
    if let Some(inner) = name.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        return inner.parse().ok();
    }
    let mut chars = name.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    ALPHABET
        .iter()
        .position(|&x| x as char == c)
        .map(|p| p as u32)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return f.write_str("e");
        }
        for (i, &(g, e)) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&generator_name(g))?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Shortlex: shorter words first, then letter by letter in the order
/// `a < a⁻¹ < b < b⁻¹ < ...`.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            self.letters()
                .map(Letter::rank)
                .cmp(other.letters().map(Letter::rank))
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
    identity: usize,
    labels: Vec<String>,
    cyclic_factors: Option<Vec<u32>>,
    exhaustively_checked: bool,
}

impl FiniteGroup {
    /// Validates and wraps a multiplication table (`table[g][h] = gh`).
    ///
    /// Orders up to [`EXHAUSTIVE_LAW_LIMIT`] get an exhaustive associativity
    /// scan; larger tables are checked on a fixed-seed sample of triples.
    pub fn from_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(usage("empty multiplication table"));
        }
        if table.iter().any(|row| row.len() != n) {
            return Err(usage("multiplication table is not square"));
        }
        if table.iter().flatten().any(|&v| v >= n) {
            return Err(usage("multiplication table entry out of range"));
        }
        let flat: Vec<usize> = table.into_iter().flatten().collect();
        let at = |g: usize, h: usize| flat[g * n + h];
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| usage("multiplication table has no two-sided identity"))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or_else(|| usage(format!("element {g} has no two-sided inverse")))?;
        }
        let exhaustive = n <= EXHAUSTIVE_LAW_LIMIT;
        let assoc = |g: usize, h: usize, k: usize| at(at(g, h), k) == at(g, at(h, k));
        if exhaustive {
            for g in 0..n {
                for h in 0..n {
                    for k in 0..n {
                        if !assoc(g, h, k) {
                            return Err(usage(format!("associativity fails at ({g}, {h}, {k})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..200_000 {
                let (g, h, k) = (
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                );
                if !assoc(g, h, k) {
                    return Err(usage(format!("associativity fails at ({g}, {h}, {k})")));
                }
            }
        }
        let labels = match labels {
            Some(l) if l.len() == n => l,
            Some(_) => return Err(usage("label count does not match group order")),
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(Self {
            order: n,
            table: flat,
            inverse,
            identity,
            labels,
            cyclic_factors: None,
            exhaustively_checked: exhaustive,
        })
    }

    /// `Z_{n_1} × ... × Z_{n_k}` with mixed-radix indices (first factor most significant).
    pub fn cyclic_product(factors: &[u32]) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(usage("cyclic factors must be positive"));
        }
        let n: usize = factors.iter().map(|&f| f as usize).product();
        let digits = |mut i: usize| {
            let mut d = vec![0u32; factors.len()];
            for (slot, &f) in d.iter_mut().zip(factors).rev() {
                *slot = (i % f as usize) as u32;
                i /= f as usize;
            }
            d
        };
        let index = |d: &[u32]| {
            d.iter()
                .zip(factors)
                .fold(0usize, |acc, (&x, &f)| acc * f as usize + x as usize)
        };
        let table = (0..n)
            .map(|g| {
                let dg = digits(g);
                (0..n)
                    .map(|h| {
                        let dh = digits(h);
                        let s: Vec<u32> = dg
                            .iter()
                            .zip(&dh)
                            .zip(factors)
                            .map(|((&x, &y), &f)| (x + y) % f)
                            .collect();
                        index(&s)
                    })
                    .collect()
            })
            .collect();
        let labels = (0..n)
            .map(|g| {
                let d = digits(g);
                if d.len() == 1 {
                    d[0].to_string()
                } else {
                    let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
                    format!("({})", parts.join(","))
                }
            })
            .collect();
        let mut g = Self::from_table(table, Some(labels))?;
        g.cyclic_factors = Some(factors.to_vec());
        Ok(g)
    }

    pub fn cyclic(n: u32) -> Result<Self> {
        Self::cyclic_product(&[n])
    }

    /// Symmetric group on `{0, ..., n-1}`; elements in lexicographic order of
    /// their one-line notation, product `(στ)(x) = σ(τ(x))`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(usage("symmetric group degree must be in 1..=6"));
        }
        let perms = permutations(n);
        let pos = |p: &[usize]| perms.iter().position(|q| q.as_slice() == p).unwrap();
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| {
                        let st: Vec<usize> = t.iter().map(|&x| s[x]).collect();
                        pos(&st)
                    })
                    .collect()
            })
            .collect();
        let labels = perms
            .iter()
            .map(|p| {
                let s: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
                format!("[{}]", s.join(""))
            })
            .collect();
        Self::from_table(table, Some(labels))
    }

    /// The subgroup on `elements` (must be closed), re-indexed; also returns the
    /// embedding `new index -> old index`.
    pub fn subgroup(&self, elements: &[usize]) -> Result<(Self, Vec<usize>)> {
        let mut emb: Vec<usize> = elements.to_vec();
        emb.sort_unstable();
        emb.dedup();
        let pos = |g: usize| emb.iter().position(|&x| x == g);
        let mut table = Vec::with_capacity(emb.len());
        for &g in &emb {
            let mut row = Vec::with_capacity(emb.len());
            for &h in &emb {
                row.push(
                    pos(self.mul(g, h))
                        .ok_or_else(|| usage("subset is not closed under the product"))?,
                );
            }
            table.push(row);
        }
        let labels = emb.iter().map(|&g| self.labels[g].clone()).collect();
        Ok((Self::from_table(table, Some(labels))?, emb))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g * self.order + h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|c| c.to_vec()).collect()
    }

    pub fn cyclic_factors(&self) -> Option<&[u32]> {
        self.cyclic_factors.as_deref()
    }

    pub fn laws_checked_exhaustively(&self) -> bool {
        self.exhaustively_checked
    }

    /// Mixed-radix digits of `g` when the group was built as a cyclic product.
    pub fn digits(&self, g: usize) -> Option<Vec<u32>> {
        let factors = self.cyclic_factors.as_ref()?;
        let mut i = g;
        let mut d = vec![0u32; factors.len()];
        for (slot, &f) in d.iter_mut().zip(factors).rev() {
            *slot = (i % f as usize) as u32;
            i /= f as usize;
        }
        Some(d)
    }

    /// Index of the element with label `s` (or a bare decimal index).
    pub fn find_label(&self, s: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == s)
            .or_else(|| s.parse::<usize>().ok().filter(|&i| i < self.order))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Element of a [`Group`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Finite(usize),
    Free(Word),
}

impl GroupElement {
    pub fn as_word(&self) -> Option<&Word> {
        match self {
            GroupElement::Free(w) => Some(w),
            GroupElement::Finite(_) => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            GroupElement::Finite(i) => Some(*i),
            GroupElement::Free(_) => None,
        }
    }

    /// Word length for free-group elements; finite-group elements report 0.
    pub fn word_length(&self) -> usize {
        match self {
            GroupElement::Free(w) => w.len(),
            GroupElement::Finite(_) => 0,
        }
    }
}

impl From<Word> for GroupElement {
    fn from(w: Word) -> Self {
        GroupElement::Free(w)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Finite(i) => write!(f, "#{i}"),
            GroupElement::Free(w) => write!(f, "{w}"),
        }
    }
}

/// A discrete group from one of the two supported families.
#[derive(Clone, Debug, PartialEq)]
pub enum Group {
    Finite(FiniteGroup),
    Free { rank: u32 },
}

impl Group {
    pub fn free(rank: u32) -> Result<Self> {
        if rank == 0 {
            return Err(usage("free group rank must be at least 1"));
        }
        Ok(Group::Free { rank })
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Group::Free { .. })
    }

    pub fn as_finite(&self) -> Option<&FiniteGroup> {
        match self {
            Group::Finite(g) => Some(g),
            Group::Free { .. } => None,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            Group::Finite(g) => GroupElement::Finite(g.identity()),
            Group::Free { .. } => GroupElement::Free(Word::identity()),
        }
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        match (self, x) {
            (Group::Finite(g), GroupElement::Finite(i)) => *i < g.order(),
            (Group::Free { rank }, GroupElement::Free(w)) => {
                w.max_generator().is_none_or(|m| m < *rank)
            }
            _ => false,
        }
    }

    fn check(&self, x: &GroupElement) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(usage(format!("element {x} does not belong to this group")))
        }
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul_unchecked(g, h))
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(self.inv_unchecked(g))
    }

    pub(crate) fn mul_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (self, g, h) {
            (Group::Finite(t), GroupElement::Finite(a), GroupElement::Finite(b)) => {
                GroupElement::Finite(t.mul(*a, *b))
            }
            (Group::Free { .. }, GroupElement::Free(a), GroupElement::Free(b)) => {
                GroupElement::Free(a.mul(b))
            }
            _ => unreachable!("mixed group operands"),
        }
    }

    pub(crate) fn inv_unchecked(&self, g: &GroupElement) -> GroupElement {
        match (self, g) {
            (Group::Finite(t), GroupElement::Finite(a)) => GroupElement::Finite(t.inv(*a)),
            (Group::Free { .. }, GroupElement::Free(a)) => GroupElement::Free(a.inverse()),
            _ => unreachable!("mixed group operands"),
        }
    }

    /// Every element of a finite group (in index order); `None` for free groups.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        self.as_finite()
            .map(|g| (0..g.order()).map(GroupElement::Finite).collect())
    }

    /// Letters `a, a⁻¹, b, b⁻¹, ...` of a free group; group generators for
    /// finite groups are all non-identity elements.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self {
            Group::Finite(g) => (0..g.order())
                .filter(|&i| i != g.identity())
                .map(GroupElement::Finite)
                .collect(),
            Group::Free { rank } => (0..*rank)
                .flat_map(|s| [Word::power(s, 1), Word::power(s, -1)])
                .map(GroupElement::Free)
                .collect(),
        }
    }

    /// Number of elements of word length `<= radius` in `F_k`, or `None` on overflow.
    pub fn ball_size(rank: u32, radius: usize) -> Option<usize> {
        let k = 2 * rank as usize;
        let mut total: usize = 1;
        let mut sphere: usize = k;
        for l in 1..=radius {
            if l > 1 {
                sphere = sphere.checked_mul(k - 1)?;
            }
            total = total.checked_add(sphere)?;
        }
        Some(total)
    }

    /// All elements of word length `<= radius`, shortlex ordered. Finite
    /// groups return every element regardless of the radius.
    pub fn ball(&self, radius: i64) -> Result<Vec<GroupElement>> {
        self.ball_with_cap(radius, DEFAULT_BALL_CAP)
    }

    pub fn ball_with_cap(&self, radius: i64, cap: usize) -> Result<Vec<GroupElement>> {
        if radius < 0 {
            return Err(usage("ball radius must be non-negative"));
        }
        let rank = match self {
            Group::Finite(_) => return Ok(self.elements().unwrap()),
            Group::Free { rank } => *rank,
        };
        let r = radius as usize;
        let needed = Self::ball_size(rank, r).unwrap_or(usize::MAX);
        if needed > cap {
            return Err(Error::Resource {
                what: "ball",
                needed,
                cap,
            });
        }
        let letters: Vec<Letter> = (0..rank)
            .flat_map(|g| {
                [false, true].map(|inverse| Letter {
                    generator: g,
                    inverse,
                })
            })
            .collect();
        let mut out = Vec::with_capacity(needed);
        out.push(Word::identity());
        let mut start = 0;
        for _ in 0..r {
            let end = out.len();
            for i in start..end {
                for &l in &letters {
                    if let Some(w) = out[i].extend_reduced(l) {
                        out.push(w);
                    }
                }
            }
            start = end;
        }
        Ok(out.into_iter().map(GroupElement::Free).collect())
    }
}

/// Action of a finite group on `{0, ..., m-1}` by permutations,
/// `perms[g][x] = g·x`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteAction {
    set_size: usize,
    perms: Vec<Vec<usize>>,
}

/// One orbit with the stabiliser of its smallest point.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Orbit {
    pub points: Vec<usize>,
    pub base_point: usize,
    pub stabilizer: Vec<usize>,
}

impl FiniteAction {
    /// Validates `act(e,x) = x` and `act(g, act(h, x)) = act(gh, x)` exhaustively.
    pub fn new(group: &FiniteGroup, set_size: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        if perms.len() != group.order() {
            return Err(usage("need one permutation per group element"));
        }
        for (g, p) in perms.iter().enumerate() {
            if p.len() != set_size {
                return Err(usage(format!(
                    "permutation for element {g} has wrong length"
                )));
            }
            let distinct: BTreeSet<usize> = p.iter().copied().collect();
            if distinct.len() != set_size || p.iter().any(|&x| x >= set_size) {
                return Err(usage(format!("map for element {g} is not a permutation")));
            }
        }
        if perms[group.identity()]
            .iter()
            .enumerate()
            .any(|(x, &y)| x != y)
        {
            return Err(usage("identity does not act trivially"));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let gh = group.mul(g, h);
                for x in 0..set_size {
                    if perms[g][perms[h][x]] != perms[gh][x] {
                        return Err(usage(format!(
                            "action is not a homomorphism at (g={g}, h={h}, x={x})"
                        )));
                    }
                }
            }
        }
        Ok(Self { set_size, perms })
    }

    /// Extends generator permutations to the whole group by closure, then validates.
    pub fn from_generators(
        group: &FiniteGroup,
        set_size: usize,
        gens: &[(usize, Vec<usize>)],
    ) -> Result<Self> {
        let n = group.order();
        let mut perms: Vec<Option<Vec<usize>>> = vec![None; n];
        perms[group.identity()] = Some((0..set_size).collect());
        let mut queue = vec![group.identity()];
        while let Some(g) = queue.pop() {
            let pg = perms[g].clone().unwrap();
            for (s, ps) in gens {
                if *s >= n || ps.len() != set_size || ps.iter().any(|&x| x >= set_size) {
                    return Err(usage("malformed generator permutation"));
                }
                let sg = group.mul(*s, g);
                let psg: Vec<usize> = pg.iter().map(|&x| ps[x]).collect();
                match &perms[sg] {
                    Some(existing) if *existing != psg => {
                        return Err(usage(
                            "generator permutations are inconsistent with the group law",
                        ))
                    }
                    Some(_) => {}
                    None => {
                        perms[sg] = Some(psg);
                        queue.push(sg);
                    }
                }
            }
        }
        let perms: Option<Vec<Vec<usize>>> = perms.into_iter().collect();
        let perms = perms.ok_or_else(|| usage("generators do not generate the group"))?;
        Self::new(group, set_size, perms)
    }

    pub fn trivial(group: &FiniteGroup, set_size: usize) -> Self {
        Self {
            set_size,
            perms: vec![(0..set_size).collect(); group.order()],
        }
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.perms[g][x]
    }

    pub fn permutation(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    /// Orbits ordered by smallest member, each with the stabiliser of that member.
    pub fn orbits(&self) -> Vec<Orbit> {
        let mut seen = vec![false; self.set_size];
        let mut out = Vec::new();
        for x in 0..self.set_size {
            if seen[x] {
                continue;
            }
            let pts: BTreeSet<usize> = self.perms.iter().map(|p| p[x]).collect();
            for &y in &pts {
                seen[y] = true;
            }
            let stabilizer = (0..self.perms.len())
                .filter(|&g| self.perms[g][x] == x)
                .collect();
            out.push(Orbit {
                points: pts.into_iter().collect(),
                base_point: x,
                stabilizer,
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn free_products_reduce() {
        let f2 = Group::free(2).unwrap();
        let a = GroupElement::Free(w("a"));
        let a_inv = GroupElement::Free(w("a^-1"));
        assert_eq!(f2.mul(&a, &a_inv).unwrap(), f2.identity());
        let ab = GroupElement::Free(w("a b"));
        let binv_a = GroupElement::Free(w("b^-1 a"));
        assert_eq!(f2.mul(&ab, &binv_a).unwrap(), GroupElement::Free(w("a^2")));
    }

    #[test]
    fn free_inverses() {
        assert_eq!(w("a b^-1").inverse(), w("b a^-1"));
        assert_eq!(w("a^3").inverse(), w("a^-3"));
        assert_eq!(
            w("a b a^-1").mul(&w("a b a^-1").inverse()),
            Word::identity()
        );
    }

    #[test]
    fn cyclic_table_product() {
        let z4 = Group::Finite(FiniteGroup::cyclic(4).unwrap());
        assert_eq!(
            z4.mul(&GroupElement::Finite(2), &GroupElement::Finite(3))
                .unwrap(),
            GroupElement::Finite(1)
        );
        assert_eq!(z4.inv(&z4.identity()).unwrap(), z4.identity());
    }

    #[test]
    fn mixed_operands_are_usage_errors() {
        let f2 = Group::free(2).unwrap();
        let bad = f2.mul(&GroupElement::Finite(0), &f2.identity());
        assert!(matches!(bad, Err(Error::Usage(_))));
        let c = GroupElement::Free(w("c"));
        assert!(f2.inv(&c).is_err());
    }

    #[test]
    fn ball_sizes_and_order() {
        let f2 = Group::free(2).unwrap();
        let b1 = f2.ball(1).unwrap();
        let names: Vec<String> = b1.iter().map(|g| g.to_string()).collect();
        assert_eq!(names, ["e", "a", "a^-1", "b", "b^-1"]);
        assert_eq!(f2.ball(2).unwrap().len(), 17);
        for r in 0..7 {
            assert_eq!(f2.ball(r).unwrap().len(), 2 * 3usize.pow(r as u32) - 1);
        }
        let f3 = Group::free(3).unwrap();
        let b = f3.ball(4).unwrap();
        for l in 1..=4 {
            let sphere = b.iter().filter(|g| g.word_length() == l).count();
            assert_eq!(sphere, 6 * 5usize.pow(l as u32 - 1));
        }
        let sorted = {
            let mut s = b.clone();
            s.sort();
            s
        };
        assert_eq!(sorted, b);
        assert!(f2.ball(-1).is_err());
        assert!(matches!(f2.ball(20), Err(Error::Resource { .. })));
        let s3 = Group::Finite(FiniteGroup::symmetric(3).unwrap());
        assert_eq!(s3.ball(0).unwrap().len(), 6);
    }

    #[test]
    fn symmetric_group_laws() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(s3.laws_checked_exhaustively());
        assert_eq!(s3.identity(), 0);
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]], None).is_err());
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1]], None).is_err());
        // Closed, has identity 0 and inverses, but not associative.
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(FiniteGroup::from_table(t, None).is_err());
    }

    #[test]
    fn orbit_examples() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let swap = FiniteAction::new(&z2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let o = swap.orbits();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].points, [0, 1]);
        assert_eq!(o[0].stabilizer, [0]);

        let triv = FiniteAction::trivial(&z2, 2);
        let o = triv.orbits();
        assert_eq!(o.len(), 2);
        assert_eq!(o[1].stabilizer, [0, 1]);

        let s3 = FiniteGroup::symmetric(3).unwrap();
        let perms = (0..6)
            .map(|g| {
                let label = s3.label(g).trim_matches(|c| c == '[' || c == ']');
                label.bytes().map(|b| (b - b'1') as usize).collect()
            })
            .collect();
        let nat = FiniteAction::new(&s3, 3, perms).unwrap();
        let o = nat.orbits();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].stabilizer.len(), 2);
    }

    #[test]
    fn action_from_generators() {
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let act = FiniteAction::from_generators(&z4, 4, &[(1, vec![1, 2, 3, 0])]).unwrap();
        assert_eq!(act.act(2, 0), 2);
        assert_eq!(act.orbits().len(), 1);
        assert!(
            FiniteAction::from_generators(&z4, 2, &[(1, vec![1, 0]), (2, vec![1, 0])]).is_err()
        );
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("a^2 b^-1 a").to_string(), "a^2 b^-1 a");
        assert_eq!(w("e"), Word::identity());
        assert_eq!(w("a a^-1 b"), w("b"));
        assert!(Word::parse("a^x").is_err());
        assert!(Word::parse("E").is_err());
        assert_eq!(w("[30]^2").to_string(), "[30]^2");
    }

    #[test]
    fn prefix_matching_is_letter_level() {
        assert!(w("b^2 a").starts_with(&w("b")));
        assert!(w("b^2 a").starts_with(&w("b^2 a")));
        assert!(!w("b a").starts_with(&w("b^2")));
        assert!(!w("b^2 a").starts_with(&w("b a")));
        assert!(w("a").starts_with(&Word::identity()));
    }

    fn arb_letters() -> impl Strategy<Value = Vec<(u32, i64)>> {
        prop::collection::vec((0u32..3, prop_oneof![Just(1i64), Just(-1i64)]), 0..24)
    }

    proptest! {
        #[test]
        fn reduction_is_confluent(letters in arb_letters(), split in 0usize..24) {
            let split = split.min(letters.len());
            let whole = Word::from_blocks(letters.iter().copied());
            let left = Word::from_blocks(letters[..split].iter().copied());
            let right = Word::from_blocks(letters[split..].iter().copied());
            prop_assert_eq!(left.mul(&right), whole.clone());
            prop_assert_eq!(Word::from_blocks(whole.blocks().iter().copied()), whole);
        }

        #[test]
        fn free_group_laws(x in arb_letters(), y in arb_letters(), z in arb_letters()) {
            let (x, y, z) = (Word::from_blocks(x), Word::from_blocks(y), Word::from_blocks(z));
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert!(x.mul(&x.inverse()).is_identity());
            prop_assert_eq!(x.mul(&Word::identity()), x.clone());
            prop_assert_eq!(Word::parse(&x.to_string()).unwrap(), x);
        }
    }
}
