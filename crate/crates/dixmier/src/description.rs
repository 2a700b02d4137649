//! JSON system descriptions.
//!
//! ```json
//! {
//!   "name": "z2-swap",
//!   "group": { "kind": "finite", "cyclic": [2] },
//!   "algebra": { "kind": "functions_on_set", "size": 2 },
//!   "action": { "kind": "permutation", "per_generator": [ { "generator": 1, "perm": [1, 0] } ] },
//!   "cocycle": { "kind": "trivial" },
//!   "elements": { "x": [ { "at": 1, "function": [[1, 0], [0, 0]] } ] }
//! }
//! ```
//!
//! Finite groups are given by `table` (with optional `labels`), `cyclic`
//! factors or `symmetric` degree. Elements are referenced by index, label,
//! `#i` or, for free groups, by word. Complex numbers are `[re, im]` pairs.

use std::collections::BTreeMap;
use std::sync::Arc;

use dixmier_core::algebra::{AlgebraAutomorphism, AlgebraElement, CoeffAlgebra};
use dixmier_core::crossed::CrossedElement;
use dixmier_core::group::{FiniteGroup, Group, GroupElement, Word};
use dixmier_core::linalg::{CMatrix, C64};
use dixmier_core::twist::{Action, TwistedSystem, TwoCocycle};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = [f64; 2];
pub type ComplexMatrix = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescription {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub group: GroupSpec,
    pub algebra: AlgebraSpec,
    #[serde(default)]
    pub action: ActionSpec,
    #[serde(default)]
    pub cocycle: CocycleSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub elements: BTreeMap<String, Vec<TermSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Finite {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cyclic: Option<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        symmetric: Option<usize>,
    },
    Free {
        rank: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraSpec {
    Scalars,
    FunctionsOnSet { size: usize },
    MatrixBlocks { dims: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorMap {
    pub generator: ElementRef,
    pub perm: Vec<usize>,
    /// One unitary per target block; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<ComplexMatrix>>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSpec {
    #[default]
    Trivial,
    Permutation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_generator: Option<Vec<GeneratorMap>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_element: Option<Vec<Vec<usize>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleEntry {
    pub g: ElementRef,
    pub h: ElementRef,
    /// A scalar or one phase per block.
    pub value: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CocycleSpec {
    #[default]
    Trivial,
    Table {
        entries: Vec<CocycleEntry>,
    },
    Bicharacter {
        matrix: Vec<Vec<i64>>,
        root_order: u32,
    },
}

/// `coefficient · λ(at)`; exactly one of `scalar`, `function`, `blocks`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub at: ElementRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<ComplexMatrix>>,
}

/// A validated system with its named elements.
#[derive(Clone, Debug)]
pub struct Built {
    pub name: String,
    pub system: Arc<TwistedSystem>,
    pub elements: BTreeMap<String, CrossedElement>,
}

fn c64(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn complex(z: C64) -> Complex {
    [z.re, z.im]
}

fn matrix(m: &ComplexMatrix, at: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<C64>> = m.iter().map(|r| r.iter().map(c64).collect()).collect();
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::invalid(
            at,
            "matrix rows must be nonempty and of equal length",
        ));
    }
    Ok(CMatrix::from_rows(&rows))
}

pub fn matrix_json(m: &CMatrix) -> ComplexMatrix {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| complex(m[(r, c)])).collect())
        .collect()
}

/// Resolves an element reference in `group`.
pub fn resolve(group: &Group, r: &ElementRef) -> std::result::Result<GroupElement, String> {
    match (group, r) {
        (Group::Finite(t), ElementRef::Index(i)) if *i < t.order() => Ok(GroupElement::Finite(*i)),
        (Group::Finite(t), ElementRef::Index(i)) => Err(format!(
            "index {i} out of range for a group of order {}",
            t.order()
        )),
        (Group::Finite(t), ElementRef::Name(s)) => {
            let s = s.trim();
            if s == "e" {
                return Ok(GroupElement::Finite(t.identity()));
            }
            if let Some(i) = t.find_label(s) {
                return Ok(GroupElement::Finite(i));
            }
            match s.parse::<usize>() {
                Ok(i) if i < t.order() => Ok(GroupElement::Finite(i)),
                _ => Err(format!("unknown group element {s:?}")),
            }
        }
        (Group::Free { rank }, ElementRef::Name(s)) => {
            let w = Word::parse(s).map_err(|e| e.to_string())?;
            let g = GroupElement::Free(w);
            if group.contains(&g) {
                Ok(g)
            } else {
                Err(format!("word {s:?} uses a generator beyond rank {rank}"))
            }
        }
        (Group::Free { .. }, ElementRef::Index(i)) => {
            Err(format!("free-group elements are words, not indices ({i})"))
        }
    }
}

impl SystemDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptions serialize")
    }

    pub fn build_group(&self) -> Result<Group> {
        match &self.group {
            GroupSpec::Free { rank } => {
                Group::free(*rank).map_err(|e| Error::invalid("group.rank", e))
            }
            GroupSpec::Finite {
                order,
                table,
                labels,
                cyclic,
                symmetric,
            } => {
                let g = match (table, cyclic, symmetric) {
                    (Some(t), None, None) => FiniteGroup::from_table(t.clone(), labels.clone())
                        .map_err(|e| Error::invalid("group.table", e))?,
                    (None, Some(c), None) => FiniteGroup::cyclic_product(c)
                        .map_err(|e| Error::invalid("group.cyclic", e))?,
                    (None, None, Some(n)) => FiniteGroup::symmetric(*n)
                        .map_err(|e| Error::invalid("group.symmetric", e))?,
                    _ => {
                        return Err(Error::invalid(
                            "group",
                            "a finite group needs exactly one of table, cyclic, symmetric",
                        ))
                    }
                };
                if labels.is_some() && table.is_none() {
                    return Err(Error::invalid(
                        "group.labels",
                        "labels are only accepted with a table",
                    ));
                }
                if let Some(n) = order {
                    if *n != g.order() {
                        return Err(Error::invalid(
                            "group.order",
                            format!("declared {n}, table has {}", g.order()),
                        ));
                    }
                }
                Ok(Group::Finite(g))
            }
        }
    }

    pub fn build_algebra(&self) -> Result<CoeffAlgebra> {
        match &self.algebra {
            AlgebraSpec::Scalars => Ok(CoeffAlgebra::scalars()),
            AlgebraSpec::FunctionsOnSet { size } => {
                CoeffAlgebra::functions_on_set(*size).map_err(|e| Error::invalid("algebra.size", e))
            }
            AlgebraSpec::MatrixBlocks { dims } => CoeffAlgebra::matrix_blocks(dims.clone())
                .map_err(|e| Error::invalid("algebra.dims", e)),
        }
    }

    fn automorphism(
        alg: &CoeffAlgebra,
        perm: &[usize],
        unitaries: Option<&Vec<ComplexMatrix>>,
        at: &str,
    ) -> Result<AlgebraAutomorphism> {
        match unitaries {
            None => AlgebraAutomorphism::permutation(alg, perm.to_vec())
                .map_err(|e| Error::invalid(at, e)),
            Some(us) => {
                let us = us
                    .iter()
                    .enumerate()
                    .map(|(k, u)| matrix(u, &format!("{at}.unitaries[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                AlgebraAutomorphism::new(alg, perm.to_vec(), us).map_err(|e| Error::invalid(at, e))
            }
        }
    }

    pub fn build_action(&self, group: &Group, alg: &CoeffAlgebra) -> Result<Action> {
        match &self.action {
            ActionSpec::Trivial => Ok(Action::Trivial),
            ActionSpec::Permutation {
                per_generator,
                per_element,
            } => match (group, per_generator, per_element) {
                (Group::Finite(t), None, Some(perms)) => {
                    if perms.len() != t.order() {
                        return Err(Error::invalid(
                            "action.per_element",
                            format!("expected {} permutations, found {}", t.order(), perms.len()),
                        ));
                    }
                    let autos = perms
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            Self::automorphism(alg, p, None, &format!("action.per_element[{i}]"))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Action::PerElement(autos))
                }
                (Group::Finite(_), Some(gens), None) => {
                    let mut images = Vec::with_capacity(gens.len());
                    for (i, m) in gens.iter().enumerate() {
                        let at = format!("action.per_generator[{i}]");
                        let g = resolve(group, &m.generator).map_err(|e| Error::invalid(&at, e))?;
                        let a = Self::automorphism(alg, &m.perm, m.unitaries.as_ref(), &at)?;
                        images.push((g.as_index().unwrap(), a));
                    }
                    Action::from_finite_generators(group, alg, &images)
                        .map_err(|e| Error::invalid("action", e))
                }
                (Group::Free { rank }, Some(gens), None) => {
                    let mut images: Vec<Option<AlgebraAutomorphism>> = vec![None; *rank as usize];
                    for (i, m) in gens.iter().enumerate() {
                        let at = format!("action.per_generator[{i}]");
                        let g = resolve(group, &m.generator).map_err(|e| Error::invalid(&at, e))?;
                        let w = g.as_word().unwrap();
                        let slot = match w.blocks() {
                            [(gen, 1)] => *gen as usize,
                            _ => {
                                return Err(Error::invalid(
                                    &at,
                                    "free-group actions are given on generators",
                                ))
                            }
                        };
                        images[slot] =
                            Some(Self::automorphism(alg, &m.perm, m.unitaries.as_ref(), &at)?);
                    }
                    Ok(Action::PerGenerator(
                        images
                            .into_iter()
                            .map(|a| a.unwrap_or_else(|| AlgebraAutomorphism::identity(alg)))
                            .collect(),
                    ))
                }
                (Group::Free { .. }, None, Some(_)) => Err(Error::invalid(
                    "action.per_element",
                    "free-group actions are given per generator",
                )),
                _ => Err(Error::invalid(
                    "action",
                    "give exactly one of per_generator, per_element",
                )),
            },
        }
    }

    pub fn build_cocycle(&self, group: &Group) -> Result<TwoCocycle> {
        match &self.cocycle {
            CocycleSpec::Trivial => Ok(TwoCocycle::Trivial),
            CocycleSpec::Bicharacter { matrix, root_order } => Ok(TwoCocycle::Bicharacter {
                matrix: matrix.clone(),
                root_order: *root_order,
            }),
            CocycleSpec::Table { entries } => {
                let mut out = BTreeMap::new();
                for (i, e) in entries.iter().enumerate() {
                    let at = format!("cocycle.entries[{i}]");
                    let g = resolve(group, &e.g).map_err(|m| Error::invalid(&at, m))?;
                    let h = resolve(group, &e.h).map_err(|m| Error::invalid(&at, m))?;
                    let (Some(g), Some(h)) = (g.as_index(), h.as_index()) else {
                        return Err(Error::invalid(&at, "table cocycles need a finite group"));
                    };
                    if out
                        .insert((g, h), e.value.iter().map(c64).collect())
                        .is_some()
                    {
                        return Err(Error::invalid(&at, "duplicate entry"));
                    }
                }
                Ok(TwoCocycle::Table { entries: out })
            }
        }
    }

    pub fn build_term(
        sys: &TwistedSystem,
        t: &TermSpec,
        at: &str,
    ) -> Result<(GroupElement, AlgebraElement)> {
        let alg = sys.algebra();
        let g = resolve(sys.group(), &t.at).map_err(|e| Error::invalid(at, e))?;
        let a = match (&t.scalar, &t.function, &t.blocks) {
            (Some(z), None, None) => AlgebraElement::scalar(alg, c64(z)),
            (None, Some(f), None) => {
                AlgebraElement::from_function(alg, &f.iter().map(c64).collect::<Vec<_>>())
                    .map_err(|e| Error::invalid(at, e))?
            }
            (None, None, Some(bs)) => {
                let bs = bs
                    .iter()
                    .enumerate()
                    .map(|(k, b)| matrix(b, &format!("{at}.blocks[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                AlgebraElement::from_blocks(alg, bs).map_err(|e| Error::invalid(at, e))?
            }
            _ => {
                return Err(Error::invalid(
                    at,
                    "give exactly one of scalar, function, blocks",
                ))
            }
        };
        Ok((g, a))
    }

    /// Builds and validates the system. Axiom failures are reported by
    /// [`Built::system`]'s validation report, not as errors.
    pub fn build(&self) -> Result<Built> {
        let group = self.build_group()?;
        let alg = self.build_algebra()?;
        let action = self.build_action(&group, &alg)?;
        let cocycle = self.build_cocycle(&group)?;
        let system = Arc::new(
            TwistedSystem::new(group, alg, action, cocycle)
                .map_err(|e| Error::invalid("system", e))?,
        );
        let mut elements = BTreeMap::new();
        for (name, terms) in &self.elements {
            let ts = terms
                .iter()
                .enumerate()
                .map(|(i, t)| Self::build_term(&system, t, &format!("elements.{name}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let x = CrossedElement::from_terms(&system, ts)
                .map_err(|e| Error::invalid(&format!("elements.{name}"), e))?;
            elements.insert(name.clone(), x);
        }
        Ok(Built {
            name: self.name.clone().unwrap_or_else(|| "system".into()),
            system,
            elements,
        })
    }
}
