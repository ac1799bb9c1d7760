//! Chains, symmetric chain decompositions and their validation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::poset::{Element, GradedPoset};

/// A finite graded order whose symmetric chain decompositions can be
/// validated.
pub trait GradedOrder {
    type Elem: Copy + Ord + Hash + Debug;

    /// Rank of the top level.
    fn total_rank(&self) -> usize;

    /// Rank of `e`, or `None` when `e` is not an element.
    fn rank_of(&self, e: Self::Elem) -> Option<usize>;

    /// Whether `hi` covers `lo`.
    fn is_cover(&self, lo: Self::Elem, hi: Self::Elem) -> bool;

    fn element_total(&self) -> usize;

    fn largest_level(&self) -> usize;
}

impl GradedOrder for GradedPoset {
    type Elem = Element;

    fn total_rank(&self) -> usize {
        GradedPoset::total_rank(self)
    }

    fn rank_of(&self, e: Element) -> Option<usize> {
        self.try_rank(e)
    }

    fn is_cover(&self, lo: Element, hi: Element) -> bool {
        self.covers(lo, hi)
    }

    fn element_total(&self) -> usize {
        self.len()
    }

    fn largest_level(&self) -> usize {
        self.max_level_size()
    }
}

/// A chain `x_0 ≺ ... ≺ x_k`, stored bottom-up.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain<E = Element>(pub Vec<E>);

impl<E: Copy> Chain<E> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bottom(&self) -> Option<E> {
        self.0.first().copied()
    }

    pub fn top(&self) -> Option<E> {
        self.0.last().copied()
    }
}

/// A partition of a graded order into symmetric chains.
///
/// Chains are kept in canonical order (by minimal element) so that two
/// decompositions are equal iff they are the same set of chains.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scd<E = Element> {
    chains: Vec<Chain<E>>,
}

impl<E: Copy + Ord> Scd<E> {
    pub fn new(mut chains: Vec<Chain<E>>) -> Self {
        chains.sort_by(|a, b| a.0.first().cmp(&b.0.first()).then_with(|| a.cmp(b)));
        Scd { chains }
    }

    pub fn chains(&self) -> &[Chain<E>] {
        &self.chains
    }

    pub fn into_chains(self) -> Vec<Chain<E>> {
        self.chains
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyChain {
        chain: usize,
    },
    NotCover {
        chain: usize,
        position: usize,
    },
    NotSymmetric {
        chain: usize,
        bottom_rank: usize,
        top_rank: usize,
        total_rank: usize,
    },
    Duplicate {
        chain: usize,
        first_chain: usize,
        element: String,
    },
    Missing {
        count: usize,
    },
    ChainCount {
        found: usize,
        expected: usize,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::EmptyChain { chain } => write!(f, "chain {chain} is empty"),
            Violation::NotCover { chain, position } => {
                write!(
                    f,
                    "chain {chain}: element {position} does not cover its predecessor"
                )
            }
            Violation::NotSymmetric {
                chain,
                bottom_rank,
                top_rank,
                total_rank,
            } => write!(
                f,
                "chain {chain} is not symmetric: r(x_0) + r(x_k) = {} != {total_rank}",
                bottom_rank + top_rank
            ),
            Violation::Duplicate {
                chain,
                first_chain,
                element,
            } => {
                write!(
                    f,
                    "chain {chain}: element {element} already used by chain {first_chain}"
                )
            }
            Violation::Missing { count } => {
                write!(f, "{count} elements are not covered by any chain")
            }
            Violation::ChainCount { found, expected } => {
                write!(f, "{found} chains, expected {expected}")
            }
        }
    }
}

/// Outcome of [`validate_scd`]: every violation found, not just the first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub chain_count: usize,
    pub violations: Vec<Violation>,
}

/// Checks that `chains` partition `poset` into saturated symmetric chains.
///
/// Returns an error only for elements outside the poset; all structural
/// problems are collected into the report.
pub fn validate_scd<P: GradedOrder>(
    poset: &P,
    chains: &[Chain<P::Elem>],
) -> Result<ValidationReport> {
    let m = poset.total_rank();
    let mut owner: HashMap<P::Elem, usize> = HashMap::new();
    let mut violations = Vec::new();
    for (ci, chain) in chains.iter().enumerate() {
        let mut ranks = Vec::with_capacity(chain.len());
        for &e in &chain.0 {
            let r = poset
                .rank_of(e)
                .ok_or_else(|| Error::ForeignElement(format!("{e:?}")))?;
            ranks.push(r);
        }
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { chain: ci });
            continue;
        }
        for pos in 1..chain.len() {
            if !poset.is_cover(chain.0[pos - 1], chain.0[pos]) {
                violations.push(Violation::NotCover {
                    chain: ci,
                    position: pos,
                });
            }
        }
        let (bottom, top) = (ranks[0], ranks[ranks.len() - 1]);
        if bottom + top != m {
            violations.push(Violation::NotSymmetric {
                chain: ci,
                bottom_rank: bottom,
                top_rank: top,
                total_rank: m,
            });
        }
        for &e in &chain.0 {
            if let Some(&first) = owner.get(&e) {
                violations.push(Violation::Duplicate {
                    chain: ci,
                    first_chain: first,
                    element: format!("{e:?}"),
                });
            } else {
                owner.insert(e, ci);
            }
        }
    }
    let total = poset.element_total();
    if owner.len() < total {
        violations.push(Violation::Missing {
            count: total - owner.len(),
        });
    }
    let expected = poset.largest_level();
    if chains.len() != expected {
        violations.push(Violation::ChainCount {
            found: chains.len(),
            expected,
        });
    }
    Ok(ValidationReport {
        ok: violations.is_empty(),
        chain_count: chains.len(),
        violations,
    })
}

/// Number of chains of each length.
pub fn chain_profile<E: Copy>(chains: &[Chain<E>]) -> BTreeMap<usize, usize> {
    let mut profile = BTreeMap::new();
    for c in chains {
        *profile.entry(c.len()).or_insert(0) += 1;
    }
    profile
}

/// The profile every SCD of a poset with these level sizes must have: the
/// number of chains of length `m - 2i + 1` is `|L_i| - |L_{i-1}|`.
pub fn expected_profile(level_sizes: &[usize]) -> BTreeMap<usize, usize> {
    let m = level_sizes.len() - 1;
    let mut profile = BTreeMap::new();
    for i in 0..=m / 2 {
        let prev = if i == 0 { 0 } else { level_sizes[i - 1] };
        let starting = level_sizes[i].saturating_sub(prev);
        if starting > 0 {
            profile.insert(m - 2 * i + 1, starting);
        }
    }
    profile
}

/// JSON document `{ "poset": {...}, "chains": [[encoding, ...], ...] }`.
pub fn scd_to_json(poset: &GradedPoset, scd: &Scd) -> Value {
    let chains: Vec<Vec<Value>> = scd
        .chains()
        .iter()
        .map(|c| c.0.iter().map(|&e| poset.encode(e)).collect())
        .collect();
    serde_json::json!({ "poset": poset.to_json(), "chains": chains })
}

/// Parses a document written by [`scd_to_json`].
///
/// The chains are kept in the order given (not canonicalized) so that
/// validation reports refer to the caller's chain indices.
pub fn scd_from_json(v: &Value, limits: &Limits) -> Result<(GradedPoset, Vec<Chain>)> {
    let poset_v = v
        .get("poset")
        .ok_or_else(|| Error::Malformed("missing `poset`".into()))?;
    let poset = GradedPoset::from_json(poset_v, limits)?;
    let chains_v = v
        .get("chains")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Malformed("missing `chains` array".into()))?;
    let mut chains = Vec::with_capacity(chains_v.len());
    for c in chains_v {
        let items = c
            .as_array()
            .ok_or_else(|| Error::Malformed("chain is not an array".into()))?;
        let elems = items
            .iter()
            .map(|e| poset.decode(e))
            .collect::<Result<Vec<_>>>()?;
        chains.push(Chain(elems));
    }
    Ok((poset, chains))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{build_poset, PosetKind};

    fn b2() -> GradedPoset {
        build_poset(PosetKind::Boolean, 2, 2, &Limits::default()).unwrap()
    }

    #[test]
    fn valid_two_chain_decomposition() {
        let p = b2();
        let chains = vec![
            Chain(vec![Element(0), Element(1), Element(3)]),
            Chain(vec![Element(2)]),
        ];
        let report = validate_scd(&p, &chains).unwrap();
        assert!(report.ok, "{:?}", report.violations);
        assert_eq!(report.chain_count, 2);
    }

    #[test]
    fn asymmetric_chains_are_reported() {
        let p = b2();
        let chains = vec![
            Chain(vec![Element(0), Element(1)]),
            Chain(vec![Element(2), Element(3)]),
        ];
        let report = validate_scd(&p, &chains).unwrap();
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::NotSymmetric {
                chain: 0,
                bottom_rank: 0,
                top_rank: 1,
                total_rank: 2
            }
        )));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotSymmetric { chain: 1, .. })));
    }

    #[test]
    fn collects_every_violation() {
        let p = b2();
        let chains = vec![
            Chain(vec![Element(0), Element(3)]),
            Chain(vec![Element(3)]),
            Chain(vec![]),
        ];
        let report = validate_scd(&p, &chains).unwrap();
        let kinds: Vec<_> = report.violations.iter().map(|v| format!("{v}")).collect();
        assert!(report.violations.contains(&Violation::NotCover {
            chain: 0,
            position: 1
        }));
        assert!(report
            .violations
            .contains(&Violation::EmptyChain { chain: 2 }));
        assert!(report.violations.contains(&Violation::Missing { count: 2 }));
        assert!(report.violations.contains(&Violation::ChainCount {
            found: 3,
            expected: 2
        }));
        assert!(kinds.iter().any(|k| k.contains("already used")));
    }

    #[test]
    fn foreign_element_is_an_error() {
        let p = b2();
        let chains = vec![Chain(vec![Element(7)])];
        assert!(matches!(
            validate_scd(&p, &chains),
            Err(Error::ForeignElement(_))
        ));
    }

    #[test]
    fn profiles() {
        let p = b2();
        let chains = vec![
            Chain(vec![Element(0), Element(1), Element(3)]),
            Chain(vec![Element(2)]),
        ];
        assert_eq!(chain_profile(&chains), BTreeMap::from([(1, 1), (3, 1)]));
        assert_eq!(
            expected_profile(&p.level_sizes()),
            BTreeMap::from([(1, 1), (3, 1)])
        );
        assert_eq!(
            expected_profile(&[1, 4, 6, 4, 1]),
            BTreeMap::from([(5, 1), (3, 3), (1, 2)])
        );
        assert_eq!(
            expected_profile(&[1, 2, 3, 2, 1]),
            BTreeMap::from([(5, 1), (3, 1), (1, 1)])
        );
    }

    #[test]
    fn canonical_order_and_json() {
        let p = b2();
        let scd = Scd::new(vec![
            Chain(vec![Element(2)]),
            Chain(vec![Element(0), Element(1), Element(3)]),
        ]);
        assert_eq!(scd.chains()[0].bottom(), Some(Element(0)));
        let text = serde_json::to_string(&scd_to_json(&p, &scd)).unwrap();
        let (p2, chains) =
            scd_from_json(&serde_json::from_str(&text).unwrap(), &Limits::default()).unwrap();
        assert_eq!(p2, p);
        let again = serde_json::to_string(&scd_to_json(&p2, &Scd::new(chains))).unwrap();
        assert_eq!(text, again);
    }
}
