//! Boolean lattices and hypergrids as graded, rank-symmetric posets.
//!
//! Elements are stored as integer codes. For the Boolean lattice `2^[n]` the
//! code of a subset is its bitmask, with bit `i - 1` standing for `i`. For the
//! hypergrid `[t]^n` the code of `(x_1, ..., x_n)` is the mixed-radix number
//! with digits `x_i - 1`, `x_1` most significant. In both cases numeric order
//! of codes is lexicographic order of the encoding, which is the canonical
//! element order everywhere in the crate.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::limits::Limits;

/// An element of a [`GradedPoset`], identified by its integer code.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(pub u64);

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosetKind {
    Boolean,
    Hypergrid,
}

impl PosetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PosetKind::Boolean => "boolean",
            PosetKind::Hypergrid => "hypergrid",
        }
    }
}

impl std::str::FromStr for PosetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boolean" => Ok(PosetKind::Boolean),
            "hypergrid" => Ok(PosetKind::Hypergrid),
            other => Err(Error::InvalidParameter(format!(
                "unknown poset kind `{other}`"
            ))),
        }
    }
}

/// The Boolean lattice `2^[n]` or the hypergrid `[t]^n`, bucketed by level.
///
/// Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPoset {
    kind: PosetKind,
    t: u32,
    n: u32,
    levels: Vec<Vec<Element>>,
    /// `place[i]` is the code increment for coordinate `i` (0-based).
    place: Vec<u64>,
}

fn validate_params(kind: PosetKind, t: u32, n: u32) -> Result<()> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "t must be at least 2, got {t}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 1, got {n}"
        )));
    }
    if kind == PosetKind::Boolean && t != 2 {
        return Err(Error::InvalidParameter(format!(
            "the Boolean lattice has t = 2, got {t}"
        )));
    }
    if kind == PosetKind::Boolean && n > 63 {
        return Err(Error::InvalidParameter(format!(
            "Boolean lattice supports n <= 63, got {n}"
        )));
    }
    Ok(())
}

/// `t^n`, or `None` on overflow.
pub fn element_count(t: u32, n: u32) -> Option<u64> {
    (t as u64).checked_pow(n)
}

/// Builds `2^[n]` (`kind = Boolean`, `t = 2`) or `[t]^n` with levels sorted
/// canonically.
pub fn build_poset(kind: PosetKind, t: u32, n: u32, limits: &Limits) -> Result<GradedPoset> {
    validate_params(kind, t, n)?;
    let total = match element_count(t, n) {
        Some(total) if total <= limits.max_elements => total,
        Some(total) => return Err(Error::budget("element", total, limits.max_elements)),
        None => return Err(Error::budget("element", u128::MAX, limits.max_elements)),
    };
    let place: Vec<u64> = match kind {
        PosetKind::Boolean => (0..n).map(|i| 1u64 << i).collect(),
        PosetKind::Hypergrid => (0..n).map(|i| (t as u64).pow(n - 1 - i)).collect(),
    };
    let total_rank = (n * (t - 1)) as usize;
    let mut levels = vec![Vec::new(); total_rank + 1];
    match kind {
        PosetKind::Boolean => {
            for code in 0..total {
                levels[code.count_ones() as usize].push(Element(code));
            }
        }
        PosetKind::Hypergrid => {
            // Odometer over digits, least significant (x_n) first.
            let mut digits = vec![0u32; n as usize];
            let mut rank = 0usize;
            for code in 0..total {
                levels[rank].push(Element(code));
                for d in digits.iter_mut().rev() {
                    if *d + 1 < t {
                        *d += 1;
                        rank += 1;
                        break;
                    }
                    rank -= *d as usize;
                    *d = 0;
                }
            }
        }
    }
    Ok(GradedPoset {
        kind,
        t,
        n,
        levels,
        place,
    })
}

/// Level sizes of `[t]^n` by iterated convolution, without materializing
/// elements.
pub fn level_sizes(t: u32, n: u32) -> Result<Vec<BigUint>> {
    validate_params(PosetKind::Hypergrid, t, n)?;
    let mut sizes = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); sizes.len() + t as usize - 1];
        for (i, s) in sizes.iter().enumerate() {
            for slot in &mut next[i..i + t as usize] {
                *slot += s;
            }
        }
        sizes = next;
    }
    Ok(sizes)
}

impl GradedPoset {
    pub fn kind(&self) -> PosetKind {
        self.kind
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Rank of the top element, `n(t-1)`.
    pub fn total_rank(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level(&self, i: usize) -> &[Element] {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[Vec<Element>] {
        &self.levels
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn max_level_size(&self) -> usize {
        self.levels.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// A short string identifying the poset, e.g. `hypergrid:t=3:n=2`.
    pub fn descriptor(&self) -> String {
        format!("{}:t={}:n={}", self.kind.as_str(), self.t, self.n)
    }

    pub fn contains(&self, e: Element) -> bool {
        let total = self.place.first().map_or(1, |&p| match self.kind {
            PosetKind::Boolean => 1u64 << self.n,
            PosetKind::Hypergrid => p * self.t as u64,
        });
        e.0 < total
    }

    /// Rank of `e`, or `None` if `e` is not an element.
    pub fn try_rank(&self, e: Element) -> Option<usize> {
        if !self.contains(e) {
            return None;
        }
        Some(self.rank(e))
    }

    /// Rank of an element known to belong to the poset.
    pub fn rank(&self, e: Element) -> usize {
        match self.kind {
            PosetKind::Boolean => e.0.count_ones() as usize,
            PosetKind::Hypergrid => {
                let t = self.t as u64;
                let mut code = e.0;
                let mut rank = 0;
                while code > 0 {
                    rank += (code % t) as usize;
                    code /= t;
                }
                rank
            }
        }
    }

    /// Position of `e` inside its level.
    pub fn index_in_level(&self, e: Element) -> Option<usize> {
        let r = self.try_rank(e)?;
        self.levels[r].binary_search(&e).ok()
    }

    /// Coordinates `(x_1, ..., x_n)` with `x_i` in `1..=t`.
    pub fn coords(&self, e: Element) -> Vec<u32> {
        self.place.iter().map(|&p| self.digit(e, p) + 1).collect()
    }

    pub fn from_coords(&self, coords: &[u32]) -> Result<Element> {
        if coords.len() != self.n as usize {
            return Err(Error::ForeignElement(format!("{coords:?}")));
        }
        let mut code = 0u64;
        for (&x, &p) in coords.iter().zip(&self.place) {
            if x < 1 || x > self.t {
                return Err(Error::ForeignElement(format!("{coords:?}")));
            }
            code += (x as u64 - 1) * p;
        }
        Ok(Element(code))
    }

    fn digit(&self, e: Element, place: u64) -> u32 {
        match self.kind {
            PosetKind::Boolean => u32::from(e.0 & place != 0),
            PosetKind::Hypergrid => ((e.0 / place) % self.t as u64) as u32,
        }
    }

    /// Elements covering `e`, in canonical order.
    pub fn up_covers(&self, e: Element) -> Vec<Element> {
        let mut out: Vec<Element> = self
            .place
            .iter()
            .filter(|&&p| self.digit(e, p) + 1 < self.t)
            .map(|&p| Element(e.0 + p))
            .collect();
        out.sort_unstable();
        out
    }

    /// Elements covered by `e`, in canonical order.
    pub fn down_covers(&self, e: Element) -> Vec<Element> {
        let mut out: Vec<Element> = self
            .place
            .iter()
            .filter(|&&p| self.digit(e, p) > 0)
            .map(|&p| Element(e.0 - p))
            .collect();
        out.sort_unstable();
        out
    }

    /// Whether `hi` covers `lo`.
    pub fn covers(&self, lo: Element, hi: Element) -> bool {
        if hi.0 <= lo.0 {
            return false;
        }
        let diff = hi.0 - lo.0;
        self.place
            .iter()
            .any(|&p| p == diff && self.digit(lo, p) + 1 < self.t)
    }

    /// Coordinate-wise comparison `a ⪯ b`.
    pub fn leq(&self, a: Element, b: Element) -> bool {
        match self.kind {
            PosetKind::Boolean => a.0 & !b.0 == 0,
            PosetKind::Hypergrid => self
                .place
                .iter()
                .all(|&p| self.digit(a, p) <= self.digit(b, p)),
        }
    }

    /// JSON encoding: an integer mask for Boolean elements, a coordinate
    /// array for hypergrid elements.
    pub fn encode(&self, e: Element) -> Value {
        match self.kind {
            PosetKind::Boolean => Value::from(e.0),
            PosetKind::Hypergrid => Value::from(self.coords(e)),
        }
    }

    pub fn decode(&self, v: &Value) -> Result<Element> {
        let e =
            match self.kind {
                PosetKind::Boolean => Element(v.as_u64().ok_or_else(|| {
                    Error::Malformed(format!("expected an integer mask, got {v}"))
                })?),
                PosetKind::Hypergrid => {
                    let coords: Vec<u32> = serde_json::from_value(v.clone()).map_err(|_| {
                        Error::Malformed(format!("expected a coordinate array, got {v}"))
                    })?;
                    self.from_coords(&coords)?
                }
            };
        if !self.contains(e) {
            return Err(Error::ForeignElement(v.to_string()));
        }
        Ok(e)
    }

    pub fn to_json(&self) -> Value {
        let levels: Vec<Vec<Value>> = self
            .levels
            .iter()
            .map(|level| level.iter().map(|&e| self.encode(e)).collect())
            .collect();
        serde_json::json!({
            "kind": self.kind.as_str(),
            "t": self.t,
            "n": self.n,
            "levels": levels,
        })
    }

    /// Rebuilds a poset from its JSON form, checking that the listed levels
    /// are exactly the canonical ones.
    pub fn from_json(v: &Value, limits: &Limits) -> Result<GradedPoset> {
        #[derive(Deserialize)]
        struct Doc {
            kind: PosetKind,
            t: u32,
            n: u32,
            levels: Option<Vec<Vec<Value>>>,
        }
        let doc: Doc = serde_json::from_value(v.clone())?;
        let poset = build_poset(doc.kind, doc.t, doc.n, limits)?;
        if let Some(levels) = doc.levels {
            if levels.len() != poset.num_levels() {
                return Err(Error::Malformed("level count mismatch".into()));
            }
            for (i, level) in levels.iter().enumerate() {
                let decoded = level
                    .iter()
                    .map(|v| poset.decode(v))
                    .collect::<Result<Vec<_>>>()?;
                if decoded != poset.levels[i] {
                    return Err(Error::Malformed(format!(
                        "level {i} does not match the canonical level"
                    )));
                }
            }
        }
        Ok(poset)
    }

    /// Human-readable element, e.g. `{1,3}` or `(1,2,3)`.
    pub fn display(&self, e: Element) -> String {
        match self.kind {
            PosetKind::Boolean => {
                let items: Vec<String> = (0..self.n)
                    .filter(|i| e.0 >> i & 1 == 1)
                    .map(|i| (i + 1).to_string())
                    .collect();
                format!("{{{}}}", items.join(","))
            }
            PosetKind::Hypergrid => {
                let items: Vec<String> = self.coords(e).iter().map(u32::to_string).collect();
                format!("({})", items.join(","))
            }
        }
    }
}

/// Cover bigraph between levels `L_i` and `L_{i+1}`, with vertices given by
/// their positions inside the two levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelBigraph {
    pub lower: usize,
    /// For each element of `L_i`, the sorted positions of its up-covers.
    pub up: Vec<Vec<u32>>,
    /// For each element of `L_{i+1}`, the sorted positions of its down-covers.
    pub down: Vec<Vec<u32>>,
}

impl LevelBigraph {
    pub fn lower_degrees(&self) -> Vec<usize> {
        self.up.iter().map(Vec::len).collect()
    }

    pub fn upper_degrees(&self) -> Vec<usize> {
        self.down.iter().map(Vec::len).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.up.iter().map(Vec::len).sum()
    }
}

pub fn level_bigraph(poset: &GradedPoset, i: usize, limits: &Limits) -> Result<LevelBigraph> {
    if i + 1 >= poset.num_levels() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: poset.num_levels().saturating_sub(1),
        });
    }
    let lower = poset.level(i);
    let upper = poset.level(i + 1);
    let edges = lower.len() * poset.n() as usize;
    if edges > limits.max_level_edges {
        let actual: usize = lower.iter().map(|&e| poset.up_covers(e).len()).sum();
        if actual > limits.max_level_edges {
            return Err(Error::budget(
                "level edge",
                actual as u64,
                limits.max_level_edges as u64,
            ));
        }
    }
    let mut up = Vec::with_capacity(lower.len());
    let mut down = vec![Vec::new(); upper.len()];
    for (xi, &x) in lower.iter().enumerate() {
        let ys: Vec<u32> = poset
            .up_covers(x)
            .into_iter()
            .map(|y| upper.binary_search(&y).expect("cover lies in next level") as u32)
            .collect();
        for &y in &ys {
            down[y as usize].push(xi as u32);
        }
        up.push(ys);
    }
    Ok(LevelBigraph { lower: i, up, down })
}
