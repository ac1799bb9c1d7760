//! Scaled normalized matching flows (SNMF) on `[t]^n`.
//!
//! Between consecutive levels `L_i` and `L_{i+1}` an SNMF puts a weight
//! `f(xy) >= 0` on every cover edge so that every `x ∈ L_i` sends exactly 1
//! upward and every `y ∈ L_{i+1}` receives exactly `|L_i| / |L_{i+1}|`.
//! Each level pair is an independent transportation problem. We solve it as
//! an integer max-flow after scaling all weights by a common denominator
//! `D = |L_{i+1}|·s`, so every returned weight is an exact rational
//! `num / D`.
//!
//! [`minimize_max_weight`] additionally caps every edge at `c / D` and
//! binary-searches the smallest integer `c` for which the network still
//! saturates. Integer max-flow is integral, so the search is exact on the
//! scaled grid; `s` is chosen so that `D ≈ 10^12`.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gadget::{SliceFlow, ThreeLevelPoset, YLabel};
use crate::limits::Limits;
use crate::poset::{level_bigraph, Element, GradedPoset, LevelBigraph};

/// Target magnitude of the common denominator used by
/// [`minimize_max_weight`].
pub const MINMAX_SCALE: u64 = 1_000_000_000_000;

/// Per-vertex tolerance used when validating flows in floating point.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Dinic's algorithm on a small adjacency-list network.
struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    /// Adds `u → v` with capacity `c`; returns the edge id.
    fn add_edge(&mut self, u: usize, v: usize, c: i64) -> usize {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0);
        id
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let n = self.head.len();
        let mut total = 0;
        let mut level = vec![usize::MAX; n];
        let mut next = vec![0usize; n];
        let mut queue = Vec::with_capacity(n);
        loop {
            level.fill(usize::MAX);
            level[s] = 0;
            queue.clear();
            queue.push(s);
            let mut qi = 0;
            while qi < queue.len() {
                let u = queue[qi];
                qi += 1;
                for &e in &self.head[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            next.fill(0);
            loop {
                let pushed = self.augment(s, t, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(
        &mut self,
        u: usize,
        t: usize,
        limit: i64,
        level: &[usize],
        next: &mut [usize],
    ) -> i64 {
        if u == t {
            return limit;
        }
        while next[u] < self.head[u].len() {
            let e = self.head[u][next[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let pushed = self.augment(v, t, limit.min(self.cap[e]), level, next);
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }
}

/// The transportation problem of one level pair, in integer units of
/// `1 / denom`.
pub struct PairProblem<'g> {
    graph: &'g LevelBigraph,
    /// Units each lower vertex sends (`denom`, i.e. weight 1).
    supply: i64,
    /// Units each upper vertex receives (`|L_i|·s`).
    demand: i64,
    denom: u64,
}

impl<'g> PairProblem<'g> {
    /// `scale` is `s` in `denom = |L_{i+1}|·s`.
    pub fn new(graph: &'g LevelBigraph, scale: u64) -> Result<Self> {
        let (p, q) = (graph.up.len() as u64, graph.down.len() as u64);
        let denom = q
            .checked_mul(scale)
            .filter(|&d| p.checked_mul(d).is_some_and(|t| t < i64::MAX as u64))
            .ok_or_else(|| {
                Error::InvalidParameter(format!("scale {scale} overflows for level sizes {p}, {q}"))
            })?;
        Ok(PairProblem {
            graph,
            supply: denom as i64,
            demand: (p * scale) as i64,
            denom,
        })
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    /// A feasible flow with every edge at most `cap` units, as per-lower-vertex
    /// lists of `(upper index, units)`, or `None` if none exists.
    pub fn solve(&self, cap: u64) -> Option<Vec<Vec<(u32, u64)>>> {
        let (p, q) = (self.graph.up.len(), self.graph.down.len());
        let (s, t) = (p + q, p + q + 1);
        let mut net = FlowNetwork::new(p + q + 2);
        let cap = cap.min(self.denom) as i64;
        for x in 0..p {
            net.add_edge(s, x, self.supply);
        }
        let mut ids = Vec::with_capacity(p);
        for (x, ys) in self.graph.up.iter().enumerate() {
            ids.push(
                ys.iter()
                    .map(|&y| (y, net.add_edge(x, p + y as usize, cap)))
                    .collect::<Vec<_>>(),
            );
        }
        for y in 0..q {
            net.add_edge(p + y, t, self.demand);
        }
        let flow = net.max_flow(s, t);
        if flow != self.supply * p as i64 {
            return None;
        }
        Some(
            ids.into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|(y, e)| (y, (cap - net.cap[e]) as u64))
                        .filter(|&(_, units)| units > 0)
                        .collect()
                })
                .collect(),
        )
    }

    /// A cap (in units) that is certainly infeasible: some lower vertex of
    /// degree `d` cannot push `denom` units through `d` edges of capacity
    /// `ceil(denom / d) - 1`.
    fn infeasible_cap(&self) -> u64 {
        let dmax_lower = self.graph.up.iter().map(Vec::len).max().unwrap_or(1).max(1) as u64;
        let lower = self.denom.div_ceil(dmax_lower);
        let dmax_upper = self
            .graph
            .down
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(1)
            .max(1) as u64;
        let upper = (self.demand as u64).div_ceil(dmax_upper);
        lower.max(upper).saturating_sub(1)
    }
}

/// The flow on one level pair `(L_i, L_{i+1})`; the weight of an edge is
/// `units / denom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFlow {
    pub lower: usize,
    pub lower_size: usize,
    pub upper_size: usize,
    pub denom: u64,
    /// For each element of `L_i`, `(index in L_{i+1}, units)` sorted by index.
    /// Edges carrying no flow are omitted.
    pub edges: Vec<Vec<(u32, u64)>>,
}

/// Per-pair validation summary.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    pub lower: usize,
    pub exact: bool,
    pub max_up_error: f64,
    pub max_down_error: f64,
}

impl PairCheck {
    pub fn within(&self, tol: f64) -> bool {
        self.max_up_error <= tol && self.max_down_error <= tol
    }
}

impl PairFlow {
    /// Weight of `x → y` (positions within their levels); zero when absent.
    pub fn weight(&self, x: usize, y: usize) -> BigRational {
        let units = self.edges[x]
            .binary_search_by_key(&(y as u32), |&(to, _)| to)
            .map_or(0, |k| self.edges[x][k].1);
        BigRational::new(BigInt::from(units), BigInt::from(self.denom))
    }

    pub fn max_units(&self) -> u64 {
        self.edges
            .iter()
            .flatten()
            .map(|&(_, u)| u)
            .max()
            .unwrap_or(0)
    }

    pub fn max_weight(&self) -> BigRational {
        BigRational::new(BigInt::from(self.max_units()), BigInt::from(self.denom))
    }

    /// Checks up-sums `= 1` and down-sums `= |L_i| / |L_{i+1}|`, both exactly
    /// and in floating point.
    pub fn check(&self) -> PairCheck {
        let (p, q) = (self.lower_size as u128, self.upper_size as u128);
        let d = self.denom as u128;
        let mut exact = self.edges.len() == self.lower_size;
        let mut max_up = 0f64;
        let mut down = vec![0u128; self.upper_size];
        for row in &self.edges {
            let sum: u128 = row.iter().map(|&(_, u)| u as u128).sum();
            exact &= sum == d;
            max_up = max_up.max((sum as f64 / d as f64 - 1.0).abs());
            for &(y, u) in row {
                down[y as usize] += u as u128;
            }
        }
        let target = p as f64 / q as f64;
        let mut max_down = 0f64;
        for &s in &down {
            // s / d == p / q  ⇔  s·q == p·d
            exact &= s * q == p * d;
            max_down = max_down.max((s as f64 / d as f64 - target).abs());
        }
        PairCheck {
            lower: self.lower,
            exact,
            max_up_error: max_up,
            max_down_error: max_down,
        }
    }
}

/// An SNMF restricted to a contiguous range of level pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snmf {
    pairs: Vec<PairFlow>,
}

impl Snmf {
    pub fn pairs(&self) -> &[PairFlow] {
        &self.pairs
    }

    /// The flow between `L_i` and `L_{i+1}`, if that pair was solved.
    pub fn pair(&self, i: usize) -> Option<&PairFlow> {
        let first = self.pairs.first()?.lower;
        self.pairs.get(i.checked_sub(first)?)
    }

    pub fn check(&self) -> Vec<PairCheck> {
        self.pairs.iter().map(PairFlow::check).collect()
    }

    /// Weight of the cover edge `x ≺ y` of `poset`.
    pub fn edge_weight(&self, poset: &GradedPoset, x: Element, y: Element) -> Result<BigRational> {
        let i = poset
            .try_rank(x)
            .ok_or_else(|| Error::ForeignElement(x.to_string()))?;
        let pair = self
            .pair(i)
            .ok_or_else(|| Error::InvalidParameter(format!("level pair {i} was not solved")))?;
        let xi = poset.index_in_level(x).expect("x is an element");
        let yi = poset
            .index_in_level(y)
            .filter(|_| poset.covers(x, y))
            .ok_or_else(|| Error::InvalidParameter(format!("{y} does not cover {x}")))?;
        Ok(pair.weight(xi, yi))
    }

    /// Restricts the flow to a labelled three-level poset (a slice, or a
    /// glued poset whose middle vertices remember both host elements).
    pub fn slice_flow(&self, poset: &GradedPoset, p3: &ThreeLevelPoset) -> Result<SliceFlow> {
        let labels = p3.labels().ok_or_else(|| {
            Error::InvalidParameter("three-level poset has no host labels".into())
        })?;
        let (bottom, top): (Vec<Element>, Vec<Element>) = labels
            .y
            .iter()
            .map(|l| match *l {
                YLabel::Single(e) => (e, e),
                YLabel::Glued { bottom, top } => (bottom, top),
            })
            .unzip();
        let xy = p3
            .x_up()
            .iter()
            .enumerate()
            .map(|(x, ys)| {
                ys.iter()
                    .map(|&y| self.edge_weight(poset, labels.x[x], bottom[y as usize]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let yz = p3
            .z_down()
            .iter()
            .enumerate()
            .map(|(z, ys)| {
                ys.iter()
                    .map(|&y| self.edge_weight(poset, top[y as usize], labels.z[z]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SliceFlow { xy, yz })
    }

    /// Flow dump: one object per pair, `{ "i", "edges": [{ "from", "to",
    /// "weight" }] }`, plus the exact `num` / `den` of each weight.
    pub fn to_json(&self, poset: &GradedPoset) -> Value {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|pf| {
                let lower = poset.level(pf.lower);
                let upper = poset.level(pf.lower + 1);
                let edges: Vec<Value> = pf
                    .edges
                    .iter()
                    .enumerate()
                    .flat_map(|(x, row)| {
                        row.iter().map(move |&(y, u)| {
                            serde_json::json!({
                                "from": poset.encode(lower[x]),
                                "to": poset.encode(upper[y as usize]),
                                "weight": u as f64 / pf.denom as f64,
                                "num": u.to_string(),
                                "den": pf.denom.to_string(),
                            })
                        })
                    })
                    .collect();
                serde_json::json!({
                    "i": pf.lower,
                    "max_weight": pf.max_units() as f64 / pf.denom as f64,
                    "edges": edges,
                })
            })
            .collect();
        Value::from(pairs)
    }
}

fn pair_range(
    poset: &GradedPoset,
    range: Option<RangeInclusive<usize>>,
) -> Result<RangeInclusive<usize>> {
    let last = poset.total_rank() - 1;
    match range {
        None => Ok(0..=last),
        Some(r) if r.start() <= r.end() && *r.end() <= last => Ok(r),
        Some(r) => Err(Error::InvalidParameter(format!(
            "pair range {}..={} outside 0..={last}",
            r.start(),
            r.end()
        ))),
    }
}

fn solve_pair(poset: &GradedPoset, i: usize, limits: &Limits, minimize: bool) -> Result<PairFlow> {
    let graph = level_bigraph(poset, i, limits)?;
    let q = graph.down.len() as u64;
    let scale = if minimize {
        MINMAX_SCALE.div_ceil(q).max(1)
    } else {
        1
    };
    let problem = PairProblem::new(&graph, scale)?;
    let edges = if minimize {
        let (mut lo, mut hi) = (problem.infeasible_cap(), problem.denom());
        let mut best = problem.solve(hi).ok_or_else(|| {
            Error::Internal(format!("level pair {i} admits no normalized matching flow"))
        })?;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match problem.solve(mid) {
                Some(flow) => {
                    hi = mid;
                    best = flow;
                }
                None => lo = mid,
            }
        }
        best
    } else {
        problem.solve(problem.denom()).ok_or_else(|| {
            Error::Internal(format!("level pair {i} admits no normalized matching flow"))
        })?
    };
    Ok(PairFlow {
        lower: i,
        lower_size: graph.up.len(),
        upper_size: graph.down.len(),
        denom: problem.denom(),
        edges,
    })
}

/// An SNMF on every level pair, with weights over `D = |L_{i+1}|`.
pub fn compute_snmf(poset: &GradedPoset, limits: &Limits) -> Result<Snmf> {
    compute_snmf_range(poset, None, limits)
}

pub fn compute_snmf_range(
    poset: &GradedPoset,
    range: Option<RangeInclusive<usize>>,
    limits: &Limits,
) -> Result<Snmf> {
    let range = pair_range(poset, range)?;
    let pairs = range
        .into_par_iter()
        .map(|i| solve_pair(poset, i, limits, false))
        .collect::<Result<Vec<_>>>()?;
    Ok(Snmf { pairs })
}

/// Result of [`minimize_max_weight`].
#[derive(Clone, Debug)]
pub struct MinMaxFlow {
    pub snmf: Snmf,
    /// `(i, W_i)` for each solved pair.
    pub per_pair: Vec<(usize, BigRational)>,
    pub global: BigRational,
}

impl MinMaxFlow {
    pub fn pair_weight(&self, i: usize) -> Option<&BigRational> {
        self.per_pair.iter().find(|(j, _)| *j == i).map(|(_, w)| w)
    }
}

/// An SNMF whose largest edge weight on each requested pair is as small as
/// possible, to within `1 / D ≈ 10^-12`.
pub fn minimize_max_weight(
    poset: &GradedPoset,
    range: Option<RangeInclusive<usize>>,
    limits: &Limits,
) -> Result<MinMaxFlow> {
    let range = pair_range(poset, range)?;
    let pairs = range
        .into_par_iter()
        .map(|i| solve_pair(poset, i, limits, true))
        .collect::<Result<Vec<_>>>()?;
    let per_pair: Vec<(usize, BigRational)> =
        pairs.iter().map(|p| (p.lower, p.max_weight())).collect();
    let global = per_pair
        .iter()
        .map(|(_, w)| w.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    Ok(MinMaxFlow {
        snmf: Snmf { pairs },
        per_pair,
        global,
    })
}

/// Level pairs `(L_i, L_{i+1})` whose lower rank lies in the central band
/// `|i - (t-1)n/2| <= t·n^{3/5}`.
pub fn central_pairs(poset: &GradedPoset) -> RangeInclusive<usize> {
    let m = poset.total_rank() as f64 / 2.0;
    let band = poset.t() as f64 * (poset.n() as f64).powf(0.6);
    let lo = (m - band).ceil().max(0.0) as usize;
    let hi = ((m + band).floor() as usize).min(poset.total_rank() - 1);
    lo..=hi
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
