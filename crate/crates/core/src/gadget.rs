//! Three-level rank-symmetric posets and the two-copy bipartite gadget whose
//! perfect matchings are in bijection with their symmetric chain
//! decompositions.
//!
//! For a poset with levels `X`, `Y`, `Z` (`|X| = |Z| = a`, `|Y| = b`) the
//! gadget has rows `Y_1 ∪ X` and columns `Y_2 ∪ Z`, in that order, each part
//! in canonical order:
//!
//! * `x – y_2` for every `x ≺ y`,
//! * `y_1 – z` for every `y ≺ z`,
//! * `y_1 – y_2` between the two copies of each `y`.
//!
//! A perfect matching uses the copy edge of `y` iff `y` is a singleton chain;
//! otherwise the partners of `y_2` and `y_1` are the bottom and top of the
//! three-element chain through `y`.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::permanent::{for_each_perfect_matching, Bigraph, SquareMatrix};
use crate::poset::{Element, GradedPoset};
use crate::scd::{validate_scd, Chain, GradedOrder, Scd};

/// An element of a [`ThreeLevelPoset`]: level and position in the level.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TlElem {
    X(u32),
    Y(u32),
    Z(u32),
}

/// Where a middle vertex came from when the poset was cut out of a
/// [`GradedPoset`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum YLabel {
    Single(Element),
    /// Two levels identified along an endpoint bijection.
    Glued {
        bottom: Element,
        top: Element,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceLabels {
    pub x: Vec<Element>,
    pub y: Vec<YLabel>,
    pub z: Vec<Element>,
}

/// A poset with three levels `X < Y < Z`, `|X| = |Z| <= |Y|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeLevelPoset {
    x_up: Vec<Vec<u32>>,
    z_down: Vec<Vec<u32>>,
    y_down: Vec<Vec<u32>>,
    y_up: Vec<Vec<u32>>,
    labels: Option<SliceLabels>,
}

pub type ThreeLevelScd = Scd<TlElem>;

impl ThreeLevelPoset {
    /// `x_up[x]` lists the middle vertices above `x`; `z_down[z]` those
    /// below `z`.
    pub fn new(b: usize, x_up: Vec<Vec<u32>>, z_down: Vec<Vec<u32>>) -> Result<Self> {
        let a = x_up.len();
        if z_down.len() != a {
            return Err(Error::InvalidParameter(format!(
                "|X| = {a} but |Z| = {}",
                z_down.len()
            )));
        }
        if a > b {
            return Err(Error::InvalidParameter(format!(
                "|X| = {a} exceeds |Y| = {b}"
            )));
        }
        let mut y_down = vec![Vec::new(); b];
        let mut y_up = vec![Vec::new(); b];
        let mut x_up = x_up;
        let mut z_down = z_down;
        for (x, ys) in x_up.iter_mut().enumerate() {
            ys.sort_unstable();
            ys.dedup();
            for &y in ys.iter() {
                let slot = y_down.get_mut(y as usize).ok_or(Error::IndexOutOfRange {
                    index: y as usize,
                    len: b,
                })?;
                slot.push(x as u32);
            }
        }
        for (z, ys) in z_down.iter_mut().enumerate() {
            ys.sort_unstable();
            ys.dedup();
            for &y in ys.iter() {
                let slot = y_up.get_mut(y as usize).ok_or(Error::IndexOutOfRange {
                    index: y as usize,
                    len: b,
                })?;
                slot.push(z as u32);
            }
        }
        Ok(ThreeLevelPoset {
            x_up,
            z_down,
            y_down,
            y_up,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: SliceLabels) -> Self {
        debug_assert_eq!(labels.x.len(), self.a());
        debug_assert_eq!(labels.y.len(), self.b());
        self.labels = Some(labels);
        self
    }

    /// Levels `L_{i-1}, L_i, L_{i+1}` of `poset`; needs `|L_{i-1}| = |L_{i+1}|`.
    pub fn slice(poset: &GradedPoset, middle: usize) -> Result<Self> {
        if middle == 0 || middle + 1 >= poset.num_levels() {
            return Err(Error::IndexOutOfRange {
                index: middle,
                len: poset.num_levels(),
            });
        }
        let (xs, ys, zs) = (
            poset.level(middle - 1),
            poset.level(middle),
            poset.level(middle + 1),
        );
        if xs.len() != zs.len() {
            return Err(Error::InvalidParameter(format!(
                "levels {} and {} have sizes {} and {}",
                middle - 1,
                middle + 1,
                xs.len(),
                zs.len()
            )));
        }
        let pos = |e: Element| ys.binary_search(&e).expect("cover in middle level") as u32;
        let x_up = xs
            .iter()
            .map(|&x| poset.up_covers(x).into_iter().map(pos).collect())
            .collect();
        let z_down = zs
            .iter()
            .map(|&z| poset.down_covers(z).into_iter().map(pos).collect())
            .collect();
        let labels = SliceLabels {
            x: xs.to_vec(),
            y: ys.iter().map(|&y| YLabel::Single(y)).collect(),
            z: zs.to_vec(),
        };
        Ok(Self::new(ys.len(), x_up, z_down)?.with_labels(labels))
    }

    /// The slice around the middle level; the total rank must be even.
    pub fn central_slice(poset: &GradedPoset) -> Result<Self> {
        let m = poset.total_rank();
        if m % 2 == 1 {
            return Err(Error::InvalidParameter(format!(
                "total rank {m} is odd; there is no single middle level"
            )));
        }
        Self::slice(poset, m / 2)
    }

    pub fn a(&self) -> usize {
        self.x_up.len()
    }

    pub fn b(&self) -> usize {
        self.y_down.len()
    }

    pub fn x_up(&self) -> &[Vec<u32>] {
        &self.x_up
    }

    pub fn z_down(&self) -> &[Vec<u32>] {
        &self.z_down
    }

    pub fn y_down(&self) -> &[Vec<u32>] {
        &self.y_down
    }

    pub fn y_up(&self) -> &[Vec<u32>] {
        &self.y_up
    }

    pub fn labels(&self) -> Option<&SliceLabels> {
        self.labels.as_ref()
    }

    /// Common degree `r` of `X ∪ Z` if the poset is regular, i.e. every
    /// `x`, `z` has `r` neighbours in `Y` and every `y` has `r·a/b` on each
    /// side.
    pub fn regular_degree(&self) -> Result<usize> {
        let (a, b) = (self.a(), self.b());
        let r = self.x_up.first().map_or(0, Vec::len);
        let bad = |vertex: String, degree: usize, expected: String| Error::NotRegular {
            vertex,
            degree,
            expected,
        };
        if a == 0 || r == 0 {
            return Err(bad("x0".into(), r, "a positive degree".into()));
        }
        for (x, ys) in self.x_up.iter().enumerate() {
            if ys.len() != r {
                return Err(bad(format!("x{x}"), ys.len(), r.to_string()));
            }
        }
        for (z, ys) in self.z_down.iter().enumerate() {
            if ys.len() != r {
                return Err(bad(format!("z{z}"), ys.len(), r.to_string()));
            }
        }
        if !(r * a).is_multiple_of(b) {
            return Err(bad(
                "y".into(),
                0,
                format!("r·a/b = {r}·{a}/{b}, not an integer"),
            ));
        }
        let ry = r * a / b;
        for y in 0..b {
            if self.y_down[y].len() != ry {
                return Err(bad(
                    format!("y{y} (down)"),
                    self.y_down[y].len(),
                    ry.to_string(),
                ));
            }
            if self.y_up[y].len() != ry {
                return Err(bad(
                    format!("y{y} (up)"),
                    self.y_up[y].len(),
                    ry.to_string(),
                ));
            }
        }
        Ok(r)
    }

    /// Maps a decomposition of a slice back to elements of the host poset.
    /// Only valid for posets built by [`ThreeLevelPoset::slice`].
    pub fn to_host_chains(&self, scd: &ThreeLevelScd) -> Result<Vec<Chain>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("poset carries no host labels".into()))?;
        scd.chains()
            .iter()
            .map(|c| {
                c.0.iter()
                    .map(|&e| match e {
                        TlElem::X(i) => Ok(labels.x[i as usize]),
                        TlElem::Z(i) => Ok(labels.z[i as usize]),
                        TlElem::Y(i) => match labels.y[i as usize] {
                            YLabel::Single(y) => Ok(y),
                            YLabel::Glued { .. } => Err(Error::InvalidParameter(
                                "glued middle vertices have no single host element".into(),
                            )),
                        },
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Chain)
            })
            .collect()
    }
}

impl GradedOrder for ThreeLevelPoset {
    type Elem = TlElem;

    fn total_rank(&self) -> usize {
        2
    }

    fn rank_of(&self, e: TlElem) -> Option<usize> {
        match e {
            TlElem::X(i) if (i as usize) < self.a() => Some(0),
            TlElem::Y(i) if (i as usize) < self.b() => Some(1),
            TlElem::Z(i) if (i as usize) < self.a() => Some(2),
            _ => None,
        }
    }

    fn is_cover(&self, lo: TlElem, hi: TlElem) -> bool {
        match (lo, hi) {
            (TlElem::X(x), TlElem::Y(y)) => self
                .x_up
                .get(x as usize)
                .is_some_and(|ys| ys.binary_search(&y).is_ok()),
            (TlElem::Y(y), TlElem::Z(z)) => self
                .z_down
                .get(z as usize)
                .is_some_and(|ys| ys.binary_search(&y).is_ok()),
            _ => false,
        }
    }

    fn element_total(&self) -> usize {
        2 * self.a() + self.b()
    }

    fn largest_level(&self) -> usize {
        self.b()
    }
}

/// The 0/1 support of the gadget of `p3`; defined for any three-level poset,
/// regular or not.
pub fn gadget_support(p3: &ThreeLevelPoset) -> Bigraph {
    let b = p3.b();
    let mut adj = Vec::with_capacity(p3.a() + b);
    for y in 0..b {
        let mut row = vec![y];
        row.extend(p3.y_up[y].iter().map(|&z| b + z as usize));
        adj.push(row);
    }
    for ys in &p3.x_up {
        adj.push(ys.iter().map(|&y| y as usize).collect());
    }
    Bigraph::new(b + p3.a(), adj)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// `y_1 – y_2`.
    Copy,
    /// `x – y_2`.
    XSide,
    /// `y_1 – z`.
    ZSide,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GadgetEdge {
    pub col: usize,
    pub weight: BigRational,
    pub kind: EdgeKind,
}

/// The weighted gadget of a three-level poset.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBigraph {
    poset: ThreeLevelPoset,
    rows: Vec<Vec<GadgetEdge>>,
}

/// How strictly [`build_gadget_snmf`] checks the flow's vertex sums.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum SumCheck {
    Exact,
    Tolerance(f64),
}

/// Edge weights of a flow restricted to a three-level poset, aligned with
/// [`ThreeLevelPoset::x_up`] and [`ThreeLevelPoset::z_down`].
#[derive(Clone, Debug, PartialEq)]
pub struct SliceFlow {
    /// `xy[x][k]` is `f(x, x_up[x][k])`.
    pub xy: Vec<Vec<BigRational>>,
    /// `yz[z][k]` is `f(z_down[z][k], z)`.
    pub yz: Vec<Vec<BigRational>>,
}

impl SliceFlow {
    /// Largest edge weight, `W`.
    pub fn max_weight(&self) -> BigRational {
        self.xy
            .iter()
            .chain(&self.yz)
            .flatten()
            .cloned()
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Each vertex spreads its unit up-sum evenly: `f(xy) = 1/deg⁺(x)`,
    /// `f(yz) = 1/deg⁺(y)`. A scaled normalized matching whenever the poset
    /// is regular.
    pub fn uniform(p3: &ThreeLevelPoset) -> Self {
        let inv = |d: usize| BigRational::new(BigInt::one(), BigInt::from(d.max(1)));
        SliceFlow {
            xy: p3
                .x_up
                .iter()
                .map(|ys| vec![inv(ys.len()); ys.len()])
                .collect(),
            yz: p3
                .z_down
                .iter()
                .map(|ys| ys.iter().map(|&y| inv(p3.y_up[y as usize].len())).collect())
                .collect(),
        }
    }
}

fn ratio(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

impl WeightedBigraph {
    pub fn three_level(&self) -> &ThreeLevelPoset {
        &self.poset
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<GadgetEdge>] {
        &self.rows
    }

    pub fn support(&self) -> Bigraph {
        Bigraph::new(
            self.size(),
            self.rows
                .iter()
                .map(|r| r.iter().map(|e| e.col).collect())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> SquareMatrix<BigRational> {
        let k = self.size();
        let mut rows = vec![vec![BigRational::zero(); k]; k];
        for (i, r) in self.rows.iter().enumerate() {
            for e in r {
                rows[i][e.col] = e.weight.clone();
            }
        }
        SquareMatrix::from_rows(rows).expect("square by construction")
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|e| &e.weight).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<BigRational> {
        let mut sums = vec![BigRational::zero(); self.size()];
        for r in &self.rows {
            for e in r {
                sums[e.col] += &e.weight;
            }
        }
        sums
    }

    /// Exact check: nonnegative entries, all row and column sums equal 1.
    pub fn is_doubly_stochastic(&self) -> bool {
        let one = BigRational::one();
        self.rows.iter().flatten().all(|e| !e.weight.is_negative())
            && self.row_sums().iter().all(|s| *s == one)
            && self.col_sums().iter().all(|s| *s == one)
    }

    fn edge(&self, row: usize, col: usize) -> Option<&GadgetEdge> {
        self.rows.get(row)?.iter().find(|e| e.col == col)
    }

    /// Product of the weights of the matched edges.
    pub fn matching_weight(&self, m: &[usize]) -> Result<BigRational> {
        let mut w = BigRational::one();
        for (row, &col) in m.iter().enumerate() {
            let e = self.edge(row, col).ok_or_else(|| {
                Error::NotPerfectMatching(format!("({row}, {col}) is not an edge"))
            })?;
            w *= &e.weight;
        }
        Ok(w)
    }

    /// JSON dump `{ "size", "rows": [[{ "col", "num", "den" }, ...], ...],
    /// "vertex_maps" }`. Numerators and denominators are decimal strings.
    pub fn to_json(&self, host: Option<&GradedPoset>) -> Value {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| {
                        serde_json::json!({
                            "col": e.col,
                            "num": e.weight.numer().to_string(),
                            "den": e.weight.denom().to_string(),
                        })
                    })
                    .collect()
            })
            .collect();
        let (a, b) = (self.poset.a(), self.poset.b());
        let labels = self.poset.labels.as_ref();
        let encode_y = |y: usize| -> Value {
            match (labels, host) {
                (Some(l), Some(h)) => match l.y[y] {
                    YLabel::Single(e) => h.encode(e),
                    YLabel::Glued { bottom, top } => {
                        Value::from(vec![h.encode(bottom), h.encode(top)])
                    }
                },
                _ => Value::Null,
            }
        };
        let encode = |e: Option<Element>| -> Value {
            match (e, host) {
                (Some(e), Some(h)) => h.encode(e),
                _ => Value::Null,
            }
        };
        let vertex = |part: &str, index: usize, element: Value| serde_json::json!({ "part": part, "index": index, "element": element });
        let row_map: Vec<Value> = (0..b)
            .map(|y| vertex("Y1", y, encode_y(y)))
            .chain((0..a).map(|x| vertex("X", x, encode(labels.map(|l| l.x[x])))))
            .collect();
        let col_map: Vec<Value> = (0..b)
            .map(|y| vertex("Y2", y, encode_y(y)))
            .chain((0..a).map(|z| vertex("Z", z, encode(labels.map(|l| l.z[z])))))
            .collect();
        serde_json::json!({
            "size": self.size(),
            "rows": rows,
            "vertex_maps": { "rows": row_map, "cols": col_map },
        })
    }
}

/// Reads the matrix part of a dump written by [`WeightedBigraph::to_json`].
pub fn matrix_from_json(v: &Value) -> Result<SquareMatrix<BigRational>> {
    #[derive(Deserialize)]
    struct Entry {
        col: usize,
        num: String,
        den: String,
    }
    #[derive(Deserialize)]
    struct Dump {
        size: usize,
        rows: Vec<Vec<Entry>>,
    }
    let dump: Dump = serde_json::from_value(v.clone())?;
    if dump.rows.len() != dump.size {
        return Err(Error::Malformed(format!(
            "size is {} but {} rows given",
            dump.size,
            dump.rows.len()
        )));
    }
    let parse = |s: &str| -> Result<BigInt> {
        s.parse::<BigInt>()
            .map_err(|_| Error::Malformed(format!("`{s}` is not an integer")))
    };
    let mut rows = vec![vec![BigRational::zero(); dump.size]; dump.size];
    for (i, r) in dump.rows.iter().enumerate() {
        for e in r {
            if e.col >= dump.size {
                return Err(Error::Malformed(format!("column {} out of range", e.col)));
            }
            let den = parse(&e.den)?;
            if den.is_zero() {
                return Err(Error::Malformed("zero denominator".into()));
            }
            rows[i][e.col] = BigRational::new(parse(&e.num)?, den);
        }
    }
    SquareMatrix::from_rows(rows)
}

fn assemble(
    p3: &ThreeLevelPoset,
    x_weight: impl Fn(usize, usize) -> BigRational,
    z_weight: impl Fn(usize, usize) -> BigRational,
) -> WeightedBigraph {
    let (a, b) = (p3.a(), p3.b());
    let copy = BigRational::one() - ratio(a, b);
    let mut rows = Vec::with_capacity(a + b);
    for y in 0..b {
        let mut row = vec![GadgetEdge {
            col: y,
            weight: copy.clone(),
            kind: EdgeKind::Copy,
        }];
        for &z in &p3.y_up[y] {
            let k = p3.z_down[z as usize]
                .binary_search(&(y as u32))
                .expect("symmetric adjacency");
            row.push(GadgetEdge {
                col: b + z as usize,
                weight: z_weight(z as usize, k),
                kind: EdgeKind::ZSide,
            });
        }
        rows.push(row);
    }
    for (x, ys) in p3.x_up.iter().enumerate() {
        rows.push(
            ys.iter()
                .enumerate()
                .map(|(k, &y)| GadgetEdge {
                    col: y as usize,
                    weight: x_weight(x, k),
                    kind: EdgeKind::XSide,
                })
                .collect(),
        );
    }
    WeightedBigraph {
        poset: p3.clone(),
        rows,
    }
}

/// Gadget of a regular three-level poset: side edges `1/r`, copy edges
/// `1 - a/b`.
pub fn build_gadget_regular(p3: &ThreeLevelPoset) -> Result<WeightedBigraph> {
    let r = p3.regular_degree()?;
    let side = ratio(1, r);
    let g = assemble(p3, |_, _| side.clone(), |_, _| side.clone());
    if !g.is_doubly_stochastic() {
        return Err(Error::Internal(
            "regular gadget is not doubly stochastic".into(),
        ));
    }
    Ok(g)
}

/// Gadget weighted by a scaled normalized matching flow: `x – y_2` gets
/// `f(xy)`, `y_1 – z` gets `(a/b)·f(yz)`, copy edges `1 - a/b`.
pub fn build_gadget_snmf(
    p3: &ThreeLevelPoset,
    f: &SliceFlow,
    check: SumCheck,
) -> Result<WeightedBigraph> {
    let (a, b) = (p3.a(), p3.b());
    if f.xy.len() != a
        || f.yz.len() != a
        || f.xy.iter().zip(&p3.x_up).any(|(w, ys)| w.len() != ys.len())
        || f.yz
            .iter()
            .zip(&p3.z_down)
            .any(|(w, ys)| w.len() != ys.len())
    {
        return Err(Error::InvalidParameter(
            "flow does not match the poset's edges".into(),
        ));
    }
    if f.xy.iter().chain(&f.yz).flatten().any(Signed::is_negative) {
        return Err(Error::InvalidParameter("flow has a negative weight".into()));
    }
    let close = |sum: &BigRational, want: &BigRational| match check {
        SumCheck::Exact => sum == want,
        SumCheck::Tolerance(tol) => {
            (sum.to_f64().unwrap_or(f64::NAN) - want.to_f64().unwrap_or(f64::NAN)).abs() <= tol
        }
    };
    let fail = |vertex: String, sum: &BigRational, want: &BigRational| Error::NotSnmf {
        vertex,
        sum: format!("{sum} (≈{:.12})", sum.to_f64().unwrap_or(f64::NAN)),
        expected: want.to_string(),
    };
    let one = BigRational::one();
    let y_from_x = ratio(a, b);
    let z_from_y = ratio(b, a.max(1));
    let mut down_y = vec![BigRational::zero(); b];
    let mut up_y = vec![BigRational::zero(); b];
    for (x, ws) in f.xy.iter().enumerate() {
        let s: BigRational = ws.iter().sum();
        if !close(&s, &one) {
            return Err(fail(format!("x{x} (up)"), &s, &one));
        }
        for (w, &y) in ws.iter().zip(&p3.x_up[x]) {
            down_y[y as usize] += w;
        }
    }
    for (z, ws) in f.yz.iter().enumerate() {
        let s: BigRational = ws.iter().sum();
        if !close(&s, &z_from_y) {
            return Err(fail(format!("z{z} (down)"), &s, &z_from_y));
        }
        for (w, &y) in ws.iter().zip(&p3.z_down[z]) {
            up_y[y as usize] += w;
        }
    }
    for y in 0..b {
        if !close(&down_y[y], &y_from_x) {
            return Err(fail(format!("y{y} (down)"), &down_y[y], &y_from_x));
        }
        if !close(&up_y[y], &one) {
            return Err(fail(format!("y{y} (up)"), &up_y[y], &one));
        }
    }
    let scale = ratio(a, b);
    let g = assemble(p3, |x, k| f.xy[x][k].clone(), |z, k| &scale * &f.yz[z][k]);
    if check == SumCheck::Exact && !g.is_doubly_stochastic() {
        return Err(Error::Internal(
            "flow gadget is not doubly stochastic".into(),
        ));
    }
    Ok(g)
}

fn check_matching(support: &Bigraph, m: &[usize]) -> Result<()> {
    let k = support.left();
    if m.len() != k {
        return Err(Error::NotPerfectMatching(format!(
            "{} rows matched, need {k}",
            m.len()
        )));
    }
    let mut seen = vec![false; k];
    for (row, &col) in m.iter().enumerate() {
        if col >= k || seen[col] {
            return Err(Error::NotPerfectMatching(format!(
                "column {col} matched twice or out of range"
            )));
        }
        seen[col] = true;
        if !support.has_edge(row, col) {
            return Err(Error::NotPerfectMatching(format!(
                "({row}, {col}) is not an edge"
            )));
        }
    }
    Ok(())
}

/// Decodes a perfect matching of the gadget support of `p3` (row → column)
/// without re-checking it.
pub(crate) fn decode_matching(p3: &ThreeLevelPoset, m: &[usize]) -> Vec<(u32, u32, u32)> {
    let b = p3.b();
    let mut triples = Vec::with_capacity(p3.a());
    for x in 0..p3.a() {
        let y = m[b + x];
        let z = m[y] - b;
        triples.push((x as u32, y as u32, z as u32));
    }
    triples
}

/// Perfect matching → symmetric chain decomposition.
pub fn matching_to_scd(g: &WeightedBigraph, m: &[usize]) -> Result<ThreeLevelScd> {
    let support = g.support();
    check_matching(&support, m)?;
    let p3 = &g.poset;
    let b = p3.b();
    let mut chains = Vec::with_capacity(b);
    for (y, &partner) in m.iter().enumerate().take(b) {
        if partner == y {
            chains.push(Chain(vec![TlElem::Y(y as u32)]));
        }
    }
    for (x, y, z) in decode_matching(p3, m) {
        chains.push(Chain(vec![TlElem::X(x), TlElem::Y(y), TlElem::Z(z)]));
    }
    Ok(Scd::new(chains))
}

/// Symmetric chain decomposition → the unique perfect matching producing it.
pub fn scd_to_matching(g: &WeightedBigraph, scd: &ThreeLevelScd) -> Result<Vec<usize>> {
    let p3 = &g.poset;
    let report = validate_scd(p3, scd.chains())?;
    if !report.ok {
        let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidScd(msgs.join("; ")));
    }
    let b = p3.b();
    let mut m = vec![usize::MAX; g.size()];
    for c in scd.chains() {
        match c.0.as_slice() {
            [TlElem::Y(y)] => m[*y as usize] = *y as usize,
            [TlElem::X(x), TlElem::Y(y), TlElem::Z(z)] => {
                m[b + *x as usize] = *y as usize;
                m[*y as usize] = b + *z as usize;
            }
            other => return Err(Error::InvalidScd(format!("unexpected chain {other:?}"))),
        }
    }
    Ok(m)
}

/// Calls `f` with every symmetric chain decomposition of `p3`, produced by
/// enumerating the perfect matchings of its gadget support. Each callback
/// receives the `(x, y, z)` triples; the remaining middle vertices are
/// singletons.
pub fn for_each_gadget_scd<F>(p3: &ThreeLevelPoset, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[(u32, u32, u32)]) -> ControlFlow<()>,
{
    let support = gadget_support(p3);
    let mut triples = Vec::with_capacity(p3.a());
    let b = p3.b();
    for_each_perfect_matching(&support, |m| {
        triples.clear();
        for x in 0..p3.a() {
            let y = m[b + x];
            triples.push((x as u32, y as u32, (m[y] - b) as u32));
        }
        f(&triples)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::Limits;
    use crate::permanent::count_perfect_matchings;
    use crate::poset::{build_poset, PosetKind};

    fn b2_slice() -> ThreeLevelPoset {
        let p = build_poset(PosetKind::Boolean, 2, 2, &Limits::default()).unwrap();
        ThreeLevelPoset::central_slice(&p).unwrap()
    }

    #[test]
    fn smallest_regular_gadget() {
        let p3 = b2_slice();
        assert_eq!((p3.a(), p3.b(), p3.regular_degree().unwrap()), (1, 2, 2));
        let g = build_gadget_regular(&p3).unwrap();
        assert_eq!(g.size(), 3);
        let half = ratio(1, 2);
        assert!(g.rows().iter().flatten().all(|e| e.weight == half));
        assert_eq!(g.rows().iter().flatten().count(), 6);
        assert!(g.is_doubly_stochastic());
    }

    #[test]
    fn boolean_four_slice_gadget() {
        let p = build_poset(PosetKind::Boolean, 2, 4, &Limits::default()).unwrap();
        let p3 = ThreeLevelPoset::central_slice(&p).unwrap();
        assert_eq!((p3.a(), p3.b(), p3.regular_degree().unwrap()), (4, 6, 3));
        let g = build_gadget_regular(&p3).unwrap();
        assert_eq!(g.size(), 10);
        assert!(g.is_doubly_stochastic());
        let third = ratio(1, 3);
        assert!(g.rows().iter().flatten().all(|e| e.weight == third));
    }

    #[test]
    fn hypergrid_bottom_slice_is_not_regular() {
        let p = build_poset(PosetKind::Hypergrid, 3, 2, &Limits::default()).unwrap();
        // L_0, L_1, L_2 have sizes 1, 2, 3: not even a valid three-level
        // rank-symmetric slice.
        assert!(ThreeLevelPoset::slice(&p, 1).is_err());
        // The central slice exists but is not regular.
        let p3 = ThreeLevelPoset::central_slice(&p).unwrap();
        assert!(matches!(
            build_gadget_regular(&p3),
            Err(Error::NotRegular { .. })
        ));
    }

    #[test]
    fn snmf_gadget_with_uniform_flow_matches_regular() {
        let p = build_poset(PosetKind::Boolean, 2, 4, &Limits::default()).unwrap();
        let p3 = ThreeLevelPoset::central_slice(&p).unwrap();
        let f = SliceFlow::uniform(&p3);
        assert!(f.xy.iter().flatten().all(|w| *w == ratio(1, 3)));
        // Each y has r·a/b = 2 covers in Z.
        assert!(f.yz.iter().flatten().all(|w| *w == ratio(1, 2)));
        let g = build_gadget_snmf(&p3, &f, SumCheck::Exact).unwrap();
        let reg = build_gadget_regular(&p3).unwrap();
        // (a/b)·f(yz) = (4/6)·(1/2) = 1/r, so the two gadgets coincide.
        assert_eq!(g, reg);
    }

    #[test]
    fn flow_with_short_up_sum_is_rejected() {
        let p3 = b2_slice();
        let mut f = SliceFlow::uniform(&p3);
        f.xy[0][0] = ratio(4, 10);
        let err = build_gadget_snmf(&p3, &f, SumCheck::Exact).unwrap_err();
        assert!(matches!(err, Error::NotSnmf { ref vertex, .. } if vertex == "x0 (up)"));
        assert!(build_gadget_snmf(&p3, &f, SumCheck::Tolerance(1e-9)).is_err());
    }

    #[test]
    fn matching_and_scd_round_trip_small() {
        let p3 = b2_slice();
        let g = build_gadget_regular(&p3).unwrap();
        // rows: y1_0 ({1}), y1_1 ({2}), x ({}); cols: y2_0, y2_1, z ({1,2}).
        let m = vec![2, 1, 0];
        let scd = matching_to_scd(&g, &m).unwrap();
        let hosted = p3.to_host_chains(&scd).unwrap();
        let shown: Vec<Vec<u64>> = hosted
            .iter()
            .map(|c| c.0.iter().map(|e| e.0).collect())
            .collect();
        assert_eq!(shown, vec![vec![0, 1, 3], vec![2]]);
        assert_eq!(scd_to_matching(&g, &scd).unwrap(), m);
        assert_eq!(g.matching_weight(&m).unwrap(), ratio(1, 8));
    }

    #[test]
    fn both_copy_edges_is_not_a_matching() {
        let p3 = b2_slice();
        let g = build_gadget_regular(&p3).unwrap();
        assert!(matches!(
            matching_to_scd(&g, &[0, 1, 0]),
            Err(Error::NotPerfectMatching(_))
        ));
        assert!(matches!(
            matching_to_scd(&g, &[0, 1]),
            Err(Error::NotPerfectMatching(_))
        ));
    }

    #[test]
    fn all_singletons_is_invalid() {
        let p3 = b2_slice();
        let g = build_gadget_regular(&p3).unwrap();
        let scd = Scd::new(vec![Chain(vec![TlElem::Y(0)]), Chain(vec![TlElem::Y(1)])]);
        assert!(matches!(
            scd_to_matching(&g, &scd),
            Err(Error::InvalidScd(_))
        ));
    }

    #[test]
    fn gadget_enumeration_matches_count() {
        let p = build_poset(PosetKind::Boolean, 2, 4, &Limits::default()).unwrap();
        let p3 = ThreeLevelPoset::central_slice(&p).unwrap();
        let mut n = 0u32;
        let _ = for_each_gadget_scd(&p3, |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        let count = count_perfect_matchings(&gadget_support(&p3), &Limits::default()).unwrap();
        assert_eq!(count, n.into());
    }

    #[test]
    fn matrix_dump_round_trip() {
        let p = build_poset(PosetKind::Boolean, 2, 4, &Limits::default()).unwrap();
        let g = build_gadget_regular(&ThreeLevelPoset::central_slice(&p).unwrap()).unwrap();
        let v = g.to_json(Some(&p));
        assert_eq!(v["vertex_maps"]["rows"][6]["part"], "X");
        assert_eq!(v["vertex_maps"]["rows"][6]["element"], 1);
        assert_eq!(matrix_from_json(&v).unwrap(), g.to_matrix());
    }
}
