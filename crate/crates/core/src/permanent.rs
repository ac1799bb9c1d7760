//! Permanents, perfect-matching counts and Brégman's upper bound.
//!
//! Three independent routes are kept deliberately separate:
//! [`permanent_ryser`] (inclusion–exclusion over column subsets in Gray-code
//! order), [`count_perfect_matchings`] and its weighted form [`permanent_dp`]
//! (row-by-row dynamic programming over sets of used columns) and
//! [`permanent_naive`] (sum over all permutations).

use std::collections::HashMap;
use std::ops::{AddAssign, ControlFlow, MulAssign, SubAssign};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::limits::Limits;

/// A dense `k × k` matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Clone> SquareMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::Malformed("matrix is not square".into()));
        }
        Ok(SquareMatrix {
            size,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> SquareMatrix<U> {
        SquareMatrix {
            size: self.size,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone + Zero + One> SquareMatrix<T> {
    pub fn identity(size: usize) -> Self {
        let mut data = vec![T::zero(); size * size];
        for i in 0..size {
            data[i * size + i] = T::one();
        }
        SquareMatrix { size, data }
    }

    /// Number of nonzero entries in each row.
    pub fn row_support(&self) -> Vec<usize>
    where
        T: PartialEq,
    {
        (0..self.size)
            .map(|i| self.row(i).iter().filter(|x| !x.is_zero()).count())
            .collect()
    }

    /// Support of the matrix as a bigraph (rows on the left).
    pub fn support(&self) -> Bigraph {
        Bigraph::new(
            self.size,
            (0..self.size)
                .map(|i| {
                    (0..self.size)
                        .filter(|&j| !self.get(i, j).is_zero())
                        .collect()
                })
                .collect(),
        )
    }
}

impl SquareMatrix<BigRational> {
    /// Nonnegative with every row and column summing to exactly 1.
    pub fn is_doubly_stochastic(&self) -> bool {
        let one = BigRational::one();
        let k = self.size;
        self.data.iter().all(|x| !x.is_negative())
            && (0..k).all(|i| self.row(i).iter().sum::<BigRational>() == one)
            && (0..k).all(|j| (0..k).map(|i| self.get(i, j)).sum::<BigRational>() == one)
    }
}

/// `ln(k!/k^k)`, the van der Waerden lower bound on the permanent of a
/// `k × k` doubly stochastic matrix.
pub fn falikman_lower_ln(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0) - k as f64 * (k as f64).ln()
}

/// A bipartite graph given by the neighbourhoods of its left vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bigraph {
    pub right: usize,
    /// Sorted right neighbours of each left vertex.
    pub adj: Vec<Vec<usize>>,
}

impl Bigraph {
    pub fn new(right: usize, mut adj: Vec<Vec<usize>>) -> Self {
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Bigraph { right, adj }
    }

    pub fn left(&self) -> usize {
        self.adj.len()
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.right];
        for a in &self.adj {
            for &c in a {
                d[c] += 1;
            }
        }
        d
    }

    pub fn has_edge(&self, row: usize, col: usize) -> bool {
        self.adj
            .get(row)
            .is_some_and(|a| a.binary_search(&col).is_ok())
    }

    /// The 0/1 bi-adjacency matrix.
    pub fn biadjacency<T: Clone + Zero + One>(&self) -> SquareMatrix<T> {
        let mut data = vec![T::zero(); self.left() * self.right];
        for (i, a) in self.adj.iter().enumerate() {
            for &j in a {
                data[i * self.right + j] = T::one();
            }
        }
        SquareMatrix {
            size: self.left(),
            data,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    Rational,
    Float,
}

/// A permanent or weighted matching count.
#[derive(Clone, Debug, PartialEq)]
pub enum MatchingCount {
    Exact(BigRational),
    /// Floating-point Ryser: the alternating sum cancels heavily, so the
    /// absolute error grows roughly like `2^k · ε · max |term|`.
    Approx(f64),
}

impl MatchingCount {
    pub fn to_f64(&self) -> f64 {
        match self {
            MatchingCount::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            MatchingCount::Approx(x) => *x,
        }
    }
}

const GRAY_CHUNK_BITS: u32 = 12;

/// Ryser's formula `perm(A) = Σ_S (-1)^{k-|S|} Π_i Σ_{j∈S} a_ij`, walking
/// the column subsets in Gray-code order so that each step updates the row
/// sums by one column.
///
/// The subset range is cut into fixed chunks that are evaluated in parallel
/// and reduced in chunk order, so the result does not depend on the number
/// of worker threads.
fn ryser_kernel<T>(m: &SquareMatrix<T>) -> T
where
    T: Clone + Zero + One + Send + Sync,
    T: for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T> + for<'a> MulAssign<&'a T>,
{
    let k = m.size();
    if k == 0 {
        return T::one();
    }
    let end: u64 = 1 << k;
    let chunk: u64 = 1 << GRAY_CHUNK_BITS.min(k as u32);
    let chunks = end.div_ceil(chunk);
    let partials: Vec<(T, T)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = (c * chunk).max(1);
            let hi = ((c + 1) * chunk).min(end);
            let mut subset = lo ^ (lo >> 1);
            let mut sums: Vec<T> = (0..k)
                .map(|i| {
                    let mut s = T::zero();
                    for j in 0..k {
                        if subset >> j & 1 == 1 {
                            s += m.get(i, j);
                        }
                    }
                    s
                })
                .collect();
            let (mut even, mut odd) = (T::zero(), T::zero());
            let mut g = lo;
            loop {
                let mut prod = T::one();
                for s in &sums {
                    if s.is_zero() {
                        prod = T::zero();
                        break;
                    }
                    prod *= s;
                }
                if (k as u32 - subset.count_ones()).is_multiple_of(2) {
                    even += &prod;
                } else {
                    odd += &prod;
                }
                g += 1;
                if g >= hi {
                    break;
                }
                let bit = g.trailing_zeros() as usize;
                if subset >> bit & 1 == 1 {
                    for (i, s) in sums.iter_mut().enumerate() {
                        *s -= m.get(i, bit);
                    }
                } else {
                    for (i, s) in sums.iter_mut().enumerate() {
                        *s += m.get(i, bit);
                    }
                }
                subset ^= 1 << bit;
            }
            (even, odd)
        })
        .collect();
    let (mut even, mut odd) = (T::zero(), T::zero());
    for (e, o) in &partials {
        even += e;
        odd += o;
    }
    even -= &odd;
    even
}

fn check_size(k: usize, limits: &Limits) -> Result<()> {
    if k > limits.max_matrix_size || k > 62 {
        return Err(Error::budget(
            "matrix size",
            k as u64,
            limits.max_matrix_size as u64,
        ));
    }
    Ok(())
}

/// Exact permanent of a nonnegative rational matrix.
///
/// Entries are brought to a common denominator `L`, the integer permanent is
/// computed in `i128` when it provably cannot overflow and in `BigInt`
/// otherwise, and the result is divided by `L^k`.
pub fn permanent_rational(m: &SquareMatrix<BigRational>, limits: &Limits) -> Result<BigRational> {
    let k = m.size();
    check_size(k, limits)?;
    if m.data.iter().any(Signed::is_negative) {
        return Err(Error::InvalidParameter(
            "matrix has a negative entry".into(),
        ));
    }
    let lcm = m
        .data
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: SquareMatrix<BigInt> = m.map(|x| x.numer() * (&lcm / x.denom()));
    let bound = (0..k)
        .map(|i| scaled.row(i).iter().sum::<BigInt>())
        .fold(BigInt::one(), |acc, s| acc * s);
    let int_perm = if bound.bits() + k as u64 <= 125 {
        let small = scaled.map(|x| x.to_i128().expect("bounded entry"));
        BigInt::from(ryser_kernel(&small))
    } else {
        ryser_kernel(&scaled)
    };
    Ok(BigRational::new(int_perm, num_traits::pow(lcm, k)))
}

pub fn permanent_float(m: &SquareMatrix<f64>, limits: &Limits) -> Result<f64> {
    check_size(m.size(), limits)?;
    Ok(ryser_kernel(m))
}

pub fn permanent_ryser(
    m: &SquareMatrix<BigRational>,
    arithmetic: Arithmetic,
    limits: &Limits,
) -> Result<MatchingCount> {
    match arithmetic {
        Arithmetic::Rational => permanent_rational(m, limits).map(MatchingCount::Exact),
        Arithmetic::Float => {
            let f = m.map(|x| x.to_f64().unwrap_or(f64::NAN));
            permanent_float(&f, limits).map(MatchingCount::Approx)
        }
    }
}

/// Permanent by expansion over all `k!` permutations. Only for small `k`.
pub fn permanent_naive<T>(m: &SquareMatrix<T>) -> T
where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T> + for<'a> MulAssign<&'a T>,
{
    fn go<T>(m: &SquareMatrix<T>, row: usize, used: &mut [bool], acc: &T, total: &mut T)
    where
        T: Clone + Zero + One + for<'a> AddAssign<&'a T> + for<'a> MulAssign<&'a T>,
    {
        if row == m.size() {
            *total += acc;
            return;
        }
        for col in 0..m.size() {
            if used[col] || m.get(row, col).is_zero() {
                continue;
            }
            used[col] = true;
            let mut next = acc.clone();
            next *= m.get(row, col);
            go(m, row + 1, used, &next, total);
            used[col] = false;
        }
    }
    let mut total = T::zero();
    go(m, 0, &mut vec![false; m.size()], &T::one(), &mut total);
    total
}

/// Number of perfect matchings of a balanced bigraph, by dynamic
/// programming over the set of columns used by the rows processed so far.
pub fn count_perfect_matchings(g: &Bigraph, limits: &Limits) -> Result<BigUint> {
    let k = g.left();
    if g.right != k {
        return Err(Error::InvalidParameter(format!(
            "sides differ: {} left, {} right",
            k, g.right
        )));
    }
    if k > limits.max_matrix_size || k > 32 {
        return Err(Error::budget(
            "matrix size",
            k as u64,
            limits.max_matrix_size as u64,
        ));
    }
    // k! <= 32! < 2^118, so u128 never overflows.
    let mut layer: HashMap<u32, u128> = HashMap::from([(0u32, 1u128)]);
    for row in &g.adj {
        let mut next: HashMap<u32, u128> = HashMap::with_capacity(layer.len() * 2);
        for (&mask, &ways) in &layer {
            for &c in row {
                let bit = 1u32 << c;
                if mask & bit == 0 {
                    *next.entry(mask | bit).or_insert(0) += ways;
                }
            }
        }
        if next.is_empty() {
            return Ok(BigUint::zero());
        }
        layer = next;
    }
    Ok(layer.values().map(|&w| BigUint::from(w)).sum())
}

/// Weighted permanent by the same row-by-row dynamic programming over sets
/// of used columns, `dp[S ∪ {j}] += dp[S]·a_{|S|, j}`.
pub fn permanent_dp<T>(m: &SquareMatrix<T>, limits: &Limits) -> Result<T>
where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T> + for<'a> std::ops::Mul<&'a T, Output = T>,
{
    let k = m.size();
    if k > limits.max_matrix_size || k > 32 {
        return Err(Error::budget(
            "matrix size",
            k as u64,
            limits.max_matrix_size as u64,
        ));
    }
    let mut layer: HashMap<u32, T> = HashMap::from([(0u32, T::one())]);
    for row in 0..k {
        let mut next: HashMap<u32, T> = HashMap::with_capacity(layer.len() * 2);
        for (&mask, ways) in &layer {
            for col in 0..k {
                let bit = 1u32 << col;
                let a = m.get(row, col);
                if mask & bit != 0 || a.is_zero() {
                    continue;
                }
                let term = ways.clone() * a;
                match next.get_mut(&(mask | bit)) {
                    Some(acc) => *acc += &term,
                    None => {
                        next.insert(mask | bit, term);
                    }
                }
            }
        }
        if next.is_empty() {
            return Ok(T::zero());
        }
        layer = next;
    }
    Ok(layer.into_values().next().expect("one full mask"))
}

/// `ln Π_i (d_i!)^{1/d_i}`, Brégman's bound on the number of perfect
/// matchings of a bigraph whose one side has degrees `d_i`.
pub fn bregman_upper(degrees: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for (i, &d) in degrees.iter().enumerate() {
        if d == 0 {
            return Err(Error::ZeroDegree(i));
        }
        total += ln_gamma(d as f64 + 1.0) / d as f64;
    }
    Ok(total)
}

/// Calls `f` with each perfect matching of `g` as a row → column map.
///
/// Rows are matched in index order. A column is abandoned as soon as no
/// unprocessed row can still reach it.
pub fn for_each_perfect_matching<F>(g: &Bigraph, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let k = g.left();
    if g.right != k {
        return ControlFlow::Continue(());
    }
    let mut reach = g.right_degrees();
    if reach.contains(&0) {
        return ControlFlow::Continue(());
    }
    let mut used = vec![false; k];
    let mut assignment = vec![usize::MAX; k];

    fn go<F>(
        g: &Bigraph,
        row: usize,
        used: &mut [bool],
        reach: &mut [usize],
        assignment: &mut [usize],
        f: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if row == g.left() {
            return f(assignment);
        }
        let nbrs = &g.adj[row];
        for &c in nbrs {
            reach[c] -= 1;
        }
        let mut result = ControlFlow::Continue(());
        for &c in nbrs {
            if used[c] {
                continue;
            }
            // Every other free neighbour must still be reachable later.
            if nbrs.iter().any(|&d| d != c && !used[d] && reach[d] == 0) {
                continue;
            }
            used[c] = true;
            assignment[row] = c;
            result = go(g, row + 1, used, reach, assignment, f);
            used[c] = false;
            if result.is_break() {
                break;
            }
        }
        for &c in nbrs {
            reach[c] += 1;
        }
        result
    }

    go(g, 0, &mut used, &mut reach, &mut assignment, &mut f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn l() -> Limits {
        Limits::default()
    }

    #[test]
    fn identity_and_constant() {
        let id: SquareMatrix<BigRational> = SquareMatrix::identity(3);
        assert_eq!(permanent_rational(&id, &l()).unwrap(), rat(1, 1));
        let third = SquareMatrix::from_rows(vec![vec![rat(1, 3); 3]; 3]).unwrap();
        assert_eq!(permanent_rational(&third, &l()).unwrap(), rat(2, 9));
        let f = permanent_ryser(&third, Arithmetic::Float, &l())
            .unwrap()
            .to_f64();
        assert!((f - 2.0 / 9.0).abs() < 1e-12);
        let empty: SquareMatrix<BigRational> = SquareMatrix::from_rows(vec![]).unwrap();
        assert_eq!(permanent_rational(&empty, &l()).unwrap(), rat(1, 1));
    }

    #[test]
    fn matching_counts() {
        let k33 = Bigraph::new(3, vec![vec![0, 1, 2]; 3]);
        assert_eq!(
            count_perfect_matchings(&k33, &l()).unwrap(),
            BigUint::from(6u32)
        );
        let hexagon = Bigraph::new(3, vec![vec![0, 1], vec![1, 2], vec![2, 0]]);
        assert_eq!(
            count_perfect_matchings(&hexagon, &l()).unwrap(),
            BigUint::from(2u32)
        );
        let mut seen = Vec::new();
        let _ = for_each_perfect_matching(&hexagon, |m| {
            seen.push(m.to_vec());
            ControlFlow::Continue(())
        });
        assert_eq!(seen, vec![vec![0, 1, 2], vec![1, 2, 0]]);
    }

    #[test]
    fn size_limit() {
        let big = Bigraph::new(31, vec![vec![0]; 31]);
        assert!(count_perfect_matchings(&big, &l()).unwrap_err().is_limit());
        let m: SquareMatrix<BigRational> = SquareMatrix::identity(31);
        assert!(permanent_rational(&m, &l()).unwrap_err().is_limit());
    }

    #[test]
    fn bregman_examples() {
        let b = bregman_upper(&[3, 3, 3]).unwrap();
        assert!((b - 6f64.ln()).abs() < 1e-12);
        assert_eq!(bregman_upper(&[1, 1]).unwrap(), 0.0);
        assert!(matches!(bregman_upper(&[2, 0]), Err(Error::ZeroDegree(1))));
        let gadget = bregman_upper(&[3; 10]).unwrap();
        assert!((gadget.exp() - 392.4).abs() < 0.1);
    }

    #[test]
    fn bregman_is_monotone_per_vertex() {
        let mut prev = -1.0;
        for d in 1..200 {
            let v = bregman_upper(&[d]).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn negative_entries_rejected() {
        let m = SquareMatrix::from_rows(vec![vec![rat(-1, 2)]]).unwrap();
        assert!(permanent_rational(&m, &l()).is_err());
    }

    #[test]
    fn weighted_dp_matches_naive() {
        let m = SquareMatrix::from_rows(vec![
            vec![rat(1, 2), rat(0, 1), rat(3, 4)],
            vec![rat(2, 3), rat(1, 5), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1), rat(1, 7)],
        ])
        .unwrap();
        assert_eq!(permanent_dp(&m, &l()).unwrap(), permanent_naive(&m));
        let empty: SquareMatrix<BigRational> = SquareMatrix::from_rows(vec![]).unwrap();
        assert_eq!(permanent_dp(&empty, &l()).unwrap(), BigRational::one());
    }

    #[test]
    fn bigint_path_agrees_with_naive() {
        // Large entries force the BigInt route.
        let rows: Vec<Vec<BigRational>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| rat(1_000_000_007 * (i + 2 * j + 1), 3 + j))
                    .collect()
            })
            .collect();
        let m = SquareMatrix::from_rows(rows).unwrap();
        assert_eq!(permanent_rational(&m, &l()).unwrap(), permanent_naive(&m));
    }
}
