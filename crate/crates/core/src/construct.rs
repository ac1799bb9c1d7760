//! Reference decompositions: Greene–Kleitman bracketing for `2^[n]` and the
//! de Bruijn–Tengbergen–Kruyswijk recursion for `[t]^n`.

use crate::error::Result;
use crate::limits::Limits;
use crate::poset::{build_poset, Element, GradedPoset, PosetKind};
use crate::scd::{Chain, Scd};

/// Greene–Kleitman decomposition of `2^[n]`.
///
/// Bracket convention: position `i` reads `)` when `i ∈ S` and `(` otherwise,
/// and each `)` is matched with the nearest unmatched `(` to its left. The
/// unmatched positions always read `)...)(...(`. The chain through `S` keeps
/// the matched positions fixed and fills the unmatched positions from left to
/// right, starting from the set in which all of them read `(`.
pub fn gk_decomposition(n: u32, limits: &Limits) -> Result<(GradedPoset, Scd)> {
    let poset = build_poset(PosetKind::Boolean, 2, n, limits)?;
    let mut chains = Vec::with_capacity(poset.max_level_size());
    let mut unmatched = Vec::with_capacity(n as usize);
    for code in 0..(1u64 << n) {
        if let Some(chain) = bracket_chain(code, n, &mut unmatched) {
            chains.push(chain);
        }
    }
    Ok((poset, Scd::new(chains)))
}

/// The chain whose bottom is `set`, or `None` if `set` has an unmatched `)`
/// (it is then interior to some chain).
fn bracket_chain(set: u64, n: u32, unmatched: &mut Vec<u32>) -> Option<Chain> {
    unmatched.clear();
    for i in 0..n {
        if set >> i & 1 == 1 {
            match unmatched.last() {
                Some(&j) if set >> j & 1 == 0 => {
                    unmatched.pop();
                }
                _ => return None,
            }
        } else {
            unmatched.push(i);
        }
    }
    let mut chain = Vec::with_capacity(unmatched.len() + 1);
    let mut cur = set;
    chain.push(Element(cur));
    for &i in unmatched.iter() {
        cur |= 1 << i;
        chain.push(Element(cur));
    }
    Some(Chain(chain))
}

/// de Bruijn–Tengbergen–Kruyswijk decomposition of `[t]^n`.
///
/// Each chain `c_1 ≺ ... ≺ c_k` of `[t]^{n-1}` is crossed with a new last
/// coordinate `1..=t` and the `k × t` grid is peeled into `min(k, t)`
/// symmetric chains. Chain `j` (from 0) runs up the column `x_n = j + 1`
/// from `c_1` to `c_{k-j}`, then along `c_{k-j}` from `x_n = j + 1` to
/// `x_n = t`. So the longest chain takes the corner `(c_1, 1)` and turns at
/// `(c_k, 1)`.
pub fn btk_decomposition(t: u32, n: u32, limits: &Limits) -> Result<(GradedPoset, Scd)> {
    let poset = build_poset(PosetKind::Hypergrid, t, n, limits)?;
    let t64 = t as u64;
    // [t]^0 is a single point with code 0.
    let mut chains: Vec<Vec<u64>> = vec![vec![0]];
    for _ in 0..n {
        let mut next = Vec::new();
        for c in &chains {
            let k = c.len();
            for j in 0..k.min(t as usize) {
                let mut chain = Vec::with_capacity(k + t as usize - 1 - 2 * j);
                for &code in &c[..k - j] {
                    chain.push(code * t64 + j as u64);
                }
                let turn = c[k - j - 1];
                for last in (j + 1)..t as usize {
                    chain.push(turn * t64 + last as u64);
                }
                next.push(chain);
            }
        }
        chains = next;
    }
    let chains = chains
        .into_iter()
        .map(|c| Chain(c.into_iter().map(Element).collect()))
        .collect();
    Ok((poset, Scd::new(chains)))
}

/// Maps a decomposition of `[2]^n` to the isomorphic one of `2^[n]`
/// (coordinate `x_i = 2` becomes `i ∈ S`).
pub fn hypergrid_to_boolean(
    grid: &GradedPoset,
    scd: &Scd,
    limits: &Limits,
) -> Result<(GradedPoset, Scd)> {
    let boolean = build_poset(PosetKind::Boolean, 2, grid.n(), limits)?;
    let convert = |e: Element| {
        let coords = grid.coords(e);
        boolean
            .from_coords(&coords)
            .expect("[2]^n and 2^[n] share coordinates")
    };
    let chains = scd
        .chains()
        .iter()
        .map(|c| Chain(c.0.iter().map(|&e| convert(e)).collect()))
        .collect();
    Ok((boolean, Scd::new(chains)))
}
