//! Fixtures shared by the benchmarks.

use scdkit::permanent::Bigraph;
use scdkit::{build_poset, GradedPoset, Limits, PosetKind};

/// `[t]^n`, Boolean when `t = 2`.
pub fn poset(t: u32, n: u32) -> GradedPoset {
    let kind = if t == 2 {
        PosetKind::Boolean
    } else {
        PosetKind::Hypergrid
    };
    build_poset(kind, t, n, &Limits::default()).expect("benchmark poset builds")
}

/// A `k × k` bigraph with about 60% density, fixed per `k`. Row `i` always
/// contains column `i`, so a perfect matching exists.
pub fn dense_bigraph(k: usize) -> Bigraph {
    let adj = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| i == j || (3 * i + 7 * j + i * j) % 5 < 3)
                .collect()
        })
        .collect();
    Bigraph::new(k, adj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        let g = dense_bigraph(12);
        assert_eq!(g.left(), 12);
        assert!(g.left_degrees().iter().all(|&d| d >= 1));
        assert_eq!(poset(3, 3).len(), 27);
    }
}
