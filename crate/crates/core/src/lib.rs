//! Symmetric chain decompositions of the Boolean lattice `2^[n]` and the
//! hypergrid `[t]^n`: construction, validation, exact counting through the
//! three-level matching gadget, uniform sampling, normalized matching flows
//! and finite-parameter evaluation of the counting bounds.

pub mod bounds;
pub mod construct;
pub mod counting;
pub mod error;
pub mod gadget;
pub mod limits;
pub mod permanent;
pub mod poset;
pub mod scd;
pub mod snmf;

pub use bounds::{
    lemma3_bounds, lemma8_lower, theorem1_bounds, theorem2_lower, trivial_upper, Formula, LogBound,
};
pub use construct::{btk_decomposition, gk_decomposition};
pub use counting::{
    count_scd_layered, count_scd_oracle, count_scd_threelevel, sample_scd_uniform, CountOptions,
    LayeredCounter,
};
pub use error::{Error, Result};
pub use gadget::{
    build_gadget_regular, build_gadget_snmf, matching_to_scd, scd_to_matching, SliceFlow, SumCheck,
    ThreeLevelPoset, ThreeLevelScd, TlElem, WeightedBigraph,
};
pub use limits::Limits;
pub use permanent::{Arithmetic, Bigraph, MatchingCount, SquareMatrix};
pub use poset::{
    build_poset, level_bigraph, level_sizes, Element, GradedPoset, LevelBigraph, PosetKind,
};
pub use scd::{chain_profile, validate_scd, Chain, GradedOrder, Scd, ValidationReport, Violation};
pub use snmf::{compute_snmf, minimize_max_weight, MinMaxFlow, PairFlow, Snmf};
