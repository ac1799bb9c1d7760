/// Size knobs shared by the builders, counters and kernels.
///
/// All of them are soft caps: exceeding one yields
/// [`Error::BudgetExceeded`](crate::Error::BudgetExceeded) instead of
/// thrashing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest `t^n` accepted by poset builders.
    pub max_elements: u64,
    /// Largest number of edges a single level bigraph may materialize.
    pub max_level_edges: usize,
    /// Largest `t^n` accepted by the whole-poset backtracking oracle.
    pub oracle_max_elements: u64,
    /// Largest number of endpoint-bijection states in any layer of the
    /// layered counter.
    pub max_states: usize,
    /// Largest matrix side for permanents and matching counts.
    pub max_matrix_size: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_elements: 10_000_000,
            max_level_edges: 1_000_000,
            oracle_max_elements: 40,
            max_states: 10_000_000,
            max_matrix_size: 30,
        }
    }
}
