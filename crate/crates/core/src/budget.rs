use crate::error::{Error, Result};

/// Caps for every exhaustive enumeration in the crate.
///
/// Enumerations never truncate silently: a request that would exceed a cap
/// fails with [`Error::ResourceLimit`].
#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    /// Configurations visited by a single exact Gibbs enumeration.
    pub max_configurations: u128,
    /// Candidate vertex subsets / DP cells in lattice Steiner searches.
    pub max_search_nodes: u128,
    /// Interaction sets produced by one enumeration of the set collection.
    pub max_sets: u128,
    /// Families produced by one family enumeration.
    pub max_families: u128,
    /// Longest argument list accepted by the semi-invariant engine.
    pub max_cumulant_order: usize,
    /// Walks visited when counting closed lattice tracks.
    pub max_walks: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_configurations: 1 << 24,
            max_search_nodes: 50_000_000,
            max_sets: 1_000_000,
            max_families: 2_000_000,
            max_cumulant_order: 10,
            max_walks: 100_000_000,
        }
    }
}

pub(crate) fn guard(what: &'static str, needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::ResourceLimit { what, needed, budget })
    } else {
        Ok(())
    }
}
