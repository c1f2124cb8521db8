//! Value/demand oracle interfaces, reward-function families, query accounting
//! and set-function property checkers.

mod checks;
mod demand;
mod families;

use std::sync::atomic::{AtomicU64, Ordering};

pub use checks::{check_gross_substitutes_triplet, check_monotone_submodular, GsViolation, PAIRWISE_CHECK_CAP};
pub use demand::{hidden_team_demand, BruteForceDemand, HiddenTeamDemand};
pub use families::{
    team_value, AdditiveReward, CappedReward, CoverageReward, HiddenTeamReward, TableReward,
    XosReward,
};

use crate::scalar::Scalar;
use crate::set::{all_subsets, ActionSet};

/// Black-box access to a success-probability function `f`.
///
/// Implementations must be normalized (`f(empty) = 0`) and monotone
/// non-decreasing; both are validated on small ground sets by
/// [`check_monotone_submodular`] and instance validation.
pub trait RewardOracle<T>: Send + Sync {
    fn ground_size(&self) -> usize;

    /// `f(s)`. Panics if `s` contains an action outside the ground set.
    fn value(&self, s: ActionSet) -> T;
}

/// Black-box demand oracle: given additive prices, returns a set maximizing
/// `f(S) - sum_{j in S} p_j`.
pub trait DemandOracle<T>: Send + Sync {
    fn demand(&self, prices: &[T]) -> ActionSet;
}

/// Monotone counters for value and demand queries. Reset only explicitly.
#[derive(Debug, Default)]
pub struct QueryCounter {
    value: AtomicU64,
    demand: AtomicU64,
}

/// Snapshot of a [`QueryCounter`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryTally {
    pub value: u64,
    pub demand: u64,
}

impl QueryTally {
    pub fn total(self) -> u64 {
        self.value + self.demand
    }
}

impl QueryCounter {
    pub fn record_value(&self) {
        self.value.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_demand(&self) {
        self.demand.fetch_add(1, Ordering::Relaxed);
    }

    pub fn tally(&self) -> QueryTally {
        QueryTally {
            value: self.value.load(Ordering::Relaxed),
            demand: self.demand.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.value.store(0, Ordering::Relaxed);
        self.demand.store(0, Ordering::Relaxed);
    }
}

pub(crate) fn assert_in_ground(s: ActionSet, m: usize) {
    assert!(
        s.is_subset_of(ActionSet::full(m)),
        "set {s} contains actions outside the ground set of size {m}"
    );
}

/// Evaluate `f` on all `2^m` subsets, indexed by mask bits.
pub fn tabulate<T: Scalar>(oracle: &dyn RewardOracle<T>) -> Vec<T> {
    all_subsets(oracle.ground_size()).map(|s| oracle.value(s)).collect()
}
