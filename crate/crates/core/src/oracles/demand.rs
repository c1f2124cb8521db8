//! Demand oracles: exact brute force, and the value-query implementation of
//! demand for the hidden-team family.

use std::sync::{Arc, OnceLock};

use super::{tabulate, DemandOracle, QueryCounter, RewardOracle};
use crate::error::{Error, Result};
use crate::model::TieBreak;
use crate::oracles::families::team_value;
use crate::scalar::{RealScalar, Scalar};
use crate::set::ActionSet;

/// Incremental arg-max with the demand tie rule: maximize surplus, break ties
/// toward the larger reward value, then the lexicographically smallest set.
pub(crate) struct DemandSelector<T> {
    tie: TieBreak,
    best: Option<(T, T, ActionSet)>,
}

impl<T: Scalar> DemandSelector<T> {
    pub fn new(tie: TieBreak) -> Self {
        DemandSelector { tie, best: None }
    }

    pub fn offer(&mut self, surplus: T, reward: T, set: ActionSet) {
        let replace = match &self.best {
            None => true,
            Some((bs, bf, bset)) => {
                if surplus > *bs {
                    true
                } else if surplus < *bs {
                    false
                } else {
                    match self.tie {
                        TieBreak::LargerRewardThenLex => {
                            if reward > *bf {
                                true
                            } else if reward < *bf {
                                false
                            } else {
                                set.lex_cmp(*bset).is_lt()
                            }
                        }
                        TieBreak::Lexicographic => set.lex_cmp(*bset).is_lt(),
                    }
                }
            }
        };
        if replace {
            self.best = Some((surplus, reward, set));
        }
    }

    pub fn take(self) -> Option<(T, T, ActionSet)> {
        self.best
    }
}

/// Exact demand oracle by enumeration of all subsets.
///
/// The reward table is built lazily on the first query; subsequent queries
/// cost `O(2^m)` arithmetic operations each.
pub struct BruteForceDemand<T> {
    oracle: Arc<dyn RewardOracle<T>>,
    m: usize,
    tie: TieBreak,
    table: OnceLock<Vec<T>>,
}

impl<T: Scalar> BruteForceDemand<T> {
    /// Largest ground set brute force will enumerate by default.
    pub const DEFAULT_CAP: usize = 22;

    pub fn new(oracle: Arc<dyn RewardOracle<T>>, tie: TieBreak) -> Result<Self> {
        Self::with_cap(oracle, tie, Self::DEFAULT_CAP)
    }

    pub fn with_cap(oracle: Arc<dyn RewardOracle<T>>, tie: TieBreak, cap: usize) -> Result<Self> {
        let m = oracle.ground_size();
        if m > cap {
            return Err(Error::GroundTooLarge { m, cap });
        }
        Ok(BruteForceDemand { oracle, m, tie, table: OnceLock::new() })
    }

    fn table(&self) -> &[T] {
        self.table.get_or_init(|| tabulate(self.oracle.as_ref()))
    }
}

impl<T: Scalar> DemandOracle<T> for BruteForceDemand<T> {
    fn demand(&self, prices: &[T]) -> ActionSet {
        assert_eq!(prices.len(), self.m, "price vector length mismatch");
        let table = self.table();
        let size = 1usize << self.m;
        // price(S) via the lowest-bit recurrence over masks
        let mut price = Vec::with_capacity(size);
        price.push(T::zero());
        let mut selector = DemandSelector::new(self.tie);
        selector.offer(table[0].clone(), table[0].clone(), ActionSet::empty());
        for bits in 1..size as u64 {
            let low = bits.trailing_zeros() as usize;
            let prev = (bits & (bits - 1)) as usize;
            let p = price[prev].clone() + prices[low].clone();
            price.push(p.clone());
            let f = table[bits as usize].clone();
            selector.offer(f.clone() - p, f, ActionSet::from_bits(bits));
        }
        selector.take().expect("at least the empty set was offered").2
    }
}

/// Answer a demand query for a hidden-team reward using only value queries,
/// without knowing the team.
///
/// Learns the team size `k` from the value of the full set, probes prefixes
/// of the cheapest-first order, and either returns the best prefix (when all
/// prefix values look like `sqrt(i)`) or reconstructs the team from two probe
/// families and optimizes over compositions of cheapest elements. Uses at
/// most `2m + 1` value queries; returns the demand set and the number of
/// value queries issued.
pub fn hidden_team_demand<T: RealScalar>(
    oracle: &dyn RewardOracle<T>,
    prices: &[T],
    tol: T,
    tie: TieBreak,
) -> Result<(ActionSet, u64)> {
    let m = oracle.ground_size();
    assert_eq!(prices.len(), m, "price vector length mismatch");
    let mut queries = 0u64;
    let mut query = |s: ActionSet| -> T {
        queries += 1;
        oracle.value(s)
    };

    let f_full = query(ActionSet::full(m));
    let k = (f_full * f_full)
        .round()
        .to_usize()
        .ok_or_else(|| Error::MalformedOracle("full-set value is not a team size".into()))?;
    if k % 2 != 0 || k < 4 || k >= m || (f_full - T::integer(k).sqrt()).abs() > tol {
        return Err(Error::MalformedOracle(format!(
            "full-set value {f_full} does not encode an even team size in [4, m)"
        )));
    }

    // cheapest-first order, index as tie break
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        prices[a].partial_cmp(&prices[b]).expect("prices must be comparable").then(a.cmp(&b))
    });

    let prefix = |i: usize| -> ActionSet { order[..i].iter().copied().collect() };

    let mut prefix_vals: Vec<T> = vec![T::zero()];
    let mut anomaly: Option<(usize, T)> = None;
    for i in 1..=k {
        let v = query(prefix(i));
        if (v - T::integer(i).sqrt()).abs() > tol {
            anomaly = Some((i, v));
            break;
        }
        prefix_vals.push(v);
    }

    let mut selector = DemandSelector::new(tie);
    match anomaly {
        None => {
            // Every prefix is worth sqrt(i): the prefix of each size is a
            // cheapest set of its size and no set of size i is worth more, so
            // the best prefix of size at most k is a demand set.
            let mut p = T::zero();
            selector.offer(T::zero(), T::zero(), ActionSet::empty());
            for i in 1..=k {
                p = p + prices[order[i - 1]];
                let f = prefix_vals[i];
                selector.offer(f - p, f, prefix(i));
            }
        }
        Some((i_star, anomalous_val)) => {
            // The prefix of size i_star overlaps the team in k/2 + 1 elements
            // while the one before overlaps in exactly k/2. Adding any element
            // to the shorter prefix reproduces the anomalous value exactly
            // when the element is in the team.
            let base = prefix(i_star - 1);
            let full_star = prefix(i_star);
            let mut team = ActionSet::empty();
            for &j in &order[i_star..] {
                let v = query(base.with(j));
                if (v - anomalous_val).abs() <= tol {
                    team.insert(j);
                }
            }
            // For elements inside the prefix, swap them against a fixed
            // outside element of known membership.
            let j_star = order[i_star];
            let star_in_team = team.contains(j_star);
            for &j in &order[..i_star] {
                let v = query(full_star.with(j_star).without(j));
                let matches = (v - anomalous_val).abs() <= tol;
                if matches == star_in_team {
                    team.insert(j);
                }
            }
            if team.len() != k {
                return Err(Error::MalformedOracle(format!(
                    "reconstructed team {team} has size {} instead of {k}",
                    team.len()
                )));
            }
            // With the team known the value of any composition is determined;
            // optimize over the cheapest x outside + y inside combinations.
            let outside: Vec<usize> = order.iter().copied().filter(|j| !team.contains(*j)).collect();
            let inside: Vec<usize> = order.iter().copied().filter(|j| team.contains(*j)).collect();
            for y in 0..=k.min(inside.len()) {
                let mut s: ActionSet = inside[..y].iter().copied().collect();
                let mut p = inside[..y].iter().fold(T::zero(), |acc, &j| acc + prices[j]);
                for x in 0..=(k - y).min(outside.len()) {
                    if x > 0 {
                        s.insert(outside[x - 1]);
                        p = p + prices[outside[x - 1]];
                    }
                    let f: T = team_value(x, y, k);
                    selector.offer(f - p, f, s);
                }
            }
        }
    }
    let set = selector.take().expect("at least one candidate was offered").2;
    Ok((set, queries))
}

/// [`DemandOracle`] wrapper around [`hidden_team_demand`]. Carries its own
/// value-query counter so callers can watch the per-call budget.
pub struct HiddenTeamDemand<T> {
    oracle: Arc<dyn RewardOracle<T>>,
    counter: Arc<QueryCounter>,
    tol: T,
    tie: TieBreak,
}

impl<T: RealScalar> HiddenTeamDemand<T> {
    pub fn new(oracle: Arc<dyn RewardOracle<T>>, tol: T, tie: TieBreak) -> Self {
        HiddenTeamDemand { oracle, counter: Arc::new(QueryCounter::default()), tol, tie }
    }

    /// Counter of the value queries issued by the demand procedure.
    pub fn query_counter(&self) -> Arc<QueryCounter> {
        Arc::clone(&self.counter)
    }
}

impl<T: RealScalar> DemandOracle<T> for HiddenTeamDemand<T> {
    fn demand(&self, prices: &[T]) -> ActionSet {
        let (set, used) = hidden_team_demand(self.oracle.as_ref(), prices, self.tol, self.tie)
            .expect("oracle attached to HiddenTeamDemand must be a hidden-team reward");
        for _ in 0..used {
            self.counter.record_value();
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{AdditiveReward, HiddenTeamReward, TableReward};

    fn set(ids: &[usize]) -> ActionSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn brute_force_demand_additive() {
        let o = Arc::new(AdditiveReward::new(vec![0.5, 0.5]).unwrap());
        let bf = BruteForceDemand::new(o, TieBreak::LargerRewardThenLex).unwrap();
        // enumerating all 4 subsets: {0,1} nets 1 - 0.4 = 0.6, the maximum
        assert_eq!(bf.demand(&[0.1, 0.3]), set(&[0, 1]));
        assert_eq!(bf.demand(&[f64::INFINITY, f64::INFINITY]), ActionSet::empty());
    }

    #[test]
    fn brute_force_demand_prefers_larger_reward_on_ties() {
        let o = Arc::new(AdditiveReward::new(vec![0.5]).unwrap());
        let bf = BruteForceDemand::new(o, TieBreak::LargerRewardThenLex).unwrap();
        // surplus of {0} equals surplus of {}: take the larger reward
        assert_eq!(bf.demand(&[0.5]), set(&[0]));
    }

    #[test]
    fn brute_force_demand_on_table_at_cost_prices() {
        // Example table over three actions; at prices equal to costs the
        // demand set is the welfare maximizer {1,2} (welfare 0.75).
        let values = vec![
            0.0,
            7.0 / 16.0,
            3.0 / 4.0,
            7.0 / 8.0,
            1.0 / 4.0,
            9.0 / 16.0,
            1.0,
            1.0,
        ];
        let o = Arc::new(TableReward::new(3, values, 1e-9).unwrap());
        let bf = BruteForceDemand::new(o, TieBreak::LargerRewardThenLex).unwrap();
        assert_eq!(bf.demand(&[0.1, 0.24, 0.01]), set(&[1, 2]));
    }

    #[test]
    fn hidden_team_demand_zero_prices_returns_cheapest_maximizer() {
        let team = set(&[2, 5, 7, 9]);
        let o = HiddenTeamReward::<f64>::new(12, team).unwrap();
        let prices = vec![0.0; 12];
        let (s, used) =
            hidden_team_demand(&o, &prices, 1e-9, TieBreak::LargerRewardThenLex).unwrap();
        assert_eq!(s, set(&[0, 1, 2, 3]));
        let surplus = o.value(s);
        assert!((surplus - 2.0).abs() < 1e-12);
        assert!(used <= 4 * 12 + 4);
    }

    #[test]
    fn hidden_team_demand_high_prices_returns_empty() {
        let team = set(&[0, 1, 2, 3]);
        let o = HiddenTeamReward::<f64>::new(10, team).unwrap();
        let prices = vec![10.0; 10];
        let (s, _) = hidden_team_demand(&o, &prices, 1e-9, TieBreak::LargerRewardThenLex).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn hidden_team_demand_matches_brute_force_surplus() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let m = 10;
        let team = set(&[1, 3, 4, 8]);
        let oracle = Arc::new(HiddenTeamReward::<f64>::new(m, team).unwrap());
        let bf = BruteForceDemand::new(oracle.clone(), TieBreak::LargerRewardThenLex).unwrap();
        for _ in 0..100 {
            let prices: Vec<f64> =
                (0..m).map(|_| (rng.gen_range(0..=60) as f64) / 100.0).collect();
            let (s, used) =
                hidden_team_demand(oracle.as_ref(), &prices, 1e-9, TieBreak::LargerRewardThenLex)
                    .unwrap();
            let b = bf.demand(&prices);
            let surplus = |x: ActionSet| {
                oracle.value(x) - x.iter().map(|j| prices[j]).sum::<f64>()
            };
            assert!(
                (surplus(s) - surplus(b)).abs() < 1e-9,
                "procedure surplus {} vs brute force {} at prices {prices:?}",
                surplus(s),
                surplus(b)
            );
            assert!(used <= 4 * m as u64 + 4, "used {used} value queries");
        }
    }

    #[test]
    fn hidden_team_demand_exercises_team_reconstruction() {
        // Price the team members cheapest so the prefix order walks into the
        // team and hits the anomalous prefix value.
        let m = 10;
        let team = set(&[0, 1, 2, 3]);
        let oracle = HiddenTeamReward::<f64>::new(m, team).unwrap();
        let mut prices = vec![0.3; m];
        for j in team.iter() {
            prices[j] = 0.01;
        }
        let bf = BruteForceDemand::new(
            Arc::new(HiddenTeamReward::<f64>::new(m, team).unwrap()),
            TieBreak::LargerRewardThenLex,
        )
        .unwrap();
        let (s, used) =
            hidden_team_demand(&oracle, &prices, 1e-9, TieBreak::LargerRewardThenLex).unwrap();
        let b = bf.demand(&prices);
        let surplus =
            |x: ActionSet| oracle.value(x) - x.iter().map(|j| prices[j]).sum::<f64>();
        assert!((surplus(s) - surplus(b)).abs() < 1e-9);
        assert!(used <= 4 * m as u64 + 4);
    }

    #[test]
    fn hidden_team_demand_rejects_non_team_oracles() {
        let o = AdditiveReward::new(vec![0.5, 0.5, 0.5]).unwrap();
        let prices = vec![0.0; 3];
        assert!(hidden_team_demand(&o, &prices, 1e-9, TieBreak::LargerRewardThenLex).is_err());
    }
}
