//! Reward-function families.

use std::sync::Arc;

use super::{assert_in_ground, RewardOracle};
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};
use crate::set::{all_subsets, ActionSet};

/// Explicit table over all `2^m` subsets, indexed by mask bits.
/// Normalization and monotonicity are validated at construction.
pub struct TableReward<T> {
    m: usize,
    values: Vec<T>,
}

impl<T: Scalar> TableReward<T> {
    pub fn new(m: usize, values: Vec<T>, tol: T) -> Result<Self> {
        if values.len() != 1usize << m {
            return Err(Error::MalformedInstance(format!(
                "table has {} entries, expected 2^{m}",
                values.len()
            )));
        }
        if values[0].abs() > tol {
            return Err(Error::MalformedInstance(format!(
                "table is not normalized: f(empty set) = {}",
                values[0]
            )));
        }
        for s in all_subsets(m) {
            for j in 0..m {
                if s.contains(j) {
                    continue;
                }
                let lo = &values[s.bits() as usize];
                let hi = &values[s.with(j).bits() as usize];
                if hi.clone() + tol.clone() < *lo {
                    return Err(Error::MalformedInstance(format!(
                        "table is not monotone: f({}) = {hi} < f({s}) = {lo}",
                        s.with(j)
                    )));
                }
            }
        }
        Ok(TableReward { m, values })
    }
}

impl<T: Scalar> RewardOracle<T> for TableReward<T> {
    fn ground_size(&self) -> usize {
        self.m
    }

    fn value(&self, s: ActionSet) -> T {
        assert_in_ground(s, self.m);
        self.values[s.bits() as usize].clone()
    }
}

/// Additive rewards: `f(S) = sum_{j in S} v_j`.
pub struct AdditiveReward<T> {
    values: Vec<T>,
}

impl<T: Scalar> AdditiveReward<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        for (j, v) in values.iter().enumerate() {
            if *v < T::zero() || !v.is_finite_scalar() {
                return Err(Error::MalformedInstance(format!(
                    "additive value v_{j} = {v} must be non-negative"
                )));
            }
        }
        Ok(AdditiveReward { values })
    }

    /// `f(S) = |S| / m`: every action contributes equally and the full set
    /// has value one.
    pub fn uniform(m: usize) -> Self {
        AdditiveReward { values: vec![T::ratio(1, m as i64); m] }
    }
}

impl<T: Scalar> RewardOracle<T> for AdditiveReward<T> {
    fn ground_size(&self) -> usize {
        self.values.len()
    }

    fn value(&self, s: ActionSet) -> T {
        assert_in_ground(s, self.values.len());
        s.iter().fold(T::zero(), |acc, j| acc + self.values[j].clone())
    }
}

/// Weighted coverage: each action covers a subset of a weighted universe and
/// `f(S)` is the covered weight divided by the total weight. Monotone and
/// submodular by construction.
pub struct CoverageReward<T> {
    covers: Vec<u64>,
    weights: Vec<T>,
    total: T,
}

impl<T: Scalar> CoverageReward<T> {
    pub fn new(weights: Vec<T>, covers: Vec<u64>) -> Result<Self> {
        if weights.len() > 64 {
            return Err(Error::MalformedInstance(
                "coverage universe larger than 64 elements".into(),
            ));
        }
        let universe_mask = if weights.len() == 64 { u64::MAX } else { (1u64 << weights.len()) - 1 };
        for (j, c) in covers.iter().enumerate() {
            if c & !universe_mask != 0 {
                return Err(Error::MalformedInstance(format!(
                    "action {j} covers elements outside the universe"
                )));
            }
        }
        for (e, w) in weights.iter().enumerate() {
            if *w < T::zero() || !w.is_finite_scalar() {
                return Err(Error::MalformedInstance(format!(
                    "universe weight w_{e} = {w} must be non-negative"
                )));
            }
        }
        let total = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        let total = if total == T::zero() { T::one() } else { total };
        Ok(CoverageReward { covers, weights, total })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn covers(&self) -> &[u64] {
        &self.covers
    }
}

impl<T: Scalar> RewardOracle<T> for CoverageReward<T> {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, s: ActionSet) -> T {
        assert_in_ground(s, self.covers.len());
        let mut covered = 0u64;
        for j in s.iter() {
            covered |= self.covers[j];
        }
        let mut acc = T::zero();
        let mut bits = covered;
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            acc = acc + self.weights[e].clone();
        }
        acc / self.total.clone()
    }
}

/// XOS rewards: the maximum of a collection of additive clauses,
/// `f(S) = max_l sum_{j in S} a_{l j}`.
pub struct XosReward<T> {
    m: usize,
    clauses: Vec<Vec<T>>,
}

impl<T: Scalar> XosReward<T> {
    pub fn new(m: usize, clauses: Vec<Vec<T>>) -> Result<Self> {
        for (l, clause) in clauses.iter().enumerate() {
            if clause.len() != m {
                return Err(Error::MalformedInstance(format!(
                    "clause {l} has {} weights for {m} actions",
                    clause.len()
                )));
            }
            for (j, a) in clause.iter().enumerate() {
                if *a < T::zero() || !a.is_finite_scalar() {
                    return Err(Error::MalformedInstance(format!(
                        "clause weight a_{l},{j} = {a} must be non-negative"
                    )));
                }
            }
        }
        Ok(XosReward { m, clauses })
    }

    pub fn clauses(&self) -> &[Vec<T>] {
        &self.clauses
    }
}

impl<T: Scalar> RewardOracle<T> for XosReward<T> {
    fn ground_size(&self) -> usize {
        self.m
    }

    fn value(&self, s: ActionSet) -> T {
        assert_in_ground(s, self.m);
        let mut best = T::zero();
        for clause in &self.clauses {
            let v = s.iter().fold(T::zero(), |acc, j| acc + clause[j].clone());
            if v > best {
                best = v;
            }
        }
        best
    }
}

/// The two-variable profile function behind the hidden-team family:
/// the value of a set with `x` elements outside the team and `y` inside,
/// for team size `k`.
pub fn team_value<T: RealScalar>(x: usize, y: usize, k: usize) -> T {
    let kf = T::integer(k);
    let half_k = T::integer(k) / T::integer(2);
    if x + y >= k {
        return kf.sqrt();
    }
    let xf = T::integer(x);
    let yf = T::integer(y);
    if 2 * y <= k {
        (xf + yf).sqrt()
    } else {
        let base = (xf + half_k.clone()).sqrt();
        base + (yf - half_k) / (kf.sqrt() + base)
    }
}

/// Hidden-team rewards `f_T(S) = f(|S \ T|, |S cap T|)` with `k = |T|`.
///
/// Sets of equal size have equal value unless they overlap the hidden team in
/// more than `k/2` elements, in which case they are worth strictly less; the
/// full team has the highest marginals. Monotone and submodular for every
/// even `k`.
pub struct HiddenTeamReward<T> {
    m: usize,
    team: ActionSet,
    _marker: std::marker::PhantomData<T>,
}

impl<T: RealScalar> HiddenTeamReward<T> {
    pub fn new(m: usize, team: ActionSet) -> Result<Self> {
        let k = team.len();
        if k % 2 != 0 || k < 4 || k >= m {
            return Err(Error::InvalidParameter(format!(
                "team size must be even with 4 <= k < m, got k = {k}, m = {m}"
            )));
        }
        if !team.is_subset_of(ActionSet::full(m)) {
            return Err(Error::InvalidParameter(format!(
                "team {team} is not contained in the ground set of size {m}"
            )));
        }
        Ok(HiddenTeamReward { m, team, _marker: std::marker::PhantomData })
    }

    pub fn team(&self) -> ActionSet {
        self.team
    }

    pub fn k(&self) -> usize {
        self.team.len()
    }
}

impl<T: RealScalar> RewardOracle<T> for HiddenTeamReward<T> {
    fn ground_size(&self) -> usize {
        self.m
    }

    fn value(&self, s: ActionSet) -> T {
        assert_in_ground(s, self.m);
        let y = s.intersection(self.team).len();
        let x = s.len() - y;
        team_value(x, y, self.k())
    }
}

/// Cap an inner oracle at `xi`: `f_hat(S) = min(f(S), xi)`. Preserves
/// monotonicity and submodularity; one inner query per outer query.
pub struct CappedReward<T> {
    inner: Arc<dyn RewardOracle<T>>,
    cap: T,
}

impl<T: Scalar> CappedReward<T> {
    pub fn new(inner: Arc<dyn RewardOracle<T>>, cap: T) -> Result<Self> {
        if cap < T::zero() {
            return Err(Error::InvalidParameter(format!("cap {cap} must be non-negative")));
        }
        Ok(CappedReward { inner, cap })
    }
}

impl<T: Scalar> RewardOracle<T> for CappedReward<T> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, s: ActionSet) -> T {
        let v = self.inner.value(s);
        if v > self.cap {
            self.cap.clone()
        } else {
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> ActionSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn hidden_team_values_k4() {
        let team = set(&[1, 3, 5, 7]);
        let o = HiddenTeamReward::<f64>::new(10, team).unwrap();
        assert_eq!(o.value(ActionSet::empty()), 0.0);
        // the whole team: x + y = k
        assert!((o.value(team) - 2.0).abs() < 1e-12);
        // three team members, nothing outside: sqrt(2) + 1/(2 + sqrt(2))
        let v = o.value(set(&[1, 3, 5]));
        let expected = 2f64.sqrt() + 1.0 / (2.0 + 2f64.sqrt());
        assert!((v - expected).abs() < 1e-12, "v = {v}");
        assert!((expected - 1.70710678).abs() < 1e-7);
        // low overlap: value depends only on size
        assert_eq!(o.value(set(&[0, 2, 4])), 3f64.sqrt());
        assert_eq!(o.value(set(&[1, 2, 4])), 3f64.sqrt());
        // any set of size >= k is worth sqrt(k)
        assert!((o.value(set(&[0, 1, 2, 3, 4])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn capped_reward() {
        let team = set(&[0, 1, 2, 3]);
        let inner = Arc::new(HiddenTeamReward::<f64>::new(8, team).unwrap());
        let capped = CappedReward::new(inner.clone(), 1.5).unwrap();
        assert_eq!(capped.value(team), 1.5);
        let zero = CappedReward::new(inner.clone(), 0.0).unwrap();
        assert_eq!(zero.value(team), 0.0);
        assert_eq!(zero.value(ActionSet::empty()), 0.0);
        let unbounded = CappedReward::new(inner.clone(), f64::INFINITY).unwrap();
        for s in crate::set::all_subsets(8) {
            assert_eq!(unbounded.value(s), inner.value(s));
        }
        assert!(CappedReward::new(inner, -0.5).is_err());
    }

    #[test]
    fn table_rejects_non_monotone_and_non_normalized() {
        assert!(TableReward::new(1, vec![0.1, 0.5], 1e-9).is_err());
        assert!(TableReward::new(2, vec![0.0, 0.5, 0.6, 0.4], 1e-9).is_err());
        assert!(TableReward::new(2, vec![0.0, 0.5, 0.6, 0.8], 1e-9).is_ok());
    }

    #[test]
    fn xos_is_max_of_clauses() {
        let o = XosReward::new(2, vec![vec![0.5, 0.0], vec![0.3, 0.3]]).unwrap();
        assert_eq!(o.value(ActionSet::empty()), 0.0);
        assert_eq!(o.value(set(&[0])), 0.5);
        assert_eq!(o.value(set(&[1])), 0.3);
        assert_eq!(o.value(set(&[0, 1])), 0.6);
    }

    #[test]
    fn coverage_is_normalized() {
        let o = CoverageReward::new(vec![1.0, 2.0, 1.0], vec![0b011, 0b100]).unwrap();
        assert_eq!(o.value(ActionSet::empty()), 0.0);
        assert_eq!(o.value(set(&[0])), 0.75);
        assert_eq!(o.value(set(&[0, 1])), 1.0);
    }
}
