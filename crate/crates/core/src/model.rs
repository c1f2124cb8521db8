//! Domain model: instances, linear contracts, utilities and validation.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::oracles::{BruteForceDemand, DemandOracle, QueryCounter, QueryTally, RewardOracle};
use crate::scalar::Scalar;
use crate::set::{ActionSet, MAX_ACTIONS};
use crate::{ActionId, AgentId};

/// Tie-breaking policy for demand queries and best responses.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Among maximizers prefer the larger reward value, then the
    /// lexicographically smallest set. Breaks agent indifference in favor of
    /// the principal.
    #[default]
    LargerRewardThenLex,
    /// Lexicographically smallest maximizer.
    Lexicographic,
}

/// Comparison tolerance and tie policy.
///
/// Weak inequalities are evaluated as `x >= y - tol`. Reward families with
/// irrational values force floating point; rational-valued instances can use
/// [`NumericConfig::exact`] with zero tolerance.
#[derive(Clone, Debug)]
pub struct NumericConfig<T> {
    pub tol: T,
    pub tie_break: TieBreak,
}

impl<T: Scalar> NumericConfig<T> {
    pub fn new(tol: T) -> Result<Self> {
        if tol < T::zero() || !tol.is_finite_scalar() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be a finite non-negative number, got {tol}"
            )));
        }
        Ok(NumericConfig { tol, tie_break: TieBreak::default() })
    }

    /// Zero tolerance, for exact scalar types.
    pub fn exact() -> Self {
        NumericConfig { tol: T::zero(), tie_break: TieBreak::default() }
    }

    /// `a >= b` up to tolerance.
    pub fn ge(&self, a: &T, b: &T) -> bool {
        a.clone() + self.tol.clone() >= b.clone()
    }

    /// `a > b` beyond tolerance.
    pub fn gt(&self, a: &T, b: &T) -> bool {
        a.clone() > b.clone() + self.tol.clone()
    }

    /// `|a - b| <= tol`.
    pub fn eq(&self, a: &T, b: &T) -> bool {
        (a.clone() - b.clone()).abs() <= self.tol
    }
}

impl<T: Scalar> Default for NumericConfig<T> {
    fn default() -> Self {
        NumericConfig { tol: T::ratio(1, 1_000_000_000), tie_break: TieBreak::default() }
    }
}

/// A linear contract: agent `i` receives fraction `alpha_i` of the reward on
/// success. Components lie in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Contract<T> {
    alpha: Vec<T>,
}

impl<T: Scalar> Contract<T> {
    pub fn new(alpha: Vec<T>) -> Result<Self> {
        for (i, a) in alpha.iter().enumerate() {
            if !a.is_finite_scalar() || *a < T::zero() || *a > T::one() {
                return Err(Error::InvalidContract(format!(
                    "alpha_{i} = {a} is outside [0, 1]"
                )));
            }
        }
        Ok(Contract { alpha })
    }

    pub fn zeros(n: usize) -> Self {
        Contract { alpha: vec![T::zero(); n] }
    }

    /// The same payment fraction for every agent.
    pub fn uniform(n: usize, a: T) -> Result<Self> {
        Contract::new(vec![a; n])
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self, i: AgentId) -> &T {
        &self.alpha[i]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.alpha
    }

    /// Sum of all payment fractions.
    pub fn total(&self) -> T {
        self.alpha.iter().fold(T::zero(), |acc, a| acc + a.clone())
    }

    /// The contract `2*alpha + eps` componentwise.
    pub fn doubled_plus(&self, eps: T) -> Result<Self> {
        let two = T::integer(2);
        Contract::new(
            self.alpha.iter().map(|a| two.clone() * a.clone() + eps.clone()).collect(),
        )
    }
}

impl<T: Scalar> fmt::Display for Contract<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.alpha.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A violation found by [`Instance::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NegativeCost { action: ActionId },
    NonFiniteCost { action: ActionId },
    NonPositiveRewardScale,
    /// `f(empty)` differs from zero beyond tolerance.
    NotNormalized { value: String },
    NotMonotone { subset: ActionSet, superset: ActionSet },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeCost { action } => write!(f, "negative cost on action {action}"),
            Violation::NonFiniteCost { action } => {
                write!(f, "non-finite cost on action {action}")
            }
            Violation::NonPositiveRewardScale => write!(f, "reward scale r must be positive"),
            Violation::NotNormalized { value } => {
                write!(f, "reward function is not normalized: f(empty set) = {value}")
            }
            Violation::NotMonotone { subset, superset } => {
                write!(f, "reward function decreases from {subset} to {superset}")
            }
        }
    }
}

/// Result of instance validation: empty means the instance is well formed.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive monotonicity validation is skipped above this many actions.
pub const MONOTONICITY_CHECK_CAP: usize = 16;

/// A multi-agent contract instance: action partition, costs, reward oracle
/// and reward scale.
///
/// Immutable after construction; value and demand queries update atomic
/// counters and are safe to issue concurrently.
pub struct Instance<T> {
    n: usize,
    owner: Vec<AgentId>,
    costs: Vec<T>,
    r: T,
    reward: Arc<dyn RewardOracle<T>>,
    demand: OnceLock<Arc<dyn DemandOracle<T>>>,
    counter: Arc<QueryCounter>,
    agent_actions: Vec<ActionSet>,
    cfg: NumericConfig<T>,
}

impl<T: Scalar> Instance<T> {
    /// Build an instance over `m = owner.len()` actions, where `owner[j]` is
    /// the agent controlling action `j`.
    pub fn new(
        n: usize,
        owner: Vec<AgentId>,
        costs: Vec<T>,
        reward: Arc<dyn RewardOracle<T>>,
        r: T,
    ) -> Result<Self> {
        let m = owner.len();
        if costs.len() != m {
            return Err(Error::MalformedInstance(format!(
                "{} costs for {m} actions",
                costs.len()
            )));
        }
        if m > MAX_ACTIONS {
            return Err(Error::GroundTooLarge { m, cap: MAX_ACTIONS });
        }
        if n == 0 && m > 0 {
            return Err(Error::MalformedInstance("actions but no agents".into()));
        }
        if reward.ground_size() != m {
            return Err(Error::MalformedInstance(format!(
                "reward oracle is over {} actions, instance has {m}",
                reward.ground_size()
            )));
        }
        let mut agent_actions = vec![ActionSet::empty(); n];
        for (j, &i) in owner.iter().enumerate() {
            if i >= n {
                return Err(Error::AgentOutOfRange { agent: i, n });
            }
            agent_actions[i].insert(j);
        }
        Ok(Instance {
            n,
            owner,
            costs,
            r,
            reward,
            demand: OnceLock::new(),
            counter: Arc::new(QueryCounter::default()),
            agent_actions,
            cfg: NumericConfig::default(),
        })
    }

    /// Attach a demand oracle. Without one, demand queries fall back to brute
    /// force when the ground set is small enough.
    pub fn with_demand_oracle(self, demand: Arc<dyn DemandOracle<T>>) -> Self {
        let _ = self.demand.set(demand);
        self
    }

    pub fn with_numeric_config(mut self, cfg: NumericConfig<T>) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn m(&self) -> usize {
        self.owner.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> &T {
        &self.r
    }

    pub fn cfg(&self) -> &NumericConfig<T> {
        &self.cfg
    }

    pub fn owner(&self, j: ActionId) -> AgentId {
        self.owner[j]
    }

    pub fn cost(&self, j: ActionId) -> &T {
        &self.costs[j]
    }

    pub fn costs(&self) -> &[T] {
        &self.costs
    }

    /// Total cost of a set of actions.
    pub fn cost_of(&self, s: ActionSet) -> T {
        s.iter().fold(T::zero(), |acc, j| acc + self.costs[j].clone())
    }

    pub fn all_actions(&self) -> ActionSet {
        ActionSet::full(self.m())
    }

    /// Actions with exactly zero cost.
    pub fn zero_cost_actions(&self) -> ActionSet {
        (0..self.m()).filter(|&j| self.costs[j] == T::zero()).collect()
    }

    pub fn agent_actions(&self, i: AgentId) -> ActionSet {
        self.agent_actions[i]
    }

    /// `S_i`: the part of `s` controlled by agent `i`.
    pub fn agent_part(&self, s: ActionSet, i: AgentId) -> ActionSet {
        s & self.agent_actions[i]
    }

    /// `S_{-i}`: the part of `s` controlled by everyone else.
    pub fn others_part(&self, s: ActionSet, i: AgentId) -> ActionSet {
        s - self.agent_actions[i]
    }

    pub fn reward_oracle(&self) -> Arc<dyn RewardOracle<T>> {
        Arc::clone(&self.reward)
    }

    /// Success probability `f(s)`, counted as one value query.
    pub fn value(&self, s: ActionSet) -> T {
        self.counter.record_value();
        self.reward.value(s)
    }

    /// `f(s)` without touching the query counters. For enumeration oracles
    /// and bookkeeping that sit outside the query model.
    pub fn value_uncounted(&self, s: ActionSet) -> T {
        self.reward.value(s)
    }

    /// Demand query at additive prices, counted as one demand query.
    ///
    /// Uses the attached demand oracle if any, otherwise brute force over all
    /// subsets (requires `m` within the brute-force cap).
    pub fn demand(&self, prices: &[T]) -> Result<ActionSet> {
        assert_eq!(prices.len(), self.m(), "price vector length mismatch");
        if self.demand.get().is_none() {
            if self.m() > BruteForceDemand::<T>::DEFAULT_CAP {
                return Err(Error::NoDemandOracle);
            }
            let bf = BruteForceDemand::new(Arc::clone(&self.reward), self.cfg.tie_break)?;
            let _ = self.demand.set(Arc::new(bf));
        }
        let oracle = self.demand.get().expect("demand oracle just initialized");
        self.counter.record_demand();
        Ok(oracle.demand(prices))
    }

    pub fn queries(&self) -> QueryTally {
        self.counter.tally()
    }

    pub fn reset_queries(&self) {
        self.counter.reset();
    }

    /// Agent `i`'s expected utility `alpha_i * f(S) * r - c(S_i)`.
    pub fn agent_utility(&self, s: ActionSet, contract: &Contract<T>, i: AgentId) -> Result<T> {
        if i >= self.n {
            return Err(Error::AgentOutOfRange { agent: i, n: self.n });
        }
        if contract.len() != self.n {
            return Err(Error::InvalidContract(format!(
                "contract has {} components for {} agents",
                contract.len(),
                self.n
            )));
        }
        let f = self.value_uncounted(s);
        Ok(contract.alpha(i).clone() * f * self.r.clone() - self.cost_of(self.agent_part(s, i)))
    }

    /// The principal's expected utility `(1 - sum_i alpha_i) * f(S) * r`.
    pub fn principal_utility(&self, s: ActionSet, contract: &Contract<T>) -> T {
        let f = self.value_uncounted(s);
        (T::one() - contract.total()) * f * self.r.clone()
    }

    /// Social welfare `f(S) * r - c(S)`.
    pub fn welfare(&self, s: ActionSet) -> T {
        self.value_uncounted(s) * self.r.clone() - self.cost_of(s)
    }

    /// Check cost sign/finiteness, reward scale, normalization and (optionally,
    /// in time exponential in `m`) monotonicity. Violations are reported, not
    /// raised. Monotonicity is only checked for `m` up to
    /// [`MONOTONICITY_CHECK_CAP`].
    pub fn validate(&self, check_monotone: bool) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (j, c) in self.costs.iter().enumerate() {
            if !c.is_finite_scalar() {
                report.violations.push(Violation::NonFiniteCost { action: j });
            } else if *c < T::zero() {
                report.violations.push(Violation::NegativeCost { action: j });
            }
        }
        if self.r <= T::zero() || !self.r.is_finite_scalar() {
            report.violations.push(Violation::NonPositiveRewardScale);
        }
        let f_empty = self.value_uncounted(ActionSet::empty());
        if !self.cfg.eq(&f_empty, &T::zero()) {
            report.violations.push(Violation::NotNormalized { value: f_empty.to_string() });
        }
        if check_monotone && self.m() <= MONOTONICITY_CHECK_CAP {
            'outer: for s in crate::set::all_subsets(self.m()) {
                let fs = self.value_uncounted(s);
                for j in 0..self.m() {
                    if s.contains(j) {
                        continue;
                    }
                    let fs_j = self.value_uncounted(s.with(j));
                    if !self.cfg.ge(&fs_j, &fs) {
                        report
                            .violations
                            .push(Violation::NotMonotone { subset: s, superset: s.with(j) });
                        break 'outer;
                    }
                }
            }
        }
        report
    }
}

impl<T: Scalar> fmt::Debug for Instance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("n", &self.n)
            .field("m", &self.m())
            .field("owner", &self.owner)
            .field("costs", &self.costs)
            .field("r", &self.r)
            .finish()
    }
}
