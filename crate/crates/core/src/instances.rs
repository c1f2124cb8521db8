//! Canonical and random instance generators.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::oracles::{
    AdditiveReward, CoverageReward, HiddenTeamDemand, HiddenTeamReward, TableReward, XosReward,
};
use crate::scalar::{RealScalar, Scalar};
use crate::set::ActionSet;

/// The running two-agent example: agent 0 controls actions 0 and 1, agent 1
/// controls action 2, costs `(0.1, 0.24, eps)`, and an explicit submodular
/// (but not gross-substitutes) success-probability table.
///
/// Dropping agent 1 makes incentivizing action 1 strictly more expensive for
/// the principal, so one agent doing less makes the other do less as well.
pub fn example_one<T: Scalar>(eps: T) -> Result<Instance<T>> {
    if eps <= T::zero() || eps >= T::one() {
        return Err(Error::InvalidParameter(format!(
            "cost eps must lie in (0, 1), got {eps}"
        )));
    }
    // masks: bit0, bit1 owned by agent 0; bit2 by agent 1
    let values = vec![
        T::zero(),        // {}
        T::ratio(7, 16),  // {0}
        T::ratio(3, 4),   // {1}
        T::ratio(7, 8),   // {0,1}
        T::ratio(1, 4),   // {2}
        T::ratio(9, 16),  // {0,2}
        T::one(),         // {1,2}
        T::one(),         // {0,1,2}
    ];
    let reward = Arc::new(TableReward::new(3, values, T::zero())?);
    let costs = vec![T::ratio(1, 10), T::ratio(24, 100), eps];
    Instance::new(2, vec![0, 0, 1], costs, reward, T::one())
}

/// A hidden-team instance together with the team it hides.
pub struct HiddenTeamInstance<T> {
    pub instance: Instance<T>,
    pub team: ActionSet,
}

/// `m` binary-action agents with a hidden-team reward over a uniformly random
/// team of even size `k` and uniform costs `1 / (8 k^{3/2})`.
///
/// The instance's demand oracle is the value-query reconstruction procedure,
/// so algorithms see the reward as a value oracle only.
pub fn hidden_team_instance<T: RealScalar>(
    k: usize,
    m: usize,
    seed: u64,
) -> Result<HiddenTeamInstance<T>> {
    if k % 2 != 0 || k < 4 || k >= m {
        return Err(Error::InvalidParameter(format!(
            "team size must be even with 4 <= k < m, got k = {k}, m = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let team: ActionSet = rand::seq::index::sample(&mut rng, m, k).into_iter().collect();
    let reward = Arc::new(HiddenTeamReward::<T>::new(m, team)?);
    let kf = T::integer(k);
    let cost = T::one() / (T::integer(8) * kf * kf.sqrt());
    let costs = vec![cost; m];
    let owner: Vec<usize> = (0..m).collect();
    let demand = HiddenTeamDemand::new(
        reward.clone() as Arc<dyn crate::oracles::RewardOracle<T>>,
        T::ratio(1, 1_000_000_000),
        crate::model::TieBreak::default(),
    );
    let instance = Instance::new(m, owner, costs, reward, T::one())?
        .with_demand_oracle(Arc::new(demand));
    Ok(HiddenTeamInstance { instance, team })
}

/// XOS clauses for [`xos_bad_equilibrium_instance`]: `|S| / k^3`,
/// `k^2 |S - [k]| / k^3`, and one singleton clause `2 / k^3` per agent.
pub fn xos_bad_clauses<T: Scalar>(k: usize) -> Vec<Vec<T>> {
    let n = 2 * k;
    let kc = (k * k * k) as i64;
    let mut clauses = vec![vec![T::ratio(1, kc); n]];
    let mut big = vec![T::zero(); n];
    for slot in big.iter_mut().skip(k) {
        *slot = T::ratio((k * k) as i64, kc);
    }
    clauses.push(big);
    for i in 0..n {
        let mut c = vec![T::zero(); n];
        c[i] = T::ratio(2, kc);
        clauses.push(c);
    }
    clauses
}

/// `2k` binary-action agents where the first `k` act for free and the rest
/// are expensive; under any contract some equilibrium gives the principal
/// only an `O(1/n^2)` fraction of the welfare optimum `1 / (2k)`.
pub fn xos_bad_equilibrium_instance<T: Scalar>(k: usize) -> Result<Instance<T>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let n = 2 * k;
    if n > crate::set::MAX_ACTIONS {
        return Err(Error::GroundTooLarge { m: n, cap: crate::set::MAX_ACTIONS });
    }
    let reward = Arc::new(XosReward::new(n, xos_bad_clauses::<T>(k))?);
    let kc = (k * k * k) as i64;
    let dear = T::ratio(2 * (k * k) as i64 - k as i64, 2 * kc);
    let mut costs = vec![T::zero(); n];
    for slot in costs.iter_mut().skip(k) {
        *slot = dear.clone();
    }
    let owner: Vec<usize> = (0..n).collect();
    Instance::new(n, owner, costs, reward, T::one())
}

/// `n` binary-action agents, `f(S) = |S| / n`, every action costs `1/(2n)`.
/// The welfare optimum is `1/2` for every `n` while no contract earns the
/// principal more than `1/(2n)`.
pub fn uniform_additive_instance<T: Scalar>(n: usize) -> Result<Instance<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one agent".into()));
    }
    if n > crate::set::MAX_ACTIONS {
        return Err(Error::GroundTooLarge { m: n, cap: crate::set::MAX_ACTIONS });
    }
    let reward = Arc::new(AdditiveReward::<T>::uniform(n));
    let costs = vec![T::ratio(1, 2 * n as i64); n];
    let owner: Vec<usize> = (0..n).collect();
    Instance::new(n, owner, costs, reward, T::one())
}

/// XOS clauses for [`prop_b1_instance`]: `|S| / n` plus one `2/n` singleton
/// clause per agent, so singletons are worth `2/n` and larger sets `|S|/n`.
pub fn prop_b1_clauses<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    let mut clauses = vec![vec![T::ratio(1, n as i64); n]];
    for i in 0..n {
        let mut c = vec![T::zero(); n];
        c[i] = T::ratio(2, n as i64);
        clauses.push(c);
    }
    clauses
}

/// `n > 2` binary-action agents with singleton boost `2/n` and costs
/// `1/(2n^2)`: the full set is an equilibrium worth `1/2` to the principal
/// under `alpha_i = 1/(2n)`, yet a single-agent equilibrium always coexists.
pub fn prop_b1_instance<T: Scalar>(n: usize) -> Result<Instance<T>> {
    if n <= 2 {
        return Err(Error::InvalidParameter(format!("need more than two agents, got {n}")));
    }
    if n > crate::set::MAX_ACTIONS {
        return Err(Error::GroundTooLarge { m: n, cap: crate::set::MAX_ACTIONS });
    }
    let reward = Arc::new(XosReward::new(n, prop_b1_clauses::<T>(n))?);
    let costs = vec![T::ratio(1, 2 * (n * n) as i64); n];
    let owner: Vec<usize> = (0..n).collect();
    Instance::new(n, owner, costs, reward, T::one())
}

/// Parameters of the random weighted-coverage family.
#[derive(Clone, Debug)]
pub struct CoverageParams {
    pub n: usize,
    pub actions_per_agent: usize,
    pub universe: usize,
    /// upper end of the uniform cost range (a sixth of the draws are
    /// clamped to exactly zero to exercise free actions)
    pub cost_max: f64,
}

impl Default for CoverageParams {
    fn default() -> Self {
        CoverageParams { n: 2, actions_per_agent: 2, universe: 8, cost_max: 0.25 }
    }
}

/// The raw random draw behind a coverage instance, in serializable form.
#[derive(Clone, Debug)]
pub struct CoverageDraw {
    pub owner: Vec<usize>,
    pub costs: Vec<f64>,
    pub weights: Vec<f64>,
    pub covers: Vec<u64>,
}

/// Deterministic function of the parameters and seed.
pub fn random_coverage_draw(params: &CoverageParams, seed: u64) -> Result<CoverageDraw> {
    if params.n == 0 || params.actions_per_agent == 0 || params.universe == 0 {
        return Err(Error::InvalidParameter("coverage sizes must be positive".into()));
    }
    if params.universe > 64 {
        return Err(Error::InvalidParameter("coverage universe capped at 64 elements".into()));
    }
    let m = params.n * params.actions_per_agent;
    if m > crate::set::MAX_ACTIONS {
        return Err(Error::GroundTooLarge { m, cap: crate::set::MAX_ACTIONS });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..params.universe).map(|_| rng.gen_range(0.5..1.5)).collect();
    let covers: Vec<u64> = (0..m)
        .map(|_| {
            let mut mask = 0u64;
            for e in 0..params.universe {
                if rng.gen_bool(0.35) {
                    mask |= 1u64 << e;
                }
            }
            mask
        })
        .collect();
    let costs: Vec<f64> = (0..m)
        .map(|_| {
            let c: f64 = rng.gen_range(0.0..params.cost_max.max(f64::MIN_POSITIVE));
            if rng.gen_bool(1.0 / 6.0) {
                0.0
            } else {
                c
            }
        })
        .collect();
    let owner: Vec<usize> = (0..m).map(|j| j / params.actions_per_agent).collect();
    Ok(CoverageDraw { owner, costs, weights, covers })
}

/// Random monotone submodular instance from the weighted-coverage family,
/// normalized so the full set is worth at most one.
pub fn random_coverage_instance(params: &CoverageParams, seed: u64) -> Result<Instance<f64>> {
    let draw = random_coverage_draw(params, seed)?;
    let reward = Arc::new(CoverageReward::new(draw.weights, draw.covers)?);
    Instance::new(params.n, draw.owner, draw.costs, reward, 1.0)
}

/// Tagged generator parameters, addressable from the command line.
#[derive(Clone, Debug)]
pub enum GeneratorSpec {
    ExampleOne { eps: f64 },
    HiddenTeam { k: usize, m: usize, seed: u64 },
    XosBadEquilibrium { k: usize },
    UniformAdditive { n: usize },
    PropB1 { n: usize },
    Coverage { params: CoverageParams, seed: u64 },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Instance<f64>> {
        match self {
            GeneratorSpec::ExampleOne { eps } => example_one(*eps),
            GeneratorSpec::HiddenTeam { k, m, seed } => {
                Ok(hidden_team_instance(*k, *m, *seed)?.instance)
            }
            GeneratorSpec::XosBadEquilibrium { k } => xos_bad_equilibrium_instance(*k),
            GeneratorSpec::UniformAdditive { n } => uniform_additive_instance(*n),
            GeneratorSpec::PropB1 { n } => prop_b1_instance(*n),
            GeneratorSpec::Coverage { params, seed } => random_coverage_instance(params, *seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{check_gross_substitutes_triplet, check_monotone_submodular};

    fn set(ids: &[usize]) -> ActionSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn example_one_table_values() {
        let inst = example_one::<f64>(0.01).unwrap();
        assert_eq!(inst.value_uncounted(set(&[0, 1])), 7.0 / 8.0);
        assert_eq!(inst.value_uncounted(ActionSet::empty()), 0.0);
        assert_eq!(inst.value_uncounted(set(&[1, 2])), 1.0);
        assert!(inst.validate(true).is_ok());
        // submodular but not gross substitutes
        let oracle = inst.reward_oracle();
        assert!(check_monotone_submodular(oracle.as_ref(), 1e-12, 14).unwrap());
        assert!(check_gross_substitutes_triplet(oracle.as_ref(), 1e-12, 14)
            .unwrap()
            .is_some());
    }

    #[test]
    fn hidden_team_instance_matches_analysis() {
        let ht = hidden_team_instance::<f64>(4, 10, 7).unwrap();
        assert_eq!(ht.team.len(), 4);
        assert!((ht.instance.cost(0) - 1.0 / 64.0).abs() < 1e-15);
        assert!((ht.instance.value_uncounted(ht.team) - 2.0).abs() < 1e-12);
        assert!(ht.instance.validate(true).is_ok());
        // same seed reproduces the same team
        let again = hidden_team_instance::<f64>(4, 10, 7).unwrap();
        assert_eq!(again.team, ht.team);
        let other = hidden_team_instance::<f64>(4, 10, 8).unwrap();
        assert!(other.team.len() == 4);
    }

    #[test]
    fn xos_bad_values() {
        let inst = xos_bad_equilibrium_instance::<f64>(4).unwrap();
        let k = 4f64;
        assert_eq!(inst.n(), 8);
        assert_eq!(inst.value_uncounted(ActionSet::empty()), 0.0);
        assert!((inst.value_uncounted(set(&[0])) - 2.0 / k.powi(3)).abs() < 1e-15);
        // welfare optimum 1/(2k) at the full set
        let (w, s) = crate::exact::welfare_opt(&inst).unwrap();
        assert!((w - 1.0 / (2.0 * k)).abs() < 1e-12);
        assert_eq!(s, ActionSet::full(8));
        assert!(inst.validate(true).is_ok());
    }

    #[test]
    fn uniform_additive_values() {
        let inst = uniform_additive_instance::<f64>(4).unwrap();
        assert_eq!(inst.value_uncounted(ActionSet::full(4)), 1.0);
        assert_eq!(*inst.cost(2), 0.125);
        assert!(inst.validate(true).is_ok());
    }

    #[test]
    fn prop_b1_values() {
        let inst = prop_b1_instance::<f64>(8).unwrap();
        assert_eq!(inst.value_uncounted(set(&[3])), 0.25);
        assert_eq!(inst.value_uncounted(set(&[3, 5])), 0.25);
        assert_eq!(inst.value_uncounted(ActionSet::full(8)), 1.0);
        assert!(prop_b1_instance::<f64>(2).is_err());
        assert!(inst.validate(true).is_ok());
    }

    #[test]
    fn coverage_is_deterministic_and_submodular() {
        let params = CoverageParams::default();
        let a = random_coverage_draw(&params, 11).unwrap();
        let b = random_coverage_draw(&params, 11).unwrap();
        assert_eq!(a.costs, b.costs);
        assert_eq!(a.covers, b.covers);
        assert_eq!(a.weights, b.weights);

        for seed in 0..20 {
            let inst = random_coverage_instance(&params, seed).unwrap();
            assert!(inst.validate(true).is_ok());
            let oracle = inst.reward_oracle();
            assert!(check_monotone_submodular(oracle.as_ref(), 1e-9, 14).unwrap());
            assert!(inst.value_uncounted(inst.all_actions()) <= 1.0 + 1e-12);
        }
    }
}
