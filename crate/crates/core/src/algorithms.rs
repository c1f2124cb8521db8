//! Approximation algorithms returning contracts with certified guarantees.
//!
//! The bundle-demand subroutines maximize a submodular value against
//! square-root bundle prices; on top of them sit the no-large-agent
//! contract, the single-agent FPTAS, its robust multi-agent extension, and
//! the meta algorithm that takes the better of the two certified bounds.

use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::scalar::RealScalar;
use crate::set::ActionSet;
use crate::AgentId;

/// Which algorithm produced a guaranteed contract.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    NoLargeAgent,
    RobustSingleZeroCostTeam,
    RobustSingleBoostedAgent,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Provenance::NoLargeAgent => "no-large-agent",
            Provenance::RobustSingleZeroCostTeam => "robust-single/zero-cost-team",
            Provenance::RobustSingleBoostedAgent => "robust-single/boosted-agent",
        };
        f.write_str(s)
    }
}

/// A contract together with a certified lower bound on the principal's
/// utility in **every** equilibrium.
#[derive(Clone, Debug)]
pub struct GuaranteedContract<T> {
    pub contract: Contract<T>,
    /// non-negative certified floor on the worst-equilibrium utility
    pub lambda: T,
    pub provenance: Provenance,
}

/// Tunable parameters of the approximation algorithms.
#[derive(Clone, Debug)]
pub struct AlgParams<T> {
    /// bundle-demand approximation parameter; the guarantee is certified at 1/6
    pub rho: T,
    /// perturbation added after doubling; defaults to `1/(8n)`
    pub eps: Option<T>,
    /// accuracy of the standalone single-agent FPTAS
    pub fptas_eps: T,
}

impl<T: RealScalar> Default for AlgParams<T> {
    fn default() -> Self {
        AlgParams { rho: T::ratio(1, 6), eps: None, fptas_eps: T::ratio(1, 10) }
    }
}

fn ceil_log2(x: usize) -> usize {
    let mut k = 0;
    while (1usize << k) < x {
        k += 1;
    }
    k
}

/// Approximately maximize `h(S) - sqrt(sum_{j in S} q_j)` over subsets of
/// `ground` for monotone submodular `h`, using value access only.
///
/// Guesses the optimal value on a doubling grid seeded by the positive
/// singletons, prices each guess additively at `18 q_j / x`, and runs a
/// marginal-minus-price greedy. The returned set satisfies
/// `h(S) - sqrt(q(S)) >= max_S* (h(S*)/6 - sqrt(q(S*)))`.
pub fn bundle_demand_single<T, F>(ground: ActionSet, q: &[T], h: &F) -> ActionSet
where
    T: RealScalar,
    F: Fn(ActionSet) -> T,
{
    let mg = ground.len();
    let mut best: (T, T, ActionSet) = (T::zero(), T::zero(), ActionSet::empty());
    if mg == 0 {
        return best.2;
    }
    let q_of = |s: ActionSet| s.iter().fold(T::zero(), |acc, j| acc + q[j]);
    let kmax = ceil_log2(mg).max(1);
    let eighteen = T::integer(18);
    for j in ground.iter() {
        let hj = h(ActionSet::singleton(j));
        if hj <= T::zero() {
            continue;
        }
        for k in 1..=kmax {
            let x = T::integer(1usize << k) * hj;
            let mut s = ActionSet::empty();
            let mut hs = T::zero();
            loop {
                let mut pick: Option<(T, usize, T)> = None;
                for cand in (ground - s).iter() {
                    let hv = h(s.with(cand));
                    let net = hv - hs - eighteen * q[cand] / x;
                    if net >= T::zero() {
                        match &pick {
                            Some((pn, _, _)) if *pn >= net => {}
                            _ => pick = Some((net, cand, hv)),
                        }
                    }
                }
                match pick {
                    Some((_, cand, hv)) => {
                        s.insert(cand);
                        hs = hv;
                    }
                    None => break,
                }
            }
            let objective = hs - q_of(s).sqrt();
            let better = objective > best.0
                || (objective == best.0 && hs > best.1)
                || (objective == best.0 && hs == best.1 && s.lex_cmp(best.2).is_lt());
            if better {
                best = (objective, hs, s);
            }
        }
    }
    best.2
}

/// Approximately maximize `h(S) - sum_i sqrt(sum_{j in S_i} q_j)` over the
/// partitioned ground set: run [`bundle_demand_single`] per agent on the
/// marginal value over what previous rounds accumulated (with `q` scaled by
/// four), keep each round's best, and return the union. Guarantee as the
/// single-agent bound, at `rho / 2`.
pub fn bundle_demand_multi<T, F>(agents: &[ActionSet], q: &[T], h: &F) -> ActionSet
where
    T: RealScalar,
    F: Fn(ActionSet) -> T,
{
    let four = T::integer(4);
    let q4: Vec<T> = q.iter().map(|&v| four * v).collect();
    let q4_of = |s: ActionSet| s.iter().fold(T::zero(), |acc, j| acc + q4[j]);
    let mut acc = ActionSet::empty();
    for _round in 0..agents.len() {
        let h_acc = h(acc);
        let mut round_best: Option<(T, ActionSet)> = None;
        for own in agents {
            let marginal = |x: ActionSet| h(x | acc) - h_acc;
            let s = bundle_demand_single(*own, &q4, &marginal);
            let objective = marginal(s) - q4_of(s).sqrt();
            match &round_best {
                Some((bo, _)) if *bo >= objective => {}
                _ => round_best = Some((objective, s)),
            }
        }
        let Some((_, picked)) = round_best else { break };
        let next = acc | picked;
        if next == acc {
            // no round can make further progress
            break;
        }
        acc = next;
    }
    acc
}

/// Outcome of the no-large-agent contract computation.
#[derive(Clone, Debug)]
pub struct NoLargeAgentOutcome<T> {
    /// the returned contract `2 alpha + eps`
    pub contract: Contract<T>,
    /// certified worst-equilibrium utility `f(S) r / 8`
    pub lambda: T,
    /// the contract `alpha` before doubling; pays at most a quarter in total
    pub base_contract: Contract<T>,
    /// the working set, subset stable under the base contract
    pub working_set: ActionSet,
    /// bundle-price scale of the winning grid cell
    pub gamma: Option<T>,
}

/// Compute a contract whose every equilibrium approximates the best contract
/// in which no single agent carries most of the value. Value queries only.
///
/// Grid-searches a cap `xi` over positive singletons and doublings, caps the
/// reward at `xi`, maximizes it against bundle prices `gamma sqrt(c(S_i))`
/// via [`bundle_demand_multi`], prunes actions whose capped marginal is
/// below their bundle-price share, and pays `alpha_i = 4 sqrt(c(S_i)) /
/// gamma`, doubled plus `eps` on return.
pub fn no_large_agent_contract<T: RealScalar>(
    inst: &Instance<T>,
    rho: T,
    eps: T,
) -> Result<NoLargeAgentOutcome<T>> {
    let n = inst.n();
    if n == 0 {
        return Err(Error::InvalidParameter("instance has no agents".into()));
    }
    if rho <= T::zero() || rho > T::one() {
        return Err(Error::InvalidParameter(format!("rho = {rho} outside (0, 1]")));
    }
    let quarter_n = T::ratio(1, 4 * n as i64);
    if eps <= T::zero() || eps >= quarter_n {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} outside (0, 1/(4n)) for n = {n}"
        )));
    }
    let m = inst.m();
    let r = *inst.r();
    // work with costs normalized to reward scale one
    let cost_of = |s: ActionSet| inst.cost_of(s) / r;
    let agents: Vec<ActionSet> = (0..n).map(|i| inst.agent_actions(i)).collect();
    let f = |s: ActionSet| inst.value(s);

    let mut best: Option<(T, T, ActionSet)> = None; // (f(S), gamma, S)
    let tmax = ceil_log2(m);
    let xi_base = rho * rho / T::integer(512);
    for j_star in 0..m {
        let fj = f(ActionSet::singleton(j_star));
        if fj <= T::zero() {
            continue;
        }
        for t in 0..=tmax {
            let xi = xi_base * fj * T::integer(1usize << t);
            let gamma = (T::integer(32) * xi).sqrt();
            let fhat = |s: ActionSet| {
                let v = f(s);
                if v > xi {
                    xi
                } else {
                    v
                }
            };
            let q: Vec<T> = (0..m).map(|j| gamma * gamma * *inst.cost(j) / r).collect();
            let mut s = bundle_demand_multi(&agents, &q, &fhat);
            // drop actions whose capped marginal cannot carry their share of
            // the bundle price; rescan from the lexicographic start after
            // each removal
            loop {
                let mut removed = false;
                for j in s.iter() {
                    let own_part = inst.agent_part(s, inst.owner(j));
                    let delta = gamma * (cost_of(own_part).sqrt() - cost_of(own_part.without(j)).sqrt());
                    let marginal = fhat(s) - fhat(s.without(j));
                    if marginal < delta {
                        s.remove(j);
                        removed = true;
                        break;
                    }
                }
                if !removed {
                    break;
                }
            }
            let fs = f(s);
            match &best {
                Some((bf, _, _)) if *bf >= fs => {}
                _ => best = Some((fs, gamma, s)),
            }
        }
    }

    let Some((fs, gamma, s)) = best else {
        // every singleton is worthless, hence f is identically zero
        return Ok(NoLargeAgentOutcome {
            contract: Contract::zeros(n),
            lambda: T::zero(),
            base_contract: Contract::zeros(n),
            working_set: ActionSet::empty(),
            gamma: None,
        });
    };
    let four = T::integer(4);
    let alpha: Vec<T> =
        (0..n).map(|i| four * cost_of(inst.agent_part(s, i)).sqrt() / gamma).collect();
    let base_contract = Contract::new(alpha)?;
    let contract = base_contract.doubled_plus(eps)?;
    let lambda = fs * r / T::integer(8);
    Ok(NoLargeAgentOutcome { contract, lambda, base_contract, working_set: s, gamma: Some(gamma) })
}

/// Result of the single-agent FPTAS: a payment fraction, the agent's demand
/// set at that fraction, and the principal's utility.
#[derive(Clone, Debug)]
pub struct FptasOutcome<T> {
    pub alpha: T,
    pub set: ActionSet,
    pub utility: T,
}

/// Discretization range of the FPTAS.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum FptasMode {
    /// grid spans a factor `m 2^m`, valid for every reward function
    #[default]
    General,
    /// grid spans a factor `m^2`, valid for subadditive rewards
    Subadditive,
}

/// `(1 - eps)`-approximate the optimal single-agent contract for `agent`,
/// holding everyone else at the empty set. Uses one demand query per grid
/// point; `O(m^2 / eps)` value and demand queries in total.
///
/// The grid `alpha_{j,k} = 1 - (1-eps)^{k+1} OPT / (c_j + OPT)` brackets the
/// optimal fraction, whose distance from one is controlled on both sides by
/// the welfare optimum.
pub fn fptas_single_agent<T: RealScalar>(
    inst: &Instance<T>,
    agent: AgentId,
    eps: T,
    mode: FptasMode,
) -> Result<FptasOutcome<T>> {
    if agent >= inst.n() {
        return Err(Error::AgentOutOfRange { agent, n: inst.n() });
    }
    if eps <= T::zero() || eps >= T::one() {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    let own = inst.agent_actions(agent);
    let r = *inst.r();
    let big = inst.value_uncounted(inst.all_actions()) + T::one();
    let norm_cost = |j: usize| *inst.cost(j) / r;

    // baseline: pay nothing, the agent takes its free actions
    let free = own & inst.zero_cost_actions();
    let mut best = FptasOutcome { alpha: T::zero(), set: free, utility: inst.value(free) * r };

    if own.is_empty() {
        return Ok(best);
    }

    // welfare optimum of the restriction, by one demand query at cost prices
    let mut prices = vec![big; inst.m()];
    for j in own.iter() {
        prices[j] = norm_cost(j);
    }
    let d = inst.demand(&prices)? & own;
    let opt = inst.value(d) - inst.cost_of(d) / r;
    if opt <= T::zero() {
        return Ok(best);
    }

    let m_i = own.len();
    let eps_f = eps.to_f64().expect("eps is finite");
    let span: f64 = match mode {
        FptasMode::General => m_i as f64 * 2f64.powi(m_i as i32),
        FptasMode::Subadditive => (m_i * m_i) as f64,
    };
    let kmax = (span.ln() / -(1.0 - eps_f).ln()).ceil() as usize;

    let one_minus = T::one() - eps;
    for j in own.iter() {
        let cj = norm_cost(j);
        if cj <= T::zero() {
            continue;
        }
        for k in 0..=kmax {
            let alpha = T::one() - one_minus.powi(k as i32 + 1) * opt / (cj + opt);
            let mut prices = vec![big; inst.m()];
            for j2 in own.iter() {
                prices[j2] = norm_cost(j2) / alpha;
            }
            let s = inst.demand(&prices)? & own;
            let utility = (T::one() - alpha) * inst.value(s) * r;
            if utility > best.utility {
                best = FptasOutcome { alpha, set: s, utility };
            }
        }
    }
    Ok(best)
}

/// Which branch the robust single-agent extension took.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RobustBranch {
    /// the free actions alone are valuable: pay everyone `1/(2n)`
    ZeroCostTeam,
    /// boost the best agent's fraction halfway to one, pay others nothing
    BoostedAgent,
}

/// Outcome of the robust single-agent approximation.
#[derive(Clone, Debug)]
pub struct RobustSingleOutcome<T> {
    pub contract: Contract<T>,
    pub lambda: T,
    pub branch: RobustBranch,
    pub chosen_agent: AgentId,
    /// the half-accurate FPTAS outcome per agent
    pub per_agent: Vec<FptasOutcome<T>>,
}

/// Turn the best single-agent contract into one whose **every** equilibrium
/// is certified, guarding against other agents' free actions: when the free
/// actions carry enough value the contract pays everyone a tiny fraction;
/// otherwise the chosen agent's fraction is raised halfway to one.
/// Guarantees at least a 1/24 fraction of the best single-agent benchmark.
pub fn robust_single_agent_contract<T: RealScalar>(
    inst: &Instance<T>,
) -> Result<RobustSingleOutcome<T>> {
    let n = inst.n();
    if n == 0 {
        return Err(Error::InvalidParameter("instance has no agents".into()));
    }
    let half = T::ratio(1, 2);
    let mut per_agent = Vec::with_capacity(n);
    for i in 0..n {
        per_agent.push(fptas_single_agent(inst, i, half, FptasMode::General)?);
    }
    let chosen_agent = (0..n)
        .max_by(|&a, &b| {
            per_agent[a]
                .utility
                .partial_cmp(&per_agent[b].utility)
                .expect("utilities are finite")
                .then(b.cmp(&a)) // first maximizer wins
        })
        .expect("at least one agent");
    let best = &per_agent[chosen_agent];

    let free_value = inst.value(inst.zero_cost_actions()) * *inst.r();
    let third = T::ratio(1, 3);
    if free_value > third * best.utility {
        let eps = T::ratio(1, 2 * n as i64);
        Ok(RobustSingleOutcome {
            contract: Contract::uniform(n, eps)?,
            lambda: free_value / T::integer(4),
            branch: RobustBranch::ZeroCostTeam,
            chosen_agent,
            per_agent,
        })
    } else {
        let mut alpha = vec![T::zero(); n];
        alpha[chosen_agent] = (T::one() + best.alpha) / T::integer(2);
        Ok(RobustSingleOutcome {
            contract: Contract::new(alpha)?,
            lambda: best.utility / T::integer(6),
            branch: RobustBranch::BoostedAgent,
            chosen_agent,
            per_agent,
        })
    }
}

/// Everything the meta algorithm computed.
#[derive(Clone, Debug)]
pub struct MetaOutcome<T> {
    pub guaranteed: GuaranteedContract<T>,
    pub no_large: NoLargeAgentOutcome<T>,
    pub single: RobustSingleOutcome<T>,
}

/// Run the no-large-agent computation (with `eps = 1/(8n)` unless
/// overridden) and the robust single-agent extension, and return the
/// contract with the larger certified guarantee.
pub fn meta_contract<T: RealScalar>(
    inst: &Instance<T>,
    params: &AlgParams<T>,
) -> Result<MetaOutcome<T>> {
    let n = inst.n();
    if n == 0 {
        return Err(Error::InvalidParameter("instance has no agents".into()));
    }
    let eps = params.eps.unwrap_or_else(|| T::ratio(1, 8 * n as i64));
    let no_large = no_large_agent_contract(inst, params.rho, eps)?;
    let single = robust_single_agent_contract(inst)?;
    let guaranteed = if no_large.lambda > single.lambda {
        GuaranteedContract {
            contract: no_large.contract.clone(),
            lambda: no_large.lambda,
            provenance: Provenance::NoLargeAgent,
        }
    } else {
        GuaranteedContract {
            contract: single.contract.clone(),
            lambda: single.lambda,
            provenance: match single.branch {
                RobustBranch::ZeroCostTeam => Provenance::RobustSingleZeroCostTeam,
                RobustBranch::BoostedAgent => Provenance::RobustSingleBoostedAgent,
            },
        }
    };
    Ok(MetaOutcome { guaranteed, no_large, single })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{enumerate_equilibria, is_subset_stable};
    use crate::exact::single_agent_optimal_exact;
    use crate::instances::{example_one, random_coverage_instance, CoverageParams};
    use crate::oracles::AdditiveReward;
    use crate::set::all_subsets;
    use std::sync::Arc;

    fn set(ids: &[usize]) -> ActionSet {
        ids.iter().copied().collect()
    }

    fn coverage(seed: u64, n: usize, app: usize) -> Instance<f64> {
        let params =
            CoverageParams { n, actions_per_agent: app, universe: 8, cost_max: 0.2 };
        random_coverage_instance(&params, seed).unwrap()
    }

    #[test]
    fn bundle_single_zero_prices_takes_everything_worthwhile() {
        let inst = coverage(3, 1, 3);
        let h = |s: ActionSet| inst.value_uncounted(s);
        let ground = inst.all_actions();
        let q = vec![0.0; inst.m()];
        let s = bundle_demand_single(ground, &q, &h);
        assert!((h(s) - h(ground)).abs() < 1e-12);
    }

    #[test]
    fn bundle_single_unaffordable_prices_return_empty() {
        let oracle = AdditiveReward::new(vec![1.0, 1.0]).unwrap();
        let inst = Instance::new(1, vec![0, 0], vec![0.0, 0.0], Arc::new(oracle), 1.0).unwrap();
        let h = |s: ActionSet| inst.value_uncounted(s);
        let s = bundle_demand_single(inst.all_actions(), &[100.0, 100.0], &h);
        assert!(s.is_empty());
    }

    #[test]
    fn bundle_single_guarantee_on_random_draws() {
        use rand::{Rng, SeedableRng};
        for seed in 0..25u64 {
            let inst = coverage(seed, 1, 3 + (seed % 3) as usize);
            let m = inst.m();
            let h = |s: ActionSet| inst.value_uncounted(s);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
            let q: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..0.02)).collect();
            let s = bundle_demand_single(inst.all_actions(), &q, &h);
            let q_of =
                |x: ActionSet| x.iter().map(|j| q[j]).sum::<f64>();
            let got = h(s) - q_of(s).sqrt();
            let bound = all_subsets(m)
                .map(|x| h(x) / 6.0 - q_of(x).sqrt())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(got >= bound - 1e-9, "seed {seed}: {got} < {bound}");
        }
    }

    #[test]
    fn bundle_multi_guarantee_on_random_draws() {
        use rand::{Rng, SeedableRng};
        for seed in 0..25u64 {
            let inst = coverage(seed, 1 + (seed % 3) as usize, 2);
            let m = inst.m();
            let agents: Vec<ActionSet> = (0..inst.n()).map(|i| inst.agent_actions(i)).collect();
            let h = |s: ActionSet| inst.value_uncounted(s);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
            let q: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..0.02)).collect();
            let s = bundle_demand_multi(&agents, &q, &h);
            let price = |x: ActionSet| {
                (0..inst.n())
                    .map(|i| {
                        inst.agent_part(x, i).iter().map(|j| q[j]).sum::<f64>().sqrt()
                    })
                    .sum::<f64>()
            };
            let got = h(s) - price(s);
            let bound = all_subsets(m)
                .map(|x| h(x) / 12.0 - price(x))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(got >= bound - 1e-9, "seed {seed}: {got} < {bound}");
        }
    }

    #[test]
    fn no_large_agent_certificates_on_the_worked_example() {
        let inst = example_one::<f64>(0.01).unwrap();
        let out = no_large_agent_contract(&inst, 1.0 / 6.0, 1.0 / 16.0).unwrap();
        assert!(out.lambda >= 0.0);
        assert!(out.base_contract.total() <= 0.25 + 1e-9);
        assert!(is_subset_stable(&inst, &out.base_contract, out.working_set).unwrap());
        let report = enumerate_equilibria(&inst, &out.contract).unwrap();
        assert!(
            report.worst_utility >= out.lambda - 1e-9,
            "worst {} < lambda {}",
            report.worst_utility,
            out.lambda
        );
    }

    #[test]
    fn no_large_agent_on_a_worthless_instance() {
        let oracle = AdditiveReward::new(vec![0.0, 0.0]).unwrap();
        let inst = Instance::new(2, vec![0, 1], vec![0.1, 0.2], Arc::new(oracle), 1.0).unwrap();
        let out = no_large_agent_contract(&inst, 1.0 / 6.0, 0.01).unwrap();
        assert_eq!(out.lambda, 0.0);
        assert_eq!(out.contract.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn fptas_brackets_the_exact_single_agent_optimum() {
        let oracle = AdditiveReward::new(vec![0.5, 0.5]).unwrap();
        let inst = Instance::new(1, vec![0, 0], vec![0.1, 0.3], Arc::new(oracle), 1.0).unwrap();
        for eps in [0.5, 0.1] {
            let out = fptas_single_agent(&inst, 0, eps, FptasMode::General).unwrap();
            assert!(out.utility >= (1.0 - eps) * 0.4 - 1e-9, "eps {eps}: {}", out.utility);
        }
        // subadditive mode reaches the same accuracy with a smaller grid
        let out = fptas_single_agent(&inst, 0, 0.1, FptasMode::Subadditive).unwrap();
        assert!(out.utility >= 0.9 * 0.4 - 1e-9);
    }

    #[test]
    fn fptas_with_free_actions_only() {
        let oracle = AdditiveReward::new(vec![0.3f64, 0.2]).unwrap();
        let inst = Instance::new(1, vec![0, 0], vec![0.0, 0.0], Arc::new(oracle), 1.0).unwrap();
        let out = fptas_single_agent(&inst, 0, 0.25, FptasMode::General).unwrap();
        assert_eq!(out.alpha, 0.0);
        assert_eq!(out.set, set(&[0, 1]));
        assert!((out.utility - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fptas_single_action() {
        let oracle = AdditiveReward::new(vec![1.0f64]).unwrap();
        let inst = Instance::new(1, vec![0], vec![0.25], Arc::new(oracle), 1.0).unwrap();
        let out = fptas_single_agent(&inst, 0, 0.1, FptasMode::General).unwrap();
        assert!(out.utility >= 0.9 * 0.75 - 1e-9);
        assert_eq!(out.set, set(&[0]));
    }

    #[test]
    fn fptas_respects_the_query_budget() {
        for seed in 0..5u64 {
            let inst = coverage(seed, 1, 5);
            let m = inst.m() as f64;
            for eps in [0.5, 0.1] {
                inst.reset_queries();
                let exact = single_agent_optimal_exact(&inst, 0).unwrap().2;
                inst.reset_queries();
                let out = fptas_single_agent(&inst, 0, eps, FptasMode::General).unwrap();
                let tally = inst.queries();
                assert!(out.utility >= (1.0 - eps) * exact - 1e-9);
                assert!(
                    (tally.total() as f64) <= 64.0 * m * m / eps,
                    "queries {} over budget",
                    tally.total()
                );
            }
        }
    }

    #[test]
    fn robust_single_agent_on_the_worked_example() {
        let inst = example_one::<f64>(0.01).unwrap();
        let out = robust_single_agent_contract(&inst).unwrap();
        // single-agent benchmarks are 0.414 and 0.24
        assert!(out.lambda >= 0.414 / 24.0 - 1e-9, "lambda {}", out.lambda);
        assert_eq!(out.branch, RobustBranch::BoostedAgent);
        assert_eq!(out.chosen_agent, 0);
        let report = enumerate_equilibria(&inst, &out.contract).unwrap();
        assert!(report.worst_utility >= out.lambda - 1e-9);
    }

    #[test]
    fn robust_single_agent_all_free() {
        let oracle = AdditiveReward::new(vec![0.4f64, 0.6]).unwrap();
        let inst = Instance::new(2, vec![0, 1], vec![0.0, 0.0], Arc::new(oracle), 1.0).unwrap();
        let out = robust_single_agent_contract(&inst).unwrap();
        assert_eq!(out.branch, RobustBranch::ZeroCostTeam);
        assert!((out.lambda - 0.25).abs() < 1e-12);
        let report = enumerate_equilibria(&inst, &out.contract).unwrap();
        assert!(report.worst_utility >= out.lambda - 1e-9);
    }

    #[test]
    fn meta_takes_the_better_certificate() {
        let inst = example_one::<f64>(0.01).unwrap();
        let meta = meta_contract(&inst, &AlgParams::default()).unwrap();
        assert_eq!(meta.guaranteed.lambda, meta.no_large.lambda.max(meta.single.lambda));
        let report = enumerate_equilibria(&inst, &meta.guaranteed.contract).unwrap();
        assert!(report.worst_utility >= meta.guaranteed.lambda - 1e-9);
        assert!(meta.guaranteed.lambda > 0.0);
    }

    #[test]
    fn meta_on_a_worthless_instance() {
        let oracle = AdditiveReward::new(vec![0.0]).unwrap();
        let inst = Instance::new(1, vec![0], vec![0.3], Arc::new(oracle), 1.0).unwrap();
        let meta = meta_contract(&inst, &AlgParams::default()).unwrap();
        assert_eq!(meta.guaranteed.lambda, 0.0);
    }
}
