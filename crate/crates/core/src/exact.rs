//! Exact oracles: brute-force optimal contracts, the single-agent critical
//! point envelope, welfare optima and first-best gap reports.
//!
//! These enumerate all subsets (and all incentive constraints) and ground
//! every approximation guarantee at desk scale. Comparisons are exact for
//! rational scalars and tolerance-based for floats.

use crate::equilibrium::{enumerate_equilibria, feasible_alpha_intervals_with, ENUM_CAP};
use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::scalar::Scalar;
use crate::set::{all_subsets, ActionSet};
use crate::AgentId;

fn value_table<T: Scalar>(inst: &Instance<T>) -> Result<Vec<T>> {
    if inst.m() > ENUM_CAP {
        return Err(Error::GroundTooLarge { m: inst.m(), cap: ENUM_CAP });
    }
    Ok(all_subsets(inst.m()).map(|s| inst.value_uncounted(s)).collect())
}

/// Maximum welfare `f(S) r - c(S)` and a maximizer (ties resolve toward the
/// larger reward, then lexicographically). Falls back to a demand query at
/// prices `c / r` when the ground set is too large to enumerate.
pub fn welfare_opt<T: Scalar>(inst: &Instance<T>) -> Result<(T, ActionSet)> {
    if inst.m() <= ENUM_CAP {
        let table = value_table(inst)?;
        let mut best: Option<(T, T, ActionSet)> = None;
        for s in all_subsets(inst.m()) {
            let f = table[s.bits() as usize].clone();
            let w = f.clone() * inst.r().clone() - inst.cost_of(s);
            let better = match &best {
                None => true,
                Some((bw, bf, bset)) => {
                    w > *bw
                        || (w == *bw && f > *bf)
                        || (w == *bw && f == *bf && s.lex_cmp(*bset).is_lt())
                }
            };
            if better {
                best = Some((w, f, s));
            }
        }
        let (w, _, s) = best.expect("subset enumeration is never empty");
        Ok((w, s))
    } else {
        let prices: Vec<T> =
            inst.costs().iter().map(|c| c.clone() / inst.r().clone()).collect();
        let s = inst.demand(&prices)?;
        Ok((inst.welfare(s), s))
    }
}

/// Exact optimal contract found by scanning every profile with its
/// componentwise-minimal feasible contract.
#[derive(Clone, Debug)]
pub struct OptimalContractResult<T> {
    pub set: ActionSet,
    pub contract: Contract<T>,
    pub utility: T,
    pub welfare_opt: T,
    /// `welfare_opt / utility`, or one when the welfare optimum is
    /// non-positive.
    pub gap_ratio: T,
}

/// For every profile, intersect the per-agent incentive constraints and
/// evaluate the principal at the componentwise-minimal feasible contract
/// (utility decreases in every `alpha_i`, so the minimum is optimal).
pub fn brute_force_optimal_contract<T: Scalar>(inst: &Instance<T>) -> Result<OptimalContractResult<T>> {
    let table = value_table(inst)?;
    let at = |s: ActionSet| table[s.bits() as usize].clone();
    let mut best: Option<(T, T, ActionSet, Vec<T>)> = None;
    for s in all_subsets(inst.m()) {
        let iv = feasible_alpha_intervals_with(inst, s, &|x| at(x))?;
        if !iv.feasible {
            continue;
        }
        let total = iv.lo.iter().fold(T::zero(), |acc, a| acc + a.clone());
        let f = at(s);
        let utility = (T::one() - total) * f.clone() * inst.r().clone();
        let better = match &best {
            None => true,
            Some((bu, bf, bset, _)) => {
                utility > *bu
                    || (utility == *bu && f > *bf)
                    || (utility == *bu && f == *bf && s.lex_cmp(*bset).is_lt())
            }
        };
        if better {
            best = Some((utility, f, s, iv.lo));
        }
    }
    let (utility, _, set, lo) =
        best.ok_or_else(|| Error::Internal("no incentivizable profile found".into()))?;
    // clamp float noise at the upper end of the feasible interval
    let alpha: Vec<T> =
        lo.into_iter().map(|a| if a > T::one() { T::one() } else { a }).collect();
    let contract = Contract::new(alpha)?;
    let (opt, _) = welfare_opt(inst)?;
    let gap_ratio = if opt <= T::zero() { T::one() } else { opt.clone() / utility.clone() };
    Ok(OptimalContractResult { set, contract, utility, welfare_opt: opt, gap_ratio })
}

/// The single-agent upper envelope: best-response sets `S_0, .., S_k` with
/// the critical payment fractions where the best response changes.
///
/// `sets[i]` is the best response on `[breakpoints[i-1], breakpoints[i]]`
/// (with `breakpoints[-1] = 0` and breakpoints clipped to `(0, 1]`); reward
/// values strictly increase along the sequence and each breakpoint equals
/// `(c(S_i) - c(S_{i-1})) / ((f(S_i) - f(S_{i-1})) r)`.
#[derive(Clone, Debug)]
pub struct CriticalPointList<T> {
    pub sets: Vec<ActionSet>,
    pub breakpoints: Vec<T>,
}

/// Upper envelope of the `2^|A_i|` affine utility lines
/// `alpha -> alpha f(S) r - c(S)` of one agent over `alpha` in `[0, 1]`,
/// holding every other agent at the empty set.
pub fn single_agent_critical_points<T: Scalar>(
    inst: &Instance<T>,
    agent: AgentId,
) -> Result<CriticalPointList<T>> {
    if agent >= inst.n() {
        return Err(Error::AgentOutOfRange { agent, n: inst.n() });
    }
    let own = inst.agent_actions(agent);
    if own.len() > ENUM_CAP {
        return Err(Error::AgentTooLarge { agent, size: own.len(), cap: ENUM_CAP });
    }

    // one line per subset: slope f(S) r, intercept -c(S);
    // per slope keep the highest intercept (then the lex-smallest set)
    let mut lines: Vec<(T, T, ActionSet)> = Vec::with_capacity(1 << own.len());
    for cand in own.subsets() {
        let slope = inst.value_uncounted(cand) * inst.r().clone();
        let intercept = T::zero() - inst.cost_of(cand);
        lines.push((slope, intercept, cand));
    }
    lines.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("reward values must be comparable")
            .then(b.1.partial_cmp(&a.1).expect("costs must be comparable"))
            .then(a.2.lex_cmp(b.2))
    });
    lines.dedup_by(|next, kept| next.0 == kept.0);

    // upper envelope by a monotone scan over increasing slopes
    let crossing = |a: &(T, T, ActionSet), b: &(T, T, ActionSet)| -> T {
        // slope_a < slope_b; the point where b overtakes a
        (a.1.clone() - b.1.clone()) / (b.0.clone() - a.0.clone())
    };
    let mut hull: Vec<(T, T, ActionSet)> = Vec::new();
    for line in lines {
        while let Some(last) = hull.last() {
            if hull.len() == 1 {
                // a single line is dominated everywhere iff the newcomer is
                // at least as high at alpha = 0
                if line.1 >= last.1 {
                    hull.pop();
                } else {
                    break;
                }
            } else {
                let prev = &hull[hull.len() - 2];
                if crossing(prev, &line) <= crossing(prev, last) {
                    hull.pop();
                } else {
                    break;
                }
            }
        }
        hull.push(line);
    }

    let mut breakpoints: Vec<T> =
        hull.windows(2).map(|w| crossing(&w[0], &w[1])).collect();

    // clip to [0, 1]: drop segments that end at or before 0 and segments
    // that begin strictly after 1
    while !breakpoints.is_empty() && breakpoints[0] <= T::zero() {
        breakpoints.remove(0);
        hull.remove(0);
    }
    while !breakpoints.is_empty() && *breakpoints.last().expect("nonempty") > T::one() {
        breakpoints.pop();
        hull.pop();
    }

    Ok(CriticalPointList { sets: hull.into_iter().map(|l| l.2).collect(), breakpoints })
}

/// Exact single-agent optimum: evaluate the principal at zero and at every
/// critical point, taking the larger-reward side of each breakpoint.
pub fn single_agent_optimal_exact<T: Scalar>(
    inst: &Instance<T>,
    agent: AgentId,
) -> Result<(T, ActionSet, T)> {
    let env = single_agent_critical_points(inst, agent)?;
    let mut best: Option<(T, ActionSet, T)> = None;
    let mut consider = |alpha: T, set: ActionSet| {
        let utility =
            (T::one() - alpha.clone()) * inst.value_uncounted(set) * inst.r().clone();
        match &best {
            Some((_, _, bu)) if *bu >= utility => {}
            _ => best = Some((alpha, set, utility)),
        }
    };
    consider(T::zero(), env.sets[0]);
    for (idx, alpha) in env.breakpoints.iter().enumerate() {
        consider(alpha.clone(), env.sets[idx + 1]);
    }
    Ok(best.expect("the envelope has at least one segment"))
}

/// Gap between the welfare optimum and the optimal principal utility for a
/// single agent, with the two universal lower bounds on the utility.
#[derive(Clone, Debug)]
pub struct FirstBestGapReport<T> {
    pub opt: T,
    pub utility: T,
    /// `opt / utility`, or one when the welfare optimum is non-positive.
    pub ratio: T,
    /// utility >= opt / m_i (holds whenever the reward is subadditive)
    pub meets_m_bound: bool,
    /// utility >= opt / 2^{m_i} (holds for every reward function)
    pub meets_exp_bound: bool,
}

/// First-best gap for one agent, everyone else held at the empty set.
pub fn first_best_gap_single<T: Scalar>(
    inst: &Instance<T>,
    agent: AgentId,
) -> Result<FirstBestGapReport<T>> {
    let own = inst.agent_actions(agent);
    if own.len() > ENUM_CAP {
        return Err(Error::AgentTooLarge { agent, size: own.len(), cap: ENUM_CAP });
    }
    let mut opt = T::zero();
    for cand in own.subsets() {
        let w = inst.welfare(cand);
        if w > opt {
            opt = w;
        }
    }
    let (_, _, utility) = single_agent_optimal_exact(inst, agent)?;
    let m_i = own.len().max(1);
    let tol = inst.cfg().tol.clone();
    let meets_m_bound =
        utility.clone() + tol.clone() >= opt.clone() / T::integer(m_i);
    let meets_exp_bound = utility.clone() + tol >= opt.clone() / T::integer(1usize << m_i);
    let ratio = if opt <= T::zero() { T::one() } else { opt.clone() / utility.clone() };
    Ok(FirstBestGapReport { opt, utility, ratio, meets_m_bound, meets_exp_bound })
}

/// Outcome of the randomized single-agent selection: agent `i` is chosen
/// with probability `m_i / m` and offered their exact single-agent optimum.
#[derive(Clone, Debug)]
pub struct RandomizedGapReport<T> {
    pub opt: T,
    pub expected_utility: T,
    /// exact single-agent utility and action count per agent
    pub per_agent: Vec<(AgentId, T, usize)>,
    pub best_agent: AgentId,
    pub best_utility: T,
    /// expected utility >= opt / m (holds for subadditive rewards)
    pub meets_bound: bool,
}

pub fn randomized_single_agent_gap<T: Scalar>(inst: &Instance<T>) -> Result<RandomizedGapReport<T>> {
    let (opt, _) = welfare_opt(inst)?;
    let m = inst.m().max(1);
    let mut per_agent = Vec::with_capacity(inst.n());
    let mut expected = T::zero();
    let mut best_agent = 0;
    let mut best_utility = T::zero();
    for i in 0..inst.n() {
        let m_i = inst.agent_actions(i).len();
        let (_, _, u) = single_agent_optimal_exact(inst, i)?;
        expected = expected + T::ratio(m_i as i64, m as i64) * u.clone();
        if u > best_utility || per_agent.is_empty() {
            best_agent = i;
            best_utility = u.clone();
        }
        per_agent.push((i, u, m_i));
    }
    let meets_bound =
        expected.clone() + inst.cfg().tol.clone() >= opt.clone() / T::integer(m);
    Ok(RandomizedGapReport { opt, expected_utility: expected, per_agent, best_agent, best_utility, meets_bound })
}

/// Worst and best equilibrium utility of a contract, with ratios against the
/// welfare optimum.
#[derive(Clone, Debug)]
pub struct WorstEquilibriumReport<T> {
    pub equilibria: Vec<ActionSet>,
    pub worst_utility: T,
    pub best_utility: T,
    pub opt: T,
    pub worst_ratio: T,
    pub best_ratio: T,
}

pub fn worst_equilibrium_gap<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
) -> Result<WorstEquilibriumReport<T>> {
    let report = enumerate_equilibria(inst, contract)?;
    let (opt, _) = welfare_opt(inst)?;
    let ratio = |u: &T| {
        if opt <= T::zero() {
            T::one()
        } else {
            u.clone() / opt.clone()
        }
    };
    Ok(WorstEquilibriumReport {
        worst_ratio: ratio(&report.worst_utility),
        best_ratio: ratio(&report.best_utility),
        equilibria: report.equilibria,
        worst_utility: report.worst_utility,
        best_utility: report.best_utility,
        opt,
    })
}

/// Principal utility of incentivizing exactly `s` in a binary-action
/// instance at the minimal feasible payments `c_j / (f(j | s - j) r)`.
///
/// Returns `Ok(None)` when some chosen action has a positive cost but zero
/// marginal value, which makes the profile impossible to incentivize.
pub fn binary_minimal_incentive_utility<T: Scalar>(
    inst: &Instance<T>,
    s: ActionSet,
) -> Result<Option<T>> {
    for i in 0..inst.n() {
        if inst.agent_actions(i).len() > 1 {
            return Err(Error::InvalidParameter(format!(
                "agent {i} controls several actions; instance is not binary-action"
            )));
        }
    }
    let f_s = inst.value_uncounted(s);
    let mut paid = T::zero();
    for j in s.iter() {
        let marginal = (f_s.clone() - inst.value_uncounted(s.without(j))) * inst.r().clone();
        let c = inst.cost(j).clone();
        if marginal <= T::zero() {
            if c > T::zero() {
                return Ok(None);
            }
            continue;
        }
        paid = paid + c / marginal;
    }
    Ok(Some((T::one() - paid) * f_s * inst.r().clone()))
}

/// The window that must contain the exact optimal single-agent payment
/// fraction, derived from the welfare optimum and the most expensive action
/// of the optimal set.
#[derive(Clone, Debug)]
pub struct AlphaBounds<T> {
    pub alpha_min: T,
    pub alpha_max: T,
    pub alpha_star: T,
    pub holds: bool,
}

/// Check `alpha_min <= alpha_star <= alpha_max` with
/// `alpha_min = 1 - OPT/(c_max + OPT)` and
/// `alpha_max = 1 - OPT/(m 2^m (c_max + OPT))`, where `c_max` is the largest
/// action cost in the exact optimal set. Returns `None` when the welfare
/// optimum is non-positive.
pub fn alpha_bounds_single<T: Scalar>(
    inst: &Instance<T>,
    agent: AgentId,
) -> Result<Option<AlphaBounds<T>>> {
    let own = inst.agent_actions(agent);
    let mut opt = T::zero();
    for cand in own.subsets() {
        let w = inst.welfare(cand);
        if w > opt {
            opt = w;
        }
    }
    if opt <= T::zero() {
        return Ok(None);
    }
    let (alpha_star, set, _) = single_agent_optimal_exact(inst, agent)?;
    let mut c_max = T::zero();
    for j in set.iter() {
        if *inst.cost(j) > c_max {
            c_max = inst.cost(j).clone();
        }
    }
    let m_i = own.len().max(1);
    let denom = c_max + opt.clone();
    let alpha_min = T::one() - opt.clone() / denom.clone();
    let scale = T::integer(m_i) * T::integer(1usize << m_i);
    let alpha_max = T::one() - opt / (scale * denom);
    let tol = inst.cfg().tol.clone();
    let holds = alpha_star.clone() + tol.clone() >= alpha_min
        && alpha_max.clone() + tol >= alpha_star;
    Ok(Some(AlphaBounds { alpha_min, alpha_max, alpha_star, holds }))
}
