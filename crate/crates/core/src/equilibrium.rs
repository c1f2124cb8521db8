//! Potential function, Nash and subset-stability checks, best-response
//! dynamics, equilibrium enumeration and feasible contract intervals.

use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::scalar::Scalar;
use crate::set::{all_subsets, ActionSet};
use crate::AgentId;

/// Enumeration cap shared by the exhaustive operations in this module.
pub const ENUM_CAP: usize = 22;

/// Value of the potential `phi(S) = f(S) - sum_i c(S_i) / (alpha_i * r)`.
///
/// Negative infinity encodes the convention `c_j / 0 = infinity` for a costly
/// action owned by an agent with zero payment fraction.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential<T> {
    NegInfinity,
    Finite(T),
}

impl<T: PartialOrd> PartialOrd for Potential<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use Potential::*;
        match (self, other) {
            (NegInfinity, NegInfinity) => Some(std::cmp::Ordering::Equal),
            (NegInfinity, Finite(_)) => Some(std::cmp::Ordering::Less),
            (Finite(_), NegInfinity) => Some(std::cmp::Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

/// The potential of a profile under a contract. Unilateral improvements of
/// any agent strictly increase this value, so its maximizers are equilibria.
pub fn potential<T: Scalar>(inst: &Instance<T>, contract: &Contract<T>, s: ActionSet) -> Potential<T> {
    let mut paid = T::zero();
    for j in s.iter() {
        let c = inst.cost(j).clone();
        if c == T::zero() {
            continue;
        }
        let alpha = contract.alpha(inst.owner(j)).clone();
        if alpha == T::zero() {
            return Potential::NegInfinity;
        }
        paid = paid + c / (alpha * inst.r().clone());
    }
    Potential::Finite(inst.value_uncounted(s) - paid)
}

fn exclusion_price<T: Scalar>(inst: &Instance<T>) -> T {
    inst.value_uncounted(inst.all_actions()) + T::one()
}

/// Best response of agent `i` to the others' part of `s`.
///
/// Enumerated exactly when the agent controls at most [`ENUM_CAP`] actions,
/// otherwise answered through a demand query at prices `c_j / (alpha_i r)`.
/// Ties resolve toward the larger reward value, then lexicographically.
pub fn best_response<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
    s: ActionSet,
    i: AgentId,
) -> Result<ActionSet> {
    if i >= inst.n() {
        return Err(Error::AgentOutOfRange { agent: i, n: inst.n() });
    }
    let own = inst.agent_actions(i);
    let rest = inst.others_part(s, i);
    if own.len() <= ENUM_CAP {
        let mut best: Option<(T, T, ActionSet)> = None;
        for cand in own.subsets() {
            let f = inst.value_uncounted(cand | rest);
            let u = contract.alpha(i).clone() * f.clone() * inst.r().clone() - inst.cost_of(cand);
            let better = match &best {
                None => true,
                Some((bu, bf, bset)) => {
                    u > *bu
                        || (u == *bu && f > *bf)
                        || (u == *bu && f == *bf && cand.lex_cmp(*bset).is_lt())
                }
            };
            if better {
                best = Some((u, f, cand));
            }
        }
        Ok(best.expect("agent has at least the empty subset").2)
    } else {
        // demand query on f(. , S_-i) restricted to A_i
        let alpha = contract.alpha(i).clone();
        let big = exclusion_price(inst);
        let mut prices = vec![T::zero(); inst.m()];
        for j in 0..inst.m() {
            if own.contains(j) {
                let c = inst.cost(j).clone();
                if c == T::zero() {
                    prices[j] = T::zero();
                } else if alpha == T::zero() {
                    prices[j] = big.clone();
                } else {
                    prices[j] = c / (alpha.clone() * inst.r().clone());
                }
            } else if rest.contains(j) {
                prices[j] = T::zero();
            } else {
                prices[j] = big.clone();
            }
        }
        Ok(inst.demand(&prices)? & own)
    }
}

/// Whether no agent can improve by more than the tolerance through any
/// deviation within their own actions.
pub fn is_nash<T: Scalar>(inst: &Instance<T>, contract: &Contract<T>, s: ActionSet) -> Result<bool> {
    for i in 0..inst.n() {
        let own = inst.agent_actions(i);
        if own.len() > ENUM_CAP {
            return Err(Error::AgentTooLarge { agent: i, size: own.len(), cap: ENUM_CAP });
        }
        let rest = inst.others_part(s, i);
        let current = inst.agent_utility(s, contract, i)?;
        for cand in own.subsets() {
            let u = contract.alpha(i).clone() * inst.value_uncounted(cand | rest) * inst.r().clone()
                - inst.cost_of(cand);
            if !inst.cfg().ge(&current, &u) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether no agent can improve by more than the tolerance by dropping to a
/// subset of their current actions. Weaker than [`is_nash`].
pub fn is_subset_stable<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
    s: ActionSet,
) -> Result<bool> {
    for i in 0..inst.n() {
        let own_part = inst.agent_part(s, i);
        if own_part.len() > ENUM_CAP {
            return Err(Error::AgentTooLarge { agent: i, size: own_part.len(), cap: ENUM_CAP });
        }
        let rest = inst.others_part(s, i);
        let current = inst.agent_utility(s, contract, i)?;
        for cand in own_part.subsets() {
            let u = contract.alpha(i).clone() * inst.value_uncounted(cand | rest) * inst.r().clone()
                - inst.cost_of(cand);
            if !inst.cfg().ge(&current, &u) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Iterate strict best-response improvements in round-robin order until no
/// agent can improve beyond the tolerance. Terminates because every executed
/// improvement strictly increases the potential.
pub fn best_response_dynamics<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
    start: ActionSet,
) -> Result<ActionSet> {
    let order: Vec<AgentId> = (0..inst.n()).collect();
    best_response_dynamics_with_order(inst, contract, start, &order)
}

/// [`best_response_dynamics`] with an explicit agent visiting order (one
/// round visits every listed agent once).
pub fn best_response_dynamics_with_order<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
    start: ActionSet,
    order: &[AgentId],
) -> Result<ActionSet> {
    let mut current = start & inst.all_actions();
    // Safety budget: the potential strictly increases on every improving
    // step, so this bound is never reached on well-formed instances.
    let budget = (1usize << inst.m().min(24)).saturating_mul(inst.n().max(1)) + 64;
    let mut steps = 0usize;
    loop {
        let mut improved = false;
        for &i in order {
            let br = best_response(inst, contract, current, i)?;
            let proposed = inst.others_part(current, i) | br;
            if proposed == current {
                continue;
            }
            let u_now = inst.agent_utility(current, contract, i)?;
            let u_new = inst.agent_utility(proposed, contract, i)?;
            if inst.cfg().gt(&u_new, &u_now) {
                current = proposed;
                improved = true;
                steps += 1;
                if steps > budget {
                    return Err(Error::Internal(format!(
                        "best-response dynamics exceeded {budget} improving steps"
                    )));
                }
            }
        }
        if !improved {
            return Ok(current);
        }
    }
}

/// Find an equilibrium with a single demand query at prices `c_j / (alpha_i
/// r)`. Costly actions of zero-payment agents are priced out; the result is a
/// global maximizer of the potential and therefore a Nash equilibrium.
pub fn equilibrium_via_demand<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
) -> Result<ActionSet> {
    let big = exclusion_price(inst);
    let mut prices = vec![T::zero(); inst.m()];
    for j in 0..inst.m() {
        let c = inst.cost(j).clone();
        if c == T::zero() {
            continue;
        }
        let alpha = contract.alpha(inst.owner(j)).clone();
        if alpha == T::zero() {
            prices[j] = big.clone();
        } else {
            prices[j] = c / (alpha * inst.r().clone());
        }
    }
    inst.demand(&prices)
}

/// All pure Nash equilibria of a contract, with the worst and best principal
/// utility among them.
#[derive(Clone, Debug)]
pub struct EquilibriumReport<T> {
    pub equilibria: Vec<ActionSet>,
    pub worst_utility: T,
    pub best_utility: T,
}

/// Enumerate every pure Nash equilibrium. Requires `m` within [`ENUM_CAP`].
pub fn enumerate_equilibria<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
) -> Result<EquilibriumReport<T>> {
    let m = inst.m();
    if m > ENUM_CAP {
        return Err(Error::GroundTooLarge { m, cap: ENUM_CAP });
    }
    let table: Vec<T> = all_subsets(m).map(|s| inst.value_uncounted(s)).collect();
    let at = |s: ActionSet| table[s.bits() as usize].clone();
    let pay_total = contract.total();
    let mut equilibria = Vec::new();
    let mut worst: Option<T> = None;
    let mut best: Option<T> = None;
    'sets: for s in all_subsets(m) {
        for i in 0..inst.n() {
            let own = inst.agent_actions(i);
            let rest = inst.others_part(s, i);
            let alpha = contract.alpha(i).clone();
            let current =
                alpha.clone() * at(s) * inst.r().clone() - inst.cost_of(inst.agent_part(s, i));
            for cand in own.subsets() {
                let u = alpha.clone() * at(cand | rest) * inst.r().clone() - inst.cost_of(cand);
                if !inst.cfg().ge(&current, &u) {
                    continue 'sets;
                }
            }
        }
        let utility = (T::one() - pay_total.clone()) * at(s) * inst.r().clone();
        worst = Some(match worst {
            None => utility.clone(),
            Some(w) => {
                if utility < w {
                    utility.clone()
                } else {
                    w
                }
            }
        });
        best = Some(match best {
            None => utility.clone(),
            Some(b) => {
                if utility > b {
                    utility
                } else {
                    b
                }
            }
        });
        equilibria.push(s);
    }
    match (worst, best) {
        (Some(worst_utility), Some(best_utility)) => {
            Ok(EquilibriumReport { equilibria, worst_utility, best_utility })
        }
        // a potential game always has at least one equilibrium
        _ => Err(Error::Internal("no equilibrium found by enumeration".into())),
    }
}

/// Per-agent closed interval of payment fractions under which each agent's
/// part of the profile is a best response to the rest.
#[derive(Clone, Debug)]
pub struct AlphaIntervals<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub feasible: bool,
}

impl<T: Scalar> AlphaIntervals<T> {
    /// The cheapest contract incentivizing the profile, when feasible.
    pub fn minimal_contract(&self) -> Result<Contract<T>> {
        if !self.feasible {
            return Err(Error::InvalidContract("profile cannot be incentivized".into()));
        }
        Contract::new(self.lo.clone())
    }
}

/// Intersect, for every agent, the `2^|A_i|` linear incentive constraints
/// `alpha_i (f(S) - f(S_i', S_-i)) r >= c(S_i) - c(S_i')` over deviations
/// `S_i'`, starting from the range `[0, 1]`.
pub fn feasible_alpha_intervals<T: Scalar>(
    inst: &Instance<T>,
    s: ActionSet,
) -> Result<AlphaIntervals<T>> {
    feasible_alpha_intervals_with(inst, s, &|x| inst.value_uncounted(x))
}

pub(crate) fn feasible_alpha_intervals_with<T: Scalar>(
    inst: &Instance<T>,
    s: ActionSet,
    at: &dyn Fn(ActionSet) -> T,
) -> Result<AlphaIntervals<T>> {
    let mut lo = Vec::with_capacity(inst.n());
    let mut hi = Vec::with_capacity(inst.n());
    let mut feasible = true;
    let f_s = at(s);
    for i in 0..inst.n() {
        let own = inst.agent_actions(i);
        if own.len() > ENUM_CAP {
            return Err(Error::AgentTooLarge { agent: i, size: own.len(), cap: ENUM_CAP });
        }
        let own_part = inst.agent_part(s, i);
        let rest = inst.others_part(s, i);
        let cost_own = inst.cost_of(own_part);
        let mut agent_lo = T::zero();
        let mut agent_hi = T::one();
        for cand in own.subsets() {
            if cand == own_part {
                continue;
            }
            let coeff = (f_s.clone() - at(cand | rest)) * inst.r().clone();
            let rhs = cost_own.clone() - inst.cost_of(cand);
            if coeff > T::zero() {
                let bound = rhs / coeff;
                if bound > agent_lo {
                    agent_lo = bound;
                }
            } else if coeff < T::zero() {
                let bound = rhs / coeff;
                if bound < agent_hi {
                    agent_hi = bound;
                }
            } else if rhs > T::zero() {
                // deviation changes no value but strictly saves cost
                feasible = false;
            }
        }
        if !inst.cfg().ge(&agent_hi, &agent_lo) {
            feasible = false;
        }
        lo.push(agent_lo);
        hi.push(agent_hi);
    }
    Ok(AlphaIntervals { lo, hi, feasible })
}

/// Verify the doubling property of a subset-stable pair: every equilibrium of
/// `2 alpha + eps` retains at least half the reward of `s`.
pub fn check_doubling<T: Scalar>(
    inst: &Instance<T>,
    contract: &Contract<T>,
    s: ActionSet,
    eps: T,
) -> Result<bool> {
    if eps <= T::zero() {
        return Err(Error::InvalidParameter("doubling bump must be positive".into()));
    }
    if !is_subset_stable(inst, contract, s)? {
        return Err(Error::NotSubsetStable);
    }
    let bumped = contract.doubled_plus(eps)?;
    let report = enumerate_equilibria(inst, &bumped)?;
    let half = inst.value_uncounted(s) / T::integer(2);
    for eq in &report.equilibria {
        if !inst.cfg().ge(&inst.value_uncounted(*eq), &half) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::example_one;

    fn set(ids: &[usize]) -> ActionSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn potential_matches_hand_computation() {
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.32, 0.05]).unwrap();
        match potential(&inst, &a, set(&[1, 2])) {
            Potential::Finite(v) => assert!((v - 0.05).abs() < 1e-12, "phi = {v}"),
            Potential::NegInfinity => panic!("finite potential expected"),
        }
        assert_eq!(potential(&inst, &a, ActionSet::empty()), Potential::Finite(0.0));
        let zero_alpha = Contract::new(vec![0.5, 0.0]).unwrap();
        assert_eq!(potential(&inst, &zero_alpha, set(&[2])), Potential::NegInfinity);
    }

    #[test]
    fn potential_is_generalized_ordinal() {
        // strict utility improvements are strict potential improvements
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.37, 0.21]).unwrap();
        for i in 0..inst.n() {
            let own = inst.agent_actions(i);
            for rest in inst.others_part(inst.all_actions(), i).subsets() {
                for s_i in own.subsets() {
                    for s_i2 in own.subsets() {
                        let u1 = inst.agent_utility(s_i | rest, &a, i).unwrap();
                        let u2 = inst.agent_utility(s_i2 | rest, &a, i).unwrap();
                        if u1 > u2 + 1e-12 {
                            let p1 = potential(&inst, &a, s_i | rest);
                            let p2 = potential(&inst, &a, s_i2 | rest);
                            assert!(p1 > p2, "{s_i} vs {s_i2} given {rest}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn best_response_enumerated() {
        let inst = example_one::<f64>(0.01).unwrap();
        // agent 0 against {2}: utilities are 0.1, 0.125, 0.16, 0.06 for
        // {}, {0}, {1}, {0,1}
        let a = Contract::new(vec![0.4, 0.0]).unwrap();
        let br = best_response(&inst, &a, set(&[2]), 0).unwrap();
        assert_eq!(br, set(&[1]));

        // zero payment and costly actions: best response is to do nothing
        let zero = Contract::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(best_response(&inst, &zero, set(&[2]), 0).unwrap(), ActionSet::empty());

        // agent 1 against {1}: 0.05*1 - 0.01 = 0.04 beats 0.05*0.75
        let a2 = Contract::new(vec![0.0, 0.05]).unwrap();
        assert_eq!(best_response(&inst, &a2, set(&[1]), 1).unwrap(), set(&[2]));
    }

    #[test]
    fn nash_checks_on_the_worked_example() {
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.32, 0.05]).unwrap();
        assert!(is_nash(&inst, &a, set(&[1, 2])).unwrap());
        // {0, 2} is not an equilibrium: agent 1 strictly gains by dropping
        // action 2 (0.05 * 0.4375 = 0.0219 beats 0.05 * 0.5625 - 0.01)
        assert!(!is_nash(&inst, &a, set(&[0, 2])).unwrap());
        // with all-zero payments, the empty profile is an equilibrium
        let zero = Contract::zeros(2);
        assert!(is_nash(&inst, &zero, ActionSet::empty()).unwrap());
    }

    #[test]
    fn subset_stability_examples() {
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.32, 0.05]).unwrap();
        // every Nash profile is subset stable
        assert!(is_subset_stable(&inst, &a, set(&[1, 2])).unwrap());
        // the empty profile is subset stable under any contract
        assert!(is_subset_stable(&inst, &a, ActionSet::empty()).unwrap());
        // agent 1 paid nothing strictly gains by dropping its costly action
        let a2 = Contract::new(vec![0.32, 0.0]).unwrap();
        assert!(!is_subset_stable(&inst, &a2, set(&[1, 2])).unwrap());
    }

    #[test]
    fn dynamics_reaches_nash() {
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.32, 0.05]).unwrap();
        let out = best_response_dynamics(&inst, &a, ActionSet::empty()).unwrap();
        assert!(is_nash(&inst, &a, out).unwrap());
        // a profile that is already Nash is returned unchanged
        let again = best_response_dynamics(&inst, &a, out).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn demand_equilibrium_maximizes_potential() {
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.32, 0.05]).unwrap();
        let s = equilibrium_via_demand(&inst, &a).unwrap();
        assert!(is_nash(&inst, &a, s).unwrap());
        let phi_s = potential(&inst, &a, s);
        for other in all_subsets(inst.m()) {
            assert!(phi_s >= potential(&inst, &a, other), "phi not maximal at {s}");
        }
        // the maximizer here is {0}: phi({0}) = 7/16 - 0.1/0.32 = 0.125
        assert_eq!(s, set(&[0]));
    }

    #[test]
    fn enumerate_equilibria_contains_the_incentivized_profile() {
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.32, 0.05]).unwrap();
        let report = enumerate_equilibria(&inst, &a).unwrap();
        assert!(report.equilibria.contains(&set(&[1, 2])));
        for eq in &report.equilibria {
            assert!(is_nash(&inst, &a, *eq).unwrap());
        }
        assert!(report.worst_utility <= report.best_utility);
    }

    #[test]
    fn alpha_intervals_match_the_worked_example() {
        let inst = example_one::<f64>(0.01).unwrap();
        let iv = feasible_alpha_intervals(&inst, set(&[1, 2])).unwrap();
        assert!(iv.feasible);
        assert!((iv.lo[0] - 0.32).abs() < 1e-12, "lo0 = {}", iv.lo[0]);
        assert!((iv.lo[1] - 0.04).abs() < 1e-12, "lo1 = {}", iv.lo[1]);

        // minimal alphas incentivize the profile; anything visibly below fails
        let minimal = iv.minimal_contract().unwrap();
        assert!(is_nash(&inst, &minimal, set(&[1, 2])).unwrap());
        let below =
            Contract::new(vec![iv.lo[0] - 2e-9, iv.lo[1]]).unwrap();
        assert!(!is_nash(&inst, &below, set(&[1, 2])).unwrap());

        // single-action profile of agent 1 alone
        let iv1 = feasible_alpha_intervals(&inst, set(&[1])).unwrap();
        assert!(iv1.feasible);
        assert!((iv1.lo[0] - 0.448).abs() < 1e-12);
    }

    #[test]
    fn empty_profile_intervals() {
        let inst = example_one::<f64>(0.01).unwrap();
        let iv = feasible_alpha_intervals(&inst, ActionSet::empty()).unwrap();
        assert!(iv.feasible);
        assert_eq!(iv.lo, vec![0.0, 0.0]);
        assert!(is_nash(&inst, &Contract::zeros(2), ActionSet::empty()).unwrap());
    }

    #[test]
    fn doubling_holds_on_the_worked_example() {
        let inst = example_one::<f64>(0.01).unwrap();
        let a = Contract::new(vec![0.32, 0.04]).unwrap();
        assert!(is_nash(&inst, &a, set(&[1, 2])).unwrap());
        assert!(check_doubling(&inst, &a, set(&[1, 2]), 0.01).unwrap());
        // the empty profile doubles trivially
        assert!(check_doubling(&inst, &Contract::zeros(2), ActionSet::empty(), 0.01).unwrap());
    }

    #[test]
    fn rational_intervals_are_exact() {
        use crate::Rational;
        let inst = example_one::<Rational>(Rational::ratio(1, 100)).unwrap();
        let iv = feasible_alpha_intervals(&inst, set(&[1, 2])).unwrap();
        assert!(iv.feasible);
        assert_eq!(iv.lo[0], Rational::ratio(8, 25));
        assert_eq!(iv.lo[1], Rational::ratio(1, 25));
    }
}
