//! Exhaustive set-function property checkers for small ground sets.

use super::{tabulate, RewardOracle};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::{all_subsets, ActionSet};

/// Default cap for the pairwise marginal checks below.
pub const PAIRWISE_CHECK_CAP: usize = 14;

/// Check monotonicity and submodularity exhaustively.
///
/// Monotone: every marginal `f(j | S)` is at least `-tol`. Submodular: for
/// all `S` and `j, l` outside `S`, `f(j | S) >= f(j | S + l) - tol`, which is
/// equivalent to the marginal condition over nested sets.
pub fn check_monotone_submodular<T: Scalar>(
    oracle: &dyn RewardOracle<T>,
    tol: T,
    cap: usize,
) -> Result<bool> {
    let m = oracle.ground_size();
    if m > cap {
        return Err(Error::GroundTooLarge { m, cap });
    }
    let table = tabulate(oracle);
    let at = |s: ActionSet| table[s.bits() as usize].clone();
    for s in all_subsets(m) {
        for j in 0..m {
            if s.contains(j) {
                continue;
            }
            let gain_j = at(s.with(j)) - at(s);
            if gain_j < T::zero() - tol.clone() {
                return Ok(false);
            }
            for l in 0..m {
                if l == j || s.contains(l) {
                    continue;
                }
                let gain_j_after_l = at(s.with(l).with(j)) - at(s.with(l));
                if gain_j.clone() + tol.clone() < gain_j_after_l {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A violation of the triplet characterization of gross substitutes.
#[derive(Clone, Debug)]
pub struct GsViolation<T> {
    pub base: ActionSet,
    pub pair: (usize, usize),
    pub single: usize,
    pub lhs: T,
    pub rhs: T,
}

/// Check the triplet condition for gross substitutes on a submodular oracle:
/// for every set `S` and distinct `i, j, k` outside `S`,
/// `max(f(ik|S) + f(j|S), f(jk|S) + f(i|S)) >= f(ij|S) + f(k|S)`.
///
/// Returns the first violating witness in scan order, or `None` when the
/// condition holds everywhere.
pub fn check_gross_substitutes_triplet<T: Scalar>(
    oracle: &dyn RewardOracle<T>,
    tol: T,
    cap: usize,
) -> Result<Option<GsViolation<T>>> {
    let m = oracle.ground_size();
    if m > cap {
        return Err(Error::GroundTooLarge { m, cap });
    }
    let table = tabulate(oracle);
    let at = |s: ActionSet| table[s.bits() as usize].clone();
    for s in all_subsets(m) {
        let fs = at(s);
        let gain1 = |x: usize| at(s.with(x)) - fs.clone();
        let gain2 = |x: usize, y: usize| at(s.with(x).with(y)) - fs.clone();
        for i in 0..m {
            if s.contains(i) {
                continue;
            }
            for j in (i + 1)..m {
                if s.contains(j) {
                    continue;
                }
                for k in 0..m {
                    if k == i || k == j || s.contains(k) {
                        continue;
                    }
                    let left_a = gain2(i, k) + gain1(j);
                    let left_b = gain2(j, k) + gain1(i);
                    let lhs = if left_a >= left_b { left_a } else { left_b };
                    let rhs = gain2(i, j) + gain1(k);
                    if lhs.clone() + tol.clone() < rhs {
                        return Ok(Some(GsViolation { base: s, pair: (i, j), single: k, lhs, rhs }));
                    }
                }
            }
        }
    }
    Ok(None)
}
