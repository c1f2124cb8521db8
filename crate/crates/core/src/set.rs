//! Small fixed-universe action sets backed by a 64-bit mask.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

/// Maximum number of actions an instance may have.
pub const MAX_ACTIONS: usize = 63;

/// A subset of the action ground set `{0, .., m-1}`, m <= [`MAX_ACTIONS`].
///
/// Doubles as an action profile: with a per-action owner map, the global set
/// determines each agent's chosen subset. The derived `Ord` is the numeric
/// order on masks; use [`ActionSet::lex_cmp`] for the sorted-id-list
/// lexicographic order used in tie-breaking.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ActionSet(u64);

impl ActionSet {
    pub const EMPTY: ActionSet = ActionSet(0);

    pub fn empty() -> Self {
        ActionSet(0)
    }

    /// The full set `{0, .., m-1}`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ACTIONS, "ground set too large for a 64-bit mask");
        ActionSet((1u64 << m) - 1)
    }

    pub fn singleton(j: usize) -> Self {
        assert!(j < MAX_ACTIONS);
        ActionSet(1u64 << j)
    }

    pub fn from_bits(bits: u64) -> Self {
        ActionSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, j: usize) -> bool {
        j < MAX_ACTIONS && self.0 & (1u64 << j) != 0
    }

    #[must_use]
    pub fn with(self, j: usize) -> Self {
        assert!(j < MAX_ACTIONS);
        ActionSet(self.0 | (1u64 << j))
    }

    #[must_use]
    pub fn without(self, j: usize) -> Self {
        assert!(j < MAX_ACTIONS);
        ActionSet(self.0 & !(1u64 << j))
    }

    pub fn insert(&mut self, j: usize) {
        *self = self.with(j);
    }

    pub fn remove(&mut self, j: usize) {
        *self = self.without(j);
    }

    pub fn union(self, other: Self) -> Self {
        ActionSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ActionSet(self.0 & other.0)
    }

    pub fn minus(self, other: Self) -> Self {
        ActionSet(self.0 & !other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(j)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of this set, in increasing numeric mask order
    /// (starts with the empty set, ends with the set itself).
    pub fn subsets(self) -> Subsets {
        Subsets { mask: self.0, current: 0, done: false }
    }

    /// Lexicographic order on the sorted element lists: `{}` < `{0,2}` < `{1}`.
    pub fn lex_cmp(self, other: Self) -> Ordering {
        let mut a = self.0;
        let mut b = other.0;
        loop {
            match (a == 0, b == 0) {
                (true, true) => return Ordering::Equal,
                (true, false) => return Ordering::Less,
                (false, true) => return Ordering::Greater,
                (false, false) => {}
            }
            let x = a.trailing_zeros();
            let y = b.trailing_zeros();
            match x.cmp(&y) {
                Ordering::Equal => {
                    a &= a - 1;
                    b &= b - 1;
                }
                ord => return ord,
            }
        }
    }
}

/// All subsets of `{0, .., m-1}` in increasing numeric mask order.
pub fn all_subsets(m: usize) -> impl Iterator<Item = ActionSet> {
    assert!(m <= MAX_ACTIONS);
    (0u64..(1u64 << m)).map(ActionSet)
}

/// Iterator over the subsets of a fixed mask.
pub struct Subsets {
    mask: u64,
    current: u64,
    done: bool,
}

impl Iterator for Subsets {
    type Item = ActionSet;

    fn next(&mut self) -> Option<ActionSet> {
        if self.done {
            return None;
        }
        let out = ActionSet(self.current);
        if self.current == self.mask {
            self.done = true;
        } else {
            // standard subset-stepping trick
            self.current = (self.current.wrapping_sub(self.mask)) & self.mask;
        }
        Some(out)
    }
}

impl BitOr for ActionSet {
    type Output = ActionSet;
    fn bitor(self, rhs: Self) -> Self {
        self.union(rhs)
    }
}

impl BitAnd for ActionSet {
    type Output = ActionSet;
    fn bitand(self, rhs: Self) -> Self {
        self.intersection(rhs)
    }
}

impl Sub for ActionSet {
    type Output = ActionSet;
    fn sub(self, rhs: Self) -> Self {
        self.minus(rhs)
    }
}

impl fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, j) in self.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for ActionSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ActionSet::empty();
        for j in iter {
            s.insert(j);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_stepping_visits_all_subsets_once() {
        let mask: ActionSet = [0, 2, 5].into_iter().collect();
        let subs: Vec<_> = mask.subsets().collect();
        assert_eq!(subs.len(), 8);
        for s in &subs {
            assert!(s.is_subset_of(mask));
        }
        let unique: std::collections::HashSet<_> = subs.iter().map(|s| s.bits()).collect();
        assert_eq!(unique.len(), 8);
    }

    #[test]
    fn lex_order_examples() {
        let e = ActionSet::empty();
        let s02: ActionSet = [0, 2].into_iter().collect();
        let s0 = ActionSet::singleton(0);
        let s1 = ActionSet::singleton(1);
        assert_eq!(e.lex_cmp(s0), Ordering::Less);
        assert_eq!(s02.lex_cmp(s1), Ordering::Less);
        assert_eq!(s0.lex_cmp(s02), Ordering::Less);
        assert_eq!(s02.lex_cmp(s02), Ordering::Equal);
    }

    #[test]
    fn display_is_sorted_ids() {
        let s: ActionSet = [3, 0, 2].into_iter().collect();
        assert_eq!(format!("{s}"), "{0,2,3}");
    }
}
