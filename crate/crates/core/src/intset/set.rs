use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// A finite set of integers kept sorted and duplicate-free.
///
/// Elements are arbitrary precision. When every element fits in an `i64` they
/// are stored as machine words, which the image kernels work on directly.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteIntSet {
    repr: Repr,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

impl FiniteIntSet {
    pub fn empty() -> Self {
        FiniteIntSet {
            repr: Repr::Small(Vec::new()),
        }
    }

    pub fn new<I, T>(elements: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        Self::from_bigints(elements.into_iter().map(Into::into).collect())
    }

    pub fn from_i64s<I: IntoIterator<Item = i64>>(elements: I) -> Self {
        let mut v: Vec<i64> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FiniteIntSet {
            repr: Repr::Small(v),
        }
    }

    pub fn from_bigints(mut v: Vec<BigInt>) -> Self {
        if let Some(small) = v
            .iter()
            .map(ToPrimitive::to_i64)
            .collect::<Option<Vec<_>>>()
        {
            return Self::from_i64s(small);
        }
        v.sort_unstable();
        v.dedup();
        FiniteIntSet { repr: Repr::Big(v) }
    }

    /// Builds a set from an already strictly increasing vector.
    pub(crate) fn from_sorted_i64s(v: Vec<i64>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        FiniteIntSet {
            repr: Repr::Small(v),
        }
    }

    /// The integers `lo..=hi`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        Self::from_sorted_i64s((lo..=hi).collect())
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Small(v) => v.len(),
            Repr::Big(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The elements as machine words, if they all fit.
    pub fn as_i64s(&self) -> Option<&[i64]> {
        match &self.repr {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    pub fn to_bigints(&self) -> Vec<BigInt> {
        match &self.repr {
            Repr::Small(v) => v.iter().map(|&x| BigInt::from(x)).collect(),
            Repr::Big(v) => v.clone(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = BigInt> + '_ {
        let (small, big) = match &self.repr {
            Repr::Small(v) => (Some(v.iter().map(|&x| BigInt::from(x))), None),
            Repr::Big(v) => (None, Some(v.iter().cloned())),
        };
        small.into_iter().flatten().chain(big.into_iter().flatten())
    }

    pub fn min_element(&self) -> Option<BigInt> {
        self.iter().next()
    }

    pub fn max_element(&self) -> Option<BigInt> {
        match &self.repr {
            Repr::Small(v) => v.last().map(|&x| BigInt::from(x)),
            Repr::Big(v) => v.last().cloned(),
        }
    }

    /// Largest absolute value of an element, 0 for the empty set.
    pub fn max_abs(&self) -> BigInt {
        let lo = self.min_element().unwrap_or_default();
        let hi = self.max_element().unwrap_or_default();
        lo.magnitude().max(hi.magnitude()).clone().into()
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        match &self.repr {
            Repr::Small(v) => x.to_i64().is_some_and(|x| v.binary_search(&x).is_ok()),
            Repr::Big(v) => v.binary_search(x).is_ok(),
        }
    }

    /// `{-a : a ∈ A}`.
    pub fn reflect(&self) -> Self {
        match &self.repr {
            Repr::Small(v) if v.first() != Some(&i64::MIN) => {
                FiniteIntSet::from_sorted_i64s(v.iter().rev().map(|x| -x).collect())
            }
            _ => FiniteIntSet::from_bigints(self.iter().map(|x| -x).collect()),
        }
    }
}

impl Default for FiniteIntSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl PartialOrd for FiniteIntSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on the increasing element sequences.
impl Ord for FiniteIntSet {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.repr, &other.repr) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.iter().cmp(other.iter()),
        }
    }
}

impl fmt::Debug for FiniteIntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for FiniteIntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<i64> for FiniteIntSet {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        Self::from_i64s(iter)
    }
}

impl From<&[i64]> for FiniteIntSet {
    fn from(v: &[i64]) -> Self {
        Self::from_i64s(v.iter().copied())
    }
}

impl<const N: usize> From<[i64; N]> for FiniteIntSet {
    fn from(v: [i64; N]) -> Self {
        Self::from_i64s(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_dedups() {
        let a = FiniteIntSet::from([5, 1, 3, 1, 5]);
        assert_eq!(a.as_i64s().unwrap(), &[1, 3, 5]);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn big_elements_stay_big() {
        let huge = BigInt::from(i64::MAX) * 4u32;
        let a = FiniteIntSet::new([huge.clone(), BigInt::from(1), huge.clone()]);
        assert!(a.as_i64s().is_none());
        assert_eq!(a.len(), 2);
        assert_eq!(a.max_element().unwrap(), huge);
        // a set of small values built through BigInt collapses to words
        let b = FiniteIntSet::new([BigInt::from(7), BigInt::from(-2)]);
        assert_eq!(b.as_i64s().unwrap(), &[-2, 7]);
    }

    #[test]
    fn reflect_and_order() {
        let a = FiniteIntSet::from([0, 1, 3]);
        assert_eq!(a.reflect(), FiniteIntSet::from([-3, -1, 0]));
        assert!(FiniteIntSet::from([0, 1, 3]) < FiniteIntSet::from([0, 2, 3]));
        let edge = FiniteIntSet::from([i64::MIN, 0]);
        assert_eq!(
            edge.reflect().max_element().unwrap(),
            -BigInt::from(i64::MIN)
        );
    }

    #[test]
    fn display() {
        assert_eq!(FiniteIntSet::from([2, 0, 1]).to_string(), "{0,1,2}");
        assert_eq!(FiniteIntSet::empty().to_string(), "{}");
    }
}
