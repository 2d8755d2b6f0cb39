use std::fmt;

/// A subset of a finite ontic space, stored as a bitmask over state indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OnticSet {
    universe: usize,
    words: Vec<u64>,
}

impl OnticSet {
    pub fn empty(universe: usize) -> Self {
        OnticSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = OnticSet::empty(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = OnticSet::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe, "ontic index {i} out of range {}", self.universe);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection(&self, other: &OnticSet) -> OnticSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &OnticSet) -> OnticSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &OnticSet) -> OnticSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &OnticSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |&i| self.contains(i))
    }

    fn zip_with(&self, other: &OnticSet, f: impl Fn(u64, u64) -> u64) -> OnticSet {
        assert_eq!(self.universe, other.universe, "ontic sets over different spaces");
        OnticSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl fmt::Debug for OnticSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops() {
        let a = OnticSet::from_indices(70, [0, 3, 65]);
        let b = OnticSet::from_indices(70, [3, 65, 69]);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![3, 65]);
        assert_eq!(a.union(&b).len(), 4);
        assert!(a.intersection(&b).is_subset(&a));
        assert!(!a.contains(69) && b.contains(69));
        assert!(OnticSet::empty(5).is_empty());
        assert_eq!(OnticSet::full(5).len(), 5);
    }

    proptest! {
        #[test]
        fn intersection_distributes_over_union(
            a in prop::collection::vec(0usize..20, 0..10),
            b in prop::collection::vec(0usize..20, 0..10),
            c in prop::collection::vec(0usize..20, 0..10),
        ) {
            let (a, b, c) = (
                OnticSet::from_indices(20, a),
                OnticSet::from_indices(20, b),
                OnticSet::from_indices(20, c),
            );
            prop_assert_eq!(
                a.union(&b).intersection(&c),
                a.intersection(&c).union(&b.intersection(&c))
            );
        }
    }
}
