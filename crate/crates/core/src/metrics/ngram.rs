use std::collections::HashMap;
use std::hash::Hash;

/// Counts of all contiguous n-grams of a single order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramProfile<K: Hash + Eq> {
    order: usize,
    counts: HashMap<Vec<K>, usize>,
    total: usize,
}

impl<K: Hash + Eq + Clone> NGramProfile<K> {
    pub fn from_items(items: &[K], order: usize) -> Self {
        assert!(order >= 1, "n-gram order must be at least 1");
        let mut counts: HashMap<Vec<K>, usize> = HashMap::new();
        let mut total = 0;
        if items.len() >= order {
            for w in items.windows(order) {
                *counts.entry(w.to_vec()).or_insert(0) += 1;
                total += 1;
            }
        }
        Self { order, counts, total }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of n-gram occurrences (not distinct n-grams).
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn count(&self, gram: &[K]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[K], usize)> {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// `Σ min(self[g], other[g])`.
    pub fn matches(&self, other: &Self) -> usize {
        self.counts.iter().map(|(g, &c)| c.min(other.count(g))).sum()
    }

    /// Element-wise maximum, used to merge multiple references.
    pub fn max_merge(&mut self, other: &Self) {
        for (g, &c) in &other.counts {
            let e = self.counts.entry(g.clone()).or_insert(0);
            *e = (*e).max(c);
        }
        self.total = self.counts.values().sum();
    }
}
