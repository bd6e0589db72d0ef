//! Symmetric correlator tensors.
//!
//! A `CorrelatorTensor` maps n-tuples of `(channel, psi-degree)` to scalars
//! and is symmetric under simultaneous permutation of the tuple slots. It is
//! the common output format of the graph-sum integrals and of the polar
//! decomposition of recursion output.

use crate::scalar::Scalar;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct CorrelatorTensor {
    pub g: u32,
    pub n: usize,
    entries: BTreeMap<Vec<(usize, u32)>, Scalar>,
}

impl CorrelatorTensor {
    pub fn new(g: u32, n: usize) -> Self {
        CorrelatorTensor { g, n, entries: BTreeMap::new() }
    }

    fn canonical(&self, key: &[(usize, u32)]) -> Vec<(usize, u32)> {
        assert_eq!(key.len(), self.n, "key arity mismatch");
        let mut k = key.to_vec();
        k.sort_unstable();
        k
    }

    /// Dimension bound: entries with total psi-degree above `3g-3+n` must
    /// vanish, so they are not stored.
    pub fn degree_bound(&self) -> i64 {
        3 * self.g as i64 - 3 + self.n as i64
    }

    pub fn set(&mut self, key: &[(usize, u32)], value: Scalar) {
        let total: i64 = key.iter().map(|&(_, d)| d as i64).sum();
        assert!(
            total <= self.degree_bound() || value.norm() == 0.0,
            "nonzero entry beyond the dimension bound: degrees sum to {total}"
        );
        let k = self.canonical(key);
        if value.norm() == 0.0 {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, value);
        }
    }

    pub fn add_to(&mut self, key: &[(usize, u32)], value: Scalar) {
        let k = self.canonical(key);
        let cur = self.entries.get(&k).copied().unwrap_or_default();
        self.set(&k, cur + value);
    }

    pub fn get(&self, key: &[(usize, u32)]) -> Scalar {
        let total: i64 = key.iter().map(|&(_, d)| d as i64).sum();
        if total > self.degree_bound() {
            return Scalar::new(0.0, 0.0);
        }
        self.entries.get(&self.canonical(key)).copied().unwrap_or_default()
    }

    /// Iterate stored entries under their canonical (sorted) keys.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<(usize, u32)>, &Scalar)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest entrywise deviation from `other`, over the union of keys.
    pub fn max_deviation(&self, other: &CorrelatorTensor) -> f64 {
        let mut dev: f64 = 0.0;
        for (k, v) in self.iter() {
            dev = dev.max((v - other.get(k)).norm());
        }
        for (k, v) in other.iter() {
            dev = dev.max((v - self.get(k)).norm());
        }
        dev
    }
}
