//! Set partitions as restricted growth strings.
//!
//! A partition of `t` items is stored as its label sequence with labels in
//! first-occurrence order: item 0 has label 0 and each later item either
//! reuses a label or takes the next unused one. Every partition has exactly
//! one such representation, so equality is plain sequence equality.

use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest item count [`enumerate_partitions`] accepts. Bell(14) is about
/// 1.9e8.
pub const MAX_ENUMERATION_ITEMS: usize = 14;

#[derive(Debug, Clone, Serialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

/// Relabels so that labels appear in first-occurrence order.
pub fn canonicalize(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(from, _)| *from == l) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len();
                map.push((l, to));
                to
            }
        })
        .collect()
}

impl Partition {
    /// Builds a partition with at most `k` clusters from arbitrary labels in
    /// `[0, k)`. The result is canonical.
    pub fn new(labels: &[usize], k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("partition of zero items".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("cluster bound must be >= 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for k = {k}"
            )));
        }
        Ok(Self {
            assignment: canonicalize(labels),
            k,
        })
    }

    /// Everything in cluster 0.
    pub fn single_cluster(t: usize) -> Self {
        Self {
            assignment: vec![0; t],
            k: 1,
        }
    }

    pub fn singletons(t: usize) -> Self {
        Self {
            assignment: (0..t).collect(),
            k: t,
        }
    }

    /// Builds a partition from explicit clusters of 0-based items. Every item
    /// in `[0, t)` must appear exactly once.
    pub fn from_clusters(clusters: &[Vec<usize>], t: usize) -> Result<Self> {
        let mut labels = vec![usize::MAX; t];
        for (label, cluster) in clusters.iter().enumerate() {
            for &item in cluster {
                if item >= t {
                    return Err(Error::OutOfBounds {
                        index: item,
                        len: t,
                    });
                }
                if labels[item] != usize::MAX {
                    return Err(Error::InvalidArgument(format!(
                        "item {item} appears in more than one cluster"
                    )));
                }
                labels[item] = label;
            }
        }
        if let Some(missing) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidArgument(format!(
                "item {missing} is unassigned"
            )));
        }
        Self::new(&labels, clusters.len().max(1))
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Declared maximum cluster count.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Number of nonempty clusters.
    pub fn num_clusters(&self) -> usize {
        // Canonical labels are dense, so the largest label is count - 1.
        self.assignment.iter().max().map_or(0, |m| m + 1)
    }

    /// Members of each nonempty cluster, in label order; members ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (item, &label) in self.assignment.iter().enumerate() {
            out[label].push(item);
        }
        out
    }

    /// Clusters with 1-based item numbers.
    pub fn clusters_one_based(&self) -> Vec<Vec<usize>> {
        self.clusters()
            .into_iter()
            .map(|c| c.into_iter().map(|i| i + 1).collect())
            .collect()
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.assignment == other.assignment
    }
}

impl Eq for Partition {}

impl Hash for Partition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.assignment.hash(state);
    }
}

/// Number of partitions of `t` items into at most `max_k` nonempty
/// clusters, i.e. the sum of S(t, j) for j = 1..=max_k.
pub fn partition_count(t: usize, max_k: usize) -> u128 {
    // S(i, j) row by row.
    let mut row = vec![0u128; max_k + 1];
    row[0] = 1;
    for _ in 0..t {
        for j in (1..=max_k).rev() {
            row[j] = j as u128 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[1..].iter().sum()
}

/// Iterator over partitions in restricted-growth-string order.
#[derive(Debug, Clone)]
pub struct Partitions {
    labels: Vec<usize>,
    // prefix_max[i] = max(labels[..i]), with prefix_max[0] unused.
    prefix_max: Vec<usize>,
    max_k: usize,
    done: bool,
}

impl Partitions {
    fn advance(&mut self) -> bool {
        let t = self.labels.len();
        for i in (1..t).rev() {
            let next = self.labels[i] + 1;
            if next <= self.prefix_max[i] + 1 && next < self.max_k {
                self.labels[i] = next;
                for j in i + 1..t {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[j - 1].max(self.labels[j - 1]);
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let out = Partition {
            assignment: self.labels.clone(),
            k: self.max_k,
        };
        self.done = !self.advance();
        Some(out)
    }
}

/// Enumerates every partition of `t` items into at most `max_k` nonempty
/// clusters, each once, in canonical form.
pub fn enumerate_partitions(t: usize, max_k: usize) -> Result<Partitions> {
    if t > MAX_ENUMERATION_ITEMS {
        return Err(Error::CapExceeded {
            what: "partition enumeration",
            size: t,
            cap: MAX_ENUMERATION_ITEMS,
        });
    }
    if t == 0 || max_k == 0 || max_k > t {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= max_k <= t, got t = {t}, max_k = {max_k}"
        )));
    }
    Ok(Partitions {
        labels: vec![0; t],
        prefix_max: vec![0; t],
        max_k,
        done: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Independent oracle: every label string over [0, k)^t, canonicalized
    /// and deduplicated.
    fn brute_force(t: usize, k: usize) -> HashSet<Vec<usize>> {
        let total = k.pow(t as u32);
        (0..total)
            .map(|mut code| {
                let labels: Vec<usize> = (0..t)
                    .map(|_| {
                        let l = code % k;
                        code /= k;
                        l
                    })
                    .collect();
                canonicalize(&labels)
            })
            .collect()
    }

    #[test]
    fn forced_single_cluster() {
        let all: Vec<_> = enumerate_partitions(3, 1).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].assignment(), &[0, 0, 0]);
    }

    #[test]
    fn small_counts_match_brute_force() {
        assert_eq!(brute_force(3, 3).len(), 5);
        assert_eq!(brute_force(4, 2).len(), 8);
        assert_eq!(enumerate_partitions(3, 3).unwrap().count(), 5);
        assert_eq!(enumerate_partitions(4, 2).unwrap().count(), 8);
    }

    #[test]
    fn enumeration_equals_brute_force_up_to_eight() {
        for t in 1..=8 {
            for k in 1..=t {
                let listed: Vec<Vec<usize>> = enumerate_partitions(t, k)
                    .unwrap()
                    .map(|p| p.assignment().to_vec())
                    .collect();
                let set: HashSet<_> = listed.iter().cloned().collect();
                assert_eq!(set.len(), listed.len(), "duplicates at t={t} k={k}");
                assert_eq!(set, brute_force(t, k), "t={t} k={k}");
                assert_eq!(listed.len() as u128, partition_count(t, k));
                let mut sorted = listed.clone();
                sorted.sort();
                assert_eq!(sorted, listed, "not in lexicographic order");
            }
        }
    }

    #[test]
    fn bell_numbers() {
        let bell = [1u128, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
        for (t, &b) in (1..=10).zip(bell.iter()) {
            assert_eq!(partition_count(t, t), b);
        }
        assert_eq!(partition_count(14, 14), 190_899_322);
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(
            enumerate_partitions(15, 2),
            Err(Error::CapExceeded {
                size: 15,
                cap: 14,
                ..
            })
        ));
        assert!(matches!(
            enumerate_partitions(3, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            enumerate_partitions(3, 4),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn canonical_equality() {
        let a = Partition::new(&[2, 2, 0, 1], 3).unwrap();
        let b = Partition::new(&[1, 1, 0, 2], 3).unwrap();
        assert_eq!(a.assignment(), &[0, 0, 1, 2]);
        assert_eq!(a, b);
        assert_ne!(a, Partition::new(&[0, 1, 1, 2], 3).unwrap());
        assert_eq!(a.clusters(), vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(a.clusters_one_based(), vec![vec![1, 2], vec![3], vec![4]]);
        assert_eq!(a.num_clusters(), 3);
    }

    #[test]
    fn from_clusters_validates() {
        let p = Partition::from_clusters(&[vec![1, 3], vec![0, 2]], 4).unwrap();
        assert_eq!(p.assignment(), &[0, 1, 0, 1]);
        assert!(Partition::from_clusters(&[vec![0, 1], vec![1]], 2).is_err());
        assert!(Partition::from_clusters(&[vec![0]], 2).is_err());
        assert!(Partition::new(&[0, 3], 3).is_err());
    }

    proptest::proptest! {
        #[test]
        fn canonicalize_is_idempotent(labels in proptest::collection::vec(0usize..6, 1..12)) {
            let once = canonicalize(&labels);
            proptest::prop_assert_eq!(canonicalize(&once), once.clone());
            // Same grouping as the input.
            for i in 0..labels.len() {
                for j in 0..labels.len() {
                    proptest::prop_assert_eq!(labels[i] == labels[j], once[i] == once[j]);
                }
            }
        }
    }
}
