//! Set partitions in canonical label form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of `{0, .., n-1}` stored as canonical labels.
///
/// Labels are renumbered in order of first appearance, so two label vectors
/// describing the same partition compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn from_labels<T: Copy + Eq + std::hash::Hash>(labels: &[T]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    /// Build from explicit blocks covering `0..n`.
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            for &i in block {
                if i >= n || labels[i] != usize::MAX {
                    return Err(Error::Domain(format!("blocks do not partition 0..{n}")));
                }
                labels[i] = b;
            }
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_blocks()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_blocks()];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }

    /// Apply a permutation of the ground set: element `i` moves to `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut labels = vec![0; self.n()];
        for (i, &l) in self.labels.iter().enumerate() {
            labels[perm[i]] = l;
        }
        Self::from_labels(&labels)
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| {
                let items: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        write!(f, "{{{}}}", blocks.join(","))
    }
}

/// All set partitions of `{0, .., n-1}` via restricted growth strings.
pub fn enumerate_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    loop {
        out.push(Partition { labels: rgs.clone() });
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            if rgs[i] <= maxes[i - 1] {
                rgs[i] += 1;
                let m = maxes[i - 1].max(rgs[i]);
                maxes[i] = m;
                for t in i + 1..n {
                    rgs[t] = 0;
                    maxes[t] = m;
                }
                break;
            }
            i -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(enumerate_partitions(n + 1).len(), b);
        }
    }

    #[test]
    fn canonical_labels() {
        let a = Partition::from_labels(&[5, 5, 2, 9]);
        let b = Partition::from_labels(&[0, 0, 1, 2]);
        assert_eq!(a, b);
        assert_eq!(a.block_sizes(), vec![2, 1, 1]);
        assert_eq!(a.to_string(), "{{1,2},{3},{4}}");
        let c = Partition::from_blocks(&[vec![2, 3], vec![0, 1]]).unwrap();
        assert_eq!(c, Partition::from_labels(&[1, 1, 0, 0]));
        assert!(Partition::from_blocks(&[vec![0, 0]]).is_err());
    }
}
