//! Common and unique clusters, by labels and by weights.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{ecr_relabel, expected_vi_bound, point_estimate};
use crate::atoms::Atom;
use crate::error::Result;
use crate::partition::Partition;
use crate::sampler::ChainTrace;

/// Shared and unique cluster counts at one draw.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharingCounts {
    /// Symmetric J x J; the diagonal holds each group's cluster count.
    pub pair_common: Vec<Vec<usize>>,
    /// Clusters present in every group.
    pub common_all: usize,
    /// Clusters present in group `j` only.
    pub unique: Vec<usize>,
}

fn sharing_from_sets(sets: &[BTreeSet<usize>]) -> SharingCounts {
    let j_count = sets.len();
    let mut pair_common = vec![vec![0; j_count]; j_count];
    for a in 0..j_count {
        for b in a..j_count {
            let c = sets[a].intersection(&sets[b]).count();
            pair_common[a][b] = c;
            pair_common[b][a] = c;
        }
    }
    let common_all = match sets.split_first() {
        Some((first, rest)) => first.iter().filter(|k| rest.iter().all(|s| s.contains(k))).count(),
        None => 0,
    };
    let unique = (0..j_count)
        .map(|j| {
            sets[j]
                .iter()
                .filter(|k| (0..j_count).all(|o| o == j || !sets[o].contains(k)))
                .count()
        })
        .collect();
    SharingCounts { pair_common, common_all, unique }
}

/// Per-draw counts from the occupied label sets of each group.
pub fn common_unique_from_labels(trace: &ChainTrace) -> Vec<SharingCounts> {
    (0..trace.len())
        .map(|t| {
            let sets: Vec<BTreeSet<usize>> = (0..trace.n_groups())
                .map(|j| trace.group_labels(t, j).iter().copied().collect())
                .collect();
            sharing_from_sets(&sets)
        })
        .collect()
}

/// Weight-route summaries over atom slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSharing {
    pub counts: Vec<SharingCounts>,
    /// `zero_prob[j][k]` = Pr(pi_jk = 0 | data).
    pub zero_prob: Vec<Vec<f64>>,
    /// `shared_prob[k][j][j']` = Pr(pi_jk > 0, pi_j'k > 0 | data).
    pub shared_prob: Vec<Vec<Vec<f64>>>,
    /// `unique_prob[j][k]` = Pr(pi_jk > 0 and pi_j'k = 0 for all j' != j | data).
    pub unique_prob: Vec<Vec<f64>>,
}

/// Sharing summaries from weight rows with exact zeros. Slots holding NaN
/// (no instantiated atom) are left out of both counts and frequencies.
pub fn weight_sharing(weights: &[Vec<Vec<f64>>]) -> WeightSharing {
    let j_count = weights.first().map_or(0, Vec::len);
    let l_max = weights.iter().flat_map(|w| w.iter().map(Vec::len)).max().unwrap_or(0);
    let mut seen = vec![0.0; l_max];
    let mut zero = vec![vec![0.0; l_max]; j_count];
    let mut shared = vec![vec![vec![0.0; j_count]; j_count]; l_max];
    let mut unique = vec![vec![0.0; l_max]; j_count];
    let mut counts = Vec::with_capacity(weights.len());
    for w in weights {
        let k_t = w.first().map_or(0, Vec::len);
        let mut sets = vec![BTreeSet::new(); j_count];
        for k in 0..k_t {
            if w.iter().any(|row| row[k].is_nan()) {
                continue;
            }
            seen[k] += 1.0;
            let nz: Vec<bool> = w.iter().map(|row| row[k] != 0.0).collect();
            for j in 0..j_count {
                if nz[j] {
                    sets[j].insert(k);
                } else {
                    zero[j][k] += 1.0;
                }
                for o in 0..j_count {
                    if nz[j] && nz[o] {
                        shared[k][j][o] += 1.0;
                    }
                }
                if nz[j] && (0..j_count).all(|o| o == j || !nz[o]) {
                    unique[j][k] += 1.0;
                }
            }
        }
        counts.push(sharing_from_sets(&sets));
    }
    let norm = |v: f64, k: usize| if seen[k] > 0.0 { v / seen[k] } else { f64::NAN };
    WeightSharing {
        counts,
        zero_prob: zero.iter().map(|r| r.iter().enumerate().map(|(k, &v)| norm(v, k)).collect()).collect(),
        shared_prob: shared
            .iter()
            .enumerate()
            .map(|(k, m)| m.iter().map(|r| r.iter().map(|&v| norm(v, k)).collect()).collect())
            .collect(),
        unique_prob: unique.iter().map(|r| r.iter().enumerate().map(|(k, &v)| norm(v, k)).collect()).collect(),
    }
}

/// Weight-route summaries of the trace as recorded.
pub fn common_unique_from_weights(trace: &ChainTrace) -> WeightSharing {
    weight_sharing(&trace.weights)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    /// 1-based, in order of posterior mean location.
    pub id: usize,
    /// Aligned atom slot the cluster is tracked through.
    pub slot: usize,
    /// Observation indices, group-major and 0-based.
    pub members: Vec<usize>,
    pub mean_location: Vec<f64>,
    pub mean_weight: Vec<f64>,
    pub zero_prob: Vec<f64>,
    pub unique_prob: Vec<f64>,
    pub shared_prob: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub point: Partition,
    pub expected_vi: f64,
    pub reference: usize,
    pub n_draws: usize,
    pub clusters: Vec<ClusterSummary>,
}

impl ClusterReport {
    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Cluster containing observation `i`.
    pub fn cluster_of(&self, i: usize) -> Option<&ClusterSummary> {
        self.clusters.iter().find(|c| c.members.contains(&i))
    }
}

fn atom_mean(a: &Atom) -> Vec<f64> {
    match a {
        Atom::Univariate { mu, .. } => vec![*mu],
        Atom::Multivariate { mu, .. } => mu.iter().copied().collect(),
    }
}

/// Point partition plus weight-route probabilities for each of its clusters,
/// tracked through the aligned atom slot most often holding its members.
pub fn cluster_report(trace: &ChainTrace) -> Result<ClusterReport> {
    let (psm, point) = point_estimate(trace)?;
    let rel = ecr_relabel(trace, None)?;
    let sharing = weight_sharing(&rel.weights);
    let j_count = trace.n_groups();
    let mut clusters = Vec::new();
    for members in point.blocks() {
        let mut freq: HashMap<usize, usize> = HashMap::new();
        for z in &rel.z {
            for &i in &members {
                *freq.entry(z[i]).or_insert(0) += 1;
            }
        }
        let slot = freq.into_iter().max_by_key(|&(k, c)| (c, std::cmp::Reverse(k))).map_or(0, |x| x.0);
        let mut loc_sum: Vec<f64> = Vec::new();
        let mut loc_n = 0.0;
        for atoms in &rel.atoms {
            if let Some(Some(a)) = atoms.get(slot) {
                let m = atom_mean(a);
                if loc_sum.is_empty() {
                    loc_sum = vec![0.0; m.len()];
                }
                for (s, v) in loc_sum.iter_mut().zip(m) {
                    *s += v;
                }
                loc_n += 1.0;
            }
        }
        let mean_location = loc_sum.into_iter().map(|s| s / loc_n).collect();
        let mean_weight = (0..j_count)
            .map(|j| {
                let (s, n) = rel
                    .weights
                    .iter()
                    .filter_map(|w| w[j].get(slot).copied().filter(|v| !v.is_nan()))
                    .fold((0.0, 0.0), |(s, n), v| (s + v, n + 1.0));
                if n > 0.0 {
                    s / n
                } else {
                    f64::NAN
                }
            })
            .collect();
        let get = |v: &Vec<f64>| v.get(slot).copied().unwrap_or(f64::NAN);
        clusters.push(ClusterSummary {
            id: 0,
            slot,
            members,
            mean_location,
            mean_weight,
            zero_prob: sharing.zero_prob.iter().map(get).collect(),
            unique_prob: sharing.unique_prob.iter().map(get).collect(),
            shared_prob: sharing
                .shared_prob
                .get(slot)
                .cloned()
                .unwrap_or_else(|| vec![vec![f64::NAN; j_count]; j_count]),
        });
    }
    clusters.sort_by(|a, b| {
        let la = a.mean_location.first().copied().unwrap_or(f64::NAN);
        let lb = b.mean_location.first().copied().unwrap_or(f64::NAN);
        la.total_cmp(&lb)
    });
    for (i, c) in clusters.iter_mut().enumerate() {
        c.id = i + 1;
    }
    Ok(ClusterReport {
        expected_vi: expected_vi_bound(&point, &psm),
        point,
        reference: rel.reference,
        n_draws: trace.len(),
        clusters,
    })
}
