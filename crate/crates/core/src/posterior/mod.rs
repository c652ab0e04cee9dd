//! Posterior summaries of sampler traces.

mod ecr;
mod report;

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::sampler::ChainTrace;

pub use ecr::{ecr_relabel, ecr_relabel_labels, Relabeled};
pub use report::{
    cluster_report, common_unique_from_labels, common_unique_from_weights, weight_sharing, ClusterReport,
    ClusterSummary, SharingCounts, WeightSharing,
};

/// Pairwise co-clustering frequencies.
pub type SimilarityMatrix = DMatrix<f64>;

fn same_ground_set(a: &Partition, b: &Partition) -> Result<()> {
    if a.n() == b.n() {
        Ok(())
    } else {
        Err(Error::Validation(format!("partitions cover {} and {} items", a.n(), b.n())))
    }
}

/// Fraction of kept draws in which each pair shares a label.
pub fn similarity_matrix(trace: &ChainTrace) -> Result<SimilarityMatrix> {
    if trace.is_empty() {
        return Err(Error::Validation("similarity matrix of an empty trace".into()));
    }
    let n = trace.n_obs();
    let mut counts = vec![0u32; n * n];
    for z in &trace.z {
        for i in 0..n {
            let zi = z[i];
            let row = &mut counts[i * n..(i + 1) * n];
            for (c, &zk) in row[i + 1..].iter_mut().zip(&z[i + 1..]) {
                *c += u32::from(zk == zi);
            }
        }
    }
    let t = trace.len() as f64;
    Ok(DMatrix::from_fn(n, n, |a, b| match a.cmp(&b) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Less => counts[a * n + b] as f64 / t,
        std::cmp::Ordering::Greater => counts[b * n + a] as f64 / t,
    }))
}

/// Lower bound on the posterior expected variation of information of a
/// candidate partition, in nats.
pub fn expected_vi_bound(p: &Partition, psm: &SimilarityMatrix) -> f64 {
    let n = p.n();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for block in p.blocks() {
        let size = (block.len() as f64).ln();
        for &i in &block {
            let within: f64 = block.iter().map(|&k| psm[(i, k)]).sum();
            let row: f64 = psm.row(i).sum();
            total += size - 2.0 * within.ln() + row.ln();
        }
    }
    total / n as f64
}

/// Candidate partitions searched by the VI point estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointSearch {
    /// Distinct sampled partitions only.
    Sampled,
    /// Sampled partitions plus every cut of the average-linkage tree on
    /// `1 - psm` with no more blocks than the largest sampled partition.
    #[default]
    SampledAndLinkage,
}

/// Sampled partition with the smallest expected-VI bound; ties go to the
/// earliest draw.
pub fn vi_point_estimate(trace: &ChainTrace, psm: &SimilarityMatrix) -> Result<Partition> {
    vi_point_estimate_with(trace, psm, PointSearch::Sampled)
}

/// Partition minimizing the expected-VI bound over the chosen candidates.
pub fn vi_point_estimate_with(
    trace: &ChainTrace,
    psm: &SimilarityMatrix,
    search: PointSearch,
) -> Result<Partition> {
    if trace.is_empty() {
        return Err(Error::Validation("point estimate of an empty trace".into()));
    }
    if psm.nrows() != trace.n_obs() {
        return Err(Error::Validation("similarity matrix does not match the trace".into()));
    }
    let mut seen = HashSet::new();
    let mut best: Option<(f64, Partition)> = None;
    let consider = |p: Partition, best: &mut Option<(f64, Partition)>| {
        let score = expected_vi_bound(&p, psm);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            *best = Some((score, p));
        }
    };
    let mut k_max = 1;
    for t in 0..trace.len() {
        let p = trace.partition(t);
        if !seen.insert(p.clone()) {
            continue;
        }
        k_max = k_max.max(p.n_blocks());
        consider(p, &mut best);
    }
    if search == PointSearch::SampledAndLinkage {
        for p in linkage_cuts(psm, k_max) {
            if !seen.contains(&p) {
                consider(p, &mut best);
            }
        }
    }
    Ok(best.expect("nonempty trace").1)
}

/// Average-linkage cuts with `1..=k_max` blocks.
fn linkage_cuts(psm: &SimilarityMatrix, k_max: usize) -> Vec<Partition> {
    let n = psm.nrows();
    if n < 2 {
        return Vec::new();
    }
    let mut condensed = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for k in i + 1..n {
            condensed.push(1.0 - psm[(i, k)]);
        }
    }
    let tree = kodama::linkage(&mut condensed, n, kodama::Method::Average);
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut cuts = Vec::new();
    for (s, step) in tree.steps().iter().enumerate() {
        let node = n + s;
        parent[step.cluster1] = node;
        parent[step.cluster2] = node;
        if n - (s + 1) <= k_max {
            let labels: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
            cuts.push(Partition::from_labels(&labels));
        }
    }
    cuts
}

/// Similarity matrix and VI point estimate together.
pub fn point_estimate(trace: &ChainTrace) -> Result<(SimilarityMatrix, Partition)> {
    let psm = similarity_matrix(trace)?;
    let p = vi_point_estimate_with(trace, &psm, PointSearch::default())?;
    Ok((psm, p))
}

fn contingency(a: &Partition, b: &Partition) -> HashMap<(usize, usize), usize> {
    let mut m = HashMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *m.entry((x, y)).or_insert(0) += 1;
    }
    m
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    same_ground_set(a, b)?;
    let index: f64 = contingency(a, b).values().map(|&c| choose2(c)).sum();
    let sa: f64 = a.block_sizes().into_iter().map(choose2).sum();
    let sb: f64 = b.block_sizes().into_iter().map(choose2).sum();
    let total = choose2(a.n());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Frobenius distance divided by the dimension.
pub fn nfd(a: &SimilarityMatrix, b: &SimilarityMatrix) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::Validation(format!(
            "matrices of shape {:?} and {:?} cannot be compared",
            a.shape(),
            b.shape()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    Ok((a - b).norm() / n as f64)
}

/// Variation of information in nats.
pub fn vi_distance(a: &Partition, b: &Partition) -> Result<f64> {
    same_ground_set(a, b)?;
    let n = a.n() as f64;
    if a.n() == 0 {
        return Ok(0.0);
    }
    let h = |sizes: Vec<usize>| -> f64 {
        sizes.into_iter().map(|s| s as f64 / n).map(|q| -q * q.ln()).sum()
    };
    let sa = a.block_sizes();
    let sb = b.block_sizes();
    let mut mi = 0.0;
    for (&(x, y), &c) in &contingency(a, b) {
        let pxy = c as f64 / n;
        mi += pxy * (pxy * n * n / (sa[x] as f64 * sb[y] as f64)).ln();
    }
    Ok((h(sa) + h(sb) - 2.0 * mi).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(l: &[usize]) -> Partition {
        Partition::from_labels(l)
    }

    fn trace_of(z: Vec<Vec<usize>>) -> ChainTrace {
        let n = z[0].len();
        ChainTrace { group_sizes: vec![n], z, ..Default::default() }
    }

    #[test]
    fn ari_values() {
        let p = part(&[0, 0, 1, 1]);
        assert_eq!(ari(&p, &p).unwrap(), 1.0);
        assert!((ari(&p, &part(&[0, 1, 0, 1])).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(ari(&part(&[0, 1, 2, 3]), &part(&[0, 0, 0, 0])).unwrap(), 0.0);
        assert!(ari(&p, &part(&[0, 1])).is_err());
    }

    #[test]
    fn vi_values() {
        let a = part(&[0, 1]);
        let b = part(&[0, 0]);
        assert!((vi_distance(&a, &b).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(vi_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn nfd_values() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_element(2, 2, 1.0);
        assert!((nfd(&a, &b).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(nfd(&a, &a).unwrap(), 0.0);
        assert!(nfd(&a, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn similarity_basics() {
        let t = trace_of(vec![vec![0, 0, 1], vec![2, 2, 2]]);
        let s = similarity_matrix(&t).unwrap();
        assert_eq!(s[(0, 1)], 1.0);
        assert_eq!(s[(0, 2)], 0.5);
        assert_eq!(s[(2, 0)], 0.5);
        assert!(similarity_matrix(&ChainTrace::default()).is_err());
    }

    #[test]
    fn dominant_partition_wins() {
        let mut z = vec![vec![0, 0, 1, 1]; 9];
        z.push(vec![0, 1, 0, 1]);
        let t = trace_of(z);
        let (_, p) = point_estimate(&t).unwrap();
        assert_eq!(p, part(&[0, 0, 1, 1]));
    }
}
