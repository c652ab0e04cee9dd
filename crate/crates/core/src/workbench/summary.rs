//! Machine-readable posterior summary of one chain.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::posterior::{
    ari, cluster_report, common_unique_from_labels, common_unique_from_weights, nfd, vi_distance,
    ClusterSummary, SharingCounts,
};
use crate::partition::Partition;
use crate::sampler::ChainTrace;
use crate::simgen::truth_similarity;
use crate::workbench::io::{fmt_f64, write_matrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthMetrics {
    pub ari: f64,
    pub nfd: f64,
    pub vi: f64,
    pub true_clusters: usize,
}

/// Posterior means of the per-draw sharing counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSharing {
    pub pair_common: Vec<Vec<f64>>,
    pub common_all: f64,
    pub unique: Vec<f64>,
}

fn mean_sharing(c: &[SharingCounts]) -> MeanSharing {
    let n = c.len().max(1) as f64;
    let j = c.first().map_or(0, |s| s.unique.len());
    let mut pc = vec![vec![0.0; j]; j];
    let mut un = vec![0.0; j];
    let mut all = 0.0;
    for s in c {
        for a in 0..j {
            for b in 0..j {
                pc[a][b] += s.pair_common[a][b] as f64 / n;
            }
            un[a] += s.unique[a] as f64 / n;
        }
        all += s.common_all as f64 / n;
    }
    MeanSharing { pair_common: pc, common_all: all, unique: un }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: String,
    pub n_draws: usize,
    pub n_obs: usize,
    pub group_names: Vec<String>,
    /// Clusters of the point estimate.
    pub n_clusters: usize,
    /// Point-estimate clusters with members in each group.
    pub clusters_per_group: Vec<usize>,
    pub expected_vi: f64,
    pub posterior_mean_clusters: f64,
    /// Cluster id of every observation, group-major.
    pub point_labels: Vec<usize>,
    pub clusters: Vec<ClusterSummary>,
    /// Occupied-label route.
    pub label_sharing: MeanSharing,
    /// Nonzero-weight route.
    pub weight_sharing: MeanSharing,
    pub mean_p: Vec<f64>,
    pub metrics: Option<TruthMetrics>,
}

/// Summarizes `trace`; truth labels, when given, add ARI, NFD and VI.
pub fn summarize(trace: &ChainTrace, group_names: &[String], truth: Option<&[usize]>) -> Result<Summary> {
    let rep = cluster_report(trace)?;
    let n = trace.n_obs();
    let mut point_labels = vec![0usize; n];
    for c in &rep.clusters {
        for &i in &c.members {
            point_labels[i] = c.id;
        }
    }
    let mut clusters_per_group = Vec::with_capacity(trace.n_groups());
    let mut start = 0;
    for &sz in &trace.group_sizes {
        let mut ids: Vec<usize> = point_labels[start..start + sz].to_vec();
        ids.sort_unstable();
        ids.dedup();
        clusters_per_group.push(ids.len());
        start += sz;
    }
    let counts = trace.cluster_counts();
    let posterior_mean_clusters = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let jp = trace.p.first().map_or(0, Vec::len);
    let mean_p = (0..jp).map(|j| trace.p.iter().map(|r| r[j]).sum::<f64>() / trace.len() as f64).collect();
    let metrics = match truth {
        None => None,
        Some(t) => {
            if t.len() != n {
                return Err(Error::Validation(format!("truth has {} labels, trace has {n} observations", t.len())));
            }
            let tp = Partition::from_labels(t);
            let psm = crate::posterior::similarity_matrix(trace)?;
            Some(TruthMetrics {
                ari: ari(&rep.point, &tp)?,
                nfd: nfd(&psm, &truth_similarity(&tp))?,
                vi: vi_distance(&rep.point, &tp)?,
                true_clusters: tp.n_blocks(),
            })
        }
    };
    Ok(Summary {
        model: trace.model.clone(),
        n_draws: trace.len(),
        n_obs: n,
        group_names: group_names.to_vec(),
        n_clusters: rep.n_clusters(),
        clusters_per_group,
        expected_vi: rep.expected_vi,
        posterior_mean_clusters,
        point_labels,
        clusters: rep.clusters,
        label_sharing: mean_sharing(&common_unique_from_labels(trace)),
        weight_sharing: mean_sharing(&common_unique_from_weights(trace).counts),
        mean_p,
        metrics,
    })
}

/// Writes `report.json`, `clusters.csv`, `shared.csv`, `point.csv` and `psm.csv`.
pub fn write_summary(dir: &Path, s: &Summary, trace: &ChainTrace) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(s)?)?;
    let j_count = s.group_names.len();

    let mut w = csv::Writer::from_path(dir.join("clusters.csv"))?;
    let q = s.clusters.first().map_or(1, |c| c.mean_location.len());
    let mut h = vec!["cluster".to_string(), "size".to_string()];
    h.extend((1..=q).map(|d| format!("location{d}")));
    for g in &s.group_names {
        h.push(format!("weight_{g}"));
        h.push(format!("pr_zero_{g}"));
        h.push(format!("pr_unique_{g}"));
    }
    w.write_record(&h)?;
    for c in &s.clusters {
        let mut r = vec![c.id.to_string(), c.members.len().to_string()];
        r.extend(c.mean_location.iter().map(|x| fmt_f64(*x)));
        for j in 0..j_count {
            r.push(fmt_f64(c.mean_weight[j]));
            r.push(fmt_f64(c.zero_prob[j]));
            r.push(fmt_f64(c.unique_prob[j]));
        }
        w.write_record(&r)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("shared.csv"))?;
    w.write_record(["cluster", "group_a", "group_b", "pr_both_nonzero"])?;
    for c in &s.clusters {
        for a in 0..j_count {
            for b in a + 1..j_count {
                w.write_record([
                    c.id.to_string(),
                    s.group_names[a].clone(),
                    s.group_names[b].clone(),
                    fmt_f64(c.shared_prob[a][b]),
                ])?;
            }
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("point.csv"))?;
    w.write_record(["group", "obs", "cluster"])?;
    let mut i = 0;
    for (j, &sz) in trace.group_sizes.iter().enumerate() {
        for o in 0..sz {
            w.write_record([s.group_names[j].clone(), (o + 1).to_string(), s.point_labels[i].to_string()])?;
            i += 1;
        }
    }
    w.flush()?;

    write_matrix(&dir.join("psm.csv"), &crate::posterior::similarity_matrix(trace)?)
}
