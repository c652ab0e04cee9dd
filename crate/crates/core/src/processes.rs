//! Truncated generative simulators for stick-breaking priors.
//!
//! Every simulator returns a [`ProcessDraw`]: `K` shared atoms and one weight
//! row per group. Atom-skipping processes carry an exact-zero pattern that is
//! mirrored in `skip_mask`.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{AtomSet, BaseMeasure};
use crate::error::{domain, ensure_positive, Result};
use crate::stats::{beta_unchecked, bernoulli, RngHandle};

/// Beta parameters are floored here to absorb stick exhaustion.
pub const BETA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub n_atoms: usize,
    pub n_groups: usize,
    pub n_obs_per_group: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { n_atoms: 1000, n_groups: 500, n_obs_per_group: 1000 }
    }
}

impl TruncationConfig {
    fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 || self.n_groups == 0 {
            return domain("truncation needs at least one atom and one group");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessDraw {
    pub atoms: AtomSet,
    pub group_weights: Vec<Vec<f64>>,
    pub skip_mask: Vec<Vec<bool>>,
}

impl ProcessDraw {
    pub fn n_groups(&self) -> usize {
        self.group_weights.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Mass left outside the truncation, per group.
    pub fn residuals(&self) -> Vec<f64> {
        self.group_weights.iter().map(|r| 1.0 - r.iter().sum::<f64>()).collect()
    }
}

/// Per-group probability of keeping an atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PSpec {
    Fixed(Vec<f64>),
    Beta { a: f64, b: f64 },
}

/// Stick-breaking weights from fractions.
pub fn stick_weights(fractions: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    fractions
        .iter()
        .map(|&f| {
            let w = f * rest;
            rest *= 1.0 - f;
            w
        })
        .collect()
}

fn gem_fractions<R: Rng + ?Sized>(gamma: f64, k: usize, rng: &mut R) -> Vec<f64> {
    (0..k).map(|_| beta_unchecked(1.0, gamma, rng)).collect()
}

/// GEM(gamma) weights truncated at `k` atoms.
pub fn sample_gem<R: Rng + ?Sized>(gamma: f64, k: usize, rng: &mut R) -> Result<Vec<f64>> {
    ensure_positive("gamma", gamma)?;
    Ok(stick_weights(&gem_fractions(gamma, k, rng)))
}

/// Parameters of the group-level Beta for each atom given top-level fractions.
pub(crate) fn group_beta_params(alpha0: f64, beta_prime: &[f64]) -> Vec<(f64, f64)> {
    let mut rest = 1.0;
    beta_prime
        .iter()
        .map(|&b| {
            let bk = b * rest;
            rest *= 1.0 - b;
            ((alpha0 * bk).max(BETA_FLOOR), (alpha0 * rest).max(BETA_FLOOR))
        })
        .collect()
}

/// One group's fractions: each atom skipped with probability `1 - p`.
fn asp_row<R: Rng + ?Sized>(p: f64, params: &[(f64, f64)], rng: &mut R) -> (Vec<f64>, Vec<bool>) {
    let mut fr = Vec::with_capacity(params.len());
    let mut skip = Vec::with_capacity(params.len());
    for &(a, b) in params {
        if p < 1.0 && !bernoulli(p, rng) {
            fr.push(0.0);
            skip.push(true);
        } else {
            fr.push(beta_unchecked(a, b, rng));
            skip.push(false);
        }
    }
    let mut w = stick_weights(&fr);
    // Deep-tail weights can underflow; keep them distinguishable from skips.
    for (wk, &s) in w.iter_mut().zip(&skip) {
        if !s && *wk == 0.0 {
            *wk = f64::MIN_POSITIVE;
        }
    }
    (w, skip)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        domain(format!("p must lie in (0, 1], got {p}"))
    }
}

fn group_rows<F>(n_groups: usize, rng: &mut RngHandle, f: F) -> Vec<(Vec<f64>, Vec<bool>)>
where
    F: Fn(usize, &mut RngHandle) -> (Vec<f64>, Vec<bool>) + Sync,
{
    let base = rng.fork();
    (0..n_groups)
        .into_par_iter()
        .map(|j| {
            let mut r = base.substream(j as u64);
            f(j, &mut r)
        })
        .collect()
}

fn assemble(atoms: AtomSet, rows: Vec<(Vec<f64>, Vec<bool>)>) -> ProcessDraw {
    let (group_weights, skip_mask) = rows.into_iter().unzip();
    ProcessDraw { atoms, group_weights, skip_mask }
}

/// Hierarchical Dirichlet process draw.
pub fn simulate_hdp(
    alpha0: f64,
    gamma: f64,
    cfg: &TruncationConfig,
    base: &BaseMeasure,
    rng: &mut RngHandle,
) -> Result<ProcessDraw> {
    simulate_pam(&PSpec::Fixed(vec![1.0; cfg.n_groups]), alpha0, gamma, cfg, base, rng)
}

/// Plaid atoms model draw: top-level GEM(gamma), then one atom-skipping row per group.
pub fn simulate_pam(
    p: &PSpec,
    alpha0: f64,
    gamma: f64,
    cfg: &TruncationConfig,
    base: &BaseMeasure,
    rng: &mut RngHandle,
) -> Result<ProcessDraw> {
    cfg.validate()?;
    ensure_positive("alpha0", alpha0)?;
    ensure_positive("gamma", gamma)?;
    match p {
        PSpec::Fixed(v) => {
            if v.len() != cfg.n_groups {
                return domain("one p per group required");
            }
            v.iter().try_for_each(|&x| check_p(x))?;
        }
        PSpec::Beta { a, b } => {
            ensure_positive("p prior a", *a)?;
            ensure_positive("p prior b", *b)?;
        }
    }
    let atoms = base.sample_n(cfg.n_atoms, rng);
    let beta_prime = gem_fractions(gamma, cfg.n_atoms, rng);
    let params = group_beta_params(alpha0, &beta_prime);
    let rows = group_rows(cfg.n_groups, rng, |j, r| {
        let pj = match p {
            PSpec::Fixed(v) => v[j],
            PSpec::Beta { a, b } => beta_unchecked(*a, *b, r),
        };
        asp_row(pj, &params, r)
    });
    Ok(assemble(atoms, rows))
}

/// Atom-skipping process for a single group given top-level fractions `beta_prime`.
pub fn simulate_asp(
    p: f64,
    alpha0: f64,
    beta_prime: &[f64],
    atoms: &AtomSet,
    rng: &mut RngHandle,
) -> Result<ProcessDraw> {
    check_p(p)?;
    ensure_positive("alpha0", alpha0)?;
    if beta_prime.len() != atoms.len() || beta_prime.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
        return domain("beta_prime must match the atoms and lie in (0, 1)");
    }
    let params = group_beta_params(alpha0, beta_prime);
    let (w, s) = asp_row(p, &params, rng);
    Ok(ProcessDraw { atoms: atoms.clone(), group_weights: vec![w], skip_mask: vec![s] })
}

/// Common atoms model draw: groups pick a distributional cluster from
/// GEM(alpha0); each distributional cluster carries GEM(gamma) weights.
pub fn simulate_cam(
    alpha0: f64,
    gamma: f64,
    cfg: &TruncationConfig,
    base: &BaseMeasure,
    rng: &mut RngHandle,
) -> Result<ProcessDraw> {
    cfg.validate()?;
    ensure_positive("alpha0", alpha0)?;
    ensure_positive("gamma", gamma)?;
    let k = cfg.n_atoms;
    let atoms = base.sample_n(k, rng);
    let outer = stick_weights(&gem_fractions(alpha0, k, rng));
    let assign: Vec<usize> = (0..cfg.n_groups)
        .map(|_| crate::stats::categorical(&outer, rng).expect("positive weights"))
        .collect();
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &a in &assign {
        if !rows.contains_key(&a) {
            rows.insert(a, stick_weights(&gem_fractions(gamma, k, rng)));
        }
    }
    let group_weights: Vec<Vec<f64>> = assign.iter().map(|a| rows[a].clone()).collect();
    let skip_mask = vec![vec![false; k]; cfg.n_groups];
    Ok(ProcessDraw { atoms, group_weights, skip_mask })
}

/// Fractional stick-breaking draw: `pi_k = p pi'_k prod_{l<k} (1 - p pi'_l)`.
pub fn simulate_fsbp(
    p: f64,
    gamma: f64,
    k: usize,
    base: &BaseMeasure,
    rng: &mut RngHandle,
) -> Result<ProcessDraw> {
    check_p(p)?;
    ensure_positive("gamma", gamma)?;
    if k == 0 {
        return domain("need at least one atom");
    }
    let atoms = base.sample_n(k, rng);
    let fr: Vec<f64> = (0..k).map(|_| p * beta_unchecked(1.0, gamma, rng)).collect();
    Ok(ProcessDraw { atoms, group_weights: vec![stick_weights(&fr)], skip_mask: vec![vec![false; k]] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub per_group_counts: Vec<usize>,
    pub total_count: usize,
    /// Atom index to share of all observations.
    pub overall_sizes: BTreeMap<usize, f64>,
    /// Atom index to share of the group's observations.
    pub group_sizes: Vec<BTreeMap<usize, f64>>,
}

impl ClusterStats {
    pub fn mean_per_group(&self) -> f64 {
        let n = self.per_group_counts.len() as f64;
        self.per_group_counts.iter().sum::<usize>() as f64 / n
    }

    pub fn sd_per_group(&self) -> f64 {
        let n = self.per_group_counts.len() as f64;
        let m = self.mean_per_group();
        let ss: f64 = self.per_group_counts.iter().map(|&c| (c as f64 - m).powi(2)).sum();
        (ss / (n - 1.0).max(1.0)).sqrt()
    }
}

/// Labels drawn from a weight row; mass beyond the truncation is redrawn.
fn draw_labels<R: Rng + ?Sized>(row: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let mut cum = Vec::with_capacity(row.len());
    let mut acc = 0.0;
    for &w in row {
        acc += w;
        cum.push(acc);
    }
    (0..n)
        .map(|_| {
            let t = rng.random::<f64>() * acc;
            let k = cum.partition_point(|&c| c <= t);
            let mut k = k.min(row.len() - 1);
            while k > 0 && row[k] == 0.0 {
                k -= 1;
            }
            k
        })
        .collect()
}

/// Sample `n_obs` labels per group and summarize the occupied atoms.
pub fn cluster_stats(draw: &ProcessDraw, n_obs: usize, rng: &mut RngHandle) -> ClusterStats {
    let base = rng.fork();
    let groups: Vec<BTreeMap<usize, usize>> = draw
        .group_weights
        .par_iter()
        .enumerate()
        .map(|(j, row)| {
            let mut r = base.substream(j as u64);
            let mut counts = BTreeMap::new();
            for k in draw_labels(row, n_obs, &mut r) {
                *counts.entry(k).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut overall: BTreeMap<usize, usize> = BTreeMap::new();
    for g in &groups {
        for (&k, &c) in g {
            *overall.entry(k).or_insert(0) += c;
        }
    }
    let total_obs = (n_obs * groups.len()).max(1) as f64;
    ClusterStats {
        per_group_counts: groups.iter().map(BTreeMap::len).collect(),
        total_count: overall.len(),
        overall_sizes: overall.iter().map(|(&k, &c)| (k, c as f64 / total_obs)).collect(),
        group_sizes: groups
            .iter()
            .map(|g| g.iter().map(|(&k, &c)| (k, c as f64 / n_obs.max(1) as f64)).collect())
            .collect(),
    }
}

/// Monte Carlo estimate of the probability that one draw from group 0 and
/// one from group 1 land on the same atom, pooling over `draws`.
pub fn cross_group_coincidence(
    draws: &[ProcessDraw],
    n_pairs: usize,
    rng: &mut RngHandle,
) -> Result<f64> {
    if draws.is_empty() || draws.iter().any(|d| d.n_groups() < 2) {
        return domain("need draws with at least two groups");
    }
    let mut hits = 0usize;
    for t in 0..n_pairs {
        let d = &draws[t % draws.len()];
        let a = draw_labels(&d.group_weights[0], 1, rng)[0];
        let b = draw_labels(&d.group_weights[1], 1, rng)[0];
        hits += usize::from(a == b);
    }
    Ok(hits as f64 / n_pairs.max(1) as f64)
}

/// Processes compared in the prior clustering experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PriorProcess {
    Cam,
    Hdp,
    Pam { a: f64, b: f64 },
}

impl PriorProcess {
    pub fn simulate(
        &self,
        alpha0: f64,
        gamma: f64,
        cfg: &TruncationConfig,
        base: &BaseMeasure,
        rng: &mut RngHandle,
    ) -> Result<ProcessDraw> {
        match *self {
            PriorProcess::Cam => simulate_cam(alpha0, gamma, cfg, base, rng),
            PriorProcess::Hdp => simulate_hdp(alpha0, gamma, cfg, base, rng),
            PriorProcess::Pam { a, b } => {
                simulate_pam(&PSpec::Beta { a, b }, alpha0, gamma, cfg, base, rng)
            }
        }
    }
}

/// Replicate-averaged cluster statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSummary {
    pub replicates: usize,
    /// Per replicate: mean and SD of per-group counts, total count.
    pub per_replicate: Vec<(f64, f64, usize)>,
    pub mean_per_group: f64,
    pub mean_sd_per_group: f64,
    pub mean_total: f64,
    pub se_mean_per_group: f64,
    pub se_mean_total: f64,
}

/// Replicate `r` of the prior clustering experiment under `seed`.
pub fn prior_replicate(
    process: PriorProcess,
    alpha0: f64,
    gamma: f64,
    cfg: &TruncationConfig,
    seed: u64,
    r: usize,
) -> Result<ClusterStats> {
    let mut rng = RngHandle::new(seed, r as u64);
    let draw = process.simulate(alpha0, gamma, cfg, &BaseMeasure::standard(), &mut rng)?;
    Ok(cluster_stats(&draw, cfg.n_obs_per_group, &mut rng))
}

/// Run the prior clustering experiment `replicates` times from one seed.
pub fn prior_experiment(
    process: PriorProcess,
    alpha0: f64,
    gamma: f64,
    cfg: &TruncationConfig,
    replicates: usize,
    seed: u64,
) -> Result<PriorSummary> {
    if replicates == 0 {
        return domain("need at least one replicate");
    }
    let mut per_replicate = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let st = prior_replicate(process, alpha0, gamma, cfg, seed, r)?;
        per_replicate.push((st.mean_per_group(), st.sd_per_group(), st.total_count));
    }
    let n = replicates as f64;
    let mean = |f: &dyn Fn(&(f64, f64, usize)) -> f64| per_replicate.iter().map(f).sum::<f64>() / n;
    let m_pg = mean(&|x| x.0);
    let m_tot = mean(&|x| x.2 as f64);
    let se = |f: &dyn Fn(&(f64, f64, usize)) -> f64, m: f64| {
        if replicates < 2 {
            return f64::NAN;
        }
        let v = per_replicate.iter().map(|x| (f(x) - m).powi(2)).sum::<f64>() / (n - 1.0);
        (v / n).sqrt()
    };
    Ok(PriorSummary {
        replicates,
        mean_per_group: m_pg,
        mean_sd_per_group: mean(&|x| x.1),
        mean_total: m_tot,
        se_mean_per_group: se(&|x| x.0, m_pg),
        se_mean_total: se(&|x| x.2 as f64, m_tot),
        per_replicate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gem_k1() {
        let mut rng = RngHandle::new(1, 0);
        let w = sample_gem(1.0, 1, &mut rng).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0] > 0.0 && w[0] < 1.0);
        assert!(sample_gem(0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn single_atom_stats() {
        let draw = ProcessDraw {
            atoms: BaseMeasure::standard().sample_n(1, &mut RngHandle::new(0, 0)),
            group_weights: vec![vec![1.0]],
            skip_mask: vec![vec![false]],
        };
        let st = cluster_stats(&draw, 50, &mut RngHandle::new(2, 0));
        assert_eq!(st.per_group_counts, vec![1]);
        assert_eq!(st.total_count, 1);
    }

    #[test]
    fn disjoint_masks_never_coincide() {
        let atoms = BaseMeasure::standard().sample_n(2, &mut RngHandle::new(0, 0));
        let d = ProcessDraw {
            atoms,
            group_weights: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            skip_mask: vec![vec![false, true], vec![true, false]],
        };
        let est = cross_group_coincidence(&[d], 1000, &mut RngHandle::new(3, 0)).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn domain_checks() {
        let mut rng = RngHandle::new(4, 0);
        let base = BaseMeasure::standard();
        assert!(simulate_fsbp(1.5, 1.0, 10, &base, &mut rng).is_err());
        assert!(simulate_fsbp(0.0, 1.0, 10, &base, &mut rng).is_err());
        let atoms = base.sample_n(3, &mut rng);
        assert!(simulate_asp(0.0, 1.0, &[0.5, 0.5, 0.5], &atoms, &mut rng).is_err());
    }
}
