//! Simulation counterparts of the closed forms.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::partition::Partition;
use crate::stats::{beta_unchecked, ln_beta, ln_gamma, RngHandle};

use super::FsbpParams;

/// FSBP weights generated on demand, so draws are exact rather than truncated.
pub struct FsbpSticks {
    params: FsbpParams,
    weights: Vec<f64>,
    cum: Vec<f64>,
    rest: f64,
}

impl FsbpSticks {
    pub fn new(params: FsbpParams) -> Self {
        Self { params, weights: Vec::new(), cum: Vec::new(), rest: 1.0 }
    }

    fn extend<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let f = self.params.p * beta_unchecked(1.0, self.params.gamma, rng);
        let w = f * self.rest;
        self.rest *= 1.0 - f;
        let c = self.cum.last().copied().unwrap_or(0.0) + w;
        self.weights.push(w);
        self.cum.push(c);
    }

    /// Atom index of one draw from the measure.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let u = rng.random::<f64>();
        loop {
            let k = self.cum.partition_point(|&c| c <= u);
            if k < self.cum.len() {
                return k;
            }
            if self.rest == 0.0 {
                // Floating-point exhaustion; the remaining mass is below 1 ulp.
                return self.cum.len() - 1;
            }
            self.extend(rng);
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights generated until the unallocated mass is below `tol`.
    pub fn fill_to<R: Rng + ?Sized>(&mut self, tol: f64, rng: &mut R) {
        while self.rest > tol {
            self.extend(rng);
        }
    }
}

fn chunks(n: usize) -> Vec<(u64, usize)> {
    const CHUNK: usize = 20_000;
    (0..n.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(n - c * CHUNK)))
        .collect()
}

/// Empirical partition frequencies of `n` FSBP draws over `n_sims` replicates.
pub fn eppf_mc_oracle(
    n: usize,
    params: &FsbpParams,
    n_sims: usize,
    rng: &mut RngHandle,
) -> Result<BTreeMap<Partition, f64>> {
    params.validate()?;
    if n == 0 || n > 8 {
        return domain("the partition oracle supports 1 <= n <= 8");
    }
    let base = rng.fork();
    let counts: Vec<BTreeMap<Partition, usize>> = chunks(n_sims)
        .into_par_iter()
        .map(|(c, len)| {
            let mut r = base.substream(c);
            let mut m = BTreeMap::new();
            let mut labels = vec![0usize; n];
            for _ in 0..len {
                let mut s = FsbpSticks::new(*params);
                for l in labels.iter_mut() {
                    *l = s.draw(&mut r);
                }
                *m.entry(Partition::from_labels(&labels)).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let mut total: BTreeMap<Partition, usize> = BTreeMap::new();
    for m in counts {
        for (k, v) in m {
            *total.entry(k).or_insert(0) += v;
        }
    }
    Ok(total.into_iter().map(|(k, v)| (k, v as f64 / n_sims as f64)).collect())
}

/// Frequencies of a new value at draws 2..=i_max, with binomial standard errors.
#[derive(Clone, Debug)]
pub struct NewClusterEstimate {
    /// Entry `t` refers to draw `t + 2`.
    pub freq: Vec<f64>,
    pub se: Vec<f64>,
}

/// Sequential-sampling estimate of the new-cluster probabilities.
pub fn new_cluster_mc(
    i_max: usize,
    params: &FsbpParams,
    n_sims: usize,
    rng: &mut RngHandle,
) -> Result<NewClusterEstimate> {
    params.validate()?;
    if i_max < 2 {
        return domain("i_max >= 2 required");
    }
    let base = rng.fork();
    let hits: Vec<Vec<usize>> = chunks(n_sims)
        .into_par_iter()
        .map(|(c, len)| {
            let mut r = base.substream(c);
            let mut h = vec![0usize; i_max - 1];
            let mut seen = Vec::with_capacity(i_max);
            for _ in 0..len {
                let mut s = FsbpSticks::new(*params);
                seen.clear();
                seen.push(s.draw(&mut r));
                for t in 0..i_max - 1 {
                    let k = s.draw(&mut r);
                    if !seen.contains(&k) {
                        h[t] += 1;
                    }
                    seen.push(k);
                }
            }
            h
        })
        .collect();
    let n = n_sims as f64;
    let freq: Vec<f64> = (0..i_max - 1)
        .map(|t| hits.iter().map(|h| h[t]).sum::<usize>() as f64 / n)
        .collect();
    let se = freq.iter().map(|&f| (f * (1.0 - f) / n).sqrt()).collect();
    Ok(NewClusterEstimate { freq, se })
}

/// Sample mean and variance with standard errors.
#[derive(Clone, Copy, Debug)]
pub struct MeanVarEstimate {
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
}

/// Simulated `G(A)` where each atom falls in `A` independently with probability `h_a`.
pub fn fsbp_set_mass_mc(
    h_a: f64,
    params: &FsbpParams,
    n_sims: usize,
    rng: &mut RngHandle,
) -> Result<MeanVarEstimate> {
    params.validate()?;
    if !(0.0..=1.0).contains(&h_a) || n_sims < 2 {
        return domain("need H(A) in [0, 1] and at least two simulations");
    }
    let xs: Vec<f64> = (0..n_sims)
        .map(|_| {
            let mut s = FsbpSticks::new(*params);
            s.fill_to(1e-14, rng);
            s.weights().iter().filter(|_| rng.random::<f64>() < h_a).sum()
        })
        .collect();
    let n = n_sims as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let dev2: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = dev2.iter().sum::<f64>() / (n - 1.0);
    let var_of_dev2 = dev2.iter().map(|d| (d - var).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeanVarEstimate {
        mean,
        var,
        se_mean: (var / n).sqrt(),
        se_var: (var_of_dev2 / n).sqrt(),
    })
}

/// `ln E[f^a (1 - f)^b]` for `f = p V`, `V ~ Beta(1, gamma)`, as a sum of
/// nonnegative binomial-weighted terms.
fn ln_fraction_moment(a: usize, b: usize, p: f64, gamma: f64) -> f64 {
    let c = 1.0 + a as f64 + gamma;
    let lnp = p.ln();
    let ln1p = (-p).ln_1p();
    let head = gamma.ln() + ln_beta(1.0 + a as f64, gamma) + a as f64 * lnp;
    let mut terms = Vec::with_capacity(b + 1);
    for l in 0..=b {
        let rest = (b - l) as f64;
        if rest > 0.0 && p >= 1.0 {
            continue;
        }
        let lf = l as f64;
        let binom = ln_gamma(b as f64 + 1.0) - ln_gamma(lf + 1.0) - ln_gamma(rest + 1.0);
        let rising = ln_gamma(gamma + lf) - ln_gamma(gamma) - (ln_gamma(c + lf) - ln_gamma(c));
        let pw = if l == 0 { 0.0 } else { lf * lnp };
        let qw = if rest == 0.0 { 0.0 } else { rest * ln1p };
        terms.push(binom + rising + pw + qw);
    }
    head + log_sum_exp(&terms)
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// New-cluster probabilities for draws `2..=i_max` from the first-stick
/// recursion, which only adds nonnegative terms.
pub fn new_cluster_recursive(i_max: usize, params: &FsbpParams) -> Result<Vec<f64>> {
    params.validate()?;
    if i_max < 2 {
        return domain("i_max >= 2 required");
    }
    let (p, g) = (params.p, params.gamma);
    let ln_choose = |n: usize, k: usize| {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    };
    // ln h[n]: probability that a draw is new after n earlier draws.
    let mut ln_h = vec![0.0f64];
    for n in 1..i_max {
        let mut terms = vec![ln_fraction_moment(1, n, p, g)];
        for (m, &lh) in ln_h.iter().enumerate() {
            terms.push(ln_choose(n, m) + ln_fraction_moment(n - m, m + 1, p, g) + lh);
        }
        let stay = ln_fraction_moment(0, n + 1, p, g).exp();
        ln_h.push(log_sum_exp(&terms) - (1.0 - stay).ln());
    }
    Ok(ln_h[1..].iter().map(|x| x.exp()).collect())
}
