//! Slice samplers for plaid-atoms and fractional stick-breaking mixtures.
//!
//! Both samplers follow the slice-efficient scheme with deterministic slice
//! levels `xi_k = (1 - zeta) zeta^(k-1)`. A sweep instantiates exactly the
//! atoms whose level exceeds the smallest slice variable, so the number of
//! active atoms changes from sweep to sweep.

mod fsbp;
mod init;
mod kernel;
mod pam;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{AtomSet, BaseMeasure};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::stats::{NigParams, NiwParams};

pub use fsbp::{run_dp_chain, run_fsbp_chain, FsbpChainState, FsbpConfig, FsbpSampler};
pub use kernel::{count_bin, count_mass, ln_count_prob};
pub use pam::{run_chain, run_chains, PamSampler, PamState};

/// Observation model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    Univariate,
    Multivariate(usize),
    Count,
}

/// How the concentration parameters are refreshed each sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConcentrationUpdate {
    /// `gamma` from its conjugate Gamma given the instantiated top-level
    /// fractions; `alpha0` by a log-scale random-walk Metropolis step given
    /// the nonzero group fractions.
    StickConditional,
    /// Latent table counts followed by auxiliary-variable Gamma updates, as
    /// in the direct-assignment HDP sampler. Only approximate here because
    /// the group fractions are instantiated.
    Tables,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PamConfig {
    pub kernel: Kernel,
    pub base: BaseMeasure,
    /// Beta prior on each `p_j`.
    pub p_prior: (f64, f64),
    /// Gamma (shape, rate) priors.
    pub alpha0_prior: (f64, f64),
    pub gamma_prior: (f64, f64),
    pub zeta: f64,
    pub mh_eps: f64,
    pub burn_in: usize,
    pub n_keep: usize,
    pub thin: usize,
    pub seed: u64,
    /// Stream id, distinct per chain.
    pub stream: u64,
    /// Count kernel scale factors, one per group.
    pub eta: Option<Vec<f64>>,
    pub fixed_p: Option<Vec<f64>>,
    pub fixed_alpha0: Option<f64>,
    pub fixed_gamma: Option<f64>,
    /// Leading top-level fractions held at these values.
    pub fixed_beta_prime: Option<Vec<f64>>,
    /// Leading atoms held at these values.
    pub fixed_atoms: Option<AtomSet>,
    pub concentration: ConcentrationUpdate,
    pub init_clusters: usize,
    pub record_latent: bool,
}

impl PamConfig {
    fn with_base(kernel: Kernel, base: BaseMeasure) -> Self {
        Self {
            kernel,
            base,
            p_prior: (0.5, 0.5),
            alpha0_prior: (3.0, 3.0),
            gamma_prior: (3.0, 3.0),
            zeta: 0.5,
            mh_eps: 0.1,
            burn_in: 10_000,
            n_keep: 10_000,
            thin: 1,
            seed: 1,
            stream: 0,
            eta: None,
            fixed_p: None,
            fixed_alpha0: None,
            fixed_gamma: None,
            fixed_beta_prime: None,
            fixed_atoms: None,
            concentration: ConcentrationUpdate::StickConditional,
            init_clusters: 10,
            record_latent: false,
        }
    }

    pub fn univariate(base: NigParams) -> Self {
        Self::with_base(Kernel::Univariate, BaseMeasure::Nig(base))
    }

    pub fn multivariate(base: NiwParams) -> Self {
        let q = base.dim();
        Self::with_base(Kernel::Multivariate(q), BaseMeasure::Niw(base))
    }

    pub fn count(base: NigParams) -> Self {
        Self::with_base(Kernel::Count, BaseMeasure::Nig(base))
    }

    /// Hierarchical DP special case: every `p_j` fixed at one.
    pub fn hdp(mut self, n_groups: usize) -> Self {
        self.fixed_p = Some(vec![1.0; n_groups]);
        self
    }

    pub fn iterations(mut self, burn_in: usize, n_keep: usize) -> Self {
        self.burn_in = burn_in;
        self.n_keep = n_keep;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        self.base.validate().map_err(|e| Error::Validation(e.to_string()))?;
        match (self.kernel, &self.base) {
            (Kernel::Univariate | Kernel::Count, BaseMeasure::Nig(_)) => {}
            (Kernel::Multivariate(q), BaseMeasure::Niw(p)) if q == p.dim() => {}
            _ => return bad("kernel does not match the base measure".into()),
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return bad(format!("zeta must lie in (0, 1), got {}", self.zeta));
        }
        if !(self.mh_eps > 0.0 && self.mh_eps < 1.0) {
            return bad(format!("MH step must lie in (0, 1), got {}", self.mh_eps));
        }
        if self.thin == 0 {
            return bad("thin must be at least 1".into());
        }
        for (name, (a, b)) in
            [("p prior", self.p_prior), ("alpha0 prior", self.alpha0_prior), ("gamma prior", self.gamma_prior)]
        {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return bad(format!("{name} parameters must be positive"));
            }
        }
        if let Some(p) = &self.fixed_p {
            if p.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
                return bad("fixed p values must lie in (0, 1]".into());
            }
        }
        for (name, v) in [("alpha0", self.fixed_alpha0), ("gamma", self.fixed_gamma)] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return bad(format!("fixed {name} must be positive"));
                }
            }
        }
        if let Some(b) = &self.fixed_beta_prime {
            if b.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                return bad("fixed top-level fractions must lie in (0, 1)".into());
            }
        }
        if self.init_clusters == 0 {
            return bad("init_clusters must be at least 1".into());
        }
        if self.eta.is_some() && self.kernel != Kernel::Count {
            return bad("scale factors apply to the count kernel only".into());
        }
        Ok(())
    }
}

/// Accepted and proposed Metropolis moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub accepted: u64,
    pub proposed: u64,
}

impl Rate {
    pub fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub beta_prime: Rate,
    pub pi_prime: Rate,
    pub p: Rate,
    pub alpha0: Rate,
}

/// Kept draws of one chain.
///
/// Labels are global atom indices (0-based) over observations in
/// group-major order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub model: String,
    pub group_sizes: Vec<usize>,
    pub iterations: Vec<usize>,
    pub z: Vec<Vec<usize>>,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub atoms: Vec<AtomSet>,
    pub p: Vec<Vec<f64>>,
    pub alpha0: Vec<f64>,
    pub gamma: Vec<f64>,
    pub log_joint: Vec<f64>,
    pub latent_y: Vec<Vec<f64>>,
    pub acceptance: Acceptance,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn n_obs(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn n_groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn partition(&self, t: usize) -> Partition {
        Partition::from_labels(&self.z[t])
    }

    /// Labels of group `j` at kept draw `t`.
    pub fn group_labels(&self, t: usize, j: usize) -> &[usize] {
        let start: usize = self.group_sizes[..j].iter().sum();
        &self.z[t][start..start + self.group_sizes[j]]
    }

    /// Number of distinct labels at each kept draw.
    pub fn cluster_counts(&self) -> Vec<usize> {
        (0..self.len()).map(|t| self.partition(t).n_blocks()).collect()
    }

    /// Number of exact-zero weights across all kept draws.
    pub fn zero_weight_count(&self) -> usize {
        self.weights.iter().flatten().flatten().filter(|&&w| w == 0.0).count()
    }
}

/// Slice level of atom `k` (0-based).
pub fn xi(zeta: f64, k: usize) -> f64 {
    (1.0 - zeta) * zeta.powi(k as i32)
}

/// Number of atoms whose slice level exceeds `min_u`, at least one.
pub fn active_atoms(zeta: f64, min_u: f64) -> usize {
    if !(min_u > 0.0) || !min_u.is_finite() {
        return 1;
    }
    let guess = ((min_u / (1.0 - zeta)).ln() / zeta.ln()).ceil().max(0.0) as usize;
    let mut k = guess;
    while xi(zeta, k) > min_u {
        k += 1;
    }
    while k > 0 && xi(zeta, k - 1) <= min_u {
        k -= 1;
    }
    k.max(1)
}

/// Reflected uniform proposal on (0, 1).
pub fn reflect(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else if x > 1.0 {
        2.0 - x
    } else {
        x
    }
}

pub(crate) fn propose_reflected<R: Rng + ?Sized>(cur: f64, eps: f64, rng: &mut R) -> f64 {
    reflect(cur + eps * (2.0 * rng.random::<f64>() - 1.0))
}

pub(crate) fn mh_accept<R: Rng + ?Sized>(ln_ratio: f64, rng: &mut R) -> bool {
    ln_ratio >= 0.0 || crate::stats::open01(rng).ln() < ln_ratio
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_count() {
        assert_eq!(active_atoms(0.5, 0.1), 3);
        assert_eq!(active_atoms(0.5, 0.3), 1);
        assert_eq!(active_atoms(0.5, 0.125), 2);
        assert_eq!(active_atoms(0.5, 0.49), 1);
        assert_eq!(active_atoms(0.5, f64::INFINITY), 1);
        for &z in &[0.3, 0.5, 0.8] {
            for &u in &[1e-9, 1e-4, 0.01, 0.15] {
                let k = active_atoms(z, u);
                assert!(xi(z, k - 1) > u && xi(z, k) <= u);
            }
        }
    }

    #[test]
    fn reflection() {
        assert!((reflect(-0.05) - 0.05).abs() < 1e-15);
        assert!((reflect(1.03) - 0.97).abs() < 1e-12);
        assert_eq!(reflect(0.4), 0.4);
    }
}
