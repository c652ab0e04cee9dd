//! Closed-form results for the skipping priors and their Monte Carlo oracles.

mod eppf;
mod oracle;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_positive, Result};
use crate::stats::{hyp2f1_terminating_exact, rational_from_f64};

pub use eppf::{dp_eppf, fsbp_eppf, fsbp_eppf_with, EppfForm, MAX_EPPF_BLOCKS};
pub use oracle::{
    eppf_mc_oracle, fsbp_set_mass_mc, new_cluster_mc, new_cluster_recursive, FsbpSticks, MeanVarEstimate,
    NewClusterEstimate,
};

/// Parameters of a fractional stick-breaking process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsbpParams {
    pub p: f64,
    pub gamma: f64,
}

impl FsbpParams {
    pub fn new(p: f64, gamma: f64) -> Result<Self> {
        let s = Self { p, gamma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return domain(format!("p must lie in (0, 1], got {}", self.p));
        }
        ensure_positive("gamma", self.gamma)
    }
}

/// Prior mean of the k-th group weight under PAM with `p ~ Beta(a, b)` (k >= 1).
pub fn expected_pam_weight(k: usize, gamma: f64, a: f64, b: f64) -> Result<f64> {
    if k == 0 {
        return domain("atom index starts at 1");
    }
    ensure_positive("gamma", gamma)?;
    ensure_positive("a", a)?;
    ensure_positive("b", b)?;
    let pbar = a / (a + b);
    let g = (1.0 + gamma - pbar) / pbar;
    Ok((1.0 / (1.0 + g)) * (g / (1.0 + g)).powi(k as i32 - 1))
}

/// Mean of the k-th weight given top-level fractions and skip probability.
pub fn conditional_mean_weight(k: usize, beta_prime: &[f64], p: f64) -> Result<f64> {
    if k == 0 || k > beta_prime.len() {
        return domain(format!("atom index {k} outside 1..={}", beta_prime.len()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("p must lie in (0, 1], got {p}"));
    }
    if beta_prime[..k].iter().any(|&b| !(b > 0.0 && b < 1.0)) {
        return domain("beta_prime entries must lie in (0, 1)");
    }
    let rest: f64 = beta_prime[..k - 1].iter().map(|&b| 1.0 - p * b).product();
    Ok(p * beta_prime[k - 1] * rest)
}

/// Mean and variance of `G(A)` for an FSBP random measure with `H(A) = h_a`.
pub fn fsbp_mean_and_variance(h_a: f64, params: &FsbpParams) -> Result<(f64, f64)> {
    params.validate()?;
    if !(0.0..=1.0).contains(&h_a) {
        return domain(format!("H(A) must lie in [0, 1], got {h_a}"));
    }
    let v = (1.0 + params.gamma) / params.p + (1.0 - params.p) / params.p;
    Ok((h_a, h_a * (1.0 - h_a) / v))
}

/// Probability that the i-th draw (i >= 2) from an FSBP measure is new.
///
/// The alternating sum cancels badly in floating point for moderate `i`, so
/// it is evaluated in exact rational arithmetic from the shortest decimal
/// forms of `p` and `gamma`.
pub fn fsbp_new_cluster_prob(i: usize, params: &FsbpParams) -> Result<f64> {
    params.validate()?;
    if i < 2 {
        return domain("the new-cluster probability is defined for i >= 2");
    }
    let p = rational_from_f64(params.p);
    let g = rational_from_f64(params.gamma);
    Ok(new_cluster_exact(i, &p, &g).to_f64().unwrap_or(f64::NAN))
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn new_cluster_exact(i: usize, p: &BigRational, g: &BigRational) -> BigRational {
    let one = BigRational::one();
    let c = g + int(2);
    let mut sum = BigRational::zero();
    // Running pieces: binom(i-1, k-1), (k-1)!, prod_{l<=k}(l+g), p^{k-1}.
    let mut binom = int(1);
    let mut fact = int(1);
    let mut prod = &one + g;
    let mut pk = one.clone();
    for k in 2..=i as u64 {
        binom = binom * int(i as u64 - k + 1) / int(k - 1);
        fact *= int(k - 1);
        prod *= int(k) + g;
        pk *= p;
        // 2F1(1, 1-k; g+2; p): terminating in the second slot.
        let f = hyp2f1_terminating_exact(k - 1, &one, &c, p);
        let term = &binom * &fact / &prod * (g + &one) * &pk / f;
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    one - sum
}

/// Expected number of clusters among `n` draws from an FSBP measure.
pub fn fsbp_expected_clusters(n: usize, params: &FsbpParams) -> Result<f64> {
    params.validate()?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let mut e = 1.0;
    for i in 2..=n {
        e += fsbp_new_cluster_prob(i, params)?;
    }
    Ok(e)
}

/// Expected number of clusters among `n` draws from a DP with concentration `gamma`.
pub fn dp_expected_clusters(n: usize, gamma: f64) -> Result<f64> {
    ensure_positive("gamma", gamma)?;
    Ok((1..=n).map(|i| gamma / (gamma + i as f64 - 1.0)).sum())
}

/// True when `fsbp_new_cluster_prob(i) > gamma / (gamma + i - 1)` holds exactly.
pub fn new_cluster_dominates_dp(i: usize, params: &FsbpParams) -> Result<bool> {
    params.validate()?;
    if i < 2 {
        return domain("i >= 2 required");
    }
    let p = rational_from_f64(params.p);
    let g = rational_from_f64(params.gamma);
    let lhs = new_cluster_exact(i, &p, &g);
    let dp = &g / (&g + int(i as u64 - 1));
    Ok((lhs - dp).is_positive())
}
