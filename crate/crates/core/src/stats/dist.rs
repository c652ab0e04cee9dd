//! Scalar variates used by the simulators and samplers.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

use crate::error::{ensure_positive, Result};

/// Uniform draw on the open interval (0, 1).
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Log of a Gamma(shape, 1) variate; stays finite for very small shapes.
pub(crate) fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("shape+1 > 1").sample(rng);
        g.ln() + open01(rng).ln() / shape
    } else {
        let g: f64 = Gamma::new(shape, 1.0).expect("shape >= 1").sample(rng);
        g.ln()
    }
}

/// Gamma draw with shape/rate convention (mean `shape / rate`).
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    ensure_positive("gamma shape", shape)?;
    ensure_positive("gamma rate", rate)?;
    let g: f64 = Gamma::new(shape, 1.0 / rate).expect("validated").sample(rng);
    Ok(g.max(f64::MIN_POSITIVE))
}

/// Beta(a, b) draw, returned strictly inside (0, 1).
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    ensure_positive("beta a", a)?;
    ensure_positive("beta b", b)?;
    Ok(beta_unchecked(a, b, rng))
}

pub(crate) fn beta_unchecked<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let lx = ln_gamma_variate(a, rng);
    let ly = ln_gamma_variate(b, rng);
    let x = 1.0 / (1.0 + (ly - lx).exp());
    x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Bernoulli draw; `prob` is clamped into [0, 1].
pub fn bernoulli<R: Rng + ?Sized>(prob: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < prob.clamp(0.0, 1.0)
}

/// Index drawn with probability proportional to `weights`.
///
/// Returns `None` when all weights are zero.
pub fn categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut t = rng.random::<f64>() * total;
    let mut last = None;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if t < w {
                return Some(k);
            }
            t -= w;
            last = Some(k);
        }
    }
    last
}

/// Index drawn from unnormalized log weights (`-inf` entries excluded).
pub fn categorical_log<R: Rng + ?Sized>(logw: &[f64], rng: &mut R) -> Option<usize> {
    let mx = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY || mx.is_nan() {
        return None;
    }
    let w: Vec<f64> = logw.iter().map(|&l| (l - mx).exp()).collect();
    categorical(&w, rng)
}

/// Log density of Beta(a, b) at x.
pub fn ln_beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - statrs::function::beta::ln_beta(a, b)
}

/// Log density of Gamma(shape, rate) at x.
pub fn ln_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - statrs::function::gamma::ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}
